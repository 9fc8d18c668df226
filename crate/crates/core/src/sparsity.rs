//! The sparse set `S = {N_i + N_j : i < j}` and diagnostics for its growth
//! and for the basis conditions.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::radix::RadixBasis;

/// Sorted sums of two distinct prefix products up to a horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseSet {
    horizon: BigUint,
    elements: Vec<BigUint>,
    /// One-indexed pair `(a, b)` with element `N_{a-1} + N_{b-1}`.
    pairs: Vec<(usize, usize)>,
}

impl SparseSet {
    pub fn horizon(&self) -> &BigUint {
        &self.horizon
    }

    pub fn elements(&self) -> &[BigUint] {
        &self.elements
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigUint, (usize, usize))> {
        self.elements.iter().zip(self.pairs.iter().copied())
    }

    pub fn contains(&self, n: &BigUint) -> bool {
        self.elements.binary_search(n).is_ok()
    }

    /// JSON array of decimal strings.
    pub fn to_json(&self) -> String {
        let strings: Vec<String> = self.elements.iter().map(|e| e.to_string()).collect();
        serde_json::to_string(&strings).expect("plain JSON")
    }

    pub fn from_json(text: &str) -> Result<Vec<BigUint>> {
        let strings: Vec<String> =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        strings
            .iter()
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("{s:?} is not an integer"))))
            .collect()
    }
}

/// Largest horizon for which `basis` lists every prefix product that can
/// contribute. The next (unknown) prefix product is at least
/// `N_K (M_K + 3)` because moduli are increasing multiples of 3.
pub fn certified_horizon(basis: &RadixBasis) -> BigUint {
    let k = basis.len();
    basis.prefix(k) * (basis.modulus(k) + 3)
}

fn check_horizon(basis: &RadixBasis, horizon: &BigUint) -> Result<()> {
    if horizon >= &certified_horizon(basis) {
        return Err(Error::BasisTooShort {
            horizon: horizon.to_string(),
            len: basis.len(),
        });
    }
    Ok(())
}

/// All elements of `S` that are `<= horizon`.
pub fn enumerate_s(basis: &RadixBasis, horizon: &BigUint) -> Result<SparseSet> {
    check_horizon(basis, horizon)?;
    let prefixes = basis.prefixes();
    let mut rows: Vec<(BigUint, (usize, usize))> = Vec::new();
    for j in 1..prefixes.len() {
        if &prefixes[j] >= horizon {
            break;
        }
        for i in 0..j {
            let s = &prefixes[i] + &prefixes[j];
            if &s > horizon {
                break;
            }
            rows.push((s, (i + 1, j + 1)));
        }
    }
    rows.sort();
    let (elements, pairs) = rows.into_iter().unzip();
    Ok(SparseSet {
        horizon: horizon.clone(),
        elements,
        pairs,
    })
}

/// `|S[horizon]|` by counting, without materializing the set.
pub fn count_s(basis: &RadixBasis, horizon: &BigUint) -> Result<usize> {
    check_horizon(basis, horizon)?;
    let prefixes = basis.prefixes();
    let mut count = 0;
    for j in 1..prefixes.len() {
        if &prefixes[j] >= horizon {
            break;
        }
        let room = horizon - &prefixes[j];
        count += prefixes[..j].partition_point(|p| *p <= room);
    }
    Ok(count)
}

/// Natural logarithm of an arbitrary-size integer.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn binom2(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub k: usize,
    pub n_k: String,
    pub count: usize,
    /// `|S[N_k]| / ln N_k`.
    pub ratio: f64,
    /// Largest `k'` with `N_{k'} <= N_k / 2`.
    pub bound_level: usize,
    pub bound: usize,
    pub bound_holds: bool,
}

/// Rows `(k, N_k, |S[N_k]|, |S[N_k]| / ln N_k)` together with the lower bound
/// `|S[N]| >= C(k', 2)`, `k'` maximal with `N_{k'} <= N/2`.
pub fn growth_diagnostic(
    basis: &RadixBasis,
    levels: std::ops::RangeInclusive<usize>,
) -> Result<Vec<GrowthRow>> {
    let mut rows = Vec::new();
    for k in levels {
        basis.check_level(k)?;
        let n = basis.prefix(k);
        let count = count_s(basis, n)?;
        let half = n / 2u32;
        let bound_level = basis
            .prefixes()
            .iter()
            .rposition(|p| *p <= half)
            .unwrap_or(0);
        let bound = binom2(bound_level);
        let ln = ln_big(n);
        rows.push(GrowthRow {
            k,
            n_k: n.to_string(),
            count,
            ratio: if ln > 0.0 { count as f64 / ln } else { 0.0 },
            bound_level,
            bound,
            bound_holds: count >= bound,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    /// Holds for the whole infinite rule, by a closed form.
    ExactCertificate,
    /// Only the finite prefix was checked.
    FiniteEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisConditionReport {
    pub levels: usize,
    pub moduli: Vec<u64>,
    pub multiples_of_three: bool,
    /// `k^-2 sum_{i<=k} ln M_i` for `k = 1..=K`.
    pub log_growth: Vec<f64>,
    pub log_growth_decreasing: bool,
    pub log_growth_certainty: Certainty,
    pub gamma: String,
    pub gamma_approx: f64,
    pub gamma_lower_bound: Option<String>,
    pub gamma_certainty: Certainty,
    /// `M_j / j` for `j = 1..=K`.
    pub modulus_ratio: Vec<f64>,
    pub modulus_ratio_certainty: Certainty,
}

impl BasisConditionReport {
    pub fn all_hold(&self) -> bool {
        self.multiples_of_three && self.gamma_approx > 0.0
    }
}

pub fn basis_condition_report(basis: &RadixBasis) -> BasisConditionReport {
    let k = basis.len();
    let mut log_growth = Vec::with_capacity(k);
    let mut acc = 0.0;
    for (i, &m) in basis.moduli().iter().enumerate() {
        acc += (m as f64).ln();
        let level = (i + 1) as f64;
        log_growth.push(acc / (level * level));
    }
    let log_growth_decreasing = log_growth.windows(2).all(|w| w[1] < w[0]);
    let gamma = basis.gamma(k).expect("top level").clone();
    let certainty = if basis.is_default_rule() {
        Certainty::ExactCertificate
    } else {
        Certainty::FiniteEvidence
    };
    BasisConditionReport {
        levels: k,
        moduli: basis.moduli().to_vec(),
        multiples_of_three: basis.moduli().iter().all(|m| m % 3 == 0),
        log_growth,
        log_growth_decreasing,
        log_growth_certainty: certainty,
        gamma_approx: gamma.to_f64().unwrap_or(0.0),
        gamma: gamma.to_string(),
        // gamma_k = (k+2)/(2k+2) decreases to 1/2 under the default rule
        gamma_lower_bound: basis.is_default_rule().then(|| "1/2".to_string()),
        gamma_certainty: certainty,
        modulus_ratio: basis
            .moduli()
            .iter()
            .enumerate()
            .map(|(i, &m)| m as f64 / (i + 1) as f64)
            .collect(),
        modulus_ratio_certainty: certainty,
    }
}

impl SparseSet {
    /// Empty set at `horizon`, used when no element fits.
    pub fn empty(horizon: BigUint) -> Self {
        Self {
            horizon,
            elements: Vec::new(),
            pairs: Vec::new(),
        }
    }

    /// Max element, or zero for the empty set.
    pub fn max_element(&self) -> BigUint {
        self.elements.last().cloned().unwrap_or_else(BigUint::zero)
    }
}
