//! The finitary triple correlation
//! `S_k(d) = (1/N_k) sum_{n < N_k} f~_k(n) f_k(n+d) f_k(n+2d)`,
//! evaluated three independent ways.
//!
//! * [`corr_brute`] runs the literal sum over `[0, N_k)`.
//! * [`corr_factorized`] uses the no-carry reduction for `d = beta(y)` and
//!   averages `psi` over the free-coordinate digit sum by convolving
//!   per-coordinate residue counts mod 3.
//! * [`corr_closed`] reads off `gamma_k * eta(d)`.

use std::fmt;
use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radix::{RadixBasis, SigmaElement};
use crate::witness::{Eta, EtaAssignment, WitnessFunctions, WitnessTable};
use crate::ExactRatio;

/// Default feasibility guard for the literal sum.
pub const DEFAULT_K_MAX_BRUTE: usize = 4;
/// Largest level the literal sum accepts even with the guard lifted.
pub const HARD_K_MAX_BRUTE: usize = 6;

const CHUNK: u64 = 1 << 16;
const TABLE_CAP: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Factorized,
    Closed,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Brute => "brute",
            Method::Factorized => "factorized",
            Method::Closed => "closed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationResult {
    pub value: ExactRatio,
    pub k: usize,
    pub d: BigUint,
    pub method: Method,
    /// `value / gamma_k`.
    pub normalized: Option<ExactRatio>,
}

impl CorrelationResult {
    fn new(basis: &RadixBasis, value: ExactRatio, k: usize, d: BigUint, method: Method) -> Self {
        let gamma = basis.gamma(k).expect("level checked by caller");
        let normalized = Some(&value / gamma);
        Self {
            value,
            k,
            d,
            method,
            normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteOptions {
    pub k_max: usize,
    /// Split the sum into chunks evaluated on the rayon pool.
    pub parallel: bool,
}

impl Default for BruteOptions {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX_BRUTE,
            parallel: true,
        }
    }
}

/// Evaluator for the literal sum at a fixed level and sign pattern; builds the
/// `f_k` table once and reuses it for every shift.
pub struct BruteCorrelator<'a> {
    basis: &'a RadixBasis,
    k: usize,
    n_k: u64,
    witness: WitnessFunctions,
    table: Option<WitnessTable>,
    parallel: bool,
}

impl<'a> BruteCorrelator<'a> {
    pub fn new(
        basis: &'a RadixBasis,
        k: usize,
        eta: &EtaAssignment,
        options: BruteOptions,
    ) -> Result<Self> {
        basis.check_level(k)?;
        let limit = options.k_max.min(HARD_K_MAX_BRUTE);
        if k > limit {
            return Err(Error::BruteInfeasible { k, limit });
        }
        let n_k = basis.prefix_u64(k).ok_or(Error::BruteInfeasible { k, limit })?;
        let witness = WitnessFunctions::new(basis, k, eta)?;
        let table = witness.table(TABLE_CAP);
        Ok(Self {
            basis,
            k,
            n_k,
            witness,
            table,
            parallel: options.parallel,
        })
    }

    /// Integer sum `sum_{n in range} f~(n) f(n+d) f(n+2d)`.
    pub fn partial_sum(&self, range: Range<u64>, d: u64) -> i64 {
        let end = range.end.min(self.n_k);
        let mut acc = 0i64;
        match &self.table {
            Some(t) => {
                for n in range.start..end {
                    let a = t.f_tilde(n);
                    if a != 0 {
                        let b = t.f(n.saturating_add(d));
                        let c = t.f(n.saturating_add(d.saturating_mul(2)));
                        acc += (a * b * c) as i64;
                    }
                }
            }
            None => {
                let w = &self.witness;
                for n in range.start..end {
                    let a = w.f_tilde_u64(n);
                    if a != 0 {
                        let b = w.f_u64(n.saturating_add(d));
                        let c = w.f_u64(n.saturating_add(d.saturating_mul(2)));
                        acc += (a * b * c) as i64;
                    }
                }
            }
        }
        acc
    }

    /// Total over `[0, N_k)` as an integer.
    pub fn raw_sum(&self, d: &BigUint) -> i64 {
        let d = match d.to_u64() {
            Some(d) if d < self.n_k => d,
            _ => return 0,
        };
        let chunks = self.n_k.div_ceil(CHUNK);
        if self.parallel {
            (0..chunks)
                .into_par_iter()
                .map(|c| self.partial_sum(c * CHUNK..(c + 1) * CHUNK, d))
                .sum()
        } else {
            (0..chunks)
                .map(|c| self.partial_sum(c * CHUNK..(c + 1) * CHUNK, d))
                .sum()
        }
    }

    pub fn correlate(&self, d: &BigUint) -> CorrelationResult {
        let value = BigRational::new(self.raw_sum(d).into(), self.n_k.into());
        CorrelationResult::new(self.basis, value, self.k, d.clone(), Method::Brute)
    }
}

/// The literal sum for any `d >= 0`.
pub fn corr_brute(
    basis: &RadixBasis,
    k: usize,
    d: &BigUint,
    eta: &EtaAssignment,
    options: BruteOptions,
) -> Result<CorrelationResult> {
    Ok(BruteCorrelator::new(basis, k, eta, options)?.correlate(d))
}

/// Pair `y` of level `k` with `beta(y) = d`.
pub fn sigma_of(basis: &RadixBasis, k: usize, d: &BigUint) -> Result<SigmaElement> {
    basis.check_level(k)?;
    let (a, b) = basis
        .recover_pair(d)
        .ok_or_else(|| Error::NotInSparseSet(d.to_string()))?;
    if b > k {
        return Err(Error::NotInSparseSet(format!("{d} at level {k}")));
    }
    SigmaElement::new(a, b, k)
}

/// Counts of `x in [0, side)` in each residue class mod 3.
fn residue_counts(side: u64) -> [u64; 3] {
    let mut c = [side / 3; 3];
    for r in 0..(side % 3) as usize {
        c[r] += 1;
    }
    c
}

/// Exact average of `psi(sum of free digits)` over `Omega~_k`, by
/// convolving the residue distributions of the free coordinates.
fn free_sum_psi_average(basis: &RadixBasis, y: &SigmaElement) -> ExactRatio {
    let mut dist = [BigUint::one(), BigUint::zero(), BigUint::zero()];
    let mut total = BigUint::one();
    for i in (1..=y.k).filter(|&i| !y.contains(i)) {
        let side = basis.modulus(i) - 3;
        let c = residue_counts(side);
        let mut next = [BigUint::zero(), BigUint::zero(), BigUint::zero()];
        for (r, acc) in dist.iter().enumerate() {
            for (s, &count) in c.iter().enumerate() {
                next[(r + s) % 3] += acc * count;
            }
        }
        dist = next;
        total *= side;
    }
    let [c0, c1, c2] = dist;
    let numer = BigInt::from(c0) - BigInt::from(c1) - BigInt::from(c2);
    BigRational::new(numer, total.into())
}

/// `S_k(d)` for `d = beta(y)`, `y in Sigma_k`, via the no-carry reduction.
/// Only `eta(d)` is needed.
pub fn corr_factorized(
    basis: &RadixBasis,
    k: usize,
    d: &BigUint,
    eta: &EtaAssignment,
) -> Result<CorrelationResult> {
    let y = sigma_of(basis, k, d)?;
    let mut tilde = BigUint::one();
    let mut full = BigUint::one();
    for &m in &basis.moduli()[..k] {
        tilde *= m - 3;
        full *= m;
    }
    let density = BigRational::new(tilde.into(), full.into());
    let value = match eta.get_sigma(&y)? {
        Eta::Plus => density,
        Eta::MinusThird => density * free_sum_psi_average(basis, &y),
    };
    Ok(CorrelationResult::new(basis, value, k, d.clone(), Method::Factorized))
}

/// `gamma_k * eta(d)`; refuses the case where `y` covers every coordinate and
/// `eta(d) = -1/3`, where the closed form is not exact.
pub fn corr_closed(
    basis: &RadixBasis,
    k: usize,
    d: &BigUint,
    eta: &EtaAssignment,
) -> Result<CorrelationResult> {
    let y = sigma_of(basis, k, d)?;
    let sign = eta.get_sigma(&y)?;
    if sign == Eta::MinusThird && !y.has_free_coordinate() {
        return Err(Error::NoFreeCoordinate { a: y.a, b: y.b, k });
    }
    let value = gamma_k(basis, k)? * sign.value();
    Ok(CorrelationResult::new(basis, value, k, d.clone(), Method::Closed))
}

pub fn gamma_k(basis: &RadixBasis, k: usize) -> Result<ExactRatio> {
    basis.gamma(k).cloned()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    /// `d` in `beta(Sigma_k)` and the closed form is exact.
    Applicable,
    /// `eta(d) = -1/3` but the pair covers `[k]`; the value is reported but no
    /// closed-form claim is made.
    NoFreeCoordinate,
    /// `d` is not yet in `beta(Sigma_k)`.
    NotInSigma,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceRow {
    pub k: usize,
    pub status: RowStatus,
    pub value: Option<ExactRatio>,
    pub method: Option<Method>,
    pub gamma: ExactRatio,
    /// `S_k(d) / gamma_k` on applicable rows.
    pub normalized: Option<ExactRatio>,
    pub eta: Eta,
}

impl ConvergenceRow {
    /// Applicable rows must satisfy `S_k(d) = gamma_k * eta(d)` exactly.
    pub fn holds(&self) -> bool {
        match self.status {
            RowStatus::Applicable => self.normalized.as_ref() == Some(&self.eta.value()),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub d: BigUint,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(ConvergenceRow::holds)
    }
}

/// Rows `(k, S_k(d), gamma_k, S_k(d)/gamma_k, eta(d))` over `levels`. The
/// literal sum is used up to `brute.k_max`, the factorized route beyond.
pub fn convergence_report(
    basis: &RadixBasis,
    d: &BigUint,
    eta: &EtaAssignment,
    levels: std::ops::RangeInclusive<usize>,
    brute: BruteOptions,
) -> Result<ConvergenceReport> {
    let (a, b) = basis
        .recover_pair(d)
        .ok_or_else(|| Error::NotInSparseSet(d.to_string()))?;
    let sign = eta
        .get((a, b))
        .ok_or_else(|| Error::EtaMissing(d.to_string()))?;
    let mut rows = Vec::new();
    for k in levels {
        basis.check_level(k)?;
        let gamma = gamma_k(basis, k)?;
        if b > k {
            rows.push(ConvergenceRow {
                k,
                status: RowStatus::NotInSigma,
                value: None,
                method: None,
                gamma,
                normalized: None,
                eta: sign,
            });
            continue;
        }
        let result = if k <= brute.k_max {
            corr_brute(basis, k, d, eta, brute)?
        } else {
            corr_factorized(basis, k, d, eta)?
        };
        let free = k > 2;
        let status = if sign == Eta::MinusThird && !free {
            RowStatus::NoFreeCoordinate
        } else {
            RowStatus::Applicable
        };
        let normalized = match status {
            RowStatus::Applicable => result.normalized.clone(),
            _ => None,
        };
        rows.push(ConvergenceRow {
            k,
            status,
            value: Some(result.value),
            method: Some(result.method),
            gamma,
            normalized,
            eta: sign,
        });
    }
    Ok(ConvergenceReport { d: d.clone(), rows })
}

/// `|value| <= gamma_k`.
pub fn within_gamma_bound(basis: &RadixBasis, r: &CorrelationResult) -> bool {
    basis
        .gamma(r.k)
        .map(|g| r.value.abs() <= *g && *g <= BigRational::one())
        .unwrap_or(false)
}
