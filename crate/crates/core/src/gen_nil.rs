//! The number `theta = sum_i 1/N_i`, certified bounds on `||theta N_j||`,
//! the finite interval cover of `theta S` and the witness `phi`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::interval::{ratio_decimal, ratio_f64, Arith, Enclosure};
use crate::radix::RadixBasis;
use crate::sparsity::enumerate_s;
use crate::witness::EtaAssignment;
use crate::ExactRatio;

pub const DEFAULT_EXACT_LIMIT: usize = 13;
pub const DEFAULT_PRECISION: u32 = 256;

/// Exact arithmetic up to `exact_limit` terms, dyadic enclosures beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub exact_limit: usize,
    pub bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            exact_limit: DEFAULT_EXACT_LIMIT,
            bits: DEFAULT_PRECISION,
        }
    }
}

impl Precision {
    fn arith(&self, truncation: usize) -> Arith {
        if truncation <= self.exact_limit {
            Arith::Exact
        } else {
            Arith::Dyadic { bits: self.bits }
        }
    }
}

fn ratio(n: &BigUint, d: &BigUint) -> ExactRatio {
    ExactRatio::new(BigInt::from(n.clone()), BigInt::from(d.clone()))
}

fn ratio_string(x: &ExactRatio) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaApprox {
    pub truncation: usize,
    /// `sum_{i=1}^J 1/N_i`.
    pub partial: ExactRatio,
    /// `2 / N_{J+1}`, a strict upper bound on the omitted tail.
    pub tail_hi: ExactRatio,
}

impl ThetaApprox {
    pub fn enclosure(&self) -> Enclosure {
        Enclosure::new(self.partial.clone(), &self.partial + &self.tail_hi)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "J": self.truncation,
            "partial": ratio_string(&self.partial),
            "partial_decimal": ratio_decimal(&self.partial, 20),
            "tail_hi": ratio_string(&self.tail_hi),
            "tail_hi_approx": ratio_f64(&self.tail_hi),
        })
    }
}

fn check_truncation(basis: &RadixBasis, truncation: usize) -> Result<()> {
    if truncation + 1 > basis.len() {
        return Err(Error::LevelOutOfRange {
            requested: truncation + 1,
            available: basis.len(),
        });
    }
    Ok(())
}

pub fn theta_partial(basis: &RadixBasis, truncation: usize) -> Result<ThetaApprox> {
    if truncation == 0 {
        return Err(Error::InvalidParameter("truncation J must be at least 1".into()));
    }
    check_truncation(basis, truncation)?;
    // every N_i divides N_J, so the sum is an integer over N_J
    let n_j = basis.prefix(truncation);
    let numer: BigUint = (1..=truncation).map(|i| n_j / basis.prefix(i)).sum();
    Ok(ThetaApprox {
        truncation,
        partial: ratio(&numer, n_j),
        tail_hi: ratio(&BigUint::from(2u8), basis.prefix(truncation + 1)),
    })
}

/// Enclosure of `{theta N_j} = sum_{i>j} N_j / N_i` from the terms
/// `i = j+1..=J` plus the tail `(0, (N_j / N_{J+1}) L / (L - 1))`, where
/// `L = M_{J+1} + 3` bounds every later modulus from below.
pub fn frac_enclosure(
    basis: &RadixBasis,
    j: usize,
    truncation: usize,
    precision: Precision,
) -> Result<Enclosure> {
    if truncation < j {
        return Err(Error::InvalidParameter(format!("truncation {truncation} below j = {j}")));
    }
    check_truncation(basis, truncation)?;
    let arith = precision.arith(truncation);
    let n_j = basis.prefix(j);
    let one = BigUint::one();
    let mut acc = Enclosure::point(ExactRatio::zero());
    for i in j + 1..=truncation {
        acc = acc.add(&Enclosure::quotient(&one, &(basis.prefix(i) / n_j), arith));
    }
    let l = BigUint::from(basis.modulus(truncation + 1) + 3);
    let tail_den = basis.prefix(truncation + 1) / n_j * (&l - 1u8);
    let tail = Enclosure::quotient(&l, &tail_den, arith);
    Ok(acc.extend_up(tail.hi()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FracNormCheck {
    pub j: usize,
    #[serde(rename = "J")]
    pub truncation: usize,
    pub enclosure_lo: String,
    pub enclosure_hi: String,
    pub enclosure_lo_approx: f64,
    pub enclosure_hi_approx: f64,
    /// `1 / (M_{j+1} - 1)`.
    pub bound: String,
    pub bound_approx: f64,
    pub arithmetic: &'static str,
    pub verdict: bool,
}

/// Certifies `||theta N_j|| < 1/(M_{j+1} - 1)` with `J >= j + 3` terms.
pub fn frac_norm_check(
    basis: &RadixBasis,
    j: usize,
    truncation: usize,
    precision: Precision,
) -> Result<FracNormCheck> {
    if truncation < j + 3 {
        return Err(Error::InsufficientPrecision { truncation });
    }
    let enc = frac_enclosure(basis, j, truncation, precision)?;
    let bound = ExactRatio::new(BigInt::one(), BigInt::from(basis.modulus(j + 1) - 1));
    let verdict = if enc.lt(&bound) {
        true
    } else if enc.ge(&bound) {
        false
    } else {
        return Err(Error::InsufficientPrecision { truncation });
    };
    Ok(FracNormCheck {
        j,
        truncation,
        enclosure_lo: ratio_string(enc.lo()),
        enclosure_hi: ratio_string(enc.hi()),
        enclosure_lo_approx: enc.lo_f64(),
        enclosure_hi_approx: enc.hi_f64(),
        bound: ratio_string(&bound),
        bound_approx: ratio_f64(&bound),
        arithmetic: match precision.arith(truncation) {
            Arith::Exact => "exact",
            Arith::Dyadic { .. } => "dyadic",
        },
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginRow {
    pub q: usize,
    #[serde(rename = "J")]
    pub truncation: usize,
    pub frac_lo_approx: f64,
    pub frac_hi_approx: f64,
    pub bound_approx: f64,
    /// `0 < {theta N_q}`, certified.
    pub positive: bool,
    /// `{theta N_q} < 1/(M_{q+1} - 1) < 1`, certified.
    pub below_bound: bool,
}

/// `0 < {theta N_q} < 1` for `q = 0..=q_max`, using every available term.
pub fn irrationality_margin(
    basis: &RadixBasis,
    q_max: usize,
    precision: Precision,
) -> Result<Vec<MarginRow>> {
    if q_max + 2 > basis.len() {
        return Err(Error::LevelOutOfRange {
            requested: q_max + 2,
            available: basis.len(),
        });
    }
    let truncation = basis.len() - 1;
    (0..=q_max)
        .map(|q| {
            let enc = frac_enclosure(basis, q, truncation, precision)?;
            let bound = ExactRatio::new(BigInt::one(), BigInt::from(basis.modulus(q + 1) - 1));
            Ok(MarginRow {
                q,
                truncation,
                frac_lo_approx: enc.lo_f64(),
                frac_hi_approx: enc.hi_f64(),
                bound_approx: ratio_f64(&bound),
                positive: enc.lo() > &ExactRatio::zero(),
                below_bound: enc.lt(&bound),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverPoint {
    pub i: usize,
    pub j: usize,
    /// `{theta (N_i + N_j)}`.
    pub enclosure: Enclosure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverInterval {
    /// `None` for `I + I`, otherwise the index `i` of the center `{theta N_i}`.
    pub center_index: Option<usize>,
    pub center: Enclosure,
    pub half_width: ExactRatio,
}

impl CoverInterval {
    /// Points certainly inside `center + (-h, h)` whatever the exact center.
    fn inner(&self) -> (ExactRatio, ExactRatio) {
        (self.center.hi() - &self.half_width, self.center.lo() + &self.half_width)
    }

    fn length(&self) -> ExactRatio {
        &self.half_width * ExactRatio::from_integer(2.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalCover {
    pub epsilon: ExactRatio,
    pub k: usize,
    /// `epsilon / (10 k)`.
    pub radius: ExactRatio,
    pub truncation: usize,
    pub points: Vec<CoverPoint>,
    pub intervals: Vec<CoverInterval>,
    pub total_length: ExactRatio,
}

impl IntervalCover {
    pub fn length_below_epsilon(&self) -> bool {
        self.total_length < self.epsilon
    }

    pub fn to_json(&self) -> Value {
        let enc = |e: &Enclosure| json!([ratio_string(e.lo()), ratio_string(e.hi())]);
        json!({
            "epsilon": ratio_string(&self.epsilon),
            "k": self.k,
            "radius": ratio_string(&self.radius),
            "J": self.truncation,
            "points": self.points.iter().map(|p| json!({
                "i": p.i, "j": p.j, "enclosure": enc(&p.enclosure),
            })).collect::<Vec<_>>(),
            "intervals": self.intervals.iter().map(|iv| json!({
                "center": match iv.center_index {
                    Some(i) => format!("theta*N_{i}"),
                    None => "0".to_string(),
                },
                "center_enclosure": enc(&iv.center),
                "half_width": ratio_string(&iv.half_width),
            })).collect::<Vec<_>>(),
            "total_length": ratio_string(&self.total_length),
            "total_length_approx": ratio_f64(&self.total_length),
            "total_length_below_epsilon": self.length_below_epsilon(),
        })
    }

    pub fn summary(&self) -> String {
        format!(
            "cover for epsilon = {}: k = {}, {} points, {} intervals of half-width {} plus I+I, \
total length {} ~ {:.6} < epsilon: {}",
            ratio_string(&self.epsilon),
            self.k,
            self.points.len(),
            self.intervals.len() - 1,
            ratio_string(&self.radius),
            ratio_string(&self.total_length),
            ratio_f64(&self.total_length),
            self.length_below_epsilon()
        )
    }
}

/// Smallest `k >= 1` with `1/(M_{k+1} - 1) < epsilon / (10 k)`, and the cover
/// it induces.
pub fn interval_cover(
    basis: &RadixBasis,
    epsilon: &ExactRatio,
    precision: Precision,
) -> Result<IntervalCover> {
    if !(epsilon > &ExactRatio::zero() && epsilon < &ExactRatio::one()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {} must lie in (0, 1)",
            ratio_string(epsilon)
        )));
    }
    let ten = BigInt::from(10u8);
    let k = (1..basis.len())
        .find(|&k| {
            // 1/(M-1) < eps/(10k)  <=>  10k < eps (M - 1)
            let m1 = BigInt::from(basis.modulus(k + 1) - 1);
            ExactRatio::from_integer(&ten * BigInt::from(k)) < epsilon * ExactRatio::from_integer(m1)
        })
        .ok_or(Error::NoFeasibleCut {
            available: basis.len(),
        })?;
    let truncation = basis.len() - 1;
    let radius = epsilon / ExactRatio::from_integer(&ten * BigInt::from(k));
    let fracs: Vec<Enclosure> = (0..k)
        .map(|i| frac_enclosure(basis, i, truncation, precision))
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    for j in 1..k {
        for i in 0..j {
            points.push(CoverPoint {
                i,
                j,
                enclosure: fracs[i].add(&fracs[j]),
            });
        }
    }
    let mut intervals: Vec<CoverInterval> = fracs
        .iter()
        .enumerate()
        .map(|(i, c)| CoverInterval {
            center_index: Some(i),
            center: c.clone(),
            half_width: radius.clone(),
        })
        .collect();
    intervals.push(CoverInterval {
        center_index: None,
        center: Enclosure::point(ExactRatio::zero()),
        half_width: &radius * ExactRatio::from_integer(2.into()),
    });
    let total_length = intervals.iter().map(|iv| iv.length()).fold(ExactRatio::zero(), |a, b| a + b);
    Ok(IntervalCover {
        epsilon: epsilon.clone(),
        k,
        radius,
        truncation,
        points,
        intervals,
        total_length,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverViolation {
    pub s: String,
    pub enclosure: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverAudit {
    pub horizon: String,
    pub checked: usize,
    pub by_point: usize,
    pub by_interval: usize,
    pub verdict: bool,
    pub first_violation: Option<CoverViolation>,
}

enum Membership {
    Point,
    Interval,
    Outside,
    Undecided,
}

/// Whether `x` (taken mod 1) lies in `(lo, hi)` mod 1, with both ends certain.
fn inside_mod1(x: &Enclosure, lo: &ExactRatio, hi: &ExactRatio) -> Option<bool> {
    let mut undecided = false;
    for shift in [-1i64, 0, 1] {
        let y = x.shift(&ExactRatio::from_integer(shift.into()));
        if y.lo() > lo && y.hi() < hi {
            return Some(true);
        }
        if y.hi() > lo && y.lo() < hi {
            undecided = true;
        }
    }
    if undecided {
        None
    } else {
        Some(false)
    }
}

fn classify(cover: &IntervalCover, x: &Enclosure) -> Membership {
    if cover.points.iter().any(|p| p.enclosure.overlaps(x)) {
        return Membership::Point;
    }
    let mut undecided = false;
    for iv in &cover.intervals {
        let (lo, hi) = iv.inner();
        match inside_mod1(x, &lo, &hi) {
            Some(true) => return Membership::Interval,
            Some(false) => {}
            None => undecided = true,
        }
    }
    if undecided {
        Membership::Undecided
    } else {
        Membership::Outside
    }
}

/// Checks that `{theta s}` lies in the cover for every `s` in `S[horizon]`.
pub fn cover_audit(
    basis: &RadixBasis,
    cover: &IntervalCover,
    horizon: &BigUint,
    precision: Precision,
) -> Result<CoverAudit> {
    let set = enumerate_s(basis, horizon)?;
    let truncation = cover.truncation;
    let rows: Vec<(String, Enclosure)> = set
        .iter()
        .map(|(s, (a, b))| {
            let x = frac_enclosure(basis, a - 1, truncation, precision)?
                .add(&frac_enclosure(basis, b - 1, truncation, precision)?);
            Ok((s.to_string(), x))
        })
        .collect::<Result<_>>()?;
    let classes: Vec<Membership> = rows.par_iter().map(|(_, x)| classify(cover, x)).collect();
    let (mut by_point, mut by_interval) = (0, 0);
    let mut first_violation = None;
    for ((s, x), class) in rows.iter().zip(classes) {
        match class {
            Membership::Point => by_point += 1,
            Membership::Interval => by_interval += 1,
            Membership::Undecided => return Err(Error::InsufficientPrecision { truncation }),
            Membership::Outside => {
                if first_violation.is_none() {
                    first_violation = Some(CoverViolation {
                        s: s.clone(),
                        enclosure: [x.lo_f64(), x.hi_f64()],
                    });
                }
            }
        }
    }
    Ok(CoverAudit {
        horizon: horizon.to_string(),
        checked: rows.len(),
        by_point,
        by_interval,
        verdict: first_violation.is_none(),
        first_violation,
    })
}

/// `phi(theta n) = eta(n)` on `S`, `0` elsewhere; indexed by `n`.
pub fn phi_eval(basis: &RadixBasis, n: &BigUint, eta: &EtaAssignment) -> Result<ExactRatio> {
    match basis.recover_pair(n) {
        Some(pair) => eta
            .get(pair)
            .map(|e| e.value())
            .ok_or_else(|| Error::EtaMissing(n.to_string())),
        None => Ok(ExactRatio::zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::Eta;

    fn basis() -> RadixBasis {
        RadixBasis::default_shifted(20).unwrap()
    }

    fn r(n: i64, d: i64) -> ExactRatio {
        ExactRatio::new(n.into(), d.into())
    }

    /// Independent evaluation with plain rational sums.
    fn theta_oracle(j: usize) -> ExactRatio {
        let mut n = 1i64;
        let mut s = r(0, 1);
        for i in 1..=j {
            n *= 3 * (i as i64 + 1).pow(2);
            s += r(1, n);
        }
        s
    }

    #[test]
    fn theta_examples() {
        let b = basis();
        let t1 = theta_partial(&b, 1).unwrap();
        assert_eq!(t1.partial, r(1, 12));
        assert_eq!(t1.tail_hi, r(2, 324));
        let t5 = theta_partial(&b, 5).unwrap();
        assert_eq!(t5.partial, theta_oracle(5));
        assert!((ratio_f64(&t5.partial) - 0.08648492).abs() < 5e-9);
        assert!((ratio_f64(&t5.tail_hi) - 1.08e-10).abs() < 0.01e-10);
        let t3 = theta_partial(&b, 3).unwrap();
        assert!(t3.enclosure().contains_enclosure(&t5.enclosure()));
        assert!(theta_partial(&b, 0).is_err());
        assert!(theta_partial(&b, 20).is_err());
    }

    #[test]
    fn enclosures_nest_and_shrink() {
        let b = basis();
        let mut prev = theta_partial(&b, 1).unwrap();
        for j in 2..19 {
            let cur = theta_partial(&b, j).unwrap();
            assert!(prev.enclosure().contains_enclosure(&cur.enclosure()));
            let factor = &prev.tail_hi / &cur.tail_hi;
            assert!(factor >= ExactRatio::from_integer(b.modulus(j).into()));
            prev = cur;
        }
    }

    #[test]
    fn frac_norm_examples() {
        let b = basis();
        let p = Precision::default();
        let c1 = frac_norm_check(&b, 1, 6, p).unwrap();
        assert!(c1.verdict);
        assert!((c1.enclosure_lo_approx - 0.037819).abs() < 2e-6);
        assert!((c1.enclosure_hi_approx - 0.037819).abs() < 2e-6);
        assert_eq!(c1.bound, "1/26");
        let c0 = frac_norm_check(&b, 0, 5, p).unwrap();
        assert!(c0.verdict && (c0.enclosure_lo_approx - 0.08648).abs() < 1e-5);
        assert_eq!(c0.bound, "1/11");
        for j in 0..=10 {
            assert!(frac_norm_check(&b, j, 19, p).unwrap().verdict);
            assert!(frac_norm_check(&b, j, j + 3, p).unwrap().verdict);
        }
        assert_eq!(
            frac_norm_check(&b, 4, 6, p),
            Err(Error::InsufficientPrecision { truncation: 6 })
        );
    }

    #[test]
    fn exact_and_dyadic_agree() {
        let b = basis();
        let exact = Precision { exact_limit: 100, bits: 0 };
        let dyadic = Precision { exact_limit: 0, bits: 200 };
        for j in 0..12 {
            let a = frac_enclosure(&b, j, 15, exact).unwrap();
            let d = frac_enclosure(&b, j, 15, dyadic).unwrap();
            assert!(d.contains_enclosure(&a), "j = {j}");
            // the exact lower end is theta's tail truncated at J
            let mut s = ExactRatio::zero();
            for i in j + 1..=15 {
                s += ExactRatio::new(BigInt::from(b.prefix(j).clone()), BigInt::from(b.prefix(i).clone()));
            }
            assert_eq!(a.lo(), &s);
        }
    }

    #[test]
    fn margin_rows() {
        let b = basis();
        let rows = irrationality_margin(&b, 18, Precision::default()).unwrap();
        assert_eq!(rows.len(), 19);
        assert!(rows.iter().all(|r| r.positive && r.below_bound));
        assert!(rows[0].frac_hi_approx < 1.0);
        assert!(irrationality_margin(&b, 19, Precision::default()).is_err());
    }

    #[test]
    fn cover_cut_levels() {
        let b = basis();
        let p = Precision::default();
        let c = interval_cover(&b, &r(1, 2), p).unwrap();
        assert_eq!(c.k, 1);
        let c = interval_cover(&b, &r(1, 5), p).unwrap();
        assert_eq!(c.k, 13);
        // k = 12 fails: 1/587 >= 0.2/120
        assert!(r(1, 587) >= r(2, 1200));
        assert!(r(1, 674) < r(2, 1300));
        let expected = r(1, 25) + r(2, 5 * 5 * 13);
        assert_eq!(c.total_length, expected);
        assert!(c.length_below_epsilon());
        assert_eq!(c.points.len(), 78);
        assert_eq!(c.intervals.len(), 14);
        assert!(interval_cover(&b, &r(1, 1), p).is_err());
        let short = RadixBasis::default_shifted(5).unwrap();
        assert_eq!(
            interval_cover(&short, &r(1, 5), p),
            Err(Error::NoFeasibleCut { available: 5 })
        );
    }

    #[test]
    fn cover_length_formula() {
        let b = basis();
        for (n, d) in [(1, 2), (1, 3), (2, 5), (1, 4), (9, 10)] {
            let eps = r(n, d);
            let c = interval_cover(&b, &eps, Precision::default()).unwrap();
            let k = ExactRatio::from_integer(c.k.into());
            assert_eq!(c.total_length, &eps / r(5, 1) + &eps * r(2, 5) / k);
            assert!(c.length_below_epsilon());
        }
    }

    #[test]
    fn cover_audits() {
        let b = basis();
        let p = Precision::default();
        let c = interval_cover(&b, &r(1, 5), p).unwrap();
        let a = cover_audit(&b, &c, b.prefix(8), p).unwrap();
        assert!(a.verdict);
        assert_eq!(a.checked, 28);
        assert_eq!(a.by_point, 28);
        let deep = cover_audit(&b, &c, b.prefix(19), p).unwrap();
        assert!(deep.verdict && deep.by_interval > 0);

        let c1 = interval_cover(&b, &r(1, 2), p).unwrap();
        let a1 = cover_audit(&b, &c1, &BigUint::from(13u8), p).unwrap();
        assert!(a1.verdict && a1.checked == 1 && a1.by_interval == 1);
        let empty = cover_audit(&b, &c1, &BigUint::from(12u8), p).unwrap();
        assert!(empty.verdict && empty.checked == 0);
    }

    #[test]
    fn cover_audit_reports_violations() {
        let b = basis();
        let p = Precision::default();
        let mut c = interval_cover(&b, &r(1, 2), p).unwrap();
        c.intervals.truncate(1);
        c.intervals[0].half_width = r(1, 1000);
        let a = cover_audit(&b, &c, b.prefix(3), p).unwrap();
        assert!(!a.verdict);
        assert_eq!(a.first_violation.unwrap().s, "13");
    }

    #[test]
    fn phi_examples() {
        let b = basis();
        let mut eta = EtaAssignment::new();
        eta.insert((1, 2), Eta::MinusThird);
        assert_eq!(phi_eval(&b, &BigUint::from(13u8), &eta).unwrap(), r(-1, 3));
        assert_eq!(phi_eval(&b, &BigUint::from(7u8), &eta).unwrap(), r(0, 1));
        assert_eq!(phi_eval(&b, &BigUint::zero(), &eta).unwrap(), r(0, 1));
        assert!(phi_eval(&b, &BigUint::from(325u16), &eta).is_err());
    }

    #[test]
    fn json_uses_rational_strings() {
        let b = basis();
        let c = interval_cover(&b, &r(1, 2), Precision::default()).unwrap();
        let v = c.to_json();
        assert_eq!(v["epsilon"], "1/2");
        assert_eq!(v["radius"], "1/20");
        assert_eq!(v["total_length"], "3/10");
        assert_eq!(v["total_length_below_epsilon"], true);
        assert_eq!(theta_partial(&b, 1).unwrap().to_json()["partial"], "1/12");
    }
}
