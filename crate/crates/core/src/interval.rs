//! Closed enclosures `[lo, hi]` with rational endpoints, either exact or
//! rounded outward to a dyadic grid `2^-bits`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ExactRatio;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    lo: ExactRatio,
    hi: ExactRatio,
}

/// How enclosures are computed: exact rationals, or dyadic rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arith {
    Exact,
    Dyadic { bits: u32 },
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

impl Enclosure {
    pub fn point(x: ExactRatio) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn new(lo: ExactRatio, hi: ExactRatio) -> Self {
        assert!(lo <= hi, "empty enclosure");
        Self { lo, hi }
    }

    /// `num / den`, exact or rounded outward.
    pub fn quotient(num: &BigUint, den: &BigUint, arith: Arith) -> Self {
        let n = BigInt::from(num.clone());
        let d = BigInt::from(den.clone());
        match arith {
            Arith::Exact => Self::point(ExactRatio::new(n, d)),
            Arith::Dyadic { bits } => {
                let scale = pow2(bits);
                let (q, r) = (&n * &scale).div_rem(&d);
                let hi = if r.is_zero() { q.clone() } else { &q + 1 };
                Self {
                    lo: ExactRatio::new(q, scale.clone()),
                    hi: ExactRatio::new(hi, scale),
                }
            }
        }
    }

    pub fn lo(&self) -> &ExactRatio {
        &self.lo
    }

    pub fn hi(&self) -> &ExactRatio {
        &self.hi
    }

    pub fn width(&self) -> ExactRatio {
        &self.hi - &self.lo
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Widens the upper end by `delta >= 0`.
    pub fn extend_up(&self, delta: &ExactRatio) -> Self {
        Self {
            lo: self.lo.clone(),
            hi: &self.hi + delta,
        }
    }

    pub fn shift(&self, by: &ExactRatio) -> Self {
        Self {
            lo: &self.lo + by,
            hi: &self.hi + by,
        }
    }

    pub fn contains(&self, x: &ExactRatio) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_enclosure(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Certainly `< x`.
    pub fn lt(&self, x: &ExactRatio) -> bool {
        &self.hi < x
    }

    /// Certainly `>= x`.
    pub fn ge(&self, x: &ExactRatio) -> bool {
        &self.lo >= x
    }

    pub fn lo_f64(&self) -> f64 {
        ratio_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        ratio_f64(&self.hi)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo_f64(), self.hi_f64())
    }
}

/// Nearest-ish `f64` for large rationals (scaled to avoid overflow).
pub fn ratio_f64(x: &ExactRatio) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = x.denom().bits().saturating_sub(60) as usize;
    let n = x.numer() >> shift;
    let d = x.denom() >> shift;
    if d.is_zero() {
        return if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

/// Leading decimal digits of a rational, for display.
pub fn ratio_decimal(x: &ExactRatio, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let int = a.numer() / a.denom();
    let mut rem = a.numer() - &int * a.denom();
    let mut out = format!("{}{}.", if neg { "-" } else { "" }, int);
    for _ in 0..digits {
        rem *= 10;
        let (q, r) = rem.div_rem(a.denom());
        out.push_str(&q.to_string());
        rem = r;
    }
    out
}
