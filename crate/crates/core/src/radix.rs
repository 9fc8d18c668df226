//! Mixed-radix boxes over a basis `M_1 < M_2 < ...` of multiples of three.
//!
//! A point of the box `Omega_k` is a digit vector `(x_1, .., x_k)` with
//! `0 <= x_i < M_i`, encoded as `x_1 + M_1 x_2 + M_1 M_2 x_3 + ...`. Digit
//! `x_1` is the least significant. The carry-free box `Omega~_k` shrinks
//! every side by three so that adding one or two copies of a pair vector
//! never produces a carry.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ExactRatio;

/// How the moduli are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisRule {
    /// `M_i = 3(i+1)^2`, i.e. 12, 27, 48, 75, ...
    DefaultShifted,
    /// An explicit list, validated against the basis invariants.
    Explicit(Vec<u64>),
}

impl BasisRule {
    pub fn modulus(i: usize) -> u64 {
        let s = (i as u64) + 1;
        3 * s * s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadixBasis {
    rule: BasisRule,
    moduli: Vec<u64>,
    prefix: Vec<BigUint>,
    gamma: Vec<ExactRatio>,
}

impl RadixBasis {
    /// Builds the first `levels` moduli of `rule` with all prefix products and
    /// partial products `gamma_k = prod_{i<=k} (1 - 3/M_i)` precomputed exactly.
    pub fn new(rule: &BasisRule, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::EmptyBasis);
        }
        let moduli: Vec<u64> = match rule {
            BasisRule::DefaultShifted => (1..=levels).map(BasisRule::modulus).collect(),
            BasisRule::Explicit(list) => {
                if list.len() < levels {
                    return Err(Error::LevelOutOfRange {
                        requested: levels,
                        available: list.len(),
                    });
                }
                list[..levels].to_vec()
            }
        };
        for (idx, &m) in moduli.iter().enumerate() {
            let index = idx + 1;
            if m == 0 || m % 3 != 0 {
                return Err(Error::ModulusNotMultipleOfThree { index, value: m });
            }
            if m == 3 {
                return Err(Error::GammaVanishes { index });
            }
            if idx > 0 && m <= moduli[idx - 1] {
                return Err(Error::ModuliNotIncreasing {
                    index,
                    value: m,
                    previous: moduli[idx - 1],
                });
            }
        }

        let mut prefix = Vec::with_capacity(levels + 1);
        let mut gamma = Vec::with_capacity(levels + 1);
        prefix.push(BigUint::one());
        gamma.push(ExactRatio::one());
        for &m in &moduli {
            let next = prefix.last().unwrap() * m;
            prefix.push(next);
            let factor = BigRational::new((m - 3).into(), m.into());
            let g = gamma.last().unwrap() * factor;
            gamma.push(g);
        }
        let rule = match rule {
            BasisRule::DefaultShifted => BasisRule::DefaultShifted,
            BasisRule::Explicit(_) => BasisRule::Explicit(moduli.clone()),
        };
        Ok(Self {
            rule,
            moduli,
            prefix,
            gamma,
        })
    }

    pub fn default_shifted(levels: usize) -> Result<Self> {
        Self::new(&BasisRule::DefaultShifted, levels)
    }

    pub fn from_moduli(moduli: Vec<u64>) -> Result<Self> {
        let n = moduli.len();
        Self::new(&BasisRule::Explicit(moduli), n)
    }

    pub fn rule(&self) -> &BasisRule {
        &self.rule
    }

    pub fn is_default_rule(&self) -> bool {
        self.rule == BasisRule::DefaultShifted
    }

    /// Number of moduli `K`.
    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// `M_i`, one-indexed.
    pub fn modulus(&self, i: usize) -> u64 {
        self.moduli[i - 1]
    }

    /// `N_k = M_1 ... M_k`, with `N_0 = 1`.
    pub fn prefix(&self, k: usize) -> &BigUint {
        &self.prefix[k]
    }

    pub fn prefixes(&self) -> &[BigUint] {
        &self.prefix
    }

    pub fn prefix_u64(&self, k: usize) -> Option<u64> {
        self.prefix.get(k).and_then(|n| n.to_u64())
    }

    /// `gamma_k = prod_{i<=k} (1 - 3/M_i)`; `gamma_0 = 1`.
    pub fn gamma(&self, k: usize) -> Result<&ExactRatio> {
        self.gamma.get(k).ok_or(Error::LevelOutOfRange {
            requested: k,
            available: self.len(),
        })
    }

    pub fn check_level(&self, k: usize) -> Result<()> {
        if k > self.len() {
            Err(Error::LevelOutOfRange {
                requested: k,
                available: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Validates a digit vector against `Omega_k`, `k = digits.len()`.
    pub fn digits(&self, digits: Vec<u64>) -> Result<DigitVector> {
        self.check_level(digits.len())?;
        for (idx, &x) in digits.iter().enumerate() {
            let bound = self.moduli[idx];
            if x >= bound {
                return Err(Error::DigitOutOfRange {
                    index: idx + 1,
                    digit: x,
                    bound,
                });
            }
        }
        Ok(DigitVector { digits })
    }

    /// `beta(x) = x_1 + M_1 x_2 + M_1 M_2 x_3 + ...`
    pub fn encode(&self, x: &DigitVector) -> Result<BigUint> {
        self.digits(x.digits.clone())?;
        let mut acc = BigUint::zero();
        for (idx, &d) in x.digits.iter().enumerate() {
            if d != 0 {
                acc += &self.prefix[idx] * d;
            }
        }
        Ok(acc)
    }

    pub fn decode(&self, n: &BigUint, k: usize) -> Result<DigitVector> {
        self.check_level(k)?;
        if n >= &self.prefix[k] {
            return Err(Error::EncodingOutOfRange {
                value: n.to_string(),
                level: k,
                bound: self.prefix[k].to_string(),
            });
        }
        let mut rest = n.clone();
        let mut digits = Vec::with_capacity(k);
        for &m in &self.moduli[..k] {
            let (q, r) = rest.div_rem(&BigUint::from(m));
            digits.push(r.to_u64().expect("remainder below a u64 modulus"));
            rest = q;
        }
        Ok(DigitVector { digits })
    }

    /// Fast path of [`decode`](Self::decode) for `n < 2^64`.
    pub fn decode_u64(&self, mut n: u64, k: usize) -> Result<DigitVector> {
        self.check_level(k)?;
        match self.prefix_u64(k) {
            Some(bound) if n >= bound => {
                return Err(Error::EncodingOutOfRange {
                    value: n.to_string(),
                    level: k,
                    bound: bound.to_string(),
                })
            }
            _ => {}
        }
        let mut digits = Vec::with_capacity(k);
        for &m in &self.moduli[..k] {
            digits.push(n % m);
            n /= m;
        }
        Ok(DigitVector { digits })
    }

    /// Membership in `Omega~_k`: `x_i < M_i - 3` for every coordinate.
    pub fn in_tilde_box(&self, x: &DigitVector) -> bool {
        x.digits
            .iter()
            .zip(&self.moduli)
            .all(|(&d, &m)| d < m - 3)
    }

    /// All pairs `(a, b)`, `1 <= a < b <= k`, in lexicographic order.
    pub fn sigma_enumerate(&self, k: usize) -> Vec<SigmaElement> {
        sigma_enumerate(k)
    }

    /// `beta(y) = N_{a-1} + N_{b-1}` for the pair vector `y`.
    pub fn sigma_value(&self, y: &SigmaElement) -> Result<BigUint> {
        self.check_level(y.k)?;
        Ok(&self.prefix[y.a - 1] + &self.prefix[y.b - 1])
    }

    /// Inverse of `sigma_value` on integers: the unique pair `(a, b)` with
    /// `N_{a-1} + N_{b-1} = s`, if both indices fall inside the basis.
    pub fn recover_pair(&self, s: &BigUint) -> Option<(usize, usize)> {
        // prefix products at least triple each step, so the larger index is
        // the largest j with N_j < s
        let j = self.prefix.iter().rposition(|n| n < s)?;
        let rest = s - &self.prefix[j];
        let i = self.prefix[..j].iter().position(|n| *n == rest)?;
        Some((i + 1, j + 1))
    }

    /// Digitwise `x + m*y` for `x` in the carry-free box; the result satisfies
    /// `beta(x + m*y) = beta(x) + m*beta(y)`.
    pub fn carry_free_add(&self, x: &DigitVector, y: &SigmaElement, m: u32) -> Result<DigitVector> {
        if m != 1 && m != 2 {
            return Err(Error::BadMultiplier(m));
        }
        if x.level() != y.k {
            return Err(Error::LevelMismatch {
                left: x.level(),
                right: y.k,
            });
        }
        self.digits(x.digits.clone())?;
        if let Some((idx, &d)) = x
            .digits
            .iter()
            .enumerate()
            .find(|(i, &d)| d >= self.moduli[*i] - 3)
        {
            return Err(Error::NotInTildeBox {
                index: idx + 1,
                digit: d,
            });
        }
        let mut digits = x.digits.clone();
        digits[y.a - 1] += m as u64;
        digits[y.b - 1] += m as u64;
        Ok(DigitVector { digits })
    }
}

/// A point of `Omega_k`; `k` is the number of digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitVector {
    digits: Vec<u64>,
}

impl DigitVector {
    pub fn zero(k: usize) -> Self {
        Self { digits: vec![0; k] }
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.digits
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.digits
    }
}

/// The pair vector with ones at coordinates `a < b` of level `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SigmaElement {
    pub a: usize,
    pub b: usize,
    pub k: usize,
}

impl SigmaElement {
    pub fn new(a: usize, b: usize, k: usize) -> Result<Self> {
        if a == 0 || a >= b || b > k {
            return Err(Error::InvalidSigma { a, b, k });
        }
        Ok(Self { a, b, k })
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    /// The same pair viewed at another level `k >= b`.
    pub fn at_level(&self, k: usize) -> Result<Self> {
        Self::new(self.a, self.b, k)
    }

    pub fn contains(&self, i: usize) -> bool {
        i == self.a || i == self.b
    }

    /// True when some coordinate of `[k]` lies outside the support.
    pub fn has_free_coordinate(&self) -> bool {
        self.k > 2
    }

    pub fn to_digits(&self) -> DigitVector {
        let mut digits = vec![0; self.k];
        digits[self.a - 1] = 1;
        digits[self.b - 1] = 1;
        DigitVector { digits }
    }
}

pub fn sigma_enumerate(k: usize) -> Vec<SigmaElement> {
    let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for a in 1..=k {
        for b in a + 1..=k {
            out.push(SigmaElement { a, b, k });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn basis() -> RadixBasis {
        RadixBasis::default_shifted(6).unwrap()
    }

    #[test]
    fn default_rule_moduli() {
        let b = RadixBasis::default_shifted(3).unwrap();
        assert_eq!(b.moduli(), &[12, 27, 48]);
    }

    #[test]
    fn explicit_list_prefix_product() {
        let b = RadixBasis::from_moduli(vec![12, 27, 48]).unwrap();
        assert_eq!(b.prefix(3), &BigUint::from(15552u32));
        assert!(!b.is_default_rule());
    }

    #[test]
    fn rejects_vanishing_gamma() {
        assert_eq!(
            RadixBasis::from_moduli(vec![3, 12]),
            Err(Error::GammaVanishes { index: 1 })
        );
    }

    #[test]
    fn rejects_bad_lists() {
        assert!(matches!(
            RadixBasis::from_moduli(vec![12, 25]),
            Err(Error::ModulusNotMultipleOfThree { index: 2, .. })
        ));
        assert!(matches!(
            RadixBasis::from_moduli(vec![27, 12]),
            Err(Error::ModuliNotIncreasing { index: 2, .. })
        ));
        assert_eq!(RadixBasis::default_shifted(0), Err(Error::EmptyBasis));
    }

    #[test]
    fn encode_examples() {
        let b = basis();
        let zero = DigitVector::zero(4);
        assert_eq!(b.encode(&zero).unwrap(), BigUint::zero());
        let x = b.digits(vec![1, 1]).unwrap();
        assert_eq!(b.encode(&x).unwrap(), BigUint::from(13u32));
        let x = b.digits(vec![5, 7, 4]).unwrap();
        assert_eq!(b.encode(&x).unwrap(), BigUint::from(1385u32));
        assert!(b.digits(vec![12]).is_err());
    }

    #[test]
    fn decode_examples() {
        let b = basis();
        assert_eq!(b.decode_u64(0, 3).unwrap(), DigitVector::zero(3));
        assert_eq!(b.decode_u64(13, 2).unwrap().as_slice(), &[1, 1]);
        assert!(matches!(
            b.decode(&BigUint::from(15552u32), 3),
            Err(Error::EncodingOutOfRange { level: 3, .. })
        ));
        assert!(b.decode_u64(15552, 3).is_err());
    }

    #[test]
    fn tilde_box_examples() {
        let b = basis();
        assert!(b.in_tilde_box(&DigitVector::zero(3)));
        assert!(b.in_tilde_box(&b.digits(vec![8, 23, 44]).unwrap()));
        assert!(!b.in_tilde_box(&b.digits(vec![9, 0, 0]).unwrap()));
    }

    #[test]
    fn sigma_enumeration() {
        let b = basis();
        let pairs: Vec<_> = sigma_enumerate(3).iter().map(|s| s.pair()).collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(sigma_enumerate(2).len(), 1);
        assert!(sigma_enumerate(1).is_empty());
        assert!(sigma_enumerate(0).is_empty());
        let values: Vec<_> = sigma_enumerate(3)
            .iter()
            .map(|s| b.sigma_value(s).unwrap())
            .collect();
        assert_eq!(
            values,
            vec![BigUint::from(13u32), BigUint::from(325u32), BigUint::from(336u32)]
        );
        for k in 0..10 {
            assert_eq!(sigma_enumerate(k).len(), k * k.saturating_sub(1) / 2);
        }
    }

    #[test]
    fn carry_free_examples() {
        let b = basis();
        let x = b.digits(vec![8, 23, 44]).unwrap();
        let y = SigmaElement::new(1, 2, 3).unwrap();
        let z = b.carry_free_add(&x, &y, 2).unwrap();
        assert_eq!(z.as_slice(), &[10, 25, 44]);
        assert_eq!(b.encode(&x).unwrap(), BigUint::from(14540u32));
        assert_eq!(b.encode(&z).unwrap(), BigUint::from(14566u32));

        let z = b.carry_free_add(&DigitVector::zero(3), &y, 1).unwrap();
        assert_eq!(z.as_slice(), &[1, 1, 0]);
        assert_eq!(b.encode(&z).unwrap(), BigUint::from(13u32));

        let x = b.digits(vec![9, 0, 0]).unwrap();
        assert!(matches!(
            b.carry_free_add(&x, &y, 1),
            Err(Error::NotInTildeBox { index: 1, .. })
        ));
        assert!(b.carry_free_add(&DigitVector::zero(3), &y, 3).is_err());
    }

    #[test]
    fn gamma_closed_form_default_rule() {
        let b = RadixBasis::default_shifted(30).unwrap();
        for k in 0..=30i64 {
            let expected = BigRational::new((k + 2).into(), (2 * k + 2).into());
            assert_eq!(b.gamma(k as usize).unwrap(), &expected, "k = {k}");
        }
    }

    #[test]
    fn round_trip_exhaustive_small_levels() {
        let b = RadixBasis::default_shifted(3).unwrap();
        for k in 1..=3 {
            let n_k = b.prefix_u64(k).unwrap();
            for n in 0..n_k {
                let x = b.decode_u64(n, k).unwrap();
                assert_eq!(b.encode(&x).unwrap(), BigUint::from(n));
            }
        }
    }

    #[test]
    fn carry_free_exhaustive_level_three() {
        let b = RadixBasis::default_shifted(3).unwrap();
        let pairs = sigma_enumerate(3);
        for x1 in 0..9 {
            for x2 in 0..24 {
                for x3 in 0..45 {
                    let x = b.digits(vec![x1, x2, x3]).unwrap();
                    let bx = b.encode(&x).unwrap();
                    for y in &pairs {
                        let by = b.sigma_value(y).unwrap();
                        for m in 1..=2u32 {
                            let z = b.carry_free_add(&x, y, m).unwrap();
                            assert_eq!(b.encode(&z).unwrap(), &bx + &by * m);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn encode_respects_reverse_lex_order(
            a in proptest::collection::vec(0u64..12, 4),
            c in proptest::collection::vec(0u64..12, 4),
        ) {
            let b = basis();
            let x = b.digits(a.clone()).unwrap();
            let y = b.digits(c.clone()).unwrap();
            let rev = |v: &Vec<u64>| v.iter().rev().copied().collect::<Vec<_>>();
            let ord = rev(&a).cmp(&rev(&c));
            prop_assert_eq!(b.encode(&x).unwrap().cmp(&b.encode(&y).unwrap()), ord);
        }

        #[test]
        fn decode_inverts_encode_big(n in 0u64..u64::MAX, k in 10usize..13) {
            let b = RadixBasis::default_shifted(12).unwrap();
            let n = BigUint::from(n);
            let x = b.decode(&n, k).unwrap();
            prop_assert_eq!(b.encode(&x).unwrap(), n);
        }
    }
}
