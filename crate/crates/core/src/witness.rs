//! The mod-3 witness `psi`, the sign pattern `eta`, and the witness
//! functions `f_k` / `f~_k` built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::radix::{sigma_enumerate, DigitVector, RadixBasis, SigmaElement};
use crate::ExactRatio;

/// `psi(0) = 1`, `psi(1) = psi(2) = -1`, periodic mod 3.
pub fn psi(n: i64) -> i8 {
    if n.rem_euclid(3) == 0 {
        1
    } else {
        -1
    }
}

/// `sigma_z(x)`: sum of the digits of `x` outside the support of `z`.
pub fn sigma_z(z: &SigmaElement, x: &DigitVector) -> Result<u64> {
    if z.k != x.level() {
        return Err(Error::LevelMismatch {
            left: z.k,
            right: x.level(),
        });
    }
    Ok(x.as_slice()
        .iter()
        .enumerate()
        .filter(|(i, _)| !z.contains(i + 1))
        .map(|(_, &d)| d)
        .sum())
}

/// One of the two values a sign pattern may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Eta {
    Plus,
    MinusThird,
}

impl Eta {
    pub fn value(self) -> ExactRatio {
        match self {
            Eta::Plus => BigRational::one(),
            Eta::MinusThird => BigRational::new((-1).into(), 3.into()),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Eta::Plus => 1.0,
            Eta::MinusThird => -1.0 / 3.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Eta::Plus => "+1",
            Eta::MinusThird => "-1/3",
        }
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Eta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" => Ok(Eta::Plus),
            "-1/3" => Ok(Eta::MinusThird),
            other => Err(Error::Parse(format!("sign value {other:?} is neither +1 nor -1/3"))),
        }
    }
}

/// A sign pattern on the sparse set, keyed by the pair `(a, b)` whose
/// encoding `N_{a-1} + N_{b-1}` is the element. Pairs beyond a given level are
/// simply ignored at that level, so one assignment serves every `k`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EtaAssignment {
    values: BTreeMap<(usize, usize), Eta>,
}

impl EtaAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same sign on every pair of level `k`.
    pub fn constant(k: usize, eta: Eta) -> Self {
        let mut out = Self::new();
        for y in sigma_enumerate(k) {
            out.insert(y.pair(), eta);
        }
        out
    }

    /// Assignment on the pairs of level `k` from a bit mask in lexicographic
    /// pair order: bit `i` set means `-1/3` on the `i`-th pair.
    pub fn from_mask(k: usize, mask: u64) -> Self {
        let mut out = Self::new();
        for (i, y) in sigma_enumerate(k).into_iter().enumerate() {
            let eta = if mask >> i & 1 == 1 {
                Eta::MinusThird
            } else {
                Eta::Plus
            };
            out.insert(y.pair(), eta);
        }
        out
    }

    pub fn insert(&mut self, pair: (usize, usize), eta: Eta) {
        self.values.insert(pair, eta);
    }

    pub fn get(&self, pair: (usize, usize)) -> Option<Eta> {
        self.values.get(&pair).copied()
    }

    pub fn get_sigma(&self, y: &SigmaElement) -> Result<Eta> {
        self.get(y.pair())
            .ok_or_else(|| Error::EtaMissing(format!("pair ({}, {})", y.a, y.b)))
    }

    /// Looks up `eta(s)` for an integer `s` of the sparse set.
    pub fn get_value(&self, basis: &RadixBasis, s: &BigUint) -> Result<Eta> {
        let pair = basis
            .recover_pair(s)
            .ok_or_else(|| Error::NotInSparseSet(s.to_string()))?;
        self.get(pair).ok_or_else(|| Error::EtaMissing(s.to_string()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Eta)> + '_ {
        self.values.iter().map(|(&p, &e)| (p, e))
    }

    /// `{"13": "+1", "325": "-1/3", ...}`, ordered by the integer key.
    pub fn to_json(&self, basis: &RadixBasis) -> Result<String> {
        let mut rows = Vec::with_capacity(self.values.len());
        for (&(a, b), &eta) in &self.values {
            let y = SigmaElement::new(a, b, b)?;
            rows.push((basis.sigma_value(&y)?, eta));
        }
        rows.sort();
        let mut map = Map::new();
        for (s, eta) in rows {
            map.insert(s.to_string(), Value::String(eta.tag().to_string()));
        }
        Ok(serde_json::to_string_pretty(&Value::Object(map)).expect("plain JSON"))
    }

    pub fn from_json(basis: &RadixBasis, text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("eta file: {e}")))?;
        let map = value
            .as_object()
            .ok_or_else(|| Error::Parse("eta file must be a JSON object".into()))?;
        let mut out = Self::new();
        for (key, v) in map {
            let s: BigUint = key
                .parse()
                .map_err(|_| Error::Parse(format!("eta key {key:?} is not an integer")))?;
            let pair = basis
                .recover_pair(&s)
                .ok_or_else(|| Error::NotInSparseSet(key.clone()))?;
            let tag = v
                .as_str()
                .ok_or_else(|| Error::Parse(format!("eta value for {key} must be a string")))?;
            out.insert(pair, tag.parse()?);
        }
        Ok(out)
    }
}

/// Splits the pairs of level `k` into `(Sigma_k^+, Sigma_k^-)`.
pub fn partition_sigma(
    k: usize,
    eta: &EtaAssignment,
) -> Result<(Vec<SigmaElement>, Vec<SigmaElement>)> {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for y in sigma_enumerate(k) {
        match eta.get_sigma(&y)? {
            Eta::Plus => plus.push(y),
            Eta::MinusThird => minus.push(y),
        }
    }
    Ok((plus, minus))
}

/// `f_k` and `f~_k` for a fixed level and sign pattern.
///
/// `f_k(beta(x)) = prod_{z in Sigma_k^-} psi(sigma_z(x))`, and
/// `f~_k = 1_{Omega~_k} f_k`; both vanish at and beyond `N_k`.
#[derive(Debug, Clone)]
pub struct WitnessFunctions {
    k: usize,
    moduli: Vec<u64>,
    n_k: BigUint,
    minus: Vec<(usize, usize)>,
}

impl WitnessFunctions {
    pub fn new(basis: &RadixBasis, k: usize, eta: &EtaAssignment) -> Result<Self> {
        basis.check_level(k)?;
        let (_, minus) = partition_sigma(k, eta)?;
        Ok(Self {
            k,
            moduli: basis.moduli()[..k].to_vec(),
            n_k: basis.prefix(k).clone(),
            minus: minus.iter().map(|y| (y.a - 1, y.b - 1)).collect(),
        })
    }

    pub fn level(&self) -> usize {
        self.k
    }

    pub fn n_k(&self) -> &BigUint {
        &self.n_k
    }

    /// Zero-indexed supports of `Sigma_k^-`.
    pub fn minus_pairs(&self) -> &[(usize, usize)] {
        &self.minus
    }

    /// `f_k` on a digit vector of `Omega_k`.
    pub fn f_digits(&self, digits: &[u64]) -> i8 {
        let total: u64 = digits.iter().map(|d| d % 3).sum();
        let mut sign = 1i8;
        for &(a, b) in &self.minus {
            let s = total + 6 - digits[a] % 3 - digits[b] % 3;
            if s % 3 != 0 {
                sign = -sign;
            }
        }
        sign
    }

    pub fn in_tilde(&self, digits: &[u64]) -> bool {
        digits.iter().zip(&self.moduli).all(|(&d, &m)| d < m - 3)
    }

    fn digits_of(&self, mut n: u64) -> Vec<u64> {
        self.moduli
            .iter()
            .map(|&m| {
                let d = n % m;
                n /= m;
                d
            })
            .collect()
    }

    fn digits_of_big(&self, n: &BigUint) -> Vec<u64> {
        let mut rest = n.clone();
        self.moduli
            .iter()
            .map(|&m| {
                let d = (&rest % m).to_u64().unwrap();
                rest /= m;
                d
            })
            .collect()
    }

    pub fn f(&self, n: &BigUint) -> i8 {
        if n >= &self.n_k {
            return 0;
        }
        match n.to_u64() {
            Some(small) => self.f_digits(&self.digits_of(small)),
            None => self.f_digits(&self.digits_of_big(n)),
        }
    }

    pub fn f_tilde(&self, n: &BigUint) -> i8 {
        if n >= &self.n_k {
            return 0;
        }
        let digits = match n.to_u64() {
            Some(small) => self.digits_of(small),
            None => self.digits_of_big(n),
        };
        if self.in_tilde(&digits) {
            self.f_digits(&digits)
        } else {
            0
        }
    }

    /// `f_k(n)` for `u64` arguments; 0 at and beyond `N_k`.
    pub fn f_u64(&self, n: u64) -> i8 {
        match self.n_k.to_u64() {
            Some(bound) if n >= bound => 0,
            _ => self.f_digits(&self.digits_of(n)),
        }
    }

    pub fn f_tilde_u64(&self, n: u64) -> i8 {
        match self.n_k.to_u64() {
            Some(bound) if n >= bound => 0,
            _ => {
                let digits = self.digits_of(n);
                if self.in_tilde(&digits) {
                    self.f_digits(&digits)
                } else {
                    0
                }
            }
        }
    }

    /// Packed table of `f_k` and the `Omega~_k` indicator over `[0, N_k)`,
    /// or `None` if `N_k` exceeds `cap` entries.
    pub fn table(&self, cap: u64) -> Option<WitnessTable> {
        let n = self.n_k.to_u64().filter(|&n| n <= cap)?;
        let mut codes = Vec::with_capacity(n as usize);
        let mut digits = vec![0u64; self.k];
        for _ in 0..n {
            let mut code = 0u8;
            if self.f_digits(&digits) < 0 {
                code |= WitnessTable::NEGATIVE;
            }
            if self.in_tilde(&digits) {
                code |= WitnessTable::TILDE;
            }
            codes.push(code);
            for (d, &m) in digits.iter_mut().zip(&self.moduli) {
                *d += 1;
                if *d < m {
                    break;
                }
                *d = 0;
            }
        }
        Some(WitnessTable { codes })
    }
}

/// `f_k` and `f~_k` over `[0, N_k)`, one byte per point.
#[derive(Debug, Clone)]
pub struct WitnessTable {
    codes: Vec<u8>,
}

impl WitnessTable {
    const NEGATIVE: u8 = 1;
    const TILDE: u8 = 2;

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    #[inline]
    pub fn f(&self, n: u64) -> i8 {
        match self.codes.get(n as usize) {
            Some(c) if c & Self::NEGATIVE != 0 => -1,
            Some(_) => 1,
            None => 0,
        }
    }

    #[inline]
    pub fn f_tilde(&self, n: u64) -> i8 {
        match self.codes.get(n as usize) {
            Some(c) if c & Self::TILDE == 0 => 0,
            Some(c) if c & Self::NEGATIVE != 0 => -1,
            Some(_) => 1,
            None => 0,
        }
    }
}

/// `f_k(n)` for the sign pattern `eta`.
pub fn f_eval(basis: &RadixBasis, n: &BigUint, k: usize, eta: &EtaAssignment) -> Result<i8> {
    Ok(WitnessFunctions::new(basis, k, eta)?.f(n))
}

/// `f~_k(n)` for the sign pattern `eta`.
pub fn f_tilde_eval(basis: &RadixBasis, n: &BigUint, k: usize, eta: &EtaAssignment) -> Result<i8> {
    Ok(WitnessFunctions::new(basis, k, eta)?.f_tilde(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> RadixBasis {
        RadixBasis::default_shifted(5).unwrap()
    }

    fn eta_13_minus() -> EtaAssignment {
        let mut eta = EtaAssignment::constant(3, Eta::Plus);
        eta.insert((1, 2), Eta::MinusThird);
        eta
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0), 1);
        assert_eq!(psi(5), -1);
        assert_eq!(psi(-1), -1);
        assert_eq!(psi(-3), 1);
        for n in -30..30 {
            assert_eq!(psi(n), psi(n.rem_euclid(3)));
        }
    }

    #[test]
    fn psi_triple_identity_exhaustive() {
        for x in 0..=8i64 {
            for d in 0..=8i64 {
                let lhs = psi(x) * psi(x + d) * psi(x + 2 * d);
                let rhs = if d % 3 == 0 { psi(x) } else { 1 };
                assert_eq!(lhs, rhs, "x = {x}, d = {d}");
            }
        }
    }

    #[test]
    fn sigma_z_examples() {
        let b = basis();
        let x = b.digits(vec![5, 7, 4]).unwrap();
        assert_eq!(sigma_z(&SigmaElement::new(1, 2, 3).unwrap(), &x).unwrap(), 4);
        assert_eq!(sigma_z(&SigmaElement::new(1, 3, 3).unwrap(), &x).unwrap(), 7);
        let x2 = b.digits(vec![5, 7]).unwrap();
        assert_eq!(sigma_z(&SigmaElement::new(1, 2, 2).unwrap(), &x2).unwrap(), 0);
        assert!(sigma_z(&SigmaElement::new(1, 2, 2).unwrap(), &x).is_err());
    }

    #[test]
    fn sigma_z_is_linear_on_carry_free_sums() {
        let b = basis();
        for n in (0..15552u64).step_by(37) {
            let x = b.decode_u64(n, 3).unwrap();
            if !b.in_tilde_box(&x) {
                continue;
            }
            for y in sigma_enumerate(3) {
                for z in sigma_enumerate(3) {
                    let sum = b.carry_free_add(&x, &y, 1).unwrap();
                    assert_eq!(
                        sigma_z(&z, &sum).unwrap(),
                        sigma_z(&z, &x).unwrap() + sigma_z(&z, &y.to_digits()).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn f_examples() {
        let b = basis();
        let eta = eta_13_minus();
        assert_eq!(f_eval(&b, &BigUint::from(324u32), 3, &eta).unwrap(), -1);
        assert_eq!(f_tilde_eval(&b, &BigUint::from(324u32), 3, &eta).unwrap(), -1);
        assert_eq!(f_eval(&b, &BigUint::from(15552u32), 3, &eta).unwrap(), 0);
        assert_eq!(f_tilde_eval(&b, &BigUint::from(15552u32), 3, &eta).unwrap(), 0);

        let plus = EtaAssignment::constant(3, Eta::Plus);
        let w = WitnessFunctions::new(&b, 3, &plus).unwrap();
        assert!((0..15552).all(|n| w.f_u64(n) == 1));
    }

    #[test]
    fn f_tilde_vanishes_off_the_box() {
        let b = basis();
        let eta = EtaAssignment::constant(1, Eta::Plus);
        assert_eq!(f_tilde_eval(&b, &BigUint::from(9u32), 1, &eta).unwrap(), 0);
        assert_eq!(f_tilde_eval(&b, &BigUint::from(12u32), 1, &eta).unwrap(), 0);
        assert_eq!(f_eval(&b, &BigUint::from(9u32), 1, &eta).unwrap(), 1);
    }

    #[test]
    fn f_matches_definition_by_sigma_z() {
        let b = basis();
        let eta = EtaAssignment::from_mask(3, 0b101);
        let (_, minus) = partition_sigma(3, &eta).unwrap();
        let w = WitnessFunctions::new(&b, 3, &eta).unwrap();
        for n in 0..15552u64 {
            let x = b.decode_u64(n, 3).unwrap();
            let direct: i8 = minus
                .iter()
                .map(|z| psi(sigma_z(z, &x).unwrap() as i64))
                .product();
            assert_eq!(w.f_u64(n), direct);
            let tilde = if b.in_tilde_box(&x) { direct } else { 0 };
            assert_eq!(w.f_tilde_u64(n), tilde);
        }
    }

    #[test]
    fn table_agrees_with_pointwise_evaluation() {
        let b = basis();
        let eta = EtaAssignment::from_mask(4, 0b100110);
        let w = WitnessFunctions::new(&b, 4, &eta).unwrap();
        let table = w.table(1 << 22).unwrap();
        assert_eq!(table.len(), 1_166_400);
        for n in (0..1_166_410u64).step_by(7) {
            assert_eq!(table.f(n), w.f_u64(n));
            assert_eq!(table.f_tilde(n), w.f_tilde_u64(n));
            assert_eq!(table.f(n), w.f(&BigUint::from(n)));
        }
        assert!(w.table(1000).is_none());
    }

    #[test]
    fn partition_examples() {
        let eta = EtaAssignment::constant(2, Eta::Plus);
        let (p, m) = partition_sigma(2, &eta).unwrap();
        assert_eq!(p.iter().map(|y| y.pair()).collect::<Vec<_>>(), vec![(1, 2)]);
        assert!(m.is_empty());

        let (p, m) = partition_sigma(3, &eta_13_minus()).unwrap();
        assert_eq!(p.iter().map(|y| y.pair()).collect::<Vec<_>>(), vec![(1, 3), (2, 3)]);
        assert_eq!(m.iter().map(|y| y.pair()).collect::<Vec<_>>(), vec![(1, 2)]);

        let mut missing = EtaAssignment::new();
        missing.insert((1, 2), Eta::Plus);
        missing.insert((1, 3), Eta::Plus);
        assert!(matches!(partition_sigma(3, &missing), Err(Error::EtaMissing(_))));
    }

    #[test]
    fn tilde_digit_residues_are_uniform() {
        let b = RadixBasis::default_shifted(20).unwrap();
        for &m in b.moduli() {
            let mut counts = [0u64; 3];
            for x in 0..m - 3 {
                counts[(x % 3) as usize] += 1;
            }
            assert_eq!(counts[0], counts[1]);
            assert_eq!(counts[1], counts[2]);
        }
    }

    #[test]
    fn json_round_trip() {
        let b = basis();
        let eta = EtaAssignment::from_mask(4, 0b011001);
        let text = eta.to_json(&b).unwrap();
        assert!(text.find("\"13\"").unwrap() < text.find("\"325\"").unwrap());
        assert!(text.contains("\"13\": \"-1/3\""));
        assert_eq!(EtaAssignment::from_json(&b, &text).unwrap(), eta);
        assert!(EtaAssignment::from_json(&b, r#"{"14": "+1"}"#).is_err());
        assert!(EtaAssignment::from_json(&b, r#"{"13": "0"}"#).is_err());
    }
}
