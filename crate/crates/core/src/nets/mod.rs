//! Explicit epsilon-nets in `l^inf[N]` for phase families.
//!
//! Every net uses a uniform coefficient grid `j / J`, `J = ceil(2 pi N^p / eps)`
//! with `p = 1` for linear phases `e(alpha n)` and `p = 2` for quadratic phases
//! `e(q n^2)` and bracket phases `e(alpha n floor(beta n))`. Since
//! `|e(a) - e(b)| <= 2 pi |a - b|`, any coefficient within half a grid step of
//! a member is within `eps / 2` in sup norm on `[1, N]`.
//!
//! For bracket phases the profile `(floor(beta n))_{n <= N}` is constant on
//! each interval between consecutive fractions `p/q`, `q <= N`, so one
//! representative per interval suffices.

mod sweep;

pub use sweep::{
    dft_sup_correlation, grid_sup, ExplicitNet, NetSweep, ProductNet, SupCorrelation,
    SweepResult, DFT_GRID_LIMIT,
};

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

pub use num_complex::Complex64 as Complex;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{unit_numerator, RngKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Quadratic,
    Bracket,
    Product,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Linear => "linear",
            Family::Quadratic => "quadratic",
            Family::Bracket => "bracket",
            Family::Product => "product",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(Family::Linear),
            "quadratic" => Ok(Family::Quadratic),
            "bracket" => Ok(Family::Bracket),
            "product" => Ok(Family::Product),
            other => Err(Error::Parse(format!("unknown phase family {other:?}"))),
        }
    }
}

/// `e(t) = exp(2 pi i t)`.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// `e(j r / J)` with the phase reduced exactly in integers first.
#[inline]
pub fn e_ratio(numer: u128, den: u64) -> Complex64 {
    let r = (numer % den as u128) as f64;
    e(r / den as f64)
}

/// A reduced fraction `num / den` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `floor(self * n)`, exact.
    pub fn floor_mul(self, n: u64) -> u64 {
        ((self.num as u128 * n as u128) / self.den as u128) as u64
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// All `p/q` with `1 <= q <= N`, `0 <= p < q`, deduplicated and sorted: the
/// points in `[0, 1)` where some `floor(beta n)`, `n <= N`, jumps.
pub fn bracket_breakpoints(n: u64) -> Result<Vec<Fraction>> {
    if n == 0 {
        return Err(Error::InvalidParameter("horizon N must be at least 1".into()));
    }
    // Farey sequence F_N by the next-term recurrence, dropping the final 1/1
    let mut out = vec![Fraction { num: 0, den: 1 }];
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    while c < d {
        out.push(Fraction { num: c, den: d });
        let k = (n + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
    }
    Ok(out)
}

/// Midpoint of `[lo, hi)`; `hi = 1` for the last interval.
fn midpoint(lo: Fraction, hi: Fraction) -> Fraction {
    let num = lo.num * hi.den + hi.num * lo.den;
    let den = 2 * lo.den * hi.den;
    let g = num_integer::gcd(num, den);
    Fraction {
        num: num / g,
        den: den / g,
    }
}

/// `ceil(2 pi N^power / eps)`, or 1 when `eps >= 2` (every phase is within 2
/// of the constant 1).
pub fn grid_count(n: u64, epsilon: f64, power: u32) -> u64 {
    if epsilon >= 2.0 {
        return 1;
    }
    (TAU * (n as f64).powi(power as i32) / epsilon).ceil() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseNet {
    family: Family,
    horizon: u64,
    epsilon: f64,
    /// Coefficient grid `j / alpha_count`, `j < alpha_count`.
    alpha_count: u64,
    /// Bracket family only: one `beta` per breakpoint interval.
    #[serde(skip)]
    betas: Vec<Fraction>,
}

fn check_params(n: u64, epsilon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("horizon N must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
    }
    Ok(())
}

pub fn linear_net(n: u64, epsilon: f64) -> Result<PhaseNet> {
    check_params(n, epsilon)?;
    Ok(PhaseNet {
        family: Family::Linear,
        horizon: n,
        epsilon,
        alpha_count: grid_count(n, epsilon, 1),
        betas: Vec::new(),
    })
}

pub fn quad_net(n: u64, epsilon: f64) -> Result<PhaseNet> {
    check_params(n, epsilon)?;
    Ok(PhaseNet {
        family: Family::Quadratic,
        horizon: n,
        epsilon,
        alpha_count: grid_count(n, epsilon, 2),
        betas: Vec::new(),
    })
}

pub fn bracket_net(n: u64, epsilon: f64) -> Result<PhaseNet> {
    check_params(n, epsilon)?;
    let points = bracket_breakpoints(n)?;
    let one = Fraction { num: 1, den: 1 };
    let betas = points
        .iter()
        .enumerate()
        .map(|(i, &lo)| midpoint(lo, points.get(i + 1).copied().unwrap_or(one)))
        .collect();
    Ok(PhaseNet {
        family: Family::Bracket,
        horizon: n,
        epsilon,
        alpha_count: grid_count(n, epsilon, 2),
        betas,
    })
}

pub fn build_net(family: Family, n: u64, epsilon: f64) -> Result<PhaseNet> {
    match family {
        Family::Linear => linear_net(n, epsilon),
        Family::Quadratic => quad_net(n, epsilon),
        Family::Bracket => bracket_net(n, epsilon),
        Family::Product => Err(Error::InvalidParameter(
            "product nets are built from factors with ProductNet::new".into(),
        )),
    }
}

/// Parameters of one family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseParams {
    Linear { alpha: f64 },
    Quadratic { q: f64 },
    /// `beta` is the exact fraction `beta_num / 2^53`.
    Bracket { alpha: f64, beta_num: u64 },
}

impl PhaseParams {
    pub fn values(&self, n: u64) -> Vec<Complex64> {
        (1..=n).map(|m| self.value_at(m)).collect()
    }

    pub fn value_at(&self, m: u64) -> Complex64 {
        match *self {
            PhaseParams::Linear { alpha } => e((alpha * m as f64).fract()),
            PhaseParams::Quadratic { q } => e((q * (m * m) as f64).fract()),
            PhaseParams::Bracket { alpha, beta_num } => {
                let floor = ((beta_num as u128 * m as u128) >> 53) as u64;
                e((alpha * (m * floor) as f64).fract())
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            PhaseParams::Linear { .. } => Family::Linear,
            PhaseParams::Quadratic { .. } => Family::Quadratic,
            PhaseParams::Bracket { .. } => Family::Bracket,
        }
    }
}

impl PhaseNet {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha_count(&self) -> u64 {
        self.alpha_count
    }

    pub fn betas(&self) -> &[Fraction] {
        &self.betas
    }

    pub fn beta_count(&self) -> u64 {
        match self.family {
            Family::Bracket => self.betas.len() as u64,
            _ => 1,
        }
    }

    pub fn member_count(&self) -> u128 {
        self.alpha_count as u128 * self.beta_count() as u128
    }

    /// Sup-norm radius the construction guarantees: half a grid step times
    /// the Lipschitz constant `2 pi N^p`.
    pub fn guaranteed_radius(&self) -> f64 {
        if self.alpha_count == 1 && self.epsilon >= 2.0 {
            return 2.0;
        }
        let power = if self.family == Family::Linear { 1 } else { 2 };
        TAU * (self.horizon as f64).powi(power) / (2.0 * self.alpha_count as f64)
    }

    pub fn id(&self) -> String {
        format!("{}:N={}:eps={}", self.family, self.horizon, self.epsilon)
    }

    /// `J * (beta index) + (alpha index)`, the member ordering.
    pub fn member_phase(&self, index: u128, m: u64) -> Complex64 {
        let j = (index % self.alpha_count as u128) as u64;
        let arg = self.integer_argument(index, m);
        e_ratio(j as u128 * (arg % self.alpha_count as u128), self.alpha_count)
    }

    /// The integer `t(m)` with member value `e(j t(m) / J)`.
    pub fn integer_argument(&self, index: u128, m: u64) -> u128 {
        match self.family {
            Family::Linear => m as u128,
            Family::Quadratic => m as u128 * m as u128,
            Family::Bracket | Family::Product => {
                let beta = self.betas[(index / self.alpha_count as u128) as usize];
                m as u128 * beta.floor_mul(m) as u128
            }
        }
    }

    pub fn member_values(&self, index: u128) -> Vec<Complex64> {
        (1..=self.horizon).map(|m| self.member_phase(index, m)).collect()
    }

    /// JSON description; members themselves are never serialized.
    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "N": self.horizon,
            "epsilon": self.epsilon,
            "alpha_grid": self.alpha_count,
            "beta_intervals": self.beta_count(),
            "members": self.member_count().to_string(),
            "guaranteed_radius": self.guaranteed_radius(),
            "lipschitz": "2*pi per unit phase",
        })
    }
}

/// `max_n |a(n) - b(n)|`.
pub fn linf_dist(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Distance from `target` to the nearest member of `net`, by exhaustive
/// search over precomputed member sequences.
pub fn min_net_distance(members: &[Vec<Complex64>], target: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    'members: for m in members {
        let mut worst = 0.0f64;
        for (x, y) in m.iter().zip(target) {
            worst = worst.max((x - y).norm());
            if worst >= best {
                continue 'members;
            }
        }
        best = worst;
    }
    best
}

/// Upper limit on `members * N` for the exhaustive audit.
pub const AUDIT_CELL_LIMIT: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringAudit {
    pub family: Family,
    pub horizon: u64,
    pub epsilon: f64,
    pub net_size: String,
    pub samples: usize,
    /// Max over samples of the min distance to the net.
    pub worst: f64,
    pub passed: bool,
}

pub fn materialize(net: &PhaseNet) -> Result<Vec<Vec<Complex64>>> {
    let cells = net.member_count() * net.horizon() as u128;
    if cells > AUDIT_CELL_LIMIT {
        return Err(Error::NetTooLarge {
            count: net.member_count().to_string(),
            cap: (AUDIT_CELL_LIMIT / net.horizon() as u128) as u64,
        });
    }
    Ok((0..net.member_count()).map(|i| net.member_values(i)).collect())
}

/// Worst min-distance from explicit family members to the net.
pub fn covering_distance(net: &PhaseNet, params: &[PhaseParams]) -> Result<f64> {
    let members = materialize(net)?;
    let mut worst = 0.0f64;
    for p in params {
        if p.family() != net.family() {
            return Err(Error::InvalidParameter(format!(
                "{} sample against a {} net",
                p.family(),
                net.family()
            )));
        }
        worst = worst.max(min_net_distance(&members, &p.values(net.horizon())));
    }
    Ok(worst)
}

/// Draws `samples` random family members and reports the worst distance to
/// the net; must not exceed `epsilon`.
pub fn covering_audit(
    family: Family,
    n: u64,
    epsilon: f64,
    samples: usize,
    rng: RngKind,
    seed: u64,
) -> Result<CoveringAudit> {
    let net = build_net(family, n, epsilon)?;
    let mut r = rng.seeded(seed, 0);
    let unit = |r: &mut _| unit_numerator(r) as f64 / (1u64 << 53) as f64;
    let params: Vec<PhaseParams> = (0..samples)
        .map(|_| match family {
            Family::Linear => PhaseParams::Linear { alpha: unit(&mut r) },
            Family::Quadratic => PhaseParams::Quadratic { q: unit(&mut r) },
            _ => PhaseParams::Bracket {
                alpha: unit(&mut r),
                beta_num: unit_numerator(&mut r),
            },
        })
        .collect();
    let worst = covering_distance(&net, &params)?;
    Ok(CoveringAudit {
        family,
        horizon: n,
        epsilon,
        net_size: net.member_count().to_string(),
        samples,
        worst,
        passed: worst <= epsilon,
    })
}
