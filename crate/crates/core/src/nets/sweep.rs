//! Sup-correlation sweeps: `max over members a of |sum_n w(n) a(n)|` for
//! weights supported on a few points.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{e_ratio, Family, PhaseNet};
use crate::error::{Error, Result};

/// Largest grid handled by a single FFT; larger grids use the direct sweep.
pub const DFT_GRID_LIMIT: u64 = 1 << 24;

const ANCHOR_EVERY: u64 = 1 << 12;
const SWEEP_CHUNK: u64 = 1 << 20;

/// `max_j |sum_i w_i e(j t_i / grid)|` over `0 <= j < grid`, with the argmax.
pub fn grid_sup(args: &[u128], weights: &[Complex64], grid: u64) -> Result<(f64, u64)> {
    if args.len() != weights.len() {
        return Err(Error::LengthMismatch(args.len(), weights.len()));
    }
    if grid == 0 {
        return Err(Error::InvalidParameter("grid size must be positive".into()));
    }
    if grid <= DFT_GRID_LIMIT && args.len() >= 16 {
        Ok(fft_sup(args, weights, grid))
    } else {
        Ok(direct_sup(args, weights, grid))
    }
}

fn fft_sup(args: &[u128], weights: &[Complex64], grid: u64) -> (f64, u64) {
    let mut buf = vec![Complex64::new(0.0, 0.0); grid as usize];
    for (&t, &w) in args.iter().zip(weights) {
        buf[(t % grid as u128) as usize] += w;
    }
    let fft = FftPlanner::new().plan_fft_inverse(grid as usize);
    fft.process(&mut buf);
    argmax(buf.iter().map(|z| z.norm()).enumerate())
}

fn argmax(values: impl Iterator<Item = (usize, f64)>) -> (f64, u64) {
    let mut best = (f64::NEG_INFINITY, 0u64);
    for (j, v) in values {
        if v > best.0 {
            best = (v, j as u64);
        }
    }
    best
}

/// Rotation sweep, re-anchored with exact integer phases every few thousand
/// steps. Real weights make `j` and `grid - j` conjugate, so only half the
/// grid is visited.
fn direct_sup(args: &[u128], weights: &[Complex64], grid: u64) -> (f64, u64) {
    let real = weights.iter().all(|w| w.im == 0.0);
    let end = if real { grid / 2 + 1 } else { grid };
    let reduced: Vec<u128> = args.iter().map(|&t| t % grid as u128).collect();
    let steps: Vec<Complex64> = reduced.iter().map(|&t| e_ratio(t, grid)).collect();
    let chunks = end.div_ceil(SWEEP_CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * SWEEP_CHUNK;
            let hi = (lo + SWEEP_CHUNK).min(end);
            let mut best = (f64::NEG_INFINITY, lo);
            let mut z: Vec<Complex64> = Vec::with_capacity(reduced.len());
            let mut j = lo;
            while j < hi {
                z.clear();
                z.extend(
                    reduced
                        .iter()
                        .zip(weights)
                        .map(|(&t, &w)| w * e_ratio(j as u128 * t, grid)),
                );
                let stop = (j + ANCHOR_EVERY).min(hi);
                while j < stop {
                    let s: Complex64 = z.iter().sum();
                    let v = s.norm_sqr();
                    if v > best.0 {
                        best = (v, j);
                    }
                    for (zi, si) in z.iter_mut().zip(&steps) {
                        *zi *= si;
                    }
                    j += 1;
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, 0),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    (best.0.sqrt(), best.1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupCorrelation {
    pub sup: f64,
    pub argmax_index: u64,
    pub argmax_alpha: f64,
    pub grid_size: u64,
    /// Bound on how far the continuum sup can exceed the grid max.
    pub lipschitz_slack: f64,
}

/// `max_j |(1/m) sum_{n=1}^m w(n) e(j n / grid)|`.
pub fn dft_sup_correlation(weights: &[Complex64], grid_size: u64) -> Result<SupCorrelation> {
    let m = weights.len();
    if m == 0 {
        return Err(Error::Empty("weight vector"));
    }
    if grid_size < m as u64 {
        return Err(Error::InvalidParameter(format!(
            "grid size {grid_size} is smaller than m = {m}"
        )));
    }
    let args: Vec<u128> = (1..=m as u128).collect();
    let (raw, j) = grid_sup(&args, weights, grid_size)?;
    let max_w = weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
    Ok(SupCorrelation {
        sup: raw / m as f64,
        argmax_index: j,
        argmax_alpha: j as f64 / grid_size as f64,
        grid_size,
        lipschitz_slack: std::f64::consts::TAU * m as f64 / (2.0 * grid_size as f64) * max_w,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// `max over members of |sum_n w(n) a(n)|`.
    pub sup: f64,
    pub argmax: String,
    /// Members actually evaluated; members that agree on the support are
    /// evaluated once.
    pub evaluated: String,
}

/// Anything that can report its worst correlation against sparse weights.
pub trait NetSweep: Sync {
    fn id(&self) -> String;
    fn family(&self) -> Family;
    fn horizon(&self) -> u64;
    /// Sup-norm radius covered by the net.
    fn radius(&self) -> f64;
    fn member_count(&self) -> u128;
    /// `points` are in `[1, horizon]`.
    fn sweep(&self, points: &[u64], weights: &[Complex64]) -> Result<SweepResult>;
}

fn check_points(horizon: u64, points: &[u64], weights: &[Complex64]) -> Result<()> {
    if points.len() != weights.len() {
        return Err(Error::LengthMismatch(points.len(), weights.len()));
    }
    if let Some(&p) = points.iter().find(|&&p| p == 0 || p > horizon) {
        return Err(Error::InvalidParameter(format!(
            "point {p} outside the net horizon [1, {horizon}]"
        )));
    }
    Ok(())
}

impl PhaseNet {
    /// Beta blocks whose floor profile on `points` differs from the previous
    /// block. Profiles are monotone in beta, so equal ones are adjacent.
    fn distinct_blocks(&self, points: &[u64]) -> Vec<usize> {
        if self.family() != Family::Bracket {
            return vec![0];
        }
        let mut out = Vec::new();
        let mut last: Option<Vec<u64>> = None;
        for (i, beta) in self.betas().iter().enumerate() {
            let profile: Vec<u64> = points.iter().map(|&n| beta.floor_mul(n)).collect();
            if last.as_ref() != Some(&profile) {
                out.push(i);
                last = Some(profile);
            }
        }
        out
    }
}

impl NetSweep for PhaseNet {
    fn id(&self) -> String {
        PhaseNet::id(self)
    }

    fn family(&self) -> Family {
        PhaseNet::family(self)
    }

    fn horizon(&self) -> u64 {
        PhaseNet::horizon(self)
    }

    fn radius(&self) -> f64 {
        self.epsilon()
    }

    fn member_count(&self) -> u128 {
        PhaseNet::member_count(self)
    }

    fn sweep(&self, points: &[u64], weights: &[Complex64]) -> Result<SweepResult> {
        check_points(PhaseNet::horizon(self), points, weights)?;
        let j_count = self.alpha_count();
        let blocks = self.distinct_blocks(points);
        let mut best = (f64::NEG_INFINITY, 0u128);
        for &b in &blocks {
            let base = b as u128 * j_count as u128;
            let args: Vec<u128> = points.iter().map(|&n| self.integer_argument(base, n)).collect();
            let (v, j) = grid_sup(&args, weights, j_count)?;
            if v > best.0 {
                best = (v, base + j as u128);
            }
        }
        Ok(SweepResult {
            sup: best.0,
            argmax: best.1.to_string(),
            evaluated: (blocks.len() as u128 * j_count as u128).to_string(),
        })
    }
}

/// Products `prod_i a_i(n)` of members of bracket nets; enumerated lazily.
#[derive(Debug, Clone)]
pub struct ProductNet {
    factors: Vec<PhaseNet>,
}

impl ProductNet {
    pub fn new(factors: Vec<PhaseNet>) -> Result<Self> {
        let first = factors.first().ok_or(Error::Empty("product net factors"))?;
        if factors.iter().any(|f| f.horizon() != first.horizon()) {
            return Err(Error::InvalidParameter("product factors need a common horizon".into()));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[PhaseNet] {
        &self.factors
    }

    /// Mixed-radix decomposition of a member index: factor 0 varies fastest.
    pub fn member_indices(&self, mut index: u128) -> Vec<u128> {
        self.factors
            .iter()
            .map(|f| {
                let c = f.member_count();
                let i = index % c;
                index /= c;
                i
            })
            .collect()
    }

    pub fn member_value(&self, index: u128, n: u64) -> Complex64 {
        self.member_indices(index)
            .iter()
            .zip(&self.factors)
            .map(|(&i, f)| f.member_phase(i, n))
            .product()
    }

    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "family": Family::Product,
            "N": self.horizon(),
            "factors": self.factors.iter().map(|f| f.describe()).collect::<Vec<_>>(),
            "members": self.member_count().to_string(),
            "radius": self.radius(),
        })
    }
}

impl NetSweep for ProductNet {
    fn id(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(|f| f.id()).collect();
        format!("product[{}]", parts.join(" x "))
    }

    fn family(&self) -> Family {
        Family::Product
    }

    fn horizon(&self) -> u64 {
        self.factors[0].horizon()
    }

    /// Triangle inequality over unimodular factors.
    fn radius(&self) -> f64 {
        self.factors.iter().map(|f| f.epsilon()).sum()
    }

    fn member_count(&self) -> u128 {
        self.factors.iter().map(|f| f.member_count()).product()
    }

    fn sweep(&self, points: &[u64], weights: &[Complex64]) -> Result<SweepResult> {
        check_points(self.horizon(), points, weights)?;
        let total = self.member_count();
        let chunk = 1u128 << 14;
        let chunks = total.div_ceil(chunk);
        let (v, arg) = (0..chunks as u64)
            .into_par_iter()
            .map(|c| {
                let lo = c as u128 * chunk;
                let hi = (lo + chunk).min(total);
                let mut best = (f64::NEG_INFINITY, lo);
                for idx in lo..hi {
                    let s: Complex64 = points
                        .iter()
                        .zip(weights)
                        .map(|(&n, &w)| w * self.member_value(idx, n))
                        .sum();
                    let v = s.norm();
                    if v > best.0 {
                        best = (v, idx);
                    }
                }
                best
            })
            .reduce(
                || (f64::NEG_INFINITY, 0),
                |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            );
        Ok(SweepResult {
            sup: v,
            argmax: arg.to_string(),
            evaluated: total.to_string(),
        })
    }
}

/// A net given by explicit member sequences on `[1, N]`.
#[derive(Debug, Clone)]
pub struct ExplicitNet {
    name: String,
    radius: f64,
    members: Vec<Arc<Vec<Complex64>>>,
}

impl ExplicitNet {
    pub fn new(name: impl Into<String>, radius: f64, members: Vec<Vec<Complex64>>) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("explicit net"))?;
        if let Some(m) = members.iter().find(|m| m.len() != first.len()) {
            return Err(Error::LengthMismatch(first.len(), m.len()));
        }
        Ok(Self {
            name: name.into(),
            radius,
            members: members.into_iter().map(Arc::new).collect(),
        })
    }

    pub fn push(&mut self, member: Vec<Complex64>) -> Result<()> {
        if member.len() as u64 != self.horizon() {
            return Err(Error::LengthMismatch(self.horizon() as usize, member.len()));
        }
        self.members.push(Arc::new(member));
        Ok(())
    }
}

impl NetSweep for ExplicitNet {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn family(&self) -> Family {
        Family::Product
    }

    fn horizon(&self) -> u64 {
        self.members[0].len() as u64
    }

    fn radius(&self) -> f64 {
        self.radius
    }

    fn member_count(&self) -> u128 {
        self.members.len() as u128
    }

    fn sweep(&self, points: &[u64], weights: &[Complex64]) -> Result<SweepResult> {
        check_points(self.horizon(), points, weights)?;
        let (v, arg) = argmax(self.members.iter().enumerate().map(|(i, m)| {
            let s: Complex64 = points
                .iter()
                .zip(weights)
                .map(|(&n, &w)| w * m[n as usize - 1])
                .sum();
            (i, s.norm())
        }));
        Ok(SweepResult {
            sup: v,
            argmax: arg.to_string(),
            evaluated: self.members.len().to_string(),
        })
    }
}
