//! Relay-ratio approximation and SU↔PU assignment.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{channels_for_pair, pu_covariance, Deployment, PuCovariance};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rng::SeedPath;

/// Relay ratio that balances the scalar coexistence condition.
pub fn siso_relay_ratio(p1: f64, p2: f64) -> Result<f64> {
    if !(p1 >= 0.0) || !(p2 >= 0.0) || !p1.is_finite() || !p2.is_finite() {
        return Err(Error::InvalidArgument(format!("powers must be finite and nonnegative: ({p1}, {p2})")));
    }
    if p2 == 0.0 {
        return Ok(0.0);
    }
    let root = (-1.0 + (1.0 + p2 + p1 * p2).sqrt()) / (1.0 + p1);
    Ok(p1 / p2 * root * root)
}

/// SINR with the SU active minus SINR with the SU silent, for real
/// positive scalar gains. Zero at the balancing relay ratio.
pub fn siso_balance_residual(alpha: f64, p1: f64, p2: f64) -> f64 {
    let num = (p1.sqrt() + (alpha * p2).sqrt()).powi(2);
    num / (1.0 + (1.0 - alpha) * p2) - p1
}

/// Inputs to the relay-ratio approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelayRatioTerms {
    pub d_c: f64,
    pub d24_min: f64,
    pub d24_max: f64,
    pub tr_d14_sq: f64,
    pub lambda_max_sigma: f64,
    pub n_t: usize,
}

/// Relative threshold deciding which singular directions span a channel.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// Chordal distance between the left singular subspaces of `h14` and `h24`,
/// each restricted to its numerically nonzero singular values and, when
/// given, to at most `subspace_dim` leading directions.
pub fn channel_chordal_distance(h14: &CMat, h24: &CMat, subspace_dim: Option<usize>) -> Result<f64> {
    let s14 = linalg::svd(h14)?;
    let s24 = linalg::svd(h24)?;
    let cap = subspace_dim.unwrap_or(usize::MAX);
    let r14 = s14.rank(RANK_THRESHOLD).min(cap);
    let r24 = s24.rank(RANK_THRESHOLD).min(cap);
    if r14 == 0 || r24 == 0 {
        return Ok(0.0);
    }
    linalg::chordal_distance(&s14.u.columns(0, r14).into_owned(), &s24.u.columns(0, r24).into_owned())
}

pub fn relay_ratio_terms(h14: &CMat, h24: &CMat, sigma: &PuCovariance, subspace_dim: Option<usize>) -> Result<RelayRatioTerms> {
    let s24 = linalg::singular_values(h24)?;
    let s14 = linalg::singular_values(h14)?;
    let (_, lambda_max_sigma) = linalg::lambda_extreme(&sigma.sigma)?;
    Ok(RelayRatioTerms {
        d_c: channel_chordal_distance(h14, h24, subspace_dim)?,
        d24_min: *s24.last().unwrap(),
        d24_max: s24[0],
        tr_d14_sq: s14.iter().map(|s| s * s).sum(),
        lambda_max_sigma,
        n_t: h14.nrows(),
    })
}

impl RelayRatioTerms {
    pub fn alpha(&self, p_t: f64) -> f64 {
        if self.d24_max == 0.0 || self.lambda_max_sigma <= 0.0 {
            return 0.0;
        }
        let dmin2 = self.d24_min * self.d24_min;
        let num = (dmin2 * self.tr_d14_sq - 1.0 / p_t).max(0.0);
        if num == 0.0 {
            return 0.0;
        }
        let den = self.d24_max.powi(2)
            * ((self.d_c.powi(2) * self.tr_d14_sq + self.n_t as f64) / self.lambda_max_sigma + dmin2 * self.tr_d14_sq);
        (num / den).clamp(0.0, 1.0)
    }
}

/// Approximate fraction of SU power that must relay the PU signal.
pub fn relay_ratio_approx(h14: &CMat, h24: &CMat, sigma: &PuCovariance, p_t: f64, subspace_dim: Option<usize>) -> Result<f64> {
    if !(p_t > 0.0) {
        return Err(Error::InvalidArgument(format!("P_T {p_t} must be positive")));
    }
    if linalg::fro2(h24) == 0.0 {
        return Ok(0.0);
    }
    Ok(relay_ratio_terms(h14, h24, sigma, subspace_dim)?.alpha(p_t))
}

/// `Σ_k log2(1 + (1−α) P_T λ_k²)` over the singular values of `h23`.
pub fn pair_rate_metric(h23: &CMat, alpha: f64, p_t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("relay ratio {alpha} outside [0, 1]")));
    }
    let s = linalg::singular_values(h23)?;
    Ok(s.iter().map(|l| (1.0 + (1.0 - alpha) * p_t * l * l).log2()).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingInstance {
    pub m: usize,
    /// Row-major `M×M` metric, row = SU, column = PU.
    pub r: Vec<f64>,
    /// Row-major `M×M` relay ratios.
    pub alpha: Vec<f64>,
}

impl PairingInstance {
    pub fn new(m: usize, r: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if m == 0 || r.len() != m * m || alpha.len() != m * m {
            return Err(Error::Dimension(format!("instance needs {m}x{m} matrices")));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("metric must be finite".into()));
        }
        if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidArgument("relay ratios must lie in [0, 1]".into()));
        }
        Ok(Self { m, r, alpha })
    }

    /// Instance from a metric alone (relay ratios recorded as zero).
    pub fn from_metric(m: usize, r: Vec<f64>) -> Result<Self> {
        Self::new(m, r, vec![0.0; m * m])
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.m + j]
    }

    pub fn sum_rate(&self, assignment: &[usize]) -> f64 {
        assignment.iter().enumerate().map(|(i, &j)| self.rate(i, j)).sum()
    }
}

/// Builds the pairing metric for every SU/PU combination of a deployment.
pub fn build_instance(dep: &Deployment, n_t: usize, p_t: f64, p_p: f64, streams: &SeedPath) -> Result<PairingInstance> {
    let m = dep.pairs.len();
    let mut r = Vec::with_capacity(m * m);
    let mut alpha = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let ch = channels_for_pair(dep, i, j, n_t, streams)?;
            let sigma = pu_covariance(&ch.h14, p_p)?;
            let a = relay_ratio_approx(&ch.h14, &ch.h24, &sigma, p_t, None)?;
            r.push(pair_rate_metric(&ch.h23, a, p_t)?);
            alpha.push(a);
        }
    }
    PairingInstance::new(m, r, alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    /// 0-based: SU `i` is paired with PU `assignment[i]`.
    #[serde(with = "one_based")]
    pub assignment: Vec<usize>,
    pub sum_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub optimality_gap: Option<f64>,
}

impl PairingResult {
    fn from_assignment(inst: &PairingInstance, assignment: Vec<usize>, iterations: usize, converged: bool) -> Self {
        let sum_rate = inst.sum_rate(&assignment);
        Self { assignment, sum_rate, iterations, converged, optimality_gap: None }
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.assignment.len()];
        self.assignment.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
    }
}

mod one_based {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(a: &[usize], s: S) -> Result<S::Ok, S::Error> {
        a.iter().map(|j| j + 1).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        v.into_iter()
            .map(|j| j.checked_sub(1).ok_or_else(|| serde::de::Error::custom("assignment is 1-based")))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DualConfig {
    /// `γ^(l) = step0 / √l`.
    pub step0: f64,
    /// Prices start uniform in `[0, mu_init_max]`.
    pub mu_init_max: f64,
    pub eps: f64,
    /// Consecutive below-`eps` iterations required to stop.
    pub patience: usize,
    pub max_iter: usize,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self { step0: 0.05, mu_init_max: 2.0, eps: 1e-3, patience: 10, max_iter: 500 }
    }
}

/// Per-row best column of `R_ij − μ_j`; the lowest index wins ties.
fn best_response(inst: &PairingInstance, mu: &[f64]) -> Vec<usize> {
    (0..inst.m)
        .map(|i| {
            let mut best = 0;
            for j in 1..inst.m {
                if inst.rate(i, j) - mu[j] > inst.rate(i, best) - mu[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Moves surplus rows of over-subscribed columns to empty columns whose
/// prices are closest, keeping the strongest row in place.
fn repair(inst: &PairingInstance, t: &[usize], mu: &[f64]) -> Vec<usize> {
    let m = inst.m;
    let mut out = t.to_vec();
    let mut empty: Vec<usize> = (0..m).filter(|j| !t.contains(j)).collect();
    for j in 0..m {
        let mut rows: Vec<usize> = (0..m).filter(|&i| t[i] == j).collect();
        if rows.len() < 2 {
            continue;
        }
        // Best first; ties keep the lower row index.
        rows.sort_by(|&a, &b| inst.rate(b, j).partial_cmp(&inst.rate(a, j)).unwrap().then(a.cmp(&b)));
        for &i in &rows[1..] {
            let (pos, _) = empty
                .iter()
                .enumerate()
                .min_by(|(_, &a), (_, &b)| (mu[a] - mu[j]).abs().partial_cmp(&(mu[b] - mu[j]).abs()).unwrap())
                .expect("an empty column exists for every surplus row");
            out[i] = empty.remove(pos);
        }
    }
    out
}

/// Dual subgradient pairing with a feasibility repair after every price
/// update. Returns the best repaired assignment seen.
pub fn solve_pairing_dual<R: Rng + ?Sized>(inst: &PairingInstance, cfg: &DualConfig, rng: &mut R) -> Result<PairingResult> {
    if !(cfg.eps > 0.0) || !(cfg.step0 > 0.0) || cfg.max_iter == 0 {
        return Err(Error::InvalidArgument("eps, step0 and max_iter must be positive".into()));
    }
    let m = inst.m;
    let mut mu: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * cfg.mu_init_max).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut quiet = 0;
    let mut iterations = 0;
    let mut converged = false;
    for l in 1..=cfg.max_iter {
        iterations = l;
        let t = best_response(inst, &mu);
        let step = cfg.step0 / (l as f64).sqrt();
        let mut counts = vec![0usize; m];
        for &j in &t {
            counts[j] += 1;
        }
        let next: Vec<f64> = (0..m).map(|j| mu[j] - step * (1.0 - counts[j] as f64)).collect();
        let fixed = repair(inst, &t, &next);
        let rate = inst.sum_rate(&fixed);
        if best.as_ref().is_none_or(|(_, r)| rate > *r) {
            best = Some((fixed, rate));
        }
        let dn: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let nn: f64 = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = if nn > 0.0 { dn / nn } else { dn };
        mu = next;
        quiet = if rel < cfg.eps { quiet + 1 } else { 0 };
        if quiet >= cfg.patience {
            converged = true;
            break;
        }
    }
    let (assignment, _) = best.expect("at least one iteration");
    let res = PairingResult::from_assignment(inst, assignment, iterations, converged);
    assert!(res.is_bijection(), "dual pairing produced a non-permutation");
    Ok(res)
}

/// Visits SUs in random order; each takes its best remaining PU.
pub fn greedy_pairing<R: Rng + ?Sized>(inst: &PairingInstance, rng: &mut R) -> PairingResult {
    let m = inst.m;
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut free = vec![true; m];
    let mut assignment = vec![0; m];
    for i in order {
        let j = (0..m)
            .filter(|&j| free[j])
            .fold(None, |acc: Option<usize>, j| match acc {
                Some(b) if inst.rate(i, b) >= inst.rate(i, j) => Some(b),
                _ => Some(j),
            })
            .expect("a free PU remains");
        free[j] = false;
        assignment[i] = j;
    }
    PairingResult::from_assignment(inst, assignment, m, true)
}

pub fn random_pairing<R: Rng + ?Sized>(inst: &PairingInstance, rng: &mut R) -> PairingResult {
    let mut assignment: Vec<usize> = (0..inst.m).collect();
    assignment.shuffle(rng);
    PairingResult::from_assignment(inst, assignment, 1, true)
}

pub const BRUTE_FORCE_MAX_M: usize = 10;

/// Exhaustive search over all `M!` assignments (Heap's algorithm).
pub fn brute_force_pairing(inst: &PairingInstance) -> Result<PairingResult> {
    let m = inst.m;
    if m > BRUTE_FORCE_MAX_M {
        return Err(Error::InvalidArgument(format!("brute force limited to M ≤ {BRUTE_FORCE_MAX_M}, got {m}")));
    }
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best = perm.clone();
    let mut best_rate = inst.sum_rate(&perm);
    let mut c = vec![0usize; m];
    let mut visited = 1;
    let mut i = 1;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let rate = inst.sum_rate(&perm);
            if rate > best_rate {
                best_rate = rate;
                best.copy_from_slice(&perm);
            }
            visited += 1;
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let mut res = PairingResult::from_assignment(inst, best, visited, true);
    res.optimality_gap = Some(0.0);
    Ok(res)
}
