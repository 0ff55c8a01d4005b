//! Channel realizations and the PU transmit covariance.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cmat, diag_real, mat_json, CMat};
use crate::rng::{cn_matrix, SeedPath};

/// The four links of one cognitive pair: `H13` PU-TX→SU-RX, `H14` PU-TX→PU-RX,
/// `H23` SU-TX→SU-RX, `H24` SU-TX→PU-RX.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub n_t: usize,
    #[serde(with = "mat_json")]
    pub h13: CMat,
    #[serde(with = "mat_json")]
    pub h14: CMat,
    #[serde(with = "mat_json")]
    pub h23: CMat,
    #[serde(with = "mat_json")]
    pub h24: CMat,
}

impl ChannelSet {
    pub fn new(h13: CMat, h14: CMat, h23: CMat, h24: CMat) -> Result<Self> {
        let n_t = h13.nrows();
        for (name, h) in [("h13", &h13), ("h14", &h14), ("h23", &h23), ("h24", &h24)] {
            if h.nrows() != n_t || h.ncols() != n_t {
                return Err(Error::Dimension(format!("{name} is {}x{}, expected {n_t}x{n_t}", h.nrows(), h.ncols())));
            }
            linalg::ensure_finite(h)?;
        }
        if n_t == 0 {
            return Err(Error::Dimension("empty channel".into()));
        }
        Ok(Self { n_t, h13, h14, h23, h24 })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel set serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ChannelSet = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let set = Self::new(raw.h13, raw.h14, raw.h23, raw.h24)?;
        if set.n_t != raw.n_t {
            return Err(Error::Dimension(format!("n_t {} does not match matrices", raw.n_t)));
        }
        Ok(set)
    }
}

/// The fixed 2×2 channels used for the single-link experiments.
pub fn paper_channels() -> ChannelSet {
    let h13 = cmat(2, 2, &[(-0.7, 0.28), (1.82, 0.2), (-0.35, -0.67), (-1.64, 1.31)]);
    let h14 = cmat(2, 2, &[(0.97, -0.66), (-0.03, 0.77), (-0.07, -0.05), (0.3, -0.32)]);
    let h23 = cmat(2, 2, &[(-1.12, 0.57), (0.41, 1.7), (1.46, -0.92), (1.13, -0.02)]);
    let h24 = cmat(2, 2, &[(-0.77, 0.38), (-0.09, -0.41), (-0.84, -0.61), (0.63, 1.12)]);
    ChannelSet { n_t: 2, h13, h14, h23, h24 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KroneckerParams {
    pub d: f64,
    pub beta: f64,
    pub gamma_t: f64,
    pub gamma_r: f64,
}

impl KroneckerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidArgument(format!("distance {} must be positive", self.d)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("pathloss exponent {}", self.beta)));
        }
        for g in [self.gamma_t, self.gamma_r] {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::InvalidArgument(format!("correlation {g} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Large-scale gain `ρ = 1/(2 d^β)`.
    pub fn rho(&self) -> f64 {
        0.5 / self.d.powf(self.beta)
    }
}

/// `[R]_ij = γ^{|i−j|²}` with `0⁰ = 1` on the diagonal.
pub fn correlation_matrix(n: usize, gamma: f64) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        let k = (i as i32 - j as i32).pow(2);
        linalg::c(gamma.powi(k), 0.0)
    })
}

/// `H = √ρ R_r^{1/2} H_w R_t^{1/2}`.
pub fn gen_kronecker<R: Rng + ?Sized>(params: &KroneckerParams, n_t: usize, rng: &mut R) -> Result<CMat> {
    params.validate()?;
    let rt = linalg::sqrtm_psd(&correlation_matrix(n_t, params.gamma_t))?;
    let rr = linalg::sqrtm_psd(&correlation_matrix(n_t, params.gamma_r))?;
    let hw = cn_matrix(n_t, n_t, rng);
    Ok(rr * hw * rt * linalg::c(params.rho().sqrt(), 0.0))
}

pub fn gen_iid<R: Rng + ?Sized>(n_t: usize, rng: &mut R) -> CMat {
    cn_matrix(n_t, n_t, rng)
}

/// A channel set with i.i.d. CN(0, 1) entries on every link.
pub fn gen_iid_set<R: Rng + ?Sized>(n_t: usize, rng: &mut R) -> ChannelSet {
    let h13 = gen_iid(n_t, rng);
    let h14 = gen_iid(n_t, rng);
    let h23 = gen_iid(n_t, rng);
    let h24 = gen_iid(n_t, rng);
    ChannelSet { n_t, h13, h14, h23, h24 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PuCovariance {
    #[serde(with = "mat_json")]
    pub sigma: CMat,
    pub p_p: f64,
}

/// Water-filled PU covariance `Σ = V diag(P) V^H` on the right singular
/// vectors of `H14`.
pub fn pu_covariance(h14: &CMat, p_p: f64) -> Result<PuCovariance> {
    if !(p_p >= 0.0) || !p_p.is_finite() {
        return Err(Error::InvalidArgument(format!("PU power {p_p} must be nonnegative")));
    }
    let d = linalg::svd(h14)?;
    if d.s.iter().all(|&s| s == 0.0) {
        return Err(Error::InvalidArgument("H14 is zero".into()));
    }
    let wf = linalg::water_fill(&d.s, p_p)?;
    let sigma = linalg::hermitian_part(&(&d.v * diag_real(&wf.power) * d.v.adjoint()));
    Ok(PuCovariance { sigma, p_p })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairNodes {
    pub pu_tx: [f64; 2],
    pub pu_rx: [f64; 2],
    pub su_tx: [f64; 2],
    pub su_rx: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub region_side: f64,
    pub pairs: Vec<PairNodes>,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

const MIN_SEPARATION: f64 = 1e-9;

/// Places PU-TX, PU-RX, SU-TX and SU-RX of each of `m` pairs uniformly in a
/// square of side `region_side`. Layouts with coincident nodes are redrawn.
pub fn deploy<R: Rng + ?Sized>(m: usize, region_side: f64, rng: &mut R) -> Result<Deployment> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one pair".into()));
    }
    if !(region_side > 0.0 && region_side.is_finite()) {
        return Err(Error::InvalidArgument(format!("region side {region_side}")));
    }
    loop {
        let mut pt = || [rng.random::<f64>() * region_side, rng.random::<f64>() * region_side];
        let pairs: Vec<PairNodes> =
            (0..m).map(|_| PairNodes { pu_tx: pt(), pu_rx: pt(), su_tx: pt(), su_rx: pt() }).collect();
        let all: Vec<[f64; 2]> = pairs.iter().flat_map(|p| [p.pu_tx, p.pu_rx, p.su_tx, p.su_rx]).collect();
        let separated = all
            .iter()
            .enumerate()
            .all(|(i, a)| all[i + 1..].iter().all(|b| dist(*a, *b) > MIN_SEPARATION));
        if separated {
            return Ok(Deployment { region_side, pairs });
        }
    }
}

pub const PATHLOSS_EXPONENT: f64 = 3.0;

fn link<R: Rng + ?Sized>(from: [f64; 2], to: [f64; 2], n_t: usize, rng: &mut R) -> Result<CMat> {
    let params = KroneckerParams {
        d: dist(from, to),
        beta: PATHLOSS_EXPONENT,
        gamma_t: rng.random::<f64>(),
        gamma_r: rng.random::<f64>(),
    };
    gen_kronecker(&params, n_t, rng)
}

/// Channels seen when SU `i` is paired with PU `j`.
///
/// Each physical link draws from its own stream under `streams`, so `H23`
/// of SU `i` and `H14` of PU `j` are the same for every candidate partner.
pub fn channels_for_pair(dep: &Deployment, i: usize, j: usize, n_t: usize, streams: &SeedPath) -> Result<ChannelSet> {
    let m = dep.pairs.len();
    if i >= m || j >= m {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) outside 0..{m}")));
    }
    let (su, pu) = (&dep.pairs[i], &dep.pairs[j]);
    let h13 = link(pu.pu_tx, su.su_rx, n_t, &mut streams.child(format!("h13/{j}->{i}")).rng())?;
    let h14 = link(pu.pu_tx, pu.pu_rx, n_t, &mut streams.child(format!("h14/{j}")).rng())?;
    let h23 = link(su.su_tx, su.su_rx, n_t, &mut streams.child(format!("h23/{i}")).rng())?;
    let h24 = link(su.su_tx, pu.pu_rx, n_t, &mut streams.child(format!("h24/{i}->{j}")).rng())?;
    ChannelSet::new(h13, h14, h23, h24)
}
