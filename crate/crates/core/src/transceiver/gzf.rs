//! Generalized zero-forcing baseline: each of `F` and `A` mixes a
//! water-filled beam on the interfering channel's row space with one on
//! its null space, and the mixing weights are grid-searched.

use serde::{Deserialize, Serialize};

use super::coexist::coexistence_gap;
use super::mmse::{complete_design, smse};
use super::{DesignProblem, TransceiverDesign};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

/// Singular values below this fraction of `‖H‖₂` count as zero.
pub const GZF_RANK_THRESHOLD: f64 = 1e-9;

/// Orthogonal projector onto the row space of `h`.
pub fn row_space_projector(h: &CMat) -> Result<CMat> {
    let d = linalg::svd(h)?;
    let r = d.rank(GZF_RANK_THRESHOLD);
    let v = d.v.columns(0, r).into_owned();
    Ok(&v * v.adjoint())
}

/// Water-filled beam of unit trace on the nonzero right singular
/// directions of `h · proj`, padded to `n×n` with zero columns.
pub fn projected_beam(h: &CMat, proj: &CMat) -> Result<CMat> {
    let n = h.ncols();
    let thresh = GZF_RANK_THRESHOLD * linalg::norm2(h);
    let d = linalg::svd(&(h * proj))?;
    let r = d.rank_abs(thresh);
    let mut out = linalg::zeros(n, n);
    if r == 0 {
        return Ok(out);
    }
    let wf = linalg::water_fill(&d.s[..r], 1.0)?;
    for k in 0..r {
        let col = d.v.column(k) * c(wf.power[k].sqrt(), 0.0);
        out.set_column(k, &col);
    }
    Ok(out)
}

/// The four beams of the baseline.
#[derive(Clone, Debug)]
pub struct GzfBeams {
    /// `F` on the row space of `H24`.
    pub f_interfering: CMat,
    /// `F` on the null space of `H24`.
    pub f_null: CMat,
    /// `A` on the row space of `H23`.
    pub a_interfering: CMat,
    /// `A` on the null space of `H23`.
    pub a_null: CMat,
}

impl GzfBeams {
    pub fn new(problem: &DesignProblem) -> Result<Self> {
        let ch = &problem.channels;
        let eye = linalg::eye(ch.n_t);
        let p24 = row_space_projector(&ch.h24)?;
        let p23 = row_space_projector(&ch.h23)?;
        Ok(Self {
            f_interfering: projected_beam(&ch.h23, &p24)?,
            f_null: projected_beam(&ch.h23, &(&eye - &p24))?,
            a_interfering: projected_beam(&ch.h24, &p23)?,
            a_null: projected_beam(&ch.h24, &(&eye - &p23))?,
        })
    }

    /// `(A, F)` at a grid point; the relay takes whatever power `F` leaves.
    pub fn point(&self, problem: &DesignProblem, alpha_f: f64, gamma_f: f64, gamma_a: f64) -> (CMat, CMat) {
        let f = (&self.f_interfering * c(gamma_f.sqrt(), 0.0) + &self.f_null * c((1.0 - gamma_f).sqrt(), 0.0))
            * c((alpha_f * problem.p_t).sqrt(), 0.0);
        let dir = &self.a_interfering * c(gamma_a.sqrt(), 0.0) + &self.a_null * c((1.0 - gamma_a).sqrt(), 0.0);
        let rest = (problem.p_t - linalg::fro2(&f)).max(0.0);
        let unit = linalg::tr(&(&dir * &problem.sigma.sigma * dir.adjoint()));
        let a = if unit > 1e-12 { &dir * c((rest / unit).sqrt(), 0.0) } else { linalg::zeros(dir.nrows(), dir.ncols()) };
        (a, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GzfConfig {
    /// Points per axis of the `(α_F, γ_F, γ_A)` grid.
    pub resolution: usize,
    /// Grid points with coexistence gap below `−gap_tol` bits are rejected.
    pub gap_tol: f64,
}

impl Default for GzfConfig {
    fn default() -> Self {
        Self { resolution: 21, gap_tol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct GzfOutcome {
    pub design: TransceiverDesign,
    pub smse: f64,
    pub gap: f64,
    pub alpha_f: f64,
    pub gamma_f: f64,
    pub gamma_a: f64,
}

fn grid(res: usize) -> Vec<f64> {
    (0..res).map(|i| i as f64 / (res - 1) as f64).collect()
}

/// Least-SMSE coexistence-feasible point of the baseline grid, with `B`
/// and `W` from the closed forms.
pub fn generalized_zf(problem: &DesignProblem, cfg: &GzfConfig) -> Result<GzfOutcome> {
    if cfg.resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    let beams = GzfBeams::new(problem)?;
    let h23 = &problem.channels.h23;
    let axis = grid(cfg.resolution);
    let mut best: Option<GzfOutcome> = None;
    for &alpha_f in &axis {
        for &gamma_f in &axis {
            for &gamma_a in &axis {
                let (a, f) = beams.point(problem, alpha_f, gamma_f, gamma_a);
                let gap = coexistence_gap(&a, &f, &problem.channels, &problem.sigma)?;
                if !(gap >= -cfg.gap_tol) {
                    continue;
                }
                let design = complete_design(&a, &f, h23)?;
                let s = smse(&design, h23);
                if best.as_ref().is_none_or(|b| s < b.smse) {
                    best = Some(GzfOutcome { design, smse: s, gap, alpha_f, gamma_f, gamma_a });
                }
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible { reason: "no feasible generalized-ZF grid point".into(), certificate: f64::NAN })
}
