//! Sum MSE, the MMSE receive filter and the optimal THP feedback matrix.

use nalgebra::DMatrix;

use super::{ensure_strictly_lower, TransceiverDesign};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64};

/// `‖W H23 F − C‖_F² + ‖W‖_F²`.
pub fn smse(design: &TransceiverDesign, h23: &CMat) -> f64 {
    linalg::fro2(&(&design.w * h23 * &design.f - design.c())) + linalg::fro2(&design.w)
}

/// `W = C F^H H23^H (H23 F F^H H23^H + I)^{-1}`.
pub fn mmse_receiver(f: &CMat, h23: &CMat, b: &CMat) -> Result<CMat> {
    ensure_strictly_lower(b)?;
    let n = h23.nrows();
    let hf = h23 * f;
    let r = &hf * hf.adjoint() + linalg::eye(n);
    let cmat = linalg::eye(n) + b;
    // r is Hermitian, so W^H = r^{-1} (C F^H H^H)^H.
    let rhs = &hf * cmat.adjoint();
    let wh = linalg::cholesky_hpd(&r)
        .ok_or_else(|| Error::Singular("receiver covariance".into()))?
        .solve(&rhs);
    Ok(wh.adjoint())
}

#[derive(Clone, Debug)]
pub struct Feedback {
    pub b: CMat,
    /// `μ_k^*` for `k = 1..N_T`, each of length `k`.
    pub multipliers: Vec<CVec>,
    /// Largest residual of the multiplier system.
    pub residual: f64,
}

/// `Δ1 = F^H H^H (H F F^H H^H + I)^{-1} H F − I` and `Δ2 = F^H H^H H F`.
pub fn deltas(f: &CMat, h23: &CMat) -> Result<(CMat, CMat)> {
    let n = f.ncols();
    let hf = h23 * f;
    let r = &hf * hf.adjoint() + linalg::eye(hf.nrows());
    let d1 = hf.adjoint() * linalg::inv_hpd(&r)? * &hf - linalg::eye(n);
    let d2 = hf.adjoint() * &hf;
    Ok((d1, d2))
}

fn offset(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Optimal strictly lower triangular feedback for a given `F`, via the
/// Lagrange multipliers of the triangularity constraints.
pub fn solve_feedback(f: &CMat, h23: &CMat) -> Result<Feedback> {
    let n = f.ncols();
    let (d1, d2) = deltas(f, h23)?;
    let ipd2 = linalg::eye(n) + &d2;
    let d1p = &d1 * &ipd2;
    let size = offset(n);
    // Unknown block k (0-based) holds μ_{k+1}^* with k+1 entries at
    // offset(k). Row (k, r) is entry r of equation k.
    let mut sys = DMatrix::<C64>::zeros(size, size);
    let mut rhs = CVec::zeros(size);
    for k in 0..n {
        for r in 0..=k {
            let row = offset(k) + r;
            sys[(row, offset(k) + r)] += c(1.0, 0.0) + d2[(k, k)];
            for i in 0..n {
                if i != k && r <= i {
                    sys[(row, offset(i) + r)] += d2[(i, k)];
                }
            }
            rhs[row] = -d1p[(r, k)];
        }
    }
    let sol = sys
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("multiplier system".into()))?;
    let residual = linalg::max_abs(&(&sys * &sol - &rhs));
    let scale = linalg::max_abs(&rhs).max(1.0);
    if !residual.is_finite() || residual > 1e-8 * scale {
        return Err(Error::Singular(format!("multiplier system residual {residual:.3e}")));
    }
    let multipliers: Vec<CVec> = (0..n).map(|k| sol.rows(offset(k), k + 1).into_owned()).collect();
    let mut m = d1;
    for (k, mu) in multipliers.iter().enumerate() {
        for r in 0..=k {
            m[(r, k)] += mu[r];
        }
    }
    let mut b = m * ipd2;
    let bscale = linalg::max_abs(&b).max(1.0);
    for j in 0..n {
        for i in 0..=j {
            if b[(i, j)].norm() > 1e-9 * bscale {
                return Err(Error::Singular(format!("feedback entry ({i}, {j}) = {:.3e} not eliminated", b[(i, j)].norm())));
            }
            b[(i, j)] = c(0.0, 0.0);
        }
    }
    Ok(Feedback { b, multipliers, residual })
}

/// Residual of the multiplier equations for given multipliers.
pub fn multiplier_residual(f: &CMat, h23: &CMat, multipliers: &[CVec]) -> Result<f64> {
    let n = f.ncols();
    let (d1, d2) = deltas(f, h23)?;
    let ck = &d1 * (linalg::eye(n) + &d2);
    let mut worst = 0.0_f64;
    for k in 0..n {
        for r in 0..=k {
            let mut v = (c(1.0, 0.0) + d2[(k, k)]) * multipliers[k][r] + ck[(r, k)];
            for i in 0..n {
                if i != k && r <= i {
                    v += d2[(i, k)] * multipliers[i][r];
                }
            }
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

/// The MMSE receiver and optimal feedback for `F`, paired with `A`.
pub fn complete_design(a: &CMat, f: &CMat, h23: &CMat) -> Result<TransceiverDesign> {
    let fb = solve_feedback(f, h23)?;
    let w = mmse_receiver(f, h23, &fb.b)?;
    Ok(TransceiverDesign { a: a.clone(), b: fb.b, f: f.clone(), w })
}
