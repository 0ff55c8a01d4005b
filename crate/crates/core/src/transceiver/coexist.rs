//! PU rate with and without the SU, the coexistence gap, and the relaxed
//! constraint set built around an expansion point.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, PuCovariance};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};

fn ln_det(m: &CMat) -> Result<f64> {
    linalg::ln_det_hpd(m).ok_or_else(|| Error::Singular("log-det argument not positive definite".into()))
}

/// `G = H14 + H24 A`, the effective PU channel with relaying.
pub fn effective_pu_channel(a: &CMat, ch: &ChannelSet) -> CMat {
    &ch.h14 + &ch.h24 * a
}

/// PU rate in bits when the SU transmits, with SU data treated as
/// Gaussian noise: `log2 det(I + X + GΣG^H) − log2 det(I + X)`,
/// `X = H24 F F^H H24^H`.
pub fn pu_rate_with_su(a: &CMat, f: &CMat, ch: &ChannelSet, sigma: &PuCovariance) -> Result<f64> {
    let n = ch.n_t;
    let h24f = &ch.h24 * f;
    let x = &h24f * h24f.adjoint() + linalg::eye(n);
    let g = effective_pu_channel(a, ch);
    let total = &x + &g * &sigma.sigma * g.adjoint();
    Ok((ln_det(&total)? - ln_det(&x)?) / std::f64::consts::LN_2)
}

/// `log2 det(I + H14 Σ H14^H)`.
pub fn pu_rate_alone(ch: &ChannelSet, sigma: &PuCovariance) -> Result<f64> {
    let m = linalg::eye(ch.n_t) + &ch.h14 * &sigma.sigma * ch.h14.adjoint();
    Ok(ln_det(&m)? / std::f64::consts::LN_2)
}

/// PU rate with the SU minus PU rate alone, in bits. Nonnegative when the
/// coexistence constraint holds.
pub fn coexistence_gap(a: &CMat, f: &CMat, ch: &ChannelSet, sigma: &PuCovariance) -> Result<f64> {
    Ok(pu_rate_with_su(a, f, ch, sigma)? - pu_rate_alone(ch, sigma)?)
}

/// Constants and validation predicates of the relaxed coexistence
/// constraint around the expansion point `F̃2`. Logarithms are natural.
#[derive(Clone, Debug)]
pub struct RelaxedConstraintSet {
    pub c0: f64,
    /// `(I + H24 F̃2 H24^H)^{-1}`.
    pub k: CMat,
    pub x_tilde: CMat,
    h24: CMat,
    h14: CMat,
    sigma_half: CMat,
}

impl RelaxedConstraintSet {
    pub fn new(f_tilde2: &CMat, ch: &ChannelSet, sigma: &PuCovariance) -> Result<Self> {
        let n = ch.n_t;
        if f_tilde2.shape() != (n, n) {
            return Err(Error::Dimension("F̃2 must be n_t×n_t".into()));
        }
        let scale = linalg::max_abs(f_tilde2).max(1.0);
        let asym = linalg::asymmetry(f_tilde2);
        if asym > 1e-9 * scale {
            return Err(Error::NotHermitian(asym));
        }
        let lo = linalg::psd_residual(f_tilde2)?;
        if lo > 1e-9 * scale {
            return Err(Error::NotPsd(lo));
        }
        let x_tilde = linalg::hermitian_part(&(&ch.h24 * f_tilde2 * ch.h24.adjoint()));
        let ix = linalg::eye(n) + &x_tilde;
        let k = linalg::inv_hpd(&ix)?;
        let alone = ln_det(&(linalg::eye(n) + &ch.h14 * &sigma.sigma * ch.h14.adjoint()))?;
        let c0 = alone + ln_det(&ix)? - linalg::tr(&(&k * &x_tilde));
        Ok(Self {
            c0,
            k,
            x_tilde,
            h24: ch.h24.clone(),
            h14: ch.h14.clone(),
            sigma_half: linalg::sqrtm_psd(&sigma.sigma)?,
        })
    }

    /// `t1 = ‖H24 F‖²`.
    pub fn t1(&self, f: &CMat) -> f64 {
        linalg::fro2(&(&self.h24 * f))
    }

    /// `t2 = tr(G Σ G^H) = ‖G Σ^{1/2}‖²`.
    pub fn t2(&self, a: &CMat) -> f64 {
        linalg::fro2(&self.g_sigma_half(a))
    }

    fn g_sigma_half(&self, a: &CMat) -> CMat {
        (&self.h14 + &self.h24 * a) * &self.sigma_half
    }

    /// `ln(1 + t1 + t2) − tr(K H24 F2 H24^H)`; feasible when `≥ c0`.
    pub fn relaxed_lhs(&self, t1: f64, t2: f64, f2: &CMat) -> f64 {
        (1.0 + t1 + t2).ln() - linalg::tr(&(&self.k * &self.h24 * f2 * self.h24.adjoint()))
    }

    /// Most negative eigenvalue of `[t, b^H; b, I]`; zero iff `t ≥ ‖b‖²`.
    fn schur_residual(t: f64, b: &CVec) -> Result<f64> {
        let n = b.len();
        let mut m = linalg::eye(n + 1);
        m[(0, 0)] = c(t, 0.0);
        for i in 0..n {
            m[(0, i + 1)] = b[i].conj();
            m[(i + 1, 0)] = b[i];
        }
        linalg::psd_residual(&m)
    }

    /// `[t1, vec(H24 F)^H; vec(H24 F), I] ⪰ 0`.
    pub fn t1_lmi_residual(&self, t1: f64, f: &CMat) -> Result<f64> {
        Self::schur_residual(t1, &linalg::vec_mat(&(&self.h24 * f)))
    }

    /// `[t2, b^H; b, I] ⪰ 0` with `b = vec(G Σ^{1/2})`.
    pub fn t2_lmi_residual(&self, t2: f64, a: &CMat) -> Result<f64> {
        Self::schur_residual(t2, &linalg::vec_mat(&self.g_sigma_half(a)))
    }

    /// `[F2, F; F^H, I] ⪰ 0`, i.e. `F2 ⪰ F F^H`.
    pub fn f2_lmi_residual(f2: &CMat, f: &CMat) -> Result<f64> {
        let (n, m) = f.shape();
        let mut big = linalg::eye(n + m);
        big.view_mut((0, 0), (n, n)).copy_from(f2);
        big.view_mut((0, n), (n, m)).copy_from(f);
        big.view_mut((n, 0), (m, n)).copy_from(&f.adjoint());
        linalg::psd_residual(&linalg::hermitian_part(&big))
    }

    /// First-order upper bound on `ln det(I + H24 F2 H24^H)` at `F̃2`.
    pub fn taylor_upper(&self, f2: &CMat) -> Result<f64> {
        let x = &self.h24 * f2 * self.h24.adjoint();
        let n = x.nrows();
        Ok(ln_det(&(linalg::eye(n) + &self.x_tilde))? + linalg::tr(&(&self.k * (x - &self.x_tilde))))
    }

    pub fn log_det_interference(&self, f2: &CMat) -> Result<f64> {
        let n = self.h24.nrows();
        ln_det(&(linalg::eye(n) + &self.h24 * f2 * self.h24.adjoint()))
    }
}

/// Inputs of the PU-rate bound chain used to derive the relay ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundChainTerms {
    pub n_t: usize,
    pub alpha: f64,
    pub p_t: f64,
    /// `tr(T T^H)` with `T = U24^H U14`.
    pub overlap: f64,
    pub d24_min: f64,
    pub d24_max: f64,
    pub tr_d14_sq: f64,
    pub lambda_max_sigma: f64,
}

impl BoundChainTerms {
    pub fn from_channels(h14: &CMat, h24: &CMat, sigma: &PuCovariance, alpha: f64, p_t: f64) -> Result<Self> {
        let s14 = linalg::svd(h14)?;
        let s24 = linalg::svd(h24)?;
        let t = s24.u.adjoint() * &s14.u;
        let (_, lambda_max_sigma) = linalg::lambda_extreme(&sigma.sigma)?;
        Ok(Self {
            n_t: h14.nrows(),
            alpha,
            p_t,
            overlap: linalg::fro2(&t),
            d24_min: *s24.s.last().unwrap(),
            d24_max: s24.s[0],
            tr_d14_sq: s14.s.iter().map(|s| s * s).sum(),
            lambda_max_sigma,
        })
    }

    /// Upper bound, in nats, on `ln det(I + (I + X)^{-1} G Σ G^H)` for
    /// `F = √((1−α)P_T)·U23` and any `A` with `tr(A Σ A^H) = α P_T`.
    pub fn rate_bound(&self) -> f64 {
        let n = self.n_t as f64;
        let ap = self.alpha * self.p_t;
        let dmax2 = self.d24_max.powi(2);
        let dmin2 = self.d24_min.powi(2);
        let cc = self.tr_d14_sq + 1.0;
        let c1 = self.lambda_max_sigma * cc / (ap * dmax2);
        let d2 = self.overlap;
        let inner = (d2 + c1) * self.tr_d14_sq + d2 * n + c1;
        n * (1.0 + ap * dmax2 / (n * (1.0 + (1.0 - self.alpha) * self.p_t * dmin2)) * inner).ln()
    }
}

/// `N_T ln(1 + λ_max(Σ) tr(D14²)/N_T)`, an upper bound on the PU rate
/// alone in nats.
pub fn pu_rate_alone_bound(h14: &CMat, sigma: &PuCovariance) -> Result<f64> {
    let n = h14.nrows() as f64;
    let tr_d14_sq = linalg::fro2(h14);
    let (_, lmax) = linalg::lambda_extreme(&sigma.sigma)?;
    Ok(n * (1.0 + lmax * tr_d14_sq / n).ln())
}
