//! Tomlinson-Harashima precoding with a shared uniform dither.
//!
//! The modulo base is `A = √6` per real dimension so that a dithered
//! precoder output, uniform on `[−A/2, A/2)²`, has unit energy per antenna.
//! Square `M`-QAM points sit on the odd multiples of `A/(2√M)`, which
//! makes the constellation's periodic extension a uniform grid and lets
//! the receiver decide after its own modulo.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ensure_strictly_lower;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThpConfig {
    pub qam_order: usize,
    pub a_mod: f64,
}

/// Modulo base giving unit-energy precoder output.
pub const UNIT_ENERGY_MODULO: f64 = 2.449_489_742_783_178;

impl ThpConfig {
    pub fn new(qam_order: usize) -> Result<Self> {
        Self::with_modulo(qam_order, UNIT_ENERGY_MODULO)
    }

    pub fn with_modulo(qam_order: usize, a_mod: f64) -> Result<Self> {
        let side = (qam_order as f64).sqrt().round() as usize;
        if qam_order < 4 || side * side != qam_order {
            return Err(Error::InvalidArgument(format!("QAM order {qam_order} must be a square ≥ 4")));
        }
        if !(a_mod > 0.0) || !a_mod.is_finite() {
            return Err(Error::InvalidArgument(format!("modulo base {a_mod}")));
        }
        Ok(Self { qam_order, a_mod })
    }

    /// Points per real dimension.
    pub fn side(&self) -> usize {
        (self.qam_order as f64).sqrt().round() as usize
    }

    /// Half the spacing between neighbouring points.
    pub fn half_spacing(&self) -> f64 {
        self.a_mod / (2.0 * self.side() as f64)
    }

    fn level(&self, k: usize) -> f64 {
        (2.0 * k as f64 - (self.side() as f64 - 1.0)) * self.half_spacing()
    }

    pub fn point(&self, symbol: usize) -> C64 {
        let l = self.side();
        c(self.level(symbol % l), self.level(symbol / l))
    }

    pub fn constellation(&self) -> Vec<C64> {
        (0..self.qam_order).map(|s| self.point(s)).collect()
    }

    fn nearest_level(&self, x: f64) -> usize {
        let l = self.side() as f64;
        let k = ((x / self.half_spacing() + (l - 1.0)) / 2.0).round();
        k.clamp(0.0, l - 1.0) as usize
    }

    /// Nearest constellation point, as a symbol index.
    pub fn decide(&self, z: C64) -> usize {
        self.nearest_level(z.re) + self.side() * self.nearest_level(z.im)
    }

    pub fn draw_dither<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<C64> {
        let a = self.a_mod;
        (0..n).map(|_| c((rng.random::<f64>() - 0.5) * a, (rng.random::<f64>() - 0.5) * a)).collect()
    }
}

fn wrap(x: f64, a: f64) -> (f64, i64) {
    let mut k = (x / a + 0.5).floor();
    let mut w = x - a * k;
    if w >= a / 2.0 {
        w -= a;
        k += 1.0;
    } else if w < -a / 2.0 {
        w += a;
        k -= 1.0;
    }
    (w, k as i64)
}

/// Reduces each real and imaginary part into `[−A/2, A/2)`. Returns the
/// wrapped values and integer indices with `x = wrapped + A·index`.
pub fn modulo(x: &[C64], a_mod: f64) -> (Vec<C64>, Vec<(i64, i64)>) {
    x.iter()
        .map(|z| {
            let (re, kr) = wrap(z.re, a_mod);
            let (im, ki) = wrap(z.im, a_mod);
            (c(re, im), (kr, ki))
        })
        .unzip()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThpFrame {
    pub symbols: Vec<usize>,
    /// Data points `v`.
    pub v: Vec<C64>,
    pub d: Vec<C64>,
    pub u: Vec<C64>,
    /// Lattice offsets `j` with `v2 = v + j`.
    pub j: Vec<C64>,
    pub v2: Vec<C64>,
}

/// Sequential THP encoding
/// `u_k = (v_k + d_k − (W s)_k − Σ_{j<k} b_kj u_j) mod A`.
pub fn thp_encode(symbols: &[usize], s: &CVec, b: &CMat, w: &CMat, dither: &[C64], cfg: &ThpConfig) -> Result<ThpFrame> {
    ensure_strictly_lower(b)?;
    let n = b.nrows();
    if symbols.len() != n || dither.len() != n || s.len() != w.ncols() || w.nrows() != n {
        return Err(Error::Dimension("THP frame sizes disagree".into()));
    }
    if symbols.iter().any(|&k| k >= cfg.qam_order) {
        return Err(Error::InvalidArgument("symbol index outside the constellation".into()));
    }
    let v: Vec<C64> = symbols.iter().map(|&k| cfg.point(k)).collect();
    let ws = w * s;
    let mut u = vec![c(0.0, 0.0); n];
    let mut j = vec![c(0.0, 0.0); n];
    for k in 0..n {
        let mut pre = v[k] + dither[k] - ws[k];
        for m in 0..k {
            pre -= b[(k, m)] * u[m];
        }
        let (wrapped, idx) = modulo(&[pre], cfg.a_mod);
        u[k] = wrapped[0];
        j[k] = -c(idx[0].0 as f64, idx[0].1 as f64) * cfg.a_mod;
    }
    let v2 = v.iter().zip(&j).map(|(a, b)| a + b).collect();
    Ok(ThpFrame { symbols: symbols.to_vec(), v, d: dither.to_vec(), u, j, v2 })
}

/// `C^{-1}(v2 + d − W s)`.
pub fn thp_closed_form(frame: &ThpFrame, s: &CVec, b: &CMat, w: &CMat) -> Result<CVec> {
    let n = b.nrows();
    let rhs = CVec::from_fn(n, |k, _| frame.v2[k] + frame.d[k]) - w * s;
    let cm = linalg::eye(n) + b;
    cm.lu().solve(&rhs).ok_or_else(|| Error::Singular("C is singular".into()))
}

/// `v̂2 = W y − d` before the receiver modulo.
pub fn receiver_estimate(y: &CVec, w: &CMat, dither: &[C64]) -> CVec {
    w * y - CVec::from_column_slice(dither)
}

/// Receiver: remove the dither, reduce modulo `A`, decide per antenna.
pub fn thp_decode(y: &CVec, w: &CMat, dither: &[C64], cfg: &ThpConfig) -> Vec<usize> {
    let est = receiver_estimate(y, w, dither);
    let (wrapped, _) = modulo(est.as_slice(), cfg.a_mod);
    wrapped.iter().map(|&z| cfg.decide(z)).collect()
}
