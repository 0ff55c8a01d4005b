//! Dense complex linear algebra and subspace geometry.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default tolerance for equality checks.
pub const TOL_EQ: f64 = 1e-9;
/// Default tolerance for orthonormality and Hermitian symmetry checks.
pub const TOL_ORTHO: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds a matrix from row-major `(re, im)` pairs.
pub fn cmat(rows: usize, cols: usize, entries: &[(f64, f64)]) -> CMat {
    assert_eq!(entries.len(), rows * cols, "entry count");
    CMat::from_row_iterator(rows, cols, entries.iter().map(|&(r, i)| c(r, i)))
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &CMat) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Squared Frobenius norm.
pub fn fro2(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest entry modulus.
pub fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, C>>(m: &nalgebra::Matrix<C64, R, C, S>) -> f64 {
    m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
}

/// Real part of the trace.
pub fn tr(m: &CMat) -> f64 {
    m.trace().re
}

/// Largest entry-wise deviation from Hermitian symmetry.
pub fn asymmetry(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn ensure_hermitian(m: &CMat) -> Result<()> {
    ensure_finite(m)?;
    let a = asymmetry(m);
    if a > TOL_ORTHO {
        Err(Error::NotHermitian(a))
    } else {
        Ok(())
    }
}

/// `(m + m^H)/2`, used to scrub rounding asymmetry before Hermitian routines.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: CMat,
    /// Singular values, descending.
    pub s: Vec<f64>,
    pub v: CMat,
}

impl SvdResult {
    pub fn reconstruct(&self) -> CMat {
        let k = self.s.len();
        let mut us = self.u.clone();
        for j in 0..k {
            let sj = self.s[j];
            us.column_mut(j).scale_mut(sj);
        }
        us * self.v.adjoint()
    }

    /// Number of singular values above `rel * s_max`.
    pub fn rank(&self, rel: f64) -> usize {
        let smax = self.s.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&s| s > rel * smax).count()
    }

    /// Number of singular values above an absolute threshold.
    pub fn rank_abs(&self, thresh: f64) -> usize {
        self.s.iter().filter(|&&s| s > thresh).count()
    }
}

/// Thin SVD with singular values sorted descending. Ties keep the input
/// column order. For square input `U` and `V` are unitary.
pub fn svd(m: &CMat) -> Result<SvdResult> {
    ensure_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("requested U");
    let v = dec.v_t.expect("requested V^H").adjoint();
    let raw: Vec<f64> = dec.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].partial_cmp(&raw[a]).unwrap().then(a.cmp(&b)));
    let s = order.iter().map(|&k| raw[k]).collect();
    let u = CMat::from_columns(&order.iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>());
    let v = CMat::from_columns(&order.iter().map(|&k| v.column(k).into_owned()).collect::<Vec<_>>());
    Ok(SvdResult { u, s, v })
}

pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(s)
}

/// Spectral norm.
pub fn norm2(m: &CMat) -> f64 {
    singular_values(m).map(|s| s.first().copied().unwrap_or(0.0)).unwrap_or(f64::NAN)
}

/// Hermitian eigendecomposition with eigenvalues ascending.
pub fn eigh(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    ensure_hermitian(h)?;
    let eig = hermitian_part(h).symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap().then(a.cmp(&b)));
    let sorted = order.iter().map(|&k| vals[k]).collect();
    let vecs = CMat::from_columns(
        &order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>(),
    );
    Ok((sorted, vecs))
}

/// `(λ_min, λ_max)` of a Hermitian matrix.
pub fn lambda_extreme(h: &CMat) -> Result<(f64, f64)> {
    let (vals, _) = eigh(h)?;
    Ok((vals[0], vals[vals.len() - 1]))
}

/// Magnitude of the most negative eigenvalue, 0 when `h ⪰ 0`.
pub fn psd_residual(h: &CMat) -> Result<f64> {
    let (lo, _) = lambda_extreme(h)?;
    Ok((-lo).max(0.0))
}

/// Principal square root of a Hermitian PSD matrix. Small negative
/// eigenvalues from rounding are clamped to zero.
pub fn sqrtm_psd(h: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh(h)?;
    let scale = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    if let Some(&lo) = vals.first() {
        if lo < -1e-8 * scale {
            return Err(Error::NotPsd(-lo));
        }
    }
    let d = CMat::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)),
    ));
    Ok(&vecs * d * vecs.adjoint())
}

/// Cholesky factor of the Hermitian part of `h`, or `None` unless it is
/// positive definite. nalgebra's complex factorization takes complex square
/// roots of negative pivots instead of failing, so pivots are checked here.
pub fn cholesky_hpd(h: &CMat) -> Option<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let chol = hermitian_part(h).cholesky()?;
    let ok = chol.l_dirty().diagonal().iter().all(|d| d.re > 0.0 && d.im.abs() <= 1e-10 * d.re);
    ok.then_some(chol)
}

/// `ln det(h)` for Hermitian positive definite `h`; `None` otherwise.
pub fn ln_det_hpd(h: &CMat) -> Option<f64> {
    let chol = cholesky_hpd(h)?;
    Some(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>())
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inv_hpd(h: &CMat) -> Result<CMat> {
    cholesky_hpd(h)
        .map(|ch| ch.inverse())
        .ok_or_else(|| Error::Singular("matrix not positive definite".into()))
}

pub fn inv(m: &CMat) -> Result<CMat> {
    m.clone().try_inverse().ok_or_else(|| Error::Singular("matrix not invertible".into()))
}

/// Column stacking.
pub fn vec_mat(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_mat`].
pub fn unvec(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Orthonormal basis of the leading `r` left singular vectors.
pub fn leading_left_basis(m: &CMat, r: usize) -> Result<CMat> {
    let d = svd(m)?;
    Ok(d.u.columns(0, r.min(d.u.ncols())).into_owned())
}

/// Largest deviation of `B^H B` from the identity.
pub fn gram_residual(b: &CMat) -> f64 {
    let g = b.adjoint() * b;
    (g - eye(b.ncols())).iter().fold(0.0_f64, |a, z| a.max(z.norm()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceAngles {
    /// Principal angles in `[0, π/2]`, ascending.
    pub angles: Vec<f64>,
}

fn check_bases(b1: &CMat, b2: &CMat) -> Result<()> {
    if b1.nrows() != b2.nrows() {
        return Err(Error::Dimension(format!("{} vs {} rows", b1.nrows(), b2.nrows())));
    }
    for b in [b1, b2] {
        ensure_finite(b)?;
        let g = gram_residual(b);
        if g > TOL_ORTHO {
            return Err(Error::NotOrthonormal(g));
        }
    }
    Ok(())
}

/// Principal angles between the column spans of two orthonormal bases.
pub fn principal_angles(b1: &CMat, b2: &CMat) -> Result<SubspaceAngles> {
    check_bases(b1, b2)?;
    let cosines = singular_values(&(b1.adjoint() * b2))?;
    // Descending cosines give ascending angles.
    let angles = cosines.iter().map(|&s| s.clamp(0.0, 1.0).acos()).collect();
    Ok(SubspaceAngles { angles })
}

/// `sqrt(Σ sin²θ_i)` over the principal angles.
///
/// Evaluated as the residual of projecting the smaller basis onto the
/// larger one, `‖(I − B B^H) S‖_F`, which keeps full relative accuracy for
/// nearly aligned subspaces where `sin(arccos σ)` only resolves `√ε`.
pub fn chordal_distance(b1: &CMat, b2: &CMat) -> Result<f64> {
    check_bases(b1, b2)?;
    let (small, big) = if b1.ncols() <= b2.ncols() { (b1, b2) } else { (b2, b1) };
    Ok(fro2(&(small - big * (big.adjoint() * small))).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaterFilling {
    pub power: Vec<f64>,
    /// Water level μ.
    pub level: f64,
}

/// Water-filling `P_i = (μ − 1/λ_i²)^+` with `Σ P_i = budget`.
pub fn water_fill(gains: &[f64], budget: f64) -> Result<WaterFilling> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("budget {budget}")));
    }
    if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::InvalidArgument("gains must be finite and nonnegative".into()));
    }
    let floor: Vec<f64> = gains.iter().map(|&g| if g > 0.0 { 1.0 / (g * g) } else { f64::INFINITY }).collect();
    let mut sorted: Vec<f64> = floor.iter().copied().filter(|f| f.is_finite()).collect();
    if sorted.is_empty() {
        if budget == 0.0 {
            return Ok(WaterFilling { power: vec![0.0; gains.len()], level: 0.0 });
        }
        return Err(Error::InvalidArgument("all gains are zero".into()));
    }
    // Fill the modes in order of increasing floor; with `k` modes active
    // the level is `(budget + Σ floor) / k`, and `k` grows while the next
    // floor sits below that level.
    sorted.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut level = sorted[0] + budget;
    for (k, &f) in sorted.iter().enumerate() {
        if k > 0 && f >= level {
            break;
        }
        sum += f;
        level = (budget + sum) / (k + 1) as f64;
    }
    let power = floor.iter().map(|&f| (level - f).max(0.0)).collect();
    Ok(WaterFilling { power, level })
}

pub fn diag_real(d: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_sorts_and_reconstructs() {
        let m = cmat(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (3.0, 0.0)]);
        let d = svd(&m).unwrap();
        assert!((d.s[0] - 3.0).abs() < 1e-12 && (d.s[1] - 1.0).abs() < 1e-12);
        assert!(fro2(&(d.reconstruct() - m)).sqrt() < 1e-12);
    }

    #[test]
    fn water_fill_simple_cases() {
        let w = water_fill(&[1.0, 1.0], 2.0).unwrap();
        assert!((w.power[0] - 1.0).abs() < 1e-9 && (w.power[1] - 1.0).abs() < 1e-9);
        let w = water_fill(&[1.0, 1e-3], 0.5).unwrap();
        assert!((w.power[0] - 0.5).abs() < 1e-9 && w.power[1] == 0.0);
        assert!(water_fill(&[0.0, 0.0], 1.0).is_err());
        assert_eq!(water_fill(&[0.0], 0.0).unwrap().power, vec![0.0]);
    }

    #[test]
    fn ln_det_matches_eigenvalues() {
        let h = cmat(2, 2, &[(2.0, 0.0), (0.5, 0.5), (0.5, -0.5), (3.0, 0.0)]);
        let (vals, _) = eigh(&h).unwrap();
        let expect: f64 = vals.iter().map(|v| v.ln()).sum();
        assert!((ln_det_hpd(&h).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = cmat(2, 2, &[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(lambda_extreme(&m), Err(Error::NotHermitian(_))));
    }
}

/// Serde adapter storing a matrix as `{rows, cols, re, im}` with row-major
/// component arrays.
pub mod mat_json {
    use super::{c, CMat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        re: Vec<f64>,
        im: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Repr { rows: m.nrows(), cols: m.ncols(), re, im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let r = Repr::deserialize(d)?;
        let n = r.rows * r.cols;
        if r.re.len() != n || r.im.len() != n {
            return Err(serde::de::Error::custom(format!(
                "expected {n} entries for a {}x{} matrix",
                r.rows, r.cols
            )));
        }
        Ok(CMat::from_row_iterator(r.rows, r.cols, r.re.iter().zip(&r.im).map(|(&a, &b)| c(a, b))))
    }
}
