#![allow(dead_code)]

use cogradio::linalg::{self, c, CMat};
use cogradio::rng::{cn_matrix, SeedPath, StreamRng};

pub fn rng(seed: u64) -> StreamRng {
    SeedPath::new(seed).child("test").rng()
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut StreamRng) -> CMat {
    cn_matrix(rows, cols, rng)
}

/// `X X^H` scaled by `scale`, PSD by construction.
pub fn psd(n: usize, rank: usize, scale: f64, rng: &mut StreamRng) -> CMat {
    let x = cn_matrix(n, rank, rng);
    linalg::hermitian_part(&(&x * x.adjoint() * c(scale, 0.0)))
}

/// Hermitian matrix with Gaussian entries.
pub fn hermitian(n: usize, rng: &mut StreamRng) -> CMat {
    linalg::hermitian_part(&cn_matrix(n, n, rng))
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn unitary(n: usize, rng: &mut StreamRng) -> CMat {
    cn_matrix(n, n, rng).qr().q()
}

/// Orthonormal `n×k` basis.
pub fn basis(n: usize, k: usize, rng: &mut StreamRng) -> CMat {
    unitary(n, rng).columns(0, k).into_owned()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
