//! Seed derivation for reproducible random streams.
//!
//! Every stream is a ChaCha20 generator keyed by SHA-256 over the root seed
//! and a label path, so `(seed, ["pairing", "drop", "3"])` always yields the
//! same bytes no matter which thread or in which order it is requested.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::linalg::{c, CMat, C64};

pub type StreamRng = ChaCha20Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedPath {
    seed: u64,
    path: Vec<String>,
}

impl SeedPath {
    pub fn new(seed: u64) -> Self {
        Self { seed, path: Vec::new() }
    }

    pub fn child(&self, label: impl std::fmt::Display) -> Self {
        let mut path = self.path.clone();
        path.push(label.to_string());
        Self { seed: self.seed, path }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn key(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"cogradio-stream");
        h.update(self.seed.to_le_bytes());
        for p in &self.path {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p.as_bytes());
        }
        h.finalize().into()
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::from_seed(self.key())
    }
}

/// One draw of CN(0, 1): real and imaginary parts N(0, 1/2).
pub fn cn<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. CN(0, 1) entries, filled row-major.
pub fn cn_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let vals: Vec<C64> = (0..rows * cols).map(|_| cn(rng)).collect();
    CMat::from_row_slice(rows, cols, &vals)
}
