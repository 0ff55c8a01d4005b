//! Monte Carlo symbol error rate of the THP link.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::thp::{thp_decode, thp_encode, ThpConfig};
use super::{DesignProblem, TransceiverDesign};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::rng::{cn, SeedPath};

/// Frames per RNG shard. Fixed so results do not depend on thread count.
pub const FRAMES_PER_SHARD: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerEstimate {
    pub errors: u64,
    pub symbols: u64,
    pub ser: f64,
    /// 95% Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = k as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

impl SerEstimate {
    pub fn from_counts(errors: u64, symbols: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, symbols);
        let ser = if symbols == 0 { 0.0 } else { errors as f64 / symbols as f64 };
        Self { errors, symbols, ser, ci_low, ci_high }
    }
}

/// Knobs for the simulated link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkModel {
    /// Receiver noise variance per antenna.
    pub noise_var: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        Self { noise_var: 1.0 }
    }
}

struct Link<'a> {
    design: &'a TransceiverDesign,
    thp: &'a ThpConfig,
    h13: &'a CMat,
    h23: &'a CMat,
    s_map: CMat,
    sigma_half: CMat,
    noise_sd: f64,
}

impl Link<'_> {
    fn frame<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let n = self.h23.nrows();
        let symbols: Vec<usize> = (0..n).map(|_| rng.random_range(0..self.thp.qam_order)).collect();
        let dither = self.thp.draw_dither(n, rng);
        let xp = &self.sigma_half * CVec::from_fn(n, |_, _| cn(rng));
        let s = &self.s_map * &xp;
        let frame = thp_encode(&symbols, &s, &self.design.b, &self.design.w, &dither, self.thp)?;
        let u = CVec::from_vec(frame.u);
        let xs = &self.design.f * &u + &self.design.a * &xp;
        let noise = CVec::from_fn(n, |_, _| cn(rng) * self.noise_sd);
        let y = self.h23 * xs + self.h13 * &xp + noise;
        let decided = thp_decode(&y, &self.design.w, &dither, self.thp);
        Ok(decided.iter().zip(&symbols).filter(|(a, b)| a != b).count() as u64)
    }
}

/// SER averaged over receive antennas. The PU signal, data, dither and
/// noise are drawn per frame; frames are split into fixed shards, each
/// with its own stream under `streams`, and summed in shard order.
pub fn ser_simulate(
    design: &TransceiverDesign,
    thp: &ThpConfig,
    problem: &DesignProblem,
    n_frames: usize,
    streams: &SeedPath,
    link: LinkModel,
) -> Result<SerEstimate> {
    if !(link.noise_var >= 0.0) {
        return Err(Error::InvalidArgument("noise variance must be nonnegative".into()));
    }
    let ch = &problem.channels;
    let l = Link {
        design,
        thp,
        h13: &ch.h13,
        h23: &ch.h23,
        s_map: &ch.h13 + &ch.h23 * &design.a,
        sigma_half: linalg::sqrtm_psd(&problem.sigma.sigma)?,
        noise_sd: link.noise_var.sqrt(),
    };
    let n_shards = n_frames.div_ceil(FRAMES_PER_SHARD);
    let counts: Vec<Result<u64>> = (0..n_shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = streams.child(format!("ser-shard/{k}")).rng();
            let frames = FRAMES_PER_SHARD.min(n_frames - k * FRAMES_PER_SHARD);
            (0..frames).try_fold(0u64, |acc, _| Ok(acc + l.frame(&mut rng)?))
        })
        .collect();
    let mut errors = 0;
    for cnt in counts {
        errors += cnt?;
    }
    let symbols = (n_frames * ch.n_t) as u64;
    Ok(SerEstimate::from_counts(errors, symbols))
}

/// `E[|u|²]` per antenna predicted for a dithered precoder output.
pub fn dithered_energy(a_mod: f64) -> f64 {
    2.0 * a_mod * a_mod / 12.0
}
