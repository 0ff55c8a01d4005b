//! THP transceiver design under the PU coexistence constraint.

pub mod coexist;
pub mod design;
pub mod gzf;
pub mod mmse;
pub mod ser;
pub mod thp;

use serde::{Deserialize, Serialize};

use crate::channel::{pu_covariance, ChannelSet, PuCovariance};
use crate::error::{Error, Result};
use crate::linalg::{self, mat_json, CMat};

pub use coexist::{coexistence_gap, pu_rate_alone, pu_rate_with_su, RelaxedConstraintSet};
pub use design::{joint_design, solve_subproblem, DesignConfig, ExpansionPoint, JointOutcome, SurrogateKind, Termination, TraceRow};
pub use gzf::{generalized_zf, GzfConfig, GzfOutcome};
pub use mmse::{complete_design, mmse_receiver, smse, solve_feedback, Feedback};
pub use ser::{ser_simulate, SerEstimate};
pub use thp::{thp_decode, thp_encode, ThpConfig, ThpFrame};

/// Relay matrix `A`, THP feedback `B`, transmit beamformer `F` and receive
/// beamformer `W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransceiverDesign {
    #[serde(with = "mat_json")]
    pub a: CMat,
    #[serde(with = "mat_json")]
    pub b: CMat,
    #[serde(with = "mat_json")]
    pub f: CMat,
    #[serde(with = "mat_json")]
    pub w: CMat,
}

impl TransceiverDesign {
    pub fn zero(n: usize) -> Self {
        let z = linalg::zeros(n, n);
        Self { a: z.clone(), b: z.clone(), f: z.clone(), w: z }
    }

    pub fn n_t(&self) -> usize {
        self.f.nrows()
    }

    /// `C = I + B`.
    pub fn c(&self) -> CMat {
        linalg::eye(self.b.nrows()) + &self.b
    }

    /// `tr(F F^H) + tr(A Σ A^H)`.
    pub fn power(&self, sigma: &CMat) -> f64 {
        linalg::fro2(&self.f) + linalg::tr(&(&self.a * sigma * self.a.adjoint()))
    }

    pub fn relay_power(&self, sigma: &CMat) -> f64 {
        linalg::tr(&(&self.a * sigma * self.a.adjoint()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        ensure_strictly_lower(&d.b)?;
        Ok(d)
    }
}

/// Rejects any nonzero entry on or above the diagonal.
pub fn ensure_strictly_lower(b: &CMat) -> Result<()> {
    if !b.is_square() {
        return Err(Error::Dimension("feedback matrix must be square".into()));
    }
    for j in 0..b.ncols() {
        for i in 0..=j {
            if b[(i, j)] != linalg::c(0.0, 0.0) {
                return Err(Error::InvalidArgument(format!("feedback entry ({i}, {j}) is on or above the diagonal")));
            }
        }
    }
    Ok(())
}

/// One cognitive link with its PU covariance and SU power budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignProblem {
    pub channels: ChannelSet,
    pub sigma: PuCovariance,
    pub p_t: f64,
    pub config: DesignConfig,
}

impl DesignProblem {
    pub fn new(channels: ChannelSet, p_p: f64, p_t: f64) -> Result<Self> {
        if !(p_t > 0.0) || !p_t.is_finite() {
            return Err(Error::InvalidArgument(format!("P_T {p_t} must be positive")));
        }
        let sigma = pu_covariance(&channels.h14, p_p)?;
        Ok(Self { channels, sigma, p_t, config: DesignConfig::default() })
    }

    pub fn with_config(mut self, config: DesignConfig) -> Self {
        self.config = config;
        self
    }

    pub fn n_t(&self) -> usize {
        self.channels.n_t
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
