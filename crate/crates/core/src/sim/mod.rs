//! Config-driven experiment runner.

pub mod config;
pub mod experiments;
pub mod fixture;
pub mod table;

pub use config::{validate, Diagnostic, ExperimentConfig, ExperimentId, PairingSetup};
pub use experiments::run;
pub use fixture::{compute_fixture, fixture_drift, load_fixture, pin_fixture, Fixture};
pub use table::ResultTable;
