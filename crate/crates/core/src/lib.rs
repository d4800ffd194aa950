//! Analytic model, optimizer and frame-level simulator for a hybrid MAC
//! protocol in which devices first contend with p-persistent CSMA for
//! transmission slots and the winners then transmit in TDMA slots.
//!
//! Each frame consists of a notification period (NP), a contention-only
//! period (COP), an announcement period (AP) and a transmission-only
//! period (TOP). The base station picks the contention probability `p` and
//! the admission cap `M` that maximize delivered bits per frame, and stops
//! the COP when either `M` requests have succeeded or the expected optimal
//! COP length has elapsed.
//!
//! All durations are microseconds; rates are bits per microsecond.

pub mod baselines;
pub mod config;
pub mod contention;
pub mod error;
mod golden;
pub mod metrics;
pub mod optimizer;
pub mod sim;
pub mod sweep;
pub mod timing;

pub use config::{ConfigFile, SweepSpec};
pub use contention::{ContentionPoint, CopForm, Indexing};
pub use error::{MacError, Result};
pub use metrics::SimStats;
pub use optimizer::{optimize, optimize_with, OptResult, SolverOptions};
pub use sim::{run_scenario, run_scenario_with, ActivityRule, FrameTrace, Protocol, ScenarioConfig};
pub use sweep::{sweep, Axis, SweepRow};
pub use timing::TimingParams;
