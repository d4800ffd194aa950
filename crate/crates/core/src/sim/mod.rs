//! Frame-level discrete-event simulation of the hybrid protocol and the
//! scenario driver shared with the baselines.

mod engine;
mod scenario;

pub use engine::{
    run_cop, run_frame, run_frame_with_plan, CopEvent, CopOutcome, DeviceMode, DeviceState, FramePlan,
    FrameTrace, Grant, StopReason, TraceRecord,
};
pub use scenario::{
    run_scenario, run_scenario_with, ActivityRule, BaselineRecord, FrameRecord, Protocol, ScenarioConfig,
};
