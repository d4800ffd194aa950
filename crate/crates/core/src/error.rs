use thiserror::Error;

/// Errors produced by the analytic model, the optimizer and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MacError {
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityDomain(f64),

    /// The success index leaves no remaining contender (`L - i == 0`).
    #[error("success index {index} is degenerate for {l_active} contending devices (need index < {l_active})")]
    DegenerateIndex { l_active: u32, index: u32 },

    #[error("finite-difference step {h} moves p = {p} outside (0, 1)")]
    StepTooLarge { p: f64, h: f64 },

    #[error("no admission count fits the frame budget of {budget} us for L = {l_active}")]
    Infeasible { l_active: u32, budget: f64 },

    #[error("invalid timing parameters: {0}")]
    InvalidTiming(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, MacError>;
