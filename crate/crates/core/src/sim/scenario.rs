use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::engine::{run_frame, run_frame_with_plan, FramePlan, FrameTrace};
use crate::baselines::{run_aloha_frame, run_tdma_frame, AlohaConfig, BaselineFrame, TdmaConfig};
use crate::contention::CopForm;
use crate::error::{MacError, Result};
use crate::metrics::{SimStats, StatsAccumulator};
use crate::optimizer::{optimize_with, OptResult, SolverOptions, DEFAULT_P_TOL};
use crate::timing::TimingParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    #[default]
    Hybrid,
    Aloha,
    Tdma,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Hybrid, Protocol::Aloha, Protocol::Tdma];

    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::Hybrid => "hybrid",
            Protocol::Aloha => "aloha",
            Protocol::Tdma => "tdma",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = MacError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hybrid" => Ok(Protocol::Hybrid),
            "aloha" | "slotted-aloha" | "slotted_aloha" => Ok(Protocol::Aloha),
            "tdma" => Ok(Protocol::Tdma),
            other => Err(MacError::Config(format!("unknown protocol `{other}`"))),
        }
    }
}

/// How many of the `K` devices have data in a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityRule {
    /// `L = round(f * K)` every frame.
    FixedFraction(f64),
    /// Each device is independently active with this probability.
    PerDeviceProb(f64),
    /// Exactly this many devices every frame.
    FixedCount(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub k_total: u32,
    pub activity: ActivityRule,
    #[serde(default)]
    pub protocol: Protocol,
    pub frames: u64,
    pub seed: u64,
    #[serde(default = "default_aloha_q")]
    pub aloha_q: f64,
    /// ALOHA slot length; defaults to `t_tran`.
    #[serde(default)]
    pub aloha_slot: Option<f64>,
    /// TDMA slot length; defaults to `t_tran`.
    #[serde(default)]
    pub tdma_slot: Option<f64>,
    #[serde(default)]
    pub include_overheads: bool,
    #[serde(default)]
    pub cop_form: CopForm,
    /// Relative error of the BS's estimate of `L`: the estimate is
    /// `round(L * (1 + u))` with `u` uniform in `[-noise, noise]`.
    #[serde(default)]
    pub l_estimate_noise: f64,
}

fn default_aloha_q() -> f64 {
    AlohaConfig::DEFAULT_Q
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            k_total: 500,
            activity: ActivityRule::FixedFraction(0.3),
            protocol: Protocol::Hybrid,
            frames: 1_000,
            seed: 42,
            aloha_q: AlohaConfig::DEFAULT_Q,
            aloha_slot: None,
            tdma_slot: None,
            include_overheads: false,
            cop_form: CopForm::Asymptotic,
            l_estimate_noise: 0.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(MacError::Config("scenario.frames must be at least 1".to_string()));
        }
        match self.activity {
            ActivityRule::FixedFraction(f) | ActivityRule::PerDeviceProb(f) if !(0.0..=1.0).contains(&f) => {
                return Err(MacError::Config(format!("scenario.activity must lie in [0, 1], got {f}")));
            }
            _ => {}
        }
        if !(self.aloha_q > 0.0 && self.aloha_q <= 1.0) {
            return Err(MacError::Config(format!(
                "scenario.aloha_q must lie in (0, 1], got {}",
                self.aloha_q
            )));
        }
        for (name, slot) in [("aloha_slot", self.aloha_slot), ("tdma_slot", self.tdma_slot)] {
            if let Some(s) = slot {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(MacError::Config(format!("scenario.{name} must be positive, got {s}")));
                }
            }
        }
        if !(0.0..1.0).contains(&self.l_estimate_noise) {
            return Err(MacError::Config(format!(
                "scenario.l_estimate_noise must lie in [0, 1), got {}",
                self.l_estimate_noise
            )));
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            include_overheads: self.include_overheads,
            form: self.cop_form,
            tol: DEFAULT_P_TOL,
        }
    }

    pub fn aloha_config(&self, params: &TimingParams) -> Result<AlohaConfig> {
        AlohaConfig::new(self.aloha_q, self.aloha_slot.unwrap_or(params.t_tran))
    }

    pub fn tdma_config(&self, params: &TimingParams) -> Result<TdmaConfig> {
        TdmaConfig::new(self.k_total, self.tdma_slot.unwrap_or(params.t_tran))
    }

    fn draw_active<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self.activity {
            ActivityRule::FixedFraction(f) => (f * f64::from(self.k_total)).round() as u32,
            ActivityRule::FixedCount(n) => n,
            ActivityRule::PerDeviceProb(a) => Binomial::new(u64::from(self.k_total), a)
                .expect("activity probability validated")
                .sample(rng) as u32,
        }
    }

    fn estimate_active<R: Rng + ?Sized>(&self, l_active: u32, rng: &mut R) -> u32 {
        if self.l_estimate_noise == 0.0 {
            return l_active;
        }
        let u: f64 = rng.random_range(-self.l_estimate_noise..=self.l_estimate_noise);
        (f64::from(l_active) * (1.0 + u)).round().max(0.0) as u32
    }
}

/// Per-frame summary of a baseline protocol, as written to trace output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub frame_index: u64,
    pub protocol: Protocol,
    pub l_active: u32,
    pub delivered: u32,
    pub busy_time: f64,
}

/// A simulated frame of any protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameRecord {
    Hybrid(FrameTrace),
    Baseline(Protocol, BaselineFrame),
}

impl FrameRecord {
    /// One JSON object, no trailing newline.
    pub fn trace_line(&self) -> String {
        let line = match self {
            FrameRecord::Hybrid(trace) => serde_json::to_string(&trace.record()),
            FrameRecord::Baseline(protocol, frame) => serde_json::to_string(&BaselineRecord {
                frame_index: frame.frame_index,
                protocol: *protocol,
                l_active: frame.l_active,
                delivered: frame.delivered,
                busy_time: frame.busy_time,
            }),
        };
        line.expect("trace records contain only finite numbers and strings")
    }
}

pub fn run_scenario(config: &ScenarioConfig, params: &TimingParams) -> Result<SimStats> {
    run_scenario_with(config, params, |_| {})
}

/// Runs `config.frames` frames and calls `on_frame` after each one.
///
/// Activity draws and protocol randomness use separate ChaCha8 streams of
/// the same seed, so all protocols see the same sequence of `L` values.
pub fn run_scenario_with<F>(config: &ScenarioConfig, params: &TimingParams, mut on_frame: F) -> Result<SimStats>
where
    F: FnMut(&FrameRecord),
{
    config.validate()?;
    params.validate()?;

    let mut activity_rng = ChaCha8Rng::seed_from_u64(config.seed);
    activity_rng.set_stream(0);
    let mut protocol_rng = ChaCha8Rng::seed_from_u64(config.seed);
    protocol_rng.set_stream(1);

    let mut acc = StatsAccumulator::new();
    let bits_per_delivery;

    match config.protocol {
        Protocol::Hybrid => {
            bits_per_delivery = params.rate * params.t_tran;
            let opts = config.solver_options();
            let mut memo: HashMap<u32, Result<OptResult>> = HashMap::new();
            for frame in 0..config.frames {
                let l_active = config.draw_active(&mut activity_rng);
                let l_estimate = config.estimate_active(l_active, &mut activity_rng);
                let trace = if l_estimate == 0 {
                    run_frame_with_plan(frame, l_active, &FramePlan::closed(), params, &mut protocol_rng)?
                } else {
                    let opt = memo
                        .entry(l_estimate)
                        .or_insert_with(|| optimize_with(l_estimate, params, &opts));
                    match opt {
                        Ok(opt) => run_frame(frame, l_active, opt, params, &mut protocol_rng)?,
                        Err(_) => {
                            acc.mark_infeasible();
                            run_frame_with_plan(frame, l_active, &FramePlan::closed(), params, &mut protocol_rng)?
                        }
                    }
                };
                acc.add_trace(&trace);
                on_frame(&FrameRecord::Hybrid(trace));
            }
        }
        Protocol::Aloha => {
            bits_per_delivery = params.rate * params.t_tran;
            let cfg = config.aloha_config(params)?;
            for frame in 0..config.frames {
                let l_active = config.draw_active(&mut activity_rng);
                let out = run_aloha_frame(frame, l_active, &cfg, params, &mut protocol_rng);
                acc.add_frame(out.delivered, out.busy_time, &out.delays);
                on_frame(&FrameRecord::Baseline(Protocol::Aloha, out));
            }
        }
        Protocol::Tdma => {
            let cfg = config.tdma_config(params)?;
            bits_per_delivery = params.rate * cfg.slot;
            for frame in 0..config.frames {
                let l_active = config.draw_active(&mut activity_rng).min(config.k_total);
                let out = run_tdma_frame(frame, l_active, &cfg, params);
                acc.add_frame(out.delivered, out.busy_time, &out.delays);
                on_frame(&FrameRecord::Baseline(Protocol::Tdma, out));
            }
        }
    }

    Ok(acc.finish(params, bits_per_delivery))
}
