//! Evaluation metrics: throughput, utility and transmission delay.

use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::optimizer::OptResult;
use crate::sim::FrameTrace;
use crate::timing::TimingParams;

/// Aggregate metrics over a run of frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub frames: u64,
    /// Packets delivered over all frames.
    pub delivered: u64,
    /// Mean delivered bits per frame.
    pub mean_throughput: f64,
    /// Mean fraction of the frame spent on delivered data.
    pub utility: f64,
    /// Mean completion time of delivering devices, `None` if nobody delivered.
    pub mean_delay: Option<f64>,
    pub infeasible_frames: u64,
}

impl SimStats {
    /// Throughput in bits per second.
    pub fn throughput_bps(&self, params: &TimingParams) -> f64 {
        self.mean_throughput / params.t_frame * 1e6
    }
}

/// Running sums for [`SimStats`].
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    frames: u64,
    delivered: u64,
    busy_time: f64,
    delay_sum: f64,
    delay_count: u64,
    infeasible: u64,
}

impl StatsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_frame(&mut self, delivered: u32, busy_time: f64, delays: &[f64]) {
        self.frames += 1;
        self.delivered += u64::from(delivered);
        self.busy_time += busy_time;
        for &d in delays {
            self.delay_sum += d;
        }
        self.delay_count += delays.len() as u64;
    }

    pub fn add_trace(&mut self, trace: &FrameTrace) {
        self.add_frame(trace.m_success, trace.top_elapsed, &trace.delays);
    }

    pub fn mark_infeasible(&mut self) {
        self.infeasible += 1;
    }

    /// `bits_per_delivery` converts one delivered packet into bits.
    pub fn finish(&self, params: &TimingParams, bits_per_delivery: f64) -> SimStats {
        let frames = self.frames.max(1) as f64;
        SimStats {
            frames: self.frames,
            delivered: self.delivered,
            mean_throughput: self.delivered as f64 / frames * bits_per_delivery,
            utility: self.busy_time / frames / params.t_frame,
            mean_delay: (self.delay_count > 0).then(|| self.delay_sum / self.delay_count as f64),
            infeasible_frames: self.infeasible,
        }
    }
}

/// `T_TOP / T_frame` for one frame.
pub fn utility(trace: &FrameTrace, params: &TimingParams) -> f64 {
    trace.top_elapsed / params.t_frame
}

/// Closed-form mean delay of a scheduled device:
/// `T_NP + T_COP + T_AP + (T_frame - T_COP - T_NP - T_AP) / 2 * (1 - 1/M) + T_tran`.
pub fn analytic_delay(opt: &OptResult, params: &TimingParams) -> Result<f64> {
    if opt.m_opt == 0 {
        return Err(MacError::InvalidArgument(
            "delay is undefined when no device is admitted".to_string(),
        ));
    }
    let m = f64::from(opt.m_opt);
    let cop = opt.t_cop_opt;
    let top_wait = (params.t_frame - cop - params.t_np - params.t_ap) / 2.0 * (1.0 - 1.0 / m);
    Ok(params.t_np + cop + params.t_ap + top_wait + params.t_tran)
}
