//! One hybrid frame: NP, p-persistent COP with the two-threshold stop
//! rule, AP, and the TDMA transmission period.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::optimizer::OptResult;
use crate::timing::TimingParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceMode {
    Sleeping,
    Contending,
    AwaitingAp,
    Transmitting,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceState {
    pub id: u32,
    pub has_data: bool,
    /// 1-based TOP slot granted in the AP.
    pub granted_slot: Option<u32>,
    pub mode: DeviceMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CopEvent {
    /// A run of consecutive idle slots.
    Idle { slots: u32, duration: f64 },
    Collision { transmitters: u32, duration: f64 },
    Success { device: u32, duration: f64 },
}

impl CopEvent {
    pub fn duration(&self) -> f64 {
        match *self {
            CopEvent::Idle { duration, .. }
            | CopEvent::Collision { duration, .. }
            | CopEvent::Success { duration, .. } => duration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MThreshold,
    TimeThreshold,
}

/// Result of one contention period.
#[derive(Debug, Clone, PartialEq)]
pub struct CopOutcome {
    pub events: Vec<CopEvent>,
    /// Winning device ids in the order they succeeded.
    pub winners: Vec<u32>,
    pub elapsed: f64,
    pub stop_reason: StopReason,
}

/// Runs p-persistent contention among devices `0..l_active`.
///
/// At every slot boundary the period stops once `m_cap` successes have been
/// counted or the elapsed time has reached `t_cop_cap`. A busy period that
/// has started always completes, so the realised length can overrun the
/// cap by at most one slot (`TimingParams::max_cop_slot`).
pub fn run_cop<R: Rng + ?Sized>(
    l_active: u32,
    p: f64,
    m_cap: u32,
    t_cop_cap: f64,
    params: &TimingParams,
    rng: &mut R,
) -> Result<CopOutcome> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(MacError::ProbabilityDomain(p));
    }
    let delta_idle = params.delta_idle;
    let delta_coll = params.delta_coll();
    let delta_succ = params.delta_succ();

    let mut contenders: Vec<u32> = (0..l_active).collect();
    let mut events = Vec::new();
    let mut winners = Vec::new();
    let mut elapsed = 0.0;
    let mut idle_run = 0u32;
    let mut attempts = binomial(contenders.len(), p);

    let flush_idle = |events: &mut Vec<CopEvent>, idle_run: &mut u32| {
        if *idle_run > 0 {
            events.push(CopEvent::Idle {
                slots: *idle_run,
                duration: f64::from(*idle_run) * delta_idle,
            });
            *idle_run = 0;
        }
    };

    let stop_reason = loop {
        if winners.len() as u64 >= u64::from(m_cap) {
            break StopReason::MThreshold;
        }
        if elapsed >= t_cop_cap {
            break StopReason::TimeThreshold;
        }
        if contenders.is_empty() {
            // nobody left to transmit: the channel idles out to the time cap
            if t_cop_cap.is_finite() {
                let slots = ((t_cop_cap - elapsed) / delta_idle).ceil().max(1.0);
                idle_run += slots as u32;
                elapsed += slots * delta_idle;
            }
            break StopReason::TimeThreshold;
        }

        match attempts.sample(rng) {
            0 => {
                idle_run += 1;
                elapsed += delta_idle;
            }
            1 => {
                flush_idle(&mut events, &mut idle_run);
                let idx = rng.random_range(0..contenders.len());
                let device = contenders.swap_remove(idx);
                winners.push(device);
                events.push(CopEvent::Success {
                    device,
                    duration: delta_succ,
                });
                elapsed += delta_succ;
                attempts = binomial(contenders.len(), p);
            }
            k => {
                flush_idle(&mut events, &mut idle_run);
                events.push(CopEvent::Collision {
                    transmitters: k as u32,
                    duration: delta_coll,
                });
                elapsed += delta_coll;
            }
        }
    };
    flush_idle(&mut events, &mut idle_run);

    Ok(CopOutcome {
        events,
        winners,
        elapsed,
        stop_reason,
    })
}

fn binomial(n: usize, p: f64) -> Binomial {
    Binomial::new(n as u64, p).expect("p checked to lie in (0, 1]")
}

/// What the BS announces in the NP: the contention probability and the two
/// stop thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePlan {
    pub p: f64,
    pub m_cap: u32,
    pub t_cop_cap: f64,
}

impl FramePlan {
    /// Thresholds for an optimizer result. The time threshold is the
    /// expected optimal COP length, shortened if needed so that a final
    /// overrunning slot plus a full TOP of `m_opt` slots still fits the frame.
    pub fn from_opt(opt: &OptResult, params: &TimingParams) -> Self {
        let room = params.frame_without_overheads()
            - f64::from(opt.m_opt) * params.t_tran
            - params.max_cop_slot();
        FramePlan {
            p: opt.p_opt,
            m_cap: opt.m_opt,
            t_cop_cap: opt.t_cop_opt.min(room).max(0.0),
        }
    }

    /// No contention: the BS admits nobody.
    pub fn closed() -> Self {
        FramePlan {
            p: 1.0,
            m_cap: 0,
            t_cop_cap: 0.0,
        }
    }
}

/// Slot granted in the AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grant {
    pub device: u32,
    /// 1-based position in the TOP.
    pub slot: u32,
}

/// Everything that happened in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrace {
    pub frame_index: u64,
    pub l_active: u32,
    pub m_success: u32,
    pub cop_elapsed: f64,
    pub cop_events: Vec<CopEvent>,
    pub grants: Vec<Grant>,
    pub top_elapsed: f64,
    pub stop_reason: StopReason,
    /// Final state of every active device.
    pub devices: Vec<DeviceState>,
    /// Completion time of each granted device, measured from frame start,
    /// in grant order.
    pub delays: Vec<f64>,
}

impl FrameTrace {
    /// Time from frame start to the end of the TOP.
    pub fn occupancy(&self, params: &TimingParams) -> f64 {
        params.t_np + self.cop_elapsed + params.t_ap + self.top_elapsed
    }

    pub fn record(&self) -> TraceRecord {
        TraceRecord {
            frame_index: self.frame_index,
            l_active: self.l_active,
            m_success: self.m_success,
            cop_elapsed: self.cop_elapsed,
            top_elapsed: self.top_elapsed,
            stop_reason: self.stop_reason,
        }
    }
}

/// One line of trace output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub frame_index: u64,
    pub l_active: u32,
    pub m_success: u32,
    pub cop_elapsed: f64,
    pub top_elapsed: f64,
    pub stop_reason: StopReason,
}

/// Simulates one frame for an optimizer result computed for this frame.
pub fn run_frame<R: Rng + ?Sized>(
    frame_index: u64,
    l_active: u32,
    opt: &OptResult,
    params: &TimingParams,
    rng: &mut R,
) -> Result<FrameTrace> {
    run_frame_with_plan(frame_index, l_active, &FramePlan::from_opt(opt, params), params, rng)
}

pub fn run_frame_with_plan<R: Rng + ?Sized>(
    frame_index: u64,
    l_active: u32,
    plan: &FramePlan,
    params: &TimingParams,
    rng: &mut R,
) -> Result<FrameTrace> {
    // NP: every active device wakes and contends
    let mut devices: Vec<DeviceState> = (0..l_active)
        .map(|id| DeviceState {
            id,
            has_data: true,
            granted_slot: None,
            mode: DeviceMode::Contending,
        })
        .collect();

    let cop = run_cop(l_active, plan.p, plan.m_cap, plan.t_cop_cap, params, rng)?;
    for &w in &cop.winners {
        devices[w as usize].mode = DeviceMode::AwaitingAp;
    }

    // AP: winners get consecutive slots in success order, the rest sleep
    let grants: Vec<Grant> = cop
        .winners
        .iter()
        .zip(1u32..)
        .map(|(&device, slot)| Grant { device, slot })
        .collect();
    for dev in devices.iter_mut() {
        if dev.mode == DeviceMode::Contending {
            dev.mode = DeviceMode::Sleeping;
        }
    }

    // TOP
    let top_start = params.t_np + cop.elapsed + params.t_ap;
    let mut delays = Vec::with_capacity(grants.len());
    for g in &grants {
        let dev = &mut devices[g.device as usize];
        dev.granted_slot = Some(g.slot);
        delays.push(top_start + f64::from(g.slot) * params.t_tran);
        dev.mode = DeviceMode::Done;
    }

    let m_success = grants.len() as u32;
    Ok(FrameTrace {
        frame_index,
        l_active,
        m_success,
        cop_elapsed: cop.elapsed,
        cop_events: cop.events,
        grants,
        top_elapsed: f64::from(m_success) * params.t_tran,
        stop_reason: cop.stop_reason,
        devices,
        delays,
    })
}
