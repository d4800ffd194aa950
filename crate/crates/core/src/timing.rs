//! Protocol timing constants.
//!
//! All durations are in microseconds and the data rate is in bits per
//! microsecond, so `1.728 Gbps` is `1728.0`.

use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};

/// Timing constants of one hybrid frame and of the request exchange.
///
/// The collision and success busy periods are always derived from the
/// request/ACK timing; see [`TimingParams::delta_coll`] and
/// [`TimingParams::delta_succ`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingParams {
    /// Frame length.
    pub t_frame: f64,
    /// Notification period.
    pub t_np: f64,
    /// Announcement period.
    pub t_ap: f64,
    /// Per-device transmission slot in the TDMA period.
    pub t_tran: f64,
    /// Length of a transmission-request message.
    pub t_req: f64,
    /// ACK duration.
    pub t_ack: f64,
    pub sifs: f64,
    pub bifs: f64,
    /// Duration of one idle contention slot.
    pub delta_idle: f64,
    /// Data rate in bits per microsecond.
    pub rate: f64,
}

impl TimingParams {
    /// Default idle slot used when no other value is configured.
    pub const DEFAULT_DELTA_IDLE: f64 = 10.0;

    /// The reference parameter set: 10.2 us NP/AP, 1 ms slots, 1.728 Gbps,
    /// 22.2 us requests, 7.5 us ACK, 2.5 us SIFS, 7.5 us BIFS, 50 ms frames
    /// and a 10 us idle slot.
    pub fn reference() -> Self {
        TimingParams {
            t_frame: 50_000.0,
            t_np: 10.2,
            t_ap: 10.2,
            t_tran: 1_000.0,
            t_req: 22.2,
            t_ack: 7.5,
            sifs: 2.5,
            bifs: 7.5,
            delta_idle: Self::DEFAULT_DELTA_IDLE,
            rate: 1_728.0,
        }
    }

    pub fn with_frame(mut self, t_frame: f64) -> Self {
        self.t_frame = t_frame;
        self
    }

    /// Busy period of a collision: `T_req + BIFS`.
    pub fn delta_coll(&self) -> f64 {
        self.t_req + self.bifs
    }

    /// Busy period of a successful request: `T_req + SIFS + T_ACK + BIFS`.
    pub fn delta_succ(&self) -> f64 {
        self.t_req + self.sifs + self.t_ack + self.bifs
    }

    /// Longest indivisible contention slot. A contention period stopped by
    /// its time threshold can overrun the threshold by at most this much.
    pub fn max_cop_slot(&self) -> f64 {
        self.delta_idle.max(self.delta_coll()).max(self.delta_succ())
    }

    /// Frame time left once NP and AP are removed.
    pub fn frame_without_overheads(&self) -> f64 {
        self.t_frame - self.t_np - self.t_ap
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("t_frame", self.t_frame),
            ("t_np", self.t_np),
            ("t_ap", self.t_ap),
            ("t_tran", self.t_tran),
            ("t_req", self.t_req),
            ("t_ack", self.t_ack),
            ("sifs", self.sifs),
            ("bifs", self.bifs),
            ("delta_idle", self.delta_idle),
            ("rate", self.rate),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(MacError::InvalidTiming(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        if self.t_np + self.t_ap + self.t_tran > self.t_frame {
            return Err(MacError::InvalidTiming(format!(
                "t_np + t_ap + t_tran = {} exceeds t_frame = {}",
                self.t_np + self.t_ap + self.t_tran,
                self.t_frame
            )));
        }
        Ok(())
    }
}

impl Default for TimingParams {
    fn default() -> Self {
        Self::reference()
    }
}
