//! Reference protocols: per-frame slotted ALOHA and static TDMA.
//!
//! Both are measured the same way as the hybrid scheme: deliveries,
//! channel time spent on delivered data, and the completion time of each
//! delivering device measured from the start of the frame. Nothing carries
//! over between frames.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::timing::TimingParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlohaConfig {
    /// Per-slot transmission probability.
    pub q: f64,
    /// Slot length in microseconds.
    pub slot: f64,
}

impl AlohaConfig {
    pub const DEFAULT_Q: f64 = 0.08;

    pub fn new(q: f64, slot: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(MacError::ProbabilityDomain(q));
        }
        if !(slot > 0.0 && slot.is_finite()) {
            return Err(MacError::InvalidArgument(format!("ALOHA slot must be positive, got {slot}")));
        }
        Ok(AlohaConfig { q, slot })
    }

    /// One data slot per packet: the slot is `t_tran` long.
    pub fn with_data_slots(q: f64, params: &TimingParams) -> Result<Self> {
        Self::new(q, params.t_tran)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdmaConfig {
    pub k_total: u32,
    pub slot: f64,
}

impl TdmaConfig {
    pub fn new(k_total: u32, slot: f64) -> Result<Self> {
        if k_total == 0 {
            return Err(MacError::InvalidArgument("TDMA needs at least one device".to_string()));
        }
        if !(slot > 0.0 && slot.is_finite()) {
            return Err(MacError::InvalidArgument(format!("TDMA slot must be positive, got {slot}")));
        }
        Ok(TdmaConfig { k_total, slot })
    }
}

/// Per-frame result of a baseline protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFrame {
    pub frame_index: u64,
    pub l_active: u32,
    /// Packets delivered (one per successful slot).
    pub delivered: u32,
    /// Channel time occupied by delivered packets.
    pub busy_time: f64,
    /// Completion time of each delivering device, from frame start.
    pub delays: Vec<f64>,
}

fn slots_per_frame(slot: f64, params: &TimingParams) -> u64 {
    // tolerate t_frame / slot landing a hair below an integer
    (params.t_frame / slot + 1e-9).floor() as u64
}

/// Slotted ALOHA within one frame: every backlogged device transmits with
/// probability `q` in each slot; a slot with exactly one transmitter
/// delivers that device's packet and the device goes quiet.
pub fn run_aloha_frame<R: Rng + ?Sized>(
    frame_index: u64,
    l_active: u32,
    cfg: &AlohaConfig,
    params: &TimingParams,
    rng: &mut R,
) -> BaselineFrame {
    let slots = slots_per_frame(cfg.slot, params);
    let mut backlog = u64::from(l_active);
    let mut delays = Vec::new();
    let mut slot = 0;
    while slot < slots && backlog > 0 {
        let transmitters = Binomial::new(backlog, cfg.q)
            .expect("q validated in AlohaConfig::new")
            .sample(rng);
        slot += 1;
        if transmitters == 1 {
            backlog -= 1;
            delays.push(slot as f64 * cfg.slot);
        }
    }
    let delivered = delays.len() as u32;
    BaselineFrame {
        frame_index,
        l_active,
        delivered,
        busy_time: f64::from(delivered) * cfg.slot,
        delays,
    }
}

/// Whether `device` is among the `l_active` active devices when activity is
/// spread evenly over `0..k_total`.
pub fn is_spread_active(device: u32, l_active: u32, k_total: u32) -> bool {
    let (d, l, k) = (u64::from(device), u64::from(l_active.min(k_total)), u64::from(k_total));
    (d + 1) * l / k > d * l / k
}

/// Static TDMA: slot `j` of frame `f` belongs to device `(f * S + j) mod K`
/// where `S` is the number of slots per frame. A slot carries data only if
/// its owner is active. Active devices are spread evenly over the device
/// ids, so the result is a deterministic function of the inputs.
pub fn run_tdma_frame(frame_index: u64, l_active: u32, cfg: &TdmaConfig, params: &TimingParams) -> BaselineFrame {
    let slots = slots_per_frame(cfg.slot, params);
    let k = u64::from(cfg.k_total);
    let first_owner = (frame_index % k) * (slots % k) % k;
    let mut delivered = 0u32;
    let mut delays = Vec::new();
    for j in 0..slots {
        let owner = ((first_owner + j) % k) as u32;
        if is_spread_active(owner, l_active, cfg.k_total) {
            delivered += 1;
            // a device owning several slots completes at its first one
            if j < k {
                delays.push((j + 1) as f64 * cfg.slot);
            }
        }
    }
    BaselineFrame {
        frame_index,
        l_active,
        delivered,
        busy_time: f64::from(delivered) * cfg.slot,
        delays,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> TimingParams {
        TimingParams::reference()
    }

    #[test]
    fn lone_aloha_device_succeeds_in_first_slot() {
        let t = params();
        let cfg = AlohaConfig::new(1.0, 1_000.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = run_aloha_frame(0, 1, &cfg, &t, &mut rng);
        assert_eq!(f.delivered, 1);
        assert_eq!(f.delays, vec![1_000.0]);
    }

    #[test]
    fn aloha_first_slot_success_rate_matches_binomial() {
        let t = params();
        let cfg = AlohaConfig::new(0.08, 1_000.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // a one-slot frame isolates the first slot
        let one_slot = t.with_frame(1_000.0);
        // p ~ 2e-3, so 1e7 slots put 2% at about three standard errors
        let trials = 10_000_000;
        let hits: u32 = (0..trials).map(|i| run_aloha_frame(i, 100, &cfg, &one_slot, &mut rng).delivered).sum();
        let expected = 100.0 * 0.08 * 0.92f64.powi(99);
        let freq = f64::from(hits) / trials as f64;
        assert!((freq - expected).abs() / expected < 0.02, "{freq} vs {expected}");
    }

    #[test]
    fn aloha_delivers_each_device_at_most_once() {
        let t = params();
        let cfg = AlohaConfig::new(0.3, 100.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for l in [0u32, 1, 5, 30] {
            let f = run_aloha_frame(0, l, &cfg, &t, &mut rng);
            assert!(f.delivered <= l);
            assert_eq!(f.delays.len(), f.delivered as usize);
        }
    }

    #[test]
    fn aloha_config_validation() {
        assert!(AlohaConfig::new(0.0, 10.0).is_err());
        assert!(AlohaConfig::new(0.5, 0.0).is_err());
        assert!(AlohaConfig::new(1.0, 10.0).is_ok());
    }

    #[test]
    fn spread_activity_counts() {
        for k in [1u32, 7, 100, 333] {
            for l in [0, 1, k / 3, k] {
                let n = (0..k).filter(|&d| is_spread_active(d, l, k)).count() as u32;
                assert_eq!(n, l);
            }
        }
    }

    #[test]
    fn tdma_full_load_uses_every_slot() {
        let t = params();
        let cfg = TdmaConfig::new(500, 1_000.0).unwrap();
        let f = run_tdma_frame(3, 500, &cfg, &t);
        assert_eq!(f.delivered, 50);
        assert_eq!(f.busy_time / t.t_frame, 1.0);
        assert_eq!(run_tdma_frame(3, 0, &cfg, &t).delivered, 0);
    }

    #[test]
    fn tdma_partial_load_is_proportional() {
        let t = params();
        let cfg = TdmaConfig::new(1_000, 1_000.0).unwrap();
        let frames = 1_000;
        let used: u32 = (0..frames).map(|f| run_tdma_frame(f, 300, &cfg, &t).delivered).sum();
        let utility = f64::from(used) * 1_000.0 / (frames as f64 * t.t_frame);
        assert!((utility - 0.3).abs() / 0.3 < 0.02, "{utility}");
    }

    #[test]
    fn tdma_small_population_owns_several_slots() {
        let t = params();
        let cfg = TdmaConfig::new(10, 1_000.0).unwrap();
        let f = run_tdma_frame(0, 10, &cfg, &t);
        assert_eq!(f.delivered, 50);
        assert_eq!(f.delays.len(), 10);
    }

    #[test]
    fn tdma_is_deterministic() {
        let t = params();
        let cfg = TdmaConfig::new(777, 1_000.0).unwrap();
        for f in 0..50 {
            assert_eq!(run_tdma_frame(f, 200, &cfg, &t), run_tdma_frame(f, 200, &cfg, &t));
        }
    }
}
