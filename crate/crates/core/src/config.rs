//! TOML configuration: `[timing]`, `[scenario]` and an optional `[sweep]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::sim::{Protocol, ScenarioConfig};
use crate::sweep::Axis;
use crate::timing::TimingParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default = "all_protocols")]
    pub protocols: Vec<Protocol>,
}

fn all_protocols() -> Vec<Protocol> {
    Protocol::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub timing: TimingParams,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl Default for ConfigFile {
    /// Reference timing with a 500-device, 30%-active hybrid scenario.
    fn default() -> Self {
        ConfigFile {
            timing: TimingParams::reference(),
            scenario: ScenarioConfig::default(),
            sweep: None,
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| MacError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| MacError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.timing.validate()?;
        self.scenario.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ActivityRule;

    const SAMPLE: &str = r#"
[timing]
t_frame = 50000.0
t_np = 10.2
t_ap = 10.2
t_tran = 1000.0
t_req = 22.2
t_ack = 7.5
sifs = 2.5
bifs = 7.5
delta_idle = 10.0
rate = 1728.0

[scenario]
k_total = 500
activity = { fixed_fraction = 0.3 }
protocol = "hybrid"
frames = 1000
seed = 42
"#;

    #[test]
    fn parses_sample() {
        let cfg = ConfigFile::parse(SAMPLE).unwrap();
        assert_eq!(cfg, ConfigFile::default());
    }

    #[test]
    fn missing_timing_field_is_named() {
        let text = SAMPLE.replace("t_ack = 7.5\n", "");
        let err = ConfigFile::parse(&text).unwrap_err().to_string();
        assert!(err.contains("t_ack"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = SAMPLE.replace("seed = 42", "seed = 42\nbogus = 1");
        assert!(ConfigFile::parse(&text).unwrap_err().to_string().contains("bogus"));
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ConfigFile::default();
        cfg.scenario.activity = ActivityRule::PerDeviceProb(0.25);
        cfg.scenario.aloha_slot = Some(39.7);
        cfg.sweep = Some(SweepSpec {
            axis: Axis::TFrame,
            values: vec![50_000.0, 100_000.0],
            protocols: vec![Protocol::Hybrid, Protocol::Tdma],
        });
        assert_eq!(ConfigFile::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn shipped_profile_matches_default() {
        let text = include_str!("../../../configs/reference.toml");
        let cfg = ConfigFile::parse(text).unwrap();
        assert_eq!(cfg.timing, TimingParams::reference());
        assert_eq!(cfg.scenario, ScenarioConfig::default());
    }
}
