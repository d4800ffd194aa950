//! Parameter sweeps over `K`, `L` or the frame length, and their CSV form.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::metrics::SimStats;
use crate::sim::{run_scenario, ActivityRule, Protocol, ScenarioConfig};
use crate::timing::TimingParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Total devices; the activity rule of the base scenario is kept.
    K,
    /// Active devices per frame (fixed count); `K` is raised to at least `L`.
    L,
    /// Frame length in microseconds.
    #[serde(rename = "Tframe")]
    TFrame,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::K => "K",
            Axis::L => "L",
            Axis::TFrame => "Tframe",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = MacError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "K" | "k" => Ok(Axis::K),
            "L" | "l" => Ok(Axis::L),
            "Tframe" | "tframe" | "t_frame" | "T_frame" => Ok(Axis::TFrame),
            other => Err(MacError::Config(format!("unknown sweep axis `{other}` (expected K, L or Tframe)"))),
        }
    }
}

/// One `(protocol, value)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub protocol: Protocol,
    pub axis: Axis,
    pub value: f64,
    pub seed: u64,
    /// Cell failures are kept in the row; the error text is reported.
    pub result: std::result::Result<SimStats, String>,
}

/// Seed of the cell at `value_index`. It does not depend on the protocol,
/// so every protocol sees the same activity draws at a given axis value
/// and adding a protocol leaves the other cells unchanged.
pub fn cell_seed(base_seed: u64, value_index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = base_seed ^ (value_index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn as_count(axis: Axis, value: f64) -> Result<u32> {
    if value >= 0.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX) {
        Ok(value as u32)
    } else {
        Err(MacError::InvalidArgument(format!("{axis} must be a non-negative integer, got {value}")))
    }
}

/// The scenario and timing of one cell.
pub fn apply_axis(
    axis: Axis,
    value: f64,
    base: &ScenarioConfig,
    params: &TimingParams,
) -> Result<(ScenarioConfig, TimingParams)> {
    let mut config = base.clone();
    let mut timing = *params;
    match axis {
        Axis::K => config.k_total = as_count(axis, value)?,
        Axis::L => {
            let l = as_count(axis, value)?;
            config.activity = ActivityRule::FixedCount(l);
            config.k_total = config.k_total.max(l);
        }
        Axis::TFrame => timing.t_frame = value,
    }
    Ok((config, timing))
}

/// Runs every `(protocol, value)` cell; rows come back protocol-major in
/// the order given. Cells run in parallel and are independent.
pub fn sweep(
    axis: Axis,
    values: &[f64],
    protocols: &[Protocol],
    base: &ScenarioConfig,
    params: &TimingParams,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(MacError::InvalidArgument("sweep needs at least one value".to_string()));
    }
    let cells: Vec<(Protocol, usize, f64)> = protocols
        .iter()
        .flat_map(|&p| values.iter().enumerate().map(move |(i, &v)| (p, i, v)))
        .collect();

    Ok(cells
        .into_par_iter()
        .map(|(protocol, index, value)| {
            let seed = cell_seed(base.seed, index);
            let result = apply_axis(axis, value, base, params)
                .and_then(|(mut config, timing)| {
                    config.protocol = protocol;
                    config.seed = seed;
                    run_scenario(&config, &timing)
                })
                .map_err(|e| e.to_string());
            SweepRow {
                protocol,
                axis,
                value,
                seed,
                result,
            }
        })
        .collect())
}

pub const CSV_COLUMNS: [&str; 10] = [
    "protocol",
    "axis",
    "value",
    "frames",
    "mean_throughput",
    "utility",
    "mean_delay",
    "infeasible_frames",
    "seed",
    "status",
];

/// Formats like C's `%.6g`: six significant digits, trailing zeros removed.
pub fn format_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Writes the sweep table: a header row then one row per cell.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        let mut record = vec![
            row.protocol.to_string(),
            row.axis.to_string(),
            format_g6(row.value),
        ];
        match &row.result {
            Ok(s) => {
                record.extend([
                    s.frames.to_string(),
                    format_g6(s.mean_throughput),
                    format_g6(s.utility),
                    s.mean_delay.map(format_g6).unwrap_or_default(),
                    s.infeasible_frames.to_string(),
                    row.seed.to_string(),
                    "ok".to_string(),
                ]);
            }
            Err(e) => {
                record.extend(["", "", "", "", ""].map(String::from));
                record.push(row.seed.to_string());
                record.push(format!("error: {e}"));
            }
        }
        w.write_record(&record)?;
    }
    w.flush()
}
