//! Run configuration (TOML) and the shipped figure presets.
//!
//! A config file has up to five tables: `[grid]` (required), `[code]`,
//! `[budget]`, `[stopping]` and `[run]`. Unknown keys are rejected.
//!
//! ```toml
//! [grid]
//! eb_n0_db = { start = 0.0, stop = 10.0, step = 1.0 }   # or a list
//! relay_counts = [0, 1, 2, 3, 4]
//! scenarios = ["ALL_NODES", "NO_GRAND"]
//! decoders = ["GRAND_HARD"]
//! channels = ["AWGN"]
//!
//! [stopping]
//! kind = "error_target"
//! block_errors = 200
//! max_trials = 2000000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, FadingMode};
use crate::crc::{CrcCode, CRC12_KOOPMAN, CRC12_MESSAGE_BITS};
use crate::error::{Error, Result};
use crate::montecarlo::{StoppingRule, SweepConfig, SweepGrid, DEFAULT_BATCH_SIZE};
use crate::multihop::{DecoderBudget, DecoderKind, Scenario};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;
pub const RESULTS_FILE: &str = "results.csv";
pub const BARRIER_FILE: &str = "barrier.csv";
pub const CONFIG_ECHO_FILE: &str = "config.resolved.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrAxis {
    List(Vec<f64>),
    Range(SnrRange),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrAxis {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Self::Range(SnrRange { start, stop, step })
    }

    /// Grid points, rounded to micro-dB so ranges print cleanly.
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            Self::List(v) => Ok(v.clone()),
            Self::Range(r) => {
                if r.step.is_nan() || r.step <= 0.0 || !r.start.is_finite() || !r.stop.is_finite() || r.stop < r.start {
                    return Err(Error::Config(format!("bad Eb/N0 range {r:?}")));
                }
                let n = ((r.stop - r.start) / r.step + 1e-9).floor() as usize + 1;
                Ok((0..n)
                    .map(|i| ((r.start + i as f64 * r.step) * 1e6).round() / 1e6)
                    .collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub eb_n0_db: SnrAxis,
    pub relay_counts: Vec<usize>,
    pub scenarios: Vec<Scenario>,
    #[serde(default)]
    pub decoders: Vec<DecoderKind>,
    pub channels: Vec<ChannelKind>,
    #[serde(default)]
    pub fading: FadingMode,
    /// Defaults to [`DEFAULT_SEED`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodeConfig {
    /// Generator in Koopman notation (implicit `+1` term).
    pub crc_koopman: u64,
    pub message_bits: usize,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self {
            crc_koopman: CRC12_KOOPMAN,
            message_bits: CRC12_MESSAGE_BITS,
        }
    }
}

impl CodeConfig {
    pub fn build(&self) -> Result<CrcCode> {
        CrcCode::from_koopman(self.crc_koopman, self.message_bits)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub batch_size: u64,
    /// Worker threads; absent means all available cores.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
    pub consensus_tolerance_db: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            batch_size: DEFAULT_BATCH_SIZE,
            workers: None,
            out_dir: PathBuf::from("out"),
            consensus_tolerance_db: crate::analysis::DEFAULT_CONSENSUS_TOLERANCE_DB,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub grid: GridConfig,
    #[serde(default)]
    pub code: CodeConfig,
    #[serde(default)]
    pub budget: DecoderBudget,
    #[serde(default)]
    pub stopping: StoppingRule,
    #[serde(default)]
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn seed(&self) -> u64 {
        self.grid.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid> {
        Ok(SweepGrid {
            eb_n0_points: self.grid.eb_n0_db.points()?,
            relay_counts: self.grid.relay_counts.clone(),
            scenarios: self.grid.scenarios.clone(),
            decoders: self.grid.decoders.clone(),
            channels: self.grid.channels.clone(),
            fading: self.grid.fading,
            master_seed: self.seed(),
        })
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let cfg = SweepConfig {
            grid: self.sweep_grid()?,
            code: self.code.build()?,
            budget: self.budget,
            stopping: self.stopping,
            batch_size: self.run.batch_size,
            workers: self.run.workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Full validation, including the config echo round trip.
    pub fn validate(&self) -> Result<()> {
        self.sweep_config()?;
        if self.seed() > i64::MAX as u64 {
            return Err(Error::Config("seed must be below 2^63".into()));
        }
        if self.run.consensus_tolerance_db.is_nan() || self.run.consensus_tolerance_db < 0.0 {
            return Err(Error::Config("consensus_tolerance_db must be non-negative".into()));
        }
        if self.budget.max_weight == 0 && self.grid.decoders.contains(&DecoderKind::GrandHard) {
            return Err(Error::Config("max_weight 0 only ever tries the received word".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> Result<usize> {
        Ok(self.sweep_grid()?.cells().len())
    }

    /// Upper bound on simulated blocks: every cell at its trial cap.
    pub fn trial_budget(&self) -> Result<u64> {
        Ok(self.cell_count()? as u64 * self.stopping.max_trials())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Fast,
    Full,
}

impl std::str::FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(Self::Fast),
            "full" => Ok(Self::Full),
            _ => Err(Error::Usage(format!("unknown budget {s:?}; expected fast or full"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PresetInfo {
    pub name: &'static str,
    pub decoder: DecoderKind,
    pub channel: ChannelKind,
    /// `DEST_ONLY` or `ALL_NODES`; `NO_GRAND` baselines are always added.
    pub scenario: Scenario,
    pub fast_grid: (f64, f64, f64),
    pub full_grid: (f64, f64, f64),
}

impl PresetInfo {
    pub fn summary(&self) -> String {
        let what = match self.scenario {
            Scenario::DestOnly => "decoding at the destination only",
            _ => "decoding at every relay and the destination",
        };
        format!("{} over {}, {what}, 0-4 relays", self.decoder, self.channel)
    }
}

// Fast grids stop where the coded curves run out of errors within the
// trial cap; full grids are wider and finer.
pub const PRESETS: [PresetInfo; 8] = [
    preset_info("fig1a", DecoderKind::GrandHard, ChannelKind::Awgn, Scenario::DestOnly, (0.0, 10.0, 1.0), (0.0, 12.0, 0.5)),
    preset_info("fig1b", DecoderKind::GrandHard, ChannelKind::Awgn, Scenario::AllNodes, (0.0, 10.0, 1.0), (0.0, 12.0, 0.5)),
    preset_info("fig2a", DecoderKind::GrandHard, ChannelKind::Rayleigh, Scenario::DestOnly, (0.0, 30.0, 2.0), (0.0, 36.0, 1.0)),
    preset_info("fig2b", DecoderKind::GrandHard, ChannelKind::Rayleigh, Scenario::AllNodes, (0.0, 30.0, 2.0), (0.0, 36.0, 1.0)),
    preset_info("fig3a", DecoderKind::Orbgrand, ChannelKind::Awgn, Scenario::DestOnly, (0.0, 7.0, 1.0), (0.0, 10.0, 0.5)),
    preset_info("fig3b", DecoderKind::Orbgrand, ChannelKind::Awgn, Scenario::AllNodes, (0.0, 7.0, 1.0), (0.0, 10.0, 0.5)),
    preset_info("fig4a", DecoderKind::Orbgrand, ChannelKind::Rayleigh, Scenario::DestOnly, (0.0, 16.0, 2.0), (0.0, 24.0, 1.0)),
    preset_info("fig4b", DecoderKind::Orbgrand, ChannelKind::Rayleigh, Scenario::AllNodes, (0.0, 16.0, 2.0), (0.0, 24.0, 1.0)),
];

const fn preset_info(
    name: &'static str,
    decoder: DecoderKind,
    channel: ChannelKind,
    scenario: Scenario,
    fast_grid: (f64, f64, f64),
    full_grid: (f64, f64, f64),
) -> PresetInfo {
    PresetInfo {
        name,
        decoder,
        channel,
        scenario,
        fast_grid,
        full_grid,
    }
}

pub fn preset_info_by_name(name: &str) -> Result<&'static PresetInfo> {
    PRESETS
        .iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
            Error::Usage(format!("unknown preset {name:?}; available: {}", names.join(", ")))
        })
}

pub fn preset(name: &str, budget: Budget) -> Result<RunConfig> {
    let info = preset_info_by_name(name)?;
    let ((start, stop, step), stopping) = match budget {
        Budget::Fast => (info.fast_grid, StoppingRule::default()),
        Budget::Full => (
            info.full_grid,
            StoppingRule::ErrorTarget {
                block_errors: 1000,
                max_trials: 20_000_000,
                min_trials: 0,
            },
        ),
    };
    let label = match budget {
        Budget::Fast => info.name.to_string(),
        Budget::Full => format!("{}-full", info.name),
    };
    Ok(RunConfig {
        preset: Some(label),
        grid: GridConfig {
            eb_n0_db: SnrAxis::range(start, stop, step),
            relay_counts: vec![0, 1, 2, 3, 4],
            scenarios: vec![info.scenario, Scenario::NoGrand],
            decoders: vec![info.decoder],
            channels: vec![info.channel],
            fading: FadingMode::PerSymbol,
            seed: None,
        },
        code: CodeConfig::default(),
        budget: DecoderBudget::default(),
        stopping,
        run: RunSection::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for p in &PRESETS {
            for b in [Budget::Fast, Budget::Full] {
                let cfg = preset(p.name, b).unwrap();
                cfg.validate().unwrap();
                // 5 relay counts x (treatment + baseline)
                let pts = cfg.grid.eb_n0_db.points().unwrap().len();
                assert_eq!(cfg.cell_count().unwrap(), 10 * pts);
            }
        }
        assert_eq!(preset("fig1a", Budget::Fast).unwrap().seed(), 0xC0FFEE);
    }

    #[test]
    fn fig1a_is_grand_dest_only_awgn() {
        let cfg = preset("FIG1A", Budget::Fast).unwrap();
        assert_eq!(cfg.grid.decoders, vec![DecoderKind::GrandHard]);
        assert_eq!(cfg.grid.scenarios, vec![Scenario::DestOnly, Scenario::NoGrand]);
        assert_eq!(cfg.grid.channels, vec![ChannelKind::Awgn]);
        assert_eq!(cfg.grid.relay_counts, vec![0, 1, 2, 3, 4]);
        assert_eq!(cfg.stopping, StoppingRule::ErrorTarget { block_errors: 200, max_trials: 2_000_000, min_trials: 0 });
        assert!(preset("fig9z", Budget::Fast).is_err());
    }

    #[test]
    fn range_points_are_clean() {
        let pts = SnrAxis::range(0.0, 1.0, 0.1).points().unwrap();
        assert_eq!(pts.len(), 11);
        assert_eq!(pts[3], 0.3);
        assert_eq!(pts[10], 1.0);
        assert!(SnrAxis::range(0.0, 1.0, 0.0).points().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = preset("fig4b", Budget::Full).unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn minimal_file_with_defaults() {
        let text = r#"
            [grid]
            eb_n0_db = [1.0, 2.5]
            relay_counts = [2]
            scenarios = ["all-nodes", "NO_GRAND"]
            decoders = ["ORBGRAND"]
            channels = ["RAYLEIGH"]
            seed = 7

            [code]
            crc_koopman = 0x8F3
        "#;
        // Enum names are exact in files; only the CLI is lenient.
        assert!(RunConfig::from_toml_str(text).is_err());
        let cfg = RunConfig::from_toml_str(&text.replace("all-nodes", "ALL_NODES")).unwrap();
        assert_eq!(cfg.seed(), 7);
        assert_eq!(cfg.code.build().unwrap(), CrcCode::crc12());
        assert_eq!(cfg.run.batch_size, 256);
        assert_eq!(cfg.cell_count().unwrap(), 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        let base = preset("fig1a", Budget::Fast).unwrap().to_toml_string().unwrap();
        assert!(RunConfig::from_toml_str(&format!("bogus = 1\n{base}")).is_err());
        let nested = base.replace("[budget]", "[budget]\nmax_guesses = 3");
        assert!(RunConfig::from_toml_str(&nested).is_err());
    }

    #[test]
    fn conflicting_scenario_decoder_is_usage_error() {
        let mut cfg = preset("fig1b", Budget::Fast).unwrap();
        cfg.grid.decoders = vec![DecoderKind::None];
        assert!(matches!(cfg.validate(), Err(Error::Usage(_))));
    }
}
