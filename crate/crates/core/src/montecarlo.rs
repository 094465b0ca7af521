//! BER sweep engine.
//!
//! Each grid cell is simulated in batches of `batch_size` blocks. Batch `b`
//! of a cell draws from a ChaCha8 stream keyed by the master seed and the
//! cell's *link* identity (channel, fading mode, relay count, Eb/N0), with
//! stream number `b`. Scenario and decoder are not part of the key, so every
//! scenario and decoder sees the same messages and channel noise at a given
//! link point.
//!
//! Batches are computed in fixed-size speculative rounds and merged in batch
//! order; the stopping rule is evaluated after every merged batch and later
//! batches are discarded. Results are therefore identical for any number of
//! worker threads.

use std::io::{Read, Write};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitblock::BitBlock;
use crate::channel::{ChannelKind, FadingMode, SnrSpec};
use crate::crc::CrcCode;
use crate::error::{Error, Result};
use crate::multihop::{
    check_scenario_decoder, count_errors, run_chain, DecoderBudget, DecoderKind, HopChainConfig,
    Scenario,
};

pub const DEFAULT_BATCH_SIZE: u64 = 256;
/// Batches evaluated per speculative round.
const ROUND_BATCHES: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum StoppingRule {
    FixedTrials { trials: u64 },
    ErrorTarget {
        block_errors: u64,
        max_trials: u64,
        #[serde(default)]
        min_trials: u64,
    },
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self::ErrorTarget {
            block_errors: 200,
            max_trials: 2_000_000,
            min_trials: 0,
        }
    }
}

impl StoppingRule {
    pub fn max_trials(&self) -> u64 {
        match *self {
            Self::FixedTrials { trials } => trials,
            Self::ErrorTarget { max_trials, .. } => max_trials,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::FixedTrials { trials: 0 } => Err(Error::Config("fixed_trials must be positive".into())),
            Self::ErrorTarget { block_errors: 0, .. } => {
                Err(Error::Config("error target must be positive".into()))
            }
            Self::ErrorTarget { max_trials, min_trials, .. } if max_trials == 0 || min_trials > max_trials => {
                Err(Error::Config("need 0 < max_trials and min_trials <= max_trials".into()))
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Self::FixedTrials { trials } => write!(f, "fixed_trials({trials})"),
            Self::ErrorTarget { block_errors, max_trials, min_trials } => write!(
                f,
                "error_target(block_errors={block_errors}, max_trials={max_trials}, min_trials={min_trials})"
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Progress {
    pub trials: u64,
    pub block_errors: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop,
}

pub fn stopping_rule(progress: &Progress, rule: &StoppingRule) -> Decision {
    let stop = match *rule {
        StoppingRule::FixedTrials { trials } => progress.trials >= trials,
        StoppingRule::ErrorTarget {
            block_errors,
            max_trials,
            min_trials,
        } => {
            progress.trials >= max_trials
                || (progress.block_errors >= block_errors && progress.trials >= min_trials)
        }
    };
    if stop {
        Decision::Stop
    } else {
        Decision::Continue
    }
}

/// Identity of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub scenario: Scenario,
    pub decoder: DecoderKind,
    pub channel: ChannelKind,
    pub fading: FadingMode,
    pub num_relays: usize,
    pub eb_n0_db: f64,
}

impl CellSpec {
    pub fn hops(&self) -> usize {
        self.num_relays + 1
    }

    fn stream_key(&self, master_seed: u64) -> u64 {
        let snr_milli_db = (self.eb_n0_db * 1000.0).round() as i64;
        [
            self.channel as u64,
            self.fading as u64,
            self.num_relays as u64,
            snr_milli_db as u64,
        ]
        .iter()
        .fold(splitmix64(master_seed), |acc, &v| splitmix64(acc ^ v))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub eb_n0_points: Vec<f64>,
    pub relay_counts: Vec<usize>,
    pub scenarios: Vec<Scenario>,
    pub decoders: Vec<DecoderKind>,
    pub channels: Vec<ChannelKind>,
    #[serde(default)]
    pub fading: FadingMode,
    pub master_seed: u64,
}

impl SweepGrid {
    /// Cells in channel, scenario, decoder, relay count, Eb/N0 order.
    /// `NO_GRAND` contributes one decoder-less curve per channel.
    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::new();
        for &channel in &self.channels {
            for &scenario in &self.scenarios {
                let decoders: Vec<DecoderKind> = if scenario == Scenario::NoGrand {
                    vec![DecoderKind::None]
                } else {
                    self.decoders.iter().copied().filter(|&d| d != DecoderKind::None).collect()
                };
                for decoder in decoders {
                    for &num_relays in &self.relay_counts {
                        for &eb_n0_db in &self.eb_n0_points {
                            out.push(CellSpec {
                                scenario,
                                decoder,
                                channel,
                                fading: self.fading,
                                num_relays,
                                eb_n0_db,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str| Error::Config(format!("grid field `{name}` is empty"));
        if self.eb_n0_points.is_empty() {
            return Err(empty("eb_n0_points"));
        }
        if self.relay_counts.is_empty() {
            return Err(empty("relay_counts"));
        }
        if self.scenarios.is_empty() {
            return Err(empty("scenarios"));
        }
        if self.channels.is_empty() {
            return Err(empty("channels"));
        }
        if let Some(p) = self.eb_n0_points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Config(format!("non-finite Eb/N0 point {p}")));
        }
        let decoding = self.scenarios.iter().any(|&s| s != Scenario::NoGrand);
        if decoding {
            let real: Vec<_> = self.decoders.iter().filter(|&&d| d != DecoderKind::None).collect();
            if real.is_empty() {
                let s = self.scenarios.iter().find(|&&s| s != Scenario::NoGrand).unwrap();
                return Err(Error::Usage(
                    check_scenario_decoder(*s, DecoderKind::None).unwrap_err().to_string(),
                ));
            }
            if self.decoders.contains(&DecoderKind::None) {
                return Err(Error::Usage(
                    "decoder NONE conflicts with decoding scenarios; NO_GRAND cells need no decoder entry".into(),
                ));
            }
        }
        if self.cells().is_empty() {
            return Err(Error::Config("grid has no cells".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub grid: SweepGrid,
    pub code: CrcCode,
    pub budget: DecoderBudget,
    pub stopping: StoppingRule,
    pub batch_size: u64,
    /// `None` uses one thread per available core.
    pub workers: Option<usize>,
}

impl SweepConfig {
    pub fn new(grid: SweepGrid) -> Self {
        Self {
            grid,
            code: CrcCode::crc12(),
            budget: DecoderBudget::default(),
            stopping: StoppingRule::default(),
            batch_size: DEFAULT_BATCH_SIZE,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.stopping.validate()?;
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(())
    }

    fn chain_config(&self, cell: &CellSpec) -> HopChainConfig {
        HopChainConfig {
            num_relays: cell.num_relays,
            scenario: cell.scenario,
            decoder: cell.decoder,
            channel: cell.channel,
            fading: cell.fading,
            snr: SnrSpec::bpsk(cell.eb_n0_db, self.code.rate()),
            per_hop_eb_n0_db: None,
            budget: self.budget,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct BatchStats {
    trials: u64,
    bit_errors: u64,
    block_errors: u64,
    queries: u64,
    decodes: u64,
    abandoned: u64,
}

impl BatchStats {
    fn merge(&mut self, other: &BatchStats) {
        self.trials += other.trials;
        self.bit_errors += other.bit_errors;
        self.block_errors += other.block_errors;
        self.queries += other.queries;
        self.decodes += other.decodes;
        self.abandoned += other.abandoned;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerRecord {
    pub cell: CellSpec,
    pub trials: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub total_queries: u64,
    pub decodes: u64,
    pub abandoned: u64,
    pub info_bits: usize,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl BerRecord {
    pub fn ber(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.bit_errors as f64 / (self.trials as f64 * self.info_bits as f64)
    }

    pub fn bler(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.block_errors as f64 / self.trials as f64
    }

    /// Membership queries per block, summed over all decoding nodes.
    pub fn mean_queries(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.total_queries as f64 / self.trials as f64
    }

    pub fn abandoned_fraction(&self) -> f64 {
        if self.decodes == 0 {
            return 0.0;
        }
        self.abandoned as f64 / self.decodes as f64
    }

    /// No errors observed: the BER is only bounded above by `1 / (trials k)`.
    pub fn upper_bound_only(&self) -> bool {
        self.bit_errors == 0
    }

    pub fn all_abandoned(&self) -> bool {
        self.decodes > 0 && self.abandoned == self.decodes
    }

    /// Standard error of the BER estimate, treating blocks as the
    /// independent units (bit errors cluster inside a failed block).
    pub fn ber_std_error(&self) -> f64 {
        if self.block_errors == 0 {
            return 1.0 / (self.trials.max(1) as f64 * self.info_bits as f64);
        }
        self.ber() / (self.block_errors as f64).sqrt()
    }
}

fn run_batch(config: &SweepConfig, chain: &HopChainConfig, cell: &CellSpec, batch: u64, trials: u64) -> Result<BatchStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(cell.stream_key(config.grid.master_seed));
    rng.set_stream(batch);
    let link = chain.link();
    let k = config.code.k();
    let mut stats = BatchStats::default();
    for _ in 0..trials {
        let message = BitBlock::random(k, &mut rng);
        let trace = run_chain(chain, &config.code, &link, &message, &mut rng)?;
        let count = count_errors(&trace, &message)?;
        stats.trials += 1;
        stats.bit_errors += count.bit_errors as u64;
        stats.block_errors += u64::from(count.block_error);
        stats.queries += trace.total_queries();
        stats.decodes += trace.decodes.len() as u64;
        stats.abandoned += trace.abandoned_decodes() as u64;
    }
    Ok(stats)
}

/// Simulates a single cell. Identical for any thread pool size.
pub fn run_cell(config: &SweepConfig, cell: &CellSpec) -> Result<BerRecord> {
    let start = Instant::now();
    let chain = config.chain_config(cell);
    chain.validate()?;
    let max_trials = config.stopping.max_trials();
    let bs = config.batch_size;
    let batch_trials = |b: u64| bs.min(max_trials.saturating_sub(b * bs));
    let mut total = BatchStats::default();
    let mut next_batch = 0u64;
    'rounds: loop {
        let batches: Vec<u64> = (next_batch..next_batch + ROUND_BATCHES)
            .take_while(|&b| batch_trials(b) > 0)
            .collect();
        if batches.is_empty() {
            break;
        }
        let results: Vec<Result<BatchStats>> = batches
            .par_iter()
            .map(|&b| run_batch(config, &chain, cell, b, batch_trials(b)))
            .collect();
        for stats in results {
            total.merge(&stats?);
            next_batch += 1;
            let progress = Progress {
                trials: total.trials,
                block_errors: total.block_errors,
            };
            if stopping_rule(&progress, &config.stopping) == Decision::Stop {
                break 'rounds;
            }
        }
    }
    Ok(BerRecord {
        cell: *cell,
        trials: total.trials,
        bit_errors: total.bit_errors,
        block_errors: total.block_errors,
        total_queries: total.queries,
        decodes: total.decodes,
        abandoned: total.abandoned,
        info_bits: config.code.k(),
        seed: config.grid.master_seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs every grid cell; records come back in [`SweepGrid::cells`] order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<BerRecord>> {
    run_sweep_with_progress(config, |_, _, _| {})
}

pub fn run_sweep_with_progress<F>(config: &SweepConfig, on_cell: F) -> Result<Vec<BerRecord>>
where
    F: Fn(&BerRecord, usize, usize) + Sync,
{
    config.validate()?;
    let cells = config.grid.cells();
    let total = cells.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let work = || {
        cells
            .par_iter()
            .map(|cell| {
                let rec = run_cell(config, cell)?;
                let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                on_cell(&rec, finished, total);
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    };
    match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// One row of the results CSV, in column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scenario: Scenario,
    pub decoder: DecoderKind,
    pub channel: ChannelKind,
    pub fading_mode: FadingMode,
    pub num_relays: usize,
    pub eb_n0_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub bler: f64,
    pub mean_queries: f64,
    pub abandoned_fraction: f64,
    pub seed: u64,
    pub wall_time_s: f64,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "scenario",
    "decoder",
    "channel",
    "fading_mode",
    "num_relays",
    "eb_n0_db",
    "trials",
    "bit_errors",
    "block_errors",
    "ber",
    "bler",
    "mean_queries",
    "abandoned_fraction",
    "seed",
    "wall_time_s",
];

impl From<&BerRecord> for CsvRow {
    fn from(r: &BerRecord) -> Self {
        Self {
            scenario: r.cell.scenario,
            decoder: r.cell.decoder,
            channel: r.cell.channel,
            fading_mode: r.cell.fading,
            num_relays: r.cell.num_relays,
            eb_n0_db: r.cell.eb_n0_db,
            trials: r.trials,
            bit_errors: r.bit_errors,
            block_errors: r.block_errors,
            ber: r.ber(),
            bler: r.bler(),
            mean_queries: r.mean_queries(),
            abandoned_fraction: r.abandoned_fraction(),
            seed: r.seed,
            wall_time_s: r.wall_time_s,
        }
    }
}

impl CsvRow {
    pub fn cell(&self) -> CellSpec {
        CellSpec {
            scenario: self.scenario,
            decoder: self.decoder,
            channel: self.channel,
            fading: self.fading_mode,
            num_relays: self.num_relays,
            eb_n0_db: self.eb_n0_db,
        }
    }
}

/// `#`-prefixed metadata lines written above the header row.
pub fn metadata_lines(config: &SweepConfig) -> Vec<String> {
    let code = &config.code;
    vec![
        format!("engine {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        format!(
            "code crc_koopman={:#X} crc_explicit={:#X} k={} n={}",
            code.koopman_id(),
            code.explicit_polynomial(),
            code.k(),
            code.n()
        ),
        "modulation BPSK".to_string(),
        format!(
            "budget max_queries={} max_weight={} max_logistic_weight={}",
            config.budget.max_queries,
            config.budget.max_weight,
            config
                .budget
                .max_logistic_weight
                .map_or("none".to_string(), |v| v.to_string())
        ),
        format!("stopping {} batch_size={}", config.stopping, config.batch_size),
        format!("fading_mode {}", config.grid.fading),
        format!("master_seed {:#X}", config.grid.master_seed),
    ]
}

pub fn write_results_csv<W: Write>(mut out: W, config: &SweepConfig, records: &[BerRecord]) -> Result<()> {
    for line in metadata_lines(config) {
        writeln!(out, "# {line}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    if records.is_empty() {
        writer.write_record(CSV_COLUMNS)?;
    }
    for rec in records {
        writer.serialize(CsvRow::from(rec))?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a results CSV, checking the header for the documented columns.
pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = reader.headers()?.clone();
    let missing: Vec<String> = CSV_COLUMNS
        .iter()
        .filter(|c| !headers.iter().any(|h| h == **c))
        .map(|c| c.to_string())
        .collect();
    if missing.len() == CSV_COLUMNS.len() && headers.iter().all(|h| h.is_empty()) {
        return Err(Error::NoRecords);
    }
    if !missing.is_empty() {
        return Err(Error::Schema(missing));
    }
    let rows = reader.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>()?;
    Ok(rows)
}

/// The CSV text with the `wall_time_s` column removed, for byte-level
/// reproducibility comparisons.
pub fn strip_wall_time(csv_text: &str) -> String {
    let mut out = String::new();
    let mut wall_idx = None;
    for line in csv_text.lines() {
        if line.starts_with('#') {
            out.push_str(line);
            out.push('\n');
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let idx = *wall_idx.get_or_insert_with(|| fields.iter().position(|f| *f == "wall_time_s"));
        let kept: Vec<&str> = fields
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != idx)
            .map(|(_, f)| *f)
            .collect();
        out.push_str(&kept.join(","));
        out.push('\n');
    }
    out
}
