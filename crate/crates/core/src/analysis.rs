//! BER curve post-processing and barrier location.
//!
//! Curves are compared in `(dB, log10 BER)` space with piecewise-linear
//! interpolation. Zero-error points carry no finite log-BER and are left out.

use std::io::Write;

use serde::Serialize;

use crate::channel::{ChannelKind, FadingMode};
use crate::error::{Error, Result};
use crate::montecarlo::CsvRow;
use crate::multihop::{DecoderKind, Scenario};

pub const DEFAULT_CONSENSUS_TOLERANCE_DB: f64 = 1.0;

/// Cell identity without the SNR coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CurveKey {
    pub scenario: Scenario,
    pub decoder: DecoderKind,
    pub channel: ChannelKind,
    pub fading: FadingMode,
    pub num_relays: usize,
}

impl CurveKey {
    pub fn of(row: &CsvRow) -> Self {
        Self {
            scenario: row.scenario,
            decoder: row.decoder,
            channel: row.channel,
            fading: row.fading_mode,
            num_relays: row.num_relays,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub eb_n0_db: f64,
    pub ber: f64,
    /// Blocks simulated; zero when the point was not produced by the engine.
    pub trials: u64,
    pub block_errors: u64,
}

impl CurvePoint {
    pub fn new(eb_n0_db: f64, ber: f64) -> Self {
        Self {
            eb_n0_db,
            ber,
            trials: 0,
            block_errors: 0,
        }
    }

    pub fn is_zero_error(&self) -> bool {
        self.ber <= 0.0
    }

    /// Block-level standard error (bit errors cluster inside blocks).
    pub fn std_error(&self) -> f64 {
        if self.block_errors == 0 {
            return 0.0;
        }
        self.ber / (self.block_errors as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerCurve {
    pub key: CurveKey,
    points: Vec<CurvePoint>,
}

impl BerCurve {
    /// Sorts by SNR; duplicate or non-finite SNR values are rejected.
    pub fn new(key: CurveKey, mut points: Vec<CurvePoint>) -> Result<Self> {
        if points.iter().any(|p| !p.eb_n0_db.is_finite() || !p.ber.is_finite() || p.ber < 0.0) {
            return Err(Error::Usage("curve points need finite SNR and non-negative BER".into()));
        }
        points.sort_by(|a, b| a.eb_n0_db.total_cmp(&b.eb_n0_db));
        if points.windows(2).any(|w| w[0].eb_n0_db == w[1].eb_n0_db) {
            return Err(Error::Usage(format!("duplicate SNR point in curve {key:?}")));
        }
        Ok(Self { key, points })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn at(&self, eb_n0_db: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| (p.eb_n0_db - eb_n0_db).abs() < 1e-9)
    }
}

/// Groups rows into curves, in order of first appearance.
pub fn curves_from_rows(rows: &[CsvRow]) -> Result<Vec<BerCurve>> {
    let mut groups: Vec<(CurveKey, Vec<CurvePoint>)> = Vec::new();
    for row in rows {
        let key = CurveKey::of(row);
        let point = CurvePoint {
            eb_n0_db: row.eb_n0_db,
            ber: row.ber,
            trials: row.trials,
            block_errors: row.block_errors,
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(point),
            None => groups.push((key, vec![point])),
        }
    }
    groups.into_iter().map(|(k, p)| BerCurve::new(k, p)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub eb_n0_db: f64,
    /// Grid points bracketing the sign change.
    pub interval: (f64, f64),
    /// `|d_lo| + |d_hi|` of the log-BER differences at the bracket ends.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingEstimate {
    pub chosen: Crossing,
    /// Every sign change, ascending in SNR.
    pub candidates: Vec<Crossing>,
}

impl CrossingEstimate {
    pub fn eb_n0_db(&self) -> f64 {
        self.chosen.eb_n0_db
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoCrossing {
    /// Fewer than two shared points with non-zero BER on both curves.
    NoOverlap,
    /// The curves coincide on every shared point.
    Degenerate,
    NoSignChange,
}

impl std::fmt::Display for NoCrossing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::NoOverlap => "NO_OVERLAP",
            Self::Degenerate => "DEGENERATE",
            Self::NoSignChange => "NO_SIGN_CHANGE",
        })
    }
}

/// Locates where `log10 BER_a - log10 BER_b` changes sign.
pub fn find_crossing(a: &BerCurve, b: &BerCurve) -> std::result::Result<CrossingEstimate, NoCrossing> {
    let diffs: Vec<(f64, f64)> = a
        .points
        .iter()
        .filter(|p| !p.is_zero_error())
        .filter_map(|pa| {
            b.at(pa.eb_n0_db)
                .filter(|pb| !pb.is_zero_error())
                .map(|pb| (pa.eb_n0_db, pa.ber.log10() - pb.ber.log10()))
        })
        .collect();
    if diffs.len() < 2 {
        return Err(NoCrossing::NoOverlap);
    }
    if diffs.iter().all(|&(_, d)| d == 0.0) {
        return Err(NoCrossing::Degenerate);
    }

    let mut candidates = Vec::new();
    let mut last_nonzero: Option<usize> = None;
    for (j, &(xj, dj)) in diffs.iter().enumerate() {
        if dj == 0.0 {
            continue;
        }
        if let Some(i) = last_nonzero {
            let (xi, di) = diffs[i];
            if di.signum() != dj.signum() {
                let exact_zero = diffs[i + 1..j].first().map(|&(x, _)| x);
                let x = exact_zero.unwrap_or_else(|| xi + (xj - xi) * di / (di - dj));
                candidates.push(Crossing {
                    eb_n0_db: x,
                    interval: (xi, xj),
                    gap: di.abs() + dj.abs(),
                });
            }
        }
        last_nonzero = Some(j);
    }
    let chosen = candidates
        .iter()
        .copied()
        .reduce(|best, c| if c.gap > best.gap { c } else { best })
        .ok_or(NoCrossing::NoSignChange)?;
    Ok(CrossingEstimate { chosen, candidates })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Consensus {
    Agreed { eb_n0_db: f64, spread_db: f64 },
    Dispersed { spread_db: f64 },
    /// Fewer than two crossings.
    Insufficient,
}

impl Consensus {
    pub fn status(&self) -> &'static str {
        match self {
            Self::Agreed { .. } => "CONSENSUS",
            Self::Dispersed { .. } => "DISPERSED",
            Self::Insufficient => "INSUFFICIENT",
        }
    }

    pub fn eb_n0_db(&self) -> Option<f64> {
        match *self {
            Self::Agreed { eb_n0_db, .. } => Some(eb_n0_db),
            _ => None,
        }
    }

    pub fn spread_db(&self) -> Option<f64> {
        match *self {
            Self::Agreed { spread_db, .. } | Self::Dispersed { spread_db } => Some(spread_db),
            Self::Insufficient => None,
        }
    }
}

pub fn barrier_consensus(crossings: &[f64], tolerance_db: f64) -> Consensus {
    if crossings.len() < 2 {
        return Consensus::Insufficient;
    }
    let lo = crossings.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = crossings.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread_db = hi - lo;
    if spread_db <= tolerance_db {
        let eb_n0_db = crossings.iter().sum::<f64>() / crossings.len() as f64;
        Consensus::Agreed { eb_n0_db, spread_db }
    } else {
        Consensus::Dispersed { spread_db }
    }
}

/// Crossing of one decode-at-every-relay curve with its uncoded baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCrossing {
    pub num_relays: usize,
    pub result: std::result::Result<CrossingEstimate, NoCrossing>,
    /// Single-hop pairs are reported but do not vote: the barrier concerns
    /// chains with at least one relay.
    pub in_consensus: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierEstimate {
    pub channel: ChannelKind,
    pub fading: FadingMode,
    pub decoder: DecoderKind,
    pub pairs: Vec<PairCrossing>,
    pub consensus: Consensus,
}

impl BarrierEstimate {
    pub fn crossings(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .filter(|p| p.in_consensus)
            .filter_map(|p| p.result.as_ref().ok().map(CrossingEstimate::eb_n0_db))
            .collect()
    }
}

/// Pairs every `ALL_NODES` curve with the `NO_GRAND` curve of the same
/// channel, fading mode and relay count; one estimate per (channel, fading,
/// decoder).
pub fn barrier_analysis(curves: &[BerCurve], tolerance_db: f64) -> Result<Vec<BarrierEstimate>> {
    if curves.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut out: Vec<BarrierEstimate> = Vec::new();
    for treat in curves.iter().filter(|c| c.key.scenario == Scenario::AllNodes) {
        let baseline = curves.iter().find(|c| {
            c.key.scenario == Scenario::NoGrand
                && c.key.channel == treat.key.channel
                && c.key.fading == treat.key.fading
                && c.key.num_relays == treat.key.num_relays
        });
        let Some(baseline) = baseline else { continue };
        let pair = PairCrossing {
            num_relays: treat.key.num_relays,
            result: find_crossing(treat, baseline),
            in_consensus: treat.key.num_relays >= 1,
        };
        let group = out.iter_mut().find(|g| {
            g.channel == treat.key.channel && g.fading == treat.key.fading && g.decoder == treat.key.decoder
        });
        match group {
            Some(g) => g.pairs.push(pair),
            None => out.push(BarrierEstimate {
                channel: treat.key.channel,
                fading: treat.key.fading,
                decoder: treat.key.decoder,
                pairs: vec![pair],
                consensus: Consensus::Insufficient,
            }),
        }
    }
    if out.is_empty() {
        return Err(Error::NeedCurves);
    }
    for g in &mut out {
        g.pairs.sort_by_key(|p| p.num_relays);
        g.consensus = barrier_consensus(&g.crossings(), tolerance_db);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct BarrierCsvRow {
    channel: ChannelKind,
    fading_mode: FadingMode,
    decoder: DecoderKind,
    treatment: Scenario,
    baseline: Scenario,
    num_relays: usize,
    crossing_db: Option<f64>,
    interval_lo_db: Option<f64>,
    interval_hi_db: Option<f64>,
    candidates_db: String,
    no_crossing_reason: String,
    in_consensus: bool,
    consensus_status: &'static str,
    consensus_db: Option<f64>,
    spread_db: Option<f64>,
    tolerance_db: f64,
}

pub fn write_barrier_csv<W: Write>(out: W, estimates: &[BarrierEstimate], tolerance_db: f64) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for est in estimates {
        for pair in &est.pairs {
            let (ok, reason) = match &pair.result {
                Ok(c) => (Some(c), String::new()),
                Err(r) => (None, r.to_string()),
            };
            writer.serialize(BarrierCsvRow {
                channel: est.channel,
                fading_mode: est.fading,
                decoder: est.decoder,
                treatment: Scenario::AllNodes,
                baseline: Scenario::NoGrand,
                num_relays: pair.num_relays,
                crossing_db: ok.map(|c| c.eb_n0_db()),
                interval_lo_db: ok.map(|c| c.chosen.interval.0),
                interval_hi_db: ok.map(|c| c.chosen.interval.1),
                candidates_db: ok
                    .map(|c| {
                        c.candidates
                            .iter()
                            .map(|x| format!("{:.3}", x.eb_n0_db))
                            .collect::<Vec<_>>()
                            .join(";")
                    })
                    .unwrap_or_default(),
                no_crossing_reason: reason,
                in_consensus: pair.in_consensus,
                consensus_status: est.consensus.status(),
                consensus_db: est.consensus.eb_n0_db(),
                spread_db: est.consensus.spread_db(),
                tolerance_db,
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}
