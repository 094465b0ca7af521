//! Decode-and-forward chains of `num_relays + 1` hops.
//!
//! * `NO_GRAND`: every node takes hard decisions and forwards them.
//! * `DEST_ONLY`: relays forward hard decisions; only the destination
//!   decodes. ORBGRAND at the destination sees only the last hop's LLRs.
//! * `ALL_NODES`: every relay decodes and forwards its decoded codeword (or
//!   its hard decisions if the decoder abandons); the destination decodes
//!   last.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitblock::{BitBlock, ErrorPattern};
use crate::channel::{
    demodulate_llr, modulate_bpsk, noise_variance_from, string_enum, transmit, ChannelKind,
    FadingMode, SnrSpec,
};
use crate::crc::CrcCode;
use crate::error::{Error, Result};
use crate::grand::{self, DecodeResult, PatternSchedule};
use crate::orbgrand::{decode_soft, LlrVector, SoftBudget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scenario {
    DestOnly,
    AllNodes,
    NoGrand,
}

string_enum!(Scenario {
    Scenario::DestOnly => "DEST_ONLY",
    Scenario::AllNodes => "ALL_NODES",
    Scenario::NoGrand => "NO_GRAND",
});

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DecoderKind {
    GrandHard,
    Orbgrand,
    None,
}

string_enum!(DecoderKind {
    DecoderKind::GrandHard => "GRAND_HARD",
    DecoderKind::Orbgrand => "ORBGRAND",
    DecoderKind::None => "NONE",
});

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoderBudget {
    pub max_queries: u64,
    /// Hamming-weight cap for hard GRAND.
    pub max_weight: usize,
    /// Logistic-weight cap for ORBGRAND; `None` is uncapped.
    pub max_logistic_weight: Option<u64>,
}

impl Default for DecoderBudget {
    fn default() -> Self {
        Self {
            max_queries: grand::DEFAULT_MAX_QUERIES,
            max_weight: grand::DEFAULT_MAX_WEIGHT,
            max_logistic_weight: None,
        }
    }
}

pub fn check_scenario_decoder(scenario: Scenario, decoder: DecoderKind) -> Result<()> {
    match (scenario, decoder) {
        (Scenario::NoGrand, DecoderKind::None) => Ok(()),
        (Scenario::NoGrand, d) => Err(Error::Usage(format!(
            "scenario NO_GRAND takes decoder NONE, not {d}"
        ))),
        (s, DecoderKind::None) => Err(Error::Usage(format!(
            "scenario {s} needs a decoder (GRAND_HARD or ORBGRAND), got NONE"
        ))),
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopChainConfig {
    pub num_relays: usize,
    pub scenario: Scenario,
    pub decoder: DecoderKind,
    pub channel: ChannelKind,
    pub fading: FadingMode,
    pub snr: SnrSpec,
    /// Per-hop Eb/N0 overrides; when set, must have one entry per hop.
    pub per_hop_eb_n0_db: Option<Vec<f64>>,
    pub budget: DecoderBudget,
}

impl HopChainConfig {
    pub fn hops(&self) -> usize {
        self.num_relays + 1
    }

    pub fn validate(&self) -> Result<()> {
        check_scenario_decoder(self.scenario, self.decoder)?;
        if let Some(v) = &self.per_hop_eb_n0_db {
            if v.len() != self.hops() {
                return Err(Error::Usage(format!(
                    "{} per-hop SNR values for {} hops",
                    v.len(),
                    self.hops()
                )));
            }
        }
        if self.budget.max_queries == 0 {
            return Err(Error::Usage("max_queries must be positive".into()));
        }
        Ok(())
    }

    pub fn noise_variances(&self) -> Vec<f64> {
        match &self.per_hop_eb_n0_db {
            Some(v) => v
                .iter()
                .map(|&db| noise_variance_from(&SnrSpec { eb_n0_db: db, ..self.snr }))
                .collect(),
            None => vec![noise_variance_from(&self.snr); self.hops()],
        }
    }

    pub fn link(&self) -> RadioLink {
        RadioLink {
            channel: self.channel,
            fading: self.fading,
            noise_variances: self.noise_variances(),
        }
    }
}

/// What a receiving node observes on one hop.
#[derive(Clone, Debug, PartialEq)]
pub struct HopObservation {
    pub hard: BitBlock,
    pub llrs: LlrVector,
}

/// One physical hop. `hop` is zero-based.
pub trait HopLink {
    fn traverse<R: Rng + ?Sized>(&self, hop: usize, sent: &BitBlock, rng: &mut R) -> HopObservation;
}

/// BPSK over the configured channel with perfect CSI at every receiver.
#[derive(Clone, Debug, PartialEq)]
pub struct RadioLink {
    pub channel: ChannelKind,
    pub fading: FadingMode,
    pub noise_variances: Vec<f64>,
}

impl HopLink for RadioLink {
    fn traverse<R: Rng + ?Sized>(&self, hop: usize, sent: &BitBlock, rng: &mut R) -> HopObservation {
        let x = modulate_bpsk(sent);
        let (y, realization) = transmit(&x, self.channel, self.fading, self.noise_variances[hop], rng);
        let (hard, llrs) = demodulate_llr(&y, &realization);
        HopObservation { hard, llrs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopResult {
    pub observation: HopObservation,
    /// `sent ⊕ hard`.
    pub error: ErrorPattern,
}

pub fn run_hop<L: HopLink, R: Rng + ?Sized>(link: &L, hop: usize, sent: &BitBlock, rng: &mut R) -> HopResult {
    let observation = link.traverse(hop, sent, rng);
    let error = ErrorPattern::new(sent.xor(&observation.hard).expect("hop preserves length"));
    HopResult { observation, error }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeDecode {
    /// 1-based hop index of the link this node received on; the destination
    /// is node `hops`.
    pub node: usize,
    pub queries_used: u64,
    pub abandoned: bool,
    /// Node output XOR the word its predecessor transmitted. Nonzero on a
    /// non-abandoned relay means an undetected error was forwarded.
    pub residual: BitBlock,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopTrace {
    pub scenario: Scenario,
    pub codeword: BitBlock,
    /// What each node transmitted; entry 0 is the source codeword.
    pub transmitted: Vec<BitBlock>,
    pub hop_errors: Vec<ErrorPattern>,
    pub decodes: Vec<NodeDecode>,
    /// Hard bits at the destination, before decoding.
    pub received: BitBlock,
    /// `received ⊕ codeword`.
    pub accumulated_noise: BitBlock,
    pub output: BitBlock,
}

impl HopTrace {
    pub fn total_queries(&self) -> u64 {
        self.decodes.iter().map(|d| d.queries_used).sum()
    }

    pub fn abandoned_decodes(&self) -> usize {
        self.decodes.iter().filter(|d| d.abandoned).count()
    }

    /// Checks the noise-composition identity for the trace's scenario:
    /// hard-forwarding chains accumulate `e_1 ⊕ ... ⊕ e_L`; decoding relays
    /// contribute their residuals in place of their hops' noise.
    pub fn noise_identity_holds(&self) -> bool {
        let mut composed = BitBlock::zeros(self.codeword.len());
        match self.scenario {
            Scenario::NoGrand | Scenario::DestOnly => {
                for e in &self.hop_errors {
                    composed.xor_assign(e.bits()).expect("same length");
                }
            }
            Scenario::AllNodes => {
                let relays = self.hop_errors.len() - 1;
                for d in &self.decodes[..relays] {
                    composed.xor_assign(&d.residual).expect("same length");
                }
                composed
                    .xor_assign(self.hop_errors[relays].bits())
                    .expect("same length");
            }
        }
        composed == self.accumulated_noise
    }
}

fn decode_node(cfg: &HopChainConfig, code: &CrcCode, obs: &HopObservation) -> Result<Option<DecodeResult>> {
    let n = code.n();
    match cfg.decoder {
        DecoderKind::None => Ok(None),
        DecoderKind::GrandHard => {
            let schedule = PatternSchedule::new(n)
                .with_max_weight(cfg.budget.max_weight)
                .with_max_queries(cfg.budget.max_queries);
            grand::decode(code, &obs.hard, &schedule).map(Some)
        }
        DecoderKind::Orbgrand => {
            let budget = SoftBudget {
                max_queries: cfg.budget.max_queries,
                max_logistic_weight: cfg.budget.max_logistic_weight,
            };
            decode_soft(code, &obs.hard, &obs.llrs, &budget).map(Some)
        }
    }
}

fn node_record(node: usize, result: &DecodeResult, output: &BitBlock, prev_sent: &BitBlock) -> NodeDecode {
    NodeDecode {
        node,
        queries_used: result.queries_used,
        abandoned: result.is_abandoned(),
        residual: output.xor(prev_sent).expect("same length"),
    }
}

fn check_message(code: &CrcCode, message: &BitBlock) -> Result<BitBlock> {
    code.encode(message)
}

/// Runs one block through the chain selected by `cfg.scenario`.
pub fn run_chain<L: HopLink, R: Rng + ?Sized>(
    cfg: &HopChainConfig,
    code: &CrcCode,
    link: &L,
    message: &BitBlock,
    rng: &mut R,
) -> Result<HopTrace> {
    match cfg.scenario {
        Scenario::NoGrand | Scenario::DestOnly => run_forwarding_chain(cfg, code, link, message, rng),
        Scenario::AllNodes => run_chain_scenario2(cfg, code, link, message, rng),
    }
}

/// Relays forward hard decisions; the destination decodes (`DEST_ONLY`) or
/// keeps its hard decisions (`NO_GRAND`).
pub fn run_chain_scenario1<L: HopLink, R: Rng + ?Sized>(
    cfg: &HopChainConfig,
    code: &CrcCode,
    link: &L,
    message: &BitBlock,
    rng: &mut R,
) -> Result<HopTrace> {
    if cfg.scenario != Scenario::DestOnly {
        return Err(Error::Usage(format!("expected DEST_ONLY, got {}", cfg.scenario)));
    }
    run_forwarding_chain(cfg, code, link, message, rng)
}

fn run_forwarding_chain<L: HopLink, R: Rng + ?Sized>(
    cfg: &HopChainConfig,
    code: &CrcCode,
    link: &L,
    message: &BitBlock,
    rng: &mut R,
) -> Result<HopTrace> {
    cfg.validate()?;
    let codeword = check_message(code, message)?;
    let hops = cfg.hops();
    let mut transmitted = Vec::with_capacity(hops);
    let mut hop_errors = Vec::with_capacity(hops);
    let mut sent = codeword.clone();
    let mut last = None;
    for hop in 0..hops {
        let result = run_hop(link, hop, &sent, rng);
        hop_errors.push(result.error);
        transmitted.push(std::mem::replace(&mut sent, result.observation.hard.clone()));
        last = Some(result.observation);
    }
    let obs = last.expect("at least one hop");
    let received = obs.hard.clone();
    let mut decodes = Vec::new();
    let output = match decode_node(cfg, code, &obs)? {
        Some(result) => {
            let output = result.output_or(&received);
            decodes.push(node_record(hops, &result, &output, &transmitted[hops - 1]));
            output
        }
        None => received.clone(),
    };
    finish(cfg.scenario, codeword, transmitted, hop_errors, decodes, received, output)
}

/// Every relay decodes and forwards; the destination decodes last.
pub fn run_chain_scenario2<L: HopLink, R: Rng + ?Sized>(
    cfg: &HopChainConfig,
    code: &CrcCode,
    link: &L,
    message: &BitBlock,
    rng: &mut R,
) -> Result<HopTrace> {
    if cfg.scenario != Scenario::AllNodes {
        return Err(Error::Usage(format!("expected ALL_NODES, got {}", cfg.scenario)));
    }
    cfg.validate()?;
    let codeword = check_message(code, message)?;
    let hops = cfg.hops();
    let mut transmitted = Vec::with_capacity(hops);
    let mut hop_errors = Vec::with_capacity(hops);
    let mut decodes = Vec::with_capacity(hops);
    let mut sent = codeword.clone();
    let mut received = None;
    let mut output = None;
    for hop in 0..hops {
        let result = run_hop(link, hop, &sent, rng);
        hop_errors.push(result.error);
        let obs = result.observation;
        let decoded = decode_node(cfg, code, &obs)?.expect("ALL_NODES has a decoder");
        let node_out = decoded.output_or(&obs.hard);
        decodes.push(node_record(hop + 1, &decoded, &node_out, &sent));
        if hop + 1 == hops {
            received = Some(obs.hard);
            output = Some(node_out);
        } else {
            transmitted.push(std::mem::replace(&mut sent, node_out));
        }
    }
    transmitted.push(sent);
    finish(
        cfg.scenario,
        codeword,
        transmitted,
        hop_errors,
        decodes,
        received.expect("at least one hop"),
        output.expect("at least one hop"),
    )
}

fn finish(
    scenario: Scenario,
    codeword: BitBlock,
    transmitted: Vec<BitBlock>,
    hop_errors: Vec<ErrorPattern>,
    decodes: Vec<NodeDecode>,
    received: BitBlock,
    output: BitBlock,
) -> Result<HopTrace> {
    let accumulated_noise = received.xor(&codeword)?;
    let trace = HopTrace {
        scenario,
        codeword,
        transmitted,
        hop_errors,
        decodes,
        received,
        accumulated_noise,
        output,
    };
    debug_assert!(trace.noise_identity_holds());
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ErrorCount {
    pub bit_errors: usize,
    pub block_error: bool,
}

/// Information-bit errors of the destination output.
pub fn count_errors(trace: &HopTrace, message: &BitBlock) -> Result<ErrorCount> {
    let k = message.len();
    if trace.output.len() < k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: trace.output.len(),
        });
    }
    let bit_errors = trace.output.slice(0, k).distance(message)?;
    Ok(ErrorCount {
        bit_errors,
        block_error: bit_errors > 0,
    })
}
