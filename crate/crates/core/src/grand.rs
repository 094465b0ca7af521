//! Hard-detection GRAND.
//!
//! Error patterns are guessed in non-decreasing Hamming weight. Within one
//! weight class patterns are visited in ascending integer value, where bit
//! `i` of the block carries weight `2^i`; for index sets this is colex order
//! (`{0,1}, {0,2}, {1,2}, {0,3}, ...`). Every guess costs one membership
//! query, evaluated as a syndrome XOR.

use crate::bitblock::{BitBlock, ErrorPattern};
use crate::crc::SyndromeCode;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_QUERIES: u64 = 1_000_000;
pub const DEFAULT_MAX_WEIGHT: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatternSchedule {
    pub block_length: usize,
    pub max_weight: usize,
    pub max_queries: u64,
}

impl PatternSchedule {
    pub fn new(block_length: usize) -> Self {
        Self {
            block_length,
            max_weight: DEFAULT_MAX_WEIGHT,
            max_queries: DEFAULT_MAX_QUERIES,
        }
    }

    pub fn with_max_weight(mut self, max_weight: usize) -> Self {
        self.max_weight = max_weight;
        self
    }

    pub fn with_max_queries(mut self, max_queries: u64) -> Self {
        self.max_queries = max_queries;
        self
    }

    pub fn cursor(&self) -> WeightCursor {
        WeightCursor::new(self.block_length, self.max_weight.min(self.block_length))
    }

    /// Lazily enumerates the schedule's patterns.
    pub fn patterns(&self) -> impl Iterator<Item = ErrorPattern> + '_ {
        let mut cursor = self.cursor();
        std::iter::from_fn(move || next_pattern(self, &mut cursor))
    }
}

/// Position in the weight-ordered pattern sequence.
#[derive(Clone, Debug)]
pub struct WeightCursor {
    n: usize,
    max_weight: usize,
    flips: Vec<usize>,
    state: CursorState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CursorState {
    Fresh,
    Active,
    Exhausted,
}

impl WeightCursor {
    fn new(n: usize, max_weight: usize) -> Self {
        Self {
            n,
            max_weight,
            flips: Vec::with_capacity(max_weight),
            state: CursorState::Fresh,
        }
    }

    /// Flipped positions of the next pattern, or `None` once exhausted.
    pub fn advance(&mut self) -> Option<&[usize]> {
        match self.state {
            CursorState::Exhausted => return None,
            CursorState::Fresh => {
                self.state = CursorState::Active;
                return Some(&self.flips);
            }
            CursorState::Active => {}
        }
        if !self.step_within_weight() {
            let w = self.flips.len() + 1;
            if w > self.max_weight {
                self.state = CursorState::Exhausted;
                return None;
            }
            self.flips.clear();
            self.flips.extend(0..w);
        }
        Some(&self.flips)
    }

    pub fn weight(&self) -> usize {
        self.flips.len()
    }

    // Colex successor of the current index set.
    fn step_within_weight(&mut self) -> bool {
        let w = self.flips.len();
        for j in 0..w {
            let limit = if j + 1 < w { self.flips[j + 1] } else { self.n };
            if self.flips[j] + 1 < limit {
                self.flips[j] += 1;
                for (i, f) in self.flips[..j].iter_mut().enumerate() {
                    *f = i;
                }
                return true;
            }
        }
        false
    }
}

pub fn next_pattern(schedule: &PatternSchedule, cursor: &mut WeightCursor) -> Option<ErrorPattern> {
    let flips = cursor.advance()?;
    Some(
        ErrorPattern::from_positions(schedule.block_length, flips)
            .expect("cursor positions lie inside the block"),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Decoded {
        codeword: BitBlock,
        noise_estimate: ErrorPattern,
    },
    Abandoned,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub outcome: DecodeOutcome,
    pub queries_used: u64,
}

impl DecodeResult {
    pub fn is_abandoned(&self) -> bool {
        matches!(self.outcome, DecodeOutcome::Abandoned)
    }

    pub fn codeword(&self) -> Option<&BitBlock> {
        match &self.outcome {
            DecodeOutcome::Decoded { codeword, .. } => Some(codeword),
            DecodeOutcome::Abandoned => None,
        }
    }

    pub fn noise_estimate(&self) -> Option<&ErrorPattern> {
        match &self.outcome {
            DecodeOutcome::Decoded { noise_estimate, .. } => Some(noise_estimate),
            DecodeOutcome::Abandoned => None,
        }
    }

    /// The decoded codeword, or `received` unchanged when abandoned.
    pub fn output_or(&self, received: &BitBlock) -> BitBlock {
        self.codeword().cloned().unwrap_or_else(|| received.clone())
    }

    pub(crate) fn found(received: &BitBlock, flips: &[usize], queries_used: u64) -> Self {
        let noise = ErrorPattern::from_positions(received.len(), flips)
            .expect("flip positions lie inside the block");
        let codeword = received.xor(noise.bits()).expect("same length");
        Self {
            outcome: DecodeOutcome::Decoded {
                codeword,
                noise_estimate: noise,
            },
            queries_used,
        }
    }

    pub(crate) fn abandoned(queries_used: u64) -> Self {
        Self {
            outcome: DecodeOutcome::Abandoned,
            queries_used,
        }
    }
}

/// Returns the first pattern in schedule order whose XOR with `received` is
/// a codeword, or `Abandoned` if the query budget or the schedule runs out.
pub fn decode(
    code: &impl SyndromeCode,
    received: &BitBlock,
    schedule: &PatternSchedule,
) -> Result<DecodeResult> {
    let n = code.block_length();
    if received.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: received.len(),
        });
    }
    if schedule.block_length != n {
        return Err(Error::Usage(format!(
            "schedule built for length {}, code has length {n}",
            schedule.block_length
        )));
    }
    let cols = code.columns();
    let base = code.syndrome_value(received);
    let mut cursor = schedule.cursor();
    let mut queries = 0u64;
    while queries < schedule.max_queries {
        let Some(flips) = cursor.advance() else {
            break;
        };
        queries += 1;
        let s = flips.iter().fold(base, |acc, &i| acc ^ cols[i]);
        if s == 0 {
            return Ok(DecodeResult::found(received, flips, queries));
        }
    }
    Ok(DecodeResult::abandoned(queries))
}
