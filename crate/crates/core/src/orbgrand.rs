//! Soft-detection ORBGRAND.
//!
//! Bits are ranked by ascending `|LLR|` (rank 1 = least reliable). A pattern
//! is a set of distinct ranks; its logistic weight is the sum of those ranks.
//! Patterns are queried in ascending logistic weight, so the patterns of one
//! weight `w` are exactly the partitions of `w` into distinct parts no larger
//! than `n`. Within one weight, partitions with fewer parts come first and
//! partitions with the same number of parts are in lexicographic order of
//! their ascending part lists: weight 6 gives `{6}, {1,5}, {2,4}, {1,2,3}`.
//!
//! LLR sign convention: positive means bit 0 is more likely.

use crate::bitblock::{BitBlock, ErrorPattern};
use crate::crc::SyndromeCode;
use crate::error::{Error, Result};
use crate::grand::DecodeResult;

#[derive(Clone, Debug, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(llrs: Vec<f64>) -> Self {
        Self(llrs)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit `i` is 1 iff `llr[i] < 0`; an LLR of exactly zero decides 0.
    pub fn hard_decision(&self) -> BitBlock {
        let mut out = BitBlock::zeros(self.0.len());
        for (i, &l) in self.0.iter().enumerate() {
            if l < 0.0 {
                out.set(i, true);
            }
        }
        out
    }
}

impl From<Vec<f64>> for LlrVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityRanking {
    /// `order[r]` is the bit index holding rank `r + 1`.
    order: Vec<usize>,
    /// `|LLR|` of `order[r]`, non-decreasing.
    reliabilities: Vec<f64>,
}

impl ReliabilityRanking {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Bit index of a 1-based rank.
    pub fn bit_of_rank(&self, rank: usize) -> usize {
        self.order[rank - 1]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn reliabilities(&self) -> &[f64] {
        &self.reliabilities
    }

    /// 1-based rank of every bit.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.order.len()];
        for (r, &bit) in self.order.iter().enumerate() {
            ranks[bit] = r + 1;
        }
        ranks
    }
}

/// Sorts bits by ascending `|LLR|`, ties by ascending bit index.
pub fn rank_bits(llrs: &LlrVector) -> Result<ReliabilityRanking> {
    let values = llrs.as_slice();
    if let Some(i) = values.iter().position(|l| !l.is_finite()) {
        return Err(Error::NonFiniteLlr(i));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()).then(a.cmp(&b)));
    let reliabilities = order.iter().map(|&i| values[i].abs()).collect();
    Ok(ReliabilityRanking {
        order,
        reliabilities,
    })
}

fn max_sum_top(count: u64, n: u64) -> u64 {
    // Sum of the `count` largest integers in 1..=n.
    count * n - count * count.saturating_sub(1) / 2
}

/// Lexicographically smallest ascending list of `count` distinct parts,
/// each in `lo..=n`, summing to `sum`.
fn first_completion(count: usize, lo: u64, sum: u64, n: u64, out: &mut Vec<usize>) -> bool {
    if count == 0 {
        return sum == 0;
    }
    if count == 1 {
        if sum >= lo && sum <= n {
            out.push(sum as usize);
            return true;
        }
        return false;
    }
    let rest = count as u64 - 1;
    if rest > n {
        return false;
    }
    let v = lo.max(sum.saturating_sub(max_sum_top(rest, n)));
    // The remaining parts must all exceed v.
    let min_rest = rest * v + rest * (rest + 1) / 2;
    if v > n || v > sum || min_rest > sum - v {
        return false;
    }
    out.push(v as usize);
    first_completion(count - 1, v + 1, sum - v, n, out)
}

/// Position in the logistic-weight-ordered pattern sequence.
#[derive(Clone, Debug)]
pub struct LogisticWeightCursor {
    n: usize,
    max_logistic_weight: u64,
    weight: u64,
    parts: Vec<usize>,
    state: State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Fresh,
    Active,
    Exhausted,
}

impl LogisticWeightCursor {
    /// Cursor capped at the largest possible logistic weight `n(n+1)/2`.
    pub fn new(n: usize) -> Self {
        let full = (n as u64) * (n as u64 + 1) / 2;
        Self::with_cap(n, full)
    }

    pub fn with_cap(n: usize, max_logistic_weight: u64) -> Self {
        let full = (n as u64) * (n as u64 + 1) / 2;
        Self {
            n,
            max_logistic_weight: max_logistic_weight.min(full),
            weight: 0,
            parts: Vec::new(),
            state: State::Fresh,
        }
    }

    pub fn logistic_weight(&self) -> u64 {
        self.weight
    }

    /// Ranks (1-based, ascending) of the next pattern.
    pub fn advance(&mut self) -> Option<&[usize]> {
        match self.state {
            State::Exhausted => return None,
            State::Fresh => {
                self.state = State::Active;
                return Some(&self.parts);
            }
            State::Active => {}
        }
        if self.step_same_count() || self.step_more_parts() || self.step_next_weight() {
            Some(&self.parts)
        } else {
            self.state = State::Exhausted;
            None
        }
    }

    fn step_same_count(&mut self) -> bool {
        let m = self.parts.len();
        if m < 2 {
            return false;
        }
        let n = self.n as u64;
        let mut scratch = Vec::with_capacity(m);
        for i in (0..m - 1).rev() {
            let prefix_sum: u64 = self.parts[..i].iter().map(|&p| p as u64).sum();
            scratch.clear();
            let lo = self.parts[i] as u64 + 1;
            if first_completion(m - i, lo, self.weight - prefix_sum, n, &mut scratch) {
                self.parts.truncate(i);
                self.parts.extend_from_slice(&scratch);
                return true;
            }
        }
        false
    }

    fn step_more_parts(&mut self) -> bool {
        self.start_at(self.weight, self.parts.len() + 1)
    }

    fn step_next_weight(&mut self) -> bool {
        let mut w = self.weight + 1;
        while w <= self.max_logistic_weight {
            if self.start_at(w, 1) {
                return true;
            }
            w += 1;
        }
        false
    }

    // First partition of `w` with at least `min_parts` parts.
    fn start_at(&mut self, w: u64, min_parts: usize) -> bool {
        let n = self.n as u64;
        let mut m = min_parts;
        let mut scratch = Vec::new();
        while (m as u64) * (m as u64 + 1) / 2 <= w && m <= self.n {
            scratch.clear();
            if first_completion(m, 1, w, n, &mut scratch) {
                self.weight = w;
                self.parts = scratch;
                return true;
            }
            m += 1;
        }
        false
    }
}

pub fn next_pattern_orb(
    cursor: &mut LogisticWeightCursor,
    ranking: &ReliabilityRanking,
) -> Option<ErrorPattern> {
    let n = ranking.len();
    let ranks = cursor.advance()?;
    let flips: Vec<usize> = ranks.iter().map(|&r| ranking.bit_of_rank(r)).collect();
    Some(ErrorPattern::from_positions(n, &flips).expect("ranks lie inside the block"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SoftBudget {
    pub max_queries: u64,
    /// `None` means no cap below `n(n+1)/2`.
    pub max_logistic_weight: Option<u64>,
}

impl Default for SoftBudget {
    fn default() -> Self {
        Self {
            max_queries: crate::grand::DEFAULT_MAX_QUERIES,
            max_logistic_weight: None,
        }
    }
}

pub fn decode_soft(
    code: &impl SyndromeCode,
    received_hard: &BitBlock,
    llrs: &LlrVector,
    budget: &SoftBudget,
) -> Result<DecodeResult> {
    let n = code.block_length();
    for len in [received_hard.len(), llrs.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    if llrs.hard_decision() != *received_hard {
        return Err(Error::Usage(
            "received bits are not the hard decision of the LLRs".into(),
        ));
    }
    let ranking = rank_bits(llrs)?;
    let cols = code.columns();
    let base = code.syndrome_value(received_hard);
    let mut cursor = match budget.max_logistic_weight {
        Some(cap) => LogisticWeightCursor::with_cap(n, cap),
        None => LogisticWeightCursor::new(n),
    };
    let order = ranking.order();
    let mut queries = 0u64;
    while queries < budget.max_queries {
        let Some(ranks) = cursor.advance() else {
            break;
        };
        queries += 1;
        let s = ranks.iter().fold(base, |acc, &r| acc ^ cols[order[r - 1]]);
        if s == 0 {
            let flips: Vec<usize> = ranks.iter().map(|&r| order[r - 1]).collect();
            return Ok(DecodeResult::found(received_hard, &flips, queries));
        }
    }
    Ok(DecodeResult::abandoned(queries))
}
