//! Built-in oracle suites, runnable from the command line.
//!
//! Each suite compares the production code against an independent slow
//! implementation on small inputs: bitwise long division for the CRC,
//! exhaustive maximum-likelihood search on a toy code for both decoders,
//! and a partition-counting recurrence for the ORBGRAND schedule.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitblock::BitBlock;
use crate::crc::{CrcCode, SyndromeCode, CRC12_EXPLICIT};
use crate::grand::{self, PatternSchedule};
use crate::orbgrand::{decode_soft, LlrVector, LogisticWeightCursor, SoftBudget};

/// Frozen 116-bit messages (hex, MSB first, 4 padding bits) and their
/// CRC-12 parity under `x^12+x^8+x^7+x^6+x^5+x^2+x+1`.
const CRC12_GOLDEN: [(&str, u64); 3] = [
    ("FFFFFFFFFFFFFFFFFFFFFFFFFFFFF0", 0x60F),
    ("0123456789ABCDEF0123456789ABC0", 0x80E),
    ("800000000000000000000000000010", 0x41C),
];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

/// Codes under test; [`Default`] gives the production constants.
#[derive(Clone, Debug)]
pub struct SelftestCodes {
    pub crc12: CrcCode,
    pub toy: CrcCode,
}

impl Default for SelftestCodes {
    fn default() -> Self {
        Self {
            crc12: CrcCode::crc12(),
            toy: CrcCode::toy(),
        }
    }
}

pub fn run_all() -> Vec<SuiteResult> {
    run_suites(&SelftestCodes::default())
}

pub fn run_suites(codes: &SelftestCodes) -> Vec<SuiteResult> {
    type Suite = fn(&SelftestCodes) -> Result<String, String>;
    let suites: [(&'static str, Suite); 4] = [
        ("crc-long-division", suite_crc),
        ("grand-ml-equivalence", suite_grand_ml),
        ("orbgrand-brute-force", suite_orbgrand_ml),
        ("orbgrand-partition-counts", suite_partitions),
    ];
    suites
        .iter()
        .map(|&(name, suite)| {
            let start = Instant::now();
            let outcome = suite(codes);
            SuiteResult {
                name,
                passed: outcome.is_ok(),
                detail: outcome.unwrap_or_else(|e| e),
                elapsed_s: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn long_division_parity(explicit: u64, width: usize, message: &BitBlock) -> u64 {
    let mut reg = 0u64;
    for bit in message.iter().chain(std::iter::repeat_n(false, width)) {
        reg = (reg << 1) | u64::from(bit);
        if reg >> width & 1 == 1 {
            reg ^= explicit;
        }
    }
    reg
}

fn suite_crc(codes: &SelftestCodes) -> Result<String, String> {
    let code = &codes.crc12;
    if code.explicit_polynomial() != CRC12_EXPLICIT {
        return Err(format!(
            "generator {:#X} differs from {CRC12_EXPLICIT:#X}",
            code.explicit_polynomial()
        ));
    }
    for (hex, parity) in CRC12_GOLDEN {
        let msg = BitBlock::from_hex(hex, code.k()).map_err(|e| e.to_string())?;
        let got = code.parity_value(&msg).map_err(|e| e.to_string())?;
        if got != parity {
            return Err(format!("message {hex}: parity {got:#05X}, expected {parity:#05X}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..200 {
        let msg = BitBlock::random(code.k(), &mut rng);
        let want = long_division_parity(CRC12_EXPLICIT, 12, &msg);
        let cw = code.encode(&msg).map_err(|e| e.to_string())?;
        if code.parity_value(&msg).map_err(|e| e.to_string())? != want || code.syndrome_value(&cw) != 0 {
            return Err(format!("long division disagrees on message {}", msg.to_hex()));
        }
    }
    Ok("3 golden vectors, 200 random messages".into())
}

fn codewords(code: &CrcCode) -> Result<Vec<BitBlock>, String> {
    (0..1u64 << code.k())
        .map(|m| {
            let bits: Vec<u8> = (0..code.k()).map(|i| ((m >> i) & 1) as u8).collect();
            let msg = BitBlock::from_bits(&bits).map_err(|e| e.to_string())?;
            code.encode(&msg).map_err(|e| e.to_string())
        })
        .collect()
}

fn pattern_value(e: &BitBlock) -> u64 {
    e.ones().map(|i| 1u64 << i).sum()
}

fn suite_grand_ml(codes: &SelftestCodes) -> Result<String, String> {
    let code = &codes.toy;
    let n = code.n();
    let book = codewords(code)?;
    let schedule = PatternSchedule::new(n).with_max_weight(n).with_max_queries(u64::MAX);
    for r in 0..1u64 << n {
        let bits: Vec<u8> = (0..n).map(|i| ((r >> i) & 1) as u8).collect();
        let rx = BitBlock::from_bits(&bits).map_err(|e| e.to_string())?;
        // ML with ties broken by the schedule: smallest (weight, value).
        let best = book
            .iter()
            .min_by_key(|c| {
                let e = rx.xor(c).expect("same length");
                (e.hamming_weight(), pattern_value(&e))
            })
            .expect("non-empty codebook");
        let got = grand::decode(code, &rx, &schedule).map_err(|e| e.to_string())?;
        if got.codeword() != Some(best) {
            return Err(format!("received {rx}: GRAND gave {:?}, ML gives {best}", got.codeword()));
        }
    }
    Ok(format!("all {} received words", 1u64 << n))
}

fn suite_orbgrand_ml(codes: &SelftestCodes) -> Result<String, String> {
    let code = &codes.toy;
    let n = code.n();
    let book = codewords(code)?;
    let budget = SoftBudget {
        max_queries: u64::MAX,
        max_logistic_weight: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x0B6);
    for draw in 0..1000 {
        let llrs: Vec<f64> = (0..n)
            .map(|_| {
                // Coarse values make rank ties common.
                let v: f64 = if rng.random_bool(0.3) {
                    f64::from(rng.random_range(-3i32..=3))
                } else {
                    rng.random_range(-6.0..6.0)
                };
                v
            })
            .collect();
        let llrs = LlrVector::new(llrs);
        let hard = llrs.hard_decision();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            llrs.as_slice()[a].abs().total_cmp(&llrs.as_slice()[b].abs()).then(a.cmp(&b))
        });
        let mut rank = vec![0usize; n];
        for (r, &bit) in order.iter().enumerate() {
            rank[bit] = r + 1;
        }
        let best = book
            .iter()
            .min_by_key(|c| {
                let e = hard.xor(c).expect("same length");
                let mut parts: Vec<usize> = e.ones().map(|i| rank[i]).collect();
                parts.sort_unstable();
                (parts.iter().sum::<usize>(), parts.len(), parts)
            })
            .expect("non-empty codebook");
        let got = decode_soft(code, &hard, &llrs, &budget).map_err(|e| e.to_string())?;
        if got.codeword() != Some(best) {
            return Err(format!(
                "draw {draw}: ORBGRAND gave {:?}, brute force gives {best}",
                got.codeword()
            ));
        }
    }
    Ok("1000 LLR draws".into())
}

/// Partitions of `w` into distinct parts no larger than `n`.
pub fn distinct_partition_count(w: usize, n: usize) -> u64 {
    let mut ways = vec![0u64; w + 1];
    ways[0] = 1;
    for part in 1..=n.min(w) {
        for total in (part..=w).rev() {
            ways[total] += ways[total - part];
        }
    }
    ways[w]
}

fn suite_partitions(_: &SelftestCodes) -> Result<String, String> {
    for (n, max_w) in [(8usize, 36u64), (128, 40)] {
        let mut counts = vec![0u64; max_w as usize + 1];
        let mut cursor = LogisticWeightCursor::with_cap(n, max_w);
        let mut last = 0;
        while let Some(parts) = cursor.advance() {
            let w: usize = parts.iter().sum();
            if (w as u64) < last {
                return Err(format!("n={n}: logistic weight decreased to {w}"));
            }
            last = w as u64;
            counts[w] += 1;
        }
        for (w, &c) in counts.iter().enumerate() {
            let want = distinct_partition_count(w, n);
            if c != want {
                return Err(format!("n={n}, weight {w}: {c} patterns, expected {want}"));
            }
        }
    }
    Ok("weights 0..=36 at n=8, 0..=40 at n=128".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for r in run_all() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn corrupted_generator_fails_named_suite() {
        let codes = SelftestCodes {
            crc12: CrcCode::from_explicit(CRC12_EXPLICIT ^ 0b100, 116).unwrap(),
            ..SelftestCodes::default()
        };
        let results = run_suites(&codes);
        let crc = results.iter().find(|r| r.name == "crc-long-division").unwrap();
        assert!(!crc.passed);
        assert!(crc.detail.contains("generator"));
    }

    #[test]
    fn oracles_follow_an_alternative_toy_code() {
        // A different valid toy generator is still a code; the oracle adapts.
        let codes = SelftestCodes {
            toy: CrcCode::from_explicit(0b1_1001, 4).unwrap(),
            ..SelftestCodes::default()
        };
        assert!(run_suites(&codes).iter().all(|r| r.passed));
    }

    #[test]
    fn partition_recurrence_small_values() {
        // 6 = 6 = 5+1 = 4+2 = 3+2+1
        assert_eq!(distinct_partition_count(6, 6), 4);
        assert_eq!(distinct_partition_count(6, 3), 1);
        assert_eq!(distinct_partition_count(0, 5), 1);
        assert_eq!((0..=36).map(|w| distinct_partition_count(w, 8)).sum::<u64>(), 256);
    }
}
