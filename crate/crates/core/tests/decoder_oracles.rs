//! GRAND and ORBGRAND against exhaustive searches written independently
//! of the crate's pattern generators.

use grand_relay::crc::{ColumnCode, SyndromeCode};
use grand_relay::grand::{decode, PatternSchedule};
use grand_relay::orbgrand::{decode_soft, rank_bits, SoftBudget};
use grand_relay::{BitBlock, CrcCode, LlrVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn word(n: usize, value: u64) -> BitBlock {
    let bits: Vec<u8> = (0..n).map(|i| ((value >> i) & 1) as u8).collect();
    BitBlock::from_bits(&bits).unwrap()
}

fn toy_codebook() -> Vec<BitBlock> {
    let code = CrcCode::toy();
    (0..16).map(|m| code.encode(&word(4, m)).unwrap()).collect()
}

#[test]
fn toy_grand_equals_ml_on_every_word() {
    let code = CrcCode::toy();
    let book = toy_codebook();
    let schedule = PatternSchedule::new(8).with_max_weight(8);
    for r in 0..256u64 {
        let rx = word(8, r);
        let ml = book
            .iter()
            .min_by_key(|c| {
                let e = rx.xor(c).unwrap();
                let v: u64 = (0..8).filter(|&i| e.get(i)).map(|i| 1u64 << i).sum();
                (v.count_ones(), v)
            })
            .unwrap();
        let got = decode(&code, &rx, &schedule).unwrap();
        assert_eq!(got.codeword(), Some(ml), "received {rx}");
        // Distance is what ML minimizes; the tie order only picks among equals.
        let d = rx.distance(ml).unwrap();
        assert!(book.iter().all(|c| rx.distance(c).unwrap() >= d));
    }
}

#[test]
fn toy_orbgrand_equals_logistic_minimum() {
    let code = CrcCode::toy();
    let book = toy_codebook();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let llrs: Vec<f64> = (0..8)
            .map(|_| if rng.random_bool(0.25) { f64::from(rng.random_range(-2i8..=2)) } else { rng.random_range(-5.0..5.0) })
            .collect();
        let llrs = LlrVector::new(llrs);
        let hard = llrs.hard_decision();
        // rank 1 = smallest |LLR|, ties by index
        let mut idx: Vec<usize> = (0..8).collect();
        idx.sort_by(|&a, &b| {
            let (x, y) = (llrs.as_slice()[a].abs(), llrs.as_slice()[b].abs());
            x.partial_cmp(&y).unwrap().then(a.cmp(&b))
        });
        let rank_of = |bit: usize| idx.iter().position(|&b| b == bit).unwrap() + 1;
        let best = book
            .iter()
            .min_by_key(|c| {
                let e = hard.xor(c).unwrap();
                let mut parts: Vec<usize> = (0..8).filter(|&i| e.get(i)).map(rank_of).collect();
                parts.sort();
                (parts.iter().sum::<usize>(), parts.len(), parts)
            })
            .unwrap();
        let got = decode_soft(&code, &hard, &llrs, &SoftBudget::default()).unwrap();
        assert_eq!(got.codeword(), Some(best));
    }
}

/// Weight <= 2 patterns for n = 128 in schedule order: weight, then the
/// integer with bit i worth 2^i.
fn low_weight_order() -> Vec<Vec<usize>> {
    let mut v: Vec<(u32, u128, Vec<usize>)> = vec![(0, 0, vec![])];
    for i in 0..128 {
        v.push((1, 1u128 << i, vec![i]));
        for j in i + 1..128 {
            v.push((2, (1u128 << i) | (1u128 << j), vec![i, j]));
        }
    }
    v.sort_by_key(|(w, val, _)| (*w, *val));
    v.into_iter().map(|(_, _, p)| p).collect()
}

#[test]
fn crc12_grand_matches_explicit_order() {
    let code = CrcCode::crc12();
    let order = low_weight_order();
    let schedule = PatternSchedule::new(128).with_max_weight(2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let mut rx = code.encode(&BitBlock::random(116, &mut rng)).unwrap();
        for _ in 0..rng.random_range(0..=2) {
            rx.flip(rng.random_range(0..128));
        }
        let hit = order.iter().position(|p| {
            let mut cand = rx.clone();
            p.iter().for_each(|&i| cand.flip(i));
            code.check(&cand).unwrap()
        });
        let got = decode(&code, &rx, &schedule).unwrap();
        match hit {
            Some(q) => {
                assert_eq!(got.queries_used, q as u64 + 1);
                assert_eq!(got.noise_estimate().unwrap().positions(), order[q]);
            }
            None => assert!(got.is_abandoned()),
        }
    }
}

fn permute(block: &BitBlock, perm: &[usize]) -> BitBlock {
    let mut out = BitBlock::zeros(block.len());
    for (i, &p) in perm.iter().enumerate() {
        out.set(p, block.get(i));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orbgrand_commutes_with_bit_permutations(seed in any::<u64>()) {
        let code = CrcCode::crc12();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cw = code.encode(&BitBlock::random(116, &mut rng)).unwrap();
        // Distinct magnitudes, so the ranking does not depend on indices.
        let llrs: Vec<f64> = cw
            .iter()
            .map(|b| {
                let mag = rng.random_range(0.05..6.0);
                let l = if b { -mag } else { mag };
                if rng.random_bool(0.04) { -l } else { l }
            })
            .collect();
        let mut perm: Vec<usize> = (0..128).collect();
        perm.shuffle(&mut rng);
        let mut permuted_llrs = vec![0.0; 128];
        for (i, &p) in perm.iter().enumerate() {
            permuted_llrs[p] = llrs[i];
        }
        let llrs = LlrVector::new(llrs);
        let permuted_llrs = LlrVector::new(permuted_llrs);
        let budget = SoftBudget { max_queries: 100_000, max_logistic_weight: None };

        let plain = decode_soft(&code, &llrs.hard_decision(), &llrs, &budget).unwrap();
        let pcode = ColumnCode::permuted(&code, &perm);
        let moved = decode_soft(&pcode, &permuted_llrs.hard_decision(), &permuted_llrs, &budget).unwrap();
        prop_assert_eq!(plain.queries_used, moved.queries_used);
        prop_assert_eq!(plain.codeword().map(|c| permute(c, &perm)), moved.codeword().cloned());
        if let Some(c) = moved.codeword() {
            prop_assert_eq!(pcode.syndrome_value(c), 0);
        }
    }

    #[test]
    fn ranking_sorts_reliabilities(llrs in proptest::collection::vec(-10.0f64..10.0, 1..200)) {
        let r = rank_bits(&LlrVector::new(llrs.clone())).unwrap();
        let mags: Vec<f64> = r.order().iter().map(|&i| llrs[i].abs()).collect();
        prop_assert!(mags.windows(2).all(|w| w[0] <= w[1]));
        let mut seen = r.order().to_vec();
        seen.sort();
        prop_assert_eq!(seen, (0..llrs.len()).collect::<Vec<_>>());
    }
}
