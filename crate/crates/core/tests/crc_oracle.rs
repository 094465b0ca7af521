//! CRC-12 checked against polynomial long division written from scratch
//! here, plus frozen golden parities.

use grand_relay::crc::{explicit_to_koopman, koopman_to_explicit, SyndromeCode};
use grand_relay::{BitBlock, CrcCode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// x^12 + x^8 + x^7 + x^6 + x^5 + x^2 + x + 1, from its exponent list.
fn generator() -> Vec<bool> {
    let mut g = vec![false; 13];
    for e in [12, 8, 7, 6, 5, 2, 1, 0] {
        g[12 - e] = true; // MSB first
    }
    g
}

/// Remainder of `m(x) x^12` divided by `g(x)`, bits MSB first.
fn long_division(message: &[bool]) -> Vec<bool> {
    let g = generator();
    let mut work: Vec<bool> = message.iter().copied().chain(std::iter::repeat_n(false, 12)).collect();
    for i in 0..message.len() {
        if work[i] {
            for (j, &gj) in g.iter().enumerate() {
                work[i + j] ^= gj;
            }
        }
    }
    work[message.len()..].to_vec()
}

fn bits_of(block: &BitBlock) -> Vec<bool> {
    block.iter().collect()
}

#[test]
fn koopman_notation() {
    let explicit: u64 = generator().iter().fold(0, |acc, &b| (acc << 1) | u64::from(b));
    assert_eq!(explicit, 0x11E7);
    assert_eq!(koopman_to_explicit(0x8F3), explicit);
    assert_eq!(explicit_to_koopman(explicit), 0x8F3);
    let code = CrcCode::crc12();
    assert_eq!((code.k(), code.n(), code.width()), (116, 128, 12));
    assert_eq!(code.koopman_id(), 0x8F3);
}

#[test]
fn golden_parities() {
    let code = CrcCode::crc12();
    for (hex, parity) in [
        ("FFFFFFFFFFFFFFFFFFFFFFFFFFFFF0", "011000001111"),
        ("0123456789ABCDEF0123456789ABC0", "100000001110"),
        ("800000000000000000000000000010", "010000011100"),
    ] {
        let msg = BitBlock::from_hex(hex, 116).unwrap();
        let cw = code.encode(&msg).unwrap();
        assert_eq!(cw.slice(0, 116), msg, "systematic layout");
        assert_eq!(cw.slice(116, 12).to_string(), parity, "{hex}");
        let oracle: String = long_division(&bits_of(&msg)).iter().map(|&b| if b { '1' } else { '0' }).collect();
        assert_eq!(oracle, parity);
    }
}

#[test]
fn random_messages_match_long_division() {
    let code = CrcCode::crc12();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..500 {
        let msg = BitBlock::random(116, &mut rng);
        let cw = code.encode(&msg).unwrap();
        assert_eq!(bits_of(&cw.slice(116, 12)), long_division(&bits_of(&msg)));
        assert!(code.check(&cw).unwrap());
        // Dividing the whole codeword leaves nothing.
        let whole = bits_of(&cw);
        let mut work = whole.clone();
        let g = generator();
        for i in 0..116 {
            if work[i] {
                for (j, &gj) in g.iter().enumerate() {
                    work[i + j] ^= gj;
                }
            }
        }
        assert!(work[116..].iter().all(|&b| !b));
    }
}

#[test]
fn syndrome_is_remainder_of_received_word() {
    let code = CrcCode::crc12();
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..200 {
        let rx = BitBlock::random(128, &mut rng);
        // r(x) mod g(x) == remainder of (first 116 bits) x^12 XOR last 12 bits
        let msg: Vec<bool> = rx.iter().take(116).collect();
        let tail: Vec<bool> = rx.iter().skip(116).collect();
        let want: Vec<bool> = long_division(&msg).iter().zip(&tail).map(|(a, b)| a ^ b).collect();
        assert_eq!(bits_of(&code.syndrome(&rx).unwrap()), want);
        assert_eq!(code.syndrome_value(&rx) == 0, want.iter().all(|&b| !b));
    }
}

#[test]
fn all_errors_up_to_weight_three_are_detected() {
    let code = CrcCode::crc12();
    let cols = code.columns();
    for i in 0..128 {
        assert_ne!(cols[i], 0);
        for j in i + 1..128 {
            assert_ne!(cols[i] ^ cols[j], 0, "double error {i},{j}");
            for k in j + 1..128 {
                assert_ne!(cols[i] ^ cols[j] ^ cols[k], 0, "triple error {i},{j},{k}");
            }
        }
    }
}

#[test]
fn some_weight_four_errors_are_undetected() {
    // The (x+1) factor forces even-weight codewords, and d_min is 4.
    let code = CrcCode::crc12();
    let cols = code.columns();
    let found = (0..128).any(|i| {
        (i + 1..128).any(|j| (j + 1..128).any(|k| cols.contains(&(cols[i] ^ cols[j] ^ cols[k]))))
    });
    assert!(found);
}
