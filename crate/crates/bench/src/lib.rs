//! Shared fixtures for the benchmarks.

use grand_relay::channel::{demodulate_llr, modulate_bpsk, noise_variance_from, transmit};
use grand_relay::{BitBlock, ChannelKind, CrcCode, FadingMode, LlrVector, SnrSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A codeword with exactly `flips` errors at fixed positions.
pub fn corrupted_codeword(code: &CrcCode, flips: &[usize]) -> BitBlock {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut word = code.encode(&BitBlock::random(code.k(), &mut rng)).expect("k bits");
    for &i in flips {
        word.flip(i);
    }
    word
}

/// Received hard bits and LLRs for `count` codewords sent over one hop.
pub fn noisy_blocks(
    code: &CrcCode,
    channel: ChannelKind,
    eb_n0_db: f64,
    count: usize,
) -> Vec<(BitBlock, LlrVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n0 = noise_variance_from(&SnrSpec::bpsk(eb_n0_db, code.rate()));
    (0..count)
        .map(|_| {
            let cw = code.encode(&BitBlock::random(code.k(), &mut rng)).expect("k bits");
            let (y, real) = transmit(&modulate_bpsk(&cw), channel, FadingMode::PerSymbol, n0, &mut rng);
            demodulate_llr(&y, &real)
        })
        .collect()
}
