//! Channel statistics against closed forms.

use grand_relay::channel::{demodulate_llr, modulate_bpsk, noise_variance_from, transmit};
use grand_relay::montecarlo::{run_cell, StoppingRule, SweepConfig};
use grand_relay::{BitBlock, ChannelKind, DecoderKind, FadingMode, Scenario, SnrSpec, SweepGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

const RATE: f64 = 116.0 / 128.0;

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn gamma(eb_n0_db: f64) -> f64 {
    10f64.powf(eb_n0_db / 10.0) * RATE
}

fn uncoded_awgn(eb_n0_db: f64) -> f64 {
    q((2.0 * gamma(eb_n0_db)).sqrt())
}

fn uncoded_rayleigh(eb_n0_db: f64) -> f64 {
    let g = gamma(eb_n0_db);
    0.5 * (1.0 - (g / (1.0 + g)).sqrt())
}

fn single_hop_ber(channel: ChannelKind, eb_n0_db: f64, trials: u64) -> (f64, u64) {
    let mut cfg = SweepConfig::new(SweepGrid {
        eb_n0_points: vec![eb_n0_db],
        relay_counts: vec![0],
        scenarios: vec![Scenario::NoGrand],
        decoders: vec![],
        channels: vec![channel],
        fading: FadingMode::PerSymbol,
        master_seed: 99,
    });
    cfg.stopping = StoppingRule::FixedTrials { trials };
    let cell = cfg.grid.cells()[0];
    assert_eq!(cell.decoder, DecoderKind::None);
    let rec = run_cell(&cfg, &cell).unwrap();
    (rec.ber(), rec.trials * 116)
}

#[test]
fn uncoded_ber_matches_closed_forms() {
    for db in [0.0, 4.0, 8.0] {
        for (channel, p) in [
            (ChannelKind::Awgn, uncoded_awgn(db)),
            (ChannelKind::Rayleigh, uncoded_rayleigh(db)),
        ] {
            let (ber, bits) = single_hop_ber(channel, db, 8192);
            let sigma = (p * (1.0 - p) / bits as f64).sqrt();
            assert!((ber - p).abs() <= 3.0 * sigma, "{channel} {db} dB: {ber:.4e} vs {p:.4e} (sigma {sigma:.1e})");
        }
    }
}

#[test]
fn closed_form_spot_values() {
    // Q(sqrt(2 * 10^0.4 * 116/128)) and the Rayleigh form at the same SNR.
    assert!((uncoded_awgn(4.0) - 1.643_253_6e-2).abs() < 1e-9);
    assert!((uncoded_rayleigh(0.0) - 0.5 * (1.0 - (RATE / (1.0 + RATE)).sqrt())).abs() < 1e-15);
    assert!((q(0.0) - 0.5).abs() < 1e-15);
}

#[test]
fn symbol_energy_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut total = 0.0;
    let blocks = 1_000_000 / 128 + 1;
    for _ in 0..blocks {
        let x = modulate_bpsk(&BitBlock::random(128, &mut rng));
        total += x.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>();
    }
    // BPSK symbols have |x|^2 = 1 exactly, so the 3-sigma band is zero width.
    assert_eq!(total / (blocks * 128) as f64, 1.0);
}

#[test]
fn rayleigh_gains_are_unit_power_and_uncorrelated() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = modulate_bpsk(&BitBlock::zeros(1000));
    let mut h = Vec::with_capacity(1_000_000);
    for _ in 0..1000 {
        let (_, real) = transmit(&x, ChannelKind::Rayleigh, FadingMode::PerSymbol, 1.0, &mut rng);
        h.extend(real.gains);
    }
    let n = h.len() as f64;
    // |h|^2 is Exp(1): mean 1, variance 1.
    let power = h.iter().map(|g| g.norm_sqr()).sum::<f64>() / n;
    assert!((power - 1.0).abs() < 3.0 / n.sqrt(), "E|h|^2 = {power}");
    // Lag-1 correlation of the real parts.
    let re: Vec<f64> = h.iter().map(|g| g.re).collect();
    let var = re.iter().map(|v| v * v).sum::<f64>() / n;
    let lag1 = re.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0);
    assert!((lag1 / var).abs() < 3.0 / n.sqrt(), "lag-1 correlation {}", lag1 / var);
}

#[test]
fn awgn_noise_and_llr_statistics() {
    let n0 = noise_variance_from(&SnrSpec::bpsk(2.0, RATE));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = modulate_bpsk(&BitBlock::zeros(1000));
    let (mut sum, mut sq, mut lsum, mut lsq) = (0.0, 0.0, 0.0, 0.0);
    let reps = 500;
    for _ in 0..reps {
        let (y, real) = transmit(&x, ChannelKind::Awgn, FadingMode::PerSymbol, n0, &mut rng);
        let (_, llrs) = demodulate_llr(&y, &real);
        for (s, l) in y.symbols.iter().zip(llrs.as_slice()) {
            let noise = s.re - 1.0;
            assert_eq!(s.im, 0.0);
            sum += noise;
            sq += noise * noise;
            lsum += l;
            lsq += l * l;
        }
    }
    let m = (reps * 1000) as f64;
    let var = sq / m - (sum / m).powi(2);
    let want = n0 / 2.0;
    // Var of the sample variance of a Gaussian: 2 sigma^4 / m.
    assert!((var - want).abs() < 3.0 * (2.0 * want * want / m).sqrt());
    // Consistent Gaussian LLRs: mean 4/N0, variance twice the mean.
    let lmean = lsum / m;
    let lvar = lsq / m - lmean * lmean;
    assert!((lmean - 4.0 / n0).abs() < 3.0 * (8.0 / n0 / m).sqrt());
    assert!((lvar / lmean - 2.0).abs() < 0.02);
}
