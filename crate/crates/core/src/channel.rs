//! BPSK over AWGN and Rayleigh fading channels.
//!
//! Conventions: bit 0 maps to `+1`, bit 1 to `-1`; symbols have unit energy.
//! The noise variance `N0` is per complex dimension, so the real AWGN path
//! draws `N(0, N0/2)` samples. LLRs are `4 Re(conj(h) y) / N0`, positive
//! favouring bit 0.
//!
//! The number of random draws per block depends only on the block length,
//! channel kind and fading mode, never on the transmitted symbols.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bitblock::BitBlock;
use crate::error::Error;
use crate::orbgrand::LlrVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FadingMode {
    /// Independent gain per symbol.
    #[default]
    PerSymbol,
    /// One gain per codeword.
    Block,
}

macro_rules! string_enum {
    ($ty:ty { $($variant:path => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Error> {
                let upper = s.trim().to_ascii_uppercase().replace('-', "_");
                match upper.as_str() {
                    $($name => Ok($variant),)+
                    _ => Err(Error::Usage(format!(
                        "unknown {} {s:?}; expected one of {:?}",
                        stringify!($ty),
                        [$($name),+]
                    ))),
                }
            }
        }
    };
}
pub(crate) use string_enum;

string_enum!(ChannelKind {
    ChannelKind::Awgn => "AWGN",
    ChannelKind::Rayleigh => "RAYLEIGH",
});

string_enum!(FadingMode {
    FadingMode::PerSymbol => "PER_SYMBOL",
    FadingMode::Block => "BLOCK",
});

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrSpec {
    pub eb_n0_db: f64,
    pub code_rate: f64,
    /// Bits per symbol (1 for BPSK).
    pub modulation_order: u32,
}

impl SnrSpec {
    pub fn bpsk(eb_n0_db: f64, code_rate: f64) -> Self {
        Self {
            eb_n0_db,
            code_rate,
            modulation_order: 1,
        }
    }

    /// Linear signalling SNR `Es/N0 = (Eb/N0) (k/n) M0`.
    pub fn signalling_snr(&self) -> f64 {
        10f64.powf(self.eb_n0_db / 10.0) * self.code_rate * self.modulation_order as f64
    }
}

/// `N0` for unit-energy symbols at the given Eb/N0.
pub fn noise_variance_from(spec: &SnrSpec) -> f64 {
    1.0 / spec.signalling_snr()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolBlock {
    pub symbols: Vec<Complex64>,
}

impl SymbolBlock {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<Complex64>,
    pub noise_variance: f64,
}

impl ChannelRealization {
    pub fn unit(len: usize, noise_variance: f64) -> Self {
        Self {
            gains: vec![Complex64::new(1.0, 0.0); len],
            noise_variance,
        }
    }
}

pub fn modulate_bpsk(bits: &BitBlock) -> SymbolBlock {
    SymbolBlock {
        symbols: bits
            .iter()
            .map(|b| Complex64::new(if b { -1.0 } else { 1.0 }, 0.0))
            .collect(),
    }
}

fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// `y = h x + n`. AWGN uses unit gains and real noise of variance `N0/2`;
/// Rayleigh draws `h ~ CN(0, 1)` and `n ~ CN(0, N0)`.
pub fn transmit<R: Rng + ?Sized>(
    x: &SymbolBlock,
    kind: ChannelKind,
    fading: FadingMode,
    noise_variance: f64,
    rng: &mut R,
) -> (SymbolBlock, ChannelRealization) {
    assert!(noise_variance > 0.0, "noise variance must be positive");
    match kind {
        ChannelKind::Awgn => {
            let sigma = (noise_variance / 2.0).sqrt();
            let symbols = x
                .symbols
                .iter()
                .map(|&s| {
                    let n: f64 = rng.sample(StandardNormal);
                    s + Complex64::new(n * sigma, 0.0)
                })
                .collect();
            (
                SymbolBlock { symbols },
                ChannelRealization::unit(x.len(), noise_variance),
            )
        }
        ChannelKind::Rayleigh => {
            let block_gain = match fading {
                FadingMode::Block => Some(circular_gaussian(rng, 1.0)),
                FadingMode::PerSymbol => None,
            };
            let mut gains = Vec::with_capacity(x.len());
            let mut symbols = Vec::with_capacity(x.len());
            for &s in &x.symbols {
                let h = block_gain.unwrap_or_else(|| circular_gaussian(rng, 1.0));
                let n = circular_gaussian(rng, noise_variance);
                gains.push(h);
                symbols.push(h * s + n);
            }
            (
                SymbolBlock { symbols },
                ChannelRealization {
                    gains,
                    noise_variance,
                },
            )
        }
    }
}

/// Coherent BPSK demodulation with perfect CSI.
pub fn demodulate_llr(y: &SymbolBlock, realization: &ChannelRealization) -> (BitBlock, LlrVector) {
    assert_eq!(y.len(), realization.gains.len(), "realization length mismatch");
    let scale = 4.0 / realization.noise_variance;
    let llrs: Vec<f64> = y
        .symbols
        .iter()
        .zip(&realization.gains)
        .map(|(&yi, &h)| scale * (h.conj() * yi).re)
        .collect();
    let llrs = LlrVector::new(llrs);
    (llrs.hard_decision(), llrs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bpsk_mapping() {
        let x = modulate_bpsk(&BitBlock::from_bit_str("0011").unwrap());
        let re: Vec<f64> = x.symbols.iter().map(|s| s.re).collect();
        assert_eq!(re, vec![1.0, 1.0, -1.0, -1.0]);
        assert!(x.symbols.iter().all(|s| s.im == 0.0));
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bits = BitBlock::random(128, &mut rng);
        let x = modulate_bpsk(&bits);
        let (hard, llrs) = demodulate_llr(&x, &ChannelRealization::unit(128, 1.0));
        assert_eq!(hard, bits);
        assert!(llrs.as_slice().iter().all(|l| l.is_finite() && l.abs() == 4.0));
    }

    #[test]
    fn noise_variance_examples() {
        assert_eq!(noise_variance_from(&SnrSpec::bpsk(0.0, 1.0)), 1.0);
        let n0 = noise_variance_from(&SnrSpec::bpsk(10.0, 116.0 / 128.0));
        assert!((n0 - 1.0 / (10.0 * 0.90625)).abs() < 1e-12);
        assert!((n0 - 0.110345).abs() < 1e-6);
        let half = noise_variance_from(&SnrSpec::bpsk(3.0, 0.8));
        let full = noise_variance_from(&SnrSpec::bpsk(3.0, 0.4));
        assert!((full - 2.0 * half).abs() < 1e-12);
    }

    #[test]
    fn llr_examples() {
        let y = SymbolBlock {
            symbols: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        };
        let (hard, llrs) = demodulate_llr(&y, &ChannelRealization::unit(2, 1.0));
        assert_eq!(llrs.as_slice(), &[4.0, 0.0]);
        assert_eq!(hard.to_bits(), vec![0, 0]);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = modulate_bpsk(&BitBlock::random(64, &mut rng));
        let (y, real) = transmit(&x, ChannelKind::Rayleigh, FadingMode::PerSymbol, 0.7, &mut rng);
        let (h1, l1) = demodulate_llr(&y, &real);
        let doubled = ChannelRealization {
            noise_variance: 1.4,
            ..real
        };
        let (h2, l2) = demodulate_llr(&y, &doubled);
        assert_eq!(h1, h2);
        for (a, b) in l1.as_slice().iter().zip(l2.as_slice()) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_noise_keeps_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in [ChannelKind::Awgn, ChannelKind::Rayleigh] {
            let bits = BitBlock::random(128, &mut rng);
            let (y, real) = transmit(&modulate_bpsk(&bits), kind, FadingMode::PerSymbol, 1e-12, &mut rng);
            assert_eq!(demodulate_llr(&y, &real).0, bits);
        }
    }

    #[test]
    fn draw_count_ignores_payload() {
        let zeros = modulate_bpsk(&BitBlock::zeros(32));
        let ones = modulate_bpsk(&BitBlock::from_bits(&[1; 32]).unwrap());
        for kind in [ChannelKind::Awgn, ChannelKind::Rayleigh] {
            for fading in [FadingMode::PerSymbol, FadingMode::Block] {
                let mut a = ChaCha8Rng::seed_from_u64(1);
                let mut b = ChaCha8Rng::seed_from_u64(1);
                let (_, ra) = transmit(&zeros, kind, fading, 0.5, &mut a);
                let (_, rb) = transmit(&ones, kind, fading, 0.5, &mut b);
                assert_eq!(ra, rb);
                assert_eq!(a.random::<u64>(), b.random::<u64>());
            }
        }
    }

    #[test]
    fn block_fading_uses_one_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = modulate_bpsk(&BitBlock::zeros(16));
        let (_, real) = transmit(&x, ChannelKind::Rayleigh, FadingMode::Block, 0.1, &mut rng);
        assert!(real.gains.iter().all(|&g| g == real.gains[0]));
    }

    #[test]
    fn enum_strings() {
        assert_eq!("rayleigh".parse::<ChannelKind>().unwrap(), ChannelKind::Rayleigh);
        assert_eq!("per-symbol".parse::<FadingMode>().unwrap(), FadingMode::PerSymbol);
        assert!("fast".parse::<FadingMode>().is_err());
        assert_eq!(ChannelKind::Awgn.to_string(), "AWGN");
    }
}
