//! Simulation of GRAND- and ORBGRAND-decoded multihop decode-and-forward
//! links over AWGN and Rayleigh fading channels.
//!
//! The pipeline is: [`crc`] defines the codebook, [`grand`] and [`orbgrand`]
//! decode, [`channel`] carries BPSK symbols, [`multihop`] chains hops,
//! [`montecarlo`] sweeps BER over a grid and [`analysis`] finds where
//! decoding-at-every-relay curves cross the uncoded baselines.

pub mod analysis;
pub mod bitblock;
pub mod channel;
pub mod config;
pub mod crc;
pub mod error;
pub mod grand;
pub mod montecarlo;
pub mod multihop;
pub mod orbgrand;
pub mod selftest;

pub use bitblock::{BitBlock, ErrorPattern};
pub use channel::{ChannelKind, FadingMode, SnrSpec};
pub use crc::{CrcCode, SyndromeCode};
pub use error::{Error, Result};
pub use grand::{DecodeOutcome, DecodeResult, PatternSchedule};
pub use montecarlo::{BerRecord, StoppingRule, SweepGrid};
pub use multihop::{DecoderBudget, DecoderKind, HopChainConfig, Scenario};
pub use orbgrand::LlrVector;
