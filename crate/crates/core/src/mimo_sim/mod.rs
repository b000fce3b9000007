//! Monte-Carlo uplink simulator: line-of-sight channels, quantized antenna
//! arrays, linear receivers, empirical noise figure and QAM64-OFDM bit error
//! rate.

mod ber;
mod channel;
mod nf;
mod ofdm;
mod receiver;

pub use ber::{ber_minimum, ber_sim, wilson_interval, BerPoint, BerSetup, ChannelScenario};
pub use channel::{los_channel, ArrayConfig, Channel};
pub use nf::{
    empirical_nf, nld_coherence_probe, CoherenceProfile, SimReport, UserReport, MIN_TRIALS,
};
pub use ofdm::{qam64_demap, qam64_map, OfdmConfig, OfdmModem, BITS_PER_SYMBOL};
pub use receiver::{mmse_estimate, mrc_estimate, simulate_snapshot, zf_estimate, Snapshot};
