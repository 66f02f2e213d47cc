//! Massive-MIMO uplink detection with selective-ρ sequential likelihood
//! ascent search (SLAS), flop-instrumented linear detectors and a seeded
//! Monte-Carlo BER engine.
//!
//! ```
//! use mimo_slas::channel::{assemble, sample_bpsk, sample_channel, SnrConfig};
//! use mimo_slas::detectors::{mf, slice_bpsk};
//! use mimo_slas::linalg::FlopCounter;
//! use mimo_slas::slas::{run, SlasConfig, SlasWorkspace};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let snr = SnrConfig::new(20.0);
//! let h = sample_channel(8, 8, &mut rng);
//! let b = sample_bpsk(8, snr.es, &mut rng);
//! let inst = assemble(h, b, &snr, &mut rng).unwrap();
//!
//! let mut flops = FlopCounter::new();
//! let b0 = slice_bpsk(&mf(&inst.h, &inst.y, &mut flops).unwrap());
//! let ws = SlasWorkspace::precompute(&inst.h, &inst.y, &mut flops).unwrap();
//! let out = run(&ws, &b0, &SlasConfig::new(0.9, 32), Some(&inst.bits()), &mut flops);
//! assert_eq!(out.trace.records.len(), 32);
//! ```

pub mod channel;
pub mod complexity;
pub mod detectors;
pub mod linalg;
pub mod montecarlo;
pub mod oracle;
pub mod selfcheck;
pub mod slas;
