//! Analysis and simulation of quantum key distribution over asymmetric Pauli
//! channels.
//!
//! The crate is `no_std` (with `alloc`). It covers:
//!
//! - [`channel`]: Pauli channels, basis conjugation and basis mixtures.
//! - [`keyrates`]: closed-form one-way key rates.
//! - [`distill`]: the two-way B-step / P-step maps and schedule search.
//! - [`threshold`]: bisection for the tolerable total channel noise.
//! - [`sim`]: seeded Monte Carlo execution of the prepare-and-measure protocol
//!   with an optional intercept-resend eavesdropper.
//!
//! Enable the `parallel` feature to sample transmissions and sweep rows with
//! rayon. Results are bit-identical to the serial path.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod channel;
pub mod distill;
mod error;
pub mod keyrates;
mod logbias;
mod math;
pub mod sim;
pub mod threshold;

pub use channel::{Basis, BasisMixture, FlipRates, PauliRates};
pub use distill::{BStepOutcome, DistillationTrace, PStepParams, StoppingRule};
pub use error::Error;
pub use keyrates::KeyRate;
pub use threshold::{ChannelFamily, ProtocolVariant, SearchParams, ThresholdResult};

pub type Result<T, E = Error> = core::result::Result<T, E>;
