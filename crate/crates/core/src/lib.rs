//! Linearized quantum-noise model of EPR twin beams passing through lossy
//! 50% beamsplitters.
//!
//! When vacuum enters the unused beamsplitter ports the intensity-difference
//! squeezing of an EPR pair degrades to `(1 + e^{-2r})/2`. Injecting a second,
//! independent EPR pair into those ports restores it to
//! `(e^{-2r} + e^{-2s})/2`, for every interference phase satisfying
//! `phi14 = -phi23`.
//!
//! Modules:
//!
//! - [`fluctuation`]: Hermitian fluctuation operators over vacuum input
//!   modes, Bogoliubov maps, and the variance functional.
//! - [`experiment`]: the two-beamsplitter network, closed forms, phase scans
//!   and a cavity-bandwidth noise spectrum.
//! - [`reservoir`]: signal/vacuum-reservoir coupling, supermode reduction and
//!   the iterated-bounce decay picture.
//! - [`montecarlo`]: a seeded, chunk-parallel sampling oracle for all of the
//!   above.

pub mod error;
pub mod experiment;
pub mod fluctuation;
pub mod montecarlo;
pub mod reservoir;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, InputKind, NoiseResult, PairSource, Phases, ScanResult};
pub use fluctuation::{FluctuationOperator, ModeId, SqueezeParam};
