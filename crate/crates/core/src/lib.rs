//! Exact dynamics of a qubit driven by `H(t) = f(t)·H0`, minimum-time
//! synthesis of the swap-with-phase gate, and the time–energy bounds that
//! limit how fast such gates can run.
//!
//! All quantities use natural units with ħ = 1, so `h = 2π` and the
//! orthogonalization bound reads `τ = π / (2E)`. SI conversions live in
//! [`speedlimit::si`].
//!
//! The state of the qubit is carried as a coefficient pair `(a1, a2)` over
//! the fixed basis `ψ1(0) = (0, 1)ᵀ`, `ψ2(0) = (1, 0)ᵀ`. Every propagator in
//! this crate acts on that coefficient pair, never on raw column vectors.

pub mod error;
pub mod linalg;
pub mod model;
pub mod propagator;
pub mod quad;
pub mod search;
pub mod speedlimit;
pub mod synthesis;

pub use error::{Error, Result};
pub use linalg::Mat2;
pub use model::{HamiltonianParams, HamiltonianSpec, PulseProfile, QubitState};
pub use propagator::{EvolutionRecord, Unitary2};
pub use search::{BoundReport, SearchConfig, SearchTarget};
pub use synthesis::{Branch, GateSpec, SynthesizedGate, VerificationReport};
