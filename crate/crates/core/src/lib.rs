//! Simulator for a classical wave-superposition oracle machine.
//!
//! Logic states are encoded into the phases of equal-frequency sinusoids,
//! an interferometer sums them with fixed per-input phase shifts, and a
//! power detector compares the output against a reference. On top of that
//! model the crate provides:
//!
//! * [`phasor`]: exact single-frequency phasor arithmetic and the detector,
//! * [`oracle`]: oracle construction, queries and query accounting,
//! * [`search`]: bit-by-bit and segment-subdivision superposition searches,
//!   the exhaustive baseline and the worst-case margin analysis,
//! * [`periodfind`]: period finding from the phase of a running wave
//!   superposition, plus the gcd factorization step,
//! * [`dataset`]: search over tabulated (measured) oracle outputs,
//! * [`presets`]: the published oracle instances and the bundled fixture.

pub mod angle;
pub mod arith;
pub mod dataset;
pub mod oracle;
pub mod periodfind;
pub mod phasor;
pub mod presets;
pub mod search;

pub use oracle::{Measurement, OracleError, OracleKind, OracleSpec, PhaseAlphabet};
pub use phasor::{Bit, Phasor, PhasorError, Power, Tolerance};
pub use search::{SearchError, SearchResult};
