//! Exact simulation of frequency-bin-encoded photonic entanglement sources.
//!
//! Photon pairs from spontaneous four-wave mixing carry their quantum
//! information in which frequency bin each photon occupies. This crate
//! models such sources and the passive integrated circuits around them —
//! colour demultiplexers, frequency-selective add-drop swaps, directional
//! couplers — as exact sparse operator algebra on truncated Fock states,
//! then post-selects on coincidence patterns to recover the heralded
//! entangled state, its generation probability, and its fidelity against
//! GHZ/W/Bell targets.
//!
//! The building blocks, bottom to top:
//!
//! - [`fock`]: sparse basis kets over (path, colour, bin) modes and complex
//!   superpositions of them, with creation-operator algebra.
//! - [`sources`]: pair sources for the single- and dual-pump schemes,
//!   pair-amplitude computation from pump envelopes, truncated emission.
//! - [`elements`]: demux, add-drop swap, and directional coupler as exact
//!   state transformations.
//! - [`postselect`]: coincidence patterns, colour factorization into a
//!   frequency-bin register, fidelity metrics, GHZ/W targets.
//! - [`circuits`]: prebuilt GHZ and W devices, the end-to-end driver,
//!   closed-form cross-checks, rate estimates, parameter sweeps.
//! - [`circuit_file`]: the declarative text format describing devices, and
//!   [`report`]: text/JSON rendering of results. Both back the `freqbin`
//!   command-line tool.
//! - [`checks`]: the built-in verification suite behind `freqbin --check`.
//!
//! # Example
//!
//! ```
//! use freqbin::circuits::{build_ghz_device, run};
//! use num_complex::Complex64;
//!
//! let beta = Complex64::new(0.1, 0.0);
//! let circuit = build_ghz_device([beta; 4]).unwrap();
//! let result = run(&circuit).unwrap();
//! assert!((result.coincidence_fraction - 0.5).abs() < 1e-12);
//! assert!((result.fidelity.unwrap() - 1.0).abs() < 1e-12);
//! ```

pub mod checks;
pub mod circuit_file;
pub mod circuits;
pub mod elements;
pub mod error;
pub mod fock;
pub mod postselect;
pub mod report;
pub mod sources;

pub use circuits::{
    build_ghz_device, build_w_device, estimate_rates, run, sweep, Circuit, Element, RateEstimate,
    SimulationResult,
};
pub use elements::{CouplerParams, ModePredicate};
pub use error::{Error, Result};
pub use fock::{Colour, FockBasisState, ModeLabel, StateVector};
pub use postselect::{
    factor_colour, fidelity, ghz_target, postselect, w_target, BinRegisterState, DetectionPattern,
};
pub use sources::{
    compute_beta, dual_pump_source, emit_state, single_pump_source, tensor_product, PumpEnvelope,
    SourceSpec,
};
