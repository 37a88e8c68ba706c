//! Simulator and virtual-measurement toolkit for a modular multi-die
//! superconducting transmon device.
//!
//! The crate models four flip-chip-bonded eight-qubit dies whose inter-chip
//! qubit pairs are coupled capacitively across the carrier chip. It covers:
//!
//! - static transmon physics (flux-dependent spectra, charge matrix elements,
//!   junction-conductance energy predictions) and the device description,
//! - the bump-height coupling model and dispersive-shift inversion,
//! - time-domain pair dynamics under AC flux modulation (parametric iSWAP/CZ
//!   gates), with unitary and Lindblad propagators and fidelity metrics,
//! - virtual-measurement protocols (time Ramsey, dispersive-shift
//!   measurement, chevron gate calibration) against a simulated device,
//! - two-qubit Clifford randomized benchmarking and interleaved RB,
//! - simultaneous multi-pair Bell-witness experiments.

pub mod bell;
pub mod benchmarking;
pub mod calibration;
pub mod coupling;
pub mod device;
pub mod dynamics;
pub mod fit;
pub mod linalg;
pub mod rng;
