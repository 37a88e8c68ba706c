//! Time-domain simulation of one inter-chip pair under AC flux modulation:
//! unitary and dissipative propagators, sideband analysis, chevron maps and
//! gate fidelity metrics.
//!
//! Internally all frequencies are angular (rad/ns) and times are ns; the
//! public surface speaks linear MHz and ns like the rest of the crate.

mod chevron;
mod fidelity;
mod flux_table;
mod hamiltonian;
mod integrator;
mod lindblad;
mod sideband;

#[cfg(test)]
mod tests;

pub use chevron::{chevron_scan, ChevronMap};
pub use fidelity::{
    average_gate_fidelity, average_gate_fidelity_z_opt, coherence_limited_fidelity,
    coherent_error, optimize_z_freedom, process_fidelity_on_computational, GateOutput,
};
pub use hamiltonian::PairContext;
pub use integrator::StepControl;
pub use lindblad::{evolve_lindblad, idle_process, ProcessMap};
pub use sideband::{
    effective_coupling_mhz, resonance_frequency, sideband_weights, SidebandWeights,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{topology::QubitNoise, DeviceError, TransmonKind, TransmonSpec};
use crate::linalg::CMat;

pub const TAU: f64 = std::f64::consts::TAU;

/// Linear MHz to angular rad/ns.
pub fn mhz_to_rad_ns(f_mhz: f64) -> f64 {
    f_mhz * 1e-3 * TAU
}

/// Angular rad/ns to linear MHz.
pub fn rad_ns_to_mhz(w: f64) -> f64 {
    w / TAU * 1e3
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid flux pulse: {0}")]
    InvalidPulse(String),
    #[error("step size underflow at t = {t_ns:.4} ns (dt = {dt_ns:.2e} ns)")]
    StepSizeUnderflow { t_ns: f64, dt_ns: f64 },
    #[error("unphysical noise: {0}")]
    UnphysicalNoise(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sideband range misses {missing:.2e} of the total weight (> 1e-6)")]
    SidebandConvergence { missing: f64 },
    #[error(transparent)]
    Device(#[from] DeviceError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Pulse envelope applied to the AC flux amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Envelope {
    Rectangular,
    /// Raised-cosine ramps of the given rise time at both ends.
    CosineRamped { rise_ns: f64 },
}

/// Parameterized AC flux drive on the tunable qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxPulse {
    /// Parking flux in units of Phi0.
    pub phi_dc: f64,
    /// Modulation amplitude in units of Phi0.
    pub phi_ac: f64,
    /// Modulation frequency in MHz.
    pub f_p_mhz: f64,
    /// Modulation phase in radians.
    pub phase_rad: f64,
    pub duration_ns: f64,
    pub envelope: Envelope,
}

impl FluxPulse {
    /// Default envelope: 8 ns raised-cosine ramps.
    pub const DEFAULT_RISE_NS: f64 = 8.0;

    pub fn modulated(phi_dc: f64, phi_ac: f64, f_p_mhz: f64, duration_ns: f64) -> Self {
        Self {
            phi_dc,
            phi_ac,
            f_p_mhz,
            phase_rad: 0.0,
            duration_ns,
            envelope: Envelope::CosineRamped { rise_ns: Self::DEFAULT_RISE_NS },
        }
    }

    /// A pulse that just parks the qubit (no modulation).
    pub fn idle(phi_dc: f64, duration_ns: f64) -> Self {
        Self {
            phi_dc,
            phi_ac: 0.0,
            f_p_mhz: 0.0,
            phase_rad: 0.0,
            duration_ns,
            envelope: Envelope::Rectangular,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_ns > 0.0) {
            return Err(DynamicsError::InvalidPulse(format!(
                "duration {} ns must be positive",
                self.duration_ns
            )));
        }
        if self.phi_ac < 0.0 {
            return Err(DynamicsError::InvalidPulse("phi_ac must be non-negative".into()));
        }
        if self.phi_dc.abs() + self.phi_ac > 0.5 + 1e-12 {
            return Err(DynamicsError::InvalidPulse(format!(
                "|phi_dc| + phi_ac = {} exceeds Phi0/2",
                self.phi_dc.abs() + self.phi_ac
            )));
        }
        if self.phi_ac > 0.0 && self.f_p_mhz <= 0.0 {
            return Err(DynamicsError::InvalidPulse("modulated pulse needs f_p > 0".into()));
        }
        if let Envelope::CosineRamped { rise_ns } = self.envelope {
            if rise_ns < 0.0 || 2.0 * rise_ns > self.duration_ns {
                return Err(DynamicsError::InvalidPulse(format!(
                    "rise time {rise_ns} ns does not fit in {} ns",
                    self.duration_ns
                )));
            }
        }
        Ok(())
    }

    /// Envelope amplitude in [0, 1] at time t.
    pub fn amplitude(&self, t_ns: f64) -> f64 {
        if t_ns < 0.0 || t_ns > self.duration_ns {
            return 0.0;
        }
        match self.envelope {
            Envelope::Rectangular => 1.0,
            Envelope::CosineRamped { rise_ns } => {
                if rise_ns == 0.0 {
                    1.0
                } else if t_ns < rise_ns {
                    0.5 * (1.0 - (std::f64::consts::PI * t_ns / rise_ns).cos())
                } else if t_ns > self.duration_ns - rise_ns {
                    let s = self.duration_ns - t_ns;
                    0.5 * (1.0 - (std::f64::consts::PI * s / rise_ns).cos())
                } else {
                    1.0
                }
            }
        }
    }

    /// Instantaneous flux through the SQUID loop at time t, in Phi0.
    pub fn flux(&self, t_ns: f64) -> f64 {
        if self.phi_ac == 0.0 {
            return self.phi_dc;
        }
        let carrier = (mhz_to_rad_ns(self.f_p_mhz) * t_ns + self.phase_rad).cos();
        self.phi_dc + self.amplitude(t_ns) * self.phi_ac * carrier
    }

    /// Flux range swept by the pulse.
    pub fn flux_range(&self) -> (f64, f64) {
        (self.phi_dc - self.phi_ac, self.phi_dc + self.phi_ac)
    }
}

/// Simulation frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Bare lab-frame Hamiltonian; fast phases, mostly for cross-checks.
    Lab,
    /// Interaction frame of each qubit's reference frequency (the
    /// time-averaged modulated frequency for the tunable qubit).
    DoublyRotating,
}

/// Two coupled truncated transmons with a shared flux drive; the unit of
/// gate simulation. Basis ordering is |fixed, tunable> with index
/// `f * levels + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSystem {
    pub fixed: TransmonSpec,
    pub tunable: TransmonSpec,
    /// Bare coupling rate g/2pi in MHz.
    pub g_mhz: f64,
    /// Levels kept per transmon (>= 3; the CZ mechanism needs |2>).
    pub levels: usize,
    pub frame: Frame,
    /// Keep the counter-rotating coupling terms (b1 b2 + h.c.).
    pub include_counter_rotating: bool,
}

impl PairSystem {
    pub fn new(fixed: TransmonSpec, tunable: TransmonSpec, g_mhz: f64) -> Result<Self> {
        if fixed.kind != TransmonKind::Fixed || tunable.kind != TransmonKind::Tunable {
            return Err(DynamicsError::InvalidPulse(
                "pair must be built from one fixed and one tunable spec".into(),
            ));
        }
        Ok(Self {
            fixed,
            tunable,
            g_mhz,
            levels: 3,
            frame: Frame::DoublyRotating,
            include_counter_rotating: false,
        })
    }

    pub fn with_levels(mut self, levels: usize) -> Result<Self> {
        if levels < 3 {
            return Err(DynamicsError::DimensionMismatch { expected: 3, got: levels });
        }
        self.levels = levels;
        Ok(self)
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_counter_rotating(mut self, on: bool) -> Self {
        self.include_counter_rotating = on;
        self
    }

    pub fn dim(&self) -> usize {
        self.levels * self.levels
    }

    /// Flattened index of the two-transmon level |f, t>.
    pub fn index(&self, f_level: usize, t_level: usize) -> usize {
        f_level * self.levels + t_level
    }

    /// Indices of the computational states |00>, |01>, |10>, |11>.
    pub fn computational_indices(&self) -> [usize; 4] {
        [self.index(0, 0), self.index(0, 1), self.index(1, 0), self.index(1, 1)]
    }
}

/// Per-pair relaxation/dephasing description. The `*_mod` values are used
/// whenever the AC modulation is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub fixed: QubitNoise,
    pub tunable: QubitNoise,
}

impl NoiseSpec {
    pub fn new(fixed: QubitNoise, tunable: QubitNoise) -> Result<Self> {
        let spec = Self { fixed, tunable };
        spec.validate()?;
        Ok(spec)
    }

    /// Same (T1, T2) for both qubits, static and under modulation.
    pub fn uniform(t1_us: f64, t2_us: f64) -> Result<Self> {
        let q = QubitNoise { t1_us, t2_us, t1_mod_us: t1_us, t2_mod_us: t2_us };
        Self::new(q, q)
    }

    pub fn validate(&self) -> Result<()> {
        for (q, name) in [(self.fixed, "fixed"), (self.tunable, "tunable")] {
            for (t1, t2, what) in
                [(q.t1_us, q.t2_us, "static"), (q.t1_mod_us, q.t2_mod_us, "under-modulation")]
            {
                if t1 <= 0.0 || t2 <= 0.0 {
                    return Err(DynamicsError::UnphysicalNoise(format!(
                        "{name} qubit {what} T1/T2 must be positive"
                    )));
                }
                if t2 > 2.0 * t1 * (1.0 + 1e-12) {
                    return Err(DynamicsError::UnphysicalNoise(format!(
                        "{name} qubit {what} T2 = {t2} us exceeds 2 T1 = {} us",
                        2.0 * t1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A full-space propagator produced by [`evolve_unitary`].
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: CMat,
    pub levels: usize,
}

impl Propagator {
    /// Computational-subspace 4x4 block (non-unitary when leakage occurred).
    pub fn computational(&self) -> CMat {
        let idx = [0, 1, self.levels, self.levels + 1];
        CMat::from_fn(4, 4, |r, c| self.matrix[(idx[r], idx[c])])
    }

    /// Average leaked population over the four computational basis states.
    pub fn leakage(&self) -> f64 {
        let c = self.computational();
        1.0 - c.iter().map(|x| x.norm_sqr()).sum::<f64>() / 4.0
    }

    /// Conditional phase arg(U00 U11 / (U01 U10)) from the diagonal of the
    /// computational block; single-qubit Z contributions cancel.
    pub fn conditional_phase(&self) -> f64 {
        let c = self.computational();
        (c[(0, 0)] * c[(3, 3)] / (c[(1, 1)] * c[(2, 2)])).arg()
    }
}

/// Target entangling gate of a calibration or benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    ISwap,
    /// CZ via the |11> - |02> resonance (tunable qubit's second level).
    Cz02,
    /// CZ via the |11> - |20> resonance (fixed qubit's second level).
    Cz20,
}

impl GateKind {
    /// Ideal 4x4 unitary in the computational basis |00>, |01>, |10>, |11>.
    pub fn ideal_unitary(&self) -> CMat {
        use crate::linalg::{cplx, IM};
        let mut u = CMat::zeros(4, 4);
        match self {
            GateKind::ISwap => {
                u[(0, 0)] = cplx(1.0);
                u[(3, 3)] = cplx(1.0);
                u[(1, 2)] = IM;
                u[(2, 1)] = IM;
            }
            GateKind::Cz02 | GateKind::Cz20 => {
                u[(0, 0)] = cplx(1.0);
                u[(1, 1)] = cplx(1.0);
                u[(2, 2)] = cplx(1.0);
                u[(3, 3)] = cplx(-1.0);
            }
        }
        u
    }
}

/// Unitary evolution of the pair under the flux pulse, in `pair.frame`.
///
/// Time-ordered propagator from a fourth-order commutator-free integrator
/// with adaptive step halving; each factor is an exact Hermitian-eigenbasis
/// exponential, so the result is unitary to machine precision.
pub fn evolve_unitary(pair: &PairSystem, pulse: &FluxPulse) -> Result<Propagator> {
    evolve_unitary_with(pair, pulse, &StepControl::default())
}

pub fn evolve_unitary_with(
    pair: &PairSystem,
    pulse: &FluxPulse,
    ctrl: &StepControl,
) -> Result<Propagator> {
    pulse.validate()?;
    let ctx = PairContext::new(pair, pulse)?;
    let u = integrator::propagate(|t| ctx.hamiltonian(pulse, t), 0.0, pulse.duration_ns, ctrl)?;
    Ok(Propagator { matrix: u, levels: pair.levels })
}
