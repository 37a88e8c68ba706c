//! Dissipative evolution: Lindblad process maps for the coupled pair.
//!
//! Per qubit, amplitude damping acts through the bosonic lowering operator
//! (rate `1/T1` on the 0-1 transition, doubled on 1-2) and pure dephasing
//! through the level-number operator at rate `1/T_phi = 1/T2 - 1/(2 T1)`.
//!
//! The propagator is built by Strang splitting: half a dissipator
//! exponential, the unitary CF4 step as a conjugation superoperator, half a
//! dissipator exponential. Every factor is exactly completely positive and
//! trace preserving, so the composed map is CPTP to machine precision at
//! any step size; the splitting only limits accuracy, which the step choice
//! keeps at the 1e-6 level or better.

use num_complex::Complex64 as C64;

use crate::device::topology::QubitNoise;
use crate::linalg::{
    apply_superop, choi_negativity, conjugation_superop, cplx, kron, trace_preservation_defect,
    CMat,
};

use super::hamiltonian::PairContext;
use super::integrator::{self, StepControl};
use super::{DynamicsError, FluxPulse, NoiseSpec, PairSystem, Result};

/// A completely positive trace-preserving map on the pair space, stored as
/// a column-stacking superoperator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMap {
    pub superop: CMat,
    pub levels: usize,
}

impl ProcessMap {
    pub fn identity(levels: usize) -> Self {
        let d2 = (levels * levels) * (levels * levels);
        Self { superop: CMat::identity(d2, d2), levels }
    }

    pub fn from_unitary(u: &CMat, levels: usize) -> Self {
        Self { superop: conjugation_superop(u), levels }
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        apply_superop(&self.superop, rho)
    }

    /// `self` after `earlier`.
    pub fn compose_after(&self, earlier: &Self) -> Self {
        Self { superop: &self.superop * &earlier.superop, levels: self.levels }
    }

    /// Most negative Choi eigenvalue (>= -1e-9 for a physical map).
    pub fn choi_negativity(&self) -> f64 {
        choi_negativity(&self.superop)
    }

    /// Max-abs deviation from trace preservation.
    pub fn trace_defect(&self) -> f64 {
        trace_preservation_defect(&self.superop)
    }
}

/// Per-qubit decay rates in 1/ns.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rates {
    pub gamma1: f64,
    pub gamma_phi: f64,
}

impl Rates {
    pub fn from_noise(q: &QubitNoise, modulated: bool) -> Result<Self> {
        let (t1_us, t2_us) =
            if modulated { (q.t1_mod_us, q.t2_mod_us) } else { (q.t1_us, q.t2_us) };
        if t1_us <= 0.0 || t2_us <= 0.0 {
            return Err(DynamicsError::UnphysicalNoise("T1 and T2 must be positive".into()));
        }
        let gamma1 = 1e-3 / t1_us;
        let gamma_phi = 1e-3 / t2_us - 0.5 * gamma1;
        if gamma_phi < -1e-15 {
            return Err(DynamicsError::UnphysicalNoise(format!(
                "T2 = {t2_us} us exceeds 2 T1 = {} us",
                2.0 * t1_us
            )));
        }
        Ok(Self { gamma1, gamma_phi: gamma_phi.max(0.0) })
    }
}

/// Bosonic lowering operator on one transmon.
fn lowering(levels: usize) -> CMat {
    let mut b = CMat::zeros(levels, levels);
    for k in 1..levels {
        b[(k - 1, k)] = cplx((k as f64).sqrt());
    }
    b
}

fn number_op(levels: usize) -> CMat {
    CMat::from_fn(levels, levels, |r, c| if r == c { cplx(r as f64) } else { cplx(0.0) })
}

/// Lindblad dissipator superoperator for the pair, 1/ns units.
pub(crate) fn dissipator_superop(levels: usize, fixed: Rates, tunable: Rates) -> CMat {
    let d = levels * levels;
    let eye = CMat::identity(levels, levels);
    let mut collapse: Vec<CMat> = Vec::new();
    for (rates, on_fixed) in [(fixed, true), (tunable, false)] {
        let embed = |op: &CMat| if on_fixed { kron(op, &eye) } else { kron(&eye, op) };
        if rates.gamma1 > 0.0 {
            collapse.push(embed(&lowering(levels)) * cplx(rates.gamma1.sqrt()));
        }
        if rates.gamma_phi > 0.0 {
            collapse.push(embed(&number_op(levels)) * cplx((2.0 * rates.gamma_phi).sqrt()));
        }
    }
    let mut l = CMat::zeros(d * d, d * d);
    let eye_d = CMat::identity(d, d);
    for a in &collapse {
        let ada = a.adjoint() * a;
        l += kron(&a.conjugate(), a)
            - (kron(&eye_d, &ada) + kron(&ada.transpose(), &eye_d)) * cplx(0.5);
    }
    l
}

fn expm_general(m: &CMat) -> CMat {
    // Dissipators are real; Pade scaling-and-squaring handles them fine.
    m.clone().exp()
}

/// Dissipative evolution of the pair under the pulse, as a process map.
///
/// The tunable qubit's under-modulation coherence times apply whenever
/// `pulse.phi_ac > 0`. With all rates zero this reduces to
/// [`super::evolve_unitary`].
pub fn evolve_lindblad(
    pair: &PairSystem,
    pulse: &FluxPulse,
    noise: &NoiseSpec,
) -> Result<ProcessMap> {
    evolve_lindblad_with(pair, pulse, noise, &StepControl::default())
}

pub fn evolve_lindblad_with(
    pair: &PairSystem,
    pulse: &FluxPulse,
    noise: &NoiseSpec,
    ctrl: &StepControl,
) -> Result<ProcessMap> {
    pulse.validate()?;
    noise.validate()?;
    let modulated = pulse.phi_ac > 0.0;
    let fixed = Rates::from_noise(&noise.fixed, modulated)?;
    let tunable = Rates::from_noise(&noise.tunable, modulated)?;
    let ctx = PairContext::new(pair, pulse)?;
    let h = |t: f64| ctx.hamiltonian(pulse, t);

    // Uniform step: the smallest the unitary adaptive control wanted,
    // capped so the Strang splitting error stays negligible.
    let min_dt = integrator::smallest_accepted_step(h, 0.0, pulse.duration_ns, ctrl)?;
    let steps = (pulse.duration_ns / min_dt.min(0.5)).ceil().max(1.0) as usize;
    let dt = pulse.duration_ns / steps as f64;

    let l_d = dissipator_superop(pair.levels, fixed, tunable);
    let e_half = expm_general(&(&l_d * cplx(dt / 2.0)));

    let d2 = pair.dim() * pair.dim();
    let mut s = CMat::identity(d2, d2);
    let fine_ctrl = StepControl { max_dt_ns: dt, initial_dt_ns: dt, ..*ctrl };
    for k in 0..steps {
        let t0 = k as f64 * dt;
        let u_step = integrator::propagate(h, t0, t0 + dt, &fine_ctrl)?;
        let s_u = conjugation_superop(&u_step);
        s = &e_half * s_u * &e_half * s;
    }
    Ok(ProcessMap { superop: s, levels: pair.levels })
}

/// Pure relaxation/dephasing over `t_ns` with no Hamiltonian: the process
/// of an idling pair in its own rotating frame.
pub fn idle_process(levels: usize, fixed: &QubitNoise, tunable: &QubitNoise, t_ns: f64) -> Result<ProcessMap> {
    let fr = Rates::from_noise(fixed, false)?;
    let tr = Rates::from_noise(tunable, false)?;
    let l = dissipator_superop(levels, fr, tr);
    Ok(ProcessMap { superop: expm_general(&(&l * cplx(t_ns))), levels })
}

/// Constant-Hamiltonian Lindblad process over `t_ns` (both in the rotating
/// frame and rad/ns units). Used for ideal-exchange coherence limits.
pub(crate) fn constant_generator_process(
    levels: usize,
    h: &CMat,
    fixed: Rates,
    tunable: Rates,
    t_ns: f64,
) -> ProcessMap {
    let d = levels * levels;
    let eye = CMat::identity(d, d);
    let mut l = dissipator_superop(levels, fixed, tunable);
    let im = C64::new(0.0, 1.0);
    // -i (H rho - rho H) vectorizes to -i (I (x) H - H^T (x) I).
    l += (kron(&eye, h) - kron(&h.transpose(), &eye)) * (-im);
    ProcessMap { superop: expm_general(&(&l * cplx(t_ns))), levels }
}
