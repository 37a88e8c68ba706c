//! Gate fidelity metrics on the computational subspace.
//!
//! The average gate fidelity is `F_avg = (d F_pro + 1)/(d + 1)` with d = 4
//! and `F_pro` the process fidelity of the computational-subspace channel
//! against the target unitary; leakage is reported separately. Virtual-Z
//! freedom (one Z angle per qubit, absorbed by frame choices in any real
//! calibration) is optimized away where the caller asks for it.

use num_complex::Complex64 as C64;

use crate::linalg::{cplx, CMat};

use super::lindblad::{constant_generator_process, Rates, ProcessMap};
use super::{
    DynamicsError, FluxPulse, GateKind, NoiseSpec, PairSystem, Propagator, Result,
};

/// A finished gate simulation: either a unitary propagator or a process map.
#[derive(Debug, Clone, Copy)]
pub enum GateOutput<'a> {
    Unitary(&'a Propagator),
    Process(&'a ProcessMap),
}

impl GateOutput<'_> {
    fn levels(&self) -> usize {
        match self {
            GateOutput::Unitary(p) => p.levels,
            GateOutput::Process(p) => p.levels,
        }
    }

    fn computational_indices(&self) -> [usize; 4] {
        let l = self.levels();
        [0, 1, l, l + 1]
    }

    /// Choi matrix of the computational-subspace restriction (16x16,
    /// trace-decreasing when leakage occurred).
    fn computational_choi(&self) -> CMat {
        let idx = self.computational_indices();
        let d = self.levels() * self.levels();
        match self {
            GateOutput::Unitary(p) => {
                let u = &p.matrix;
                // C[(i,r),(j,c)] = U[r_full, i_full] conj(U[c_full, j_full])
                CMat::from_fn(16, 16, |row, col| {
                    let (i, r) = (row / 4, row % 4);
                    let (j, c) = (col / 4, col % 4);
                    u[(idx[r], idx[i])] * u[(idx[c], idx[j])].conj()
                })
            }
            GateOutput::Process(p) => {
                let s = &p.superop;
                CMat::from_fn(16, 16, |row, col| {
                    let (i, r) = (row / 4, row % 4);
                    let (j, c) = (col / 4, col % 4);
                    s[(idx[r] + idx[c] * d, idx[i] + idx[j] * d)]
                })
            }
        }
    }

    fn trace_defect(&self) -> f64 {
        match self {
            GateOutput::Unitary(p) => crate::linalg::unitarity_defect(&p.matrix),
            GateOutput::Process(p) => p.trace_defect(),
        }
    }

    /// Average population leaving the computational subspace.
    pub fn leakage(&self) -> f64 {
        let choi = self.computational_choi();
        // Tr_out of the Choi diagonal blocks gives the retained population
        // per input basis state.
        let mut retained = 0.0;
        for i in 0..4 {
            for r in 0..4 {
                retained += choi[(i * 4 + r, i * 4 + r)].re;
            }
        }
        1.0 - retained / 4.0
    }
}

/// Process fidelity of the computational-subspace channel against a 4x4
/// target unitary, no phase freedom.
pub fn process_fidelity_on_computational(result: GateOutput, target: &CMat) -> Result<f64> {
    check_target(target)?;
    let choi = result.computational_choi();
    Ok(process_fidelity_from_choi(&choi, target))
}

fn process_fidelity_from_choi(choi: &CMat, target: &CMat) -> f64 {
    // F_pro = <u|C|u>/d^2 with u[(i, r)] = T[r, i].
    let mut u = CMat::zeros(16, 1);
    for i in 0..4 {
        for r in 0..4 {
            u[(i * 4 + r, 0)] = target[(r, i)];
        }
    }
    ((u.adjoint() * choi * u)[(0, 0)].re / 16.0).max(0.0)
}

fn check_target(target: &CMat) -> Result<()> {
    if target.nrows() != 4 || target.ncols() != 4 {
        return Err(DynamicsError::DimensionMismatch { expected: 4, got: target.nrows() });
    }
    Ok(())
}

/// Average gate fidelity (and leakage) against a 4x4 target unitary.
pub fn average_gate_fidelity(result: GateOutput, target: &CMat) -> Result<(f64, f64)> {
    check_target(target)?;
    if result.trace_defect() > 1e-6 {
        return Err(DynamicsError::UnphysicalNoise(
            "result is not trace preserving on the full space".into(),
        ));
    }
    let f_pro = process_fidelity_on_computational(result, target)?;
    Ok(((4.0 * f_pro + 1.0) / 5.0, result.leakage()))
}

/// Average gate fidelity maximized over virtual-Z rotations of the target.
pub fn average_gate_fidelity_z_opt(result: GateOutput, target: &CMat) -> Result<(f64, f64)> {
    check_target(target)?;
    if result.trace_defect() > 1e-6 {
        return Err(DynamicsError::UnphysicalNoise(
            "result is not trace preserving on the full space".into(),
        ));
    }
    let choi = result.computational_choi();
    let f = |alpha: f64, beta: f64| {
        process_fidelity_from_choi(&choi, &z_rotated_target(target, alpha, beta))
    };
    let (f_pro, _, _) = optimize_z_freedom(f);
    Ok(((4.0 * f_pro + 1.0) / 5.0, result.leakage()))
}

/// Post-rotate the target by virtual Z(alpha) (x) Z(beta).
fn z_rotated_target(target: &CMat, alpha: f64, beta: f64) -> CMat {
    let phases = [
        cplx(1.0),
        C64::new(0.0, beta).exp(),
        C64::new(0.0, alpha).exp(),
        C64::new(0.0, alpha + beta).exp(),
    ];
    CMat::from_fn(4, 4, |r, c| phases[r] * target[(r, c)])
}

/// Maximize `f(alpha, beta)` over the two virtual-Z angles: coarse grid
/// seed, then coordinate golden-section refinement. Returns
/// `(max, alpha, beta)`.
pub fn optimize_z_freedom(f: impl Fn(f64, f64) -> f64) -> (f64, f64, f64) {
    let n = 24;
    let (mut best, mut a_best, mut b_best) = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let a = super::TAU * i as f64 / n as f64;
            let b = super::TAU * j as f64 / n as f64;
            let v = f(a, b);
            if v > best {
                best = v;
                a_best = a;
                b_best = b;
            }
        }
    }
    let width = super::TAU / n as f64;
    for _ in 0..60 {
        let a_new = golden_max(|a| f(a, b_best), a_best - width, a_best + width);
        let b_new = golden_max(|b| f(a_new, b), b_best - width, b_best + width);
        if (a_new - a_best).abs() < 1e-12 && (b_new - b_best).abs() < 1e-12 {
            a_best = a_new;
            b_best = b_new;
            break;
        }
        a_best = a_new;
        b_best = b_new;
    }
    (f(a_best, b_best), a_best, b_best)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Coherent gate error of a calibrated pulse: one minus the virtual-Z
/// optimized average fidelity of the noiseless propagator against the
/// ideal gate.
pub fn coherent_error(pair: &PairSystem, calibrated_pulse: &FluxPulse, gate: GateKind) -> Result<f64> {
    let prop = super::evolve_unitary(pair, calibrated_pulse)?;
    let (f, _) = average_gate_fidelity_z_opt(GateOutput::Unitary(&prop), &gate.ideal_unitary())?;
    Ok(1.0 - f)
}

/// Maximum fidelity the pair's coherence allows over a gate of length
/// `t_gate_ns`, assuming an ideal coherent exchange.
///
/// `gate = None` scores pure idling against the identity. For a CZ the
/// exchange Hamiltonian drives the paired second-level state through a full
/// 2 pi rotation (half the error budget sits in the short-lived |2>
/// population); for an iSWAP the 01-10 exchange completes a pi rotation.
/// The tunable qubit uses its under-modulation coherence times, the fixed
/// qubit its static ones.
pub fn coherence_limited_fidelity(
    noise: &NoiseSpec,
    t_gate_ns: f64,
    gate: Option<GateKind>,
) -> Result<f64> {
    if !(t_gate_ns > 0.0) {
        return Err(DynamicsError::InvalidPulse("gate time must be positive".into()));
    }
    noise.validate()?;
    let levels = 3;
    let fixed = Rates::from_noise(&noise.fixed, false)?;
    let tunable = Rates::from_noise(&noise.tunable, true)?;

    let d = levels * levels;
    let mut h = CMat::zeros(d, d);
    let index = |f: usize, t: usize| f * levels + t;
    let target = match gate {
        None => CMat::identity(4, 4),
        Some(kind) => {
            match kind {
                GateKind::ISwap => {
                    let g = std::f64::consts::FRAC_PI_2 / t_gate_ns;
                    h[(index(0, 1), index(1, 0))] = cplx(g);
                    h[(index(1, 0), index(0, 1))] = cplx(g);
                }
                GateKind::Cz02 => {
                    let g = std::f64::consts::PI / t_gate_ns;
                    h[(index(1, 1), index(0, 2))] = cplx(g);
                    h[(index(0, 2), index(1, 1))] = cplx(g);
                }
                GateKind::Cz20 => {
                    let g = std::f64::consts::PI / t_gate_ns;
                    h[(index(1, 1), index(2, 0))] = cplx(g);
                    h[(index(2, 0), index(1, 1))] = cplx(g);
                }
            }
            kind.ideal_unitary()
        }
    };
    let process = constant_generator_process(levels, &h, fixed, tunable, t_gate_ns);
    let (f, _) = average_gate_fidelity_z_opt(GateOutput::Process(&process), &target)?;
    Ok(f)
}
