//! Static physics of individual transmons and the multi-die device
//! description: flux-dependent spectra, charge matrix elements, junction
//! conductance predictions and assembly combinatorics.

pub mod spectrum;
pub mod topology;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use topology::{DeviceTopology, DieRecord, PairRecord, QubitNoise, QubitRecord};

/// Minimum E_J/E_C ratio accepted as "transmon regime".
pub const TRANSMON_REGIME_MIN_RATIO: f64 = 20.0;

/// von Klitzing resistance h/e^2 in ohms.
pub const RESISTANCE_QUANTUM_OHM: f64 = 25_812.807_45;

/// Conversion from ueV to MHz (E/h).
pub const UEV_TO_MHZ: f64 = 241.798_924_2;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("not in the transmon regime: E_J_eff/E_C = {ratio:.2} < {min:.0} at phi = {phi} Phi0")]
    NonTransmonRegime { ratio: f64, phi: f64, min: f64 },
    #[error("no transmon spec satisfies the targets: {0}")]
    NoSolution(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid device description: {0}")]
    InvalidTopology(String),
}

pub type Result<T> = std::result::Result<T, DeviceError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransmonKind {
    Fixed,
    Tunable,
}

/// Design target class. Each die carries the four classes twice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignClass {
    I,
    II,
    III,
    IV,
}

/// Static design parameters of one transmon.
///
/// Energies are in GHz * h. `d_asym` is the DC-SQUID junction asymmetry in
/// [0, 1); it is unused for fixed-frequency qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpec {
    pub kind: TransmonKind,
    pub e_j_sum_ghz: f64,
    pub d_asym: f64,
    pub e_c_ghz: f64,
    pub label: String,
    pub design_class: DesignClass,
}

impl TransmonSpec {
    pub fn new(
        kind: TransmonKind,
        e_j_sum_ghz: f64,
        d_asym: f64,
        e_c_ghz: f64,
        label: impl Into<String>,
        design_class: DesignClass,
    ) -> Result<Self> {
        if e_c_ghz <= 0.0 || e_j_sum_ghz <= 0.0 {
            return Err(DeviceError::Domain("E_J and E_C must be positive".into()));
        }
        if e_j_sum_ghz / e_c_ghz <= TRANSMON_REGIME_MIN_RATIO {
            return Err(DeviceError::NonTransmonRegime {
                ratio: e_j_sum_ghz / e_c_ghz,
                phi: 0.0,
                min: TRANSMON_REGIME_MIN_RATIO,
            });
        }
        if kind == TransmonKind::Tunable && !(0.0..1.0).contains(&d_asym) {
            return Err(DeviceError::Domain(format!(
                "junction asymmetry d = {d_asym} outside [0, 1)"
            )));
        }
        Ok(Self { kind, e_j_sum_ghz, d_asym, e_c_ghz, label: label.into(), design_class })
    }
}

/// Flux-resolved spectrum and charge matrix elements of one transmon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonAtFlux {
    /// Applied flux in units of Phi0.
    pub phi: f64,
    pub e_j_eff_ghz: f64,
    pub f01_mhz: f64,
    pub f12_mhz: f64,
    /// Anharmonicity f12 - f01 (negative).
    pub eta_mhz: f64,
    /// |<0|n|1>| in the (E_J_eff/8E_C)^{1/4}-normalized convention.
    pub lambda_01: f64,
    /// |<1|n|2>| normalized with an extra sqrt(2) so the harmonic limit is
    /// lambda_12 -> lambda_01; the sqrt(2) ladder factor is applied
    /// explicitly where coupling operators are built.
    pub lambda_12: f64,
    /// Flux renormalization of the 0-1 coupling matrix element,
    /// [E_J_eff(phi)/E_J_eff(0)]^{1/4} * lambda(phi)/lambda(0). Exactly 1 at
    /// phi = 0.
    pub mu01: f64,
    /// Flux renormalization of the 1-2 coupling matrix element,
    /// [E_J_eff(phi)/E_J_eff(0)]^{1/4} * Lambda(phi)/lambda(0).
    pub mu12: f64,
}

/// Effective Josephson energy of the DC SQUID at the given flux (Phi0 units).
///
/// `E_J,eff = E_J_sum * sqrt(cos^2(pi phi) + d^2 sin^2(pi phi))`; fixed
/// qubits return `E_J_sum` for any flux. Periodic with period Phi0, maximum
/// `E_J_sum` at integer flux, minimum `d * E_J_sum` at half-integer flux.
pub fn ej_eff(spec: &TransmonSpec, phi: f64) -> f64 {
    match spec.kind {
        TransmonKind::Fixed => spec.e_j_sum_ghz,
        TransmonKind::Tunable => {
            let x = std::f64::consts::PI * phi;
            let (s, c) = x.sin_cos();
            spec.e_j_sum_ghz * (c * c + spec.d_asym * spec.d_asym * s * s).sqrt()
        }
    }
}

/// Diagonalize the transmon at the given flux.
///
/// Errors with [`DeviceError::NonTransmonRegime`] when the effective
/// E_J/E_C ratio drops below 20 (e.g. a symmetric SQUID biased to a
/// half-integer flux).
pub fn transmon_levels(spec: &TransmonSpec, phi: f64) -> Result<TransmonAtFlux> {
    let e_j = ej_eff(spec, phi);
    let ratio = e_j / spec.e_c_ghz;
    if ratio < TRANSMON_REGIME_MIN_RATIO {
        return Err(DeviceError::NonTransmonRegime { ratio, phi, min: TRANSMON_REGIME_MIN_RATIO });
    }
    let here = spectrum::diagonalize(e_j, spec.e_c_ghz);
    let parked = if phi == 0.0 || spec.kind == TransmonKind::Fixed {
        here
    } else {
        spectrum::diagonalize(spec.e_j_sum_ghz, spec.e_c_ghz)
    };
    let ej_ratio_qtr = (e_j / spec.e_j_sum_ghz).powf(0.25);
    Ok(TransmonAtFlux {
        phi,
        e_j_eff_ghz: e_j,
        f01_mhz: here.f01_ghz * 1e3,
        f12_mhz: here.f12_ghz * 1e3,
        eta_mhz: (here.f12_ghz - here.f01_ghz) * 1e3,
        lambda_01: here.lambda01,
        lambda_12: here.lambda12,
        mu01: ej_ratio_qtr * here.lambda01 / parked.lambda01,
        mu12: ej_ratio_qtr * here.lambda12 / parked.lambda01,
    })
}

/// Charge matrix elements and their flux renormalizations,
/// `(lambda_01, lambda_12, mu01, mu12)`.
pub fn charge_matrix_elements(spec: &TransmonSpec, phi: f64) -> Result<(f64, f64, f64, f64)> {
    let at = transmon_levels(spec, phi)?;
    Ok((at.lambda_01, at.lambda_12, at.mu01, at.mu12))
}

/// Josephson energy (GHz * h) predicted from the room-temperature normal
/// resistance `r_n` (ohm) and the superconducting gap (ueV) via the
/// Ambegaokar-Baratoff relation `E_J = (gap/8) * (R_K / R_n)`.
pub fn ej_from_conductance(r_n_ohm: f64, gap_uev: f64) -> Result<f64> {
    if r_n_ohm <= 0.0 || gap_uev <= 0.0 {
        return Err(DeviceError::Domain(format!(
            "resistance and gap must be positive (got R_n = {r_n_ohm}, gap = {gap_uev})"
        )));
    }
    let e_j_uev = gap_uev / 8.0 * (RESISTANCE_QUANTUM_OHM / r_n_ohm);
    Ok(e_j_uev * UEV_TO_MHZ / 1e3)
}

/// Default aluminum superconducting gap in ueV for conductance predictions.
pub const DEFAULT_AL_GAP_UEV: f64 = 180.0;

/// Solve a [`TransmonSpec`] from frequency targets.
///
/// Finds `(E_J_sum, E_C)` such that the zero-flux spectrum hits
/// `(f01_max, eta)`, then the asymmetry `d` such that the half-flux f01
/// equals `f01_min`. Round-trips through [`transmon_levels`] to better than
/// 1 MHz.
pub fn spec_from_targets(
    f01_max_mhz: f64,
    f01_min_mhz: f64,
    eta_mhz: f64,
    kind: TransmonKind,
    label: impl Into<String>,
    design_class: DesignClass,
) -> Result<TransmonSpec> {
    if f01_min_mhz > f01_max_mhz {
        return Err(DeviceError::NoSolution("f01_min exceeds f01_max".into()));
    }
    if eta_mhz >= 0.0 {
        return Err(DeviceError::NoSolution("anharmonicity must be negative".into()));
    }
    if kind == TransmonKind::Tunable && f01_max_mhz - f01_min_mhz < 1.0 {
        return Err(DeviceError::NoSolution(
            "tunable qubit with zero tuning range would need d_asym = 1".into(),
        ));
    }
    if kind == TransmonKind::Fixed && f01_max_mhz != f01_min_mhz {
        return Err(DeviceError::NoSolution("fixed qubit cannot have a tuning range".into()));
    }

    let f01_t = f01_max_mhz / 1e3;
    let eta_t = eta_mhz / 1e3;

    // Newton iteration on (E_J, E_C) with finite-difference Jacobian.
    let mut e_c = -eta_t;
    let mut e_j = (f01_t + e_c).powi(2) / (8.0 * e_c);
    let f = |ej: f64, ec: f64| {
        let p = spectrum::diagonalize(ej, ec);
        (p.f01_ghz - f01_t, p.f12_ghz - p.f01_ghz - eta_t)
    };
    let mut converged = false;
    for _ in 0..40 {
        let (r1, r2) = f(e_j, e_c);
        if r1.abs() < 1e-7 && r2.abs() < 1e-7 {
            converged = true;
            break;
        }
        let dj = e_j * 1e-6;
        let dc = e_c * 1e-6;
        let (r1j, r2j) = f(e_j + dj, e_c);
        let (r1c, r2c) = f(e_j, e_c + dc);
        let a = (r1j - r1) / dj;
        let b = (r1c - r1) / dc;
        let c = (r2j - r2) / dj;
        let d = (r2c - r2) / dc;
        let det = a * d - b * c;
        if det.abs() < 1e-30 {
            return Err(DeviceError::NoSolution("singular Jacobian in target solve".into()));
        }
        e_j -= (d * r1 - b * r2) / det;
        e_c -= (-c * r1 + a * r2) / det;
        if e_j <= 0.0 || e_c <= 0.0 {
            return Err(DeviceError::NoSolution("iteration left the physical domain".into()));
        }
    }
    if !converged {
        return Err(DeviceError::NoSolution("zero-flux target iteration did not converge".into()));
    }
    if e_j / e_c <= TRANSMON_REGIME_MIN_RATIO {
        return Err(DeviceError::NoSolution(format!(
            "targets imply E_J/E_C = {:.1}, outside the transmon regime",
            e_j / e_c
        )));
    }

    let d_asym = if kind == TransmonKind::Fixed {
        0.0
    } else {
        // Bisection on d: f01 at half flux is monotone in d.
        let f_min_t = f01_min_mhz / 1e3;
        let f_at = |d: f64| spectrum::diagonalize(e_j * d, e_c).f01_ghz;
        let (mut lo, mut hi) = (TRANSMON_REGIME_MIN_RATIO * e_c / e_j, 0.999_999);
        if f_at(lo) > f_min_t {
            return Err(DeviceError::NoSolution(format!(
                "f01_min = {f01_min_mhz} MHz below the transmon-regime floor"
            )));
        }
        if f_at(hi) < f_min_t {
            return Err(DeviceError::NoSolution("f01_min too close to f01_max".into()));
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f_at(mid) < f_min_t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    TransmonSpec::new(kind, e_j, d_asym, e_c, label, design_class)
}

/// Number of ordered die selections: `dies * (dies-1) * ... * (dies-slots+1)`.
///
/// Exact big-integer arithmetic; `(220, 4)` exceeds 2.2e9.
pub fn assembly_permutations(dies_available: u64, slots: u64) -> Result<num_bigint::BigUint> {
    if slots > dies_available {
        return Err(DeviceError::Domain(format!(
            "cannot fill {slots} slots from {dies_available} dies"
        )));
    }
    let mut acc = num_bigint::BigUint::from(1u32);
    for k in 0..slots {
        acc *= dies_available - k;
    }
    Ok(acc)
}
