//! Flip-chip coupling geometry: the inverse-bump-height coupling model, its
//! least-squares fit, the cylindrical shear-test height estimate, and the
//! dispersive-shift relation between a measured qubit-qubit shift and the
//! bare coupling rate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::TransmonAtFlux;
use crate::fit;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular fit: {0}")]
    SingularFit(String),
    #[error(
        "degenerate denominator: |{which}| = {value_mhz:.3} MHz < 10 g = {limit_mhz:.3} MHz, \
         perturbation theory unreliable"
    )]
    DegenerateDenominator { which: &'static str, value_mhz: f64, limit_mhz: f64 },
    #[error("sign mismatch: chi/bracket = {0:.3e} < 0, shift inconsistent with the spectrum")]
    SignMismatch(f64),
    #[error(transparent)]
    Fit(#[from] fit::FitError),
}

pub type Result<T> = std::result::Result<T, CouplingError>;

/// Indium bump geometry before and after bonding; lengths in um.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpGeometry {
    pub h_pre_um: f64,
    pub d_pre_um: f64,
    pub d_post_um: f64,
}

impl BumpGeometry {
    /// As-deposited geometry: 6.5 um tall, 40 um diameter.
    pub fn with_deposited_defaults(d_post_um: f64) -> Self {
        Self { h_pre_um: 6.5, d_pre_um: 40.0, d_post_um }
    }
}

/// Fitted parameters of the `g(h) = a/h + b` coupling model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingFit {
    /// MHz * um.
    pub a: f64,
    pub a_err: f64,
    /// MHz.
    pub b: f64,
    pub b_err: f64,
    /// 2x2 covariance of (a, b), row-major.
    pub covariance: [[f64; 2]; 2],
}

impl CouplingFit {
    /// The fit quoted for the reference device, a = 27.9 MHz um, b = 0.7 MHz.
    pub fn reference() -> Self {
        Self {
            a: 27.9,
            a_err: 6.4,
            b: 0.7,
            b_err: 3.5,
            covariance: [[6.4 * 6.4, 0.0], [0.0, 3.5 * 3.5]],
        }
    }
}

/// Which qubit's frequency was probed in a dispersive-shift measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftDirection {
    Q1Probed,
    Q2Probed,
}

/// A measured qubit-qubit dispersive shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveShift {
    pub chi_qq_mhz: f64,
    pub direction: ShiftDirection,
    pub uncertainty_mhz: f64,
}

/// Coupling rate from bump height, `g/2pi = a/h + b` in MHz.
pub fn g_from_height(fit: &CouplingFit, h_um: f64) -> Result<f64> {
    if h_um <= 0.0 {
        return Err(CouplingError::Domain(format!("bump height {h_um} um must be positive")));
    }
    Ok(fit.a / h_um + fit.b)
}

/// Weighted least squares of `(h, g)` points against `g = a/h + b`.
///
/// `points` are `(h_um, g_mhz, sigma_g_mhz)` with `sigma <= 0` meaning
/// unknown; the fit is unweighted (with residual-scaled covariance) unless
/// every point carries a positive sigma.
pub fn fit_g_vs_height(points: &[(f64, f64, f64)]) -> Result<CouplingFit> {
    if points.len() < 3 {
        return Err(CouplingError::SingularFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let h0 = points[0].0;
    if points.iter().all(|p| (p.0 - h0).abs() < 1e-12) {
        return Err(CouplingError::SingularFit("all bump heights equal".into()));
    }
    if points.iter().any(|p| p.0 <= 0.0) {
        return Err(CouplingError::Domain("bump heights must be positive".into()));
    }
    let design: Vec<Vec<f64>> = points.iter().map(|&(h, _, _)| vec![1.0 / h, 1.0]).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let sigmas: Vec<f64> = points.iter().map(|p| p.2).collect();
    let weighted = sigmas.iter().all(|&s| s > 0.0);
    let f = fit::linear_least_squares(&design, &y, weighted.then_some(sigmas.as_slice()))?;
    Ok(CouplingFit {
        a: f.params[0],
        a_err: f.param_err(0),
        b: f.params[1],
        b_err: f.param_err(1),
        covariance: [
            [f.covariance[(0, 0)], f.covariance[(0, 1)]],
            [f.covariance[(1, 0)], f.covariance[(1, 1)]],
        ],
    })
}

/// Post-bonding bump height from the sheared-bump diameter, assuming the
/// bump stays cylindrical: `h_post = h_pre (D_pre / D_post)^2`.
pub fn height_from_shear(geom: &BumpGeometry) -> Result<f64> {
    if geom.d_post_um <= 0.0 || geom.d_pre_um <= 0.0 || geom.h_pre_um <= 0.0 {
        return Err(CouplingError::Domain("bump dimensions must be positive".into()));
    }
    Ok(geom.h_pre_um * (geom.d_pre_um / geom.d_post_um).powi(2))
}

/// Model prediction of the qubit-qubit dispersive shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiPrediction {
    pub chi_qq_mhz: f64,
    /// The spectral bracket multiplying 2 g^2, in 1/MHz.
    pub bracket_inv_mhz: f64,
    /// False when the detuning-to-coupling ratio drops below 5 and the
    /// dispersive approximation becomes questionable.
    pub dispersive: bool,
}

/// Second-order dispersive shift of two coupled transmons:
///
/// `chi_qq = 2 g^2 [ mu01_1^2 mu12_2^2 / (f01_1 - f12_2)
///                 - mu12_1^2 mu01_2^2 / (f12_1 - f01_2) ]`
///
/// with all frequencies and `g` in linear MHz, evaluated at the parked
/// fluxes captured in the two [`TransmonAtFlux`] arguments.
pub fn chi_qq_model(g_mhz: f64, t1: &TransmonAtFlux, t2: &TransmonAtFlux) -> Result<ChiPrediction> {
    let bracket = chi_bracket(t1, t2, g_mhz.abs())?;
    let chi = 2.0 * g_mhz * g_mhz * bracket;
    let detuning = (t1.f01_mhz - t2.f01_mhz).abs();
    Ok(ChiPrediction {
        chi_qq_mhz: chi,
        bracket_inv_mhz: bracket,
        dispersive: g_mhz.abs() * 5.0 <= detuning,
    })
}

fn chi_bracket(t1: &TransmonAtFlux, t2: &TransmonAtFlux, g_mhz: f64) -> Result<f64> {
    let d1 = t1.f01_mhz - t2.f12_mhz;
    let d2 = t1.f12_mhz - t2.f01_mhz;
    let limit = 10.0 * g_mhz;
    if d1.abs() < limit {
        return Err(CouplingError::DegenerateDenominator {
            which: "f01_1 - f12_2",
            value_mhz: d1.abs(),
            limit_mhz: limit,
        });
    }
    if d2.abs() < limit {
        return Err(CouplingError::DegenerateDenominator {
            which: "f12_1 - f01_2",
            value_mhz: d2.abs(),
            limit_mhz: limit,
        });
    }
    let m01_1 = t1.mu01 * t1.mu01;
    let m12_1 = t1.mu12 * t1.mu12;
    let m01_2 = t2.mu01 * t2.mu01;
    let m12_2 = t2.mu12 * t2.mu12;
    Ok(m01_1 * m12_2 / d1 - m12_1 * m01_2 / d2)
}

/// Invert [`chi_qq_model`]: bare coupling rate (and first-order uncertainty)
/// from a measured dispersive shift, `g = sqrt(chi / bracket) / sqrt(2)`.
pub fn g_from_chi(
    chi: &DispersiveShift,
    t1: &TransmonAtFlux,
    t2: &TransmonAtFlux,
) -> Result<(f64, f64)> {
    // The degeneracy guard scales with g, which is what we are solving for;
    // a first pass with g = 0 gets the bracket, a second pass re-checks the
    // guard at the recovered g.
    let bracket = chi_bracket(t1, t2, 0.0)?;
    let ratio = chi.chi_qq_mhz / bracket;
    if ratio < 0.0 {
        return Err(CouplingError::SignMismatch(ratio));
    }
    let g = (ratio / 2.0).sqrt();
    chi_bracket(t1, t2, g)?;
    let g_err = if chi.chi_qq_mhz.abs() > 0.0 {
        g * 0.5 * (chi.uncertainty_mhz / chi.chi_qq_mhz).abs()
    } else {
        0.0
    };
    Ok((g, g_err))
}

// ---------------------------------------------------------------------------
// Pair characterization CSV table
// ---------------------------------------------------------------------------

/// One row of the pair characterization table exchanged as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTableRow {
    pub pair: String,
    pub h_um: f64,
    pub h_err_um: f64,
    #[serde(rename = "g_meas_MHz")]
    pub g_meas_mhz: f64,
    #[serde(rename = "g_meas_err_MHz")]
    pub g_meas_err_mhz: f64,
    #[serde(rename = "g_sim_MHz")]
    pub g_sim_mhz: f64,
    #[serde(rename = "g_sim_err_MHz")]
    pub g_sim_err_mhz: f64,
}

/// The bundled reference characterization as CSV rows.
pub fn reference_pair_table() -> Vec<PairTableRow> {
    crate::device::topology::REFERENCE_PAIRS
        .iter()
        .map(|c| PairTableRow {
            pair: c.pair.to_string(),
            h_um: c.bump_height_um,
            h_err_um: c.bump_height_err_um,
            g_meas_mhz: c.g_meas_mhz,
            g_meas_err_mhz: c.g_meas_err_mhz,
            g_sim_mhz: c.g_sim_mhz,
            g_sim_err_mhz: c.g_sim_err_mhz,
        })
        .collect()
}

pub fn write_pair_table<W: std::io::Write>(writer: W, rows: &[PairTableRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

pub fn read_pair_table<R: std::io::Read>(reader: R) -> Result<Vec<PairTableRow>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CouplingError::Domain(format!("malformed pair table: {e}")))
}
