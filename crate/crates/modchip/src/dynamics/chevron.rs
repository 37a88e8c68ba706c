//! Chevron scans: target-state population on a (modulation frequency,
//! duration) grid, the primary gate-calibration observable.

use crate::linalg::CMat;

use super::hamiltonian::PairContext;
use super::integrator::{propagate_sampled, StepControl};
use super::{FluxPulse, PairSystem, Result};

/// Population-transfer map over a modulation-frequency x duration grid.
#[derive(Debug, Clone)]
pub struct ChevronMap {
    pub f_p_mhz: Vec<f64>,
    pub t_ns: Vec<f64>,
    /// `transfer[i][j]` = target population at `(f_p_mhz[i], t_ns[j])`.
    pub transfer: Vec<Vec<f64>>,
}

impl ChevronMap {
    /// `(f_p, t)` of the maximum transfer.
    pub fn peak(&self) -> (f64, f64, f64) {
        let mut best = (self.f_p_mhz[0], self.t_ns[0], f64::NEG_INFINITY);
        for (i, row) in self.transfer.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (self.f_p_mhz[i], self.t_ns[j], v);
                }
            }
        }
        best
    }

    /// Maximum transfer over time for each modulation frequency.
    pub fn max_over_time(&self) -> Vec<f64> {
        self.transfer
            .iter()
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

/// Scan the pulse's modulation frequency and duration, recording the
/// population transferred from `initial` to `target` (two-transmon levels
/// `(fixed, tunable)`).
///
/// All grid points share the flux waveform, so the tunable qubit's flux
/// table and reference frame are built once for the whole scan.
pub fn chevron_scan(
    pair: &PairSystem,
    pulse_template: &FluxPulse,
    f_p_grid_mhz: &[f64],
    t_grid_ns: &[f64],
    initial: (usize, usize),
    target: (usize, usize),
) -> Result<ChevronMap> {
    assert!(!f_p_grid_mhz.is_empty() && !t_grid_ns.is_empty(), "grids must be non-empty");
    let t_max = t_grid_ns.iter().copied().fold(0.0, f64::max);
    let init_idx = pair.index(initial.0, initial.1);
    let target_idx = pair.index(target.0, target.1);
    let ctrl = StepControl::default();

    let mut transfer = Vec::with_capacity(f_p_grid_mhz.len());
    let base = FluxPulse { duration_ns: t_max, ..*pulse_template };
    let ctx = PairContext::new(pair, &base)?;
    for &f_p in f_p_grid_mhz {
        let pulse = FluxPulse { f_p_mhz: f_p, duration_ns: t_max, ..*pulse_template };
        pulse.validate()?;
        let props: Vec<CMat> =
            propagate_sampled(|t| ctx.hamiltonian(&pulse, t), t_grid_ns, &ctrl)?;
        transfer.push(
            props.iter().map(|u| u[(target_idx, init_idx)].norm_sqr()).collect::<Vec<f64>>(),
        );
    }
    Ok(ChevronMap { f_p_mhz: f_p_grid_mhz.to_vec(), t_ns: t_grid_ns.to_vec(), transfer })
}
