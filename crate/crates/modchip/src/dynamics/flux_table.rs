//! Cached flux dependence of a tunable transmon.
//!
//! The integrator needs omega01, omega12 and the mu factors at every flux
//! the pulse visits; diagonalizing per step would dominate the runtime, so
//! the four curves are sampled once on the pulse's flux range and read back
//! through Catmull-Rom interpolation (all four are smooth in phi).

use crate::device::{transmon_levels, TransmonSpec};
use crate::dynamics::{mhz_to_rad_ns, Result};

const SAMPLES: usize = 513;

/// Interpolated row: (omega01 rad/ns, omega12 rad/ns, mu01, mu12).
pub type Row = [f64; 4];

#[derive(Debug, Clone)]
pub struct FluxTable {
    lo: f64,
    step: f64,
    rows: Vec<Row>,
}

impl FluxTable {
    pub fn build(spec: &TransmonSpec, lo: f64, hi: f64) -> Result<Self> {
        debug_assert!(hi >= lo);
        // Pad one step beyond each end for the cubic stencil.
        let span = (hi - lo).max(1e-9);
        let step = span / (SAMPLES - 1) as f64;
        let lo_padded = lo - step;
        let mut rows = Vec::with_capacity(SAMPLES + 2);
        for i in 0..SAMPLES + 2 {
            let phi = lo_padded + step * i as f64;
            let at = transmon_levels(spec, phi)?;
            rows.push([
                mhz_to_rad_ns(at.f01_mhz),
                mhz_to_rad_ns(at.f12_mhz),
                at.mu01,
                at.mu12,
            ]);
        }
        Ok(Self { lo: lo_padded, step, rows })
    }

    /// Table for a static point (no modulation).
    pub fn static_point(spec: &TransmonSpec, phi: f64) -> Result<Self> {
        let at = transmon_levels(spec, phi)?;
        let row =
            [mhz_to_rad_ns(at.f01_mhz), mhz_to_rad_ns(at.f12_mhz), at.mu01, at.mu12];
        Ok(Self { lo: phi, step: 1.0, rows: vec![row; 4] })
    }

    pub fn eval(&self, phi: f64) -> Row {
        let n = self.rows.len();
        let x = (phi - self.lo) / self.step;
        let i = (x.floor() as isize).clamp(1, n as isize - 3) as usize;
        let frac = x - i as f64;
        let mut out = [0.0; 4];
        for k in 0..4 {
            let p0 = self.rows[i - 1][k];
            let p1 = self.rows[i][k];
            let p2 = self.rows[i + 1][k];
            let p3 = self.rows[i + 2][k];
            out[k] = catmull_rom(p0, p1, p2, p3, frac);
        }
        out
    }
}

fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * ((2.0 * p1)
        + (-p0 + p2) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{DesignClass, TransmonKind, TransmonSpec};

    #[test]
    fn interpolation_matches_direct_diagonalization() {
        let spec = TransmonSpec::new(
            TransmonKind::Tunable,
            18.88,
            0.72,
            0.1829,
            "T",
            DesignClass::II,
        )
        .unwrap();
        let table = FluxTable::build(&spec, -0.3, 0.3).unwrap();
        for &phi in &[-0.261, -0.1003, 0.0, 0.07717, 0.2999] {
            let row = table.eval(phi);
            let at = transmon_levels(&spec, phi).unwrap();
            let w01 = mhz_to_rad_ns(at.f01_mhz);
            assert!(
                (row[0] - w01).abs() / w01 < 1e-9,
                "w01 interpolation error at phi={phi}: {} vs {}",
                row[0],
                w01
            );
            assert!((row[2] - at.mu01).abs() < 1e-8);
            assert!((row[3] - at.mu12).abs() < 1e-8);
        }
    }
}
