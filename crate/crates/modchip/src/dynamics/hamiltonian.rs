//! Pair Hamiltonian assembly.
//!
//! Lab frame:
//!
//! ```text
//! H(t) = sum_q [ w01_q(t) |1><1|_q + (2 w01_q(t) + eta_q(t)) |2><2|_q ]
//!        + g (b_F^† b_T + h.c.)  [+ g (b_F b_T + h.c.) with counter-rotating on]
//! b_q = mu01_q |0><1| + sqrt(2) mu12_q |1><2| + ...
//! ```
//!
//! with the tunable qubit's frequencies and mu factors following the
//! instantaneous flux. The doubly rotating frame subtracts a diagonal
//! reference built from the fixed qubit's frequency and the tunable qubit's
//! time-averaged modulated frequency, applying the interaction-picture
//! phases elementwise.

use num_complex::Complex64 as C64;

use crate::device::transmon_levels;
use crate::linalg::{cplx, CMat};

use super::flux_table::FluxTable;
use super::sideband::averaged_tunable_frequencies;
use super::{mhz_to_rad_ns, FluxPulse, Frame, PairSystem, Result};

/// Precomputed per-(pair, pulse) simulation context.
#[derive(Debug, Clone)]
pub struct PairContext {
    levels: usize,
    frame: Frame,
    counter_rotating: bool,
    g_rad: f64,
    /// Fixed qubit (w01, w12, mu01, mu12), static.
    fixed: [f64; 4],
    table: FluxTable,
    /// Diagonal of the rotating-frame reference Hamiltonian.
    reference: Vec<f64>,
    /// Time-averaged tunable (w01, w12) under the pulse's steady waveform.
    pub w01_bar_rad: f64,
    pub w12_bar_rad: f64,
}

impl PairContext {
    pub fn new(pair: &PairSystem, pulse: &FluxPulse) -> Result<Self> {
        let f_at = transmon_levels(&pair.fixed, 0.0)?;
        let fixed = [
            mhz_to_rad_ns(f_at.f01_mhz),
            mhz_to_rad_ns(f_at.f12_mhz),
            f_at.mu01,
            f_at.mu12,
        ];
        let table = if pulse.phi_ac > 0.0 {
            let (lo, hi) = pulse.flux_range();
            FluxTable::build(&pair.tunable, lo, hi)?
        } else {
            FluxTable::static_point(&pair.tunable, pulse.phi_dc)?
        };
        let (f01_bar_mhz, f12_bar_mhz) = averaged_tunable_frequencies(&table, pulse);
        let w01_bar = mhz_to_rad_ns(f01_bar_mhz);
        let w12_bar = mhz_to_rad_ns(f12_bar_mhz);

        let levels = pair.levels;
        let mut reference = vec![0.0; levels * levels];
        if pair.frame == Frame::DoublyRotating {
            for f_level in 0..levels {
                for t_level in 0..levels {
                    let ef = ladder_energy(f_level, fixed[0], fixed[1]);
                    let et = ladder_energy(t_level, w01_bar, w12_bar);
                    reference[f_level * levels + t_level] = ef + et;
                }
            }
        }
        Ok(Self {
            levels,
            frame: pair.frame,
            counter_rotating: pair.include_counter_rotating,
            g_rad: mhz_to_rad_ns(pair.g_mhz),
            fixed,
            table,
            reference,
            w01_bar_rad: w01_bar,
            w12_bar_rad: w12_bar,
        })
    }

    /// Hamiltonian at time `t_ns` in the context's frame, rad/ns.
    pub fn hamiltonian(&self, pulse: &FluxPulse, t_ns: f64) -> CMat {
        let tunable = self.table.eval(pulse.flux(t_ns));
        let h_lab = self.lab_hamiltonian(&tunable);
        match self.frame {
            Frame::Lab => h_lab,
            Frame::DoublyRotating => {
                let d = self.levels * self.levels;
                let mut h = CMat::zeros(d, d);
                for r in 0..d {
                    for c in 0..d {
                        let mut val = h_lab[(r, c)];
                        if r == c {
                            val -= cplx(self.reference[r]);
                        } else if val != C64::new(0.0, 0.0) {
                            let phase = (self.reference[r] - self.reference[c]) * t_ns;
                            val *= C64::new(0.0, phase).exp();
                        }
                        h[(r, c)] = val;
                    }
                }
                h
            }
        }
    }

    fn lab_hamiltonian(&self, tunable: &[f64; 4]) -> CMat {
        let n = self.levels;
        let d = n * n;
        let mut h = CMat::zeros(d, d);
        for f_level in 0..n {
            for t_level in 0..n {
                let idx = f_level * n + t_level;
                h[(idx, idx)] = cplx(
                    ladder_energy(f_level, self.fixed[0], self.fixed[1])
                        + ladder_energy(t_level, tunable[0], tunable[1]),
                );
            }
        }
        // Coupling g (b_F^† b_T + b_F b_T^†), mu-weighted ladders with the
        // sqrt(j) bosonic enhancement.
        let bf = ladder_elements(n, self.fixed[2], self.fixed[3]);
        let bt = ladder_elements(n, tunable[2], tunable[3]);
        for f_level in 0..n - 1 {
            for t_level in 1..n {
                // b_F^† b_T : |f+1, t-1><f, t|
                let from = f_level * n + t_level;
                let to = (f_level + 1) * n + (t_level - 1);
                let amp = cplx(self.g_rad * bf[f_level] * bt[t_level - 1]);
                h[(to, from)] += amp;
                h[(from, to)] += amp.conj();
            }
        }
        if self.counter_rotating {
            for f_level in 0..n - 1 {
                for t_level in 0..n - 1 {
                    // b_F^† b_T^† : |f+1, t+1><f, t|
                    let from = f_level * n + t_level;
                    let to = (f_level + 1) * n + (t_level + 1);
                    let amp = cplx(self.g_rad * bf[f_level] * bt[t_level]);
                    h[(to, from)] += amp;
                    h[(from, to)] += amp.conj();
                }
            }
        }
        h
    }

    /// Rotating-frame reference energies (diagonal), rad/ns.
    pub fn reference_energies(&self) -> &[f64] {
        &self.reference
    }
}

/// Energy of ladder level `k` given the first two transition frequencies;
/// levels above 2 extend with the same anharmonic spacing.
fn ladder_energy(k: usize, w01: f64, w12: f64) -> f64 {
    match k {
        0 => 0.0,
        1 => w01,
        _ => {
            let eta = w12 - w01;
            let k = k as f64;
            // E_k = k w01 + eta k(k-1)/2
            k * w01 + eta * k * (k - 1.0) / 2.0
        }
    }
}

/// `<k+1| b^† |k>` matrix elements: mu01, sqrt(2) mu12, then the bare
/// bosonic sqrt(k+1) scaled by mu12.
fn ladder_elements(levels: usize, mu01: f64, mu12: f64) -> Vec<f64> {
    (0..levels - 1)
        .map(|k| match k {
            0 => mu01,
            _ => ((k + 1) as f64).sqrt() * mu12,
        })
        .collect()
}
