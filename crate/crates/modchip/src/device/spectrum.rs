//! Charge-basis spectrum of a single transmon.
//!
//! The Cooper-pair-box Hamiltonian `H = 4 E_C (n - n_g)^2 - E_J cos(phi)`
//! is diagonalized in the charge basis `|n>` with `n in [-CUTOFF, CUTOFF]`
//! and `n_g = 0` (charge dispersion is negligible deep in the transmon
//! regime). This gives the level frequencies and the charge-operator matrix
//! elements in one eigensolve.

use nalgebra::DMatrix;

/// Charge cutoff in Cooper pairs. Converged far beyond f64 precision for
/// E_J/E_C >= 20 (number fluctuations are ~(E_J/8E_C)^{1/4} ~ 2).
pub const CHARGE_CUTOFF: i32 = 30;

/// Transition frequencies and normalized charge matrix elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    /// 0-1 transition frequency in GHz.
    pub f01_ghz: f64,
    /// 1-2 transition frequency in GHz.
    pub f12_ghz: f64,
    /// |<0|n|1>| normalized by (E_J/8E_C)^{1/4}.
    pub lambda01: f64,
    /// |<1|n|2>| normalized by sqrt(2) * (E_J/8E_C)^{1/4}, so the harmonic
    /// limit gives lambda12 -> lambda01.
    pub lambda12: f64,
}

/// Diagonalize the transmon at the given Josephson and charging energies
/// (both in GHz * h).
pub fn diagonalize(e_j_ghz: f64, e_c_ghz: f64) -> SpectrumPoint {
    let dim = (2 * CHARGE_CUTOFF + 1) as usize;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (row, n) in (-CHARGE_CUTOFF..=CHARGE_CUTOFF).enumerate() {
        h[(row, row)] = 4.0 * e_c_ghz * (n as f64) * (n as f64);
        if row + 1 < dim {
            h[(row, row + 1)] = -e_j_ghz / 2.0;
            h[(row + 1, row)] = -e_j_ghz / 2.0;
        }
    }
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let e = |k: usize| se.eigenvalues[order[k]];

    let charge_elem = |a: usize, b: usize| -> f64 {
        let va = se.eigenvectors.column(order[a]);
        let vb = se.eigenvectors.column(order[b]);
        (-CHARGE_CUTOFF..=CHARGE_CUTOFF)
            .enumerate()
            .map(|(row, n)| va[row] * (n as f64) * vb[row])
            .sum::<f64>()
            .abs()
    };

    let n_scale = (e_j_ghz / (8.0 * e_c_ghz)).powf(0.25);
    SpectrumPoint {
        f01_ghz: e(1) - e(0),
        f12_ghz: e(2) - e(1),
        lambda01: charge_elem(0, 1) / n_scale,
        lambda12: charge_elem(1, 2) / (std::f64::consts::SQRT_2 * n_scale),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anharmonicity_is_close_to_minus_ec() {
        // The leading-order estimate eta = -E_C acquires an
        // O(sqrt(E_C/E_J)) correction, ~12% at E_J/E_C = 50.
        let p = diagonalize(10.0, 0.2);
        let eta = p.f12_ghz - p.f01_ghz;
        assert!(eta < 0.0);
        assert!((eta + 0.2).abs() / 0.2 < 0.15, "eta = {eta} should be near -E_C");
        let deep = diagonalize(80.0, 0.2);
        let eta_deep = deep.f12_ghz - deep.f01_ghz;
        assert!((eta_deep + 0.2).abs() < (eta + 0.2).abs(), "correction shrinks with E_J/E_C");
    }

    #[test]
    fn matrix_element_ratio_approaches_harmonic_limit() {
        // lambda12/lambda01 -> 1 as E_J/E_C grows.
        let loose = diagonalize(5.0, 0.25);
        let tight = diagonalize(100.0, 0.25);
        let r_loose = loose.lambda12 / loose.lambda01;
        let r_tight = tight.lambda12 / tight.lambda01;
        assert!((r_tight - 1.0).abs() < (r_loose - 1.0).abs());
        assert!((r_tight - 1.0).abs() < 0.02);
    }
}
