//! Sideband decomposition of a flux-modulated transmon.
//!
//! Under modulation the 0-1 transition picks up the phase factor
//! `exp(-i \int (w01(t') - w01_bar) dt')`, a periodic function whose Fourier
//! coefficients are the sideband weights: the spectral line at
//! `f01_bar + k f_p` carries weight `eps_k`, and the coupling to a static
//! partner is renormalized by `|eps_k|` on the k-th sideband resonance.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::device::TransmonSpec;

use super::flux_table::FluxTable;
use super::{rad_ns_to_mhz, DynamicsError, FluxPulse, GateKind, PairSystem, Result, TAU};

const SAMPLES: usize = 4096;

/// Sideband weights and time-averaged frequencies of the modulated qubit.
#[derive(Debug, Clone)]
pub struct SidebandWeights {
    /// Complex weight per sideband index k (line at f01_bar + k f_p).
    pub weights: BTreeMap<i32, C64>,
    /// Time-averaged 0-1 frequency under modulation, MHz.
    pub f01_bar_mhz: f64,
    /// Time-averaged anharmonicity under modulation, MHz.
    pub eta_bar_mhz: f64,
    /// Total |eps_k|^2 captured by the requested range.
    pub captured_weight: f64,
}

impl SidebandWeights {
    pub fn weight(&self, k: i32) -> C64 {
        self.weights.get(&k).copied().unwrap_or(C64::new(0.0, 0.0))
    }
}

/// Time-averaged (f01_bar, f12_bar) in MHz over the steady modulation
/// waveform (unit envelope), from the prepared flux table.
pub(crate) fn averaged_tunable_frequencies(table: &FluxTable, pulse: &FluxPulse) -> (f64, f64) {
    if pulse.phi_ac == 0.0 {
        let row = table.eval(pulse.phi_dc);
        return (rad_ns_to_mhz(row[0]), rad_ns_to_mhz(row[1]));
    }
    let mut sum01 = 0.0;
    let mut sum12 = 0.0;
    for j in 0..SAMPLES {
        let theta = TAU * j as f64 / SAMPLES as f64 + pulse.phase_rad;
        let phi = pulse.phi_dc + pulse.phi_ac * theta.cos();
        let row = table.eval(phi);
        sum01 += row[0];
        sum12 += row[1];
    }
    let n = SAMPLES as f64;
    (rad_ns_to_mhz(sum01 / n), rad_ns_to_mhz(sum12 / n))
}

/// Fourier decomposition of the modulated phase factor.
///
/// `w_samples` holds one period of the transition's angular frequency
/// (rad/ns) on a uniform grid; `weight_samples`, when given, multiplies the
/// phase factor pointwise (used for flux-dependent coupling matrix
/// elements). Returns the weights over `k_range`, the captured fraction of
/// the total, and the mean angular frequency.
pub(crate) fn decompose(
    w_samples: &[f64],
    weight_samples: Option<&[f64]>,
    period_ns: f64,
    k_range: RangeInclusive<i32>,
    force_even: bool,
) -> (BTreeMap<i32, C64>, f64, f64) {
    let n = w_samples.len();
    let w_bar = w_samples.iter().sum::<f64>() / n as f64;

    // Spectral antiderivative of delta_w = w - w_bar: with
    // delta_w(t_j) = (1/N) sum_m D_m e^{2 pi i j m / N}, the phase is
    // phi(t_j) = (1/N) sum_{m!=0} D_m (e^{2 pi i j m / N} - 1) T/(2 pi i m),
    // spectrally accurate for the smooth periodic excursion.
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut spec_buf: Vec<C64> = w_samples.iter().map(|&w| C64::new(w - w_bar, 0.0)).collect();
    // rustfft forward: X_m = sum_j x_j e^{-2 pi i j m / N}; the expansion
    // above uses e^{+...}, i.e. D_m = X_{(N-m) % N}.
    fft.process(&mut spec_buf);
    let mut integ: Vec<C64> = vec![C64::new(0.0, 0.0); n];
    for m in 1..n {
        let m_signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        let d_m = spec_buf[n - m];
        integ[m] = d_m * period_ns / (C64::new(0.0, TAU * m_signed) * n as f64);
    }
    let ifft = planner.plan_fft_inverse(n);
    let mut buf = integ.clone();
    ifft.process(&mut buf); // sum_m integ_m e^{+2 pi i j m / N}
    let offset: C64 = integ.iter().sum();

    // s_j = weight_j * exp(-i phi_j), then Fourier coefficients
    // eps_k = (1/N) sum_j s_j e^{+2 pi i j k / N} = S_{(N-k) % N} / N.
    let mut s: Vec<C64> = (0..n)
        .map(|j| {
            let phase = (buf[j] - offset).re;
            let w = weight_samples.map_or(1.0, |ws| ws[j]);
            (-C64::i() * phase).exp() * w
        })
        .collect();
    fft.process(&mut s);
    let mut weights = BTreeMap::new();
    let mut captured = 0.0;
    for k in k_range {
        let idx = ((n as i64 - k as i64).rem_euclid(n as i64)) as usize;
        let mut eps = s[idx] / n as f64;
        if force_even && k.rem_euclid(2) == 1 {
            eps = C64::new(0.0, 0.0);
        }
        captured += eps.norm_sqr();
        weights.insert(k, eps);
    }
    (weights, captured, w_bar)
}

/// One period of the pulse's flux waveform mapped through the table.
fn sample_waveform(table: &FluxTable, pulse: &FluxPulse) -> [Vec<f64>; 4] {
    let mut out = [vec![0.0; SAMPLES], vec![0.0; SAMPLES], vec![0.0; SAMPLES], vec![0.0; SAMPLES]];
    for j in 0..SAMPLES {
        let theta = TAU * j as f64 / SAMPLES as f64 + pulse.phase_rad;
        let row = table.eval(pulse.phi_dc + pulse.phi_ac * theta.cos());
        for k in 0..4 {
            out[k][j] = row[k];
        }
    }
    out
}

/// Numerically Fourier-decompose the modulated phase factor of the 0-1
/// transition over one modulation period.
///
/// The weights are normalized (`sum_k |eps_k|^2 = 1` over all harmonics by
/// Parseval); an error is returned when the requested `k_range` captures
/// less than `1 - 1e-6` of that weight. Parking at `phi_dc = 0` makes the
/// frequency excursion exactly half-periodic, so odd sidebands vanish
/// identically and are returned as exact zeros.
pub fn sideband_weights(
    spec: &TransmonSpec,
    pulse: &FluxPulse,
    k_range: RangeInclusive<i32>,
) -> Result<SidebandWeights> {
    pulse.validate()?;
    if pulse.phi_ac == 0.0 {
        let table = FluxTable::static_point(spec, pulse.phi_dc)?;
        let row = table.eval(pulse.phi_dc);
        let mut weights = BTreeMap::new();
        for k in k_range {
            weights.insert(k, if k == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        }
        return Ok(SidebandWeights {
            weights,
            f01_bar_mhz: rad_ns_to_mhz(row[0]),
            eta_bar_mhz: rad_ns_to_mhz(row[1] - row[0]),
            captured_weight: 1.0,
        });
    }

    let (lo, hi) = pulse.flux_range();
    let table = FluxTable::build(spec, lo, hi)?;
    let period_ns = 1e3 / pulse.f_p_mhz;
    let [w01, w12, _, _] = sample_waveform(&table, pulse);
    let (weights, captured, w01_bar) =
        decompose(&w01, None, period_ns, k_range, pulse.phi_dc == 0.0);
    if 1.0 - captured > 1e-6 {
        return Err(DynamicsError::SidebandConvergence { missing: 1.0 - captured });
    }
    let w12_bar = w12.iter().sum::<f64>() / SAMPLES as f64;
    Ok(SidebandWeights {
        weights,
        f01_bar_mhz: rad_ns_to_mhz(w01_bar),
        eta_bar_mhz: rad_ns_to_mhz(w12_bar - w01_bar),
        captured_weight: captured,
    })
}

/// Effective two-level coupling rate (linear MHz) of the gate's transition
/// on sideband `k`: the bare g renormalized by the matrix-element-weighted
/// sideband amplitude.
///
/// iSWAP rides the 01-10 exchange (`g mu01_F |eps~_k(01)|`); the CZ
/// variants ride 11-02 / 11-20 with the sqrt(2) ladder factor.
pub fn effective_coupling_mhz(
    pair: &PairSystem,
    pulse: &FluxPulse,
    gate: GateKind,
    k: i32,
) -> Result<f64> {
    pulse.validate()?;
    let fixed = crate::device::transmon_levels(&pair.fixed, 0.0)?;
    if pulse.phi_ac == 0.0 {
        return Ok(match gate {
            GateKind::ISwap => pair.g_mhz * fixed.mu01,
            GateKind::Cz02 => pair.g_mhz * fixed.mu01 * std::f64::consts::SQRT_2,
            GateKind::Cz20 => pair.g_mhz * fixed.mu12 * std::f64::consts::SQRT_2,
        }
        .abs());
    }
    let (lo, hi) = pulse.flux_range();
    let table = FluxTable::build(&pair.tunable, lo, hi)?;
    let period_ns = 1e3 / pulse.f_p_mhz;
    let [w01, w12, mu01, mu12] = sample_waveform(&table, pulse);
    let (freq, weight, scale) = match gate {
        GateKind::ISwap => (w01, mu01, pair.g_mhz * fixed.mu01),
        GateKind::Cz02 => (w12, mu12, pair.g_mhz * fixed.mu01 * std::f64::consts::SQRT_2),
        GateKind::Cz20 => (w01, mu01, pair.g_mhz * fixed.mu12 * std::f64::consts::SQRT_2),
    };
    let (weights, _, _) = decompose(&freq, Some(&weight), period_ns, k..=k, false);
    Ok((scale * weights[&k].norm()).abs())
}

/// Modulation frequency activating the requested gate resonance, MHz.
///
/// With the k = +-2 sideband doing the work when parked at the sweet spot:
/// iSWAP at half the average detuning `|f01_bar_T - f01_F| / 2`, CZ02 at
/// `(detuning + eta_bar_T) / 2`, CZ20 at `(detuning - eta_F) / 2`.
pub fn resonance_frequency(pair: &PairSystem, pulse: &FluxPulse, gate: GateKind) -> Result<f64> {
    let sb = sideband_weights(&pair.tunable, pulse, -2..=2)?;
    let fixed = crate::device::transmon_levels(&pair.fixed, 0.0)?;
    let detuning = (sb.f01_bar_mhz - fixed.f01_mhz).abs();
    Ok(match gate {
        GateKind::ISwap => detuning / 2.0,
        GateKind::Cz02 => (detuning + sb.eta_bar_mhz) / 2.0,
        GateKind::Cz20 => (detuning - fixed.eta_mhz) / 2.0,
    })
}
