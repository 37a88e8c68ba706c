//! Multi-die device description: four eight-qubit dies, inter-chip pair
//! list, per-qubit coherence and readout parameters.
//!
//! The JSON schema (`DeviceConfig`) carries explicit units in its key names
//! and rejects unknown fields. A validated [`DeviceTopology`] enforces the
//! layout invariants: pairs connect adjacent dies only, never two qubits on
//! the same die, and always one fixed plus one tunable qubit.

use serde::{Deserialize, Serialize};

use super::{
    spec_from_targets, DesignClass, DeviceError, Result, TransmonKind, TransmonSpec,
};

/// Current device description schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitNoise {
    /// Relaxation time in us.
    pub t1_us: f64,
    /// Dephasing time in us.
    pub t2_us: f64,
    /// Relaxation time while the AC flux modulation is applied.
    pub t1_mod_us: f64,
    /// Dephasing time while the AC flux modulation is applied.
    pub t2_mod_us: f64,
}

impl QubitNoise {
    fn validate(&self, label: &str) -> Result<()> {
        for (t1, t2, what) in [
            (self.t1_us, self.t2_us, "static"),
            (self.t1_mod_us, self.t2_mod_us, "under-modulation"),
        ] {
            if t1 <= 0.0 || t2 <= 0.0 {
                return Err(DeviceError::InvalidTopology(format!(
                    "{label}: {what} coherence times must be positive"
                )));
            }
            if t2 > 2.0 * t1 {
                return Err(DeviceError::InvalidTopology(format!(
                    "{label}: unphysical {what} noise, T2 = {t2} us > 2*T1 = {} us",
                    2.0 * t1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitRecord {
    pub spec: TransmonSpec,
    pub noise: QubitNoise,
    /// Symmetric readout misclassification probability.
    pub readout_error: f64,
    /// Readout resonator frequency; ingested for completeness, unused by the
    /// simulation.
    pub f_ro_mhz: Option<f64>,
    /// Qubit-resonator dispersive shift; ingested, unused.
    pub chi_q_ro_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DieRecord {
    pub letter: char,
    pub qubits: Vec<QubitRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    /// Qubit labels, lower die letter first (e.g. ("A0", "B7")).
    pub qubits: (String, String),
    /// Bare coupling rate g/2pi in MHz, if specified directly.
    pub g_mhz: Option<f64>,
    /// Post-bonding indium bump height in um, if the coupling is to be
    /// derived from the height model.
    pub bump_height_um: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceTopology {
    pub dies: Vec<DieRecord>,
    pub pairs: Vec<PairRecord>,
}

impl DeviceTopology {
    pub fn qubit(&self, label: &str) -> Result<&QubitRecord> {
        let (letter, index) = split_label(label)?;
        let die = self
            .dies
            .iter()
            .find(|d| d.letter == letter)
            .ok_or_else(|| DeviceError::InvalidTopology(format!("no die '{letter}'")))?;
        die.qubits
            .get(index)
            .ok_or_else(|| DeviceError::InvalidTopology(format!("no qubit '{label}'")))
    }

    /// Look up a pair by "A0-B7"-style label (order-insensitive).
    pub fn pair(&self, label: &str) -> Result<&PairRecord> {
        let (a, b) = label
            .split_once('-')
            .ok_or_else(|| DeviceError::InvalidTopology(format!("malformed pair label '{label}'")))?;
        self.pairs
            .iter()
            .find(|p| {
                (p.qubits.0 == a && p.qubits.1 == b) || (p.qubits.0 == b && p.qubits.1 == a)
            })
            .ok_or_else(|| DeviceError::InvalidTopology(format!("no pair '{label}'")))
    }

    /// Labels of (fixed, tunable) qubits of a pair.
    pub fn fixed_tunable(&self, pair: &PairRecord) -> Result<(String, String)> {
        let qa = self.qubit(&pair.qubits.0)?;
        let qb = self.qubit(&pair.qubits.1)?;
        match (qa.spec.kind, qb.spec.kind) {
            (TransmonKind::Fixed, TransmonKind::Tunable) => {
                Ok((pair.qubits.0.clone(), pair.qubits.1.clone()))
            }
            (TransmonKind::Tunable, TransmonKind::Fixed) => {
                Ok((pair.qubits.1.clone(), pair.qubits.0.clone()))
            }
            _ => Err(DeviceError::InvalidTopology(format!(
                "pair {}-{} is not one fixed + one tunable qubit",
                pair.qubits.0, pair.qubits.1
            ))),
        }
    }

    /// Fill in missing pair couplings from bump heights via `g_of_h`.
    pub fn resolve_couplings(&mut self, g_of_h: impl Fn(f64) -> f64) -> Result<()> {
        for p in &mut self.pairs {
            if p.g_mhz.is_none() {
                let h = p.bump_height_um.ok_or_else(|| {
                    DeviceError::InvalidTopology(format!(
                        "pair {}-{} has neither g_MHz nor bump_height_um",
                        p.qubits.0, p.qubits.1
                    ))
                })?;
                p.g_mhz = Some(g_of_h(h));
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.dies.len() != 4 {
            return Err(DeviceError::InvalidTopology(format!(
                "expected 4 dies, got {}",
                self.dies.len()
            )));
        }
        for (i, die) in self.dies.iter().enumerate() {
            let expected = (b'A' + i as u8) as char;
            if die.letter != expected {
                return Err(DeviceError::InvalidTopology(format!(
                    "die {i} must be lettered '{expected}', got '{}'",
                    die.letter
                )));
            }
            if die.qubits.len() != 8 {
                return Err(DeviceError::InvalidTopology(format!(
                    "die {} must carry 8 qubits, got {}",
                    die.letter,
                    die.qubits.len()
                )));
            }
            for (j, q) in die.qubits.iter().enumerate() {
                let expected = format!("{}{}", die.letter, j);
                if q.spec.label != expected {
                    return Err(DeviceError::InvalidTopology(format!(
                        "qubit at {expected} is labelled '{}'",
                        q.spec.label
                    )));
                }
                q.noise.validate(&q.spec.label)?;
                if !(0.0..=0.5).contains(&q.readout_error) {
                    return Err(DeviceError::InvalidTopology(format!(
                        "{expected}: readout error {} outside [0, 0.5]",
                        q.readout_error
                    )));
                }
            }
        }
        for p in &self.pairs {
            let (la, _) = split_label(&p.qubits.0)?;
            let (lb, _) = split_label(&p.qubits.1)?;
            if la == lb {
                return Err(DeviceError::InvalidTopology(format!(
                    "pair {}-{} connects qubits on the same die",
                    p.qubits.0, p.qubits.1
                )));
            }
            if (la as i8 - lb as i8).abs() != 1 {
                return Err(DeviceError::InvalidTopology(format!(
                    "pair {}-{} does not connect adjacent dies",
                    p.qubits.0, p.qubits.1
                )));
            }
            self.fixed_tunable(p)?;
            if p.g_mhz.is_none() && p.bump_height_um.is_none() {
                return Err(DeviceError::InvalidTopology(format!(
                    "pair {}-{} has neither g_MHz nor bump_height_um",
                    p.qubits.0, p.qubits.1
                )));
            }
        }
        Ok(())
    }
}

fn split_label(label: &str) -> Result<(char, usize)> {
    let mut chars = label.chars();
    let letter = chars
        .next()
        .ok_or_else(|| DeviceError::InvalidTopology("empty qubit label".into()))?;
    let index: usize = chars
        .as_str()
        .parse()
        .map_err(|_| DeviceError::InvalidTopology(format!("malformed qubit label '{label}'")))?;
    Ok((letter, index))
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub schema_version: u32,
    pub dies: Vec<DieConfig>,
    pub pairs: Vec<PairConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DieConfig {
    pub letter: String,
    pub qubits: Vec<QubitConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub label: String,
    pub kind: TransmonKind,
    pub design_class: DesignClass,
    /// Frequency targets; solved to junction energies at load time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetsConfig>,
    /// Junction energies, given directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<EnergiesConfig>,
    #[serde(rename = "T1_us")]
    pub t1_us: f64,
    #[serde(rename = "T2_us")]
    pub t2_us: f64,
    /// Defaults to T1_us when absent.
    #[serde(rename = "T1_mod_us", default, skip_serializing_if = "Option::is_none")]
    pub t1_mod_us: Option<f64>,
    /// Defaults to T2_us when absent.
    #[serde(rename = "T2_mod_us", default, skip_serializing_if = "Option::is_none")]
    pub t2_mod_us: Option<f64>,
    #[serde(default)]
    pub readout_error: f64,
    #[serde(rename = "f_RO_MHz", default, skip_serializing_if = "Option::is_none")]
    pub f_ro_mhz: Option<f64>,
    #[serde(rename = "chi_q_RO_MHz", default, skip_serializing_if = "Option::is_none")]
    pub chi_q_ro_mhz: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsConfig {
    #[serde(rename = "f01_max_MHz")]
    pub f01_max_mhz: f64,
    #[serde(rename = "f01_min_MHz")]
    pub f01_min_mhz: f64,
    #[serde(rename = "eta_MHz")]
    pub eta_mhz: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergiesConfig {
    #[serde(rename = "E_J_sum_GHz")]
    pub e_j_sum_ghz: f64,
    #[serde(rename = "d_asym")]
    pub d_asym: f64,
    #[serde(rename = "E_C_GHz")]
    pub e_c_ghz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub qubits: [String; 2],
    #[serde(rename = "g_MHz", default, skip_serializing_if = "Option::is_none")]
    pub g_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump_height_um: Option<f64>,
}

impl DeviceTopology {
    /// Build and validate a topology from its JSON-facing description.
    pub fn from_config(cfg: &DeviceConfig) -> Result<Self> {
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(DeviceError::InvalidTopology(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        // Dies are nominally identical; cache target solves by target tuple.
        let mut solved: std::collections::HashMap<(u64, u64, u64, TransmonKind), TransmonSpec> =
            std::collections::HashMap::new();
        let mut dies = Vec::with_capacity(cfg.dies.len());
        for die in &cfg.dies {
            let letter = die
                .letter
                .chars()
                .next()
                .ok_or_else(|| DeviceError::InvalidTopology("empty die letter".into()))?;
            let mut qubits = Vec::with_capacity(die.qubits.len());
            for q in &die.qubits {
                let spec = match (&q.targets, &q.energies) {
                    (Some(t), None) => {
                        let key = (
                            t.f01_max_mhz.to_bits(),
                            t.f01_min_mhz.to_bits(),
                            t.eta_mhz.to_bits(),
                            q.kind,
                        );
                        match solved.get(&key) {
                            Some(s) => {
                                let mut s = s.clone();
                                s.label = q.label.clone();
                                s.design_class = q.design_class;
                                s
                            }
                            None => {
                                let s = spec_from_targets(
                                    t.f01_max_mhz,
                                    t.f01_min_mhz,
                                    t.eta_mhz,
                                    q.kind,
                                    q.label.clone(),
                                    q.design_class,
                                )?;
                                solved.insert(key, s.clone());
                                s
                            }
                        }
                    }
                    (None, Some(e)) => TransmonSpec::new(
                        q.kind,
                        e.e_j_sum_ghz,
                        e.d_asym,
                        e.e_c_ghz,
                        q.label.clone(),
                        q.design_class,
                    )?,
                    _ => {
                        return Err(DeviceError::InvalidTopology(format!(
                            "{}: exactly one of `targets` or `energies` must be given",
                            q.label
                        )))
                    }
                };
                qubits.push(QubitRecord {
                    spec,
                    noise: QubitNoise {
                        t1_us: q.t1_us,
                        t2_us: q.t2_us,
                        t1_mod_us: q.t1_mod_us.unwrap_or(q.t1_us),
                        t2_mod_us: q.t2_mod_us.unwrap_or(q.t2_us),
                    },
                    readout_error: q.readout_error,
                    f_ro_mhz: q.f_ro_mhz,
                    chi_q_ro_mhz: q.chi_q_ro_mhz,
                });
            }
            dies.push(DieRecord { letter, qubits });
        }
        let pairs = cfg
            .pairs
            .iter()
            .map(|p| PairRecord {
                qubits: (p.qubits[0].clone(), p.qubits[1].clone()),
                g_mhz: p.g_mhz,
                bump_height_um: p.bump_height_um,
            })
            .collect();
        let topo = DeviceTopology { dies, pairs };
        topo.validate()?;
        Ok(topo)
    }

    /// Parse and validate a topology from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: DeviceConfig = serde_json::from_str(text)
            .map_err(|e| DeviceError::InvalidTopology(format!("JSON schema error: {e}")))?;
        Self::from_config(&cfg)
    }
}

// ---------------------------------------------------------------------------
// Reference device
// ---------------------------------------------------------------------------

/// Design targets per class: (kind, f01_max, f01_min, eta, f_RO, chi) in MHz.
pub const DESIGN_CLASSES: [(DesignClass, TransmonKind, f64, f64, f64, f64, f64); 4] = [
    (DesignClass::I, TransmonKind::Fixed, 3654.0, 3654.0, -190.0, 7232.0, 0.80),
    (DesignClass::II, TransmonKind::Tunable, 5066.0, 4266.0, -200.0, 7476.0, 0.81),
    (DesignClass::III, TransmonKind::Fixed, 3714.0, 3714.0, -190.0, 7273.0, 0.85),
    (DesignClass::IV, TransmonKind::Tunable, 4946.0, 4146.0, -200.0, 7425.0, 0.81),
];

/// Class of each qubit position within a die. Positions 0..4 pair with the
/// left-neighbor die, 4..8 with the right neighbor; pair `X_i - Y_{7-i}`
/// is always I-IV or II-III (one fixed + one tunable).
pub const CLASS_LAYOUT: [DesignClass; 8] = [
    DesignClass::I,
    DesignClass::II,
    DesignClass::III,
    DesignClass::IV,
    DesignClass::I,
    DesignClass::II,
    DesignClass::III,
    DesignClass::IV,
];

/// Default coherence times in us: fixed (T1, T2), tunable (T1, T2).
pub const DEFAULT_T1_T2_FIXED_US: (f64, f64) = (73.0, 43.0);
pub const DEFAULT_T1_T2_TUNABLE_US: (f64, f64) = (18.0, 15.0);

/// Per-pair reference characterization: bump heights measured post-shearing,
/// couplings measured from dispersive shifts and simulated from the heights,
/// tunable-qubit coherence under modulation and CZ benchmark results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCharacterization {
    pub pair: &'static str,
    pub bump_height_um: f64,
    pub bump_height_err_um: f64,
    pub g_meas_mhz: f64,
    pub g_meas_err_mhz: f64,
    pub g_sim_mhz: f64,
    pub g_sim_err_mhz: f64,
    /// Tunable-qubit (T1, T2) under modulation in us; None for the two pairs
    /// whose gate frequency fell outside the control band.
    pub t_mod_us: Option<(f64, f64)>,
    /// (coherence-limited fidelity %, measured CZ fidelity %, gate time ns).
    pub cz_benchmark: Option<(f64, f64, f64)>,
}

pub const REFERENCE_PAIRS: [PairCharacterization; 12] = [
    PairCharacterization { pair: "A0-B7", bump_height_um: 2.18, bump_height_err_um: 0.13, g_meas_mhz: 13.26, g_meas_err_mhz: 0.59, g_sim_mhz: 16.86, g_sim_err_mhz: 1.05, t_mod_us: Some((24.57, 8.98)), cz_benchmark: Some((98.58, 98.34, 152.0)) },
    PairCharacterization { pair: "A1-B6", bump_height_um: 2.03, bump_height_err_um: 0.08, g_meas_mhz: 14.89, g_meas_err_mhz: 1.00, g_sim_mhz: 18.44, g_sim_err_mhz: 0.79, t_mod_us: Some((9.35, 1.59)), cz_benchmark: Some((92.07, 90.09, 148.0)) },
    PairCharacterization { pair: "A2-B5", bump_height_um: 1.96, bump_height_err_um: 0.18, g_meas_mhz: 15.72, g_meas_err_mhz: 0.96, g_sim_mhz: 19.32, g_sim_err_mhz: 1.96, t_mod_us: None, cz_benchmark: None },
    PairCharacterization { pair: "A3-B4", bump_height_um: 1.94, bump_height_err_um: 0.29, g_meas_mhz: 16.46, g_meas_err_mhz: 1.07, g_sim_mhz: 19.60, g_sim_err_mhz: 3.15, t_mod_us: Some((11.56, 1.07)), cz_benchmark: Some((88.84, 82.70, 164.0)) },
    PairCharacterization { pair: "B0-C7", bump_height_um: 1.95, bump_height_err_um: 0.27, g_meas_mhz: 14.34, g_meas_err_mhz: 0.44, g_sim_mhz: 19.42, g_sim_err_mhz: 2.89, t_mod_us: Some((26.67, 2.74)), cz_benchmark: Some((96.74, 96.04, 128.0)) },
    PairCharacterization { pair: "B1-C6", bump_height_um: 1.89, bump_height_err_um: 0.18, g_meas_mhz: 14.91, g_meas_err_mhz: 0.62, g_sim_mhz: 20.11, g_sim_err_mhz: 2.12, t_mod_us: None, cz_benchmark: None },
    PairCharacterization { pair: "B2-C5", bump_height_um: 1.69, bump_height_err_um: 0.14, g_meas_mhz: 15.40, g_meas_err_mhz: 0.54, g_sim_mhz: 22.62, g_sim_err_mhz: 2.07, t_mod_us: Some((4.59, 1.66)), cz_benchmark: Some((88.17, 84.63, 176.0)) },
    PairCharacterization { pair: "B3-C4", bump_height_um: 1.76, bump_height_err_um: 0.08, g_meas_mhz: 16.63, g_meas_err_mhz: 1.81, g_sim_mhz: 21.29, g_sim_err_mhz: 1.04, t_mod_us: Some((7.16, 1.36)), cz_benchmark: Some((97.40, 97.47, 116.0)) },
    PairCharacterization { pair: "C0-D7", bump_height_um: 1.77, bump_height_err_um: 0.04, g_meas_mhz: 14.54, g_meas_err_mhz: 0.87, g_sim_mhz: 21.11, g_sim_err_mhz: 0.51, t_mod_us: Some((1.52, 2.75)), cz_benchmark: Some((90.81, 87.08, 284.0)) },
    PairCharacterization { pair: "C1-D6", bump_height_um: 1.69, bump_height_err_um: 0.01, g_meas_mhz: 18.94, g_meas_err_mhz: 0.39, g_sim_mhz: 22.29, g_sim_err_mhz: 0.07, t_mod_us: Some((14.51, 2.52)), cz_benchmark: Some((96.92, 97.26, 108.0)) },
    PairCharacterization { pair: "C2-D5", bump_height_um: 1.55, bump_height_err_um: 0.01, g_meas_mhz: 18.88, g_meas_err_mhz: 1.70, g_sim_mhz: 24.52, g_sim_err_mhz: 0.16, t_mod_us: Some((7.49, 1.93)), cz_benchmark: Some((77.25, 80.68, 468.0)) },
    PairCharacterization { pair: "C3-D4", bump_height_um: 1.60, bump_height_err_um: 0.11, g_meas_mhz: 18.92, g_meas_err_mhz: 0.43, g_sim_mhz: 23.70, g_sim_err_mhz: 1.66, t_mod_us: Some((30.72, 5.09)), cz_benchmark: Some((98.20, 96.78, 116.0)) },
];

/// The reference device: four identical dies at the design Hamiltonian, the
/// measured pair couplings, default coherence times with under-modulation
/// values where characterized, and zero readout error (scenarios override).
pub fn reference_device() -> DeviceConfig {
    let mut dies = Vec::new();
    for die_idx in 0..4u8 {
        let letter = (b'A' + die_idx) as char;
        let mut qubits = Vec::new();
        for pos in 0..8usize {
            let class = CLASS_LAYOUT[pos];
            let &(_, kind, f01_max, f01_min, eta, f_ro, chi) = DESIGN_CLASSES
                .iter()
                .find(|c| c.0 == class)
                .expect("class present");
            let label = format!("{letter}{pos}");
            let (t1, t2) = match kind {
                TransmonKind::Fixed => DEFAULT_T1_T2_FIXED_US,
                TransmonKind::Tunable => DEFAULT_T1_T2_TUNABLE_US,
            };
            // Under-modulation coherence of the tunable qubit, where known.
            let t_mod = REFERENCE_PAIRS
                .iter()
                .find(|c| {
                    kind == TransmonKind::Tunable
                        && (c.pair.starts_with(&label) || c.pair.ends_with(&label))
                })
                .and_then(|c| c.t_mod_us);
            qubits.push(QubitConfig {
                label,
                kind,
                design_class: class,
                targets: Some(TargetsConfig {
                    f01_max_mhz: f01_max,
                    f01_min_mhz: f01_min,
                    eta_mhz: eta,
                }),
                energies: None,
                t1_us: t1,
                t2_us: t2,
                t1_mod_us: t_mod.map(|t| t.0),
                t2_mod_us: t_mod.map(|t| t.1),
                readout_error: 0.0,
                f_ro_mhz: Some(f_ro),
                chi_q_ro_mhz: Some(chi),
            });
        }
        dies.push(DieConfig { letter: letter.to_string(), qubits });
    }
    let pairs = REFERENCE_PAIRS
        .iter()
        .map(|c| {
            let (a, b) = c.pair.split_once('-').expect("pair label");
            PairConfig {
                qubits: [a.to_string(), b.to_string()],
                g_mhz: Some(c.g_meas_mhz),
                bump_height_um: Some(c.bump_height_um),
            }
        })
        .collect();
    DeviceConfig { schema_version: SCHEMA_VERSION, dies, pairs }
}
