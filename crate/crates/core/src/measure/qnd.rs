//! Teleportation-based quantum nondemolition (QND) gate.
//!
//! The photon in the watched path meets one photon of a fresh `φ+` ancilla
//! pair in a Bell measurement; on a heralded outcome the other ancilla photon
//! carries the watched photon's polarization into the output path. A
//! heralded outcome requires exactly one photon in the watched path, so the
//! gate detects presence without reading the polarization.
//!
//! Two models of the internal Bell measurement are available: an exact
//! projection onto Bell states, and a 50:50 beam splitter followed by a
//! coincidence between two polarization-insensitive detectors (which selects
//! the antisymmetric Bell component). Each heralded outcome gets the
//! polarization correction that makes the teleported state exact; the
//! correction is calibrated once, when the gate is built, by sending `|H>`
//! and `|V>` through it.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::detector::merge_residuals;
use super::{CoincidencePattern, DetectorId, OutcomeBranch};
use crate::elements::{bs50_with, hadamard, pbs, polarizer, BsConvention};
use crate::error::{Error, Result};
use crate::fock::{registry, FockBasisVector, ModeId, ModeLinearMap, PhotonicState, Polarization};
use crate::protocols::states::{make_bell, BellLabel};
use crate::TOLERANCE;

/// Which Bell outcomes count as success.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QndVariant {
    /// Only `φ+` heralds success (probability 1/4 per incoming photon).
    #[default]
    OneBell,
    /// `φ+` and `φ-` both herald success (probability 1/2), the latter with
    /// a phase correction on the output photon.
    TwoBell,
}

impl QndVariant {
    /// Success probability given exactly one photon in the watched path.
    pub fn success_probability(self) -> f64 {
        match self {
            QndVariant::OneBell => 0.25,
            QndVariant::TwoBell => 0.5,
        }
    }
}

impl std::fmt::Display for QndVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QndVariant::OneBell => "one_bell",
            QndVariant::TwoBell => "two_bell",
        })
    }
}

impl std::str::FromStr for QndVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_bell" => Ok(QndVariant::OneBell),
            "two_bell" => Ok(QndVariant::TwoBell),
            _ => Err(Error::InvalidParameter(format!("unknown QND variant `{s}`"))),
        }
    }
}

/// How the internal Bell measurement is modeled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QndModel {
    #[default]
    Projection,
    /// 50:50 beam splitter and a two-detector coincidence. Supports only the
    /// single-outcome variant.
    Interferometer { convention: BsConvention },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QndResult {
    pub success: bool,
    pub heralds: CoincidencePattern,
    pub probability: f64,
    pub teleported: PhotonicState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QndConfig {
    pub watched: String,
    pub output: String,
    /// Path of the ancilla photon that meets the watched one.
    pub ancilla: String,
    pub variant: QndVariant,
    #[serde(default)]
    pub model: QndModel,
    /// Herald detectors of the `φ+` outcome; the `φ-` outcome of the
    /// two-outcome variant uses the same names primed.
    pub heralds: [DetectorId; 2],
}

impl QndConfig {
    pub fn new(watched: &str, output: &str, variant: QndVariant) -> Self {
        Self {
            watched: watched.to_string(),
            output: output.to_string(),
            ancilla: format!("{watched}~src"),
            variant,
            model: QndModel::default(),
            heralds: ["D1".into(), "D2".into()],
        }
    }

    pub fn with_model(mut self, model: QndModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_heralds(mut self, first: impl Into<DetectorId>, second: impl Into<DetectorId>) -> Self {
        self.heralds = [first.into(), second.into()];
        self
    }

    pub fn with_ancilla(mut self, ancilla: &str) -> Self {
        self.ancilla = ancilla.to_string();
        self
    }

    pub fn build(self) -> Result<Qnd> {
        Qnd::new(self)
    }
}

fn primed(d: &DetectorId) -> DetectorId {
    DetectorId::new(format!("{d}'"))
}

#[derive(Clone, Debug, PartialEq)]
struct Outcome {
    heralds: CoincidencePattern,
    bra: PhotonicState,
    correction: ModeLinearMap,
}

/// A calibrated QND gate.
#[derive(Clone, Debug, PartialEq)]
pub struct Qnd {
    config: QndConfig,
    ancilla_pair: PhotonicState,
    outcomes: Vec<Outcome>,
}

impl Qnd {
    pub fn new(config: QndConfig) -> Result<Self> {
        let (w, o, a) = (config.watched.as_str(), config.output.as_str(), config.ancilla.as_str());
        if w == o {
            return Err(Error::QndSameLabel(w.to_string()));
        }
        if a == w || a == o {
            return Err(Error::DuplicateLabel(a.to_string()));
        }
        if config.heralds[0] == config.heralds[1] {
            return Err(Error::DuplicateDetector(config.heralds[0].to_string()));
        }
        let both = CoincidencePattern::new(config.heralds.clone());
        let candidates: Vec<(CoincidencePattern, PhotonicState)> = match (config.model, config.variant) {
            (QndModel::Projection, variant) => {
                let mut c = vec![(both, make_bell(BellLabel::PhiPlus, w, a)?)];
                if variant == QndVariant::TwoBell {
                    let alt = CoincidencePattern::new(config.heralds.iter().map(primed));
                    c.push((alt, make_bell(BellLabel::PhiMinus, w, a)?));
                }
                c
            }
            (QndModel::Interferometer { .. }, QndVariant::TwoBell) => {
                return Err(Error::InvalidParameter(
                    "the interferometric QND model supports only the one_bell variant".into(),
                ))
            }
            (QndModel::Interferometer { .. }, QndVariant::OneBell) => {
                let (p, q) = Self::bs_ports(w);
                let mut c = Vec::new();
                for x in Polarization::BOTH {
                    for y in Polarization::BOTH {
                        let ket = FockBasisVector::new().with(ModeId::new(&p, x), 1).with(ModeId::new(&q, y), 1);
                        c.push((both.clone(), PhotonicState::basis(registry(&[&p, &q]), &ket)?));
                    }
                }
                c
            }
        };
        let mut qnd = Self { ancilla_pair: make_bell(BellLabel::PhiPlus, a, o)?, config, outcomes: Vec::new() };
        for (heralds, bra) in candidates {
            if let Some(correction) = qnd.calibrate(&bra)? {
                qnd.outcomes.push(Outcome { heralds, bra, correction });
            }
        }
        Ok(qnd)
    }

    fn bs_ports(watched: &str) -> (String, String) {
        (format!("{watched}~p"), format!("{watched}~q"))
    }

    pub fn config(&self) -> &QndConfig {
        &self.config
    }

    /// Every herald pattern the gate can report on success.
    pub fn success_heralds(&self) -> Vec<CoincidencePattern> {
        let mut v: Vec<CoincidencePattern> = self.outcomes.iter().map(|o| o.heralds.clone()).collect();
        v.dedup();
        v
    }

    /// Adds the ancilla pair and runs the optical part of the Bell measurement.
    fn joint(&self, state: &PhotonicState) -> Result<PhotonicState> {
        let joint = state.tensor(&self.ancilla_pair)?;
        match self.config.model {
            QndModel::Projection => Ok(joint),
            QndModel::Interferometer { convention } => {
                let (p, q) = Self::bs_ports(&self.config.watched);
                joint.apply_map(&bs50_with(&self.config.watched, &self.config.ancilla, &p, &q, convention)?)
            }
        }
    }

    /// The correction that turns this outcome's action on the watched
    /// polarization into the identity, or `None` if the outcome never fires.
    fn calibrate(&self, bra: &PhotonicState) -> Result<Option<ModeLinearMap>> {
        let out = [ModeId::h(&self.config.output), ModeId::v(&self.config.output)];
        let zero = Complex64::new(0.0, 0.0);
        let mut k = DMatrix::from_element(2, 2, zero);
        for (col, p) in Polarization::BOTH.into_iter().enumerate() {
            let probe = PhotonicState::photon(ModeId::new(&self.config.watched, p));
            let r = self.joint(&probe)?.partial_project(bra)?;
            for (row, m) in out.iter().enumerate() {
                k[(row, col)] = r.amplitude(&FockBasisVector::new().with(m.clone(), 1));
            }
        }
        let s2 = k.iter().map(|a| a.norm_sqr()).sum::<f64>() / 2.0;
        if s2 < 1e-20 {
            return Ok(None);
        }
        let gram = k.adjoint() * &k;
        let dev = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (gram[(i, j)] - if i == j { Complex64::new(s2, 0.0) } else { zero }).norm())
            .fold(0.0, f64::max);
        if dev > TOLERANCE {
            return Err(Error::QndNotUnitary);
        }
        let correction = k.adjoint().map(|a| a / s2.sqrt());
        ModeLinearMap::new(out.to_vec(), out.to_vec(), correction).map(Some)
    }

    /// Unnormalized, corrected success components of `state`, one per
    /// distinguishable detection record, with their herald patterns. Their
    /// squared norms are the absolute success probabilities.
    pub fn success_components(&self, state: &PhotonicState) -> Result<Vec<(CoincidencePattern, PhotonicState)>> {
        let joint = self.joint(state)?;
        let mut out = Vec::new();
        for o in &self.outcomes {
            let sub = joint.partial_project(&o.bra)?;
            if sub.is_empty() {
                continue;
            }
            out.push((o.heralds.clone(), sub.apply_map(&o.correction)?));
        }
        Ok(out)
    }

    /// All outcomes: one success entry per herald pattern that can occur, then
    /// the lumped failure entry. Probabilities sum to one.
    pub fn apply(&self, state: &PhotonicState) -> Result<Vec<(QndResult, OutcomeBranch)>> {
        let norm = state.norm_squared();
        if norm <= 0.0 {
            return Err(Error::InvalidParameter("QND input state is empty".into()));
        }
        let mut grouped: BTreeMap<CoincidencePattern, Vec<(f64, PhotonicState)>> = BTreeMap::new();
        for (h, sub) in self.success_components(state)? {
            grouped.entry(h).or_default().push((sub.norm_squared() / norm, sub));
        }
        let rest: Vec<ModeId> = state
            .modes()
            .iter()
            .filter(|m| m.spatial() != self.config.watched)
            .cloned()
            .chain(registry(&[&self.config.output]))
            .collect();
        let mixed = PhotonicState::empty(rest)?;
        let mut results = Vec::new();
        let mut total = 0.0;
        for (heralds, parts) in grouped {
            let probability: f64 = parts.iter().map(|(p, _)| p).sum();
            total += probability;
            let teleported = merge_residuals(&parts).unwrap_or_else(|| mixed.clone());
            let branch = OutcomeBranch {
                pattern: heralds.clone(),
                counts: heralds.fired().iter().map(|d| (d.clone(), 1)).collect(),
                probability,
                residual: teleported.clone(),
            };
            results.push((QndResult { success: true, heralds, probability, teleported }, branch));
        }
        let failure = (1.0 - total).max(0.0);
        results.push((
            QndResult {
                success: false,
                heralds: CoincidencePattern::default(),
                probability: failure,
                teleported: mixed.clone(),
            },
            OutcomeBranch {
                pattern: CoincidencePattern::default(),
                counts: BTreeMap::new(),
                probability: failure,
                residual: mixed,
            },
        ));
        Ok(results)
    }
}

/// Runs a projection-model QND with default herald names and ancilla path.
pub fn qnd_teleport(
    state: &PhotonicState,
    watched: &str,
    output: &str,
    variant: QndVariant,
) -> Result<Vec<(QndResult, OutcomeBranch)>> {
    QndConfig::new(watched, output, variant).build()?.apply(state)
}

/// Mechanical cross-checks of the QND's internal Bell measurement for a
/// single photon `alpha|H> + beta|V>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QndCrossCheck {
    /// Beam-splitter coincidence model: success probability and fidelity.
    pub hom_success: f64,
    pub hom_fidelity: f64,
    /// PBS, a Hadamard wave plate per output and polarization-resolving
    /// detection, accepting the two `φ+` signatures: probability and the
    /// worst fidelity over accepted records.
    pub pbs_success: f64,
    pub pbs_fidelity: f64,
    /// PBS followed by a 45-degree polarizer on each output: probability that
    /// both photons are transmitted.
    pub polarizer_success: f64,
}

pub fn interferometric_cross_check(
    alpha: Complex64,
    beta: Complex64,
    convention: BsConvention,
) -> Result<QndCrossCheck> {
    let (w, anc, out, p, q) = ("w", "w~src", "o", "w~p", "w~q");
    let chi = PhotonicState::polarized_photon(w, alpha, beta)?
        .normalized()
        .ok_or_else(|| Error::InvalidParameter("zero polarization vector".into()))?;
    let target = PhotonicState::polarized_photon(out, alpha, beta)?;

    let hom = QndConfig::new(w, out, QndVariant::OneBell)
        .with_model(QndModel::Interferometer { convention })
        .build()?
        .apply(&chi)?;
    let (hom_success, hom_fidelity) = hom
        .iter()
        .find(|(r, _)| r.success)
        .map(|(r, _)| Ok::<_, Error>((r.probability, target.fidelity(&r.teleported)?)))
        .transpose()?
        .unwrap_or((0.0, 0.0));

    let after_pbs = chi.tensor(&make_bell(BellLabel::PhiPlus, anc, out)?)?.apply_map(&pbs(w, anc, p, q)?)?;
    // one photon in each output, both with polarization `pol`
    let accepted = |pol: Polarization| FockBasisVector::new().with(ModeId::new(p, pol), 1).with(ModeId::new(q, pol), 1);

    let resolved = after_pbs.apply_map(&hadamard(p))?.apply_map(&hadamard(q))?;
    let mut pbs_success = 0.0;
    let mut pbs_fidelity: f64 = 1.0;
    for pol in Polarization::BOTH {
        let bra = PhotonicState::basis(registry(&[p, q]), &accepted(pol))?;
        let sub = resolved.partial_project(&bra)?;
        pbs_success += sub.norm_squared();
        pbs_fidelity = pbs_fidelity.min(target.fidelity(&sub)?);
    }

    let filtered = after_pbs
        .apply_map(&polarizer(p, std::f64::consts::FRAC_PI_4).analyzer_map())?
        .apply_map(&polarizer(q, std::f64::consts::FRAC_PI_4).analyzer_map())?;
    let bra = PhotonicState::basis(registry(&[p, q]), &accepted(Polarization::H))?;
    let polarizer_success = filtered.partial_project(&bra)?.norm_squared();

    Ok(QndCrossCheck { hom_success, hom_fidelity, pbs_success, pbs_fidelity, polarizer_success })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(a: f64, b: (f64, f64)) -> PhotonicState {
        PhotonicState::polarized_photon("c1", Complex64::new(a, 0.0), Complex64::new(b.0, b.1))
            .unwrap()
            .normalized()
            .unwrap()
    }

    fn success(results: &[(QndResult, OutcomeBranch)]) -> f64 {
        results.iter().filter(|(r, _)| r.success).map(|(r, _)| r.probability).sum()
    }

    #[test]
    fn one_bell_teleports_with_quarter_probability() {
        let input = chi(0.6, (0.3, 0.74));
        let target =
            PhotonicState::polarized_photon("e1", Complex64::new(0.6, 0.0), Complex64::new(0.3, 0.74)).unwrap();
        let res = qnd_teleport(&input, "c1", "e1", QndVariant::OneBell).unwrap();
        assert!((success(&res) - 0.25).abs() < 1e-12);
        let (ok, branch) = res.iter().find(|(r, _)| r.success).unwrap();
        assert_eq!(ok.heralds.to_string(), "D1+D2");
        assert_eq!(branch.pattern, ok.heralds);
        assert!((target.fidelity(&ok.teleported).unwrap() - 1.0).abs() < 1e-12);
        let total: f64 = res.iter().map(|(r, _)| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_bell_doubles_success() {
        let input = chi(0.8, (0.0, 0.6));
        let target = PhotonicState::polarized_photon("e1", Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)).unwrap();
        let res = qnd_teleport(&input, "c1", "e1", QndVariant::TwoBell).unwrap();
        assert!((success(&res) - 0.5).abs() < 1e-12);
        let heralds: Vec<String> = res.iter().filter(|(r, _)| r.success).map(|(r, _)| r.heralds.to_string()).collect();
        assert_eq!(heralds, ["D1+D2", "D1'+D2'"]);
        for (r, _) in res.iter().filter(|(r, _)| r.success) {
            assert!((target.fidelity(&r.teleported).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_never_heralds() {
        let vac = PhotonicState::vacuum(registry(&["c1"])).unwrap();
        let res = qnd_teleport(&vac, "c1", "e1", QndVariant::OneBell).unwrap();
        assert_eq!(success(&res), 0.0);
        assert_eq!(res.len(), 1);
        assert!((res[0].0.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_photons_never_herald() {
        let two = PhotonicState::basis(
            registry(&["c1"]),
            &FockBasisVector::new().with(ModeId::h("c1"), 1).with(ModeId::v("c1"), 1),
        )
        .unwrap();
        let res = qnd_teleport(&two, "c1", "e1", QndVariant::TwoBell).unwrap();
        assert!(success(&res) < 1e-15);
    }

    #[test]
    fn same_label_is_rejected() {
        let err = qnd_teleport(&chi(1.0, (0.0, 0.0)), "c1", "c1", QndVariant::OneBell).unwrap_err();
        assert_eq!(err, Error::QndSameLabel("c1".into()));
    }

    #[test]
    fn interferometer_model_agrees() {
        for convention in [BsConvention::Real, BsConvention::ImaginaryReflection] {
            let cc =
                interferometric_cross_check(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), convention).unwrap();
            assert!((cc.hom_success - 0.25).abs() < 1e-12);
            assert!((cc.hom_fidelity - 1.0).abs() < 1e-12);
            assert!((cc.pbs_success - 0.25).abs() < 1e-12);
            assert!((cc.pbs_fidelity - 1.0).abs() < 1e-12);
            assert!((cc.polarizer_success - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn interferometer_rejects_two_bell() {
        let cfg = QndConfig::new("c1", "e1", QndVariant::TwoBell)
            .with_model(QndModel::Interferometer { convention: BsConvention::Real });
        assert!(cfg.build().is_err());
    }

    #[test]
    fn qnd_acts_on_one_photon_of_a_pair() {
        // watched photon entangled with a spectator: entanglement survives
        let pair = make_bell(BellLabel::PsiMinus, "c1", "d1").unwrap();
        let res = qnd_teleport(&pair, "c1", "e1", QndVariant::OneBell).unwrap();
        let (ok, _) = res.iter().find(|(r, _)| r.success).unwrap();
        assert!((ok.probability - 0.25).abs() < 1e-12);
        let expect = make_bell(BellLabel::PsiMinus, "e1", "d1").unwrap();
        assert!((expect.fidelity(&ok.teleported).unwrap() - 1.0).abs() < 1e-12);
    }
}
