//! Polarization Bell-state analyzer (PBS, a Hadamard wave plate on each
//! output, polarization-resolving detection) and polarization GHZ-state
//! analyzer (a Hadamard wave plate per photon, polarization-resolving
//! detection). Both decide the sign of the state from the parity of
//! V-port clicks.

use std::collections::BTreeSet;

use serde::Serialize;

use super::circuit::{run_elements, DetectorSpec, Element};
use super::states::{BellLabel, Sign};
use crate::error::{Error, Result};
use crate::fock::{ModeId, PhotonicState};
use crate::measure::{
    ClassificationTable, CoincidencePattern, DetectorId, DetectorModel, OutcomeBranch, QndModel, QndVariant,
};

/// An outcome with the label the analyzer infers from it (`None` when the
/// pattern matches no class).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledBranch<L> {
    pub branch: OutcomeBranch,
    pub label: Option<L>,
}

/// PBS on `(first, second)` into `(out1, out2)`, then a Hadamard wave plate
/// on each output. Detectors: `out1:H, out1:V, out2:H, out2:V`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationBellAnalyzer {
    first: String,
    second: String,
    out1: String,
    out2: String,
    detectors: [DetectorId; 4],
}

impl PolarizationBellAnalyzer {
    pub fn new(first: &str, second: &str, out1: &str, out2: &str, detectors: [DetectorId; 4]) -> Self {
        Self {
            first: first.to_string(),
            second: second.to_string(),
            out1: out1.to_string(),
            out2: out2.to_string(),
            detectors,
        }
    }

    /// Standalone analyzer on the two paths of `pair`, detectors `D1…D4`.
    pub fn for_pair(pair: &PhotonicState) -> Result<Self> {
        let labels = pair.spatial_labels();
        if labels.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "Bell analyzer needs a state on two paths, got {}",
                labels.len()
            )));
        }
        Ok(Self::new(labels[0], labels[1], "pbsa.1", "pbsa.2", ["D1".into(), "D2".into(), "D3".into(), "D4".into()]))
    }

    pub fn detectors(&self) -> &[DetectorId; 4] {
        &self.detectors
    }

    pub fn optics(&self) -> Vec<Element> {
        vec![
            Element::pbs(&self.first, &self.second, &self.out1, &self.out2),
            Element::hadamard(&self.out1),
            Element::hadamard(&self.out2),
        ]
    }

    pub fn detector_specs(&self) -> Vec<DetectorSpec> {
        let [h1, v1, h2, v2] = self.detectors.clone();
        vec![
            DetectorSpec::new(h1, vec![ModeId::h(&self.out1)]),
            DetectorSpec::new(v1, vec![ModeId::v(&self.out1)]),
            DetectorSpec::new(h2, vec![ModeId::h(&self.out2)]),
            DetectorSpec::new(v2, vec![ModeId::v(&self.out2)]),
        ]
    }

    /// `φ+`: one click per output with even V parity; `φ-`: odd parity.
    pub fn table(&self) -> ClassificationTable<BellLabel> {
        let [h1, v1, h2, v2] = self.detectors.clone();
        let pat = |a: &DetectorId, b: &DetectorId| CoincidencePattern::new([a.clone(), b.clone()]);
        ClassificationTable::new(vec![
            (BellLabel::PhiPlus, BTreeSet::from([pat(&h1, &h2), pat(&v1, &v2)])),
            (BellLabel::PhiMinus, BTreeSet::from([pat(&h1, &v2), pat(&v1, &h2)])),
        ])
        .expect("parity classes are disjoint")
    }

    /// The same table with `φ±` reduced to its sign.
    pub fn sign_table(&self) -> ClassificationTable<Sign> {
        let t = self.table();
        ClassificationTable::new(
            t.classes()
                .map(|(l, ps)| (if *l == BellLabel::PhiPlus { Sign::Plus } else { Sign::Minus }, ps.clone()))
                .collect(),
        )
        .expect("parity classes are disjoint")
    }

    pub fn run(&self, pair: &PhotonicState) -> Result<Vec<LabeledBranch<BellLabel>>> {
        let mut elements = self.optics();
        elements.push(Element::Detect { detectors: self.detector_specs() });
        let run = run_elements(
            pair,
            &elements,
            QndVariant::default(),
            QndModel::default(),
            DetectorModel::PhotonNumberResolving,
        )?;
        let table = self.table();
        Ok(run
            .branches
            .into_iter()
            .map(|branch| LabeledBranch { label: table.classify(&branch.pattern).copied(), branch })
            .collect())
    }
}

/// Runs the Bell analyzer on a normalized two-path state with detectors
/// `D1` (first output H), `D2` (first output V), `D3`, `D4` (second output).
pub fn run_pbsa(pair: &PhotonicState) -> Result<Vec<LabeledBranch<BellLabel>>> {
    PolarizationBellAnalyzer::for_pair(pair)?.run(pair)
}

/// Hadamard wave plate and an H/V detector pair on each of `N` photons;
/// photon `i` (1-based) feeds `{prefix}D(2i-1)` (H) and `{prefix}D(2i)` (V).
#[derive(Clone, Debug, PartialEq)]
pub struct GhzAnalyzer {
    photons: Vec<String>,
    prefix: String,
}

impl GhzAnalyzer {
    pub fn new(photons: Vec<String>, prefix: &str) -> Self {
        Self { photons, prefix: prefix.to_string() }
    }

    pub fn photons(&self) -> &[String] {
        &self.photons
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    fn detector(&self, photon: usize, v: bool) -> DetectorId {
        DetectorId::new(format!("{}D{}", self.prefix, 2 * photon + 1 + usize::from(v)))
    }

    pub fn detectors(&self) -> Vec<DetectorId> {
        (0..self.photons.len()).flat_map(|i| [self.detector(i, false), self.detector(i, true)]).collect()
    }

    pub fn optics(&self) -> Vec<Element> {
        self.photons.iter().map(|p| Element::hadamard(p)).collect()
    }

    pub fn detector_specs(&self) -> Vec<DetectorSpec> {
        self.photons
            .iter()
            .enumerate()
            .flat_map(|(i, p)| {
                [
                    DetectorSpec::new(self.detector(i, false), vec![ModeId::h(p)]),
                    DetectorSpec::new(self.detector(i, true), vec![ModeId::v(p)]),
                ]
            })
            .collect()
    }

    /// One click per photon; even number of V clicks is `+`, odd is `-`.
    pub fn table(&self) -> ClassificationTable<Sign> {
        let n = self.photons.len();
        let mut plus = BTreeSet::new();
        let mut minus = BTreeSet::new();
        for bits in 0u64..(1u64 << n) {
            let pattern = CoincidencePattern::new((0..n).map(|i| self.detector(i, (bits >> i) & 1 == 1)));
            if bits.count_ones() % 2 == 0 {
                plus.insert(pattern);
            } else {
                minus.insert(pattern);
            }
        }
        ClassificationTable::new(vec![(Sign::Plus, plus), (Sign::Minus, minus)]).expect("parity classes are disjoint")
    }

    pub fn run(&self, group: &PhotonicState) -> Result<Vec<LabeledBranch<Sign>>> {
        let mut elements = self.optics();
        elements.push(Element::Detect { detectors: self.detector_specs() });
        let run = run_elements(
            group,
            &elements,
            QndVariant::default(),
            QndModel::default(),
            DetectorModel::PhotonNumberResolving,
        )?;
        let table = self.table();
        Ok(run
            .branches
            .into_iter()
            .map(|branch| LabeledBranch { label: table.classify(&branch.pattern).copied(), branch })
            .collect())
    }
}

/// Runs the GHZ analyzer on a normalized state, photons taken in path-label
/// order, detectors `D1 … D2N`.
pub fn run_pgsa(group: &PhotonicState) -> Result<Vec<LabeledBranch<Sign>>> {
    let photons: Vec<String> = group.spatial_labels().into_iter().map(String::from).collect();
    if photons.len() < 2 {
        return Err(Error::InvalidParameter("GHZ analyzer needs at least two paths".into()));
    }
    GhzAnalyzer::new(photons, "").run(group)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::states::{make_bell, make_ghz};

    fn patterns<L: PartialEq + Copy>(bs: &[LabeledBranch<L>], label: L) -> Vec<String> {
        bs.iter().filter(|b| b.label == Some(label)).map(|b| b.branch.pattern.compact()).collect()
    }

    #[test]
    fn pbsa_distinguishes_phi() {
        let plus = run_pbsa(&make_bell(BellLabel::PhiPlus, "x", "y").unwrap()).unwrap();
        assert_eq!(patterns(&plus, BellLabel::PhiPlus), ["D1D3", "D2D4"]);
        assert!(plus.iter().all(|b| (b.branch.probability - 0.5).abs() < 1e-12));
        let minus = run_pbsa(&make_bell(BellLabel::PhiMinus, "x", "y").unwrap()).unwrap();
        assert_eq!(patterns(&minus, BellLabel::PhiMinus), ["D1D4", "D2D3"]);
    }

    #[test]
    fn pbsa_psi_is_unclassified() {
        let psi = run_pbsa(&make_bell(BellLabel::PsiPlus, "x", "y").unwrap()).unwrap();
        assert!(psi.iter().all(|b| b.label.is_none()));
        let total: f64 = psi.iter().map(|b| b.branch.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgsa_ghz3_tables() {
        let plus = run_pgsa(&make_ghz(3, Sign::Plus, &["a1", "b1", "c1"]).unwrap()).unwrap();
        let mut got = patterns(&plus, Sign::Plus);
        got.sort();
        assert_eq!(got, ["D1D3D5", "D1D4D6", "D2D3D6", "D2D4D5"]);
        assert!(plus.iter().all(|b| (b.branch.probability - 0.25).abs() < 1e-12));
        let minus = run_pgsa(&make_ghz(3, Sign::Minus, &["a1", "b1", "c1"]).unwrap()).unwrap();
        let mut got = patterns(&minus, Sign::Minus);
        got.sort();
        assert_eq!(got, ["D1D3D6", "D1D4D5", "D2D3D5", "D2D4D6"]);
    }

    #[test]
    fn pgsa_two_photons_matches_pbsa_labels() {
        for (bell, sign) in [(BellLabel::PhiPlus, Sign::Plus), (BellLabel::PhiMinus, Sign::Minus)] {
            let s = make_bell(bell, "x", "y").unwrap();
            assert!(run_pgsa(&s).unwrap().iter().all(|b| b.label == Some(sign)));
            assert!(run_pbsa(&s).unwrap().iter().all(|b| b.label == Some(bell)));
        }
    }
}
