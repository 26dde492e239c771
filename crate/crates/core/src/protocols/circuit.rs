//! Circuit description, JSON schema and the branching executor.
//!
//! A circuit is an ordered list of elements acting on the canonical input
//! registry. The executor carries a list of unnormalized pure components,
//! each tagged with the detector record that produced it; the squared norm of
//! a component is its absolute probability. Filtering stages (post-selection
//! and QND gates) add one ledger entry each.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analyzers::{GhzAnalyzer, PolarizationBellAnalyzer};
use super::states::{canonical_registry, group_labels};
use crate::elements::{bs50_with, hwp, pbs, BsConvention, HADAMARD_ANGLE};
use crate::error::{Error, Result};
use crate::fock::{ModeId, ModeLinearMap, PhotonicState};
use crate::measure::{
    merge_residuals, split_records, unmeasured_modes, CoincidencePattern, DetectorAssembly, DetectorId, DetectorModel,
    OutcomeBranch, QndConfig, QndModel, QndVariant,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    LogicBsa,
    Cghz,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::LogicBsa => "logic-bsa",
            Protocol::Cghz => "cghz",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub id: DetectorId,
    pub modes: Vec<ModeId>,
}

impl DetectorSpec {
    pub fn new(id: impl Into<DetectorId>, modes: Vec<ModeId>) -> Self {
        Self { id: id.into(), modes }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Element {
    Hwp {
        spatial: String,
        angle: f64,
    },
    Pbs {
        in1: String,
        in2: String,
        out1: String,
        out2: String,
    },
    Bs50 {
        in1: String,
        in2: String,
        out1: String,
        out2: String,
        #[serde(default)]
        convention: BsConvention,
    },
    /// Keeps only components with exactly one photon in each listed path.
    PostSelect {
        stage: String,
        single: Vec<String>,
    },
    /// Teleportation QND from `watched` to `output`; the variant and model
    /// come from the circuit.
    Qnd {
        stage: String,
        watched: String,
        output: String,
        heralds: [DetectorId; 2],
    },
    Detect {
        detectors: Vec<DetectorSpec>,
    },
}

impl Element {
    pub fn hadamard(spatial: &str) -> Self {
        Element::Hwp { spatial: spatial.to_string(), angle: HADAMARD_ANGLE }
    }

    pub fn pbs(in1: &str, in2: &str, out1: &str, out2: &str) -> Self {
        Element::Pbs { in1: in1.to_string(), in2: in2.to_string(), out1: out1.to_string(), out2: out2.to_string() }
    }

    fn map(&self) -> Result<Option<ModeLinearMap>> {
        Ok(match self {
            Element::Hwp { spatial, angle } => Some(hwp(spatial, *angle)),
            Element::Pbs { in1, in2, out1, out2 } => Some(pbs(in1, in2, out1, out2)?),
            Element::Bs50 { in1, in2, out1, out2, convention } => Some(bs50_with(in1, in2, out1, out2, *convention)?),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub protocol: Protocol,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub qnd: QndVariant,
    #[serde(default)]
    pub qnd_model: QndModel,
    #[serde(default)]
    pub detector_model: DetectorModel,
    pub elements: Vec<Element>,
}

impl Circuit {
    pub fn input_registry(&self) -> Vec<ModeId> {
        canonical_registry(self.n, self.m)
    }

    pub fn qnd_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, Element::Qnd { .. })).count()
    }

    /// Physical detectors: two heralds per QND plus every analyzer detector.
    pub fn detector_count(&self) -> usize {
        let analyzer: usize = self
            .elements
            .iter()
            .map(|e| match e {
                Element::Detect { detectors } => detectors.len(),
                _ => 0,
            })
            .sum();
        analyzer + 2 * self.qnd_count()
    }

    /// Herald detectors of every QND, including primed second-outcome names.
    pub fn herald_detectors(&self) -> BTreeSet<DetectorId> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                Element::Qnd { heralds, .. } => Some(heralds),
                _ => None,
            })
            .flat_map(|h| h.iter().flat_map(|d| [d.clone(), DetectorId::new(format!("{d}'"))]))
            .collect()
    }

    pub fn with_qnd_model(mut self, model: QndModel) -> Self {
        self.qnd_model = model;
        self
    }

    pub fn with_detector_model(mut self, model: DetectorModel) -> Self {
        self.detector_model = model;
        self
    }

    /// The same circuit with explicit post-selection stages removed, so that
    /// the QND gates and the final coincidence do all the filtering.
    pub fn without_post_selection(mut self) -> Self {
        self.elements.retain(|e| !matches!(e, Element::PostSelect { .. }));
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub stage: String,
    pub probability: f64,
}

/// Outcome of running a circuit: every surviving detector record with its
/// absolute probability, and the stage ledger.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Execution {
    pub branches: Vec<OutcomeBranch>,
    pub ledger: Vec<LedgerEntry>,
    pub success_probability: f64,
}

#[derive(Clone, Debug)]
struct Component {
    state: PhotonicState,
    record: BTreeMap<DetectorId, u32>,
}

fn total_weight(cs: &[Component]) -> f64 {
    cs.iter().fold(0.0, |acc, c| acc + c.state.norm_squared())
}

fn ratio(after: f64, before: f64) -> f64 {
    if before > 0.0 {
        after / before
    } else {
        0.0
    }
}

fn require_normalized(input: &PhotonicState) -> Result<()> {
    if !input.is_normalized() {
        return Err(Error::InvalidParameter(format!(
            "input state must be normalized (norm^2 = {})",
            input.norm_squared()
        )));
    }
    Ok(())
}

/// Runs `elements` on a normalized input.
pub fn run_elements(
    input: &PhotonicState,
    elements: &[Element],
    qnd: QndVariant,
    qnd_model: QndModel,
    detector_model: DetectorModel,
) -> Result<Execution> {
    require_normalized(input)?;
    let mut comps = vec![Component { state: input.clone(), record: BTreeMap::new() }];
    let mut ledger = Vec::new();
    let mut measured_out: Option<Vec<ModeId>> = None;
    for el in elements {
        if let Some(map) = el.map()? {
            comps = comps
                .into_par_iter()
                .map(|c| Ok(Component { state: c.state.apply_map(&map)?, record: c.record }))
                .collect::<Result<_>>()?;
            continue;
        }
        match el {
            Element::PostSelect { stage, single } => {
                let before = total_weight(&comps);
                comps = comps
                    .into_iter()
                    .map(|c| Component {
                        state: c.state.restrict(|b| single.iter().all(|l| b.spatial_count(l) == 1)),
                        record: c.record,
                    })
                    .filter(|c| !c.state.is_empty())
                    .collect();
                ledger.push(LedgerEntry { stage: stage.clone(), probability: ratio(total_weight(&comps), before) });
            }
            Element::Qnd { stage, watched, output, heralds } => {
                let gate = QndConfig::new(watched, output, qnd)
                    .with_model(qnd_model)
                    .with_heralds(heralds[0].clone(), heralds[1].clone())
                    .build()?;
                let before = total_weight(&comps);
                let next: Vec<Vec<Component>> = comps
                    .into_par_iter()
                    .map(|c| {
                        Ok(gate
                            .success_components(&c.state)?
                            .into_iter()
                            .map(|(h, state)| {
                                let mut record = c.record.clone();
                                for d in h.fired() {
                                    *record.entry(d.clone()).or_insert(0) += 1;
                                }
                                Component { state, record }
                            })
                            .collect())
                    })
                    .collect::<Result<_>>()?;
                comps = next.into_iter().flatten().collect();
                ledger.push(LedgerEntry { stage: stage.clone(), probability: ratio(total_weight(&comps), before) });
            }
            Element::Detect { detectors } => {
                let assembly =
                    DetectorAssembly::new(detectors.iter().map(|d| (d.id.clone(), d.modes.clone())).collect())?;
                if let Some(c) = comps.first() {
                    measured_out = Some(unmeasured_modes(&c.state, &assembly));
                }
                let next: Vec<Vec<Component>> = comps
                    .into_par_iter()
                    .map(|c| {
                        Ok(split_records(&c.state, &assembly)?
                            .into_iter()
                            .map(|(counts, state)| {
                                let mut record = c.record.clone();
                                for ((id, _), n) in assembly.detectors().iter().zip(counts) {
                                    if n > 0 {
                                        *record.entry(id.clone()).or_insert(0) += n;
                                    }
                                }
                                Component { state, record }
                            })
                            .collect())
                    })
                    .collect::<Result<_>>()?;
                comps = next.into_iter().flatten().collect();
            }
            _ => unreachable!("optical elements handled above"),
        }
    }
    let success_probability = total_weight(&comps);
    let rest = match (comps.first(), measured_out) {
        (Some(c), _) => c.state.modes().to_vec(),
        (None, Some(m)) => m,
        (None, None) => Vec::new(),
    };
    let mut grouped: BTreeMap<BTreeMap<DetectorId, u32>, Vec<(f64, PhotonicState)>> = BTreeMap::new();
    for c in comps {
        let record = match detector_model {
            DetectorModel::PhotonNumberResolving => c.record,
            DetectorModel::Threshold => c.record.into_keys().map(|d| (d, 1)).collect(),
        };
        grouped.entry(record).or_default().push((c.state.norm_squared(), c.state));
    }
    let empty = PhotonicState::empty(rest)?;
    let mut branches: Vec<OutcomeBranch> = grouped
        .into_iter()
        .map(|(counts, parts)| OutcomeBranch {
            pattern: CoincidencePattern::new(counts.keys().cloned()),
            probability: parts.iter().map(|(p, _)| p).sum(),
            residual: merge_residuals(&parts).unwrap_or_else(|| empty.clone()),
            counts,
        })
        .collect();
    branches.sort_by(|a, b| a.pattern.cmp(&b.pattern).then_with(|| a.counts.cmp(&b.counts)));
    Ok(Execution { branches, ledger, success_probability })
}

fn check_registry(circuit: &Circuit, input: &PhotonicState) -> Result<()> {
    if input.modes() != circuit.input_registry().as_slice() {
        return Err(Error::WrongRegistry(circuit.protocol.to_string()));
    }
    Ok(())
}

pub fn execute(circuit: &Circuit, input: &PhotonicState) -> Result<Execution> {
    check_registry(circuit, input)?;
    run_elements(input, &circuit.elements, circuit.qnd, circuit.qnd_model, circuit.detector_model)
}

/// The normalized state right after the first post-selection stage, with that
/// stage's probability. Circuits without post-selection are rejected.
pub fn post_selected_state(circuit: &Circuit, input: &PhotonicState) -> Result<(PhotonicState, f64)> {
    check_registry(circuit, input)?;
    require_normalized(input)?;
    let mut state = input.clone();
    for el in &circuit.elements {
        if let Some(map) = el.map()? {
            state = state.apply_map(&map)?;
        } else if let Element::PostSelect { single, .. } = el {
            return Ok(state.post_select(|b| single.iter().all(|l| b.spatial_count(l) == 1)));
        } else {
            break;
        }
    }
    Err(Error::InvalidCircuit("no post-selection stage before the first QND or detector".into()))
}

/// Output paths of the polarization-sorting PBS network for logic-BSA, in
/// pair order: `(c_j, d_j)`.
pub fn logic_bsa_pairs(m: usize) -> Vec<(String, String)> {
    (1..=m).map(|j| (format!("c{j}"), format!("d{j}"))).collect()
}

/// Logic Bell-state analyzer for `m`-photon GHZ logic qubits.
///
/// Layout: Hadamard wave plates on `a1…aM, b1…bM`; PBS `j` sorts `(a_j, b_j)`
/// into `(c_j, d_j)`; post-selection on one photon in every `c_j, d_j`; QND
/// `j` teleports `c_j` to `e_j` with heralds `D(2j-1), D(2j)`; a
/// polarization Bell analyzer on `(e_j, d_j)` with detectors
/// `D(2M+4j-3) … D(2M+4j)`.
pub fn logic_bsa_circuit(m: usize, qnd: QndVariant) -> Result<Circuit> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M must be at least 2, got {m}")));
    }
    let mut elements = Vec::new();
    for l in canonical_registry(2, m).iter().map(ModeId::spatial).collect::<BTreeSet<_>>() {
        elements.push(Element::hadamard(l));
    }
    let pairs = logic_bsa_pairs(m);
    for (j, (c, d)) in pairs.iter().enumerate() {
        let j = j + 1;
        elements.push(Element::pbs(&format!("a{j}"), &format!("b{j}"), c, d));
    }
    elements.push(Element::PostSelect {
        stage: "post-selection".into(),
        single: pairs.iter().flat_map(|(c, d)| [c.clone(), d.clone()]).collect(),
    });
    for (j, (c, _)) in pairs.iter().enumerate() {
        let j = j + 1;
        elements.push(Element::Qnd {
            stage: format!("QND{j}"),
            watched: c.clone(),
            output: format!("e{j}"),
            heralds: [DetectorId::new(format!("D{}", 2 * j - 1)), DetectorId::new(format!("D{}", 2 * j))],
        });
    }
    let mut detectors = Vec::new();
    for a in logic_bsa_analyzers(m) {
        elements.extend(a.optics());
        detectors.extend(a.detector_specs());
    }
    elements.push(Element::Detect { detectors });
    Ok(Circuit {
        protocol: Protocol::LogicBsa,
        n: 2,
        m,
        qnd,
        qnd_model: QndModel::default(),
        detector_model: DetectorModel::default(),
        elements,
    })
}

/// The analyzer on pair `j` of the logic-BSA circuit.
pub fn logic_bsa_analyzers(m: usize) -> Vec<PolarizationBellAnalyzer> {
    (1..=m)
        .map(|j| {
            let base = 2 * m + 4 * (j - 1);
            let d = |k: usize| DetectorId::new(format!("D{}", base + k));
            PolarizationBellAnalyzer::new(
                &format!("e{j}"),
                &format!("d{j}"),
                &format!("f{j}"),
                &format!("g{j}"),
                [d(1), d(2), d(3), d(4)],
            )
        })
        .collect()
}

fn group_prefix(j: usize) -> String {
    format!("g{j}.")
}

/// Paths reaching the analyzer of group `j` before the QNDs: the kept PBS
/// output `u_k` of each of the `n-1` PBSs, then the last chained output.
pub fn cghz_group_outputs(n: usize, j: usize) -> Vec<String> {
    let p = group_prefix(j);
    let mut v: Vec<String> = (1..n).map(|k| format!("{p}u{k}")).collect();
    v.push(format!("{p}w{}", n - 1));
    v
}

/// The analyzer on group `j` of the C-GHZ circuit.
pub fn cghz_analyzers(n: usize, m: usize) -> Vec<GhzAnalyzer> {
    (1..=m)
        .map(|j| {
            let p = group_prefix(j);
            let mut photons: Vec<String> = (1..n).map(|k| format!("{p}t{k}")).collect();
            photons.push(format!("{p}w{}", n - 1));
            GhzAnalyzer::new(photons, &p)
        })
        .collect()
}

/// C-GHZ analyzer for `n` logic qubits of `m` photons.
///
/// Layout per position group `j` (paths prefixed `g{j}.`): Hadamard wave
/// plates on every input; a chain of `n-1` PBSs, the first on `(a_j, b_j)`
/// and each later one on the previous PBS's second output and the next
/// photon; post-selection on one photon in every PBS output; a QND on the
/// first output `u_k` of PBS `k` (teleported to `t_k`, heralds `Q{k}a`,
/// `Q{k}b`); and a GHZ analyzer on `t_1 … t_{n-1}, w_{n-1}`.
pub fn cghz_circuit(n: usize, m: usize, qnd: QndVariant) -> Result<Circuit> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(format!("N and M must both be at least 2 (got N={n}, M={m})")));
    }
    if n > 26 {
        return Err(Error::InvalidParameter(format!("at most 26 logic qubits are supported (got N={n})")));
    }
    let mut elements = Vec::new();
    for l in canonical_registry(n, m).iter().map(ModeId::spatial).collect::<BTreeSet<_>>() {
        elements.push(Element::hadamard(l));
    }
    let mut single = Vec::new();
    for j in 1..=m {
        let p = group_prefix(j);
        let inputs = group_labels(n, j);
        let mut carry = inputs[0].clone();
        for (k, next) in inputs.iter().enumerate().skip(1) {
            let (u, w) = (format!("{p}u{k}"), format!("{p}w{k}"));
            elements.push(Element::pbs(&carry, next, &u, &w));
            carry = w;
        }
        single.extend(cghz_group_outputs(n, j));
    }
    elements.push(Element::PostSelect { stage: "post-selection".into(), single });
    let mut q = 0;
    for j in 1..=m {
        let p = group_prefix(j);
        for k in 1..n {
            q += 1;
            elements.push(Element::Qnd {
                stage: format!("QND{q}"),
                watched: format!("{p}u{k}"),
                output: format!("{p}t{k}"),
                heralds: [DetectorId::new(format!("{p}Q{k}a")), DetectorId::new(format!("{p}Q{k}b"))],
            });
        }
    }
    let mut detectors = Vec::new();
    for a in cghz_analyzers(n, m) {
        elements.extend(a.optics());
        detectors.extend(a.detector_specs());
    }
    elements.push(Element::Detect { detectors });
    Ok(Circuit {
        protocol: Protocol::Cghz,
        n,
        m,
        qnd,
        qnd_model: QndModel::default(),
        detector_model: DetectorModel::default(),
        elements,
    })
}

/// Rebuilds the canonical circuit a (protocol, N, M, variant) tuple denotes.
pub fn canonical_circuit(protocol: Protocol, n: usize, m: usize, qnd: QndVariant) -> Result<Circuit> {
    match protocol {
        Protocol::LogicBsa if n == 2 => logic_bsa_circuit(m, qnd),
        Protocol::LogicBsa => Err(Error::InvalidParameter(format!("logic-bsa needs N=2, got N={n}"))),
        Protocol::Cghz => cghz_circuit(n, m, qnd),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::states::{make_cghz, make_logic_bell, LogicBell, Sign};

    #[test]
    fn logic_bsa_layout() {
        let c = logic_bsa_circuit(2, QndVariant::OneBell).unwrap();
        assert_eq!(c.qnd_count(), 2);
        assert_eq!(c.detector_count(), 12);
        let heralds: Vec<String> = c.herald_detectors().iter().map(|d| d.to_string()).collect();
        assert_eq!(heralds, ["D1", "D1'", "D2", "D2'", "D3", "D3'", "D4", "D4'"]);
    }

    #[test]
    fn cghz_layout() {
        let c = cghz_circuit(3, 2, QndVariant::OneBell).unwrap();
        assert_eq!(c.qnd_count(), 4);
        assert_eq!(cghz_group_outputs(3, 1), ["g1.u1", "g1.u2", "g1.w2"]);
    }

    #[test]
    fn circuit_json_round_trip() {
        let c = cghz_circuit(3, 2, QndVariant::TwoBell).unwrap().with_qnd_model(QndModel::Projection);
        let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        let v: serde_json::Value = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(v["protocol"], "cghz");
        assert_eq!(v["N"], 3);
        assert_eq!(v["qnd"], "two_bell");
        assert_eq!(v["elements"][0]["type"], "hwp");
    }

    #[test]
    fn wrong_registry_is_rejected() {
        let c = logic_bsa_circuit(2, QndVariant::OneBell).unwrap();
        let wrong = make_logic_bell(LogicBell::PhiPlus, 3).unwrap();
        assert_eq!(execute(&c, &wrong).unwrap_err(), Error::WrongRegistry("logic-bsa".into()));
    }

    #[test]
    fn ledger_and_success() {
        let c = logic_bsa_circuit(2, QndVariant::OneBell).unwrap();
        let run = execute(&c, &make_logic_bell(LogicBell::PhiPlus, 2).unwrap()).unwrap();
        let probs: Vec<f64> = run.ledger.iter().map(|e| e.probability).collect();
        assert_eq!(probs.len(), 3);
        for (p, want) in probs.iter().zip([0.5, 0.25, 0.25]) {
            assert!((p - want).abs() < 1e-12);
        }
        assert!((run.success_probability - 1.0 / 32.0).abs() < 1e-12);
        assert_eq!(run.branches.len(), 4);
    }

    #[test]
    fn post_selection_matches_closed_form() {
        let c = cghz_circuit(3, 2, QndVariant::OneBell).unwrap();
        let (_, p) = post_selected_state(&c, &make_cghz(3, 2, 1, Sign::Plus).unwrap()).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }
}
