//! End-to-end runners, pattern classification and the protocol report.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Serialize, Serializer};

use super::circuit::{
    cghz_analyzers, cghz_circuit, execute, logic_bsa_analyzers, logic_bsa_circuit, Circuit, Element, LedgerEntry,
    Protocol,
};
use super::resources::{resource_count, ResourceCount};
use super::states::{cghz_family_size, make_cghz, make_logic_bell, LogicBell, LogicStateLabel, Sign};
use crate::error::{Error, Result};
use crate::fock::PhotonicState;
use crate::measure::{ClassificationTable, CoincidencePattern, DetectorId, OutcomeBranch, QndConfig, QndVariant};
use crate::TOLERANCE;

/// Success probability at or below this marks an input as rejected.
const REJECTION_THRESHOLD: f64 = 1e-12;

/// Maps a full detector record (heralds plus analyzer clicks) to the logic
/// state it certifies: every QND must report a success herald, and every
/// analyzer must report the same sign.
#[derive(Clone, Debug)]
pub struct Classifier {
    protocol: Protocol,
    qnd_heralds: Vec<(BTreeSet<DetectorId>, Vec<CoincidencePattern>)>,
    analyzers: Vec<(BTreeSet<DetectorId>, ClassificationTable<Sign>)>,
}

fn restrict(p: &CoincidencePattern, keep: &BTreeSet<DetectorId>) -> CoincidencePattern {
    CoincidencePattern::new(p.fired().iter().filter(|d| keep.contains(d)).cloned())
}

impl Classifier {
    pub fn for_circuit(circuit: &Circuit) -> Result<Self> {
        let mut qnd_heralds = Vec::new();
        for e in &circuit.elements {
            if let Element::Qnd { watched, output, heralds, .. } = e {
                let gate = QndConfig::new(watched, output, circuit.qnd)
                    .with_model(circuit.qnd_model)
                    .with_heralds(heralds[0].clone(), heralds[1].clone())
                    .build()?;
                let pats = gate.success_heralds();
                let all = pats.iter().flat_map(|p| p.fired().iter().cloned()).collect();
                qnd_heralds.push((all, pats));
            }
        }
        let analyzers = match circuit.protocol {
            Protocol::LogicBsa => logic_bsa_analyzers(circuit.m)
                .into_iter()
                .map(|a| (a.detectors().iter().cloned().collect(), a.sign_table()))
                .collect(),
            Protocol::Cghz => cghz_analyzers(circuit.n, circuit.m)
                .into_iter()
                .map(|a| (a.detectors().into_iter().collect(), a.table()))
                .collect(),
        };
        Ok(Self { protocol: circuit.protocol, qnd_heralds, analyzers })
    }

    fn label(&self, sign: Sign) -> LogicStateLabel {
        match self.protocol {
            Protocol::LogicBsa => LogicStateLabel::Bell(LogicBell::phi(sign)),
            Protocol::Cghz => LogicStateLabel::Cghz { index: 1, sign },
        }
    }

    pub fn herald_detectors(&self) -> BTreeSet<DetectorId> {
        self.qnd_heralds.iter().flat_map(|(all, _)| all.iter().cloned()).collect()
    }

    pub fn classify(&self, pattern: &CoincidencePattern) -> Option<LogicStateLabel> {
        let mut known = 0;
        for (all, ok) in &self.qnd_heralds {
            let part = restrict(pattern, all);
            known += part.len();
            if !ok.contains(&part) {
                return None;
            }
        }
        let mut sign = None;
        for (dets, table) in &self.analyzers {
            let part = restrict(pattern, dets);
            known += part.len();
            let s = *table.classify(&part)?;
            if sign.is_some_and(|prev| prev != s) {
                return None;
            }
            sign = Some(s);
        }
        if known != pattern.len() {
            return None;
        }
        sign.map(|s| self.label(s))
    }

    /// Explicit table of every certifying pattern. Refuses to enumerate more
    /// than `limit` patterns.
    pub fn table(&self, limit: usize) -> Result<ClassificationTable<LogicStateLabel>> {
        let mut heralds = vec![CoincidencePattern::default()];
        for (_, ok) in &self.qnd_heralds {
            heralds = heralds.iter().flat_map(|h| ok.iter().map(move |p| h.union(p))).collect();
        }
        let mut classes = Vec::new();
        for sign in Sign::BOTH {
            let mut pats = heralds.clone();
            for (_, table) in &self.analyzers {
                let opts = table.patterns_for(&sign).cloned().unwrap_or_default();
                if pats.len().saturating_mul(opts.len()) > limit {
                    return Err(Error::InvalidParameter(format!("classification table exceeds {limit} patterns")));
                }
                pats = pats.iter().flat_map(|h| opts.iter().map(move |p| h.union(p))).collect();
            }
            classes.push((self.label(sign), pats.into_iter().collect()));
        }
        ClassificationTable::new(classes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Analyzed,
    /// No component of the input survives the filtering stages.
    RejectedByConstruction,
}

fn pattern_keys<S: Serializer>(
    map: &BTreeMap<CoincidencePattern, Option<LogicStateLabel>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(map.iter().map(|(k, v)| (k.to_string(), v)))
}

/// One protocol run: success branches (absolute probabilities), their
/// classification, the stage ledger and resource counts.
#[derive(Clone, Debug, Serialize)]
pub struct ProtocolReport {
    pub protocol: Protocol,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub qnd: QndVariant,
    pub input_label: Option<LogicStateLabel>,
    pub status: RunStatus,
    pub success_probability: f64,
    /// Probability of all runs in which some filtering stage failed.
    pub failure_probability: f64,
    pub ledger: Vec<LedgerEntry>,
    pub resources: ResourceCount,
    pub herald_detectors: BTreeSet<DetectorId>,
    pub branches: Vec<OutcomeBranch>,
    #[serde(serialize_with = "pattern_keys")]
    pub classification: BTreeMap<CoincidencePattern, Option<LogicStateLabel>>,
}

impl ProtocolReport {
    pub fn ledger_product(&self) -> f64 {
        self.ledger.iter().map(|e| e.probability).product()
    }

    /// Probability of `branch` given overall success.
    pub fn conditional_probability(&self, branch: &OutcomeBranch) -> f64 {
        if self.success_probability > 0.0 {
            branch.probability / self.success_probability
        } else {
            0.0
        }
    }

    pub fn label_of(&self, pattern: &CoincidencePattern) -> Option<LogicStateLabel> {
        self.classification.get(pattern).copied().flatten()
    }

    /// The analyzer clicks of a record, without QND heralds.
    pub fn analyzer_pattern(&self, pattern: &CoincidencePattern) -> CoincidencePattern {
        CoincidencePattern::new(pattern.fired().iter().filter(|d| !self.herald_detectors.contains(d)).cloned())
    }

    /// The QND herald clicks of a record.
    pub fn herald_pattern(&self, pattern: &CoincidencePattern) -> CoincidencePattern {
        CoincidencePattern::new(pattern.fired().iter().filter(|d| self.herald_detectors.contains(d)).cloned())
    }

    /// Analyzer patterns of branches classified as `label`, with the summed
    /// conditional probability of each.
    pub fn success_patterns(&self, label: LogicStateLabel) -> BTreeMap<CoincidencePattern, f64> {
        let mut out = BTreeMap::new();
        for b in &self.branches {
            if self.label_of(&b.pattern) == Some(label) {
                *out.entry(self.analyzer_pattern(&b.pattern)).or_insert(0.0) += self.conditional_probability(b);
            }
        }
        out
    }
}

fn identify(protocol: Protocol, n: usize, m: usize, input: &PhotonicState) -> Result<Option<LogicStateLabel>> {
    let candidates: Vec<LogicStateLabel> = match protocol {
        Protocol::LogicBsa => LogicBell::ALL.into_iter().map(LogicStateLabel::Bell).collect(),
        Protocol::Cghz => (1..=cghz_family_size(n))
            .flat_map(|index| Sign::BOTH.into_iter().map(move |sign| LogicStateLabel::Cghz { index, sign }))
            .collect(),
    };
    for label in candidates {
        let s = match label {
            LogicStateLabel::Bell(b) => make_logic_bell(b, m)?,
            LogicStateLabel::Cghz { index, sign } => make_cghz(n, m, index, sign)?,
        };
        if s.modes() == input.modes() && s.fidelity(input)? >= 1.0 - TOLERANCE {
            return Ok(Some(label));
        }
    }
    Ok(None)
}

/// Runs a circuit on `input` and assembles the report.
pub fn run_protocol(circuit: &Circuit, input: &PhotonicState) -> Result<ProtocolReport> {
    let exec = execute(circuit, input)?;
    let classifier = Classifier::for_circuit(circuit)?;
    let classification = exec.branches.iter().map(|b| (b.pattern.clone(), classifier.classify(&b.pattern))).collect();
    let status = if exec.success_probability <= REJECTION_THRESHOLD {
        RunStatus::RejectedByConstruction
    } else {
        RunStatus::Analyzed
    };
    Ok(ProtocolReport {
        protocol: circuit.protocol,
        n: circuit.n,
        m: circuit.m,
        qnd: circuit.qnd,
        input_label: identify(circuit.protocol, circuit.n, circuit.m, input)?,
        status,
        success_probability: exec.success_probability,
        failure_probability: (1.0 - exec.success_probability).max(0.0),
        ledger: exec.ledger,
        resources: resource_count(circuit.n, circuit.m)?,
        herald_detectors: classifier.herald_detectors(),
        branches: exec.branches,
        classification,
    })
}

pub fn run_logic_bsa(input: &PhotonicState, m: usize, qnd: QndVariant) -> Result<ProtocolReport> {
    run_protocol(&logic_bsa_circuit(m, qnd)?, input)
}

pub fn run_cghz_analysis(input: &PhotonicState, n: usize, m: usize, qnd: QndVariant) -> Result<ProtocolReport> {
    run_protocol(&cghz_circuit(n, m, qnd)?, input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifier_table_matches_structural_classify() {
        let c = logic_bsa_circuit(2, QndVariant::TwoBell).unwrap();
        let cl = Classifier::for_circuit(&c).unwrap();
        let table = cl.table(1 << 16).unwrap();
        let mut count = 0;
        for (label, pats) in table.classes() {
            for p in pats {
                assert_eq!(cl.classify(p), Some(*label));
                count += 1;
            }
        }
        // 4 herald combinations x 4 analyzer patterns x 2 labels
        assert_eq!(count, 32);
    }

    #[test]
    fn classifier_rejects_stray_detectors() {
        let c = logic_bsa_circuit(2, QndVariant::OneBell).unwrap();
        let cl = Classifier::for_circuit(&c).unwrap();
        let good: CoincidencePattern = "D1+D2+D3+D4+D5+D7+D9+D11".parse().unwrap();
        assert_eq!(cl.classify(&good), Some(LogicStateLabel::Bell(LogicBell::PhiPlus)));
        let stray: CoincidencePattern = "D1+D2+D3+D4+D5+D7+D9+D11+X".parse().unwrap();
        assert_eq!(cl.classify(&stray), None);
        let mixed: CoincidencePattern = "D1+D2+D3+D4+D5+D7+D9+D12".parse().unwrap();
        assert_eq!(cl.classify(&mixed), None);
        let no_herald: CoincidencePattern = "D1+D2+D3+D5+D7+D9+D11".parse().unwrap();
        assert_eq!(cl.classify(&no_herald), None);
    }

    #[test]
    fn psi_is_rejected() {
        let r = run_logic_bsa(&make_logic_bell(LogicBell::PsiPlus, 2).unwrap(), 2, QndVariant::OneBell).unwrap();
        assert_eq!(r.status, RunStatus::RejectedByConstruction);
        assert!(r.branches.is_empty());
        assert_eq!(r.input_label, Some(LogicStateLabel::Bell(LogicBell::PsiPlus)));
    }
}
