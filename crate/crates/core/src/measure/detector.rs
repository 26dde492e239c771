use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeId, PhotonicState};
use crate::TOLERANCE;

/// Detector name. Names compare in natural order, so `D5 < D10`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DetectorId(String);

impl DetectorId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for DetectorId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut a, mut b) = (a.as_bytes(), b.as_bytes());
    loop {
        match (a.first(), b.first()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let na = a.iter().take_while(|c| c.is_ascii_digit()).count();
                let nb = b.iter().take_while(|c| c.is_ascii_digit()).count();
                let (da, db) = (&a[..na], &b[..nb]);
                let ta = da.iter().position(|&c| c != b'0').map_or(&da[da.len()..], |i| &da[i..]);
                let tb = db.iter().position(|&c| c != b'0').map_or(&db[db.len()..], |i| &db[i..]);
                let ord = ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb)).then_with(|| na.cmp(&nb));
                if ord != Ordering::Equal {
                    return ord;
                }
                a = &a[na..];
                b = &b[nb..];
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(y);
                }
                a = &a[1..];
                b = &b[1..];
            }
        }
    }
}

impl Ord for DetectorId {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for DetectorId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Set of detectors that fired in one run. Serializes as a sorted array and
/// displays as `D5+D7+D9+D11`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoincidencePattern(BTreeSet<DetectorId>);

impl CoincidencePattern {
    pub fn new<I, D>(fired: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: Into<DetectorId>,
    {
        Self(fired.into_iter().map(Into::into).collect())
    }

    pub fn fired(&self) -> &BTreeSet<DetectorId> {
        &self.0
    }

    pub fn contains(&self, d: &DetectorId) -> bool {
        self.0.contains(d)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &CoincidencePattern) -> CoincidencePattern {
        Self(self.0.union(&other.0).cloned().collect())
    }

    /// Detectors whose names start with `prefix`, with the prefix removed.
    pub fn strip_prefix(&self, prefix: &str) -> CoincidencePattern {
        Self(self.0.iter().filter_map(|d| d.as_str().strip_prefix(prefix).map(DetectorId::new)).collect())
    }

    /// Names concatenated without separator, e.g. `D5D7D9D11`.
    pub fn compact(&self) -> String {
        self.0.iter().map(|d| d.as_str()).collect()
    }
}

impl fmt::Display for CoincidencePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            f.write_str(d.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for CoincidencePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Self::default());
        }
        Ok(Self::new(s.split('+').map(str::trim)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorModel {
    PhotonNumberResolving,
    #[default]
    Threshold,
}

/// Detectors and the modes each one absorbs. A detector covering both
/// polarizations of a path is polarization-insensitive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorAssembly {
    detectors: Vec<(DetectorId, Vec<ModeId>)>,
}

impl DetectorAssembly {
    pub fn new(detectors: Vec<(DetectorId, Vec<ModeId>)>) -> Result<Self> {
        if detectors.is_empty() {
            return Err(Error::EmptyModeList);
        }
        let mut names = BTreeSet::new();
        let mut modes = BTreeSet::new();
        for (d, ms) in &detectors {
            if !names.insert(d.clone()) {
                return Err(Error::DuplicateDetector(d.to_string()));
            }
            for m in ms {
                if !modes.insert(m.clone()) {
                    return Err(Error::DuplicateMode(m.clone()));
                }
            }
        }
        Ok(Self { detectors })
    }

    /// One detector per mode, named after the mode (`a1:H`).
    pub fn from_modes(modes: &[ModeId]) -> Result<Self> {
        Self::new(modes.iter().map(|m| (DetectorId::new(m.to_string()), vec![m.clone()])).collect())
    }

    pub fn detectors(&self) -> &[(DetectorId, Vec<ModeId>)] {
        &self.detectors
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }
}

/// One measurement outcome. The residual is the normalized conditional state
/// of the unmeasured modes, or the empty marker when the outcome merges
/// records that leave the rest in a mixed state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeBranch {
    pub pattern: CoincidencePattern,
    pub counts: BTreeMap<DetectorId, u32>,
    pub probability: f64,
    pub residual: PhotonicState,
}

/// Incoherently combines sub-outcomes that share a record. The residual is
/// kept only when every component leaves the same pure state.
pub(crate) fn merge_residuals(parts: &[(f64, PhotonicState)]) -> Option<PhotonicState> {
    let (_, first) = parts.iter().find(|(p, s)| *p > 0.0 && !s.is_empty())?;
    let first = first.normalized()?;
    for (p, s) in parts {
        if *p <= 0.0 || s.is_empty() {
            continue;
        }
        match first.fidelity(s) {
            Ok(f) if f >= 1.0 - TOLERANCE => {}
            _ => return None,
        }
    }
    Some(first)
}

/// Per-detector photon counts of every measurement record, with the
/// unnormalized conditional state of the unmeasured modes. Records are as
/// fine as the mode level: two records may share the same counts.
pub(crate) fn split_records(
    state: &PhotonicState,
    assembly: &DetectorAssembly,
) -> Result<Vec<(Vec<u32>, PhotonicState)>> {
    let mut idx = Vec::new();
    let mut owner = Vec::new();
    for (k, (_, modes)) in assembly.detectors.iter().enumerate() {
        for m in modes {
            idx.push(state.mode_index(m)?);
            owner.push(k);
        }
    }
    Ok(state
        .split_by(&idx)
        .into_iter()
        .map(|(key, sub)| {
            let mut counts = vec![0u32; assembly.len()];
            for (n, &k) in key.iter().zip(&owner) {
                counts[k] += u32::from(*n);
            }
            (counts, sub)
        })
        .collect())
}

/// Removes the listed detectors' modes from a registry.
pub(crate) fn unmeasured_modes(state: &PhotonicState, assembly: &DetectorAssembly) -> Vec<ModeId> {
    let gone: BTreeSet<&ModeId> = assembly.detectors.iter().flat_map(|(_, ms)| ms).collect();
    state.modes().iter().filter(|m| !gone.contains(m)).cloned().collect()
}

pub fn measure(state: &PhotonicState, assembly: &DetectorAssembly, model: DetectorModel) -> Result<Vec<OutcomeBranch>> {
    let records = split_records(state, assembly)?;
    let norm = state.norm_squared();
    if norm <= 0.0 {
        return Ok(Vec::new());
    }
    let mut grouped: BTreeMap<Vec<u32>, Vec<(f64, PhotonicState)>> = BTreeMap::new();
    for (counts, sub) in records {
        let record = match model {
            DetectorModel::PhotonNumberResolving => counts,
            DetectorModel::Threshold => counts.into_iter().map(|c| u32::from(c > 0)).collect(),
        };
        let p = sub.norm_squared() / norm;
        grouped.entry(record).or_default().push((p, sub));
    }
    let empty_rest = PhotonicState::empty(unmeasured_modes(state, assembly))?;
    let mut branches: Vec<OutcomeBranch> = grouped
        .into_iter()
        .map(|(record, parts)| {
            let counts: BTreeMap<DetectorId, u32> = assembly
                .detectors
                .iter()
                .zip(&record)
                .filter(|(_, &c)| c > 0)
                .map(|((d, _), &c)| (d.clone(), c))
                .collect();
            OutcomeBranch {
                pattern: CoincidencePattern(counts.keys().cloned().collect()),
                probability: parts.iter().map(|(p, _)| p).sum(),
                residual: merge_residuals(&parts).unwrap_or_else(|| empty_rest.clone()),
                counts,
            }
        })
        .collect();
    branches.sort_by(|a, b| a.pattern.cmp(&b.pattern).then_with(|| a.counts.cmp(&b.counts)));
    Ok(branches)
}

/// Measures each listed mode with its own detector, named after the mode.
pub fn measure_modes(state: &PhotonicState, modes: &[ModeId], model: DetectorModel) -> Result<Vec<OutcomeBranch>> {
    measure(state, &DetectorAssembly::from_modes(modes)?, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::pbs;
    use crate::fock::{registry, FockBasisVector};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn natural_order() {
        let mut v: Vec<DetectorId> =
            ["D10", "D5", "D12", "D7", "D1'", "D1"].into_iter().map(DetectorId::from).collect();
        v.sort();
        let names: Vec<&str> = v.iter().map(|d| d.as_str()).collect();
        assert_eq!(names, ["D1", "D1'", "D5", "D7", "D10", "D12"]);
    }

    #[test]
    fn pattern_text_forms() {
        let p: CoincidencePattern = "D11+D5+D9+D7".parse().unwrap();
        assert_eq!(p.to_string(), "D5+D7+D9+D11");
        assert_eq!(p.compact(), "D5D7D9D11");
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"["D5","D7","D9","D11"]"#);
        assert!("".parse::<CoincidencePattern>().unwrap().is_empty());
        let g: CoincidencePattern = "g1.D1+g1.D4+g2.D2".parse().unwrap();
        assert_eq!(g.strip_prefix("g1.").to_string(), "D1+D4");
    }

    #[test]
    fn diagonal_photon_gives_two_even_branches() {
        let d = PhotonicState::polarized_photon(
            "a",
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        )
        .unwrap();
        let branches = measure_modes(&d, &registry(&["a"]), DetectorModel::PhotonNumberResolving).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert!((b.probability - 0.5).abs() < 1e-12);
            assert_eq!(b.residual.modes().len(), 0);
            assert!(b.residual.is_normalized());
        }
    }

    #[test]
    fn bunched_pbs_output_lands_in_one_path() {
        let hv = PhotonicState::basis(
            registry(&["a1", "b1"]),
            &FockBasisVector::new().with(ModeId::h("a1"), 1).with(ModeId::v("b1"), 1),
        )
        .unwrap()
        .apply_map(&pbs("a1", "b1", "c1", "d1").unwrap())
        .unwrap();
        let branches = measure_modes(&hv, &registry(&["c1"]), DetectorModel::PhotonNumberResolving).unwrap();
        assert_eq!(branches.len(), 1);
        let b = &branches[0];
        assert!((b.probability - 1.0).abs() < 1e-12);
        assert_eq!(b.counts.values().sum::<u32>(), 2);
        assert_eq!(b.residual.spatial_labels(), ["d1"]);
    }

    #[test]
    fn empty_mode_list_is_rejected() {
        let s = PhotonicState::photon(ModeId::h("a"));
        assert_eq!(measure_modes(&s, &[], DetectorModel::Threshold).unwrap_err(), Error::EmptyModeList);
    }

    #[test]
    fn threshold_merges_counts() {
        // (|2H> + |1H>)/sqrt2 in one path: threshold sees a single "fired" record
        let s = PhotonicState::from_terms(
            registry(&["a"]),
            [
                (FockBasisVector::new().with(ModeId::h("a"), 2), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (FockBasisVector::new().with(ModeId::h("a"), 1), Complex64::new(FRAC_1_SQRT_2, 0.0)),
            ],
        )
        .unwrap();
        let pnr = measure_modes(&s, &[ModeId::h("a")], DetectorModel::PhotonNumberResolving).unwrap();
        let thr = measure_modes(&s, &[ModeId::h("a")], DetectorModel::Threshold).unwrap();
        assert_eq!(pnr.len(), 2);
        assert_eq!(thr.len(), 1);
        assert!((thr[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polarization_insensitive_detector() {
        let d = PhotonicState::polarized_photon("a", Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)).unwrap();
        let asm = DetectorAssembly::new(vec![(DetectorId::from("D1"), registry(&["a"]))]).unwrap();
        let b = measure(&d, &asm, DetectorModel::PhotonNumberResolving).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].pattern.to_string(), "D1");
        assert!((b[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn assembly_rejects_duplicates() {
        let m = ModeId::h("a");
        assert!(
            DetectorAssembly::new(vec![("D1".into(), vec![m.clone()]), ("D1".into(), vec![ModeId::v("a")])]).is_err()
        );
        assert!(DetectorAssembly::new(vec![("D1".into(), vec![m.clone()]), ("D2".into(), vec![m])]).is_err());
    }
}
