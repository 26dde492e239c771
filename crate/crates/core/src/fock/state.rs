use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use super::{ModeId, ModeLinearMap};
use crate::error::{Error, Result};
use crate::{DEFAULT_PHOTON_CAP, PRUNE_EPSILON, TOLERANCE};

/// Occupation numbers in canonical sparse form: modes holding no photon are
/// absent, so two vectors are equal exactly when they describe the same ket.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisVector(BTreeMap<ModeId, u8>);

impl FockBasisVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `n` photons to `mode`.
    pub fn with(mut self, mode: ModeId, n: u8) -> Self {
        if n > 0 {
            *self.0.entry(mode).or_insert(0) += n;
        }
        self
    }

    pub fn get(&self, mode: &ModeId) -> u8 {
        self.0.get(mode).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.0.values().map(|&n| u32::from(n)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeId, u8)> {
        self.0.iter().map(|(m, &n)| (m, n))
    }
}

impl FromIterator<(ModeId, u8)> for FockBasisVector {
    fn from_iter<T: IntoIterator<Item = (ModeId, u8)>>(iter: T) -> Self {
        iter.into_iter().fold(Self::new(), |v, (m, n)| v.with(m, n))
    }
}

/// Borrowed view of one basis ket of a state, aligned with its registry.
#[derive(Clone, Copy)]
pub struct Basis<'a> {
    modes: &'a [ModeId],
    occ: &'a [u8],
}

impl<'a> Basis<'a> {
    pub fn count(&self, mode: &ModeId) -> u8 {
        self.modes.binary_search(mode).map_or(0, |i| self.occ[i])
    }

    /// Photons in a spatial path, summed over both polarizations.
    pub fn spatial_count(&self, label: &str) -> u32 {
        let start = self.modes.partition_point(|m| m.spatial() < label);
        self.modes[start..]
            .iter()
            .zip(&self.occ[start..])
            .take_while(|(m, _)| m.spatial() == label)
            .map(|(_, &n)| u32::from(n))
            .sum()
    }

    pub fn total(&self) -> u32 {
        self.occ.iter().map(|&n| u32::from(n)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a ModeId, u8)> {
        self.modes.iter().zip(self.occ.iter().copied()).filter(|(_, n)| *n > 0)
    }

    pub fn to_vector(&self) -> FockBasisVector {
        self.iter().map(|(m, n)| (m.clone(), n)).collect()
    }
}

/// Sparse pure state over an explicit, sorted registry of polarization modes.
///
/// Amplitudes below [`PRUNE_EPSILON`] in magnitude are dropped. The state may
/// be sub-normalized (its squared norm then carries the probability of the
/// branch that produced it); a state with no terms at all is the empty marker
/// returned by impossible post-selections, distinct from the vacuum.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonicState {
    modes: Vec<ModeId>,
    terms: BTreeMap<Vec<u8>, Complex64>,
    norm_squared: f64,
    photon_cap: u32,
}

fn canonical_registry(mut modes: Vec<ModeId>) -> Result<Vec<ModeId>> {
    modes.sort();
    if let Some(w) = modes.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateMode(w[0].clone()));
    }
    Ok(modes)
}

fn sqrt_factorial(n: u8) -> f64 {
    (1..=u32::from(n)).map(f64::from).product::<f64>().sqrt()
}

impl PhotonicState {
    fn from_raw(modes: Vec<ModeId>, mut terms: BTreeMap<Vec<u8>, Complex64>, photon_cap: u32) -> Result<Self> {
        terms.retain(|_, a| a.norm() > PRUNE_EPSILON);
        for occ in terms.keys() {
            let total: u32 = occ.iter().map(|&n| u32::from(n)).sum();
            if total > photon_cap {
                return Err(Error::PhotonCapExceeded { total, cap: photon_cap });
            }
        }
        let norm_squared = terms.values().map(|a| a.norm_sqr()).sum();
        Ok(Self { modes, terms, norm_squared, photon_cap })
    }

    pub fn vacuum(modes: Vec<ModeId>) -> Result<Self> {
        let modes = canonical_registry(modes)?;
        let zero = vec![0; modes.len()];
        Self::from_raw(modes, BTreeMap::from([(zero, Complex64::new(1.0, 0.0))]), DEFAULT_PHOTON_CAP)
    }

    /// The no-terms marker over a registry.
    pub fn empty(modes: Vec<ModeId>) -> Result<Self> {
        Self::from_raw(canonical_registry(modes)?, BTreeMap::new(), DEFAULT_PHOTON_CAP)
    }

    pub fn from_terms(
        modes: Vec<ModeId>,
        terms: impl IntoIterator<Item = (FockBasisVector, Complex64)>,
    ) -> Result<Self> {
        let modes = canonical_registry(modes)?;
        let mut acc: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (v, amp) in terms {
            let mut occ = vec![0u8; modes.len()];
            for (m, n) in v.iter() {
                let i = modes.binary_search(m).map_err(|_| Error::UnknownMode(m.clone()))?;
                occ[i] = n;
            }
            *acc.entry(occ).or_default() += amp;
        }
        Self::from_raw(modes, acc, DEFAULT_PHOTON_CAP)
    }

    pub fn basis(modes: Vec<ModeId>, v: &FockBasisVector) -> Result<Self> {
        Self::from_terms(modes, [(v.clone(), Complex64::new(1.0, 0.0))])
    }

    /// One photon in `mode`, registered on both polarizations of its path.
    pub fn photon(mode: ModeId) -> Self {
        let modes = super::registry(&[mode.spatial()]);
        Self::basis(modes, &FockBasisVector::new().with(mode, 1)).expect("single photon is always valid")
    }

    /// `alpha |H> + beta |V>` for a single photon in `spatial`, not renormalized.
    pub fn polarized_photon(spatial: &str, alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::from_terms(
            super::registry(&[spatial]),
            [
                (FockBasisVector::new().with(ModeId::h(spatial), 1), alpha),
                (FockBasisVector::new().with(ModeId::v(spatial), 1), beta),
            ],
        )
    }

    pub fn with_photon_cap(self, cap: u32) -> Result<Self> {
        Self::from_raw(self.modes, self.terms, cap)
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    /// Distinct spatial labels in registry order.
    pub fn spatial_labels(&self) -> Vec<&str> {
        let mut labels: Vec<&str> = self.modes.iter().map(|m| m.spatial()).collect();
        labels.dedup();
        labels
    }

    pub fn terms(&self) -> impl Iterator<Item = (Basis<'_>, Complex64)> + '_ {
        self.terms.iter().map(|(occ, &a)| (Basis { modes: &self.modes, occ }, a))
    }

    pub fn amplitude(&self, v: &FockBasisVector) -> Complex64 {
        let mut occ = vec![0u8; self.modes.len()];
        for (m, n) in v.iter() {
            match self.modes.binary_search(m) {
                Ok(i) => occ[i] = n,
                Err(_) => return Complex64::new(0.0, 0.0),
            }
        }
        self.terms.get(&occ).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.norm_squared
    }

    pub fn photon_cap(&self) -> u32 {
        self.photon_cap
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_squared - 1.0).abs() <= TOLERANCE
    }

    /// `None` for the empty marker.
    pub fn normalized(&self) -> Option<Self> {
        if self.is_empty() || self.norm_squared <= 0.0 {
            return None;
        }
        Some(self.scaled(Complex64::new(1.0 / self.norm_squared.sqrt(), 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let terms = self.terms.iter().map(|(k, &a)| (k.clone(), a * c)).collect();
        Self::from_raw(self.modes.clone(), terms, self.photon_cap).expect("scaling keeps photon numbers")
    }

    /// `sum_i c_i |psi_i>` over states sharing one registry.
    pub fn superpose(parts: &[(Complex64, &PhotonicState)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyModeList)?.1;
        let mut acc: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        let mut cap = 0;
        for (c, s) in parts {
            if s.modes != first.modes {
                return Err(Error::RegistryMismatch);
            }
            cap = cap.max(s.photon_cap);
            for (k, a) in &s.terms {
                *acc.entry(k.clone()).or_default() += c * a;
            }
        }
        Self::from_raw(first.modes.clone(), acc, cap)
    }

    pub fn tensor(&self, other: &PhotonicState) -> Result<Self> {
        if let Some(m) = self.modes.iter().find(|m| other.modes.binary_search(m).is_ok()) {
            return Err(Error::ModeCollision(m.clone()));
        }
        let modes = canonical_registry(self.modes.iter().chain(&other.modes).cloned().collect())?;
        let left_idx: Vec<usize> = self.modes.iter().map(|m| modes.binary_search(m).unwrap()).collect();
        let right_idx: Vec<usize> = other.modes.iter().map(|m| modes.binary_search(m).unwrap()).collect();
        let mut terms = BTreeMap::new();
        for (lo, la) in &self.terms {
            for (ro, ra) in &other.terms {
                let mut occ = vec![0u8; modes.len()];
                for (&i, &n) in left_idx.iter().zip(lo) {
                    occ[i] = n;
                }
                for (&i, &n) in right_idx.iter().zip(ro) {
                    occ[i] = n;
                }
                terms.insert(occ, la * ra);
            }
        }
        Self::from_raw(modes, terms, self.photon_cap.max(other.photon_cap))
    }

    /// Substitutes every creation operator on the map's domain by its image
    /// and re-expands in the Fock basis with `sqrt(n!)` normalization.
    pub fn apply_map(&self, map: &ModeLinearMap) -> Result<Self> {
        let dom_idx = map
            .domain()
            .iter()
            .map(|m| self.modes.binary_search(m).map_err(|_| Error::UnknownMode(m.clone())))
            .collect::<Result<Vec<usize>>>()?;
        let in_domain: BTreeSet<usize> = dom_idx.iter().copied().collect();
        let kept: Vec<ModeId> =
            self.modes.iter().enumerate().filter(|(i, _)| !in_domain.contains(i)).map(|(_, m)| m.clone()).collect();
        if let Some(m) = map.codomain().iter().find(|m| kept.binary_search(m).is_ok()) {
            return Err(Error::ModeCollision(m.clone()));
        }
        let modes = canonical_registry(kept.into_iter().chain(map.codomain().iter().cloned()).collect())?;
        let carry: Vec<(usize, usize)> = self
            .modes
            .iter()
            .enumerate()
            .filter(|(i, _)| !in_domain.contains(i))
            .map(|(i, m)| (i, modes.binary_search(m).unwrap()))
            .collect();
        let cod_idx: Vec<usize> = map.codomain().iter().map(|m| modes.binary_search(m).unwrap()).collect();
        let ncod = cod_idx.len();

        let mut out: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, &amp) in &self.terms {
            // expand prod_i (sum_j u[j][i] b_j^dag)^{n_i} one photon at a time
            let mut poly: BTreeMap<Vec<u8>, Complex64> = BTreeMap::from([(vec![0u8; ncod], Complex64::new(1.0, 0.0))]);
            let mut norm_in = 1.0;
            for (col, &src) in dom_idx.iter().enumerate() {
                let n = occ[src];
                norm_in *= sqrt_factorial(n);
                for _ in 0..n {
                    let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
                    for (mono, c) in &poly {
                        for (j, w) in map.image(col) {
                            let mut m = mono.clone();
                            m[j] += 1;
                            *next.entry(m).or_default() += c * w;
                        }
                    }
                    poly = next;
                }
            }
            let mut base = vec![0u8; modes.len()];
            for &(from, to) in &carry {
                base[to] = occ[from];
            }
            for (mono, c) in poly {
                let norm_out: f64 = mono.iter().map(|&m| sqrt_factorial(m)).product();
                let mut o = base.clone();
                for (j, &m) in mono.iter().enumerate() {
                    o[cod_idx[j]] += m;
                }
                *out.entry(o).or_default() += amp * c * (norm_out / norm_in);
            }
        }
        Self::from_raw(modes, out, self.photon_cap)
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &PhotonicState) -> Result<Complex64> {
        if self.modes != other.modes {
            return Err(Error::RegistryMismatch);
        }
        Ok(self.terms.iter().filter_map(|(k, a)| other.terms.get(k).map(|b| a.conj() * b)).sum())
    }

    /// `|<a|b>|^2 / (<a|a><b|b>)`; zero when either side is empty.
    pub fn fidelity(&self, other: &PhotonicState) -> Result<f64> {
        let ip = self.inner_product(other)?;
        let denom = self.norm_squared * other.norm_squared;
        Ok(if denom > 0.0 { ip.norm_sqr() / denom } else { 0.0 })
    }

    /// Unnormalized restriction to basis kets satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(&Basis<'_>) -> bool) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(occ, _)| keep(&Basis { modes: &self.modes, occ }))
            .map(|(k, &a)| (k.clone(), a))
            .collect();
        Self::from_raw(self.modes.clone(), terms, self.photon_cap).expect("restriction keeps photon numbers")
    }

    /// Renormalized restriction plus the probability of the kept event
    /// relative to this state's norm. An impossible event yields the empty
    /// marker and probability 0.
    pub fn post_select(&self, keep: impl Fn(&Basis<'_>) -> bool) -> (Self, f64) {
        let kept = self.restrict(keep);
        if self.norm_squared <= 0.0 {
            return (kept, 0.0);
        }
        let p = kept.norm_squared / self.norm_squared;
        match kept.normalized() {
            Some(s) => (s, p),
            None => (kept, 0.0),
        }
    }

    /// Contracts the modes of `target` against its bra: the result lives on
    /// the remaining modes and carries `sum conj(t) * a` over matching kets.
    pub fn partial_project(&self, target: &PhotonicState) -> Result<Self> {
        let sub_idx = target
            .modes
            .iter()
            .map(|m| self.modes.binary_search(m).map_err(|_| Error::UnknownMode(m.clone())))
            .collect::<Result<Vec<usize>>>()?;
        let rest: Vec<usize> = (0..self.modes.len()).filter(|i| !sub_idx.contains(i)).collect();
        let modes: Vec<ModeId> = rest.iter().map(|&i| self.modes[i].clone()).collect();
        let mut out: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, &a) in &self.terms {
            let sub: Vec<u8> = sub_idx.iter().map(|&i| occ[i]).collect();
            if let Some(t) = target.terms.get(&sub) {
                let r: Vec<u8> = rest.iter().map(|&i| occ[i]).collect();
                *out.entry(r).or_default() += t.conj() * a;
            }
        }
        Self::from_raw(modes, out, self.photon_cap)
    }

    /// Groups terms by their occupation on `measured` (registry indices) and
    /// returns, per outcome, the unnormalized conditional state on the rest.
    pub(crate) fn split_by(&self, measured: &[usize]) -> BTreeMap<Vec<u8>, PhotonicState> {
        let rest: Vec<usize> = (0..self.modes.len()).filter(|i| !measured.contains(i)).collect();
        let modes: Vec<ModeId> = rest.iter().map(|&i| self.modes[i].clone()).collect();
        let mut groups: BTreeMap<Vec<u8>, BTreeMap<Vec<u8>, Complex64>> = BTreeMap::new();
        for (occ, &a) in &self.terms {
            let key: Vec<u8> = measured.iter().map(|&i| occ[i]).collect();
            let r: Vec<u8> = rest.iter().map(|&i| occ[i]).collect();
            *groups.entry(key).or_default().entry(r).or_default() += a;
        }
        groups
            .into_iter()
            .map(|(k, t)| {
                let s = Self::from_raw(modes.clone(), t, self.photon_cap).expect("subset of photons");
                (k, s)
            })
            .filter(|(_, s)| !s.is_empty())
            .collect()
    }

    pub(crate) fn mode_index(&self, mode: &ModeId) -> Result<usize> {
        self.modes.binary_search(mode).map_err(|_| Error::UnknownMode(mode.clone()))
    }
}

impl fmt::Display for PhotonicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("(empty)");
        }
        for (n, (b, a)) in self.terms().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({:+.6}{:+.6}i)|", a.re, a.im)?;
            let mut first = true;
            for (m, c) in b.iter() {
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                if c == 1 {
                    write!(f, "{m}")?;
                } else {
                    write!(f, "{c}{m}")?;
                }
            }
            f.write_str(">")?;
        }
        Ok(())
    }
}
