use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ModeId;
use crate::error::{Error, Result};
use crate::TOLERANCE;

/// Linear substitution rule on creation operators.
///
/// Input operator `i` (the `i`-th entry of `domain`) becomes
/// `sum_j matrix[(j, i)] * output operator j`, where output `j` is the `j`-th
/// entry of `codomain`. The matrix is always an isometry.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeLinearMap {
    domain: Vec<ModeId>,
    codomain: Vec<ModeId>,
    matrix: DMatrix<Complex64>,
}

impl ModeLinearMap {
    pub fn new(domain: Vec<ModeId>, codomain: Vec<ModeId>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != codomain.len() || matrix.ncols() != domain.len() {
            return Err(Error::MatrixShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                domain: domain.len(),
                codomain: codomain.len(),
            });
        }
        for list in [&domain, &codomain] {
            let mut seen = BTreeSet::new();
            for m in list {
                if !seen.insert(m) {
                    return Err(Error::DuplicateMode(m.clone()));
                }
            }
        }
        let deviation = isometry_deviation(&matrix);
        if deviation > TOLERANCE {
            return Err(Error::NotIsometric { deviation });
        }
        Ok(Self { domain, codomain, matrix })
    }

    /// Build from real entries given row by row (`rows[j][i]` = image weight
    /// of input `i` on output `j`).
    pub fn from_real_rows(domain: Vec<ModeId>, codomain: Vec<ModeId>, rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let matrix = DMatrix::from_fn(nrows, ncols, |j, i| Complex64::new(rows[j][i], 0.0));
        Self::new(domain, codomain, matrix)
    }

    pub fn domain(&self) -> &[ModeId] {
        &self.domain
    }

    pub fn codomain(&self) -> &[ModeId] {
        &self.codomain
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Image of input mode `i` as `(output mode, weight)` pairs with nonzero weight.
    pub(crate) fn image(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (0..self.codomain.len()).map(move |j| (j, self.matrix[(j, i)])).filter(|(_, w)| w.norm_sqr() > 0.0)
    }

    /// The inverse substitution. Only defined for square (unitary) maps.
    pub fn adjoint(&self) -> Result<Self> {
        if self.domain.len() != self.codomain.len() {
            return Err(Error::InvalidParameter("adjoint of a non-square isometry is not an isometry".into()));
        }
        Self::new(self.codomain.clone(), self.domain.clone(), self.matrix.adjoint())
    }

    /// `self` followed by `next`. The codomain of `self` must equal the domain
    /// of `next` as a set.
    pub fn then(&self, next: &ModeLinearMap) -> Result<Self> {
        let a: BTreeSet<_> = self.codomain.iter().collect();
        let b: BTreeSet<_> = next.domain.iter().collect();
        if a != b {
            return Err(Error::RegistryMismatch);
        }
        // reorder next's columns to follow self's codomain order
        let perm: Vec<usize> = self.codomain.iter().map(|m| next.domain.iter().position(|d| d == m).unwrap()).collect();
        let reordered = DMatrix::from_fn(next.codomain.len(), perm.len(), |r, c| next.matrix[(r, perm[c])]);
        Self::new(self.domain.clone(), next.codomain.clone(), reordered * &self.matrix)
    }
}

fn isometry_deviation(u: &DMatrix<Complex64>) -> f64 {
    let gram = u.adjoint() * u;
    let n = gram.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((gram[(r, c)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(label: &str) -> Vec<ModeId> {
        vec![ModeId::h(label), ModeId::v(label)]
    }

    #[test]
    fn rejects_non_isometry() {
        let err = ModeLinearMap::from_real_rows(pair("a"), pair("a"), &[&[1.0, 1.0], &[0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotIsometric { .. }));
    }

    #[test]
    fn rejects_duplicate_modes_and_bad_shapes() {
        let dup = vec![ModeId::h("a"), ModeId::h("a")];
        let err = ModeLinearMap::from_real_rows(dup, pair("b"), &[&[1.0, 0.0], &[0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::DuplicateMode(_)));
        let err = ModeLinearMap::from_real_rows(pair("a"), pair("b"), &[&[1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::MatrixShape { .. }));
    }

    #[test]
    fn accepts_rectangular_isometry() {
        // one input spread over two outputs
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = ModeLinearMap::from_real_rows(vec![ModeId::h("a")], pair("b"), &[&[s], &[s]]).unwrap();
        assert!(m.adjoint().is_err());
    }

    #[test]
    fn then_composes_in_order() {
        let swap = ModeLinearMap::from_real_rows(pair("a"), pair("a"), &[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let both = swap.then(&swap).unwrap();
        assert!((both.matrix() - DMatrix::identity(2, 2)).norm() < 1e-15);
    }
}
