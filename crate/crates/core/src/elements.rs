//! Optical elements as creation-operator maps.
//!
//! Conventions:
//! - HWP at angle `t`: `H -> cos2t H + sin2t V`, `V -> sin2t H - cos2t V`
//!   (reflection matrix, determinant -1). At 22.5 degrees this is the
//!   Hadamard map with exact `1/sqrt2` entries.
//! - PBS: H transmitted (`in1 -> out1`, `in2 -> out2`), V reflected
//!   (`in1 -> out2`, `in2 -> out1`), no phase on reflection.
//! - 50:50 BS, [`BsConvention::Real`]: `in1 -> (out1 + out2)/sqrt2`,
//!   `in2 -> (out1 - out2)/sqrt2`; [`BsConvention::ImaginaryReflection`]:
//!   `in1 -> (out1 + i out2)/sqrt2`, `in2 -> (i out1 + out2)/sqrt2`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeId, ModeLinearMap, PhotonicState, Polarization};

/// Angle at which a half-wave plate acts as a Hadamard gate.
pub const HADAMARD_ANGLE: f64 = FRAC_PI_8;

fn path(label: &str) -> Vec<ModeId> {
    vec![ModeId::h(label), ModeId::v(label)]
}

pub fn hwp(spatial: &str, angle: f64) -> ModeLinearMap {
    let (s, c) =
        if (angle - HADAMARD_ANGLE).abs() < 1e-15 { (FRAC_1_SQRT_2, FRAC_1_SQRT_2) } else { (2.0 * angle).sin_cos() };
    ModeLinearMap::from_real_rows(path(spatial), path(spatial), &[&[c, s], &[s, -c]])
        .expect("wave-plate matrix is orthogonal")
}

pub fn hadamard(spatial: &str) -> ModeLinearMap {
    hwp(spatial, HADAMARD_ANGLE)
}

fn distinct(labels: [&str; 4]) -> Result<()> {
    for i in 0..4 {
        for j in i + 1..4 {
            if labels[i] == labels[j] {
                return Err(Error::DuplicateLabel(labels[i].to_string()));
            }
        }
    }
    Ok(())
}

pub fn pbs(in1: &str, in2: &str, out1: &str, out2: &str) -> Result<ModeLinearMap> {
    distinct([in1, in2, out1, out2])?;
    let domain = vec![ModeId::h(in1), ModeId::v(in1), ModeId::h(in2), ModeId::v(in2)];
    let codomain = vec![ModeId::h(out1), ModeId::v(out1), ModeId::h(out2), ModeId::v(out2)];
    // columns: in1:H, in1:V, in2:H, in2:V ; rows: out1:H, out1:V, out2:H, out2:V
    ModeLinearMap::from_real_rows(
        domain,
        codomain,
        &[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 0.0]],
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsConvention {
    #[default]
    Real,
    ImaginaryReflection,
}

pub fn bs50(in1: &str, in2: &str, out1: &str, out2: &str) -> Result<ModeLinearMap> {
    bs50_with(in1, in2, out1, out2, BsConvention::Real)
}

pub fn bs50_with(in1: &str, in2: &str, out1: &str, out2: &str, convention: BsConvention) -> Result<ModeLinearMap> {
    distinct([in1, in2, out1, out2])?;
    let r = FRAC_1_SQRT_2;
    let (t1, r1, r2, t2) = match convention {
        // in1 -> t1 out1 + r1 out2, in2 -> r2 out1 + t2 out2
        BsConvention::Real => {
            (Complex64::new(r, 0.0), Complex64::new(r, 0.0), Complex64::new(r, 0.0), Complex64::new(-r, 0.0))
        }
        BsConvention::ImaginaryReflection => {
            (Complex64::new(r, 0.0), Complex64::new(0.0, r), Complex64::new(0.0, r), Complex64::new(r, 0.0))
        }
    };
    let mut domain = Vec::new();
    let mut codomain = Vec::new();
    for p in Polarization::BOTH {
        domain.push(ModeId::new(in1, p));
        domain.push(ModeId::new(in2, p));
        codomain.push(ModeId::new(out1, p));
        codomain.push(ModeId::new(out2, p));
    }
    let mut m = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
    for k in 0..2 {
        let (i1, i2) = (2 * k, 2 * k + 1);
        m[(i1, i1)] = t1;
        m[(i2, i1)] = r1;
        m[(i1, i2)] = r2;
        m[(i2, i2)] = t2;
    }
    ModeLinearMap::new(domain, codomain, m)
}

/// Measurement-side linear polarizer. It is not a unitary element: it keeps
/// the component along `axis` and discards the orthogonal one, and is only
/// evaluated in front of a detector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polarizer {
    pub spatial: String,
    pub axis: f64,
}

pub fn polarizer(spatial: &str, axis: f64) -> Polarizer {
    Polarizer { spatial: spatial.to_string(), axis }
}

impl Polarizer {
    /// Rotation taking the transmission axis to `H` and its orthogonal to `V`.
    pub fn analyzer_map(&self) -> ModeLinearMap {
        let (s, c) = self.axis.sin_cos();
        ModeLinearMap::from_real_rows(path(&self.spatial), path(&self.spatial), &[&[c, s], &[-s, c]])
            .expect("rotation is orthogonal")
    }

    /// Distribution of the number of transmitted photons, ascending.
    pub fn transmission(&self, state: &PhotonicState) -> Result<Vec<(u8, f64)>> {
        let rotated = state.apply_map(&self.analyzer_map())?;
        let along = ModeId::h(&self.spatial);
        let norm = rotated.norm_squared();
        let mut dist = std::collections::BTreeMap::<u8, f64>::new();
        for (b, a) in rotated.terms() {
            *dist.entry(b.count(&along)).or_default() += a.norm_sqr() / norm;
        }
        Ok(dist.into_iter().collect())
    }

    /// Probability that at least one photon passes.
    pub fn transmit_probability(&self, state: &PhotonicState) -> Result<f64> {
        Ok(self.transmission(state)?.into_iter().filter(|(n, _)| *n > 0).map(|(_, p)| p).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{registry, FockBasisVector};
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two(m1: ModeId, m2: ModeId, labels: &[&str]) -> PhotonicState {
        PhotonicState::basis(registry(labels), &FockBasisVector::new().with(m1, 1).with(m2, 1)).unwrap()
    }

    #[test]
    fn hadamard_on_v() {
        let out = PhotonicState::photon(ModeId::v("a1")).apply_map(&hwp("a1", 22.5f64.to_radians())).unwrap();
        let expect = PhotonicState::polarized_photon("a1", c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)).unwrap();
        assert!((out.inner_product(&expect).unwrap() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_angle_fixes_h() {
        let h = PhotonicState::photon(ModeId::h("a"));
        let out = h.apply_map(&hwp("a", 0.0)).unwrap();
        assert!((out.fidelity(&h).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_involution_matrix() {
        let m = hadamard("a");
        let sq = m.matrix() * m.matrix();
        assert!((sq - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn general_angle_has_determinant_minus_one() {
        for t in [0.1, 0.7, 2.0] {
            let m = hwp("a", t);
            let det = m.matrix()[(0, 0)] * m.matrix()[(1, 1)] - m.matrix()[(0, 1)] * m.matrix()[(1, 0)];
            assert!((det + c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn pbs_routes_by_polarization() {
        let map = pbs("a1", "b1", "c1", "d1").unwrap();
        let h = PhotonicState::photon(ModeId::h("a1"))
            .tensor(&PhotonicState::vacuum(registry(&["b1"])).unwrap())
            .unwrap()
            .apply_map(&map)
            .unwrap();
        let (b, _) = h.terms().next().unwrap();
        assert_eq!(b.count(&ModeId::h("c1")), 1);
        let v = PhotonicState::photon(ModeId::v("a1"))
            .tensor(&PhotonicState::vacuum(registry(&["b1"])).unwrap())
            .unwrap()
            .apply_map(&map)
            .unwrap();
        let (b, _) = v.terms().next().unwrap();
        assert_eq!(b.count(&ModeId::v("d1")), 1);
    }

    #[test]
    fn pbs_bunches_h_and_v_from_opposite_inputs() {
        let out = two(ModeId::h("a1"), ModeId::v("b1"), &["a1", "b1"])
            .apply_map(&pbs("a1", "b1", "c1", "d1").unwrap())
            .unwrap();
        assert_eq!(out.len(), 1);
        let (b, a) = out.terms().next().unwrap();
        assert_eq!(b.spatial_count("c1"), 2);
        assert_eq!(b.spatial_count("d1"), 0);
        assert!((a - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn pbs_rejects_duplicate_labels() {
        assert_eq!(pbs("a", "b", "a", "d").unwrap_err(), Error::DuplicateLabel("a".into()));
        assert!(bs50("a", "a", "c", "d").is_err());
    }

    #[test]
    fn hong_ou_mandel_dip() {
        for conv in [BsConvention::Real, BsConvention::ImaginaryReflection] {
            let out = two(ModeId::h("p"), ModeId::h("q"), &["p", "q"])
                .apply_map(&bs50_with("p", "q", "u", "w", conv).unwrap())
                .unwrap();
            let coincidence: f64 = out
                .terms()
                .filter(|(b, _)| b.spatial_count("u") == 1 && b.spatial_count("w") == 1)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            assert!(coincidence < 1e-12, "{conv:?}");
        }
        let out =
            two(ModeId::h("p"), ModeId::h("q"), &["p", "q"]).apply_map(&bs50("p", "q", "u", "w").unwrap()).unwrap();
        let two_u = FockBasisVector::new().with(ModeId::h("u"), 2);
        let two_w = FockBasisVector::new().with(ModeId::h("w"), 2);
        assert!((out.amplitude(&two_u) - c(FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((out.amplitude(&two_w) - c(-FRAC_1_SQRT_2)).norm() < 1e-12);
    }

    #[test]
    fn distinguishable_photons_split_half_the_time() {
        let out =
            two(ModeId::h("p"), ModeId::v("q"), &["p", "q"]).apply_map(&bs50("p", "q", "u", "w").unwrap()).unwrap();
        let coincidence: f64 = out
            .terms()
            .filter(|(b, _)| b.spatial_count("u") == 1 && b.spatial_count("w") == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        assert!((coincidence - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_photon_splits_evenly() {
        let psi =
            PhotonicState::photon(ModeId::h("p")).tensor(&PhotonicState::vacuum(registry(&["q"])).unwrap()).unwrap();
        let out = psi.apply_map(&bs50("p", "q", "u", "w").unwrap()).unwrap();
        for label in ["u", "w"] {
            let p: f64 = out.terms().filter(|(b, _)| b.spatial_count(label) == 1).map(|(_, a)| a.norm_sqr()).sum();
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn malus_law() {
        let h = PhotonicState::photon(ModeId::h("a"));
        assert!((polarizer("a", FRAC_PI_4).transmit_probability(&h).unwrap() - 0.5).abs() < 1e-12);
        assert!((polarizer("a", 0.0).transmit_probability(&h).unwrap() - 1.0).abs() < 1e-12);
        let d = PhotonicState::polarized_photon("a", c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
        assert!((polarizer("a", FRAC_PI_4).transmit_probability(&d).unwrap() - 1.0).abs() < 1e-12);
    }
}
