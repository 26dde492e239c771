//! Independent reference computations shared by the integration tests.
//!
//! Nothing here goes through the Fock engine: the post-selection oracle works
//! on plain polarization bit strings.

#![allow(dead_code)]

use cghz_core::fock::{FockBasisVector, ModeId, PhotonicState};
use num_complex::Complex64;

/// Probability that the PBS sorting network of the C-GHZ (or logic Bell)
/// analyzer leaves one photon in every output, computed on bit strings.
///
/// Photon `(i, j)` (logic qubit `i`, position `j`) is bit `i*m + j`, with
/// 0 = H and 1 = V. The Hadamard layer acts as the Walsh transform
/// `<x|H^{⊗nm}|y> = 2^{-nm/2} (-1)^{x·y}`. A chain of PBSs fed one photon per
/// input ends with one photon per output exactly when every photon of the
/// position group has the same polarization.
pub fn post_selection_oracle(n: usize, m: usize, flips: &[bool], sign: f64) -> f64 {
    let bits = n * m;
    // Pre-Hadamard support: each logic qubit is |0…0> or |1…1>.
    let mut support: Vec<(u64, f64)> = Vec::new();
    for (branch, branch_factor) in [(false, 1.0), (true, sign)] {
        for choice in 0u64..(1 << n) {
            let mut y = 0u64;
            let mut amp = branch_factor * std::f64::consts::FRAC_1_SQRT_2;
            for (i, &flip) in flips.iter().enumerate().take(n) {
                let minus = flip != branch;
                amp *= std::f64::consts::FRAC_1_SQRT_2;
                if (choice >> i) & 1 == 1 {
                    y |= ((1u64 << m) - 1) << (i * m);
                    if minus {
                        amp = -amp;
                    }
                }
            }
            support.push((y, amp));
        }
    }
    let scale = 2f64.powf(-(bits as f64) / 2.0);
    let mut total = 0.0;
    for x in 0u64..(1 << bits) {
        let sorted = (0..m).all(|j| {
            let first = (x >> j) & 1;
            (1..n).all(|i| (x >> (i * m + j)) & 1 == first)
        });
        if !sorted {
            continue;
        }
        let amp: f64 =
            support.iter().map(|&(y, a)| if (x & y).count_ones() % 2 == 0 { a } else { -a }).sum::<f64>() * scale;
        total += amp * amp;
    }
    total
}

/// Family flips written out independently: logic qubit `i < n-1` carries
/// `GHZ-` in the first branch when bit `i` of `index - 1` is set.
pub fn oracle_flips(n: usize, index: u32) -> Vec<bool> {
    (0..n).map(|i| i + 1 < n && ((index - 1) >> i) & 1 == 1).collect()
}

/// Basis vectors with at most two photons on the four modes of paths `x`, `y`.
pub fn two_path_basis() -> Vec<FockBasisVector> {
    let modes = two_path_modes();
    let mut out = vec![FockBasisVector::new()];
    for (i, a) in modes.iter().enumerate() {
        out.push(FockBasisVector::new().with(a.clone(), 1));
        for b in &modes[i..] {
            if a == b {
                out.push(FockBasisVector::new().with(a.clone(), 2));
            } else {
                out.push(FockBasisVector::new().with(a.clone(), 1).with(b.clone(), 1));
            }
        }
    }
    out
}

pub fn two_path_modes() -> Vec<ModeId> {
    vec![ModeId::h("x"), ModeId::v("x"), ModeId::h("y"), ModeId::v("y")]
}

/// A state on paths `x`, `y` from raw amplitudes (one per basis vector),
/// normalized; `None` when the amplitudes are all negligible.
pub fn two_path_state(amps: &[(f64, f64)]) -> Option<PhotonicState> {
    let terms = two_path_basis().into_iter().zip(amps).map(|(v, &(re, im))| (v, Complex64::new(re, im)));
    let s = PhotonicState::from_terms(two_path_modes(), terms).ok()?;
    if s.norm_squared() < 1e-6 {
        return None;
    }
    s.normalized()
}

/// `|a - b|^2` for states on one registry.
pub fn distance_squared(a: &PhotonicState, b: &PhotonicState) -> f64 {
    PhotonicState::superpose(&[(Complex64::new(1.0, 0.0), a), (Complex64::new(-1.0, 0.0), b)])
        .expect("same registry")
        .norm_squared()
}
