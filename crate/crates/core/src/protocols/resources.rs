use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resources of the analyzer for `N` logic qubits of `M` photons.
///
/// The structural counts follow the circuit: one QND (and so one ancilla
/// pair and two herald photons) per PBS, `M(N-1)` PBSs in total, and every
/// photon detected. The closed-form counts `(M-1)N` sources and
/// `[2(M-1)+M]N` detections are carried alongside; the two agree only when
/// `M = N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub ancilla_sources: u64,
    pub qnd_count: u64,
    /// Physical detectors: two heralds per QND plus `2N` per analyzer group.
    pub detector_count: u64,
    pub detected_photons: u64,
    pub paper_sources: u64,
    pub paper_detected_photons: u64,
}

pub fn resource_count(n: usize, m: usize) -> Result<ResourceCount> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(format!("N and M must both be at least 2 (got N={n}, M={m})")));
    }
    let (n, m) = (n as u64, m as u64);
    let qnd = m * (n - 1);
    Ok(ResourceCount {
        ancilla_sources: qnd,
        qnd_count: qnd,
        detector_count: 2 * qnd + 2 * n * m,
        detected_photons: n * m + 2 * qnd,
        paper_sources: (m - 1) * n,
        paper_detected_photons: (2 * (m - 1) + m) * n,
    })
}
