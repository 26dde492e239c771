//! Success probability with imperfect sources and detectors.
//!
//! Each ancilla pair is emitted with probability `p_s` and each photon is
//! detected with probability `p_d`. Two exponent conventions are offered:
//! [`Counting::Paper`] uses `(M-1)N` sources and `[2(M-1)+M]N` detections;
//! [`Counting::Structural`] uses the circuit's `M(N-1)` sources and
//! `MN + 2M(N-1)` detections.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::resources::resource_count;
use crate::error::{Error, Result};
use crate::measure::QndVariant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Counting {
    Paper,
    Structural,
}

impl fmt::Display for Counting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Counting::Paper => "paper",
            Counting::Structural => "structural",
        })
    }
}

impl FromStr for Counting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Counting::Paper),
            "structural" => Ok(Counting::Structural),
            _ => Err(Error::InvalidParameter(format!("unknown counting `{s}`"))),
        }
    }
}

/// Exponents `(of p_s, of p_d)` for the given convention.
pub fn exponents(m: usize, n: usize, counting: Counting) -> Result<(u32, u32)> {
    let r = resource_count(n, m)?;
    let (s, d) = match counting {
        Counting::Paper => (r.paper_sources, r.paper_detected_photons),
        Counting::Structural => (r.ancilla_sources, r.detected_photons),
    };
    Ok((s as u32, d as u32))
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

pub fn success_probability_formula(m: usize, n: usize, ps: f64, pd: f64, counting: Counting) -> Result<f64> {
    check_probability("p_s", ps)?;
    check_probability("p_d", pd)?;
    let (es, ed) = exponents(m, n, counting)?;
    Ok(ps.powi(es as i32) * pd.powi(ed as i32))
}

/// Success probability of the lossless protocol on a `Φ_1^±` input:
/// post-selection `2^{(M-1)(1-N)}` times the QND success factor per gate.
pub fn ideal_success_probability(n: usize, m: usize, variant: QndVariant) -> Result<f64> {
    let r = resource_count(n, m)?;
    let post = 2f64.powi(-((m as i32 - 1) * (n as i32 - 1)));
    Ok(post * variant.success_probability().powi(r.qnd_count as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Pt_paper")]
    pub pt_paper: f64,
    #[serde(rename = "Pt_structural")]
    pub pt_structural: f64,
}

pub fn sweep(n_list: &[usize], m_range: std::ops::RangeInclusive<usize>, ps: f64, pd: f64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &n in n_list {
        for m in m_range.clone() {
            rows.push(SweepRow {
                n,
                m,
                pt_paper: success_probability_formula(m, n, ps, pd, Counting::Paper)?,
                pt_structural: success_probability_formula(m, n, ps, pd, Counting::Structural)?,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub standard_error: f64,
}

impl Estimate {
    fn from_counts(hits: u64, shots: u64) -> Self {
        let mean = hits as f64 / shots as f64;
        Self { mean, standard_error: (mean * (1.0 - mean) / shots as f64).sqrt() }
    }

    /// Distance from `reference` in standard errors. A zero standard error
    /// gives 0 on an exact match and infinity otherwise.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if self.standard_error > 0.0 {
            d / self.standard_error
        } else if d.abs() < 1e-15 {
            0.0
        } else {
            f64::INFINITY.copysign(d)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloParams {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub ps: f64,
    pub pd: f64,
    pub shots: u64,
    pub seed: u64,
    pub qnd: QndVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub params: MonteCarloParams,
    /// Every source fired and every photon was detected.
    pub resource_only: Estimate,
    /// Resource success and the lossless protocol succeeded.
    pub gated: Estimate,
    pub analytic_resource_only: f64,
    pub analytic_gated: f64,
    pub ideal_success: f64,
}

/// Number of independent random streams; fixed so results do not depend on
/// the thread count.
const SHARDS: u64 = 64;

pub fn monte_carlo_success(params: MonteCarloParams) -> Result<MonteCarloEstimate> {
    check_probability("p_s", params.ps)?;
    check_probability("p_d", params.pd)?;
    if params.shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let r = resource_count(params.n, params.m)?;
    let ideal = ideal_success_probability(params.n, params.m, params.qnd)?;
    let (sources, photons) = (r.ancilla_sources, r.detected_photons);
    let (resource_hits, gated_hits) = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let shots = params.shots / SHARDS + u64::from(shard < params.shots % SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(shard);
            let mut res = 0u64;
            let mut gated = 0u64;
            for _ in 0..shots {
                let fired = (0..sources).all(|_| rng.random_bool(params.ps));
                let detected = fired && (0..photons).all(|_| rng.random_bool(params.pd));
                if detected {
                    res += 1;
                    if rng.random_bool(ideal) {
                        gated += 1;
                    }
                }
            }
            (res, gated)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let analytic_resource_only =
        success_probability_formula(params.m, params.n, params.ps, params.pd, Counting::Structural)?;
    Ok(MonteCarloEstimate {
        params,
        resource_only: Estimate::from_counts(resource_hits, params.shots),
        gated: Estimate::from_counts(gated_hits, params.shots),
        analytic_resource_only,
        analytic_gated: analytic_resource_only * ideal,
        ideal_success: ideal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(ps: f64, pd: f64, shots: u64, seed: u64) -> MonteCarloParams {
        MonteCarloParams { m: 2, n: 2, ps, pd, shots, seed, qnd: QndVariant::OneBell }
    }

    #[test]
    fn formula_values() {
        let p = success_probability_formula(2, 2, 0.1, 0.9, Counting::Paper).unwrap();
        assert!((p - 0.01 * 0.9f64.powi(8)).abs() < 1e-15);
        assert_eq!(success_probability_formula(5, 3, 1.0, 1.0, Counting::Structural).unwrap(), 1.0);
        assert_eq!(exponents(3, 2, Counting::Paper).unwrap(), (4, 14));
        assert_eq!(exponents(3, 2, Counting::Structural).unwrap(), (3, 12));
        assert!(success_probability_formula(2, 2, 1.1, 0.9, Counting::Paper).is_err());
    }

    #[test]
    fn ideal_success_values() {
        assert!((ideal_success_probability(2, 2, QndVariant::OneBell).unwrap() - 1.0 / 32.0).abs() < 1e-15);
        assert!((ideal_success_probability(2, 2, QndVariant::TwoBell).unwrap() - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = monte_carlo_success(params(0.5, 0.9, 10_000, 3)).unwrap();
        let b = monte_carlo_success(params(0.5, 0.9, 10_000, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_edge_cases() {
        let zero = monte_carlo_success(params(1.0, 0.0, 1000, 1)).unwrap();
        assert_eq!(zero.resource_only.mean, 0.0);
        let one = monte_carlo_success(params(1.0, 1.0, 1, 1)).unwrap();
        assert!(one.gated.mean == 0.0 || one.gated.mean == 1.0);
        assert!(monte_carlo_success(params(1.0, 1.0, 0, 1)).is_err());
    }
}
