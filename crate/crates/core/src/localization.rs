//! Codebook beam sweep: apply each steering mask in turn, record the received
//! power, and take the strongest entry as the user's angle.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Direction, Point3};
use crate::link::{received_power, LinkScenario, Phasing};
use crate::phase::{Codebook, CodingMask};

/// Measurement jitter added to each RSSI reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    None,
    /// Independent zero-mean Gaussian noise in dB per entry.
    GaussianDb { sigma_db: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::GaussianDb { sigma_db } if sigma_db >= 0.0 && sigma_db.is_finite() => Ok(()),
            NoiseModel::GaussianDb { sigma_db } => {
                Err(Error::domain(format!("sigma_db must be non-negative, got {sigma_db}")))
            }
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseModel::None => write!(f, "none"),
            NoiseModel::GaussianDb { sigma_db } => write!(f, "gaussian_db(sigma={sigma_db})"),
        }
    }
}

/// Where the user sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum UePosition {
    /// `distance` meters from the aperture center at `angle_deg` in the
    /// `φ = 0°` plane.
    InPlane { angle_deg: f64, distance: f64 },
    Point(Point3),
}

impl UePosition {
    pub fn resolve(&self, scenario: &LinkScenario) -> Result<Point3> {
        match *self {
            UePosition::InPlane { angle_deg, distance } => {
                if !(distance > 0.0 && distance.is_finite()) {
                    return Err(Error::domain(format!("UE distance must be positive, got {distance}")));
                }
                Ok(scenario
                    .geometry
                    .point_from_center(distance, Direction::in_plane(angle_deg)?))
            }
            UePosition::Point(p) => Ok(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub steer_deg: f64,
    pub rssi_dbm: f64,
}

/// RSSI per codebook entry, in codebook order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrace {
    pub entries: Vec<SweepEntry>,
}

impl SweepTrace {
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "steer_deg,rssi_dbm")?;
        for e in &self.entries {
            writeln!(w, "{},{}", e.steer_deg, e.rssi_dbm)?;
        }
        Ok(())
    }
}

/// The link evaluated for one sweep step: `scenario` with the UE as the far
/// horn, `mask` applied, and the mask's actual states inside the sum.
pub fn sweep_scenario(scenario: &LinkScenario, ue: Point3, mask: &CodingMask) -> LinkScenario {
    LinkScenario {
        rx: ue,
        phasing: Phasing::Coherent,
        ..scenario.with_mask(mask.clone())
    }
}

/// Runs the codebook against a user at `ue`. Noise is drawn in codebook
/// order from a generator seeded with `seed`.
pub fn simulate_sweep(
    codebook: &Codebook,
    ue: &UePosition,
    scenario: &LinkScenario,
    noise: NoiseModel,
    seed: u64,
) -> Result<SweepTrace> {
    if codebook.is_empty() {
        return Err(Error::domain("codebook is empty"));
    }
    noise.validate()?;
    let ue = ue.resolve(scenario)?;
    let clean: Vec<f64> = codebook
        .entries()
        .par_iter()
        .map(|entry| {
            received_power(&sweep_scenario(scenario, ue, &entry.mask)).map(|r| r.received_power_after_losses_dbm)
        })
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = match noise {
        NoiseModel::GaussianDb { sigma_db } if sigma_db > 0.0 => {
            Some(Normal::new(0.0, sigma_db).map_err(|e| Error::domain(e.to_string()))?)
        }
        _ => None,
    };
    let entries = codebook
        .entries()
        .iter()
        .zip(clean)
        .map(|(entry, rssi)| SweepEntry {
            steer_deg: entry.steer_deg,
            rssi_dbm: rssi + jitter.map_or(0.0, |n| n.sample(&mut rng)),
        })
        .collect();
    Ok(SweepTrace { entries })
}

/// Index of the strongest entry; the earliest (smallest angle) wins ties.
pub fn best_entry(trace: &SweepTrace) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, e) in trace.entries.iter().enumerate() {
        if e.rssi_dbm.is_nan() {
            return Err(Error::domain("trace contains NaN"));
        }
        if best.is_none_or(|b| e.rssi_dbm > trace.entries[b].rssi_dbm) {
            best = Some(i);
        }
    }
    best.ok_or_else(|| Error::domain("empty sweep trace"))
}

/// Steering angle of the strongest entry.
pub fn estimate_angle(trace: &SweepTrace) -> Result<f64> {
    Ok(trace.entries[best_entry(trace)?].steer_deg)
}

/// Root-mean-square angular error in degrees.
pub fn rmse(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.is_empty() || estimates.len() != truths.len() {
        return Err(Error::domain(format!(
            "need equal, non-empty lengths (got {} estimates, {} truths)",
            estimates.len(),
            truths.len()
        )));
    }
    let mse = estimates
        .iter()
        .zip(truths)
        .map(|(e, t)| (e - t).powi(2))
        .sum::<f64>()
        / estimates.len() as f64;
    Ok(mse.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::build_codebook;

    fn trace(points: &[(f64, f64)]) -> SweepTrace {
        SweepTrace {
            entries: points
                .iter()
                .map(|&(steer_deg, rssi_dbm)| SweepEntry { steer_deg, rssi_dbm })
                .collect(),
        }
    }

    fn setup() -> (LinkScenario, Codebook) {
        let s = LinkScenario::prototype_uplink(45.0).unwrap();
        let cb = build_codebook(&s.geometry, &s.tx, s.wavelength, 0.0, 60.0, 1.5).unwrap();
        (s, cb)
    }

    fn at(angle_deg: f64) -> UePosition {
        UePosition::InPlane { angle_deg, distance: 5.0 }
    }

    #[test]
    fn estimate_rules() {
        assert_eq!(estimate_angle(&trace(&[(0.0, -60.0), (1.5, -55.0), (3.0, -50.0)])).unwrap(), 3.0);
        assert_eq!(estimate_angle(&trace(&[(28.5, -40.0), (30.0, -40.0), (31.5, -41.0)])).unwrap(), 28.5);
        assert!(estimate_angle(&trace(&[])).is_err());
    }

    #[test]
    fn rmse_rules() {
        assert_eq!(rmse(&[30.0, 45.0], &[30.0, 45.0]).unwrap(), 0.0);
        assert!((rmse(&[32.06, 47.06], &[30.0, 45.0]).unwrap() - 2.06).abs() < 1e-12);
        assert!(rmse(&[], &[]).is_err());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn noiseless_sweep_peaks_at_true_entry() {
        let (s, cb) = setup();
        let t = simulate_sweep(&cb, &at(45.0), &s, NoiseModel::None, 0).unwrap();
        assert_eq!(t.entries.len(), 41);
        assert_eq!(best_entry(&t).unwrap(), 30);
        let err = (estimate_angle(&simulate_sweep(&cb, &at(30.0), &s, NoiseModel::None, 0).unwrap()).unwrap() - 30.0).abs();
        assert!(err <= 1.5);
    }

    #[test]
    fn same_seed_same_trace() {
        let (s, cb) = setup();
        let noise = NoiseModel::GaussianDb { sigma_db: 1.0 };
        let a = simulate_sweep(&cb, &at(30.0), &s, noise, 42).unwrap();
        let b = simulate_sweep(&cb, &at(30.0), &s, noise, 42).unwrap();
        assert_eq!(a, b);
        let zero = NoiseModel::GaussianDb { sigma_db: 0.0 };
        assert_eq!(
            simulate_sweep(&cb, &at(30.0), &s, zero, 1).unwrap(),
            simulate_sweep(&cb, &at(30.0), &s, zero, 1).unwrap()
        );
        assert!(simulate_sweep(&cb, &at(30.0), &s, NoiseModel::GaussianDb { sigma_db: -1.0 }, 1).is_err());
    }

    #[test]
    fn constant_offset_keeps_estimate() {
        let (s, cb) = setup();
        let t = simulate_sweep(&cb, &at(45.0), &s, NoiseModel::None, 0).unwrap();
        let mut shifted = t.clone();
        shifted.entries.iter_mut().for_each(|e| e.rssi_dbm += 17.3);
        assert_eq!(estimate_angle(&t).unwrap(), estimate_angle(&shifted).unwrap());
    }

    #[test]
    fn noiseless_error_bound_across_field_of_view() {
        let (s, cb) = setup();
        for truth in [5.0, 12.0, 20.0, 27.3, 33.0, 41.0, 52.5, 58.0] {
            let t = simulate_sweep(&cb, &at(truth), &s, NoiseModel::None, 0).unwrap();
            let err = (estimate_angle(&t).unwrap() - truth).abs();
            assert!(err <= 3.0, "truth {truth}: error {err}");
        }
    }

    #[test]
    fn noisy_rmse_over_seeds() {
        let (s, cb) = setup();
        let noise = NoiseModel::GaussianDb { sigma_db: 1.0 };
        let truths = [30.0, 45.0];
        let clean: Vec<Vec<f64>> = truths
            .iter()
            .map(|&t| {
                simulate_sweep(&cb, &at(t), &s, NoiseModel::None, 0)
                    .unwrap()
                    .entries
                    .iter()
                    .map(|e| e.rssi_dbm)
                    .collect()
            })
            .collect();
        let mut est = Vec::new();
        let mut tru = Vec::new();
        for seed in 0..100u64 {
            for (i, &truth) in truths.iter().enumerate() {
                let t = simulate_sweep(&cb, &at(truth), &s, noise, seed * 2 + i as u64).unwrap();
                // the clean part of the trace is unchanged by noise
                assert_eq!(t.entries.len(), clean[i].len());
                est.push(estimate_angle(&t).unwrap());
                tru.push(truth);
            }
        }
        let r = rmse(&est, &tru).unwrap();
        eprintln!("1 dB noise RMSE over 100 seeds: {r:.3}°");
        assert!(r <= 3.0, "{r}");
    }
}
