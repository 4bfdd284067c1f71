//! Sweeps the 41-entry codebook (0°–60°, 1.5° steps) against users at a few
//! angles and estimates each direction from the strongest RSSI, clean and
//! with 1 dB log-normal jitter.
//!
//! ```text
//! cargo run -p ris-sim --example codebook_localization
//! ```

use ris_sim::config::ScenarioConfig;
use ris_sim::localization::{estimate_angle, rmse, simulate_sweep, NoiseModel, UePosition};

fn main() -> ris_sim::Result<()> {
    let cfg = ScenarioConfig::default();
    let codebook = cfg.codebook()?;
    let scenario = cfg.link_scenario()?;
    let truths = [10.0, 22.0, 30.0, 45.0, 55.0];

    for noise in [NoiseModel::None, NoiseModel::GaussianDb { sigma_db: 1.0 }] {
        let mut estimates = Vec::new();
        for (i, &truth) in truths.iter().enumerate() {
            let ue = UePosition::InPlane {
                angle_deg: truth,
                distance: 5.0,
            };
            let trace = simulate_sweep(&codebook, &ue, &scenario, noise, i as u64)?;
            let estimate = estimate_angle(&trace)?;
            println!("[{noise}] truth {truth:>4.1}° -> {estimate:>4.1}°");
            estimates.push(estimate);
        }
        println!("[{noise}] RMSE {:.2}°\n", rmse(&estimates, &truths)?);
    }
    Ok(())
}
