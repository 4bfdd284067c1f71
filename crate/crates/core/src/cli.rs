//! The four batch workflows behind the `ris` binary. Each writes its data
//! files into an output directory and returns what it wrote.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::hardware::{serialize_mask, RegisterFrame};
use crate::link::{received_power, LinkReport};
use crate::localization::{estimate_angle, rmse, simulate_sweep, UePosition};
use crate::pattern::{array_factor_far, pattern_metrics, pattern_nearfield, PatternMetrics};
use crate::phase::{quantize_1bit, snell_gradient, CodingMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Plane-wave incidence, Snell-gradient masks.
    Far,
    /// Near-field feed, path-compensated masks.
    Near,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Far => "far",
            Mode::Near => "near",
        })
    }
}

fn prepare_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    use std::io::Write;
    writeln!(w)?;
    Ok(())
}

/// 1-bit mask for `mode` steered to `steer_deg`.
pub fn mode_mask(cfg: &ScenarioConfig, mode: Mode, steer_deg: f64) -> Result<CodingMask> {
    match mode {
        Mode::Near => cfg.steering_mask(steer_deg),
        Mode::Far => {
            let geom = cfg.geometry()?;
            let incidence = Direction::in_plane(cfg.pattern.incidence_deg)?;
            Ok(quantize_1bit(&snell_gradient(
                &geom,
                incidence,
                Direction::in_plane(steer_deg)?,
                cfg.wavelength(),
            )?))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternSummary {
    pub mode: Mode,
    pub steer_deg: f64,
    pub phi_plane_deg: f64,
    pub metrics: PatternMetrics,
}

#[derive(Debug, Clone)]
pub struct PatternOutput {
    pub csv: PathBuf,
    pub metrics_json: PathBuf,
    pub mask_json: PathBuf,
    pub summary: PatternSummary,
}

/// Writes `pattern.csv`, `metrics.json` and `mask.json`.
pub fn cmd_pattern(cfg: &ScenarioConfig, mode: Mode, steer_deg: f64, out: &Path) -> Result<PatternOutput> {
    let geom = cfg.geometry()?;
    let cell = cfg.cell();
    let grid = cfg.theta_grid()?;
    let mask = mode_mask(cfg, mode, steer_deg)?;
    let phi = cfg.pattern.phi_plane_deg;
    let cut = match mode {
        Mode::Far => {
            let incidence = Direction::in_plane(cfg.pattern.incidence_deg)?;
            array_factor_far(&geom, &mask, &cell, incidence, phi, &grid, cfg.wavelength())?
        }
        Mode::Near => pattern_nearfield(&geom, &mask, &cell, &cfg.feed()?, cfg.cell.q_e, phi, &grid, cfg.wavelength())?,
    };
    let metrics = pattern_metrics(&cut)?;

    prepare_dir(out)?;
    let csv = out.join("pattern.csv");
    let mut comments = vec![format!("mode={mode} steer_deg={steer_deg}")];
    if mode == Mode::Far {
        comments.push(format!("incidence_deg={}", cfg.pattern.incidence_deg));
    } else {
        let p = cfg.feed.position_m;
        comments.push(format!("feed_m={},{},{} q_f={} q_e={}", p[0], p[1], p[2], cfg.feed.q_f, cfg.cell.q_e));
    }
    cut.write_csv(BufWriter::new(File::create(&csv)?), &comments)?;

    let summary = PatternSummary {
        mode,
        steer_deg,
        phi_plane_deg: phi,
        metrics,
    };
    let metrics_json = out.join("metrics.json");
    write_json(&metrics_json, &summary)?;
    let mask_json = out.join("mask.json");
    write_json(&mask_json, &mask)?;
    Ok(PatternOutput {
        csv,
        metrics_json,
        mask_json,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub truth_deg: f64,
    pub repeat: usize,
    pub seed: u64,
    pub estimate_deg: f64,
    pub error_deg: f64,
    pub peak_rssi_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationSummary {
    pub noise: String,
    pub base_seed: u64,
    pub codebook_entries: usize,
    pub measurements: Vec<Measurement>,
    pub rmse_deg: f64,
}

fn angle_label(deg: f64) -> String {
    format!("{deg}").replace('-', "m")
}

/// Sweeps the codebook once per truth (and repeat), writing
/// `sweep_<truth>[_<repeat>].csv` and `summary.json`.
pub fn cmd_localize(cfg: &ScenarioConfig, truths: &[f64], seed: Option<u64>, out: &Path) -> Result<LocalizationSummary> {
    if truths.is_empty() {
        return Err(Error::domain("at least one true angle is required"));
    }
    let (lo, hi) = (cfg.sweep.start_deg, cfg.sweep.stop_deg);
    if let Some(t) = truths.iter().find(|t| !(lo..=hi).contains(*t)) {
        return Err(Error::domain(format!("true angle {t}° outside the field of view [{lo}°, {hi}°]")));
    }
    let base_seed = seed.unwrap_or(cfg.sweep.seed);
    let codebook = cfg.codebook()?;
    let scenario = cfg.link_scenario()?;
    let noise = cfg.noise();
    let repeats = cfg.sweep.repeats;
    prepare_dir(out)?;

    let mut measurements = Vec::new();
    for (ti, &truth) in truths.iter().enumerate() {
        let ue = UePosition::InPlane {
            angle_deg: truth,
            distance: cfg.link.rx_distance_m,
        };
        for repeat in 0..repeats {
            let run_seed = base_seed.wrapping_add((ti * repeats + repeat) as u64);
            let trace = simulate_sweep(&codebook, &ue, &scenario, noise, run_seed)?;
            let estimate = estimate_angle(&trace)?;
            let name = if repeats == 1 {
                format!("sweep_{}.csv", angle_label(truth))
            } else {
                format!("sweep_{}_{repeat}.csv", angle_label(truth))
            };
            trace.write_csv(
                BufWriter::new(File::create(out.join(name))?),
                &[format!("seed={run_seed} noise={noise} truth_deg={truth}")],
            )?;
            let peak = trace
                .entries
                .iter()
                .find(|e| e.steer_deg == estimate)
                .map(|e| e.rssi_dbm)
                .unwrap_or(f64::NAN);
            measurements.push(Measurement {
                truth_deg: truth,
                repeat,
                seed: run_seed,
                estimate_deg: estimate,
                error_deg: estimate - truth,
                peak_rssi_dbm: peak,
            });
        }
    }
    let est: Vec<f64> = measurements.iter().map(|m| m.estimate_deg).collect();
    let tru: Vec<f64> = measurements.iter().map(|m| m.truth_deg).collect();
    let summary = LocalizationSummary {
        noise: noise.to_string(),
        base_seed,
        codebook_entries: codebook.len(),
        rmse_deg: rmse(&est, &tru)?,
        measurements,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Writes `link_report.json`.
pub fn cmd_linkbudget(cfg: &ScenarioConfig, out: &Path) -> Result<LinkReport> {
    let report = received_power(&cfg.link_scenario()?)?;
    prepare_dir(out)?;
    write_json(&out.join("link_report.json"), &report)?;
    Ok(report)
}

/// Writes `frame.hex` for the mask steered to `steer_deg`.
pub fn cmd_export_frame(cfg: &ScenarioConfig, mode: Mode, steer_deg: f64, out: &Path) -> Result<RegisterFrame> {
    let frame = serialize_mask(&mode_mask(cfg, mode, steer_deg)?)?;
    prepare_dir(out)?;
    frame.write_file(
        BufWriter::new(File::create(out.join("frame.hex"))?),
        &[format!("mode={mode} steer_deg={steer_deg}")],
    )?;
    Ok(frame)
}
