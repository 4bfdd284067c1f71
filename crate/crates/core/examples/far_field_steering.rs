//! Steers a 1-bit surface under normal incidence and reports where the main
//! lobe and its quantization twin land.
//!
//! ```text
//! cargo run -p ris-sim --example far_field_steering
//! ```

use ris_sim::geometry::{ArrayGeometry, Direction};
use ris_sim::pattern::{array_factor_far, default_theta_grid, pattern_metrics, UnitCellReflection};
use ris_sim::phase::{quantize_1bit, snell_gradient};

const WAVELENGTH: f64 = 0.0545;

fn main() -> ris_sim::Result<()> {
    let geom = ArrayGeometry::prototype();
    let grid = default_theta_grid();
    let cell = UnitCellReflection::default();

    // the sidelobe level counts the twin lobe, hence 0 dB once the beam leaves broadside
    println!("steer   main lobe   mirror lobe   SLL");
    for steer in [0.0, 15.0, 30.0, 45.0, 60.0] {
        let phases = snell_gradient(&geom, Direction::BORESIGHT, Direction::in_plane(steer)?, WAVELENGTH)?;
        let mask = quantize_1bit(&phases);
        let cut = array_factor_far(&geom, &mask, &cell, Direction::BORESIGHT, 0.0, &grid, WAVELENGTH)?;
        let m = pattern_metrics(&cut)?;
        println!(
            "{steer:>5.1}°  {:>8.2}°  {:>9.2} dB  {:>6.2} dB",
            m.main_lobe_deg, m.mirror_lobe_db, m.sidelobe_level_db
        );
    }

    // an oblique feed breaks the symmetry that pins the twin lobe at full height
    let incidence = Direction::new(20.0, 180.0)?;
    let mask = quantize_1bit(&snell_gradient(&geom, incidence, Direction::in_plane(30.0)?, WAVELENGTH)?);
    let cut = array_factor_far(&geom, &mask, &cell, incidence, 0.0, &grid, WAVELENGTH)?;
    let m = pattern_metrics(&cut)?;
    println!(
        "\nincidence -20°, steer 30°: main lobe {:.2}°, mirror lobe {:.2} dB",
        m.main_lobe_deg, m.mirror_lobe_db
    );
    Ok(())
}
