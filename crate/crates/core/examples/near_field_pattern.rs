//! Feed-horn illumination from 0.3 m: compensates the spherical phase front,
//! quantizes, and writes the cut as CSV.
//!
//! ```text
//! cargo run -p ris-sim --example near_field_pattern -- 30 near_30.csv
//! ```

use std::fs::File;
use std::io::BufWriter;

use ris_sim::geometry::{ArrayGeometry, Direction, Point3};
use ris_sim::pattern::{
    continuous_excitation, default_theta_grid, nearfield_cut, pattern_metrics, pattern_nearfield, FeedSpec,
    UnitCellReflection,
};
use ris_sim::phase::{nearfield_compensation, quantize_1bit};

const WAVELENGTH: f64 = 0.0545;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let steer: f64 = match args.next() {
        Some(s) => s.parse()?,
        None => 30.0,
    };
    let csv = args.next();

    let geom = ArrayGeometry::prototype();
    let centre = geom.center();
    let feed = FeedSpec::new(Point3::new(centre.x, centre.y, 0.3), 7.0)?;
    let grid = default_theta_grid();

    let phases = nearfield_compensation(&geom, &feed.position, Direction::in_plane(steer)?, WAVELENGTH)?;
    let mask = quantize_1bit(&phases);
    let coded = pattern_nearfield(&geom, &mask, &UnitCellReflection::default(), &feed, 1.0, 0.0, &grid, WAVELENGTH)?;
    let ideal = nearfield_cut(&geom, &continuous_excitation(&phases), &feed, 1.0, 0.0, &grid, WAVELENGTH)?;

    let m = pattern_metrics(&coded)?;
    println!("steer {steer}°, {} of {} elements in the 180° state", mask.count_on(), geom.len());
    println!("  1-bit:      main lobe {:.2}°, mirror lobe {:.2} dB", m.main_lobe_deg, m.mirror_lobe_db);
    println!("  continuous: main lobe {:.2}°", pattern_metrics(&ideal)?.main_lobe_deg);

    if let Some(path) = csv {
        coded.write_csv(BufWriter::new(File::create(&path)?), &[format!("near-field steer {steer}")])?;
        println!("wrote {path}");
    }
    Ok(())
}
