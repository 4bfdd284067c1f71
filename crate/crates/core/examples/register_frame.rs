//! Packs a steering mask into the 20-byte shift-register frame, writes it in
//! the hex file format and reads it back.
//!
//! ```text
//! cargo run -p ris-sim --example register_frame -- 45
//! ```

use ris_sim::config::ScenarioConfig;
use ris_sim::hardware::{deserialize_frame, serialize_mask, RegisterFrame};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let steer: f64 = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => 30.0,
    };
    let cfg = ScenarioConfig::default();
    let mask = cfg.steering_mask(steer)?;
    let frame = serialize_mask(&mask)?;

    let mut file = Vec::new();
    frame.write_file(&mut file, &[format!("near-field steer {steer}")])?;
    let text = String::from_utf8(file).expect("hex is ascii");
    print!("{text}");

    let back = deserialize_frame(&RegisterFrame::parse_hex(&text)?);
    assert_eq!(back, mask);

    // row n of the board, element m = 1 on the left
    for n in 1..=mask.geometry().count_y() {
        let row: String = (1..=mask.geometry().count_x())
            .map(|m| if mask.get(m, n) { '#' } else { '.' })
            .collect();
        println!("{row}");
    }
    Ok(())
}
