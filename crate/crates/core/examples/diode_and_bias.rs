//! PIN-diode impedance in both states across the band, and the LED bias
//! resistor for the driver board.
//!
//! ```text
//! cargo run -p ris-sim --example diode_and_bias
//! ```

use ris_sim::hardware::{bias_resistor, diode_impedance, DiodeModel, DiodeState};

fn main() -> ris_sim::Result<()> {
    let diode = DiodeModel::default();
    println!("off-state resonance {:.2} GHz", diode.off_state_resonance() / 1e9);
    println!(" f (GHz)   Z_on (Ω)          Z_off (Ω)");
    for f in [4.5e9, 5.0e9, 5.5e9, 6.0e9, 6.5e9] {
        let on = diode_impedance(&diode, DiodeState::On, f)?;
        let off = diode_impedance(&diode, DiodeState::Off, f)?;
        println!(
            "{:>7.2}   {:.2}{:+.2}j    {:.2}{:+.2}j",
            f / 1e9,
            on.re,
            on.im,
            off.re,
            off.im
        );
    }
    let r = bias_resistor(3.15, 1.8, 0.9, 8e-3)?;
    println!("\nbias resistor for 3.15 V supply, 8 mA: {r:.2} Ω");
    Ok(())
}
