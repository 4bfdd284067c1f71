//! Uplink budget of the prototype: horn 0.3 m over the surface, user 5 m
//! away at 45°. Compares the ways the coding can enter the sum.
//!
//! ```text
//! cargo run -p ris-sim --example link_budget
//! ```

use ris_sim::link::{integrate_psd, received_power, LinkScenario, Phasing};

fn main() -> ris_sim::Result<()> {
    let scenario = LinkScenario::prototype_uplink(45.0)?;
    let report = received_power(&scenario)?;
    println!("{}", report.breakdown_table());

    println!("phasing         Pr (dBm)   SNR (dB)");
    for phasing in [Phasing::Continuous, Phasing::Analytic1Bit, Phasing::FromMask, Phasing::Coherent] {
        let r = received_power(&LinkScenario { phasing, ..scenario.clone() })?;
        println!("{:<14} {:>9.2}  {:>9.2}", format!("{phasing:?}"), r.received_power_dbm, r.snr_db);
    }

    let mut lossy = scenario.clone();
    lossy.hardware.enabled = true;
    let r = received_power(&lossy)?;
    println!(
        "\nwith dielectric/diode and cable losses: {:.2} dBm, SNR {:.2} dB",
        r.received_power_after_losses_dbm, r.snr_after_losses_db
    );

    // measured spectra are per subcarrier; 1200 LTE subcarriers add 30.8 dB
    println!("PSD -84.5 dBm over 1200 subcarriers: {:.2} dBm", integrate_psd(-84.5, 1200)?);
    Ok(())
}
