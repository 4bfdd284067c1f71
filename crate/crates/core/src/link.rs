//! Uplink received-power model for a horn → surface → horn link.
//!
//! Each element contributes `√F_combine / (r_t r_r)`, the sum is scaled by
//! `P_t G_t G_r G_unit² λ² d_x d_y / (64 π³)` and by the phase-error loss of
//! the applied coding. The model is reciprocal, so which horn actually
//! transmits does not matter; `tx` is the near (feed) horn and `rx` the far one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean_feed_distance, to_deg, wavenumber, ArrayGeometry, Direction, Point3};
use crate::pattern::UnitCellReflection;
use crate::phase::{nearfield_compensation, quantize_1bit, CodingMask, PhaseMask};

/// Wavelength the prototype link was evaluated at (5.5 GHz).
pub const PROTOTYPE_WAVELENGTH: f64 = 0.0545;

/// Loss of an ideal 1-bit surface against continuous phasing, `(2/π)²`.
pub fn one_bit_phase_error_loss_linear() -> f64 {
    (2.0 / PI).powi(2)
}

/// How the coding of the surface enters the received power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phasing {
    /// Ideal phasing in the sum, times the asymptotic 1-bit loss `(2/π)²`.
    #[serde(rename = "analytic-1bit")]
    Analytic1Bit,
    /// Ideal phasing in the sum, times the loss of the scenario's mask
    /// against the phases that exactly cancel the channel.
    FromMask,
    /// Continuous phasing with no quantization loss.
    Continuous,
    /// The mask's actual states inside the sum; no separate loss term.
    Coherent,
}

/// Fixed impairments subtracted after the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareLosses {
    pub enabled: bool,
    pub dielectric_diode_db: f64,
    pub cable_db: f64,
}

impl Default for HardwareLosses {
    fn default() -> Self {
        HardwareLosses {
            enabled: false,
            dielectric_diode_db: 3.0,
            cable_db: 6.87,
        }
    }
}

impl HardwareLosses {
    pub fn total_db(&self) -> f64 {
        if self.enabled {
            self.dielectric_diode_db + self.cable_db
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    pub geometry: ArrayGeometry,
    pub mask: CodingMask,
    pub cell: UnitCellReflection,
    pub wavelength: f64,
    pub tx_power_dbm: f64,
    pub gain_tx_dbi: f64,
    pub gain_rx_dbi: f64,
    pub cell_dx: f64,
    pub cell_dy: f64,
    /// Phase center of the near horn.
    pub tx: Point3,
    /// Phase center of the far horn.
    pub rx: Point3,
    pub q_t: f64,
    pub q_r: f64,
    pub noise_floor_dbm: f64,
    pub phasing: Phasing,
    pub hardware: HardwareLosses,
}

impl LinkScenario {
    /// The 16 × 10 prototype: near horn 0.3 m above the aperture center, far
    /// horn 5 m from the center at `steer_deg` in the `φ = 0°` plane, mask
    /// compensated toward `steer_deg`.
    pub fn prototype_uplink(steer_deg: f64) -> Result<Self> {
        let geometry = ArrayGeometry::prototype();
        let center = geometry.center();
        let tx = Point3::new(center.x, center.y, 0.3);
        let dir = Direction::in_plane(steer_deg)?;
        let rx = geometry.point_from_center(5.0, dir);
        let mask = quantize_1bit(&nearfield_compensation(&geometry, &tx, dir, PROTOTYPE_WAVELENGTH)?);
        Ok(LinkScenario {
            geometry,
            mask,
            cell: UnitCellReflection::default(),
            wavelength: PROTOTYPE_WAVELENGTH,
            tx_power_dbm: -7.87,
            gain_tx_dbi: 12.0,
            gain_rx_dbi: 12.0,
            cell_dx: geometry.periodicity(),
            cell_dy: geometry.periodicity(),
            tx,
            rx,
            q_t: 7.0,
            q_r: 7.0,
            noise_floor_dbm: -94.0,
            phasing: Phasing::Analytic1Bit,
            hardware: HardwareLosses::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("tx_power_dbm", self.tx_power_dbm),
            ("gain_tx_dbi", self.gain_tx_dbi),
            ("gain_rx_dbi", self.gain_rx_dbi),
            ("noise_floor_dbm", self.noise_floor_dbm),
            ("hardware.dielectric_diode_db", self.hardware.dielectric_diode_db),
            ("hardware.cable_db", self.hardware.cable_db),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(key, format!("must be finite, got {v}")));
            }
        }
        for (key, v) in [
            ("wavelength", self.wavelength),
            ("cell_dx", self.cell_dx),
            ("cell_dy", self.cell_dy),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        for (key, v) in [("q_t", self.q_t), ("q_r", self.q_r)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be non-negative, got {v}")));
            }
        }
        for (key, p) in [("tx", self.tx), ("rx", self.rx)] {
            if !p.is_finite() || p.z <= 0.0 {
                return Err(Error::config(key, "must be finite and in front of the aperture (z > 0)"));
            }
        }
        if self.mask.geometry().count_x() != self.geometry.count_x()
            || self.mask.geometry().count_y() != self.geometry.count_y()
        {
            return Err(Error::config("mask", "dimensions do not match the geometry"));
        }
        self.cell.validate()
    }

    /// Same scenario with another mask applied.
    pub fn with_mask(&self, mask: CodingMask) -> Self {
        LinkScenario { mask, ..self.clone() }
    }

    fn check_index(&self, m: usize, n: usize) -> Result<Point3> {
        self.geometry.element_position(m, n)
    }
}

/// Distance from the far horn's phase center to an element.
pub fn rx_distance(rx: &Point3, elem: &Point3) -> f64 {
    euclidean_feed_distance(rx, elem)
}

/// Cosine of the angle between `a` and `b`, clamped at zero for rays behind.
fn cos_between(a: &Point3, b: &Point3) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 1.0;
    }
    (a.dot(b) / denom).max(0.0)
}

/// The four cosine factors of one element: horn tx, incidence, reflection,
/// horn rx. Each horn's boresight points at the aperture center.
fn combine_factors(s: &LinkScenario, elem: &Point3) -> [f64; 4] {
    let center = s.geometry.center();
    let to_elem_t = elem.sub(&s.tx);
    let to_elem_r = elem.sub(&s.rx);
    let cos_t = cos_between(&center.sub(&s.tx), &to_elem_t);
    let cos_r = cos_between(&center.sub(&s.rx), &to_elem_r);
    let normal = Point3::new(0.0, 0.0, 1.0);
    let cos_in = cos_between(&normal, &s.tx.sub(elem));
    let cos_out = cos_between(&normal, &s.rx.sub(elem));
    [cos_t, cos_in, cos_out, cos_r]
}

fn combine_at(s: &LinkScenario, elem: &Point3) -> f64 {
    let [ct, ci, co, cr] = combine_factors(s, elem);
    ct.powf(s.q_t) * ci * co * cr.powf(s.q_r)
}

/// Combined normalized power pattern of element `(m, n)`:
/// `cos^q_t(θ_t) cos(θ_in) cos(θ_out) cos^q_r(θ_r)`.
pub fn f_combine(scenario: &LinkScenario, m: usize, n: usize) -> Result<f64> {
    let elem = scenario.check_index(m, n)?;
    Ok(combine_at(scenario, &elem))
}

/// Angles (degrees) entering [`f_combine`] for element `(m, n)`, in the order
/// `θ_t, θ_in, θ_out, θ_r`.
pub fn combine_angles(scenario: &LinkScenario, m: usize, n: usize) -> Result<[f64; 4]> {
    let elem = scenario.check_index(m, n)?;
    Ok(combine_factors(scenario, &elem).map(|c| to_deg(c.acos())))
}

/// Amplitude weight `√F / (r_t r_r)` of every element, in element order.
fn element_weights(s: &LinkScenario) -> Vec<(f64, f64)> {
    s.geometry
        .elements()
        .map(|(_, _, r)| {
            let rt = euclidean_feed_distance(&s.tx, &r);
            let rr = rx_distance(&s.rx, &r);
            (combine_at(s, &r).sqrt() / (rt * rr), rt + rr)
        })
        .collect()
}

/// `Σ √F_combine / (r_t r_r)` with every element perfectly phased.
pub fn geometric_accumulation(scenario: &LinkScenario) -> f64 {
    element_weights(scenario).iter().map(|(w, _)| w).sum()
}

/// The coherent sum with the mask's actual reflection states.
pub fn coherent_accumulation(scenario: &LinkScenario) -> Complex64 {
    let k0 = wavenumber(scenario.wavelength);
    element_weights(scenario)
        .iter()
        .zip(scenario.mask.as_slice())
        .map(|(&(w, path), &on)| scenario.cell.coefficient(on) * Complex64::from_polar(w, -k0 * path))
        .sum()
}

/// Phases that exactly cancel the tx → element → rx path, `k0 (r_t + r_r)`.
pub fn channel_compensation(scenario: &LinkScenario) -> PhaseMask {
    let k0 = wavenumber(scenario.wavelength);
    PhaseMask::from_fn(scenario.geometry, |_, _, r| {
        to_deg(k0 * (euclidean_feed_distance(&scenario.tx, &r) + rx_distance(&scenario.rx, &r)))
    })
}

/// Quantization loss of `applied` against `required`, in dB:
/// `|Σ exp(j φ_e)|² / N²` with `φ_e = φ_required − φ_applied`.
pub fn phase_error_loss(required: &PhaseMask, applied: &CodingMask) -> Result<f64> {
    let (a, b) = (required.geometry(), applied.geometry());
    if a.count_x() != b.count_x() || a.count_y() != b.count_y() {
        return Err(Error::domain("required and applied masks differ in size"));
    }
    let n = required.as_slice().len() as f64;
    let sum: Complex64 = required
        .as_slice()
        .iter()
        .zip(applied.as_slice())
        .map(|(&req, &on)| {
            let applied_deg = if on { 180.0 } else { 0.0 };
            Complex64::from_polar(1.0, (req - applied_deg).to_radians())
        })
        .sum();
    Ok(10.0 * (sum.norm_sqr() / (n * n)).log10())
}

/// Effective gain of one unit cell, `10 log10(4π d_x d_y / λ²)` dBi.
pub fn unit_cell_gain(cell_dx: f64, cell_dy: f64, wavelength: f64) -> Result<f64> {
    if !(cell_dx > 0.0 && cell_dy > 0.0 && wavelength > 0.0) {
        return Err(Error::domain("cell dimensions and wavelength must be positive"));
    }
    Ok(10.0 * (4.0 * PI * cell_dx * cell_dy / (wavelength * wavelength)).log10())
}

pub fn snr_ceiling(received_dbm: f64, noise_floor_dbm: f64) -> f64 {
    received_dbm - noise_floor_dbm
}

/// Integrated channel power from a per-subcarrier density.
pub fn integrate_psd(psd_per_subcarrier_dbm: f64, n_subcarriers: u32) -> Result<f64> {
    if n_subcarriers == 0 {
        return Err(Error::domain("at least one subcarrier is required"));
    }
    Ok(psd_per_subcarrier_dbm + 10.0 * f64::from(n_subcarriers).log10())
}

/// Each multiplicative factor of the received-power formula in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkTerms {
    pub tx_power_dbm: f64,
    pub gain_tx_dbi: f64,
    pub gain_rx_dbi: f64,
    pub unit_cell_gain_dbi: f64,
    /// `G_unit²`, i.e. twice the unit cell gain.
    pub unit_cell_gain_squared_db: f64,
    /// `10 log10(λ² d_x d_y / 64π³)`.
    pub aperture_db: f64,
    pub phase_error_loss_db: f64,
    /// `20 log10(accumulation)`.
    pub accumulation_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub phasing: Phasing,
    /// Magnitude of the element sum used in the formula.
    pub accumulation_linear: f64,
    /// The perfectly phased sum, for reference.
    pub ideal_accumulation_linear: f64,
    pub terms: LinkTerms,
    pub received_power_dbm: f64,
    pub dielectric_diode_loss_db: f64,
    pub cable_loss_db: f64,
    pub received_power_after_losses_dbm: f64,
    pub noise_floor_dbm: f64,
    pub snr_db: f64,
    pub snr_after_losses_db: f64,
}

impl LinkReport {
    /// Received power re-derived by summing the dB terms.
    pub fn db_sum(&self) -> f64 {
        let t = &self.terms;
        t.tx_power_dbm
            + t.gain_tx_dbi
            + t.gain_rx_dbi
            + t.unit_cell_gain_squared_db
            + t.aperture_db
            + t.phase_error_loss_db
            + t.accumulation_db
    }

    /// Aligned human-readable breakdown.
    pub fn breakdown_table(&self) -> String {
        let t = &self.terms;
        let mut rows = vec![
            ("transmit power", t.tx_power_dbm, "dBm"),
            ("tx horn gain", t.gain_tx_dbi, "dBi"),
            ("rx horn gain", t.gain_rx_dbi, "dBi"),
            ("unit cell gain squared", t.unit_cell_gain_squared_db, "dB"),
            ("aperture term", t.aperture_db, "dB"),
            ("phase-error loss", t.phase_error_loss_db, "dB"),
            ("geometric accumulation", t.accumulation_db, "dB"),
            ("received power", self.received_power_dbm, "dBm"),
        ];
        if self.dielectric_diode_loss_db != 0.0 || self.cable_loss_db != 0.0 {
            rows.push(("dielectric/diode loss", -self.dielectric_diode_loss_db, "dB"));
            rows.push(("cable loss", -self.cable_loss_db, "dB"));
            rows.push(("after hardware losses", self.received_power_after_losses_dbm, "dBm"));
        }
        rows.push(("noise floor", self.noise_floor_dbm, "dBm"));
        rows.push(("SNR ceiling", self.snr_db, "dB"));
        let mut out = format!("{:<26}{:>12}\n", "accumulation (linear)", format!("{:.4}", self.accumulation_linear));
        for (name, value, unit) in rows {
            out.push_str(&format!("{name:<26}{value:>12.3} {unit}\n"));
        }
        out
    }
}

/// Received power and SNR for a complete scenario.
pub fn received_power(scenario: &LinkScenario) -> Result<LinkReport> {
    scenario.validate()?;
    let ideal = geometric_accumulation(scenario);
    let (accumulation, loss_linear) = match scenario.phasing {
        Phasing::Analytic1Bit => (ideal, one_bit_phase_error_loss_linear()),
        Phasing::FromMask => {
            let db = phase_error_loss(&channel_compensation(scenario), &scenario.mask)?;
            (ideal, 10f64.powf(db / 10.0))
        }
        Phasing::Continuous => (ideal, 1.0),
        Phasing::Coherent => (coherent_accumulation(scenario).norm(), 1.0),
    };
    let lam = scenario.wavelength;
    let (dx, dy) = (scenario.cell_dx, scenario.cell_dy);
    let g_unit_db = unit_cell_gain(dx, dy, lam)?;
    let lin = |db: f64| 10f64.powf(db / 10.0);

    let aperture = lam * lam * dx * dy / (64.0 * PI.powi(3));
    let p_mw = lin(scenario.tx_power_dbm)
        * lin(scenario.gain_tx_dbi)
        * lin(scenario.gain_rx_dbi)
        * lin(g_unit_db).powi(2)
        * aperture
        * loss_linear
        * accumulation
        * accumulation;
    let received_power_dbm = 10.0 * p_mw.log10();

    let hw = scenario.hardware;
    let (dielectric, cable) = if hw.enabled {
        (hw.dielectric_diode_db, hw.cable_db)
    } else {
        (0.0, 0.0)
    };
    let after = received_power_dbm - dielectric - cable;

    Ok(LinkReport {
        phasing: scenario.phasing,
        accumulation_linear: accumulation,
        ideal_accumulation_linear: ideal,
        terms: LinkTerms {
            tx_power_dbm: scenario.tx_power_dbm,
            gain_tx_dbi: scenario.gain_tx_dbi,
            gain_rx_dbi: scenario.gain_rx_dbi,
            unit_cell_gain_dbi: g_unit_db,
            unit_cell_gain_squared_db: 2.0 * g_unit_db,
            aperture_db: 10.0 * aperture.log10(),
            phase_error_loss_db: 10.0 * loss_linear.log10(),
            accumulation_db: 20.0 * accumulation.log10(),
        },
        received_power_dbm,
        dielectric_diode_loss_db: dielectric,
        cable_loss_db: cable,
        received_power_after_losses_dbm: after,
        noise_floor_dbm: scenario.noise_floor_dbm,
        snr_db: snr_ceiling(received_power_dbm, scenario.noise_floor_dbm),
        snr_after_losses_db: snr_ceiling(after, scenario.noise_floor_dbm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn paper() -> LinkScenario {
        LinkScenario::prototype_uplink(45.0).unwrap()
    }

    #[test]
    fn rx_distance_examples() {
        let d2 = 5.0;
        let s45 = 45f64.to_radians().sin();
        let rx = Point3::new(d2 * s45, 0.0, d2 * s45);
        assert!((rx_distance(&rx, &Point3::ORIGIN) - 5.0).abs() < 1e-12);
        let e = Point3::new(0.1, 0.2, 0.0);
        assert_eq!(rx_distance(&Point3::new(0.1, 0.2, 3.0), &e), 3.0);
        assert_eq!(rx_distance(&rx, &e), euclidean_feed_distance(&rx, &e));
    }

    #[test]
    fn accumulation_matches_prototype() {
        let acc = geometric_accumulation(&paper());
        assert!((acc - 74.19).abs() / 74.19 < 0.05, "{acc}");
    }

    #[test]
    fn single_element_accumulation() {
        let mut s = paper();
        s.geometry = ArrayGeometry::new(1, 1, 0.016).unwrap();
        s.mask = CodingMask::zeros(s.geometry);
        s.tx = Point3::new(0.0, 0.0, 0.3);
        s.rx = Point3::new(0.0, 0.0, 5.0);
        let expected = 1.0 / (0.3 * 5.0);
        assert!((geometric_accumulation(&s) - expected).abs() < 1e-15);
        assert_eq!(f_combine(&s, 1, 1).unwrap(), 1.0);
    }

    #[test]
    fn more_elements_accumulate_more() {
        let s = paper();
        let mut big = s.clone();
        big.geometry = ArrayGeometry::new(32, 10, 0.016).unwrap();
        big.mask = CodingMask::zeros(big.geometry);
        // keep the horns where they were
        assert!(geometric_accumulation(&big) > geometric_accumulation(&s));
    }

    #[test]
    fn f_combine_center_element() {
        let mut s = paper();
        s.geometry = ArrayGeometry::new(3, 3, 0.016).unwrap();
        s.mask = CodingMask::zeros(s.geometry);
        let c = s.geometry.center();
        s.tx = Point3::new(c.x, c.y, 0.3);
        s.rx = s.geometry.point_from_center(5.0, Direction::new(30.0, 0.0).unwrap());
        let [t, i, o, r] = combine_angles(&s, 2, 2).unwrap();
        assert!(t.abs() < 1e-6 && r.abs() < 1e-6);
        assert!(i.abs() < 1e-6 && (o - 30.0).abs() < 1e-6);
        let f = f_combine(&s, 2, 2).unwrap();
        assert!((f - 30f64.to_radians().cos()).abs() < 1e-12);
        assert!(f_combine(&s, 4, 1).is_err());
    }

    #[test]
    fn f_combine_vanishes_at_grazing() {
        let mut s = paper();
        s.rx = Point3::new(10.0, 0.072, 1e-12);
        for (m, n, _) in s.geometry.elements() {
            assert!(f_combine(&s, m, n).unwrap() < 1e-6);
        }
    }

    #[test]
    fn unit_cell_gain_examples() {
        assert!((unit_cell_gain(0.016, 0.016, 0.0545).unwrap() - 0.34).abs() < 0.02);
        let lam: f64 = 0.05;
        let side = (lam * lam / (4.0 * PI)).sqrt();
        assert!(unit_cell_gain(side, side, lam).unwrap().abs() < 1e-12);
        let a = unit_cell_gain(0.01, 0.01, lam).unwrap();
        let b = unit_cell_gain(0.02, 0.02, lam).unwrap();
        assert!((b - a - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!(unit_cell_gain(0.0, 0.01, lam).is_err());
    }

    #[test]
    fn received_power_matches_prototype() {
        let r = received_power(&paper()).unwrap();
        assert!((r.received_power_dbm + 43.87).abs() < 0.5, "{r:?}");
        assert!((r.snr_db - 50.1).abs() < 0.5);
        assert!((r.terms.phase_error_loss_db + 3.92).abs() < 0.01);
        assert!((r.db_sum() - r.received_power_dbm).abs() < 1e-6);
    }

    #[test]
    fn lossless_phasing_adds_the_loss_back() {
        let s = paper();
        let base = received_power(&s).unwrap();
        let lossless = received_power(&LinkScenario { phasing: Phasing::Continuous, ..s }).unwrap();
        let diff = lossless.received_power_dbm - base.received_power_dbm;
        assert!((diff - 20.0 * (PI / 2.0).log10()).abs() < 1e-9);
        assert!((diff - 3.92).abs() < 0.01);
    }

    #[test]
    fn coherent_mode_agrees_with_two_step() {
        let s = paper();
        let two = received_power(&s).unwrap();
        let coh = received_power(&LinkScenario { phasing: Phasing::Coherent, ..s.clone() }).unwrap();
        let from_mask = received_power(&LinkScenario { phasing: Phasing::FromMask, ..s }).unwrap();
        assert!((two.received_power_dbm - coh.received_power_dbm).abs() < 1.0);
        assert!(coh.received_power_dbm <= coh.received_power_dbm - coh.terms.phase_error_loss_db);
        assert!(from_mask.terms.phase_error_loss_db <= 0.0);
    }

    #[test]
    fn hardware_losses_are_post_subtracted() {
        let mut s = paper();
        s.hardware.enabled = true;
        let r = received_power(&s).unwrap();
        let total = r.received_power_dbm - r.received_power_after_losses_dbm;
        assert!((total - 9.87).abs() < 1e-9);
        assert!((r.received_power_after_losses_dbm + 53.7).abs() < 3.1);
    }

    #[test]
    fn power_is_db_linear_in_tx_power() {
        let s = paper();
        let a = received_power(&s).unwrap().received_power_dbm;
        let b = received_power(&LinkScenario { tx_power_dbm: s.tx_power_dbm + 3.0, ..s }).unwrap().received_power_dbm;
        assert!((b - a - 3.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_scenario_is_config_error() {
        let mut s = paper();
        s.wavelength = 0.0;
        assert!(matches!(received_power(&s), Err(Error::Config { key, .. }) if key == "wavelength"));
        let mut s = paper();
        s.rx.z = -1.0;
        assert!(matches!(received_power(&s), Err(Error::Config { key, .. }) if key == "rx"));
        let mut s = paper();
        s.tx_power_dbm = f64::NAN;
        assert!(received_power(&s).is_err());
    }

    #[test]
    fn snr_and_psd() {
        assert!((snr_ceiling(-43.87, -94.0) - 50.13).abs() < 1e-9);
        assert_eq!(snr_ceiling(-50.0, -50.0), 0.0);
        assert!(snr_ceiling(-40.0, -94.0) > snr_ceiling(-41.0, -94.0));
        assert!((integrate_psd(-84.5, 1200).unwrap() + 53.7).abs() < 0.05);
        assert!((integrate_psd(-122.0, 1200).unwrap() + 91.2).abs() < 0.05);
        assert_eq!(integrate_psd(-84.5, 1).unwrap(), -84.5);
        assert!(integrate_psd(-84.5, 0).is_err());
    }

    #[test]
    fn phase_error_loss_edge_cases() {
        let g = ArrayGeometry::new(8, 8, 0.016).unwrap();
        let bits = CodingMask::from_fn(g, |m, n| (m + n) % 3 == 0);
        let required = bits.to_phase_mask();
        assert!(phase_error_loss(&required, &bits).unwrap().abs() < 1e-12);
        let grad = PhaseMask::from_fn(g, |m, n, _| 37.0 * m as f64 + 11.0 * n as f64);
        let q = quantize_1bit(&grad);
        let a = phase_error_loss(&grad, &q).unwrap();
        let b = phase_error_loss(&grad, &q.complement()).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert!(a <= 0.0);
        let other = ArrayGeometry::new(4, 8, 0.016).unwrap();
        assert!(phase_error_loss(&grad, &CodingMask::zeros(other)).is_err());
    }

    #[test]
    fn constant_phase_error_is_lossless() {
        let g = ArrayGeometry::new(6, 5, 0.016).unwrap();
        let bits = CodingMask::from_fn(g, |m, _| m % 2 == 0);
        let required = bits.to_phase_mask().offset(40.0);
        assert!(phase_error_loss(&required, &bits).unwrap().abs() < 1e-12);
    }

    #[test]
    fn uniform_phase_error_converges_to_two_over_pi() {
        // brute force over a 100 × 100 synthetic gradient
        let g = ArrayGeometry::new(100, 100, 0.016).unwrap();
        let grad = PhaseMask::from_fn(g, |m, n, _| 360.0 * ((m - 1) as f64 * 0.0123457 + (n - 1) as f64 * 0.371));
        let loss = phase_error_loss(&grad, &quantize_1bit(&grad)).unwrap();
        assert!((loss - 20.0 * (2.0 / PI).log10()).abs() < 0.05, "{loss}");
    }

    #[test]
    fn matched_mask_beats_random_masks() {
        let mut s = paper();
        s.phasing = Phasing::Coherent;
        let matched = s.with_mask(quantize_1bit(&channel_compensation(&s)));
        let best = coherent_accumulation(&matched).norm_sqr();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let random = CodingMask::from_fn(s.geometry, |_, _| rng.random::<bool>());
            assert!(coherent_accumulation(&s.with_mask(random)).norm_sqr() < best);
        }
    }
}
