//! Far-field array-factor and near-field-fed radiation patterns, plus the
//! lobe metrics used to compare them.
//!
//! Cuts are taken in a plane of constant azimuth `phi_plane`; the observation
//! angle `theta` is signed so that one cut spans `[-90°, 90°]`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean_feed_distance, to_deg, to_rad, wavenumber, ArrayGeometry, Direction, Point3};
use crate::phase::{CodingMask, PhaseMask};

/// Reflection coefficient of a unit cell in each of its two states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCellReflection {
    pub magnitude_state0: f64,
    pub magnitude_state1: f64,
    pub phase_state0_deg: f64,
    pub phase_state1_deg: f64,
}

impl Default for UnitCellReflection {
    /// Lossless cell with states at exactly 0° and 180°.
    fn default() -> Self {
        UnitCellReflection {
            magnitude_state0: 1.0,
            magnitude_state1: 1.0,
            phase_state0_deg: 0.0,
            phase_state1_deg: 180.0,
        }
    }
}

impl UnitCellReflection {
    /// Worst-case fabricated cell: the ON state is 3 dB down and its phase
    /// difference has drifted to 230°.
    pub fn measured_worst_case() -> Self {
        UnitCellReflection {
            magnitude_state0: 1.0,
            magnitude_state1: 10f64.powf(-3.0 / 20.0),
            phase_state0_deg: 0.0,
            phase_state1_deg: 230.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, mag) in [
            ("magnitude_state0", self.magnitude_state0),
            ("magnitude_state1", self.magnitude_state1),
        ] {
            if !(mag > 0.0 && mag <= 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0, 1], got {mag}")));
            }
        }
        if !(self.phase_state0_deg.is_finite() && self.phase_state1_deg.is_finite()) {
            return Err(Error::domain("state phases must be finite"));
        }
        Ok(())
    }

    /// Complex reflection coefficient for a given state.
    pub fn coefficient(&self, on: bool) -> Complex64 {
        let (mag, phase) = if on {
            (self.magnitude_state1, self.phase_state1_deg)
        } else {
            (self.magnitude_state0, self.phase_state0_deg)
        };
        // exact ±1 for the ideal states keeps the mirror symmetry exact
        if phase == 0.0 {
            Complex64::new(mag, 0.0)
        } else if phase == 180.0 {
            Complex64::new(-mag, 0.0)
        } else {
            Complex64::from_polar(mag, to_rad(phase))
        }
    }
}

/// Feed phase center and its cosine-power illumination exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedSpec {
    pub position: Point3,
    pub q_f: f64,
}

impl FeedSpec {
    pub fn new(position: Point3, q_f: f64) -> Result<Self> {
        let feed = FeedSpec { position, q_f };
        feed.validate()?;
        Ok(feed)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() || self.position.z <= 0.0 {
            return Err(Error::domain(format!(
                "feed must sit in front of the aperture (z > 0), got z = {}",
                self.position.z
            )));
        }
        if !(self.q_f >= 0.0 && self.q_f.is_finite()) {
            return Err(Error::domain(format!("q_f must be non-negative, got {}", self.q_f)));
        }
        Ok(())
    }
}

/// Angle between the feed's downward axis and the ray toward `elem`, degrees.
pub fn feed_offset_angle(feed: &FeedSpec, elem: &Point3) -> f64 {
    let dx = feed.position.x - elem.x;
    let dy = feed.position.y - elem.y;
    to_deg((dx.hypot(dy) / feed.position.z).atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSample {
    pub theta_deg: f64,
    pub re: f64,
    pub im: f64,
    pub gain_db: f64,
}

impl PatternSample {
    pub fn field(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A sampled pattern cut, normalized so the strongest sample is 0 dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCut {
    pub phi_plane_deg: f64,
    pub samples: Vec<PatternSample>,
}

impl PatternCut {
    fn from_fields(phi_plane_deg: f64, grid: &[f64], fields: Vec<Complex64>) -> Result<Self> {
        let peak = fields.iter().map(|f| f.norm()).fold(0.0, f64::max);
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(Error::domain("pattern vanishes on the whole grid"));
        }
        let samples = grid
            .iter()
            .zip(fields)
            .map(|(&theta_deg, f)| PatternSample {
                theta_deg,
                re: f.re,
                im: f.im,
                gain_db: 20.0 * (f.norm() / peak).log10(),
            })
            .collect();
        Ok(PatternCut { phi_plane_deg, samples })
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta_deg).collect()
    }

    pub fn gains_db(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.gain_db).collect()
    }

    /// Writes `theta_deg,gain_db,re,im` rows, preceded by `#` comment lines.
    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        writeln!(w, "# phi_plane_deg={}", self.phi_plane_deg)?;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "theta_deg,gain_db,re,im")?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{}", s.theta_deg, s.gain_db, s.re, s.im)?;
        }
        Ok(())
    }
}

/// Observation grid `start..=stop` in steps of `step`, all inside `[-90°, 90°]`.
pub fn theta_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if start < -90.0 || stop > 90.0 {
        return Err(Error::domain(format!(
            "theta grid [{start}, {stop}] exceeds [-90°, 90°]"
        )));
    }
    crate::phase::sweep_angles(start, stop, step)
}

/// The default observation grid: −90° to 90° in 0.25° steps.
pub fn default_theta_grid() -> Vec<f64> {
    theta_grid(-90.0, 90.0, 0.25).expect("static grid")
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("observation grid is empty"));
    }
    if grid.iter().any(|t| !(-90.0..=90.0).contains(t)) {
        return Err(Error::domain("observation angles must lie in [-90°, 90°]"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("observation grid must be strictly increasing"));
    }
    Ok(())
}

fn check_dims(geom: &ArrayGeometry, other: &ArrayGeometry) -> Result<()> {
    if geom.count_x() != other.count_x() || geom.count_y() != other.count_y() {
        return Err(Error::domain(format!(
            "mask is {}×{} but geometry is {}×{}",
            other.count_x(),
            other.count_y(),
            geom.count_x(),
            geom.count_y()
        )));
    }
    Ok(())
}

/// Per-element complex excitation of a coded surface, in element order.
pub fn coding_excitation(mask: &CodingMask, cell: &UnitCellReflection) -> Vec<Complex64> {
    mask.as_slice().iter().map(|&b| cell.coefficient(b)).collect()
}

/// Unit-magnitude excitation carrying a continuous phase mask.
pub fn continuous_excitation(mask: &PhaseMask) -> Vec<Complex64> {
    mask.as_slice()
        .iter()
        .map(|&p| Complex64::from_polar(1.0, to_rad(p)))
        .collect()
}

/// In-plane `x` and `y` coefficients of `r̂ · r_mn / p` for a signed
/// observation angle.
#[inline]
fn observation_weights(theta_deg: f64, phi_plane_deg: f64) -> (f64, f64) {
    let st = to_rad(theta_deg).sin();
    let (sp, cp) = to_rad(phi_plane_deg).sin_cos();
    (st * cp, st * sp)
}

/// Plane-wave-fed array factor at one observation angle:
/// `Σ c_mn · exp(−j k0 (r̂_in − r̂)·r_mn)`.
pub fn far_field_at(
    geom: &ArrayGeometry,
    excitation: &[Complex64],
    incidence: Direction,
    phi_plane_deg: f64,
    theta_deg: f64,
    wavelength: f64,
) -> Complex64 {
    let k0p = wavenumber(wavelength) * geom.periodicity();
    let inc = incidence.unit_vector();
    let (ox, oy) = observation_weights(theta_deg, phi_plane_deg);
    let (wx, wy) = (inc.x - ox, inc.y - oy);
    geom.elements()
        .zip(excitation)
        .map(|((m, n, _), c)| {
            let path = wx * (m - 1) as f64 + wy * (n - 1) as f64;
            c * Complex64::from_polar(1.0, -k0p * path)
        })
        .sum()
}

/// Far-field cut for an arbitrary per-element excitation.
pub fn far_field_cut(
    geom: &ArrayGeometry,
    excitation: &[Complex64],
    incidence: Direction,
    phi_plane_deg: f64,
    grid: &[f64],
    wavelength: f64,
) -> Result<PatternCut> {
    check_grid(grid)?;
    check_positive("wavelength", wavelength)?;
    if excitation.len() != geom.len() {
        return Err(Error::domain(format!(
            "excitation has {} entries, geometry has {}",
            excitation.len(),
            geom.len()
        )));
    }
    let fields: Vec<Complex64> = grid
        .par_iter()
        .map(|&t| far_field_at(geom, excitation, incidence, phi_plane_deg, t, wavelength))
        .collect();
    PatternCut::from_fields(phi_plane_deg, grid, fields)
}

/// Array-factor pattern of a 1-bit coded surface under plane-wave incidence.
pub fn array_factor_far(
    geom: &ArrayGeometry,
    mask: &CodingMask,
    cell: &UnitCellReflection,
    incidence: Direction,
    phi_plane_deg: f64,
    grid: &[f64],
    wavelength: f64,
) -> Result<PatternCut> {
    check_dims(geom, mask.geometry())?;
    cell.validate()?;
    far_field_cut(geom, &coding_excitation(mask, cell), incidence, phi_plane_deg, grid, wavelength)
}

/// Array-factor pattern of an unquantized phase mask with unit magnitudes.
pub fn array_factor_far_continuous(
    geom: &ArrayGeometry,
    mask: &PhaseMask,
    incidence: Direction,
    phi_plane_deg: f64,
    grid: &[f64],
    wavelength: f64,
) -> Result<PatternCut> {
    check_dims(geom, mask.geometry())?;
    far_field_cut(geom, &continuous_excitation(mask), incidence, phi_plane_deg, grid, wavelength)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Feed-side weight of each element:
/// `cos^q_f(θ_f) cos^q_e(θ_e) / r_t · e^{−j k0 r_t}`.
fn feed_illumination(geom: &ArrayGeometry, feed: &FeedSpec, q_e: f64, wavelength: f64) -> Vec<Complex64> {
    let k0 = wavenumber(wavelength);
    geom.elements()
        .map(|(_, _, r)| {
            let rt = euclidean_feed_distance(&feed.position, &r);
            let feed_taper = to_rad(feed_offset_angle(feed, &r)).cos().powf(feed.q_f);
            let element_taper = (feed.position.z / rt).powf(q_e);
            Complex64::from_polar(feed_taper * element_taper / rt, -k0 * rt)
        })
        .collect()
}

/// Near-field-fed cut for an arbitrary per-element excitation.
///
/// The element pattern enters twice: as `cos^q_e(θ)` toward the observer and
/// as `cos^q_e(θ_e)` toward the feed, where `θ_e` is the angle between the
/// element normal and the ray to the feed phase center.
#[allow(clippy::too_many_arguments)]
pub fn nearfield_cut(
    geom: &ArrayGeometry,
    excitation: &[Complex64],
    feed: &FeedSpec,
    q_e: f64,
    phi_plane_deg: f64,
    grid: &[f64],
    wavelength: f64,
) -> Result<PatternCut> {
    check_grid(grid)?;
    check_positive("wavelength", wavelength)?;
    feed.validate()?;
    if !(q_e >= 0.0 && q_e.is_finite()) {
        return Err(Error::domain(format!("q_e must be non-negative, got {q_e}")));
    }
    if excitation.len() != geom.len() {
        return Err(Error::domain(format!(
            "excitation has {} entries, geometry has {}",
            excitation.len(),
            geom.len()
        )));
    }
    let k0p = wavenumber(wavelength) * geom.periodicity();
    let weights: Vec<Complex64> = feed_illumination(geom, feed, q_e, wavelength)
        .into_iter()
        .zip(excitation)
        .map(|(w, c)| w * c)
        .collect();
    let fields: Vec<Complex64> = grid
        .par_iter()
        .map(|&theta| {
            let (ox, oy) = observation_weights(theta, phi_plane_deg);
            let envelope = to_rad(theta).cos().powf(q_e);
            let sum: Complex64 = geom
                .elements()
                .zip(&weights)
                .map(|((m, n, _), w)| {
                    let proj = ox * (m - 1) as f64 + oy * (n - 1) as f64;
                    w * Complex64::from_polar(1.0, k0p * proj)
                })
                .sum();
            sum * envelope
        })
        .collect();
    PatternCut::from_fields(phi_plane_deg, grid, fields)
}

/// Pattern of a coded surface illuminated by a near-field feed.
#[allow(clippy::too_many_arguments)]
pub fn pattern_nearfield(
    geom: &ArrayGeometry,
    mask: &CodingMask,
    cell: &UnitCellReflection,
    feed: &FeedSpec,
    q_e: f64,
    phi_plane_deg: f64,
    grid: &[f64],
    wavelength: f64,
) -> Result<PatternCut> {
    check_dims(geom, mask.geometry())?;
    cell.validate()?;
    nearfield_cut(geom, &coding_excitation(mask, cell), feed, q_e, phi_plane_deg, grid, wavelength)
}

/// Lobe summary of a cut. Values are limited by the grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    pub main_lobe_deg: f64,
    /// Unnormalized peak `20 log10 |F|`.
    pub peak_db_raw: f64,
    /// Strongest sample within ±5° of the negated main-lobe angle, relative
    /// to the peak. `-inf` when no sample falls in that window.
    pub mirror_lobe_db: f64,
    /// Strongest sample outside the main lobe's first nulls, relative to the
    /// peak. `-inf` when the main lobe covers the whole cut.
    pub sidelobe_level_db: f64,
}

/// Samples within this many dB of the maximum count as tied.
const TIE_DB: f64 = 1e-9;
const MIRROR_WINDOW_DEG: f64 = 5.0;

/// Main lobe, mirror lobe and sidelobe level of a cut.
///
/// Ties for the main lobe go to the most positive angle.
pub fn pattern_metrics(cut: &PatternCut) -> Result<PatternMetrics> {
    let s = &cut.samples;
    if s.is_empty() {
        return Err(Error::domain("empty pattern cut"));
    }
    let max = s.iter().map(|x| x.gain_db).fold(f64::NEG_INFINITY, f64::max);
    let min = s.iter().map(|x| x.gain_db).fold(f64::INFINITY, f64::min);
    if max == min {
        return Err(Error::domain("degenerate pattern: all samples are equal"));
    }
    let main = s
        .iter()
        .rposition(|x| x.gain_db >= max - TIE_DB)
        .expect("max exists");
    let main_theta = s[main].theta_deg;
    let peak_db_raw = 20.0 * s[main].field().norm().log10();

    let mirror_lobe_db = s
        .iter()
        .filter(|x| (x.theta_deg + main_theta).abs() <= MIRROR_WINDOW_DEG)
        .map(|x| x.gain_db - s[main].gain_db)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut right = main;
    while right + 1 < s.len() && s[right + 1].gain_db <= s[right].gain_db {
        right += 1;
    }
    let mut left = main;
    while left > 0 && s[left - 1].gain_db <= s[left].gain_db {
        left -= 1;
    }
    let sidelobe_level_db = s[..left]
        .iter()
        .chain(&s[right + 1..])
        .map(|x| x.gain_db - s[main].gain_db)
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(PatternMetrics {
        main_lobe_deg: main_theta,
        peak_db_raw,
        mirror_lobe_db,
        sidelobe_level_db,
    })
}
