//! Phase-mask synthesis, 1-bit quantization and steering codebooks.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{euclidean_feed_distance, to_deg, wavenumber, ArrayGeometry, Direction, Point3};

/// Wraps an angle in degrees into `[0°, 360°)`.
pub fn wrap_deg(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    // rem_euclid rounds tiny negatives up to exactly 360.0
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

fn check_wavelength(wavelength: f64) -> Result<()> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    Ok(())
}

#[inline]
fn flat_index(geom: &ArrayGeometry, m: usize, n: usize) -> usize {
    (n - 1) * geom.count_x() + (m - 1)
}

/// Continuous per-element phase in degrees, wrapped to `[0°, 360°)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    geom: ArrayGeometry,
    // m varies fastest
    phases: Vec<f64>,
}

impl PhaseMask {
    /// Builds a mask by evaluating `f(m, n, position)` (degrees) at every
    /// element; the results are wrapped.
    pub fn from_fn(geom: ArrayGeometry, mut f: impl FnMut(usize, usize, Point3) -> f64) -> Self {
        let phases = geom.elements().map(|(m, n, r)| wrap_deg(f(m, n, r))).collect();
        PhaseMask { geom, phases }
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    /// Phase of element `(m, n)` (1-based) in degrees.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.phases[flat_index(&self.geom, m, n)]
    }

    /// Phases in element order (`m` fastest).
    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    /// Adds a constant to every phase.
    pub fn offset(&self, deg: f64) -> PhaseMask {
        PhaseMask {
            geom: self.geom,
            phases: self.phases.iter().map(|p| wrap_deg(p + deg)).collect(),
        }
    }

    /// Element-wise negation (mod 360°).
    pub fn negate(&self) -> PhaseMask {
        PhaseMask {
            geom: self.geom,
            phases: self.phases.iter().map(|p| wrap_deg(-p)).collect(),
        }
    }
}

/// Binary state per element: `false` is the 0° state, `true` the 180° state.
#[derive(Debug, Clone, PartialEq)]
pub struct CodingMask {
    geom: ArrayGeometry,
    bits: Vec<bool>,
}

impl CodingMask {
    pub fn zeros(geom: ArrayGeometry) -> Self {
        CodingMask {
            geom,
            bits: vec![false; geom.len()],
        }
    }

    pub fn from_fn(geom: ArrayGeometry, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let bits = geom.elements().map(|(m, n, _)| f(m, n)).collect();
        CodingMask { geom, bits }
    }

    /// Builds a mask from bits in element order (`m` fastest).
    pub fn from_bits(geom: ArrayGeometry, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != geom.len() {
            return Err(Error::domain(format!(
                "expected {} bits, got {}",
                geom.len(),
                bits.len()
            )));
        }
        Ok(CodingMask { geom, bits })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn get(&self, m: usize, n: usize) -> bool {
        self.bits[flat_index(&self.geom, m, n)]
    }

    pub fn set(&mut self, m: usize, n: usize, on: bool) {
        let i = flat_index(&self.geom, m, n);
        self.bits[i] = on;
    }

    /// Bits in element order (`m` fastest).
    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_on(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Flips every element.
    pub fn complement(&self) -> CodingMask {
        CodingMask {
            geom: self.geom,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// The ideal 0°/180° phases this mask applies.
    pub fn to_phase_mask(&self) -> PhaseMask {
        PhaseMask {
            geom: self.geom,
            phases: self.bits.iter().map(|&b| if b { 180.0 } else { 0.0 }).collect(),
        }
    }
}

/// JSON layout shared by both mask kinds: `grid[m-1][n-1]`.
#[derive(Serialize, Deserialize)]
struct MaskJson<T> {
    count_x: usize,
    count_y: usize,
    periodicity_m: f64,
    grid: Vec<Vec<T>>,
}

fn to_grid<T: Copy>(geom: &ArrayGeometry, flat: &[T]) -> Vec<Vec<T>> {
    (1..=geom.count_x())
        .map(|m| (1..=geom.count_y()).map(|n| flat[flat_index(geom, m, n)]).collect())
        .collect()
}

fn from_grid<T: Copy, E: serde::de::Error>(json: MaskJson<T>) -> std::result::Result<(ArrayGeometry, Vec<T>), E> {
    let geom = ArrayGeometry::new(json.count_x, json.count_y, json.periodicity_m).map_err(E::custom)?;
    if json.grid.len() != geom.count_x() || json.grid.iter().any(|row| row.len() != geom.count_y()) {
        return Err(E::custom("grid dimensions do not match count_x × count_y"));
    }
    let mut flat = Vec::with_capacity(geom.len());
    for n in 0..geom.count_y() {
        for m in 0..geom.count_x() {
            flat.push(json.grid[m][n]);
        }
    }
    Ok((geom, flat))
}

impl Serialize for CodingMask {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let ints: Vec<u8> = self.bits.iter().map(|&b| b as u8).collect();
        MaskJson {
            count_x: self.geom.count_x(),
            count_y: self.geom.count_y(),
            periodicity_m: self.geom.periodicity(),
            grid: to_grid(&self.geom, &ints),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CodingMask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (geom, ints) = from_grid::<u8, D::Error>(MaskJson::deserialize(d)?)?;
        let bits = ints
            .into_iter()
            .map(|v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!("bit value {other} is not 0 or 1"))),
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(CodingMask { geom, bits })
    }
}

impl Serialize for PhaseMask {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MaskJson {
            count_x: self.geom.count_x(),
            count_y: self.geom.count_y(),
            periodicity_m: self.geom.periodicity(),
            grid: to_grid(&self.geom, &self.phases),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhaseMask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (geom, phases) = from_grid::<f64, D::Error>(MaskJson::deserialize(d)?)?;
        Ok(PhaseMask {
            geom,
            phases: phases.into_iter().map(wrap_deg).collect(),
        })
    }
}

/// Far-field phase gradient that redirects a plane wave arriving from
/// `incidence` toward `reflection`: `φ = k0 (r̂_in − r̂_out)·r_mn`.
pub fn snell_gradient(
    geom: &ArrayGeometry,
    incidence: Direction,
    reflection: Direction,
    wavelength: f64,
) -> Result<PhaseMask> {
    check_wavelength(wavelength)?;
    let k0 = wavenumber(wavelength);
    Ok(PhaseMask::from_fn(*geom, |m, n, _| {
        let d = geom.projection_unchecked(m, n, incidence) - geom.projection_unchecked(m, n, reflection);
        to_deg(k0 * d)
    }))
}

/// Phase that cancels the spherical feed path and steers toward
/// `reflection`: `φ = k0 |r_f − r_mn| − k0 r̂_out·r_mn`.
///
/// The constant `k0 · min distance` is left in place. A feed receding to
/// infinity along `(θ, φ)` reproduces [`snell_gradient`] with incidence
/// `(θ, φ + 180°)`.
pub fn nearfield_compensation(
    geom: &ArrayGeometry,
    feed: &Point3,
    reflection: Direction,
    wavelength: f64,
) -> Result<PhaseMask> {
    check_wavelength(wavelength)?;
    if !feed.is_finite() || feed.z <= 0.0 {
        return Err(Error::domain(format!(
            "feed must sit in front of the aperture (z > 0), got z = {}",
            feed.z
        )));
    }
    let k0 = wavenumber(wavelength);
    Ok(PhaseMask::from_fn(*geom, |m, n, r| {
        let path = euclidean_feed_distance(feed, &r) - geom.projection_unchecked(m, n, reflection);
        to_deg(k0 * path)
    }))
}

/// 1-bit quantization: the 180° state exactly when the wrapped phase lies in
/// `[90°, 270°)`.
pub fn quantize_1bit(mask: &PhaseMask) -> CodingMask {
    CodingMask {
        geom: mask.geom,
        bits: mask.phases.iter().map(|&p| quantize_phase(p)).collect(),
    }
}

#[inline]
pub fn quantize_phase(deg: f64) -> bool {
    (90.0..270.0).contains(&wrap_deg(deg))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookEntry {
    /// Steering angle in the `φ = 0°` plane (degrees; negative angles point
    /// toward −x).
    pub steer_deg: f64,
    pub mask: CodingMask,
}

/// Ordered steering masks sharing one geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    entries: Vec<CodebookEntry>,
}

impl Codebook {
    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.steer_deg).collect()
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        self.entries[0].mask.geometry()
    }
}

/// Angles `start, start + step, …` up to and including `stop`.
pub fn sweep_angles(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::domain("sweep bounds must be finite"));
    }
    if step <= 0.0 {
        return Err(Error::domain(format!("sweep step must be positive, got {step}")));
    }
    if start > stop {
        return Err(Error::domain(format!("empty sweep range [{start}, {stop}]")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Near-field compensated, 1-bit quantized masks for each angle of the
/// sweep `start..=stop` in the `φ = 0°` plane.
pub fn build_codebook(
    geom: &ArrayGeometry,
    feed: &Point3,
    wavelength: f64,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<Codebook> {
    let entries = sweep_angles(start, stop, step)?
        .into_iter()
        .map(|steer_deg| {
            let dir = Direction::in_plane(steer_deg)?;
            let mask = quantize_1bit(&nearfield_compensation(geom, feed, dir, wavelength)?);
            Ok(CodebookEntry { steer_deg, mask })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Codebook { entries })
}
