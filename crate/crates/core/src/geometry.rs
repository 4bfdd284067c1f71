//! Lattice geometry and the vector algebra shared by every other module.
//!
//! Elements are addressed with 1-based indices `(m, n)`. Element `(1, 1)` sits
//! at the origin, `m` advances along x and `n` along y, and the aperture lies
//! in the `z = 0` plane with its normal along +z. Angles are degrees at every
//! public boundary; [`to_rad`] is the single conversion point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degrees to radians.
#[inline]
pub fn to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

/// Radians to degrees.
#[inline]
pub fn to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

/// Free-space wavenumber `2π/λ`.
#[inline]
pub fn wavenumber(wavelength: f64) -> f64 {
    2.0 * std::f64::consts::PI / wavelength
}

/// A point (or displacement) in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn sub(&self, other: &Point3) -> Point3 {
        Point3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn add(&self, other: &Point3) -> Point3 {
        Point3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// A direction in the upper half-space: `theta` from the surface normal,
/// `phi` the azimuth in the surface plane (both degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// Builds a direction with `theta ∈ [0°, 90°)`; `phi` is wrapped into
    /// `[0°, 360°)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::domain("direction angles must be finite"));
        }
        if !(0.0..90.0).contains(&theta) {
            return Err(Error::domain(format!(
                "theta {theta}° outside [0°, 90°)"
            )));
        }
        Ok(Direction {
            theta,
            phi: crate::phase::wrap_deg(phi),
        })
    }

    /// Direction in the `φ = 0°` plane. Negative angles are folded onto
    /// `φ = 180°`.
    pub fn in_plane(theta: f64) -> Result<Self> {
        if theta < 0.0 {
            Direction::new(-theta, 180.0)
        } else {
            Direction::new(theta, 0.0)
        }
    }

    pub const BORESIGHT: Direction = Direction {
        theta: 0.0,
        phi: 0.0,
    };

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Unit vector pointing along this direction.
    pub fn unit_vector(&self) -> Point3 {
        let (st, ct) = to_rad(self.theta).sin_cos();
        let (sp, cp) = to_rad(self.phi).sin_cos();
        Point3::new(st * cp, st * sp, ct)
    }
}

/// Rectangular lattice of `count_x × count_y` cells with periodicity `p`.
///
/// `count_x` is the `M` of the array-factor sums (index `m`, along x) and
/// `count_y` is `N` (index `n`, along y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    count_x: usize,
    count_y: usize,
    periodicity: f64,
}

impl ArrayGeometry {
    pub fn new(count_x: usize, count_y: usize, periodicity: f64) -> Result<Self> {
        if count_x == 0 || count_y == 0 {
            return Err(Error::domain("array must have at least one element per axis"));
        }
        if !(periodicity > 0.0 && periodicity.is_finite()) {
            return Err(Error::domain(format!(
                "periodicity must be positive, got {periodicity}"
            )));
        }
        Ok(ArrayGeometry {
            count_x,
            count_y,
            periodicity,
        })
    }

    /// The 16 × 10 board with 16 mm cells.
    pub fn prototype() -> Self {
        ArrayGeometry {
            count_x: 16,
            count_y: 10,
            periodicity: 0.016,
        }
    }

    pub fn count_x(&self) -> usize {
        self.count_x
    }

    pub fn count_y(&self) -> usize {
        self.count_y
    }

    pub fn periodicity(&self) -> f64 {
        self.periodicity
    }

    pub fn len(&self) -> usize {
        self.count_x * self.count_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, m: usize, n: usize) -> Result<()> {
        if m == 0 || m > self.count_x || n == 0 || n > self.count_y {
            return Err(Error::domain(format!(
                "element ({m}, {n}) outside 1..={} × 1..={}",
                self.count_x, self.count_y
            )));
        }
        Ok(())
    }

    /// Position of element `(m, n)`.
    pub fn element_position(&self, m: usize, n: usize) -> Result<Point3> {
        self.check(m, n)?;
        Ok(self.position_unchecked(m, n))
    }

    #[inline]
    pub(crate) fn position_unchecked(&self, m: usize, n: usize) -> Point3 {
        Point3::new(
            (m - 1) as f64 * self.periodicity,
            (n - 1) as f64 * self.periodicity,
            0.0,
        )
    }

    /// All `(m, n, position)` triples, `m` varying fastest.
    pub fn elements(&self) -> impl Iterator<Item = (usize, usize, Point3)> + '_ {
        (1..=self.count_y).flat_map(move |n| {
            (1..=self.count_x).map(move |m| (m, n, self.position_unchecked(m, n)))
        })
    }

    /// Geometric center of the aperture.
    pub fn center(&self) -> Point3 {
        Point3::new(
            (self.count_x - 1) as f64 * self.periodicity / 2.0,
            (self.count_y - 1) as f64 * self.periodicity / 2.0,
            0.0,
        )
    }

    /// Largest extent of the aperture (its diagonal, center to center).
    pub fn aperture(&self) -> f64 {
        let c = self.center();
        2.0 * (c.x * c.x + c.y * c.y).sqrt()
    }

    /// Point at `distance` from the aperture center along `dir`.
    pub fn point_from_center(&self, distance: f64, dir: Direction) -> Point3 {
        self.center().add(&dir.unit_vector().scale(distance))
    }

    /// `r̂_in · r_mn` for an incidence direction.
    pub fn projection_in(&self, m: usize, n: usize, incidence: Direction) -> Result<f64> {
        self.check(m, n)?;
        Ok(self.projection_unchecked(m, n, incidence))
    }

    /// `r̂_out · r_mn` for a reflection direction.
    pub fn projection_out(&self, m: usize, n: usize, reflection: Direction) -> Result<f64> {
        self.check(m, n)?;
        Ok(self.projection_unchecked(m, n, reflection))
    }

    #[inline]
    pub(crate) fn projection_unchecked(&self, m: usize, n: usize, dir: Direction) -> f64 {
        let st = to_rad(dir.theta).sin();
        let (sp, cp) = to_rad(dir.phi).sin_cos();
        self.periodicity * st * ((m - 1) as f64 * cp + (n - 1) as f64 * sp)
    }
}

/// Straight-line distance between a source phase center and an element.
pub fn euclidean_feed_distance(feed: &Point3, elem: &Point3) -> f64 {
    feed.sub(elem).norm()
}
