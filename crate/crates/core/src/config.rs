//! TOML scenario file.
//!
//! Every section except `[pattern]` must be present in a file; keys inside a
//! section fall back to the prototype setup when omitted, and unknown keys
//! are rejected. Any key can be overridden from the environment as
//! `RIS_<SECTION>_<KEY>` (upper case), e.g. `RIS_LINK_TX_POWER_DBM=-5`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Direction, Point3};
use crate::link::{HardwareLosses, LinkScenario, Phasing};
use crate::localization::NoiseModel;
use crate::pattern::{theta_grid, FeedSpec, UnitCellReflection};
use crate::phase::{build_codebook, nearfield_compensation, quantize_1bit, Codebook, CodingMask};

pub const ENV_PREFIX: &str = "RIS_";

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const REQUIRED_SECTIONS: [&str; 6] = ["frequency", "geometry", "cell", "feed", "link", "sweep"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrequencySection {
    pub hz: f64,
    /// Overrides `c / hz` when set.
    pub wavelength_m: Option<f64>,
}

impl Default for FrequencySection {
    fn default() -> Self {
        FrequencySection {
            hz: 5.5e9,
            wavelength_m: Some(0.0545),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub count_x: usize,
    pub count_y: usize,
    pub periodicity_m: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            count_x: 16,
            count_y: 10,
            periodicity_m: 0.016,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    pub magnitude_state0: f64,
    pub magnitude_state1: f64,
    pub phase_state0_deg: f64,
    pub phase_state1_deg: f64,
    pub q_e: f64,
}

impl Default for CellSection {
    fn default() -> Self {
        let c = UnitCellReflection::default();
        CellSection {
            magnitude_state0: c.magnitude_state0,
            magnitude_state1: c.magnitude_state1,
            phase_state0_deg: c.phase_state0_deg,
            phase_state1_deg: c.phase_state1_deg,
            q_e: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeedSection {
    /// Phase center in the lattice frame (element (1,1) at the origin).
    pub position_m: [f64; 3],
    pub q_f: f64,
}

impl Default for FeedSection {
    fn default() -> Self {
        // 0.3 m above the center of the 16 × 10, 16 mm board
        FeedSection {
            position_m: [0.12, 0.072, 0.3],
            q_f: 7.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkSection {
    pub tx_power_dbm: f64,
    pub gain_tx_dbi: f64,
    pub gain_rx_dbi: f64,
    pub q_t: f64,
    pub q_r: f64,
    pub noise_floor_dbm: f64,
    /// Far horn distance from the aperture center.
    pub rx_distance_m: f64,
    /// Far horn angle in the `φ = 0°` plane.
    pub rx_angle_deg: f64,
    pub phasing: Phasing,
    pub hardware_losses: bool,
    pub dielectric_diode_loss_db: f64,
    pub cable_loss_db: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        let hw = HardwareLosses::default();
        LinkSection {
            tx_power_dbm: -7.87,
            gain_tx_dbi: 12.0,
            gain_rx_dbi: 12.0,
            q_t: 7.0,
            q_r: 7.0,
            noise_floor_dbm: -94.0,
            rx_distance_m: 5.0,
            rx_angle_deg: 45.0,
            phasing: Phasing::Analytic1Bit,
            hardware_losses: hw.enabled,
            dielectric_diode_loss_db: hw.dielectric_diode_db,
            cable_loss_db: hw.cable_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
    /// Gaussian RSSI jitter in dB; 0 disables noise.
    pub noise_sigma_db: f64,
    pub seed: u64,
    /// Measurements per true position.
    pub repeats: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            start_deg: 0.0,
            stop_deg: 60.0,
            step_deg: 1.5,
            noise_sigma_db: 0.0,
            seed: 0,
            repeats: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatternSection {
    /// Plane-wave incidence for far-mode patterns, in the `φ = 0°` plane.
    pub incidence_deg: f64,
    pub phi_plane_deg: f64,
    pub theta_start_deg: f64,
    pub theta_stop_deg: f64,
    pub theta_step_deg: f64,
}

impl Default for PatternSection {
    fn default() -> Self {
        PatternSection {
            incidence_deg: 0.0,
            phi_plane_deg: 0.0,
            theta_start_deg: -90.0,
            theta_stop_deg: 90.0,
            theta_step_deg: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub frequency: FrequencySection,
    pub geometry: GeometrySection,
    pub cell: CellSection,
    pub feed: FeedSection,
    pub link: LinkSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub pattern: PatternSection,
}

fn default_tree() -> Table {
    Table::try_from(ScenarioConfig::default()).expect("default config serializes")
}

/// Checks keys against the default layout and widens integers where a float
/// is expected.
fn normalize(table: &mut Table, reference: &Table, require_sections: bool) -> Result<()> {
    if require_sections {
        for section in REQUIRED_SECTIONS {
            if !table.contains_key(section) {
                return Err(Error::config(section, "missing section"));
            }
        }
    }
    for (section, body) in table.iter_mut() {
        let ref_body = reference
            .get(section)
            .and_then(Value::as_table)
            .ok_or_else(|| Error::config(section.as_str(), "unknown section"))?;
        let body = body
            .as_table_mut()
            .ok_or_else(|| Error::config(section.as_str(), "expected a table"))?;
        for (key, value) in body.iter_mut() {
            let path = format!("{section}.{key}");
            let Some(ref_value) = ref_body.get(key) else {
                // optional keys absent from the default tree
                if section == "frequency" && key == "wavelength_m" {
                    continue;
                }
                return Err(Error::config(path, "unknown key"));
            };
            coerce(value, ref_value, &path)?;
        }
    }
    Ok(())
}

fn coerce(value: &mut Value, reference: &Value, path: &str) -> Result<()> {
    match (&*value, reference) {
        (Value::Integer(i), Value::Float(_)) => *value = Value::Float(*i as f64),
        (Value::Array(items), Value::Array(refs)) => {
            if let Some(r) = refs.first() {
                let mut items = items.clone();
                for item in &mut items {
                    coerce(item, r, path)?;
                }
                *value = Value::Array(items);
            }
        }
        (v, r) if v.type_str() != r.type_str() => {
            return Err(Error::config(
                path,
                format!("expected {}, got {}", r.type_str(), v.type_str()),
            ));
        }
        _ => {}
    }
    Ok(())
}

fn from_table(table: Table) -> Result<ScenarioConfig> {
    table
        .try_into::<ScenarioConfig>()
        .map_err(|e| Error::config("config", e.to_string().trim().replace('\n', " ")))
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
        normalize(&mut table, &default_tree(), true)?;
        let cfg = from_table(table)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies `RIS_<SECTION>_<KEY>` overrides from `vars`. Values are parsed
    /// as TOML literals, falling back to a plain string.
    pub fn with_overrides<I, K, V>(&self, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let vars: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(k, _)| k.as_ref().starts_with(ENV_PREFIX))
            .map(|(k, v)| (k.as_ref().to_string(), v.as_ref().to_string()))
            .collect();
        if vars.is_empty() {
            return Ok(self.clone());
        }
        let mut table = Table::try_from(self).expect("config serializes");
        let reference = default_tree();
        let mut keys: Vec<(String, String)> = reference
            .iter()
            .flat_map(|(s, body)| {
                body.as_table()
                    .into_iter()
                    .flat_map(move |b| b.keys().map(move |k| (s.clone(), k.clone())))
            })
            .collect();
        keys.sort();
        for (name, raw) in &vars {
            let hit = keys
                .iter()
                .find(|(s, k)| format!("{ENV_PREFIX}{}_{}", s, k).to_uppercase() == *name);
            let Some((section, key)) = hit else {
                return Err(Error::config(name.as_str(), "environment override names no config key"));
            };
            let value = format!("v = {raw}")
                .parse::<Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| Value::String(raw.clone()));
            table
                .entry(section.clone())
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .expect("section is a table")
                .insert(key.clone(), value);
        }
        normalize(&mut table, &reference, false)?;
        let cfg = from_table(table)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies overrides from the process environment.
    pub fn with_env_overrides(&self) -> Result<Self> {
        self.with_overrides(std::env::vars())
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.frequency;
        if !(f.hz > 0.0 && f.hz.is_finite()) {
            return Err(Error::config("frequency.hz", "must be positive"));
        }
        if let Some(w) = f.wavelength_m {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::config("frequency.wavelength_m", "must be positive"));
            }
        }
        let g = &self.geometry;
        if g.count_x == 0 {
            return Err(Error::config("geometry.count_x", "must be at least 1"));
        }
        if g.count_y == 0 {
            return Err(Error::config("geometry.count_y", "must be at least 1"));
        }
        if !(g.periodicity_m > 0.0 && g.periodicity_m.is_finite()) {
            return Err(Error::config("geometry.periodicity_m", "must be positive"));
        }
        let c = &self.cell;
        for (key, v) in [
            ("cell.magnitude_state0", c.magnitude_state0),
            ("cell.magnitude_state1", c.magnitude_state1),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(key, "must lie in (0, 1]"));
            }
        }
        for (key, v) in [
            ("cell.q_e", c.q_e),
            ("feed.q_f", self.feed.q_f),
            ("link.q_t", self.link.q_t),
            ("link.q_r", self.link.q_r),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be non-negative"));
            }
        }
        let p = self.feed.position_m;
        if p.iter().any(|v| !v.is_finite()) || p[2] <= 0.0 {
            return Err(Error::config("feed.position_m", "must be finite with z > 0"));
        }
        let l = &self.link;
        if !(l.rx_distance_m > 0.0 && l.rx_distance_m.is_finite()) {
            return Err(Error::config("link.rx_distance_m", "must be positive"));
        }
        if !(l.rx_angle_deg.abs() < 90.0) {
            return Err(Error::config("link.rx_angle_deg", "must lie in (-90°, 90°)"));
        }
        let s = &self.sweep;
        if !(s.step_deg > 0.0) {
            return Err(Error::config("sweep.step_deg", "must be positive"));
        }
        if !(s.start_deg <= s.stop_deg) || s.start_deg <= -90.0 || s.stop_deg >= 90.0 {
            return Err(Error::config("sweep.start_deg", "need -90° < start ≤ stop < 90°"));
        }
        if !(s.noise_sigma_db >= 0.0 && s.noise_sigma_db.is_finite()) {
            return Err(Error::config("sweep.noise_sigma_db", "must be non-negative"));
        }
        if s.repeats == 0 {
            return Err(Error::config("sweep.repeats", "must be at least 1"));
        }
        let pt = &self.pattern;
        if !(pt.incidence_deg.abs() < 90.0) {
            return Err(Error::config("pattern.incidence_deg", "must lie in (-90°, 90°)"));
        }
        theta_grid(pt.theta_start_deg, pt.theta_stop_deg, pt.theta_step_deg)
            .map_err(|e| Error::config("pattern.theta_step_deg", e.to_string()))?;
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.frequency
            .wavelength_m
            .unwrap_or(SPEED_OF_LIGHT / self.frequency.hz)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        let g = &self.geometry;
        ArrayGeometry::new(g.count_x, g.count_y, g.periodicity_m)
    }

    pub fn cell(&self) -> UnitCellReflection {
        let c = &self.cell;
        UnitCellReflection {
            magnitude_state0: c.magnitude_state0,
            magnitude_state1: c.magnitude_state1,
            phase_state0_deg: c.phase_state0_deg,
            phase_state1_deg: c.phase_state1_deg,
        }
    }

    pub fn feed(&self) -> Result<FeedSpec> {
        FeedSpec::new(Point3::from(self.feed.position_m), self.feed.q_f)
    }

    pub fn noise(&self) -> NoiseModel {
        if self.sweep.noise_sigma_db > 0.0 {
            NoiseModel::GaussianDb {
                sigma_db: self.sweep.noise_sigma_db,
            }
        } else {
            NoiseModel::None
        }
    }

    pub fn theta_grid(&self) -> Result<Vec<f64>> {
        let p = &self.pattern;
        theta_grid(p.theta_start_deg, p.theta_stop_deg, p.theta_step_deg)
    }

    /// Near-field compensated 1-bit mask toward `steer_deg` (φ = 0° plane).
    pub fn steering_mask(&self, steer_deg: f64) -> Result<CodingMask> {
        let geom = self.geometry()?;
        let dir = Direction::in_plane(steer_deg)?;
        Ok(quantize_1bit(&nearfield_compensation(
            &geom,
            &Point3::from(self.feed.position_m),
            dir,
            self.wavelength(),
        )?))
    }

    pub fn codebook(&self) -> Result<Codebook> {
        let s = &self.sweep;
        build_codebook(
            &self.geometry()?,
            &Point3::from(self.feed.position_m),
            self.wavelength(),
            s.start_deg,
            s.stop_deg,
            s.step_deg,
        )
    }

    /// The configured link, with the mask matched to the far horn's angle.
    pub fn link_scenario(&self) -> Result<LinkScenario> {
        let geometry = self.geometry()?;
        let l = &self.link;
        let rx = geometry.point_from_center(l.rx_distance_m, Direction::in_plane(l.rx_angle_deg)?);
        Ok(LinkScenario {
            geometry,
            mask: self.steering_mask(l.rx_angle_deg)?,
            cell: self.cell(),
            wavelength: self.wavelength(),
            tx_power_dbm: l.tx_power_dbm,
            gain_tx_dbi: l.gain_tx_dbi,
            gain_rx_dbi: l.gain_rx_dbi,
            cell_dx: geometry.periodicity(),
            cell_dy: geometry.periodicity(),
            tx: Point3::from(self.feed.position_m),
            rx,
            q_t: l.q_t,
            q_r: l.q_r,
            noise_floor_dbm: l.noise_floor_dbm,
            phasing: l.phasing,
            hardware: HardwareLosses {
                enabled: l.hardware_losses,
                dielectric_diode_db: l.dielectric_diode_loss_db,
                cable_db: l.cable_loss_db,
            },
        })
    }
}
