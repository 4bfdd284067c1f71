//! PIN-diode equivalent circuit, bias-resistor sizing and the shift-register
//! frame that drives the 16 × 10 board.
//!
//! Frame bit order: diode `k = (n − 1)·16 + m` (1-based, `m` fastest) lives in
//! octet `⌈k/8⌉`, most significant bit first. The frame file is one line of
//! 40 uppercase hex digits, optionally preceded by `#` comment lines.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::phase::CodingMask;

/// Series R-L (on) / R-L-C (off) model of the PIN diode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeModel {
    pub r_on: f64,
    pub l_on: f64,
    pub r_off: f64,
    pub l_off: f64,
    pub c_off: f64,
}

impl Default for DiodeModel {
    fn default() -> Self {
        DiodeModel {
            r_on: 1.0,
            l_on: 0.45e-9,
            r_off: 10.0,
            l_off: 0.45e-9,
            c_off: 0.16e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiodeState {
    On,
    Off,
}

impl DiodeModel {
    /// Frequency where the off-state reactance crosses zero.
    pub fn off_state_resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.l_off * self.c_off).sqrt())
    }
}

pub fn diode_impedance(model: &DiodeModel, state: DiodeState, frequency_hz: f64) -> Result<Complex64> {
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::domain(format!("frequency must be positive, got {frequency_hz}")));
    }
    let w = 2.0 * PI * frequency_hz;
    Ok(match state {
        DiodeState::On => Complex64::new(model.r_on, w * model.l_on),
        DiodeState::Off => Complex64::new(model.r_off, w * model.l_off - 1.0 / (w * model.c_off)),
    })
}

/// Series resistor that sets the forward current through LED and diode.
pub fn bias_resistor(v_source: f64, v_led: f64, v_pin: f64, i_forward: f64) -> Result<f64> {
    let headroom = v_source - v_led - v_pin;
    if !(headroom > 0.0) {
        return Err(Error::domain(format!(
            "source voltage {v_source} V does not exceed the {} V drop",
            v_led + v_pin
        )));
    }
    if !(i_forward > 0.0) {
        return Err(Error::domain(format!("forward current must be positive, got {i_forward}")));
    }
    Ok(headroom / i_forward)
}

pub const REGISTER_COUNT: usize = 20;
const BOARD_X: usize = 16;
const BOARD_Y: usize = 10;

/// One octet per 74HC595-class register, 160 bits in all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterFrame {
    bytes: [u8; REGISTER_COUNT],
}

impl RegisterFrame {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bytes: [u8; REGISTER_COUNT] = bytes.try_into().map_err(|_| {
            Error::domain(format!("a frame is {REGISTER_COUNT} octets, got {}", bytes.len()))
        })?;
        Ok(RegisterFrame { bytes })
    }

    pub fn bytes(&self) -> &[u8; REGISTER_COUNT] {
        &self.bytes
    }

    /// State of diode `k` (1-based).
    pub fn diode(&self, k: usize) -> bool {
        let i = k - 1;
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn to_hex(&self) -> String {
        hex::encode_upper(self.bytes)
    }

    /// Parses the frame file format: `#` lines and blank lines are skipped,
    /// exactly one data line of 40 hex digits must remain.
    pub fn parse_hex(text: &str) -> Result<Self> {
        let mut data = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let line = data.next().ok_or_else(|| Error::domain("frame file has no data line"))?;
        if data.next().is_some() {
            return Err(Error::domain("frame file has more than one data line"));
        }
        let bytes = hex::decode(line).map_err(|e| Error::domain(format!("bad frame hex: {e}")))?;
        RegisterFrame::from_bytes(&bytes)
    }

    pub fn write_file<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", self.to_hex())
    }
}

fn board_geometry_check(geom: &ArrayGeometry) -> Result<()> {
    if geom.count_x() != BOARD_X || geom.count_y() != BOARD_Y {
        return Err(Error::domain(format!(
            "register frames address a {BOARD_X}×{BOARD_Y} board, mask is {}×{}",
            geom.count_x(),
            geom.count_y()
        )));
    }
    Ok(())
}

pub fn serialize_mask(mask: &CodingMask) -> Result<RegisterFrame> {
    board_geometry_check(mask.geometry())?;
    let mut bytes = [0u8; REGISTER_COUNT];
    // element order is already m-fastest, i.e. diode order
    for (i, &on) in mask.as_slice().iter().enumerate() {
        if on {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    Ok(RegisterFrame { bytes })
}

/// Inverse of [`serialize_mask`], onto the prototype geometry.
pub fn deserialize_frame(frame: &RegisterFrame) -> CodingMask {
    let geom = ArrayGeometry::prototype();
    CodingMask::from_fn(geom, |m, n| frame.diode((n - 1) * BOARD_X + m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn impedance_at_5_5_ghz() {
        let d = DiodeModel::default();
        let on = diode_impedance(&d, DiodeState::On, 5.5e9).unwrap();
        assert_eq!(on.re, 1.0);
        assert!((on.im - 15.55).abs() < 0.01);
        let off = diode_impedance(&d, DiodeState::Off, 5.5e9).unwrap();
        assert_eq!(off.re, 10.0);
        assert!((off.im + 165.3).abs() < 0.05);
        assert!(diode_impedance(&d, DiodeState::On, 0.0).is_err());
    }

    #[test]
    fn off_state_resonance() {
        let d = DiodeModel::default();
        let f0 = d.off_state_resonance();
        assert!((f0 / 1e9 - 18.76).abs() < 0.01);
        let x = diode_impedance(&d, DiodeState::Off, f0).unwrap().im;
        assert!(x.abs() < 1e-9);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..100 {
            let x = diode_impedance(&d, DiodeState::Off, f0 * i as f64 / 100.0).unwrap().im;
            assert!(x > prev);
            prev = x;
        }
    }

    #[test]
    fn bias_resistor_examples() {
        assert!((bias_resistor(3.15, 1.8, 0.9, 0.008).unwrap() - 56.25).abs() < 1e-9);
        assert_eq!(bias_resistor(5.0, 0.0, 0.0, 0.01).unwrap(), 500.0);
        let a = bias_resistor(3.15, 1.8, 0.9, 0.008).unwrap();
        let b = bias_resistor(3.15, 1.8, 0.9, 0.016).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(bias_resistor(2.0, 1.8, 0.9, 0.008).is_err());
        assert!(bias_resistor(3.15, 1.8, 0.9, 0.0).is_err());
    }

    #[test]
    fn zero_mask_frame() {
        let f = serialize_mask(&CodingMask::zeros(ArrayGeometry::prototype())).unwrap();
        assert_eq!(f.bytes(), &[0u8; 20]);
        assert_eq!(f.to_hex(), "0".repeat(40));
        assert_eq!(deserialize_frame(&f), CodingMask::zeros(ArrayGeometry::prototype()));
    }

    #[test]
    fn first_diode_is_msb_of_first_octet() {
        let mut mask = CodingMask::zeros(ArrayGeometry::prototype());
        mask.set(1, 1, true);
        let f = serialize_mask(&mask).unwrap();
        assert_eq!(f.bytes()[0], 0x80);
        assert!(f.bytes()[1..].iter().all(|&b| b == 0));
        assert_eq!(deserialize_frame(&f), mask);
    }

    #[test]
    fn diode_numbering() {
        // element (m=1, n=2) is diode 17: octet 3, MSB
        let mut mask = CodingMask::zeros(ArrayGeometry::prototype());
        mask.set(1, 2, true);
        mask.set(16, 10, true);
        let f = serialize_mask(&mask).unwrap();
        assert_eq!(f.bytes()[2], 0x80);
        assert_eq!(f.bytes()[19], 0x01);
        assert!(f.diode(17) && f.diode(160));
    }

    #[test]
    fn wrong_board_size() {
        let g = ArrayGeometry::new(8, 8, 0.016).unwrap();
        assert!(serialize_mask(&CodingMask::zeros(g)).is_err());
    }

    #[test]
    fn hex_file_format() {
        let mut mask = CodingMask::zeros(ArrayGeometry::prototype());
        mask.set(3, 1, true);
        let f = serialize_mask(&mask).unwrap();
        let mut buf = Vec::new();
        f.write_file(&mut buf, &["steer=30".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("# steer=30\n20{}\n", "0".repeat(38)));
        assert_eq!(RegisterFrame::parse_hex(&text).unwrap(), f);
        assert!(RegisterFrame::parse_hex("# nothing\n").is_err());
        assert!(RegisterFrame::parse_hex("00\n").is_err());
        assert!(RegisterFrame::parse_hex("ZZ\n").is_err());
        assert!(RegisterFrame::parse_hex(&format!("{0}\n{0}\n", "0".repeat(40))).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn frame_round_trip(bits in proptest::collection::vec(any::<bool>(), 160)) {
            let mask = CodingMask::from_bits(ArrayGeometry::prototype(), bits).unwrap();
            let frame = serialize_mask(&mask).unwrap();
            prop_assert_eq!(deserialize_frame(&frame), mask);
            prop_assert_eq!(RegisterFrame::parse_hex(&frame.to_hex()).unwrap(), frame);
        }

        #[test]
        fn bias_resistor_homogeneity(v in 3.0f64..12.0, i in 0.001f64..0.1, s in 0.1f64..10.0) {
            let r = bias_resistor(v, 1.8, 0.9, i).unwrap();
            let scaled_i = bias_resistor(v, 1.8, 0.9, i * s).unwrap();
            prop_assert!((scaled_i * s - r).abs() <= 1e-9 * r);
            let net = v - 2.7;
            let scaled_v = bias_resistor(2.7 + net * s, 1.8, 0.9, i).unwrap();
            prop_assert!((scaled_v - r * s).abs() <= 1e-9 * r * s);
        }
    }
}
