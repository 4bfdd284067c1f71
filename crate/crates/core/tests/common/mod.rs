//! Independent reference computations for the integration tests. Nothing
//! here calls into the engine's summation code.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Plane-wave array factor summed term by term from the raw formula.
///
/// `coeffs[(n-1)*mx + (m-1)]` is `(re, im)` of element `(m, n)`; `obs_theta`
/// is signed within the `phi_plane` cut.
#[allow(clippy::too_many_arguments)]
pub fn far_field_oracle(
    mx: usize,
    ny: usize,
    p: f64,
    coeffs: &[(f64, f64)],
    inc_theta_deg: f64,
    inc_phi_deg: f64,
    phi_plane_deg: f64,
    obs_theta_deg: f64,
    wavelength: f64,
) -> (f64, f64) {
    let k0 = 2.0 * PI / wavelength;
    let rad = |d: f64| d * PI / 180.0;
    let (ti, pi_) = (rad(inc_theta_deg), rad(inc_phi_deg));
    let (to, po) = (rad(obs_theta_deg), rad(phi_plane_deg));
    let mut re = Vec::new();
    let mut im = Vec::new();
    for n in 1..=ny {
        for m in 1..=mx {
            let x = (m as f64 - 1.0) * p;
            let y = (n as f64 - 1.0) * p;
            let proj_in = ti.sin() * (x * pi_.cos() + y * pi_.sin());
            let proj_obs = to.sin() * (x * po.cos() + y * po.sin());
            let arg = -k0 * (proj_in - proj_obs);
            let (a, b) = coeffs[(n - 1) * mx + (m - 1)];
            re.push(a * arg.cos() - b * arg.sin());
            im.push(a * arg.sin() + b * arg.cos());
        }
    }
    (compensated_sum(re), compensated_sum(im))
}

/// Expected 1-bit state from the raw quantization rule on an unwrapped phase.
pub fn one_bit(phase_deg: f64) -> bool {
    let w = ((phase_deg % 360.0) + 360.0) % 360.0;
    (90.0..270.0).contains(&w)
}
