//! Angle formatting for tabular output.

use std::f64::consts::PI;

/// Formats `x` with six significant digits, dropping trailing zeros.
pub fn six_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// A phase as a multiple of π, e.g. `0.125` for π/8.
pub fn in_pi(radians: f64) -> String {
    six_significant(radians / PI)
}

/// Semicolon-joined list formatted with `f`.
pub fn join<F: Fn(f64) -> String>(values: &[f64], f: F) -> String {
    values.iter().map(|&v| f(v)).collect::<Vec<_>>().join(";")
}
