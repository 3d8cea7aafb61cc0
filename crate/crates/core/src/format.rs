//! Text formatting shared by the CSV, record and state-document writers.

/// Formats a real with 17 significant digits, `.` as decimal separator and
/// no grouping. Very large or very small magnitudes fall back to exponent
/// notation. Non-finite values become `NaN`, `inf` or `-inf`.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-6..=16).contains(&exp) {
        return format!("{:.16e}", x);
    }
    let decimals = (16 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Formats an optional real; `None` is the empty string (CSV) by convention.
pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}
