//! Number formatting shared by the CSV writers.

/// Formats with 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
