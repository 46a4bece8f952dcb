//! Shared formatting for the CSV surfaces: reals are written in scientific
//! notation with 17 significant digits, which round-trips f64 exactly and
//! keeps output byte-stable across runs.

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}
