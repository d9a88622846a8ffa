//! Deterministic Wavefront OBJ export.
//!
//! Vertices are written in vertex-id order (extra base corners appended),
//! faces as upper faces, then wall faces, then the base polygon, all with
//! 1-based indices, LF line endings and `%.12g` float formatting. Identical
//! inputs produce byte-identical files.

use crate::embed::EmbeddedCap;
use crate::Real;
use std::io::Write;
use std::path::Path;

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e12)`.
pub fn fmt_g12(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= 12 {
        let s = format!("{:.*e}", 11, x);
        let (mantissa, e) = s.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        let ev: i32 = e.parse().unwrap();
        format!("{}e{}{:02}", mantissa, if ev < 0 { "-" } else { "+" }, ev.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        s
    }
}

/// Renders the cap as an OBJ document.
pub fn obj_string<R: Real>(emb: &EmbeddedCap<R>) -> String {
    let mut out = String::new();
    out.push_str("# convex cap\n");
    if emb.flat2d {
        out.push_str("# flat2d: doubled polygon standing on its base side\n");
    }
    for i in 0..emb.n_points() {
        let p = emb.point(i);
        out.push_str(&format!(
            "v {} {} {}\n",
            fmt_g12(p[0].as_f64()),
            fmt_g12(p[1].as_f64()),
            fmt_g12(p[2].as_f64())
        ));
    }
    let face_line = |f: &[usize]| {
        let mut line = String::from("f");
        for &i in f {
            line.push_str(&format!(" {}", i + 1));
        }
        line.push('\n');
        line
    };
    for f in &emb.upper_faces {
        out.push_str(&face_line(f));
    }
    for f in &emb.wall_faces {
        out.push_str(&face_line(f));
    }
    if !emb.base_face.is_empty() {
        out.push_str(&face_line(&emb.base_face));
    }
    out
}

/// Writes the OBJ file; byte output is a pure function of the input.
pub fn export_obj<R: Real>(emb: &EmbeddedCap<R>, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(obj_string(emb).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::fmt_g12;

    #[test]
    fn g12_formatting() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(-0.0), "0");
        assert_eq!(fmt_g12(1.0), "1");
        assert_eq!(fmt_g12(-2.5), "-2.5");
        assert_eq!(fmt_g12(0.5), "0.5");
        assert_eq!(fmt_g12(1e-7), "1e-07");
        assert_eq!(fmt_g12(1.5e-7), "1.5e-07");
        assert_eq!(fmt_g12(3.0000000000004), "3");
        assert_eq!(fmt_g12(1e12), "1e+12");
        assert_eq!(fmt_g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_g12(std::f64::consts::PI), "3.14159265359");
    }
}
