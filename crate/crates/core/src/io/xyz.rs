use super::{parse_f64, tokens, PointCloud};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Parses whitespace- or comma-separated `x y z` or `x y z r g b` lines.
/// Blank lines and `#` comments are skipped. Either every data line carries
/// color or none does.
pub fn parse_xyz(bytes: &[u8]) -> Result<PointCloud> {
    let text = String::from_utf8_lossy(bytes);
    let mut points = Vec::new();
    let mut colors: Vec<[u8; 3]> = Vec::new();
    let mut colored: Option<bool> = None;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = tokens(line).collect();
        let has_color = match fields.len() {
            3 => false,
            6 => true,
            n => return Err(Error::parse(ln, format!("expected 3 or 6 fields, found {n}"))),
        };
        match colored {
            None => colored = Some(has_color),
            Some(c) if c != has_color => {
                return Err(Error::parse(ln, "mixes colored and uncolored points"))
            }
            _ => {}
        }
        let x = parse_f64(fields[0], ln)?;
        let y = parse_f64(fields[1], ln)?;
        let z = parse_f64(fields[2], ln)?;
        points.push(Point3::new(x, y, z));
        if has_color {
            let mut rgb = [0u8; 3];
            for (c, f) in rgb.iter_mut().zip(&fields[3..]) {
                let v = parse_f64(f, ln)?;
                if !(0.0..=255.0).contains(&v) {
                    return Err(Error::parse(ln, format!("color component {v} outside [0,255]")));
                }
                *c = v.round() as u8;
            }
            colors.push(rgb);
        }
    }

    if points.is_empty() {
        return Err(Error::parse(last_line.max(1), "no points found"));
    }
    if colored == Some(true) {
        PointCloud::with_colors(points, colors)
    } else {
        PointCloud::new(points)
    }
}

/// Rounds to 9 significant digits and prints the shortest decimal that
/// represents the rounded value.
pub fn format_sig(v: f64) -> String {
    let rounded: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    let s = format!("{rounded}");
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// Canonical XYZ text: one point per line, 9 significant digits, RGB
/// appended when present.
pub fn write_xyz(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 32);
    for (i, p) in cloud.points().iter().enumerate() {
        out.push_str(&format_sig(p.x));
        out.push(' ');
        out.push_str(&format_sig(p.y));
        out.push(' ');
        out.push_str(&format_sig(p.z));
        if let Some(c) = cloud.colors() {
            out.push_str(&format!(" {} {} {}", c[i][0], c[i][1], c[i][2]));
        }
        out.push('\n');
    }
    out
}
