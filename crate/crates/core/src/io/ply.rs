use super::{parse_f64, truncate, PointCloud};
use crate::error::{Error, Result};
use crate::geometry::Point3;

#[derive(Debug)]
enum Property {
    Scalar { name: String, float: bool },
    List,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

/// Parses the `vertex` element of an ASCII PLY file. Unknown properties are
/// skipped; `red`/`green`/`blue` become per-point colors (float channels are
/// taken as 0..1 and scaled to 0..255).
pub fn parse_ply_ascii(bytes: &[u8]) -> Result<PointCloud> {
    let text = String::from_utf8_lossy(bytes);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(Error::parse(1, "missing `ply` magic")),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    let mut last = 1;
    loop {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, "header not terminated by end_header"))?;
        last = ln;
        let mut it = l.split_whitespace();
        match it.next() {
            Some("end_header") => break,
            Some("format") => {
                match it.next() {
                    Some("ascii") => {}
                    Some(f @ ("binary_little_endian" | "binary_big_endian")) => {
                        return Err(Error::UnsupportedFormat(format!("PLY {f}")))
                    }
                    other => {
                        return Err(Error::parse(
                            ln,
                            format!("unknown PLY format `{}`", other.unwrap_or("")),
                        ))
                    }
                }
                format_seen = true;
            }
            Some("element") => {
                let name = it
                    .next()
                    .ok_or_else(|| Error::parse(ln, "element without name"))?;
                let count = it
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::parse(ln, "element without a valid count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(ln, "property before any element"))?;
                let ty = it
                    .next()
                    .ok_or_else(|| Error::parse(ln, "property without type"))?;
                let prop = if ty == "list" {
                    let _count_ty = it.next();
                    let _item_ty = it.next();
                    it.next()
                        .ok_or_else(|| Error::parse(ln, "list property without name"))?;
                    Property::List
                } else {
                    let name = it
                        .next()
                        .ok_or_else(|| Error::parse(ln, "property without name"))?;
                    Property::Scalar {
                        name: name.to_string(),
                        float: matches!(ty, "float" | "double" | "float32" | "float64"),
                    }
                };
                el.props.push(prop);
            }
            Some("comment") | Some("obj_info") | None => {}
            Some(other) => {
                return Err(Error::parse(
                    ln,
                    format!("unexpected header keyword `{}`", truncate(other)),
                ))
            }
        }
    }
    if !format_seen {
        return Err(Error::parse(last, "header has no format line"));
    }

    let vi = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::Schema("no `vertex` element".into()))?;
    let vertex = &elements[vi];
    let find = |n: &str| {
        vertex
            .props
            .iter()
            .position(|p| matches!(p, Property::Scalar { name, .. } if name == n))
    };
    let (px, py, pz) = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(Error::Schema("vertex element lacks x, y or z".into())),
    };
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };

    // elements before the vertex block are skipped line by line
    for e in &elements[..vi] {
        for _ in 0..e.count {
            lines
                .next()
                .ok_or_else(|| Error::parse(last, format!("element `{}` truncated", e.name)))?;
        }
    }

    let mut points = Vec::with_capacity(vertex.count.min(1 << 20));
    let mut colors = Vec::new();
    let mut values = Vec::with_capacity(vertex.props.len());
    for _ in 0..vertex.count {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("expected {} vertices", vertex.count)))?;
        last = ln;
        values.clear();
        let mut it = l.split_whitespace();
        for p in &vertex.props {
            match p {
                Property::Scalar { .. } => {
                    let t = it
                        .next()
                        .ok_or_else(|| Error::parse(ln, "vertex line has too few values"))?;
                    values.push(parse_f64(t, ln)?);
                }
                Property::List => {
                    let n: usize = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(ln, "bad list length"))?;
                    for _ in 0..n {
                        it.next()
                            .ok_or_else(|| Error::parse(ln, "list shorter than its length"))?;
                    }
                    values.push(f64::NAN);
                }
            }
        }
        points.push(Point3::new(values[px], values[py], values[pz]));
        if let Some(ch) = rgb {
            let mut c = [0u8; 3];
            for (k, &pi) in ch.iter().enumerate() {
                let float = matches!(vertex.props[pi], Property::Scalar { float: true, .. });
                let v = if float { values[pi] * 255.0 } else { values[pi] };
                c[k] = v.round().clamp(0.0, 255.0) as u8;
            }
            colors.push(c);
        }
    }

    if points.is_empty() {
        return Err(Error::parse(last, "PLY has no vertices"));
    }
    if rgb.is_some() {
        PointCloud::with_colors(points, colors)
    } else {
        PointCloud::new(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const XYZ: &str = "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 2 3\n";

    #[test]
    fn two_vertices() {
        let c = parse_ply_ascii(XYZ.as_bytes()).unwrap();
        assert_eq!(c.points()[1], Point3::new(1.0, 2.0, 3.0));
        assert!(c.colors().is_none());
    }

    #[test]
    fn colors_and_unknown_properties() {
        let src = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float nx\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n1 9 2 3 10 20 30\n3 0 0 0\n";
        let c = parse_ply_ascii(src.as_bytes()).unwrap();
        assert_eq!(c.points()[0], Point3::new(1.0, 2.0, 3.0));
        assert_eq!(c.colors().unwrap(), &[[10, 20, 30]]);
    }

    #[test]
    fn binary_is_unsupported() {
        let src = "ply\nformat binary_little_endian 1.0\nelement vertex 1\nend_header\n";
        assert!(matches!(
            parse_ply_ascii(src.as_bytes()),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn missing_coordinate_is_schema_error() {
        let src = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n0 0\n";
        assert!(matches!(parse_ply_ascii(src.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn truncated_body() {
        let src = XYZ.replace("1 2 3\n", "");
        assert!(matches!(
            parse_ply_ascii(src.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }
}
