use super::{parse_f64, tokens, truncate, TriangleMesh};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Parses an ASCII OFF mesh. Polygons are fan-triangulated from their first
/// vertex; fan triangles that repeat a vertex index are dropped.
///
/// Accepts the `OFF<nv> <nf> <ne>` header variant (counts glued to the magic),
/// which appears in ModelNet.
pub fn parse_off(bytes: &[u8]) -> Result<TriangleMesh> {
    let text = String::from_utf8_lossy(bytes);
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing OFF header"))?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| Error::parse(hline, format!("expected `OFF`, found `{}`", truncate(header))))?;

    let counts_line = if rest.trim().is_empty() {
        lines
            .next()
            .ok_or_else(|| Error::parse(hline + 1, "missing counts line"))?
    } else {
        (hline, rest.trim())
    };
    let (cline, counts) = counts_line;
    let counts: Vec<usize> = tokens(counts)
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(cline, format!("bad count `{}`", truncate(t))))
        })
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(Error::parse(cline, "counts line needs vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv.min(1 << 20));
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(cline, format!("expected {nv} vertices, file ended early")))?;
        let mut it = tokens(l);
        let mut xyz = [0.0; 3];
        for c in &mut xyz {
            let t = it
                .next()
                .ok_or_else(|| Error::parse(ln, "vertex needs 3 coordinates"))?;
            *c = parse_f64(t, ln)?;
        }
        vertices.push(Point3::from_array(xyz));
    }

    let mut faces = Vec::with_capacity(nf.min(1 << 20));
    for _ in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| Error::parse(cline, format!("expected {nf} faces, file ended early")))?;
        let mut it = tokens(l);
        let k: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(ln, "face must start with its vertex count"))?;
        if k < 3 {
            return Err(Error::parse(ln, format!("face with {k} vertices")));
        }
        let mut idx = Vec::with_capacity(k.min(64));
        for _ in 0..k {
            let t = it
                .next()
                .ok_or_else(|| Error::parse(ln, format!("face lists fewer than {k} indices")))?;
            let i: usize = t
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad vertex index `{}`", truncate(t))))?;
            if i >= nv {
                return Err(Error::parse(
                    ln,
                    format!("vertex index {i} out of range ({nv} vertices)"),
                ));
            }
            idx.push(i);
        }
        for w in 1..k - 1 {
            let tri = [idx[0], idx[w], idx[w + 1]];
            if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                faces.push(tri);
            }
        }
    }

    TriangleMesh::new(vertices, faces)
}
