//! Mesh and field export: ASCII OBJ, binary little-endian PLY with per-vertex scalar
//! properties, and CSV dumps of Ψ and W.

use crate::flatgeom::MultiDomain;
use crate::geom::Vec3;
use crate::msesolve::DiscreteSolution;
use crate::surface::Surface;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum MeshIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("attribute {name} has {found} values for {expected} vertices")]
    AttributeLength { name: String, found: usize, expected: usize },
    #[error("attribute name {0:?} is not a bare identifier")]
    AttributeName(String),
}

/// OBJ with 1-based face indices.
pub fn write_obj<W: Write>(s: &Surface, mut out: W) -> Result<(), MeshIoError> {
    for p in &s.positions {
        writeln!(out, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for t in &s.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

pub fn save_obj(s: &Surface, path: &Path) -> Result<(), MeshIoError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_obj(s, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Read vertices and triangular faces; texture and normal indices (`f 1/2/3`) are ignored,
/// other records skipped.
pub fn read_obj<R: Read>(input: R) -> Result<Surface, MeshIoError> {
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let bad = |reason: &str| MeshIoError::Parse {
            line: lineno,
            reason: reason.to_string(),
        };
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .take(3)
                    .map(|x| x.parse::<f64>().map_err(|_| bad("bad coordinate")))
                    .collect::<Result<_, _>>()?;
                if c.len() < 3 {
                    return Err(bad("vertex needs three coordinates"));
                }
                positions.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|x| {
                        let head = x.split('/').next().unwrap_or("");
                        match head.parse::<i64>() {
                            Ok(k) if k > 0 => Ok(k as usize - 1),
                            Ok(k) if k < 0 && (-k) as usize <= positions.len() => Ok(positions.len() - (-k) as usize),
                            _ => Err(bad("bad face index")),
                        }
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(bad("only triangular faces are supported"));
                }
                if idx.iter().any(|&k| k >= positions.len()) {
                    return Err(bad("face index past the vertices read so far"));
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok(Surface::new(positions, triangles))
}

/// Binary little-endian PLY: double x, y, z plus one double property per attribute, and
/// faces as a uchar-counted int list.
pub fn write_ply<W: Write>(s: &Surface, attrs: &[(&str, &[f64])], mut out: W) -> Result<(), MeshIoError> {
    let n = s.n_vertices();
    for (name, vals) in attrs {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(MeshIoError::AttributeName(name.to_string()));
        }
        if vals.len() != n {
            return Err(MeshIoError::AttributeLength {
                name: name.to_string(),
                found: vals.len(),
                expected: n,
            });
        }
    }
    let mut header = String::from("ply\nformat binary_little_endian 1.0\ncomment msekit\n");
    header += &format!("element vertex {n}\nproperty double x\nproperty double y\nproperty double z\n");
    for (name, _) in attrs {
        header += &format!("property double {name}\n");
    }
    header += &format!("element face {}\nproperty list uchar int vertex_indices\nend_header\n", s.n_triangles());
    out.write_all(header.as_bytes())?;
    for (v, p) in s.positions.iter().enumerate() {
        for x in [p.x, p.y, p.z] {
            out.write_all(&x.to_le_bytes())?;
        }
        for (_, vals) in attrs {
            out.write_all(&vals[v].to_le_bytes())?;
        }
    }
    for t in &s.triangles {
        out.write_all(&[3u8])?;
        for &v in t {
            out.write_all(&(v as i32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn save_ply(s: &Surface, attrs: &[(&str, &[f64])], path: &Path) -> Result<(), MeshIoError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ply(s, attrs, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Surface and named vertex attributes read back from a PLY written by [`write_ply`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlyMesh {
    pub surface: Surface,
    pub attrs: Vec<(String, Vec<f64>)>,
}

/// Reader for the subset [`write_ply`] emits: binary little-endian, all-double vertex
/// properties starting with x, y, z, and `uchar int` face lists.
pub fn read_ply<R: Read>(input: R) -> Result<PlyMesh, MeshIoError> {
    let mut r = BufReader::new(input);
    let mut props = Vec::new();
    let (mut nv, mut nf) = (0usize, 0usize);
    let mut lineno = 0;
    let mut in_vertex = false;
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(MeshIoError::Parse {
                line: lineno,
                reason: "header ends early".into(),
            });
        }
        lineno += 1;
        let bad = |reason: &str| MeshIoError::Parse {
            line: lineno,
            reason: reason.to_string(),
        };
        let w: Vec<&str> = line.split_whitespace().collect();
        match w.as_slice() {
            ["ply"] | ["comment", ..] => {}
            ["format", "binary_little_endian", "1.0"] => {}
            ["format", ..] => return Err(bad("only binary_little_endian 1.0 is supported")),
            ["element", "vertex", k] => {
                nv = k.parse().map_err(|_| bad("bad vertex count"))?;
                in_vertex = true;
            }
            ["element", "face", k] => {
                nf = k.parse().map_err(|_| bad("bad face count"))?;
                in_vertex = false;
            }
            ["property", "double", name] if in_vertex => props.push(name.to_string()),
            ["property", "list", "uchar", "int", _] if !in_vertex => {}
            ["end_header"] => break,
            _ => return Err(bad("unsupported header line")),
        }
    }
    if props.len() < 3 || props[..3] != ["x", "y", "z"] {
        return Err(MeshIoError::Parse {
            line: lineno,
            reason: "vertex properties must start with x, y, z".into(),
        });
    }
    let mut f8 = [0u8; 8];
    let mut positions = Vec::with_capacity(nv);
    let mut attrs: Vec<(String, Vec<f64>)> = props[3..].iter().map(|p| (p.clone(), Vec::with_capacity(nv))).collect();
    for _ in 0..nv {
        let mut xyz = [0.0; 3];
        for c in &mut xyz {
            r.read_exact(&mut f8)?;
            *c = f64::from_le_bytes(f8);
        }
        positions.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
        for (_, vals) in attrs.iter_mut() {
            r.read_exact(&mut f8)?;
            vals.push(f64::from_le_bytes(f8));
        }
    }
    let mut triangles = Vec::with_capacity(nf);
    let mut i4 = [0u8; 4];
    for f in 0..nf {
        let mut count = [0u8; 1];
        r.read_exact(&mut count)?;
        if count[0] != 3 {
            return Err(MeshIoError::Parse {
                line: lineno,
                reason: format!("face {f} is not a triangle"),
            });
        }
        let mut t = [0usize; 3];
        for v in &mut t {
            r.read_exact(&mut i4)?;
            let k = i32::from_le_bytes(i4);
            if k < 0 || k as usize >= nv {
                return Err(MeshIoError::Parse {
                    line: lineno,
                    reason: format!("face {f} has index {k} out of range"),
                });
            }
            *v = k as usize;
        }
        triangles.push(t);
    }
    Ok(PlyMesh {
        surface: Surface::new(positions, triangles),
        attrs,
    })
}

/// `vertex_id,x,y,psi` with domain coordinates.
pub fn write_psi_csv<W: Write>(dom: &MultiDomain, psi: &[f64], mut out: W) -> Result<(), MeshIoError> {
    if psi.len() != dom.n_vertices() {
        return Err(MeshIoError::AttributeLength {
            name: "psi".into(),
            found: psi.len(),
            expected: dom.n_vertices(),
        });
    }
    writeln!(out, "vertex_id,x,y,psi")?;
    for (v, s) in psi.iter().enumerate() {
        let p = dom.position(v);
        writeln!(out, "{v},{},{},{s}", p.x, p.y)?;
    }
    Ok(())
}

/// `level,x,y,w` at triangle centroids, one block per solution in the sequence.
pub fn write_w_csv<W: Write>(dom: &MultiDomain, seq: &[DiscreteSolution], mut out: W) -> Result<(), MeshIoError> {
    writeln!(out, "level,x,y,w")?;
    for (n, sol) in seq.iter().enumerate() {
        if sol.w.len() != dom.n_triangles() {
            return Err(MeshIoError::AttributeLength {
                name: "w".into(),
                found: sol.w.len(),
                expected: dom.n_triangles(),
            });
        }
        for (t, w) in sol.w.iter().enumerate() {
            let c = dom.mesh.centroid(t);
            writeln!(out, "{n},{},{},{w}", c.x, c.y)?;
        }
    }
    Ok(())
}

pub fn save_with<F>(path: &Path, f: F) -> Result<(), MeshIoError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), MeshIoError>,
{
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> Surface {
        Surface::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]],
        )
    }

    #[test]
    fn obj_round_trip() {
        let s = tetra();
        let mut buf = Vec::new();
        write_obj(&s, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("f 1 3 2"));
        assert_eq!(read_obj(&buf[..]).unwrap(), s);
    }

    #[test]
    fn obj_faces_with_slashes_and_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 -1//1\n";
        let s = read_obj(text.as_bytes()).unwrap();
        assert_eq!(s.triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn obj_errors_name_the_line() {
        let err = read_obj("v 0 0 0\nf 1 2 3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, MeshIoError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn ply_round_trip_is_lossless() {
        let s = tetra();
        let psi = [0.1, -2.5, 1e-300, std::f64::consts::PI];
        let mut buf = Vec::new();
        write_ply(&s, &[("psi", &psi)], &mut buf).unwrap();
        let back = read_ply(&buf[..]).unwrap();
        assert_eq!(back.surface, s);
        assert_eq!(back.attrs, vec![("psi".to_string(), psi.to_vec())]);
    }

    #[test]
    fn ply_rejects_bad_attributes() {
        let s = tetra();
        assert!(matches!(
            write_ply(&s, &[("w", &[1.0])], Vec::new()),
            Err(MeshIoError::AttributeLength { .. })
        ));
        assert!(matches!(
            write_ply(&s, &[("a b", &[0.0; 4])], Vec::new()),
            Err(MeshIoError::AttributeName(_))
        ));
    }
}
