//! Minimal Wavefront OBJ support: `v x y z` and triangular `f a b c` records.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::Vec3;

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let file = File::open(path)?;
    read_obj(BufReader::new(file))
}

/// Parses OBJ text. Records other than `v` and `f` are ignored; face
/// indices are 1-based (negative indices count back from the last vertex).
pub fn read_obj(reader: impl BufRead) -> Result<TriangleMesh> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = lineno + 1;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0; 3];
                for c in coords.iter_mut() {
                    let tok = tokens.next().ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: "vertex record needs three coordinates".into(),
                    })?;
                    *c = tok.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid coordinate {tok:?}"),
                    })?;
                }
                positions.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(Error::NonTriangularFace { line: line_no });
                }
                let mut face = [0usize; 3];
                for (slot, tok) in face.iter_mut().zip(&refs) {
                    let head = tok.split('/').next().unwrap_or_default();
                    let raw: i64 = head.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid face index {tok:?}"),
                    })?;
                    let resolved = match raw {
                        0 => None,
                        r if r > 0 => Some(r as usize - 1),
                        r => (positions.len() as i64 + r).try_into().ok(),
                    };
                    *slot = resolved.ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("face index {raw} cannot be resolved"),
                    })?;
                }
                faces.push(face);
            }
            _ => {}
        }
    }

    TriangleMesh::new(positions, faces)
}

pub fn save_obj(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_obj(mesh, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes positions with 17 significant digits so binary64 values survive a round trip.
pub fn write_obj(mesh: &TriangleMesh, mut w: impl Write) -> Result<()> {
    writeln!(
        w,
        "# {} vertices, {} faces",
        mesh.vertex_count(),
        mesh.face_count()
    )?;
    for p in &mesh.positions {
        writeln!(w, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}
