use std::path::Path;

use pcup_core::geometry::Point3;
use pcup_core::mesh::TriangleMesh;

use crate::{read_text, Error, Result};

/// Loads an ASCII OFF or ASCII PLY triangle mesh, chosen by the file's
/// first token. The mesh is normalized into the unit sphere.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let text = read_text(path)?;
    let first = text.split_whitespace().next().unwrap_or("");
    if first.starts_with("OFF") {
        parse_off(&text, path)
    } else if first == "ply" {
        parse_ply(&text, path)
    } else {
        Err(Error::format(path, "unrecognized mesh format (expected OFF or PLY)"))
    }
}

/// Non-empty lines with comments removed, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

struct Cursor<'a, I: Iterator<Item = (usize, &'a str)>> {
    lines: I,
    path: &'a Path,
    last: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Cursor<'a, I> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.lines.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(self.err(self.last, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse { path: self.path.to_path_buf(), line, message: message.into() }
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, path: &Path) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { path: path.to_path_buf(), line, message: format!("invalid number '{tok}'") })
}

fn vertex(tokens: &[&str], columns: [usize; 3], line: usize, path: &Path) -> Result<Point3> {
    let mut xyz = [0.0; 3];
    for (slot, &c) in xyz.iter_mut().zip(&columns) {
        let tok = tokens.get(c).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: "too few vertex coordinates".into(),
        })?;
        *slot = parse_num(tok, line, path)?;
    }
    Ok(Point3::from_array(xyz))
}

fn triangle(tokens: &[&str], line: usize, path: &Path) -> Result<[usize; 3]> {
    let count: usize = parse_num(tokens.first().copied().unwrap_or(""), line, path)?;
    if count != 3 {
        return Err(Error::Parse { path: path.to_path_buf(), line, message: format!("non-triangle face ({count} vertices)") });
    }
    if tokens.len() < 4 {
        return Err(Error::Parse { path: path.to_path_buf(), line, message: "too few face indices".into() });
    }
    Ok([parse_num(tokens[1], line, path)?, parse_num(tokens[2], line, path)?, parse_num(tokens[3], line, path)?])
}

pub fn parse_off(text: &str, path: &Path) -> Result<TriangleMesh> {
    let mut cur = Cursor { lines: content_lines(text), path, last: 0 };
    let (n, header) = cur.next("OFF header")?;
    let mut tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens[0] != "OFF" {
        return Err(cur.err(n, format!("expected 'OFF', found '{}'", tokens[0])));
    }
    tokens.remove(0);
    let (n, counts) = if tokens.is_empty() {
        let (n, l) = cur.next("vertex and face counts")?;
        (n, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (n, tokens)
    };
    if counts.len() < 2 {
        return Err(cur.err(n, "expected vertex and face counts"));
    }
    let nv: usize = parse_num(counts[0], n, path)?;
    let nf: usize = parse_num(counts[1], n, path)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = cur.next("vertex")?;
        vertices.push(vertex(&l.split_whitespace().collect::<Vec<_>>(), [0, 1, 2], n, path)?);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = cur.next("face")?;
        triangles.push(triangle(&l.split_whitespace().collect::<Vec<_>>(), n, path)?);
    }
    Ok(TriangleMesh::new(vertices, triangles).map_err(|e| Error::format(path, e.to_string()))?)
}

/// ASCII OFF text of a mesh (in its normalized coordinates), with full
/// float precision.
pub fn format_off(mesh: &TriangleMesh) -> String {
    let mut out = format!("OFF\n{} {} 0\n", mesh.vertices().len(), mesh.triangles().len());
    for v in mesh.vertices() {
        out.push_str(&format!("{:?} {:?} {:?}\n", v.x, v.y, v.z));
    }
    for t in mesh.triangles() {
        out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    out
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<String>,
}

pub fn parse_ply(text: &str, path: &Path) -> Result<TriangleMesh> {
    // header lines are read raw: PLY comments start with the word "comment"
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, other)) => return Err(err(n, format!("expected 'ply', found '{other}'"))),
        None => return Err(err(0, "empty file".into())),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut ascii = false;
    let mut last = 1;
    loop {
        let Some((n, line)) = lines.next() else {
            return Err(err(last, "unexpected end of header".into()));
        };
        last = n;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "format" => {
                if tokens.get(1) != Some(&"ascii") {
                    return Err(err(n, format!("unsupported PLY format '{}' (only ascii)", tokens.get(1).unwrap_or(&""))));
                }
                ascii = true;
            }
            "comment" | "obj_info" => {}
            "element" => {
                if tokens.len() != 3 {
                    return Err(err(n, "malformed element line".into()));
                }
                elements.push(PlyElement { name: tokens[1].into(), count: parse_num(tokens[2], n, path)?, properties: Vec::new() });
            }
            "property" => {
                let Some(el) = elements.last_mut() else {
                    return Err(err(n, "property before any element".into()));
                };
                el.properties.push(tokens.last().copied().unwrap_or("").into());
            }
            "end_header" => break,
            other => return Err(err(n, format!("unknown header keyword '{other}'"))),
        }
    }
    if !ascii {
        return Err(err(last, "missing format line".into()));
    }
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for el in &elements {
        for _ in 0..el.count {
            let Some((n, line)) = lines.next() else {
                return Err(err(last, format!("unexpected end of file in element '{}'", el.name)));
            };
            last = n;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match el.name.as_str() {
                "vertex" => {
                    let col = |name: &str| {
                        el.properties.iter().position(|p| p == name).ok_or_else(|| err(n, format!("vertex has no '{name}' property")))
                    };
                    vertices.push(vertex(&tokens, [col("x")?, col("y")?, col("z")?], n, path)?);
                }
                "face" => {
                    triangles.push(triangle(&tokens, n, path)?);
                }
                _ => {}
            }
        }
    }
    if !elements.iter().any(|e| e.name == "face") {
        return Err(err(last, "no face element".into()));
    }
    Ok(TriangleMesh::new(vertices, triangles).map_err(|e| Error::format(path, e.to_string()))?)
}
