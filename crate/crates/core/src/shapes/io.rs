//! Reading and writing boundaries: CSV (canonical, lossless), OBJ and OFF
//! meshes.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::boundary::{Boundary, Vec3};
use crate::error::{RegulusError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Obj,
    Off,
}

impl Format {
    /// Format from the file extension (case-insensitive).
    pub fn from_path(path: &Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "csv" => Some(Format::Csv),
            "obj" => Some(Format::Obj),
            "off" => Some(Format::Off),
            _ => None,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = RegulusError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "obj" => Ok(Format::Obj),
            "off" => Ok(Format::Off),
            _ => Err(RegulusError::InvalidInput(format!("unknown format {s:?}"))),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RegulusError + '_ {
    move |source| RegulusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> RegulusError {
    RegulusError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Loads a boundary. CSV files carry their own scaled normals (rescaled to
/// `r` when given); meshes get area-weighted vertex normals of length `r`
/// (default 1).
pub fn load(path: &Path, format: Option<Format>, r: Option<f64>) -> Result<Boundary> {
    let format = format
        .or_else(|| Format::from_path(path))
        .ok_or_else(|| RegulusError::InvalidInput(format!("cannot tell the format of {}", path.display())))?;
    let file = File::open(path).map_err(io_err(path))?;
    let b = match format {
        Format::Csv => read_csv(file, path)?,
        Format::Obj => read_obj(BufReader::new(file), path, r.unwrap_or(1.0))?,
        Format::Off => read_off(BufReader::new(file), path, r.unwrap_or(1.0))?,
    };
    match r {
        Some(r) if format == Format::Csv && r != b.r() => b.with_radius(r),
        _ => Ok(b),
    }
}

/// Writes `x,y[,z],nx,ny[,nz],loop` with one row per sample, loops in
/// adjacency order. Numbers carry 17 significant digits, so loading the file
/// reproduces every coordinate exactly.
pub fn save_csv(b: &Boundary, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_csv(b, file).map_err(|e| match e {
        RegulusError::Io { source, .. } => io_err(path)(source),
        other => other,
    })
}

pub fn write_csv(b: &Boundary, out: impl Write) -> Result<()> {
    let to_io = |e: csv::Error| RegulusError::Io {
        path: PathBuf::from("<csv>"),
        source: e.into(),
    };
    let mut w = csv::Writer::from_writer(out);
    let header: &[&str] = if b.dim() == 2 {
        &["x", "y", "nx", "ny", "loop"]
    } else {
        &["x", "y", "z", "nx", "ny", "nz", "loop"]
    };
    w.write_record(header).map_err(to_io)?;
    let f = |v: f64| format!("{v:.16e}");
    for (comp, order) in loop_orders(b)?.into_iter().enumerate() {
        for i in order {
            let (p, e) = (b.point(i), b.eta(i));
            let mut rec: Vec<String> = if b.dim() == 2 {
                vec![f(p.x), f(p.y), f(e.x), f(e.y)]
            } else {
                vec![f(p.x), f(p.y), f(p.z), f(e.x), f(e.y), f(e.z)]
            };
            rec.push(comp.to_string());
            w.write_record(&rec).map_err(to_io)?;
        }
    }
    w.flush().map_err(|e| to_io(e.into()))?;
    Ok(())
}

/// Sample indices of each component in traversal order. CSV stores closed
/// loops only.
fn loop_orders(b: &Boundary) -> Result<Vec<Vec<usize>>> {
    let mut seen = vec![false; b.len()];
    let mut out = Vec::new();
    for start in 0..b.len() {
        if seen[start] {
            continue;
        }
        let mut order = vec![start];
        seen[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let nb = b.neighbors(cur);
            if nb.len() != 2 {
                return Err(RegulusError::InvalidInput(
                    "CSV output needs every component to be a closed polyline".into(),
                ));
            }
            let next = if nb[0] != prev { nb[0] } else { nb[1] };
            if next == start {
                break;
            }
            if seen[next] {
                return Err(RegulusError::InvalidInput(
                    "adjacency is not a set of simple loops".into(),
                ));
            }
            seen[next] = true;
            order.push(next);
            prev = cur;
            cur = next;
        }
        out.push(order);
    }
    Ok(out)
}

/// Reads `x,y,nx,ny[,loop]` or `x,y,z,nx,ny,nz[,loop]`. Rows sharing a loop
/// id form one closed polyline in file order; without the column the whole
/// file is one loop.
pub fn read_csv(input: impl Read, path: &Path) -> Result<Boundary> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let dim = if col("z").is_some() { 3 } else { 2 };
    let coords: &[&str] = if dim == 2 { &["x", "y"] } else { &["x", "y", "z"] };
    let normals: &[&str] = if dim == 2 { &["nx", "ny"] } else { &["nx", "ny", "nz"] };
    let pcols = coords
        .iter()
        .map(|c| col(c).ok_or_else(|| parse_err(path, 1, format!("missing column {c:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if normals.iter().any(|c| col(c).is_none()) {
        return Err(parse_err(path, 1, "normals required (columns nx, ny[, nz])"));
    }
    let ncols: Vec<usize> = normals.iter().filter_map(|c| col(c)).collect();
    let lcol = col("loop");

    let mut loops: Vec<(String, Vec<(Vec3, Vec3)>)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(path, line, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(RegulusError::DimensionMismatch {
                expected: header.len(),
                found: rec.len(),
            });
        }
        let num = |c: usize| -> Result<f64> {
            rec[c]
                .parse::<f64>()
                .map_err(|_| parse_err(path, line, format!("not a number: {:?}", &rec[c])))
        };
        let mut p = Vec3::zeros();
        let mut n = Vec3::zeros();
        for (a, &c) in pcols.iter().enumerate() {
            p[a] = num(c)?;
        }
        for (a, &c) in ncols.iter().enumerate() {
            n[a] = num(c)?;
        }
        let id = lcol.map(|c| rec[c].to_string()).unwrap_or_default();
        match loops.iter_mut().find(|(l, _)| *l == id) {
            Some((_, v)) => v.push((p, n)),
            None => loops.push((id, vec![(p, n)])),
        }
    }
    if loops.is_empty() {
        return Err(RegulusError::EmptyBoundary);
    }
    Boundary::from_loops(dim, loops.into_iter().map(|(_, v)| v).collect())
}

struct Mesh {
    vertices: Vec<Vec3>,
    faces: Vec<Vec<usize>>,
}

fn mesh_boundary(m: Mesh, path: &Path, r: f64) -> Result<Boundary> {
    if m.vertices.is_empty() {
        return Err(RegulusError::EmptyBoundary);
    }
    let mut normals = vec![Vec3::zeros(); m.vertices.len()];
    let mut edges = Vec::new();
    for f in &m.faces {
        // Fan triangulation; the cross product carries twice the area.
        for k in 1..f.len().saturating_sub(1) {
            let (a, b, c) = (f[0], f[k], f[k + 1]);
            let n = (m.vertices[b] - m.vertices[a]).cross(&(m.vertices[c] - m.vertices[a]));
            for v in [a, b, c] {
                normals[v] += n;
            }
        }
        for k in 0..f.len() {
            edges.push((f[k], f[(k + 1) % f.len()]));
        }
    }
    let mut used = vec![false; m.vertices.len()];
    for f in &m.faces {
        for &v in f {
            used[v] = true;
        }
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return Err(parse_err(path, 0, format!("vertex {} belongs to no face", v + 1)));
    }
    let etas = normals
        .iter()
        .enumerate()
        .map(|(v, n)| {
            let l = n.norm();
            if l > 0.0 {
                Ok(n * (r / l))
            } else {
                Err(RegulusError::Degenerate(format!("vertex {} has no face area", v + 1)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Boundary::new(3, m.vertices, etas, edges)
}

fn floats(path: &Path, line: usize, fields: &[&str], want: usize) -> Result<Vec<f64>> {
    if fields.len() < want {
        return Err(RegulusError::DimensionMismatch {
            expected: want,
            found: fields.len(),
        });
    }
    fields[..want]
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| parse_err(path, line, format!("not a number: {s:?}")))
        })
        .collect()
}

pub fn read_obj(input: impl BufRead, path: &Path, r: f64) -> Result<Boundary> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(io_err(path))?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let f = floats(path, line_no, &it.collect::<Vec<_>>(), 3)?;
                vertices.push(Vec3::new(f[0], f[1], f[2]));
            }
            Some("f") => {
                let face = it
                    .map(|tok| {
                        let head = tok.split('/').next().unwrap_or("");
                        let idx: i64 = head
                            .parse()
                            .map_err(|_| parse_err(path, line_no, format!("bad face index {tok:?}")))?;
                        let n = vertices.len() as i64;
                        let v = if idx < 0 { n + idx } else { idx - 1 };
                        if v < 0 || v >= n {
                            return Err(parse_err(path, line_no, format!("face index {idx} out of range")));
                        }
                        Ok(v as usize)
                    })
                    .collect::<Result<Vec<_>>>()?;
                if face.len() < 3 {
                    return Err(parse_err(path, line_no, "face needs at least 3 vertices"));
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    mesh_boundary(Mesh { vertices, faces }, path, r)
}

pub fn read_off(input: impl BufRead, path: &Path, r: f64) -> Result<Boundary> {
    let mut lines = input.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| {
        l.as_ref().map_or(true, |s| {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('#')
        })
    });
    let mut next = || -> Result<(usize, String)> {
        match lines.next() {
            Some((n, l)) => Ok((n, l.map_err(io_err(path))?)),
            None => Err(parse_err(path, 0, "unexpected end of file")),
        }
    };
    let (n, first) = next()?;
    let first = first.trim().to_string();
    let counts_line = if first == "OFF" {
        next()?
    } else if let Some(rest) = first.strip_prefix("OFF") {
        (n, rest.to_string())
    } else {
        return Err(parse_err(path, n, "missing OFF header"));
    };
    let counts: Vec<&str> = counts_line.1.split_whitespace().collect();
    let c = floats(path, counts_line.0, &counts, 2)?;
    let (nv, nf) = (c[0] as usize, c[1] as usize);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next()?;
        let f = floats(path, ln, &l.split_whitespace().collect::<Vec<_>>(), 3)?;
        vertices.push(Vec3::new(f[0], f[1], f[2]));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = next()?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let k = toks
            .first()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| parse_err(path, ln, "face line must start with a vertex count"))?;
        if k < 3 || toks.len() < k + 1 {
            return Err(parse_err(path, ln, "face needs at least 3 vertex indices"));
        }
        let face = toks[1..=k]
            .iter()
            .map(|t| match t.parse::<usize>() {
                Ok(v) if v < nv => Ok(v),
                _ => Err(parse_err(path, ln, format!("bad face index {t:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        faces.push(face);
    }
    mesh_boundary(Mesh { vertices, faces }, path, r)
}
