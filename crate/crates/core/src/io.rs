//! Text formats for meshes, embeddings, metrics, dense operators, per-vertex fields and
//! point maps.
//!
//! Every reader reports 1-based line numbers and rejects trailing content. Writers print
//! floats with 17 significant digits so values round-trip exactly, and produce identical
//! bytes for identical inputs. Point maps and edge files use 0-based vertex indices.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Embedding;
use crate::mesh::Mesh;
use crate::metric::DiscreteMetric;
use crate::solvers::SolverTrace;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Non-empty lines split into tokens, with their 1-based line numbers.
struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    comments: bool,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a Path, comments: bool) -> Self {
        Lines {
            path,
            inner: text.lines().enumerate(),
            comments,
            last_line: 0,
        }
    }

    fn next_tokens(&mut self, sep: Separator) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last_line = i + 1;
            let line = if self.comments {
                raw.split('#').next().unwrap_or("")
            } else {
                raw
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let tokens = match sep {
                Separator::Whitespace => line.split_whitespace().collect(),
                Separator::Comma => line.split(',').map(str::trim).collect(),
            };
            return Some((i + 1, tokens));
        }
        None
    }

    fn expect(&mut self, sep: Separator, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.next_tokens(sep).ok_or_else(|| Error::Parse {
            path: self.path.to_path_buf(),
            line: self.last_line + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    fn finish(&mut self, sep: Separator) -> Result<()> {
        match self.next_tokens(sep) {
            Some((line, _)) => Err(self.error(line, "unexpected trailing content")),
            None => Ok(()),
        }
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, line: usize, token: &str, what: &str) -> Result<T> {
        token
            .parse()
            .map_err(|_| self.error(line, format!("invalid {what} '{token}'")))
    }

    fn real(&self, line: usize, token: &str) -> Result<f64> {
        let v: f64 = self.parse(line, token, "number")?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.error(line, format!("non-finite value '{token}'")))
        }
    }

    fn arity(&self, line: usize, tokens: &[&str], n: usize) -> Result<()> {
        if tokens.len() == n {
            Ok(())
        } else {
            Err(self.error(line, format!("expected {n} fields, found {}", tokens.len())))
        }
    }
}

#[derive(Clone, Copy)]
enum Separator {
    Whitespace,
    Comma,
}

use Separator::{Comma, Whitespace};

// ---------------------------------------------------------------------------------------
// OFF / OBJ

pub fn parse_off(text: &str, path: &Path) -> Result<(Mesh, Embedding)> {
    let mut lines = Lines::new(text, path, true);
    let (line, mut tokens) = lines.expect(Whitespace, "OFF header")?;
    if tokens[0] != "OFF" {
        return Err(lines.error(line, format!("expected 'OFF' header, found '{}'", tokens[0])));
    }
    tokens.remove(0);
    let (line, counts) = if tokens.is_empty() {
        lines.expect(Whitespace, "vertex, face and edge counts")?
    } else {
        (line, tokens)
    };
    lines.arity(line, &counts, 3)?;
    let n: usize = lines.parse(line, counts[0], "vertex count")?;
    let f: usize = lines.parse(line, counts[1], "face count")?;
    let _: usize = lines.parse(line, counts[2], "edge count")?;

    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = lines.expect(Whitespace, "vertex coordinates")?;
        lines.arity(line, &t, 3)?;
        points.push([lines.real(line, t[0])?, lines.real(line, t[1])?, lines.real(line, t[2])?]);
    }
    let mut faces = Vec::with_capacity(f);
    for _ in 0..f {
        let (line, t) = lines.expect(Whitespace, "face")?;
        let arity: usize = lines.parse(line, t[0], "face arity")?;
        if arity != 3 {
            return Err(Error::NonTriangleFace {
                path: path.to_path_buf(),
                line,
                arity,
            });
        }
        lines.arity(line, &t, 4)?;
        let mut face = [0; 3];
        for (slot, tok) in face.iter_mut().zip(&t[1..]) {
            *slot = lines.parse(line, tok, "vertex index")?;
        }
        faces.push(face);
    }
    lines.finish(Whitespace)?;
    let mesh = Mesh::new(n, faces)?;
    Ok((mesh, Embedding::from_rows(&points)?))
}

pub fn read_off(path: impl AsRef<Path>) -> Result<(Mesh, Embedding)> {
    let path = path.as_ref();
    parse_off(&read_text(path)?, path)
}

pub fn off_to_string(mesh: &Mesh, x: &Embedding) -> Result<String> {
    x.check_rows(mesh)?;
    let mut out = format!("OFF\n{} {} {}\n", mesh.vertex_count(), mesh.face_count(), mesh.edge_count());
    for p in x.points() {
        out.push_str(&format!("{} {} {}\n", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z)));
    }
    for [i, j, k] in mesh.faces() {
        out.push_str(&format!("3 {i} {j} {k}\n"));
    }
    Ok(out)
}

pub fn write_off(path: impl AsRef<Path>, mesh: &Mesh, x: &Embedding) -> Result<()> {
    write_text(path.as_ref(), &off_to_string(mesh, x)?)
}

/// Reads `v x y z` and `f a b c` lines of a Wavefront OBJ file; other records are ignored.
/// Face entries may carry `/vt/vn` suffixes. Indices are 1-based as in the format.
pub fn parse_obj(text: &str, path: &Path) -> Result<(Mesh, Embedding)> {
    let mut lines = Lines::new(text, path, true);
    let mut points = Vec::new();
    let mut faces = Vec::new();
    while let Some((line, t)) = lines.next_tokens(Whitespace) {
        match t[0] {
            "v" => {
                if t.len() != 4 && t.len() != 5 {
                    return Err(lines.error(line, "vertex needs 3 coordinates"));
                }
                points.push([lines.real(line, t[1])?, lines.real(line, t[2])?, lines.real(line, t[3])?]);
            }
            "f" => {
                if t.len() != 4 {
                    return Err(Error::NonTriangleFace {
                        path: path.to_path_buf(),
                        line,
                        arity: t.len() - 1,
                    });
                }
                let mut face = [0; 3];
                for (slot, tok) in face.iter_mut().zip(&t[1..]) {
                    let idx = tok.split('/').next().unwrap_or("");
                    let k: usize = lines.parse(line, idx, "vertex index")?;
                    if k == 0 {
                        return Err(lines.error(line, "OBJ indices start at 1"));
                    }
                    *slot = k - 1;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    let mesh = Mesh::new(points.len(), faces)?;
    Ok((mesh, Embedding::from_rows(&points)?))
}

pub fn read_obj(path: impl AsRef<Path>) -> Result<(Mesh, Embedding)> {
    let path = path.as_ref();
    parse_obj(&read_text(path)?, path)
}

/// Dispatches on the extension: `.obj` is read as OBJ, anything else as OFF.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<(Mesh, Embedding)> {
    let path = path.as_ref();
    let is_obj = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("obj"));
    if is_obj {
        read_obj(path)
    } else {
        read_off(path)
    }
}

// ---------------------------------------------------------------------------------------
// Dense matrices

/// First line `rows cols`, then one whitespace-separated line per row.
pub fn parse_dense_matrix(text: &str, path: &Path) -> Result<DMatrix<f64>> {
    let mut lines = Lines::new(text, path, false);
    let (line, t) = lines.expect(Whitespace, "'rows cols' header")?;
    lines.arity(line, &t, 2)?;
    let rows: usize = lines.parse(line, t[0], "row count")?;
    let cols: usize = lines.parse(line, t[1], "column count")?;
    let mut m = DMatrix::zeros(rows, cols);
    // rows of an empty-column matrix are blank lines, which the tokenizer skips
    let row_lines = if cols == 0 { 0 } else { rows };
    for r in 0..row_lines {
        let (line, t) = lines.expect(Whitespace, "matrix row")?;
        lines.arity(line, &t, cols)?;
        for (c, tok) in t.iter().enumerate() {
            m[(r, c)] = lines.real(line, tok)?;
        }
    }
    lines.finish(Whitespace)?;
    Ok(m)
}

pub fn read_dense_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    parse_dense_matrix(&read_text(path)?, path)
}

pub fn dense_matrix_to_string(m: &DMatrix<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_dense_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    write_text(path.as_ref(), &dense_matrix_to_string(m))
}

// ---------------------------------------------------------------------------------------
// Edge lengths

/// Lines `i,j,length`, one per mesh edge in any order and orientation.
pub fn parse_edge_csv(text: &str, path: &Path, mesh: &Mesh) -> Result<DiscreteMetric> {
    let mut lines = Lines::new(text, path, false);
    let mut lengths: Vec<Option<f64>> = vec![None; mesh.edge_count()];
    while let Some((line, t)) = lines.next_tokens(Comma) {
        lines.arity(line, &t, 3)?;
        let i: usize = lines.parse(line, t[0], "vertex index")?;
        let j: usize = lines.parse(line, t[1], "vertex index")?;
        let l = lines.real(line, t[2])?;
        let e = mesh.edge_index(i, j).ok_or_else(|| Error::UnknownEdge {
            path: path.to_path_buf(),
            line,
            i,
            j,
        })?;
        if l <= 0.0 {
            return Err(Error::NonPositiveLength {
                path: path.to_path_buf(),
                line,
            });
        }
        if lengths[e].replace(l).is_some() {
            return Err(lines.error(line, format!("edge ({i}, {j}) listed twice")));
        }
    }
    let mut out = Vec::with_capacity(lengths.len());
    for (l, &[i, j]) in lengths.into_iter().zip(mesh.edges()) {
        out.push(l.ok_or(Error::MissingEdge { i, j })?);
    }
    DiscreteMetric::new(mesh, out)
}

pub fn read_edge_csv(path: impl AsRef<Path>, mesh: &Mesh) -> Result<DiscreteMetric> {
    let path = path.as_ref();
    parse_edge_csv(&read_text(path)?, path, mesh)
}

/// Canonical edge order, `i < j`.
pub fn edge_csv_to_string(mesh: &Mesh, metric: &DiscreteMetric) -> Result<String> {
    if metric.len() != mesh.edge_count() {
        return Err(Error::dims("metric length", mesh.edge_count(), metric.len()));
    }
    let mut out = String::new();
    for (&[i, j], &l) in mesh.edges().iter().zip(metric.lengths()) {
        out.push_str(&format!("{i},{j},{}\n", fmt_f64(l)));
    }
    Ok(out)
}

pub fn write_edge_csv(path: impl AsRef<Path>, mesh: &Mesh, metric: &DiscreteMetric) -> Result<()> {
    write_text(path.as_ref(), &edge_csv_to_string(mesh, metric)?)
}

// ---------------------------------------------------------------------------------------
// Per-vertex values and point maps

/// One value per line.
pub fn parse_vertex_csv(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut lines = Lines::new(text, path, false);
    let mut values = Vec::new();
    while let Some((line, t)) = lines.next_tokens(Comma) {
        lines.arity(line, &t, 1)?;
        values.push(lines.real(line, t[0])?);
    }
    Ok(values)
}

pub fn read_vertex_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    parse_vertex_csv(&read_text(path)?, path)
}

pub fn vertex_csv_to_string(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v) + "\n").collect()
}

pub fn write_vertex_csv(path: impl AsRef<Path>, values: &[f64]) -> Result<()> {
    write_text(path.as_ref(), &vertex_csv_to_string(values))
}

/// Point map `t`, 0-based, into a shape with `source_size` vertices.
///
/// Either one column (`t[y]` on the y-th line) or two columns `y t[y]` in any order,
/// with every `y` in `0..lines` listed once.
pub fn parse_point_map(text: &str, path: &Path, source_size: usize) -> Result<Vec<usize>> {
    let mut lines = Lines::new(text, path, false);
    let mut entries = Vec::new();
    let mut columns = None;
    while let Some((line, t)) = lines.next_tokens(Whitespace) {
        let expected = *columns.get_or_insert(t.len());
        if expected != 1 && expected != 2 {
            return Err(lines.error(line, "point map lines need one or two fields"));
        }
        lines.arity(line, &t, expected)?;
        let (y, x) = if expected == 1 {
            (entries.len(), lines.parse(line, t[0], "vertex index")?)
        } else {
            (lines.parse(line, t[0], "vertex index")?, lines.parse(line, t[1], "vertex index")?)
        };
        if x >= source_size {
            return Err(Error::IndexOutOfRange {
                index: x,
                bound: source_size,
            });
        }
        entries.push((line, y, x));
    }
    let m = entries.len();
    let mut t = vec![None; m];
    for (line, y, x) in entries {
        if y >= m {
            return Err(Error::IndexOutOfRange { index: y, bound: m });
        }
        if t[y].replace(x).is_some() {
            return Err(lines.error(line, format!("vertex {y} mapped twice")));
        }
    }
    Ok(t.into_iter().map(|v| v.expect("every slot filled once")).collect())
}

pub fn read_point_map(path: impl AsRef<Path>, source_size: usize) -> Result<Vec<usize>> {
    let path = path.as_ref();
    parse_point_map(&read_text(path)?, path, source_size)
}

pub fn point_map_to_string(t: &[usize]) -> String {
    t.iter().enumerate().map(|(y, x)| format!("{y} {x}\n")).collect()
}

pub fn write_point_map(path: impl AsRef<Path>, t: &[usize]) -> Result<()> {
    write_text(path.as_ref(), &point_map_to_string(t))
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &SolverTrace) -> Result<()> {
    write_text(path.as_ref(), &trace.to_csv())
}

/// `dir/stem.off` -> `dir/stem<suffix>`.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;

    fn p() -> &'static Path {
        Path::new("test")
    }

    const TETRA: &str = "OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 1 2 3\n3 0 3 2\n";

    #[test]
    fn minimal_tetrahedron() {
        let (mesh, x) = parse_off(TETRA, p()).unwrap();
        assert_eq!((mesh.vertex_count(), mesh.face_count(), mesh.edge_count()), (4, 4, 6));
        assert_eq!(x.to_rows()[3], [0.0, 0.0, 1.0]);
    }

    #[test]
    fn off_header_variants_and_comments() {
        let text = "# tetra\nOFF 4 4 0\n0 0 0\n1 0 0 # x\n\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 1 2 3\n3 0 3 2\n\n";
        assert_eq!(parse_off(text, p()).unwrap().0.edge_count(), 6);
    }

    #[test]
    fn quad_face_rejected() {
        let text = TETRA.replace("3 0 3 2", "4 0 3 2 1");
        match parse_off(&text, p()) {
            Err(Error::NonTriangleFace { line, arity, .. }) => assert_eq!((line, arity), (10, 4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn off_parse_errors_carry_line_numbers() {
        let bad_coord = TETRA.replace("1 0 0", "1 zero 0");
        assert!(matches!(parse_off(&bad_coord, p()), Err(Error::Parse { line: 4, .. })));
        let trailing = format!("{TETRA}3 0 1 2\n");
        assert!(matches!(parse_off(&trailing, p()), Err(Error::Parse { line: 11, .. })));
        let truncated: String = TETRA.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_off(&truncated, p()), Err(Error::Parse { line: 9, .. })));
        assert!(matches!(parse_off("PLY\n", p()), Err(Error::Parse { line: 1, .. })));
        let extra_token = TETRA.replace("0 0 1\n", "0 0 1 5\n");
        assert!(matches!(parse_off(&extra_token, p()), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn off_mesh_errors_propagate() {
        let text = TETRA.replace("3 0 3 2", "3 0 3 7");
        assert!(matches!(parse_off(&text, p()), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn off_round_trip_is_exact() {
        let (mesh, x) = primitives::torus(7, 4, 2.0, 0.6);
        let x = crate::testing::jittered(&x, 0.1, 3);
        let text = off_to_string(&mesh, &x).unwrap();
        let (mesh2, x2) = parse_off(&text, p()).unwrap();
        assert_eq!(mesh2.faces(), mesh.faces());
        assert_eq!(x2, x);
        assert_eq!(off_to_string(&mesh2, &x2).unwrap(), text);
    }

    #[test]
    fn obj_reader() {
        let text = "o t\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nvn 0 0 1\nf 1/1 3 2\nf 1 2 4\nf 2//1 3 4\nf 1 4 3\n";
        let (mesh, x) = parse_obj(text, p()).unwrap();
        assert_eq!(mesh.faces()[0], [0, 2, 1]);
        assert_eq!(x.len(), 4);
        let quad = text.replace("f 1 4 3", "f 1 4 3 2");
        assert!(matches!(parse_obj(&quad, p()), Err(Error::NonTriangleFace { line: 10, arity: 4, .. })));
    }

    #[test]
    fn dense_matrix_round_trip() {
        let id = DMatrix::<f64>::identity(2, 2);
        let text = dense_matrix_to_string(&id);
        assert_eq!(parse_dense_matrix(&text, p()).unwrap(), id);
        let m = DMatrix::from_fn(3, 4, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0) - 1e-300 * j as f64);
        assert_eq!(parse_dense_matrix(&dense_matrix_to_string(&m), p()).unwrap(), m);
    }

    #[test]
    fn dense_matrix_errors() {
        assert!(matches!(parse_dense_matrix("2 2\n1 0\n0\n", p()), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_dense_matrix("2 2\n1 0\n0 1\n7\n", p()), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_dense_matrix("2 2\n1 0\n", p()), Err(Error::Parse { .. })));
        assert!(matches!(parse_dense_matrix("2\n", p()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dense_matrix("1 1\nnan\n", p()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn edge_csv() {
        let (mesh, _) = primitives::regular_tetrahedron();
        let six: String = mesh.edges().iter().map(|[i, j]| format!("{j},{i},1.5\n")).collect();
        let metric = parse_edge_csv(&six, p(), &mesh).unwrap();
        assert!(metric.lengths().iter().all(|&l| l == 1.5));
        assert_eq!(parse_edge_csv(&edge_csv_to_string(&mesh, &metric).unwrap(), p(), &mesh).unwrap(), metric);

        let five: String = six.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_edge_csv(&five, p(), &mesh), Err(Error::MissingEdge { .. })));
        let zero = six.replacen("1.5", "0", 1);
        assert!(matches!(parse_edge_csv(&zero, p(), &mesh), Err(Error::NonPositiveLength { line: 1, .. })));
        let unknown = format!("{six}0,9,1\n");
        assert!(matches!(parse_edge_csv(&unknown, p(), &mesh), Err(Error::UnknownEdge { line: 7, i: 0, j: 9, .. })));
        let dup = format!("{six}0,1,1\n");
        assert!(matches!(parse_edge_csv(&dup, p(), &mesh), Err(Error::Parse { line: 7, .. })));
    }

    #[test]
    fn vertex_csv_round_trip() {
        let v = vec![0.1, -2.5e-17, 3.0, 1e300];
        assert_eq!(parse_vertex_csv(&vertex_csv_to_string(&v), p()).unwrap(), v);
        assert!(matches!(parse_vertex_csv("1\n2,3\n", p()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn point_maps() {
        let identity: String = (0..5).map(|k| format!("{k} {k}\n")).collect();
        assert_eq!(parse_point_map(&identity, p(), 5).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_point_map("2\n0\n1\n", p(), 3).unwrap(), vec![2, 0, 1]);
        assert_eq!(parse_point_map("1 0\n0 2\n", p(), 3).unwrap(), vec![2, 0]);
        assert_eq!(parse_point_map(&point_map_to_string(&[3, 1, 1]), p(), 4).unwrap(), vec![3, 1, 1]);
        assert!(matches!(parse_point_map("0\n5\n", p(), 5), Err(Error::IndexOutOfRange { index: 5, bound: 5 })));
        assert!(matches!(parse_point_map("0 1\n0 2\n", p(), 5), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_point_map("0 1\n2\n", p(), 5), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling_path(Path::new("out/x.off"), ".trace.csv"), PathBuf::from("out/x.trace.csv"));
        assert_eq!(sibling_path(Path::new("x"), "_1.off"), PathBuf::from("x_1.off"));
    }
}
