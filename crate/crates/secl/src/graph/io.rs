//! Plain-text and raw binary file formats.
//!
//! * Edge file: one `i j` pair of 0-based node ids per line, whitespace
//!   separated. Blank lines and lines starting with `#` are skipped.
//! * Attribute file (text): N rows of d floats. An optional first line `N d`
//!   is accepted when it holds exactly two unsigned integers and the number of
//!   rows that follow equals N; it is then validated against the data.
//! * Attribute file (binary, extension `.bin`): `u32 N`, `u32 d` little-endian,
//!   then N·d little-endian `f64` in row-major order. Embedding dumps use the
//!   same layout.
//! * Label file: N lines, one non-negative integer class id each.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;

/// Raw edge records as read from disk, with the source line of each pair.
#[derive(Debug, Clone, Default)]
pub struct EdgeList {
    pub pairs: Vec<(usize, usize)>,
    pub lines: Vec<usize>,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub fn read_edges(path: &Path) -> Result<EdgeList> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = EdgeList::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if is_skippable(&line) {
            continue;
        }
        let mut toks = line.split_whitespace();
        let mut next = || -> Result<usize> {
            let tok = toks
                .next()
                .ok_or_else(|| parse_err(path, lineno, "expected two node ids"))?;
            tok.parse()
                .map_err(|_| parse_err(path, lineno, format!("bad node id {tok:?}")))
        };
        let i = next()?;
        let j = next()?;
        if toks.next().is_some() {
            return Err(parse_err(path, lineno, "trailing tokens after edge"));
        }
        out.pairs.push((i, j));
        out.lines.push(lineno);
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if is_skippable(&line) {
            continue;
        }
        let t = line.trim();
        out.push(
            t.parse()
                .map_err(|_| parse_err(path, lineno + 1, format!("bad class id {t:?}")))?,
        );
    }
    Ok(out)
}

/// Reads a text or binary (`.bin`) attribute matrix.
pub fn read_attributes(path: &Path) -> Result<DenseMatrix> {
    if path.extension().is_some_and(|e| e == "bin") {
        return read_dense_bin(path);
    }
    let reader = BufReader::new(File::open(path)?);
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut first_tokens: Option<(usize, Vec<String>)> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if is_skippable(&line) {
            continue;
        }
        if first_tokens.is_none() {
            first_tokens = Some((lineno, line.split_whitespace().map(str::to_owned).collect()));
        }
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(path, lineno, format!("bad float {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((lineno, row));
    }

    // header detection: "N d" with d ≥ 1 and N matching the rows that follow
    if let Some((_, toks)) = &first_tokens {
        if toks.len() == 2 {
            if let (Ok(n), Ok(d)) = (toks[0].parse::<usize>(), toks[1].parse::<usize>()) {
                if d >= 1 && rows.len() == n + 1 {
                    rows.remove(0);
                    if let Some((lineno, r)) = rows.iter().find(|(_, r)| r.len() != d) {
                        return Err(parse_err(
                            path,
                            *lineno,
                            format!("header says {d} columns, row has {}", r.len()),
                        ));
                    }
                }
            }
        }
    }

    let d = rows.first().map_or(0, |(_, r)| r.len());
    let mut data = Vec::with_capacity(rows.len() * d);
    for (lineno, r) in &rows {
        if r.len() != d {
            return Err(parse_err(
                path,
                *lineno,
                format!("expected {d} columns, found {}", r.len()),
            ));
        }
        data.extend_from_slice(r);
    }
    DenseMatrix::from_vec(rows.len(), d, data)
}

pub fn read_dense_bin(path: &Path) -> Result<DenseMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = [0u8; 8];
    reader.read_exact(&mut header)?;
    let n = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != n * d * 8 {
        return Err(parse_err(
            path,
            0,
            format!("header says {n}x{d}, payload holds {} bytes", bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_vec(n, d, data)
}

pub fn write_dense_bin(path: &Path, m: &DenseMatrix) -> Result<()> {
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| Error::config(format!("dimension {v} exceeds u32")))
    };
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&to_u32(m.rows())?.to_le_bytes())?;
    w.write_all(&to_u32(m.cols())?.to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `N d` followed by one row per line. Values use Rust's shortest
/// round-trip formatting so a reload is exact.
pub fn write_attributes_text(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_edges(path: &Path, edges: &[(usize, usize)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (i, j) in edges {
        writeln!(w, "{i} {j}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for l in labels {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a graph from its edge, attribute and optional label files. N is the
/// attribute row count.
pub fn load_graph(edge_path: &Path, attr_path: &Path, label_path: Option<&Path>) -> Result<Graph> {
    let attributes = read_attributes(attr_path)?;
    let n = attributes.rows();
    let edges = read_edges(edge_path)?;
    for (&(i, j), &line) in edges.pairs.iter().zip(&edges.lines) {
        if let Some(&bad) = [i, j].iter().find(|&&v| v >= n) {
            return Err(Error::Index { index: bad, n, line });
        }
        if i == j {
            return Err(Error::SelfLoop { node: i, line });
        }
    }
    let labels = label_path.map(read_labels).transpose()?;
    if let Some(l) = &labels {
        if l.len() != n {
            return Err(Error::shape("labels", (n, 1), (l.len(), 1)));
        }
    }
    let g = Graph::new(n, edges.pairs, attributes, labels)?;
    log::debug!(
        "loaded graph: n={} raw edge lines={} undirected m={} d={}",
        g.n(),
        g.raw_edge_count(),
        g.m(),
        g.attribute_dim()
    );
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn smallest_graph_loads() {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("g.edges");
        let a = dir.path().join("g.attr");
        fs::write(&e, "# comment\n0 1\n").unwrap();
        fs::write(&a, "1 0\n0 1\n").unwrap();
        let g = load_graph(&e, &a, None).unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
        assert_eq!(g.attributes(), &DenseMatrix::identity(2));
    }

    #[test]
    fn self_loop_line_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("g.edges");
        let a = dir.path().join("g.attr");
        fs::write(&e, "0 1\n0 0\n").unwrap();
        fs::write(&a, "1\n2\n").unwrap();
        assert!(matches!(
            load_graph(&e, &a, None),
            Err(Error::SelfLoop { node: 0, line: 2 })
        ));
    }

    #[test]
    fn malformed_and_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("g.edges");
        let a = dir.path().join("g.attr");
        fs::write(&a, "1\n2\n").unwrap();
        fs::write(&e, "0 1\n1 x\n").unwrap();
        assert!(matches!(load_graph(&e, &a, None), Err(Error::Parse { line: 2, .. })));
        fs::write(&e, "0 1\n\n1 5\n").unwrap();
        assert!(matches!(
            load_graph(&e, &a, None),
            Err(Error::Index { index: 5, line: 3, .. })
        ));
    }

    #[test]
    fn header_validated() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("x.attr");
        fs::write(&a, "2 3\n1 2 3\n4 5 6\n").unwrap();
        assert_eq!(read_attributes(&a).unwrap().shape(), (2, 3));
        fs::write(&a, "2 3\n1 2 3\n4 5\n").unwrap();
        assert!(matches!(read_attributes(&a), Err(Error::Parse { line: 3, .. })));
        // two integer columns without a header line stay data
        fs::write(&a, "2 3\n1 2\n").unwrap();
        assert_eq!(read_attributes(&a).unwrap().shape(), (2, 2));
    }

    #[test]
    fn attribute_rows_must_match_labels() {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("g.edges");
        let a = dir.path().join("g.attr");
        let l = dir.path().join("g.labels");
        fs::write(&e, "0 1\n").unwrap();
        fs::write(&a, "1\n2\n").unwrap();
        fs::write(&l, "0\n1\n1\n").unwrap();
        assert!(matches!(load_graph(&e, &a, Some(&l)), Err(Error::Shape { .. })));
    }

    #[test]
    fn binary_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        let m = DenseMatrix::from_fn(3, 2, |i, j| i as f64 * 0.1 - j as f64 / 3.0);
        write_dense_bin(&p, &m).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], &[3, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(bytes.len(), 8 + 6 * 8);
        assert_eq!(read_attributes(&p).unwrap(), m);
    }
}
