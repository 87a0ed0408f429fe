//! MatrixMarket I/O, plain-text singular value columns, and edge lists.
//!
//! Indices are 1-based on disk and 0-based in memory. The coordinate writer
//! always emits `real general` with entries ordered by (column, row).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, WeightedEdgeList};
use crate::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn fmt_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format { line, msg: msg.into() }
}

fn parse_index(tok: Option<&str>, line: usize, bound: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| fmt_err(line, format!("missing {what} index")))?;
    let idx: usize = tok
        .parse()
        .map_err(|_| fmt_err(line, format!("invalid {what} index {tok:?}")))?;
    if idx == 0 || idx > bound {
        return Err(fmt_err(line, format!("{what} index {idx} outside 1..={bound}")));
    }
    Ok(idx - 1)
}

fn parse_value(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| fmt_err(line, "missing value"))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| fmt_err(line, format!("invalid value {tok:?}")))?;
    if !v.is_finite() {
        return Err(fmt_err(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// Reads the lines of a MatrixMarket file, skipping comments and blank lines.
/// Yields `(line_number, content)`.
fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::Io(e))),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('%') {
                    None
                } else {
                    Some(Ok((i + 1, t.to_string())))
                }
            }
        })
}

/// Parses a coordinate-format MatrixMarket stream.
///
/// Accepts `real`, `integer` and `pattern` fields (pattern entries become 1.0)
/// with `general`, `symmetric` or `skew-symmetric` storage. Symmetric storage
/// is expanded to full storage; duplicate coordinates are summed.
pub fn read_matrix_market<R: Read>(reader: R) -> Result<SparseMatrix> {
    let mut reader = BufReader::new(reader);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(fmt_err(1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(fmt_err(1, format!("unsupported format {:?}, expected coordinate", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(fmt_err(1, format!("unsupported field {other:?}"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(fmt_err(1, format!("unsupported symmetry {other:?}"))),
    };

    // the header line was consumed above, so data line numbers are offset by one
    let mut lines = data_lines(reader).map(|r| r.map(|(n, l)| (n + 1, l)));
    let (size_line, size) = lines
        .next()
        .ok_or_else(|| fmt_err(2, "missing size line"))??;
    let mut it = size.split_whitespace();
    let parse_count = |tok: Option<&str>| -> Result<usize> {
        let tok = tok.ok_or_else(|| fmt_err(size_line, "incomplete size line"))?;
        tok.parse()
            .map_err(|_| fmt_err(size_line, format!("invalid size {tok:?}")))
    };
    let nrows = parse_count(it.next())?;
    let ncols = parse_count(it.next())?;
    let nnz = parse_count(it.next())?;
    if symmetry != Symmetry::General && nrows != ncols {
        return Err(fmt_err(size_line, "symmetric storage requires a square matrix"));
    }

    let mut triplets = Vec::with_capacity(if symmetry == Symmetry::General { nnz } else { 2 * nnz });
    let mut count = 0usize;
    for entry in lines {
        let (ln, text) = entry?;
        count += 1;
        if count > nnz {
            return Err(fmt_err(ln, format!("more than the declared {nnz} entries")));
        }
        let mut tok = text.split_whitespace();
        let r = parse_index(tok.next(), ln, nrows, "row")?;
        let c = parse_index(tok.next(), ln, ncols, "column")?;
        let v = match field {
            Field::Pattern => 1.0,
            _ => parse_value(tok.next(), ln)?,
        };
        triplets.push((r, c, v));
        if r != c {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((c, r, v)),
                Symmetry::SkewSymmetric => triplets.push((c, r, -v)),
            }
        }
    }
    if count != nnz {
        return Err(fmt_err(size_line, format!("declared {nnz} entries, found {count}")));
    }
    SparseMatrix::from_triplets(nrows, ncols, triplets)
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read_matrix_market(File::open(path)?)
}

pub fn write_matrix_market<W: Write>(writer: W, a: &SparseMatrix) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (r, c, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix_market(path: impl AsRef<Path>, a: &SparseMatrix) -> Result<()> {
    write_matrix_market(File::create(path)?, a)
}

/// Writes a dense matrix in MatrixMarket `array` format (column-major).
pub fn write_dense_array<W: Write>(writer: W, a: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    for v in a.iter() {
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dense_array<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut reader = BufReader::new(reader);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[2] != "array" || tokens[4] != "general" {
        return Err(fmt_err(1, "expected a %%MatrixMarket matrix array real general header"));
    }
    let mut lines = data_lines(reader).map(|r| r.map(|(n, l)| (n + 1, l)));
    let (size_line, size) = lines.next().ok_or_else(|| fmt_err(2, "missing size line"))??;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| fmt_err(size_line, format!("invalid size {t:?}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 2 {
        return Err(fmt_err(size_line, "array size line needs two entries"));
    }
    let mut values = Vec::with_capacity(dims[0] * dims[1]);
    for entry in lines {
        let (ln, text) = entry?;
        values.push(parse_value(Some(text.as_str()), ln)?);
    }
    if values.len() != dims[0] * dims[1] {
        return Err(fmt_err(
            size_line,
            format!("declared {}x{} values, found {}", dims[0], dims[1], values.len()),
        ));
    }
    Ok(DenseMatrix::from_vec(dims[0], dims[1], values))
}

/// One value per line.
pub fn write_vector<W: Write>(writer: W, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for v in values {
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vector<R: Read>(reader: R) -> Result<Vec<f64>> {
    data_lines(BufReader::new(reader))
        .map(|entry| {
            let (ln, text) = entry?;
            parse_value(Some(text.as_str()), ln)
        })
        .collect()
}

/// Reads a whitespace-separated edge list: a header `n m` followed by `m`
/// lines `u v w` with 0-based vertices. Lines starting with `#` or `%` are
/// comments.
pub fn read_edge_list<R: Read>(reader: R) -> Result<WeightedEdgeList> {
    let mut lines = BufReader::new(reader)
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::Io(e))),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
                    None
                } else {
                    Some(Ok((i + 1, t.to_string())))
                }
            }
        });
    let (hl, header) = lines.next().ok_or_else(|| fmt_err(1, "missing `n m` header"))??;
    let mut it = header.split_whitespace();
    let mut count = |what: &str| -> Result<usize> {
        let tok = it.next().ok_or_else(|| fmt_err(hl, format!("missing {what}")))?;
        tok.parse().map_err(|_| fmt_err(hl, format!("invalid {what} {tok:?}")))
    };
    let n = count("vertex count")?;
    let m = count("edge count")?;
    let mut edges = Vec::with_capacity(m);
    for entry in lines {
        let (ln, text) = entry?;
        let mut tok = text.split_whitespace();
        let mut vertex = |what: &str| -> Result<usize> {
            let t = tok.next().ok_or_else(|| fmt_err(ln, format!("missing {what}")))?;
            let v: usize = t.parse().map_err(|_| fmt_err(ln, format!("invalid {what} {t:?}")))?;
            if v >= n {
                return Err(fmt_err(ln, format!("{what} {v} outside 0..{n}")));
            }
            Ok(v)
        };
        let u = vertex("vertex")?;
        let v = vertex("vertex")?;
        let w = parse_value(tok.next(), ln)?;
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(fmt_err(hl, format!("declared {m} edges, found {}", edges.len())));
    }
    WeightedEdgeList::new(n, edges)
}

pub fn write_edge_list<W: Write>(writer: W, graph: &WeightedEdgeList) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{} {}", graph.vertex_count(), graph.edges().len())?;
    for &(u, v, wt) in graph.edges() {
        writeln!(w, "{u} {v} {wt:e}")?;
    }
    w.flush()?;
    Ok(())
}
