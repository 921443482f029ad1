//! Readers for graphs and observation files, and the factor-file writer.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Result, SdpError};
use crate::problem::WeightedGraph;

/// Parses a whitespace-delimited edge list: one `i j [w]` per line, 1-based,
/// `#` starts a comment, missing weight means 1. A line
/// `# vertices <n>` (or `# n=<n>`) overrides the vertex count.
pub fn parse_edge_list<R: Read>(reader: R) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut max_index = 0usize;
    let mut declared: Option<usize> = None;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = parse_vertex_header(comment) {
                declared = Some(n);
            }
            continue;
        }
        let content = trimmed.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(SdpError::Format {
                line: lineno,
                msg: format!("expected `i j [w]`, found {} fields", fields.len()),
            });
        }
        let i = parse_index(fields[0], lineno)?;
        let j = parse_index(fields[1], lineno)?;
        let w = match fields.get(2) {
            Some(s) => parse_real(s, lineno)?,
            None => 1.0,
        };
        if i == j {
            return Err(SdpError::Format {
                line: lineno,
                msg: format!("self-loop on vertex {i}"),
            });
        }
        if w < 0.0 {
            return Err(SdpError::Format {
                line: lineno,
                msg: format!("negative weight {w}"),
            });
        }
        max_index = max_index.max(i).max(j);
        edges.push((i - 1, j - 1, w));
    }
    let n = match declared {
        Some(n) if n < max_index => {
            return Err(SdpError::InvalidInput(format!(
                "vertex {max_index} exceeds declared vertex count {n}"
            )))
        }
        Some(n) => n,
        None => max_index,
    };
    Ok(WeightedGraph { n, edges })
}

fn parse_vertex_header(comment: &str) -> Option<usize> {
    let c = comment.trim();
    if let Some(rest) = c.strip_prefix("n=") {
        return rest.trim().parse().ok();
    }
    let mut it = c.split_whitespace();
    match (it.next(), it.next()) {
        (Some("vertices"), Some(n)) => n.parse().ok(),
        _ => None,
    }
}

/// Parses a Matrix Market `coordinate real symmetric` (or `pattern`) file as
/// a weighted adjacency matrix. Only the lower or upper triangle is expected;
/// diagonal entries are rejected as self-loops.
pub fn parse_matrix_market<R: Read>(reader: R) -> Result<WeightedGraph> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let (_, header) = lines.next().ok_or(SdpError::Format {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header?.to_ascii_lowercase();
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(SdpError::Format {
            line: 1,
            msg: "missing %%MatrixMarket matrix header".into(),
        });
    }
    if tokens[2] != "coordinate" {
        return Err(SdpError::Format {
            line: 1,
            msg: format!("unsupported storage `{}`", tokens[2]),
        });
    }
    let pattern = match tokens[3] {
        "real" | "integer" => false,
        "pattern" => true,
        other => {
            return Err(SdpError::Format {
                line: 1,
                msg: format!("unsupported field `{other}`"),
            })
        }
    };
    if tokens[4] != "symmetric" {
        return Err(SdpError::Format {
            line: 1,
            msg: format!("expected symmetric matrix, found `{}`", tokens[4]),
        });
    }

    let mut size: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(SdpError::Format {
                        line: lineno,
                        msg: "expected `rows cols nnz`".into(),
                    });
                }
                let rows = parse_index(fields[0], lineno)?;
                let cols = parse_index(fields[1], lineno)?;
                let nnz: usize = fields[2].parse().map_err(|_| SdpError::Format {
                    line: lineno,
                    msg: format!("bad entry count `{}`", fields[2]),
                })?;
                if rows != cols {
                    return Err(SdpError::Format {
                        line: lineno,
                        msg: format!("matrix is {rows} x {cols}, not square"),
                    });
                }
                size = Some((rows, nnz));
                edges.reserve(nnz);
            }
            Some((n, _)) => {
                let want = if pattern { 2 } else { 3 };
                if fields.len() != want {
                    return Err(SdpError::Format {
                        line: lineno,
                        msg: format!("expected {want} fields, found {}", fields.len()),
                    });
                }
                let i = parse_index(fields[0], lineno)?;
                let j = parse_index(fields[1], lineno)?;
                if i > n || j > n {
                    return Err(SdpError::Format {
                        line: lineno,
                        msg: format!("index ({i}, {j}) exceeds dimension {n}"),
                    });
                }
                if i == j {
                    return Err(SdpError::Format {
                        line: lineno,
                        msg: format!("self-loop on vertex {i}"),
                    });
                }
                let w = if pattern { 1.0 } else { parse_real(fields[2], lineno)? };
                if w < 0.0 {
                    return Err(SdpError::Format {
                        line: lineno,
                        msg: format!("negative weight {w}"),
                    });
                }
                edges.push((i - 1, j - 1, w));
            }
        }
    }
    let (n, nnz) = size.ok_or(SdpError::Format {
        line: 1,
        msg: "missing size line".into(),
    })?;
    if edges.len() != nnz {
        return Err(SdpError::Format {
            line: 0,
            msg: format!("size line announces {nnz} entries, found {}", edges.len()),
        });
    }
    Ok(WeightedGraph { n, edges })
}

/// Reads a graph file, choosing Matrix Market when the first line carries the
/// `%%MatrixMarket` banner.
pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    if text.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket") {
        parse_matrix_market(text.as_bytes())
    } else {
        parse_edge_list(text.as_bytes())
    }
}

/// Observations of an `n1 x n2` matrix, 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub n1: usize,
    pub n2: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

/// Parses the observation CSV: a first line `# n1=<int> n2=<int>`, a header
/// `i,j,value`, then 1-based rows.
pub fn parse_observations<R: Read>(reader: R) -> Result<Observations> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines.next().transpose()?.ok_or(SdpError::Format {
        line: 1,
        msg: "empty file".into(),
    })?;
    let (n1, n2) = parse_dims_line(&first)?;
    let header = lines.next().transpose()?.ok_or(SdpError::Format {
        line: 2,
        msg: "missing header `i,j,value`".into(),
    })?;
    let cols: Vec<String> = header.split(',').map(|s| s.trim().to_ascii_lowercase()).collect();
    if cols != ["i", "j", "value"] {
        return Err(SdpError::Format {
            line: 2,
            msg: format!("expected header `i,j,value`, found `{}`", header.trim()),
        });
    }
    let mut entries = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 3;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(SdpError::Format {
                line: lineno,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let i = parse_index(fields[0], lineno)?;
        let j = parse_index(fields[1], lineno)?;
        if i > n1 || j > n2 {
            return Err(SdpError::Format {
                line: lineno,
                msg: format!("index ({i}, {j}) outside {n1} x {n2}"),
            });
        }
        let v = parse_real(fields[2], lineno)?;
        entries.push((i - 1, j - 1, v));
    }
    Ok(Observations { n1, n2, entries })
}

fn parse_dims_line(line: &str) -> Result<(usize, usize)> {
    let bad = || SdpError::Format {
        line: 1,
        msg: "expected first line `# n1=<int> n2=<int>`".into(),
    };
    let body = line.trim().strip_prefix('#').ok_or_else(bad)?;
    let mut n1 = None;
    let mut n2 = None;
    for tok in body.split(|c: char| c.is_whitespace() || c == ',') {
        if let Some(v) = tok.strip_prefix("n1=") {
            n1 = v.parse::<usize>().ok();
        } else if let Some(v) = tok.strip_prefix("n2=") {
            n2 = v.parse::<usize>().ok();
        }
    }
    match (n1, n2) {
        (Some(a), Some(b)) if a > 0 && b > 0 => Ok((a, b)),
        _ => Err(bad()),
    }
}

pub fn read_observations(path: &Path) -> Result<Observations> {
    parse_observations(File::open(path)?)
}

fn parse_index(s: &str, line: usize) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(SdpError::Format {
            line,
            msg: format!("expected a 1-based index, found `{s}`"),
        }),
    }
}

fn parse_real(s: &str, line: usize) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(SdpError::Format {
            line,
            msg: format!("expected a finite number, found `{s}`"),
        }),
    }
}

/// Writes a dense matrix as text: a header line `rows cols`, then the values
/// in column-major order, one per line.
pub fn write_dense<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for v in m.iter() {
        writeln!(w, "{v:.17e}")?;
    }
    Ok(())
}

/// Reads the format produced by [`write_dense`].
pub fn read_dense<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut text = String::new();
    BufReader::new(reader).read_to_string(&mut text)?;
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(SdpError::Format {
                line: 1,
                msg: format!("missing {what} in header"),
            })
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let values: Vec<f64> = text
        .split_whitespace()
        .skip(2)
        .enumerate()
        .map(|(k, t)| parse_real(t, k + 2))
        .collect::<Result<_>>()?;
    if values.len() != rows * cols {
        return Err(SdpError::Format {
            line: 0,
            msg: format!("expected {} values, found {}", rows * cols, values.len()),
        });
    }
    Ok(DMatrix::from_column_slice(rows, cols, &values))
}
