//! Text formats.
//!
//! Hamiltonian (COO): a header line `n <qubits> mode <psd|hermitian>` followed
//! by entries `i j re im`. State: a header `n <qubits>` followed by `i re im`.
//! Fields are whitespace-separated and `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use super::{Mode, QubitCount, SparseState, StoredOracle};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CooHeader {
    pub n: QubitCount,
    pub mode: Mode,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((k + 1, fields))
    })
}

fn field<T: std::str::FromStr>(line: usize, raw: &str, what: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{raw}`"),
    })
}

fn parse_qubits(line: usize, raw: &str) -> Result<QubitCount> {
    let n: u32 = field(line, raw, "qubit count")?;
    QubitCount::new(n).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })
}

fn finite(line: usize, re: f64, im: f64) -> Result<Complex64> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(Error::Parse {
            line,
            message: "non-finite value".into(),
        })
    }
}

/// Parses a COO Hamiltonian. `mode` overrides the header's mode when given.
///
/// A missing mirror entry `(j, i)` is derived as the conjugate of `(i, j)`.
pub fn parse_coo(text: &str, mode: Option<Mode>) -> Result<(CooHeader, StoredOracle)> {
    let mut lines = content_lines(text);
    let (hline, head) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header `n <qubits> mode <psd|hermitian>`".into(),
    })?;
    if head.len() != 4 || head[0] != "n" || head[2] != "mode" {
        return Err(Error::Parse {
            line: hline,
            message: "header must read `n <qubits> mode <psd|hermitian>`".into(),
        });
    }
    let n = parse_qubits(hline, head[1])?;
    let header_mode: Mode = head[3].parse().map_err(|_| Error::Parse {
        line: hline,
        message: format!("unknown mode `{}`", head[3]),
    })?;
    let dim = n.dim();

    let mut map: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
    for (line, f) in lines {
        if f.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected `i j re im`, found {} fields", f.len()),
            });
        }
        let i: u64 = field(line, f[0], "row index")?;
        let j: u64 = field(line, f[1], "column index")?;
        if i >= dim || j >= dim {
            return Err(Error::Parse {
                line,
                message: format!("index ({i}, {j}) outside dimension {dim}"),
            });
        }
        let v = finite(line, field(line, f[2], "real part")?, field(line, f[3], "imaginary part")?)?;
        if map.insert((i, j), v).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate entry ({i}, {j})"),
            });
        }
    }

    let missing: Vec<_> = map
        .iter()
        .filter(|(&(i, j), _)| !map.contains_key(&(j, i)))
        .map(|(&(i, j), &v)| ((j, i), v.conj()))
        .collect();
    map.extend(missing);

    let mode = mode.unwrap_or(header_mode);
    let oracle = StoredOracle::from_map(n, mode, map)?;
    Ok((CooHeader { n, mode: header_mode }, oracle))
}

pub fn load_coo(path: impl AsRef<Path>, mode: Option<Mode>) -> Result<(CooHeader, StoredOracle)> {
    parse_coo(&read(path.as_ref())?, mode)
}

pub fn parse_state(text: &str) -> Result<SparseState> {
    let mut lines = content_lines(text);
    let (hline, head) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header `n <qubits>`".into(),
    })?;
    if head.len() != 2 || head[0] != "n" {
        return Err(Error::Parse {
            line: hline,
            message: "header must read `n <qubits>`".into(),
        });
    }
    let n = parse_qubits(hline, head[1])?;
    let mut entries = Vec::new();
    for (line, f) in lines {
        if f.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `i re im`, found {} fields", f.len()),
            });
        }
        let i: u64 = field(line, f[0], "index")?;
        if i >= n.dim() {
            return Err(Error::Parse {
                line,
                message: format!("index {i} outside dimension {}", n.dim()),
            });
        }
        entries.push((i, finite(line, field(line, f[1], "real part")?, field(line, f[2], "imaginary part")?)?));
    }
    SparseState::new(n, entries)
}

pub fn load_state(path: impl AsRef<Path>) -> Result<SparseState> {
    parse_state(&read(path.as_ref())?)
}
