//! Matrix Market coordinate files for Hermitian matrices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mplobpcg::sparse::CsrMatrix;
use mplobpcg::Scalar;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("header declares `{0}`; only symmetric (real) or hermitian storage is accepted")]
    NotSymmetricHeader(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A matrix read from a file, in the field its header declares.
#[derive(Debug, Clone, PartialEq)]
pub enum MmMatrix {
    Real(CsrMatrix<f64>),
    Complex(CsrMatrix<Complex64>),
}

impl MmMatrix {
    pub fn n(&self) -> usize {
        match self {
            MmMatrix::Real(a) => a.n(),
            MmMatrix::Complex(a) => a.n(),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

fn parse_err(line: usize, message: impl Into<String>) -> MmError {
    MmError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<Field, MmError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    if words[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format `{}`", words[2])));
    }
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    };
    match (field, words[4].as_str()) {
        (Field::Real, "symmetric") | (Field::Real, "hermitian") | (Field::Complex, "hermitian") => Ok(field),
        (_, other) => Err(MmError::NotSymmetricHeader(other.to_string())),
    }
}

fn number(tok: Option<&str>, line: usize, what: &str) -> Result<f64, MmError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

fn index(tok: Option<&str>, line: usize, what: &str) -> Result<usize, MmError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

fn build<T: Scalar>(n: usize, stored: Vec<(usize, usize, T)>, last_line: usize) -> Result<CsrMatrix<T>, MmError> {
    let mut full = Vec::with_capacity(2 * stored.len());
    for (i, j, v) in stored {
        full.push((i, j, v));
        if i != j {
            full.push((j, i, v.conj()));
        }
    }
    CsrMatrix::from_triplets(n, &full).map_err(|e| parse_err(last_line, e.to_string()))
}

/// Parses a symmetric or Hermitian coordinate file; the stored triangle is
/// mirrored and duplicate entries are summed.
pub fn parse_matrix_market(text: &str) -> Result<MmMatrix, MmError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let field = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_err(text.lines().count() + 1, "missing size line"))?;
    let mut toks = size.split_whitespace();
    let rows = index(toks.next(), size_line, "row count")?;
    let cols = index(toks.next(), size_line, "column count")?;
    let entries = index(toks.next(), size_line, "entry count")?;
    if rows != cols {
        return Err(MmError::NotSquare { rows, cols });
    }
    let n = rows;

    let mut real = Vec::new();
    let mut complex = Vec::new();
    let mut last_line = size_line;
    let mut seen = 0;
    for (line, content) in body {
        last_line = line;
        seen += 1;
        if seen > entries {
            return Err(parse_err(line, format!("more than the declared {entries} entries")));
        }
        let mut toks = content.split_whitespace();
        let i = index(toks.next(), line, "row index")?;
        let j = index(toks.next(), line, "column index")?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(parse_err(line, format!("index ({i},{j}) outside 1..={n}")));
        }
        let re = number(toks.next(), line, "value")?;
        match field {
            Field::Real => real.push((i - 1, j - 1, re)),
            Field::Complex => {
                let im = number(toks.next(), line, "imaginary part")?;
                complex.push((i - 1, j - 1, Complex64::new(re, im)));
            }
        }
        if toks.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
    }
    if seen < entries {
        return Err(parse_err(last_line + 1, format!("expected {entries} entries, found {seen}")));
    }
    Ok(match field {
        Field::Real => MmMatrix::Real(build(n, real, last_line)?),
        Field::Complex => MmMatrix::Complex(build(n, complex, last_line)?),
    })
}

pub fn read_matrix_market(path: &Path) -> Result<MmMatrix, MmError> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

fn lower_triangle<T: Scalar>(a: &CsrMatrix<T>) -> Vec<(usize, usize, T)> {
    let mut out = Vec::new();
    for i in 0..a.n() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Lower triangle in `symmetric` (real) or `hermitian` (complex) storage.
/// Values use the shortest round-trip representation.
pub fn format_matrix_market(a: &MmMatrix) -> String {
    let mut s = String::new();
    match a {
        MmMatrix::Real(a) => {
            let lower = lower_triangle(a);
            s.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
            let _ = writeln!(s, "{} {} {}", a.n(), a.n(), lower.len());
            for (i, j, v) in lower {
                let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
            }
        }
        MmMatrix::Complex(a) => {
            let lower = lower_triangle(a);
            s.push_str("%%MatrixMarket matrix coordinate complex hermitian\n");
            let _ = writeln!(s, "{} {} {}", a.n(), a.n(), lower.len());
            for (i, j, v) in lower {
                let _ = writeln!(s, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im);
            }
        }
    }
    s
}

pub fn write_matrix_market(path: &Path, a: &MmMatrix) -> Result<(), MmError> {
    Ok(fs::write(path, format_matrix_market(a))?)
}
