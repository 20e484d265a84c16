//! Matrix Market coordinate format.
//!
//! Reads `real`, `integer`, `complex` and `pattern` fields with `general`,
//! `symmetric` or `hermitian` symmetry. For the symmetric kinds only the lower
//! triangle is stored on disk and the mirror is filled in on load.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{SparseHermitianMatrix, DEFAULT_HERM_TOL, DEFAULT_ZERO_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

fn parse_header(line: &str) -> Result<(Field, Symmetry)> {
    let words: Vec<String> = line.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(Error::parse(1, "header must start with %%MatrixMarket"));
    }
    if words.len() != 5 {
        return Err(Error::parse(
            1,
            "header must read: %%MatrixMarket matrix coordinate <field> <symmetry>",
        ));
    }
    if words[1] != "matrix" {
        return Err(Error::parse(1, format!("unsupported object '{}'", words[1])));
    }
    if words[2] != "coordinate" {
        return Err(Error::parse(
            1,
            format!("unsupported format '{}', expected coordinate", words[2]),
        ));
    }
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(Error::parse(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(Error::parse(1, format!("unsupported symmetry '{other}'"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        // Hermitian over the reals is just symmetric; accept it.
        return Ok((field, Symmetry::Symmetric));
    }
    Ok((field, symmetry))
}

fn parse_number(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))
}

fn parse_index(tok: Option<&str>, line: usize, what: &str, dim: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    let idx: usize = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))?;
    if idx == 0 || idx > dim {
        return Err(Error::parse(line, format!("{what} {idx} outside 1..={dim}")));
    }
    Ok(idx - 1)
}

/// Parses a Matrix Market stream with the given tolerances.
pub fn parse_matrix_market<R: BufRead>(reader: R, zero_tol: f64, herm_tol: f64) -> Result<SparseHermitianMatrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let (field, symmetry) = parse_header(&header?)?;

    let mut size: Option<(usize, usize)> = None;
    let mut triples: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut read = 0usize;
    let mut last_line = 1;

    for (lineno, line) in lines {
        let line = line?;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let Some((dim, expected)) = size else {
            let rows = parse_number(toks.next(), lineno, "row count")?;
            let cols = parse_number(toks.next(), lineno, "column count")?;
            let nnz = parse_number(toks.next(), lineno, "entry count")?;
            let as_count = |x: f64| (x >= 0.0 && x.fract() == 0.0).then_some(x as usize);
            let (Some(rows), Some(cols), Some(nnz)) = (as_count(rows), as_count(cols), as_count(nnz)) else {
                return Err(Error::parse(lineno, "size line must hold three nonnegative integers"));
            };
            if rows != cols {
                return Err(Error::parse(
                    lineno,
                    format!("matrix must be square, got {rows}x{cols}"),
                ));
            }
            if rows == 0 {
                return Err(Error::parse(lineno, "matrix dimension must be at least 1"));
            }
            size = Some((rows, nnz));
            triples.reserve(nnz * 2);
            continue;
        };

        if read == expected {
            return Err(Error::parse(
                lineno,
                format!("more than the declared {expected} entries"),
            ));
        }
        let i = parse_index(toks.next(), lineno, "row index", dim)?;
        let j = parse_index(toks.next(), lineno, "column index", dim)?;
        let value = match field {
            Field::Pattern => Complex64::new(1.0, 0.0),
            Field::Real | Field::Integer => Complex64::new(parse_number(toks.next(), lineno, "value")?, 0.0),
            Field::Complex => {
                let re = parse_number(toks.next(), lineno, "real part")?;
                let im = parse_number(toks.next(), lineno, "imaginary part")?;
                Complex64::new(re, im)
            }
        };
        if toks.next().is_some() {
            return Err(Error::parse(lineno, "trailing tokens after entry"));
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::parse(lineno, "non-finite value"));
        }
        match symmetry {
            Symmetry::General => triples.push((i, j, value)),
            Symmetry::Symmetric | Symmetry::Hermitian => {
                if i < j {
                    return Err(Error::parse(
                        lineno,
                        format!(
                            "entry ({}, {}) lies in the upper triangle of a symmetric file",
                            i + 1,
                            j + 1
                        ),
                    ));
                }
                triples.push((i, j, value));
                if i != j {
                    let mirror = if symmetry == Symmetry::Hermitian {
                        value.conj()
                    } else {
                        value
                    };
                    triples.push((j, i, mirror));
                }
            }
        }
        read += 1;
    }

    let Some((dim, expected)) = size else {
        return Err(Error::parse(last_line, "missing size line"));
    };
    if read != expected {
        return Err(Error::parse(
            last_line,
            format!("expected {expected} entries, found {read}"),
        ));
    }
    SparseHermitianMatrix::from_coordinates(dim, triples, zero_tol, herm_tol)
}

/// Reads a Matrix Market file with default tolerances.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseHermitianMatrix> {
    read_matrix_market_with(path, DEFAULT_ZERO_TOL, DEFAULT_HERM_TOL)
}

pub fn read_matrix_market_with(path: impl AsRef<Path>, zero_tol: f64, herm_tol: f64) -> Result<SparseHermitianMatrix> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file), zero_tol, herm_tol)
}

/// Writes `a` in coordinate format.
///
/// Exactly Hermitian matrices are written as `real symmetric` or
/// `complex hermitian` (lower triangle only); anything else falls back to
/// `general` so no stored value is lost. Each comment line is prefixed by `%`.
pub fn write_matrix_market<W: Write>(a: &SparseHermitianMatrix, mut out: W, comments: &[String]) -> Result<()> {
    let real = a.is_real();
    let exact = a.hermitian_deviation() == 0.0 && a.entries().all(|(i, j, _)| a.get(j, i) != Complex64::new(0.0, 0.0));
    let field = if real { "real" } else { "complex" };
    let symmetry = match (exact, real) {
        (true, true) => "symmetric",
        (true, false) => "hermitian",
        (false, _) => "general",
    };
    writeln!(out, "%%MatrixMarket matrix coordinate {field} {symmetry}")?;
    for c in comments {
        for line in c.lines() {
            writeln!(out, "% {line}")?;
        }
    }
    let stored: Vec<_> = a.entries().filter(|&(i, j, _)| !exact || i >= j).collect();
    writeln!(out, "{} {} {}", a.dim(), a.dim(), stored.len())?;
    for (i, j, v) in stored {
        if real {
            writeln!(out, "{} {} {:e}", i + 1, j + 1, v.re)?;
        } else {
            writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_matrix_market_file(a: &SparseHermitianMatrix, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
    let file = File::create(path)?;
    write_matrix_market(a, BufWriter::new(file), comments)
}

/// Serializes to an in-memory string.
pub fn to_matrix_market_string(a: &SparseHermitianMatrix, comments: &[String]) -> String {
    let mut buf = Vec::new();
    write_matrix_market(a, &mut buf, comments).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("matrix market output is ASCII")
}
