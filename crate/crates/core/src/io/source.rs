//! Where a matrix comes from: files, the built-in gallery, or inline JSON.

use super::gallery;
use super::matrix_market::read_matrix_market;
use crate::flow::nonzero_mask;
use crate::{CMatrix, Error, Mask, Result, C64};
use serde_json::Value;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSource {
    MatrixMarketFile(PathBuf),
    BuiltinGrcar(usize),
    BuiltinExample1,
    /// Rows of numbers or of `[re, im]` pairs, e.g. `[[1,2],[0,[3,1]]]`.
    JsonDense(String),
    RealPartOf(Box<MatrixSource>),
}

/// A loaded matrix and its admissible sparsity pattern.
#[derive(Clone, Debug)]
pub struct LoadedMatrix {
    pub matrix: CMatrix,
    /// Stored entries for files, nonzero entries otherwise.
    pub mask: Mask,
}

impl FromStr for MatrixSource {
    type Err = Error;

    /// Accepts `grcar`, `grcar:N`, `example1`, `json:<rows>`, a literal starting with `[`,
    /// `real:<source>`, or a path.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidInput("empty matrix source".into()));
        }
        if let Some(rest) = s.strip_prefix("real:") {
            return Ok(MatrixSource::RealPartOf(Box::new(rest.parse()?)));
        }
        if let Some(rest) = s.strip_prefix("json:") {
            return Ok(MatrixSource::JsonDense(rest.to_string()));
        }
        if s.starts_with('[') {
            return Ok(MatrixSource::JsonDense(s.to_string()));
        }
        if s.eq_ignore_ascii_case("example1") {
            return Ok(MatrixSource::BuiltinExample1);
        }
        if s.eq_ignore_ascii_case("grcar") {
            return Ok(MatrixSource::BuiltinGrcar(6));
        }
        if let Some(n) = s.strip_prefix("grcar:") {
            let n: usize = n
                .parse()
                .map_err(|_| Error::InvalidInput(format!("invalid Grcar dimension '{n}'")))?;
            if n < 2 {
                return Err(Error::InvalidInput(
                    "Grcar dimension must be at least 2".into(),
                ));
            }
            return Ok(MatrixSource::BuiltinGrcar(n));
        }
        Ok(MatrixSource::MatrixMarketFile(PathBuf::from(s)))
    }
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSource::MatrixMarketFile(p) => write!(f, "{}", p.display()),
            MatrixSource::BuiltinGrcar(n) => write!(f, "grcar:{n}"),
            MatrixSource::BuiltinExample1 => write!(f, "example1"),
            MatrixSource::JsonDense(s) => write!(f, "json:{s}"),
            MatrixSource::RealPartOf(inner) => write!(f, "real:{inner}"),
        }
    }
}

fn json_entry(v: &Value) -> Result<C64> {
    let num = |v: &Value| {
        v.as_f64()
            .ok_or_else(|| Error::InvalidInput(format!("expected a number, got {v}")))
    };
    match v {
        Value::Number(_) => Ok(C64::new(num(v)?, 0.0)),
        Value::Array(p) if p.len() == 2 => Ok(C64::new(num(&p[0])?, num(&p[1])?)),
        _ => Err(Error::InvalidInput(format!(
            "expected a number or [re, im], got {v}"
        ))),
    }
}

/// Parses a JSON array of rows into a matrix.
pub fn parse_json_matrix(payload: &str) -> Result<CMatrix> {
    let v: Value = serde_json::from_str(payload)
        .map_err(|e| Error::InvalidInput(format!("invalid JSON matrix: {e}")))?;
    let rows = v
        .as_array()
        .ok_or_else(|| Error::InvalidInput("JSON matrix must be an array of rows".into()))?;
    let m = rows.len();
    let mut data = Vec::new();
    let mut n = None;
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::InvalidInput("each row must be an array".into()))?;
        if *n.get_or_insert(row.len()) != row.len() {
            return Err(Error::InvalidInput("rows have different lengths".into()));
        }
        for e in row {
            data.push(json_entry(e)?);
        }
    }
    let n = n.unwrap_or(0);
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("JSON matrix is empty".into()));
    }
    Ok(CMatrix::from_row_slice(m, n, &data))
}

impl MatrixSource {
    pub fn load(&self) -> Result<LoadedMatrix> {
        match self {
            MatrixSource::MatrixMarketFile(p) => {
                let mm = read_matrix_market(p)?;
                Ok(LoadedMatrix {
                    matrix: mm.matrix,
                    mask: mm.mask,
                })
            }
            MatrixSource::BuiltinGrcar(n) => Ok(with_nonzero_mask(gallery::grcar(*n))),
            MatrixSource::BuiltinExample1 => Ok(with_nonzero_mask(gallery::example1())),
            MatrixSource::JsonDense(s) => Ok(with_nonzero_mask(parse_json_matrix(s)?)),
            MatrixSource::RealPartOf(inner) => {
                let l = inner.load()?;
                Ok(LoadedMatrix {
                    matrix: l.matrix.map(|z| C64::new(z.re, 0.0)),
                    mask: l.mask,
                })
            }
        }
    }
}

fn with_nonzero_mask(matrix: CMatrix) -> LoadedMatrix {
    let mask = nonzero_mask(&matrix);
    LoadedMatrix { matrix, mask }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sources() {
        assert_eq!(
            "grcar:8".parse::<MatrixSource>().unwrap(),
            MatrixSource::BuiltinGrcar(8)
        );
        assert_eq!(
            "example1".parse::<MatrixSource>().unwrap(),
            MatrixSource::BuiltinExample1
        );
        assert_eq!(
            "real:grcar".parse::<MatrixSource>().unwrap(),
            MatrixSource::RealPartOf(Box::new(MatrixSource::BuiltinGrcar(6)))
        );
        assert!(matches!(
            "m.mtx".parse::<MatrixSource>().unwrap(),
            MatrixSource::MatrixMarketFile(_)
        ));
        assert!("grcar:x".parse::<MatrixSource>().is_err());
    }

    #[test]
    fn json_literal() {
        let l = "[[1, [0, 2]], [0, 3]]"
            .parse::<MatrixSource>()
            .unwrap()
            .load()
            .unwrap();
        assert_eq!(l.matrix[(0, 1)], C64::new(0.0, 2.0));
        assert!(!l.mask[(1, 0)]);
        let l = "real:json:[[1, [0, 2]], [0, 3]]"
            .parse::<MatrixSource>()
            .unwrap()
            .load()
            .unwrap();
        assert_eq!(l.matrix[(0, 1)], C64::new(0.0, 0.0));
        assert!(parse_json_matrix("[[1,2],[3]]").is_err());
    }
}
