//! Matrix Market reader and writer (coordinate and array layouts).

use crate::{CMatrix, Error, Mask, Result, C64};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmLayout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmField {
    Real,
    Complex,
    Integer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

#[derive(Clone, Debug)]
pub struct MmMatrix {
    pub matrix: CMatrix,
    /// Explicitly stored entries, symmetric mirrors included.
    pub mask: Mask,
    pub layout: MmLayout,
    pub field: MmField,
    pub symmetry: MmSymmetry,
}

pub fn read_matrix_market(path: &Path) -> Result<MmMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_market(&text)
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<(MmLayout, MmField, MmSymmetry)> {
    let words: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" {
        return Err(perr(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    if words[1] != "matrix" {
        return Err(Error::UnsupportedFormat(format!("object '{}'", words[1])));
    }
    let layout = match words[2].as_str() {
        "coordinate" => MmLayout::Coordinate,
        "array" => MmLayout::Array,
        w => return Err(Error::UnsupportedFormat(format!("layout '{w}'"))),
    };
    let field = match words[3].as_str() {
        "real" | "double" => MmField::Real,
        "complex" => MmField::Complex,
        "integer" => MmField::Integer,
        w => return Err(Error::UnsupportedFormat(format!("field '{w}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        w => return Err(Error::UnsupportedFormat(format!("symmetry '{w}'"))),
    };
    Ok((layout, field, symmetry))
}

fn parse_num(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| perr(line, format!("invalid {what} '{tok}'")))?;
    if !v.is_finite() {
        return Err(perr(line, format!("non-finite {what}")));
    }
    Ok(v)
}

fn parse_index(tok: Option<&str>, line: usize, bound: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| perr(line, "missing index"))?;
    let i: usize = tok
        .parse()
        .map_err(|_| perr(line, format!("invalid index '{tok}'")))?;
    if i == 0 || i > bound {
        return Err(perr(line, format!("index {i} out of range 1..={bound}")));
    }
    Ok(i - 1)
}

fn parse_value<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    field: MmField,
    line: usize,
) -> Result<C64> {
    let re = parse_num(toks.next(), line, "value")?;
    let im = match field {
        MmField::Complex => parse_num(toks.next(), line, "imaginary part")?,
        _ => 0.0,
    };
    Ok(C64::new(re, im))
}

/// Parses Matrix Market text into a dense matrix.
pub fn parse_matrix_market(text: &str) -> Result<MmMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let (layout, field, symmetry) = parse_header(first)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = body.next().ok_or_else(|| perr(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| perr(size_line, format!("invalid size '{t}'")))
        })
        .collect::<Result<_>>()?;
    let want = if layout == MmLayout::Coordinate { 3 } else { 2 };
    if dims.len() != want {
        return Err(perr(
            size_line,
            format!("expected {want} integers on size line"),
        ));
    }
    let (m, n) = (dims[0], dims[1]);
    if symmetry == MmSymmetry::Symmetric && m != n {
        return Err(perr(size_line, "symmetric matrix must be square"));
    }
    let mut a = CMatrix::zeros(m, n);
    let mut mask = Mask::from_element(m, n, false);
    let mut put = |i: usize, j: usize, v: C64, a: &mut CMatrix| {
        a[(i, j)] += v;
        mask[(i, j)] = true;
        if symmetry == MmSymmetry::Symmetric && i != j {
            a[(j, i)] += v;
            mask[(j, i)] = true;
        }
    };

    let slots: Vec<(usize, usize)> = match layout {
        MmLayout::Coordinate => Vec::new(),
        MmLayout::Array => (0..n)
            .flat_map(|j| {
                let start = if symmetry == MmSymmetry::Symmetric {
                    j
                } else {
                    0
                };
                (start..m).map(move |i| (i, j))
            })
            .collect(),
    };
    let expected = match layout {
        MmLayout::Coordinate => dims[2],
        MmLayout::Array => slots.len(),
    };

    let mut count = 0;
    let mut last_line = size_line;
    for (ln, l) in body {
        last_line = ln;
        if count == expected {
            return Err(perr(ln, format!("more than {expected} entries")));
        }
        let mut toks = l.split_whitespace();
        let (i, j) = match layout {
            MmLayout::Coordinate => {
                let i = parse_index(toks.next(), ln, m)?;
                let j = parse_index(toks.next(), ln, n)?;
                if symmetry == MmSymmetry::Symmetric && j > i {
                    return Err(perr(ln, "symmetric storage expects the lower triangle"));
                }
                (i, j)
            }
            MmLayout::Array => slots[count],
        };
        let v = parse_value(&mut toks, field, ln)?;
        if toks.next().is_some() {
            return Err(perr(ln, "trailing tokens"));
        }
        put(i, j, v, &mut a);
        count += 1;
    }
    if count != expected {
        return Err(perr(
            last_line,
            format!("expected {expected} entries, found {count}"),
        ));
    }
    Ok(MmMatrix {
        matrix: a,
        mask,
        layout,
        field,
        symmetry,
    })
}

/// Serializes `a` as a general matrix; the field is `real` when every entry has zero imaginary part.
pub fn format_matrix_market(a: &CMatrix, layout: MmLayout) -> String {
    let real = a.iter().all(|z| z.im == 0.0);
    let field = if real { "real" } else { "complex" };
    let mut out = String::new();
    let entry = |out: &mut String, z: &C64| {
        if real {
            let _ = write!(out, "{:e}", z.re);
        } else {
            let _ = write!(out, "{:e} {:e}", z.re, z.im);
        }
    };
    match layout {
        MmLayout::Coordinate => {
            let nnz = a.iter().filter(|z| **z != C64::new(0.0, 0.0)).count();
            let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field} general");
            let _ = writeln!(out, "{} {} {nnz}", a.nrows(), a.ncols());
            for j in 0..a.ncols() {
                for i in 0..a.nrows() {
                    let z = &a[(i, j)];
                    if *z != C64::new(0.0, 0.0) {
                        let _ = write!(out, "{} {} ", i + 1, j + 1);
                        entry(&mut out, z);
                        out.push('\n');
                    }
                }
            }
        }
        MmLayout::Array => {
            let _ = writeln!(out, "%%MatrixMarket matrix array {field} general");
            let _ = writeln!(out, "{} {}", a.nrows(), a.ncols());
            for z in a.iter() {
                entry(&mut out, z);
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_matrix_market(path: &Path, a: &CMatrix, layout: MmLayout) -> Result<()> {
    std::fs::write(path, format_matrix_market(a, layout)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
