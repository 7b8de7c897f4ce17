//! Unstructured pseudospectrum samples `σ_min(A − zI)` on a rectangular grid.

use crate::{CMatrix, Error, Result, C64};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Contour levels of interest; informational only.
    pub levels: Vec<f64>,
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `re0,re1,im0,im1,nx,ny[,eps...]`
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidInput(format!("grid '{s}': {m}"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() < 6 {
            return Err(bad("expected re0,re1,im0,im1,nx,ny[,eps...]"));
        }
        let f = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad("invalid number"))
        };
        let u = |t: &str| {
            t.parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| bad("invalid grid size"))
        };
        Ok(GridSpec {
            re: (f(parts[0])?, f(parts[1])?),
            im: (f(parts[2])?, f(parts[3])?),
            nx: u(parts[4])?,
            ny: u(parts[5])?,
            levels: parts[6..].iter().map(|t| f(t)).collect::<Result<_>>()?,
        })
    }
}

fn linspace(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

pub fn sigma_min(a: &CMatrix, z: C64) -> f64 {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= z;
    }
    match <C64 as crate::Field>::svd(&m) {
        Some(d) => d.s.last().copied().unwrap_or(0.0),
        None => m.singular_values().min(),
    }
}

/// CSV with header `re,im,sigma_min`, `re` varying fastest.
pub fn pseudospectrum_csv(a: &CMatrix, g: &GridSpec) -> String {
    let mut out = String::from("re,im,sigma_min\n");
    for j in 0..g.ny {
        let y = linspace(g.im.0, g.im.1, g.ny, j);
        for i in 0..g.nx {
            let x = linspace(g.re.0, g.re.1, g.nx, i);
            let _ = writeln!(
                out,
                "{:.15e},{:.15e},{:.15e}",
                x,
                y,
                sigma_min(a, C64::new(x, y))
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_sample() {
        let g: GridSpec = "-1,1,0,0,3,1,0.1,0.2".parse().unwrap();
        assert_eq!(g.levels, vec![0.1, 0.2]);
        let a = CMatrix::from_diagonal_element(2, 2, C64::new(0.0, 0.0));
        let csv = pseudospectrum_csv(&a, &g);
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "re,im,sigma_min");
        assert_eq!(rows.len(), 4);
        assert!(rows[2].ends_with("0.000000000000000e0"));
        assert!("1,2,3".parse::<GridSpec>().is_err());
    }
}
