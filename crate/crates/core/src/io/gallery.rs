//! Built-in test matrices.

use crate::{CMatrix, C64};

/// Grcar matrix: `−1` on the subdiagonal, `1` on the diagonal and the first three superdiagonals.
pub fn grcar(n: usize) -> CMatrix {
    grcar_band(n, 3)
}

/// Grcar matrix with `k` superdiagonals.
pub fn grcar_band(n: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == j + 1 {
            C64::new(-1.0, 0.0)
        } else if j >= i && j - i <= k {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// A 5×5 complex matrix with a nearby pair of eigenvalues, used as a worked example.
pub fn example1() -> CMatrix {
    let c = |re: f64, im: f64| C64::new(re, im);
    #[rustfmt::skip]
    let rows = [
        c(0.0, 0.0),  c(1.0, 1.0),   c(2.0, 1.0),   c(1.0, 2.0),   c(1.0, 0.0),
        c(-1.0, 0.0), c(-1.0, -1.0), c(1.0, -1.0),  c(0.0, -1.0),  c(0.0, 0.0),
        c(1.0, -1.0), c(-1.0, -2.0), c(1.0, 2.0),   c(0.0, -2.0),  c(0.0, 0.0),
        c(1.0, -2.0), c(1.0, -1.0),  c(-1.0, 2.0),  c(-1.0, -1.0), c(0.0, 0.0),
        c(1.0, 0.0),  c(-1.0, -1.0), c(0.0, 2.0),   c(-1.0, -1.0), c(0.0, -2.0),
    ];
    CMatrix::from_row_slice(5, 5, &rows)
}
