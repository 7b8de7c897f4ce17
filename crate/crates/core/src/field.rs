//! Scalar fields for perturbations: `f64` for real structure, `C64` otherwise.

use crate::{CMatrix, CVector, C64};
use nalgebra::{ComplexField, DMatrix};

pub trait Field: ComplexField<RealField = f64> + Copy {
    const IS_REAL: bool;

    /// Orthogonal projection of a complex scalar onto the field.
    fn project(c: C64) -> Self;

    fn to_c64(self) -> C64;

    /// Columns `F` of a vector such that `Σ F_a G_aᴴ` equals the
    /// projection onto the field of `v wᴴ` when `G` is built from `w`.
    fn split(v: &CVector) -> DMatrix<Self>;

    fn lift(m: &DMatrix<Self>) -> CMatrix {
        m.map(|v| v.to_c64())
    }

    fn project_matrix(m: &CMatrix) -> DMatrix<Self> {
        m.map(Self::project)
    }

    /// Full SVD `m = U diag(s) Vᴴ`, singular values in nonincreasing order.
    fn svd(m: &DMatrix<Self>) -> Option<Svd<Self>>;
}

/// Singular value decomposition with `u`, `v` square.
#[derive(Clone, Debug)]
pub struct Svd<T: Field> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

// nalgebra's complex SVD can lose several digits on nearly singular input, so
// decompositions go through faer.
macro_rules! faer_svd {
    ($m:expr, $re:expr) => {{
        let m = $m;
        let f = faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
        let svd = f.svd().ok()?;
        let (u, v) = (svd.U(), svd.V());
        let s = svd.S().column_vector().iter().map($re).collect();
        Some(Svd {
            u: DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
            s,
            v: DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
        })
    }};
}

impl Field for f64 {
    const IS_REAL: bool = true;

    fn project(c: C64) -> Self {
        c.re
    }

    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }

    fn split(v: &CVector) -> DMatrix<f64> {
        DMatrix::from_fn(v.len(), 2, |i, j| if j == 0 { v[i].re } else { v[i].im })
    }

    fn svd(m: &DMatrix<f64>) -> Option<Svd<f64>> {
        faer_svd!(m, |x: &f64| *x)
    }
}

impl Field for C64 {
    const IS_REAL: bool = false;

    fn project(c: C64) -> Self {
        c
    }

    fn to_c64(self) -> C64 {
        self
    }

    fn split(v: &CVector) -> DMatrix<C64> {
        DMatrix::from_column_slice(v.len(), 1, v.as_slice())
    }

    fn svd(m: &DMatrix<C64>) -> Option<Svd<C64>> {
        faer_svd!(m, |x: &C64| x.re)
    }
}

/// Real part of the Frobenius inner product `⟨a, b⟩ = tr(aᴴ b)`.
pub fn re_inner<T: Field>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(u, v)| (u.conjugate() * *v).real())
        .sum()
}
