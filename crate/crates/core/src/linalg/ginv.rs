//! Group inverse of `M − λI` through the bordered matrix `B + y xᴴ`,
//! with an optional Sherman–Morrison–Woodbury backend.

use super::eig::EigenTriple;
use crate::{CMatrix, CVector, Error, Result, C64};
use std::sync::Arc;

/// Solves with a fixed nonsingular matrix `X` and with `Xᴴ`.
pub trait ShiftSolver: Send + Sync {
    fn dim(&self) -> usize;
    fn solve(&self, v: &CVector) -> CVector;
    fn solve_adjoint(&self, v: &CVector) -> CVector;
}

/// Largest acceptable `‖K‖_F‖K⁻¹‖_F` before a matrix counts as singular.
pub const SINGULAR_COND: f64 = 1e-3 / (f64::EPSILON / 2.0);

/// Explicit inverse from an LU factorisation.
#[derive(Clone, Debug)]
pub struct DenseInverse {
    inv: CMatrix,
    cond: f64,
}

impl DenseInverse {
    pub fn new(k: &CMatrix) -> Result<Self> {
        let inv = k.clone().lu().try_inverse().ok_or(Error::SingularShift {
            cond: f64::INFINITY,
        })?;
        let cond = k.norm() * inv.norm();
        if !cond.is_finite() || cond > SINGULAR_COND {
            return Err(Error::SingularShift { cond });
        }
        Ok(DenseInverse { inv, cond })
    }

    pub fn cond_estimate(&self) -> f64 {
        self.cond
    }

    pub fn inverse(&self) -> &CMatrix {
        &self.inv
    }
}

impl ShiftSolver for DenseInverse {
    fn dim(&self) -> usize {
        self.inv.nrows()
    }
    fn solve(&self, v: &CVector) -> CVector {
        &self.inv * v
    }
    fn solve_adjoint(&self, v: &CVector) -> CVector {
        self.inv.ad_mul(v)
    }
}

/// Eigendecomposition `A = V D V⁻¹` computed once and reused for every shift.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    pub v: CMatrix,
    pub vinv: CMatrix,
    pub d: Vec<C64>,
}

impl SpectralBasis {
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        let evd = faer::Mat::from_fn(n, n, |i, j| a[(i, j)])
            .eigen()
            .map_err(|_| Error::NonFinite("eigendecomposition"))?;
        let d: Vec<C64> = (0..n).map(|k| evd.S()[k]).collect();
        let u = evd.U();
        let v = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
        let vinv = v
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::DegenerateSpectrum { separation: 0.0 })?;
        Ok(SpectralBasis { v, vinv, d })
    }

    /// Solver for `A − λI`.
    pub fn shifted(self: &Arc<Self>, lambda: C64) -> Result<SpectralShift> {
        let scale = self.d.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let inv_d: Vec<C64> = self.d.iter().map(|&di| (di - lambda).inv()).collect();
        if inv_d
            .iter()
            .any(|c| !c.re.is_finite() || c.norm() * scale > SINGULAR_COND)
        {
            return Err(Error::SingularShift {
                cond: f64::INFINITY,
            });
        }
        Ok(SpectralShift {
            basis: Arc::clone(self),
            inv_d,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SpectralShift {
    basis: Arc<SpectralBasis>,
    inv_d: Vec<C64>,
}

impl ShiftSolver for SpectralShift {
    fn dim(&self) -> usize {
        self.inv_d.len()
    }
    fn solve(&self, v: &CVector) -> CVector {
        let mut w = &self.basis.vinv * v;
        for (wi, di) in w.iter_mut().zip(&self.inv_d) {
            *wi *= di;
        }
        &self.basis.v * w
    }
    fn solve_adjoint(&self, v: &CVector) -> CVector {
        let mut w = self.basis.v.ad_mul(v);
        for (wi, di) in w.iter_mut().zip(&self.inv_d) {
            *wi *= di.conj();
        }
        self.basis.vinv.ad_mul(&w)
    }
}

/// Solver for `X + U Σ Vᴴ` given a solver for `X`.
pub struct Woodbury<S: ShiftSolver> {
    base: S,
    sigma: CMatrix,
    // X⁻¹U and the inverse capacitance (I + ΣVᴴX⁻¹U)⁻¹
    xu: CMatrix,
    cap: CMatrix,
    v: CMatrix,
    // same quantities for the adjoint system Xᴴ + VΣᴴUᴴ
    xv_adj: CMatrix,
    cap_adj: CMatrix,
    u: CMatrix,
}

fn solve_columns(f: impl Fn(&CVector) -> CVector, m: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        out.set_column(j, &f(&m.column(j).into_owned()));
    }
    out
}

fn invert_capacitance(c: CMatrix) -> Result<CMatrix> {
    if c.nrows() == 0 {
        return Ok(c);
    }
    let inv = c
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularCapacitance)?;
    let cond = c.norm() * inv.norm();
    if !cond.is_finite() || cond > SINGULAR_COND {
        return Err(Error::SingularCapacitance);
    }
    Ok(inv)
}

impl<S: ShiftSolver> Woodbury<S> {
    pub fn new(base: S, u: CMatrix, sigma: CMatrix, v: CMatrix) -> Result<Self> {
        let l = sigma.nrows();
        let eye = CMatrix::identity(l, l);
        let xu = solve_columns(|c| base.solve(c), &u);
        let cap = invert_capacitance(&eye + &sigma * v.ad_mul(&xu))?;
        let xv_adj = solve_columns(|c| base.solve_adjoint(c), &v);
        let cap_adj = invert_capacitance(&eye + sigma.adjoint() * u.ad_mul(&xv_adj))?;
        Ok(Woodbury {
            base,
            sigma,
            xu,
            cap,
            v,
            xv_adj,
            cap_adj,
            u,
        })
    }
}

impl<S: ShiftSolver> ShiftSolver for Woodbury<S> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn solve(&self, rhs: &CVector) -> CVector {
        let w = self.base.solve(rhs);
        if self.sigma.nrows() == 0 {
            return w;
        }
        let coeff = &self.cap * (&self.sigma * self.v.ad_mul(&w));
        w - &self.xu * coeff
    }
    fn solve_adjoint(&self, rhs: &CVector) -> CVector {
        let w = self.base.solve_adjoint(rhs);
        if self.sigma.nrows() == 0 {
            return w;
        }
        let coeff = &self.cap_adj * (self.sigma.adjoint() * self.u.ad_mul(&w));
        w - &self.xv_adj * coeff
    }
}

/// One-shot `(X + U₁Σ₁V₁ᴴ)⁻¹ v`.
pub fn smw_solve<S: ShiftSolver>(
    base: S,
    u1: &CMatrix,
    sigma1: &CMatrix,
    v1: &CMatrix,
    v: &CVector,
) -> Result<CVector> {
    Ok(Woodbury::new(base, u1.clone(), sigma1.clone(), v1.clone())?.solve(v))
}

/// Group inverse `G = Π (B + y xᴴ)⁻¹ Π` with `Π = I − x zᴴ`, `z = y / (yᴴx)`.
#[derive(Clone)]
pub struct GroupInverse {
    x: CVector,
    y: CVector,
    z: CVector,
    solver: Arc<dyn ShiftSolver>,
}

impl std::fmt::Debug for GroupInverse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupInverse")
            .field("n", &self.x.len())
            .finish()
    }
}

fn require_positive_r(t: &EigenTriple) -> Result<()> {
    if t.r > 0.0 && t.r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput("group inverse needs yᴴx > 0".into()))
    }
}

/// Dense backend: factorises `M − λI + y xᴴ` directly.
pub fn group_inverse(m: &CMatrix, t: &EigenTriple) -> Result<GroupInverse> {
    require_positive_r(t)?;
    let n = m.nrows();
    let mut k = m - CMatrix::identity(n, n) * t.lambda;
    k.ger(
        C64::new(1.0, 0.0),
        &t.y,
        &t.x.conjugate(),
        C64::new(1.0, 0.0),
    );
    let solver = DenseInverse::new(&k)?;
    Ok(GroupInverse::from_solver(t, Arc::new(solver)))
}

/// Woodbury backend for `M = A + U Σ Vᴴ`, reusing the spectral decomposition of `A`.
pub fn group_inverse_lowrank(
    basis: &Arc<SpectralBasis>,
    t: &EigenTriple,
    u: &CMatrix,
    sigma: &CMatrix,
    v: &CMatrix,
) -> Result<GroupInverse> {
    require_positive_r(t)?;
    let (n, l) = (u.nrows(), u.ncols());
    let u1 = CMatrix::from_fn(n, l + 1, |i, j| if j < l { u[(i, j)] } else { t.y[i] });
    let v1 = CMatrix::from_fn(n, l + 1, |i, j| if j < l { v[(i, j)] } else { t.x[i] });
    let s1 = CMatrix::from_fn(l + 1, l + 1, |i, j| {
        if i < l && j < l {
            sigma[(i, j)]
        } else if i == l && j == l {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let base = basis.shifted(t.lambda)?;
    let w = Woodbury::new(base, u1, s1, v1).map_err(|e| match e {
        Error::SingularCapacitance => Error::SingularShift {
            cond: f64::INFINITY,
        },
        other => other,
    })?;
    Ok(GroupInverse::from_solver(t, Arc::new(w)))
}

impl GroupInverse {
    pub fn from_solver(t: &EigenTriple, solver: Arc<dyn ShiftSolver>) -> Self {
        let z = &t.y / C64::new(t.r, 0.0);
        GroupInverse {
            x: t.x.clone(),
            y: t.y.clone(),
            z,
            solver,
        }
    }

    fn proj(&self, v: &CVector) -> CVector {
        v - &self.x * self.z.dotc(v)
    }

    fn proj_adjoint(&self, v: &CVector) -> CVector {
        v - &self.z * self.x.dotc(v)
    }

    /// `G v`.
    pub fn apply(&self, v: &CVector) -> CVector {
        self.proj(&self.solver.solve(&self.proj(v)))
    }

    /// `Gᴴ v`.
    pub fn apply_adjoint(&self, v: &CVector) -> CVector {
        self.proj_adjoint(&self.solver.solve_adjoint(&self.proj_adjoint(v)))
    }

    /// `(B + y xᴴ)⁻¹ v` without the projections.
    pub fn bordered_solve(&self, v: &CVector) -> CVector {
        self.solver.solve(v)
    }

    /// `C = yᴴ B† x`, using `B† = (B + y xᴴ)⁻¹ − x yᴴ`.
    pub fn pseudo_inverse_coefficient(&self) -> C64 {
        let r = self.y.dotc(&self.x);
        self.y.dotc(&self.solver.solve(&self.x)) - r * r
    }

    /// Dense `G`, column by column.
    pub fn to_dense(&self) -> CMatrix {
        let n = self.x.len();
        let mut g = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = CVector::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            g.set_column(j, &self.apply(&e));
        }
        g
    }
}

/// Moore–Penrose pseudoinverse through the SVD, dropping singular values below `rtol·σ₁`.
pub fn pseudo_inverse(m: &CMatrix, rtol: f64) -> CMatrix {
    let Some(svd) = <C64 as crate::Field>::svd(m) else {
        let svd = m.clone().svd(true, true);
        let smax = svd.singular_values.max();
        return svd
            .pseudo_inverse(rtol * smax)
            .expect("both factors requested");
    };
    let cut = rtol * svd.s.first().copied().unwrap_or(0.0);
    let mut out = CMatrix::zeros(m.ncols(), m.nrows());
    for (k, &sk) in svd.s.iter().enumerate().filter(|(_, &sk)| sk > cut) {
        out += svd.v.column(k) * svd.u.column(k).adjoint() * C64::new(1.0 / sk, 0.0);
    }
    out
}
