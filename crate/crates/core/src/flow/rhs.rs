//! Right-hand sides of the constrained gradient flows.

use super::gradient::{FlowState, GradientFactors};
use super::perturbation::Perturbation;
use crate::field::{re_inner, Field};
use crate::linalg::LowRank;
use crate::{Error, Result};
use nalgebra::DMatrix;

/// Largest condition number of the core factor accepted by the factored flow.
pub const MAX_COND_T: f64 = 1e12;

#[derive(Clone, Debug)]
pub enum Rhs<T: Field> {
    Dense(DMatrix<T>),
    /// Derivatives of `(T, U, V)` with `UᴴU̇ = VᴴV̇ = 0`.
    Factored {
        tdot: DMatrix<T>,
        udot: DMatrix<T>,
        vdot: DMatrix<T>,
    },
}

impl<T: Field> Rhs<T> {
    /// Frobenius norm of the induced `Ė`.
    pub fn norm(&self, e: &Perturbation<T>) -> f64 {
        match (self, e) {
            (Rhs::Dense(d), _) => d.norm(),
            (Rhs::Factored { tdot, udot, vdot }, Perturbation::Factored(lr)) => {
                // the three terms of Ė are mutually orthogonal under the gauge
                let a = (udot * &lr.t).norm_squared();
                let b = tdot.norm_squared();
                let c = (vdot * lr.t.adjoint()).norm_squared();
                (a + b + c).sqrt()
            }
            _ => unreachable!("factored derivative paired with dense perturbation"),
        }
    }

    /// Dense `Ė = U̇TVᴴ + UṪVᴴ + UTV̇ᴴ` (or the dense derivative itself).
    pub fn to_dense(&self, e: &Perturbation<T>) -> DMatrix<T> {
        match (self, e) {
            (Rhs::Dense(d), _) => d.clone(),
            (Rhs::Factored { tdot, udot, vdot }, Perturbation::Factored(lr)) => {
                udot * &lr.t * lr.v.adjoint()
                    + &lr.u * tdot * lr.v.adjoint()
                    + &lr.u * &lr.t * vdot.adjoint()
            }
            _ => unreachable!("factored derivative paired with dense perturbation"),
        }
    }
}

/// `−S_active + Re⟨E, S_active⟩E`.
pub fn rhs_full<T: Field>(state: &FlowState<T>) -> DMatrix<T> {
    let e = state.e.to_dense();
    let c = re_inner(&e, &state.s_active);
    e * T::from_real(c) - &state.s_active
}

/// Factored flow for `E = U T Vᴴ` driven by `S = Y Wᴴ + Z Xᴴ`:
///
/// ```text
/// p = UᴴY, q = VᴴX, r = UᴴZ, s = VᴴW
/// Ṫ = −(psᴴ + rqᴴ) + Re tr(sᴴTᴴp + qᴴTᴴr) T
/// U̇ = −((Y − Up)sᴴ + (Z − Ur)qᴴ) T⁻¹
/// V̇ = −((W − Vs)pᴴ + (X − Vq)rᴴ) T⁻ᴴ
/// ```
pub fn rhs_factored<T: Field>(
    lr: &LowRank<T>,
    g: &GradientFactors<T>,
) -> Result<(DMatrix<T>, DMatrix<T>, DMatrix<T>)> {
    let cond = lr.cond_t();
    if !(cond <= MAX_COND_T) {
        return Err(Error::IllConditionedT { cond });
    }
    let tinv =
        lr.t.clone()
            .try_inverse()
            .ok_or(Error::IllConditionedT { cond })?;
    let (u, t, v) = (&lr.u, &lr.t, &lr.v);
    let p = u.adjoint() * &g.y;
    let q = v.adjoint() * &g.x;
    let r = u.adjoint() * &g.z;
    let s = v.adjoint() * &g.w;
    let core = &p * s.adjoint() + &r * q.adjoint();
    let c = re_inner(t, &core);
    let tdot = t * T::from_real(c) - core;
    let udot = -(((&g.y - u * &p) * s.adjoint() + (&g.z - u * &r) * q.adjoint()) * &tinv);
    let vdot = -(((&g.w - v * &s) * p.adjoint() + (&g.x - v * &q) * r.adjoint()) * tinv.adjoint());
    Ok((tdot, udot, vdot))
}

fn factored_rhs_checked<T: Field>(
    state: &FlowState<T>,
    rank: usize,
) -> Result<(DMatrix<T>, DMatrix<T>, DMatrix<T>)> {
    match &state.e {
        Perturbation::Factored(lr) if lr.rank() == rank => rhs_factored(lr, &state.grad),
        _ => Err(Error::InvalidInput(format!(
            "expected a rank-{rank} factored perturbation"
        ))),
    }
}

/// Rank-2 factored flow (complex structure, or a real eigenvalue under real structure).
pub fn rhs_rank2<T: Field>(state: &FlowState<T>) -> Result<(DMatrix<T>, DMatrix<T>, DMatrix<T>)> {
    factored_rhs_checked(state, 2)
}

/// Rank-4 real factored flow for a non-real eigenvalue under real structure.
pub fn rhs_rank4_real(
    state: &FlowState<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    factored_rhs_checked(state, 4)
}

/// Right-hand side in the representation of the current perturbation.
pub fn rhs<T: Field>(state: &FlowState<T>) -> Result<Rhs<T>> {
    match &state.e {
        Perturbation::Factored(lr) => {
            let (tdot, udot, vdot) = rhs_factored(lr, &state.grad)?;
            Ok(Rhs::Factored { tdot, udot, vdot })
        }
        _ => Ok(Rhs::Dense(rhs_full(state))),
    }
}
