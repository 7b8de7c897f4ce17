//! Eigentriple, group inverse and structured gradient at a given perturbation.

use super::perturbation::{apply_mask, Perturbation};
use super::{FlowOptions, GinvBackend, InnerStatus, StructureMode, TraceRow};
use crate::field::{re_inner, Field};
use crate::linalg::{
    group_inverse, group_inverse_lowrank, nearest_triple_with, EigenTriple, GroupInverse,
    SpectralBasis,
};
use crate::{CMatrix, CVector, Error, Mask, Result, C64};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Fixed data of one inner integration.
#[derive(Clone)]
pub struct Problem<'a> {
    pub a: &'a CMatrix,
    pub epsilon: f64,
    pub mask: Option<&'a Mask>,
    pub basis: Option<Arc<SpectralBasis>>,
    pub opts: &'a FlowOptions,
}

impl<'a> Problem<'a> {
    pub fn new<T: Field>(
        a: &'a CMatrix,
        epsilon: f64,
        mode: &'a StructureMode,
        opts: &'a FlowOptions,
    ) -> Result<Self> {
        mode.validate(a)?;
        if T::IS_REAL != mode.is_real() {
            return Err(Error::InvalidInput(format!(
                "scalar field does not match structure mode {}",
                mode.name()
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        let basis = match opts.backend {
            GinvBackend::Woodbury if mode.mask().is_none() => {
                Some(Arc::new(SpectralBasis::new(a)?))
            }
            _ => None,
        };
        Ok(Problem {
            a,
            epsilon,
            mask: mode.mask(),
            basis,
            opts,
        })
    }
}

/// Factors with `S_active = P(Y Wᴴ + Z Xᴴ)`, `P` the mask projection (identity without mask).
///
/// Complex field: `Y = y`, `W = Gy`, `Z = Gᴴx`, `X = x`. Real field: each factor is
/// split into its real and imaginary part, which yields `Re S`.
#[derive(Clone, Debug)]
pub struct GradientFactors<T: Field> {
    pub y: DMatrix<T>,
    pub w: DMatrix<T>,
    pub z: DMatrix<T>,
    pub x: DMatrix<T>,
}

impl<T: Field> GradientFactors<T> {
    pub fn new(t: &EigenTriple, gy: &CVector, ghx: &CVector) -> Self {
        GradientFactors {
            y: T::split(&t.y),
            w: T::split(gy),
            z: T::split(ghx),
            x: T::split(&t.x),
        }
    }

    pub fn dense(&self, mask: Option<&Mask>) -> DMatrix<T> {
        let s = &self.y * self.w.adjoint() + &self.z * self.x.adjoint();
        match mask {
            Some(m) => apply_mask(&s, m),
            None => s,
        }
    }
}

/// State of the inner gradient flow.
#[derive(Clone, Debug)]
pub struct FlowState<T: Field> {
    pub epsilon: f64,
    pub e: Perturbation<T>,
    pub triple: EigenTriple,
    pub ginv: GroupInverse,
    /// `yᴴx`.
    pub r: f64,
    /// `G y` and `Gᴴ x`.
    pub gy: CVector,
    pub ghx: CVector,
    pub grad: GradientFactors<T>,
    /// Structured gradient `S_active`, dense.
    pub s_active: DMatrix<T>,
    pub s_norm: f64,
    pub step_count: usize,
    pub h_current: f64,
    pub time: f64,
    pub status: InnerStatus,
    pub trace: Vec<TraceRow>,
}

impl<T: Field> FlowState<T> {
    pub fn lambda(&self) -> C64 {
        self.triple.lambda
    }

    /// Unstructured free gradient `S = y(Gy)ᴴ + (Gᴴx)xᴴ`.
    pub fn free_gradient_full(&self) -> CMatrix {
        &self.triple.y * self.gy.adjoint() + &self.ghx * self.triple.x.adjoint()
    }

    /// `Re⟨E, S_active⟩`.
    pub fn e_dot_s(&self) -> f64 {
        re_inner(&self.e.to_dense(), &self.s_active)
    }

    /// Perturbed matrix `A + εE`.
    pub fn matrix(&self, a: &CMatrix) -> CMatrix {
        a + T::lift(&self.e.to_dense()) * C64::new(self.epsilon, 0.0)
    }
}

/// Whether `λ` is treated as real in a real-structured problem.
pub fn is_real_eigenvalue(lambda: C64, scale: f64) -> bool {
    lambda.im.abs() <= 1e-12 * scale.max(1.0)
}

/// Evaluates triple, group inverse and gradient at `E`, tracking the eigenvalue nearest `target`.
pub fn evaluate<T: Field>(
    prob: &Problem<'_>,
    e: Perturbation<T>,
    target: C64,
) -> Result<FlowState<T>> {
    let m = prob.a + T::lift(&e.to_dense()) * C64::new(prob.epsilon, 0.0);
    let mut triple = nearest_triple_with(&m, target, &prob.opts.eig)?;
    if T::IS_REAL && is_real_eigenvalue(triple.lambda, m.norm()) {
        triple = triple.force_real();
    }
    if !(triple.r > 0.0) {
        return Err(Error::DegenerateSpectrum { separation: 0.0 });
    }
    let ginv = match (&prob.basis, &e) {
        (Some(basis), Perturbation::Factored(lr)) => group_inverse_lowrank(
            basis,
            &triple,
            &T::lift(&lr.u),
            &(T::lift(&lr.t) * C64::new(prob.epsilon, 0.0)),
            &T::lift(&lr.v),
        )?,
        _ => group_inverse(&m, &triple)?,
    };
    let gy = ginv.apply(&triple.y);
    let ghx = ginv.apply_adjoint(&triple.x);
    let grad = GradientFactors::new(&triple, &gy, &ghx);
    let s_active = grad.dense(prob.mask);
    let s_norm: f64 = s_active.norm();
    if !s_norm.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    Ok(FlowState {
        epsilon: prob.epsilon,
        e,
        r: triple.r,
        triple,
        ginv,
        gy,
        ghx,
        grad,
        s_active,
        s_norm,
        step_count: 0,
        h_current: 0.0,
        time: 0.0,
        status: InnerStatus::Running,
        trace: Vec::new(),
    })
}

/// Structured free gradient of `yᴴx` at the state: `S`, `Re S`, or their masked versions.
pub fn free_gradient<T: Field>(state: &FlowState<T>) -> DMatrix<T> {
    state.s_active.clone()
}
