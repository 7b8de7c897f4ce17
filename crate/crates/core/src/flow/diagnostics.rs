use super::gradient::FlowState;
use super::perturbation::Perturbation;
use crate::field::{re_inner, Field};
use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct StationarityDiagnostics {
    /// `‖(I − UUᴴ) S (I − VVᴴ)‖_F / ‖S‖_F` for factored states, 0 otherwise.
    pub b_norm_rel: f64,
    /// `‖S_active‖_F`.
    pub s_norm: f64,
    /// `‖Re S‖_F` of the unstructured gradient.
    pub re_s_norm: f64,
    /// `μ = Re⟨E, S_active⟩ / ‖S_active‖_F`; negative at a minimiser.
    pub mu: f64,
    /// `‖E − μ S_active/‖S_active‖_F‖_F`.
    pub proportionality_residual: f64,
}

pub fn stationarity_diagnostics<T: Field>(state: &FlowState<T>) -> StationarityDiagnostics {
    let s = &state.s_active;
    let e = state.e.to_dense();
    let sn = state.s_norm;
    let re_s_norm = state.free_gradient_full().map(|c| c.re).norm();
    if !(sn > 0.0) {
        return StationarityDiagnostics {
            b_norm_rel: 0.0,
            s_norm: sn,
            re_s_norm,
            mu: 0.0,
            proportionality_residual: f64::NAN,
        };
    }
    let shat = s * T::from_real(1.0 / sn);
    let mu = re_inner(&e, &shat);
    let proportionality_residual = (&e - &shat * T::from_real(mu)).norm();
    let b_norm_rel = match &state.e {
        Perturbation::Factored(lr) => {
            let n = lr.u.nrows();
            let pu = DMatrix::<T>::identity(n, n) - &lr.u * lr.u.adjoint();
            let pv = DMatrix::<T>::identity(n, n) - &lr.v * lr.v.adjoint();
            (pu * s * pv).norm() / sn
        }
        _ => 0.0,
    };
    StationarityDiagnostics {
        b_norm_rel,
        s_norm: sn,
        re_s_norm,
        mu,
        proportionality_residual,
    }
}
