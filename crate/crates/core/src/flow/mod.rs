//! Inner gradient flow: minimise `yᴴx` over unit perturbations at fixed `ε`.

pub mod diagnostics;
pub mod gradient;
pub mod integrator;
pub mod perturbation;
pub mod rhs;
pub mod structure;

pub use diagnostics::{stationarity_diagnostics, StationarityDiagnostics};
pub use gradient::{evaluate, free_gradient, FlowState, GradientFactors, Problem};
pub use integrator::{
    advance, conform, euler_step, initial_perturbation, integrate_to_stationary, stepsize_control,
};
pub use perturbation::{apply_mask, Perturbation};
pub use rhs::{rhs, rhs_factored, rhs_full, rhs_rank2, rhs_rank4_real, Rhs};
pub use structure::{nonzero_mask, StructureMode};

use crate::linalg::EigOptions;
use crate::C64;

/// How an inner integration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerStatus {
    Running,
    /// `‖Ė‖ ≤ tol_inner·‖S_active‖`.
    Converged,
    /// Decrease of `r` per unit natural time stayed below `stall_tol`.
    Stalled,
    /// The decrease of `r` is geometric and its predicted remainder is below `r_tol`.
    Settled,
    /// No step above `h_min` decreased `r`.
    StepsizeUnderflow,
    /// `r` fell below `tol_coalesce`.
    Coalesced,
    /// Step budget exhausted; the state is the best one reached.
    MaxSteps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// Low-rank factors in the full modes, masked dense matrices in the pattern modes.
    Auto,
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GinvBackend {
    /// LU factorisation of `B + y xᴴ` at every evaluation.
    Dense,
    /// Woodbury update of a spectral decomposition of `A` (factored perturbations only).
    Woodbury,
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    /// Step-size ratio `σ > 1`.
    pub sigma: f64,
    /// Initial step is `h0_scale / ‖S_active‖`.
    pub h0_scale: f64,
    pub h_min: f64,
    pub tol_inner: f64,
    pub stall_tol: f64,
    pub stall_window: usize,
    pub max_steps: usize,
    /// Accuracy wanted in `r`; see [`InnerStatus::Settled`].
    pub r_tol: f64,
    /// Window length (steps) of the tail estimate behind `r_tol`.
    pub settle_window: usize,
    /// At each window end, try a jump along the displacement of the last window
    /// (kept only if it lowers `r`).
    pub extrapolate: bool,
    pub tol_coalesce: f64,
    /// Below this value of `r` the right-hand side is multiplied by `r²`.
    pub r_scale_threshold: f64,
    pub representation: Representation,
    pub backend: GinvBackend,
    pub eig: EigOptions,
    pub trace: bool,
    pub seed: u64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            sigma: 1.4,
            h0_scale: 0.1,
            h_min: 1e-16,
            tol_inner: 1e-8,
            stall_tol: 1e-14,
            stall_window: 5,
            max_steps: 20_000,
            r_tol: 1e-9,
            settle_window: 24,
            extrapolate: true,
            tol_coalesce: 1e-6,
            r_scale_threshold: 1e-2,
            representation: Representation::Auto,
            backend: GinvBackend::Dense,
            eig: EigOptions::default(),
            trace: false,
            seed: 0,
        }
    }
}

/// One row of the optional per-step trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    pub h: f64,
    pub r: f64,
    pub rhs_norm: f64,
    pub lambda: C64,
}
