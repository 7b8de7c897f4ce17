//! Outer iteration on `ε`: Puiseux-model Newton steps safeguarded by bisection.

use crate::field::{re_inner, Field};
use crate::flow::{
    apply_mask, evaluate, initial_perturbation, integrate_to_stationary, stationarity_diagnostics,
    FlowOptions, FlowState, InnerStatus, Perturbation, Problem, StationarityDiagnostics,
    StructureMode, TraceRow,
};
use crate::linalg::eigenvalues;
use crate::{CMatrix, Error, Result, C64};
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct OuterOptions {
    pub max_outer: usize,
    /// After a coalesced evaluation the next `ε` is `ε_ℓ + θ(ε_r − ε_ℓ)`; `0.5` is plain bisection.
    pub theta: f64,
    /// Also shorten Puiseux steps: `ε + θ(ε̂ − ε)` instead of `ε̂`.
    pub damp: bool,
    /// Start each inner flow from the last non-coalesced perturbation and, once the
    /// bracket is closed, also from the last coalesced one.
    pub warm_start: bool,
    /// Relative mismatch between the two derivative formulas that triggers a warning.
    pub rprime_warn: f64,
    /// Stationarity residual above which the derivative formula is rejected.
    pub stationarity_tol: f64,
    pub flow: FlowOptions,
}

impl Default for OuterOptions {
    fn default() -> Self {
        OuterOptions {
            max_outer: 50,
            theta: 0.8,
            damp: false,
            warm_start: true,
            rprime_warn: 0.05,
            stationarity_tol: 1e-3,
            flow: FlowOptions::default(),
        }
    }
}

/// Summary of the inner flow behind one outer iterate.
#[derive(Clone, Debug)]
pub struct FlowSummary {
    pub lambda: C64,
    pub r: f64,
    pub s_norm: f64,
    pub status: InnerStatus,
    pub steps: usize,
    /// Final perturbation direction, dense.
    pub e: CMatrix,
    pub stationarity: StationarityDiagnostics,
    /// Step-by-step record, when tracing is enabled.
    pub trace: Vec<TraceRow>,
}

impl FlowSummary {
    fn from_state<T: Field>(s: &FlowState<T>) -> Self {
        FlowSummary {
            lambda: s.triple.lambda,
            r: s.r,
            s_norm: s.s_norm,
            status: s.status,
            steps: s.step_count,
            e: T::lift(&s.e.to_dense()),
            stationarity: stationarity_diagnostics(s),
            trace: s.trace.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OuterIterate {
    pub k: usize,
    pub epsilon: f64,
    pub r: f64,
    /// `r ≤ tol`: two eigenvalues coalesced during the inner flow.
    pub coalesced: bool,
    /// Bracket in force when `ε_k` was evaluated.
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub r_prime: Option<f64>,
    pub gamma: Option<f64>,
    pub eps_star: Option<f64>,
    /// `ε_k` was produced by a bisection step.
    pub used_bisection: bool,
    pub flow: FlowSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxDiagnostics {
    /// `|C|` with `C = yᴴ (M − λI)† x`.
    pub c_abs: f64,
    /// `‖P(conj(C) y xᴴ)‖_F`, the structured counterpart of `|C|`.
    pub c_structured: f64,
    pub rr_prime: f64,
    /// `r r′ / (−2|C|)`.
    pub ratio: f64,
    /// `r r′ / (−2‖P(conj(C) y xᴴ)‖_F)`.
    pub ratio_structured: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportDiagnostics {
    pub rr_prime_ratio: f64,
    pub rr_prime_ratio_structured: f64,
    pub res_stationarity: f64,
    pub re_s_norm: f64,
    pub mu: f64,
}

#[derive(Clone, Debug)]
pub struct DistanceReport {
    pub mode: StructureMode,
    pub delta: f64,
    pub tol: f64,
    pub iterates: Vec<OuterIterate>,
    pub eps_delta_star: f64,
    pub eps_zero_star_estimate: f64,
    pub gamma: f64,
    /// The tracked eigenvalue and its nearest neighbour at the final `ε`.
    pub coalescing_lambdas: [C64; 2],
    pub diagnostics: ReportDiagnostics,
    pub wall_time: Duration,
}

/// `r(ε)`: inner flow at `ε` from `warm_start` (or from the gradient direction at `E = 0`).
pub fn r_of_eps<T: Field>(
    a: &CMatrix,
    epsilon: f64,
    mode: &StructureMode,
    warm_start: Option<&Perturbation<T>>,
    target: C64,
    opts: &FlowOptions,
) -> Result<(f64, FlowState<T>)> {
    let e0 = match warm_start {
        Some(e) => e.clone(),
        None => initial_perturbation::<T>(a, mode, target, opts)?,
    };
    let state = if epsilon == 0.0 {
        let prob = Problem::new::<T>(a, 0.0, mode, opts)?;
        let mut s = evaluate(&prob, e0, target)?;
        s.status = InnerStatus::Converged;
        s
    } else {
        integrate_to_stationary(a, epsilon, e0, mode, target, opts)?
    };
    Ok((state.r, state))
}

/// `r r′` direction term `r·Re(xᴴGEx + yᴴEGy)` without any stationarity check.
pub fn r_prime_formula<T: Field>(state: &FlowState<T>) -> f64 {
    let e = T::lift(&state.e.to_dense());
    let t = &state.triple;
    let ex = &e * &t.x;
    let term1 = t.x.dotc(&state.ginv.apply(&ex));
    let term2 = t.y.dotc(&(&e * &state.gy));
    state.r * (term1 + term2).re
}

/// `r′(ε)` at a stationary state; cross-checked against `−r‖S_active‖_F`.
pub fn r_prime<T: Field>(state: &FlowState<T>, opts: &OuterOptions) -> Result<f64> {
    let d = stationarity_diagnostics(state);
    if state.s_norm > 0.0 && !(d.proportionality_residual <= opts.stationarity_tol) {
        return Err(Error::NotStationary {
            residual: d.proportionality_residual,
        });
    }
    let rp = r_prime_formula(state);
    let alt = -state.r * state.s_norm;
    if (rp - alt).abs() > opts.rprime_warn * alt.abs().max(f64::MIN_POSITIVE) {
        log::warn!("derivative formulas disagree: {rp:.6e} vs {alt:.6e}");
    }
    Ok(rp)
}

/// Fits `r = γ√(ε* − ε)` to `(r_k, r′_k)` and returns `(γ, ε*, ε* − δ²/γ²)`.
pub fn puiseux_step(eps_k: f64, r_k: f64, rprime_k: f64, delta: f64) -> Result<(f64, f64, f64)> {
    let d = rprime_k.abs();
    if !(d >= 1e-300) {
        return Err(Error::DegenerateDerivative(d));
    }
    let gamma = (2.0 * r_k * d).sqrt();
    let eps_star = eps_k + r_k / (2.0 * d);
    Ok((gamma, eps_star, eps_star - delta * delta / (gamma * gamma)))
}

/// Compares `r r′` with `−2|C|`, the limit expected as two eigenvalues coalesce.
pub fn puiseux_diagnostics<T: Field>(
    state: &FlowState<T>,
    mask: Option<&crate::Mask>,
) -> PuiseuxDiagnostics {
    let c = state.ginv.pseudo_inverse_coefficient();
    let t = &state.triple;
    let k = (&t.y * t.x.adjoint()) * c.conj();
    let kt = T::project_matrix(&k);
    let kt = match mask {
        Some(m) => apply_mask(&kt, m),
        None => kt,
    };
    let c_structured: f64 = kt.norm();
    let rr_prime = state.r * r_prime_formula(state);
    let ratio_of = |den: f64| {
        if den > 0.0 {
            rr_prime / (-2.0 * den)
        } else {
            0.0
        }
    };
    PuiseuxDiagnostics {
        c_abs: c.norm(),
        c_structured,
        rr_prime,
        ratio: ratio_of(c.norm()),
        ratio_structured: ratio_of(c_structured),
    }
}

/// Computes the `δ`-distance to defectivity from the eigenvalue nearest `target`.
///
/// `eps_hi = +∞` leaves the bracket open until a coalescence is observed.
#[allow(clippy::too_many_arguments)]
pub fn solve_distance(
    a: &CMatrix,
    mode: &StructureMode,
    delta: f64,
    tol: f64,
    eps0: f64,
    eps_lo: f64,
    eps_hi: f64,
    target: C64,
    opts: &OuterOptions,
) -> Result<DistanceReport> {
    if mode.is_real() {
        solve_generic::<f64>(a, mode, delta, tol, eps0, eps_lo, eps_hi, target, opts)
    } else {
        solve_generic::<C64>(a, mode, delta, tol, eps0, eps_lo, eps_hi, target, opts)
    }
}

/// Runs the inner flow from each start in turn and keeps the smallest `r`;
/// stops early on the first coalescence or once `r` is below `delta`.
#[allow(clippy::too_many_arguments)]
fn best_flow<T: Field>(
    a: &CMatrix,
    eps: f64,
    mode: &StructureMode,
    starts: Vec<(Perturbation<T>, C64)>,
    delta: f64,
    tol: f64,
    flow: &FlowOptions,
) -> Result<(Option<FlowState<T>>, bool)> {
    let mut best: Option<FlowState<T>> = None;
    for (e, lam) in starts {
        match integrate_to_stationary(a, eps, e, mode, lam, flow) {
            Ok(s) if s.status == InnerStatus::Coalesced || s.r <= tol => {
                return Ok((Some(s), true))
            }
            Ok(s) => {
                let below = s.r < delta;
                if best.as_ref().is_none_or(|b| s.r < b.r) {
                    best = Some(s);
                }
                if below {
                    break;
                }
            }
            Err(e) if is_coalescence_error(&e) => {
                log::info!("evaluation at eps = {eps:.15e} failed ({e}); treating as coalesced");
                return Ok((None, true));
            }
            Err(e) => return Err(e),
        }
    }
    Ok((best, false))
}

/// Evaluation errors that mean the tracked eigenvalue merged with a neighbour.
fn is_coalescence_error(e: &Error) -> bool {
    matches!(
        e,
        Error::DegenerateSpectrum { .. } | Error::SingularShift { .. }
    )
}

#[allow(clippy::too_many_arguments)]
fn solve_generic<T: Field>(
    a: &CMatrix,
    mode: &StructureMode,
    delta: f64,
    tol: f64,
    eps0: f64,
    eps_lo: f64,
    eps_hi: f64,
    target: C64,
    opts: &OuterOptions,
) -> Result<DistanceReport> {
    let started = Instant::now();
    mode.validate(a)?;
    if !(delta >= 0.0 && tol > 0.0) {
        return Err(Error::InvalidInput("need delta >= 0 and tol > 0".into()));
    }
    if !(0.0 <= eps_lo && eps_lo < eps0 && eps0 < eps_hi) {
        return Err(Error::InvalidInput(format!(
            "need 0 <= eps_lo < eps0 < eps_hi, got {eps_lo}, {eps0}, {eps_hi}"
        )));
    }
    if !(opts.theta > 0.0 && opts.theta < 1.0) {
        return Err(Error::InvalidInput("theta must lie in (0, 1)".into()));
    }
    let delta_eff = delta.max(tol);
    let mut flow = opts.flow.clone();
    flow.tol_coalesce = tol;
    flow.r_tol = 0.05 * tol;

    let cold = initial_perturbation::<T>(a, mode, target, &flow)?;
    // Last non-coalesced and last coalesced perturbations, each with its eigenvalue.
    let mut warm: Option<(Perturbation<T>, C64)> = None;
    let mut warm_coalesced: Option<(Perturbation<T>, C64)> = None;
    let (mut lo, mut hi) = (eps_lo, eps_hi);
    let mut eps = eps0;
    let mut bisected = false;
    let mut iterates: Vec<OuterIterate> = Vec::new();
    let mut last: Option<FlowState<T>> = None;
    let mut final_fit: Option<(f64, f64)> = None;
    // Earlier lower ends, and the state of the "is ε_ℓ stale?" check.
    let mut lo_history: Vec<f64> = Vec::new();
    let mut checked_lo = f64::NAN;
    let mut recheck = false;
    let mut prev_coalesced = false;

    for k in 0..opts.max_outer {
        let mut starts = Vec::new();
        if recheck {
            starts.extend(warm_coalesced.iter().cloned());
        } else if opts.warm_start {
            starts.extend(warm_coalesced.iter().cloned());
            starts.push(warm.clone().unwrap_or_else(|| (cold.clone(), target)));
        } else {
            starts.push((cold.clone(), target));
        }
        let (state, coalesced) = best_flow(a, eps, mode, starts, delta_eff, tol, &flow)?;
        let r = state.as_ref().map_or(0.0, |s| s.r);
        log::info!(
            "k = {k}: eps = {eps:.15e}, r = {r:.15e}{}",
            if coalesced { " (coalesced)" } else { "" }
        );

        let mut it = OuterIterate {
            k,
            epsilon: eps,
            r,
            coalesced,
            eps_lo: lo,
            eps_hi: hi,
            r_prime: None,
            gamma: None,
            eps_star: None,
            used_bisection: bisected,
            flow: match &state {
                Some(s) => FlowSummary::from_state(s),
                None => FlowSummary {
                    lambda: warm.as_ref().map_or(target, |w| w.1),
                    r: 0.0,
                    s_norm: f64::INFINITY,
                    status: InnerStatus::Coalesced,
                    steps: 0,
                    e: CMatrix::zeros(a.nrows(), a.ncols()),
                    stationarity: StationarityDiagnostics {
                        b_norm_rel: f64::NAN,
                        s_norm: f64::INFINITY,
                        re_s_norm: f64::NAN,
                        mu: f64::NAN,
                        proportionality_residual: f64::NAN,
                    },
                    trace: Vec::new(),
                },
            },
        };

        if recheck && (coalesced || r <= delta_eff) {
            // ε_ℓ came from a basin with larger r than the coalescing one
            log::info!("lower end {lo:.15e} is stale; widening the bracket");
            lo = lo_history.pop().unwrap_or(eps_lo);
        }
        let next = if coalesced {
            hi = eps;
            if let Some(s) = &state {
                warm_coalesced = Some((s.e.clone(), s.triple.lambda));
            }
            None
        } else {
            let s = state.expect("non-coalesced evaluations carry a state");
            if tol < delta && r > tol && r <= delta {
                log::debug!("r = {r:.3e} lies in (tol, delta]; bracketing from above");
            }
            let (rp, stationary) = match r_prime(&s, opts) {
                Ok(v) => (v, true),
                Err(Error::NotStationary { residual }) => {
                    log::warn!("inner flow not stationary (residual {residual:.3e})");
                    (r_prime_formula(&s), false)
                }
                Err(e) => return Err(e),
            };
            if r > delta_eff && (stationary || !hi.is_finite()) {
                if eps != lo {
                    lo_history.push(lo);
                }
                lo = eps;
            } else {
                // Flows stop short of stationarity mostly just past a coalescence,
                // where the set of coalescing directions is tiny; count ε as an upper end.
                hi = eps;
            }
            let (gamma, eps_star, eps_hat) = puiseux_step(eps, r, rp, delta_eff)?;
            it.r_prime = Some(rp);
            it.gamma = Some(gamma);
            it.eps_star = Some(eps_star);
            final_fit = Some((gamma, eps_star));
            warm = Some((s.e.clone(), s.triple.lambda));
            // an unfinished flow only bounds r(ε) from above: keep the bracket, skip the model
            let settled = s.status != InnerStatus::MaxSteps;
            let done = settled && (r - delta_eff).abs() < tol;
            last = Some(s);
            if done {
                iterates.push(it);
                return finish(a, mode, delta, tol, eps, iterates, last, final_fit, started);
            }
            // the model needs a trustworthy derivative unless there is nothing else to go on
            let eps_hat = if opts.damp {
                eps + opts.theta * (eps_hat - eps)
            } else {
                eps_hat
            };
            (settled && (stationary || !hi.is_finite())).then_some(eps_hat)
        };
        iterates.push(it);

        if delta == 0.0 && hi - lo <= tol * hi {
            return finish(a, mode, delta, tol, lo, iterates, last, final_fit, started);
        }
        // Two coalescences in a row with the bracket unchanged at the bottom:
        // re-evaluate ε_ℓ from the coalesced perturbation.
        let stale_check = opts.warm_start
            && coalesced
            && prev_coalesced
            && lo > eps_lo
            && lo != checked_lo
            && warm_coalesced.is_some();
        prev_coalesced = coalesced;
        recheck = stale_check;
        let (eps_next, bis) = if stale_check {
            checked_lo = lo;
            (lo, true)
        } else {
            match next {
                Some(e) if e > lo && e < hi => (e, false),
                _ => {
                    if !hi.is_finite() {
                        return Err(Error::BracketExhausted { lo, hi });
                    }
                    (lo + opts.theta * (hi - lo), true)
                }
            }
        };
        if hi - lo < 1e-15 || eps_next == eps {
            return Err(Error::BracketExhausted { lo, hi });
        }
        bisected = bis;
        eps = eps_next;
    }
    Err(Error::MaxOuterIterations(opts.max_outer))
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Field>(
    a: &CMatrix,
    mode: &StructureMode,
    delta: f64,
    tol: f64,
    eps: f64,
    iterates: Vec<OuterIterate>,
    last: Option<FlowState<T>>,
    fit: Option<(f64, f64)>,
    started: Instant,
) -> Result<DistanceReport> {
    let (gamma, eps_star) = fit.unwrap_or((f64::NAN, f64::NAN));
    let (pair, diagnostics) = match &last {
        Some(s) => {
            let lam = s.triple.lambda;
            let vals = eigenvalues(&s.matrix(a))?;
            let other = vals
                .iter()
                .copied()
                .filter(|v| (v - lam).norm() > 0.0)
                .min_by(|p, q| (p - lam).norm().total_cmp(&(q - lam).norm()))
                .unwrap_or(lam);
            let d = stationarity_diagnostics(s);
            let p = puiseux_diagnostics(s, mode.mask());
            let diag = ReportDiagnostics {
                rr_prime_ratio: p.ratio,
                rr_prime_ratio_structured: p.ratio_structured,
                res_stationarity: d.proportionality_residual,
                re_s_norm: d.re_s_norm,
                mu: re_inner(&s.e.to_dense(), &s.s_active),
            };
            ([lam, other], diag)
        }
        None => (
            [C64::new(f64::NAN, f64::NAN); 2],
            ReportDiagnostics::default(),
        ),
    };
    Ok(DistanceReport {
        mode: mode.clone(),
        delta,
        tol,
        iterates,
        eps_delta_star: eps,
        eps_zero_star_estimate: eps_star,
        gamma,
        coalescing_lambdas: pair,
        diagnostics,
        wall_time: started.elapsed(),
    })
}
