//! Euler integration on the unit sphere with monotone step-size control.

use super::gradient::{evaluate, is_real_eigenvalue, FlowState, Problem};
use super::perturbation::Perturbation;
use super::rhs::{rhs, Rhs, MAX_COND_T};
use super::{FlowOptions, InnerStatus, Representation, StructureMode, TraceRow};
use crate::field::Field;
use crate::linalg::{best_rank_k, nearest_triple_with, LowRank};
use crate::{CMatrix, Error, Result, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// QR retraction of the factors after an Euler update; refactors through an SVD
/// when the core becomes ill conditioned.
fn retract<T: Field>(u: DMatrix<T>, t: DMatrix<T>, v: DMatrix<T>) -> Result<LowRank<T>> {
    let k = t.nrows();
    let qu = u.qr();
    let qv = v.qr();
    let (ru, rv) = (qu.r(), qv.r());
    let t = &ru * t * rv.adjoint();
    let lr = LowRank {
        u: qu.q(),
        t,
        v: qv.q(),
    };
    let cond = lr.cond_t();
    if cond <= MAX_COND_T {
        return Ok(lr);
    }
    let dense = lr.to_dense();
    if !dense
        .iter()
        .all(|c| c.real().is_finite() && c.imaginary().is_finite())
    {
        return Err(Error::RankCollapse);
    }
    log::debug!("refactoring ill-conditioned core (cond {cond:.3e})");
    let lr = best_rank_k(&dense, k).factors;
    if lr.cond_t() > MAX_COND_T {
        return Err(Error::RankCollapse);
    }
    Ok(lr)
}

/// `E + h Ė`, renormalised to the unit sphere.
pub fn advance<T: Field>(e: &Perturbation<T>, d: &Rhs<T>, h: f64) -> Result<Perturbation<T>> {
    let hs = T::from_real(h);
    let next = match (e, d) {
        (Perturbation::Dense(m), Rhs::Dense(dm)) => Perturbation::Dense(m + dm * hs),
        (Perturbation::Pattern { values, mask }, Rhs::Dense(dm)) => Perturbation::Pattern {
            values: values + dm * hs,
            mask: mask.clone(),
        },
        (Perturbation::Factored(lr), Rhs::Factored { tdot, udot, vdot }) => {
            if h == 0.0 {
                Perturbation::Factored(lr.clone())
            } else {
                Perturbation::Factored(retract(
                    &lr.u + udot * hs,
                    &lr.t + tdot * hs,
                    &lr.v + vdot * hs,
                )?)
            }
        }
        _ => {
            return Err(Error::InvalidInput(
                "derivative does not match perturbation layout".into(),
            ))
        }
    };
    next.normalized()
}

/// Factor multiplying the right-hand side: `r²` once `r` falls below the threshold.
pub fn rhs_scale(r: f64, opts: &FlowOptions) -> f64 {
    if r < opts.r_scale_threshold {
        r * r
    } else {
        1.0
    }
}

/// Candidate state after one Euler step of length `h` (in scaled time); not committed.
pub fn euler_step<T: Field>(
    prob: &Problem<'_>,
    state: &FlowState<T>,
    h: f64,
) -> Result<FlowState<T>> {
    let d = rhs(state)?;
    euler_step_with(prob, state, &d, h)
}

fn euler_step_with<T: Field>(
    prob: &Problem<'_>,
    state: &FlowState<T>,
    d: &Rhs<T>,
    h: f64,
) -> Result<FlowState<T>> {
    let phi = rhs_scale(state.r, prob.opts);
    let e = advance(&state.e, d, h * phi)?;
    let mut next = evaluate(prob, e, state.triple.lambda)?;
    next.step_count = state.step_count;
    next.time = state.time + h;
    next.h_current = h;
    Ok(next)
}

/// One accepted step following the monotone step-size rule.
///
/// Steps are divided by `σ` until `r` decreases; if the accepted step is not
/// smaller than the previous one, a step of `σh` is probed and kept when it
/// decreases `r` at least as much. Returns the new state and the step used.
pub fn stepsize_control<T: Field>(
    prob: &Problem<'_>,
    state: &FlowState<T>,
    d: &Rhs<T>,
    h_predicted: f64,
    h_previous: f64,
) -> Result<(FlowState<T>, f64)> {
    let opts = prob.opts;
    if !(opts.sigma > 1.0) {
        return Err(Error::InvalidInput("step ratio sigma must exceed 1".into()));
    }
    let mut h = h_predicted;
    let mut cand = loop {
        if h < opts.h_min {
            return Err(Error::StepsizeUnderflow { h_min: opts.h_min });
        }
        match euler_step_with(prob, state, d, h) {
            Ok(c) if c.r < state.r => break c,
            Ok(_) => {}
            Err(e) => log::trace!("trial step rejected: {e}"),
        }
        h /= opts.sigma;
    };
    if h >= h_previous {
        if let Ok(probe) = euler_step_with(prob, state, d, opts.sigma * h) {
            if probe.r <= cand.r {
                cand = probe;
                h *= opts.sigma;
            }
        }
    }
    cand.step_count = state.step_count + 1;
    Ok((cand, h))
}

/// Rank of the factored layout for the tracked eigenvalue, or `None` for a dense layout.
pub fn active_rank<T: Field>(
    n: usize,
    lambda: C64,
    scale: f64,
    mode: &StructureMode,
    opts: &FlowOptions,
) -> Option<usize> {
    if mode.mask().is_some() || opts.representation == Representation::Dense {
        return None;
    }
    let k = if T::IS_REAL && !is_real_eigenvalue(lambda, scale) {
        4
    } else {
        2
    };
    (k < n).then_some(k)
}

/// Recasts a perturbation into the layout required at `lambda`.
pub fn conform<T: Field>(
    e: Perturbation<T>,
    lambda: C64,
    a: &CMatrix,
    mode: &StructureMode,
    opts: &FlowOptions,
) -> Result<Perturbation<T>> {
    let want = active_rank::<T>(a.nrows(), lambda, a.norm(), mode, opts);
    let ok = match (&e, want) {
        (Perturbation::Pattern { .. }, None) => mode.mask().is_some(),
        (Perturbation::Dense(_), None) => mode.mask().is_none(),
        (Perturbation::Factored(lr), Some(k)) => lr.rank() == k,
        _ => false,
    };
    if ok {
        return Ok(e);
    }
    Perturbation::from_dense(&e.to_dense(), mode.mask(), want)
}

/// Unit starting direction: the structured negative gradient at `E = 0`, or a
/// seeded random admissible direction when that gradient vanishes.
pub fn initial_perturbation<T: Field>(
    a: &CMatrix,
    mode: &StructureMode,
    target: C64,
    opts: &FlowOptions,
) -> Result<Perturbation<T>> {
    let prob = Problem::new::<T>(a, 0.0, mode, opts)?;
    let n = a.nrows();
    let zero = Perturbation::Dense(DMatrix::<T>::zeros(n, n));
    let mut triple = nearest_triple_with(a, target, &opts.eig)?;
    if T::IS_REAL && is_real_eigenvalue(triple.lambda, a.norm()) {
        triple = triple.force_real();
    }
    let s = evaluate(&prob, zero, triple.lambda)?.s_active;
    let dir = if s.norm() > 1e-12 * (1.0 + a.norm()) {
        -s
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        DMatrix::<T>::from_fn(n, n, |_, _| {
            T::project(C64::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ))
        })
    };
    let rank = active_rank::<T>(n, triple.lambda, a.norm(), mode, opts);
    Perturbation::from_dense(&dir, mode.mask(), rank)
}

/// Remaining decrease of `r` predicted from the decreases over equal windows,
/// assuming they shrink geometrically. Near coalescence the flow is stiff and
/// Euler converges linearly along the slow direction, so this fires long
/// before `‖Ė‖` becomes small.
#[derive(Clone, Debug)]
struct TailEstimate {
    mark: f64,
    /// Decreases over the last three windows, oldest first.
    drops: [f64; 3],
}

impl TailEstimate {
    fn new(r: f64) -> Self {
        TailEstimate {
            mark: r,
            drops: [f64::NAN; 3],
        }
    }

    /// Common ratio of the last window decreases, when the last two ratios
    /// agree; a dying fast transient gives inconsistent ratios.
    fn ratio(&self) -> Option<f64> {
        let [d0, d1, d2] = self.drops;
        let (qa, qb) = (d1 / d0, d2 / d1);
        let q = qa.max(qb);
        (q > 0.0 && q < 1.0 && (qa - qb).abs() <= 0.1 * (1.0 - q)).then_some(q)
    }

    /// Records `r` at a window end; returns the predicted remaining decrease.
    fn push(&mut self, r: f64) -> Option<f64> {
        let d = self.mark - r;
        self.mark = r;
        self.drops = [self.drops[1], self.drops[2], d];
        self.ratio().map(|q| d * q / (1.0 - q))
    }
}

/// Jump `E + β(E − E_mark)` with `β = ρ/(1 − ρ)`, `ρ = √q` (the decrease of `r`
/// is quadratic in the distance to the minimiser), halving `β` until `r` drops.
fn extrapolate<T: Field>(
    prob: &Problem<'_>,
    state: &FlowState<T>,
    mark: &DMatrix<T>,
    here: &DMatrix<T>,
    q: f64,
    mode: &StructureMode,
) -> Option<FlowState<T>> {
    let rho = q.sqrt();
    let step = here - mark;
    let mut beta = rho / (1.0 - rho);
    for _ in 0..6 {
        if beta < 1.0 {
            break;
        }
        let trial = here + &step * T::from_real(beta);
        let cand = Perturbation::from_dense(&trial, mode.mask(), state.e.factored_rank())
            .and_then(|e| evaluate(prob, e, state.triple.lambda));
        if let Ok(mut c) = cand {
            if c.r < state.r {
                c.step_count = state.step_count;
                c.time = state.time;
                c.h_current = state.h_current;
                return Some(c);
            }
        }
        beta /= 4.0;
    }
    None
}

fn push_trace<T: Field>(state: &mut FlowState<T>, h: f64, rhs_norm: f64) {
    let row = TraceRow {
        step: state.step_count,
        t: state.time,
        h,
        r: state.r,
        rhs_norm,
        lambda: state.triple.lambda,
    };
    state.trace.push(row);
}

/// Integrates the structured flow at fixed `ε` from `e0` until a stationary
/// point, a coalescence (`r ≤ tol_coalesce`) or the step budget is reached.
pub fn integrate_to_stationary<T: Field>(
    a: &CMatrix,
    epsilon: f64,
    e0: Perturbation<T>,
    mode: &StructureMode,
    target: C64,
    opts: &FlowOptions,
) -> Result<FlowState<T>> {
    let prob = Problem::new::<T>(a, epsilon, mode, opts)?;
    let e0 = conform(e0, target, a, mode, opts)?;
    let mut state = evaluate(&prob, e0, target)?;
    if state.r <= opts.tol_coalesce {
        state.status = InnerStatus::Coalesced;
        return Ok(state);
    }
    let mut h = opts.h0_scale / (rhs_scale(state.r, opts) * state.s_norm.max(f64::MIN_POSITIVE));
    let mut h_prev = 0.0;
    let mut stalled = 0usize;
    let mut tail = TailEstimate::new(state.r);
    let mut mark = state.e.to_dense();
    let mut trace = Vec::new();
    loop {
        let d = rhs(&state)?;
        let dn = d.norm(&state.e);
        if opts.trace {
            push_trace(&mut state, h_prev, dn);
            trace.append(&mut state.trace);
        }
        if dn <= opts.tol_inner * state.s_norm {
            state.status = InnerStatus::Converged;
            break;
        }
        if state.step_count >= opts.max_steps {
            log::warn!("inner flow hit the step limit at r = {:.6e}", state.r);
            state.status = InnerStatus::MaxSteps;
            break;
        }
        let (next, h_used) = match stepsize_control(&prob, &state, &d, h, h_prev) {
            Ok(v) => v,
            Err(Error::StepsizeUnderflow { .. }) => {
                state.status = InnerStatus::StepsizeUnderflow;
                break;
            }
            Err(e) => return Err(e),
        };
        // decrease of r per unit of natural time ε‖S‖² (scaled time absorbs φ)
        let rate = epsilon * state.s_norm * state.s_norm * h_used * rhs_scale(state.r, opts);
        let rel = (state.r - next.r) / (state.r * rate.max(f64::MIN_POSITIVE));
        stalled = if rel < opts.stall_tol { stalled + 1 } else { 0 };
        state = next;
        h_prev = h_used;
        h = h_used;
        if state.r <= opts.tol_coalesce {
            state.status = InnerStatus::Coalesced;
            break;
        }
        if stalled >= opts.stall_window {
            state.status = InnerStatus::Stalled;
            break;
        }
        if opts.settle_window > 0 && state.step_count % opts.settle_window == 0 {
            if tail.push(state.r).is_some_and(|rest| rest < opts.r_tol) {
                state.status = InnerStatus::Settled;
                break;
            }
            let here = state.e.to_dense();
            if opts.extrapolate {
                if let Some(next) = tail
                    .ratio()
                    .and_then(|q| extrapolate(&prob, &state, &mark, &here, q, mode))
                {
                    log::trace!("extrapolated r {:.6e} -> {:.6e}", state.r, next.r);
                    state = next;
                    tail = TailEstimate::new(state.r);
                }
            }
            mark = state.e.to_dense();
            if state.r <= opts.tol_coalesce {
                state.status = InnerStatus::Coalesced;
                break;
            }
        }
    }
    state.h_current = h;
    state.trace = trace;
    Ok(state)
}
