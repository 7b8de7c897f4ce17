//! Independent brute-force checks: finite differences, exhaustive 2×2 search
//! and dense evaluation of the projected right-hand sides.

use crate::field::{re_inner, Field};
use crate::flow::{evaluate, FlowState, Perturbation, Problem, StructureMode};
use crate::{CMatrix, Error, FlowOptions, Result, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Central difference step, within `[1e-8, 1e-4]`.
    pub fd_step: f64,
    /// Grid points per angle for the 2×2 search.
    pub search_resolution: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: 0,
            n_samples: 100,
            fd_step: 1e-6,
            search_resolution: 90,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1e-8..=1e-4).contains(&self.fd_step) {
            return Err(Error::InvalidInput(format!(
                "fd_step {} outside [1e-8, 1e-4]",
                self.fd_step
            )));
        }
        if self.search_resolution < 4 {
            return Err(Error::InvalidInput(
                "search_resolution must be at least 4".into(),
            ));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Matrix with independent entries uniform in `[-1, 1]` (real and imaginary parts).
pub fn random_matrix(rng: &mut impl Rng, m: usize, n: usize, real: bool) -> CMatrix {
    CMatrix::from_fn(m, n, |_, _| {
        let re = rng.random_range(-1.0..1.0);
        let im = if real {
            0.0
        } else {
            rng.random_range(-1.0..1.0)
        };
        C64::new(re, im)
    })
}

fn r_along<T: Field>(
    prob: &Problem<'_>,
    e: &DMatrix<T>,
    d: &DMatrix<T>,
    t: f64,
    target: C64,
) -> Result<f64> {
    let m = e + d * T::from_real(t);
    let p = Perturbation::from_dense(&m, prob.mask, None)?;
    Ok(evaluate(prob, p, target)?.r)
}

fn fd_generic<T: Field>(
    a: &CMatrix,
    eps: f64,
    e: &CMatrix,
    d: &CMatrix,
    mode: &StructureMode,
    target: C64,
    step: f64,
) -> Result<f64> {
    let opts = FlowOptions::default();
    let prob = Problem::new::<T>(a, eps, mode, &opts)?;
    let (e, d) = (T::project_matrix(e), T::project_matrix(d));
    let fp = r_along(&prob, &e, &d, step, target)?;
    let fm = r_along(&prob, &e, &d, -step, target)?;
    Ok((fp - fm) / (2.0 * step))
}

/// Central difference of `|yᴴx|` along `t ↦ (E + tD)/‖E + tD‖` at `t = 0`.
///
/// `E` and `D` are projected onto the admissible class of `mode` first.
pub fn fd_directional(
    a: &CMatrix,
    eps: f64,
    e: &CMatrix,
    d: &CMatrix,
    mode: &StructureMode,
    target: C64,
    step: f64,
) -> Result<f64> {
    if mode.is_real() {
        fd_generic::<f64>(a, eps, e, d, mode, target, step)
    } else {
        fd_generic::<C64>(a, eps, e, d, mode, target, step)
    }
}

/// Unit nilpotent `u (u⊥)ᴴ` with `u = (cos θ, sin θ e^{iφ})`.
fn nilpotent(theta: f64, phi: f64) -> [C64; 4] {
    let u1 = C64::new(theta.cos(), 0.0);
    let u2 = C64::from_polar(theta.sin(), phi);
    [-u1 * u2, u1 * u1, -u2 * u2, u1 * u2]
}

/// Distance from a 2×2 matrix to the defective matrices, by exhaustive search.
///
/// Every defective 2×2 matrix is `μI + tN` with `N` unit nilpotent, and `⟨I, N⟩ = 0`,
/// so the squared distance is `‖A₀‖² − max_N |⟨N, A₀⟩|²` with `A₀` the traceless part
/// of `A`. The maximum over `N` is found on a grid and then polished by a
/// shrinking pattern search. With `real` set only real `N` are searched.
pub fn brute_force_2x2(a: &CMatrix, real: bool, resolution: usize) -> Result<f64> {
    if a.shape() != (2, 2) {
        return Err(Error::InvalidInput(
            "brute_force_2x2 needs a 2×2 matrix".into(),
        ));
    }
    if real && a.iter().any(|z| z.im != 0.0) {
        return Err(Error::InvalidInput(
            "real search needs a real matrix".into(),
        ));
    }
    let mu = (a[(0, 0)] + a[(1, 1)]) * 0.5;
    let a0 = [a[(0, 0)] - mu, a[(0, 1)], a[(1, 0)], a[(1, 1)] - mu];
    let norm2: f64 = a0.iter().map(|z| z.norm_sqr()).sum();
    let score = |theta: f64, phi: f64| -> f64 {
        let n = nilpotent(theta, phi);
        n.iter()
            .zip(a0.iter())
            .map(|(p, q)| p.conj() * q)
            .sum::<C64>()
            .norm_sqr()
    };
    let pi = std::f64::consts::PI;
    let nphi = if real { 1 } else { 2 * resolution };
    let (mut best, mut bt, mut bp) = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..resolution {
        let theta = pi * i as f64 / resolution as f64;
        for j in 0..nphi {
            let phi = 2.0 * pi * j as f64 / nphi as f64;
            let s = score(theta, phi);
            if s > best {
                (best, bt, bp) = (s, theta, phi);
            }
        }
    }
    let mut step = pi / resolution as f64;
    while step > 1e-13 {
        let mut moved = false;
        for (dt, dp) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            if real && dp != 0.0 {
                continue;
            }
            let (t, p) = (bt + dt * step, bp + dp * step);
            let s = score(t, p);
            if s > best {
                (best, bt, bp) = (s, t, p);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((norm2 - best).max(0.0).sqrt())
}

/// Projected right-hand side computed densely from `S_active`.
///
/// Factored states use the tangent projection onto the rank-`k` manifold,
/// `P_E(Z) = Z − (I − UUᴴ) Z (I − VVᴴ)`; other states use `Z` itself.
pub fn dense_reference_rhs<T: Field>(state: &FlowState<T>) -> DMatrix<T> {
    let e = state.e.to_dense();
    let ps = match &state.e {
        Perturbation::Factored(lr) => {
            let n = lr.u.nrows();
            let id = DMatrix::<T>::identity(n, n);
            let pu = &id - &lr.u * lr.u.adjoint();
            let pv = &id - &lr.v * lr.v.adjoint();
            &state.s_active - pu * &state.s_active * pv
        }
        _ => state.s_active.clone(),
    };
    let c = re_inner(&e, &ps);
    e * T::from_real(c) - ps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_distance_is_one() {
        let a = CMatrix::from_diagonal(&crate::CVector::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
        ]));
        let c = brute_force_2x2(&a, false, 60).unwrap();
        let r = brute_force_2x2(&a, true, 60).unwrap();
        assert!((c - 1.0).abs() < 1e-10, "{c}");
        assert!((r - 1.0).abs() < 1e-10, "{r}");
    }

    #[test]
    fn jordan_block_is_at_distance_zero() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        assert!(brute_force_2x2(&a, false, 40).unwrap() < 1e-8);
    }

    #[test]
    fn config_bounds() {
        assert!(OracleConfig::default().validate().is_ok());
        assert!(OracleConfig {
            fd_step: 1e-2,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
