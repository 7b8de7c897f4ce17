//! Truncated SVD factorisations `M ≈ U T Vᴴ` with orthonormal `U`, `V`.

use crate::field::Field;
use nalgebra::DMatrix;

#[derive(Clone, Debug)]
pub struct LowRank<T: Field> {
    pub u: DMatrix<T>,
    pub t: DMatrix<T>,
    pub v: DMatrix<T>,
}

impl<T: Field> LowRank<T> {
    pub fn rank(&self) -> usize {
        self.t.nrows()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        &self.u * &self.t * self.v.adjoint()
    }

    /// `σ_max(T)/σ_min(T)`.
    pub fn cond_t(&self) -> f64 {
        let (lo, hi) = match T::svd(&self.t) {
            Some(d) => (
                d.s.iter().copied().fold(f64::INFINITY, f64::min),
                d.s.first().copied().unwrap_or(0.0),
            ),
            None => {
                let s = self.t.clone().singular_values();
                (s.min(), s.max())
            }
        };
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug)]
pub struct BestRank<T: Field> {
    pub factors: LowRank<T>,
    /// Some singular values had to be lifted to the padding level.
    pub rank_deficient: bool,
}

/// Best Frobenius rank-`k` approximation; tiny singular values are padded to
/// `1e-8·max(σ₁, 1)` so that `T` stays invertible.
pub fn best_rank_k<T: Field>(m: &DMatrix<T>, k: usize) -> BestRank<T> {
    let n = m.nrows().min(m.ncols());
    assert!(k <= n, "rank {k} exceeds matrix dimension {n}");
    let (u_full, s, v_full) = match T::svd(m) {
        Some(d) => (d.u, d.s, d.v),
        None => {
            let d = m.clone().svd(true, true);
            let v = d.v_t.expect("v requested").adjoint();
            (
                d.u.expect("u requested"),
                d.singular_values.iter().copied().collect(),
                v,
            )
        }
    };
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    let smax = s.iter().copied().fold(0.0, f64::max);
    let pad = 1e-8 * smax.max(1.0);
    let mut rank_deficient = false;
    let mut u = DMatrix::<T>::zeros(m.nrows(), k);
    let mut v = DMatrix::<T>::zeros(m.ncols(), k);
    let mut t = DMatrix::<T>::zeros(k, k);
    for (j, &idx) in order.iter().take(k).enumerate() {
        u.set_column(j, &u_full.column(idx));
        v.set_column(j, &v_full.column(idx));
        let mut sj = s[idx];
        if sj < pad {
            sj = pad;
            rank_deficient = true;
        }
        t[(j, j)] = T::from_real(sj);
    }
    BestRank {
        factors: LowRank { u, t, v },
        rank_deficient,
    }
}
