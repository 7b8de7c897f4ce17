use crate::field::Field;
use crate::linalg::{best_rank_k, LowRank};
use crate::{Error, Mask, Result};
use nalgebra::DMatrix;

/// Unit-norm perturbation direction `E`.
#[derive(Clone, Debug)]
pub enum Perturbation<T: Field> {
    Dense(DMatrix<T>),
    /// `E = U T Vᴴ` with orthonormal `U`, `V`.
    Factored(LowRank<T>),
    /// Entries outside the mask are exactly zero.
    Pattern {
        values: DMatrix<T>,
        mask: Mask,
    },
}

impl<T: Field> Perturbation<T> {
    pub fn to_dense(&self) -> DMatrix<T> {
        match self {
            Perturbation::Dense(e) => e.clone(),
            Perturbation::Factored(lr) => lr.to_dense(),
            Perturbation::Pattern { values, .. } => values.clone(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Perturbation::Factored(lr) => lr.t.norm(),
            Perturbation::Dense(e) | Perturbation::Pattern { values: e, .. } => e.norm(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Perturbation::Dense(e) | Perturbation::Pattern { values: e, .. } => e.nrows(),
            Perturbation::Factored(lr) => lr.u.nrows(),
        }
    }

    /// Rank of the factored representation, if any.
    pub fn factored_rank(&self) -> Option<usize> {
        match self {
            Perturbation::Factored(lr) => Some(lr.rank()),
            _ => None,
        }
    }

    pub fn normalized(self) -> Result<Self> {
        let nrm = self.norm();
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::NonFinite("perturbation norm"));
        }
        let s = T::from_real(1.0 / nrm);
        Ok(match self {
            Perturbation::Dense(e) => Perturbation::Dense(e * s),
            Perturbation::Factored(mut lr) => {
                lr.t *= s;
                Perturbation::Factored(lr)
            }
            Perturbation::Pattern { values, mask } => Perturbation::Pattern {
                values: values * s,
                mask,
            },
        })
    }

    /// Builds a unit perturbation from a dense direction in the requested layout.
    /// `rank = None` keeps a dense matrix; a mask zeroes everything outside it.
    pub fn from_dense(d: &DMatrix<T>, mask: Option<&Mask>, rank: Option<usize>) -> Result<Self> {
        let p = match (mask, rank) {
            (Some(m), _) => Perturbation::Pattern {
                values: apply_mask(d, m),
                mask: m.clone(),
            },
            (None, Some(k)) if k < d.nrows() => Perturbation::Factored(best_rank_k(d, k).factors),
            (None, _) => Perturbation::Dense(d.clone()),
        };
        p.normalized()
    }
}

/// Entrywise product with a boolean mask.
pub fn apply_mask<T: Field>(d: &DMatrix<T>, mask: &Mask) -> DMatrix<T> {
    DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| {
        if mask[(i, j)] {
            d[(i, j)]
        } else {
            T::zero()
        }
    })
}
