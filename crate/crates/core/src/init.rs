//! Starting eigenvalue, coalescence candidate and upper bounds for the bracket.

use crate::flow::{apply_mask, StructureMode};
use crate::linalg::{eig_pairs, EigenTriple};
use crate::{CMatrix, Mask, Result, C64};

/// First-order growth rate of one eigenvalue under unit admissible perturbations.
///
/// The eigenvalue moves by `yᴴEx / yᴴx`, i.e. by `⟨K, E⟩ / yᴴx` with `K = conj(y) xᵀ`
/// (entrywise `K_ij = conj(y_i) x_j`). Complex perturbations supported on a mask
/// reach `‖P(K)‖_F`; real ones reach the largest singular value of the `2 × n²`
/// matrix stacking `vec Re P(K)` and `vec Im P(K)`.
pub fn growth_rate(t: &EigenTriple, real: bool, mask: Option<&Mask>) -> f64 {
    let n = t.x.len();
    let k = CMatrix::from_fn(n, n, |i, j| t.y[i].conj() * t.x[j]);
    let k = match mask {
        Some(m) => apply_mask(&k, m),
        None => k,
    };
    let num = if real {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for v in k.iter() {
            a += v.re * v.re;
            b += v.im * v.im;
            c += v.re * v.im;
        }
        let h = 0.5 * (a - b);
        (0.5 * (a + b) + (h * h + c * c).sqrt()).sqrt()
    } else {
        k.norm()
    };
    num / t.r
}

/// Eigentriples of `A` together with their growth rates for `mode`.
pub fn condition_rates_with_triples(
    a: &CMatrix,
    mode: &StructureMode,
) -> Result<(Vec<EigenTriple>, Vec<f64>)> {
    mode.validate(a)?;
    let mut ts = eig_pairs(a)?;
    ts.sort_by(|p, q| {
        (p.lambda.re, p.lambda.im)
            .partial_cmp(&(q.lambda.re, q.lambda.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let rates = ts
        .iter()
        .map(|t| growth_rate(t, mode.is_real(), mode.mask()))
        .collect();
    Ok((ts, rates))
}

/// Growth rates `p_j`, one per eigenvalue (eigenvalues sorted by real then imaginary part).
pub fn condition_rates(a: &CMatrix, mode: &StructureMode) -> Result<Vec<f64>> {
    Ok(condition_rates_with_triples(a, mode)?.1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoalescenceCandidate {
    pub lambda_j: C64,
    pub lambda_k: C64,
    pub p_j: f64,
    pub p_k: f64,
    /// Touching point of the disks `|z − λ_j| ≤ p_j ε` and `|z − λ_k| ≤ p_k ε`.
    pub z0: C64,
    /// `|λ_j − λ_k| / (p_j + p_k)`, the `ε` at which those disks touch.
    pub score: f64,
    /// Classical condition numbers `1/|yᴴx|` of the two eigenvalues.
    pub kappa_j: f64,
    pub kappa_k: f64,
}

impl CoalescenceCandidate {
    /// Eigenvalue the flow starts from: the member of the pair with the larger
    /// classical condition number.
    ///
    /// Structured rates can favour an eigenvalue close to the real axis, whose
    /// flow then tends to merge it with its own conjugate instead of with the
    /// partner.
    pub fn start(&self) -> C64 {
        if self.kappa_j >= self.kappa_k {
            self.lambda_j
        } else {
            self.lambda_k
        }
    }
}

/// Pair of eigenvalues whose first-order disks touch first.
pub fn candidate(a: &CMatrix, mode: &StructureMode) -> Result<CoalescenceCandidate> {
    let (ts, p) = condition_rates_with_triples(a, mode)?;
    if ts.len() < 2 {
        return Err(crate::Error::InvalidInput(
            "need at least two eigenvalues".into(),
        ));
    }
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for j in 0..ts.len() {
        for k in (j + 1)..ts.len() {
            let score = (ts[j].lambda - ts[k].lambda).norm() / (p[j] + p[k]);
            let im = ts[j].lambda.im + ts[k].lambda.im;
            let better = match best {
                None => true,
                Some((s, bim, _, _)) => {
                    if (score - s).abs() <= 1e-12 * s.max(f64::MIN_POSITIVE) {
                        im < bim
                    } else {
                        score < s
                    }
                }
            };
            if better {
                best = Some((score, im, j, k));
            }
        }
    }
    let (score, _, j, k) = best.expect("at least one pair");
    let (lj, lk) = (ts[j].lambda, ts[k].lambda);
    let z0 = (lk * p[j] + lj * p[k]) / (p[j] + p[k]);
    Ok(CoalescenceCandidate {
        lambda_j: lj,
        lambda_k: lk,
        p_j: p[j],
        p_k: p[k],
        z0,
        score,
        kappa_j: 1.0 / ts[j].r,
        kappa_k: 1.0 / ts[k].r,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundOptions {
    /// Return the full-structure bound for pattern modes instead of `+∞`.
    pub permissive_pattern: bool,
    /// Use half the smallest eigenvalue gap instead of the condition-weighted gap.
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpperBound {
    pub value: f64,
    /// Full-structure value, reported when `value` is `+∞`.
    pub hint: f64,
}

fn complex_bound(ts: &[EigenTriple], strict: bool) -> f64 {
    let mut best = f64::INFINITY;
    for (i, ti) in ts.iter().enumerate() {
        for (j, tj) in ts.iter().enumerate() {
            if i != j {
                let gap = (ti.lambda - tj.lambda).norm();
                best = best.min(if strict { 0.5 * gap } else { gap / ti.r });
            }
        }
    }
    best
}

fn real_bound(ts: &[EigenTriple], strict: bool, scale: f64) -> f64 {
    let is_real = |t: &EigenTriple| t.lambda.im.abs() <= 1e-12 * scale.max(1.0);
    let mut best = f64::INFINITY;
    for (i, ti) in ts.iter().enumerate() {
        for (j, tj) in ts.iter().enumerate() {
            if i == j {
                continue;
            }
            let gap = (ti.lambda - tj.lambda).norm();
            let both_real = is_real(ti) && is_real(tj);
            let conjugate = (ti.lambda - tj.lambda.conj()).norm() <= 1e-10 * scale.max(1.0);
            if both_real || conjugate {
                best = best.min(if strict { 0.5 * gap } else { gap / ti.r });
            } else if ti.lambda.im > 0.0 && tj.lambda.im > 0.0 {
                // two non-conjugate complex eigenvalues: their conjugates coalesce too
                let d = (ti.lambda.re - tj.lambda.re).abs();
                best = best.min(if strict { d } else { 2.0 * d / ti.r });
            }
        }
    }
    best
}

/// Upper bound for the bracket of the outer iteration.
pub fn upper_bound(a: &CMatrix, mode: &StructureMode) -> Result<f64> {
    Ok(upper_bound_with(a, mode, BoundOptions::default())?.value)
}

pub fn upper_bound_with(
    a: &CMatrix,
    mode: &StructureMode,
    opts: BoundOptions,
) -> Result<UpperBound> {
    mode.validate(a)?;
    let ts = eig_pairs(a)?;
    let full = if mode.is_real() {
        real_bound(&ts, opts.strict, a.norm())
    } else {
        complex_bound(&ts, opts.strict)
    };
    let gap = complex_bound(&ts, true) * 2.0;
    if full > gap {
        log::debug!("condition-weighted bound {full:.6e} exceeds the smallest gap {gap:.6e}");
    }
    let value = if mode.mask().is_some() && !opts.permissive_pattern {
        f64::INFINITY
    } else {
        full
    };
    Ok(UpperBound { value, hint: full })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::gallery::{example1, grcar};
    use crate::CVector;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            v.len(),
            v.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    #[test]
    fn normal_matrix_has_unit_rates() {
        let p = condition_rates(&diag(&[0.0, 1.0, 3.0]), &StructureMode::ComplexFull).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn diagonal_pair_midpoint() {
        let c = candidate(&diag(&[0.0, 1.0]), &StructureMode::ComplexFull).unwrap();
        assert!((c.z0 - C64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((c.score - 0.5).abs() < 1e-14);
        assert!(
            (upper_bound(&diag(&[0.0, 2.0]), &StructureMode::ComplexFull).unwrap() - 2.0).abs()
                < 1e-14
        );
    }

    #[test]
    fn grcar_complex_candidate_pair() {
        // reference values from an independent LAPACK computation
        let c = candidate(&grcar(6), &StructureMode::ComplexFull).unwrap();
        let want = [
            C64::new(1.139108055, -1.230297559),
            C64::new(1.502402762, -0.605571102),
        ];
        for w in want {
            assert!((c.lambda_j - w).norm() < 1e-8 || (c.lambda_k - w).norm() < 1e-8);
        }
        assert!((c.score - 0.273345269858486).abs() < 1e-12);
        assert!((c.start() - want[0]).norm() < 1e-8);
        // z0 on the segment between the pair
        let t = (c.z0 - c.lambda_j) / (c.lambda_k - c.lambda_j);
        assert!(t.im.abs() < 1e-12 && t.re > 0.0 && t.re < 1.0);
    }

    #[test]
    fn example1_candidate_pair() {
        let c = candidate(&example1(), &StructureMode::ComplexFull).unwrap();
        let want = [
            C64::new(1.416177710, 1.260523165),
            C64::new(0.338991381, 0.455810180),
        ];
        for w in want {
            assert!((c.lambda_j - w).norm() < 1e-8 || (c.lambda_k - w).norm() < 1e-8);
        }
    }
}
