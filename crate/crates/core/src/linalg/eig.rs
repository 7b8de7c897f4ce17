//! Eigentriples `(λ, x, y)` with unit vectors and `yᴴx ≥ 0`.

use crate::{CMatrix, CVector, Error, Result, C64};

#[derive(Clone, Debug)]
pub struct EigenTriple {
    pub lambda: C64,
    /// Right eigenvector, unit 2-norm.
    pub x: CVector,
    /// Left eigenvector (`yᴴM = λyᴴ`), unit 2-norm, phased so that `yᴴx ≥ 0`.
    pub y: CVector,
    /// `yᴴx`, stored as a real number.
    pub r: f64,
}

impl EigenTriple {
    /// Builds a triple from raw eigenvectors, normalising both and rotating `y`.
    pub fn from_raw(lambda: C64, x: CVector, y: CVector) -> Self {
        let x = normalized(x);
        let mut y = normalized(y);
        let s = y.dotc(&x);
        if s.norm() > 0.0 {
            y *= s / s.norm();
        }
        let r = y.dotc(&x).re.max(0.0);
        EigenTriple { lambda, x, y, r }
    }

    /// Replaces the eigenvectors by real ones; meaningful for a real eigenvalue of a real matrix.
    pub fn force_real(self) -> Self {
        let x = realify(&self.x);
        let mut y = realify(&self.y);
        let mut s = y.dotc(&x).re;
        if s < 0.0 {
            y.neg_mut();
            s = -s;
        }
        EigenTriple {
            lambda: C64::new(self.lambda.re, 0.0),
            x,
            y,
            r: s,
        }
    }

    /// `max(‖(M − λI)x‖, ‖yᴴ(M − λI)‖)`.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        let rx = m * &self.x - &self.x * self.lambda;
        let ry = m.adjoint() * &self.y - &self.y * self.lambda.conj();
        rx.norm().max(ry.norm())
    }
}

fn normalized(v: CVector) -> CVector {
    let n = v.norm();
    if n > 0.0 {
        v / C64::new(n, 0.0)
    } else {
        v
    }
}

fn realify(v: &CVector) -> CVector {
    let p = v.iter().copied().fold(
        C64::new(0.0, 0.0),
        |m, c| if c.norm() > m.norm() { c } else { m },
    );
    let w = if p.norm() > 0.0 {
        v * (p.conj() / p.norm())
    } else {
        v.clone()
    };
    normalized(w.map(|c| C64::new(c.re, 0.0)))
}

#[derive(Clone, Copy, Debug)]
pub struct EigOptions {
    /// Eigenvalues closer than `gap_rel·‖M‖_F` are treated as not simple.
    pub gap_rel: f64,
    /// Residuals above `residual_rel·‖M‖_F` are logged.
    pub residual_rel: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            gap_rel: 1e-12,
            residual_rel: 1e-10,
        }
    }
}

struct Decomposition {
    values: Vec<C64>,
    vectors: CMatrix,
}

fn check_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn decompose(m: &CMatrix) -> Result<Decomposition> {
    check_finite(m, "matrix")?;
    let evd = to_faer(m)
        .eigen()
        .map_err(|_| Error::NonFinite("eigendecomposition"))?;
    let n = m.nrows();
    let values: Vec<C64> = (0..n).map(|k| evd.S()[k]).collect();
    let u = evd.U();
    let vectors = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    check_finite(&vectors, "eigenvectors")?;
    if values
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::NonFinite("eigenvalues"));
    }
    Ok(Decomposition { values, vectors })
}

fn require_square(m: &CMatrix) -> Result<()> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// All eigenvalues of `m`.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    require_square(m)?;
    check_finite(m, "matrix")?;
    to_faer(m)
        .eigenvalues()
        .map_err(|_| Error::NonFinite("eigenvalues"))
}

/// Smallest distance from `values[j]` to any other entry.
fn separation(values: &[C64], j: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, v)| (v - values[j]).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Index of the left eigenvalue matching `conj(λ)`, rejecting ambiguous pairings.
fn match_left(left: &[C64], lambda: C64, threshold: f64) -> Result<usize> {
    let target = lambda.conj();
    let mut best = (usize::MAX, f64::INFINITY);
    let mut second = f64::INFINITY;
    for (i, v) in left.iter().enumerate() {
        let d = (v - target).norm();
        if d < best.1 {
            second = best.1;
            best = (i, d);
        } else if d < second {
            second = d;
        }
    }
    if second <= 2.0 * best.1 || second <= threshold {
        return Err(Error::DegenerateSpectrum { separation: second });
    }
    Ok(best.0)
}

fn build(
    m: &CMatrix,
    right: &Decomposition,
    left: &Decomposition,
    j: usize,
    i: usize,
    opts: &EigOptions,
) -> Result<EigenTriple> {
    let mnorm = m.norm();
    let t = EigenTriple::from_raw(
        right.values[j],
        right.vectors.column(j).into_owned(),
        left.vectors.column(i).into_owned(),
    );
    let res = t.residual(m);
    if res > opts.residual_rel * mnorm.max(f64::MIN_POSITIVE) {
        log::warn!("eigentriple residual {res:.3e} exceeds tolerance");
    }
    Ok(t)
}

/// All eigentriples, with left eigenvectors from an independent decomposition of `Mᴴ`.
pub fn eig_pairs(m: &CMatrix) -> Result<Vec<EigenTriple>> {
    eig_pairs_with(m, &EigOptions::default())
}

pub fn eig_pairs_with(m: &CMatrix, opts: &EigOptions) -> Result<Vec<EigenTriple>> {
    require_square(m)?;
    let right = decompose(m)?;
    let threshold = opts.gap_rel * m.norm();
    let n = right.values.len();
    if n > 1 {
        let gap = (0..n)
            .map(|j| separation(&right.values, j))
            .fold(f64::INFINITY, f64::min);
        if gap <= threshold {
            return Err(Error::DegenerateSpectrum { separation: gap });
        }
    }
    let left = decompose(&m.adjoint())?;
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let i = match_left(&left.values, right.values[j], threshold)?;
        if std::mem::replace(&mut used[i], true) {
            return Err(Error::DegenerateSpectrum { separation: 0.0 });
        }
        out.push(build(m, &right, &left, j, i, opts)?);
    }
    Ok(out)
}

/// Index of the value closest to `target`; exact ties go to the smaller imaginary part.
pub fn nearest_index(values: &[C64], target: C64) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        let d = (v - target).norm();
        let db = (values[best] - target).norm();
        if (d - db).abs() <= 1e-14 * (1.0 + target.norm()) {
            log::debug!("two eigenvalues equidistant from target; taking smaller imaginary part");
            if v.im < values[best].im {
                best = i;
            }
        } else if d < db {
            best = i;
        }
    }
    best
}

/// The eigentriple whose eigenvalue is nearest to `target`.
pub fn nearest_triple(m: &CMatrix, target: C64) -> Result<EigenTriple> {
    nearest_triple_with(m, target, &EigOptions::default())
}

pub fn nearest_triple_with(m: &CMatrix, target: C64, opts: &EigOptions) -> Result<EigenTriple> {
    require_square(m)?;
    let right = decompose(m)?;
    let j = nearest_index(&right.values, target);
    if right.values.len() > 1 {
        let gap = separation(&right.values, j);
        if gap <= opts.gap_rel * m.norm() {
            return Err(Error::DegenerateSpectrum { separation: gap });
        }
    }
    let left = decompose(&m.adjoint())?;
    let i = match_left(&left.values, right.values[j], opts.gap_rel * m.norm())?;
    build(m, &right, &left, j, i, opts)
}
