use crate::{CMatrix, Error, Mask, Result};

/// Admissible perturbation class.
#[derive(Clone, Debug, PartialEq)]
pub enum StructureMode {
    ComplexFull,
    RealFull,
    /// Complex perturbations supported on the mask.
    ComplexPattern(Mask),
    /// Real perturbations supported on the mask.
    RealPattern(Mask),
}

impl StructureMode {
    pub fn is_real(&self) -> bool {
        matches!(
            self,
            StructureMode::RealFull | StructureMode::RealPattern(_)
        )
    }

    pub fn mask(&self) -> Option<&Mask> {
        match self {
            StructureMode::ComplexPattern(m) | StructureMode::RealPattern(m) => Some(m),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StructureMode::ComplexFull => "complex",
            StructureMode::RealFull => "real",
            StructureMode::ComplexPattern(_) => "pattern-complex",
            StructureMode::RealPattern(_) => "pattern-real",
        }
    }

    /// Checks the mode against the matrix it will perturb.
    pub fn validate(&self, a: &CMatrix) -> Result<()> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::InvalidInput(
                "matrix must be square and nonempty".into(),
            ));
        }
        if let Some(m) = self.mask() {
            if m.shape() != a.shape() {
                return Err(Error::InvalidInput(
                    "mask shape differs from matrix shape".into(),
                ));
            }
            if !m.iter().any(|&b| b) {
                return Err(Error::InvalidInput("pattern mask is empty".into()));
            }
        }
        if self.is_real() && a.iter().any(|c| c.im != 0.0) {
            return Err(Error::InvalidInput(
                "real structure requires a real matrix".into(),
            ));
        }
        Ok(())
    }
}

/// Mask of the nonzero entries of `a`.
pub fn nonzero_mask(a: &CMatrix) -> Mask {
    a.map(|c| c.re != 0.0 || c.im != 0.0)
}
