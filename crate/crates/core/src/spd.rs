//! Symmetric positive definite matrices and their spectral functional calculus.

use std::fmt;

use crate::eigen::EigenDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};

/// Admission threshold: `λ_min > SPD_RATIO · λ_max`.
pub const SPD_RATIO: f64 = 1e-12;

/// A point of the SPD cone. The eigendecomposition computed during admission
/// is kept and reused by every spectral function.
#[derive(Clone)]
pub struct SpdMatrix {
    sym: SymMatrix,
    eigen: EigenDecomposition,
}

impl SpdMatrix {
    pub fn new(sym: SymMatrix) -> Result<Self> {
        let eigen = sym.eigh()?;
        Self::check_admissible(&eigen)?;
        Ok(Self { sym, eigen })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(rows)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::from_diagonal(diag))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(SymMatrix::identity(dim)).expect("identity is SPD")
    }

    fn check_admissible(eigen: &EigenDecomposition) -> Result<()> {
        let (lo, hi) = (eigen.min_eigenvalue(), eigen.max_eigenvalue());
        if !(hi > 0.0 && lo > SPD_RATIO * hi) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: lo,
                max_eigenvalue: hi,
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.sym.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sym.get(i, j)
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.sym
    }

    pub fn as_matrix(&self) -> &Matrix {
        self.sym.as_matrix()
    }

    pub fn into_sym(self) -> SymMatrix {
        self.sym
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.sym.rows()
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eigen
    }

    pub fn trace(&self) -> f64 {
        self.sym.trace()
    }

    /// Determinant as the product of eigenvalues.
    pub fn det(&self) -> f64 {
        self.eigen.eigenvalues().iter().product()
    }

    pub fn log_det(&self) -> f64 {
        self.eigen.eigenvalues().iter().map(|l| l.ln()).sum()
    }

    pub fn condition_number(&self) -> f64 {
        self.eigen.max_eigenvalue() / self.eigen.min_eigenvalue()
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigen.max_eigenvalue()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.sym.frobenius_norm()
    }

    /// Positive multiple `alpha · self`.
    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "SPD scale factor must be positive, got {alpha}"
            )));
        }
        Self::new(self.sym.scale(alpha))
    }

    pub fn sqrt(&self) -> SpdMatrix {
        self.spectral_spd(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> SpdMatrix {
        self.spectral_spd(|l| 1.0 / l.sqrt())
    }

    pub fn inverse(&self) -> SpdMatrix {
        self.spectral_spd(|l| 1.0 / l)
    }

    pub fn power(&self, p: f64) -> Result<SpdMatrix> {
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!("power exponent {p}")));
        }
        if p == 0.0 {
            return Ok(SpdMatrix::identity(self.dim()));
        }
        Self::from_eigen(self.eigen.map_spectrum(|l| l.powf(p)))
    }

    pub fn log(&self) -> SymMatrix {
        self.eigen.map(f64::ln)
    }

    /// Positive function of the spectrum. The result shares `Q` with `self`,
    /// so its cached decomposition is exact by construction.
    fn spectral_spd(&self, f: impl Fn(f64) -> f64) -> SpdMatrix {
        // sqrt, inv_sqrt and inverse never increase the condition number.
        Self::from_eigen(self.eigen.map_spectrum(f)).expect("spectral image stays SPD")
    }

    fn from_eigen(eigen: EigenDecomposition) -> Result<Self> {
        Self::check_admissible(&eigen)?;
        Ok(Self {
            sym: eigen.recompose(),
            eigen,
        })
    }
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.sym == other.sym
    }
}

impl fmt::Debug for SpdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.sym.fmt(f)
    }
}

impl TryFrom<SymMatrix> for SpdMatrix {
    type Error = Error;
    fn try_from(value: SymMatrix) -> Result<Self> {
        SpdMatrix::new(value)
    }
}

/// Scalar function applied through the spectral decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFn {
    Sqrt,
    InvSqrt,
    Log,
    /// Matrix exponential; defined for every symmetric input.
    Exp,
    Power(f64),
    Inverse,
}

impl SpectralFn {
    fn name(&self) -> &'static str {
        match self {
            SpectralFn::Sqrt => "sqrt",
            SpectralFn::InvSqrt => "inv_sqrt",
            SpectralFn::Log => "log",
            SpectralFn::Exp => "exp",
            SpectralFn::Power(_) => "power",
            SpectralFn::Inverse => "inverse",
        }
    }

    fn eval(&self, l: f64) -> Option<f64> {
        let v = match *self {
            SpectralFn::Exp => l.exp(),
            _ if l <= 0.0 => return None,
            SpectralFn::Sqrt => l.sqrt(),
            SpectralFn::InvSqrt => 1.0 / l.sqrt(),
            SpectralFn::Log => l.ln(),
            SpectralFn::Power(p) => l.powf(p),
            SpectralFn::Inverse => 1.0 / l,
        };
        v.is_finite().then_some(v)
    }
}

/// `Q · diag(f(λ)) · Qᵀ` for any symmetric input, failing with a domain error
/// when `f` is undefined on part of the spectrum.
pub fn apply_spectral(a: &SymMatrix, f: SpectralFn) -> Result<SymMatrix> {
    let eig = a.eigh()?;
    apply_to_eigen(&eig, f)
}

fn apply_to_eigen(eig: &EigenDecomposition, f: SpectralFn) -> Result<SymMatrix> {
    for &l in eig.eigenvalues() {
        if f.eval(l).is_none() {
            return Err(Error::Domain {
                function: f.name(),
                eigenvalue: l,
            });
        }
    }
    Ok(eig.map(|l| f.eval(l).unwrap()))
}

/// Matrix exponential of a symmetric matrix.
pub fn exp_of_sym(a: &SymMatrix) -> Result<SpdMatrix> {
    let eig = a.eigh()?;
    if let Some(&l) = eig.eigenvalues().iter().find(|l| !l.exp().is_finite()) {
        return Err(Error::Domain {
            function: "exp",
            eigenvalue: l,
        });
    }
    SpdMatrix::from_eigen(eig.map_spectrum(f64::exp))
}
