//! Two-matrix means and metrics on the SPD cone.
//!
//! * `geometric_mean`: `A #ₜ B = A^{1/2} (A^{-1/2} B A^{-1/2})ᵗ A^{1/2}`, the
//!   geodesic of the affine-invariant (trace) metric.
//! * `riemannian_distance`: `‖log A^{-1/2} B A^{-1/2}‖_F`.
//! * `wasserstein_distance`: `[tr((A+B)/2) − tr(A^{1/2} B A^{1/2})^{1/2}]^{1/2}`.
//! * `wasserstein_geodesic`: `(1−t)²A + t²B + t(1−t)[(AB)^{1/2} + (BA)^{1/2}]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{congruence, Matrix, SymMatrix};
use crate::spd::SpdMatrix;

/// Radicands in `[-RADICAND_CLAMP, 0)` are treated as zero.
pub const RADICAND_CLAMP: f64 = 1e-12;

/// Position along a geodesic, `0 ≤ t ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GeodesicParam(f64);

impl GeodesicParam {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "geodesic parameter must lie in [0, 1], got {t}"
            )));
        }
        Ok(Self(t))
    }

    pub const HALF: GeodesicParam = GeodesicParam(0.5);

    pub fn value(self) -> f64 {
        self.0
    }
}

fn ensure_same_dim(a: &SpdMatrix, b: &SpdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Weighted geometric mean `A #ₜ B`.
pub fn geometric_mean(a: &SpdMatrix, b: &SpdMatrix, t: GeodesicParam) -> Result<SpdMatrix> {
    ensure_same_dim(a, b)?;
    let t = t.value();
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    let half = a.sqrt();
    let inner = SpdMatrix::new(congruence(a.inv_sqrt().as_matrix(), b.as_sym())?)?;
    SpdMatrix::new(congruence(half.as_matrix(), inner.power(t)?.as_sym())?)
}

/// Affine-invariant distance `δ(A, B) = ‖log A^{-1/2} B A^{-1/2}‖_F`.
pub fn riemannian_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    ensure_same_dim(a, b)?;
    let inner = congruence(a.inv_sqrt().as_matrix(), b.as_sym())?;
    let eig = inner.eigh()?;
    let mut sum = 0.0;
    for &l in eig.eigenvalues() {
        if l <= 0.0 {
            return Err(Error::Domain {
                function: "log",
                eigenvalue: l,
            });
        }
        sum += l.ln().powi(2);
    }
    Ok(sum.sqrt())
}

/// `tr (A^{1/2} B A^{1/2})^{1/2}`.
pub fn fidelity(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    ensure_same_dim(a, b)?;
    let inner = SpdMatrix::new(congruence(a.sqrt().as_matrix(), b.as_sym())?)?;
    Ok(inner.eigen().eigenvalues().iter().map(|l| l.sqrt()).sum())
}

/// Bures–Wasserstein distance.
///
/// Evaluated as `‖A^{-1/2}(A − S)‖_F / √2` with `S = (A^{1/2} B A^{1/2})^{1/2}`,
/// which expands to the trace formula (`tr(S A⁻¹ S) = tr B`) but involves no
/// subtraction of traces, so `d(A, A)` comes out at roundoff level instead of
/// its square root.
pub fn wasserstein_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    ensure_same_dim(a, b)?;
    let s = SpdMatrix::new(congruence(a.sqrt().as_matrix(), b.as_sym())?)?.sqrt();
    let diff = a.as_matrix().try_sub(s.as_matrix())?;
    let scaled = a.inv_sqrt().as_matrix() * &diff;
    Ok(scaled.frobenius_norm() / 2f64.sqrt())
}

/// Bures–Wasserstein distance straight from the trace formula
/// `[tr((A+B)/2) − tr(A^{1/2} B A^{1/2})^{1/2}]^{1/2}`.
pub fn wasserstein_distance_trace_formula(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    let radicand = 0.5 * (a.trace() + b.trace()) - fidelity(a, b)?;
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -RADICAND_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand(radicand))
    }
}

fn rotation(theta: f64, reflect: bool) -> Matrix {
    let (s, c) = theta.sin_cos();
    if reflect {
        Matrix::from_fn(2, |i, j| [[c, s], [s, -c]][i][j])
    } else {
        Matrix::from_fn(2, |i, j| [[c, -s], [s, c]][i][j])
    }
}

/// Brute-force evaluation of `(1/√2) min_U ‖A^{1/2} − B^{1/2} U‖_F` over the
/// 2×2 orthogonal group (rotations and reflections).
///
/// Each branch is sampled on `grid_size` equally spaced angles. The best
/// sample is then refined twice: the bracket `[θ* − h, θ* + h]` around the
/// current best angle is resampled at `grid_size` points, shrinking `h` by a
/// factor of `grid_size / 2` per pass.
pub fn wasserstein_distance_oracle_2x2(
    a: &SpdMatrix,
    b: &SpdMatrix,
    grid_size: usize,
) -> Result<f64> {
    ensure_same_dim(a, b)?;
    if a.dim() != 2 {
        return Err(Error::InvalidParameter(format!(
            "orthogonal-grid oracle needs 2x2 inputs, got dimension {}",
            a.dim()
        )));
    }
    if grid_size < 4 {
        return Err(Error::InvalidParameter(format!(
            "grid_size must be at least 4, got {grid_size}"
        )));
    }
    let ra = a.sqrt();
    let rb = b.sqrt();
    let objective = |theta: f64, reflect: bool| -> f64 {
        let bu = rb.as_matrix() * &rotation(theta, reflect);
        ra.as_matrix().try_sub(&bu).expect("2x2").frobenius_norm()
    };

    let mut best = f64::INFINITY;
    for reflect in [false, true] {
        let mut step = 2.0 * PI / grid_size as f64;
        let (mut center, mut value) = (0.0, f64::INFINITY);
        for k in 0..grid_size {
            let theta = k as f64 * step;
            let v = objective(theta, reflect);
            if v < value {
                center = theta;
                value = v;
            }
        }
        for _ in 0..2 {
            let lo = center - step;
            let fine = 2.0 * step / grid_size as f64;
            for k in 0..=grid_size {
                let theta = lo + k as f64 * fine;
                let v = objective(theta, reflect);
                if v < value {
                    center = theta;
                    value = v;
                }
            }
            step = fine;
        }
        best = best.min(value);
    }
    Ok(best / 2f64.sqrt())
}

/// `(AB)^{1/2}`, through the similarity `A^{1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}`.
pub fn product_sqrt(a: &SpdMatrix, b: &SpdMatrix) -> Result<Matrix> {
    ensure_same_dim(a, b)?;
    let half = a.sqrt();
    let inner = SpdMatrix::new(congruence(half.as_matrix(), b.as_sym())?)?.sqrt();
    Ok(&(half.as_matrix() * inner.as_matrix()) * a.inv_sqrt().as_matrix())
}

/// Point `A ◇ₜ B` on the Wasserstein geodesic.
pub fn wasserstein_geodesic(a: &SpdMatrix, b: &SpdMatrix, t: GeodesicParam) -> Result<SpdMatrix> {
    ensure_same_dim(a, b)?;
    let t = t.value();
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    let ab = product_sqrt(a, b)?;
    // (BA)^{1/2} = ((AB)^{1/2})ᵀ for SPD A, B.
    let cross = ab.try_add(&ab.transpose())?;
    let s = 1.0 - t;
    let out = a
        .as_matrix()
        .scale(s * s)
        .try_add(&b.as_matrix().scale(t * t))?
        .try_add(&cross.scale(t * s))?;
    SpdMatrix::new(out.symmetrize())
}

/// Both sides of `d(A◇ₜB, A◇ₜC) ≤ t·√(λ₁(A)/2)·‖A⁻¹#B − A⁻¹#C‖_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub lambda1: f64,
}

impl DistanceBoundReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

pub fn geodesic_perturbation_bound(
    a: &SpdMatrix,
    b: &SpdMatrix,
    c: &SpdMatrix,
    t: GeodesicParam,
) -> Result<DistanceBoundReport> {
    ensure_same_dim(a, b)?;
    ensure_same_dim(a, c)?;
    let lhs = wasserstein_distance(
        &wasserstein_geodesic(a, b, t)?,
        &wasserstein_geodesic(a, c, t)?,
    )?;
    let a_inv = a.inverse();
    let gb = geometric_mean(&a_inv, b, GeodesicParam::HALF)?;
    let gc = geometric_mean(&a_inv, c, GeodesicParam::HALF)?;
    let diff: SymMatrix = gb.as_sym().try_sub(gc.as_sym())?;
    let lambda1 = a.eigen().max_eigenvalue();
    let rhs = t.value() * (lambda1 / 2.0).sqrt() * diff.frobenius_norm();
    Ok(DistanceBoundReport { lhs, rhs, lambda1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_pair() -> (SpdMatrix, SpdMatrix) {
        (
            SpdMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 5.0]]).unwrap(),
            SpdMatrix::from_rows(&[vec![4.0, 4.0], vec![4.0, 5.0]]).unwrap(),
        )
    }

    fn t(v: f64) -> GeodesicParam {
        GeodesicParam::new(v).unwrap()
    }

    #[test]
    fn param_range() {
        assert!(GeodesicParam::new(-0.1).is_err());
        assert!(GeodesicParam::new(1.5).is_err());
        assert!(GeodesicParam::new(f64::NAN).is_err());
    }

    #[test]
    fn geometric_mean_idempotent_and_commuting() {
        let (a, _) = worked_pair();
        let g = geometric_mean(&a, &a, t(0.7)).unwrap();
        assert!(g.as_sym().relative_distance(a.as_sym()) < 1e-13);

        let x = SpdMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        let y = SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let g = geometric_mean(&x, &y, GeodesicParam::HALF).unwrap();
        assert!(
            g.as_sym()
                .relative_distance(&SymMatrix::from_diagonal(&[2.0, 2.0]))
                < 1e-14
        );
    }

    #[test]
    fn riccati_residual() {
        let (a, b) = worked_pair();
        let x = geometric_mean(&a, &b, GeodesicParam::HALF).unwrap();
        let xax = congruence(x.as_matrix(), a.inverse().as_sym()).unwrap();
        assert!(xax.relative_distance(b.as_sym()) <= 1e-10);
    }

    #[test]
    fn riemannian_distance_examples() {
        let (a, b) = worked_pair();
        assert!(riemannian_distance(&a, &a).unwrap() < 1e-12);
        let e = SpdMatrix::from_diagonal(&[2f64.exp(), (-2f64).exp()]).unwrap();
        let d = riemannian_distance(&SpdMatrix::identity(2), &e).unwrap();
        assert!((d - 8f64.sqrt()).abs() < 1e-13);
        let d1 = riemannian_distance(&a, &b).unwrap();
        let d2 = riemannian_distance(&b, &a).unwrap();
        assert!((d1 - d2).abs() < 1e-10);
    }

    #[test]
    fn wasserstein_distance_examples() {
        let (a, b) = worked_pair();
        assert!(wasserstein_distance(&a, &a).unwrap() < 1e-10);
        let d = SpdMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let v = wasserstein_distance(&SpdMatrix::identity(2), &d).unwrap();
        assert!((v - 2.5f64.sqrt()).abs() < 1e-14);
        let formula = wasserstein_distance(&a, &b).unwrap();
        let oracle = wasserstein_distance_oracle_2x2(&a, &b, 720).unwrap();
        assert!((formula - oracle).abs() < 1e-6, "{formula} vs {oracle}");
        let trace = wasserstein_distance_trace_formula(&a, &b).unwrap();
        assert!((formula - trace).abs() < 1e-12);
    }

    #[test]
    fn trace_formula_clamps_tiny_negative_radicand() {
        let (a, _) = worked_pair();
        let d = wasserstein_distance_trace_formula(&a, &a).unwrap();
        assert!(d < 1e-6);
    }

    #[test]
    fn oracle_trivial_cases() {
        let (a, _) = worked_pair();
        assert!(wasserstein_distance_oracle_2x2(&a, &a, 720).unwrap() < 1e-8);
        let d = SpdMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let v = wasserstein_distance_oracle_2x2(&SpdMatrix::identity(2), &d, 720).unwrap();
        assert!((v - 2.5f64.sqrt()).abs() < 1e-6);
        let i3 = SpdMatrix::identity(3);
        assert!(wasserstein_distance_oracle_2x2(&i3, &i3, 720).is_err());
    }

    #[test]
    fn geodesic_endpoints_and_midpoint() {
        let (a, b) = worked_pair();
        assert_eq!(wasserstein_geodesic(&a, &b, t(0.0)).unwrap(), a);
        assert_eq!(wasserstein_geodesic(&a, &b, t(1.0)).unwrap(), b);
        let mid = wasserstein_geodesic(&a, &b, GeodesicParam::HALF).unwrap();
        let expected = SymMatrix::from_rows(&[vec![2.25, 3.0], vec![3.0, 5.0]]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((mid.get(i, j) - expected.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perturbation_bound_trivial_cases() {
        let (a, b) = worked_pair();
        let r = geodesic_perturbation_bound(&a, &b, &b, t(0.4)).unwrap();
        assert!(r.lhs < 1e-10);
        assert_eq!(r.rhs, 0.0);
        let c = SpdMatrix::from_diagonal(&[2.0, 3.0]).unwrap();
        let r = geodesic_perturbation_bound(&a, &b, &c, t(0.0)).unwrap();
        assert!(r.lhs < 1e-10);
        assert_eq!(r.rhs, 0.0);
        assert!((r.lambda1 - a.eigen().max_eigenvalue()).abs() == 0.0);
        let r = geodesic_perturbation_bound(&a, &b, &c, t(0.8)).unwrap();
        assert!(r.holds(1e-9), "{r:?}");
    }
}
