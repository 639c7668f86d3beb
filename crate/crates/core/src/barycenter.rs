//! Weighted n-matrix means: the Wasserstein barycenter, the Karcher mean, and
//! the Loewner bounds that sandwich the barycenter.
//!
//! The barycenter `Ω(ω; A₁,…,Aₙ)` is the unique SPD solution of
//!
//! ```text
//! X = Σⱼ wⱼ (X^{1/2} Aⱼ X^{1/2})^{1/2}      ⇔      I = Σⱼ wⱼ (Aⱼ # X⁻¹)
//! ```
//!
//! and is found by iterating `X ← X^{-1/2} S(X)² X^{-1/2}` where `S(X)` is the
//! right-hand side above. Convergence is certified by the relative residual of
//! the equation itself, not by the step size.

use crate::error::{Error, Result};
use crate::geometry::{geometric_mean, GeodesicParam};
use crate::linalg::{congruence, loewner_geq, LoewnerVerdict, SymMatrix};
use crate::spd::{exp_of_sym, SpdMatrix};

/// Weights already summing to one within this tolerance are kept verbatim.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Positive probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates positivity and normalizes to unit sum.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("weight vector is empty".into()));
        }
        if let Some((i, v)) = w
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "weight {i} must be positive and finite, got {v}"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() <= WEIGHT_SUM_TOL {
            return Ok(Self(w));
        }
        Ok(Self(w.into_iter().map(|v| v / sum).collect()))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A barycenter instance: matrices of a common dimension plus weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanProblem {
    matrices: Vec<SpdMatrix>,
    weights: WeightVector,
}

impl MeanProblem {
    pub fn new(matrices: Vec<SpdMatrix>, weights: WeightVector) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidParameter("n ≥ 1 required".into()));
        }
        if matrices.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} matrices but {} weights",
                matrices.len(),
                weights.len()
            )));
        }
        let dim = matrices[0].dim();
        if let Some(m) = matrices.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.dim(),
            });
        }
        Ok(Self { matrices, weights })
    }

    pub fn with_uniform_weights(matrices: Vec<SpdMatrix>) -> Result<Self> {
        let w = WeightVector::uniform(matrices.len().max(1))?;
        Self::new(matrices, w)
    }

    pub fn matrices(&self) -> &[SpdMatrix] {
        &self.matrices
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, &SpdMatrix)> {
        self.weights.0.iter().copied().zip(&self.matrices)
    }

    /// `Σ wⱼ f(Aⱼ)` for a symmetric-valued `f`.
    fn weighted_sum(&self, f: impl Fn(&SpdMatrix) -> Result<SymMatrix>) -> Result<SymMatrix> {
        let mut acc = SymMatrix::zeros(self.dim());
        for (w, a) in self.pairs() {
            acc = acc.try_add(&f(a)?.scale(w))?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialPoint {
    #[default]
    ArithmeticMean,
    Identity,
    Given(SpdMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub initial: InitialPoint,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter: 500,
            initial: InitialPoint::ArithmeticMean,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_initial(mut self, initial: InitialPoint) -> Self {
        self.initial = initial;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if let InitialPoint::Given(x) = &self.initial {
            if x.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: x.dim(),
                });
            }
        }
        Ok(())
    }

    fn initial_point(&self, p: &MeanProblem) -> Result<SpdMatrix> {
        Ok(match &self.initial {
            InitialPoint::ArithmeticMean => arithmetic_mean(p)?,
            InitialPoint::Identity => SpdMatrix::identity(p.dim()),
            InitialPoint::Given(x) => x.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub mean: SpdMatrix,
    /// Number of updates applied to the initial point.
    pub iterations: usize,
    /// Convergence measure at `mean` (see the individual solvers).
    pub residual: f64,
    pub converged: bool,
    /// Residual at every visited iterate, starting with the initial point.
    pub residual_history: Vec<f64>,
}

/// `Σ wⱼ Aⱼ`.
pub fn arithmetic_mean(p: &MeanProblem) -> Result<SpdMatrix> {
    SpdMatrix::new(p.weighted_sum(|a| Ok(a.as_sym().clone()))?)
}

/// `(Σ wⱼ Aⱼ⁻¹)⁻¹`.
pub fn harmonic_mean(p: &MeanProblem) -> Result<SpdMatrix> {
    Ok(inverse_weighted_sum(p)?.inverse())
}

/// `Σ wⱼ Aⱼ⁻¹`.
fn inverse_weighted_sum(p: &MeanProblem) -> Result<SpdMatrix> {
    SpdMatrix::new(p.weighted_sum(|a| Ok(a.inverse().into_sym()))?)
}

/// `S(X) = Σ wⱼ (X^{1/2} Aⱼ X^{1/2})^{1/2}`.
fn fixed_point_rhs(x: &SpdMatrix, p: &MeanProblem) -> Result<SymMatrix> {
    let half = x.sqrt();
    p.weighted_sum(|a| {
        let inner = SpdMatrix::new(congruence(half.as_matrix(), a.as_sym())?)?;
        Ok(inner.sqrt().into_sym())
    })
}

fn check_dims(x: &SpdMatrix, p: &MeanProblem) -> Result<()> {
    if x.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}

/// `‖X − S(X)‖_F / ‖X‖_F`.
pub fn residual(x: &SpdMatrix, p: &MeanProblem) -> Result<f64> {
    check_dims(x, p)?;
    let rhs = fixed_point_rhs(x, p)?;
    Ok(x.as_sym().try_sub(&rhs)?.frobenius_norm() / x.frobenius_norm())
}

/// `‖I − Σ wⱼ (Aⱼ # X⁻¹)‖_F`.
pub fn equivalent_equation_residual(x: &SpdMatrix, p: &MeanProblem) -> Result<f64> {
    check_dims(x, p)?;
    let x_inv = x.inverse();
    let sum = p.weighted_sum(|a| Ok(geometric_mean(a, &x_inv, GeodesicParam::HALF)?.into_sym()))?;
    Ok(SymMatrix::identity(p.dim()).try_sub(&sum)?.frobenius_norm())
}

/// Wasserstein barycenter by the fixed-point map
/// `X ← X^{-1/2} S(X)² X^{-1/2}`.
///
/// `residual` in the result is the relative residual of `X = S(X)`.
pub fn wasserstein_mean(p: &MeanProblem, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate(p.dim())?;
    let mut x = cfg.initial_point(p)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let s = fixed_point_rhs(&x, p)?;
        let res = x.as_sym().try_sub(&s)?.frobenius_norm() / x.frobenius_norm();
        history.push(res);
        if res <= cfg.rel_tol || iterations == cfg.max_iter || !res.is_finite() {
            return Ok(SolverResult {
                mean: x,
                iterations,
                residual: res,
                converged: res <= cfg.rel_tol,
                residual_history: history,
            });
        }
        let s_squared = (s.as_matrix() * s.as_matrix()).symmetrize();
        let next = congruence(x.inv_sqrt().as_matrix(), &s_squared)?;
        iterations += 1;
        x = SpdMatrix::new(next).map_err(|e| Error::Solver {
            iteration: iterations,
            reason: e.to_string(),
        })?;
    }
}

/// Karcher (affine-invariant) mean by the unit-step fixed point
/// `X ← X^{1/2} exp(G) X^{1/2}`, `G = Σ wⱼ log(X^{-1/2} Aⱼ X^{-1/2})`.
///
/// `residual` in the result is `‖G‖_F`, the Riemannian gradient norm.
pub fn karcher_mean(p: &MeanProblem, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate(p.dim())?;
    let mut x = cfg.initial_point(p)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let inv_half = x.inv_sqrt();
        let g = p.weighted_sum(|a| {
            Ok(SpdMatrix::new(congruence(inv_half.as_matrix(), a.as_sym())?)?.log())
        })?;
        let res = g.frobenius_norm();
        history.push(res);
        if res <= cfg.rel_tol || iterations == cfg.max_iter || !res.is_finite() {
            return Ok(SolverResult {
                mean: x,
                iterations,
                residual: res,
                converged: res <= cfg.rel_tol,
                residual_history: history,
            });
        }
        let step = exp_of_sym(&g)?;
        let next = congruence(x.sqrt().as_matrix(), step.as_sym())?;
        iterations += 1;
        x = SpdMatrix::new(next).map_err(|e| Error::Solver {
            iteration: iterations,
            reason: e.to_string(),
        })?;
    }
}

/// Loewner bounds for the barycenter that need only the inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    /// `2I − Σ wⱼ Aⱼ⁻¹` (may be indefinite).
    pub lower_lie_trotter: SymMatrix,
    /// `Σ wⱼ Aⱼ`.
    pub upper_arithmetic: SpdMatrix,
    /// `[2I − Σ wⱼ Aⱼ]⁻¹`, present only when `Σ wⱼ Aⱼ < 2I`.
    pub upper_inverse: Option<SpdMatrix>,
    /// `(Σ wⱼ ‖Aⱼ‖^{1/2})²` for the operator norm.
    pub opnorm_bound: f64,
}

/// Verdicts of a [`BoundsReport`] against a computed mean.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundVerdicts {
    /// `Σ wⱼ Aⱼ ≥ Ω`.
    pub arithmetic: LoewnerVerdict,
    /// `Ω ≥ 2I − Σ wⱼ Aⱼ⁻¹`.
    pub lie_trotter: LoewnerVerdict,
    /// `[2I − Σ wⱼ Aⱼ]⁻¹ ≥ Ω`.
    pub inverse: Option<LoewnerVerdict>,
    pub opnorm_mean: f64,
    pub opnorm_holds: bool,
}

impl BoundVerdicts {
    pub fn all_hold(&self) -> bool {
        self.arithmetic.holds
            && self.lie_trotter.holds
            && self.inverse.is_none_or(|v| v.holds)
            && self.opnorm_holds
    }
}

impl BoundsReport {
    /// Compares every bound with `mean` using a relative Loewner tolerance.
    /// The operator-norm bound gets an absolute slack of `1e-9`.
    pub fn check_against(&self, mean: &SpdMatrix, rel_tol: f64) -> Result<BoundVerdicts> {
        let arithmetic = loewner_geq(self.upper_arithmetic.as_sym(), mean.as_sym(), rel_tol)?;
        let lie_trotter = loewner_geq(mean.as_sym(), &self.lower_lie_trotter, rel_tol)?;
        let inverse = self
            .upper_inverse
            .as_ref()
            .map(|u| loewner_geq(u.as_sym(), mean.as_sym(), rel_tol))
            .transpose()?;
        let opnorm_mean = mean.operator_norm();
        Ok(BoundVerdicts {
            arithmetic,
            lie_trotter,
            inverse,
            opnorm_mean,
            opnorm_holds: opnorm_mean <= self.opnorm_bound + 1e-9,
        })
    }
}

pub fn bounds_report(p: &MeanProblem) -> Result<BoundsReport> {
    let dim = p.dim();
    let two = SymMatrix::identity(dim).scale(2.0);
    let upper_arithmetic = arithmetic_mean(p)?;
    let lower_lie_trotter = two.try_sub(inverse_weighted_sum(p)?.as_sym())?;
    let gap = two.try_sub(upper_arithmetic.as_sym())?;
    let upper_inverse = if gap.eigh()?.min_eigenvalue() > 0.0 {
        SpdMatrix::new(gap).ok().map(|g| g.inverse())
    } else {
        None
    };
    let opnorm_bound = p
        .pairs()
        .map(|(w, a)| w * a.operator_norm().sqrt())
        .sum::<f64>()
        .powi(2);
    Ok(BoundsReport {
        lower_lie_trotter,
        upper_arithmetic,
        upper_inverse,
        opnorm_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetReport {
    pub det_mean: f64,
    /// `Π (det Aⱼ)^{wⱼ}`.
    pub det_geo_product: f64,
    pub holds: bool,
}

/// `det Ω ≥ Π (det Aⱼ)^{wⱼ}`, with slack `1e-9 · max(1, rhs)`.
pub fn det_inequality_check(p: &MeanProblem, mean: &SpdMatrix) -> Result<DetReport> {
    check_dims(mean, p)?;
    let det_mean = mean.det();
    let det_geo_product = p.pairs().map(|(w, a)| w * a.log_det()).sum::<f64>().exp();
    Ok(DetReport {
        det_mean,
        det_geo_product,
        holds: det_mean >= det_geo_product - 1e-9 * det_geo_product.max(1.0),
    })
}

/// `log det(Σ wⱼ Aⱼ)` against `Σ wⱼ log det Aⱼ`.
pub fn log_det_concavity(p: &MeanProblem) -> Result<(f64, f64)> {
    let lhs = arithmetic_mean(p)?.log_det();
    let rhs = p.pairs().map(|(w, a)| w * a.log_det()).sum();
    Ok((lhs, rhs))
}

/// Orderings between the bounds themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    /// `(Σ wⱼ Aⱼ⁻¹)⁻¹ ≥ 2I − Σ wⱼ Aⱼ⁻¹`.
    pub harmonic_above_lower: LoewnerVerdict,
    /// `[2I − Σ wⱼ Aⱼ]⁻¹ ≥ Σ wⱼ Aⱼ`, when the left side exists.
    pub inverse_above_arithmetic: Option<LoewnerVerdict>,
    /// `Σ wⱼ Aⱼ ≥ (Σ wⱼ Aⱼ⁻¹)⁻¹`.
    pub arithmetic_above_harmonic: LoewnerVerdict,
    /// `(Σ wⱼ ‖Aⱼ‖^{1/2})²`.
    pub opnorm_bound: f64,
    /// `Σ wⱼ ‖Aⱼ‖`.
    pub opnorm_average: f64,
    pub opnorm_holds: bool,
}

impl OrderingReport {
    pub fn all_hold(&self) -> bool {
        self.harmonic_above_lower.holds
            && self.inverse_above_arithmetic.is_none_or(|v| v.holds)
            && self.arithmetic_above_harmonic.holds
            && self.opnorm_holds
    }
}

pub fn bound_ordering_checks(p: &MeanProblem, rel_tol: f64) -> Result<OrderingReport> {
    let bounds = bounds_report(p)?;
    let harmonic = harmonic_mean(p)?;
    let harmonic_above_lower = loewner_geq(harmonic.as_sym(), &bounds.lower_lie_trotter, rel_tol)?;
    let inverse_above_arithmetic = bounds
        .upper_inverse
        .as_ref()
        .map(|u| loewner_geq(u.as_sym(), bounds.upper_arithmetic.as_sym(), rel_tol))
        .transpose()?;
    let arithmetic_above_harmonic =
        loewner_geq(bounds.upper_arithmetic.as_sym(), harmonic.as_sym(), rel_tol)?;
    let opnorm_average: f64 = p.pairs().map(|(w, a)| w * a.operator_norm()).sum();
    Ok(OrderingReport {
        harmonic_above_lower,
        inverse_above_arithmetic,
        arithmetic_above_harmonic,
        opnorm_bound: bounds.opnorm_bound,
        opnorm_average,
        opnorm_holds: bounds.opnorm_bound <= opnorm_average * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(rows: &[&[f64]]) -> SpdMatrix {
        SpdMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn diag(d: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(d).unwrap()
    }

    fn worked_problem() -> MeanProblem {
        MeanProblem::new(
            vec![
                spd(&[&[1.0, 2.0], &[2.0, 5.0]]),
                spd(&[&[4.0, 4.0], &[4.0, 5.0]]),
            ],
            WeightVector::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap()
    }

    fn worked_mean() -> SpdMatrix {
        spd(&[&[2.25, 3.0], &[3.0, 5.0]])
    }

    fn max_entry_diff(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                m = m.max((a.get(i, j) - b.get(i, j)).abs());
            }
        }
        m
    }

    #[test]
    fn weights_are_normalized_and_validated() {
        let w = WeightVector::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.75]);
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.0]).is_err());
        assert!(WeightVector::new(vec![0.5, f64::NAN]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn problem_validation() {
        assert!(matches!(
            MeanProblem::new(vec![], WeightVector::uniform(1).unwrap()),
            Err(Error::InvalidParameter(msg)) if msg.contains("n ≥ 1")
        ));
        let mixed = MeanProblem::with_uniform_weights(vec![diag(&[1.0]), diag(&[1.0, 2.0])]);
        assert!(matches!(mixed, Err(Error::DimensionMismatch { .. })));
        let count = MeanProblem::new(vec![diag(&[1.0])], WeightVector::uniform(2).unwrap());
        assert!(count.is_err());
    }

    #[test]
    fn arithmetic_and_harmonic() {
        let x = spd(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let p = MeanProblem::with_uniform_weights(vec![x.clone(), x.clone(), x.clone()]).unwrap();
        assert!(
            arithmetic_mean(&p)
                .unwrap()
                .as_sym()
                .relative_distance(x.as_sym())
                < 1e-15
        );
        assert!(
            harmonic_mean(&p)
                .unwrap()
                .as_sym()
                .relative_distance(x.as_sym())
                < 1e-14
        );

        let p =
            MeanProblem::with_uniform_weights(vec![diag(&[1.0, 1.0]), diag(&[3.0, 3.0])]).unwrap();
        assert_eq!(arithmetic_mean(&p).unwrap(), diag(&[2.0, 2.0]));
        let h = harmonic_mean(&p).unwrap();
        assert!(max_entry_diff(&h, &diag(&[1.5, 1.5])) < 1e-14);
    }

    #[test]
    fn worked_example_barycenter() {
        let p = worked_problem();
        let r = wasserstein_mean(&p, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert!(max_entry_diff(&r.mean, &worked_mean()) < 1e-8);
        assert!((r.mean.det() - 2.25).abs() < 1e-8);
        assert!(residual(&worked_mean(), &p).unwrap() <= 1e-10);
        assert!(equivalent_equation_residual(&worked_mean(), &p).unwrap() <= 1e-10);
    }

    #[test]
    fn commuting_closed_form() {
        let p =
            MeanProblem::with_uniform_weights(vec![diag(&[1.0, 4.0]), diag(&[9.0, 16.0])]).unwrap();
        let r = wasserstein_mean(&p, &SolverConfig::default()).unwrap();
        // per entry: (Σ wⱼ √aⱼ)²
        assert!(max_entry_diff(&r.mean, &diag(&[4.0, 9.0])) < 1e-12);
    }

    #[test]
    fn idempotent_for_equal_inputs() {
        let x = spd(&[&[2.0, 0.5, 0.0], &[0.5, 1.0, 0.2], &[0.0, 0.2, 3.0]]);
        let p = MeanProblem::new(
            vec![x.clone(), x.clone(), x.clone()],
            WeightVector::new(vec![0.2, 0.3, 0.5]).unwrap(),
        )
        .unwrap();
        let r = wasserstein_mean(&p, &SolverConfig::default()).unwrap();
        assert!(r.converged && r.iterations <= 2);
        assert!(r.mean.as_sym().relative_distance(x.as_sym()) < 1e-13);
        assert!(residual(&x, &p).unwrap() < 1e-14);
        assert!(equivalent_equation_residual(&x, &p).unwrap() < 1e-13);
        let k = karcher_mean(&p, &SolverConfig::default()).unwrap();
        assert!(k.converged);
        assert!(k.mean.as_sym().relative_distance(x.as_sym()) < 1e-13);
    }

    #[test]
    fn residual_positive_away_from_mean() {
        let p = worked_problem();
        let a = arithmetic_mean(&p).unwrap();
        assert!(residual(&a, &p).unwrap() > 1e-12);
        let far = diag(&[10.0, 0.1]);
        assert!(equivalent_equation_residual(&far, &p).unwrap() > 1e-3);
    }

    #[test]
    fn max_iter_reports_non_convergence() {
        let p = worked_problem();
        let cfg = SolverConfig {
            max_iter: 1,
            initial: InitialPoint::Identity,
            ..SolverConfig::default()
        };
        let r = wasserstein_mean(&p, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.residual_history.len(), 2);
    }

    #[test]
    fn config_validation() {
        let p = worked_problem();
        let bad_tol = SolverConfig::default().with_tol(0.0);
        assert!(wasserstein_mean(&p, &bad_tol).is_err());
        let bad_init = SolverConfig::default().with_initial(InitialPoint::Given(diag(&[1.0])));
        assert!(wasserstein_mean(&p, &bad_init).is_err());
    }

    #[test]
    fn karcher_worked_example() {
        let p = worked_problem();
        let r = karcher_mean(&p, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        let expected = spd(&[&[1.6641, 2.2188], &[2.2188, 4.1603]]);
        assert!(max_entry_diff(&r.mean, &expected) < 5e-4);
        assert!((r.mean.det() - 2.0).abs() < 1e-3);
        let g = geometric_mean(&p.matrices()[0], &p.matrices()[1], GeodesicParam::HALF).unwrap();
        assert!(r.mean.as_sym().relative_distance(g.as_sym()) < 1e-9);
    }

    #[test]
    fn bounds_all_identity() {
        let p = MeanProblem::with_uniform_weights(vec![SpdMatrix::identity(3); 3]).unwrap();
        let b = bounds_report(&p).unwrap();
        assert!(
            b.lower_lie_trotter
                .relative_distance(&SymMatrix::identity(3))
                < 1e-15
        );
        assert_eq!(b.upper_arithmetic, SpdMatrix::identity(3));
        assert!((b.opnorm_bound - 1.0).abs() < 1e-15);
        // 2I − I = I > 0 so the inverse bound exists and equals I.
        let u = b.upper_inverse.as_ref().unwrap();
        assert!(u.as_sym().relative_distance(&SymMatrix::identity(3)) < 1e-15);
        let v = b.check_against(&SpdMatrix::identity(3), 1e-8).unwrap();
        assert!(v.all_hold());
        let o = bound_ordering_checks(&p, 1e-8).unwrap();
        assert!(o.all_hold());
        assert!(o.harmonic_above_lower.witness.abs() < 1e-14);
    }

    #[test]
    fn bounds_worked_example() {
        let p = worked_problem();
        let b = bounds_report(&p).unwrap();
        let expected = SymMatrix::from_rows(&[vec![-1.125, 1.5], vec![1.5, 1.0]]).unwrap();
        assert!(b.lower_lie_trotter.relative_distance(&expected) < 1e-13);
        // ΣwA = [[2.5,3],[3,5]] is not below 2I.
        assert!(b.upper_inverse.is_none());
        let v = b.check_against(&worked_mean(), 1e-8).unwrap();
        assert!(v.all_hold(), "{v:?}");
    }

    #[test]
    fn conditional_upper_bound() {
        let p =
            MeanProblem::with_uniform_weights(vec![diag(&[0.5, 0.5]), diag(&[1.0, 1.5])]).unwrap();
        let b = bounds_report(&p).unwrap();
        let u = b.upper_inverse.clone().unwrap();
        assert!(max_entry_diff(&u, &diag(&[0.8, 1.0])) < 1e-14);
        let mean = wasserstein_mean(&p, &SolverConfig::default()).unwrap().mean;
        let closed = |a: f64, b: f64| (0.5 * a.sqrt() + 0.5 * b.sqrt()).powi(2);
        let expected = diag(&[closed(0.5, 1.0), closed(0.5, 1.5)]);
        assert!(max_entry_diff(&mean, &expected) < 1e-12);
        assert!((expected.get(0, 0) - 0.7286).abs() < 1e-4);
        assert!((expected.get(1, 1) - 0.9330).abs() < 1e-4);
        assert!(b.check_against(&mean, 1e-8).unwrap().all_hold());
    }

    #[test]
    fn scalar_orderings() {
        let p = MeanProblem::with_uniform_weights(vec![diag(&[0.5]), diag(&[1.5])]).unwrap();
        let o = bound_ordering_checks(&p, 0.0).unwrap();
        // lower = 2 − (2 + 2/3)/2 = 2/3, harmonic = 3/4
        let b = bounds_report(&p).unwrap();
        assert!((b.lower_lie_trotter.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((o.harmonic_above_lower.witness - (0.75 - 2.0 / 3.0)).abs() < 1e-15);
        // ΣwA = 1 < 2, inverse bound = 1 ≥ 1.
        assert!(o.inverse_above_arithmetic.unwrap().holds);
        assert!(o.all_hold());
    }

    #[test]
    fn determinant_inequality() {
        let p = worked_problem();
        let r = det_inequality_check(&p, &worked_mean()).unwrap();
        assert!((r.det_mean - 2.25).abs() < 1e-12);
        assert!((r.det_geo_product - 2.0).abs() < 1e-12);
        assert!(r.holds);

        let x = spd(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let p = MeanProblem::with_uniform_weights(vec![x.clone(), x.clone()]).unwrap();
        let mean = wasserstein_mean(&p, &SolverConfig::default()).unwrap().mean;
        let r = det_inequality_check(&p, &mean).unwrap();
        assert!((r.det_mean - r.det_geo_product).abs() < 1e-10);
        assert!(r.holds);
    }
}
