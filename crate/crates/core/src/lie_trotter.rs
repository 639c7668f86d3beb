//! Numerical check of the Lie–Trotter property of the Wasserstein barycenter:
//!
//! ```text
//! lim_{s→0} Ω(ω; γ₁(s), …, γₙ(s))^{1/s} = exp(Σ wⱼ γⱼ'(0))
//! ```
//!
//! for curves through the identity, plus the derivative of `Ω` at `(I, …, I)`.

use serde::Serialize;

use crate::barycenter::{wasserstein_mean, MeanProblem, SolverConfig, WeightVector};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::spd::{exp_of_sym, SpdMatrix};

/// Solver tolerance used for every trace point.
pub const TRACE_SOLVER_TOL: f64 = 1e-13;

/// Dyadic schedule `2⁻¹, 2⁻², …, 2⁻ᵏ`.
pub fn dyadic_schedule(levels: u32) -> Vec<f64> {
    (1..=levels as i32).map(|k| 2f64.powi(-k)).collect()
}

/// Differentiable SPD-valued curve with `γ(0) = I`.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    /// `γ(s) = baseˢ`
    Power(SpdMatrix),
    /// `γ(s) = I + s·D`, admissible while `|s|·‖D‖ < 1`
    Affine(SymMatrix),
    /// `γ(s) = exp(s·D)`
    ExpLine(SymMatrix),
}

impl CurveSpec {
    pub fn dim(&self) -> usize {
        match self {
            CurveSpec::Power(b) => b.dim(),
            CurveSpec::Affine(d) | CurveSpec::ExpLine(d) => d.dim(),
        }
    }

    /// `γ'(0)`.
    pub fn derivative_at_zero(&self) -> SymMatrix {
        match self {
            CurveSpec::Power(b) => b.log(),
            CurveSpec::Affine(d) | CurveSpec::ExpLine(d) => d.clone(),
        }
    }

    pub fn evaluate(&self, s: f64) -> Result<SpdMatrix> {
        evaluate_curve(self, s)
    }
}

pub fn evaluate_curve(c: &CurveSpec, s: f64) -> Result<SpdMatrix> {
    if !s.is_finite() {
        return Err(Error::InvalidParameter(format!("curve parameter {s}")));
    }
    if s == 0.0 {
        return Ok(SpdMatrix::identity(c.dim()));
    }
    match c {
        CurveSpec::Power(base) => base.power(s),
        CurveSpec::Affine(d) => {
            let radius = s.abs() * d.operator_norm()?;
            if radius >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "affine curve leaves the SPD cone: |s|·‖D‖ = {radius}"
                )));
            }
            SpdMatrix::new(SymMatrix::identity(d.dim()).try_add(&d.scale(s))?)
        }
        CurveSpec::ExpLine(d) => exp_of_sym(&d.scale(s)),
    }
}

fn check_curves(w: &WeightVector, curves: &[CurveSpec]) -> Result<usize> {
    if curves.is_empty() || curves.len() != w.len() {
        return Err(Error::InvalidParameter(format!(
            "{} curves for {} weights",
            curves.len(),
            w.len()
        )));
    }
    let dim = curves[0].dim();
    if let Some(c) = curves.iter().find(|c| c.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: c.dim(),
        });
    }
    Ok(dim)
}

/// `Ω(ω; γ₁(s), …, γₙ(s))^{1/s}`.
pub fn lie_trotter_value(
    w: &WeightVector,
    curves: &[CurveSpec],
    s: f64,
    cfg: &SolverConfig,
) -> Result<SpdMatrix> {
    check_curves(w, curves)?;
    if s == 0.0 {
        return Err(Error::InvalidParameter("s must be nonzero".into()));
    }
    let points = curves
        .iter()
        .map(|c| evaluate_curve(c, s))
        .collect::<Result<Vec<_>>>()?;
    let problem = MeanProblem::new(points, w.clone())?;
    let result = wasserstein_mean(&problem, cfg)?;
    if !result.converged {
        return Err(Error::Solver {
            iteration: result.iterations,
            reason: format!(
                "barycenter did not converge (residual {:e})",
                result.residual
            ),
        });
    }
    result.mean.power(1.0 / s)
}

/// `exp(Σ wⱼ γⱼ'(0))`.
pub fn lie_trotter_target(w: &WeightVector, curves: &[CurveSpec]) -> Result<SpdMatrix> {
    let dim = check_curves(w, curves)?;
    let mut acc = SymMatrix::zeros(dim);
    for (&wj, c) in w.as_slice().iter().zip(curves) {
        acc = acc.try_add(&c.derivative_at_zero().scale(wj))?;
    }
    exp_of_sym(&acc)
}

/// Errors `‖Ω(ω; γ(s))^{1/s} − target‖_F` along a schedule of `s` values.
/// Failed points are recorded as `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieTrotterTrace {
    pub s_values: Vec<f64>,
    pub errors: Vec<Option<f64>>,
    #[serde(skip)]
    pub target: SpdMatrix,
}

impl LieTrotterTrace {
    pub fn final_error(&self) -> Option<f64> {
        self.errors.last().copied().flatten()
    }

    pub fn initial_error(&self) -> Option<f64> {
        self.errors.first().copied().flatten()
    }

    fn complete(&self) -> Option<Vec<f64>> {
        self.errors.iter().copied().collect()
    }

    /// `error[k] / error[k−1]` for consecutive points.
    pub fn ratios(&self) -> Option<Vec<f64>> {
        let e = self.complete()?;
        Some(e.windows(2).map(|w| w[1] / w[0]).collect())
    }

    /// Strictly decreasing from some index no later than the midpoint onward.
    pub fn eventually_decreasing(&self) -> bool {
        let Some(e) = self.complete() else {
            return false;
        };
        let mut start = e.len().saturating_sub(1);
        while start > 0 && e[start] < e[start - 1] {
            start -= 1;
        }
        start <= e.len() / 2
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.complete()
            .is_some_and(|e| e.windows(2).all(|w| w[1] < w[0]))
    }
}

/// Positive schedule plus, optionally, its mirror `−s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub positive: LieTrotterTrace,
    pub negative: Option<LieTrotterTrace>,
}

fn trace_for(
    w: &WeightVector,
    curves: &[CurveSpec],
    schedule: &[f64],
    cfg: &SolverConfig,
    target: &SpdMatrix,
) -> LieTrotterTrace {
    let errors = schedule
        .iter()
        .map(|&s| {
            lie_trotter_value(w, curves, s, cfg)
                .and_then(|v| Ok(v.as_sym().try_sub(target.as_sym())?.frobenius_norm()))
                .ok()
        })
        .collect();
    LieTrotterTrace {
        s_values: schedule.to_vec(),
        errors,
        target: target.clone(),
    }
}

/// Runs the limit experiment over `schedule` (descending positive values).
/// The solver tolerance is tightened to [`TRACE_SOLVER_TOL`].
pub fn convergence_trace(
    w: &WeightVector,
    curves: &[CurveSpec],
    schedule: &[f64],
    cfg: &SolverConfig,
    mirror: bool,
) -> Result<TraceReport> {
    if schedule.iter().any(|&s| s.is_nan() || s <= 0.0) || schedule.windows(2).any(|p| p[1] >= p[0])
    {
        return Err(Error::InvalidParameter(
            "schedule must be positive and strictly descending".into(),
        ));
    }
    let target = lie_trotter_target(w, curves)?;
    let cfg = SolverConfig {
        rel_tol: cfg.rel_tol.min(TRACE_SOLVER_TOL),
        ..cfg.clone()
    };
    let positive = trace_for(w, curves, schedule, &cfg, &target);
    let negative = mirror.then(|| {
        let neg: Vec<f64> = schedule.iter().map(|s| -s).collect();
        trace_for(w, curves, &neg, &cfg, &target)
    });
    Ok(TraceReport { positive, negative })
}

/// One step size of the finite-difference derivative check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativePoint {
    pub t: f64,
    /// `‖(Ω(I + tX) − I)/t − Σ wⱼXⱼ‖_F`
    pub error_pos: f64,
    /// Same with `−t`.
    pub error_neg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub points: Vec<DerivativePoint>,
}

impl DerivativeReport {
    /// Ratios `error(tₖ)/error(tₖ₋₁)` for the positive and negative sides.
    pub fn ratios(&self) -> (Vec<f64>, Vec<f64>) {
        let pos = self
            .points
            .windows(2)
            .map(|w| w[1].error_pos / w[0].error_pos)
            .collect();
        let neg = self
            .points
            .windows(2)
            .map(|w| w[1].error_neg / w[0].error_neg)
            .collect();
        (pos, neg)
    }
}

/// Finite-difference quotient of `Ω` at `(I, …, I)` along `(X₁, …, Xₙ)`,
/// compared with `Σ wⱼ Xⱼ` at `±t` for every `t` in the schedule.
pub fn derivative_at_identity_check(
    w: &WeightVector,
    directions: &[SymMatrix],
    t_schedule: &[f64],
    cfg: &SolverConfig,
) -> Result<DerivativeReport> {
    let curves: Vec<CurveSpec> = directions.iter().cloned().map(CurveSpec::Affine).collect();
    let dim = check_curves(w, &curves)?;
    let mut expected = SymMatrix::zeros(dim);
    for (&wj, x) in w.as_slice().iter().zip(directions) {
        expected = expected.try_add(&x.scale(wj))?;
    }
    let cfg = SolverConfig {
        rel_tol: cfg.rel_tol.min(TRACE_SOLVER_TOL),
        ..cfg.clone()
    };
    let identity = SymMatrix::identity(dim);
    let quotient_error = |t: f64| -> Result<f64> {
        let points = curves
            .iter()
            .map(|c| evaluate_curve(c, t))
            .collect::<Result<Vec<_>>>()?;
        let problem = MeanProblem::new(points, w.clone())?;
        let mean = wasserstein_mean(&problem, &cfg)?;
        let q = mean.mean.as_sym().try_sub(&identity)?.scale(1.0 / t);
        Ok(q.try_sub(&expected)?.frobenius_norm())
    };
    let mut points = Vec::with_capacity(t_schedule.len());
    for &t in t_schedule {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step {t} must be positive"
            )));
        }
        points.push(DerivativePoint {
            t,
            error_pos: quotient_error(t)?,
            error_neg: quotient_error(-t)?,
        });
    }
    Ok(DerivativeReport { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(d).unwrap()
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

    fn a() -> SpdMatrix {
        SpdMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 5.0]]).unwrap()
    }

    fn b() -> SpdMatrix {
        SpdMatrix::from_rows(&[vec![4.0, 4.0], vec![4.0, 5.0]]).unwrap()
    }

    #[test]
    fn curve_evaluation() {
        let p = CurveSpec::Power(a());
        assert!(max_entry_diff(&p.evaluate(1.0).unwrap(), &a()) < 1e-13);
        assert_eq!(p.evaluate(0.0).unwrap(), SpdMatrix::identity(2));
        let half = CurveSpec::Power(diag(&[4.0, 9.0])).evaluate(0.5).unwrap();
        assert!(max_entry_diff(&half, &diag(&[2.0, 3.0])) < 1e-15);

        let d = SymMatrix::from_diagonal(&[2.0, -1.0]);
        let aff = CurveSpec::Affine(d.clone());
        assert_eq!(aff.evaluate(0.0).unwrap(), SpdMatrix::identity(2));
        assert!(aff.evaluate(0.4).is_ok());
        assert!(aff.evaluate(0.5).is_err());
        assert!(aff.evaluate(-0.6).is_err());
        let e = CurveSpec::ExpLine(d).evaluate(1.0).unwrap();
        assert!(max_entry_diff(&e, &diag(&[2f64.exp(), (-1f64).exp()])) < 1e-13);
    }

    #[test]
    fn single_power_curve_is_exact() {
        let w = WeightVector::uniform(1).unwrap();
        let curves = [CurveSpec::Power(a())];
        for s in [0.5, 0.125, -0.25] {
            let v = lie_trotter_value(&w, &curves, s, &SolverConfig::default()).unwrap();
            assert!(v.as_sym().relative_distance(a().as_sym()) < 1e-11);
        }
        let r = convergence_trace(
            &w,
            &curves,
            &dyadic_schedule(6),
            &SolverConfig::default(),
            true,
        )
        .unwrap();
        assert!(r.positive.errors.iter().all(|e| e.unwrap() <= 1e-12 * 10.0));
    }

    #[test]
    fn commuting_scalar_oracle() {
        let w = WeightVector::new(vec![0.3, 0.7]).unwrap();
        let (x, y) = ([2.0, 0.5], [3.0, 1.5]);
        let curves = [CurveSpec::Power(diag(&x)), CurveSpec::Power(diag(&y))];
        let s = 0.25;
        let v = lie_trotter_value(&w, &curves, s, &SolverConfig::default()).unwrap();
        for i in 0..2 {
            let inner = 0.3 * x[i].powf(s / 2.0) + 0.7 * y[i].powf(s / 2.0);
            let expected = inner.powi(2).powf(1.0 / s);
            assert!((v.get(i, i) - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn unit_s_is_geodesic_midpoint() {
        let w = WeightVector::uniform(2).unwrap();
        let curves = [CurveSpec::Power(a()), CurveSpec::Power(b())];
        let v = lie_trotter_value(&w, &curves, 1.0, &SolverConfig::default()).unwrap();
        let mid =
            crate::geometry::wasserstein_geodesic(&a(), &b(), crate::geometry::GeodesicParam::HALF)
                .unwrap();
        assert!(v.as_sym().relative_distance(mid.as_sym()) < 1e-10);
    }

    #[test]
    fn target_examples() {
        let w = WeightVector::uniform(3).unwrap();
        let same = vec![CurveSpec::Power(a()); 3];
        let t = lie_trotter_target(&w, &same).unwrap();
        assert!(t.as_sym().relative_distance(a().as_sym()) < 1e-12);

        let w = WeightVector::uniform(2).unwrap();
        let curves = [
            CurveSpec::Power(diag(&[2.0, 8.0])),
            CurveSpec::Power(diag(&[8.0, 0.5])),
        ];
        let t = lie_trotter_target(&w, &curves).unwrap();
        assert!(max_entry_diff(&t, &diag(&[4.0, 2.0])) < 1e-13);
    }

    #[test]
    fn trace_decreases_first_order() {
        let w = WeightVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let curves = [
            CurveSpec::Power(a()),
            CurveSpec::Power(b()),
            CurveSpec::ExpLine(SymMatrix::from_rows(&[vec![0.3, -0.2], vec![-0.2, 0.1]]).unwrap()),
        ];
        let r = convergence_trace(
            &w,
            &curves,
            &dyadic_schedule(10),
            &SolverConfig::default(),
            true,
        )
        .unwrap();
        assert!(r.positive.strictly_decreasing(), "{:?}", r.positive.errors);
        let ratios = r.positive.ratios().unwrap();
        for q in &ratios[ratios.len() - 4..] {
            assert!((0.25..=0.75).contains(q), "{ratios:?}");
        }
        let neg = r.negative.unwrap();
        assert!(neg.eventually_decreasing());
        let (fp, fn_) = (
            r.positive.final_error().unwrap(),
            neg.final_error().unwrap(),
        );
        assert!(fp <= 2.0 * fn_ && fn_ <= 2.0 * fp);
    }

    #[test]
    fn derivative_check_zero_directions() {
        let w = WeightVector::uniform(2).unwrap();
        let dirs = vec![SymMatrix::zeros(2); 2];
        let r = derivative_at_identity_check(&w, &dirs, &[0.5, 0.25], &SolverConfig::default())
            .unwrap();
        assert!(r
            .points
            .iter()
            .all(|p| p.error_pos == 0.0 && p.error_neg == 0.0));
    }

    #[test]
    fn derivative_check_diagonal_scalar_oracle() {
        let w = WeightVector::new(vec![0.4, 0.6]).unwrap();
        let (x, y) = ([0.5, -0.8], [-0.3, 0.6]);
        let dirs = vec![SymMatrix::from_diagonal(&x), SymMatrix::from_diagonal(&y)];
        let t = 0.125;
        let r = derivative_at_identity_check(&w, &dirs, &[t], &SolverConfig::default()).unwrap();
        let mut oracle = 0.0_f64;
        for i in 0..2 {
            let omega = (0.4 * (1.0 + t * x[i]).sqrt() + 0.6 * (1.0 + t * y[i]).sqrt()).powi(2);
            let q = (omega - 1.0) / t - (0.4 * x[i] + 0.6 * y[i]);
            oracle += q * q;
        }
        assert!((r.points[0].error_pos - oracle.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = WeightVector::uniform(2).unwrap();
        let curves = [CurveSpec::Power(a())];
        assert!(lie_trotter_target(&w, &curves).is_err());
        let curves = [CurveSpec::Power(a()), CurveSpec::Power(b())];
        assert!(lie_trotter_value(&w, &curves, 0.0, &SolverConfig::default()).is_err());
        assert!(
            convergence_trace(&w, &curves, &[0.1, 0.5], &SolverConfig::default(), false).is_err()
        );
    }
}
