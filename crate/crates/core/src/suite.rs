//! Verification suite: every numerical property of the library, run over a
//! seeded ensemble and collected into a machine-readable report.
//!
//! Each instance draws from its own seed (`instance_seed(suite seed, index)`),
//! so a failing record can be replayed alone through [`run_instance`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::barycenter::{
    bound_ordering_checks, bounds_report, det_inequality_check, equivalent_equation_residual,
    karcher_mean, log_det_concavity, wasserstein_mean, InitialPoint, MeanProblem, SolverConfig,
    WeightVector,
};
use crate::ensemble::{problem_from_seed, EnsembleSpec, Sampler};
use crate::error::{Error, Result};
use crate::geometry::{
    geodesic_perturbation_bound, geometric_mean, riemannian_distance, wasserstein_distance,
    wasserstein_distance_oracle_2x2, wasserstein_distance_trace_formula, wasserstein_geodesic,
    GeodesicParam,
};
use crate::lie_trotter::{
    convergence_trace, derivative_at_identity_check, dyadic_schedule, lie_trotter_target, CurveSpec,
};
use crate::linalg::{congruence, loewner_geq, Matrix, SymMatrix};
use crate::spd::{apply_spectral, SpdMatrix, SpectralFn};

/// Relative Loewner tolerance for every bound check.
pub const LOEWNER_TOL: f64 = 1e-8;
/// Relative Frobenius tolerance for identities of means.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Grid size of the 2×2 orthogonal-group oracle.
pub const ORACLE_GRID: usize = 720;
/// Below this every finite-difference error is treated as roundoff.
pub const EXACT_DERIVATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Metric,
    Geomean,
    Bounds,
    Det,
    Invariance,
    LieTrotter,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Metric,
        Suite::Geomean,
        Suite::Bounds,
        Suite::Det,
        Suite::Invariance,
        Suite::LieTrotter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Metric => "metric",
            Suite::Geomean => "geomean",
            Suite::Bounds => "bounds",
            Suite::Det => "det",
            Suite::Invariance => "invariance",
            Suite::LieTrotter => "lie-trotter",
        }
    }

    /// Per-suite salt so suites never share random streams.
    fn salt(self) -> u64 {
        match self {
            Suite::Metric => 0x6d65_7472_6963,
            Suite::Geomean => 0x0067_656f_6d65_616e,
            Suite::Bounds => 0,
            Suite::Det => 0,
            Suite::Invariance => 0x0069_6e76_6172,
            Suite::LieTrotter => 0x6c69_6574_726f_7474,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parsed value of `--suite`: one suite or all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteSelection(pub Vec<Suite>);

impl SuiteSelection {
    pub fn all() -> Self {
        Self(Suite::ALL.to_vec())
    }
}

impl FromStr for SuiteSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(Self::all());
        }
        Suite::ALL
            .iter()
            .find(|k| k.name() == s)
            .map(|k| Self(vec![*k]))
            .ok_or_else(|| Error::Input(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: Suite,
    pub check_id: String,
    pub instance_index: usize,
    pub instance_seed: u64,
    pub pass: bool,
    pub witness: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub passes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub spec: EnsembleSpec,
    pub suites: Vec<Suite>,
    pub summary: SuiteSummary,
    pub per_check: BTreeMap<String, SuiteSummary>,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.summary.failures == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Accumulates records for one instance.
struct Recorder {
    suite: Suite,
    index: usize,
    seed: u64,
    records: Vec<CheckRecord>,
}

impl Recorder {
    fn record(&mut self, check_id: &str, pass: bool, witness: &[(&str, f64)]) {
        self.records.push(CheckRecord {
            suite: self.suite,
            check_id: format!("{}.{}", self.suite.name(), check_id),
            instance_index: self.index,
            instance_seed: self.seed,
            pass,
            witness: witness.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            error: None,
        });
    }

    /// Runs `body`; an error becomes a failed record named `check_id`.
    fn guard(&mut self, check_id: &str, body: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = body(self) {
            self.records.push(CheckRecord {
                suite: self.suite,
                check_id: format!("{}.{}", self.suite.name(), check_id),
                instance_index: self.index,
                instance_seed: self.seed,
                pass: false,
                witness: BTreeMap::new(),
                error: Some(e.to_string()),
            });
        }
    }
}

pub fn run_suite(spec: &EnsembleSpec, selection: &SuiteSelection) -> Result<SuiteReport> {
    spec.validate()?;
    let mut suites = selection.0.clone();
    suites.sort();
    suites.dedup();
    let mut records = Vec::new();
    for &suite in &suites {
        for index in 0..spec.count {
            records.extend(run_instance(suite, spec, index, spec.instance_seed(index)));
        }
    }
    records.sort_by(|a, b| {
        (a.suite, a.instance_index, &a.check_id).cmp(&(b.suite, b.instance_index, &b.check_id))
    });
    let mut per_check: BTreeMap<String, SuiteSummary> = BTreeMap::new();
    for r in &records {
        let e = per_check.entry(r.check_id.clone()).or_insert(SuiteSummary {
            total: 0,
            passes: 0,
            failures: 0,
        });
        e.total += 1;
        if r.pass {
            e.passes += 1;
        } else {
            e.failures += 1;
        }
    }
    let passes = records.iter().filter(|r| r.pass).count();
    Ok(SuiteReport {
        spec: spec.clone(),
        suites,
        summary: SuiteSummary {
            total: records.len(),
            passes,
            failures: records.len() - passes,
        },
        per_check,
        records,
    })
}

/// Runs one suite on one instance. `index` is informational; all randomness
/// comes from `seed`.
pub fn run_instance(
    suite: Suite,
    spec: &EnsembleSpec,
    index: usize,
    seed: u64,
) -> Vec<CheckRecord> {
    let mut rec = Recorder {
        suite,
        index,
        seed,
        records: Vec::new(),
    };
    let salted = seed ^ suite.salt();
    match suite {
        Suite::Metric => rec.guard("setup", |r| metric_checks(r, spec, salted)),
        Suite::Geomean => rec.guard("setup", |r| geomean_checks(r, spec, salted)),
        Suite::Bounds => rec.guard("setup", |r| {
            bounds_checks(r, &problem_from_seed(seed, spec))
        }),
        Suite::Det => rec.guard("setup", |r| det_checks(r, &problem_from_seed(seed, spec))),
        Suite::Invariance => {
            let p = problem_from_seed(seed, spec);
            rec.guard("setup", |r| invariance_checks(r, &p, salted))
        }
        Suite::LieTrotter => rec.guard("setup", |r| lie_trotter_checks(r, spec, salted)),
    }
    rec.records
}

fn rel_diff(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
    a.as_sym().relative_distance(b.as_sym())
}

fn param(t: f64) -> GeodesicParam {
    GeodesicParam::new(t.clamp(0.0, 1.0)).expect("clamped")
}

fn metric_checks(r: &mut Recorder, spec: &EnsembleSpec, seed: u64) -> Result<()> {
    let mut s = Sampler::new(seed);
    let dim = s.int_in(&spec.dim_range());
    let kappa = spec.condition_max;
    let (a, b, c) = (s.spd(dim, kappa), s.spd(dim, kappa), s.spd(dim, kappa));
    let t = s.uniform();

    let dab = wasserstein_distance(&a, &b)?;
    let dba = wasserstein_distance(&b, &a)?;
    r.record(
        "symmetry",
        (dab - dba).abs() <= 1e-10,
        &[("diff", (dab - dba).abs())],
    );

    let daa = wasserstein_distance(&a, &a)?;
    r.record("identity", daa <= 1e-10, &[("d_aa", daa)]);

    let slack = dab + wasserstein_distance(&b, &c)? - wasserstein_distance(&a, &c)?;
    r.record("triangle", slack >= -1e-9, &[("slack", slack)]);

    let trace = wasserstein_distance_trace_formula(&a, &b)?;
    r.record(
        "trace_formula",
        (trace - dab).abs() <= 1e-8 * dab.max(1.0),
        &[("diff", (trace - dab).abs())],
    );

    let a2 = s.spd(2, kappa);
    let b2 = s.spd(2, kappa);
    let formula = wasserstein_distance(&a2, &b2)?;
    let oracle = wasserstein_distance_oracle_2x2(&a2, &b2, ORACLE_GRID)?;
    r.record(
        "oracle_2x2",
        (formula - oracle).abs() <= 1e-6,
        &[("formula", formula), ("oracle", oracle)],
    );

    let rab = riemannian_distance(&a, &b)?;
    let rba = riemannian_distance(&b, &a)?;
    r.record(
        "riemannian_symmetry",
        (rab - rba).abs() <= 1e-10,
        &[("diff", (rab - rba).abs())],
    );

    let report = geodesic_perturbation_bound(&a, &b, &c, param(t))?;
    r.record(
        "perturbation_bound",
        report.holds(1e-9),
        &[
            ("lhs", report.lhs),
            ("rhs", report.rhs),
            ("lambda1", report.lambda1),
            ("t", t),
        ],
    );
    Ok(())
}

/// Random nonsingular matrix with singular values in `[0.5, 2]`.
fn nonsingular(s: &mut Sampler, dim: usize) -> Result<Matrix> {
    let u = s.orthogonal(dim);
    let v = s.orthogonal(dim);
    let sv: Vec<f64> = (0..dim).map(|_| s.uniform_in(0.5, 2.0)).collect();
    (&u * &Matrix::from_diagonal(&sv)).matmul(&v)
}

fn geomean_checks(r: &mut Recorder, spec: &EnsembleSpec, seed: u64) -> Result<()> {
    let mut s = Sampler::new(seed);
    let dim = s.int_in(&spec.dim_range());
    let kappa = spec.condition_max;
    let (a, b) = (s.spd(dim, kappa), s.spd(dim, kappa));
    let t = s.uniform();
    let x = nonsingular(&mut s, dim)?;
    let (gs, gu) = (s.uniform(), s.uniform());
    let tp = param(t);

    let g = geometric_mean(&a, &b, tp)?;
    let mid = geometric_mean(&a, &b, GeodesicParam::HALF)?;
    let riccati = congruence(mid.as_matrix(), a.inverse().as_sym())?.relative_distance(b.as_sym());
    r.record("riccati", riccati <= 1e-10, &[("residual", riccati)]);

    let swapped = geometric_mean(&b, &a, param(1.0 - t))?;
    let d = rel_diff(&swapped, &g);
    r.record("swap_symmetry", d <= IDENTITY_TOL, &[("rel_diff", d)]);

    let lhs = congruence(&x, g.as_sym())?;
    let xa = SpdMatrix::new(congruence(&x, a.as_sym())?)?;
    let xb = SpdMatrix::new(congruence(&x, b.as_sym())?)?;
    let rhs = geometric_mean(&xa, &xb, tp)?;
    let d = lhs.relative_distance(rhs.as_sym());
    r.record("congruence", d <= IDENTITY_TOL, &[("rel_diff", d)]);

    let inv = geometric_mean(&a.inverse(), &b.inverse(), tp)?;
    let d = rel_diff(&g.inverse(), &inv);
    r.record("inverse", d <= IDENTITY_TOL, &[("rel_diff", d)]);

    let det_rhs = a.det().powf(1.0 - t) * b.det().powf(t);
    let d = (g.det() - det_rhs).abs() / det_rhs;
    r.record("determinant", d <= IDENTITY_TOL, &[("rel_diff", d)]);

    let arith = a.as_sym().scale(1.0 - t).try_add(&b.as_sym().scale(t))?;
    let harm = SpdMatrix::new(
        a.inverse()
            .as_sym()
            .scale(1.0 - t)
            .try_add(&b.inverse().as_sym().scale(t))?,
    )?
    .inverse();
    let upper = loewner_geq(&arith, g.as_sym(), IDENTITY_TOL)?;
    let lower = loewner_geq(g.as_sym(), harm.as_sym(), IDENTITY_TOL)?;
    r.record(
        "agh",
        upper.holds && lower.holds,
        &[
            ("upper_witness", upper.witness),
            ("lower_witness", lower.witness),
        ],
    );

    // Two-point barycenter against the closed-form geodesic.
    let p = MeanProblem::new(
        vec![a.clone(), b.clone()],
        WeightVector::new(vec![1.0 - t, t].into_iter().map(|w| w.max(1e-3)).collect())?,
    )?;
    let wt = p.weights().as_slice()[1];
    let solved = wasserstein_mean(&p, &SolverConfig::default())?;
    let closed = wasserstein_geodesic(&a, &b, param(wt))?;
    let d = rel_diff(&solved.mean, &closed);
    r.record(
        "two_point_closed_form",
        solved.converged && d <= 1e-8,
        &[("rel_diff", d), ("t", wt), ("residual", solved.residual)],
    );

    let karcher = karcher_mean(&p, &SolverConfig::default())?;
    let closed = geometric_mean(&a, &b, param(wt))?;
    let d = rel_diff(&karcher.mean, &closed);
    r.record(
        "karcher_two_point",
        karcher.converged && d <= IDENTITY_TOL,
        &[("rel_diff", d)],
    );

    let left = wasserstein_geodesic(&a, &b, param(gs))?;
    let right = wasserstein_geodesic(&a, &b, tp)?;
    let nested = wasserstein_geodesic(&left, &right, param(gu))?;
    let direct = wasserstein_geodesic(&a, &b, param((1.0 - gu) * gs + gu * t))?;
    let d = rel_diff(&nested, &direct);
    r.record("geodesic_affine", d <= IDENTITY_TOL, &[("rel_diff", d)]);
    Ok(())
}

fn converged_mean(p: &MeanProblem, cfg: &SolverConfig) -> Result<SpdMatrix> {
    let res = wasserstein_mean(p, cfg)?;
    if !res.converged {
        return Err(Error::Solver {
            iteration: res.iterations,
            reason: format!("no convergence, residual {:e}", res.residual),
        });
    }
    Ok(res.mean)
}

fn bounds_checks(r: &mut Recorder, p: &MeanProblem) -> Result<()> {
    let res = wasserstein_mean(p, &SolverConfig::default())?;
    let eq = equivalent_equation_residual(&res.mean, p)?;
    r.record(
        "fixed_point",
        res.converged && res.residual <= 1e-12 && eq <= 1e-10,
        &[
            ("residual", res.residual),
            ("equivalent_residual", eq),
            ("iterations", res.iterations as f64),
        ],
    );
    let mean = res.mean;

    let bounds = bounds_report(p)?;
    let v = bounds.check_against(&mean, LOEWNER_TOL)?;
    r.record(
        "arithmetic_upper",
        v.arithmetic.holds,
        &[("witness", v.arithmetic.witness)],
    );
    r.record(
        "lie_trotter_lower",
        v.lie_trotter.holds,
        &[("witness", v.lie_trotter.witness)],
    );
    r.record(
        "opnorm",
        v.opnorm_holds,
        &[("norm", v.opnorm_mean), ("bound", bounds.opnorm_bound)],
    );
    if let Some(iv) = v.inverse {
        r.record("inverse_upper", iv.holds, &[("witness", iv.witness)]);
    }

    // Rescale so that Σ wⱼ Aⱼ < 2I and the conditional bound applies.
    let alpha = 1.5 / bounds.upper_arithmetic.operator_norm();
    let scaled = MeanProblem::new(
        p.matrices()
            .iter()
            .map(|a| a.scale(alpha))
            .collect::<Result<_>>()?,
        p.weights().clone(),
    )?;
    let scaled_mean = converged_mean(&scaled, &SolverConfig::default())?;
    let sb = bounds_report(&scaled)?;
    let sv = sb.check_against(&scaled_mean, LOEWNER_TOL)?;
    match sv.inverse {
        Some(iv) => r.record("inverse_upper_scaled", iv.holds, &[("witness", iv.witness)]),
        None => r.record("inverse_upper_scaled", false, &[("alpha", alpha)]),
    }

    for (q, label) in [(p, ""), (&scaled, "_scaled")] {
        let o = bound_ordering_checks(q, LOEWNER_TOL)?;
        r.record(
            &format!("ordering_harmonic_lower{label}"),
            o.harmonic_above_lower.holds,
            &[("witness", o.harmonic_above_lower.witness)],
        );
        r.record(
            &format!("ordering_arithmetic_harmonic{label}"),
            o.arithmetic_above_harmonic.holds,
            &[("witness", o.arithmetic_above_harmonic.witness)],
        );
        if let Some(iv) = o.inverse_above_arithmetic {
            r.record(
                &format!("ordering_inverse_arithmetic{label}"),
                iv.holds,
                &[("witness", iv.witness)],
            );
        }
        r.record(
            &format!("ordering_opnorm_sharpness{label}"),
            o.opnorm_holds,
            &[("bound", o.opnorm_bound), ("average", o.opnorm_average)],
        );
    }
    Ok(())
}

fn det_checks(r: &mut Recorder, p: &MeanProblem) -> Result<()> {
    let mean = converged_mean(p, &SolverConfig::default())?;
    let d = det_inequality_check(p, &mean)?;
    r.record(
        "inequality",
        d.holds,
        &[
            ("det_mean", d.det_mean),
            ("det_geo_product", d.det_geo_product),
        ],
    );

    let (lhs, rhs) = log_det_concavity(p)?;
    r.record(
        "log_det_concavity",
        lhs >= rhs - 1e-9,
        &[("lhs", lhs), ("rhs", rhs)],
    );

    let first = p.matrices()[0].clone();
    let equal = MeanProblem::new(vec![first; p.len()], p.weights().clone())?;
    let mean = converged_mean(&equal, &SolverConfig::default())?;
    let d = det_inequality_check(&equal, &mean)?;
    let gap = (d.det_mean - d.det_geo_product).abs() / d.det_geo_product.max(1.0);
    r.record("equality_case", d.holds && gap <= 1e-10, &[("gap", gap)]);
    Ok(())
}

fn invariance_checks(r: &mut Recorder, p: &MeanProblem, seed: u64) -> Result<()> {
    let mut s = Sampler::new(seed);
    let cfg = SolverConfig::default();
    let base = converged_mean(p, &cfg)?;

    for alpha in [0.1, 3.0] {
        let scaled = MeanProblem::new(
            p.matrices()
                .iter()
                .map(|a| a.scale(alpha))
                .collect::<Result<_>>()?,
            p.weights().clone(),
        )?;
        let m = converged_mean(&scaled, &cfg)?;
        let d = rel_diff(&m, &base.scale(alpha)?);
        r.record(
            &format!("homogeneity_{alpha}"),
            d <= IDENTITY_TOL,
            &[("rel_diff", d)],
        );
    }

    let mut order: Vec<usize> = (0..p.len()).collect();
    order.reverse();
    if p.len() > 2 {
        order.rotate_left(1);
    }
    let permuted = MeanProblem::new(
        order.iter().map(|&i| p.matrices()[i].clone()).collect(),
        WeightVector::new(order.iter().map(|&i| p.weights().as_slice()[i]).collect())?,
    )?;
    let d = rel_diff(&converged_mean(&permuted, &cfg)?, &base);
    r.record("permutation", d <= IDENTITY_TOL, &[("rel_diff", d)]);

    let repeated = MeanProblem::new(
        p.matrices().iter().chain(p.matrices()).cloned().collect(),
        WeightVector::new(
            p.weights()
                .as_slice()
                .iter()
                .chain(p.weights().as_slice())
                .map(|w| w / 2.0)
                .collect(),
        )?,
    )?;
    let d = rel_diff(&converged_mean(&repeated, &cfg)?, &base);
    r.record("repetition", d <= IDENTITY_TOL, &[("rel_diff", d)]);

    let q = s.orthogonal(p.dim());
    let rotated = MeanProblem::new(
        p.matrices()
            .iter()
            .map(|a| SpdMatrix::new(congruence(&q, a.as_sym())?))
            .collect::<Result<_>>()?,
        p.weights().clone(),
    )?;
    let expected = congruence(&q, base.as_sym())?;
    let d = converged_mean(&rotated, &cfg)?
        .as_sym()
        .relative_distance(&expected);
    r.record(
        "orthogonal_congruence",
        d <= IDENTITY_TOL,
        &[("rel_diff", d)],
    );

    let from_identity = converged_mean(p, &cfg.clone().with_initial(InitialPoint::Identity))?;
    let d = rel_diff(&from_identity, &base);
    r.record("uniqueness", d <= 1e-8, &[("rel_diff", d)]);

    let pair = MeanProblem::new(
        vec![p.matrices()[0].clone(), p.matrices()[p.len() - 1].clone()],
        WeightVector::uniform(2)?,
    )?;
    let m = converged_mean(&pair, &cfg)?;
    let geo = wasserstein_geodesic(
        &pair.matrices()[0],
        &pair.matrices()[1],
        GeodesicParam::HALF,
    )?;
    let d = rel_diff(&m, &geo);
    r.record("geodesic_midpoint", d <= 1e-8, &[("rel_diff", d)]);
    Ok(())
}

/// Ranges used by the Lie–Trotter suite: the ensemble's, capped at
/// `n ≤ 4`, `dim ≤ 6`, `κ ≤ 100`, and with at least two curves.
pub fn lie_trotter_spec(spec: &EnsembleSpec) -> EnsembleSpec {
    let cap = |(lo, hi): (usize, usize), max: usize, min: usize| {
        let hi = hi.min(max).max(min);
        (lo.clamp(min, hi), hi)
    };
    EnsembleSpec {
        n_range: cap(spec.n_range, 4, 2),
        dim_range: cap(spec.dim_range, 6, 1),
        condition_max: spec.condition_max.min(100.0),
        ..spec.clone()
    }
}

/// Symmetric matrix with spectral radius exactly `radius`.
fn symmetric_with_radius(s: &mut Sampler, dim: usize, radius: f64) -> Result<SymMatrix> {
    let m = s.symmetric(dim);
    let norm = m.operator_norm()?;
    Ok(if norm > 0.0 {
        m.scale(radius / norm)
    } else {
        m
    })
}

/// Mixed curve kinds for the Lie–Trotter suite.
pub fn random_curves(s: &mut Sampler, n: usize, dim: usize, kappa: f64) -> Result<Vec<CurveSpec>> {
    (0..n)
        .map(|_| {
            Ok(match s.int_in(&(0..=2)) {
                0 => CurveSpec::Power(s.spd(dim, kappa)),
                1 => {
                    let radius = s.uniform_in(0.2, 1.5);
                    CurveSpec::Affine(symmetric_with_radius(s, dim, radius)?)
                }
                _ => {
                    let radius = s.uniform_in(0.2, 0.5 * kappa.ln().max(0.4));
                    CurveSpec::ExpLine(symmetric_with_radius(s, dim, radius)?)
                }
            })
        })
        .collect()
}

/// Last `k` ratios all inside `[0.25, 0.75]`.
pub fn first_order_ratios(ratios: &[f64], k: usize) -> bool {
    ratios.len() >= k
        && ratios[ratios.len() - k..]
            .iter()
            .all(|q| (0.25..=0.75).contains(q))
}

fn lie_trotter_checks(r: &mut Recorder, spec: &EnsembleSpec, seed: u64) -> Result<()> {
    let lt = lie_trotter_spec(spec);
    let mut s = Sampler::new(seed);
    let n = s.int_in(&lt.n_range());
    let dim = s.int_in(&lt.dim_range());
    let w = s.weights(n);
    let curves = random_curves(&mut s, n, dim, lt.condition_max)?;
    let cfg = SolverConfig::default();
    let schedule = dyadic_schedule(10);

    let report = convergence_trace(&w, &curves, &schedule, &cfg, true)?;
    let pos = &report.positive;
    let finite = pos.errors.iter().all(|e| e.is_some_and(f64::is_finite));
    r.record("finite", finite, &[("points", pos.errors.len() as f64)]);
    let (first, last) = (
        pos.initial_error().unwrap_or(f64::NAN),
        pos.final_error().unwrap_or(f64::NAN),
    );
    r.record(
        "eventually_decreasing",
        pos.eventually_decreasing(),
        &[("initial", first), ("final", last)],
    );
    r.record(
        "reduction",
        last <= 1e-2 * first,
        &[("initial", first), ("final", last)],
    );
    let ratios = pos.ratios().unwrap_or_default();
    let tail: Vec<(String, f64)> = ratios
        .iter()
        .enumerate()
        .rev()
        .take(4)
        .map(|(k, q)| (format!("ratio_{}", k + 1), *q))
        .collect();
    let tail_refs: Vec<(&str, f64)> = tail.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    r.record("first_order", first_order_ratios(&ratios, 4), &tail_refs);

    if let Some(neg) = &report.negative {
        let nf = neg.final_error().unwrap_or(f64::NAN);
        let ok = neg.eventually_decreasing() && last <= 2.0 * nf && nf <= 2.0 * last;
        r.record("two_sided", ok, &[("final_pos", last), ("final_neg", nf)]);
    }

    // All-power curves give the log-Euclidean mean, computed here
    // from the base matrices directly.
    let bases: Vec<SpdMatrix> = (0..n).map(|_| s.spd(dim, lt.condition_max)).collect();
    let power_curves: Vec<CurveSpec> = bases.iter().cloned().map(CurveSpec::Power).collect();
    let target = lie_trotter_target(&w, &power_curves)?;
    let mut log_sum = SymMatrix::zeros(dim);
    for (&wj, a) in w.as_slice().iter().zip(&bases) {
        log_sum = log_sum.try_add(&apply_spectral(a.as_sym(), SpectralFn::Log)?.scale(wj))?;
    }
    let log_euclid = apply_spectral(&log_sum, SpectralFn::Exp)?;
    let d = target.as_sym().relative_distance(&log_euclid);
    r.record("log_euclidean_target", d <= 1e-12, &[("rel_diff", d)]);

    let directions = (0..n)
        .map(|_| symmetric_with_radius(&mut s, dim, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let deriv = derivative_at_identity_check(&w, &directions, &schedule, &cfg)?;
    let (rp, rn) = deriv.ratios();
    let last_point = deriv.points.last().expect("non-empty schedule");
    // Collinear directions (common in dimension 1) make the quotient exact,
    // leaving only roundoff; ratios of roundoff carry no information.
    let exact = deriv
        .points
        .iter()
        .all(|p| p.error_pos.max(p.error_neg) <= EXACT_DERIVATIVE_TOL);
    r.record(
        "derivative_first_order",
        exact || (first_order_ratios(&rp, 4) && first_order_ratios(&rn, 4)),
        &[
            ("final_error_pos", last_point.error_pos),
            ("final_error_neg", last_point.error_neg),
            ("exact", if exact { 1.0 } else { 0.0 }),
        ],
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ensemble_passes() {
        let spec = EnsembleSpec {
            count: 0,
            ..EnsembleSpec::default()
        };
        let r = run_suite(&spec, &SuiteSelection::all()).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.summary.total, 0);
    }

    #[test]
    fn selection_parsing() {
        assert_eq!("all".parse::<SuiteSelection>().unwrap().0.len(), 6);
        assert_eq!(
            "lie-trotter".parse::<SuiteSelection>().unwrap().0,
            vec![Suite::LieTrotter]
        );
        assert!("nope".parse::<SuiteSelection>().is_err());
    }

    #[test]
    fn small_run_is_deterministic_and_passes() {
        let spec = EnsembleSpec {
            count: 3,
            ..EnsembleSpec::default()
        };
        let a = run_suite(&spec, &SuiteSelection::all()).unwrap();
        let b = run_suite(&spec, &SuiteSelection::all()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        if let Some(f) = a.failures().next() {
            panic!("{f:?}");
        }
        assert_eq!(a.summary.total, a.summary.passes + a.summary.failures);
    }

    #[test]
    fn single_instance_replays() {
        let spec = EnsembleSpec {
            count: 2,
            ..EnsembleSpec::default()
        };
        let report = run_suite(&spec, &"det".parse().unwrap()).unwrap();
        let rec = &report.records[report.records.len() - 1];
        let replay = run_instance(Suite::Det, &spec, rec.instance_index, rec.instance_seed);
        assert!(replay.contains(rec));
    }
}
