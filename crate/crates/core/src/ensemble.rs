//! Seeded random SPD ensembles.
//!
//! Streams are Xoshiro256++ seeded through SplitMix64, and normals come from
//! the Box–Muller transform on 53-bit uniforms, so an ensemble can be
//! regenerated bit-for-bit from `(seed, index)` in any language.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::barycenter::{MeanProblem, WeightVector};
use crate::error::{Error, Result};
use crate::linalg::{congruence, Matrix, SymMatrix};
use crate::spd::SpdMatrix;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of instance `index` in a suite seeded with `suite_seed`: the
/// `index + 1`-th output of SplitMix64 started at `suite_seed`.
pub fn instance_seed(suite_seed: u64, index: u64) -> u64 {
    splitmix64_mix(suite_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Deterministic sampler used for every random draw in the crate.
pub struct Sampler {
    rng: Xoshiro256PlusPlus,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in an inclusive range.
    pub fn int_in(&mut self, range: &RangeInclusive<usize>) -> usize {
        let span = (range.end() - range.start() + 1) as u64;
        range.start() + (self.rng.next_u64() % span) as usize
    }

    /// Standard normal via Box–Muller (cosine branch only).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    /// Haar-distributed orthogonal matrix from the QR factor of a Gaussian grid.
    pub fn orthogonal(&mut self, dim: usize) -> Matrix {
        let g = Matrix::from_fn(dim, |_, _| self.normal());
        g.qr_orthogonal_factor()
    }

    /// Random symmetric matrix with standard-normal entries on and above the diagonal.
    pub fn symmetric(&mut self, dim: usize) -> SymMatrix {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = self.normal();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m.symmetrize()
    }

    /// Positive weights drawn from `[0.1, 1]` and normalized.
    pub fn weights(&mut self, n: usize) -> WeightVector {
        let raw: Vec<f64> = (0..n).map(|_| self.uniform_in(0.1, 1.0)).collect();
        WeightVector::new(raw).expect("weights drawn from [0.1, 1] are positive")
    }

    pub fn spd(&mut self, dim: usize, condition_max: f64) -> SpdMatrix {
        random_spd(self.next_u64(), dim, condition_max).expect("validated parameters")
    }
}

/// Random SPD matrix `Q diag(λ) Qᵀ` with `λ` log-uniform in
/// `[κ^{-1/2}, κ^{1/2}]` and `Q` Haar orthogonal.
pub fn random_spd(seed: u64, dim: usize, condition_max: f64) -> Result<SpdMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    if !(condition_max >= 1.0 && condition_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "condition_max must be ≥ 1, got {condition_max}"
        )));
    }
    let mut s = Sampler::new(seed);
    let q = s.orthogonal(dim);
    let half_log = 0.5 * condition_max.ln();
    let lambda: Vec<f64> = (0..dim)
        .map(|_| s.uniform_in(-half_log, half_log).exp())
        .collect();
    SpdMatrix::new(congruence(&q, &SymMatrix::from_diagonal(&lambda))?)
}

/// Description of a seeded ensemble of barycenter problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub count: usize,
    pub n_range: (usize, usize),
    pub dim_range: (usize, usize),
    pub condition_max: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            count: 200,
            n_range: (2, 5),
            dim_range: (1, 8),
            condition_max: 100.0,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let (n_lo, n_hi) = self.n_range;
        let (d_lo, d_hi) = self.dim_range;
        if n_lo == 0 || n_lo > n_hi {
            return Err(Error::InvalidParameter(format!(
                "bad n range {n_lo}..={n_hi}"
            )));
        }
        if d_lo == 0 || d_lo > d_hi {
            return Err(Error::InvalidParameter(format!(
                "bad dim range {d_lo}..={d_hi}"
            )));
        }
        if !(self.condition_max >= 1.0 && self.condition_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "condition_max must be ≥ 1, got {}",
                self.condition_max
            )));
        }
        Ok(())
    }

    pub fn instance_seed(&self, index: usize) -> u64 {
        instance_seed(self.seed, index as u64)
    }

    pub fn n_range(&self) -> RangeInclusive<usize> {
        self.n_range.0..=self.n_range.1
    }

    pub fn dim_range(&self) -> RangeInclusive<usize> {
        self.dim_range.0..=self.dim_range.1
    }

    /// Barycenter problem of instance `index`.
    pub fn problem(&self, index: usize) -> MeanProblem {
        problem_from_seed(self.instance_seed(index), self)
    }
}

/// Rebuilds the problem for one instance seed; `spec` supplies the ranges.
pub fn problem_from_seed(seed: u64, spec: &EnsembleSpec) -> MeanProblem {
    let mut s = Sampler::new(seed);
    let n = s.int_in(&spec.n_range());
    let dim = s.int_in(&spec.dim_range());
    let weights = s.weights(n);
    let matrices = (0..n).map(|_| s.spd(dim, spec.condition_max)).collect();
    MeanProblem::new(matrices, weights).expect("generated problem is valid")
}
