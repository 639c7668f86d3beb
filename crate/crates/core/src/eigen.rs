//! Cyclic Jacobi eigensolver for real symmetric matrices.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};

/// Maximum number of full cyclic sweeps.
pub const MAX_SWEEPS: usize = 64;
/// Converged once the off-diagonal Frobenius mass drops below this multiple of `‖A‖_F`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// `A = Q · diag(λ) · Qᵀ` with `λ` sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    q: Matrix,
    lambda: Vec<f64>,
}

impl EigenDecomposition {
    /// Orthogonal factor; column `k` is the eigenvector of `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.q
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.lambda.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.lambda.last().copied().unwrap_or(0.0)
    }

    /// Decomposition with the same eigenvectors and spectrum `f(λ)`, re-sorted
    /// into descending order.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> EigenDecomposition {
        let values: Vec<f64> = self.lambda.iter().map(|&l| f(l)).collect();
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        EigenDecomposition {
            q: Matrix::from_fn(n, |i, j| self.q.get(i, order[j])),
            lambda: order.iter().map(|&k| values[k]).collect(),
        }
    }

    /// `Q · diag(f(λ)) · Qᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let values: Vec<f64> = self.lambda.iter().map(|&l| f(l)).collect();
        self.compose(&values)
    }

    pub fn recompose(&self) -> SymMatrix {
        self.compose(&self.lambda)
    }

    fn compose(&self, values: &[f64]) -> SymMatrix {
        let n = self.dim();
        let q = &self.q;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|k| q.get(i, k) * values[k] * q.get(j, k)).sum();
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out.symmetrize()
    }
}

impl SymMatrix {
    /// Symmetric eigendecomposition via cyclic Jacobi rotations.
    pub fn eigh(&self) -> Result<EigenDecomposition> {
        jacobi_eigh(self)
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).powi(2);
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigh(input: &SymMatrix) -> Result<EigenDecomposition> {
    let n = input.dim();
    let mut a = input.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNotConverged {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a.set(p, p, a.get(p, p) - t * apq);
                a.set(q, q, a.get(q, q) + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        let new_kp = c * akp - s * akq;
                        let new_kq = s * akp + c * akq;
                        a.set(k, p, new_kp);
                        a.set(p, k, new_kp);
                        a.set(k, q, new_kq);
                        a.set(q, k, new_kq);
                    }
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let lambda = order.iter().map(|&k| a.get(k, k)).collect();
    let q = Matrix::from_fn(n, |i, j| v.get(i, order[j]));
    Ok(EigenDecomposition { q, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn random_symmetric(seed: u64, n: usize) -> SymMatrix {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let m = Matrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        m.symmetrize()
    }

    fn check_invariants(a: &SymMatrix, eig: &EigenDecomposition) {
        let n = a.dim();
        let q = eig.eigenvectors();
        let qtq = (&q.transpose() * q).try_sub(&Matrix::identity(n)).unwrap();
        assert!(qtq.frobenius_norm() <= 1e-12 * n as f64);
        let rec = eig.recompose();
        assert!(
            rec.relative_distance(a) <= 1e-12,
            "{}",
            rec.relative_distance(a)
        );
        assert!(eig.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_input() {
        let a = SymMatrix::from_diagonal(&[3.0, 1.0]);
        let eig = a.eigh().unwrap();
        assert_eq!(eig.eigenvalues(), &[3.0, 1.0]);
        assert_eq!(eig.eigenvectors(), &Matrix::identity(2));
    }

    #[test]
    fn ascending_diagonal_is_reordered() {
        let a = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let eig = a.eigh().unwrap();
        assert_eq!(eig.eigenvalues(), &[3.0, 2.0, 1.0]);
        check_invariants(&a, &eig);
    }

    #[test]
    fn swap_matrix() {
        let a = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let eig = a.eigh().unwrap();
        assert!((eig.eigenvalues()[0] - 1.0).abs() < 1e-15);
        assert!((eig.eigenvalues()[1] + 1.0).abs() < 1e-15);
        let q = eig.eigenvectors();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q.get(0, 0).abs() - r).abs() < 1e-15);
        assert!((q.get(1, 0) - q.get(0, 0)).abs() < 1e-15);
        assert!((q.get(1, 1) + q.get(0, 1)).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction() {
        for seed in 0..20 {
            let a = random_symmetric(seed, 8);
            let eig = a.eigh().unwrap();
            check_invariants(&a, &eig);
        }
    }

    #[test]
    fn zero_and_scalar() {
        let z = SymMatrix::zeros(3);
        assert_eq!(z.eigh().unwrap().eigenvalues(), &[0.0; 3]);
        let s = SymMatrix::from_diagonal(&[-2.5]);
        assert_eq!(s.eigh().unwrap().eigenvalues(), &[-2.5]);
    }

    #[test]
    fn deterministic() {
        let a = random_symmetric(99, 7);
        assert_eq!(a.eigh().unwrap(), a.eigh().unwrap());
    }

    #[test]
    fn frobenius_matches_spectrum() {
        let a = random_symmetric(5, 6);
        let eig = a.eigh().unwrap();
        let s: f64 = eig.eigenvalues().iter().map(|l| l * l).sum();
        assert!((a.frobenius_norm().powi(2) - s).abs() <= 1e-12 * s);
    }
}
