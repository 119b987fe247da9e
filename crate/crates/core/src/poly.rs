//! Scalar and matrix polynomials in `z`, coefficients in ascending order.

use serde::Serialize;

use crate::matkit::{ComplexMatrix, C64, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Index of the highest coefficient whose modulus exceeds `tol`.
    pub fn degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.norm() > tol)
    }

    /// `Σ |c_j|`, which bounds `|p|` on the closed unit disc.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// k-th derivative at `z`.
    pub fn eval_derivative(&self, k: usize, z: C64) -> C64 {
        let mut acc = ZERO;
        for (j, &c) in self.coeffs.iter().enumerate().skip(k).rev() {
            acc = acc * z + c * falling_factorial(j, k);
        }
        acc
    }

    /// `Σ |c_j| j!/(j-k)! r^{j-k}`: the size of the k-th derivative if no
    /// cancellation occurred, used as the reference scale at radius `r`.
    pub fn derivative_scale(&self, k: usize, r: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate().skip(k).rev() {
            acc = acc * r + c.norm() * falling_factorial(j, k);
        }
        acc
    }

    /// Drops the `k` lowest coefficients, i.e. divides by `z^k` assuming
    /// they vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        Self::new(self.coeffs.iter().skip(k).copied().collect())
    }

    /// Removes trailing coefficients with modulus `≤ tol`.
    pub fn trimmed(&self, tol: f64) -> Self {
        let end = self.degree(tol).map_or(0, |d| d + 1);
        Self::new(self.coeffs[..end].to_vec())
    }

    /// All roots by simultaneous Aberth–Ehrlich iteration. Exact zero
    /// roots are split off first; the polynomial should already be trimmed.
    pub fn roots(&self) -> Vec<C64> {
        let Some(deg) = self.degree(0.0) else {
            return Vec::new();
        };
        let low = self.coeffs.iter().position(|c| *c != ZERO).unwrap_or(0);
        let mut roots = vec![ZERO; low];
        let p = Self::new(self.coeffs[low..=deg].to_vec());
        let d = deg - low;
        if d == 0 {
            return roots;
        }
        let lead = p.coeffs[d];
        let radius = (p.coeffs[0].norm() / lead.norm()).powf(1.0 / d as f64);
        let mut z: Vec<C64> = (0..d)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / d as f64 + 0.4;
                C64::from_polar(radius, theta)
            })
            .collect();
        for _ in 0..1000 {
            let mut biggest = 0.0f64;
            for k in 0..d {
                let val = p.eval(z[k]);
                if val == ZERO {
                    continue;
                }
                let ratio = val / p.eval_derivative(1, z[k]);
                let repulsion: C64 = (0..d)
                    .filter(|&j| j != k)
                    .map(|j| ONE / (z[k] - z[j]))
                    .sum();
                let step = ratio / (ONE - ratio * repulsion);
                if step.is_finite() {
                    z[k] -= step;
                    biggest = biggest.max(step.norm() / z[k].norm().max(f64::MIN_POSITIVE));
                }
            }
            if biggest <= 1e-15 {
                break;
            }
        }
        roots.extend(z);
        roots
    }
}

fn falling_factorial(j: usize, k: usize) -> f64 {
    ((j - k + 1)..=j).map(|x| x as f64).product()
}

/// Polynomial with `m × m` matrix coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    coeffs: Vec<ComplexMatrix>,
}

impl MatrixPolynomial {
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Self {
        assert!(!coeffs.is_empty(), "matrix polynomial needs a coefficient");
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    /// Highest power whose coefficient has Frobenius norm above `tol`.
    pub fn degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.frobenius_norm() > tol)
    }

    pub fn eval(&self, z: C64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for c in self.coeffs.iter().rev() {
            for (a, &b) in acc.as_mut_slice().iter_mut().zip(c.as_slice()) {
                *a = *a * z + b;
            }
        }
        acc
    }

    pub fn eval_derivative(&self, z: C64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (j, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            let j = j as f64;
            for (a, &b) in acc.as_mut_slice().iter_mut().zip(c.as_slice()) {
                *a = *a * z + b * j;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_and_derivatives() {
        // (z + 0.5i)^2 = z^2 + i z - 0.25
        let p = Polynomial::new(vec![c(-0.25, 0.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let z0 = c(0.0, -0.5);
        assert!(p.eval(z0).norm() < 1e-16);
        assert!(p.eval_derivative(1, z0).norm() < 1e-16);
        assert_eq!(p.eval_derivative(2, z0), c(2.0, 0.0));
        assert_eq!(p.eval_derivative(3, z0), ZERO);
        assert_eq!(p.derivative_scale(0, 1.0), 2.25);
    }

    #[test]
    fn aberth_finds_known_roots() {
        // (z - 0.3)(z + 0.7i)(z - 2) z
        let factors = [c(0.3, 0.0), c(0.0, -0.7), c(2.0, 0.0), ZERO];
        let mut coeffs = vec![ONE];
        for r in factors {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (k, &a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            coeffs = next;
        }
        let roots = Polynomial::new(coeffs).roots();
        assert_eq!(roots.len(), 4);
        for r in factors {
            assert!(roots.iter().any(|x| (x - r).norm() < 1e-12), "missing {r}");
        }
    }

    #[test]
    fn matrix_polynomial_eval() {
        let id = ComplexMatrix::identity(2);
        let p = MatrixPolynomial::new(vec![
            ComplexMatrix::zeros(2),
            id.clone(),
            id.scale(c(3.0, 0.0)),
        ]);
        let z = c(0.5, 0.5);
        let expected = z + z * z * 3.0;
        assert!((p.eval(z)[(1, 1)] - expected).norm() < 1e-15);
        assert!((p.eval_derivative(z)[(0, 0)] - (ONE + z * 6.0)).norm() < 1e-15);
        assert_eq!(p.degree(0.0), Some(2));
    }
}
