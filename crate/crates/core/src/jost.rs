//! The Jost solution `(F_n(z), G_n(z))` of an eventually-free profile.
//!
//! With `λ = -iz - (iz)⁻¹ = -i(z - z⁻¹)` the solution normalised to the
//! free solution `e_n(z) = (z, -i)ᵀ z^{2n}` past the support is a
//! polynomial at every site:
//!
//! ```text
//! F_n(z) = z^{2n} Σ_{s≥1} a_{n,s} z^s,     G_n(z) = z^{2n} Σ_{s≥0} b_{n,s} z^s.
//! ```
//!
//! Substituting into the two equations of the system and matching the
//! coefficient of `z^{2n+s}` gives, for every `s` (absent indices are zero),
//!
//! ```text
//! b_{n,s}     = B_n⁻¹ [ i a_{n,s+1} - i a_{n,s-1} - A_n b_{n+1,s-2} - P_n a_{n,s} ]
//! a_{n-1,s+2} = A_{n-1}⁻¹ [ i b_{n,s+1} - i b_{n,s-1} - B_n a_{n,s} - Q_n b_{n,s} ]
//! ```
//!
//! which [`compute_jost`] runs backwards from the free tail at `n = N0 + 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkit::{ComplexMatrix, C64, I, ONE, ZERO};
use crate::poly::MatrixPolynomial;
use crate::profile::{CoeffKind, CoefficientProfile};

/// Slack on `|z| ≤ 1` so that points computed on the unit circle pass.
const UNIT_DISC_SLACK: f64 = 1e-12;

/// `λ(z) = -iz - (iz)⁻¹`.
pub fn lambda_of_z(z: C64) -> C64 {
    -I * z - ONE / (I * z)
}

/// `dλ/dz = -i(1 + z⁻²)`.
pub fn lambda_prime(z: C64) -> C64 {
    -I * (ONE + ONE / (z * z))
}

pub(crate) fn check_disc(z: C64) -> Result<()> {
    if z == ZERO || !z.is_finite() {
        return Err(Error::Domain(format!(
            "z = {z} is not in the punctured disc"
        )));
    }
    if z.norm() > 1.0 + UNIT_DISC_SLACK {
        return Err(Error::Domain(format!("|z| = {} exceeds 1", z.norm())));
    }
    Ok(())
}

/// Per-site polynomial coefficients of the Jost solution.
#[derive(Debug, Clone, PartialEq)]
pub struct JostSeries {
    m: usize,
    n0: usize,
    s_max: usize,
    /// `a[n][s]`, `n = 0..=N0+1`, `s = 0..=S` (`s = 0` is always zero).
    a: Vec<Vec<ComplexMatrix>>,
    /// `b[n][s]`, `n = 0..=N0+2`, `s = 0..=S` (row `n = 0` is unused).
    b: Vec<Vec<ComplexMatrix>>,
}

#[derive(Serialize)]
struct SeriesDoc<'a> {
    m: usize,
    #[serde(rename = "N0")]
    n0: usize,
    #[serde(rename = "S")]
    s_max: usize,
    a: &'a [Vec<ComplexMatrix>],
    b: &'a [Vec<ComplexMatrix>],
}

/// Builds the Jost series by the backward power-matching recursion.
pub fn compute_jost(p: &CoefficientProfile) -> Result<JostSeries> {
    p.ensure_valid()?;
    let m = p.m();
    let n0 = p.n0();
    let s_max = 4 * n0 + 4;
    let zero = ComplexMatrix::zeros(m);
    let mut a = vec![vec![zero.clone(); s_max + 1]; n0 + 2];
    let mut b = vec![vec![zero.clone(); s_max + 1]; n0 + 3];
    a[n0 + 1][1] = ComplexMatrix::identity(m);
    b[n0 + 2][0] = ComplexMatrix::scalar(m, -I);

    // Coefficient lookup with zero outside the stored range.
    fn at(row: &[ComplexMatrix], s: isize) -> Option<&ComplexMatrix> {
        usize::try_from(s).ok().and_then(|s| row.get(s))
    }

    for n in (1..=n0 + 1).rev() {
        let a_n = p.coefficient_at(CoeffKind::A, n)?;
        let b_n = p.coefficient_at(CoeffKind::B, n)?;
        let p_n = p.coefficient_at(CoeffKind::P, n)?;
        let q_n = p.coefficient_at(CoeffKind::Q, n)?;
        let a_prev = p.coefficient_at(CoeffKind::A, n - 1)?;
        let b_inv = b_n.inverse()?;
        let a_prev_inv = a_prev.inverse()?;

        for s in 0..=s_max as isize {
            let mut rhs = zero.clone();
            if let Some(x) = at(&a[n], s + 1) {
                rhs.add_scaled(x, I);
            }
            if let Some(x) = at(&a[n], s - 1) {
                rhs.add_scaled(x, -I);
            }
            if let Some(x) = at(&b[n + 1], s - 2) {
                rhs = &rhs - &(&a_n * x);
            }
            rhs = &rhs - &(&p_n * &a[n][s as usize]);
            b[n][s as usize] = &b_inv * &rhs;
        }
        for t in 1..=s_max as isize {
            let s = t - 2;
            let mut rhs = zero.clone();
            if let Some(x) = at(&b[n], s + 1) {
                rhs.add_scaled(x, I);
            }
            if let Some(x) = at(&b[n], s - 1) {
                rhs.add_scaled(x, -I);
            }
            if let Some(x) = at(&a[n], s) {
                rhs = &rhs - &(&b_n * x);
            }
            if let Some(x) = at(&b[n], s) {
                rhs = &rhs - &(&q_n * x);
            }
            a[n - 1][t as usize] = &a_prev_inv * &rhs;
        }
    }

    Ok(JostSeries { m, n0, s_max, a, b })
}

impl JostSeries {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Maximum stored power offset `S = 4 N0 + 4`.
    pub fn s_max(&self) -> usize {
        self.s_max
    }

    /// `a_{n,s}` for any `n ≥ 0`, `s ≥ 0`, including the free tail and
    /// the zero coefficients past `S`.
    pub fn a_coeff(&self, n: usize, s: usize) -> ComplexMatrix {
        if n > self.n0 + 1 {
            return if s == 1 {
                ComplexMatrix::identity(self.m)
            } else {
                ComplexMatrix::zeros(self.m)
            };
        }
        self.a[n]
            .get(s)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.m))
    }

    /// `b_{n,s}` for any `n ≥ 1`, `s ≥ 0`.
    pub fn b_coeff(&self, n: usize, s: usize) -> ComplexMatrix {
        assert!(n >= 1, "G is defined for n ≥ 1");
        if n > self.n0 + 2 {
            return if s == 0 {
                ComplexMatrix::scalar(self.m, -I)
            } else {
                ComplexMatrix::zeros(self.m)
            };
        }
        self.b[n]
            .get(s)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.m))
    }

    pub fn eval_f(&self, n: usize, z: C64) -> Result<ComplexMatrix> {
        check_disc(z)?;
        let zn = z.powu(2 * n as u32);
        if n > self.n0 + 1 {
            return Ok(ComplexMatrix::scalar(self.m, zn * z));
        }
        Ok(horner(&self.a[n], z).scale(zn))
    }

    pub fn eval_g(&self, n: usize, z: C64) -> Result<ComplexMatrix> {
        check_disc(z)?;
        if n == 0 {
            return Err(Error::IndexOutOfDomain {
                kind: 'G',
                index: 0,
            });
        }
        let zn = z.powu(2 * n as u32);
        if n > self.n0 + 2 {
            return Ok(ComplexMatrix::scalar(self.m, -I * zn));
        }
        Ok(horner(&self.b[n], z).scale(zn))
    }

    /// `(F_n(z), G_n(z))` for `n ≥ 1`.
    pub fn eval_jost(&self, n: usize, z: C64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        Ok((self.eval_f(n, z)?, self.eval_g(n, z)?))
    }

    /// `dF_n/dz`.
    pub fn eval_f_prime(&self, n: usize, z: C64) -> Result<ComplexMatrix> {
        check_disc(z)?;
        if n > self.n0 + 1 {
            let k = 2 * n as u32 + 1;
            return Ok(ComplexMatrix::scalar(self.m, z.powu(k - 1) * k as f64));
        }
        Ok(horner_derivative(&self.a[n], 2 * n, z))
    }

    /// `dG_n/dz`.
    pub fn eval_g_prime(&self, n: usize, z: C64) -> Result<ComplexMatrix> {
        check_disc(z)?;
        if n == 0 {
            return Err(Error::IndexOutOfDomain {
                kind: 'G',
                index: 0,
            });
        }
        if n > self.n0 + 2 {
            let k = 2 * n as u32;
            return Ok(ComplexMatrix::scalar(self.m, -I * z.powu(k - 1) * k as f64));
        }
        Ok(horner_derivative(&self.b[n], 2 * n, z))
    }

    /// The Jost function `F_0(z)` as a matrix polynomial (coefficient of
    /// `z^s` at index `s`).
    pub fn jost_function(&self) -> MatrixPolynomial {
        MatrixPolynomial::new(self.a[0].clone())
    }

    /// Largest norm among coefficients that must vanish: `a_{n,s}` with
    /// `s > 4(N0-n)+3` and `b_{n,s}` with `s > 4(N0-n)+2`, for `n ≤ N0`.
    pub fn zero_pattern_excess(&self) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..=self.n0 {
            let bound = 4 * (self.n0 - n) + 3;
            for s in bound + 1..=self.s_max {
                worst = worst.max(self.a[n][s].frobenius_norm());
            }
            if n >= 1 {
                for s in bound..=self.s_max {
                    worst = worst.max(self.b[n][s].frobenius_norm());
                }
            }
        }
        worst
    }

    /// True iff every stored coefficient past the support equals the free
    /// value exactly.
    pub fn tail_is_free(&self) -> bool {
        let id = ComplexMatrix::identity(self.m);
        let minus_i = ComplexMatrix::scalar(self.m, -I);
        let a_ok = (0..=self.s_max).all(|s| {
            let row = &self.a[self.n0 + 1][s];
            if s == 1 {
                *row == id
            } else {
                row.is_zero()
            }
        });
        let b_ok = (self.n0 + 1..=self.n0 + 2).all(|n| {
            (0..=self.s_max).all(|s| {
                let row = &self.b[n][s];
                if s == 0 {
                    *row == minus_i
                } else {
                    row.is_zero()
                }
            })
        });
        a_ok && b_ok
    }

    /// Adds `delta` to entry `(0, 0)` of `a_{n,s}`. Only useful to check
    /// that the residual diagnostics notice a corrupted series.
    pub fn perturb_a(&mut self, n: usize, s: usize, delta: C64) {
        self.a[n][s][(0, 0)] += delta;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SeriesDoc {
            m: self.m,
            n0: self.n0,
            s_max: self.s_max,
            a: &self.a,
            b: &self.b,
        })
        .expect("series serialises")
    }
}

fn horner(row: &[ComplexMatrix], z: C64) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(row[0].dim());
    for c in row.iter().rev() {
        acc = acc.scale(z);
        acc.add_scaled(c, ONE);
    }
    acc
}

/// `d/dz [ z^{offset} Σ_s row[s] z^s ]`.
fn horner_derivative(row: &[ComplexMatrix], offset: usize, z: C64) -> ComplexMatrix {
    // z^{offset} Σ_{s≥1} (offset+s) c_s z^{s-1}  +  offset c_0 z^{offset-1}
    let mut acc = ComplexMatrix::zeros(row[0].dim());
    for (s, c) in row.iter().enumerate().skip(1).rev() {
        acc = acc.scale(z);
        acc.add_scaled(c, C64::new((offset + s) as f64, 0.0));
    }
    let mut out = acc.scale(z.powu(offset as u32));
    if offset >= 1 {
        out.add_scaled(&row[0], z.powu(offset as u32 - 1) * offset as f64);
    }
    out
}

/// Largest defect of the two system equations over sites `1..=n_max`,
/// each normalised by `max(1, size of the largest term)`.
pub fn recurrence_residual(
    j: &JostSeries,
    p: &CoefficientProfile,
    z: C64,
    n_max: usize,
) -> Result<f64> {
    check_disc(z)?;
    let lambda = lambda_of_z(z);
    let mut worst = 0.0f64;
    for n in 1..=n_max {
        let a_n = p.coefficient_at(CoeffKind::A, n)?;
        let a_prev = p.coefficient_at(CoeffKind::A, n - 1)?;
        let b_n = p.coefficient_at(CoeffKind::B, n)?;
        let p_n = p.coefficient_at(CoeffKind::P, n)?;
        let q_n = p.coefficient_at(CoeffKind::Q, n)?;
        let f_prev = j.eval_f(n - 1, z)?;
        let (f_n, g_n) = j.eval_jost(n, z)?;
        let g_next = j.eval_g(n + 1, z)?;

        let terms1 = [&a_n * &g_next, &b_n * &g_n, &p_n * &f_n, f_n.scale(lambda)];
        let defect1 = &(&(&terms1[0] + &terms1[1]) + &terms1[2]) - &terms1[3];
        let terms2 = [
            &a_prev * &f_prev,
            &b_n * &f_n,
            &q_n * &g_n,
            g_n.scale(lambda),
        ];
        let defect2 = &(&(&terms2[0] + &terms2[1]) + &terms2[2]) - &terms2[3];

        let scale1 = terms1
            .iter()
            .map(|t| t.frobenius_norm())
            .fold(1.0, f64::max);
        let scale2 = terms2
            .iter()
            .map(|t| t.frobenius_norm())
            .fold(1.0, f64::max);
        worst = worst
            .max(defect1.frobenius_norm() / scale1)
            .max(defect2.frobenius_norm() / scale2);
    }
    Ok(worst)
}

/// Closed-form leading blocks `(T_n^{11}, T_n^{12}, T_n^{22})` of the
/// representation, for `n ≥ 1`.
///
/// `T_n^{22} = (∏_{p=n}^{N0} (-A_p B_p))⁻¹` with the product taken as
/// `(-A_{N0} B_{N0}) ⋯ (-A_n B_n)`, `T_n^{11} = -B_n T_n^{22}` and
/// `T_n^{12} = 0`. Past the support all three are `I, I, 0`. These are
/// computed from the profile directly and should match `a_{n,1}` and
/// `i b_{n,0}` of the series.
pub fn closed_form_t(
    p: &CoefficientProfile,
    n: usize,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if n == 0 {
        return Err(Error::IndexOutOfDomain {
            kind: 'T',
            index: 0,
        });
    }
    let m = p.m();
    let mut product = ComplexMatrix::identity(m);
    for site in n..=p.n0() {
        let a = p.coefficient_at(CoeffKind::A, site)?;
        let b = p.coefficient_at(CoeffKind::B, site)?;
        product = &(-&(&a * &b)) * &product;
    }
    let t22 = product.inverse()?;
    let b_n = p.coefficient_at(CoeffKind::B, n)?;
    let t11 = -&(&b_n * &t22);
    Ok((t11, ComplexMatrix::zeros(m), t22))
}

/// Deviations `d_n` of `(F_n, G_n) diag(z^{2n+1}, z^{2n})⁻¹` from
/// `(I, -iI)`, for `n = 0..=N0+1` (the `G` part is absent at `n = 0`).
/// The normalisation is applied to the coefficients, so no power of `z`
/// is ever divided out numerically.
pub fn asymptotics_check(j: &JostSeries, z: C64) -> Result<Vec<f64>> {
    check_disc(z)?;
    let m = j.m;
    let id = ComplexMatrix::identity(m);
    let minus_i = ComplexMatrix::scalar(m, -I);
    let mut out = Vec::with_capacity(j.n0 + 2);
    for n in 0..=j.n0 + 1 {
        let f_scaled = horner(&j.a[n][1..], z);
        let mut d2 = (&f_scaled - &id).frobenius_norm().powi(2);
        if n >= 1 {
            let g_scaled = horner(&j.b[n], z);
            d2 += (&g_scaled - &minus_i).frobenius_norm().powi(2);
        }
        out.push(d2.sqrt());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_reference(n: usize, z: C64) -> (C64, C64) {
        (z.powu(2 * n as u32 + 1), -I * z.powu(2 * n as u32))
    }

    #[test]
    fn free_series_is_exact() {
        for m in [1, 2, 3] {
            let j = compute_jost(&CoefficientProfile::free(m)).unwrap();
            let id = ComplexMatrix::identity(m);
            for n in 0..=3 {
                for s in 0..=j.s_max() + 2 {
                    let expect = if s == 1 {
                        id.clone()
                    } else {
                        ComplexMatrix::zeros(m)
                    };
                    assert_eq!(j.a_coeff(n, s), expect, "a[{n}][{s}]");
                    if n >= 1 {
                        let expect = if s == 0 {
                            ComplexMatrix::scalar(m, -I)
                        } else {
                            ComplexMatrix::zeros(m)
                        };
                        assert_eq!(j.b_coeff(n, s), expect, "b[{n}][{s}]");
                    }
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        let j = compute_jost(&CoefficientProfile::free(2)).unwrap();
        let z = C64::new(0.5, 0.0);
        let (f, g) = j.eval_jost(2, z).unwrap();
        assert_eq!(f, ComplexMatrix::scalar(2, C64::new(0.03125, 0.0)));
        assert_eq!(g, ComplexMatrix::scalar(2, C64::new(0.0, -0.0625)));

        let z = C64::from_polar(1.0, 0.7);
        let f = j.eval_f(1, z).unwrap();
        for c in 0..2 {
            let col: f64 = f.column(c).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            assert!((col - 1.0).abs() < 1e-15);
        }
        assert!(matches!(j.eval_f(0, ZERO), Err(Error::Domain(_))));
        assert!(matches!(
            j.eval_f(0, C64::new(1.5, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(j.eval_g(0, z).is_err());
    }

    #[test]
    fn scalar_benchmark_jost_function() {
        // Worked by hand: F_0(z) = z + 3i z^2 - 3i z^4.
        let p = CoefficientProfile::scalar_single_site(1.0, 1.0, -1.0, 3.0, 0.0);
        let j = compute_jost(&p).unwrap();
        let f0 = j.jost_function();
        let expected = [ZERO, ONE, C64::new(0.0, 3.0), ZERO, C64::new(0.0, -3.0)];
        for (s, c) in f0.coeffs().iter().enumerate() {
            let e = expected.get(s).copied().unwrap_or(ZERO);
            assert!(
                (c[(0, 0)] - e).norm() < 1e-15,
                "z^{s}: {} vs {e}",
                c[(0, 0)]
            );
        }
        assert!(f0.degree(1e-14).unwrap() <= 7);
    }

    #[test]
    fn residual_vanishes_for_scalar_benchmark() {
        let p = CoefficientProfile::scalar_single_site(1.0, 1.0, -1.0, 3.0, 0.0);
        let j = compute_jost(&p).unwrap();
        for k in 0..100 {
            let r = if k % 2 == 0 { 1.0 } else { 0.5 };
            let z = C64::from_polar(r, 0.0628 * k as f64 + 0.01);
            assert!(recurrence_residual(&j, &p, z, 4).unwrap() < 1e-12);
        }
    }

    #[test]
    fn free_residual_is_rounding_level() {
        let p = CoefficientProfile::free(2);
        let j = compute_jost(&p).unwrap();
        for z in [
            C64::new(0.3, 0.4),
            C64::from_polar(1.0, 2.0),
            C64::new(0.0, -0.9),
        ] {
            assert!(recurrence_residual(&j, &p, z, 6).unwrap() < 1e-14);
            let (f, _) = j.eval_jost(3, z).unwrap();
            assert!((f[(0, 0)] - free_reference(3, z).0).norm() < 1e-15);
        }
        assert!(recurrence_residual(&j, &p, ZERO, 3).is_err());
    }

    #[test]
    fn corrupted_series_is_detected() {
        let p = CoefficientProfile::scalar_single_site(1.0, 1.2, -0.9, 0.7, -0.4);
        let mut j = compute_jost(&p).unwrap();
        j.perturb_a(1, 3, C64::new(1e-3, 0.0));
        let z = C64::from_polar(1.0, 0.3);
        assert!(recurrence_residual(&j, &p, z, 3).unwrap() > 1e-6);
    }

    #[test]
    fn closed_form_t_on_free_and_tail() {
        let p = CoefficientProfile::free(2);
        let (t11, t12, t22) = closed_form_t(&p, 3).unwrap();
        assert_eq!(t11, ComplexMatrix::identity(2));
        assert!(t12.is_zero());
        assert_eq!(t22, ComplexMatrix::identity(2));

        let p = CoefficientProfile::scalar_single_site(1.0, 2.0, -0.5, 1.0, 0.0);
        let (t11, _, t22) = closed_form_t(&p, 2).unwrap();
        assert_eq!(t11, ComplexMatrix::identity(1));
        assert_eq!(t22, ComplexMatrix::identity(1));
        let j = compute_jost(&p).unwrap();
        let (t11, _, t22) = closed_form_t(&p, 1).unwrap();
        assert!((&t11 - &j.a_coeff(1, 1)).frobenius_norm() < 1e-14);
        assert!((&t22 - &j.b_coeff(1, 0).scale(I)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn asymptotics_free_is_zero() {
        let j = compute_jost(&CoefficientProfile::free(3)).unwrap();
        let d = asymptotics_check(&j, C64::new(0.2, -0.6)).unwrap();
        assert!(d.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = CoefficientProfile::scalar_single_site(0.8, 1.1, -1.3, 0.6, 0.9);
        let j = compute_jost(&p).unwrap();
        let z = C64::new(0.3, -0.4);
        let h = 1e-6;
        for n in 0..3 {
            let fd =
                (&j.eval_f(n, z + h).unwrap() - &j.eval_f(n, z - h).unwrap()).scale_real(0.5 / h);
            let an = j.eval_f_prime(n, z).unwrap();
            assert!((&fd - &an).frobenius_norm() < 1e-8, "F'_{n}");
            if n >= 1 {
                let fd = (&j.eval_g(n, z + h).unwrap() - &j.eval_g(n, z - h).unwrap())
                    .scale_real(0.5 / h);
                let an = j.eval_g_prime(n, z).unwrap();
                assert!((&fd - &an).frobenius_norm() < 1e-8, "G'_{n}");
            }
        }
    }
}
