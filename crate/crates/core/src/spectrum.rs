//! Discrete spectrum from the zeros of `det F_0(z)` on the segment
//! `z = -it`, `t ∈ (-1, 0) ∪ (0, 1)`, where `λ = -t - 1/t` is real with
//! `|λ| > 2`.
//!
//! Simplicity of a zero `z_0` is certified through the Green identity
//!
//! ```text
//! (G_1'(z_0))* A_0 F_0(z_0) - (F_0'(z_0))* A_0 G_1(z_0)
//!     = -i(1 - t⁻²) Σ_{n≥1} [F_n*(z_0) F_n(z_0) + G_n*(z_0) G_n(z_0)],
//! ```
//!
//! which follows from `λ' = -i(1 + z⁻²)` evaluated at `z = -it`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jost::{compute_jost, JostSeries};
use crate::matkit::{ComplexMatrix, C64, I, ZERO};
use crate::poly::{MatrixPolynomial, Polynomial};
use crate::profile::{CoeffKind, CoefficientProfile};

/// Interpolation residual tolerated at held-out points, relative to `Σ|c_j|`.
pub const INTERPOLATION_RTOL: f64 = 1e-9;
/// `|det F_0|` accepted at a root, relative to the cancellation-free size
/// of the polynomial at that point.
pub const ROOT_RTOL: f64 = 1e-10;
/// Largest `|Im t|` of an accepted root.
pub const REAL_AXIS_TOL: f64 = 1e-8;
/// Roots closer than this in `t` are merged.
pub const DEDUP_TOL: f64 = 1e-8;
/// Relative size a derivative must reach to count as nonzero.
pub const MULTIPLICITY_RTOL: f64 = 1e-6;
/// Null-vector residual `‖F_0 u‖` allowed, relative to `max(1, ‖F_0‖_F)`.
pub const NULL_VECTOR_RTOL: f64 = 1e-8;
/// Free-tail term size at which the mass sum switches to its closed form.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

const NEWTON_MAX_ITERS: usize = 100;
/// Roots of `det F_0` just outside the unit circle make the phase of the
/// determinant on `|z| = 1 - ε` arbitrarily steep as `ε → 0`; the
/// independent root count is therefore taken on a slightly smaller disc.
pub const DISC_COUNT_MARGIN: f64 = 1e-3;
/// Relative step size below which non-decreasing steps mean Newton has
/// reached the rounding floor.
const STAGNATION_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchOptions {
    pub grid_points: usize,
    pub newton_tol: f64,
    pub boundary_margin: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: 20001,
            newton_tol: 1e-12,
            boundary_margin: 1e-6,
        }
    }
}

/// Real parameter `t = iz` of the admissible segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    t: f64,
}

impl SpectralParameter {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && t != 0.0 && t.abs() < 1.0) {
            return Err(Error::Domain(format!("t = {t} is not in (-1, 0) ∪ (0, 1)")));
        }
        Ok(Self { t })
    }

    pub fn t(self) -> f64 {
        self.t
    }

    /// `z = -it`.
    pub fn z(self) -> C64 {
        C64::new(0.0, -self.t)
    }

    /// `λ = -t - 1/t`.
    pub fn lambda(self) -> f64 {
        -self.t - 1.0 / self.t
    }
}

pub fn lambda_of_t(t: f64) -> Result<f64> {
    Ok(SpectralParameter::new(t)?.lambda())
}

/// Coefficients of `d(z) = det F_0(z)`.
///
/// `d` has degree at most `m · deg F_0`; it is sampled at that many plus
/// one roots of unity and the samples are transformed back by a discrete
/// Fourier sum, which solves the Vandermonde system exactly on the unit
/// circle. The result is checked against direct determinants at ten
/// interior points.
pub fn det_polynomial(f0: &MatrixPolynomial) -> Result<Polynomial> {
    let m = f0.dim();
    let deg_f = f0.degree(0.0).unwrap_or(0).max(1);
    let degree = m * deg_f;
    let samples = degree + 1;
    let values: Vec<C64> = (0..samples)
        .map(|j| {
            let z = C64::from_polar(1.0, TAU * j as f64 / samples as f64);
            f0.eval(z).det()
        })
        .collect();
    let coeffs: Vec<C64> = (0..samples)
        .map(|k| {
            let sum: C64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let angle = -TAU * ((j * k) % samples) as f64 / samples as f64;
                    v * C64::from_polar(1.0, angle)
                })
                .sum();
            sum / samples as f64
        })
        .collect();
    let poly = Polynomial::new(coeffs);

    let scale = poly.l1_norm().max(f64::MIN_POSITIVE);
    let tolerance = INTERPOLATION_RTOL * scale;
    let mut residual = 0.0f64;
    for k in 0..10 {
        let z = C64::from_polar(0.5 + 0.045 * k as f64, 0.37 + 0.61 * k as f64);
        residual = residual.max((poly.eval(z) - f0.eval(z).det()).norm());
    }
    if residual > tolerance {
        return Err(Error::IllConditionedInterpolation {
            residual,
            tolerance,
        });
    }
    Ok(poly)
}

/// Multiplicity of the zero of `d` at `z_0 = -i t_0`: the order of the
/// first derivative that is nonzero relative to its cancellation-free
/// size.
pub fn multiplicity(d: &Polynomial, t0: f64) -> Result<usize> {
    let z0 = C64::new(0.0, -t0);
    let r = z0.norm();
    let value = d.eval(z0).norm();
    if value > 1e-8 * d.derivative_scale(0, r).max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!(
            "t = {t0} is not a root (|d| = {value:e})"
        )));
    }
    let top = d.coeffs().len().saturating_sub(1);
    for k in 1..=top {
        let dk = d.eval_derivative(k, z0).norm();
        if dk > MULTIPLICITY_RTOL * d.derivative_scale(k, r) {
            return Ok(k);
        }
    }
    Err(Error::DegenerateRoot { t: t0, order: top })
}

/// `Σ_{n≥1} [F_n* F_n + G_n* G_n]` at `z`. Sites up to `N0 + 1` are summed
/// directly; in the free region the terms `(r^{4n+2} + r^{4n}) I` are added
/// until one drops below `tail_tol`, and the remaining geometric tail is
/// added in closed form.
pub fn mass_matrix(j: &JostSeries, z: C64, tail_tol: f64) -> Result<ComplexMatrix> {
    let m = j.m();
    let mut acc = ComplexMatrix::zeros(m);
    for n in 1..=j.n0() + 1 {
        let (f, g) = j.eval_jost(n, z)?;
        acc = &acc + &(&f.adjoint() * &f);
        acc = &acc + &(&g.adjoint() * &g);
    }
    let free = free_tail(z, j.n0() + 2, tail_tol)?;
    acc.add_scaled(&ComplexMatrix::identity(m), C64::new(free, 0.0));
    Ok(acc)
}

/// `Σ_{n≥start} (r^{4n+2} + r^{4n})` with `r = |z|`: terms are added until
/// one drops below `tail_tol`, then the geometric remainder in closed form.
fn free_tail(z: C64, start: usize, tail_tol: f64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2 >= 1.0 {
        return Err(Error::Domain("mass sum diverges on the unit circle".into()));
    }
    let mut n = start as i32;
    let mut sum = 0.0;
    loop {
        let term = r2.powi(2 * n) * (1.0 + r2);
        if term < tail_tol {
            return Ok(sum + term / (1.0 - r2 * r2));
        }
        sum += term;
        n += 1;
    }
}

/// `Σ_{n≥1} (‖F_n(z) u‖² + ‖G_n(z) u‖²)`, summed term by term so that the
/// result is positive however small it is.
pub fn jost_mass(j: &JostSeries, z: C64, u: &[C64], tail_tol: f64) -> Result<f64> {
    let mut sum = 0.0;
    for n in 1..=j.n0() + 1 {
        let (f, g) = j.eval_jost(n, z)?;
        sum += norm(&f.mul_vec(u)).powi(2) + norm(&g.mul_vec(u)).powi(2);
    }
    Ok(sum + free_tail(z, j.n0() + 2, tail_tol)? * norm(u).powi(2))
}

/// Both sides of the Green identity at `z_0 = -it`.
pub fn wronskian_sides(
    j: &JostSeries,
    p: &CoefficientProfile,
    t: f64,
    tail_tol: f64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let param = SpectralParameter::new(t)?;
    let z = param.z();
    let a0 = p.coefficient_at(CoeffKind::A, 0)?;
    let f0 = j.eval_f(0, z)?;
    let f0p = j.eval_f_prime(0, z)?;
    let g1 = j.eval_g(1, z)?;
    let g1p = j.eval_g_prime(1, z)?;
    let lhs = &(&g1p.adjoint() * &(&a0 * &f0)) - &(&f0p.adjoint() * &(&a0 * &g1));
    let factor = -I * (1.0 - 1.0 / (t * t));
    let rhs = mass_matrix(j, z, tail_tol)?.scale(factor);
    Ok((lhs, rhs))
}

/// `‖LHS − RHS‖_F / max(1, ‖RHS‖_F)` for the Green identity.
pub fn wronskian_identity_gap(
    j: &JostSeries,
    p: &CoefficientProfile,
    t: f64,
    tail_tol: f64,
) -> Result<f64> {
    let (lhs, rhs) = wronskian_sides(j, p, t, tail_tol)?;
    Ok((&lhs - &rhs).frobenius_norm() / rhs.frobenius_norm().max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplicityCertificate {
    /// `⟨A_0 G_1(z_0) u, F_0'(z_0) u⟩ = (F_0' u)* (A_0 G_1 u)`.
    pub value: C64,
    /// `i(1 - t_0⁻²) Σ_{n≥1} (‖F_n u‖² + ‖G_n u‖²)`.
    pub factored: C64,
    pub mass: f64,
    pub relative_gap: f64,
    /// `‖F_0(z_0) u‖` for the extracted null vector.
    pub null_residual: f64,
    /// Bound on `|(G_1' u)* A_0 F_0 u|`, the term of the Green identity that
    /// vanishes at an exact root; `value` cannot be resolved below it.
    pub boundary_defect: f64,
}

impl SimplicityCertificate {
    pub fn phase_defect(&self, t0: f64) -> f64 {
        certificate_phase_defect(self.value, t0)
    }
}

/// Relative distance of `value / (i(1 - t_0⁻²))` from the positive real
/// axis; infinite when the quotient is not in the right half plane.
pub fn certificate_phase_defect(value: C64, t0: f64) -> f64 {
    let w = value / (I * (1.0 - 1.0 / (t0 * t0)));
    if !(w.re > 0.0) {
        return f64::INFINITY;
    }
    w.im.abs() / w.norm()
}

pub fn simplicity_certificate(
    j: &JostSeries,
    p: &CoefficientProfile,
    t0: f64,
) -> Result<SimplicityCertificate> {
    let param = SpectralParameter::new(t0)?;
    let z0 = param.z();
    let f0 = j.eval_f(0, z0)?;
    let eig = (&f0.adjoint() * &f0).herm_eig()?;
    let mut u = eig.vectors.column(0);
    // The Gram matrix squares the condition number; two steps of inverse
    // iteration on F_0 itself recover the digits lost there.
    if let Some(inv) = f0.raw_inverse() {
        for _ in 0..2 {
            let x = inv.mul_vec(&u);
            let len = norm(&x);
            if !(len.is_finite() && len > 0.0) {
                break;
            }
            u = x.iter().map(|v| v / len).collect();
        }
    }
    let null_residual = norm(&f0.mul_vec(&u));
    if null_residual > NULL_VECTOR_RTOL * f0.frobenius_norm().max(1.0) {
        return Err(Error::NullVectorNotFound {
            t: t0,
            sigma_min: null_residual,
        });
    }
    let a0 = p.coefficient_at(CoeffKind::A, 0)?;
    let x = (&a0 * &j.eval_g(1, z0)?).mul_vec(&u);
    let y = j.eval_f_prime(0, z0)?.mul_vec(&u);
    let value: C64 = y.iter().zip(&x).map(|(yk, xk)| yk.conj() * xk).sum();
    let w = a0.adjoint().mul_vec(&j.eval_g_prime(1, z0)?.mul_vec(&u));
    let boundary_defect = norm(&w) * null_residual;

    let mass = jost_mass(j, z0, &u, DEFAULT_TAIL_TOL)?;
    let factored = I * (1.0 - 1.0 / (t0 * t0)) * mass;
    let relative_gap = (value - factored).norm() / factored.norm();
    Ok(SimplicityCertificate {
        value,
        factored,
        mass,
        relative_gap,
        null_residual,
        boundary_defect,
    })
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueRecord {
    pub t: f64,
    pub z: C64,
    pub lambda: f64,
    /// `|det F_0(z)|` at the root.
    pub det_residual: f64,
    /// `|d/dt det F_0(-it)|` at the root.
    pub derivative_magnitude: f64,
    pub multiplicity: usize,
    pub simplicity_certificate: Option<C64>,
    pub certificate_gap: Option<f64>,
    pub oracle_lambda: Option<f64>,
    pub oracle_gap: Option<f64>,
}

impl Serialize for EigenvalueRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("t", &self.t)?;
        map.serialize_entry("z", &self.z)?;
        map.serialize_entry("lambda", &self.lambda)?;
        map.serialize_entry("multiplicity", &self.multiplicity)?;
        map.serialize_entry("det_residual", &self.det_residual)?;
        map.serialize_entry("derivative_magnitude", &self.derivative_magnitude)?;
        map.serialize_entry("certificate", &self.simplicity_certificate)?;
        map.serialize_entry("certificate_gap", &self.certificate_gap)?;
        if let Some(x) = self.oracle_lambda {
            map.serialize_entry("oracle_lambda", &x)?;
        }
        if let Some(x) = self.oracle_gap {
            map.serialize_entry("oracle_gap", &x)?;
        }
        map.end()
    }
}

/// `det F_0(z) / z^m`, evaluated directly from the matrix coefficients.
///
/// `F_0(z) = z R(z)` with `R(0) = a_{0,1}` invertible, so `det R` carries
/// every nonzero root of `det F_0` and none at the origin. Expanding the
/// determinant into monomials first is avoided on purpose: for larger
/// profiles `|det F_0|` on the unit circle exceeds its values on the
/// segment by many orders of magnitude, and the expanded coefficients
/// lose the roots to cancellation.
#[derive(Debug, Clone)]
pub struct ReducedDet {
    r: MatrixPolynomial,
    norms: Vec<f64>,
    m: usize,
}

impl ReducedDet {
    pub fn new(j: &JostSeries) -> Self {
        let f0 = j.jost_function();
        let r = MatrixPolynomial::new(f0.coeffs()[1..].to_vec());
        let norms = r.coeffs().iter().map(|c| c.frobenius_norm()).collect();
        Self { r, norms, m: j.m() }
    }

    pub fn value(&self, z: C64) -> C64 {
        self.r.eval(z).det()
    }

    /// `(det R, (det R)')`, the derivative by Jacobi's formula written as
    /// a sum of determinants with one column taken from `R'`.
    pub fn value_and_derivative(&self, z: C64) -> (C64, C64) {
        let r = self.r.eval(z);
        let rp = self.r.eval_derivative(z);
        let mut derivative = ZERO;
        for k in 0..self.m {
            let mut x = r.clone();
            for i in 0..self.m {
                x[(i, k)] = rp[(i, k)];
            }
            derivative += x.det();
        }
        (r.det(), derivative)
    }

    /// `(Σ_s ‖a_{0,s}‖_F |z|^s)^m`, a cancellation-free bound on `|det F_0|`.
    pub fn det_scale(&self, radius: f64) -> f64 {
        let s = self.norms.iter().rev().fold(0.0, |acc, n| acc * radius + n) * radius;
        s.powi(self.m as i32)
    }

    /// Winding number of `det R` along the circle `|z - center| = radius`,
    /// i.e. the number of roots inside. Sampling is refined until every
    /// phase increment is below `π/4`; `None` if the determinant vanishes
    /// on the circle or the refinement limit is reached.
    pub fn winding_number(&self, center: C64, radius: f64) -> Option<usize> {
        let mut samples = 64 * (self.r.coeffs().len() * self.m).max(1);
        while samples <= 1 << 20 {
            let values: Vec<C64> = (0..samples)
                .map(|k| {
                    self.value(center + C64::from_polar(radius, TAU * k as f64 / samples as f64))
                })
                .collect();
            if values.iter().any(|v| *v == ZERO || !v.is_finite()) {
                return None;
            }
            let mut total = 0.0;
            let mut largest = 0.0f64;
            for k in 0..samples {
                let step = (values[(k + 1) % samples] / values[k]).arg();
                total += step;
                largest = largest.max(step.abs());
            }
            if largest < std::f64::consts::FRAC_PI_4 {
                let w = (total / TAU).round();
                return (w >= 0.0).then_some(w as usize);
            }
            samples *= 2;
        }
        None
    }

    /// Newton's method on `det R`. Stops when the relative step drops
    /// below `tol`, or when the steps stop shrinking at the rounding floor
    /// of the determinant, in which case the iterate with the smallest
    /// `|det R|` is returned.
    pub fn newton(&self, mut z: C64, tol: f64) -> Option<C64> {
        let mut best = (f64::INFINITY, z);
        let mut previous = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITERS {
            let (v, dv) = self.value_and_derivative(z);
            if v.norm() < best.0 {
                best = (v.norm(), z);
            }
            if v == ZERO {
                return Some(z);
            }
            if dv == ZERO {
                return None;
            }
            let step = v / dv;
            let size = step.norm();
            if size <= tol * z.norm() {
                return Some(z - step);
            }
            if size >= previous && size < STAGNATION_RTOL * z.norm() {
                return Some(best.1);
            }
            previous = size;
            z -= step;
            if !z.is_finite() || z.norm() > 2.0 {
                return None;
            }
        }
        None
    }
}

/// Multiplicity of the root `z_0 = -i t_0` of `det F_0`, counted by the
/// argument principle on a circle of radius `radius` around it. The circle
/// must exclude every other root.
pub fn root_multiplicity(det: &ReducedDet, t0: f64, radius: f64) -> Result<usize> {
    let z0 = SpectralParameter::new(t0)?.z();
    match det.winding_number(z0, radius) {
        Some(0) => Err(Error::Domain(format!(
            "no root of det F0 within {radius:e} of t = {t0}"
        ))),
        Some(k) => Ok(k),
        None => Err(Error::DegenerateRoot { t: t0, order: 0 }),
    }
}

/// Everything [`find_eigenvalues`] learned about `det F_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSearch {
    pub eigenvalues: Vec<EigenvalueRecord>,
    /// Real roots within `boundary_margin` of `t = 0` or `|t| = 1`.
    pub boundary_suspect: Vec<f64>,
    /// Grid minima from which Newton did not converge.
    pub newton_failures: Vec<f64>,
    /// Radius of the disc in which roots are counted independently.
    pub disc_radius: f64,
    /// Nonzero roots of `det F_0` in `|z| < disc_radius`, counted with
    /// multiplicity by the argument principle; `None` if the count could
    /// not be resolved.
    pub disc_root_count: Option<usize>,
}

impl EigenSearch {
    /// Accepted roots counted with multiplicity.
    pub fn root_count(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity.max(1)).sum()
    }

    /// Accepted roots with `|t| < radius`, counted with multiplicity.
    pub fn root_count_within(&self, radius: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|e| e.t.abs() < radius)
            .map(|e| e.multiplicity.max(1))
            .sum()
    }

    /// Whether the grid search found every root that the argument
    /// principle counts inside `disc_radius`.
    pub fn is_complete(&self) -> bool {
        self.disc_root_count == Some(self.root_count_within(self.disc_radius))
    }
}

/// Scans `|det F_0(-it)|` on a uniform grid over both halves of the
/// admissible segment, polishes every local minimum by Newton's method on
/// the directly evaluated determinant, and keeps the real roots.
///
/// The `m`-fold zero of `det F_0` at `z = 0` is divided out beforehand
/// (see [`ReducedDet`]).
pub fn find_eigenvalues(
    j: &JostSeries,
    p: &CoefficientProfile,
    opts: &SearchOptions,
) -> Result<EigenSearch> {
    if opts.grid_points < 3 || !(opts.newton_tol > 0.0) || !(opts.boundary_margin > 0.0) {
        return Err(Error::Domain(
            "search options must be positive (grid ≥ 3)".into(),
        ));
    }
    let m = j.m();
    let det = ReducedDet::new(j);

    let margin = opts.boundary_margin;
    let mut candidates = Vec::new();
    for (lo, hi) in [(-1.0 + margin, -margin), (margin, 1.0 - margin)] {
        let g = opts.grid_points;
        let ts: Vec<f64> = (0..g)
            .map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64)
            .collect();
        let vals: Vec<f64> = ts
            .iter()
            .map(|&t| det.value(C64::new(0.0, -t)).norm())
            .collect();
        for i in 0..g {
            let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
            let right = if i + 1 == g {
                f64::INFINITY
            } else {
                vals[i + 1]
            };
            if vals[i] <= left && vals[i] <= right {
                candidates.push(ts[i]);
            }
        }
    }

    let mut roots: Vec<f64> = Vec::new();
    let mut boundary_suspect: Vec<f64> = Vec::new();
    let mut newton_failures = Vec::new();
    for start in candidates {
        let Some(z) = det.newton(C64::new(0.0, -start), opts.newton_tol) else {
            newton_failures.push(start);
            continue;
        };
        let t_complex = I * z;
        if t_complex.im.abs() > REAL_AXIS_TOL {
            continue;
        }
        let t = t_complex.re;
        if !(t != 0.0 && t.abs() < 1.0) {
            continue;
        }
        let z0 = C64::new(0.0, -t);
        let residual = det.value(z0).norm() * t.abs().powi(m as i32);
        if residual > ROOT_RTOL * det.det_scale(t.abs()) {
            continue;
        }
        if t.abs() < margin || t.abs() > 1.0 - margin {
            boundary_suspect.push(t);
        } else {
            roots.push(t);
        }
    }
    let roots = dedup(roots);
    let boundary_suspect = dedup(boundary_suspect);

    let mut eigenvalues = Vec::with_capacity(roots.len());
    for &t in &roots {
        let param = SpectralParameter::new(t)?;
        let z = param.z();
        let (value, derivative) = det.value_and_derivative(z);
        let scale = t.abs().powi(m as i32);

        let mut radius = 0.05f64.min(0.5 * t.abs()).min(0.5 * (1.0 - t.abs()));
        for &other in roots.iter().chain(&boundary_suspect) {
            if other != t {
                radius = radius.min(0.5 * (other - t).abs());
            }
        }
        let mult = root_multiplicity(&det, t, radius).unwrap_or(0);
        let cert = simplicity_certificate(j, p, t).ok();
        eigenvalues.push(EigenvalueRecord {
            t,
            z,
            lambda: param.lambda(),
            det_residual: value.norm() * scale,
            derivative_magnitude: derivative.norm() * scale,
            multiplicity: mult,
            simplicity_certificate: cert.map(|c| c.value),
            certificate_gap: cert.map(|c| c.relative_gap),
            oracle_lambda: None,
            oracle_gap: None,
        });
    }
    eigenvalues.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    let disc_radius = 1.0 - margin.max(DISC_COUNT_MARGIN);
    let disc_root_count = det.winding_number(ZERO, disc_radius);

    Ok(EigenSearch {
        eigenvalues,
        boundary_suspect,
        newton_failures,
        disc_radius,
        disc_root_count,
    })
}

fn dedup(mut ts: Vec<f64>) -> Vec<f64> {
    ts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(ts.len());
    for t in ts {
        match out.last() {
            Some(&last) if (t - last).abs() < DEDUP_TOL => {}
            _ => out.push(t),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub band: [f64; 2],
    pub eigenvalues: Vec<EigenvalueRecord>,
    pub root_count_bound: usize,
    pub profile_digest: String,
    pub boundary_suspect: Vec<f64>,
    pub disc_radius: f64,
    pub disc_root_count: Option<usize>,
}

/// Runs the whole Jost pipeline on a profile.
pub fn spectral_report(p: &CoefficientProfile, opts: &SearchOptions) -> Result<SpectralReport> {
    let j = compute_jost(p)?;
    let search = find_eigenvalues(&j, p, opts)?;
    Ok(SpectralReport {
        band: [-2.0, 2.0],
        eigenvalues: search.eigenvalues,
        root_count_bound: root_count_bound(p),
        profile_digest: p.digest(),
        boundary_suspect: search.boundary_suspect,
        disc_radius: search.disc_radius,
        disc_root_count: search.disc_root_count,
    })
}

/// `m (4 N0 + 3)`, the degree bound on `det F_0`.
pub fn root_count_bound(p: &CoefficientProfile) -> usize {
    p.m() * (4 * p.n0() + 3)
}

pub const CSV_HEADER: &str = "t,z_re,z_im,lambda,multiplicity,det_residual";

impl SpectralReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for e in &self.eigenvalues {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:e}",
                e.t, e.z.re, e.z.im, e.lambda, e.multiplicity, e.det_residual
            );
        }
        out
    }
}
