//! Dense complex square matrices.
//!
//! Everything here is sized for the block dimension `m` of the Dirac system
//! (a handful of rows), except [`herm_eigenvalues`], which also has to cope
//! with finite sections of a few thousand rows.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative threshold on the smallest singular value below which a matrix
/// is treated as singular by [`ComplexMatrix::inverse`].
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Relative Hermitian defect tolerated by the eigensolvers.
pub const HERMITIAN_RTOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Frobenius,
    Spectral,
}

/// Dense `dim × dim` complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

/// Eigen-decomposition of a Hermitian matrix. `vectors` holds the
/// eigenvectors as columns, in the same order as `values` (ascending).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, ONE)
    }

    /// `c · I`.
    pub fn scalar(dim: usize, c: C64) -> Self {
        let mut out = Self::zeros(dim);
        for k in 0..dim {
            out[(k, k)] = c;
        }
        out
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut out = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            out[(k, k)] = d;
        }
        out
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let diag: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&diag)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut out = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                out[(r, c)] = f(r, c);
            }
        }
        out
    }

    /// Builds a matrix from rows; fails unless the rows form a non-empty
    /// square array of finite numbers.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::Parse("matrix entries must be finite".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self += c · other`, in place.
    pub fn add_scaled(&mut self, other: &Self, c: C64) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * c;
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value, from the top eigenvalue of `a* a`.
    pub fn spectral_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let gram = &self.adjoint() * self;
        let eig = gram.herm_eig().expect("a* a is Hermitian by construction");
        eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Frobenius => self.frobenius_norm(),
            NormKind::Spectral => self.spectral_norm(),
        }
    }

    /// `‖a − a*‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// LU factorisation with partial pivoting. Returns the packed factors,
    /// the row permutation, its parity and whether an exact zero pivot
    /// was met.
    fn lu(&self) -> (Vec<C64>, Vec<usize>, f64, bool) {
        let n = self.dim;
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut zero_pivot = false;
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[k * n + k].norm();
            for r in k + 1..n {
                let v = lu[r * n + k].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                zero_pivot = true;
                continue;
            }
            if piv != k {
                for c in 0..n {
                    lu.swap(k * n + c, piv * n + c);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / pivot;
                lu[r * n + k] = f;
                if f == ZERO {
                    continue;
                }
                for c in k + 1..n {
                    let u = lu[k * n + c];
                    lu[r * n + c] -= f * u;
                }
            }
        }
        (lu, perm, sign, zero_pivot)
    }

    /// Determinant by pivoted elimination.
    pub fn det(&self) -> C64 {
        let n = self.dim;
        let (lu, _, sign, zero_pivot) = self.lu();
        if zero_pivot {
            return ZERO;
        }
        (0..n).fold(C64::new(sign, 0.0), |acc, k| acc * lu[k * n + k])
    }

    /// Inverse from the LU factors, with no conditioning check; `None` only
    /// for an exactly zero pivot or overflow.
    pub fn raw_inverse(&self) -> Option<Self> {
        let n = self.dim;
        let (lu, perm, _, zero_pivot) = self.lu();
        if zero_pivot {
            return None;
        }
        let mut inv = Self::zeros(n);
        let mut col = vec![ZERO; n];
        for j in 0..n {
            for (r, x) in col.iter_mut().enumerate() {
                *x = if perm[r] == j { ONE } else { ZERO };
            }
            for r in 0..n {
                let mut s = col[r];
                for k in 0..r {
                    s -= lu[r * n + k] * col[k];
                }
                col[r] = s;
            }
            for r in (0..n).rev() {
                let mut s = col[r];
                for k in r + 1..n {
                    s -= lu[r * n + k] * col[k];
                }
                col[r] = s / lu[r * n + r];
            }
            for r in 0..n {
                inv[(r, j)] = col[r];
            }
        }
        inv.is_finite().then_some(inv)
    }

    /// Inverse, refusing matrices whose smallest singular value is below
    /// `SINGULAR_RTOL · ‖a‖₂`.
    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .raw_inverse()
            .ok_or(Error::SingularMatrix { sigma_min: 0.0 })?;
        let sigma_min = 1.0 / inv.spectral_norm();
        if sigma_min <= SINGULAR_RTOL * self.spectral_norm() {
            return Err(Error::SingularMatrix { sigma_min });
        }
        Ok(inv)
    }

    /// Smallest singular value, as `1 / ‖a⁻¹‖₂`; zero for exactly singular
    /// input.
    pub fn smallest_singular_value(&self) -> f64 {
        self.raw_inverse()
            .map_or(0.0, |inv| 1.0 / inv.spectral_norm())
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations
    /// with a fixed sweep order.
    pub fn herm_eig(&self) -> Result<HermitianEigen> {
        let n = self.dim;
        let fro = self.frobenius_norm();
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_RTOL * fro {
            return Err(Error::NotHermitian { defect });
        }
        // Work on the exact Hermitian part.
        let mut a = Self::from_fn(n, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5);
        let mut v = Self::identity(n);

        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
                .map(|(r, c)| a[(r, c)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-17 * fro || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<f64> = (0..n).map(|k| a[(k, k)].re).collect();
        order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]).then(x.cmp(&y)));
        let values = order.iter().map(|&k| diag[k]).collect();
        let vectors = Self::from_fn(n, |r, c| v[(r, order[c])]);
        Ok(HermitianEigen { values, vectors })
    }
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
///
/// With `a[p][q] = |β| e^{iφ}` the 2×2 block is `Φ Ã Φ*` for
/// `Φ = diag(1, e^{-iφ})` and real symmetric `Ã`; the rotation is `Φ R`
/// where `R` is the classical real Jacobi rotation for `Ã`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.dim;
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase_conj = (apq / mag).conj();
    let zeta = (aqq - app) / (2.0 * mag);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = phase_conj * (-s);
    let u_qq = phase_conj * c;

    for k in 0..n {
        let x = a[(k, p)];
        let y = a[(k, q)];
        a[(k, p)] = x * u_pp + y * u_qp;
        a[(k, q)] = x * u_pq + y * u_qq;
    }
    for k in 0..n {
        let x = a[(p, k)];
        let y = a[(q, k)];
        a[(p, k)] = u_pp.conj() * x + u_qp.conj() * y;
        a[(q, k)] = u_pq.conj() * x + u_qq.conj() * y;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
    for k in 0..n {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x * u_pp + y * u_qp;
        v[(k, q)] = x * u_pq + y * u_qq;
    }
}

/// All eigenvalues (ascending) of a large dense Hermitian matrix given
/// row-major in `data`: Householder reduction to tridiagonal form followed
/// by implicit QL. Eigenvectors are not formed.
pub fn herm_eigenvalues(dim: usize, data: &[C64]) -> Result<Vec<f64>> {
    assert_eq!(
        data.len(),
        dim * dim,
        "data does not hold a dim × dim matrix"
    );
    let n = dim;
    let mut a = data.to_vec();
    let fro = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut defect = 0.0;
    for r in 0..n {
        for c in 0..n {
            defect += (a[r * n + c] - a[c * n + r].conj()).norm_sqr();
        }
    }
    let defect = defect.sqrt();
    if defect > HERMITIAN_RTOL * fro {
        return Err(Error::NotHermitian { defect });
    }

    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let xnorm = (k + 1..n)
            .map(|r| a[r * n + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if xnorm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        for (i, r) in (k + 1..n).enumerate() {
            v[i] = a[r * n + k];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum();
        off[k] = xnorm;
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // p = τ S v for the trailing block S.
        for i in 0..len {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            let s: C64 = row.iter().zip(&v[..len]).map(|(x, y)| x * y).sum();
            p[i] = s * tau;
        }
        let vp: C64 = v[..len]
            .iter()
            .zip(&p[..len])
            .map(|(x, y)| x.conj() * y)
            .sum();
        let kk = vp * (0.5 * tau);
        for i in 0..len {
            p[i] -= kk * v[i];
        }
        // S -= v w* + w v*, with w stored in p.
        for i in 0..len {
            let vi = v[i];
            let wi = p[i];
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for (j, s) in row.iter_mut().enumerate() {
                *s -= vi * p[j].conj() + wi * v[j].conj();
            }
        }
    }
    for k in 0..n {
        diag[k] = a[k * n + k].re;
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1) * n + n - 2].norm();
    }
    off[n - 1] = 0.0;
    tridiagonal_ql(&mut diag, &mut off);
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal
/// matrix; `off[i]` couples rows `i` and `i + 1`. Eigenvalues overwrite
/// `diag`.
pub fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    if n == 0 {
        return;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 200, "tridiagonal QL failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs)
            .expect("dimension mismatch in matrix add")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs)
            .expect("dimension mismatch in matrix sub")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs)
            .expect("dimension mismatch in matrix mul")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(deserializer)?;
        ComplexMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
