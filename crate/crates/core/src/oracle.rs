//! Finite sections of the operator on sites `1..N` with `y_{N+1}^(2) = 0`
//! at the far end. Their spectra give an eigenvalue reference that shares
//! no code with the Jost pipeline beyond the coefficient profile.
//!
//! Basis order is `(y_1^(1), y_1^(2), …, y_N^(1), y_N^(2))`, blocks of size
//! `m`. Two eigenvalue routes are provided: a dense Hermitian eigensolve of
//! the whole section, and a Sturm count on the section viewed as a block
//! tridiagonal chain `(1,2), (1,1), (2,2), (2,1), ...`, which bisects
//! individual eigenvalues in linear time.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkit::{herm_eigenvalues, ComplexMatrix, C64};
use crate::profile::{CoeffKind, CoefficientProfile};
use crate::spectrum::EigenvalueRecord;

pub const DEFAULT_N: usize = 400;
pub const DEFAULT_BAND_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSection {
    n: usize,
    m: usize,
    h: ComplexMatrix,
}

impl FiniteSection {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.h
    }

    /// Row/column offset of block `(site, component)`, both 1-based.
    pub fn offset(&self, site: usize, component: usize) -> usize {
        block_offset(self.m, site, component)
    }
}

fn block_offset(m: usize, site: usize, component: usize) -> usize {
    ((site - 1) * 2 + (component - 1)) * m
}

fn check_length(p: &CoefficientProfile, n: usize) -> Result<()> {
    let required = p.n0() + 2;
    if n < required {
        return Err(Error::TruncationTooSmall { n, required });
    }
    Ok(())
}

fn put(h: &mut ComplexMatrix, row: usize, col: usize, block: &ComplexMatrix) {
    let m = block.dim();
    for i in 0..m {
        for j in 0..m {
            h[(row + i, col + j)] = block[(i, j)];
        }
    }
}

pub fn build_finite_section(p: &CoefficientProfile, n: usize) -> Result<FiniteSection> {
    check_length(p, n)?;
    let m = p.m();
    let mut h = ComplexMatrix::zeros(2 * m * n);
    for site in 1..=n {
        let a = p.coefficient_at(CoeffKind::A, site)?;
        let b = p.coefficient_at(CoeffKind::B, site)?;
        let r1 = block_offset(m, site, 1);
        let r2 = block_offset(m, site, 2);
        put(&mut h, r1, r1, &p.coefficient_at(CoeffKind::P, site)?);
        put(&mut h, r1, r2, &b);
        put(&mut h, r2, r1, &b);
        put(&mut h, r2, r2, &p.coefficient_at(CoeffKind::Q, site)?);
        if site < n {
            let next2 = block_offset(m, site + 1, 2);
            put(&mut h, r1, next2, &a);
            put(&mut h, next2, r1, &a);
        }
    }
    Ok(FiniteSection { n, m, h })
}

/// `J_N = H − H_0`, assembled directly from the coefficient deviations
/// `A_n − I`, `B_n + I`, `P_n`, `Q_n`.
pub fn perturbation_section(p: &CoefficientProfile, n: usize) -> Result<FiniteSection> {
    check_length(p, n)?;
    let m = p.m();
    let id = ComplexMatrix::identity(m);
    let mut h = ComplexMatrix::zeros(2 * m * n);
    for site in 1..=n.min(p.n0()) {
        let da = &p.coefficient_at(CoeffKind::A, site)? - &id;
        let db = &p.coefficient_at(CoeffKind::B, site)? + &id;
        let r1 = block_offset(m, site, 1);
        let r2 = block_offset(m, site, 2);
        put(&mut h, r1, r1, &p.coefficient_at(CoeffKind::P, site)?);
        put(&mut h, r1, r2, &db);
        put(&mut h, r2, r1, &db);
        put(&mut h, r2, r2, &p.coefficient_at(CoeffKind::Q, site)?);
        if site < n {
            let next2 = block_offset(m, site + 1, 2);
            put(&mut h, r1, next2, &da);
            put(&mut h, next2, r1, &da);
        }
    }
    Ok(FiniteSection { n, m, h })
}

/// All `2mN` eigenvalues, ascending, from a dense Hermitian eigensolve.
pub fn oracle_eigs(fs: &FiniteSection) -> Result<Vec<f64>> {
    herm_eigenvalues(fs.h.dim(), fs.h.as_slice())
}

/// The section as a block tridiagonal chain: diagonal blocks and the
/// couplings between consecutive chain nodes.
struct Chain {
    diag: Vec<ComplexMatrix>,
    coupling: Vec<ComplexMatrix>,
}

impl Chain {
    fn new(p: &CoefficientProfile, n: usize) -> Result<Self> {
        check_length(p, n)?;
        let mut diag = Vec::with_capacity(2 * n);
        let mut coupling = Vec::with_capacity(2 * n);
        for site in 1..=n {
            diag.push(p.coefficient_at(CoeffKind::Q, site)?);
            diag.push(p.coefficient_at(CoeffKind::P, site)?);
            coupling.push(p.coefficient_at(CoeffKind::B, site)?);
            if site < n {
                coupling.push(p.coefficient_at(CoeffKind::A, site)?);
            }
        }
        Ok(Self { diag, coupling })
    }

    /// Gershgorin bound on the spectral radius.
    fn radius(&self) -> f64 {
        let norm = |x: &ComplexMatrix| x.frobenius_norm();
        let mut r = 0.0f64;
        for (k, d) in self.diag.iter().enumerate() {
            let left = if k > 0 {
                norm(&self.coupling[k - 1])
            } else {
                0.0
            };
            let right = self.coupling.get(k).map_or(0.0, norm);
            r = r.max(norm(d) + left + right);
        }
        r
    }

    /// Number of eigenvalues strictly below `sigma`, by Sylvester's law of
    /// inertia on the block LDL* factorisation of `H − σ`.
    fn count_below(&self, sigma: f64) -> Result<usize> {
        let m = self.diag[0].dim();
        let shift = ComplexMatrix::scalar(m, C64::new(sigma, 0.0));
        let mut count = 0;
        let mut schur_inv: Option<ComplexMatrix> = None;
        for (k, d) in self.diag.iter().enumerate() {
            let mut s = d - &shift;
            if let Some(inv) = &schur_inv {
                let c = &self.coupling[k - 1];
                s = &s - &(&c.adjoint() * &(inv * c));
            }
            let s = hermitian_part(&s);
            let eig = s.herm_eig()?;
            let scale = s.frobenius_norm().max(1.0);
            let mut inv = ComplexMatrix::zeros(m);
            for (col, &v) in eig.values.iter().enumerate() {
                // An exact zero pivot is nudged to the positive side, which
                // matches counting eigenvalues strictly below σ.
                let v = if v.abs() < 1e-300 * scale {
                    1e-300 * scale
                } else {
                    v
                };
                if v < 0.0 {
                    count += 1;
                }
                let u = eig.vectors.column(col);
                for i in 0..m {
                    for j in 0..m {
                        inv[(i, j)] += u[i] * u[j].conj() / v;
                    }
                }
            }
            schur_inv = Some(inv);
        }
        Ok(count)
    }

    fn len(&self) -> usize {
        self.diag.len() * self.diag[0].dim()
    }
}

fn hermitian_part(x: &ComplexMatrix) -> ComplexMatrix {
    (x + &x.adjoint()).scale_real(0.5)
}

/// Number of eigenvalues of the `N`-site section strictly below `sigma`.
pub fn count_below(p: &CoefficientProfile, n: usize, sigma: f64) -> Result<usize> {
    Chain::new(p, n)?.count_below(sigma)
}

/// Eigenvalues of the `N`-site section with `|λ| > 2 + margin`, ascending,
/// located by bisection on the Sturm count to near machine precision.
pub fn out_of_band_eigs(p: &CoefficientProfile, n: usize, margin: f64) -> Result<Vec<f64>> {
    let chain = Chain::new(p, n)?;
    let total = chain.len();
    let r = chain.radius() + 1.0;
    let lo_edge = -2.0 - margin;
    let hi_edge = 2.0 + margin;
    let below_lo = chain.count_below(lo_edge)?;
    let below_hi = chain.count_below(hi_edge)?;
    let mut out = Vec::with_capacity(below_lo + total - below_hi);
    for index in 0..below_lo {
        out.push(bisect(&chain, index, -r, lo_edge)?);
    }
    for index in below_hi..total {
        out.push(bisect(&chain, index, hi_edge, r)?);
    }
    Ok(out)
}

/// The eigenvalue with ascending index `index`, known to lie in `(lo, hi)`.
fn bisect(chain: &Chain, index: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chain.count_below(mid)? > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `Σ_{k≥n} (‖I−A_k‖ + ‖I+B_k‖ + ‖P_k‖ + ‖Q_k‖)`, Frobenius norms.
pub fn perturbation_tail_norm(p: &CoefficientProfile, n: usize) -> f64 {
    (n.max(1)..=p.n0()).map(|k| p.site_perturbation(k)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMatch {
    pub lambda_jost: f64,
    pub lambda_oracle: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub matches: Vec<SpectrumMatch>,
    pub unmatched_jost: Vec<f64>,
    pub unmatched_oracle: Vec<f64>,
    /// Jost eigenvalues within the band margin, where finite sections
    /// cannot resolve them; never matched.
    pub edge_jost: Vec<f64>,
}

impl ComparisonReport {
    pub fn max_gap(&self) -> f64 {
        self.matches.iter().map(|m| m.gap).fold(0.0, f64::max)
    }

    pub fn is_consistent(&self) -> bool {
        self.unmatched_jost.is_empty() && self.unmatched_oracle.is_empty()
    }

    /// Fills the oracle columns of the matching eigenvalue records.
    pub fn annotate(&self, records: &mut [EigenvalueRecord]) {
        for m in &self.matches {
            if let Some(r) = records.iter_mut().find(|r| r.lambda == m.lambda_jost) {
                r.oracle_lambda = Some(m.lambda_oracle);
                r.oracle_gap = Some(m.gap);
            }
        }
    }
}

/// Pairs the out-of-band oracle eigenvalues (`|λ| > 2 + band_margin`) with
/// Jost eigenvalues, closest pairs first. A Jost eigenvalue of multiplicity
/// `k` stands for `k` oracle eigenvalues.
pub fn compare_spectra(
    jost: &[EigenvalueRecord],
    oracle: &[f64],
    band_margin: f64,
) -> ComparisonReport {
    let edge = 2.0 + band_margin;
    let mut report = ComparisonReport::default();
    let mut jost_out = Vec::new();
    for r in jost {
        if r.lambda.abs() > edge {
            jost_out.extend(std::iter::repeat_n(r.lambda, r.multiplicity.max(1)));
        } else {
            report.edge_jost.push(r.lambda);
        }
    }
    let oracle_out: Vec<f64> = oracle.iter().copied().filter(|x| x.abs() > edge).collect();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (a, &x) in jost_out.iter().enumerate() {
        for (b, &y) in oracle_out.iter().enumerate() {
            pairs.push(((x - y).abs(), a, b));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_j = vec![false; jost_out.len()];
    let mut used_o = vec![false; oracle_out.len()];
    for (gap, a, b) in pairs {
        if used_j[a] || used_o[b] {
            continue;
        }
        used_j[a] = true;
        used_o[b] = true;
        report.matches.push(SpectrumMatch {
            lambda_jost: jost_out[a],
            lambda_oracle: oracle_out[b],
            gap,
        });
    }
    report
        .matches
        .sort_by(|p, q| p.lambda_jost.total_cmp(&q.lambda_jost));
    report.unmatched_jost = (0..jost_out.len())
        .filter(|&a| !used_j[a])
        .map(|a| jost_out[a])
        .collect();
    report.unmatched_oracle = (0..oracle_out.len())
        .filter(|&b| !used_o[b])
        .map(|b| oracle_out[b])
        .collect();
    report
}

pub const CSV_HEADER: &str = "N,lambda,in_band";

/// One row per eigenvalue, tagged by membership in `[-2, 2]`.
pub fn spectrum_csv(n: usize, eigenvalues: &[f64]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for &x in eigenvalues {
        let _ = writeln!(out, "{n},{x},{}", (-2.0..=2.0).contains(&x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::ZERO;
    use std::f64::consts::PI;

    fn scalar(p1: f64) -> CoefficientProfile {
        CoefficientProfile::scalar_single_site(1.0, 1.0, -1.0, p1, 0.0)
    }

    fn free_levels(n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (1..=2 * n)
            .map(|k| 2.0 * (k as f64 * PI / (2 * n + 1) as f64).cos())
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn free_section_structure() {
        let fs = build_finite_section(&CoefficientProfile::free(1), 2).unwrap();
        let h = fs.matrix();
        let r = |re: f64| C64::new(re, 0.0);
        let expect = [
            [r(0.0), r(-1.0), r(0.0), r(1.0)],
            [r(-1.0), r(0.0), r(0.0), r(0.0)],
            [r(0.0), r(0.0), r(0.0), r(-1.0)],
            [r(1.0), r(0.0), r(-1.0), r(0.0)],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h[(i, j)], expect[i][j], "entry ({i}, {j})");
            }
        }
        assert_eq!(h.hermitian_defect(), 0.0);
    }

    #[test]
    fn potential_changes_one_entry() {
        let free = build_finite_section(&CoefficientProfile::free(1), 6).unwrap();
        let pert = build_finite_section(&scalar(3.0), 6).unwrap();
        let diff = pert.matrix() - free.matrix();
        for i in 0..12 {
            for j in 0..12 {
                let e = if i == 0 && j == 0 { 3.0 } else { 0.0 };
                assert_eq!(diff[(i, j)], C64::new(e, 0.0));
            }
        }
        let j = perturbation_section(&scalar(3.0), 6).unwrap();
        assert_eq!(&diff - j.matrix(), ComplexMatrix::zeros(12));
    }

    #[test]
    fn truncation_precondition() {
        assert!(matches!(
            build_finite_section(&scalar(3.0), 2),
            Err(Error::TruncationTooSmall { n: 2, required: 3 })
        ));
        assert!(count_below(&scalar(3.0), 2, 0.0).is_err());
    }

    #[test]
    fn free_section_eigenvalues() {
        for n in [3, 10, 25] {
            let fs = build_finite_section(&CoefficientProfile::free(1), n).unwrap();
            let eig = oracle_eigs(&fs).unwrap();
            let exact = free_levels(n);
            for (a, b) in eig.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
            for (lo, hi) in eig.iter().zip(eig.iter().rev()) {
                assert!((lo + hi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sturm_count_matches_free_levels() {
        let p = CoefficientProfile::free(2);
        let levels = free_levels(30);
        for sigma in [-2.5, -1.3, -0.01, 0.4, 1.99, 2.5] {
            let expect = 2 * levels.iter().filter(|&&x| x < sigma).count();
            assert_eq!(count_below(&p, 30, sigma).unwrap(), expect, "σ = {sigma}");
        }
    }

    #[test]
    fn benchmark_section_has_one_outlier() {
        let p = scalar(3.0);
        let fs = build_finite_section(&p, 400).unwrap();
        let eig = oracle_eigs(&fs).unwrap();
        let outliers: Vec<f64> = eig.iter().copied().filter(|x| *x > 2.05).collect();
        assert_eq!(outliers.len(), 1);
        assert!(eig.iter().filter(|x| **x <= 2.05).all(|x| x.abs() <= 2.01));
        let bisected = out_of_band_eigs(&p, 400, DEFAULT_BAND_MARGIN).unwrap();
        assert_eq!(bisected.len(), 1);
        assert!((bisected[0] - outliers[0]).abs() < 1e-10);
    }

    #[test]
    fn tail_norm() {
        assert_eq!(perturbation_tail_norm(&CoefficientProfile::free(2), 1), 0.0);
        assert_eq!(perturbation_tail_norm(&scalar(3.0), 1), 3.0);
        assert_eq!(perturbation_tail_norm(&scalar(3.0), 2), 0.0);
    }

    #[test]
    fn comparison_pairs_closest() {
        let rec = |lambda: f64| EigenvalueRecord {
            t: 0.0,
            z: ZERO,
            lambda,
            det_residual: 0.0,
            derivative_magnitude: 1.0,
            multiplicity: 1,
            simplicity_certificate: None,
            certificate_gap: None,
            oracle_lambda: None,
            oracle_gap: None,
        };
        let jost = [rec(-3.0), rec(2.01), rec(3.5)];
        let oracle = [-3.0 + 1e-9, -1.0, 1.9, 3.5, 4.2];
        let report = compare_spectra(&jost, &oracle, 0.05);
        assert_eq!(report.matches.len(), 2);
        assert_eq!(report.edge_jost, vec![2.01]);
        assert_eq!(report.unmatched_oracle, vec![4.2]);
        assert!(report.unmatched_jost.is_empty());
        assert!(report.max_gap() < 1e-8);
        assert!(compare_spectra(&[], &[-1.0, 1.0], 0.05).is_consistent());
    }

    #[test]
    fn csv_rows() {
        let csv = spectrum_csv(3, &[-2.5, 0.0]);
        assert_eq!(csv, "N,lambda,in_band\n3,-2.5,false\n3,0,true\n");
    }
}
