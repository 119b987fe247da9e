//! The invariant suite behind `verify`: eight checks per profile.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use jost_core::jost::{asymptotics_check, closed_form_t, recurrence_residual};
use jost_core::matkit::I;
use jost_core::oracle::{compare_spectra, out_of_band_eigs};
use jost_core::spectrum::{
    certificate_phase_defect, find_eigenvalues, root_count_bound, wronskian_identity_gap,
    DEFAULT_TAIL_TOL,
};
use jost_core::{compute_jost, CoefficientProfile, ComplexMatrix, Result, SearchOptions, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const FREE_EVAL_TOL: f64 = 1e-14;
pub const RESIDUAL_TOL: f64 = 1e-11;
pub const ZERO_PATTERN_TOL: f64 = 1e-14;
pub const T_CROSS_TOL: f64 = 1e-10;
pub const WRONSKIAN_TOL: f64 = 1e-10;
pub const CERTIFICATE_MIN: f64 = 1e-6;
pub const PHASE_TOL: f64 = 1e-8;
pub const ORACLE_TOL: f64 = 1e-6;

pub const RESIDUAL_SAMPLES: usize = 100;
pub const WRONSKIAN_SAMPLES: usize = 20;

pub const CHECK_NAMES: [&str; 8] = [
    "free_exactness",
    "recurrence_residual",
    "zero_pattern",
    "tail_freeness",
    "wronskian_gap",
    "simplicity",
    "degree_bound",
    "oracle_agreement",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub search: SearchOptions,
    pub oracle_n: usize,
    pub band_margin: f64,
    /// Perturbs one Jost coefficient before the residual check.
    pub corrupt: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            search: SearchOptions::default(),
            oracle_n: jost_core::oracle::DEFAULT_N,
            band_margin: jost_core::oracle::DEFAULT_BAND_MARGIN,
            corrupt: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn below(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: value < tolerance,
            value,
            tolerance,
            detail: String::new(),
        }
    }

    fn failed(name: &'static str, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self {
            name,
            passed: false,
            value: f64::NAN,
            tolerance,
            detail: err.to_string(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileOutcome {
    pub label: String,
    pub m: usize,
    pub n0: usize,
    pub digest: String,
    pub eigenvalues: Vec<f64>,
    pub checks: Vec<Check>,
}

impl ProfileOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub profiles: Vec<ProfileOutcome>,
}

impl SuiteReport {
    pub fn total_checks(&self) -> usize {
        self.profiles.iter().map(|p| p.checks.len()).sum()
    }

    pub fn passed_checks(&self) -> usize {
        self.profiles
            .iter()
            .flat_map(|p| &p.checks)
            .filter(|c| c.passed)
            .count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed_checks() == self.total_checks()
    }

    pub fn failures(&self) -> Vec<(String, &'static str)> {
        self.profiles
            .iter()
            .flat_map(|p| {
                p.checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| (p.label.clone(), c.name))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verify seed={} profiles={}",
            self.seed,
            self.profiles.len()
        );
        for p in &self.profiles {
            let _ = writeln!(
                out,
                "{} m={} N0={} sha256={} eigenvalues={}",
                p.label,
                p.m,
                p.n0,
                &p.digest[..16],
                p.eigenvalues.len()
            );
            for c in &p.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                let _ = write!(
                    out,
                    "  {status} {:<20} value={:.3e} tol={:e}",
                    c.name, c.value, c.tolerance
                );
                if !c.detail.is_empty() {
                    let _ = write!(out, " ({})", c.detail);
                }
                out.push('\n');
            }
        }
        let _ = writeln!(
            out,
            "summary: {}/{} checks passed ({} profiles x {} checks)",
            self.passed_checks(),
            self.total_checks(),
            self.profiles.len(),
            CHECK_NAMES.len()
        );
        for (label, name) in self.failures() {
            let _ = writeln!(out, "failed: {label} {name}");
        }
        out
    }
}

/// Coefficient-exactness and evaluation check of the free series for `m`.
/// Returns the largest evaluation error, or `None` if any coefficient
/// differs from the free one.
pub fn free_exactness(m: usize) -> Result<Option<f64>> {
    let j = compute_jost(&CoefficientProfile::free(m))?;
    let id = ComplexMatrix::identity(m);
    let zero = ComplexMatrix::zeros(m);
    let minus_i = ComplexMatrix::scalar(m, -I);
    for n in 0..=4 {
        for s in 0..=j.s_max() + 2 {
            let a_ok = j.a_coeff(n, s) == if s == 1 { id.clone() } else { zero.clone() };
            let b_ok = n == 0
                || j.b_coeff(n, s)
                    == if s == 0 {
                        minus_i.clone()
                    } else {
                        zero.clone()
                    };
            if !(a_ok && b_ok) {
                return Ok(None);
            }
        }
    }
    let mut worst = 0.0f64;
    for k in 0..16 {
        let z = C64::from_polar(if k % 2 == 0 { 1.0 } else { 0.5 }, 0.3 + 0.77 * k as f64);
        for n in 0..=4u32 {
            let f = j.eval_f(n as usize, z)?;
            let mut err = (&f - &id.scale(z.powu(2 * n + 1))).frobenius_norm();
            if n >= 1 {
                let g = j.eval_g(n as usize, z)?;
                err = err.max((&g - &minus_i.scale(z.powu(2 * n))).frobenius_norm());
            }
            worst = worst.max(err);
        }
    }
    Ok(Some(worst))
}

/// Runs all eight checks on one profile. Sample points are drawn from a
/// ChaCha8 stream seeded with `sample_seed`.
pub fn check_profile(
    label: String,
    p: &CoefficientProfile,
    opts: &SuiteOptions,
    sample_seed: u64,
) -> ProfileOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let mut checks = Vec::with_capacity(CHECK_NAMES.len());

    checks.push(match free_exactness(p.m()) {
        Ok(Some(err)) => Check::below("free_exactness", err, FREE_EVAL_TOL),
        Ok(None) => Check::failed("free_exactness", FREE_EVAL_TOL, "coefficient mismatch"),
        Err(e) => Check::failed("free_exactness", FREE_EVAL_TOL, e),
    });

    let j = match compute_jost(p) {
        Ok(j) => j,
        Err(e) => {
            for name in &CHECK_NAMES[1..] {
                checks.push(Check::failed(name, f64::NAN, &e));
            }
            return outcome(label, p, Vec::new(), checks);
        }
    };

    let mut series = j.clone();
    if opts.corrupt {
        series.perturb_a(0, 2, C64::new(1e-3, 0.0));
    }
    let zs: Vec<C64> = (0..RESIDUAL_SAMPLES)
        .map(|k| {
            let r = if k % 2 == 0 { 1.0 } else { 0.5 };
            C64::from_polar(r, rng.random_range(0.0..TAU))
        })
        .collect();
    checks.push(
        max_over(
            zs.iter()
                .map(|&z| recurrence_residual(&series, p, z, p.n0() + 2)),
        )
        .map_or_else(
            |e| Check::failed("recurrence_residual", RESIDUAL_TOL, e),
            |v| Check::below("recurrence_residual", v, RESIDUAL_TOL),
        ),
    );

    checks.push(Check::below(
        "zero_pattern",
        j.zero_pattern_excess(),
        ZERO_PATTERN_TOL,
    ));

    checks.push(tail_check(&j, p, &zs[..10]));

    let ts: Vec<f64> = (0..WRONSKIAN_SAMPLES)
        .map(|_| {
            let t: f64 = rng.random_range(0.05..0.95);
            if rng.random_bool(0.5) {
                t
            } else {
                -t
            }
        })
        .collect();
    checks.push(
        max_over(
            ts.iter()
                .map(|&t| wronskian_identity_gap(&j, p, t, DEFAULT_TAIL_TOL)),
        )
        .map_or_else(
            |e| Check::failed("wronskian_gap", WRONSKIAN_TOL, e),
            |v| Check::below("wronskian_gap", v, WRONSKIAN_TOL),
        ),
    );

    let bound = root_count_bound(p);
    let search = match find_eigenvalues(&j, p, &opts.search) {
        Ok(s) => s,
        Err(e) => {
            for name in &CHECK_NAMES[5..] {
                checks.push(Check::failed(name, f64::NAN, &e));
            }
            return outcome(label, p, Vec::new(), checks);
        }
    };
    let eigenvalues: Vec<f64> = search.eigenvalues.iter().map(|e| e.lambda).collect();

    // Every root must be simple by the winding count, with a certificate of
    // magnitude above CERTIFICATE_MIN and phase arg(i(1 - t^-2)).
    let mut worst_phase = 0.0f64;
    let mut smallest = f64::INFINITY;
    let (mut multiple, mut small, mut missing) = (0, 0, 0);
    for e in &search.eigenvalues {
        if e.multiplicity != 1 {
            multiple += 1;
        }
        match e.simplicity_certificate {
            Some(c) => {
                smallest = smallest.min(c.norm());
                if c.norm() <= CERTIFICATE_MIN {
                    small += 1;
                }
                worst_phase = worst_phase.max(certificate_phase_defect(c, e.t));
            }
            None => missing += 1,
        }
    }
    let mut simplicity = Check::below("simplicity", worst_phase, PHASE_TOL);
    if multiple + small + missing > 0 {
        simplicity.passed = false;
    }
    if !search.eigenvalues.is_empty() {
        simplicity.detail = format!(
            "min |c| {smallest:.2e}, {small} below {CERTIFICATE_MIN:e}, {multiple} not simple, {missing} without null vector"
        );
    }
    checks.push(simplicity);

    let degree = j.jost_function().degree(ZERO_PATTERN_TOL).unwrap_or(0);
    let count = search.root_count();
    let disc = search.disc_root_count;
    checks.push(Check {
        name: "degree_bound",
        passed: count <= bound && search.is_complete() && degree <= 4 * p.n0() + 3,
        value: count as f64,
        tolerance: bound as f64,
        detail: format!(
            "disc roots {}, deg F0 {degree}",
            disc.map_or_else(|| "unresolved".to_string(), |d| d.to_string())
        ),
    });

    checks.push(match out_of_band_eigs(p, opts.oracle_n, opts.band_margin) {
        Ok(oracle) => {
            let cmp = compare_spectra(&search.eigenvalues, &oracle, opts.band_margin);
            let gap = cmp.max_gap();
            Check {
                name: "oracle_agreement",
                passed: cmp.is_consistent() && gap <= ORACLE_TOL,
                value: gap,
                tolerance: ORACLE_TOL,
                detail: format!(
                    "{} matched, {} jost-only, {} oracle-only",
                    cmp.matches.len(),
                    cmp.unmatched_jost.len(),
                    cmp.unmatched_oracle.len()
                ),
            }
        }
        Err(e) => Check::failed("oracle_agreement", ORACLE_TOL, e),
    });

    outcome(label, p, eigenvalues, checks)
}

fn outcome(
    label: String,
    p: &CoefficientProfile,
    eigenvalues: Vec<f64>,
    checks: Vec<Check>,
) -> ProfileOutcome {
    ProfileOutcome {
        label,
        m: p.m(),
        n0: p.n0(),
        digest: p.digest(),
        eigenvalues,
        checks,
    }
}

fn max_over(mut values: impl Iterator<Item = Result<f64>>) -> Result<f64> {
    values.try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

/// Deviations past the support must vanish exactly, and the closed-form
/// leading blocks must match `a_{n,1}` and `i b_{n,0}`.
fn tail_check(j: &jost_core::JostSeries, p: &CoefficientProfile, zs: &[C64]) -> Check {
    let name = "tail_freeness";
    let mut tail_exact = j.tail_is_free();
    for &z in zs {
        match asymptotics_check(j, z) {
            Ok(d) => tail_exact &= d[p.n0() + 1..].iter().all(|&x| x == 0.0),
            Err(e) => return Check::failed(name, T_CROSS_TOL, e),
        }
    }
    let mut cross = 0.0f64;
    for n in 1..=p.n0() + 1 {
        match closed_form_t(p, n) {
            Ok((t11, t12, t22)) => {
                cross = cross
                    .max((&t11 - &j.a_coeff(n, 1)).frobenius_norm())
                    .max((&t22 - &j.b_coeff(n, 0).scale(I)).frobenius_norm())
                    .max(t12.frobenius_norm());
            }
            Err(e) => return Check::failed(name, T_CROSS_TOL, e),
        }
    }
    let mut check = Check::below(name, cross, T_CROSS_TOL);
    if !tail_exact {
        check.passed = false;
        check = check.with_detail("nonzero deviation past the support");
    }
    check
}

/// Runs the suite over `profiles`; profile `k` samples with seed
/// `seed + k`.
pub fn run_suite(
    seed: u64,
    profiles: &[(String, CoefficientProfile)],
    opts: &SuiteOptions,
) -> SuiteReport {
    let outcomes = profiles
        .iter()
        .enumerate()
        .map(|(k, (label, p))| check_profile(label.clone(), p, opts, seed.wrapping_add(k as u64)))
        .collect();
    SuiteReport {
        seed,
        profiles: outcomes,
    }
}
