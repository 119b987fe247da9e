//! Argument parsing and the five subcommands. Every command renders its
//! output into an [`Outcome`] so that it can be tested without a process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use jost_core::oracle::{
    build_finite_section, compare_spectra, oracle_eigs, spectrum_csv, ComparisonReport,
    DEFAULT_BAND_MARGIN, DEFAULT_N,
};
use jost_core::{spectral_report, CoefficientProfile, Error, SearchOptions, SpectralReport};
use serde::Serialize;

use crate::randgen::random_suite;
use crate::suite::{run_suite, SuiteOptions};

#[derive(Debug, Parser)]
#[command(
    name = "dirac-jost",
    version,
    about = "Jost functions and discrete spectra of matrix discrete Dirac systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a profile is Hermitian with invertible A_n, B_n.
    Validate {
        profile: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Eigenvalues from the zeros of det F_0.
    Eigs {
        profile: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the eigenvalues against a finite-section eigensolve.
    Oracle {
        profile: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Number of sites in the finite section.
        #[arg(long = "n", default_value_t = DEFAULT_N)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the invariant suite on a profile and/or random profiles.
    Verify {
        profile: Option<PathBuf>,
        /// Number of seeded random profiles to add.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long = "n", default_value_t = DEFAULT_N)]
        n: usize,
        /// Perturb one Jost coefficient before the residual check.
        #[arg(long, hide = true)]
        corrupt: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Finite-section eigenvalues, tagged in or out of [-2, 2].
    Band {
        profile: PathBuf,
        #[arg(long = "n", default_value_t = DEFAULT_N)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Grid points per half of the t segment.
    #[arg(long, default_value_t = SearchOptions::default().grid_points)]
    pub grid: usize,
    #[arg(long = "newton-tol", default_value_t = SearchOptions::default().newton_tol)]
    pub newton_tol: f64,
    /// Distance from t = 0 and |t| = 1 below which roots are only flagged.
    #[arg(long, default_value_t = SearchOptions::default().boundary_margin)]
    pub margin: f64,
}

impl SearchArgs {
    fn options(&self) -> Result<SearchOptions, String> {
        if self.grid < 3 {
            return Err("--grid must be at least 3".into());
        }
        if !(self.newton_tol > 0.0) {
            return Err("--newton-tol must be positive".into());
        }
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return Err("--margin must lie in (0, 0.5)".into());
        }
        Ok(SearchOptions {
            grid_points: self.grid,
            newton_tol: self.newton_tol,
            boundary_margin: self.margin,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code and rendered streams of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self::with_code(0, stdout)
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(code: i32, message: impl std::fmt::Display) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn load(path: &Path) -> Result<CoefficientProfile, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::error(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    CoefficientProfile::from_json(&text)
        .map_err(|e| Outcome::error(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Outcome {
    let (outcome, out_path) = match cli.command {
        Command::Validate { profile, output } => {
            (cmd_validate(&profile, output.format), output.out)
        }
        Command::Eigs {
            profile,
            search,
            output,
        } => (cmd_eigs(&profile, &search, output.format), output.out),
        Command::Oracle {
            profile,
            search,
            n,
            output,
        } => (cmd_oracle(&profile, &search, n, output.format), output.out),
        Command::Verify {
            profile,
            random,
            seed,
            search,
            n,
            corrupt,
            output,
        } => {
            let cfg = VerifyConfig {
                profile,
                random,
                seed,
                search,
                n,
                corrupt,
            };
            (cmd_verify(&cfg, output.format), output.out)
        }
        Command::Band { profile, n, output } => (cmd_band(&profile, n, output.format), output.out),
    };
    match out_path {
        Some(path) if !outcome.stdout.is_empty() => match std::fs::write(&path, &outcome.stdout) {
            Ok(()) => Outcome {
                stdout: String::new(),
                ..outcome
            },
            Err(e) => Outcome::error(EXIT_USAGE, format!("{}: {e}", path.display())),
        },
        _ => outcome,
    }
}

pub fn cmd_validate(path: &Path, format: Option<Format>) -> Outcome {
    let profile = match load(path) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let report = profile.validate();
    let code = if report.ok { 0 } else { EXIT_FAILED };
    let body = match format {
        Some(Format::Csv) => {
            let mut s = String::from("kind,coefficient,index,magnitude\n");
            for v in &report.violations {
                let _ = writeln!(
                    s,
                    "{:?},{},{},{:e}",
                    v.kind, v.coefficient, v.index, v.magnitude
                );
            }
            s
        }
        _ => json(&report),
    };
    Outcome::with_code(code, body)
}

fn report_for(
    path: &Path,
    search: &SearchArgs,
) -> Result<(CoefficientProfile, SpectralReport), Outcome> {
    let opts = search
        .options()
        .map_err(|e| Outcome::error(EXIT_USAGE, e))?;
    let profile = load(path)?;
    let report = spectral_report(&profile, &opts).map_err(|e| Outcome::error(EXIT_FAILED, e))?;
    Ok((profile, report))
}

pub fn cmd_eigs(path: &Path, search: &SearchArgs, format: Option<Format>) -> Outcome {
    match report_for(path, search) {
        Ok((_, report)) => Outcome::ok(match format {
            Some(Format::Csv) => report.to_csv(),
            _ => json(&report),
        }),
        Err(o) => o,
    }
}

#[derive(Debug, Serialize)]
struct OracleOutput<'a> {
    #[serde(rename = "N")]
    n: usize,
    band_margin: f64,
    comparison: &'a ComparisonReport,
    report: &'a SpectralReport,
    oracle_eigenvalues: &'a [f64],
}

pub fn cmd_oracle(path: &Path, search: &SearchArgs, n: usize, format: Option<Format>) -> Outcome {
    let (profile, mut report) = match report_for(path, search) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let eigenvalues = match build_finite_section(&profile, n).and_then(|fs| oracle_eigs(&fs)) {
        Ok(e) => e,
        Err(e) => return Outcome::error(EXIT_FAILED, e),
    };
    let comparison = compare_spectra(&report.eigenvalues, &eigenvalues, DEFAULT_BAND_MARGIN);
    comparison.annotate(&mut report.eigenvalues);
    Outcome::ok(match format {
        Some(Format::Csv) => spectrum_csv(n, &eigenvalues),
        _ => json(&OracleOutput {
            n,
            band_margin: DEFAULT_BAND_MARGIN,
            comparison: &comparison,
            report: &report,
            oracle_eigenvalues: &eigenvalues,
        }),
    })
}

pub struct VerifyConfig {
    pub profile: Option<PathBuf>,
    pub random: usize,
    pub seed: u64,
    pub search: SearchArgs,
    pub n: usize,
    pub corrupt: bool,
}

pub fn cmd_verify(cfg: &VerifyConfig, format: Option<Format>) -> Outcome {
    let search = match cfg.search.options() {
        Ok(s) => s,
        Err(e) => return Outcome::error(EXIT_USAGE, e),
    };
    let mut profiles = Vec::new();
    if let Some(path) = &cfg.profile {
        match load(path) {
            Ok(p) => profiles.push((path.display().to_string(), p)),
            Err(o) => return o,
        }
    }
    let width = cfg.random.to_string().len();
    for (k, p) in random_suite(cfg.seed, cfg.random).into_iter().enumerate() {
        profiles.push((format!("random[{:0width$}]", k + 1), p));
    }
    if profiles.is_empty() {
        return Outcome::error(EXIT_USAGE, "give a profile path or --random K");
    }
    if let Some(p) = profiles.iter().find(|(_, p)| cfg.n < p.n0() + 2) {
        return Outcome::error(
            EXIT_FAILED,
            Error::TruncationTooSmall {
                n: cfg.n,
                required: p.1.n0() + 2,
            },
        );
    }
    let opts = SuiteOptions {
        search,
        oracle_n: cfg.n,
        corrupt: cfg.corrupt,
        ..SuiteOptions::default()
    };
    let report = run_suite(cfg.seed, &profiles, &opts);
    let code = if report.all_passed() { 0 } else { EXIT_FAILED };
    let body = match format {
        Some(Format::Json) => json(&report),
        Some(Format::Csv) => {
            let mut s = String::from("profile,check,passed,value,tolerance\n");
            for p in &report.profiles {
                for c in &p.checks {
                    let _ = writeln!(
                        s,
                        "{},{},{},{:e},{:e}",
                        p.label, c.name, c.passed, c.value, c.tolerance
                    );
                }
            }
            s
        }
        None => report.to_text(),
    };
    Outcome::with_code(code, body)
}

#[derive(Debug, Serialize)]
struct BandOutput<'a> {
    #[serde(rename = "N")]
    n: usize,
    eigenvalues: &'a [f64],
    out_of_band: Vec<f64>,
}

pub fn cmd_band(path: &Path, n: usize, format: Option<Format>) -> Outcome {
    let profile = match load(path) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let eigenvalues = match build_finite_section(&profile, n).and_then(|fs| oracle_eigs(&fs)) {
        Ok(e) => e,
        Err(e) => return Outcome::error(EXIT_FAILED, e),
    };
    Outcome::ok(match format {
        Some(Format::Json) => json(&BandOutput {
            n,
            out_of_band: eigenvalues
                .iter()
                .copied()
                .filter(|x| x.abs() > 2.0)
                .collect(),
            eigenvalues: &eigenvalues,
        }),
        _ => spectrum_csv(n, &eigenvalues),
    })
}
