//! Coefficient data `{A_n, B_n, P_n, Q_n}` of the Dirac system.
//!
//! Only eventually-free profiles are representable: past the cutoff `N0`
//! the coefficients are exactly `A = I`, `B = -I`, `P = Q = 0`.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matkit::{ComplexMatrix, C64};

/// Hermitian defect tolerated in a coefficient, relative to `max(1, ‖X‖_F)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest singular value an `A_n` or `B_n` must exceed.
pub const INVERTIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoeffKind {
    A,
    B,
    P,
    Q,
}

impl CoeffKind {
    pub fn symbol(self) -> char {
        match self {
            CoeffKind::A => 'A',
            CoeffKind::B => 'B',
            CoeffKind::P => 'P',
            CoeffKind::Q => 'Q',
        }
    }

    /// First admissible site index (`A` starts at 0, the rest at 1).
    pub fn first_index(self) -> usize {
        match self {
            CoeffKind::A => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for CoeffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, PartialEq)]
pub struct CoefficientProfile {
    m: usize,
    n0: usize,
    a: Vec<ComplexMatrix>,
    b: Vec<ComplexMatrix>,
    p: Vec<ComplexMatrix>,
    q: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    m: usize,
    #[serde(rename = "N0")]
    n0: usize,
    #[serde(rename = "A")]
    a: Vec<ComplexMatrix>,
    #[serde(rename = "B")]
    b: Vec<ComplexMatrix>,
    #[serde(rename = "P")]
    p: Vec<ComplexMatrix>,
    #[serde(rename = "Q")]
    q: Vec<ComplexMatrix>,
}

impl CoefficientProfile {
    /// The unperturbed system: `N0 = 0`, `A_0 = I`.
    pub fn free(m: usize) -> Self {
        assert!(m >= 1, "matrix dimension must be at least 1");
        Self {
            m,
            n0: 0,
            a: vec![ComplexMatrix::identity(m)],
            b: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
        }
    }

    /// Assembles a profile from `A_0..=A_N0` and `B, P, Q` for `1..=N0`.
    pub fn new(
        m: usize,
        a: Vec<ComplexMatrix>,
        b: Vec<ComplexMatrix>,
        p: Vec<ComplexMatrix>,
        q: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if a.is_empty() {
            return Err(Error::MissingField("A".into()));
        }
        let n0 = a.len() - 1;
        for list in [&b, &p, &q] {
            if list.len() != n0 {
                return Err(Error::DimensionMismatch {
                    expected: n0,
                    found: list.len(),
                });
            }
        }
        for mat in a.iter().chain(&b).chain(&p).chain(&q) {
            if mat.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: mat.dim(),
                });
            }
        }
        Ok(Self { m, n0, a, b, p, q })
    }

    /// Single-site scalar profile (`m = 1`, `N0 = 1`) with the given
    /// `A_0, A_1, B_1, P_1, Q_1`.
    pub fn scalar_single_site(a0: f64, a1: f64, b1: f64, p1: f64, q1: f64) -> Self {
        let s = |x: f64| ComplexMatrix::from_real_diag(&[x]);
        Self::new(1, vec![s(a0), s(a1)], vec![s(b1)], vec![s(p1)], vec![s(q1)])
            .expect("scalar profile is well formed")
    }

    /// Parses the JSON profile format.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDoc = serde_json::from_str(text).map_err(classify_json_error)?;
        if doc.a.len() != doc.n0 + 1 {
            return Err(Error::DimensionMismatch {
                expected: doc.n0 + 1,
                found: doc.a.len(),
            });
        }
        Self::new(doc.m, doc.a, doc.b, doc.p, doc.q)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.doc()).expect("profile serialises")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.doc()).expect("profile serialises")
    }

    fn doc(&self) -> ProfileDoc {
        ProfileDoc {
            m: self.m,
            n0: self.n0,
            a: self.a.clone(),
            b: self.b.clone(),
            p: self.p.clone(),
            q: self.q.clone(),
        }
    }

    /// SHA-256 of the compact JSON encoding, hex encoded.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Support cutoff `N0`.
    #[inline]
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// `kind_n`, with the exact free value returned past the cutoff.
    pub fn coefficient_at(&self, kind: CoeffKind, n: usize) -> Result<ComplexMatrix> {
        if n < kind.first_index() {
            return Err(Error::IndexOutOfDomain {
                kind: kind.symbol(),
                index: n,
            });
        }
        Ok(self.coeff(kind, n).clone_or_free(self.m, kind))
    }

    fn coeff(&self, kind: CoeffKind, n: usize) -> Stored<'_> {
        let list = match kind {
            CoeffKind::A => return Stored(self.a.get(n)),
            CoeffKind::B => &self.b,
            CoeffKind::P => &self.p,
            CoeffKind::Q => &self.q,
        };
        Stored(n.checked_sub(1).and_then(|k| list.get(k)))
    }

    /// Stored matrices of one kind, in site order starting at
    /// `kind.first_index()`.
    pub fn stored(&self, kind: CoeffKind) -> &[ComplexMatrix] {
        match kind {
            CoeffKind::A => &self.a,
            CoeffKind::B => &self.b,
            CoeffKind::P => &self.p,
            CoeffKind::Q => &self.q,
        }
    }

    /// `‖I − A_n‖ + ‖I + B_n‖ + ‖P_n‖ + ‖Q_n‖` (Frobenius) at site `n ≥ 1`.
    pub fn site_perturbation(&self, n: usize) -> f64 {
        if n == 0 || n > self.n0 {
            return 0.0;
        }
        let id = ComplexMatrix::identity(self.m);
        let a = &self.a[n];
        let b = &self.b[n - 1];
        (&id - a).frobenius_norm()
            + (&id + b).frobenius_norm()
            + self.p[n - 1].frobenius_norm()
            + self.q[n - 1].frobenius_norm()
    }

    /// `Σ_{n=1}^{N0} n · site_perturbation(n)`.
    pub fn decay_sum(&self) -> f64 {
        (1..=self.n0)
            .map(|n| n as f64 * self.site_perturbation(n))
            .sum()
    }

    /// Checks the standing assumptions: Hermitian coefficients and
    /// invertible `A_n`, `B_n`. Violations are returned as data.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for kind in [CoeffKind::A, CoeffKind::B, CoeffKind::P, CoeffKind::Q] {
            for (k, mat) in self.stored(kind).iter().enumerate() {
                let index = k + kind.first_index();
                let defect = mat.hermitian_defect();
                if defect > HERMITIAN_TOL * mat.frobenius_norm().max(1.0) {
                    violations.push(Violation {
                        kind: ViolationKind::NotHermitian,
                        coefficient: kind,
                        index,
                        magnitude: defect,
                    });
                }
                let singular_kind = match kind {
                    CoeffKind::A => ViolationKind::SingularA,
                    CoeffKind::B => ViolationKind::SingularB,
                    _ => continue,
                };
                let sigma = mat.smallest_singular_value();
                if sigma <= INVERTIBILITY_TOL {
                    violations.push(Violation {
                        kind: singular_kind,
                        coefficient: kind,
                        index,
                        magnitude: sigma,
                    });
                }
            }
        }
        ValidationReport {
            ok: violations.is_empty(),
            decay_sum: self.decay_sum(),
            violations,
        }
    }

    /// Returns `Err(InvalidProfile)` listing the first violation, if any.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidProfile(v.to_string())),
        }
    }

    /// Copy with `P` and `Q` multiplied by `c`.
    pub fn with_scaled_potential(&self, c: f64) -> Self {
        let mut out = self.clone();
        for x in out.p.iter_mut().chain(out.q.iter_mut()) {
            *x = x.scale(C64::new(c, 0.0));
        }
        out
    }
}

struct Stored<'a>(Option<&'a ComplexMatrix>);

impl Stored<'_> {
    fn clone_or_free(&self, m: usize, kind: CoeffKind) -> ComplexMatrix {
        match self.0 {
            Some(x) => x.clone(),
            None => free_value(m, kind),
        }
    }
}

/// The free-tail value of a coefficient.
pub fn free_value(m: usize, kind: CoeffKind) -> ComplexMatrix {
    match kind {
        CoeffKind::A => ComplexMatrix::identity(m),
        CoeffKind::B => ComplexMatrix::from_real_diag(&vec![-1.0; m]),
        CoeffKind::P | CoeffKind::Q => ComplexMatrix::zeros(m),
    }
}

fn classify_json_error(err: serde_json::Error) -> Error {
    let msg = err.to_string();
    if let Some(rest) = msg.strip_prefix("missing field `") {
        if let Some(end) = rest.find('`') {
            return Error::MissingField(rest[..end].to_string());
        }
    }
    Error::Parse(msg)
}

impl fmt::Debug for CoefficientProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientProfile")
            .field("m", &self.m)
            .field("N0", &self.n0)
            .field("A", &self.a)
            .field("B", &self.b)
            .field("P", &self.p)
            .field("Q", &self.q)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    NotHermitian,
    SingularA,
    SingularB,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub coefficient: CoeffKind,
    pub index: usize,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} at {}_{} (magnitude {:e})",
            self.kind, self.coefficient, self.index, self.magnitude
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub decay_sum: f64,
    pub violations: Vec<Violation>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALAR_DOC: &str = r#"{"m":1,"N0":1,"A":[[[ [1,0] ]],[[ [1,0] ]]],"B":[[[ [-1,0] ]]],"P":[[[ [3,0] ]]],"Q":[[[ [0,0] ]]]}"#;

    #[test]
    fn free_profile_basics() {
        let p = CoefficientProfile::free(1);
        assert_eq!(p.n0(), 0);
        assert_eq!(p.decay_sum(), 0.0);
        let p3 = CoefficientProfile::free(3);
        assert_eq!(
            p3.coefficient_at(CoeffKind::B, 5).unwrap(),
            ComplexMatrix::from_real_diag(&[-1.0; 3])
        );
        let report = CoefficientProfile::free(2).validate();
        assert!(report.ok);
        assert_eq!(report.decay_sum, 0.0);
    }

    #[test]
    fn loads_scalar_document() {
        let p = CoefficientProfile::from_json(SCALAR_DOC).unwrap();
        assert_eq!(p.m(), 1);
        assert_eq!(p.n0(), 1);
        assert_eq!(
            p.coefficient_at(CoeffKind::P, 1).unwrap(),
            ComplexMatrix::from_real_diag(&[3.0])
        );
        assert_eq!(
            p,
            CoefficientProfile::scalar_single_site(1.0, 1.0, -1.0, 3.0, 0.0)
        );
    }

    #[test]
    fn load_errors() {
        let bad_dim = r#"{"m":2,"N0":0,"A":[[[ [1,0] ]]],"B":[],"P":[],"Q":[]}"#;
        assert!(matches!(
            CoefficientProfile::from_json(bad_dim),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            CoefficientProfile::from_json(""),
            Err(Error::Parse(_))
        ));
        let missing = r#"{"m":1,"N0":0,"A":[[[ [1,0] ]]],"B":[],"P":[]}"#;
        assert_eq!(
            CoefficientProfile::from_json(missing),
            Err(Error::MissingField("Q".into()))
        );
        let unknown = r#"{"m":1,"N0":0,"A":[[[ [1,0] ]]],"B":[],"P":[],"Q":[],"X":1}"#;
        assert!(matches!(
            CoefficientProfile::from_json(unknown),
            Err(Error::Parse(_))
        ));
        let short = r#"{"m":1,"N0":1,"A":[[[ [1,0] ]]],"B":[[[ [-1,0] ]]],"P":[[[ [0,0] ]]],"Q":[[[ [0,0] ]]]}"#;
        assert!(matches!(
            CoefficientProfile::from_json(short),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn validation_flags_singular_and_non_hermitian() {
        let p = CoefficientProfile::scalar_single_site(1.0, 1.0, 0.0, 0.0, 0.0);
        let report = p.validate();
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::SingularB);
        assert_eq!(report.violations[0].index, 1);

        let id = ComplexMatrix::identity(2);
        let minus = ComplexMatrix::from_real_diag(&[-1.0, -1.0]);
        let nilpotent = ComplexMatrix::from_rows(vec![
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let p = CoefficientProfile::new(
            2,
            vec![id.clone(), id],
            vec![minus],
            vec![nilpotent],
            vec![ComplexMatrix::zeros(2)],
        )
        .unwrap();
        let report = p.validate();
        assert!(!report.ok);
        assert_eq!(report.violations[0].kind, ViolationKind::NotHermitian);
        assert_eq!(report.violations[0].coefficient, CoeffKind::P);
        assert_eq!(report.violations[0].index, 1);
    }

    #[test]
    fn coefficient_domain() {
        let p = CoefficientProfile::free(2);
        assert_eq!(
            p.coefficient_at(CoeffKind::A, 7).unwrap(),
            ComplexMatrix::identity(2)
        );
        assert_eq!(
            p.coefficient_at(CoeffKind::Q, 0),
            Err(Error::IndexOutOfDomain {
                kind: 'Q',
                index: 0
            })
        );
        assert!(p.coefficient_at(CoeffKind::B, 0).is_err());
        assert!(p.coefficient_at(CoeffKind::A, 0).is_ok());
    }

    #[test]
    fn decay_sum_weights_by_site() {
        let p = CoefficientProfile::scalar_single_site(1.0, 1.0, -1.0, 3.0, 0.0);
        assert_eq!(p.decay_sum(), 3.0);
    }
}
