//! Browser front end. The exported functions take and return JSON strings;
//! the page in `www/` draws them on a canvas.
//!
//! Everything below `bindings` is plain Rust so it can be tested natively.

use jost_core::oracle::{build_finite_section, oracle_eigs};
use jost_core::spectrum::{ReducedDet, SpectralParameter};
use jost_core::{compute_jost, spectral_report, CoefficientProfile, SearchOptions};
use serde::Serialize;

/// Largest section the page may request; dense eigensolves beyond this
/// stall the browser tab.
pub const MAX_SECTION: usize = 300;

fn parse(profile_json: &str) -> Result<CoefficientProfile, String> {
    let p = CoefficientProfile::from_json(profile_json).map_err(|e| e.to_string())?;
    p.ensure_valid().map_err(|e| e.to_string())?;
    Ok(p)
}

/// Scalar profile with `N0 = 1`: `A_0 = A_1 = 1`, `B_1 = b1`, `P_1 = p1`,
/// `Q_1 = q1`.
pub fn scalar_profile(b1: f64, p1: f64, q1: f64) -> String {
    CoefficientProfile::scalar_single_site(1.0, 1.0, b1, p1, q1).to_json()
}

/// Spectral report of the profile, as JSON.
pub fn report(profile_json: &str, grid_points: usize) -> Result<String, String> {
    let p = parse(profile_json)?;
    let opts = SearchOptions {
        grid_points: grid_points.max(3),
        ..SearchOptions::default()
    };
    let report = spectral_report(&p, &opts).map_err(|e| e.to_string())?;
    Ok(report.to_json())
}

#[derive(Debug, Serialize)]
struct Curve {
    t: Vec<f64>,
    log10_abs_det: Vec<f64>,
}

/// `log10 |det F_0(-it)| - m log10 |t|` at `samples` points of `(-1, 1)`,
/// i.e. the reduced determinant whose zeros are the eigenvalues.
pub fn det_curve(profile_json: &str, samples: usize) -> Result<String, String> {
    let p = parse(profile_json)?;
    let j = compute_jost(&p).map_err(|e| e.to_string())?;
    let det = ReducedDet::new(&j);
    let samples = samples.max(2);
    let mut curve = Curve {
        t: Vec::with_capacity(samples),
        log10_abs_det: Vec::with_capacity(samples),
    };
    for k in 0..samples {
        let t = -1.0 + 2.0 * (k as f64 + 0.5) / samples as f64;
        let Ok(sp) = SpectralParameter::new(t) else {
            continue;
        };
        curve.t.push(t);
        curve.log10_abs_det.push(det.value(sp.z()).norm().log10());
    }
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct Band {
    n: usize,
    eigenvalues: Vec<f64>,
}

/// Eigenvalues of the `n`-site finite section, ascending.
pub fn band(profile_json: &str, n: usize) -> Result<String, String> {
    if n > MAX_SECTION {
        return Err(format!("section length {n} exceeds {MAX_SECTION}"));
    }
    let p = parse(profile_json)?;
    let fs = build_finite_section(&p, n).map_err(|e| e.to_string())?;
    let eigenvalues = oracle_eigs(&fs).map_err(|e| e.to_string())?;
    serde_json::to_string(&Band { n, eigenvalues }).map_err(|e| e.to_string())
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn scalar_profile(b1: f64, p1: f64, q1: f64) -> String {
        super::scalar_profile(b1, p1, q1)
    }

    #[wasm_bindgen]
    pub fn report(profile_json: &str, grid_points: usize) -> Result<String, JsValue> {
        super::report(profile_json, grid_points).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn det_curve(profile_json: &str, samples: usize) -> Result<String, JsValue> {
        super::det_curve(profile_json, samples).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn band(profile_json: &str, n: usize) -> Result<String, JsValue> {
        super::band(profile_json, n).map_err(|e| JsValue::from_str(&e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn benchmark_report_has_one_eigenvalue() {
        let doc: Value =
            serde_json::from_str(&report(&scalar_profile(-1.0, 3.0, 0.0), 2001).unwrap()).unwrap();
        let eigs = doc["eigenvalues"].as_array().unwrap();
        assert_eq!(eigs.len(), 1);
        let lambda = eigs[0]["lambda"].as_f64().unwrap();
        assert!(lambda > 2.0 && lambda < 4.0);
    }

    #[test]
    fn curve_dips_at_the_root() {
        let doc: Value =
            serde_json::from_str(&det_curve(&scalar_profile(-1.0, 3.0, 0.0), 400).unwrap())
                .unwrap();
        let t: Vec<f64> = serde_json::from_value(doc["t"].clone()).unwrap();
        let y: Vec<f64> = serde_json::from_value(doc["log10_abs_det"].clone()).unwrap();
        assert_eq!(t.len(), y.len());
        let (k, _) = y
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((t[k] + 0.305).abs() < 0.01, "minimum at t = {}", t[k]);
    }

    #[test]
    fn band_and_errors() {
        let free = CoefficientProfile::free(1).to_json();
        let doc: Value = serde_json::from_str(&band(&free, 50).unwrap()).unwrap();
        let eigs = doc["eigenvalues"].as_array().unwrap();
        assert_eq!(eigs.len(), 100);
        assert!(eigs.iter().all(|x| x.as_f64().unwrap().abs() < 2.0));
        assert!(band(&free, MAX_SECTION + 1).is_err());
        assert!(report("{}", 100).is_err());
        assert!(report(&scalar_profile(0.0, 1.0, 0.0), 100).is_err());
    }
}
