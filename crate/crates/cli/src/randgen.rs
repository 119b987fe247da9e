//! Seeded random admissible profiles.
//!
//! `m ∈ 1..=3`, `N0 ∈ 1..=8`. `P_n`, `Q_n` have real and imaginary parts
//! drawn uniformly from `[-2, 2]` and are then symmetrised to `(X + X*)/2`.
//! `A_n = I + H` and `B_n = -I + H'` where `H`, `H'` are symmetrised random
//! matrices rescaled to a random spectral norm below `0.45`, so every
//! `A_n`, `B_n` stays within distance 0.5 of `±I` and is invertible.

use jost_core::{CoefficientProfile, ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_M: usize = 3;
pub const MAX_N0: usize = 8;
pub const POTENTIAL_AMPLITUDE: f64 = 2.0;
pub const HOPPING_RADIUS: f64 = 0.45;

fn symmetrised(rng: &mut ChaCha8Rng, m: usize, amplitude: f64) -> ComplexMatrix {
    let x = ComplexMatrix::from_fn(m, |_, _| {
        C64::new(
            rng.random_range(-amplitude..=amplitude),
            rng.random_range(-amplitude..=amplitude),
        )
    });
    let mut h = (&x + &x.adjoint()).scale_real(0.5);
    // Exact symmetry on the diagonal and across it, whatever rounding did.
    for i in 0..m {
        h[(i, i)] = C64::new(h[(i, i)].re, 0.0);
        for j in 0..i {
            h[(i, j)] = h[(j, i)].conj();
        }
    }
    h
}

fn near(rng: &mut ChaCha8Rng, m: usize, center: f64) -> ComplexMatrix {
    let h = symmetrised(rng, m, 1.0);
    let norm = h.spectral_norm();
    let radius = HOPPING_RADIUS * rng.random_range(0.0..1.0);
    let h = if norm > 0.0 {
        h.scale_real(radius / norm)
    } else {
        h
    };
    let mut out = ComplexMatrix::scalar(m, C64::new(center, 0.0));
    out.add_scaled(&h, C64::new(1.0, 0.0));
    out
}

pub fn random_profile(rng: &mut ChaCha8Rng) -> CoefficientProfile {
    let m = rng.random_range(1..=MAX_M);
    let n0 = rng.random_range(1..=MAX_N0);
    let a = (0..=n0).map(|_| near(rng, m, 1.0)).collect();
    let b = (0..n0).map(|_| near(rng, m, -1.0)).collect();
    let p = (0..n0)
        .map(|_| symmetrised(rng, m, POTENTIAL_AMPLITUDE))
        .collect();
    let q = (0..n0)
        .map(|_| symmetrised(rng, m, POTENTIAL_AMPLITUDE))
        .collect();
    CoefficientProfile::new(m, a, b, p, q).expect("generator produces consistent shapes")
}

/// `count` profiles from one ChaCha8 stream seeded with `seed`.
pub fn random_suite(seed: u64, count: usize) -> Vec<CoefficientProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_profile(&mut rng)).collect()
}
