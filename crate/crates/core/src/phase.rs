//! Comparison of signals modulo a global phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Optimal global phase `beta` and the relative residual it achieves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAlignment {
    pub beta: f64,
    pub residual: f64,
}

impl PhaseAlignment {
    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.beta)
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        -PI
    } else {
        y
    }
}

/// Aligns `g` to `f`: `beta = arg <g, f>`, residual `|f - e^{j beta} g| / |f|`.
///
/// Both signals are zero-padded to the union of their supports.
pub fn phase_invariant_error(f: &SampledSignal, g: &SampledSignal) -> Result<PhaseAlignment> {
    let (lo, len) = f.union_support(g)?;
    align_slices(
        f.with_support(lo, len).samples(),
        g.with_support(lo, len).samples(),
    )
}

/// Same as [`phase_invariant_error`] on equally indexed sample slices.
pub fn align_slices(f: &[Complex64], g: &[Complex64]) -> Result<PhaseAlignment> {
    assert_eq!(f.len(), g.len(), "slices must have equal length");
    let nf = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nf == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let ip: Complex64 = f.iter().zip(g).map(|(x, y)| y.conj() * x).sum();
    let beta = if ip.norm() == 0.0 { 0.0 } else { wrap_angle(ip.arg()) };
    let rot = Complex64::from_polar(1.0, beta);
    let diff = f
        .iter()
        .zip(g)
        .map(|(x, y)| (x - rot * y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(PhaseAlignment { beta, residual: diff / nf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SampledSignal::discrete(s, -3)
    }

    #[test]
    fn exact_phase_is_recovered() {
        let f = random(16, 1);
        let g = f.scale(Complex64::from_polar(1.0, PI / 3.0));
        let al = phase_invariant_error(&f, &g).unwrap();
        assert!((al.beta + PI / 3.0).abs() < 1e-12);
        assert!(al.residual <= 1e-14);
        let same = phase_invariant_error(&f, &f).unwrap();
        assert_eq!(same.beta, 0.0);
        assert!(same.residual < 1e-15);
    }

    #[test]
    fn zero_reference_is_an_error() {
        let z = SampledSignal::zeros(0, 1.0, 4).unwrap();
        assert!(matches!(phase_invariant_error(&z, &random(4, 2)), Err(Error::ZeroSignal)));
    }

    #[test]
    fn matches_brute_force_over_phase_grid() {
        let f = random(24, 3);
        let g = random(24, 4);
        let al = phase_invariant_error(&f, &g).unwrap();
        let nf = f.norm();
        let best = (0..4096)
            .map(|i| {
                let rot = Complex64::from_polar(1.0, -PI + 2.0 * PI * i as f64 / 4096.0);
                f.samples()
                    .iter()
                    .zip(g.samples())
                    .map(|(x, y)| (x - rot * y).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    / nf
            })
            .fold(f64::INFINITY, f64::min);
        assert!(al.residual <= best + 1e-12);
        assert!((al.residual - best).abs() < 1e-6);
    }

    #[test]
    fn supports_are_padded() {
        let f = SampledSignal::from_real(&[1.0, 2.0], 0, 1.0).unwrap();
        let g = SampledSignal::from_real(&[2.0], 1, 1.0).unwrap();
        let al = phase_invariant_error(&f, &g).unwrap();
        assert!((al.residual - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rotation_invariance(beta in -10.0f64..10.0, seed in 0u64..1000) {
            let f = random(12, seed);
            let g = f.scale(Complex64::from_polar(1.0, beta));
            prop_assert!(phase_invariant_error(&f, &g).unwrap().residual <= 1e-12);
        }

        #[test]
        fn symmetric_after_normalisation(s1 in 0u64..1000, s2 in 0u64..1000) {
            let f = random(10, s1);
            let g = random(10, s2 + 1000);
            let fu = f.scale(Complex64::new(1.0 / f.norm(), 0.0));
            let gu = g.scale(Complex64::new(1.0 / g.norm(), 0.0));
            let r1 = phase_invariant_error(&fu, &gu).unwrap().residual;
            let r2 = phase_invariant_error(&gu, &fu).unwrap().residual;
            prop_assert!((r1 - r2).abs() < 1e-12);
        }

        #[test]
        fn beta_is_wrapped(x in -100.0f64..100.0) {
            let w = wrap_angle(x);
            prop_assert!((-PI..PI).contains(&w));
            prop_assert!(((x - w) / (2.0 * PI)).fract().abs() < 1e-9
                || (1.0 - ((x - w) / (2.0 * PI)).fract().abs()) < 1e-9);
        }
    }
}
