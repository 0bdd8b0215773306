//! Signals with equal OLCT magnitudes: trivial ambiguities and the
//! convolution-swap construction of nontrivial ones.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::phase::{align_slices, phase_invariant_error};
use crate::signal::{Grid, SampledSignal};
use crate::transforms::olct_magnitude;

/// Magnitude-preserving operations that no phase retrieval method can undo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TrivialAmbiguity {
    /// `e^{j beta} x`.
    Rotate(f64),
    /// `e^{-j a t0 t / b} x(t - t0)` with `t0 = n0 * step`.
    Shift(i64),
    /// `e^{-j a t^2 / b} conj(x(-t))`.
    ConjugateReflect,
}

pub fn apply_trivial_ambiguity(
    x: &SampledSignal,
    a: &ParameterMatrix,
    kind: TrivialAmbiguity,
) -> Result<SampledSignal> {
    match kind {
        TrivialAmbiguity::Rotate(beta) => Ok(x.scale(Complex64::from_polar(1.0, beta))),
        TrivialAmbiguity::Shift(n0) => {
            let r = a.chirp_ratio().ok_or(Error::DegenerateParameter)?;
            let t0 = n0 as f64 * x.step();
            let moved = SampledSignal::new(x.samples().to_vec(), x.origin() + n0, x.step())?;
            Ok(moved.map(|t, v| v * Complex64::from_polar(1.0, -r * t0 * t)))
        }
        TrivialAmbiguity::ConjugateReflect => {
            let r = a.chirp_ratio().ok_or(Error::DegenerateParameter)?;
            let samples: Vec<Complex64> = x.samples().iter().rev().map(|v| v.conj()).collect();
            let origin = -(x.end_index() - 1);
            let flipped = SampledSignal::new(samples, origin, x.step())?;
            Ok(flipped.map(|t, v| v * Complex64::from_polar(1.0, -r * t * t)))
        }
    }
}

/// Parameters used to build an [`AmbiguityPair`].
#[derive(Debug, Clone, Serialize)]
pub struct PairProvenance {
    pub g1: SampledSignal,
    pub g2: SampledSignal,
    pub beta: f64,
    pub n0: i64,
    pub matrix: ParameterMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmbiguityPair {
    pub x: SampledSignal,
    pub y: SampledSignal,
    pub provenance: PairProvenance,
}

/// Direct linear convolution on the sample lattice (no step weight).
pub fn convolve(p: &SampledSignal, q: &SampledSignal) -> Result<SampledSignal> {
    p.check_same_step(q)?;
    if p.is_empty() || q.is_empty() {
        return SampledSignal::zeros(p.origin() + q.origin(), p.step(), 0);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.samples().iter().enumerate() {
        for (j, b) in q.samples().iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    SampledSignal::new(out, p.origin() + q.origin(), p.step())
}

/// `n -> conj(x[-n])`.
pub fn conj_reverse(x: &SampledSignal) -> SampledSignal {
    let samples = x.samples().iter().rev().map(|v| v.conj()).collect();
    SampledSignal::new(samples, -(x.end_index() - 1), x.step()).expect("valid input")
}

fn unchirp(x: &SampledSignal, ratio: f64) -> SampledSignal {
    x.map(|t, v| v * Complex64::from_polar(1.0, -0.5 * ratio * t * t))
}

/// Builds `x = e^{-j a t^2 / 2b} (g1 * g2)` and
/// `y = e^{j beta} e^{-j a t^2 / 2b} (g1[. - n0] * conj(g2[-.]))`.
pub fn make_nontrivial_pair(
    g1: &SampledSignal,
    g2: &SampledSignal,
    a: &ParameterMatrix,
    beta: f64,
    n0: i64,
) -> Result<AmbiguityPair> {
    let ratio = a.chirp_ratio().ok_or(Error::DegenerateParameter)?;
    if g1.norm() == 0.0 || g2.norm() == 0.0 {
        return Err(Error::ZeroFactor);
    }
    let x = unchirp(&convolve(g1, g2)?, ratio);
    let g1s = SampledSignal::new(g1.samples().to_vec(), g1.origin() + n0, g1.step())?;
    let y = unchirp(&convolve(&g1s, &conj_reverse(g2))?, ratio)
        .scale(Complex64::from_polar(1.0, beta));
    Ok(AmbiguityPair {
        x,
        y,
        provenance: PairProvenance {
            g1: g1.clone(),
            g2: g2.clone(),
            beta,
            n0,
            matrix: *a,
        },
    })
}

/// `a[n] = sum_k conj(x[k]) x[k + n]` for `|n| < N`.
pub fn autocorrelation(x: &SampledSignal) -> SampledSignal {
    let n = x.len() as i64;
    if n == 0 {
        return x.clone();
    }
    let s = x.samples();
    let samples = (-(n - 1)..n)
        .map(|lag| {
            (0..n)
                .filter(|k| (0..n).contains(&(k + lag)))
                .map(|k| s[k as usize].conj() * s[(k + lag) as usize])
                .sum()
        })
        .collect();
    SampledSignal::new(samples, -(n - 1), x.step()).expect("valid input")
}

/// Result of [`certify_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCertificate {
    /// `max_u | |O x(u)| - |O y(u)| |`.
    pub max_dev: f64,
    /// `max_dev <= tol`.
    pub certified: bool,
    /// Phase-invariant residual between `x` and `y` exceeds `1e-3`.
    pub distinct: bool,
    /// `y` is a rotation, shift and/or conjugate reflection of `x` (residual `<= 1e-8`).
    pub trivial_equivalent: bool,
}

const DISTINCT_THRESHOLD: f64 = 1e-3;
const TRIVIAL_THRESHOLD: f64 = 1e-8;

pub fn certify_pair(
    x: &SampledSignal,
    y: &SampledSignal,
    a: &ParameterMatrix,
    ugrid: &Grid,
    tol: f64,
) -> Result<PairCertificate> {
    let mx = olct_magnitude(x, a, ugrid)?;
    let my = olct_magnitude(y, a, ugrid)?;
    let max_dev = mx.iter().zip(&my).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let distinct = match phase_invariant_error(x, y) {
        Ok(al) => al.residual > DISTINCT_THRESHOLD,
        Err(Error::ZeroSignal) => y.norm() > 0.0,
        Err(e) => return Err(e),
    };
    Ok(PairCertificate {
        max_dev,
        certified: max_dev <= tol,
        distinct,
        trivial_equivalent: trivial_orbit_residual(x, y, a)? <= TRIVIAL_THRESHOLD,
    })
}

/// Smallest phase-aligned residual `|y - e^{j beta} T x| / |y|` over shifts and reflections `T`.
pub fn trivial_orbit_residual(x: &SampledSignal, y: &SampledSignal, a: &ParameterMatrix) -> Result<f64> {
    if y.norm() == 0.0 {
        return Ok(if x.norm() == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let x = x.trimmed(0.0);
    let y = y.trimmed(0.0);
    if x.is_empty() {
        return Ok(1.0);
    }
    let mut best = phase_invariant_error(&y, &x)?.residual;
    if a.is_degenerate() {
        return Ok(best);
    }
    for reflect in [false, true] {
        let base = if reflect {
            apply_trivial_ambiguity(&x, a, TrivialAmbiguity::ConjugateReflect)?
        } else {
            x.clone()
        };
        let lo = y.origin() - base.end_index() + 1;
        let hi = y.end_index() - 1 - base.origin();
        for n0 in lo..=hi {
            let cand = apply_trivial_ambiguity(&base, a, TrivialAmbiguity::Shift(n0))?;
            let (o, len) = y.union_support(&cand)?;
            let r = align_slices(
                y.with_support(o, len).samples(),
                cand.with_support(o, len).samples(),
            )?
            .residual;
            best = best.min(r);
        }
    }
    Ok(best)
}
