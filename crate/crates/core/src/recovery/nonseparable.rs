use num_complex::Complex64;
use serde::Serialize;

use super::stft::{lag_rows, StolctRecoveryOptions};
use super::RecoveryReport;
use crate::error::{Error, Result};
use crate::params::ParameterMatrix;
use crate::signal::{SampledSignal, Support};
use crate::stolct::{stolct, MagnitudeMap, Window};

/// Relative amplitude below which a sample counts as a zero of `|f|`.
pub const AMP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Separability {
    /// `|f|` has one connected support component, so `f` is fixed up to sign.
    UniqueUpToSign,
    /// Several components: each may flip sign independently.
    SeparableAmbiguous,
}

impl Separability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Separability::UniqueUpToSign => "unique_up_to_sign",
            Separability::SeparableAmbiguous => "separable_ambiguous",
        }
    }
}

/// Maximal runs `[start, end)` of samples with `amp > floor * max(amp)`.
pub fn signs_from_components(amp: &[f64], floor: f64) -> Vec<(usize, usize)> {
    let peak = amp.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    if peak == 0.0 {
        return out;
    }
    let mut start = None;
    for (i, &v) in amp.iter().enumerate() {
        match (v > floor * peak, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, amp.len()));
    }
    out
}

/// Signs a real signal from the zero-lag row `|f|^2` and the neighbour
/// products `f(t_k) f(t_{k-1})`.
///
/// Within a support component the sign of each product carries the sign
/// across; each component starts positive, so with several components the
/// result is one member of the ambiguity class. The zero-lag row is real up
/// to solve noise, so its largest imaginary part sets the noise level: an
/// amplitude must clear `4 sqrt(noise)` as well as `AMP_FLOOR` to count as
/// nonzero, and samples below the floor are set to zero.
pub(crate) fn sign_recovery(row0: &[Complex64], links: &[f64]) -> Result<(Vec<f64>, Separability, usize)> {
    let min = row0.iter().map(|z| z.re).fold(0.0, f64::min);
    if min < -1e-6 {
        return Err(Error::NegativeEnergy { min });
    }
    let mut amp: Vec<f64> = row0.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    let peak = amp.iter().copied().fold(0.0, f64::max);
    let noise = row0.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let floor = if peak > 0.0 { AMP_FLOOR.max(4.0 * noise.sqrt() / peak) } else { AMP_FLOOR };
    let comps = signs_from_components(&amp, floor);
    let mut kept = vec![false; amp.len()];
    for &(s, e) in &comps {
        kept[s..e].iter_mut().for_each(|k| *k = true);
    }
    for (v, k) in amp.iter_mut().zip(&kept) {
        if !k {
            *v = 0.0;
        }
    }
    for &(s, e) in &comps {
        let mut sign = 1.0;
        for k in s + 1..e {
            if links[k] < 0.0 {
                sign = -sign;
            }
            amp[k] *= sign;
        }
    }
    let verdict = if comps.len() > 1 {
        Separability::SeparableAmbiguous
    } else {
        Separability::UniqueUpToSign
    };
    Ok((amp, verdict, comps.len()))
}

/// Real part of `f~(t_k) conj f~(t_{k-1})` with the chirp `e^{j a t^2 / 2b}` removed.
pub(crate) fn unchirped_links(row: &[Complex64], a: &ParameterMatrix, support: &Support) -> Vec<f64> {
    let ratio = a.a() / (2.0 * a.b());
    (0..support.len)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let (t, s) = (support.time(k), support.time(k - 1));
            (row[k] * Complex64::from_polar(1.0, -ratio * (t * t - s * s))).re
        })
        .collect()
}

/// Recovers a real signal up to sign from its short-time OLCT magnitudes.
///
/// The zero-lag row gives `|f|^2` and the unit-lag row links neighbouring
/// signs. Across a gap in the support no link survives, so with several
/// components the verdict is `separable_ambiguous` and the returned signal is
/// one member of the ambiguity class (each component starting positive).
pub fn recover_nonseparable_real(
    mag: &MagnitudeMap,
    phi: &SampledSignal,
    a: &ParameterMatrix,
    support: &Support,
) -> Result<RecoveryReport> {
    let opts = StolctRecoveryOptions::default();
    let lr = lag_rows(mag, phi, a, support, &[0, 1], opts.floor)?;
    let fraction = lr.masked_fraction();
    if fraction > opts.vanish_limit {
        return Err(Error::WindowVanishes { fraction, limit: opts.vanish_limit });
    }
    let links = unchirped_links(&lr.rows[1], a, support);
    let (amp, verdict, components) = sign_recovery(&lr.rows[0], &links)?;
    let signal = SampledSignal::from_real(&amp, support.origin, support.step)?;
    let again = stolct(&signal, &Window::Sampled(phi.clone()), a, &mag.shift_grid, &mag.freq_grid)?;
    let misfit = again
        .values()
        .iter()
        .zip(&mag.values)
        .map(|(z, m)| (z.norm() - m).abs())
        .fold(0.0, f64::max);
    let mut report = RecoveryReport::new(signal, misfit);
    report.verdict = Some(verdict.as_str().to_string());
    report.diag("components", components as f64);
    report.diag("masked_fraction", fraction);
    report.diag(
        "imaginary_leak",
        lr.rows[0].iter().map(|z| z.im.abs()).fold(0.0, f64::max),
    );
    Ok(report)
}
