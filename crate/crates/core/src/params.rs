//! The six-parameter OLCT matrix `[a b | y0; c d | w0]` and common presets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Maximum allowed deviation of `ad - bc` from one.
pub const DET_TOLERANCE: f64 = 1e-12;

/// Validated OLCT parameters with unit determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterMatrix {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    y0: f64,
    w0: f64,
}

/// Presets for the classical transforms contained in the OLCT family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialCase {
    Fourier,
    /// Fractional Fourier transform with rotation angle `theta`.
    Fractional(f64),
    /// Linear canonical transform without offsets.
    Canonical { a: f64, b: f64, c: f64, d: f64 },
    /// Fresnel transform with propagation distance `z`.
    Fresnel(f64),
}

impl ParameterMatrix {
    pub fn new(a: f64, b: f64, c: f64, d: f64, y0: f64, w0: f64) -> Result<Self> {
        if ![a, b, c, d, y0, w0].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("parameter matrix"));
        }
        let det = a * d - b * c;
        if (det - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::Determinant { det });
        }
        Ok(Self { a, b, c, d, y0, w0 })
    }

    /// Builds the matrix for a preset with zero offsets.
    pub fn special(kind: SpecialCase) -> Result<Self> {
        match kind {
            SpecialCase::Fourier => Self::new(0.0, 1.0, -1.0, 0.0, 0.0, 0.0),
            SpecialCase::Fractional(theta) => {
                let (s, c) = theta.sin_cos();
                // cos(pi/2) is not exactly zero in floating point
                let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
                Self::new(snap(c), snap(s), -snap(s), snap(c), 0.0, 0.0)
            }
            SpecialCase::Canonical { a, b, c, d } => Self::new(a, b, c, d, 0.0, 0.0),
            SpecialCase::Fresnel(z) => Self::new(1.0, z, 0.0, 1.0, 0.0, 0.0),
        }
    }

    /// Returns a copy with the offsets replaced.
    pub fn with_offsets(self, y0: f64, w0: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.c, self.d, y0, w0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.y0, self.w0]
    }

    /// `b == 0`: the transform degenerates into a chirp multiplication.
    pub fn is_degenerate(&self) -> bool {
        self.b == 0.0
    }

    /// Chirp rate `a / b` that distinguishes matrices in multi-transform recovery.
    pub fn chirp_ratio(&self) -> Option<f64> {
        (!self.is_degenerate()).then(|| self.a / self.b)
    }

    /// Parameters of the inverse transform: `[d -b | b w0 - d y0; -c a | c y0 - a w0]`.
    pub fn inverse(&self) -> Self {
        let Self { a, b, c, d, y0, w0 } = *self;
        Self {
            a: d,
            b: -b,
            c: -c,
            d: a,
            y0: b * w0 - d * y0,
            w0: c * y0 - a * w0,
        }
    }

    /// Unimodular constant multiplying the inversion integral.
    pub fn inversion_constant(&self) -> Complex64 {
        let Self { a, b, c, d, y0, w0 } = *self;
        let phase = 0.5 * (c * d * y0 * y0 - 2.0 * a * d * y0 * w0 + a * b * w0 * w0);
        Complex64::from_polar(1.0, phase)
    }

    /// `1 / sqrt(j 2 pi b)` using the principal square root.
    pub fn kernel_scale(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI * self.b).sqrt().inv()
    }

    /// OLCT kernel `K_A(t, u)` for `b != 0`.
    pub fn kernel(&self, t: f64, u: f64) -> Complex64 {
        self.kernel_scale() * Complex64::from_polar(1.0, self.kernel_phase(t, u))
    }

    pub(crate) fn kernel_phase(&self, t: f64, u: f64) -> f64 {
        let Self { a, b, d, y0, w0, .. } = *self;
        (d * u * u + d * y0 * y0 + a * t * t + 2.0 * t * (y0 - u) - 2.0 * u * (d * y0 - b * w0))
            / (2.0 * b)
    }
}

#[derive(Deserialize)]
struct RawMatrix {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    #[serde(default)]
    y0: f64,
    #[serde(default)]
    w0: f64,
}

impl<'de> Deserialize<'de> for ParameterMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMatrix::deserialize(de)?;
        ParameterMatrix::new(raw.a, raw.b, raw.c, raw.d, raw.y0, raw.w0)
            .map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for ParameterMatrix {
    type Err = Error;

    /// Parses `a,b,c,d,y0,w0`.
    fn from_str(s: &str) -> Result<Self> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("matrix '{s}': {e}")))?;
        match vals.as_slice() {
            [a, b, c, d, y0, w0] => Self::new(*a, *b, *c, *d, *y0, *w0),
            [a, b, c, d] => Self::new(*a, *b, *c, *d, 0.0, 0.0),
            _ => Err(Error::Config(format!(
                "matrix '{s}' needs 4 or 6 comma separated values"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn presets_and_validation() {
        let id = ParameterMatrix::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert!(id.is_degenerate());
        let ft = ParameterMatrix::new(0.0, 1.0, -1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(!ft.is_degenerate());
        assert!(matches!(
            ParameterMatrix::new(1.0, 1.0, 1.0, 1.0, 0.0, 0.0),
            Err(Error::Determinant { .. })
        ));
        assert_eq!(ParameterMatrix::special(SpecialCase::Fourier).unwrap(), ft);
        assert_eq!(
            ParameterMatrix::special(SpecialCase::Fractional(PI / 2.0)).unwrap(),
            ft
        );
        assert_eq!(
            ParameterMatrix::special(SpecialCase::Fresnel(2.0))
                .unwrap()
                .as_array(),
            [1.0, 2.0, 0.0, 1.0, 0.0, 0.0]
        );
        assert!(ParameterMatrix::special(SpecialCase::Canonical {
            a: 2.0,
            b: 1.0,
            c: 1.0,
            d: 2.0
        })
        .is_err());
    }

    #[test]
    fn inverse_of_presets() {
        let id = ParameterMatrix::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(id.inverse(), id);
        let ft = ParameterMatrix::special(SpecialCase::Fourier).unwrap();
        assert_eq!(ft.inverse().as_array(), [0.0, -1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(ft.inversion_constant(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn parse_matrix() {
        let m: ParameterMatrix = "0,1,-1,0,0.5,0.25".parse().unwrap();
        assert_eq!(m.y0(), 0.5);
        assert!("1,2".parse::<ParameterMatrix>().is_err());
        let j: ParameterMatrix = serde_json::from_str(r#"{"a":0,"b":1,"c":-1,"d":0}"#).unwrap();
        assert_eq!(j.b(), 1.0);
        assert!(serde_json::from_str::<ParameterMatrix>(r#"{"a":1,"b":1,"c":1,"d":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn fractional_has_unit_determinant(theta in -10.0f64..10.0) {
            prop_assert!(ParameterMatrix::special(SpecialCase::Fractional(theta)).is_ok());
        }

        #[test]
        fn inverse_is_involution(a in -3.0f64..3.0, b in 0.1f64..3.0, d in -3.0f64..3.0,
                                 y0 in -2.0f64..2.0, w0 in -2.0f64..2.0) {
            let c = (a * d - 1.0) / b;
            let m = ParameterMatrix::new(a, b, c, d, y0, w0).unwrap();
            let inv = m.inverse();
            prop_assert!((inv.a * inv.d - inv.b * inv.c - 1.0).abs() < 1e-12);
            let back = inv.inverse();
            for (x, y) in back.as_array().iter().zip(m.as_array()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
