use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Hermitian matrix `M[k][l] = f(t_k) conj(f(t_l))` assembled from lag rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LagProductMatrix {
    entries: DMatrix<Complex64>,
    origin: i64,
    step: f64,
}

/// Builds the matrix from `rows[v][k] = f(t_k) conj(f(t_k - v step))`, `t_k = (origin + k) step`,
/// and symmetrises it as `(M + M^H) / 2`. Every lag in `[-(n-1), n-1]` is required.
pub fn assemble_lag_matrix(
    rows: &BTreeMap<i64, Vec<Complex64>>,
    n: usize,
    origin: i64,
    step: f64,
) -> Result<LagProductMatrix> {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let n = n as i64;
    for v in -(n - 1)..n {
        let row = rows.get(&v).ok_or(Error::MissingLag(v))?;
        if row.len() != n as usize {
            return Err(Error::GridMismatch(format!(
                "lag row {v} has {} entries, expected {n}",
                row.len()
            )));
        }
        for k in 0..n {
            let l = k - v;
            if (0..n).contains(&l) {
                m[(k as usize, l as usize)] = row[k as usize];
            }
        }
    }
    Ok(LagProductMatrix::from_matrix(m, origin, step))
}

impl LagProductMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>, origin: i64, step: f64) -> Self {
        let entries = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self { entries, origin, step }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub(crate) fn set_diagonal(&mut self, d: &[f64]) {
        for (i, &v) in d.iter().enumerate() {
            self.entries[(i, i)] = Complex64::new(v, 0.0);
        }
    }

    /// Leading eigenpair by power iteration from the all-ones vector
    /// (at most `max_iter` steps, stopping once the iterate moves less than `tol`).
    pub fn leading_eigenpair(&self, max_iter: usize, tol: f64) -> (f64, Vec<Complex64>) {
        let n = self.dim();
        if n == 0 {
            return (0.0, Vec::new());
        }
        let mut v = nalgebra::DVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
        for _ in 0..max_iter {
            let w = &self.entries * &v;
            let norm = w.norm();
            if norm == 0.0 {
                return (0.0, v.iter().copied().collect());
            }
            let mut next = w / Complex64::new(norm, 0.0);
            // fix the gauge so successive iterates are comparable
            let ip = v.dotc(&next);
            if ip.norm() > 0.0 {
                next *= Complex64::from_polar(1.0, -ip.arg());
            }
            let change = (&next - &v).norm();
            v = next;
            if change < tol {
                break;
            }
        }
        let lambda = v.dotc(&(&self.entries * &v)).re;
        (lambda, v.iter().copied().collect())
    }

    /// `sigma_2 / sigma_1` of the singular values (zero for a zero or 1x1 matrix).
    pub fn rank_gap(&self) -> f64 {
        let mut s: Vec<f64> = self.entries.clone().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        match s.as_slice() {
            [s1, s2, ..] if *s1 > 0.0 => s2 / s1,
            _ => 0.0,
        }
    }

    /// Signal `sqrt(lambda) v` from the leading eigenpair.
    pub fn leading_signal(&self, max_iter: usize, tol: f64) -> SampledSignal {
        let (lambda, v) = self.leading_eigenpair(max_iter, tol);
        let s = Complex64::new(lambda.max(0.0).sqrt(), 0.0);
        SampledSignal::new(v.into_iter().map(|z| z * s).collect(), self.origin, self.step)
            .expect("matrix entries are finite")
    }
}

/// Lag rows of an exactly known signal; used as a test oracle.
#[cfg(test)]
pub(crate) fn exact_rows(f: &[Complex64]) -> BTreeMap<i64, Vec<Complex64>> {
    let n = f.len() as i64;
    (-(n - 1)..n)
        .map(|v| {
            let row = (0..n)
                .map(|k| {
                    let l = k - v;
                    if (0..n).contains(&l) {
                        f[k as usize] * f[l as usize].conj()
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            (v, row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::align_slices;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn lag_zero_alone_is_diagonal() {
        let f = random(5, 1);
        let mut rows: BTreeMap<i64, Vec<Complex64>> =
            (-4..5).map(|v| (v, vec![Complex64::new(0.0, 0.0); 5])).collect();
        rows.insert(0, f.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect());
        let m = assemble_lag_matrix(&rows, 5, 0, 1.0).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { f[i].norm_sqr() } else { 0.0 };
                assert_eq!(m.entries()[(i, j)], Complex64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn exact_rows_give_rank_one() {
        let f = random(8, 2);
        let m = assemble_lag_matrix(&exact_rows(&f), 8, -3, 0.5).unwrap();
        assert!(m.rank_gap() < 1e-12);
        // oracle: full Hermitian eigendecomposition
        let eig = m.entries().clone().symmetric_eigen();
        let (imax, _) = eig.eigenvalues.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let ev: Vec<Complex64> = eig.eigenvectors.column(imax).iter().copied().collect();
        assert!(align_slices(&f, &ev).unwrap().residual > 0.0);
        let norm = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let fu: Vec<Complex64> = f.iter().map(|z| z / norm).collect();
        assert!(align_slices(&fu, &ev).unwrap().residual < 1e-10);
        let s = m.leading_signal(200, 1e-12);
        assert_eq!((s.origin(), s.step()), (-3, 0.5));
        assert!(align_slices(&f, s.samples()).unwrap().residual < 1e-12);
    }

    #[test]
    fn missing_lag_is_reported() {
        let mut rows = exact_rows(&random(4, 3));
        rows.remove(&-2);
        assert!(matches!(assemble_lag_matrix(&rows, 4, 0, 1.0), Err(Error::MissingLag(-2))));
    }

    #[test]
    fn noisy_rows_are_symmetrised() {
        let mut rows = exact_rows(&random(6, 4));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for row in rows.values_mut() {
            for z in row.iter_mut() {
                *z += Complex64::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
            }
        }
        let m = assemble_lag_matrix(&rows, 6, 0, 1.0).unwrap();
        assert_eq!(m.entries(), &m.entries().adjoint());
    }
}
