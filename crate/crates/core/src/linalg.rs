//! Dense complex matrices and the least-squares solver used for the joint
//! re-estimation of detected spectral components.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from its columns. All columns must share one length.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(rows, columns.len(), |r, c| columns[c][r]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// `self · x`
    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `selfᴴ · y`
    pub fn adjoint_mul_vec(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: y.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, yr) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * yr;
            }
        }
        Ok(out)
    }
}

pub(crate) fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Minimizes `‖a·x − y‖₂` with a column-pivoted Householder QR factorization.
///
/// Columns whose pivot falls below `max(M, K)·ε·max_col_norm` count as
/// numerically dependent; any such column makes the system rank-deficient
/// and the call fails with [`Error::RankDeficient`].
pub fn least_squares_solve(a: &CMatrix, y: &[Complex64]) -> Result<Vec<Complex64>> {
    let (m, k) = (a.rows(), a.cols());
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: y.len(),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }

    // Column-major working copy.
    let mut cols: Vec<Vec<Complex64>> = (0..k).map(|c| a.column(c)).collect();
    let mut rhs = y.to_vec();
    let mut perm: Vec<usize> = (0..k).collect();

    let max_norm = cols.iter().map(|c| norm2(c)).fold(0.0_f64, f64::max);
    let tol = m.max(k) as f64 * f64::EPSILON * max_norm;
    let steps = m.min(k);
    let mut rank = 0;

    for j in 0..steps {
        // Pivot: largest remaining trailing norm, smallest index on ties.
        let mut best = j;
        let mut best_norm = -1.0;
        for (c, col) in cols.iter().enumerate().skip(j) {
            let nrm = norm2(&col[j..]);
            if nrm > best_norm {
                best_norm = nrm;
                best = c;
            }
        }
        if best_norm <= tol {
            break;
        }
        cols.swap(j, best);
        perm.swap(j, best);

        let x0 = cols[j][j];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * best_norm;
        let mut v: Vec<Complex64> = cols[j][j..].to_vec();
        v[0] -= alpha;
        let v_norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();

        if v_norm_sqr > 0.0 {
            let reflect = |target: &mut [Complex64]| {
                let s: Complex64 = v.iter().zip(target.iter()).map(|(vi, ti)| vi.conj() * ti).sum();
                let scale = s * (2.0 / v_norm_sqr);
                for (ti, vi) in target.iter_mut().zip(&v) {
                    *ti -= scale * vi;
                }
            };
            for col in cols.iter_mut().skip(j + 1) {
                reflect(&mut col[j..]);
            }
            reflect(&mut rhs[j..]);
        }
        cols[j][j] = alpha;
        for z in cols[j][j + 1..].iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        rank += 1;
    }

    if rank < k {
        return Err(Error::RankDeficient { rank, cols: k });
    }

    // Back substitution on the leading k×k triangle.
    let mut sol = vec![Complex64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut acc = rhs[i];
        for c in i + 1..k {
            acc -= cols[c][i] * sol[c];
        }
        sol[i] = acc / cols[i][i];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); k];
    for (j, &p) in perm.iter().enumerate() {
        out[p] = sol[j];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn column_of_ones_gives_mean_of_constant() {
        let a = CMatrix::from_fn(7, 1, |_, _| c(1.0, 0.0));
        let y = vec![c(2.5, -1.0); 7];
        let x = least_squares_solve(&a, &y).unwrap();
        assert!((x[0] - c(2.5, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn square_system_is_solved_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 6, 6);
        let v: Vec<_> = (0..6).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let y = a.mul_vec(&v).unwrap();
        let x = least_squares_solve(&a, &y).unwrap();
        for (xi, vi) in x.iter().zip(&v) {
            assert!((xi - vi).norm() < 1e-10);
        }
    }

    #[test]
    fn overdetermined_residual_is_orthogonal_to_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 32, 5);
        let v: Vec<_> = (0..5).map(|_| c(rng.random(), rng.random())).collect();
        let mut y = a.mul_vec(&v).unwrap();
        for yi in y.iter_mut() {
            *yi += c(rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3));
        }
        let x = least_squares_solve(&a, &y).unwrap();
        let fit = a.mul_vec(&x).unwrap();
        let resid: Vec<_> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
        // Normal-equation check, independent of the QR path.
        let normal = a.adjoint_mul_vec(&resid).unwrap();
        assert!(norm2(&normal) <= 1e-10 * norm2(&y));
    }

    #[test]
    fn duplicate_columns_report_rank() {
        let col: Vec<_> = (0..5).map(|i| c(i as f64 + 1.0, 0.5)).collect();
        let a = CMatrix::from_columns(&[col.clone(), col.clone(), vec![c(0.0, 1.0); 5]]).unwrap();
        match least_squares_solve(&a, &col) {
            Err(Error::RankDeficient { rank, cols }) => {
                assert_eq!((rank, cols), (2, 3));
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn zero_matrix_is_rank_zero() {
        let a = CMatrix::zeros(4, 2);
        assert!(matches!(
            least_squares_solve(&a, &[c(1.0, 0.0); 4]),
            Err(Error::RankDeficient { rank: 0, cols: 2 })
        ));
    }

    #[test]
    fn underdetermined_is_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 2, 3);
        assert!(matches!(
            least_squares_solve(&a, &[c(1.0, 0.0); 2]),
            Err(Error::RankDeficient { rank: 2, cols: 3 })
        ));
    }

    #[test]
    fn rhs_length_is_checked() {
        let a = CMatrix::zeros(4, 2);
        assert!(matches!(
            least_squares_solve(&a, &[c(1.0, 0.0); 3]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    proptest::proptest! {
        #[test]
        fn perturbation_never_lowers_residual(seed in 0u64..500, dr in -1e-3f64..1e-3, di in -1e-3f64..1e-3, which in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 12, 4);
            let y: Vec<_> = (0..12).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let x = least_squares_solve(&a, &y).unwrap();
            let resid = |x: &[Complex64]| {
                let fit = a.mul_vec(x).unwrap();
                norm2(&y.iter().zip(&fit).map(|(a, b)| a - b).collect::<Vec<_>>())
            };
            let base = resid(&x);
            let mut bumped = x.clone();
            bumped[which] += c(dr, di);
            proptest::prop_assert!(resid(&bumped) >= base - 1e-12);
        }
    }
}
