//! Sparse spectrum recovery from a subset of time samples: greedy matching
//! pursuit with joint least-squares re-estimation, and an exhaustive
//! minimum-support search for small problems.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{least_squares_solve, norm2, CMatrix};
use crate::transform::{idft, validated_indices, ComplexSignal, DftPlan, Spectrum};

/// Default cap on the number of candidate supports the exhaustive search
/// will enumerate.
pub const DEFAULT_L0_BUDGET: u128 = 1_000_000;

/// Nonzero DFT coefficients `X(k)` of a length-N spectrum, sorted by
/// frequency index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    n: usize,
    entries: Vec<(usize, Complex64)>,
}

impl SparseSpectrum {
    pub fn new(n: usize, mut entries: Vec<(usize, Complex64)>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("ambient length must be positive"));
        }
        entries.sort_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(invalid(format!("duplicate frequency index {}", w[0].0)));
        }
        if let Some(&(k, _)) = entries.last() {
            if k >= n {
                return Err(invalid(format!("frequency {k} out of range for length {n}")));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn ambient_length(&self) -> usize {
        self.n
    }

    pub fn sparsity(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, Complex64)] {
        &self.entries
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// Full spectrum with zeros off the support.
    pub fn to_spectrum(&self) -> Spectrum {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.n];
        for &(k, v) in &self.entries {
            coeffs[k] = v;
        }
        Spectrum::new(coeffs).expect("ambient length is positive")
    }
}

/// Time samples `y(i) = x(nᵢ)` at strictly increasing indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    n: usize,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl MeasurementSet {
    pub fn new(n: usize, indices: Vec<usize>, values: Vec<Complex64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                found: values.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("measurement indices must be strictly increasing"));
        }
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(invalid(format!("measurement index out of range for length {n}")));
        }
        Ok(Self { n, indices, values })
    }

    /// Samples of `signal` at `indices` (any order, no duplicates).
    pub fn from_signal(signal: &ComplexSignal, indices: &[usize]) -> Result<Self> {
        let indices = validated_indices(signal.len(), indices)?;
        let values = signal.select(&indices);
        Ok(Self {
            n: signal.len(),
            indices,
            values,
        })
    }

    pub fn ambient_length(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Result of a matching-pursuit run.
#[derive(Debug, Clone)]
pub struct MpSolution {
    pub spectrum: SparseSpectrum,
    /// Frequencies in the order they were detected.
    pub selection_order: Vec<usize>,
    /// `A_K·X_K` at the measurement indices.
    pub fitted: Vec<Complex64>,
    /// `‖y − A_K·X_K‖₂` after the last iteration.
    pub residual_norm: f64,
    /// Residual norm after each iteration.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MpOptions {
    /// Stop before `K` components once `‖e‖₂ ≤ threshold·‖y‖₂`. Disabled
    /// when `None`.
    pub residual_threshold: Option<f64>,
}

/// Matching-pursuit reconstructor bound to one signal length. Holding one
/// across many trials reuses the transform plan.
#[derive(Debug, Clone)]
pub struct MatchingPursuit {
    plan: DftPlan,
}

impl MatchingPursuit {
    pub fn new(n: usize) -> Self {
        Self {
            plan: DftPlan::new(n),
        }
    }

    pub fn len(&self) -> usize {
        self.plan.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plan.is_empty()
    }

    fn column(&self, indices: &[usize], k: usize) -> Vec<Complex64> {
        let scale = 1.0 / self.plan.len() as f64;
        indices.iter().map(|&i| self.plan.basis(i, k) * scale).collect()
    }

    fn submatrix(&self, indices: &[usize], support: &[usize]) -> CMatrix {
        let cols: Vec<Vec<Complex64>> = support.iter().map(|&k| self.column(indices, k)).collect();
        CMatrix::from_columns(&cols).expect("columns share the measurement length")
    }

    pub fn reconstruct(&self, m: &MeasurementSet, sparsity: usize) -> Result<MpSolution> {
        self.reconstruct_with(m, sparsity, &MpOptions::default())
    }

    /// Runs `sparsity` detect/re-fit iterations (fewer if the optional
    /// residual threshold triggers).
    ///
    /// Each iteration back-projects the residual, adds the unselected
    /// frequency of largest magnitude (lowest index on ties), re-fits all
    /// selected coefficients jointly and recomputes the residual.
    pub fn reconstruct_with(
        &self,
        m: &MeasurementSet,
        sparsity: usize,
        opts: &MpOptions,
    ) -> Result<MpSolution> {
        let n = self.plan.len();
        if m.ambient_length() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.ambient_length(),
            });
        }
        if sparsity == 0 {
            return Err(invalid("sparsity must be at least 1"));
        }
        if sparsity > m.len() {
            return Err(invalid(format!(
                "sparsity {sparsity} exceeds measurement count {}",
                m.len()
            )));
        }

        let y = m.values();
        let y_norm = norm2(y);
        let stop_below = opts.residual_threshold.map(|t| t * y_norm);

        let mut selected = vec![false; n];
        let mut order: Vec<usize> = Vec::with_capacity(sparsity);
        let mut residual = y.to_vec();
        let mut fitted = vec![Complex64::new(0.0, 0.0); m.len()];
        let mut coeffs: Vec<Complex64> = Vec::new();
        let mut history = Vec::with_capacity(sparsity);

        for iteration in 1..=sparsity {
            let projection = self.plan.back_project(m.indices(), &residual);
            let mut best: Option<(usize, f64)> = None;
            for (k, v) in projection.iter().enumerate() {
                if selected[k] {
                    continue;
                }
                let mag = v.norm_sqr();
                if best.is_none_or(|(_, b)| mag > b) {
                    best = Some((k, mag));
                }
            }
            let (k, _) = best.expect("sparsity <= M <= N leaves a free frequency");
            selected[k] = true;
            order.push(k);

            let a_k = self.submatrix(m.indices(), &order);
            coeffs = least_squares_solve(&a_k, y).map_err(|e| match e {
                Error::RankDeficient { rank, cols } => Error::ReconstructionFailed {
                    iteration,
                    rank,
                    cols,
                },
                other => other,
            })?;
            fitted = a_k.mul_vec(&coeffs)?;
            for ((r, yi), fi) in residual.iter_mut().zip(y).zip(&fitted) {
                *r = yi - fi;
            }
            let rn = norm2(&residual);
            history.push(rn);
            if stop_below.is_some_and(|t| rn <= t) {
                break;
            }
        }

        let entries = order.iter().copied().zip(coeffs).collect();
        Ok(MpSolution {
            spectrum: SparseSpectrum::new(n, entries)?,
            selection_order: order,
            fitted,
            residual_norm: history.last().copied().unwrap_or(y_norm),
            residual_history: history,
        })
    }

    /// Time signal of a sparse spectrum by direct summation over its
    /// entries. Agrees with [`reconstruct_signal`].
    pub fn synthesize(&self, s: &SparseSpectrum) -> Result<ComplexSignal> {
        let n = self.plan.len();
        if s.ambient_length() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.ambient_length(),
            });
        }
        let scale = 1.0 / n as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for &(k, v) in s.entries() {
            let v = v * scale;
            let mut idx = 0usize;
            for o in out.iter_mut() {
                *o += v * self.plan.basis(idx, 1);
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
        }
        ComplexSignal::new(out)
    }
}

/// One-shot matching pursuit; see [`MatchingPursuit::reconstruct_with`].
pub fn mp_reconstruct(m: &MeasurementSet, sparsity: usize) -> Result<MpSolution> {
    MatchingPursuit::new(m.ambient_length()).reconstruct(m, sparsity)
}

/// Result of the exhaustive minimum-support search.
#[derive(Debug, Clone)]
pub struct L0Solution {
    pub spectrum: SparseSpectrum,
    pub residual_norm: f64,
    /// Number of supports that were rank-deficient and skipped.
    pub skipped: u64,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

pub fn exhaustive_l0_oracle(m: &MeasurementSet, sparsity: usize) -> Result<L0Solution> {
    exhaustive_l0_oracle_with_budget(m, sparsity, DEFAULT_L0_BUDGET)
}

/// Least-squares fits every size-`sparsity` support and keeps the one with
/// the smallest residual, the lexicographically first on ties.
pub fn exhaustive_l0_oracle_with_budget(
    m: &MeasurementSet,
    sparsity: usize,
    budget: u128,
) -> Result<L0Solution> {
    let n = m.ambient_length();
    if sparsity == 0 {
        return Err(invalid("sparsity must be at least 1"));
    }
    if sparsity > m.len() {
        return Err(invalid(format!(
            "sparsity {sparsity} exceeds measurement count {}",
            m.len()
        )));
    }
    let candidates = binomial(n, sparsity);
    if candidates > budget {
        return Err(Error::BudgetExceeded { candidates, budget });
    }

    let mp = MatchingPursuit::new(n);
    let y = m.values();
    let mut support: Vec<usize> = (0..sparsity).collect();
    let mut best: Option<(Vec<usize>, Vec<Complex64>, f64)> = None;
    let mut skipped = 0u64;

    loop {
        let a_k = mp.submatrix(m.indices(), &support);
        match least_squares_solve(&a_k, y) {
            Ok(coeffs) => {
                let fit = a_k.mul_vec(&coeffs)?;
                let r: Vec<Complex64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
                let rn = norm2(&r);
                if best.as_ref().is_none_or(|b| rn < b.2) {
                    best = Some((support.clone(), coeffs, rn));
                }
            }
            Err(Error::RankDeficient { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
        if !next_combination(&mut support, n) {
            break;
        }
    }

    let (support, coeffs, residual_norm) =
        best.ok_or_else(|| Error::Infeasible("every candidate support is rank-deficient".into()))?;
    Ok(L0Solution {
        spectrum: SparseSpectrum::new(n, support.into_iter().zip(coeffs).collect())?,
        residual_norm,
        skipped,
    })
}

/// Advances a sorted k-subset of `0..n` to its lexicographic successor.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Inverse DFT of the zero-filled sparse spectrum.
pub fn reconstruct_signal(s: &SparseSpectrum) -> ComplexSignal {
    idft(&s.to_spectrum())
}
