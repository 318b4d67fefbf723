//! Signals, spectra, the DFT pair and partial inverse-DFT measurement
//! matrices.
//!
//! Conventions: `X(k) = Σₙ x(n)·e^{−j2πnk/N}` (no scaling) and
//! `x(n) = (1/N)·Σₖ X(k)·e^{j2πnk/N}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;

pub use crate::linalg::least_squares_solve;

/// Time-domain samples `x(0), …, x(N−1)`. Length is at least one and every
/// entry is finite.
#[derive(Clone, PartialEq)]
pub struct ComplexSignal(Vec<Complex64>);

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("signal must have at least one sample"));
        }
        if let Some(i) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self(samples))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sample-wise sum of two equally long signals.
    pub fn add(&self, other: &ComplexSignal) -> Result<ComplexSignal> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn select(&self, indices: &[usize]) -> Vec<Complex64> {
        indices.iter().map(|&i| self.0[i]).collect()
    }
}

impl fmt::Debug for ComplexSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ComplexSignal").field(&self.0).finish()
    }
}

/// Full length-N DFT coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<Complex64>);

impl Spectrum {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid("spectrum must have at least one coefficient"));
        }
        Ok(Self(coefficients))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `e^{j2πm/N}` for `m = 0..N`.
pub fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| {
            let (s, c) = (2.0 * PI * m as f64 / n as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

/// Reusable transform state for one length: the twiddle table and, for
/// power-of-two lengths, FFT plans. Other lengths use direct summation.
#[derive(Clone)]
pub struct DftPlan {
    n: usize,
    twiddles: Vec<Complex64>,
    fft: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftPlan")
            .field("n", &self.n)
            .field("fft", &self.fft.is_some())
            .finish()
    }
}

impl DftPlan {
    pub fn new(n: usize) -> Self {
        let fft = if n.is_power_of_two() {
            let mut planner = FftPlanner::new();
            Some((planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
        } else {
            None
        };
        Self {
            n,
            twiddles: twiddles(n),
            fft,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `e^{j2π·(n·k mod N)/N}`
    #[inline]
    pub fn basis(&self, n: usize, k: usize) -> Complex64 {
        self.twiddles[(n * k) % self.n]
    }

    /// Unscaled forward transform, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        match &self.fft {
            Some((fwd, _)) => fwd.process(buf),
            None => {
                let out = self.direct(buf, true);
                buf.copy_from_slice(&out);
            }
        }
    }

    /// Inverse transform including the `1/N` factor, in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        match &self.fft {
            Some((_, inv)) => inv.process(buf),
            None => {
                let out = self.direct(buf, false);
                buf.copy_from_slice(&out);
            }
        }
        let scale = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    fn direct(&self, input: &[Complex64], forward: bool) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut idx = 0usize;
                for x in input {
                    let w = self.twiddles[idx];
                    acc += x * if forward { w.conj() } else { w };
                    idx += k;
                    if idx >= n {
                        idx -= n;
                    }
                }
                acc
            })
            .collect()
    }

    /// `Aᴴy` for the partial inverse-DFT matrix with rows at `indices`,
    /// computed as a scaled transform of the zero-filled measurements.
    pub fn back_project(&self, indices: &[usize], values: &[Complex64]) -> Vec<Complex64> {
        let scale = 1.0 / self.n as f64;
        if self.fft.is_some() {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
            for (&i, &v) in indices.iter().zip(values) {
                buf[i] = v;
            }
            self.forward_in_place(&mut buf);
            for z in buf.iter_mut() {
                *z *= scale;
            }
            buf
        } else {
            (0..self.n)
                .map(|k| {
                    indices
                        .iter()
                        .zip(values)
                        .map(|(&i, v)| v * self.basis(i, k).conj())
                        .sum::<Complex64>()
                        * scale
                })
                .collect()
        }
    }
}

/// Forward DFT, `X(k) = Σₙ x(n)·e^{−j2πnk/N}`.
pub fn dft(x: &ComplexSignal) -> Spectrum {
    let mut buf = x.samples().to_vec();
    DftPlan::new(buf.len()).forward_in_place(&mut buf);
    Spectrum(buf)
}

/// Inverse DFT, `x(n) = (1/N)·Σₖ X(k)·e^{j2πnk/N}`.
pub fn idft(spectrum: &Spectrum) -> ComplexSignal {
    let mut buf = spectrum.coefficients().to_vec();
    DftPlan::new(buf.len()).inverse_in_place(&mut buf);
    ComplexSignal(buf)
}

/// Rows of the inverse DFT matrix at a set of time indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    n: usize,
    source_indices: Vec<usize>,
    matrix: CMatrix,
}

impl MeasurementMatrix {
    pub fn ambient_length(&self) -> usize {
        self.n
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    /// `A·X` for a full-length spectrum.
    pub fn apply(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.mul_vec(spectrum)
    }

    /// The M×|cols| sub-matrix keeping the given frequency columns.
    pub fn columns(&self, cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(self.rows(), cols.len(), |r, c| self.matrix.get(r, cols[c]))
    }
}

/// Sorts and validates an index set against length `n`.
pub(crate) fn validated_indices(n: usize, indices: &[usize]) -> Result<Vec<usize>> {
    if indices.is_empty() {
        return Err(invalid("index set is empty"));
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(invalid(format!("duplicate index {}", w[0])));
    }
    if let Some(&last) = sorted.last() {
        if last >= n {
            return Err(invalid(format!("index {last} out of range for length {n}")));
        }
    }
    Ok(sorted)
}

/// The `|indices|×N` matrix with entries `(1/N)·e^{j2π·nᵢ·k/N}`.
pub fn partial_measurement_matrix(n: usize, indices: &[usize]) -> Result<MeasurementMatrix> {
    if n == 0 {
        return Err(invalid("length must be positive"));
    }
    let source_indices = validated_indices(n, indices)?;
    let tw = twiddles(n);
    let scale = 1.0 / n as f64;
    let matrix = CMatrix::from_fn(source_indices.len(), n, |r, k| {
        tw[(source_indices[r] * k) % n] * scale
    });
    Ok(MeasurementMatrix {
        n,
        source_indices,
        matrix,
    })
}

/// Back-projection `X₀ = Aᴴy`.
pub fn adjoint_apply(a: &MeasurementMatrix, y: &[Complex64]) -> Result<Vec<Complex64>> {
    a.matrix.adjoint_mul_vec(y)
}
