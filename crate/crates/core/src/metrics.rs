//! SNR measurement and closed-form predictions for the consensus search:
//! the probability that a random subset avoids every outlier, the expected
//! number of trials, and the output-SNR gain identities.
//!
//! SNR values are in dB. An estimate whose error energy is below `1e-300`
//! of the reference energy reports `f64::INFINITY`.

use crate::error::{invalid, Error, Result};
use crate::transform::{check_len, ComplexSignal};

const INFINITE_SNR_RATIO: f64 = 1e-300;

/// `10·log₁₀(Σ|x|² / Σ|x − x̂|²)`.
pub fn snr_db(reference: &ComplexSignal, estimate: &ComplexSignal) -> Result<f64> {
    check_len(reference.len(), estimate.len())?;
    let signal = reference.energy();
    if signal == 0.0 {
        return Err(invalid("reference signal is all zero"));
    }
    let error: f64 = reference
        .samples()
        .iter()
        .zip(estimate.samples())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    if error < INFINITE_SNR_RATIO * signal {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / error).log10())
}

fn check_mni(m: usize, n: usize, i: usize) -> Result<()> {
    if n == 0 || m == 0 || m > n {
        return Err(invalid(format!("need 1 <= M <= N, got M={m}, N={n}")));
    }
    if i > n {
        return Err(invalid(format!("outlier count {i} exceeds N={n}")));
    }
    Ok(())
}

/// Probability that `m` distinct samples drawn uniformly from `n` avoid all
/// `i` outliers: `∏_{r=0}^{m−1} (n−i−r)/(n−r)`. Zero when `m > n − i`.
pub fn clean_subset_probability(m: usize, n: usize, i: usize) -> Result<f64> {
    check_mni(m, n, i)?;
    if m > n - i {
        return Ok(0.0);
    }
    Ok((0..m)
        .map(|r| (n - i - r) as f64 / (n - r) as f64)
        .product())
}

/// Expected number of draws until the first outlier-free subset, `1/P`.
pub fn expected_trials(m: usize, n: usize, i: usize) -> Result<f64> {
    let p = clean_subset_probability(m, n, i)?;
    if p == 0.0 {
        return Err(Error::Infeasible(format!(
            "no outlier-free subset of {m} exists among {n} samples with {i} outliers"
        )));
    }
    Ok(1.0 / p)
}

/// Trial count from the textbook approximation
/// `ln(1−P)/ln(1−((N−I)/N)^M)` for success probability `confidence`.
///
/// The approximation treats the draws as independent, which is only close
/// to the exact product when `(N−I−M)/(N−M) ≈ (N−I)/N`; for small `N`
/// relative to `M` it overstates the clean-subset probability. Returns zero
/// when there are no outliers.
pub fn classic_ransac_trials(m: usize, n: usize, i: usize, confidence: f64) -> Result<f64> {
    check_mni(m, n, i)?;
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid("confidence must lie in (0, 1)"));
    }
    if i == 0 {
        return Ok(0.0);
    }
    if i >= n {
        return Err(Error::Infeasible("every sample is an outlier".into()));
    }
    let w = independent_clean_probability(m, n, i);
    Ok((1.0 - confidence).ln() / (1.0 - w).ln())
}

/// `((N−I)/N)^M`, the clean-subset probability under independent draws.
pub fn independent_clean_probability(m: usize, n: usize, i: usize) -> f64 {
    ((n - i) as f64 / n as f64).powi(m as i32)
}

/// `snr_in0 + 10·log₁₀(d/k)`.
pub fn predicted_snr_out(snr_in0: f64, d: f64, k: f64) -> Result<f64> {
    if !(k >= 1.0 && d >= k) {
        return Err(invalid(format!("need D >= K >= 1, got D={d}, K={k}")));
    }
    Ok(snr_in0 + 10.0 * (d / k).log10())
}

/// `10·log₁₀(d/m)`, the gain of the consensus stage over the subset stage.
pub fn snr_improvement_over_subset(d: f64, m: f64) -> Result<f64> {
    if !(d >= 1.0 && m >= 1.0) {
        return Err(invalid(format!("need D >= 1 and M >= 1, got D={d}, M={m}")));
    }
    Ok(10.0 * (d / m).log10())
}
