use serde::Serialize;

use crate::error::{Error, Result};
use crate::psi::PsiFunction;
use crate::scalar::Real;

/// Second-order constant in the local half-width.
pub const CATONI_C2: f64 = 4.0;
/// `n >= (CATONI_SAMPLE_FACTOR / xi) ln(1/delta)` for [`catoni`].
const CATONI_SAMPLE_FACTOR: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate1D<T> {
    pub value: T,
    pub half_width: T,
    pub delta: T,
    pub n_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CatoniParams<T> {
    pub sigma: T,
    pub delta: T,
    pub t: T,
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if delta > T::zero() && delta < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")))
    }
}

impl<T: Real> CatoniParams<T> {
    /// `T = sigma sqrt(n / (2 ln(2/delta)))`.
    pub fn new(sigma: T, delta: T, n: usize) -> Result<Self> {
        check_delta(delta)?;
        if !(sigma > T::zero()) || n == 0 {
            return Err(Error::InvalidParameter("need sigma > 0 and n >= 1".into()));
        }
        let t = sigma * (T::from_usize_lossy(n) / (T::lit(2.0) * (T::lit(2.0) / delta).ln())).sqrt();
        Ok(Self { sigma, delta, t })
    }

    /// Explicit scale, bypassing the default formula.
    pub fn with_scale(sigma: T, delta: T, t: T) -> Result<Self> {
        check_delta(delta)?;
        if !(sigma > T::zero() && t > T::zero()) {
            return Err(Error::InvalidParameter("need sigma, T > 0".into()));
        }
        Ok(Self { sigma, delta, t })
    }
}

/// `max(1, min(n/2, ceil(8 ln(1/delta))))`.
pub fn mom_batch_count<T: Real>(n: usize, delta: T) -> usize {
    let want = (T::lit(8.0) * delta.recip().ln()).ceil().to_f64_lossy();
    let want = if want.is_finite() && want > 0.0 { want as usize } else { 1 };
    want.min(n / 2).max(1)
}

/// Lower median of the means of contiguous, near-equal batches.
pub fn median_of_means<T: Real>(samples: &[T], delta: T) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_delta(delta)?;
    let n = samples.len();
    let k = mom_batch_count(n, delta);
    let mut means: Vec<T> = (0..k)
        .map(|b| {
            let batch = &samples[b * n / k..(b + 1) * n / k];
            batch.iter().copied().sum::<T>() / T::from_usize_lossy(batch.len())
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite batch means"));
    Ok(means[(k - 1) / 2])
}

/// One Newton-type step from `mu0`: `mu0 + (T/n) sum psi((x_i - mu0)/T)`.
pub fn catoni_local<T: Real>(samples: &[T], mu0: T, psi: &PsiFunction<T>, params: &CatoniParams<T>) -> Estimate1D<T> {
    let n = samples.len();
    let t = params.t;
    let nf = T::from_usize_lossy(n.max(1));
    let total: T = samples.iter().map(|&x| psi.eval((x - mu0) / t)).sum();
    let log_inv = params.delta.recip().ln();
    let rate = params.sigma * (T::lit(2.0) * (T::lit(2.0) / params.delta).ln() / nf).sqrt();
    let half_width = if n == 0 { T::infinity() } else { (T::one() + T::lit(CATONI_C2) * log_inv / nf) * rate };
    Estimate1D { value: mu0 + t / nf * total, half_width, delta: params.delta, n_used: n }
}

/// `ceil((20/xi) ln(1/delta))`.
pub fn min_catoni_samples<T: Real>(delta: T, xi: T) -> usize {
    (T::lit(CATONI_SAMPLE_FACTOR) / xi * delta.recip().ln()).ceil().to_f64_lossy().max(1.0) as usize
}

/// Median-of-means on the first `ceil(xi n)` samples, then one local step
/// on the rest.
pub fn catoni<T: Real>(samples: &[T], delta: T, sigma: T, psi: &PsiFunction<T>, xi: T) -> Result<Estimate1D<T>> {
    if !(xi > T::zero() && xi < T::one()) {
        return Err(Error::InvalidXi(xi.to_f64_lossy()));
    }
    check_delta(delta)?;
    let n = samples.len();
    let needed = min_catoni_samples(delta, xi);
    let m = (xi * T::from_usize_lossy(n)).ceil().to_f64_lossy() as usize;
    if n < needed || m >= n {
        return Err(Error::TooFewSamples { needed: needed.max(m + 1), got: n });
    }
    let half = delta / T::lit(2.0);
    let mu0 = median_of_means(&samples[..m], half)?;
    let rest = &samples[m..];
    let params = CatoniParams::new(sigma, half, rest.len())?;
    let local = catoni_local(rest, mu0, psi, &params);
    let half_width =
        (T::one() + xi) * sigma * (T::lit(2.0) * (T::lit(4.0) / delta).ln() / T::from_usize_lossy(n)).sqrt();
    Ok(Estimate1D { value: local.value, half_width, delta, n_used: n })
}
