//! Entropy and the derived operating-point curves: MMI versus read count,
//! the SNR at which a rate becomes achievable, and the largest raw bit-error
//! probability a rate tolerates.

use std::fmt;

use crate::channel::{raw_bit_error_probability, ReadChannelModel};
use crate::error::{Error, Result};
use crate::optimize::bisect;
use crate::quantizer::{full_soft_mi, optimize_thresholds};
use crate::scalar::Scalar;

/// SNR search range for the limit computations, in dB.
pub const SNR_RANGE_DB: (f64, f64) = (-5.0, 30.0);
/// Termination width of the SNR bisection, in dB.
pub const SNR_TOL_DB: f64 = 1e-4;

/// `-Σ p log2 p` with `0 log 0 = 0`.
pub fn entropy<T: Scalar>(p: &[T]) -> Result<T> {
    if let Some(&neg) = p.iter().find(|&&x| x < T::zero() || x.is_nan()) {
        return Err(Error::NegativeProbability(neg.as_f64()));
    }
    let total: T = p.iter().copied().sum();
    if total > T::one() + T::stochastic_tol() {
        return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
    }
    Ok(entropy_unchecked(p))
}

#[inline]
pub(crate) fn entropy_unchecked<T: Scalar>(p: &[T]) -> T {
    let nats: T = p.iter().filter(|&&x| x > T::zero()).map(|&x| -x * x.ln()).sum();
    nats / T::LN_2()
}

/// Binary entropy `H2(p)` in bits.
pub fn binary_entropy<T: Scalar>(p: T) -> T {
    entropy_unchecked(&[p, T::one() - p])
}

/// How much read precision the decoder gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// This many word-line voltages placed by MMI optimization.
    Reads(usize),
    /// The exact threshold voltage.
    FullSoft,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Reads(n) => write!(f, "{n}"),
            Precision::FullSoft => write!(f, "soft"),
        }
    }
}

/// MMI of the Gaussian `num_levels`-PAM read channel at `snr_db`, with the
/// voltages re-optimized for that SNR.
pub fn gaussian_mmi<T: Scalar>(num_levels: usize, precision: Precision, snr_db: T) -> Result<T> {
    let model = ReadChannelModel::<T>::gaussian(num_levels, snr_db)?;
    match precision {
        Precision::Reads(n) => optimize_thresholds(&model, n, true).map(|(_, mi)| mi),
        Precision::FullSoft => full_soft_mi(&model),
    }
}

fn check_limit_args(num_levels: usize, precision: Precision, rate: f64) -> Result<()> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParameter(format!("rate must lie in (0, 1), got {rate}")));
    }
    if let Precision::Reads(n) = precision {
        if n + 1 < num_levels {
            return Err(Error::InvalidParameter(format!(
                "{n} reads cannot separate {num_levels} levels"
            )));
        }
    }
    Ok(())
}

/// SNR (dB) at which the per-bit MMI `MMI / log2(m)` reaches `rate`.
pub fn shannon_limit_snr<T: Scalar>(num_levels: usize, precision: Precision, rate: T) -> Result<T> {
    check_limit_args(num_levels, precision, rate.as_f64())?;
    let bits = T::from_usize(ReadChannelModel::<T>::gaussian(num_levels, T::zero())?.bits_per_cell()).unwrap();
    let (lo, hi) = (T::lit(SNR_RANGE_DB.0), T::lit(SNR_RANGE_DB.1));
    let gap = |snr: T| gaussian_mmi(num_levels, precision, snr).map(|mi| mi / bits - rate);
    if gap(hi)? < T::zero() {
        return Err(Error::Unachievable { rate: rate.as_f64() });
    }
    if gap(lo)? >= T::zero() {
        return Err(Error::Bracket(format!(
            "rate {rate} is already achievable at {} dB",
            SNR_RANGE_DB.0
        )));
    }
    bisect(|s| gap(s).unwrap_or(T::nan()), lo, hi, T::lit(SNR_TOL_DB))
}

/// Hard-decision raw bit-error probability at [`shannon_limit_snr`].
pub fn max_tolerable_raw_ber<T: Scalar>(num_levels: usize, precision: Precision, rate: T) -> Result<T> {
    let snr = shannon_limit_snr(num_levels, precision, rate)?;
    let model = ReadChannelModel::<T>::gaussian(num_levels, snr)?;
    raw_bit_error_probability(&model, &model.hard_thresholds()?)
}
