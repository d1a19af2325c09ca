//! Continuous read-channel models: the conditional distribution of a cell's
//! threshold voltage given the level that was written.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::bisect;
use crate::quantizer::ThresholdSet;
use crate::scalar::{clamp_prob, q_function, Scalar};

/// Conditional threshold-voltage distribution of one written level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelDistribution<T> {
    Gaussian { mean: T, sigma: T },
}

impl<T: Scalar> LevelDistribution<T> {
    pub fn gaussian(mean: T, sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian level needs finite mean and sigma > 0 (mean {mean}, sigma {sigma})"
            )));
        }
        Ok(Self::Gaussian { mean, sigma })
    }

    pub fn mean(&self) -> T {
        match *self {
            Self::Gaussian { mean, .. } => mean,
        }
    }

    pub fn sigma(&self) -> T {
        match *self {
            Self::Gaussian { sigma, .. } => sigma,
        }
    }

    pub fn pdf(&self, v: T) -> T {
        self.ln_pdf(v).exp()
    }

    pub fn ln_pdf(&self, v: T) -> T {
        match *self {
            Self::Gaussian { mean, sigma } => {
                let z = (v - mean) / sigma;
                -T::lit(0.5) * z * z - sigma.ln() - T::lit(0.918_938_533_204_672_8)
            }
        }
    }

    /// `P(V <= v)`.
    pub fn cdf(&self, v: T) -> T {
        match *self {
            Self::Gaussian { mean, sigma } => clamp_prob(q_function((mean - v) / sigma)),
        }
    }

    /// `P(V > v)`.
    pub fn sf(&self, v: T) -> T {
        match *self {
            Self::Gaussian { mean, sigma } => clamp_prob(q_function((v - mean) / sigma)),
        }
    }

    /// `P(lo < V <= hi)`, evaluated on whichever tail keeps the most precision.
    pub fn prob_between(&self, lo: T, hi: T) -> T {
        if hi <= lo {
            return T::zero();
        }
        let m = self.mean();
        let p = if lo >= m {
            self.sf(lo) - self.sf(hi)
        } else if hi <= m {
            self.cdf(hi) - self.cdf(lo)
        } else {
            T::one() - self.cdf(lo) - self.sf(hi)
        };
        clamp_prob(p)
    }

    /// Voltage for a standard-normal draw `z`.
    #[inline]
    pub fn sample_from_standard(&self, z: T) -> T {
        match *self {
            Self::Gaussian { mean, sigma } => mean + sigma * z,
        }
    }
}

/// One written level: its prior, conditional distribution and Gray label.
#[derive(Debug, Clone, PartialEq)]
pub struct Level<T> {
    pub prior: T,
    pub dist: LevelDistribution<T>,
    pub label: u32,
}

/// A set of per-level conditional threshold-voltage distributions with priors.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadChannelModel<T> {
    levels: Vec<Level<T>>,
    bits_per_cell: usize,
}

/// Binary-reflected Gray labels for `m` levels, ordered by increasing voltage.
pub fn gray_labels(m: usize) -> Vec<u32> {
    (0..m as u32).map(|i| i ^ (i >> 1)).collect()
}

pub(crate) fn bits_for_levels(m: usize) -> Result<usize> {
    match m {
        2 => Ok(1),
        4 => Ok(2),
        8 => Ok(3),
        _ => Err(Error::UnsupportedLevels(m)),
    }
}

/// Converts a decibel SNR to linear scale.
pub fn db_to_linear<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

impl<T: Scalar> ReadChannelModel<T> {
    /// Builds a model from `(prior, distribution)` pairs listed in order of
    /// increasing mean and one label per level.
    pub fn new(levels: Vec<(T, LevelDistribution<T>)>, labels: Vec<u32>) -> Result<Self> {
        let bits_per_cell = bits_for_levels(levels.len())?;
        if labels.len() != levels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} levels",
                labels.len(),
                levels.len()
            )));
        }
        let mut seen = 0u64;
        for &l in &labels {
            if l >= (1 << bits_per_cell) || seen & (1 << l) != 0 {
                return Err(Error::InvalidParameter(format!("bad or repeated label {l}")));
            }
            seen |= 1 << l;
        }
        let total: T = levels.iter().map(|(p, _)| *p).sum();
        if levels.iter().any(|(p, _)| *p < T::zero()) || (total - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(16.0)) {
            return Err(Error::InvalidParameter(format!("priors must be nonnegative and sum to 1 (sum {total})")));
        }
        for w in levels.windows(2) {
            if !(w[1].1.mean() > w[0].1.mean()) {
                return Err(Error::InvalidParameter("level means must be strictly increasing".into()));
            }
        }
        let levels = levels
            .into_iter()
            .zip(labels)
            .map(|((prior, dist), label)| Level { prior, dist, label })
            .collect();
        Ok(Self { levels, bits_per_cell })
    }

    /// Equiprobable `m`-PAM levels scaled to unit average energy with
    /// Gaussian noise of variance `N0/2 = Es / snr`, where `snr = Es/(N0/2)`.
    pub fn gaussian(num_levels: usize, snr_db: T) -> Result<Self> {
        bits_for_levels(num_levels)?;
        if snr_db.is_nan() {
            return Err(Error::InvalidParameter("snr is NaN".into()));
        }
        let m = T::from_usize(num_levels).unwrap();
        // Mean square of the points ±1, ±3, ... ±(m-1) is (m² - 1)/3.
        let scale = ((m * m - T::one()) / T::lit(3.0)).sqrt().recip();
        let sigma = db_to_linear(snr_db).recip().sqrt();
        let prior = m.recip();
        let levels = (0..num_levels)
            .map(|i| {
                let point = T::from_usize(2 * i).unwrap() - (m - T::one());
                LevelDistribution::gaussian(point * scale, sigma).map(|d| (prior, d))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels, gray_labels(num_levels))
    }

    /// Asymmetric retention model after `months` of storage.
    pub fn retention(months: T, params: &RetentionParams) -> Result<Self> {
        params.validate()?;
        if !(months >= T::zero()) {
            return Err(Error::InvalidParameter(format!("months must be >= 0, got {months}")));
        }
        let m = params.base_means.len();
        let prior = T::from_usize(m).unwrap().recip();
        let log_t = months.ln_1p();
        let levels = (0..m)
            .map(|l| {
                let mean = T::lit(params.base_means[l]) - T::lit(params.drift[l]) * log_t;
                let sigma = T::lit(params.base_sigmas[l]) * (T::one() + T::lit(params.widening[l]) * months);
                if !(sigma > T::zero()) {
                    return Err(Error::InvalidParameter(format!(
                        "level {l} sigma {sigma} is not positive after {months} months"
                    )));
                }
                LevelDistribution::gaussian(mean, sigma).map(|d| (prior, d))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels, gray_labels(m))
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn bits_per_cell(&self) -> usize {
        self.bits_per_cell
    }

    pub fn levels(&self) -> &[Level<T>] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &Level<T> {
        &self.levels[l]
    }

    /// Bit `j` (0 = most significant) of the label of level `l`.
    #[inline]
    pub fn label_bit(&self, l: usize, j: usize) -> u8 {
        ((self.levels[l].label >> (self.bits_per_cell - 1 - j)) & 1) as u8
    }

    /// Level whose label equals `label`.
    pub fn level_for_label(&self, label: u32) -> Option<usize> {
        self.levels.iter().position(|lv| lv.label == label)
    }

    /// `P(threshold voltage <= v | level)`.
    pub fn level_cdf(&self, level: usize, v: T) -> T {
        self.levels[level].dist.cdf(v)
    }

    pub fn level_pdf(&self, level: usize, v: T) -> T {
        self.levels[level].dist.pdf(v)
    }

    pub fn max_sigma(&self) -> T {
        self.levels.iter().map(|l| l.dist.sigma()).fold(T::zero(), T::max)
    }

    /// `[min mean - k·σmax, max mean + k·σmax]`.
    pub fn span(&self, k: T) -> (T, T) {
        let s = self.max_sigma() * k;
        (self.levels[0].dist.mean() - s, self.levels[self.num_levels() - 1].dist.mean() + s)
    }

    /// Midpoint of the outermost means.
    pub fn center(&self) -> T {
        (self.levels[0].dist.mean() + self.levels[self.num_levels() - 1].dist.mean()) * T::lit(0.5)
    }

    /// True when priors, means and sigmas mirror about [`Self::center`].
    pub fn is_symmetric(&self) -> bool {
        let c = self.center();
        let m = self.num_levels();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        (0..m).all(|i| {
            let (a, b) = (&self.levels[i], &self.levels[m - 1 - i]);
            ((a.dist.mean() - c) + (b.dist.mean() - c)).abs() <= tol
                && (a.dist.sigma() - b.dist.sigma()).abs() <= tol * a.dist.sigma()
                && (a.prior - b.prior).abs() <= tol
        })
    }

    /// `ln f_{l+1}(v) - ln f_l(v)` for the adjacent pair `(l, l+1)`.
    pub fn log_ratio(&self, l: usize, v: T) -> T {
        self.levels[l + 1].dist.ln_pdf(v) - self.levels[l].dist.ln_pdf(v)
    }

    /// Voltage between the means of levels `l` and `l+1` where their pdfs cross.
    pub fn pdf_crossing(&self, l: usize) -> Result<T> {
        let a = self.levels[l].dist.mean();
        let b = self.levels[l + 1].dist.mean();
        let tol = (b - a) * T::epsilon() * T::lit(4.0);
        bisect(|v| self.log_ratio(l, v), a, b, tol)
    }

    /// Hard-decision read voltages: the `m - 1` adjacent pdf crossings.
    pub fn hard_thresholds(&self) -> Result<ThresholdSet<T>> {
        let q = (0..self.num_levels() - 1)
            .map(|l| self.pdf_crossing(l))
            .collect::<Result<Vec<_>>>()?;
        ThresholdSet::new(q)
    }

    /// Displays the model as a `(level, label, prior, mean, sigma)` table.
    pub fn table(&self) -> ModelTable<'_, T> {
        ModelTable(self)
    }
}

/// Table view of a [`ReadChannelModel`].
pub struct ModelTable<'a, T>(&'a ReadChannelModel<T>);

impl<T: Scalar> fmt::Display for ModelTable<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0;
        writeln!(f, "level,label,prior,mean,sigma")?;
        for (i, lv) in m.levels.iter().enumerate() {
            writeln!(
                f,
                "{i},{:0width$b},{},{},{}",
                lv.label,
                lv.prior.as_f64(),
                lv.dist.mean().as_f64(),
                lv.dist.sigma().as_f64(),
                width = m.bits_per_cell
            )?;
        }
        Ok(())
    }
}

/// Average hard-decision bit-error probability over levels and label bits
/// when region `j` of `hard` is decided as level `j`.
pub fn raw_bit_error_probability<T: Scalar>(model: &ReadChannelModel<T>, hard: &ThresholdSet<T>) -> Result<T> {
    let m = model.num_levels();
    if hard.len() != m - 1 {
        return Err(Error::ThresholdCountMismatch { expected: m - 1, got: hard.len() });
    }
    let bits = T::from_usize(model.bits_per_cell()).unwrap();
    let mut total = T::zero();
    for (l, lv) in model.levels().iter().enumerate() {
        for j in 0..m {
            if j == l {
                continue;
            }
            let (lo, hi) = hard.region(j);
            let flips = (lv.label ^ model.level(j).label).count_ones();
            total += lv.prior * lv.dist.prob_between(lo, hi) * T::from_u32(flips).unwrap();
        }
    }
    Ok(clamp_prob(total / bits))
}

/// Parameters of the asymmetric retention stand-in. Per level `l`:
///
/// ```text
/// mean_l(t)  = base_means[l] - drift[l] * ln(1 + t)
/// sigma_l(t) = base_sigmas[l] * (1 + widening[l] * t)
/// ```
///
/// with `t` in months. The defaults describe a 4-level cell whose erased
/// level is much wider than the programmed ones, calibrated so that the
/// 6-month channel has an unconstrained 6-read MMI of 1.885 bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetentionParams {
    pub base_means: Vec<f64>,
    pub base_sigmas: Vec<f64>,
    pub drift: Vec<f64>,
    pub widening: Vec<f64>,
}

impl Default for RetentionParams {
    fn default() -> Self {
        Self {
            base_means: vec![-1.35, -0.45, 0.45, 1.35],
            base_sigmas: vec![0.2663, 0.1479, 0.1479, 0.1479],
            drift: vec![0.0, 0.028, 0.049, 0.07],
            widening: vec![0.01, 0.03, 0.03, 0.03],
        }
    }
}

impl RetentionParams {
    pub fn validate(&self) -> Result<()> {
        let m = self.base_means.len();
        bits_for_levels(m)?;
        if self.base_sigmas.len() != m || self.drift.len() != m || self.widening.len() != m {
            return Err(Error::Config("retention parameter lists must all have one entry per level".into()));
        }
        let all = self.base_means.iter().chain(&self.base_sigmas).chain(&self.drift).chain(&self.widening);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::Config("retention parameters must be finite".into()));
        }
        Ok(())
    }

    /// Same parameters with every base sigma multiplied by `k`.
    pub fn with_sigma_scale(&self, k: f64) -> Self {
        Self {
            base_sigmas: self.base_sigmas.iter().map(|s| s * k).collect(),
            ..self.clone()
        }
    }

    /// Same parameters with no drift or widening.
    pub fn frozen(&self) -> Self {
        Self {
            drift: vec![0.0; self.drift.len()],
            widening: vec![0.0; self.widening.len()],
            ..self.clone()
        }
    }

    /// Parses the TOML form:
    ///
    /// ```toml
    /// base_means  = [-1.35, -0.45, 0.45, 1.35]
    /// base_sigmas = [0.2663, 0.1479, 0.1479, 0.1479]
    /// drift       = [0.0, 0.028, 0.049, 0.07]   # volts per ln(1 + months)
    /// widening    = [0.01, 0.03, 0.03, 0.03]    # fractional sigma growth per month
    /// ```
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.into(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("retention params serialize")
    }
}
