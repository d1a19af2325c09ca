//! Read-voltage quantization: the discrete memoryless channel induced by a set
//! of word-line voltages, its mutual information, and the searches that
//! maximize it.

use crate::channel::{ReadChannelModel, RetentionParams};
use crate::error::{Error, Result};
use crate::infotheory::entropy_unchecked;
use crate::optimize::{bisect, grid_then_golden};
use crate::quadrature::integrate;
use crate::scalar::{log_add_exp, Scalar};

/// Strictly increasing, finite word-line voltages `q_1 < ... < q_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet<T>(Vec<T>);

impl<T: Scalar> ThresholdSet<T> {
    pub fn new(thresholds: Vec<T>) -> Result<Self> {
        if thresholds.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidParameter("thresholds must be finite".into()));
        }
        if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("thresholds must be strictly increasing".into()));
        }
        Ok(Self(thresholds))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    /// Number of quantization regions, `K + 1`.
    pub fn num_regions(&self) -> usize {
        self.0.len() + 1
    }

    /// Bounds `(q_j, q_{j+1}]` of region `j`, with `q_0 = -inf`, `q_{K+1} = +inf`.
    pub fn region(&self, j: usize) -> (T, T) {
        region_of(&self.0, j)
    }

    /// Output symbol of a read voltage: the region containing `v`.
    #[inline]
    pub fn quantize(&self, v: T) -> usize {
        self.0.partition_point(|&q| q < v)
    }
}

#[inline]
fn region_of<T: Scalar>(q: &[T], j: usize) -> (T, T) {
    let lo = if j == 0 { T::neg_infinity() } else { q[j - 1] };
    let hi = if j == q.len() { T::infinity() } else { q[j] };
    (lo, hi)
}

/// Row-stochastic transition matrix of the discrete channel from written
/// level to read region, together with the input priors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc<T> {
    rows: Vec<Vec<T>>,
    priors: Vec<T>,
}

impl<T: Scalar> Dmc<T> {
    pub fn new(rows: Vec<Vec<T>>, priors: Vec<T>) -> Result<Self> {
        if rows.is_empty() || rows.len() != priors.len() {
            return Err(Error::InvalidParameter("dmc needs one prior per row".into()));
        }
        let width = rows[0].len();
        let tol = T::stochastic_tol();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::InvalidParameter("dmc rows differ in length".into()));
            }
            if r.iter().any(|&p| p < T::zero() || !p.is_finite()) {
                return Err(Error::InvalidParameter(format!("row {i} has a negative entry")));
            }
            let s: T = r.iter().copied().sum();
            if (s - T::one()).abs() > tol {
                return Err(Error::InvalidParameter(format!("row {i} sums to {s}")));
            }
        }
        let ps: T = priors.iter().copied().sum();
        if priors.iter().any(|&p| p < T::zero()) || (ps - T::one()).abs() > tol {
            return Err(Error::InvalidParameter("priors must form a distribution".into()));
        }
        Ok(Self { rows, priors })
    }

    pub fn num_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    /// `P(Y = y | X = x)`.
    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> T {
        self.rows[x][y]
    }

    /// Marginal output distribution `P(Y)`.
    pub fn output_distribution(&self) -> Vec<T> {
        (0..self.num_outputs())
            .map(|y| self.rows.iter().zip(&self.priors).map(|(r, &p)| p * r[y]).sum())
            .collect()
    }
}

fn dmc_rows<T: Scalar>(model: &ReadChannelModel<T>, q: &[T]) -> Vec<Vec<T>> {
    model
        .levels()
        .iter()
        .map(|lv| {
            (0..=q.len())
                .map(|j| {
                    let (lo, hi) = region_of(q, j);
                    lv.dist.prob_between(lo, hi)
                })
                .collect()
        })
        .collect()
}

/// Equivalent DMC of `model` read with thresholds `t`.
pub fn build_dmc<T: Scalar>(model: &ReadChannelModel<T>, t: &ThresholdSet<T>) -> Dmc<T> {
    Dmc {
        rows: dmc_rows(model, t.as_slice()),
        priors: model.levels().iter().map(|l| l.prior).collect(),
    }
}

fn mi_of_rows<T: Scalar>(rows: &[Vec<T>], priors: &[T]) -> T {
    let width = rows[0].len();
    let mut out = vec![T::zero(); width];
    let mut cond = T::zero();
    for (r, &p) in rows.iter().zip(priors) {
        for (o, &x) in out.iter_mut().zip(r) {
            *o += p * x;
        }
        cond += p * entropy_unchecked(r);
    }
    entropy_unchecked(&out) - cond
}

/// `I(X;Y) = H(Y) - H(Y|X)` in bits.
pub fn mutual_information<T: Scalar>(dmc: &Dmc<T>) -> T {
    mi_of_rows(&dmc.rows, &dmc.priors)
}

/// MI of the channel read with the (sorted, possibly touching) voltages `q`.
fn quantized_mi<T: Scalar>(model: &ReadChannelModel<T>, q: &[T]) -> T {
    let priors: Vec<T> = model.levels().iter().map(|l| l.prior).collect();
    mi_of_rows(&dmc_rows(model, q), &priors)
}

/// MI of `model` quantized by `t`.
pub fn threshold_mi<T: Scalar>(model: &ReadChannelModel<T>, t: &ThresholdSet<T>) -> T {
    quantized_mi(model, t.as_slice())
}

/// Continuous-output `I(X;V)` in bits, i.e. the MI available when the read
/// voltage is observed exactly.
pub fn full_soft_mi<T: Scalar>(model: &ReadChannelModel<T>) -> Result<T> {
    let ln_priors: Vec<T> = model.levels().iter().map(|l| l.prior.ln()).collect();
    let integrand = |v: T| {
        let ln_f: Vec<T> = model.levels().iter().map(|l| l.dist.ln_pdf(v)).collect();
        let ln_mix = ln_f
            .iter()
            .zip(&ln_priors)
            .fold(T::neg_infinity(), |acc, (&lf, &lp)| log_add_exp(acc, lf + lp));
        ln_f
            .iter()
            .zip(&ln_priors)
            .map(|(&lf, &lp)| {
                let w = (lf + lp).exp();
                if w > T::zero() {
                    w * (lf - ln_mix)
                } else {
                    T::zero()
                }
            })
            .sum::<T>()
            / T::LN_2()
    };
    let (lo, hi) = model.span(T::lit(12.0));
    let mut breaks: Vec<T> = model.levels().iter().map(|l| l.dist.mean()).collect();
    for l in 0..model.num_levels() - 1 {
        breaks.push(model.pdf_crossing(l)?);
    }
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
    let mi = integrate(integrand, lo, hi, &breaks, tol)?;
    let cap = T::from_usize(model.bits_per_cell()).unwrap();
    Ok(mi.max(T::zero()).min(cap))
}

/// Settings of the unconstrained threshold search.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Grid points scanned per coordinate before golden-section refinement.
    pub grid_points: usize,
    /// Golden-section bracket width at termination, in volts.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Search range is the outer means widened by this many σmax.
    pub span_sigmas: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid_points: 64, tol: 1e-6, max_sweeps: 200, span_sigmas: 4.0 }
    }
}

/// Reads allotted to each of `boundaries` hard-decision boundaries,
/// mirrored about the central boundary.
fn allocate_reads(reads: usize, boundaries: usize) -> Vec<usize> {
    let mut alloc = vec![reads / boundaries; boundaries];
    let mut extra = reads % boundaries;
    let c = boundaries / 2;
    if extra % 2 == 1 {
        alloc[c] += 1;
        extra -= 1;
    }
    let mut k = 1;
    while extra > 0 {
        alloc[c - k] += 1;
        alloc[c + k] += 1;
        extra -= 2;
        k += 1;
    }
    alloc
}

/// Starting point: reads clustered around each pdf crossing, spread over
/// about one local sigma.
fn initial_thresholds<T: Scalar>(model: &ReadChannelModel<T>, reads: usize) -> Result<Vec<T>> {
    let boundaries = model.num_levels() - 1;
    let alloc = allocate_reads(reads, boundaries);
    let mut q = Vec::with_capacity(reads);
    for (l, &r) in alloc.iter().enumerate() {
        if r == 0 {
            continue;
        }
        let b = model.pdf_crossing(l)?;
        let width = (model.level(l).dist.sigma() + model.level(l + 1).dist.sigma()) * T::lit(0.5);
        if r == 1 {
            q.push(b);
        } else {
            let denom = T::from_usize(r - 1).unwrap();
            for j in 0..r {
                q.push(b + width * (T::from_usize(j).unwrap() / denom - T::lit(0.5)));
            }
        }
    }
    q.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(q)
}

/// Coordinate-wise maximization of `objective` over sorted variables `x`
/// confined to `(lower, upper)`.
fn coordinate_ascent<T, F>(x: &mut [T], lower: T, upper: T, opts: &SearchOptions, mut objective: F) -> T
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let tol = T::lit(opts.tol);
    let mut best = objective(x);
    for _ in 0..opts.max_sweeps {
        let before = best;
        for i in 0..x.len() {
            let left = if i == 0 { lower } else { x[i - 1] };
            let right = if i + 1 == x.len() { upper } else { x[i + 1] };
            if right - left <= tol {
                continue;
            }
            let mut trial = x.to_vec();
            let (v, fv) = grid_then_golden(
                |v| {
                    trial[i] = v;
                    objective(&trial)
                },
                left,
                right,
                opts.grid_points,
                tol,
            );
            if fv > best {
                best = fv;
                x[i] = v;
            }
        }
        if best - before <= T::lit(1e-13).max(T::epsilon() * T::lit(4.0)) {
            break;
        }
    }
    best
}

/// Maximum-MI word-line voltages for `num_reads` reads.
///
/// With `symmetric`, the model must mirror about its centre; only the upper
/// half of the voltages is searched and the lower half is its reflection
/// (an odd read count pins one voltage at the centre).
pub fn optimize_thresholds<T: Scalar>(
    model: &ReadChannelModel<T>,
    num_reads: usize,
    symmetric: bool,
) -> Result<(ThresholdSet<T>, T)> {
    optimize_thresholds_with(model, num_reads, symmetric, &SearchOptions::default())
}

pub fn optimize_thresholds_with<T: Scalar>(
    model: &ReadChannelModel<T>,
    num_reads: usize,
    symmetric: bool,
    opts: &SearchOptions,
) -> Result<(ThresholdSet<T>, T)> {
    if num_reads == 0 {
        return Err(Error::InvalidParameter("need at least one read".into()));
    }
    if symmetric && !model.is_symmetric() {
        return Err(Error::InvalidParameter("symmetric search requested for an asymmetric model".into()));
    }
    let (lo, hi) = model.span(T::lit(opts.span_sigmas));
    let init = initial_thresholds(model, num_reads)?;
    let thresholds = if symmetric {
        let c = model.center();
        let half = num_reads / 2;
        let mut upper: Vec<T> = init[num_reads - half..].to_vec();
        let expand = |u: &[T]| -> Vec<T> {
            let mut q: Vec<T> = u.iter().rev().map(|&x| c + c - x).collect();
            if num_reads % 2 == 1 {
                q.push(c);
            }
            q.extend_from_slice(u);
            q
        };
        if !upper.is_empty() {
            coordinate_ascent(&mut upper, c, hi, opts, |u| quantized_mi(model, &expand(u)));
        }
        expand(&upper)
    } else {
        let mut q = init;
        coordinate_ascent(&mut q, lo, hi, opts, |q| quantized_mi(model, q));
        q
    };
    let t = ThresholdSet::new(thresholds).map_err(|_| Error::Bracket("search collapsed two thresholds".into()))?;
    let mi = threshold_mi(model, &t);
    Ok((t, mi))
}

/// How many voltages the constant-ratio rule places per boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrLayout {
    /// The two ratio points on either side of each crossing.
    #[default]
    Pairs,
    /// The two ratio points plus the crossing itself.
    Triples,
}

/// Constant-ratio voltages: around each adjacent-level crossing, the points
/// where the larger conditional pdf is exactly `ratio` times the smaller.
pub fn cr_thresholds<T: Scalar>(model: &ReadChannelModel<T>, ratio: T) -> Result<ThresholdSet<T>> {
    cr_thresholds_with(model, ratio, CrLayout::Pairs)
}

pub fn cr_thresholds_with<T: Scalar>(model: &ReadChannelModel<T>, ratio: T, layout: CrLayout) -> Result<ThresholdSet<T>> {
    if !(ratio > T::one()) || !ratio.is_finite() {
        return Err(Error::InvalidParameter(format!("constant ratio must be > 1, got {ratio}")));
    }
    let ln_r = ratio.ln();
    let mut q = Vec::new();
    for l in 0..model.num_levels() - 1 {
        let a = model.level(l).dist.mean();
        let b = model.level(l + 1).dist.mean();
        // The log-ratio must increase across the whole bracket for the
        // ratio points to be unique.
        let samples = 64;
        let mut prev = model.log_ratio(l, a);
        for s in 1..=samples {
            let v = a + (b - a) * T::from_usize(s).unwrap() / T::from_usize(samples).unwrap();
            let g = model.log_ratio(l, v);
            if !(g > prev) {
                return Err(Error::NonMonotoneRatio { boundary: l });
            }
            prev = g;
        }
        if model.log_ratio(l, a) > -ln_r || model.log_ratio(l, b) < ln_r {
            return Err(Error::Bracket(format!(
                "ratio {ratio} is not reached between the means of levels {l} and {}",
                l + 1
            )));
        }
        let c = model.pdf_crossing(l)?;
        let tol = (b - a) * T::epsilon() * T::lit(4.0);
        let left = bisect(|v| model.log_ratio(l, v) + ln_r, a, c, tol)?;
        let right = bisect(|v| model.log_ratio(l, v) - ln_r, c, b, tol)?;
        q.push(left);
        if layout == CrLayout::Triples {
            q.push(c);
        }
        q.push(right);
    }
    ThresholdSet::new(q)
}

/// Grid point maximizing the constant-ratio MI; ties go to the smaller ratio.
pub fn optimize_ratio<T: Scalar>(model: &ReadChannelModel<T>, r_grid: &[T]) -> Result<(T, T)> {
    if r_grid.is_empty() {
        return Err(Error::InvalidParameter("empty ratio grid".into()));
    }
    let mut best: Option<(T, T)> = None;
    for &r in r_grid {
        let mi = threshold_mi(model, &cr_thresholds(model, r)?);
        best = match best {
            Some((br, bm)) if bm > mi || (bm == mi && br <= r) => Some((br, bm)),
            _ => Some((r, mi)),
        };
    }
    Ok(best.unwrap())
}

/// Rescales the base sigmas of `params` so that the model at `months` has an
/// unconstrained `reads`-read MMI of `target_bits`.
pub fn calibrate_retention(params: &RetentionParams, months: f64, reads: usize, target_bits: f64) -> Result<RetentionParams> {
    let mmi_at = |k: f64| -> f64 {
        ReadChannelModel::<f64>::retention(months, &params.with_sigma_scale(k))
            .and_then(|m| optimize_thresholds(&m, reads, false))
            .map(|(_, mi)| mi)
            .unwrap_or(f64::NAN)
    };
    // MMI falls as the distributions widen.
    let k = bisect(|k| mmi_at(k) - target_bits, 0.25, 4.0, 1e-7)?;
    Ok(params.with_sigma_scale(k))
}
