//! Monte Carlo frame-error-rate sweeps.
//!
//! Every frame draws its message and noise from its own generator, seeded
//! from the base seed and the frame index alone. Frames are processed in
//! fixed-size batches and the stopping rule is evaluated only at batch
//! boundaries, so the counts are identical for any number of workers. The
//! same frame index sees the same standard-normal draws at every sweep point.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{raw_bit_error_probability, ReadChannelModel, RetentionParams};
use crate::codegen::{construct_with, ConstructOptions, DegreeDistribution};
use crate::error::{Error, Result};
use crate::infotheory::SNR_RANGE_DB;
use crate::ldpc::{BpDecoder, LlrTable, ParityCheckMatrix, SerialBpDecoder, SystematicEncoder, DEFAULT_MAX_ITERS};
use crate::ldpc::soft_cell_llrs;
use crate::optimize::bisect;
use crate::quantizer::{build_dmc, cr_thresholds, full_soft_mi, optimize_thresholds, threshold_mi, ThresholdSet};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Read channel family; the swept axis supplies the free parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Gaussian {
        levels: usize,
        /// Operating SNR when the sweep axis is `ratio`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snr_db: Option<f64>,
    },
    Retention {
        #[serde(default)]
        params: RetentionParams,
        /// Operating point when the sweep axis is `ratio`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        months: Option<f64>,
    },
}

impl ChannelSpec {
    pub fn num_levels(&self) -> usize {
        match self {
            Self::Gaussian { levels, .. } => *levels,
            Self::Retention { params, .. } => params.base_means.len(),
        }
    }

    /// Channel model at a point of `axis`.
    pub fn model_at(&self, axis: Axis, value: f64) -> Result<ReadChannelModel<f64>> {
        match (self, axis) {
            (Self::Gaussian { levels, .. }, Axis::SnrDb) => ReadChannelModel::gaussian(*levels, value),
            (Self::Gaussian { levels, .. }, Axis::RawBer) => ReadChannelModel::gaussian(*levels, snr_for_raw_ber(*levels, value)?),
            (Self::Gaussian { levels, snr_db: Some(s) }, Axis::Ratio) => ReadChannelModel::gaussian(*levels, *s),
            (Self::Retention { params, .. }, Axis::Months) => ReadChannelModel::retention(value, params),
            (Self::Retention { params, months: Some(t) }, Axis::Ratio) => ReadChannelModel::retention(*t, params),
            (_, Axis::Ratio) => Err(Error::Config("a ratio sweep needs a fixed channel point (snr_db or months)".into())),
            (spec, axis) => Err(Error::Config(format!("axis {axis:?} does not apply to channel {spec:?}"))),
        }
    }
}

/// SNR (dB) at which hard reads of the Gaussian model have raw bit-error
/// probability `p`.
pub fn snr_for_raw_ber(levels: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::InvalidParameter(format!("raw BER must lie in (0, 0.5), got {p}")));
    }
    let gap = |snr: f64| -> f64 {
        ReadChannelModel::gaussian(levels, snr)
            .and_then(|m| raw_bit_error_probability(&m, &m.hard_thresholds()?))
            .map(|b| b.ln() - p.ln())
            .unwrap_or(f64::NAN)
    };
    bisect(gap, SNR_RANGE_DB.0, SNR_RANGE_DB.1, 1e-10)
}

/// Where the parity-check matrix comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeSpec {
    Alist {
        path: PathBuf,
    },
    Preset {
        name: String,
        n: usize,
        #[serde(default)]
        seed: u64,
    },
    Distribution {
        path: PathBuf,
        #[serde(default)]
        seed: u64,
    },
}

impl CodeSpec {
    /// Loads or constructs the matrix. Relative paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<ParityCheckMatrix> {
        let opts = |seed| ConstructOptions { seed, ..Default::default() };
        match self {
            Self::Alist { path } => ParityCheckMatrix::load_alist(&base.join(path)),
            Self::Preset { name, n, seed } => construct_with(&DegreeDistribution::preset(name, *n)?, &opts(*seed)),
            Self::Distribution { path, seed } => construct_with(&DegreeDistribution::load(&base.join(path))?, &opts(*seed)),
        }
    }
}

/// How cell reads are turned into decoder input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Quantization {
    /// One read per level boundary, at the pdf crossings.
    Hard,
    /// MMI-optimized voltages, re-optimized at every point.
    Mmi { reads: usize },
    /// Constant-ratio voltages.
    Cr { ratio: f64 },
    /// The same voltages at every point.
    Fixed { thresholds: Vec<f64> },
    /// Exact threshold voltages (unquantized).
    Soft,
}

/// Swept channel parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    /// Hard-read raw bit-error probability of a Gaussian model.
    RawBer,
    Months,
    /// Constant-ratio value at a fixed channel point; overrides the
    /// quantization mode.
    Ratio,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::RawBer => "raw_ber",
            Axis::Months => "months",
            Axis::Ratio => "ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub points: Vec<f64>,
}

/// Stop a point after `min_frame_errors` frame errors or `max_frames` frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRule {
    #[serde(default = "StopRule::default_errors")]
    pub min_frame_errors: u64,
    #[serde(default = "StopRule::default_frames")]
    pub max_frames: u64,
    /// Frames simulated between stopping-rule checks.
    #[serde(default = "StopRule::default_batch")]
    pub batch: u64,
}

impl StopRule {
    fn default_errors() -> u64 {
        100
    }
    fn default_frames() -> u64 {
        1_000_000
    }
    fn default_batch() -> u64 {
        256
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self { min_frame_errors: Self::default_errors(), max_frames: Self::default_frames(), batch: Self::default_batch() }
    }
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

/// A complete sweep description. Parsed from TOML; see the README for the
/// schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub channel: ChannelSpec,
    pub code: CodeSpec,
    pub quantization: Quantization,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Worker threads; 0 means one per available core. Never affects results.
    #[serde(default, skip_serializing)]
    pub workers: usize,
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.into(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.points.is_empty() {
            return Err(Error::Config("sweep has no points".into()));
        }
        if self.sweep.points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("sweep points must be finite".into()));
        }
        let s = &self.stop;
        if s.min_frame_errors == 0 || s.max_frames == 0 || s.batch == 0 {
            return Err(Error::Config("stopping rule values must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML form (worker count excluded).
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Result of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub axis_value: f64,
    /// Empty for unquantized reads.
    pub thresholds: Vec<f64>,
    pub mi_bits: f64,
    pub raw_ber: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub fer_ci: (f64, f64),
    pub mean_iterations: f64,
    /// The frame budget ran out before the error target was reached.
    pub truncated: bool,
    pub seed: u64,
    pub elapsed: Duration,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (lo_exact, hi_exact) = (k == 0, k == n);
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if lo_exact { 0.0 } else { (center - half).max(0.0) };
    let hi = if hi_exact { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Seed of frame `index`: a SplitMix64 finalizer over `seed ^ index`-style
/// mixing, so neighbouring frames get unrelated generators.
pub fn frame_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x6a09_e667_f3bc_c909);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

enum Reader {
    Quantized { thresholds: ThresholdSet<f64>, table: LlrTable<f64> },
    Soft,
}

/// Everything fixed for one sweep point.
struct Point<'a> {
    h: &'a ParityCheckMatrix,
    encoder: &'a SystematicEncoder,
    model: ReadChannelModel<f64>,
    reader: Reader,
    seed: u64,
    max_iters: usize,
}

/// Decoder statistics of one simulated frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub point: usize,
    pub frame: u64,
    pub iterations: usize,
    pub converged: bool,
    pub bit_errors: u64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
    iterations: u64,
}

impl Tally {
    fn add(self, r: &FrameRecord) -> Self {
        self.merge(Tally {
            frames: 1,
            frame_errors: u64::from(r.bit_errors > 0),
            bit_errors: r.bit_errors,
            iterations: r.iterations as u64,
        })
    }

    fn merge(self, o: Self) -> Self {
        Self {
            frames: self.frames + o.frames,
            frame_errors: self.frame_errors + o.frame_errors,
            bit_errors: self.bit_errors + o.bit_errors,
            iterations: self.iterations + o.iterations,
        }
    }
}

struct Worker {
    decoder: SerialBpDecoder<f64>,
    message: Vec<u8>,
    codeword: Vec<u8>,
    llrs: Vec<f64>,
}

impl Worker {
    fn new(p: &Point<'_>) -> Self {
        Self {
            decoder: SerialBpDecoder::new(p.h),
            message: vec![0; p.encoder.k()],
            codeword: vec![0; p.h.n()],
            llrs: vec![0.0; p.h.n()],
        }
    }

    fn run(&mut self, p: &Point<'_>, frame: u64) -> FrameRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(p.seed, frame));
        for chunk in self.message.chunks_mut(64) {
            let word: u64 = rng.random();
            for (i, b) in chunk.iter_mut().enumerate() {
                *b = (word >> i & 1) as u8;
            }
        }
        p.encoder.encode_into(&self.message, &mut self.codeword).expect("message length matches encoder");
        let bpc = p.model.bits_per_cell();
        for (cell, bits) in self.codeword.chunks(bpc).enumerate() {
            let label = bits.iter().fold(0u32, |acc, &b| acc << 1 | u32::from(b));
            let level = p.model.level_for_label(label).expect("gray labels cover every bit pattern");
            let z: f64 = rng.sample(StandardNormal);
            let v = p.model.level(level).dist.sample_from_standard(z);
            let out = &mut self.llrs[cell * bpc..(cell + 1) * bpc];
            match &p.reader {
                Reader::Quantized { thresholds, table } => {
                    let s = thresholds.quantize(v);
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = table.llr(s, j);
                    }
                }
                Reader::Soft => soft_cell_llrs(&p.model, v, out),
            }
        }
        let outcome = self.decoder.decode(&self.llrs, p.max_iters);
        let bit_errors = p
            .encoder
            .info_positions()
            .iter()
            .filter(|&&i| outcome.bits[i] != self.codeword[i])
            .count() as u64;
        FrameRecord { point: 0, frame, iterations: outcome.iterations, converged: outcome.converged, bit_errors }
    }
}

/// A prepared code: matrix plus systematic encoder.
pub struct Code {
    pub h: ParityCheckMatrix,
    pub encoder: SystematicEncoder,
}

impl Code {
    pub fn new(h: ParityCheckMatrix) -> Self {
        let encoder = SystematicEncoder::new(&h);
        Self { h, encoder }
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Builds the code described by `cfg` (paths relative to `base`) and runs
/// the sweep.
pub fn run_sweep(cfg: &SimConfig, base: &Path) -> Result<Vec<SimResult>> {
    let code = Code::new(cfg.code.build(base)?);
    run_sweep_with_code(cfg, &code)
}

/// Runs every sweep point of `cfg` on an already prepared code.
pub fn run_sweep_with_code(cfg: &SimConfig, code: &Code) -> Result<Vec<SimResult>> {
    run_sweep_logged(cfg, code, None)
}

/// [`run_sweep_with_code`] that also writes one JSON line per frame, in
/// frame order, to `frame_log`.
pub fn run_sweep_logged(cfg: &SimConfig, code: &Code, mut frame_log: Option<&mut dyn std::io::Write>) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    let bpc = crate::channel::bits_for_levels(cfg.channel.num_levels())?;
    if !code.h.n().is_multiple_of(bpc) {
        return Err(Error::Incompatible(format!(
            "block length {} is not a multiple of {bpc} bits per cell",
            code.h.n()
        )));
    }
    let pool = thread_pool(cfg.workers)?;
    let mut out = Vec::with_capacity(cfg.sweep.points.len());
    for (i, &x) in cfg.sweep.points.iter().enumerate() {
        out.push(run_point(cfg, code, &pool, i, x, &mut frame_log)?);
    }
    Ok(out)
}

/// FER and MI versus the constant-ratio value at the channel point fixed in
/// `cfg.channel`.
pub fn run_r_sweep(cfg: &SimConfig, code: &Code, r_grid: &[f64]) -> Result<Vec<SimResult>> {
    let mut c = cfg.clone();
    c.sweep = SweepSpec { axis: Axis::Ratio, points: r_grid.to_vec() };
    run_sweep_with_code(&c, code)
}

fn run_point(
    cfg: &SimConfig,
    code: &Code,
    pool: &rayon::ThreadPool,
    index: usize,
    x: f64,
    frame_log: &mut Option<&mut dyn std::io::Write>,
) -> Result<SimResult> {
    let start = Instant::now();
    let axis = cfg.sweep.axis;
    let model = cfg.channel.model_at(axis, x)?;
    let quant = if axis == Axis::Ratio { Quantization::Cr { ratio: x } } else { cfg.quantization.clone() };
    let thresholds = match &quant {
        Quantization::Hard => Some(model.hard_thresholds()?),
        Quantization::Mmi { reads } => Some(optimize_thresholds(&model, *reads, model.is_symmetric())?.0),
        Quantization::Cr { ratio } => Some(cr_thresholds(&model, *ratio)?),
        Quantization::Fixed { thresholds } => Some(ThresholdSet::new(thresholds.clone())?),
        Quantization::Soft => None,
    };
    let (reader, mi_bits, used) = match thresholds {
        Some(t) => {
            let dmc = build_dmc(&model, &t);
            let table = LlrTable::new(&dmc, &model)?;
            let mi = threshold_mi(&model, &t);
            let used = t.as_slice().to_vec();
            (Reader::Quantized { thresholds: t, table }, mi, used)
        }
        None => (Reader::Soft, full_soft_mi(&model)?, Vec::new()),
    };
    let raw_ber = raw_bit_error_probability(&model, &model.hard_thresholds()?)?;
    let point = Point { h: &code.h, encoder: &code.encoder, model, reader, seed: cfg.seed, max_iters: cfg.max_iters };

    let stop = &cfg.stop;
    let mut total = Tally::default();
    while total.frame_errors < stop.min_frame_errors && total.frames < stop.max_frames {
        let end = (total.frames + stop.batch).min(stop.max_frames);
        let records: Vec<FrameRecord> = pool.install(|| {
            (total.frames..end)
                .into_par_iter()
                .map_init(|| Worker::new(&point), |w, f| w.run(&point, f))
                .collect()
        });
        for r in &records {
            total = total.add(r);
            if let Some(log) = frame_log {
                let line = serde_json::to_string(&FrameRecord { point: index, ..*r }).expect("record serializes");
                writeln!(log, "{line}")?;
            }
        }
    }
    let fer = total.frame_errors as f64 / total.frames as f64;
    Ok(SimResult {
        axis_value: x,
        thresholds: used,
        mi_bits,
        raw_ber,
        frames: total.frames,
        frame_errors: total.frame_errors,
        bit_errors: total.bit_errors,
        fer,
        fer_ci: wilson_interval(total.frame_errors, total.frames, Z95),
        mean_iterations: total.iterations as f64 / total.frames as f64,
        truncated: total.frame_errors < stop.min_frame_errors,
        seed: cfg.seed,
        elapsed: start.elapsed(),
    })
}

/// Decimal rendering with 9 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..9).contains(&e) {
        format!("{:.*}", (8 - e).max(0) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

/// CSV column order of [`write_csv`].
pub const CSV_COLUMNS: [&str; 13] = [
    "axis",
    "value",
    "raw_ber",
    "mi_bits",
    "frames",
    "frame_errors",
    "bit_errors",
    "fer",
    "fer_ci_low",
    "fer_ci_high",
    "mean_iterations",
    "truncated",
    "thresholds",
];

/// Metadata written as `#` comments and as the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub axis: Axis,
    pub points: usize,
    pub truncated_points: usize,
}

impl SweepMeta {
    pub fn new(cfg: &SimConfig, results: &[SimResult]) -> Self {
        Self {
            version: version_string(),
            seed: cfg.seed,
            config_sha256: cfg.hash(),
            axis: cfg.sweep.axis,
            points: results.len(),
            truncated_points: results.iter().filter(|r| r.truncated).count(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes") + "\n"
    }
}

pub fn version_string() -> String {
    format!("flashread-v{}", env!("CARGO_PKG_VERSION"))
}

/// Renders results as CSV with `#` metadata lines. Timing is left out so the
/// output is a pure function of the configuration.
pub fn write_csv(meta: &SweepMeta, results: &[SimResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# version={}", meta.version);
    let _ = writeln!(s, "# seed={}", meta.seed);
    let _ = writeln!(s, "# config_sha256={}", meta.config_sha256);
    let _ = writeln!(s, "{}", CSV_COLUMNS.join(","));
    for r in results {
        let t: Vec<String> = r.thresholds.iter().map(|&q| fmt_sig(q)).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            meta.axis.name(),
            fmt_sig(r.axis_value),
            fmt_sig(r.raw_ber),
            fmt_sig(r.mi_bits),
            r.frames,
            r.frame_errors,
            r.bit_errors,
            fmt_sig(r.fer),
            fmt_sig(r.fer_ci.0),
            fmt_sig(r.fer_ci.1),
            fmt_sig(r.mean_iterations),
            r.truncated,
            t.join(";"),
        );
    }
    s
}
