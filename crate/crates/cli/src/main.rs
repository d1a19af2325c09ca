use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use flashread::baseline::{bch_t_for, bch_theory_fer};
use flashread::channel::{raw_bit_error_probability, ReadChannelModel, RetentionParams};
use flashread::codegen::{
    construct_with, count_four_cycles, find_small_absorbing_candidates, girth, ConstructOptions, DegreeDistribution,
};
use flashread::infotheory::{gaussian_mmi, max_tolerable_raw_ber, shannon_limit_snr, Precision};
use flashread::quantizer::{cr_thresholds, full_soft_mi, optimize_thresholds, threshold_mi};
use flashread::sim::{fmt_sig, run_sweep_logged, write_csv, Code, SimConfig, SweepMeta};

/// Read-channel quantization and LDPC frame-error simulation for flash memory.
#[derive(Parser)]
#[command(name = "flashread", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum-mutual-information read voltages for one channel.
    OptimizeThresholds(OptimizeArgs),
    /// MI versus SNR for several read counts.
    MiSweep(MiSweepArgs),
    /// MI of constant-ratio thresholds versus the ratio.
    RSweep(RSweepArgs),
    /// SNR and hard raw BER at which a rate becomes achievable.
    Limits(LimitsArgs),
    /// Bounded-distance BCH frame error rate versus raw BER.
    BchCurve(BchArgs),
    /// Build an LDPC parity-check matrix and report its structure.
    CodeBuild(CodeBuildArgs),
    /// Monte Carlo frame-error-rate sweep described by a config file.
    FerSim(FerSimArgs),
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

/// Selects a Gaussian PAM channel (`--snr-db`) or the retention model (`--months`).
#[derive(Args)]
struct ChannelArgs {
    /// Number of levels for the Gaussian model (2, 4 or 8).
    #[arg(long, default_value_t = 2)]
    levels: usize,
    /// SNR Es/(N0/2) in dB of the Gaussian model.
    #[arg(long, conflicts_with = "months")]
    snr_db: Option<f64>,
    /// Retention time in months; selects the 4-level retention model.
    #[arg(long)]
    months: Option<f64>,
    /// TOML file with retention parameters (defaults are built in).
    #[arg(long, requires = "months")]
    retention: Option<PathBuf>,
}

impl ChannelArgs {
    fn model(&self) -> Result<ReadChannelModel<f64>> {
        match (self.snr_db, self.months) {
            (Some(snr), None) => Ok(ReadChannelModel::gaussian(self.levels, snr)?),
            (None, Some(t)) => {
                let params = match &self.retention {
                    Some(p) => RetentionParams::load(p)?,
                    None => RetentionParams::default(),
                };
                Ok(ReadChannelModel::retention(t, &params)?)
            }
            _ => bail!("give exactly one of --snr-db or --months"),
        }
    }

    fn describe(&self) -> String {
        match (self.snr_db, self.months) {
            (Some(s), _) => format!("gaussian levels={} snr_db={s}", self.levels),
            (_, Some(t)) => format!("retention months={t}"),
            _ => String::new(),
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Number of reads (thresholds).
    #[arg(long)]
    reads: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MiSweepArgs {
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, allow_hyphen_values = true)]
    snr_from: f64,
    #[arg(long, allow_hyphen_values = true)]
    snr_to: f64,
    #[arg(long, default_value_t = 0.5)]
    snr_step: f64,
    /// Comma-separated read counts; `soft` for unquantized reads.
    #[arg(long, default_value = "1,2,3,soft")]
    reads: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RSweepArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, default_value_t = 2)]
    r_from: u32,
    #[arg(long, default_value_t = 20)]
    r_to: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct LimitsArgs {
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 0.9021)]
    rate: f64,
    /// Comma-separated read counts; `soft` for unquantized reads.
    #[arg(long, default_value = "1,2,3,4,5,6,soft")]
    reads: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BchArgs {
    #[arg(long, default_value_t = 9152)]
    n: usize,
    #[arg(long, default_value_t = 8256)]
    k: usize,
    /// Correctable errors; inferred from n and k when omitted.
    #[arg(long)]
    t: Option<usize>,
    /// Comma-separated raw bit-error probabilities.
    #[arg(long, conflicts_with_all = ["p_from", "p_to"])]
    p: Option<String>,
    /// Log-spaced grid start.
    #[arg(long, requires = "p_to")]
    p_from: Option<f64>,
    #[arg(long, requires = "p_from")]
    p_to: Option<f64>,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CodeBuildArgs {
    /// code1, code2, code3 or regular36.
    #[arg(long, conflicts_with = "distribution")]
    preset: Option<String>,
    /// TOML degree distribution.
    #[arg(long)]
    distribution: Option<PathBuf>,
    /// Block length for presets.
    #[arg(long, default_value_t = 9118)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 9)]
    ace_depth: usize,
    #[arg(long, default_value_t = 4)]
    ace_eta: usize,
    /// Move all degree-3 variable mass to degree 4 first.
    #[arg(long)]
    preclude_degree3: bool,
    /// Write the matrix in alist format.
    #[arg(long)]
    alist: Option<PathBuf>,
    /// Write the (possibly transformed) degree distribution as TOML.
    #[arg(long)]
    save_distribution: Option<PathBuf>,
    /// Enumerate absorbing sets with at most this many variable nodes.
    #[arg(long)]
    absorbing_max_a: Option<usize>,
    #[arg(long, default_value_t = 2)]
    absorbing_max_b: usize,
    #[arg(long, default_value_t = 5_000_000)]
    absorbing_budget: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FerSimArgs {
    /// TOML sweep configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// JSON metadata path; defaults to `<out>.meta.json` when --out is set.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Write per-frame decoder statistics as JSON lines.
    #[arg(long)]
    frame_log: Option<PathBuf>,
    /// Exit with an error if any point hit the frame limit first.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: Output,
}

fn parse_precisions(s: &str) -> Result<Vec<Precision>> {
    s.split(',')
        .map(|t| match t.trim() {
            "soft" => Ok(Precision::FullSoft),
            n => n.parse().map(Precision::Reads).with_context(|| format!("bad read count {n:?}")),
        })
        .collect()
}

fn optimize(a: &OptimizeArgs) -> Result<String> {
    let model = a.channel.model()?;
    let (t, mi) = optimize_thresholds(&model, a.reads, model.is_symmetric())?;
    let mut s = String::new();
    writeln!(s, "# {} reads={}", a.channel.describe(), a.reads)?;
    writeln!(s, "# mi_bits={}", fmt_sig(mi))?;
    writeln!(s, "index,threshold")?;
    for (i, q) in t.as_slice().iter().enumerate() {
        writeln!(s, "{i},{}", fmt_sig(*q))?;
    }
    Ok(s)
}

fn mi_sweep(a: &MiSweepArgs) -> Result<String> {
    if a.snr_step.is_nan() || a.snr_step <= 0.0 || a.snr_to < a.snr_from {
        bail!("need --snr-step > 0 and --snr-to >= --snr-from");
    }
    let precisions = parse_precisions(&a.reads)?;
    let mut s = String::from("snr_db,raw_ber,precision,mi_bits\n");
    let steps = ((a.snr_to - a.snr_from) / a.snr_step + 1e-9).floor() as usize;
    for i in 0..=steps {
        let snr = a.snr_from + i as f64 * a.snr_step;
        let model = ReadChannelModel::gaussian(a.levels, snr)?;
        let ber = raw_bit_error_probability(&model, &model.hard_thresholds()?)?;
        for &p in &precisions {
            let mi = gaussian_mmi(a.levels, p, snr)?;
            writeln!(s, "{},{},{p},{}", fmt_sig(snr), fmt_sig(ber), fmt_sig(mi))?;
        }
    }
    Ok(s)
}

fn r_sweep(a: &RSweepArgs) -> Result<String> {
    if a.r_from < 2 || a.r_to < a.r_from {
        bail!("need 2 <= --r-from <= --r-to");
    }
    let model = a.channel.model()?;
    let mmi = optimize_thresholds(&model, 2 * (model.num_levels() - 1), model.is_symmetric())?.1;
    let mut rows = Vec::new();
    for r in a.r_from..=a.r_to {
        rows.push((r, threshold_mi(&model, &cr_thresholds(&model, f64::from(r))?)));
    }
    let best = rows.iter().fold(rows[0], |b, &x| if x.1 > b.1 { x } else { b });
    let mut s = String::new();
    writeln!(s, "# {}", a.channel.describe())?;
    writeln!(s, "# unconstrained_mmi_bits={}", fmt_sig(mmi))?;
    writeln!(s, "# best_ratio={}", best.0)?;
    writeln!(s, "ratio,mi_bits")?;
    for (r, mi) in rows {
        writeln!(s, "{r},{}", fmt_sig(mi))?;
    }
    Ok(s)
}

fn limits(a: &LimitsArgs) -> Result<String> {
    let mut s = format!("# levels={} rate={}\nprecision,snr_db,mi_bits,max_raw_ber\n", a.levels, a.rate);
    for p in parse_precisions(&a.reads)? {
        let snr = shannon_limit_snr(a.levels, p, a.rate)?;
        let ber = max_tolerable_raw_ber(a.levels, p, a.rate)?;
        let model = ReadChannelModel::gaussian(a.levels, snr)?;
        let mi = match p {
            Precision::FullSoft => full_soft_mi(&model)?,
            Precision::Reads(n) => optimize_thresholds(&model, n, true)?.1,
        };
        writeln!(s, "{p},{},{},{}", fmt_sig(snr), fmt_sig(mi), fmt_sig(ber))?;
    }
    Ok(s)
}

fn bch_curve(a: &BchArgs) -> Result<String> {
    if a.k > a.n || a.n == 0 {
        bail!("need 0 < n and k <= n");
    }
    let t = a.t.unwrap_or_else(|| bch_t_for(a.n, a.k));
    let ps: Vec<f64> = match (&a.p, a.p_from, a.p_to) {
        (Some(list), _, _) => list
            .split(',')
            .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad probability {x:?}")))
            .collect::<Result<_>>()?,
        (None, Some(lo), Some(hi)) => {
            if !(lo > 0.0 && hi >= lo) || a.points < 2 {
                bail!("need 0 < --p-from <= --p-to and --points >= 2");
            }
            let step = (hi / lo).ln() / (a.points - 1) as f64;
            (0..a.points).map(|i| lo * (step * i as f64).exp()).collect()
        }
        _ => bail!("give --p or --p-from/--p-to"),
    };
    if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        bail!("probability {p} outside [0, 1]");
    }
    let mut s = format!("# n={} k={} t={t}\np,fer\n", a.n, a.k);
    for p in ps {
        writeln!(s, "{},{}", fmt_sig(p), fmt_sig(bch_theory_fer(a.n, t, p)))?;
    }
    Ok(s)
}

fn code_build(a: &CodeBuildArgs) -> Result<String> {
    let mut dist = match (&a.preset, &a.distribution) {
        (Some(name), None) => DegreeDistribution::preset(name, a.n)?,
        (None, Some(path)) => DegreeDistribution::load(path)?,
        _ => bail!("give exactly one of --preset or --distribution"),
    };
    if a.preclude_degree3 {
        dist = flashread::codegen::preclude_degree3(&dist);
    }
    if let Some(p) = &a.save_distribution {
        std::fs::write(p, dist.to_toml_string()).with_context(|| format!("writing {}", p.display()))?;
    }
    let opts = ConstructOptions { seed: a.seed, ace_depth: a.ace_depth, ace_eta: a.ace_eta, ..Default::default() };
    let h = construct_with(&dist, &opts)?;
    if let Some(p) = &a.alist {
        h.save_alist(p)?;
    }
    let mut s = String::new();
    writeln!(s, "# name={} n={} m={} edges={}", dist.name, h.n(), h.m(), h.num_edges())?;
    let g = girth(&h).map_or("none".to_string(), |g| g.to_string());
    writeln!(s, "# girth={g} four_cycles={}", count_four_cycles(&h))?;
    if let Some(max_a) = a.absorbing_max_a {
        let found = find_small_absorbing_candidates(&h, max_a, a.absorbing_max_b, a.absorbing_budget);
        writeln!(s, "# absorbing_search complete={} examined={}", found.complete, found.subsets_examined)?;
        let mut counts = std::collections::BTreeMap::new();
        for set in &found.sets {
            *counts.entry((set.a, set.b)).or_insert(0usize) += 1;
        }
        for ((sa, sb), c) in counts {
            writeln!(s, "# absorbing ({sa},{sb}) count={c}")?;
        }
    }
    writeln!(s, "side,degree,count")?;
    for (d, c) in h.column_degree_histogram() {
        writeln!(s, "variable,{d},{c}")?;
    }
    for (d, c) in h.row_degree_histogram() {
        writeln!(s, "check,{d},{c}")?;
    }
    Ok(s)
}

fn fer_sim(a: &FerSimArgs) -> Result<(String, bool)> {
    let mut cfg = SimConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.workers = a.workers;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let code = Code::new(cfg.code.build(base)?);
    let results = match &a.frame_log {
        Some(p) => {
            let file = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = std::io::BufWriter::new(file);
            let r = run_sweep_logged(&cfg, &code, Some(&mut w))?;
            w.flush()?;
            r
        }
        None => run_sweep_logged(&cfg, &code, None)?,
    };
    for r in &results {
        eprintln!(
            "{}={} frames={} errors={} elapsed={:.1}s",
            cfg.sweep.axis.name(),
            r.axis_value,
            r.frames,
            r.frame_errors,
            r.elapsed.as_secs_f64()
        );
    }
    let meta = SweepMeta::new(&cfg, &results);
    let meta_path = a.meta.clone().or_else(|| a.output.out.as_ref().map(|o| {
        let mut p = o.clone().into_os_string();
        p.push(".meta.json");
        PathBuf::from(p)
    }));
    if let Some(p) = meta_path {
        std::fs::write(&p, meta.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok((write_csv(&meta, &results), meta.truncated_points > 0))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::OptimizeThresholds(a) => a.output.emit(&optimize(a)?),
        Command::MiSweep(a) => a.output.emit(&mi_sweep(a)?),
        Command::RSweep(a) => a.output.emit(&r_sweep(a)?),
        Command::Limits(a) => a.output.emit(&limits(a)?),
        Command::BchCurve(a) => a.output.emit(&bch_curve(a)?),
        Command::CodeBuild(a) => a.output.emit(&code_build(a)?),
        Command::FerSim(a) => {
            let (csv, truncated) = fer_sim(a)?;
            a.output.emit(&csv)?;
            if truncated && a.strict {
                bail!("some points reached the frame limit before the error target");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
