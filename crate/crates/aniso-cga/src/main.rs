//! Experiment runner: reproducible takeover, niching and QAP recipes.
//!
//! Every command writes CSV (and optionally PGM) files under the output
//! directory and prints a one-line summary per result row. Identical
//! arguments and seed produce byte-identical files regardless of
//! `--threads`.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use aniso_cga::grid::GridShape;
use aniso_cga::niching::{self, NichingConfig};
use aniso_cga::output;
use aniso_cga::qap::{self, CgaConfig, QapInstance, ReplacementPolicy};
use aniso_cga::selection::{AnisotropyParams, TournamentConfig};
use aniso_cga::stats::Summary;
use aniso_cga::takeover::{self, EquivalenceConfig, TakeoverConfig};

/// Environment variable overriding the default output directory.
const OUT_DIR_ENV: &str = "ANISO_CGA_OUT";

#[derive(Parser)]
#[command(name = "aniso-cga", version, about = "Cellular GA experiments with anisotropic selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Output directory (default `out`, or $ANISO_CGA_OUT when set).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Selection-only takeover experiment on one configuration.
    Takeover(TakeoverArgs),
    /// Takeover experiments across grid shapes or anisotropy degrees.
    TakeoverSweep(TakeoverSweepArgs),
    /// Anisotropy degree matching a target takeover time, by bisection.
    Equivalence(EquivalenceArgs),
    /// Two-lineage niching experiment.
    Niching(NichingArgs),
    /// Cellular GA on a QAP instance at one anisotropy degree.
    Qap(QapArgs),
    /// Cellular GA cost sweep over anisotropy degrees.
    QapSweep(QapSweepArgs),
}

#[derive(Args)]
struct TakeoverArgs {
    /// Grid shape, WIDTHxHEIGHT.
    #[arg(long, default_value = "64x64")]
    shape: GridShape,
    /// Anisotropy degree in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[command(flatten)]
    tournament: TournamentFlags,
    #[arg(long, default_value_t = 100)]
    replicates: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Generation budget (default: scaled to the grid, at least 5000).
    #[arg(long)]
    max_generations: Option<u32>,
    /// Write one aggregated growth CSV instead of one file per replicate.
    #[arg(long)]
    aggregate: bool,
    /// Skip growth-curve files entirely (summary only).
    #[arg(long)]
    no_curves: bool,
    /// Comma-separated generations at which replicate 0 emits PGM snapshots.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<u32>,
}

#[derive(Args)]
struct TakeoverSweepArgs {
    /// Comma-separated shapes, e.g. 64x64,32x128,16x256.
    #[arg(long, value_delimiter = ',')]
    shapes: Vec<GridShape>,
    /// Anisotropy degrees: comma list or START:END:STEP (END exclusive).
    #[arg(long)]
    alphas: Option<String>,
    /// Shape used for an `--alphas` sweep.
    #[arg(long, default_value = "64x64")]
    shape: GridShape,
    /// Degree used for a `--shapes` sweep.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[command(flatten)]
    tournament: TournamentFlags,
    #[arg(long, default_value_t = 100)]
    replicates: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    max_generations: Option<u32>,
}

#[derive(Args)]
struct EquivalenceArgs {
    /// Target takeover times.
    #[arg(long, value_delimiter = ',', required = true)]
    targets: Vec<f64>,
    /// Optional side ratios paired with the targets; with two or more
    /// pairs the (ratio, alpha) regression is fitted and reported.
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
    #[arg(long, default_value = "64x64")]
    shape: GridShape,
    #[command(flatten)]
    tournament: TournamentFlags,
    /// Replicates per bisection probe.
    #[arg(long, default_value_t = 100)]
    replicates: u32,
    /// Accept a probe whose mean is within this many generations.
    #[arg(long, default_value_t = 1.0)]
    tolerance: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct NichingArgs {
    #[arg(long, default_value = "64x64")]
    shape: GridShape,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[command(flatten)]
    tournament: TournamentFlags,
    #[arg(long, default_value_t = 1000)]
    generations: u32,
    /// Comma-separated snapshot generations (PGM emission).
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<u32>,
    /// Replicates for survival/mixing statistics (files come from
    /// replicate 0 only).
    #[arg(long, default_value_t = 1)]
    replicates: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct QapArgs {
    /// Instance file: n, flow matrix, distance matrix.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0.86)]
    alpha: f64,
    #[command(flatten)]
    tournament: TournamentFlags,
    #[arg(long, default_value_t = 1500)]
    generations: u32,
    #[arg(long, default_value_t = 1)]
    runs: u32,
    #[arg(long, default_value = "20x20")]
    shape: GridShape,
    #[arg(long, default_value_t = 1.0)]
    crossover_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    mutation_mean: f64,
    /// Exactly one transposition per offspring instead of a Poisson count.
    #[arg(long)]
    fixed_one_swap: bool,
    /// Replace a cell only when the offspring is not worse (elitist cells)
    /// instead of the classic unconditional replacement.
    #[arg(long)]
    elitist_cells: bool,
    /// Write a per-run `generation,global_best_cost` trace CSV.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct QapSweepArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Degrees: comma list or START:END:STEP (END exclusive, all in [0, 1)).
    #[arg(long, default_value = "0.0:1.0:0.1")]
    alphas: String,
    #[arg(long, default_value_t = 50)]
    runs: u32,
    #[arg(long, default_value_t = 1500)]
    generations: u32,
    #[arg(long, default_value = "20x20")]
    shape: GridShape,
    #[command(flatten)]
    tournament: TournamentFlags,
    #[arg(long, default_value_t = 1.0)]
    crossover_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    mutation_mean: f64,
    #[arg(long)]
    fixed_one_swap: bool,
    /// Replace a cell only when the offspring is not worse (elitist cells).
    #[arg(long)]
    elitist_cells: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct TournamentFlags {
    /// Tournament size, 1 to 5.
    #[arg(long, default_value_t = 2)]
    k: u8,
    /// Draw the k candidates without replacement.
    #[arg(long)]
    without_replacement: bool,
}

impl TournamentFlags {
    fn build(&self) -> Result<TournamentConfig> {
        let cfg = if self.without_replacement {
            TournamentConfig::without_replacement(self.k)
        } else {
            TournamentConfig::new(self.k)
        };
        Ok(cfg?)
    }
}

fn parse_alpha_spec(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("alpha range must be START:END:STEP, got `{spec}`");
        }
        let start: f64 = parts[0].parse().context("bad range start")?;
        let end: f64 = parts[1].parse().context("bad range end")?;
        let step: f64 = parts[2].parse().context("bad range step")?;
        if step <= 0.0 {
            bail!("alpha range step must be positive");
        }
        let mut vals = Vec::new();
        let mut i = 0u32;
        loop {
            let v = start + step * i as f64;
            if v >= end - 1e-12 {
                break;
            }
            vals.push(v);
            i += 1;
        }
        vals
    } else {
        spec.split(',')
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad alpha `{t}`")))
            .collect::<Result<_>>()?
    };
    if values.is_empty() {
        bail!("alpha specification `{spec}` yields no values");
    }
    Ok(values)
}

fn alpha_params(alpha: f64) -> Result<AnisotropyParams> {
    Ok(AnisotropyParams::new(alpha)?)
}

fn shape_alpha_label(shape: GridShape, alpha: f64) -> String {
    format!("{shape}_a{alpha}")
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("building the worker pool")?;
    }
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    match cli.command {
        Command::Takeover(args) => run_takeover(args, &out_dir),
        Command::TakeoverSweep(args) => run_takeover_sweep(args, &out_dir),
        Command::Equivalence(args) => run_equivalence(args, &out_dir),
        Command::Niching(args) => run_niching(args, &out_dir),
        Command::Qap(args) => run_qap(args, &out_dir),
        Command::QapSweep(args) => run_qap_sweep(args, &out_dir),
    }
}

fn build_takeover_config(
    shape: GridShape,
    alpha: f64,
    tournament: &TournamentFlags,
    replicates: u32,
    seed: u64,
    max_generations: Option<u32>,
) -> Result<TakeoverConfig> {
    let mut cfg = TakeoverConfig::new(shape, alpha_params(alpha)?);
    cfg.tournament = tournament.build()?;
    cfg.replicates = replicates;
    cfg.base_seed = seed;
    if let Some(m) = max_generations {
        cfg.max_generations = m;
    } else {
        cfg.max_generations = takeover::default_max_generations(shape, cfg.tournament);
    }
    Ok(cfg)
}

fn run_takeover(args: TakeoverArgs, out_dir: &PathBuf) -> Result<()> {
    let cfg = build_takeover_config(
        args.shape,
        args.alpha,
        &args.tournament,
        args.replicates,
        args.seed,
        args.max_generations,
    )?;
    let results = takeover::run_all(&cfg);

    if !args.snapshots.is_empty() {
        let (_, snaps) = takeover::run_replicate_with_snapshots(&cfg, 0, &args.snapshots);
        for (gen, grid) in snaps {
            let path = out_dir.join(format!("snap_g{gen}.pgm"));
            output::write_pgm(&path, cfg.shape.width(), cfg.shape.height(), &output::takeover_pixels(&grid))?;
        }
    }

    if !args.no_curves {
        if args.aggregate {
            if let Ok(agg) = takeover::aggregate(&results) {
                output::write_mean_growth_csv(&out_dir.join("growth_mean.csv"), &agg.mean_curve)?;
            }
        } else {
            for r in &results {
                let path = out_dir.join(format!("growth_r{}.csv", r.replicate));
                output::write_growth_csv(&path, r.curve.n_of_t())?;
            }
        }
    }

    let label = shape_alpha_label(cfg.shape, args.alpha);
    match takeover::aggregate(&results) {
        Ok(agg) => {
            output::write_summary_csv(
                &out_dir.join("takeover_summary.csv"),
                &[(label.clone(), agg.takeover, agg.replicates)],
            )?;
            println!(
                "takeover {label}: avg {:.1} std {:.1} min {} max {} ({}/{} reached)",
                agg.takeover.mean, agg.takeover.std, agg.takeover.min, agg.takeover.max,
                agg.reached, agg.replicates
            );
        }
        Err(_) => {
            let terminal = results[0].curve.terminal_n();
            println!(
                "takeover {label}: not reached within {} generations (terminal N = {terminal})",
                cfg.max_generations
            );
        }
    }
    Ok(())
}

fn run_takeover_sweep(args: TakeoverSweepArgs, out_dir: &PathBuf) -> Result<()> {
    let mut rows = Vec::new();
    if let Some(alpha_spec) = &args.alphas {
        for alpha in parse_alpha_spec(alpha_spec)? {
            let cfg = build_takeover_config(
                args.shape,
                alpha,
                &args.tournament,
                args.replicates,
                args.seed,
                args.max_generations,
            )?;
            let agg = takeover::aggregate(&takeover::run_all(&cfg))?;
            println!(
                "takeover alpha={alpha:.4}: avg {:.1} std {:.1} min {} max {}",
                agg.takeover.mean, agg.takeover.std, agg.takeover.min, agg.takeover.max
            );
            rows.push((format!("a{alpha}"), agg.takeover, agg.replicates));
        }
    } else {
        if args.shapes.is_empty() {
            bail!("takeover-sweep needs --shapes or --alphas");
        }
        for shape in &args.shapes {
            let cfg = build_takeover_config(
                *shape,
                args.alpha,
                &args.tournament,
                args.replicates,
                args.seed,
                args.max_generations,
            )?;
            let agg = takeover::aggregate(&takeover::run_all(&cfg))?;
            println!(
                "takeover {shape}: avg {:.1} std {:.1} min {} max {}",
                agg.takeover.mean, agg.takeover.std, agg.takeover.min, agg.takeover.max
            );
            rows.push((shape.to_string(), agg.takeover, agg.replicates));
        }
    }
    output::write_summary_csv(&out_dir.join("takeover_summary.csv"), &rows)?;
    Ok(())
}

fn run_equivalence(args: EquivalenceArgs, out_dir: &PathBuf) -> Result<()> {
    if !args.ratios.is_empty() && args.ratios.len() != args.targets.len() {
        bail!("--ratios must pair one ratio with every target");
    }
    let mut cfg = EquivalenceConfig::new(args.shape, args.seed);
    cfg.tournament = args.tournament.build()?;
    cfg.replicates = args.replicates;
    cfg.tolerance = args.tolerance;

    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for (i, &target) in args.targets.iter().enumerate() {
        let res = takeover::equivalent_alpha(target, &cfg)?;
        println!(
            "equivalence target {target}: alpha {:.4} (mean takeover {:.1}, {} probes)",
            res.alpha, res.mean_takeover, res.probes
        );
        rows.push((target, res.alpha, res.mean_takeover, cfg.replicates));
        if let Some(&ratio) = args.ratios.get(i) {
            pairs.push((ratio, res.alpha));
        }
    }
    output::write_equivalence_csv(&out_dir.join("equivalence.csv"), &rows)?;

    if pairs.len() >= 2 {
        let fit = takeover::fit_alpha_ratio_regression(&pairs)?;
        println!(
            "regression alpha vs ratio: slope {:.4} intercept {:.4} correlation {:.5}",
            fit.slope, fit.intercept, fit.correlation
        );
    }
    Ok(())
}

fn run_niching(args: NichingArgs, out_dir: &PathBuf) -> Result<()> {
    let mut cfg = NichingConfig::new(args.shape, alpha_params(args.alpha)?, args.generations);
    cfg.tournament = args.tournament.build()?;
    cfg.snapshot_times = args.snapshots.clone();
    cfg.base_seed = args.seed;

    let report = niching::run_replicate(&cfg, 0);
    output::write_niching_csv(&out_dir.join("niching.csv"), &report.rows)?;
    for (gen, grid) in &report.snapshots {
        let path = out_dir.join(format!("niche_a{}_g{gen}.pgm", args.alpha));
        output::write_pgm(&path, cfg.shape.width(), cfg.shape.height(), &output::lineage_pixels(grid))?;
    }
    let last = report.final_counts();
    println!(
        "niching alpha={} gen {}: A {} B {} empty {} mixing {:.4}",
        args.alpha, last.generation, last.count_a, last.count_b, last.count_empty, last.mixing_index
    );

    if args.replicates > 1 {
        let finals = niching::run_finals(&cfg, args.replicates);
        let survived = finals.iter().filter(|c| c.count_a > 0 && c.count_b > 0).count();
        let mixing: Vec<f64> = finals.iter().map(|c| c.mixing_index).collect();
        let s = Summary::of(&mixing).expect("at least one replicate");
        println!(
            "niching alpha={} over {} replicates: both lineages alive in {survived}, \
             mixing mean {:.4} +- {:.4}",
            args.alpha,
            args.replicates,
            s.mean,
            s.ci95_half_width()
        );
    }
    Ok(())
}

fn load_instance(path: &PathBuf) -> Result<QapInstance> {
    QapInstance::from_file(path)
        .with_context(|| format!("loading QAP instance {}", path.display()))
}

#[allow(clippy::too_many_arguments)]
fn build_cga_config(
    shape: GridShape,
    alpha: f64,
    tournament: &TournamentFlags,
    generations: u32,
    crossover_rate: f64,
    mutation_mean: f64,
    fixed_one_swap: bool,
    elitist_cells: bool,
    seed: u64,
) -> Result<CgaConfig> {
    if !(0.0..=1.0).contains(&crossover_rate) {
        bail!("crossover rate must lie in [0, 1]");
    }
    if mutation_mean < 0.0 {
        bail!("mutation mean must be non-negative");
    }
    let mut cfg = CgaConfig::new(alpha_params(alpha)?, seed);
    cfg.shape = shape;
    cfg.tournament = tournament.build()?;
    cfg.generations = generations;
    cfg.crossover_rate = crossover_rate;
    cfg.mutation_mean = mutation_mean;
    cfg.fixed_one_swap = fixed_one_swap;
    cfg.replacement =
        if elitist_cells { ReplacementPolicy::IfNotWorse } else { ReplacementPolicy::Always };
    Ok(cfg)
}

fn run_qap(args: QapArgs, out_dir: &PathBuf) -> Result<()> {
    let instance = load_instance(&args.instance)?;
    let cfg = build_cga_config(
        args.shape,
        args.alpha,
        &args.tournament,
        args.generations,
        args.crossover_rate,
        args.mutation_mean,
        args.fixed_one_swap,
        args.elitist_cells,
        args.seed,
    )?;
    use rayon::prelude::*;
    let stats: Vec<_> =
        (0..args.runs).into_par_iter().map(|r| qap::run_cga(&instance, &cfg, r)).collect();
    for s in &stats {
        println!(
            "qap {} alpha={} run {}: best cost {}",
            instance.name(),
            args.alpha,
            s.replicate,
            s.final_best_cost
        );
        if args.trace {
            let path = out_dir.join(format!("qap_trace_r{}.csv", s.replicate));
            output::write_trace_csv(&path, &s.best_cost_per_generation)?;
        }
    }
    let costs: Vec<f64> = stats.iter().map(|s| s.final_best_cost).collect();
    let s = Summary::of(&costs).expect("at least one run");
    println!(
        "qap {} alpha={}: mean {:.2} std {:.2} min {} over {} runs",
        instance.name(),
        args.alpha,
        s.mean,
        s.std,
        s.min,
        args.runs
    );
    Ok(())
}

fn run_qap_sweep(args: QapSweepArgs, out_dir: &PathBuf) -> Result<()> {
    let instance = load_instance(&args.instance)?;
    let alphas = parse_alpha_spec(&args.alphas)?;
    for &a in &alphas {
        if !(0.0..1.0).contains(&a) {
            bail!("qap-sweep degrees must lie in [0, 1), got {a}");
        }
    }
    let cfg = build_cga_config(
        args.shape,
        0.0,
        &args.tournament,
        args.generations,
        args.crossover_rate,
        args.mutation_mean,
        args.fixed_one_swap,
        args.elitist_cells,
        args.seed,
    )?;
    let rows = qap::alpha_sweep(&instance, &alphas, args.runs, &cfg);
    for r in &rows {
        println!(
            "qap-sweep {} alpha={:.4}: mean {:.2} std {:.2} min {} ({} runs)",
            instance.name(),
            r.alpha,
            r.mean_best,
            r.std_best,
            r.min_best,
            r.runs
        );
    }
    output::write_sweep_csv(&out_dir.join("qap_sweep.csv"), &rows)?;
    Ok(())
}
