use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use holp_cli::campaign::{run_campaign, CampaignOptions};
use holp_cli::config::ExperimentConfig;
use holp_cli::dataset::{load_csv, LoadOptions};
use holp_cli::svg::{emit_curves, emit_heatmap, Series};
use holp_core::metrics::{dominance_ratio, holp_projection, kfold_cv, marginal_projection, timing_run};
use holp_core::screeners::{rank_select, threshold_select, DEFAULT_RIDGE};
use holp_core::simgen::{draw_design, replicate_rng, Family};
use holp_core::{run_screener, PipelineSpec, Refiner, Screened, Screener, SubmodelRule};

#[derive(Parser)]
#[command(name = "holp", version, about = "Variable screening for p >> n linear regression")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the predictors of a CSV data set.
    Screen(ScreenArgs),
    /// Run a Monte-Carlo campaign from a JSON config.
    Campaign(CampaignArgs),
    /// K-fold cross-validation of a two-stage pipeline on a CSV data set.
    Cv(CvArgs),
    /// Heatmaps of the SIS and HOLP screening matrices on a simulated design.
    Heatmap(HeatmapArgs),
    /// Screening wall time over a grid of predictor counts.
    Timing(TimingArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Holp,
    RidgeHolp,
    DivideHolp,
    Sis,
    Rrcs,
    Fr,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, value_enum, default_value = "holp")]
    method: Method,
    /// Ridge parameter for ridge-holp.
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
    /// Row partitions for divide-holp.
    #[arg(long, default_value_t = 2)]
    partitions: usize,
}

impl MethodArgs {
    fn screener(&self) -> Screener {
        match self.method {
            Method::Holp => Screener::Holp,
            Method::RidgeHolp => Screener::RidgeHolp { ridge: self.ridge },
            Method::DivideHolp => Screener::DivideHolp {
                partitions: self.partitions,
            },
            Method::Sis => Screener::Sis,
            Method::Rrcs => Screener::Rrcs,
            Method::Fr => Screener::ForwardRegression,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Name of the response column.
    #[arg(long)]
    response: String,
    /// Keep only the K predictors with the largest sample variance.
    #[arg(long, value_name = "K")]
    top_variance: Option<usize>,
    /// Standardize predictors to mean 0 and unit variance.
    #[arg(long)]
    standardize: bool,
}

impl DataArgs {
    fn load(&self) -> Result<holp_cli::TabularDataset> {
        let opts = LoadOptions {
            response: self.response.clone(),
            top_variance: self.top_variance,
            standardize: self.standardize,
        };
        let data = load_csv(&self.input, &opts).with_context(|| format!("loading {}", self.input.display()))?;
        if data.rejected_rows > 0 {
            eprintln!("dropped {} row(s) with missing values", data.rejected_rows);
        }
        Ok(data)
    }
}

#[derive(Args)]
struct ScreenArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Submodel size (default: number of rows).
    #[arg(long, conflicts_with = "gamma")]
    d: Option<usize>,
    /// Keep every predictor scoring at least this value.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write `ranked.csv` here instead of printing to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall-clock columns in report.csv.
    #[arg(long)]
    wall_time: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefinerArg {
    LassoEbic,
    Ols,
    None,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Submodel size (default: min(rows, predictors)).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum, default_value = "lasso-ebic")]
    refiner: RefinerArg,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    Independent,
    Cs,
    Ar,
}

#[derive(Args)]
struct HeatmapArgs {
    #[arg(long, value_enum, default_value = "independent")]
    design: DesignArg,
    /// Correlation for cs/ar designs.
    #[arg(long, default_value_t = 0.6)]
    rho: f64,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    p: usize,
    /// Number of leading columns drawn.
    #[arg(long, default_value_t = 200)]
    columns: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct TimingArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Comma-separated predictor counts.
    #[arg(long, value_delimiter = ',', default_values_t = [500, 1000, 1500, 2000, 2500])]
    p_grid: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn screen(args: &ScreenArgs) -> Result<()> {
    let data = args.data.load()?;
    let (n, p) = data.x.shape();
    let d = args.d.unwrap_or(n).min(p);
    let screener = args.method.screener();
    let screened = run_screener(&data.x, &data.y, &screener, d, args.seed)?;
    let (selection, scores) = match (&screened, args.gamma) {
        (Screened::Scores(s), Some(g)) => (threshold_select(s, g)?, Some(&s.scores)),
        (Screened::Scores(s), None) => (rank_select(s, d)?, Some(&s.scores)),
        (Screened::Selection(_), Some(_)) => bail!("--gamma needs a method that produces scores"),
        (Screened::Selection(_), None) => (screened.top(d)?, None),
    };
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["rank", "column", "name", "score"])?;
    for (rank, &j) in selection.indices.iter().enumerate() {
        let score = scores.map_or(String::new(), |s| s[j].to_string());
        wtr.write_record([(rank + 1).to_string(), j.to_string(), data.names[j].clone(), score])?;
    }
    let bytes = wtr.into_inner()?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("ranked.csv"), bytes)?;
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn campaign(args: &CampaignArgs, threads: Option<usize>) -> Result<ExitCode> {
    let config = ExperimentConfig::load(&args.config)?;
    let out = args.out.clone().or_else(|| config.out.clone()).unwrap_or_else(|| "out".into());
    let opts = CampaignOptions {
        out: out.clone(),
        threads,
        seed: args.seed,
        wall_time: args.wall_time,
    };
    let outcome = run_campaign(&config, &opts)?;
    eprintln!("{} experiment(s) written to {}", outcome.reports.len(), out.display());
    Ok(match outcome.failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("experiment {} ('{}') failed: {}", f.index, f.label, f.error);
            ExitCode::FAILURE
        }
    })
}

fn cv(args: &CvArgs) -> Result<()> {
    let data = args.data.load()?;
    let (n, p) = data.x.shape();
    let refiner = match args.refiner {
        RefinerArg::LassoEbic => Refiner::LassoEbic,
        RefinerArg::Ols => Refiner::Ols,
        RefinerArg::None => Refiner::None,
    };
    let spec = PipelineSpec {
        screener: args.method.screener(),
        submodel: SubmodelRule::TopD(args.d.unwrap_or(n.min(p))),
        refiner,
    };
    let report = kfold_cv(&data.x, &data.y, &spec, args.folds, args.seed)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn heatmap(args: &HeatmapArgs) -> Result<()> {
    let design = match args.design {
        DesignArg::Independent => Family::Independent,
        DesignArg::Cs => Family::CompoundSymmetry {
            rho: args.rho,
            support_size: None,
        },
        DesignArg::Ar => Family::Autoregressive {
            rho: args.rho,
            support_size: None,
        },
    };
    if args.columns < 2 || args.columns > args.p {
        bail!("--columns must lie in 2..={}", args.p);
    }
    let x = draw_design(&design, args.n, args.p, None, &mut replicate_rng(args.seed, 0));
    let cols: Vec<usize> = (0..args.columns).collect();
    fs::create_dir_all(&args.out)?;
    for (name, m) in [
        ("sis", marginal_projection(&x, &cols)?),
        ("holp", holp_projection(&x, &cols)?),
    ] {
        let path = args.out.join(format!("heatmap_{name}.svg"));
        emit_heatmap(&m, &path)?;
        println!("{name}: dominance ratio {:.3} -> {}", dominance_ratio(&m)?, path.display());
    }
    Ok(())
}

fn timing(args: &TimingArgs) -> Result<()> {
    let screener = args.method.screener();
    let grid: Vec<(usize, usize, usize)> = args.p_grid.iter().map(|&p| (args.n, p, args.d)).collect();
    let points = timing_run(&screener, &grid, args.reps, args.seed)?;
    fs::create_dir_all(&args.out)?;
    let mut wtr = csv::Writer::from_path(args.out.join("timing.csv"))?;
    for pt in &points {
        wtr.serialize(pt)?;
        println!("n={} p={} d={}: {:.6} s", pt.n, pt.p, pt.d, pt.seconds);
    }
    wtr.flush()?;
    let series = [Series {
        label: screener.label(),
        points: points.iter().map(|pt| (pt.p as f64, pt.seconds)).collect(),
    }];
    emit_curves(&series, "p", "seconds", &args.out.join("timing.svg"))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || -> Result<ExitCode> {
        if !matches!(cli.command, Command::Campaign(_)) {
            if let Some(t) = cli.threads {
                rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
            }
        }
        match &cli.command {
            Command::Screen(a) => screen(a)?,
            Command::Campaign(a) => return campaign(a, cli.threads),
            Command::Cv(a) => cv(a)?,
            Command::Heatmap(a) => heatmap(a)?,
            Command::Timing(a) => timing(a)?,
        }
        Ok(ExitCode::SUCCESS)
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
