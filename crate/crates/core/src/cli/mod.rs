//! Command-line front end. Parsing lives here so the binary is a one-liner.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 numerical failure.

mod config;
mod formats;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{
    parse_config, EntropySettings, GaussianSpec, GeneratingProcess, GeneratingSpec, NmdsSettings, PathSpec,
    ProjectionSettings, RunConfig, Seeds,
};
pub use formats::{align_fits, fit_columns, NamedAverage, ProjectionReport};

use crate::distributions::{GaussianModel, Sample};
use crate::entropy::{self, Estimator};
use crate::experiments::{
    deletion_experiment, model_space_svg, run_pipeline, sgg_benchmark, BenchmarkConfig, PipelineOutput, SvgOptions,
};
use crate::mds::{self, DivergenceMatrix, Embedding, NmdsOptions};
use crate::model_fit::{self, FitRecord};
use crate::projection::{akaike_weights, model_average_location, solve_projection, Direction, ProjectionOptions};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "modelproj", version, about = "Model projection for multi-model inference")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file, or output directory for multi-file subcommands.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Replace every configured seed with seeds derived from this value.
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Omit the generation timestamp comment from SVG output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the configured candidates to a sample CSV.
    Fit {
        #[arg(long)]
        sample: PathBuf,
    },
    /// Divergence matrix CSV from fitted-model JSON.
    Divergence {
        #[arg(long)]
        fits: PathBuf,
    },
    /// NMDS embedding of a divergence matrix CSV.
    Embed {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Neg-selfentropy estimate of a sample CSV.
    Entropy {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        estimator: Option<Estimator>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Projection of the generating process onto an embedding.
    Project {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        fits: PathBuf,
        #[command(flatten)]
        sgg: SggSource,
    },
    /// Akaike-weight average location.
    Average {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        fits: PathBuf,
    },
    /// Full study from a run configuration.
    Pipeline,
    /// Entropy estimator benchmark on a multivariate normal.
    BenchSgg {
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Deletion sweep over the pipeline's model space.
    Deletion {
        #[arg(long, default_value = "left")]
        direction: Direction,
        #[arg(long)]
        steps: Option<usize>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SggSource {
    /// Neg-selfentropy value.
    #[arg(long, allow_hyphen_values = true)]
    pub sgg: Option<f64>,
    /// Entropy JSON written by `entropy`.
    #[arg(long)]
    pub entropy: Option<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match cli.threads {
        Some(0) => Err(Error::invalid("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn load_config(cli: &Cli) -> Result<Option<RunConfig>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let cfg = parse_config(path)?;
    Ok(Some(match cli.seed_override {
        Some(s) => cfg.with_seed_override(s),
        None => cfg,
    }))
}

fn require_config(cli: &Cli, command: &str) -> Result<RunConfig> {
    load_config(cli)?.ok_or_else(|| Error::Config(format!("`{command}` requires --config")))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn out_dir(cli: &Cli, fallback: &str) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(fallback));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn timestamp(cli: &Cli) -> Option<String> {
    if cli.no_timestamp {
        return None;
    }
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Some(format!("unix time {secs}"))
}

fn read_sample(path: &Path) -> Result<Sample> {
    Sample::read_csv(formats::open_reader(path)?)
}

fn projection_options(cli: &Cli, cfg: Option<&RunConfig>) -> ProjectionOptions {
    match (cfg, cli.seed_override) {
        (Some(c), _) => c.projection_options(),
        (None, Some(s)) => ProjectionOptions { seed: Seeds::from_override(s).projection, ..Default::default() },
        (None, None) => ProjectionOptions::default(),
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Fit { sample } => {
            let cfg = require_config(cli, "fit")?;
            let sample = read_sample(sample)?;
            let fits = model_fit::fit_all(&cfg.candidates, &sample)?;
            let records: Vec<FitRecord> = fits.iter().map(FitRecord::from).collect();
            emit(out, &formats::to_json(&records)?)
        }
        Command::Divergence { fits } => {
            let records: Vec<FitRecord> = formats::read_json(fits)?;
            let names: Vec<String> = records.iter().map(|r| r.name.clone()).collect();
            let models: Vec<GaussianModel> = records
                .iter()
                .map(|r| {
                    r.predictive
                        .clone()
                        .ok_or_else(|| Error::invalid(format!("fit record `{}` has no predictive model", r.name)))
                })
                .collect::<Result<_>>()?;
            let dm = mds::divergence_matrix_from(names, &models)?;
            let mut buf = Vec::new();
            dm.write_csv(&mut buf)?;
            emit(out, &String::from_utf8(buf).expect("csv output is UTF-8"))
        }
        Command::Embed { matrix } => {
            let cfg = load_config(cli)?;
            let dm = DivergenceMatrix::read_csv(formats::open_reader(matrix)?)?;
            let opts = match (&cfg, cli.seed_override) {
                (Some(c), _) => c.nmds_options(),
                (None, Some(s)) => NmdsOptions { seed: Seeds::from_override(s).nmds, ..Default::default() },
                (None, None) => NmdsOptions::default(),
            };
            let e = mds::nmds(&mds::dissimilarities(&dm), dm.names().to_vec(), &opts)?;
            emit(out, &formats::to_json(&e)?)
        }
        Command::Entropy { sample, estimator, k } => {
            let cfg = load_config(cli)?;
            let settings = cfg.as_ref().map(|c| c.entropy).unwrap_or_default();
            let estimator = estimator.unwrap_or(settings.estimator);
            let k = k.or(if estimator == settings.estimator { settings.k } else { None });
            let sample = read_sample(sample)?;
            let est = entropy::estimate(&sample, estimator, k, settings.options())?;
            emit(out, &formats::to_json(&est)?)
        }
        Command::Project { embedding, fits, sgg } => {
            let cfg = load_config(cli)?;
            let e: Embedding = formats::read_json(embedding)?;
            let records: Vec<FitRecord> = formats::read_json(fits)?;
            let (aics, sgf) = fit_columns(&e, &records)?;
            let sgg_hat = match (&sgg.sgg, &sgg.entropy) {
                (Some(v), _) => *v,
                (None, Some(path)) => formats::read_json::<entropy::EntropyEstimate>(path)?.sgg_hat,
                (None, None) => unreachable!("clap requires one Sgg source"),
            };
            let avg = model_average_location(&e, &akaike_weights(&aics)?)?;
            let p = solve_projection(&sgf, &e, sgg_hat, Some(&avg.location), &projection_options(cli, cfg.as_ref()))?;
            emit(out, &formats::to_json(&ProjectionReport::new(&e.names, &p, &avg))?)
        }
        Command::Average { embedding, fits } => {
            let e: Embedding = formats::read_json(embedding)?;
            let records: Vec<FitRecord> = formats::read_json(fits)?;
            let (aics, _) = fit_columns(&e, &records)?;
            let avg = model_average_location(&e, &akaike_weights(&aics)?)?;
            emit(out, &formats::to_json(&NamedAverage::new(&e.names, &avg))?)
        }
        Command::Pipeline => {
            let cfg = require_config(cli, "pipeline")?;
            let dir = out_dir(cli, &cfg.output_dir)?;
            let result = run_pipeline(&cfg)?;
            write_pipeline(&dir, &result, timestamp(cli))
        }
        Command::BenchSgg { replicates } => {
            let mut bench = match &cli.config {
                Some(path) => toml::from_str::<BenchmarkConfig>(&formats::read_text(path)?)
                    .map_err(|e| Error::Config(e.to_string()))?,
                None => BenchmarkConfig::default(),
            };
            if let Some(r) = replicates {
                bench.replicates = *r;
            }
            if let Some(s) = cli.seed_override {
                bench.seed = s;
            }
            let dir = out_dir(cli, "out")?;
            let report = sgg_benchmark(&bench)?;
            fs::write(dir.join("bench_sgg.json"), formats::to_json(&report)?)?;
            report.write_replicates_csv(fs::File::create(dir.join("bench_sgg_replicates.csv"))?)
        }
        Command::Deletion { direction, steps } => {
            let cfg = require_config(cli, "deletion")?;
            let dir = out_dir(cli, &cfg.output_dir)?;
            let result = run_pipeline(&cfg)?;
            let report = deletion_experiment(&cfg, &result, *direction, *steps)?;
            let mut lines = String::new();
            for step in &report.steps {
                lines.push_str(&serde_json::to_string(step)?);
                lines.push('\n');
            }
            fs::write(dir.join("deletion_steps.jsonl"), lines)?;
            fs::write(dir.join("deletion_report.json"), formats::to_json(&report)?)?;
            report.write_csv(fs::File::create(dir.join("deletion_trajectory.csv"))?)
        }
    }
}

/// Writes every pipeline product into `dir`.
pub fn write_pipeline(dir: &Path, r: &PipelineOutput, timestamp: Option<String>) -> Result<()> {
    r.sample.write_csv(fs::File::create(dir.join("sample.csv"))?)?;
    let records: Vec<FitRecord> = r.fits.iter().map(FitRecord::from).collect();
    fs::write(dir.join("fits.json"), formats::to_json(&records)?)?;
    r.divergence.write_csv(fs::File::create(dir.join("divergence.csv"))?)?;
    fs::write(dir.join("embedding.json"), formats::to_json(&r.embedding)?)?;
    fs::write(dir.join("entropy.json"), formats::to_json(&r.entropy)?)?;
    let names = r.names();
    fs::write(dir.join("projection.json"), formats::to_json(&ProjectionReport::new(&names, &r.projection, &r.average))?)?;
    fs::write(dir.join("report.json"), formats::to_json(&r.report)?)?;
    let svg = model_space_svg(
        &r.embedding,
        &r.projection.m,
        Some(&r.truth.m),
        &r.average.location,
        &SvgOptions { timestamp, ..Default::default() },
    );
    fs::write(dir.join("model_space.svg"), svg)?;
    Ok(())
}
