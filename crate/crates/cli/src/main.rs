//! `toposcore`: batch scoring, diagram export, correlation and stability runs.
//!
//! Exit codes: 0 on success, 1 for configuration or I/O failures, 2 when an analysis
//! step fails (a class that cannot be scored, a metric table that does not join).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;

use toposcore::analysis::{
    correlate_scores, run_score_suite, stability_experiment, Level, MetricTable, ScoreReport,
    SuiteOptions,
};
use toposcore::baselines::{Ridge, DEFAULT_ALID_K};
use toposcore::io::{load_embeddings, write_tsf1};
use toposcore::psf::PqGrid;
use toposcore::rips::{diagrams_to_csv, diagrams_to_json, pairwise_distances, rips_persistence};
use toposcore::sampling::{kde_fit, kde_sample, seeded_rng, BandwidthRule, NoiseSpec};
use toposcore::{partition_by_class, DatasetManifest, LabeledPointCloud};

#[derive(Parser)]
#[command(
    name = "toposcore",
    version,
    about = "Topological quality scores for labeled embeddings"
)]
struct Cli {
    /// Worker threads for internal parallelism [default: all cores]. Results do not
    /// depend on this value.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every manifest and write `<name>.score.json` into the output directory.
    Score {
        /// Dataset manifest files.
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compute the persistence diagram of one class.
    ///
    /// The class is used as loaded unless `--samples` is given, in which case it is first
    /// replaced by a kernel density sample of that size.
    Diagram {
        /// Embedding file (TSF1 or CSV).
        embedding: PathBuf,
        /// Class label to extract.
        #[arg(long)]
        class: u32,
        /// Draw this many density samples first [default: use the class as loaded].
        #[arg(long)]
        samples: Option<usize>,
        /// Seed for density sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed density bandwidth [default: Scott's rule].
        #[arg(long)]
        bandwidth: Option<f64>,
        /// Highest homology dimension, 0 or 1.
        #[arg(long, default_value_t = 1)]
        max_dim: usize,
        /// Output format.
        #[arg(long, value_enum, default_value_t = DiagramFormat::Csv)]
        format: DiagramFormat,
        /// Output file [default: standard output].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-correlate score reports against a metric table.
    ///
    /// Writes `<score>.<metric>.<level>.correlation.json` and a matching
    /// `.scatter.csv` for every score type.
    Correlate {
        /// Glob matching `*.score.json` reports, e.g. 'out/*.score.json'.
        #[arg(long)]
        reports: String,
        /// Metric CSV with header `key,value`; keys are `dataset` or `dataset:class`.
        #[arg(long)]
        metric: PathBuf,
        /// Pair scores per dataset or per class.
        #[arg(long, value_enum, default_value_t = LevelArg::Dataset)]
        level: LevelArg,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Compare dataset-level correlations before and after Gaussian noise.
    Stability {
        /// Dataset manifest files.
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Noise configuration JSON (fraction, seed, sigma2_file | sigma2_from, sigma2_scale).
        #[arg(long)]
        noise: PathBuf,
        /// Metric CSV with header `key,value`.
        #[arg(long)]
        metric: PathBuf,
        /// Fraction of rows to perturb, in (0, 1] [default: value in the noise file, else 0.2].
        #[arg(long)]
        fraction: Option<f64>,
        /// Output file.
        #[arg(long, default_value = "stability.json")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Draw density samples of one class and write them as TSF1.
    Sample {
        /// Embedding file (TSF1 or CSV).
        embedding: PathBuf,
        /// Class label to sample.
        #[arg(long)]
        class: u32,
        /// Number of samples.
        #[arg(long, default_value_t = toposcore::manifest::DEFAULT_SAMPLES_PER_CLASS)]
        samples: usize,
        /// Sampling seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed density bandwidth [default: Scott's rule].
        #[arg(long)]
        bandwidth: Option<f64>,
        /// Output TSF1 file.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parameters shared by `score` and `stability`. Manifest values apply unless overridden.
#[derive(Args)]
struct Overrides {
    /// Sampling seed [default: manifest `seed`, else 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Density samples per class [default: manifest `samples_per_class`, else 300].
    #[arg(long)]
    samples: Option<usize>,
    /// Neighbors for ALID.
    #[arg(long, default_value_t = DEFAULT_ALID_K)]
    k: usize,
    /// AMS ridge, as a multiple of the mean per-dimension variance.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Fixed density bandwidth [default: Scott's rule].
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Exponent pairs as `p:q,p:q,...` [default: manifest `pq_set`, else 2:2,2:3,3:2,3:3].
    #[arg(long, value_name = "P:Q,...")]
    pq: Option<String>,
    /// Highest homology dimension, 0 or 1 [default: manifest `max_dim`, else 1].
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagramFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Dataset,
    Class,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Dataset => Level::Dataset,
            LevelArg::Class => Level::Class,
        }
    }
}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    toposcore::Error::Config(msg.into()).into()
}

fn parse_pq(text: &str) -> anyhow::Result<PqGrid> {
    let pairs = text
        .split(',')
        .map(|pair| {
            let (p, q) = pair
                .split_once(':')
                .ok_or_else(|| config_error(format!("`{pair}` is not of the form p:q")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| config_error(format!("`{s}` is not a number")))
            };
            Ok((parse(p)?, parse(q)?))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(PqGrid::new(pairs)?)
}

fn bandwidth_rule(h: Option<f64>) -> anyhow::Result<BandwidthRule> {
    match h {
        None => Ok(BandwidthRule::Scott),
        Some(h) if h.is_finite() && h > 0.0 => Ok(BandwidthRule::Fixed(h)),
        Some(h) => Err(config_error(format!("bandwidth must be positive, got {h}"))),
    }
}

impl Overrides {
    fn suite_options(&self) -> anyhow::Result<SuiteOptions> {
        if self.k == 0 {
            return Err(config_error("k must be positive"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(config_error(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(SuiteOptions {
            alid_k: self.k,
            ams_ridge: Ridge::TraceScaled(self.epsilon),
            bandwidth: bandwidth_rule(self.bandwidth)?,
        })
    }

    fn apply(&self, path: &Path) -> anyhow::Result<DatasetManifest> {
        let mut m = DatasetManifest::load(path)?;
        if let Some(seed) = self.seed {
            m.seed = seed;
        }
        if let Some(samples) = self.samples {
            m.samples_per_class = samples;
        }
        if let Some(pq) = &self.pq {
            m.pq_set = parse_pq(pq)?;
        }
        if let Some(l) = self.max_dim {
            m.max_dim = l;
        }
        m.validate()?;
        Ok(m)
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, contents).map_err(|e| {
        toposcore::Error::Io {
            path: path.to_owned(),
            source: e,
        }
        .into()
    })
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        toposcore::Error::Io {
            path: dir.to_owned(),
            source: e,
        }
        .into()
    })
}

fn class_points(cloud: &LabeledPointCloud, class: u32) -> anyhow::Result<Array2<f64>> {
    partition_by_class(cloud)
        .remove(&class)
        .ok_or_else(|| config_error(format!("class {class} is not present")))
}

fn cmd_score(manifests: &[PathBuf], out_dir: &Path, overrides: &Overrides) -> anyhow::Result<()> {
    let options = overrides.suite_options()?;
    let manifests = manifests
        .iter()
        .map(|p| overrides.apply(p).with_context(|| p.display().to_string()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    create_dir(out_dir)?;

    // Keep going after a failed dataset; the first input error, else the first analysis
    // error, decides the exit code.
    let mut failure: Option<toposcore::Error> = None;
    let mut failed = 0;
    for m in &manifests {
        match run_score_suite(m, &options) {
            Ok(report) => write(
                &out_dir.join(format!("{}.score.json", m.name)),
                report.to_json(),
            )?,
            Err(e) => {
                failed += 1;
                eprintln!("error: dataset `{}`: {e}", m.name);
                let replace = match &failure {
                    None => true,
                    Some(prev) => e.is_input_error() && !prev.is_input_error(),
                };
                if replace {
                    failure = Some(e);
                }
            }
        }
    }
    match failure {
        None => Ok(()),
        Some(e) => Err(Failed {
            code: if e.is_input_error() { 1 } else { 2 },
            message: format!("{failed} of {} datasets failed", manifests.len()),
        }
        .into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_diagram(
    embedding: &Path,
    class: u32,
    samples: Option<usize>,
    seed: u64,
    bandwidth: Option<f64>,
    max_dim: usize,
    format: DiagramFormat,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let rule = bandwidth_rule(bandwidth)?;
    if max_dim > 1 {
        return Err(config_error(format!(
            "max_dim must be 0 or 1, got {max_dim}"
        )));
    }
    let cloud = load_embeddings(embedding, None)?;
    let mut points = class_points(&cloud, class)?;
    if let Some(m) = samples {
        if m == 0 {
            return Err(config_error("samples must be positive"));
        }
        let model = kde_fit(points.view(), rule)?;
        points = kde_sample(&model, m, &mut seeded_rng(seed, class as u64));
    }
    let diagrams = rips_persistence(&pairwise_distances(points.view()), max_dim)?;
    let text = match format {
        DiagramFormat::Csv => diagrams_to_csv(&diagrams),
        DiagramFormat::Json => diagrams_to_json(&diagrams),
    };
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_correlate(pattern: &str, metric: &Path, level: Level, out_dir: &Path) -> anyhow::Result<()> {
    let mut paths = glob::glob(pattern)
        .map_err(|e| config_error(format!("bad glob `{pattern}`: {e}")))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| config_error(e.to_string()))?;
    paths.sort();
    if paths.is_empty() {
        return Err(config_error(format!("no reports match `{pattern}`")));
    }
    let mut reports = Vec::with_capacity(paths.len());
    for path in &paths {
        let text = fs::read_to_string(path).map_err(|e| toposcore::Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let report = ScoreReport::from_json(&text).with_context(|| path.display().to_string())?;
        if reports
            .iter()
            .any(|r: &ScoreReport| r.dataset == report.dataset)
        {
            return Err(config_error(format!(
                "dataset `{}` appears twice",
                report.dataset
            )));
        }
        reports.push(report);
    }
    let metrics = MetricTable::load(metric)?;
    let results = correlate_scores(&reports, &metrics, level)?;
    create_dir(out_dir)?;
    for r in &results {
        let stem = format!("{}.{}.{}", r.score, r.metric, r.level);
        write(
            &out_dir.join(format!("{stem}.correlation.json")),
            r.to_json(),
        )?;
        write(
            &out_dir.join(format!("{stem}.scatter.csv")),
            r.to_scatter_csv(),
        )?;
    }
    Ok(())
}

fn cmd_stability(
    manifests: &[PathBuf],
    noise: &Path,
    metric: &Path,
    fraction: Option<f64>,
    out: &Path,
    overrides: &Overrides,
) -> anyhow::Result<()> {
    let options = overrides.suite_options()?;
    let mut spec = NoiseSpec::from_json_file(noise)?;
    if let Some(f) = fraction {
        if !(f > 0.0 && f <= 1.0) {
            return Err(config_error(format!(
                "noise fraction must lie in (0, 1], got {f}"
            )));
        }
        spec.fraction = f;
    }
    let manifests = manifests
        .iter()
        .map(|p| overrides.apply(p).with_context(|| p.display().to_string()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let metrics = MetricTable::load(metric)?;
    let report = stability_experiment(&manifests, &spec, &metrics, &options)?;
    write(out, report.to_json())
}

fn cmd_sample(
    embedding: &Path,
    class: u32,
    samples: usize,
    seed: u64,
    bandwidth: Option<f64>,
    out: &Path,
) -> anyhow::Result<()> {
    let rule = bandwidth_rule(bandwidth)?;
    if samples == 0 {
        return Err(config_error("samples must be positive"));
    }
    let cloud = load_embeddings(embedding, None)?;
    let points = class_points(&cloud, class)?;
    let model = kde_fit(points.view(), rule)?;
    let drawn = kde_sample(&model, samples, &mut seeded_rng(seed, class as u64));
    let sampled = LabeledPointCloud::new(drawn, vec![class; samples])?;
    write_tsf1(out, &sampled)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_error("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("cannot start thread pool: {e}"))?;
    }
    match cli.command {
        Command::Score {
            manifests,
            out_dir,
            overrides,
        } => cmd_score(&manifests, &out_dir, &overrides),
        Command::Diagram {
            embedding,
            class,
            samples,
            seed,
            bandwidth,
            max_dim,
            format,
            out,
        } => cmd_diagram(
            &embedding,
            class,
            samples,
            seed,
            bandwidth,
            max_dim,
            format,
            out.as_deref(),
        ),
        Command::Correlate {
            reports,
            metric,
            level,
            out_dir,
        } => cmd_correlate(&reports, &metric, level.into(), &out_dir),
        Command::Stability {
            manifests,
            noise,
            metric,
            fraction,
            out,
            overrides,
        } => cmd_stability(&manifests, &noise, &metric, fraction, &out, &overrides),
        Command::Sample {
            embedding,
            class,
            samples,
            seed,
            bandwidth,
            out,
        } => cmd_sample(&embedding, class, samples, seed, bandwidth, &out),
    }
}

/// A failure whose details were already reported on stderr.
#[derive(Debug)]
struct Failed {
    code: u8,
    message: String,
}

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failed {}

/// 1 for configuration and I/O problems, 2 for failed analyses.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(f) = err.downcast_ref::<Failed>() {
        return f.code;
    }
    match err.downcast_ref::<toposcore::Error>() {
        Some(e) if !e.is_input_error() => 2,
        _ => 1,
    }
}

/// The error chain joined by `: `, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut parent = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !parent.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
        parent = text;
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; clap's own code would read as an
            // analysis failure.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
