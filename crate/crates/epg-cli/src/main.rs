//! Command-line front end: dataset generation, PCA, fitting, growth, the
//! two-epoch hybrid, and metro-map layout, wired for reproducible runs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure
//! (singular system), 4 fit stopped at the iteration cap without converging.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use epg::data::{
    generate_pattern, load_csv, pca_fit, pca_project, snp_encode, write_csv, CsvOptions,
    DataError, PatternKind, PatternSpec, SnpTable,
};
use epg::grammar::{grow, GrowthConfig, GrowthError};
use epg::graph::{GraphDocument, GraphError};
use epg::layout::{
    export_svg, import_json, layout_residual, metro_layout, node_compositions, export_json,
    LayoutError, LayoutParams, SvgStyle,
};
use epg::optimizer::{build_partition, fit, OptimizerConfig, SolveError};
use epg::pipeline::{hybrid_preset, initialize, run_epochs, EpochSpec, InitStrategy, PipelineError};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
    IterationCap,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Data(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
            CliError::IterationCap => write!(f, "fit reached the iteration cap before converging"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::IterationCap => 4,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Singular { .. } => CliError::Numerical(e.to_string()),
            SolveError::BadConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<GrowthError> for CliError {
    fn from(e: GrowthError) -> Self {
        match e {
            GrowthError::Solve(inner) => inner.into(),
            GrowthError::BadConfig(m) => CliError::Usage(m),
            GrowthError::Graph(inner) => inner.into(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Solve(inner) => inner.into(),
            PipelineError::Growth(inner) => inner.into(),
            PipelineError::BadNeighborhood(..) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<LayoutError> for CliError {
    fn from(e: LayoutError) -> Self {
        match e {
            LayoutError::DidNotConverge { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("json error: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "epg",
    about = "Elastic principal graphs: robust graph-structured data approximation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CsvArgs {
    /// Field delimiter for CSV input.
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Treat the first row as data instead of a header.
    #[arg(long)]
    no_header: bool,
    /// Weight column (header name or zero-based index).
    #[arg(long)]
    weight_col: Option<String>,
    /// Label column (header name or zero-based index).
    #[arg(long)]
    label_col: Option<String>,
}

impl CsvArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            delimiter: self.delimiter as u8,
            has_header: !self.no_header,
            weight_column: self.weight_col.clone(),
            label_column: self.label_col.clone(),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct OptimizerArgs {
    /// Robustness radius; omit for standard (untrimmed) fitting.
    #[arg(long)]
    r0: Option<f64>,
    /// Iteration cap per fit.
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Diagonal regularization of the position solver.
    #[arg(long, default_value_t = 1e-9)]
    ridge: f64,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        let mut config = match self.r0 {
            Some(r0) => OptimizerConfig::robust(r0),
            None => OptimizerConfig::standard(),
        };
        config.max_iterations = self.max_iterations;
        config.ridge = self.ridge;
        config
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum KindArg {
    Spiral,
    Kappa,
    YBranch,
    Segment,
}

impl From<KindArg> for PatternKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Spiral => PatternKind::Spiral,
            KindArg::Kappa => PatternKind::Kappa,
            KindArg::YBranch => PatternKind::YBranch,
            KindArg::Segment => PatternKind::Segment,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum InitArg {
    PrincipalSegment,
    LocalNeighborhood,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic 2-D pattern dataset as CSV.
    Generate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Fraction of uniform background noise points.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Gaussian jitter applied to pattern points.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Noise bounding box as "x0,y0,x1,y1" (default: inflated pattern box).
        #[arg(long)]
        bbox: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a dataset onto its leading principal components.
    Pca {
        #[arg(long)]
        input: PathBuf,
        /// Parse the input as a tab-separated genotype table and encode it.
        #[arg(long)]
        snp: bool,
        /// Status codes treated as unreliable (drops the whole column).
        #[arg(long, value_delimiter = ',', default_value = "NN")]
        missing: Vec<String>,
        #[arg(long, default_value_t = 3)]
        components: usize,
        #[arg(long)]
        out_data: PathBuf,
        #[arg(long)]
        out_model: Option<PathBuf>,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Fit an existing graph to a dataset (no topology changes).
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Graph JSON with node positions.
        #[arg(long)]
        graph: PathBuf,
        /// Override every edge modulus before fitting.
        #[arg(long)]
        lambda: Option<f64>,
        /// Override every star modulus before fitting.
        #[arg(long)]
        mu: Option<f64>,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        /// Write one energy report per iteration as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Grow a principal graph from a 2-node seed.
    Grow {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        max_nodes: usize,
        #[arg(long, default_value_t = 10)]
        trial_iterations: usize,
        /// Minimum relative energy improvement to keep growing.
        #[arg(long = "epsilon-improve", default_value_t = 0.0)]
        epsilon_improve: f64,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        #[arg(long, value_enum, default_value = "principal-segment")]
        init: InitArg,
        /// Neighborhood size for the local-neighborhood initializer.
        #[arg(long, default_value_t = 10)]
        k_density: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Candidate-trial thread count (output is identical for any value).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write one growth step per line as JSON.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Run training epochs: either a config file or the two-epoch preset.
    Hybrid {
        #[arg(long)]
        input: PathBuf,
        /// Epoch list as JSON; overrides the preset flags.
        #[arg(long)]
        epochs: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Robustness radius of the second epoch.
        #[arg(long)]
        r0: Option<f64>,
        /// Factor dividing the moduli in the second epoch.
        #[arg(long, default_value_t = 10.0)]
        soften: f64,
        /// Node budget of the first (coarse) epoch.
        #[arg(long, default_value_t = 12)]
        max_nodes: usize,
        /// Node budget of the second (fine) epoch.
        #[arg(long)]
        max_nodes2: Option<usize>,
        #[arg(long, default_value_t = 10)]
        trial_iterations: usize,
        #[arg(long, default_value_t = 1e-9)]
        ridge: f64,
        #[arg(long, value_enum, default_value = "principal-segment")]
        init: InitArg,
        #[arg(long, default_value_t = 10)]
        k_density: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        /// Output prefix: writes <prefix>.epoch<i>.json and <prefix>.log.json.
        #[arg(long)]
        out_prefix: String,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Lay out a fitted tree in the plane and export SVG/JSON.
    Layout {
        /// Graph JSON with node positions.
        #[arg(long)]
        graph: PathBuf,
        /// Dataset for node occupancy and pie-chart compositions.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Maximum star-mean residual (default: 1e-6 of the layout diameter).
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        max_rounds: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        csv: CsvArgs,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    Ok(())
}

fn pretty_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn read_graph(path: &Path) -> Result<(epg::ElasticGraph, epg::Embedding), CliError> {
    let text = fs::read_to_string(path)?;
    let doc: GraphDocument = serde_json::from_str(&text)?;
    let (graph, emb) = import_json(&doc)?;
    let emb = emb.ok_or_else(|| {
        CliError::Data(format!("{}: graph document has no node positions", path.display()))
    })?;
    Ok((graph, emb))
}

fn init_strategy(init: InitArg, seed: u64, k_density: usize) -> InitStrategy {
    match init {
        InitArg::PrincipalSegment => InitStrategy::PrincipalSegment,
        InitArg::LocalNeighborhood => InitStrategy::LocalNeighborhood { seed, k_density },
    }
}

fn configure_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::try_parse().map_err(|e| {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            print!("{e}");
            std::process::exit(0);
        }
        CliError::Usage(e.to_string())
    })?;
    match cli.command {
        Command::Generate {
            kind,
            n,
            noise,
            jitter,
            bbox,
            seed,
            out,
        } => {
            let bbox = match bbox {
                Some(text) => {
                    let parts: Vec<f64> = text
                        .split(',')
                        .map(|s| s.trim().parse())
                        .collect::<Result<_, _>>()
                        .map_err(|_| {
                            CliError::Usage(format!("--bbox expects x0,y0,x1,y1, got {text:?}"))
                        })?;
                    if parts.len() != 4 {
                        return Err(CliError::Usage(format!(
                            "--bbox expects 4 values, got {}",
                            parts.len()
                        )));
                    }
                    Some([[parts[0], parts[1]], [parts[2], parts[3]]])
                }
                None => None,
            };
            let spec = PatternSpec {
                kind: kind.into(),
                n_points: n,
                noise_fraction: noise,
                jitter,
                bbox,
                seed,
            };
            let dataset = generate_pattern(&spec)?;
            let mut buf = Vec::new();
            write_csv(&dataset, &mut buf)?;
            write_file(&out, std::str::from_utf8(&buf).expect("csv is utf-8"))?;
            Ok(())
        }
        Command::Pca {
            input,
            snp,
            missing,
            components,
            out_data,
            out_model,
            csv,
        } => {
            let dataset = if snp {
                let file = fs::File::open(&input)?;
                let table = SnpTable::from_tsv(std::io::BufReader::new(file))?;
                let missing: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
                let (dataset, _) = snp_encode(&table, &missing)?;
                dataset
            } else {
                load_csv(&input, &csv.options())?
            };
            let model = pca_fit(&dataset, components)?;
            let projected = pca_project(&model, &dataset)?;
            let mut buf = Vec::new();
            write_csv(&projected, &mut buf)?;
            write_file(&out_data, std::str::from_utf8(&buf).expect("csv is utf-8"))?;
            if let Some(path) = out_model {
                write_file(&path, &pretty_json(&model)?)?;
            }
            Ok(())
        }
        Command::Fit {
            input,
            graph,
            lambda,
            mu,
            optimizer,
            trace,
            out,
            csv,
        } => {
            let dataset = load_csv(&input, &csv.options())?;
            let (mut g, emb) = read_graph(&graph)?;
            if lambda.is_some() || mu.is_some() {
                g = g.with_uniform_moduli(
                    lambda.unwrap_or(g.uniform_lambda()),
                    mu.unwrap_or(g.uniform_mu()),
                )?;
            }
            let config = optimizer.config();
            let outcome = fit(&g, &dataset, &emb, &config)?;
            if let Some(path) = trace {
                let mut lines = String::new();
                for entry in &outcome.trace.entries {
                    lines.push_str(&serde_json::to_string(entry)?);
                    lines.push('\n');
                }
                write_file(&path, &lines)?;
            }
            let doc = export_json(&g, &outcome.embedding, None, None);
            write_file(&out, &pretty_json(&doc)?)?;
            if !outcome.trace.converged {
                return Err(CliError::IterationCap);
            }
            Ok(())
        }
        Command::Grow {
            input,
            lambda,
            mu,
            max_nodes,
            trial_iterations,
            epsilon_improve,
            optimizer,
            init,
            k_density,
            seed,
            jobs,
            log,
            out,
            csv,
        } => {
            configure_jobs(jobs)?;
            let dataset = load_csv(&input, &csv.options())?;
            let strategy = init_strategy(init, seed, k_density);
            let (graph0, emb0) = initialize(&dataset, &strategy)?;
            let graph0 = graph0.with_uniform_moduli(lambda, mu)?;
            let config = GrowthConfig {
                max_nodes,
                trial_iterations,
                min_energy_improvement: epsilon_improve,
                optimizer: optimizer.config(),
            };
            let (graph, emb, growth_log) = grow(&dataset, &graph0, &emb0, &config)?;
            if let Some(path) = log {
                let mut lines = String::new();
                for step in &growth_log.steps {
                    lines.push_str(&serde_json::to_string(step)?);
                    lines.push('\n');
                }
                write_file(&path, &lines)?;
            }
            let doc = export_json(&graph, &emb, None, None);
            write_file(&out, &pretty_json(&doc)?)?;
            Ok(())
        }
        Command::Hybrid {
            input,
            epochs,
            lambda,
            mu,
            r0,
            soften,
            max_nodes,
            max_nodes2,
            trial_iterations,
            ridge,
            init,
            k_density,
            seed,
            jobs,
            out_prefix,
            csv,
        } => {
            configure_jobs(jobs)?;
            let dataset = load_csv(&input, &csv.options())?;
            let strategy = init_strategy(init, seed, k_density);
            let epoch_list: Vec<EpochSpec> = match epochs {
                Some(path) => serde_json::from_str(&fs::read_to_string(&path)?)?,
                None => {
                    let r0 = r0.ok_or_else(|| {
                        CliError::Usage("--r0 is required unless --epochs is given".into())
                    })?;
                    hybrid_preset(
                        lambda,
                        mu,
                        r0,
                        soften,
                        max_nodes,
                        max_nodes2.unwrap_or(max_nodes),
                        trial_iterations,
                        ridge,
                    )
                }
            };
            // Epoch outputs are produced by re-running the prefix of the
            // epoch list; runs are deterministic, so states agree.
            let (_, _, logs) = run_epochs(&dataset, &epoch_list, &strategy)?;
            for upto in 1..=epoch_list.len() {
                let (graph, emb, _) = run_epochs(&dataset, &epoch_list[..upto], &strategy)?;
                let doc = export_json(&graph, &emb, None, None);
                write_file(
                    Path::new(&format!("{out_prefix}.epoch{upto}.json")),
                    &pretty_json(&doc)?,
                )?;
            }
            write_file(
                Path::new(&format!("{out_prefix}.log.json")),
                &pretty_json(&logs)?,
            )?;
            Ok(())
        }
        Command::Layout {
            graph,
            input,
            tolerance,
            max_rounds,
            svg,
            json,
            csv,
        } => {
            let (g, emb) = read_graph(&graph)?;
            let params = LayoutParams {
                harmonic_tolerance: tolerance,
                max_rounds,
            };
            let layout = metro_layout(&g, &emb, &params)?;
            let compositions = match input {
                Some(path) => {
                    let dataset = load_csv(&path, &csv.options())?;
                    let partition = build_partition(&dataset, &emb, f64::INFINITY)?;
                    Some(node_compositions(&dataset, &partition)?)
                }
                None => None,
            };
            if let Some(path) = svg {
                let text = export_svg(&layout, &g, compositions.as_ref(), &SvgStyle::default());
                write_file(&path, &text)?;
            }
            if let Some(path) = json {
                let doc = export_json(&g, &emb, Some(&layout), compositions.as_ref());
                write_file(&path, &pretty_json(&doc)?)?;
            }
            eprintln!(
                "layout residual {:.3e} (scale {:.6})",
                layout_residual(&g, &layout),
                layout.scale
            );
            Ok(())
        }
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
