use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use subtrack_core::aco::{self, AcoConfig, RunHooks, Scope};
use subtrack_core::dataset::{self, Dataset, LoadOptions};
use subtrack_core::fixtures::{self, ThreeClustersSpec, TubeStickSpec};
use subtrack_core::projection::{self, ProjectionBasis, TrackballState};
use subtrack_core::protocol::Service;
use subtrack_core::quality::QualityMetric;
use subtrack_core::session::{DataSource, Session};
use subtrack_core::{server, subspace};

#[derive(Parser)]
#[command(name = "subtrack", version, about = "Explore high-dimensional data through 3-D subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a better view with the ant-colony optimizer.
    Optimize(OptimizeArgs),
    /// k-means subspace clustering.
    Cluster(ClusterArgs),
    /// Project a CSV through a basis file to 2-D coordinates.
    Project(ProjectArgs),
    /// Write a synthetic fixture as CSV.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the session service on a local TCP port.
    Serve(ServeArgs),
}

#[derive(Args)]
struct Input {
    /// CSV file with a header row.
    input: PathBuf,
    /// Column holding class labels (excluded from the attributes).
    #[arg(long)]
    class_column: Option<String>,
}

impl Input {
    fn load(&self) -> Result<Dataset> {
        let ds = dataset::load_csv(&self.input, &LoadOptions { class_column: self.class_column.clone() })
            .with_context(|| format!("loading {}", self.input.display()))?;
        for w in &ds.warnings {
            eprintln!("warning: {w}");
        }
        Ok(ds)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    WithinView,
    Narrow,
    Expanded,
    Global,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::WithinView => Scope::WithinView,
            ScopeArg::Narrow => Scope::Narrow,
            ScopeArg::Expanded => Scope::Expanded,
            ScopeArg::Global => Scope::Global,
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    input: Input,
    /// stress, distance_consistency, distribution_consistency, class_separation, holes or central_mass.
    #[arg(long, default_value = "holes")]
    metric: String,
    #[arg(long, value_enum, default_value = "global")]
    scope: ScopeArg,
    /// Starting view (basis or trackball state JSON); default is the first three axes.
    #[arg(long)]
    basis: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    levels_per_param: Option<usize>,
    #[arg(long)]
    ants: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    evaporation: Option<f64>,
    #[arg(long)]
    init_boost: Option<f64>,
    #[arg(long)]
    elite: Option<usize>,
    /// Directory for basis.json, score.txt and trace.tsv.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, short)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for assignments.csv and bases.json.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    input: Input,
    /// Basis or trackball state JSON.
    #[arg(long)]
    basis: PathBuf,
    /// Project mean-centred raw values instead of the normalized data.
    #[arg(long)]
    no_normalize: bool,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Hollow tube with a thin stick along its axis.
    TubeStick {
        #[arg(long, default_value_t = 900)]
        n_tube: usize,
        #[arg(long, default_value_t = 100)]
        n_stick: usize,
        #[arg(long, default_value_t = 6)]
        dims: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Embed along the first three axes without rotation.
        #[arg(long)]
        axis_aligned: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Three Gaussian clusters, each stretched along its own dimensions.
    ThreeClusters {
        #[arg(long, default_value_t = 300)]
        n_per: usize,
        #[arg(long, default_value_t = 12)]
        dims: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = server::PORT_ENV, default_value_t = server::DEFAULT_PORT)]
    port: u16,
    /// CSV to load at start-up.
    #[arg(long, conflicts_with = "session")]
    data: Option<PathBuf>,
    #[arg(long)]
    class_column: Option<String>,
    /// Session file to resume.
    #[arg(long)]
    session: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Cluster(a) => cluster(a),
        Command::Project(a) => project(a),
        Command::Gen(g) => gen(g),
        Command::Serve(a) => serve(a),
    }
}

fn read_state(path: &Path, dims: usize) -> Result<TrackballState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let state = match serde_json::from_str::<TrackballState>(&text) {
        Ok(s) => s,
        Err(_) => TrackballState::new(
            serde_json::from_str::<ProjectionBasis>(&text).with_context(|| format!("parsing basis {}", path.display()))?,
        ),
    };
    if state.dims() != dims {
        bail!("basis has {} dimensions, data has {dims}", state.dims());
    }
    if state.basis.orthonormality_error() > 1e-6 {
        bail!("basis axes are not orthonormal");
    }
    Ok(state)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let ds = a.input.load()?;
    let metric = QualityMetric::from_name(&a.metric).with_context(|| format!("unknown metric `{}`", a.metric))?;
    let d = AcoConfig::default();
    let cfg = AcoConfig {
        levels_per_param: a.levels_per_param.unwrap_or(d.levels_per_param),
        ants: a.ants.unwrap_or(d.ants),
        generations: a.generations.unwrap_or(d.generations),
        evaporation: a.evaporation.unwrap_or(d.evaporation),
        init_boost: a.init_boost.unwrap_or(d.init_boost),
        elite: a.elite.unwrap_or(d.elite),
        seed: a.seed,
        ..d
    };
    let state = match &a.basis {
        Some(p) => read_state(p, ds.n_dims())?,
        None => TrackballState::new(ProjectionBasis::axis_aligned(ds.n_dims())),
    };
    let ids: Vec<usize> = (0..ds.n_points()).collect();
    let labels = if metric.needs_labels() { ds.labels() } else { None };
    let out = aco::optimize_view(&state, &ds.normalized, &ids, labels, &metric, a.scope.into(), &cfg, RunHooks::default())?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("basis.json"), serde_json::to_string_pretty(&out.state.basis)?)?;
    fs::write(a.out.join("score.txt"), format!("{}\n", out.score))?;
    fs::write(a.out.join("trace.tsv"), aco::trace_text(&out.trace))?;
    eprintln!("{}: {} -> {}", metric.name(), out.incoming, out.score);
    Ok(())
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let ds = a.input.load()?;
    let ids: Vec<usize> = (0..ds.n_points()).collect();
    let clusters = subspace::kmeans_subspaces(&ds.normalized, &ids, a.k, a.seed)?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("assignments.csv"), subspace::assignments_csv(&clusters, ds.n_points()))?;
    fs::write(a.out.join("bases.json"), serde_json::to_string_pretty(&clusters)?)?;
    for c in &clusters {
        eprintln!("cluster {}: {} points", c.color_tag, c.member_ids.len());
    }
    Ok(())
}

fn project(a: ProjectArgs) -> Result<()> {
    let ds = a.input.load()?;
    let state = read_state(&a.basis, ds.n_dims())?;
    let points = if a.no_normalize {
        let n = ds.n_points() as f64;
        let mean: Vec<f64> = (0..ds.n_dims()).map(|k| ds.raw.iter().map(|r| r[k]).sum::<f64>() / n).collect();
        ds.raw.iter().map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect()).collect()
    } else {
        ds.normalized.clone()
    };
    let cloud = projection::project(&state, &points);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "x", "y"])?;
    for (i, p) in cloud.xy.iter().enumerate() {
        w.write_record([i.to_string(), p[0].to_string(), p[1].to_string()])?;
    }
    write_out(a.out.as_deref(), &String::from_utf8(w.into_inner()?)?)
}

fn dataset_csv(ds: &Dataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = ds.attributes.clone();
    if ds.class_column.is_some() {
        header.push("class".into());
    }
    w.write_record(&header)?;
    for (i, row) in ds.raw.iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(c) = &ds.class_column {
            rec.push(ds.class_names[c[i]].clone());
        }
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn gen(g: GenCommand) -> Result<()> {
    let (ds, out) = match g {
        GenCommand::TubeStick { n_tube, n_stick, dims, seed, axis_aligned, out } => {
            (fixtures::gen_tube_stick(&TubeStickSpec { n_tube, n_stick, dims, seed, axis_aligned })?.dataset, out)
        }
        GenCommand::ThreeClusters { n_per, dims, seed, out } => {
            (fixtures::gen_three_clusters(&ThreeClustersSpec { n_per, dims, seed, ..Default::default() })?, out)
        }
    };
    write_out(out.as_deref(), &dataset_csv(&ds)?)
}

fn serve(a: ServeArgs) -> Result<()> {
    let session = match (&a.data, &a.session) {
        (Some(p), _) => Some(Session::open(DataSource::Csv { path: p.clone(), class_column: a.class_column.clone() })?),
        (None, Some(p)) => Some(Session::load(p)?),
        (None, None) => None,
    };
    let listener = server::bind(a.port).with_context(|| format!("binding 127.0.0.1:{}", a.port))?;
    eprintln!("listening on {}", listener.local_addr()?);
    server::serve(listener, Service::new(session))?;
    Ok(())
}
