//! Command-line front end of the `sfo` binary.
//!
//! Exit codes: 0 on success, 1 when a computation or file fails, 2 on usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::geometry::Embedding;
use crate::io;
use crate::mesh::Mesh;
use crate::metric::{metric_from_embedding, validate_metric, DiscreteMetric};
use crate::operators::{
    lb_eigenbasis, mass_matrix, mesh_quality_report, stiffness_matrix, functional_map_from_point_map,
    FunctionalMap,
};
use crate::pipeline::{self, Shape, Synthesis};
use crate::solvers::{InitialStep, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sfo", version, about = "Shape synthesis from intrinsic operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find an embedding of the source mesh whose cotangent Laplacian matches a target.
    ShapeFromLaplacian(ShapeFromLaplacianArgs),
    /// Synthesize X such that the difference from C to X equals the one from A to B.
    Analogy(AnalogyArgs),
    /// Apply the A-to-B difference to B repeatedly.
    Exaggerate(ExaggerateArgs),
    /// Report negative cotangent weights, obtuse faces and triangle-inequality slack.
    Diagnose(DiagnoseArgs),
    /// Write the mass matrix, stiffness matrix or Laplace-Beltrami eigenpairs of a mesh.
    Operators(OperatorsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Outer alternations N.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub outer_iterations: u64,
    /// Metric descent steps per alternation.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub mfo_iterations: u64,
    /// SMACOF iterations per alternation.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub mds_iterations: u64,
    /// Initial descent step as a fraction of the mean edge length.
    #[arg(long, default_value_t = 1e-2, value_parser = positive)]
    pub initial_step: f64,
    #[arg(long, default_value_t = 40)]
    pub max_halvings: u32,
    /// Relative margin of the strong triangle inequality.
    #[arg(long, default_value_t = 1e-7, value_parser = non_negative)]
    pub rel_margin: f64,
    /// Stop when an alternation improves the energy by less than this fraction (0 disables).
    #[arg(long, default_value_t = 1e-8, value_parser = non_negative)]
    pub energy_tolerance: f64,
    /// Gaussian noise added to the starting embedding, in units of its bounding-box diagonal.
    #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
    pub perturb: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            outer_iterations: self.outer_iterations as usize,
            mfo_iterations: self.mfo_iterations as usize,
            mds_iterations: self.mds_iterations as usize,
            initial_step: InitialStep::RelativeToMeanEdge(self.initial_step),
            max_halvings: self.max_halvings,
            rel_margin: self.rel_margin,
            energy_tolerance: self.energy_tolerance,
        }
    }
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct MapArgs {
    /// Dense functional map (rows = vertices of the source mesh).
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// 0-based point map, one target index per source vertex.
    #[arg(long)]
    pub point_map: Option<PathBuf>,
    /// Identity map (the default).
    #[arg(long)]
    pub identity_map: bool,
}

#[derive(Debug, Args)]
pub struct ShapeFromLaplacianArgs {
    #[arg(long)]
    pub source: PathBuf,
    /// Dense stiffness matrix on the source vertices.
    #[arg(long)]
    pub target_stiffness: PathBuf,
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct AnalogyArgs {
    #[arg(long = "A")]
    pub a: PathBuf,
    #[arg(long = "B")]
    pub b: PathBuf,
    #[arg(long = "C")]
    pub c: PathBuf,
    /// Dense map from functions on A to functions on B (identity if absent).
    #[arg(long)]
    pub map_ab: Option<PathBuf>,
    /// Dense map from functions on A to functions on C (identity if absent).
    #[arg(long, conflicts_with = "identity_map")]
    pub map_cx: Option<PathBuf>,
    #[arg(long)]
    pub identity_map: bool,
    /// Weight of the area-based term, in [0, 1].
    #[arg(long, default_value_t = crate::energy::DEFAULT_LAMBDA, value_parser = unit_interval)]
    pub lambda: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ExaggerateArgs {
    #[arg(long = "A")]
    pub a: PathBuf,
    #[arg(long = "B")]
    pub b: PathBuf,
    /// Dense map from functions on A to functions on B (identity if absent).
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    #[arg(long, default_value_t = crate::energy::DEFAULT_LAMBDA, value_parser = unit_interval)]
    pub lambda: f64,
    /// Round k is written to `<prefix>_k.off`.
    #[arg(long)]
    pub out_prefix: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Edge lengths `i,j,length` to use instead of the embedding.
    #[arg(long)]
    pub metric: Option<PathBuf>,
    /// Also write the report as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-7, value_parser = non_negative)]
    pub rel_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Mass,
    Stiffness,
    Eigs,
}

#[derive(Debug, Args)]
pub struct OperatorsArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub metric: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub emit: Emit,
    /// Number of eigenpairs for `--emit eigs`.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is negative"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

/// Why a command stopped.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failure(e)
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failure(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn execute(command: &Command) -> CliResult {
    match command {
        Command::ShapeFromLaplacian(a) => shape_from_laplacian(a),
        Command::Analogy(a) => analogy(a),
        Command::Exaggerate(a) => exaggerate(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Operators(a) => operators(a),
    }
}

fn print_config(config: &SolverConfig) {
    println!("config: {config}");
}

fn read_map(path: Option<&Path>, rows: usize, cols: usize, what: &'static str) -> Result<FunctionalMap, CliError> {
    let Some(path) = path else {
        if rows != cols {
            return Err(CliError::Usage(format!(
                "{what}: identity map needs equal vertex counts, got {rows} and {cols}"
            )));
        }
        return Ok(FunctionalMap::identity(rows));
    };
    let m = io::read_dense_matrix(path)?;
    if m.shape() != (rows, cols) {
        return Err(Error::dims(what, format!("{rows}x{cols}"), format!("{}x{}", m.nrows(), m.ncols())).into());
    }
    Ok(FunctionalMap::new(m)?)
}

fn start_embedding(x: &Embedding, solver: &SolverArgs) -> Result<Embedding, CliError> {
    Ok(pipeline::perturb(x, solver.perturb, solver.seed)?)
}

fn write_synthesis(out: &Path, mesh: &Mesh, s: &Synthesis) -> CliResult {
    io::write_off(out, mesh, &s.outcome.embedding)?;
    let trace = io::sibling_path(out, ".trace.csv");
    io::write_trace_csv(&trace, &s.outcome.trace)?;
    println!("wrote {}", out.display());
    println!("wrote {}", trace.display());
    if let Some(eps) = &s.vertex_energy {
        let path = io::sibling_path(out, ".energy.csv");
        io::write_vertex_csv(&path, eps)?;
        println!("wrote {}", path.display());
    }
    let o = &s.outcome;
    println!(
        "energy: initial {:.6e} final {:.6e} ratio {:.6e} after {} alternations",
        o.initial_energy,
        o.final_energy,
        if o.initial_energy > 0.0 { o.final_energy / o.initial_energy } else { 0.0 },
        o.outer_iterations
    );
    Ok(())
}

fn shape_from_laplacian(args: &ShapeFromLaplacianArgs) -> CliResult {
    let config = args.solver.config();
    print_config(&config);
    let (mesh, x) = io::read_mesh(&args.source)?;
    let n = mesh.vertex_count();
    let w = io::read_dense_matrix(&args.target_stiffness)?;
    let f = if let Some(path) = &args.map.map {
        let m = io::read_dense_matrix(path)?;
        FunctionalMap::new(m)?
    } else if let Some(path) = &args.map.point_map {
        functional_map_from_point_map(&io::read_point_map(path, n)?, n, None)?
    } else {
        FunctionalMap::identity(n)
    };
    let start = start_embedding(&x, &args.solver)?;
    let s = pipeline::shape_from_laplacian(&mesh, &start, &w, &f, &config)?;
    write_synthesis(&args.out, &mesh, &s)
}

fn analogy(args: &AnalogyArgs) -> CliResult {
    let config = args.solver.config();
    print_config(&config);
    println!("lambda: {}", args.lambda);
    let (ma, xa) = io::read_mesh(&args.a)?;
    let (mb, xb) = io::read_mesh(&args.b)?;
    let (mc, xc) = io::read_mesh(&args.c)?;
    let f = read_map(args.map_ab.as_deref(), mb.vertex_count(), ma.vertex_count(), "map A->B")?;
    let g = read_map(args.map_cx.as_deref(), mc.vertex_count(), ma.vertex_count(), "map A->C")?;
    let start = start_embedding(&xc, &args.solver)?;
    let s = pipeline::analogy(
        Shape::new(&ma, &xa)?,
        Shape::new(&mb, &xb)?,
        Shape::new(&mc, &xc)?,
        &f,
        &g,
        args.lambda,
        &start,
        &config,
    )?;
    write_synthesis(&args.out, &mc, &s)
}

fn exaggerate(args: &ExaggerateArgs) -> CliResult {
    let config = args.solver.config();
    print_config(&config);
    println!("lambda: {}", args.lambda);
    let (ma, xa) = io::read_mesh(&args.a)?;
    let (mb, xb) = io::read_mesh(&args.b)?;
    let f = read_map(args.map.as_deref(), mb.vertex_count(), ma.vertex_count(), "map A->B")?;
    let start = start_embedding(&xb, &args.solver)?;
    let rounds = pipeline::exaggerate(
        Shape::new(&ma, &xa)?,
        Shape::new(&mb, &start)?,
        &f,
        args.rounds as usize,
        args.lambda,
        &config,
    )?;
    for (k, s) in rounds.iter().enumerate() {
        let out = io::sibling_path(&args.out_prefix, &format!("_{}.off", k + 1));
        write_synthesis(&out, &mb, s)?;
    }
    Ok(())
}

fn load_metric(mesh: &Mesh, x: &Embedding, path: Option<&Path>) -> Result<DiscreteMetric, CliError> {
    Ok(match path {
        Some(p) => io::read_edge_csv(p, mesh)?,
        None => metric_from_embedding(mesh, x)?,
    })
}

fn diagnose(args: &DiagnoseArgs) -> CliResult {
    let config = SolverConfig {
        rel_margin: args.rel_margin,
        ..SolverConfig::default()
    };
    print_config(&config);
    let (mesh, x) = io::read_mesh(&args.mesh)?;
    let metric = load_metric(&mesh, &x, args.metric.as_deref())?;
    println!(
        "mesh: {} vertices, {} edges, {} faces",
        mesh.vertex_count(),
        mesh.edge_count(),
        mesh.face_count()
    );
    let validity = validate_metric(&mesh, &metric, args.rel_margin);
    if !validity.valid {
        println!("metric: INVALID on {} faces", validity.violations.len());
        for (f, slack) in &validity.violations {
            println!("  face {f}: slack {slack:.6e}");
        }
        return Err(Error::InvalidMetric {
            face: validity.violations[0].0,
        }
        .into());
    }
    println!("metric: valid");
    let report = mesh_quality_report(&mesh, &metric)?;
    print!("{report}");
    println!("{}", if report.is_clear() { "all clear" } else { "issues found" });
    if let Some(path) = &args.csv {
        let mut csv = String::from("kind,index,value\n");
        for (e, w) in &report.negative_weight_edges {
            csv.push_str(&format!("negative_weight,{e},{w:.16e}\n"));
        }
        for f in &report.obtuse_faces {
            csv.push_str(&format!("obtuse_face,{f},\n"));
        }
        csv.push_str(&format!("min_slack,,{:.16e}\n", report.min_slack));
        csv.push_str(&format!("min_relative_slack,,{:.16e}\n", report.min_relative_slack));
        std::fs::write(path, csv).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn operators(args: &OperatorsArgs) -> CliResult {
    print_config(&SolverConfig::default());
    let (mesh, x) = io::read_mesh(&args.mesh)?;
    let n = mesh.vertex_count();
    let k = match (args.emit, args.k) {
        (Emit::Eigs, None) => return Err(CliError::Usage("--emit eigs needs --k".into())),
        (Emit::Eigs, Some(k)) if k == 0 || k > n => {
            return Err(CliError::Usage(format!("--k must be in 1..={n}, got {k}")))
        }
        (_, k) => k,
    };
    let metric = load_metric(&mesh, &x, args.metric.as_deref())?;
    match args.emit {
        Emit::Mass => io::write_vertex_csv(&args.out, mass_matrix(&mesh, &metric)?.diag())?,
        Emit::Stiffness => io::write_dense_matrix(&args.out, &stiffness_matrix(&mesh, &metric)?.to_dense())?,
        Emit::Eigs => {
            let basis = lb_eigenbasis(&mesh, &metric, k.expect("checked above"))?;
            io::write_dense_matrix(&args.out, &basis.vectors)?;
            let values = io::sibling_path(&args.out, ".values.csv");
            io::write_vertex_csv(&values, &basis.values)?;
            println!("wrote {}", values.display());
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults_match_solver_config() {
        let cli = Cli::try_parse_from(["sfo", "analogy", "--A", "a", "--B", "b", "--C", "c", "--out", "x"]).unwrap();
        let Command::Analogy(a) = cli.command else { panic!() };
        assert_eq!(a.lambda, 0.5);
        assert_eq!(a.solver.config(), SolverConfig::default());
    }

    #[test]
    fn usage_errors() {
        let bad_lambda = ["sfo", "analogy", "--A", "a", "--B", "b", "--C", "c", "--out", "x", "--lambda", "1.5"];
        assert_eq!(run(bad_lambda), EXIT_USAGE);
        assert_eq!(run(["sfo", "shape-from-laplacian", "--source", "a", "--target-stiffness", "w"]), EXIT_USAGE);
        assert_eq!(run(["sfo", "exaggerate", "--A", "a", "--B", "b", "--out-prefix", "x", "--rounds", "0"]), EXIT_USAGE);
        let two_maps = ["sfo", "shape-from-laplacian", "--source", "a", "--target-stiffness", "w", "--out", "x", "--identity-map", "--map", "m"];
        assert_eq!(run(two_maps), EXIT_USAGE);
    }

    #[test]
    fn missing_input_is_a_failure() {
        assert_eq!(run(["sfo", "diagnose", "--mesh", "/nonexistent/m.off"]), EXIT_FAILURE);
    }
}
