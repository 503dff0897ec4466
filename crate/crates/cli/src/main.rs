//! `willmore`: generate meshes, evaluate and minimize circle-angle energies,
//! analyse edge graphs and diagnose realizations.
//!
//! Exit codes: 0 success, 2 input error, 3 degenerated, 4 stalled.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use willmore_core::diagnostics::{self, ReportOptions};
use willmore_core::energy::{angle_vector, energy, EnergyKind};
use willmore_core::mesh::{self, build_topology, TorusGrid, TriangleMesh};
use willmore_core::optimize::{
    fix_boundary_collar, minimize, write_trace_csv, OptimizationConfig, Status,
};
use willmore_core::qp::check_realizability;
use willmore_core::Vec3;

const EXIT_INPUT: u8 = 2;
const EXIT_DEGENERATED: u8 = 3;
const EXIT_STALLED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "willmore",
    version,
    about = "Circle-angle Willmore energies on triangle meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated mesh as OBJ.
    Generate(GenerateArgs),
    /// Evaluate energies of a mesh.
    Energy(EnergyArgs),
    /// Minimize an energy over vertex positions.
    Minimize(MinimizeArgs),
    /// Abstract angles, multiplier signs and cycle conditions of the edge graph.
    AnalyzeGraph(AnalyzeArgs),
    /// Sphere fit, convexity and Delaunay verdicts, torus radii.
    Diagnose(DiagnoseArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshKind {
    Tetra,
    Octa,
    Icosa,
    Torus,
    Ellipsoid,
    /// Random sphere hull followed by random edge flips.
    Flipped,
    /// Polar-grid disk with a bump, for fixed-boundary runs.
    Disk,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args)]
struct GenerateArgs {
    kind: MeshKind,
    /// Output OBJ path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Torus major radius.
    #[arg(long = "R", default_value_t = 2.0)]
    major: f64,
    /// Torus minor radius.
    #[arg(long = "r", default_value_t = 1.0)]
    minor: f64,
    /// Torus grid size around the axis.
    #[arg(long, default_value_t = 16)]
    m: usize,
    /// Torus grid size around the tube.
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Number of random points (ellipsoid, flipped).
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Ellipsoid semiaxes.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 2.0])]
    semiaxes: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random edge flips (flipped).
    #[arg(long, default_value_t = 40)]
    flips: usize,
    /// Disk rings.
    #[arg(long, default_value_t = 6)]
    rings: usize,
    /// Disk sectors.
    #[arg(long, default_value_t = 12)]
    sectors: usize,
    /// Disk bump height.
    #[arg(long, default_value_t = 0.3)]
    bump: f64,
}

#[derive(Args)]
struct EnergyArgs {
    mesh: PathBuf,
    /// W, W2 or W2w; all three when absent.
    #[arg(long)]
    functional: Option<EnergyKind>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the per-edge angles as CSV.
    #[arg(long)]
    angles: Option<PathBuf>,
}

#[derive(Args)]
struct MinimizeArgs {
    mesh: PathBuf,
    #[arg(long, default_value_t = EnergyKind::W2)]
    functional: EnergyKind,
    #[arg(long, default_value_t = 4000)]
    steps: usize,
    #[arg(long, default_value_t = 1e-10)]
    gtol: f64,
    #[arg(long, default_value_t = 8)]
    history: usize,
    /// Angle threshold for the W gradient.
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,
    /// Hold the boundary and its one-ring fixed.
    #[arg(long)]
    fix_boundary: bool,
    /// Optimized mesh OBJ path.
    #[arg(long)]
    out: PathBuf,
    /// Trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    trace_interval: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    mesh: PathBuf,
    /// Use the valence-weighted program.
    #[arg(long)]
    weighted: bool,
    /// csv prints the sorted angle table.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct DiagnoseArgs {
    mesh: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = diagnostics::INSCRIBED_TOLERANCE)]
    inscribed_tol: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Torus grid size around the axis; with --n enables the radii ratio.
    #[arg(long, requires = "n")]
    m: Option<usize>,
    #[arg(long, requires = "m")]
    n: Option<usize>,
}

impl GridArgs {
    fn grid(&self) -> Option<TorusGrid> {
        Some(TorusGrid {
            major: self.m?,
            minor: self.n?,
        })
    }
}

enum Failure {
    Input(String),
    Status(Status),
    /// Standard output was closed by the reader.
    Pipe,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            Failure::Pipe
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<willmore_core::Error> for Failure {
    fn from(e: willmore_core::Error) -> Self {
        match e {
            willmore_core::Error::Io(io) => io.into(),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(io::stdout(), $($arg)*)?
    };
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Energy(a) => energies(a),
        Command::Minimize(a) => run_minimize(a),
        Command::AnalyzeGraph(a) => analyze(a),
        Command::Diagnose(a) => diagnose(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Pipe) => ExitCode::SUCCESS,
        Err(Failure::Status(Status::Degenerated)) => ExitCode::from(EXIT_DEGENERATED),
        Err(Failure::Status(_)) => ExitCode::from(EXIT_STALLED),
    }
}

fn load(path: &Path) -> Result<TriangleMesh, Failure> {
    mesh::load_obj(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn json_line(value: &impl Serialize) -> CmdResult {
    outln!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn generate(a: GenerateArgs) -> CmdResult {
    let mesh = match a.kind {
        MeshKind::Tetra => mesh::tetrahedron(),
        MeshKind::Octa => mesh::octahedron(),
        MeshKind::Icosa => mesh::icosahedron(),
        MeshKind::Torus => mesh::torus(a.major, a.minor, a.m, a.n)?,
        MeshKind::Ellipsoid => {
            let s = Vec3::new(a.semiaxes[0], a.semiaxes[1], a.semiaxes[2]);
            eprintln!("seed: {}", a.seed);
            mesh::random_inscribed(a.count, s, a.seed)?
        }
        MeshKind::Flipped => {
            eprintln!("seed: {}", a.seed);
            mesh::random_flipped_triangulation(a.count, a.flips, a.seed)?
        }
        MeshKind::Disk => mesh::disk(a.rings, a.sectors, a.bump)?,
    };
    let topo = build_topology(&mesh)?;
    let counts = format!(
        "vertices: {}\nedges: {}\nfaces: {}",
        mesh.vertex_count(),
        topo.edges.len(),
        mesh.face_count()
    );
    match a.out {
        Some(path) => {
            mesh::write_obj(&mesh, create(&path)?)?;
            outln!("{counts}");
        }
        None => {
            mesh::write_obj(&mesh, io::stdout().lock())?;
            eprintln!("{counts}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EnergyRecord {
    kind: EnergyKind,
    value: f64,
    constant: Option<f64>,
    beta_min: Option<f64>,
    beta_max: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or("n/a".to_string(), |x| format!("{x:.12e}"))
}

fn energies(a: EnergyArgs) -> CmdResult {
    let mesh = load(&a.mesh)?;
    let topo = build_topology(&mesh)?;
    let angles = angle_vector(&mesh, &topo)?;
    let kinds: Vec<EnergyKind> = a
        .functional
        .map_or_else(|| EnergyKind::ALL.to_vec(), |k| vec![k]);
    let mut records = Vec::new();
    for kind in kinds {
        let e = energy(&mesh, &topo, kind)?;
        if kind != EnergyKind::W && e.constant.is_none() {
            eprintln!(
                "warning: mesh has boundary; {kind} is reported without its normalization constant"
            );
        }
        records.push(EnergyRecord {
            kind,
            value: e.value,
            constant: e.constant,
            beta_min: angles.min(),
            beta_max: angles.max(),
        });
    }
    match a.format {
        Format::Json => json_line(&records)?,
        Format::Csv => {
            outln!("kind,value,constant,beta_min,beta_max");
            for r in &records {
                let f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.17e}"));
                outln!(
                    "{},{:.17e},{},{},{}",
                    r.kind,
                    r.value,
                    f(r.constant),
                    f(r.beta_min),
                    f(r.beta_max)
                );
            }
        }
        Format::Text => {
            for r in &records {
                let c = r
                    .constant
                    .map_or("none".to_string(), |c| format!("{c:.12e}"));
                outln!("{}: {:.12e} (constant {c})", r.kind, r.value);
            }
            outln!("beta_min: {}", opt(angles.min()));
            outln!("beta_max: {}", opt(angles.max()));
        }
    }
    if let Some(path) = a.angles {
        angles.write_csv(&topo, create(&path)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct MinimizeRecord<'a> {
    status: Status,
    steps: usize,
    energy: f64,
    grad_norm: f64,
    collapsed_edges: &'a [[usize; 2]],
    diagnostics: &'a diagnostics::DiagnosticsReport,
}

fn run_minimize(a: MinimizeArgs) -> CmdResult {
    let mesh = load(&a.mesh)?;
    let topo = build_topology(&mesh)?;
    let mut config = OptimizationConfig::new(a.functional);
    config.max_steps = a.steps;
    config.gradient_tolerance = a.gtol;
    config.history = a.history;
    config.w_threshold = a.threshold;
    config.trace_interval = a.trace_interval;
    if a.fix_boundary {
        config.fixed = fix_boundary_collar(&topo)?;
    }
    let result = minimize(&mesh, &topo, None, &config)?;

    mesh::write_obj(&result.mesh, create(&a.out)?)?;
    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        write_trace_csv(&result.trace, &mut w)?;
        w.flush()?;
    }
    let opts = ReportOptions {
        torus_grid: a.grid.grid(),
        ..ReportOptions::default()
    };
    let report = diagnostics::report(&result.mesh, &topo, &opts);
    match a.format {
        Format::Json => json_line(&MinimizeRecord {
            status: result.status,
            steps: result.steps,
            energy: result.energy,
            grad_norm: result.grad_norm,
            collapsed_edges: &result.collapsed_edges,
            diagnostics: &report,
        })?,
        Format::Text | Format::Csv => {
            outln!("status: {}", result.status);
            outln!("steps: {}", result.steps);
            outln!("energy: {:.12e}", result.energy);
            outln!("grad_norm: {:.12e}", result.grad_norm);
            if !result.collapsed_edges.is_empty() {
                outln!("collapsed_edges: {:?}", result.collapsed_edges);
            }
            write!(io::stdout(), "{}", report.to_text())?;
        }
    }
    match result.status {
        Status::Converged | Status::StepLimit => Ok(()),
        s => Err(Failure::Status(s)),
    }
}

fn analyze(a: AnalyzeArgs) -> CmdResult {
    let mesh = load(&a.mesh)?;
    let topo = build_topology(&mesh)?;
    if !topo.is_closed() {
        return Err(Failure::Input("graph analysis needs a closed mesh".into()));
    }
    let report = check_realizability(&topo, a.weighted)
        .map_err(|e| Failure::Input(format!("unsupported mesh: {e}")))?;
    match a.format {
        Format::Json => json_line(&report)?,
        Format::Text => {
            write!(io::stdout(), "{}", report.to_text())?;
            outln!("sorted_angles_over_pi:");
            let mut col: Vec<f64> = report.angles.iter().map(|b| b / PI).collect();
            col.sort_by(f64::total_cmp);
            for v in col {
                outln!("  {v:.10}");
            }
        }
        Format::Csv => report.write_table_csv(io::stdout().lock(), None)?,
    }
    Ok(())
}

fn diagnose(a: DiagnoseArgs) -> CmdResult {
    let mesh = load(&a.mesh)?;
    let topo = build_topology(&mesh)?;
    let opts = ReportOptions {
        inscribed_tolerance: a.inscribed_tol,
        torus_grid: a.grid.grid(),
    };
    let report = diagnostics::report(&mesh, &topo, &opts);
    match a.format {
        Format::Json => json_line(&report)?,
        Format::Text => write!(io::stdout(), "{}", report.to_text())?,
        Format::Csv => {
            let text = report.to_text();
            let fields = text_pairs(&text);
            outln!(
                "{}",
                fields.iter().map(|f| f.0).collect::<Vec<_>>().join(",")
            );
            outln!(
                "{}",
                fields
                    .iter()
                    .map(|f| f.1.clone())
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
    }
    Ok(())
}

fn text_pairs(text: &str) -> Vec<(&str, String)> {
    text.lines()
        .filter_map(|l| l.split_once(": "))
        .filter(|(k, _)| *k != "error")
        .map(|(k, v)| (k, v.replace(' ', ";")))
        .collect()
}
