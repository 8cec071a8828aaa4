//! `ocs`: command-line driver for OCS node generation and the conditioning,
//! recovery, perturbation, Lebesgue and radii-optimization experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ocs_core::asymptotics::{asymptotics_report, GVariant};
use ocs_core::collocation::{build_elevation_matrix, build_slope_matrix};
use ocs_core::experiments::{
    run_condition_table, run_lebesgue_curve, run_perturbation_sweep, run_recovery_experiment,
    run_rotation_sweep, run_slope_condition_curve, PatternKind, DEFAULT_LEBESGUE_MAX_ORDER,
    DEFAULT_MAGNITUDES,
};
use ocs_core::lebesgue::{lagrange_basis, mesh_values, MeshSpec};
use ocs_core::optimizer::optimize_radii;
use ocs_core::output::{matrix_csv, mesh_csv, nodes_csv, nodes_json, records_csv, to_json};
use ocs_core::OcsError;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ocs",
    version,
    about = "Optimal concentric sampling on the unit disk"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Orders as a comma list; `a-b` denotes an inclusive range.
    #[arg(long = "orders", visible_alias = "order", global = true, value_parser = parse_orders)]
    orders: Option<OrderList>,

    /// Node layout(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pattern: Vec<PatternArg>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Debug)]
struct OrderList(Vec<u32>);

fn parse_orders(s: &str) -> Result<OrderList, String> {
    let mut orders = Vec::new();
    for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match token.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad order range '{token}'"))?;
                let b: u32 = b
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad order range '{token}'"))?;
                if b < a {
                    return Err(format!("empty order range '{token}'"));
                }
                orders.extend(a..=b);
            }
            None => orders.push(token.parse().map_err(|_| format!("bad order '{token}'"))?),
        }
    }
    if orders.is_empty() {
        return Err("no orders given".into());
    }
    Ok(OrderList(orders))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PatternArg {
    Ocs,
    Spiral,
    Carnicer,
}

impl From<PatternArg> for PatternKind {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Ocs => PatternKind::Ocs,
            PatternArg::Spiral => PatternKind::Spiral,
            PatternArg::Carnicer => PatternKind::Carnicer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Elevation,
    Slope,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Fitted,
    G1,
    G2,
}

impl From<VariantArg> for GVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Fitted => GVariant::Fitted,
            VariantArg::G1 => GVariant::G1,
            VariantArg::G2 => GVariant::G2,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Node coordinates of one pattern.
    Nodes {
        /// Also write the collocation matrix of this mode as CSV.
        #[arg(long, value_enum)]
        matrix: Option<ModeArg>,
        #[arg(long, requires = "matrix")]
        matrix_out: Option<PathBuf>,
    },
    /// Elevation-matrix condition numbers per order and pattern.
    CondTable,
    /// Coefficient recovery from exact samples of random expansions.
    Recover,
    /// Condition number under rotation of each ring.
    RotateSweep {
        #[arg(long, default_value_t = 16)]
        alphas: usize,
    },
    /// Condition number under random radius and node perturbations.
    PerturbSweep {
        /// Magnitudes, ascending (defaults to 0,1e-5,1e-4,1e-3,1e-2).
        #[arg(long, value_delimiter = ',')]
        magnitudes: Vec<f64>,
    },
    /// Slope-matrix condition numbers with the innermost node removed.
    SlopeCond,
    /// Lebesgue constants per order and a linear fit against the dimension.
    LebesgueCurve {
        /// Mesh density (points per unit order along each mesh axis).
        #[arg(long, default_value_t = 8.0)]
        density: f64,
        #[arg(long)]
        no_refine: bool,
        /// Write the Lebesgue function over the mesh of the last order as CSV.
        #[arg(long)]
        mesh_out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_LEBESGUE_MAX_ORDER)]
        max_order: u32,
    },
    /// Minimize the condition number over ring radii.
    Optimize {
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        /// Write the best-so-far trace as CSV.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// The asymptotic functional of a radial distribution.
    Asymptotics {
        #[arg(long, value_enum)]
        variant: VariantArg,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<OcsError> for Failure {
    fn from(e: OcsError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(msg) => format!("error: {msg}"),
            Failure::Numerical(msg) => format!("numerical failure: {msg}"),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl GlobalArgs {
    fn orders_or(&self, default: &[u32]) -> Vec<u32> {
        self.orders
            .as_ref()
            .map_or_else(|| default.to_vec(), |o| o.0.clone())
    }

    fn single_order(&self) -> CliResult<u32> {
        match self.orders.as_ref().map(|o| o.0.as_slice()) {
            Some([n]) => Ok(*n),
            Some(_) => Err(Failure::Config(
                "this command takes a single --order".into(),
            )),
            None => Err(Failure::Config("--order is required".into())),
        }
    }

    fn patterns_or(&self, default: &[PatternKind]) -> Vec<PatternKind> {
        if self.pattern.is_empty() {
            default.to_vec()
        } else {
            self.pattern.iter().map(|&p| p.into()).collect()
        }
    }

    fn single_pattern(&self) -> CliResult<PatternKind> {
        match self.pattern.as_slice() {
            [] => Ok(PatternKind::Ocs),
            [p] => Ok((*p).into()),
            _ => Err(Failure::Config(
                "this command takes a single --pattern".into(),
            )),
        }
    }

    fn trials_or(&self, default: usize) -> CliResult<usize> {
        match self.trials {
            Some(0) => Err(Failure::Config("--trials must be >= 1".into())),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    /// Serializes `records` as CSV or as a JSON array.
    fn emit_records<T: serde::Serialize>(&self, records: &[T]) -> CliResult<()> {
        let text = match self.format_or(Format::Csv) {
            Format::Csv => records_csv(records)?,
            Format::Json => to_json(records)?,
        };
        write_text(self.out.as_deref(), &text)
    }

    fn emit_document<T: serde::Serialize>(&self, doc: &T) -> CliResult<()> {
        if self.format == Some(Format::Csv) {
            return self.emit_records(std::slice::from_ref(doc));
        }
        write_text(self.out.as_deref(), &to_json(doc)?)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::Nodes { matrix, matrix_out } => {
            let n = g.single_order()?;
            let nodes = g.single_pattern()?.nodes(n)?;
            let text = match g.format_or(Format::Csv) {
                Format::Csv => nodes_csv(&nodes),
                Format::Json => nodes_json(&nodes)?,
            };
            write_text(g.out.as_deref(), &text)?;
            if let Some(mode) = matrix {
                let m = match mode {
                    ModeArg::Elevation => build_elevation_matrix(&nodes, n)?,
                    ModeArg::Slope => build_slope_matrix(&nodes.without_innermost(), n)?,
                };
                let path = matrix_out
                    .ok_or_else(|| Failure::Config("--matrix needs --matrix-out".into()))?;
                write_text(Some(&path), &matrix_csv(&m.entries))?;
            }
            Ok(())
        }
        Command::CondTable => {
            let orders = g.orders_or(&[10, 15, 20, 22, 27, 30]);
            let patterns = g.patterns_or(&[PatternKind::Ocs, PatternKind::Spiral]);
            g.emit_records(&run_condition_table(&orders, &patterns)?)
        }
        Command::Recover => {
            let orders = g.orders_or(&[30]);
            let pattern = g.single_pattern()?;
            let trials = g.trials_or(100)?;
            let stats = orders
                .iter()
                .map(|&n| run_recovery_experiment(n, trials, g.seed, pattern))
                .collect::<Result<Vec<_>, _>>()?;
            g.emit_records(&stats)
        }
        Command::RotateSweep { alphas } => {
            let mut rows = Vec::new();
            for n in g.orders_or(&[25, 30]) {
                rows.extend(run_rotation_sweep(n, alphas)?);
            }
            g.emit_records(&rows)
        }
        Command::PerturbSweep { magnitudes } => {
            let magnitudes = if magnitudes.is_empty() {
                DEFAULT_MAGNITUDES.to_vec()
            } else {
                magnitudes
            };
            let trials = g.trials_or(20)?;
            let mut rows = Vec::new();
            for n in g.orders_or(&[20]) {
                rows.extend(run_perturbation_sweep(n, &magnitudes, trials, g.seed)?);
            }
            g.emit_records(&rows)
        }
        Command::SlopeCond => {
            let orders = g.orders_or(&(1..=30).collect::<Vec<_>>());
            let patterns = g.patterns_or(&[PatternKind::Ocs, PatternKind::Spiral]);
            g.emit_records(&run_slope_condition_curve(&orders, &patterns)?)
        }
        Command::LebesgueCurve {
            density,
            no_refine,
            mesh_out,
            max_order,
        } => {
            let mesh = MeshSpec {
                refine: !no_refine,
                ..MeshSpec::with_density(density)
            };
            mesh.validate()?;
            let orders = g.orders_or(&(0..=25).collect::<Vec<_>>());
            let curve = run_lebesgue_curve(&orders, &mesh, max_order)?;
            if let Some(path) = mesh_out {
                let n = *orders.last().expect("orders are non-empty");
                if n < 1 {
                    return Err(Failure::Config("--mesh-out needs a last order >= 1".into()));
                }
                let basis = lagrange_basis(&PatternKind::Ocs.nodes(n)?, n)?;
                write_text(Some(&path), &mesh_csv(&mesh_values(&basis, &mesh)?))?;
            }
            match g.format_or(Format::Json) {
                Format::Json => write_text(g.out.as_deref(), &to_json(&curve)?),
                Format::Csv => g.emit_records(&curve.rows),
            }
        }
        Command::Optimize { budget, trace_out } => {
            let n = g.single_order()?;
            log::info!("optimizing n = {n} with budget {budget}");
            let result = optimize_radii(n, g.seed, budget)?;
            if let Some(path) = trace_out {
                write_text(Some(&path), &records_csv(&result.trace)?)?;
            }
            write_text(g.out.as_deref(), &to_json(&result)?)
        }
        Command::Asymptotics { variant } => g.emit_document(&asymptotics_report(variant.into())?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
