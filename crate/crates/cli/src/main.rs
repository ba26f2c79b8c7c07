mod commands;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loopviro::report::ResidualReport;
use loopviro::{GridParams, RunConfig};

#[derive(Parser)]
#[command(name = "loopviro", version, about = "Loop-group factorization, extended harmonic maps and half-Virasoro actions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration JSON; flags below override its fields.
    #[arg(long, global = true, env = "LOOPVIRO_CONFIG")]
    config: Option<PathBuf>,
    /// Residual report path (CSV, plus a `.json` sidecar); stdout when absent.
    #[arg(long, global = true, env = "LOOPVIRO_REPORT")]
    report: Option<PathBuf>,
    #[arg(long, global = true, env = "LOOPVIRO_SEED")]
    seed: Option<u64>,
    /// Inner radius ε of the spectral annulus.
    #[arg(long, global = true, env = "LOOPVIRO_EPS")]
    eps: Option<f64>,
    /// Samples per circle (power of two).
    #[arg(long, global = true, env = "LOOPVIRO_SAMPLES")]
    samples: Option<usize>,
    /// Nominal Laurent truncation order K.
    #[arg(long, global = true, env = "LOOPVIRO_TRUNC")]
    trunc: Option<usize>,
    #[arg(long, global = true, env = "LOOPVIRO_TOL_FACT")]
    tol_fact: Option<f64>,
    #[arg(long, global = true, env = "LOOPVIRO_TOL_PDE")]
    tol_pde: Option<f64>,
    #[arg(long, global = true, env = "LOOPVIRO_TOL_REALITY")]
    tol_reality: Option<f64>,
    #[arg(long, global = true, env = "LOOPVIRO_TOL_BRACKET")]
    tol_bracket: Option<f64>,
}

#[derive(Args, Clone, Copy)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y1: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Basepoint, real part (defaults to the centre node).
    #[arg(long, allow_hyphen_values = true, requires = "py")]
    px: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "px")]
    py: Option<f64>,
}

impl GridArgs {
    pub fn apply(&self, mut g: GridParams) -> GridParams {
        g.x0 = self.x0.unwrap_or(g.x0);
        g.x1 = self.x1.unwrap_or(g.x1);
        g.y0 = self.y0.unwrap_or(g.y0);
        g.y1 = self.y1.unwrap_or(g.y1);
        g.h = self.h.unwrap_or(g.h);
        if let (Some(x), Some(y)) = (self.px, self.py) {
            g.basepoint = Some([x, y]);
        }
        g
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Positive,
    Negative,
}

#[derive(Subcommand)]
enum Command {
    /// Build the extended solution of a uniton `f` on a grid.
    GenUniton {
        /// Rational function of z, e.g. "z", "(z^2 + 1)/(z - 3)".
        #[arg(long, default_value = "z")]
        f: String,
        /// Fix the uniton variant instead of selecting it by residual.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Residual checks of an extended solution.
    CheckExtended {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Two-circle Birkhoff factorization of a real pair (random when no input).
    Factorize {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Modes of the random input.
        #[arg(long, default_value_t = 6)]
        modes: usize,
    },
    /// Two-circle plus/minus split of a real algebra pair (random when no input).
    Project {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        modes: usize,
    },
    /// Push an extended solution through `λ -> λ + t v(λ)`.
    VirasoroFlow {
        /// Generator index: `v = λ^{j+1}`.
        #[arg(long, conflicts_with = "field")]
        j: Option<i32>,
        /// Vector field JSON `{powers, coeffs}` instead of a generator.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference check that brackets of generators act as brackets.
    BracketTest {
        #[arg(long)]
        j: i32,
        #[arg(long)]
        k: i32,
        /// Loop JSON in the normalized plus group; a random one when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = loopviro::virasoro::DEFAULT_BRACKET_STEP)]
        h: f64,
    },
    /// Cayley-transformed generators with their exact expansions.
    Mobius {
        /// Index or inclusive range, e.g. `1` or `-1..2`.
        #[arg(long, allow_hyphen_values = true)]
        j: String,
        #[arg(long, default_value_t = 12)]
        terms: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decoupled action of a real pair of fields at 0 and ∞.
    Schwarz {
        /// Field at 0 as `power:coeff` terms, e.g. `1:0.5,2:-0.25`.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        w: String,
        /// Field at ∞ in the same format.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        v: String,
        /// Loop JSON satisfying `E(λ) E(λ̄)^* = I`; a random one when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed-seed battery covering every module.
    Suite,
}

fn config(common: &Common) -> loopviro::Result<RunConfig> {
    let mut cfg: RunConfig = match &common.config {
        Some(p) => loopviro::io::read_json(p)?,
        None => RunConfig::default(),
    };
    let a = &mut cfg.annulus;
    if let Some(eps) = common.eps {
        a.eps = eps;
        a.delta = a.delta.min(eps);
    }
    a.samples = common.samples.unwrap_or(a.samples);
    a.order = common.trunc.unwrap_or(a.order);
    let t = &mut cfg.tolerances;
    t.factorization = common.tol_fact.unwrap_or(t.factorization);
    t.pde = common.tol_pde.unwrap_or(t.pde);
    t.reality = common.tol_reality.unwrap_or(t.reality);
    t.bracket = common.tol_bracket.unwrap_or(t.bracket);
    cfg.seed = common.seed.unwrap_or(cfg.seed);
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, argv: Vec<String>) -> loopviro::Result<ResidualReport> {
    let cfg = config(&cli.common)?;
    let mut report = ResidualReport::new(argv, &cfg);
    let ctx = commands::Ctx { cfg: &cfg };
    match &cli.command {
        Command::GenUniton { f, variant, grid, out } => commands::gen_uniton(&ctx, f, *variant, grid, out, &mut report)?,
        Command::CheckExtended { input } => commands::check_extended(&ctx, input, &mut report)?,
        Command::Factorize { input, out, n, modes } => {
            commands::factorize(&ctx, input.as_deref(), out.as_deref(), *n, *modes, &mut report)?
        }
        Command::Project { input, out, n, modes } => {
            commands::project(&ctx, input.as_deref(), out.as_deref(), *n, *modes, &mut report)?
        }
        Command::VirasoroFlow { j, field, t, input, out } => {
            commands::virasoro_flow(&ctx, *j, field.as_deref(), *t, input, out, &mut report)?
        }
        Command::BracketTest { j, k, input, h } => commands::bracket_test(&ctx, *j, *k, input.as_deref(), *h, &mut report)?,
        Command::Mobius { j, terms, out } => commands::mobius(&ctx, j, *terms, out.as_deref(), &mut report)?,
        Command::Schwarz { w, v, input, out } => {
            commands::schwarz(&ctx, w, v, input.as_deref(), out.as_deref(), &mut report)?
        }
        Command::Suite => suite::run(&ctx, &mut report)?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match run(&cli, argv) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    report.provenance.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let emitted = match &cli.common.report {
        Some(path) => report.emit(path),
        None => report.to_csv().map(|csv| print!("{csv}")),
    };
    if let Err(e) = emitted {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for f in report.failures() {
        eprintln!("FAIL {} = {:e} > {:e}", f.name, f.value, f.threshold);
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
