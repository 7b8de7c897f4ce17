//! Command-line front end.

use crate::flow::{nonzero_mask, StructureMode, TraceRow};
use crate::init::candidate;
use crate::io::{
    iterate_table_csv, iterate_table_text, pseudospectrum_csv, write_report, GridSpec, MatrixSource,
};
use crate::outer::{solve_distance, DistanceReport, OuterOptions};
use crate::{CMatrix, Error, Mask, Result, C64};
use clap::{CommandFactory, Parser, ValueEnum};
use std::io::Write;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Complex,
    Real,
    PatternComplex,
    PatternReal,
}

impl ModeArg {
    pub fn structure(self, mask: Mask) -> StructureMode {
        match self {
            ModeArg::Complex => StructureMode::ComplexFull,
            ModeArg::Real => StructureMode::RealFull,
            ModeArg::PatternComplex => StructureMode::ComplexPattern(mask),
            ModeArg::PatternReal => StructureMode::RealPattern(mask),
        }
    }
}

/// Parses `re,im` (or a bare real number).
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| format!("invalid number '{t}'"))
    };
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re,im but got '{s}'")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "defectivity",
    version,
    about = "Distance of a matrix to the nearest defective matrix"
)]
pub struct Args {
    /// grcar[:N], example1, json:<rows>, real:<source>, or a Matrix Market file
    #[arg(long)]
    pub matrix: String,
    #[arg(long, value_enum, default_value = "complex")]
    pub mode: ModeArg,
    /// Target value of r = yᴴx at the returned ε
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Coalescence threshold and stopping tolerance
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// First ε (default: half the first-order coalescence estimate)
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub eps_lo: f64,
    /// Known upper bound for ε (default: none)
    #[arg(long)]
    pub eps_hi: Option<f64>,
    /// Starting eigenvalue as re,im; the nearest eigenvalue of A is used
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex, conflicts_with = "auto_target")]
    pub target: Option<C64>,
    /// Pick the starting eigenvalue from the first-order coalescence estimate (default)
    #[arg(long)]
    pub auto_target: bool,
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    /// Print the inner-flow trace of every outer iterate to stderr
    #[arg(long)]
    pub trace: bool,
    /// Print the iterate table as CSV (k,eps,r) on stdout; the summary goes to stderr
    #[arg(long)]
    pub iterate_table: bool,
    /// re0,re1,im0,im1,nx,ny[,eps...]: write σ_min(A − zI) samples as CSV and exit
    #[arg(long, allow_hyphen_values = true)]
    pub pseudospectrum_grid: Option<GridSpec>,
    /// Destination of the grid CSV (default: stdout)
    #[arg(long, requires = "pseudospectrum_grid")]
    pub grid_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.4)]
    pub sigma: f64,
    /// Split ratio of the bracket after a coalesced evaluation
    #[arg(long, default_value_t = 0.8)]
    pub theta: f64,
    /// Scale Puiseux steps by theta as well
    #[arg(long)]
    pub damp: bool,
    #[arg(long, default_value_t = 50)]
    pub max_outer: usize,
    #[arg(long, default_value_t = 20000)]
    pub max_inner_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start every inner flow from the gradient direction instead of the previous solution
    #[arg(long)]
    pub cold_start: bool,
}

/// Solver settings; `None` means "choose automatically".
#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub mode: StructureMode,
    pub delta: f64,
    pub tol: f64,
    pub eps0: Option<f64>,
    pub eps_lo: f64,
    pub eps_hi: Option<f64>,
    pub target: Option<C64>,
    pub sigma: f64,
    pub theta: f64,
    pub damp: bool,
    pub max_outer: usize,
    pub max_inner_steps: usize,
    pub trace: bool,
    pub seed: u64,
    pub warm_start: bool,
}

impl SolveConfig {
    pub fn new(mode: StructureMode) -> Self {
        let o = OuterOptions::default();
        SolveConfig {
            mode,
            delta: 1e-3,
            tol: 1e-6,
            eps0: None,
            eps_lo: 0.0,
            eps_hi: None,
            target: None,
            sigma: o.flow.sigma,
            theta: o.theta,
            damp: o.damp,
            max_outer: o.max_outer,
            max_inner_steps: o.flow.max_steps,
            trace: false,
            seed: o.flow.seed,
            warm_start: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be >= 0, got {}", self.delta));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if !(self.sigma > 1.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be > 1, got {}", self.sigma));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if self.max_outer == 0 || self.max_inner_steps == 0 {
            return bad("iteration limits must be positive".into());
        }
        Ok(())
    }

    pub fn outer_options(&self) -> OuterOptions {
        let mut o = OuterOptions {
            max_outer: self.max_outer,
            theta: self.theta,
            damp: self.damp,
            warm_start: self.warm_start,
            ..Default::default()
        };
        o.flow.sigma = self.sigma;
        o.flow.max_steps = self.max_inner_steps;
        o.flow.trace = self.trace;
        o.flow.seed = self.seed;
        o
    }
}

/// Fills in automatic settings and runs the solver.
///
/// The automatic target is the more sensitive eigenvalue of the first-order
/// coalescence candidate; the automatic `ε₀` is half the candidate's score.
pub fn solve_with_config(a: &CMatrix, cfg: &SolveConfig) -> Result<DistanceReport> {
    cfg.validate()?;
    let cand = if cfg.target.is_none() || cfg.eps0.is_none() {
        Some(candidate(a, &cfg.mode)?)
    } else {
        None
    };
    let target = cfg
        .target
        .or(cand.as_ref().map(|c| c.start()))
        .expect("candidate computed");
    let eps0 = cfg
        .eps0
        .or(cand.as_ref().map(|c| 0.5 * c.score))
        .expect("candidate computed");
    let eps_lo = cfg.eps_lo;
    let eps0 = if eps0 > eps_lo {
        eps0
    } else {
        2.0 * eps_lo.max(f64::MIN_POSITIVE)
    };
    log::info!("target {target:.9}, eps0 {eps0:.6e}");
    solve_distance(
        a,
        &cfg.mode,
        cfg.delta,
        cfg.tol,
        eps0,
        eps_lo,
        cfg.eps_hi.unwrap_or(f64::INFINITY),
        target,
        &cfg.outer_options(),
    )
}

fn init_logging() {
    let env = env_logger::Env::default().filter_or("DEFECTIVITY_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

fn usage_error(err: &dyn std::fmt::Display) -> i32 {
    eprintln!("error: {err}\n");
    eprintln!("{}", Args::command().render_help());
    1
}

fn print_trace(report: &DistanceReport) {
    eprintln!("k,step,t,h,r,rhs_norm,lambda_re,lambda_im");
    for it in &report.iterates {
        for TraceRow {
            step,
            t,
            h,
            r,
            rhs_norm,
            lambda,
        } in &it.flow.trace
        {
            eprintln!(
                "{},{step},{t:.6e},{h:.6e},{r:.15e},{rhs_norm:.6e},{:.15e},{:.15e}",
                it.k, lambda.re, lambda.im
            );
        }
    }
}

fn summary(report: &DistanceReport) -> String {
    let [l0, l1] = report.coalescing_lambdas;
    format!(
        "mode: {}\neps_delta_star: {:.15}\neps_zero_star: {:.15}\ngamma: {:.6}\ncoalescing eigenvalues: {:.12} {:+.12}i, {:.12} {:+.12}i\nouter iterations: {}\nwall time: {:.3} s\n",
        report.mode.name(),
        report.eps_delta_star,
        report.eps_zero_star_estimate,
        report.gamma,
        l0.re,
        l0.im,
        l1.re,
        l1.im,
        report.iterates.len(),
        report.wall_time.as_secs_f64()
    )
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.clone(),
            source,
        }),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

/// Runs the command line `argv` (program name first); returns the exit code:
/// `0` on success, `1` on usage or input errors, `2` when the solver fails.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let source: MatrixSource = match args.matrix.parse() {
        Ok(s) => s,
        Err(e) => return usage_error(&e),
    };
    let loaded = match source.load() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot load matrix '{source}': {e}");
            return 1;
        }
    };
    if let Some(grid) = &args.pseudospectrum_grid {
        if !grid.levels.is_empty() {
            log::info!("contour levels {:?}", grid.levels);
        }
        return match write_out(
            args.grid_out.as_ref(),
            &pseudospectrum_csv(&loaded.matrix, grid),
        ) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        };
    }
    let mask = if matches!(source, MatrixSource::MatrixMarketFile(_)) {
        loaded.mask
    } else {
        nonzero_mask(&loaded.matrix)
    };
    let cfg = SolveConfig {
        mode: args.mode.structure(mask),
        delta: args.delta,
        tol: args.tol,
        eps0: args.eps0,
        eps_lo: args.eps_lo,
        eps_hi: args.eps_hi,
        target: args.target,
        sigma: args.sigma,
        theta: args.theta,
        damp: args.damp,
        max_outer: args.max_outer,
        max_inner_steps: args.max_inner_steps,
        trace: args.trace,
        seed: args.seed,
        warm_start: !args.cold_start,
    };
    if let Err(e) = cfg
        .validate()
        .and_then(|_| cfg.mode.validate(&loaded.matrix))
    {
        return usage_error(&e);
    }
    let report = match solve_with_config(&loaded.matrix, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: solver failed: {e}");
            return 2;
        }
    };
    if args.trace {
        print_trace(&report);
    }
    if args.iterate_table {
        print!("{}", iterate_table_csv(&report));
        eprint!("{}", summary(&report));
    } else {
        print!("{}\n{}", iterate_table_text(&report), summary(&report));
    }
    if let Some(p) = &args.json_out {
        if let Err(e) = write_report(&report, p) {
            eprintln!("error: {e}");
            return 2;
        }
    }
    0
}
