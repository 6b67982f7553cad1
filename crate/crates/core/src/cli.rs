//! Command-line front end.
//!
//! Exit codes: 0 success, 2 parse or argument error, 3 validation failure,
//! 4 size cap exceeded, 5 solver failure. `simulate` with bounds exits 0
//! whatever the verdict; the verdict is part of the report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{self, BoundsOptions, DEFAULT_MAX_CONFIGS, DEFAULT_MAX_VARS};
use crate::constraint::{parse_constraint_source, Constraint};
use crate::encoder::{parse_encoder, validate_encoder, BitStuffer, SampleArray, SeedRecord};
use crate::error::{Error, ErrorKind};
use crate::format::{bits_to_bytes, bytes_to_bits, AsciiArray};
use crate::lpsolve::Direction;
use crate::tune::{self, CoinParametrization, TuneOptions};

#[derive(Parser, Debug)]
#[command(name = "bitstuff", version, about = "Rate bounds and encoders for 2-D bit stuffing")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Machine,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an encoder against a constraint.
    Validate(ValidateArgs),
    /// Solve the stationarity LP for lp_min and lp_max.
    Bound(BoundArgs),
    /// Maximize lp_min over the coin probabilities of a parametrization.
    Optimize(OptimizeArgs),
    /// Estimate the encoder rate by sampling.
    Simulate(SimulateArgs),
    /// Encode a binary file into an array.
    Encode(EncodeArgs),
    /// Recover the bits carried by an encoded array.
    Decode(DecodeArgs),
    /// Write the stationarity LP in CPLEX LP format.
    ExportLp(ExportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ConstraintArgs {
    /// `builtin:<name>[:<param>]` or a constraint file.
    #[arg(long)]
    pub constraint: String,
    /// Extendability search margin (default: pattern diameter).
    #[arg(long)]
    pub margin: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct GeometryArgs {
    #[arg(long)]
    pub r: i64,
    #[arg(long)]
    pub s: i64,
    #[arg(long, default_value_t = 0)]
    pub t: i64,
    #[arg(long, default_value_t = DEFAULT_MAX_VARS)]
    pub max_vars: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_CONFIGS)]
    pub max_configs: u64,
}

impl GeometryArgs {
    fn options(&self) -> BoundsOptions {
        BoundsOptions { max_vars: self.max_vars, max_configs: self.max_configs, ..Default::default() }
    }
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub c: ConstraintArgs,
    #[arg(long)]
    pub encoder: PathBuf,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub c: ConstraintArgs,
    #[arg(long)]
    pub encoder: PathBuf,
    #[command(flatten)]
    pub g: GeometryArgs,
    /// Relaxation parameter k of the relaxed LP.
    #[arg(long)]
    pub relax: Option<u64>,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub c: ConstraintArgs,
    /// Coin parametrization file (starting point).
    #[arg(long)]
    pub coins: PathBuf,
    #[command(flatten)]
    pub g: GeometryArgs,
    #[arg(long, default_value_t = 500)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the optimized parametrization here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub c: ConstraintArgs,
    #[arg(long)]
    pub encoder: PathBuf,
    #[arg(long = "M", visible_alias = "m")]
    pub m: usize,
    #[arg(long = "N", visible_alias = "n")]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample the shifted-window arrays A^(k) instead.
    #[arg(long)]
    pub quasi_k: Option<usize>,
    /// Also compute LP bounds at this geometry and report a sandwich verdict.
    #[arg(long, requires = "s")]
    pub r: Option<i64>,
    #[arg(long, requires = "r")]
    pub s: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub t: i64,
    /// Verdict tolerance around [lp_min, lp_max].
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub c: ConstraintArgs,
    #[arg(long)]
    pub encoder: PathBuf,
    #[arg(long = "M", visible_alias = "m")]
    pub m: usize,
    #[arg(long = "N", visible_alias = "n")]
    pub n: usize,
    /// Raw binary input, most significant bit first.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub c: ConstraintArgs,
    #[arg(long)]
    pub encoder: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[command(flatten)]
    pub c: ConstraintArgs,
    #[arg(long)]
    pub encoder: PathBuf,
    #[command(flatten)]
    pub g: GeometryArgs,
    #[arg(long)]
    pub relax: Option<u64>,
    #[arg(long, value_enum, default_value_t = Sense::Min)]
    pub sense: Sense,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sense {
    Min,
    Max,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::new(ErrorKind::Parse, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, data: &[u8]) -> Result<(), Error> {
    fs::write(path, data).map_err(|e| Error::new(ErrorKind::Parse, format!("{}: {e}", path.display())))
}

fn load_constraint(a: &ConstraintArgs) -> Result<Constraint, Error> {
    let c = if a.constraint.starts_with("builtin:") {
        parse_constraint_source(&a.constraint)?
    } else {
        parse_constraint_source(&read(Path::new(&a.constraint))?)?
    };
    Ok(match a.margin {
        Some(m) => c.with_margin(m),
        None => c,
    })
}

fn load_encoder(c: &Constraint, path: &Path) -> Result<crate::encoder::EncoderSpec, Error> {
    Ok(parse_encoder(&read(path)?, c)?)
}

/// Runs one parsed command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), Error> {
    let machine = cli.format == Format::Machine;
    let w = |out: &mut dyn Write, s: String| out.write_all(s.as_bytes()).map_err(Error::from);
    match &cli.command {
        Command::Validate(a) => {
            let c = load_constraint(&a.c)?;
            let e = load_encoder(&c, &a.encoder)?;
            let rep = validate_encoder(&c, &e)?;
            if machine {
                w(out, format!("valid=1 contexts={} random_contexts={}\n", rep.contexts, rep.random_contexts))
            } else {
                w(out, format!("valid: {} contexts, {} with a random coin\n", rep.contexts, rep.random_contexts))
            }
        }
        Command::Bound(a) => {
            let c = load_constraint(&a.c)?;
            let e = load_encoder(&c, &a.encoder)?;
            let b = bounds::compute_bounds_with(&c, &e, a.g.r, a.g.s, a.g.t, a.relax, &a.g.options())?;
            w(out, if machine { format!("{}\n", b.machine_line()) } else { b.table() })
        }
        Command::Optimize(a) => {
            let c = load_constraint(&a.c)?;
            let p0 = CoinParametrization::parse(&read(&a.coins)?, c.alphabet())?;
            let opts = TuneOptions { budget: a.budget, seed: a.seed, bounds: a.g.options() };
            let res = tune::optimize_mu(&c, &p0, a.g.r, a.g.s, a.g.t, &opts)?;
            if let Some(path) = &a.output {
                write_file(path, res.parametrization.to_text().as_bytes())?;
            }
            let theta: Vec<String> =
                res.parametrization.theta.iter().map(|th| th.iter().map(|p| format!("{p:.8}")).collect::<Vec<_>>().join(",")).collect();
            if machine {
                w(
                    out,
                    format!(
                        "{} coins={} evaluations={} theta={}\n",
                        res.bounds.machine_line(),
                        res.parametrization.effective_coins(),
                        res.evaluations,
                        theta.join(";")
                    ),
                )
            } else {
                w(
                    out,
                    format!(
                        "{}coins          {}\nevaluations    {}{}\nstart lp_min   {:.8}\ntheta          {}\n",
                        res.bounds.table(),
                        res.parametrization.effective_coins(),
                        res.evaluations,
                        if res.budget_exhausted { " (budget exhausted)" } else { "" },
                        res.start_lp_min,
                        theta.join("  ")
                    ),
                )
            }
        }
        Command::Simulate(a) => {
            let c = load_constraint(&a.c)?;
            let e = load_encoder(&c, &a.encoder)?;
            let st = BitStuffer::new(&c, &e)?;
            let est = match a.quasi_k {
                Some(k) => st.empirical_rate_quasistationary(a.m, a.n, k, a.trials, a.seed)?,
                None => st.empirical_rate(a.m, a.n, a.trials, a.seed)?,
            };
            let verdict = match (a.r, a.s) {
                (Some(r), Some(s)) => {
                    let b = bounds::compute_bounds(&c, &e, r, s, a.t)?;
                    let pass = est.mean >= b.lp_min - a.epsilon && est.mean <= b.lp_max + a.epsilon;
                    Some((b, pass))
                }
                _ => None,
            };
            let mut text = if machine {
                format!(
                    "mean={:.16e} stderr={:.16e} per_interior_cell={:.16e} trials={}",
                    est.mean,
                    est.stderr,
                    est.per_interior_cell(),
                    est.trials
                )
            } else {
                format!(
                    "mean           {:.6}\nstderr         {:.6}\nper interior   {:.6}\ntrials         {}\n",
                    est.mean,
                    est.stderr,
                    est.per_interior_cell(),
                    est.trials
                )
            };
            if let Some((b, pass)) = verdict {
                let v = if pass { "PASS" } else { "FAIL" };
                if machine {
                    text.push_str(&format!(" {} verdict={v}", b.machine_line()));
                } else {
                    text.push_str(&format!(
                        "bounds         [{:.8}, {:.8}] ± {}\nverdict        {v}\n",
                        b.lp_min, b.lp_max, a.epsilon
                    ));
                }
            }
            if machine {
                text.push('\n');
            }
            w(out, text)
        }
        Command::Encode(a) => {
            let c = load_constraint(&a.c)?;
            let e = load_encoder(&c, &a.encoder)?;
            let st = BitStuffer::new(&c, &e)?;
            let bytes = fs::read(&a.input).map_err(|err| Error::new(ErrorKind::Parse, format!("{}: {err}", a.input.display())))?;
            let bits = bytes_to_bits(&bytes);
            let res = st.encode(a.m, a.n, &bits)?;
            let arr = AsciiArray { m: res.array.m, n: res.array.n, alphabet: c.alphabet(), values: res.array.values };
            write_file(&a.output, arr.to_text().as_bytes())?;
            if machine {
                w(out, format!("bits_consumed={} input_bits={} exhausted={}\n", res.bits_consumed, bits.len(), res.exhausted as u8))
            } else {
                w(
                    out,
                    format!(
                        "bits consumed  {} of {}{}\n",
                        res.bits_consumed,
                        bits.len(),
                        if res.exhausted { " (input exhausted; zero padding used)" } else { "" }
                    ),
                )
            }
        }
        Command::Decode(a) => {
            let c = load_constraint(&a.c)?;
            let e = load_encoder(&c, &a.encoder)?;
            let st = BitStuffer::new(&c, &e)?;
            let arr = AsciiArray::parse(&read(&a.input)?).map_err(|m| Error::new(ErrorKind::Parse, m))?;
            if arr.alphabet != c.alphabet() {
                return Err(Error::new(ErrorKind::Validation, format!("array alphabet {} differs from the constraint's {}", arr.alphabet, c.alphabet())));
            }
            let sample = SampleArray { m: arr.m, n: arr.n, values: arr.values, seed: SeedRecord { seed: 0, stream: 0 } };
            let bits = st.decode(&sample)?;
            write_file(&a.output, &bits_to_bytes(&bits))?;
            if machine {
                w(out, format!("bits_decoded={}\n", bits.len()))
            } else {
                w(out, format!("bits decoded   {} (written as {} bytes, zero padded)\n", bits.len(), bits.len().div_ceil(8)))
            }
        }
        Command::ExportLp(a) => {
            let c = load_constraint(&a.c)?;
            let e = load_encoder(&c, &a.encoder)?;
            let g = bounds::build_geometry(&e.psi, a.g.r, a.g.s, a.g.t)?;
            let lp = bounds::build_lp(&c, &e, &g, a.relax, &a.g.options())?;
            let dir = if a.sense == Sense::Min { Direction::Min } else { Direction::Max };
            write_file(&a.output, lp.problem.to_lp_format(dir).as_bytes())?;
            w(out, format!("vars={} cons={}\n", lp.problem.num_vars, lp.problem.num_constraints()))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ErrorKind::Parse.code() } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.kind.code()
        }
    }
}
