use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use halasz_core::dirichlet::{
    log_F_prime_sum, write_eval_csv, ComplexPoint, EvalResult, F_paired, F_partial_summation,
    F_truncated, TruncationPlan,
};
use halasz_core::extremal::{
    alpha_from_kappa, choose_blocks, verify_logf_lower, verify_psum, ExtremalSpec, KappaFunction,
    KappaSpec, LogLogGrid, DEFAULT_C0, DEFAULT_L2_BUDGET,
};
use halasz_core::halasz::{
    criterion_report, lemma_defect, theorem1_ratio, theorem2_ratio, write_lemma_csv,
    write_theorem1_csv, write_theorem2_csv, HalaszDirection,
};
use halasz_core::multfun::{parse_function_spec, summatory_trace, CheckpointGrid};
use halasz_core::primes::{sieve_primes, spf_table};
use halasz_core::{LabError, MultiplicativeFunction};

#[derive(Parser)]
#[command(name = "halasz", version, about = "Multiplicative function laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summatory function S_f(x) at checkpoints
    Sum(SumArgs),
    /// F(s) or log F(s) along a sigma grid
    EvalF(EvalArgs),
    /// Pole/zero criterion report
    Criterion(CriterionArgs),
    /// Lemma defect along a sigma grid
    Lemma(DirectionArgs),
    /// |F(sigma + i t0)|^eps0 / (sigma - 1) along a sigma grid
    Thm1(DirectionArgs),
    /// |S_f(x)| log x / (x exp(c sqrt(log log x))) at checkpoints
    Thm2(Thm2Args),
    /// Build an extremal function spec
    ExtremalBuild(BuildArgs),
    /// Check an extremal spec against primes up to a cutoff
    ExtremalVerify(VerifyArgs),
}

#[derive(Args)]
struct SumArgs {
    #[arg(long)]
    function: String,
    #[arg(long, default_value_t = 1_000_000)]
    limit: u64,
    /// geometric[:ratio], dense or explicit:a,b,...
    #[arg(long, default_value = "geometric")]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalMethod {
    Paired,
    Truncated,
    PartialSummation,
    EulerProduct,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    function: String,
    /// start:end:count[:geometric|linear]
    #[arg(long)]
    sigma: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, value_enum, default_value = "paired")]
    method: EvalMethod,
    /// Report log F (sum of local logs) instead of F
    #[arg(long)]
    log: bool,
    /// Series length for truncated and partial-summation evaluation
    #[arg(long, default_value_t = 1_000_000)]
    limit: u64,
    #[arg(long, default_value_t = 1_000_000)]
    prime_cutoff: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CriterionArgs {
    #[arg(long)]
    function: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 1_000_000)]
    cutoff: u64,
    #[arg(long, default_value_t = 30)]
    max_k: u32,
    /// Also write the partial sums as CSV
    #[arg(long)]
    sum_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DirectionArgs {
    #[arg(long)]
    function: String,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: i8,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    /// start:end:count[:geometric|linear]
    #[arg(long)]
    sigma: String,
    #[arg(long, default_value_t = 1_000_000)]
    prime_cutoff: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Thm2Args {
    #[arg(long)]
    function: String,
    #[arg(long, default_value_t = 1_000_000)]
    limit: u64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value = "geometric")]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// const:<c>, power:<e> or loglog-fraction:<c>
    #[arg(long)]
    kappa: String,
    #[arg(long, default_value_t = 20.0)]
    x1: f64,
    #[arg(long = "J", default_value_t = 3)]
    j: usize,
    #[arg(long = "C0", default_value_t = DEFAULT_C0)]
    c0: f64,
    #[arg(long, default_value_t = DEFAULT_L2_BUDGET)]
    budget: f64,
    /// Cap on log log X for the kappa supremum
    #[arg(long, default_value_t = 40.0)]
    loglog_cap: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    cutoff: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with an exit code; library errors keep their kind prefix.
struct Failure {
    kind: String,
    message: String,
    code: u8,
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let code = match e {
            LabError::Capacity { .. } | LabError::Coverage { .. } | LabError::BlockOverflow { .. } => 3,
            LabError::Io(_) | LabError::SingularFactor { .. } | LabError::ClassViolation { .. } => 1,
            _ => 2,
        };
        Failure {
            kind: e.kind().to_string(),
            message: e.to_string(),
            code,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        LabError::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        kind: "usage".into(),
        message: message.into(),
        code: 2,
    }
}

type Outcome = Result<(), Failure>;

#[derive(Debug, Clone, Copy, PartialEq)]
struct SigmaGrid {
    start: f64,
    end: f64,
    count: usize,
    geometric: bool,
}

impl FromStr for SigmaGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("bad sigma grid `{s}`; expected start:end:count[:geometric|linear]");
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let start: f64 = parts[0].parse().map_err(|_| bad())?;
        let end: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        let geometric = match parts.get(3) {
            None | Some(&"geometric") => true,
            Some(&"linear") => false,
            _ => return Err(bad()),
        };
        if count == 0 || !(start > 1.0 && end >= start && end.is_finite()) {
            return Err(format!("sigma grid `{s}` needs 1 < start <= end and count >= 1"));
        }
        Ok(SigmaGrid {
            start,
            end,
            count,
            geometric,
        })
    }
}

impl SigmaGrid {
    /// Geometric spacing is in `sigma - 1`, which clusters points near the line.
    fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let w = i as f64 / n;
                if i + 1 == self.count {
                    self.end
                } else if self.geometric {
                    1.0 + (self.start - 1.0) * ((self.end - 1.0) / (self.start - 1.0)).powf(w)
                } else {
                    self.start + (self.end - self.start) * w
                }
            })
            .collect()
    }

    fn normalized(&self) -> String {
        format!(
            "{}:{}:{}:{}",
            self.start,
            self.end,
            self.count,
            if self.geometric { "geometric" } else { "linear" }
        )
    }
}

fn sigma_grid(s: &str) -> Result<SigmaGrid, Failure> {
    s.parse().map_err(usage)
}

fn function(spec: &str) -> Result<MultiplicativeFunction, Failure> {
    Ok(parse_function_spec(spec)?)
}

fn direction(epsilon: i8, t0: f64) -> Result<HalaszDirection, Failure> {
    Ok(HalaszDirection::new(epsilon, t0)?)
}

fn checkpoint_grid(s: &str) -> Result<CheckpointGrid, Failure> {
    Ok(s.parse()?)
}

fn normalize_grid(g: &CheckpointGrid) -> String {
    match g {
        CheckpointGrid::Geometric { ratio } => format!("geometric:{ratio}"),
        CheckpointGrid::Dense => "dense".into(),
        CheckpointGrid::Explicit(xs) => format!(
            "explicit:{}",
            xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
        ),
    }
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&PathBuf>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| LabError::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run_sum(a: SumArgs) -> Outcome {
    let f = function(&a.function)?;
    let grid = checkpoint_grid(&a.grid)?;
    let trace = summatory_trace(&f, a.limit, &grid)?;
    let prov = format!(
        "halasz sum --function {} --limit {} --grid {}",
        a.function,
        a.limit,
        normalize_grid(&grid)
    );
    emit(a.out.as_ref(), |w| trace.write_csv(w, Some(&prov)))
}

fn run_eval(a: EvalArgs) -> Outcome {
    let f = function(&a.function)?;
    let grid = sigma_grid(&a.sigma)?;
    let method = a.method.to_possible_value().unwrap().get_name().to_string();
    let prov = format!(
        "halasz eval-f --function {} --sigma {} --t {} --method {method}{} --limit {} --prime-cutoff {}",
        a.function,
        grid.normalized(),
        a.t,
        if a.log { " --log" } else { "" },
        a.limit,
        a.prime_cutoff
    );
    let points: Vec<ComplexPoint> = grid
        .points()
        .into_iter()
        .map(|s| ComplexPoint::new(s, a.t))
        .collect::<Result<_, _>>()?;
    let rows: Vec<(ComplexPoint, EvalResult)> = if a.log {
        let table = sieve_primes(a.prime_cutoff)?;
        let plan = TruncationPlan::new(2, a.prime_cutoff, a.prime_cutoff.min(1 << 16))?;
        points
            .iter()
            .map(|&pt| Ok((pt, log_F_prime_sum(&f, pt, &plan, &table)?.log_f())))
            .collect::<Result<_, LabError>>()?
    } else {
        match a.method {
            EvalMethod::Paired => {
                let table = sieve_primes(a.prime_cutoff)?;
                points
                    .iter()
                    .map(|&pt| Ok((pt, F_paired(&f, pt, a.prime_cutoff, &table, None)?)))
                    .collect::<Result<_, LabError>>()?
            }
            EvalMethod::EulerProduct => {
                let table = sieve_primes(a.prime_cutoff)?;
                let plan = TruncationPlan::new(2, a.prime_cutoff, a.prime_cutoff.min(1 << 16))?;
                points
                    .iter()
                    .map(|&pt| {
                        let r = log_F_prime_sum(&f, pt, &plan, &table)?.log_f().exp();
                        Ok((pt, r))
                    })
                    .collect::<Result<_, LabError>>()?
            }
            EvalMethod::Truncated => {
                let spf = spf_table(a.limit)?;
                let plan = TruncationPlan::new(a.limit.max(2), 2, 2)?;
                points
                    .iter()
                    .map(|&pt| Ok((pt, F_truncated(&f, pt, &plan, &spf)?)))
                    .collect::<Result<_, LabError>>()?
            }
            EvalMethod::PartialSummation => {
                let trace = summatory_trace(&f, a.limit, &CheckpointGrid::Dense)?;
                points
                    .iter()
                    .map(|&pt| Ok((pt, F_partial_summation(&trace, pt, a.limit as f64)?)))
                    .collect::<Result<_, LabError>>()?
            }
        }
    };
    emit(a.out.as_ref(), |w| write_eval_csv(w, &rows, Some(&prov)))
}

fn run_criterion(a: CriterionArgs) -> Outcome {
    let f = function(&a.function)?;
    let table = sieve_primes(a.cutoff.max(2))?;
    let report = criterion_report(&f, a.t, a.cutoff, a.max_k, &table)?;
    let prov = format!(
        "halasz criterion --function {} --t {} --cutoff {} --max-k {}",
        a.function, a.t, a.cutoff, a.max_k
    );
    if let Some(path) = a.sum_out.as_ref() {
        emit(Some(path), |w| report.sum.write_csv(w, Some(&prov)))?;
    }
    emit(a.out.as_ref(), |w| write!(w, "# {prov}\n{report}"))
}

fn run_lemma(a: DirectionArgs) -> Outcome {
    let f = function(&a.function)?;
    let dir = direction(a.epsilon, a.t0)?;
    let grid = sigma_grid(&a.sigma)?;
    let table = sieve_primes(a.prime_cutoff)?;
    let rows = grid
        .points()
        .into_iter()
        .map(|s| lemma_defect(&f, dir, ComplexPoint::new(s, a.t0)?, a.prime_cutoff, &table))
        .collect::<Result<Vec<_>, _>>()?;
    let prov = format!(
        "halasz lemma --function {} --epsilon {} --t0 {} --sigma {} --prime-cutoff {}",
        a.function,
        a.epsilon,
        a.t0,
        grid.normalized(),
        a.prime_cutoff
    );
    emit(a.out.as_ref(), |w| write_lemma_csv(w, &rows, Some(&prov)))
}

fn run_thm1(a: DirectionArgs) -> Outcome {
    let f = function(&a.function)?;
    let dir = direction(a.epsilon, a.t0)?;
    let grid = sigma_grid(&a.sigma)?;
    let table = sieve_primes(a.prime_cutoff)?;
    let rows = theorem1_ratio(&f, dir, &grid.points(), a.prime_cutoff, &table)?;
    let prov = format!(
        "halasz thm1 --function {} --epsilon {} --t0 {} --sigma {} --prime-cutoff {}",
        a.function,
        a.epsilon,
        a.t0,
        grid.normalized(),
        a.prime_cutoff
    );
    emit(a.out.as_ref(), |w| write_theorem1_csv(w, a.t0, &rows, Some(&prov)))
}

fn run_thm2(a: Thm2Args) -> Outcome {
    if a.limit < 16 {
        return Err(usage(format!("thm2 needs --limit >= 16, got {}", a.limit)));
    }
    let f = function(&a.function)?;
    let grid = checkpoint_grid(&a.grid)?;
    let trace = summatory_trace(&f, a.limit, &grid)?;
    let rows = theorem2_ratio(&trace, a.c);
    let prov = format!(
        "halasz thm2 --function {} --limit {} --c {} --grid {}",
        a.function,
        a.limit,
        a.c,
        normalize_grid(&grid)
    );
    emit(a.out.as_ref(), |w| write_theorem2_csv(w, &rows, Some(&prov)))
}

fn run_build(a: BuildArgs) -> Outcome {
    let kappa: KappaSpec = a.kappa.parse()?;
    let grid = LogLogGrid {
        v_max: a.loglog_cap,
        ..LogLogGrid::default()
    };
    let k = KappaFunction::from_spec(kappa, grid)?;
    let alpha = alpha_from_kappa(&k, a.c0)?;
    let spec = choose_blocks(&alpha, a.j, a.x1, a.budget, Some(kappa))?;
    emit(a.out.as_ref(), |w| writeln!(w, "{}", spec.to_json()))
}

fn run_verify(a: VerifyArgs) -> Outcome {
    let spec = ExtremalSpec::load(&a.spec)?;
    let table = sieve_primes(a.cutoff)?;
    let psum = verify_psum(&spec, a.cutoff, &table)?;
    let mut lower = Vec::new();
    for (i, b) in spec.blocks.iter().enumerate() {
        if b.log_upper.exp() <= a.cutoff as f64 {
            lower.push(verify_logf_lower(&spec, i + 1, a.cutoff, &table)?);
        }
    }
    let prov = format!(
        "halasz extremal-verify {} --cutoff {}",
        a.spec.display(),
        a.cutoff
    );
    let ok = psum.passes() && lower.iter().all(|r| r.selection_holds());
    emit(a.out.as_ref(), |w| {
        writeln!(w, "# {prov}")?;
        writeln!(w, "spec: extremal:{}", spec.hash())?;
        writeln!(w, "kappa_sup_truncated_at_loglog: {}", spec.kappa_desc.grid.v_max)?;
        write!(w, "{psum}")?;
        let skipped = spec.blocks.len() - lower.len();
        for r in &lower {
            writeln!(w)?;
            write!(w, "{r}")?;
        }
        if skipped > 0 {
            writeln!(w)?;
            writeln!(w, "blocks_beyond_cutoff: {skipped}")?;
        }
        writeln!(w)?;
        writeln!(w, "overall: {}", if ok { "pass" } else { "fail" })
    })?;
    if ok {
        Ok(())
    } else {
        Err(Failure {
            kind: "verification".into(),
            message: "extremal checks failed; see report".into(),
            code: 1,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let text = e.to_string();
                let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
                eprintln!("error:usage: {first}");
                eprintln!("{}", e.render().to_string().lines().skip(1).collect::<Vec<_>>().join("\n"));
                return ExitCode::from(2);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Sum(a) => run_sum(a),
        Command::EvalF(a) => run_eval(a),
        Command::Criterion(a) => run_criterion(a),
        Command::Lemma(a) => run_lemma(a),
        Command::Thm1(a) => run_thm1(a),
        Command::Thm2(a) => run_thm2(a),
        Command::ExtremalBuild(a) => run_build(a),
        Command::ExtremalVerify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error:{}: {}", f.kind, f.message);
            ExitCode::from(f.code)
        }
    }
}
