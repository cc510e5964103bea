use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use symjet::cplx::{self, C64};
use symjet::factor::{factor_sp, word_of_factors};
use symjet::interpolation::{
    finite_jet_interpolate, interpolation_report, multi_point_stage, tame_normalizer, InterpolationJob,
    InterpolationReport, MultiPointJob,
};
use symjet::linalg;
use symjet::shear::{word_jacobian, word_jet, word_verify, VerifyRequest, Word};
use symjet::symplectic::SympMatrix;
use symjet::tame::{a_partial, projection_audit, shell_constants, unavoidable_set, ShellRequest};
use symjet::{Config, Error, ErrorKind};

#[derive(Parser)]
#[command(name = "symjet", version, about = "Symplectic shears, jet interpolation and tame sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON input file; `-` or absent reads stdin.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// JSON output file; absent writes stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_degree: Option<usize>,
    /// Print a short plain-text summary to stderr as well.
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Factor a symplectic matrix into elementary factors and transvections.
    Factor,
    /// Interpolate a jet with flat points, fixpoints and a region.
    Interp,
    /// Run stacked interpolation stages on lattice points of the diagonal.
    MultiInterp {
        #[arg(long)]
        stages: Option<usize>,
    },
    /// Three shears sending jΔ to prescribed points of the diagonal.
    TameNormalize,
    /// Re-check a word against a job or a verification request.
    Verify,
    /// Generate the shell set and its covering certificate.
    Unavoidable,
    /// Audit the projection bound and the shell constants.
    Lemmas,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Factor => "factor",
            Command::Interp => "interp",
            Command::MultiInterp { .. } => "multi-interp",
            Command::TameNormalize => "tame-normalize",
            Command::Verify => "verify",
            Command::Unavoidable => "unavoidable",
            Command::Lemmas => "lemmas",
        }
    }

    fn randomized(self) -> bool {
        !matches!(self, Command::TameNormalize | Command::Verify)
    }
}

enum Failure {
    Lib(Error),
    Schema(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Schema(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Schema(e.to_string())
    }
}

type Out = Result<Value, Failure>;

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(fs::read_to_string(p)?),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Failure> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Deserialize)]
struct FactorInput {
    matrix: Vec<Vec<C64>>,
}

fn run_factor(text: &str, seed: u64, cfg: &Config) -> Out {
    let input: FactorInput = parse(text)?;
    let m = linalg::from_rows(&input.matrix)?;
    let scale = 1.0 + linalg::max_abs(&m);
    let sm = SympMatrix::new(m.clone(), 1e-9 * scale * scale)?;
    let n = sm.half_dim();
    let fw = factor_sp(&sm, seed, cfg)?;
    let product = fw.product(n)?;
    let residual = linalg::max_abs(&(&product - &m)) / scale;
    let shears = word_of_factors(&fw, n);
    let linear = word_jacobian(&shears, &vec![cplx::ZERO; 2 * n])?;
    let linear_residual = linalg::max_abs(&(&linear - &m));
    Ok(json!({
        "word": fw,
        "shear_word": shears,
        "report": {
            "factors": fw.len(),
            "reconstruction_residual": residual,
            "shear_linear_residual": linear_residual,
        },
    }))
}

/// Thresholds an interpolation result must meet.
fn report_passes(rep: &InterpolationReport, job: &InterpolationJob) -> bool {
    rep.jet_residual < 1e-6
        && rep.image_residual < 1e-6
        && rep.flat_residuals.iter().all(|x| *x < 1e-8)
        && rep.fixpoint_residuals.iter().all(|x| *x < 1e-9)
        && rep.region_sup <= job.eps
}

fn run_interp(text: &str, seed: u64, cfg: &Config) -> Out {
    let mut job: InterpolationJob = parse(text)?;
    job.seed = seed;
    let word = finite_jet_interpolate(&job, cfg)?;
    let report = interpolation_report(&word, &job)?;
    let passed = report_passes(&report, &job);
    Ok(json!({ "job": job, "word": word, "report": report, "passed": passed }))
}

fn run_multi(text: &str, seed: u64, stages: Option<usize>, cfg: &Config) -> Out {
    let mut job: MultiPointJob = parse(text)?;
    job.seed = seed;
    let stages = stages.unwrap_or(job.jobs.len());
    let res = multi_point_stage(&job, stages, cfg)?;
    let passed = res.stages.iter().all(|s| {
        s.jet_residuals.iter().all(|x| *x < 1e-6) && s.lattice_residuals.iter().all(|(_, x)| *x < 1e-9)
    });
    Ok(json!({ "stages_run": stages, "result": res, "passed": passed }))
}

#[derive(Deserialize)]
struct NormalizeInput {
    targets: Vec<Vec<C64>>,
    orders: Vec<u32>,
}

#[derive(Serialize)]
struct PointCheck {
    j: usize,
    map_residual: f64,
    translation_residual: f64,
}

fn run_normalize(text: &str, cfg: &Config) -> Out {
    let input: NormalizeInput = parse(text)?;
    let word = tame_normalizer(&input.targets, &input.orders, cfg)?;
    let dim = input.targets.first().map_or(0, Vec::len);
    let delta = cplx::delta(dim);
    let mut checks = Vec::with_capacity(input.targets.len());
    for (i, (t, m)) in input.targets.iter().zip(&input.orders).enumerate() {
        let x = cplx::scale(&delta, cplx::re((i + 1) as f64));
        let jet = word_jet(&word, &x, *m as usize)?;
        let translation_residual = (1..=*m as usize)
            .map(|d| jet.deviation_from_identity(d))
            .fold(0.0, f64::max);
        checks.push(PointCheck {
            j: i + 1,
            map_residual: cplx::dist(&jet.image(), t),
            translation_residual,
        });
    }
    let passed = checks
        .iter()
        .all(|c| c.map_residual < 1e-9 && c.translation_residual < 1e-9);
    Ok(json!({ "word": word, "points": checks, "passed": passed }))
}

#[derive(Deserialize)]
struct VerifyInput {
    word: Word,
    #[serde(default)]
    job: Option<InterpolationJob>,
    #[serde(default)]
    request: Option<VerifyRequest>,
}

fn run_verify(text: &str, cfg: &Config) -> Out {
    let input: VerifyInput = parse(text)?;
    if input.job.is_none() && input.request.is_none() {
        return Err(Failure::Schema("verify needs a `job` or a `request`".into()));
    }
    let mut out = serde_json::Map::new();
    let mut passed = true;
    if let Some(job) = &input.job {
        let rep = interpolation_report(&input.word, job)?;
        passed &= report_passes(&rep, job);
        out.insert("job_report".into(), serde_json::to_value(rep)?);
    }
    if let Some(req) = &input.request {
        let rec = word_verify(&input.word, req)?;
        passed &= rec.passes(1e3 * cfg.tol);
        out.insert("request_report".into(), serde_json::to_value(rec)?);
    }
    out.insert("passed".into(), passed.into());
    Ok(Value::Object(out))
}

fn run_unavoidable(text: &str, seed: u64) -> Out {
    let mut req: ShellRequest = parse(text)?;
    req.seed = seed;
    let set = unavoidable_set(&req)?;
    let counts = set.projection_counts();
    let deviation = set.sphere_deviation();
    let passed = set.shells.iter().all(|s| s.certificate.passed) && deviation < 1e-9;
    Ok(json!({
        "request": req,
        "set": set,
        "projection_counts": counts,
        "sphere_deviation": deviation,
        "passed": passed,
    }))
}

#[derive(Deserialize)]
#[serde(default)]
struct LemmaInput {
    trials: usize,
    n_max: usize,
    a1: f64,
    shells: usize,
    terms: usize,
}

impl Default for LemmaInput {
    fn default() -> Self {
        LemmaInput {
            trials: 1000,
            n_max: 4,
            a1: 1.5,
            shells: 3,
            terms: 1_000_000,
        }
    }
}

fn run_lemmas(text: &str, seed: u64, cfg: &Config) -> Out {
    let input: LemmaInput = if text.trim().is_empty() {
        LemmaInput::default()
    } else {
        parse(text)?
    };
    let audit = projection_audit(input.trials, input.n_max, seed, 1e3 * cfg.tol)?;
    let consts = shell_constants(input.a1, input.shells)?;
    let (partial, tail_bound) = a_partial(input.a1, input.terms);
    let gap = consts.limit - partial;
    let increasing = consts.a.windows(2).all(|w| w[0] < w[1]) && consts.a.iter().all(|a| *a < consts.limit);
    let decreasing = consts.delta.iter().all(|d| *d > 0.0) && consts.delta.windows(2).all(|w| w[0] > w[1]);
    let passed = audit.passed == audit.trials && increasing && decreasing && gap.abs() <= tail_bound;
    Ok(json!({
        "projection_bound": audit,
        "shell_constants": consts,
        "limit_check": { "terms": input.terms, "partial": partial, "gap": gap, "tail_bound": tail_bound },
        "a_increasing": increasing,
        "delta_decreasing": decreasing,
        "passed": passed,
    }))
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Input => 2,
        ErrorKind::Precondition => 3,
        ErrorKind::Numeric => 4,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Input => "input",
        ErrorKind::Precondition => "precondition",
        ErrorKind::Numeric => "numeric",
    }
}

fn summary(v: &Value) -> String {
    let mut lines = Vec::new();
    if let Value::Object(map) = v {
        for (k, val) in map {
            match val {
                Value::Object(_) | Value::Array(_) => {}
                other => lines.push(format!("{k}: {other}")),
            }
        }
        if let Some(Value::Object(rep)) = map.get("report") {
            for (k, val) in rep {
                lines.push(format!("  {k}: {val}"));
            }
        }
    }
    lines.join("\n")
}

fn emit(path: &Option<PathBuf>, v: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let command = cli.command;
    let mut cfg = Config::default();
    if let Some(t) = c.tol {
        cfg.tol = t;
    }
    if let Some(d) = c.max_degree {
        cfg.max_degree = d;
    }
    let fail = |code: u8, kind: &str, message: String, detail: Option<Value>| {
        let mut diag = json!({ "command": command.name(), "error": kind, "message": message });
        if let Some(d) = detail {
            diag["detail"] = d;
        }
        eprintln!("{}", serde_json::to_string(&diag).expect("serializable"));
        ExitCode::from(code)
    };
    let seed = match (command.randomized(), c.seed) {
        (true, None) => return fail(2, "input", format!("{} needs --seed", command.name()), None),
        (_, s) => s.unwrap_or(0),
    };
    let text = match read_input(&c.input) {
        Ok(t) => t,
        Err(Failure::Schema(m)) => return fail(2, "input", m, None),
        Err(_) => unreachable!("reading only fails with io errors"),
    };
    let result = match command {
        Command::Factor => run_factor(&text, seed, &cfg),
        Command::Interp => run_interp(&text, seed, &cfg),
        Command::MultiInterp { stages } => run_multi(&text, seed, stages, &cfg),
        Command::TameNormalize => run_normalize(&text, &cfg),
        Command::Verify => run_verify(&text, &cfg),
        Command::Unavoidable => run_unavoidable(&text, seed),
        Command::Lemmas => run_lemmas(&text, seed, &cfg),
    };
    let body = match result {
        Ok(v) => v,
        Err(Failure::Schema(m)) => return fail(2, "input", m, None),
        Err(Failure::Lib(e)) => {
            let kind = e.kind();
            let detail = serde_json::to_value(format!("{e:?}")).ok();
            return fail(exit_code(kind), kind_name(kind), e.to_string(), detail);
        }
    };
    let failed = body.get("passed") == Some(&Value::Bool(false));
    let mut resolved = serde_json::to_value(&cfg).expect("serializable");
    resolved["seed"] = seed.into();
    let mut out = json!({ "command": command.name(), "config": resolved });
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    if c.text {
        eprintln!("{}", summary(&out));
    }
    if let Err(e) = emit(&c.output, &out) {
        return fail(2, "input", e.to_string(), None);
    }
    if failed {
        return fail(4, "numeric", "result written but its checks did not pass".into(), None);
    }
    ExitCode::SUCCESS
}
