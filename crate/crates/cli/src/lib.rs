//! The `dqs` command line as a library: [`run`] parses arguments and writes to the given streams.

mod config;
mod report;
mod zarg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dqs_core::exact::{ComplexRational, Precision};
use dqs_core::family::{build_f1, build_vee, k_set, tail_profile, FamilyIndex, Truncation};
use dqs_core::matrix::{MatrixId, MatrixSet};
use dqs_core::series::{log_branch, ls_eval, ls_eval_exact, EvalPoint, TailBound};
use dqs_core::verify::{sweep, CheckPoint, NumericCheckSpec, Recurrence, SweepConfig, TruncRule};

use config::Settings;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed,
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<dqs_core::Error> for CliError {
    fn from(e: dqs_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Evaluate Apery-type log-power series and verify their difference-equation system.
#[derive(Parser, Debug)]
#[command(name = "dqs", version)]
struct Cli {
    /// key = value file with defaults; falls back to $DQS_CONFIG
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print f_{l,k}(z, nu) (the vee variant for k = 5, 7) with an error radius
    Eval(EvalArgs),
    /// Run exact or numeric checks
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Print constant matrices or f_{l,1}(1, nu)
    Dump {
        #[command(subcommand)]
        what: DumpCmd,
    },
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long)]
    prec: Option<String>,
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// The four matrix identities
    Identities(IdentityArgs),
    /// Both recurrences over a range of nu
    Recurrence(RecurrenceArgs),
}

#[derive(Args, Debug)]
struct IdentityArgs {
    /// level; all levels when absent
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    format: Option<String>,
    /// shift one constant entry before checking: S:l:row:col:delta or V:l:i:row:col:delta (1-based)
    #[arg(long, allow_hyphen_values = true)]
    perturb: Option<String>,
}

#[derive(Args, Debug)]
struct RecurrenceArgs {
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long = "nu-min")]
    nu_min: Option<String>,
    #[arg(long = "nu-max")]
    nu_max: Option<String>,
    /// exact or numeric
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long)]
    prec: Option<String>,
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    perturb: Option<String>,
}

#[derive(Subcommand, Debug)]
enum DumpCmd {
    /// S_l and every V_l(i), exact integers
    Matrices(DumpMatricesArgs),
    /// f_{l,1}(1, nu) for nu = 0..=nu-max
    Table(DumpTableArgs),
}

#[derive(Args, Debug)]
struct DumpMatricesArgs {
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct DumpTableArgs {
    #[arg(long)]
    l: Option<String>,
    #[arg(long = "nu-max")]
    nu_max: Option<String>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

fn format_of(s: &mut Settings, allowed: &[Format]) -> Result<Format, CliError> {
    let f = match s.raw("format").unwrap_or("text") {
        "text" => Format::Text,
        "json" => Format::Json,
        "csv" => Format::Csv,
        other => return Err(CliError::Usage(format!("unknown format `{other}`"))),
    };
    if !allowed.contains(&f) {
        return Err(CliError::Usage(format!("format `{}` is not available here", s.raw("format").unwrap_or("text"))));
    }
    s.set("format", s.raw("format").unwrap_or("text").to_string());
    Ok(f)
}

fn level(s: &Settings) -> Result<Option<u8>, CliError> {
    match s.get::<u8>("l")? {
        Some(l) if l > 2 => Err(CliError::Usage(format!("--l must be 0, 1 or 2, got {l}"))),
        other => Ok(other),
    }
}

fn precision(s: &mut Settings) -> Result<Precision, CliError> {
    let bits = s.or("prec", Precision::default().bits())?;
    Ok(Precision::new(bits)?)
}

fn z_of(s: &Settings) -> Result<Option<ComplexRational>, CliError> {
    s.raw("z").map(|z| zarg::parse_complex(z).map_err(|e| CliError::Usage(format!("--z: {e}")))).transpose()
}

fn matrices(s: &Settings) -> Result<MatrixSet, CliError> {
    let base = MatrixSet::standard();
    let Some(spec) = s.raw("perturb") else {
        return Ok(base.clone());
    };
    let bad = || CliError::Usage(format!("--perturb `{spec}`: expected S:l:row:col:delta or V:l:i:row:col:delta"));
    let parts: Vec<&str> = spec.split(':').collect();
    let nums = |xs: &[&str]| xs.iter().map(|x| x.trim_start_matches('+').parse::<i64>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>();
    let (id, rest) = match parts.as_slice() {
        ["S", rest @ ..] if rest.len() == 4 => {
            let n = nums(rest)?;
            (MatrixId::S { l: u8::try_from(n[0]).map_err(|_| bad())? }, n[1..].to_vec())
        }
        ["V", rest @ ..] if rest.len() == 5 => {
            let n = nums(rest)?;
            let l = u8::try_from(n[0]).map_err(|_| bad())?;
            (MatrixId::V { l, i: u8::try_from(n[1]).map_err(|_| bad())? }, n[2..].to_vec())
        }
        _ => return Err(bad()),
    };
    if rest[0] < 1 || rest[1] < 1 {
        return Err(bad());
    }
    Ok(base.perturbed(id, rest[0] as usize - 1, rest[1] as usize - 1, rest[2])?)
}

fn cmd_eval(mut s: Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let fmt = format_of(&mut s, &[Format::Text, Format::Json])?;
    let l = level(&s)?.ok_or_else(|| CliError::Usage("missing required option --l".into()))?;
    let idx = FamilyIndex::new(l, s.require("k")?, s.require("nu")?)?;
    let z = z_of(&s)?.ok_or_else(|| CliError::Usage("missing required option --z".into()))?;
    let (value, radius) = if idx.k() == 1 {
        let v = ls_eval_exact(&build_f1(l, idx.nu())?, &z)?;
        s.set("exact", "true");
        (v.to_string(), "0".to_string())
    } else {
        let prec = precision(&mut s)?;
        let t = match s.get::<u32>("T")? {
            Some(t) => Truncation::new(t, &idx)?,
            None => Truncation::default_for(idx.nu()),
        };
        s.set("T", t.get().to_string());
        let pt = EvalPoint::new(z.clone(), prec)?;
        let series = build_vee(idx, t)?;
        let log_abs = log_branch(&z, prec)?.upper_abs_f64();
        let tail = tail_profile(idx).entry_tail_bound(l, idx.nu(), t, 0, pt.abs_lower(), log_abs)?;
        let ball = ls_eval(&series, &pt, TailBound::new(tail)?);
        let digits = (prec.bits() as f64 * std::f64::consts::LOG10_2) as u32 - 4;
        (ball.mid_decimal(digits.min(40)), report::real(ball.rad_f64()))
    };
    match fmt {
        Format::Json => {
            let payload = json!({ "re_im": value, "radius": radius });
            write!(out, "{}", report::to_text(&report::envelope(&s, "value", payload)))?;
        }
        _ => {
            if radius == "0" {
                writeln!(out, "{value}")?;
            } else {
                writeln!(out, "{value} +/- {radius}")?;
            }
        }
    }
    Ok(())
}

fn emit_checks(out: &mut dyn Write, s: &Settings, fmt: Format, checks: &[dqs_core::verify::CheckReport]) -> Result<(), CliError> {
    match fmt {
        Format::Json => write!(out, "{}", report::to_text(&report::checks_json(s, checks)))?,
        _ => write!(out, "{}", report::checks_table(checks))?,
    }
    if checks.iter().all(|c| c.passed()) {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

fn cmd_identities(mut s: Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let fmt = format_of(&mut s, &[Format::Text, Format::Json])?;
    let levels: Vec<u8> = level(&s)?.map_or_else(|| vec![0, 1, 2], |l| vec![l]);
    let set = matrices(&s)?;
    let mut cfg = SweepConfig::new(levels.into_iter().map(|l| CheckPoint::Identities { l }).collect());
    cfg.matrices = &set;
    emit_checks(out, &s, fmt, &sweep(&cfg))
}

fn cmd_recurrence(mut s: Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let fmt = format_of(&mut s, &[Format::Text, Format::Json])?;
    let levels: Vec<u8> = level(&s)?.map_or_else(|| vec![0, 1, 2], |l| vec![l]);
    let k: Option<u8> = s.get("k")?;
    let nu_min: u32 = s.or("nu-min", 2)?;
    let nu_max: u32 = s.or("nu-max", nu_min)?;
    if nu_min < 2 || nu_max < nu_min {
        return Err(CliError::Usage(format!("need 2 <= nu-min <= nu-max, got {nu_min}..={nu_max}")));
    }
    let mode = s.or("mode", "exact".to_string())?;
    let rule = match s.get::<u32>("T")? {
        Some(t) => TruncRule::Fixed(t),
        None => TruncRule::Default,
    };
    let mut pairs = Vec::new();
    for &l in &levels {
        let ks = k_set(l)?;
        match k {
            Some(k) if ks.contains(&k) => pairs.push((l, k)),
            Some(k) if levels.len() == 1 => {
                return Err(CliError::Usage(format!("k = {k} is not in K_{l} = {ks:?}")));
            }
            Some(_) => {}
            None => pairs.extend(ks.iter().map(|&k| (l, k))),
        }
    }
    let numeric = match mode.as_str() {
        "exact" => None,
        "numeric" => {
            let z = z_of(&s)?.ok_or_else(|| CliError::Usage("numeric mode needs --z".into()))?;
            Some(EvalPoint::new(z, precision(&mut s)?)?)
        }
        other => return Err(CliError::Usage(format!("unknown mode `{other}` (exact or numeric)"))),
    };
    let mut points = Vec::new();
    for which in [Recurrence::Forward, Recurrence::Backward] {
        for &(l, k) in &pairs {
            for nu in nu_min..=nu_max {
                let idx = FamilyIndex::new(l, k, nu)?;
                rule.resolve(&idx)?;
                points.push(match &numeric {
                    None => CheckPoint::Exact { which, idx, t: rule },
                    Some(pt) => CheckPoint::Numeric { which, spec: NumericCheckSpec::new(idx, pt.clone(), rule)? },
                });
            }
        }
    }
    let set = matrices(&s)?;
    let mut cfg = SweepConfig::new(points);
    cfg.matrices = &set;
    cfg.jobs = s.get::<usize>("jobs")?;
    emit_checks(out, &s, fmt, &sweep(&cfg))
}

fn cmd_dump_matrices(mut s: Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let fmt = format_of(&mut s, &[Format::Text, Format::Json, Format::Csv])?;
    let l = level(&s)?.ok_or_else(|| CliError::Usage("missing required option --l".into()))?;
    let set = MatrixSet::standard();
    let mats: Vec<(MatrixId, Vec<Vec<i64>>)> =
        MatrixSet::ids(l).into_iter().map(|id| Ok((id, set.entries(id)?))).collect::<Result<_, CliError>>()?;
    match fmt {
        Format::Csv => {
            let blocks: Vec<String> = mats
                .iter()
                .map(|(_, rows)| rows.iter().map(|r| r.iter().map(i64::to_string).collect::<Vec<_>>().join(",") + "\n").collect())
                .collect();
            write!(out, "{}", blocks.join("\n"))?;
        }
        Format::Json => {
            let list: Vec<Value> = mats
                .iter()
                .map(|(id, rows)| {
                    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(i64::to_string).collect()).collect();
                    json!({ "name": id.to_string(), "rows": rows })
                })
                .collect();
            write!(out, "{}", report::to_text(&report::envelope(&s, "matrices", Value::Array(list))))?;
        }
        Format::Text => {
            let blocks: Vec<String> = mats
                .iter()
                .map(|(id, rows)| {
                    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(i64::to_string).collect()).collect();
                    let w = cells.iter().flatten().map(String::len).max().unwrap_or(1);
                    let body: String = cells
                        .iter()
                        .map(|r| r.iter().map(|c| format!("{c:>w$}")).collect::<Vec<_>>().join(" ") + "\n")
                        .collect();
                    format!("{id}\n{body}")
                })
                .collect();
            write!(out, "{}", blocks.join("\n"))?;
        }
    }
    Ok(())
}

fn cmd_dump_table(mut s: Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let fmt = format_of(&mut s, &[Format::Text, Format::Json, Format::Csv])?;
    let l = level(&s)?.ok_or_else(|| CliError::Usage("missing required option --l".into()))?;
    let nu_max: u32 = s.require("nu-max")?;
    let one = ComplexRational::one();
    let rows: Vec<(u32, String)> = (0..=nu_max)
        .map(|nu| Ok((nu, ls_eval_exact(&build_f1(l, nu)?, &one)?.to_string())))
        .collect::<Result<_, CliError>>()?;
    match fmt {
        Format::Csv => {
            for (nu, v) in &rows {
                writeln!(out, "{nu},{v}")?;
            }
        }
        Format::Json => {
            let list: Vec<Value> = rows.iter().map(|(nu, v)| json!({ "nu": nu, "value": v })).collect();
            write!(out, "{}", report::to_text(&report::envelope(&s, "table", Value::Array(list))))?;
        }
        Format::Text => {
            let cells: Vec<Vec<String>> = rows.iter().map(|(nu, v)| vec![nu.to_string(), v.clone()]).collect();
            write!(out, "{}", report::table(&["nu", "f(1,nu)"], &cells))?;
        }
    }
    Ok(())
}

fn settings(path: Option<PathBuf>, command: &str, flags: &[(&str, Option<String>)]) -> Result<Settings, CliError> {
    let path = path.or_else(|| std::env::var_os("DQS_CONFIG").map(PathBuf::from));
    let mut s = match path {
        Some(p) => Settings::load(&p)?,
        None => Settings::default(),
    };
    s.override_with(flags);
    s.set("command", command);
    Ok(s)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Eval(a) => cmd_eval(settings(
            cli.config,
            "eval",
            &[("l", a.l), ("k", a.k), ("nu", a.nu), ("z", a.z), ("prec", a.prec), ("T", a.t), ("format", a.format)],
        )?, out),
        Cmd::Verify { what: VerifyCmd::Identities(a) } => {
            cmd_identities(settings(cli.config, "verify identities", &[("l", a.l), ("format", a.format), ("perturb", a.perturb)])?, out)
        }
        Cmd::Verify { what: VerifyCmd::Recurrence(a) } => cmd_recurrence(settings(
            cli.config,
            "verify recurrence",
            &[
                ("l", a.l),
                ("k", a.k),
                ("nu-min", a.nu_min),
                ("nu-max", a.nu_max),
                ("mode", a.mode),
                ("z", a.z),
                ("prec", a.prec),
                ("T", a.t),
                ("jobs", a.jobs),
                ("format", a.format),
                ("perturb", a.perturb),
            ],
        )?, out),
        Cmd::Dump { what: DumpCmd::Matrices(a) } => {
            cmd_dump_matrices(settings(cli.config, "dump matrices", &[("l", a.l), ("format", a.format)])?, out)
        }
        Cmd::Dump { what: DumpCmd::Table(a) } => cmd_dump_table(settings(
            cli.config,
            "dump table",
            &[("l", a.l), ("nu-max", a.nu_max), ("format", a.format)],
        )?, out),
    }
}


/// Runs `dqs` on `args` (program name first) and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(CliError::Failed) => 1,
        Err(CliError::Usage(msg)) | Err(CliError::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}
