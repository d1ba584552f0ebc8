use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use witt_core::dorbit::{
    case_dual, certificate_dual, compute_closure_dual, in_closure_dual, resolve_height_p1, CaseDual, HeightP1Report,
    OrbitClassDual,
};
use witt_core::ffield::{make_field, Field, FieldElem};
use witt_core::harness::{run_suite, HarnessError, SuiteConfig, DEFAULT_SEED};
use witt_core::sympoly::Var;
use witt_core::witt::{Character, WittElem};
use witt_core::worbit::{case_w, certificate_w, compute_closure_w, in_closure_w, CaseW, OrbitClassW, OrbitError};

#[derive(Parser)]
#[command(name = "witt", version, about = "Orbits and orbit closures of the Witt algebra W(1) over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    W,
    Dual,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical orbit class of an element, with a witness, as JSON.
    Canonicalize {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        ext: u32,
        #[arg(long, value_enum)]
        space: Space,
        /// `index:coeff` pairs separated by `;`, e.g. "0:3;1:1".
        #[arg(long, allow_hyphen_values = true)]
        element: String,
    },
    /// Closure polynomial of an orbit, or membership of a test point.
    Closure {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        ext: u32,
        #[arg(long, value_enum)]
        space: Space,
        /// Degree of the orbit (W side).
        #[arg(long, allow_hyphen_values = true, required_if_eq("space", "w"))]
        i: Option<i32>,
        /// Height of the orbit (dual side).
        #[arg(long, required_if_eq("space", "dual"))]
        height: Option<i32>,
        /// Orbit parameter, or "symbolic".
        #[arg(long, default_value = "symbolic")]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        test_point: Option<String>,
        /// Resolver report (from `witt resolve --out`) unlocking height p-1.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the full closure record as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a verification suite and print its report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        ext: u32,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide the height p-1 closure for one prime.
    Resolve {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl ToString) -> Failure {
        Failure { code: 2, message: message.to_string() }
    }

    fn other(message: impl ToString) -> Failure {
        Failure { code: 1, message: message.to_string() }
    }
}

impl From<OrbitError> for Failure {
    fn from(e: OrbitError) -> Failure {
        let code = match e {
            OrbitError::ZeroElement => 3,
            OrbitError::Conditional(_) => 4,
            OrbitError::InvalidClass(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Prints a line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn field(p: u32, ext: u32) -> Result<Field, Failure> {
    make_field(p, ext).map_err(Failure::parse)
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Canonicalize { p, ext, space, element } => {
            let f = field(p, ext)?;
            let text = match space {
                Space::W => to_json(&certificate_w(&WittElem::parse(f, &element).map_err(Failure::parse)?)?),
                Space::Dual => to_json(&certificate_dual(&Character::parse(f, &element).map_err(Failure::parse)?)?),
            };
            emit(&text);
            Ok(0)
        }
        Command::Closure { p, ext, space, i, height, a, test_point, report, json } => {
            let f = field(p, ext)?;
            let a = if a == "symbolic" { None } else { Some(FieldElem::parse(f, &a).map_err(Failure::parse)?) };
            match space {
                Space::W => closure_w(f, i.expect("required by clap"), a, test_point, json),
                Space::Dual => closure_dual(f, height.expect("required by clap"), a, test_point, report, json),
            }
        }
        Command::Verify { suite, p, ext, jobs, seed, out } => {
            let cfg = SuiteConfig { suite, p, ext, seed, jobs };
            let rep = run_suite(&cfg).map_err(|e| match e {
                e @ (HarnessError::Field(_) | HarnessError::UnknownSuite(_)) => Failure::parse(e),
                e => Failure::other(e),
            })?;
            let text = to_json(&rep);
            emit(&text);
            if let Some(path) = out {
                std::fs::write(&path, &text).map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
            }
            Ok(if rep.passed() { 0 } else { 1 })
        }
        Command::Resolve { p, out } => {
            let rep = resolve_height_p1(p)?;
            let text = to_json(&rep);
            emit(&text);
            if let Some(path) = out {
                std::fs::write(&path, &text).map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
            }
            Ok(if rep.verified { 0 } else { 1 })
        }
    }
}

fn verdict(member: bool) -> Result<u8, Failure> {
    emit(if member { "member" } else { "not a member" });
    Ok(0)
}

/// `A` replaced by `a` when `a` lies in the prime field.
fn specialized(poly: &witt_core::sympoly::MultiPoly, a: Option<FieldElem>) -> String {
    match a {
        None => poly.to_string(),
        Some(a) => match a.ctx().prime_field().restrict(a) {
            Some(x) => poly.specialize(&[(Var::A, x.encoding() as i64)].into_iter().collect()).to_string(),
            None => format!("{poly}  [A = {a}]"),
        },
    }
}

fn closure_w(f: Field, i: i32, a: Option<FieldElem>, test_point: Option<String>, json: bool) -> Result<u8, Failure> {
    let p = f.characteristic();
    if !(-1..=p as i32 - 2).contains(&i) {
        return Err(Failure::parse(format!("degree {i} outside -1..={}", p - 2)));
    }
    if let Some(text) = test_point {
        let w = WittElem::parse(f, &text).map_err(Failure::parse)?;
        let param = match case_w(p, i) {
            CaseW::Single => None,
            _ => Some(a.ok_or_else(|| Failure::parse("a test point needs a numeric --a"))?),
        };
        let cls = OrbitClassW::new(p, i, param)?;
        return verdict(in_closure_w(&w, &cls)?);
    }
    let data = compute_closure_w(p, i)?;
    if json {
        emit(&to_json(&data.to_json(p)));
    } else if let Some(g) = data.g() {
        emit(&specialized(g, a));
    } else {
        emit(data.to_json(p)["description"].as_str().unwrap_or_default());
    }
    Ok(0)
}

fn load_report(path: Option<PathBuf>, p: u32) -> Result<Option<HeightP1Report>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
    let rep: HeightP1Report = serde_json::from_str(&text).map_err(Failure::parse)?;
    if rep.p != p {
        return Err(Failure::parse(format!("report is for p = {}, not {p}", rep.p)));
    }
    Ok(Some(rep))
}

fn closure_dual(
    f: Field,
    r: i32,
    a: Option<FieldElem>,
    test_point: Option<String>,
    report: Option<PathBuf>,
    json: bool,
) -> Result<u8, Failure> {
    let p = f.characteristic();
    if !(0..=p as i32 - 1).contains(&r) {
        return Err(Failure::parse(format!("height {r} outside 0..={}", p - 1)));
    }
    let report = load_report(report, p)?;
    let top = case_dual(p, r) == CaseDual::Top;
    if top && !report.as_ref().is_some_and(|rep| rep.verified) {
        return Err(OrbitError::Conditional(p).into());
    }
    if let Some(text) = test_point {
        let chi = Character::parse(f, &text).map_err(Failure::parse)?;
        let param = match case_dual(p, r) {
            CaseDual::Single => None,
            _ => Some(a.ok_or_else(|| Failure::parse("a test point needs a numeric --a"))?),
        };
        let cls = OrbitClassDual::new(p, r, param)?;
        return verdict(in_closure_dual(&chi, &cls, report.as_ref())?);
    }
    let data = compute_closure_dual(p, r)?;
    let mut record = data.to_json(p);
    if let Some(rep) = &report {
        record["branch"] = serde_json::to_value(rep.branch).expect("serializable");
    }
    if json {
        emit(&to_json(&record));
    } else if let Some(poly) = data.poly() {
        emit(&specialized(poly, a));
    } else {
        let key = if top { "g" } else { "description" };
        emit(record[key].as_str().unwrap_or_default());
    }
    Ok(0)
}
