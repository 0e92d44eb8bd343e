//! Command-line front end: `diagonalize`, `fusion`, `continuum`, `converge`, `oracle`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use slitstrip::continuum::fusion::{integrated_kernel, key_sign, Heights, IndexTuple};
use slitstrip::continuum::{continuum_recursion, QuadratureConfig};
use slitstrip::discrete_cx::{solve_omega, EigenBasis};
use slitstrip::error::{Error, Result};
use slitstrip::fusion::{DirectFusion, FusionKey, PeelOrder, RecursiveFusion};
use slitstrip::geometry::{HalfIntSet, StripGeometry};
use slitstrip::par::{init_threads, Exec};
use slitstrip::scaling::{richardson, run_convergence, InnerProductId, WidthSchedule};
use slitstrip::statespace::{oracle, Observable, OracleQuery, RowSpace};
use slitstrip::transfer::{truncated_observables, ObservableSpec, SpinInsertion};
use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "slitstrip", version, about = "Ising strip and slit-strip transfer matrices, fermions and fusion coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Translation eigenfunctions of a strip of width `--width`.
    Diagonalize(DiagonalizeArgs),
    /// Discrete fusion coefficient of one key.
    Fusion(FusionArgs),
    /// Continuum fusion coefficient of one key.
    Continuum(ContinuumArgs),
    /// Discrete versus continuum values along a width schedule.
    Converge(ConvergeArgs),
    /// Exhaustive enumeration against the transfer-matrix route.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Serialize)]
struct DiagonalizeArgs {
    #[arg(long)]
    width: usize,
}

#[derive(Args, Debug, Serialize)]
struct KeyArgs {
    /// Top indices as comma-separated odd integers `2k`.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    alpha: String,
    #[arg(long = "beta-left", default_value = "", allow_hyphen_values = true)]
    beta_left: String,
    #[arg(long = "beta-right", default_value = "", allow_hyphen_values = true)]
    beta_right: String,
}

impl KeyArgs {
    fn key(&self) -> Result<FusionKey> {
        let set = |s: &str| {
            let h = HalfIntSet::parse(s)?;
            if h.twice().iter().any(|&k| k <= 0) {
                return Err(Error::Domain(format!("indices must be positive odd integers (got '{s}')")));
            }
            Ok(h)
        };
        Ok(FusionKey::new(set(&self.alpha)?, set(&self.beta_left)?, set(&self.beta_right)?))
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum DiscreteMethod {
    Direct,
    Recursive,
    Both,
}

#[derive(Args, Debug, Serialize)]
struct FusionArgs {
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i32>,
    #[arg(long)]
    b: Option<i32>,
    #[command(flatten)]
    #[serde(flatten)]
    key: KeyArgs,
    #[arg(long, value_enum, default_value = "recursive")]
    method: DiscreteMethod,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum ContinuumMethod {
    Pfaffian,
    Recursive,
    Both,
}

#[derive(Args, Debug, Serialize)]
struct ContinuumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    key: KeyArgs,
    #[arg(long, value_enum, default_value = "both")]
    method: ContinuumMethod,
    /// Acceptance threshold between successive node doublings.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct ConvergeArgs {
    /// Comma-separated even widths of balanced geometries.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    widths: Vec<usize>,
    /// Keys `alpha;beta_L;beta_R`; repeat the flag or separate keys by spaces.
    #[arg(long, num_args = 1..)]
    keys: Vec<String>,
    /// Also compare the inner products used by the recursion up to this doubled index.
    #[arg(long = "ip-max")]
    ip_max: Option<i32>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i32>,
    #[arg(long)]
    b: Option<i32>,
    #[arg(long)]
    ht: usize,
    #[arg(long)]
    hb: usize,
    #[arg(long)]
    slit: bool,
}

fn geometry(width: Option<usize>, a: Option<i32>, b: Option<i32>) -> Result<StripGeometry> {
    match (width, a, b) {
        (w, Some(a), Some(b)) => {
            let g = StripGeometry::new(a, b)?;
            if w.is_some_and(|w| w != g.width()) {
                return Err(Error::Domain(format!("--width disagrees with --a/--b ({} vs {})", w.unwrap(), g.width())));
            }
            Ok(g)
        }
        (Some(w), None, None) => StripGeometry::symmetric(w),
        _ => Err(Error::Domain("give --width, or both --a and --b".into())),
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn config(cmd: &Command) -> Value {
    serde_json::to_value(cmd).unwrap_or(Value::Null)
}

fn diagonalize(args: &DiagonalizeArgs) -> Result<Value> {
    let b = EigenBasis::new(args.width)?;
    let modes: Vec<Value> = b
        .lambda
        .iter()
        .enumerate()
        .map(|(j, &lam)| {
            let k2 = 2 * j as i32 + 1;
            let f: Vec<Value> = b.get(k2).iter().map(|z| json!([num(z.re), num(z.im)])).collect();
            Ok(json!({ "k": num(k2 as f64 / 2.0), "omega": num(solve_omega(k2, args.width)?), "lambda": num(lam), "f": f }))
        })
        .collect::<Result<_>>()?;
    Ok(json!({ "modes": modes, "gram_error": num(b.gram_error()) }))
}

fn fusion(args: &FusionArgs) -> Result<Value> {
    let g = geometry(args.width, args.a, args.b)?;
    let key = args.key.key()?;
    key.check(&g)?;
    let exec = Exec::default();
    let direct = match args.method {
        DiscreteMethod::Recursive => None,
        _ => Some(DirectFusion::new(g, exec)?),
    };
    let data = match &direct {
        Some(d) => d.data.clone(),
        None => Arc::new(slitstrip::discrete_cx::SlitData::new(g)?),
    };
    let rec = match args.method {
        DiscreteMethod::Direct => None,
        _ => Some(RecursiveFusion::new(data).value(&key)?),
    };
    let dir = direct.as_ref().map(|d| d.ratio(&key)).transpose()?;
    let vacuum = direct.as_ref().map(|d| d.vacuum()).transpose()?;
    let mut out = json!({
        "geometry": { "a": g.a, "b": g.b },
        "key": key.encode(),
        "method": args.method,
        "value": num(rec.or(dir).expect("a method ran")),
        "B_vacuum": vacuum.map(num).unwrap_or(Value::Null),
    });
    if let (Some(r), Some(d)) = (rec, dir) {
        out["recursive"] = num(r);
        out["direct"] = num(d);
        out["difference"] = num((r - d).abs());
    }
    Ok(out)
}

fn continuum(args: &ContinuumArgs) -> Result<Value> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Error::Domain(format!("--tol must be positive (got {})", args.tol)));
    }
    let key = args.key.key()?;
    let rec = match args.method {
        ContinuumMethod::Pfaffian => None,
        _ => Some(continuum_recursion(std::slice::from_ref(&key), PeelOrder::STANDARD)?.value(&key)?),
    };
    let quad = match args.method {
        ContinuumMethod::Recursive => None,
        _ => {
            let t = IndexTuple::from_key(&key);
            let h = Heights::standard(&t);
            let v = integrated_kernel(&t, &h, &QuadratureConfig::with_tol(args.tol), Exec::default())?;
            Some((v.value * key_sign(&key), v.report, h))
        }
    };
    let mut out = json!({
        "key": key.encode(),
        "method": args.method,
        "value": num(rec.or(quad.as_ref().map(|q| q.0)).expect("a method ran")),
    });
    if let Some((v, report, h)) = &quad {
        out["pfaffian"] = num(*v);
        out["quadrature"] = json!({
            "nodes": report.nodes,
            "last_change": num(report.change),
            "imaginary": num(report.imaginary),
            "sign": num(key_sign(&key)),
            "heights": h,
        });
    }
    if let (Some(r), Some((q, _, _))) = (rec, &quad) {
        out["recursive"] = num(r);
        out["difference"] = num((r - q).abs());
    }
    Ok(out)
}

fn converge(args: &ConvergeArgs) -> Result<Value> {
    let schedule = WidthSchedule::balanced(&args.widths)?;
    let keys = args
        .keys
        .iter()
        .flat_map(|s| s.split_whitespace())
        .map(FusionKey::parse)
        .collect::<Result<Vec<_>>>()?;
    let ips = match args.ip_max {
        Some(m) if m < 1 || m % 2 == 0 => return Err(Error::Domain(format!("--ip-max must be a positive odd integer (got {m})"))),
        Some(m) => InnerProductId::recursion_set(m),
        None => Vec::new(),
    };
    if keys.is_empty() && ips.is_empty() {
        return Err(Error::Domain("nothing to compare: give --keys or --ip-max".into()));
    }
    let table = run_convergence(&schedule, &keys, &ips, Exec::default())?;
    let summary: Vec<Value> = table
        .quantities()
        .iter()
        .map(|q| {
            let s = table.series(q);
            let extrapolated = match s.as_slice() {
                [.., p, l] => num(richardson(p.width, p.discrete, l.width, l.discrete)),
                _ => Value::Null,
            };
            json!({
                "quantity": q,
                "continuum": num(s[0].continuum),
                "gaps": s.iter().map(|r| num(r.gap)).collect::<Vec<_>>(),
                "richardson": extrapolated,
            })
        })
        .collect();
    match &args.out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| Error::Domain(format!("cannot write {}: {e}", p.display())))?;
            table.write_csv(f)?;
        }
        None => table.write_csv(std::io::stdout())?,
    }
    let checks: Vec<Value> = table.direct_checks.iter().map(|(w, d)| json!({ "width": w, "max_difference": num(*d) })).collect();
    Ok(json!({ "rows": table.rows.len(), "direct_checks": checks, "summary": summary }))
}

fn oracle_cmd(args: &OracleArgs) -> Result<Value> {
    let g = geometry(args.width, args.a, args.b)?;
    let lo = SpinInsertion { x: g.a + 1, y: -(args.hb as i32) };
    let hi = SpinInsertion { x: g.b - 1, y: args.ht as i32 };
    let q = OracleQuery {
        geom: g,
        h_top: args.ht,
        h_bottom: args.hb,
        slit: args.slit,
        observables: vec![Observable::Spins(vec![(lo.x, lo.y), (hi.x, hi.y)])],
    };
    let en = oracle(&q, Exec::default())?;
    let spec = ObservableSpec { h_top: args.ht, h_bottom: args.hb, spins: vec![lo, hi] };
    let tm = truncated_observables(RowSpace::full(g), args.slit, &spec, Exec::default())?;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    Ok(json!({
        "geometry": { "a": g.a, "b": g.b },
        "spins": [[lo.x, lo.y], [hi.x, hi.y]],
        "enumeration": { "Z": num(en.partition), "correlation": num(en.expectations[0]), "free_spins": en.free_spins },
        "transfer_matrix": { "Z": num(tm.partition), "correlation": num(tm.spin_correlation) },
        "gap": { "Z": num(rel(tm.partition, en.partition)), "correlation": num(rel(tm.spin_correlation, en.expectations[0])) },
    }))
}

fn run(cmd: &Command) -> Result<Value> {
    let body = match cmd {
        Command::Diagonalize(a) => diagonalize(a),
        Command::Fusion(a) => fusion(a),
        Command::Continuum(a) => continuum(a),
        Command::Converge(a) => converge(a),
        Command::Oracle(a) => oracle_cmd(a),
    }?;
    Ok(json!({ "config": config(cmd), "result": body }))
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("JSON values serialize");
            // CSV owns standard output when no path is given.
            let _ = if let Command::Converge(ConvergeArgs { out: None, .. }) = cli.command {
                writeln!(std::io::stderr(), "{text}")
            } else {
                writeln!(std::io::stdout(), "{text}")
            };
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) => ExitCode::from(2),
                Error::Numerical(_) | Error::Convergence(_) => ExitCode::from(3),
            }
        }
    }
}
