//! `newtonflux` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 on a tolerance failure or a numeric
//! breakdown, 2 on a configuration or usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use newtonflux::boundary::{build_frame, identity_sr, identity_umbilic, nueta_residual};
use newtonflux::catalog::{self, field_for, CatalogEntry, Descriptor};
use newtonflux::flux::{entry_flux, hr_estimate, FluxOptions, FluxReport, SCHEMA};
use newtonflux::quadrature::{default_order, tensor_grid};
use newtonflux::Error;
use serde::Serialize;

const IDENTITY_TOL: f64 = 1e-7;
const FLUX_TOL: f64 = 1e-6;
const SWEEP_TOL: f64 = 1e-8;
const IDENTITY_SAMPLES: usize = 16;

#[derive(Parser)]
#[command(name = "newtonflux", version, about = "Check curvature identities, flux formulas and H_r estimates on catalog hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise boundary identities on a sampling of ∂M.
    Identity(IdentityArgs),
    /// Flux formula report for one field.
    Flux(FluxArgs),
    /// Sweep one descriptor parameter and report H_r against its bounds.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// Catalog descriptor (`family:key=val,...`) or a file holding one.
    #[arg(long)]
    catalog: String,
    /// Comma-separated r values; default 1..=n.
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    /// Per-axis quadrature order (identity: samples per boundary axis).
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Report path; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the `seed` of a perturbed_graph descriptor.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct IdentityArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct FluxArgs {
    #[command(flatten)]
    common: Common,
    /// normal_killing, translation, rotation, homothety or conformal.
    #[arg(long, default_value = "normal_killing")]
    field: String,
    /// Re-evaluate at doubled order and record the change.
    #[arg(long)]
    refine: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// `param=lo:hi:steps`, evenly spaced and inclusive.
    #[arg(long)]
    sweep: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateImmersion { .. } | Error::OutOfDomain { .. } | Error::Integration { .. } => {
                Failure::Numeric(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Identity(a) => cmd_identity(&a),
        Command::Flux(a) => cmd_flux(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

// ---- configuration -----------------------------------------------------------

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Descriptor text from the flag itself or from the file it names. Files may hold a
/// descriptor line or a JSON object `{"family": ..., "params": {...}}`.
fn descriptor_text(arg: &str) -> Result<String, Failure> {
    let path = Path::new(arg);
    if !path.is_file() {
        return Ok(arg.trim().to_string());
    }
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("catalog: cannot read {arg}: {e}")))?;
    let text = text.trim();
    if !text.starts_with('{') {
        return Ok(text.to_string());
    }
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| config(format!("catalog: {arg} is not valid JSON: {e}")))?;
    let family = v
        .get("family")
        .and_then(|f| f.as_str())
        .ok_or_else(|| config("catalog: field `family` missing or not a string"))?;
    let mut kv = Vec::new();
    if let Some(params) = v.get("params") {
        let obj = params.as_object().ok_or_else(|| config("catalog: field `params` is not an object"))?;
        for (k, val) in obj {
            let s = match val {
                serde_json::Value::Number(x) => x.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::String(s) => s.clone(),
                _ => return Err(config(format!("catalog: field `{k}` must be a number, boolean or string"))),
            };
            kv.push(format!("{k}={s}"));
        }
    }
    Ok(format!("{family}:{}", kv.join(",")))
}

fn descriptor(c: &Common) -> Result<Descriptor, Failure> {
    let mut d = Descriptor::parse(&descriptor_text(&c.catalog)?)?;
    if let Some(seed) = c.seed {
        if d.family == "perturbed_graph" {
            d.params.insert("seed".into(), seed.to_string());
        }
    }
    Ok(d)
}

fn load(c: &Common) -> Result<(String, CatalogEntry), Failure> {
    let d = descriptor(c)?;
    let text = d.to_descriptor();
    let mut e = catalog::build(&d)?;
    e.id = text.clone();
    Ok((text, e))
}

fn r_values(c: &Common, lo: usize, hi: usize) -> Result<Vec<usize>, Failure> {
    if c.r.is_empty() {
        return Ok((lo..=hi).collect());
    }
    for &r in &c.r {
        if r < lo || r > hi {
            return Err(config(format!("field `r`: {r} is outside {lo}..={hi}")));
        }
    }
    Ok(c.r.clone())
}

fn tolerance(c: &Common, default: f64) -> Result<f64, Failure> {
    match c.tol {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(config(format!("field `tol`: {t} must be positive"))),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

fn order(c: &Common) -> Result<Option<usize>, Failure> {
    match c.order {
        Some(0) => Err(config("field `order`: must be at least 1")),
        o => Ok(o),
    }
}

#[derive(Serialize)]
struct Settings {
    descriptor: String,
    r: Vec<usize>,
    order: usize,
    tol: f64,
    seed: Option<u64>,
    format: Format,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    schema: &'static str,
    command: &'static str,
    settings: &'a Settings,
    checks: &'a [C],
    rows: &'a [R],
}

#[derive(Serialize)]
struct Check {
    check: String,
    r: Option<usize>,
    worst: f64,
    pass: bool,
}

fn emit(check: &Check, detail: &str) {
    let tag = if check.pass { "PASS" } else { "FAIL" };
    let r = check.r.map(|r| format!(" r={r}")).unwrap_or_default();
    println!("{tag} {}{r}: {detail}", check.check);
}

fn write_report<C: Serialize, R: Serialize>(
    out: Option<&Path>,
    command: &'static str,
    settings: &Settings,
    checks: &[C],
    rows: &[R],
) -> Result<(), Failure> {
    let Some(path) = out else { return Ok(()) };
    let io = |e: &dyn std::fmt::Display| config(format!("out: cannot write {}: {e}", path.display()));
    match settings.format {
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA,
                command,
                settings,
                checks,
                rows,
            };
            let mut text = serde_json::to_string_pretty(&env).map_err(|e| io(&e))?;
            text.push('\n');
            std::fs::write(path, text).map_err(|e| io(&e))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| io(&e))?;
            for row in rows {
                w.serialize(row).map_err(|e| io(&e))?;
            }
            w.flush().map_err(|e| io(&e))
        }
    }
}

// ---- identity ----------------------------------------------------------------

#[derive(Serialize)]
struct IdentityRow {
    sample: usize,
    t0: f64,
    t1: Option<f64>,
    check: &'static str,
    r: Option<usize>,
    residual: f64,
}

fn cmd_identity(a: &IdentityArgs) -> Outcome {
    let c = &a.common;
    let (desc, e) = load(c)?;
    let n = e.n();
    let rs = r_values(c, 1, n)?;
    let tol = tolerance(c, IDENTITY_TOL)?;
    let per_axis = order(c)?.unwrap_or(IDENTITY_SAMPLES);
    let settings = Settings {
        descriptor: desc,
        r: rs.clone(),
        order: per_axis,
        tol,
        seed: c.seed,
        format: c.format.unwrap_or(Format::Json),
    };
    let face = e
        .immersion
        .domain
        .face()
        .ok_or_else(|| config("catalog: hypersurface has no boundary face"))?;
    let points = tensor_grid(&face, &vec![per_axis; n - 1])?.points;
    let mut rows = Vec::new();
    for (i, t) in points.iter().enumerate() {
        let f = build_frame(&e.immersion, &e.boundary, t)?;
        let mut push = |check, r, residual| {
            rows.push(IdentityRow {
                sample: i,
                t0: t[0],
                t1: t.get(1).copied(),
                check,
                r,
                residual,
            })
        };
        push("nueta", None, nueta_residual(&f));
        for &r in &rs {
            if r < n {
                push("identity_umbilic", Some(r), identity_umbilic(&f, &f.curvature, r)?.2);
            }
            if f.lambda == 0.0 {
                push("identity_sr", Some(r), identity_sr(&f, &f.curvature, r)?);
            }
        }
    }
    let mut checks = Vec::new();
    let mut keys: Vec<(&'static str, Option<usize>)> = Vec::new();
    for row in &rows {
        if !keys.contains(&(row.check, row.r)) {
            keys.push((row.check, row.r));
        }
    }
    for (name, r) in keys {
        let worst = rows
            .iter()
            .filter(|x| x.check == name && x.r == r)
            .map(|x| x.residual)
            .fold(0.0, f64::max);
        let check = Check {
            check: name.into(),
            r,
            worst,
            pass: worst < tol,
        };
        emit(&check, &format!("max residual {worst:.3e} over {} samples (tol {tol:e})", points.len()));
        checks.push(check);
    }
    write_report(c.out.as_deref(), "identity", &settings, &checks, &rows)?;
    Ok(checks.iter().all(|x| x.pass))
}

// ---- flux --------------------------------------------------------------------

#[derive(Serialize)]
struct FluxRow {
    r: usize,
    formula: String,
    field: String,
    lhs: f64,
    rhs: f64,
    abs_residual: f64,
    rel_residual: f64,
    h_r: f64,
    order: usize,
    refine_delta: Option<f64>,
}

impl From<&FluxReport> for FluxRow {
    fn from(x: &FluxReport) -> Self {
        Self {
            r: x.r,
            formula: x.formula.clone(),
            field: x.config.field.clone(),
            lhs: x.lhs,
            rhs: x.rhs,
            abs_residual: x.abs_residual,
            rel_residual: x.rel_residual,
            h_r: x.h_r,
            order: x.quadrature.orders[0],
            refine_delta: x.quadrature.refine_delta,
        }
    }
}

fn cmd_flux(a: &FluxArgs) -> Outcome {
    let c = &a.common;
    let (desc, e) = load(c)?;
    let n = e.n();
    let rs = r_values(c, 1, n)?;
    let tol = tolerance(c, FLUX_TOL)?;
    let field = field_for(&e, &a.field).map_err(|e| config(format!("field `field`: {e}")))?;
    let opts = FluxOptions {
        order: order(c)?,
        refine: a.refine,
        descriptor: desc.clone(),
        ..FluxOptions::default()
    };
    let settings = Settings {
        descriptor: desc,
        r: rs.clone(),
        order: opts.order.unwrap_or_else(|| default_order(n)),
        tol,
        seed: c.seed,
        format: c.format.unwrap_or(Format::Json),
    };
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for &r in &rs {
        let rep = entry_flux(&e, &field, r, &opts)?;
        let check = Check {
            check: format!("flux_{}", rep.formula),
            r: Some(r),
            worst: rep.rel_residual,
            pass: rep.rel_residual < tol,
        };
        emit(
            &check,
            &format!(
                "lhs {:.12e} rhs {:.12e} relative residual {:.3e} (tol {tol:e})",
                rep.lhs, rep.rhs, rep.rel_residual
            ),
        );
        checks.push(check);
        reports.push(rep);
    }
    match settings.format {
        Format::Json => write_report(c.out.as_deref(), "flux", &settings, &checks, &reports)?,
        Format::Csv => {
            let rows: Vec<FluxRow> = reports.iter().map(FluxRow::from).collect();
            write_report(c.out.as_deref(), "flux", &settings, &checks, &rows)?
        }
    }
    Ok(checks.iter().all(|x| x.pass))
}

// ---- sweep -------------------------------------------------------------------

/// Fixed sweep CSV columns.
#[derive(Serialize)]
struct SweepRow {
    parameter: String,
    value: f64,
    r: usize,
    h_r: f64,
    bound: f64,
    closed_form: f64,
    slack: f64,
    closed_form_slack: f64,
    identity_residual: f64,
}

struct SweepPlan {
    param: String,
    values: Vec<f64>,
}

fn parse_sweep(s: &str) -> Result<SweepPlan, Failure> {
    let bad = |why: &str| config(format!("field `sweep`: {why} in `{s}` (expected param=lo:hi:steps)"));
    let (param, range) = s.split_once('=').ok_or_else(|| bad("missing `=`"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 || param.trim().is_empty() {
        return Err(bad("malformed range"));
    }
    let num = |x: &str| x.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    let lo = num(parts[0]).ok_or_else(|| bad("bad lower end"))?;
    let hi = num(parts[1]).ok_or_else(|| bad("bad upper end"))?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad("bad step count"))?;
    if steps == 0 {
        return Err(bad("zero steps"));
    }
    let values = (0..steps)
        .map(|i| {
            if steps == 1 {
                lo
            } else if i == steps - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    Ok(SweepPlan {
        param: param.trim().to_string(),
        values,
    })
}

fn cmd_sweep(a: &SweepArgs) -> Outcome {
    let c = &a.common;
    let plan = parse_sweep(&a.sweep)?;
    let base = descriptor(c)?;
    let tol = tolerance(c, SWEEP_TOL)?;
    let opts = FluxOptions {
        order: order(c)?,
        descriptor: base.to_descriptor(),
        ..FluxOptions::default()
    };
    let entries = plan
        .values
        .iter()
        .map(|&v| Ok((v, catalog::build(&base.with(&plan.param, v))?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let n = entries[0].1.n();
    let rs = r_values(c, 1, n)?;
    let settings = Settings {
        descriptor: base.to_descriptor(),
        r: rs.clone(),
        order: opts.order.unwrap_or_else(|| default_order(n)),
        tol,
        seed: c.seed,
        format: c.format.unwrap_or(Format::Csv),
    };
    let mut rows = Vec::new();
    let mut identity_rel = Vec::new();
    for (v, e) in &entries {
        for &r in &rs {
            let rep = hr_estimate(e, r, &opts)?;
            identity_rel.push(rep.identity_residual / (1.0 + rep.identity_lhs.abs()));
            rows.push(SweepRow {
                parameter: plan.param.clone(),
                value: *v,
                r,
                h_r: rep.h_r,
                bound: rep.bound,
                closed_form: rep.closed_form,
                slack: rep.slack,
                closed_form_slack: rep.closed_form_slack,
                identity_residual: rep.identity_residual,
            });
        }
    }
    let mut checks = Vec::new();
    for &r in &rs {
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].r == r).collect();
        let min_slack = idx.iter().map(|&i| rows[i].closed_form_slack.min(rows[i].slack)).fold(f64::INFINITY, f64::min);
        let worst_identity = idx.iter().map(|&i| identity_rel[i]).fold(0.0, f64::max);
        let check = Check {
            check: format!("sweep_{}", plan.param),
            r: Some(r),
            worst: min_slack,
            pass: min_slack >= -tol && worst_identity < tol,
        };
        emit(
            &check,
            &format!(
                "{} rows, min slack {min_slack:.3e}, max identity residual {worst_identity:.3e} (tol {tol:e})",
                idx.len()
            ),
        );
        checks.push(check);
    }
    write_report(c.out.as_deref(), "sweep", &settings, &checks, &rows)?;
    Ok(checks.iter().all(|x| x.pass))
}
