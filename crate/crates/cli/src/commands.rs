use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use schwarz_core::closed_form::{family_singularities, family_verify, MobiusFamily};
use schwarz_core::curve::{Curve, ExprCurve};
use schwarz_core::el_ode::{self, Status};
use schwarz_core::ode_geometry::{
    invariants as eval_invariants, linearize as eval_linearize, OdeField,
};
use schwarz_core::schwarzian::schwarzian;
use schwarz_core::variation::{critical_test, CurveFn};
use schwarz_core::{Error, Jet4};

use crate::config;
use crate::{EXIT_EXPECTATION, EXIT_SINGULAR};

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(value: &Value, out: Option<&Path>) -> Result<()> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn parse_jet(s: &str) -> Result<Jet4> {
    Ok(s.parse::<Jet4>()?)
}

fn interval(v: &[f64]) -> Result<(f64, f64)> {
    match *v {
        [a, b] if a < b => Ok((a, b)),
        _ => bail!("interval must be two increasing numbers t0,t1 (got {v:?})"),
    }
}

/// `--field EL` or `--F <expr>`.
fn pick_field(field: Option<&str>, f: Option<&str>) -> Result<(OdeField, bool)> {
    match (field, f) {
        (Some(_), Some(_)) => bail!("--field and --F are mutually exclusive"),
        (Some(name), None) if name.eq_ignore_ascii_case("el") => Ok((OdeField::el(), true)),
        (Some(name), None) => {
            bail!("unknown field `{name}` (only EL is built in; use --F for others)")
        }
        (None, Some(text)) => Ok((OdeField::parse(text)?, false)),
        (None, None) => Ok((OdeField::el(), true)),
    }
}

// ---------------------------------------------------------------- integrate

#[derive(Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct IntegrateArgs {
    /// Initial jet t,u,p,q,r
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    jet: Option<String>,
    /// Final time (may lie before the initial time)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    /// Local error tolerance [default: 1e-10]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    /// Output CSV path [default: stdout]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

pub fn integrate(args: IntegrateArgs, cfg: &Map<String, Value>) -> Result<u8> {
    let args = config::merge(&args, cfg)?;
    let jet = parse_jet(
        args.jet
            .as_deref()
            .ok_or_else(|| anyhow!("--jet is required"))?,
    )?;
    let t_end = args.t_end.ok_or_else(|| anyhow!("--t-end is required"))?;
    let tol = args.tol.unwrap_or(1e-10);
    let effective = json!({
        "command": "integrate",
        "jet": jet.to_array(),
        "t-end": t_end,
        "tol": tol,
        "out": args.out,
    });
    eprintln!("# config: {effective}");

    let traj = el_ode::integrate(&jet, t_end, tol).map_err(|e| match e {
        Error::SingularJet { p } => anyhow!("singular initial jet (p={p})"),
        e => e.into(),
    })?;
    let (ds, dc) = el_ode::invariant_drift(&traj);
    info!("{} steps, drift S {ds:.2e}, C {dc:.2e}", traj.len());

    let mut w = open_out(args.out.as_deref())?;
    traj.write_csv(&mut w)?;
    w.flush()?;

    match traj.status() {
        Status::Completed => Ok(0),
        Status::StoppedNearSingularity => {
            eprintln!("stopped near a singularity at t={}", traj.last().t);
            Ok(EXIT_SINGULAR)
        }
    }
}

// ---------------------------------------------------------------- invariants

#[derive(Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct InvariantsArgs {
    /// Built-in field; only `EL` is available
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    /// Right-hand side F(t,u,p,q,r) of u'''' = F
    #[arg(long = "F")]
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    f: Option<String>,
    /// Jet t,u,p,q,r; repeat for several
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    jet: Vec<String>,
    /// Also sample this many random jets with |p| in [0.1, 10]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    random: Option<usize>,
    /// Seed for --random [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Output JSON path [default: stdout]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct InvariantRow {
    jet: Jet4,
    #[serde(rename = "W0")]
    w0: f64,
    #[serde(rename = "W1")]
    w1: f64,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
}

fn random_jet(rng: &mut impl Rng) -> Jet4 {
    let p = 10f64.powf(rng.random_range(-1.0..=1.0));
    let p = if rng.random_bool(0.5) { -p } else { p };
    Jet4::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-2.0..2.0),
        p,
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
    )
}

pub fn invariants(args: InvariantsArgs, cfg: &Map<String, Value>) -> Result<u8> {
    let args = config::merge(&args, cfg)?;
    let (field, is_el) = pick_field(args.field.as_deref(), args.f.as_deref())?;
    let seed = args.seed.unwrap_or(0);
    let mut jets = args
        .jet
        .iter()
        .map(|s| parse_jet(s))
        .collect::<Result<Vec<_>>>()?;
    if let Some(n) = args.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        jets.extend((0..n).map(|_| random_jet(&mut rng)));
    }
    if jets.is_empty() {
        bail!("no jets given (use --jet or --random)");
    }

    let mut rows = Vec::with_capacity(jets.len());
    for j in &jets {
        let inv = eval_invariants(&field, j).with_context(|| format!("at jet {j:?}"))?;
        let s = if is_el { Some(schwarzian(j)?) } else { None };
        rows.push(InvariantRow {
            jet: *j,
            w0: inv.w0,
            w1: inv.w1,
            s,
        });
    }
    let effective = json!({
        "command": "invariants",
        "F": field.f().to_string(),
        "jets": jets.len(),
        "random": args.random,
        "seed": seed,
    });
    write_json(
        &json!({ "config": effective, "rows": rows }),
        args.out.as_deref(),
    )?;
    Ok(0)
}

// ---------------------------------------------------------------- family

#[derive(Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct FamilyArgs {
    /// Constant value σ of the Schwarzian
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[arg(long = "A")]
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[arg(long = "B")]
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[arg(long = "C")]
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[arg(long = "D")]
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    /// Check S = σ and the Euler–Lagrange equation at this many sample times
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<usize>,
    /// Window t0,t1 for --verify and the pole search [default: -0.5,0.5]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    interval: Vec<f64>,
    /// Output JSON path [default: stdout]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

pub fn family(args: FamilyArgs, cfg: &Map<String, Value>) -> Result<u8> {
    let args = config::merge(&args, cfg)?;
    let sigma = args.sigma.ok_or_else(|| anyhow!("--sigma is required"))?;
    let f = MobiusFamily::new(
        args.a.unwrap_or(1.0),
        args.b.unwrap_or(0.0),
        args.c.unwrap_or(0.0),
        args.d.unwrap_or(1.0),
        sigma,
    )?;
    let (t0, t1) = if args.interval.is_empty() {
        (-0.5, 0.5)
    } else {
        interval(&args.interval)?
    };
    let poles = family_singularities(&f, t0, t1);
    debug!("poles in [{t0}, {t1}]: {poles:?}");
    let verify = args
        .verify
        .map(|n| family_verify(&f, n, t0, t1))
        .transpose()?;

    let effective = json!({
        "command": "family",
        "family": f,
        "verify": args.verify,
        "interval": [t0, t1],
    });
    let out = json!({
        "config": effective,
        "family": f,
        "class": f.class(),
        "rate": f.rate(),
        "determinant": f.determinant(),
        "singularities": poles,
        "verify": verify,
    });
    write_json(&out, args.out.as_deref())?;
    Ok(0)
}

// ---------------------------------------------------------------- linearize

#[derive(Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LinearizeArgs {
    /// Built-in field; only `EL` is available
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    /// Right-hand side F(t,u,p,q,r) of u'''' = F
    #[arg(long = "F")]
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    f: Option<String>,
    /// Base solution: line (u=t), exp (u=e^t) or tan (u=tan t)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<String>,
    /// Base solution as an expression in t, instead of --base
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<String>,
    /// Sample times, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    t: Vec<f64>,
    /// Output JSON path [default: stdout]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn base_expr(base: Option<&str>, u: Option<&str>) -> Result<String> {
    Ok(match (base, u) {
        (Some(_), Some(_)) => bail!("--base and --u are mutually exclusive"),
        (None, Some(u)) => u.to_string(),
        (Some("line"), None) => "t".into(),
        (Some("exp"), None) => "exp(t)".into(),
        (Some("tan"), None) => "tan(t)".into(),
        (Some(b), None) => bail!("unknown base `{b}` (expected line, exp or tan)"),
        (None, None) => bail!("--base or --u is required"),
    })
}

pub fn linearize(args: LinearizeArgs, cfg: &Map<String, Value>) -> Result<u8> {
    let args = config::merge(&args, cfg)?;
    let (field, _) = pick_field(args.field.as_deref(), args.f.as_deref())?;
    let u = base_expr(args.base.as_deref(), args.u.as_deref())?;
    let curve = ExprCurve::parse(&u)?;
    if args.t.is_empty() {
        bail!("--t is required");
    }
    let rows = args
        .t
        .iter()
        .map(|&t| {
            let [a1, a2, a3] = eval_linearize(&field, &curve, t)?;
            Ok(json!({ "t": t, "a1": a1, "a2": a2, "a3": a3 }))
        })
        .collect::<Result<Vec<_>>>()?;
    let effective = json!({
        "command": "linearize",
        "F": field.f().to_string(),
        "u": u,
        "t": args.t,
    });
    write_json(
        &json!({ "config": effective, "rows": rows }),
        args.out.as_deref(),
    )?;
    Ok(0)
}

// ---------------------------------------------------------------- variation

#[derive(Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VariationArgs {
    /// Curve u(t)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<String>,
    /// Interval t0,t1
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    interval: Vec<f64>,
    /// Number of random admissible variations [default: 50]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Seed for the variation draws [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Exit with code 3 if a variation shows the curve is not critical
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    expect_critical: bool,
    /// Output JSON path [default: stdout]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

pub fn variation(args: VariationArgs, cfg: &Map<String, Value>) -> Result<u8> {
    let args = config::merge(&args, cfg)?;
    let text = args.u.ok_or_else(|| anyhow!("--u is required"))?;
    let (t0, t1) = interval(&args.interval)?;
    let n = args.n.unwrap_or(50);
    let seed = args.seed.unwrap_or(0);
    if n == 0 {
        bail!("--n must be positive");
    }

    let curve = ExprCurve::parse(&text)?;
    let u = CurveFn::new(&curve as &dyn Curve, t0, t1)?;
    let report = critical_test(&u, n, seed, &text)?;
    info!("max |δI_S| = {:.3e} over {n} variations", report.max_delta);

    let effective = json!({
        "command": "variation",
        "u": text,
        "interval": [t0, t1],
        "n": n,
        "seed": seed,
        "expect-critical": args.expect_critical,
    });
    let mut out = Map::new();
    out.insert("config".into(), effective);
    if let Value::Object(m) = serde_json::to_value(&report)? {
        out.extend(m);
    }
    write_json(&Value::Object(out), args.out.as_deref())?;

    match &report.witness {
        Some(w) if args.expect_critical => {
            eprintln!(
                "not critical: bump at {} (radius {}, amplitude {}) gives δI_S = {:e}",
                w.center, w.radius, w.amplitude, w.delta
            );
            Ok(EXIT_EXPECTATION)
        }
        _ => Ok(0),
    }
}
