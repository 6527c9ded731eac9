//! The `fgamma` command line.
//!
//! Every command writes one JSON document (or a CSV table) to stdout or
//! `--output`. Errors go to stderr as `{"error": {"kind", "message"}}`.
//! Exit status is 0 on success, 1 when a verification fails or a
//! computation does not converge, 2 on bad flags or parameters.
//!
//! `FGAMMA_TOL` overrides the tolerance of the free identity catalog and
//! `FGAMMA_THREADS` the size of the worker pool.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fgamma_core::convolution::{self, IdentityId, IdentityParams};
use fgamma_core::cumulants::{self, format_rational, ExactParams, Rational};
use fgamma_core::equilibrium::{self, ProbeSpec};
use fgamma_core::finite_free;
use fgamma_core::gibbs;
use fgamma_core::measures::{self, GfgParams};
use fgamma_core::transforms::{self, RFamily, SFamily, C64};

use crate::classical::{self, ClassicalIdentity};
use crate::error::{Error, Result};
use crate::output::{num, write_csv, write_json, Envelope, Format, Table};
use crate::rmt::{self, RmtParams};
use crate::rng::{RngStream, DEFAULT_SEED};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Monte Carlo sample size of the classical suite.
pub const CLASSICAL_N: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "fgamma", version, about = "Generalized free gamma laws: densities, transforms and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed of the random streams.
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed, global = true)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write to a file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

/// Parameters as decimals or fractions such as `3/2`.
#[derive(Debug, Clone, Args)]
pub struct Triple {
    #[arg(long, default_value = "1")]
    pub t: String,
    #[arg(long, default_value = "1")]
    pub theta: String,
    #[arg(long, default_value = "1")]
    pub lambda: String,
}

impl Triple {
    fn exact(&self) -> Result<ExactParams> {
        Ok(ExactParams::new(rational(&self.t)?, rational(&self.theta)?, rational(&self.lambda)?)?)
    }

    fn params(&self) -> Result<GfgParams> {
        Ok(self.exact()?.to_params()?)
    }

    fn json(&self) -> Value {
        json!({"t": self.t, "theta": self.theta, "lambda": self.lambda})
    }

    fn label(&self) -> String {
        format!("t={} theta={} lambda={}", self.t, self.theta, self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Cauchy,
    R,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Free,
    Classical,
    Entropy,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density of mu_{t,theta,lambda} on a grid over its support.
    Density {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Cauchy, R or S transform on a real grid.
    Transform {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 51)]
        grid: usize,
        /// Imaginary part of the Cauchy transform argument.
        #[arg(long, default_value_t = 1e-3)]
        im: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Exact moments and free cumulants.
    Moments {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Identity checks; exits 1 if any fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[command(flatten)]
        triple: Triple,
        #[command(flatten)]
        common: Common,
    },
    /// Random-matrix check of one catalog identity.
    Rmt {
        #[arg(long)]
        identity: String,
        #[arg(long, default_value_t = 1000)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        seeds: usize,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Number of doublings for INV_SUM_LAW.
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Partition function, density and Pearson residual of rho_{t,theta,lambda}.
    Gibbs {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Free entropy of mu_{t,theta,lambda} and the perturbation probe.
    Entropy {
        #[command(flatten)]
        triple: Triple,
        #[command(flatten)]
        common: Common,
    },
    /// Root distributions of the finite free polynomials against the limit.
    FiniteFree {
        #[command(flatten)]
        triple: Triple,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        dims: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

fn rational(s: &str) -> Result<Rational> {
    cumulants::parse_rational(s).map_err(|e| Error::Usage(format!("{s:?}: {e}")))
}

fn tolerance() -> Result<f64> {
    match std::env::var("FGAMMA_TOL") {
        Ok(v) => v
            .parse::<f64>()
            .ok()
            .filter(|x| *x > 0.0)
            .ok_or_else(|| Error::Usage(format!("FGAMMA_TOL={v:?} is not a positive number"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FGAMMA_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Usage(format!("FGAMMA_THREADS={v:?} is not a positive integer")))?;
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// What a command produced.
pub struct Outcome {
    pub command: &'static str,
    pub params: Value,
    pub seed: Option<u64>,
    pub data: Value,
    pub table: Table,
    /// False when a verification failed.
    pub ok: bool,
}

impl Outcome {
    fn new(command: &'static str, params: Value, data: Value, table: Table) -> Self {
        Outcome { command, params, seed: None, data, table, ok: true }
    }
}

fn finish_table(t: Table, params: &Value, seed: Option<u64>) -> Table {
    let mut t = t;
    let mut head = vec![
        ("params".to_string(), params.to_string()),
        ("seed".to_string(), seed.map_or("none".to_string(), |s| s.to_string())),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ];
    head.append(&mut t.comments);
    t.comments = head;
    t
}

fn grid_points(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::Usage("grid needs at least one point".into()));
    }
    // interior points only; the densities are singular or zero at the edges
    Ok((1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect())
}

fn density(triple: &Triple, grid: usize) -> Result<Outcome> {
    let p = triple.params()?;
    let s = measures::support(&p);
    let atom = measures::atom_mass(&p);
    let xs = grid_points(s.lo, s.hi, grid)?;
    let mut t = Table::new(&["x", "density"]).comment("atom", num(atom));
    let mut pts = Vec::with_capacity(xs.len());
    for &x in &xs {
        let d = measures::gfg_density(&p, x);
        t.push(vec![num(x), num(d)]);
        pts.push(json!({"x": x, "density": d}));
    }
    let data = json!({"support": [s.lo, s.hi], "atom": atom, "points": pts});
    Ok(Outcome::new("density", triple.json(), data, t))
}

fn transform(
    triple: &Triple,
    which: Which,
    from: Option<f64>,
    to: Option<f64>,
    grid: usize,
    im: f64,
) -> Result<Outcome> {
    let p = triple.params()?;
    let (lo, hi) = match which {
        Which::Cauchy => {
            let s = measures::support(&p);
            let pad = 0.25 * s.width();
            (from.unwrap_or((s.lo - pad).max(-pad)), to.unwrap_or(s.hi + pad))
        }
        Which::R => {
            let z1 = transforms::gfg_r_branch_point(p.theta, p.lambda);
            (from.unwrap_or(-z1), to.unwrap_or(0.9 * z1))
        }
        Which::S => (from.unwrap_or(0.9 * transforms::s_domain_lower(&SFamily::Gfg(p))), to.unwrap_or(0.0)),
    };
    if !(hi > lo) {
        return Err(Error::Usage(format!("empty range [{lo}, {hi}]")));
    }
    let zs: Vec<f64> =
        if grid == 1 { vec![lo] } else { (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect() };
    let mut t = Table::new(&["z_re", "z_im", "value_re", "value_im"]);
    let mut pts = Vec::with_capacity(zs.len());
    for &x in &zs {
        let (z, v) = match which {
            Which::Cauchy => {
                if !(im > 0.0) {
                    return Err(Error::Usage("--im must be positive".into()));
                }
                let z = C64::new(x, im);
                (z, transforms::cauchy_transform(&p, z)?)
            }
            Which::R => {
                let z = C64::new(x, 0.0);
                (z, transforms::r_transform(&RFamily::Gfg(p), z)?)
            }
            Which::S => (C64::new(x, 0.0), C64::new(transforms::s_transform(&SFamily::Gfg(p), x)?, 0.0)),
        };
        t.push(vec![num(z.re), num(z.im), num(v.re), num(v.im)]);
        pts.push(json!({"z": [z.re, z.im], "value": [v.re, v.im]}));
    }
    let which_s = match which {
        Which::Cauchy => "cauchy",
        Which::R => "r",
        Which::S => "s",
    };
    let mut params = triple.json();
    params["which"] = json!(which_s);
    Ok(Outcome::new("transform", params, json!({"which": which_s, "points": pts}), t))
}

fn moments(triple: &Triple, n: usize) -> Result<Outcome> {
    if n == 0 {
        return Err(Error::Usage("--n must be at least 1".into()));
    }
    let e = triple.exact()?;
    let m = cumulants::moments(&e, n)?;
    let k = cumulants::free_cumulants(&e, n)?;
    let mut t = Table::new(&["n", "moment", "free_cumulant"]);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (ms, ks) = (format_rational(&m[i]), format_rational(&k[i]));
        t.push(vec![(i + 1).to_string(), ms.clone(), ks.clone()]);
        rows.push(json!({"n": i + 1, "moment": ms, "free_cumulant": ks}));
    }
    let mut params = triple.json();
    params["n"] = json!(n);
    Ok(Outcome::new("moments", params, json!({"rows": rows}), t))
}

/// One line of a verification run.
struct Check {
    suite: &'static str,
    name: String,
    params: String,
    value: f64,
    threshold: f64,
    pass: Option<bool>,
    note: Option<String>,
}

impl Check {
    fn json(&self) -> Value {
        json!({
            "suite": self.suite, "check": self.name, "params": self.params,
            "value": self.value, "threshold": self.threshold,
            "status": match self.pass { Some(true) => "pass", Some(false) => "fail", None => "skipped" },
            "note": self.note,
        })
    }
}

fn free_suite(p: &GfgParams, label: &str, tol: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for id in IdentityId::ALL {
        let sets: Vec<IdentityParams> =
            if id.takes_gfg() { vec![IdentityParams::Gfg(*p)] } else { convolution::default_param_sets(id) };
        for ip in sets {
            let pl = if id.takes_gfg() { label.to_string() } else { ip.to_string() };
            if id.takes_gfg() && !convolution::applies_to(id, p) {
                out.push(Check {
                    suite: "free",
                    name: id.as_str().into(),
                    params: pl,
                    value: f64::NAN,
                    threshold: tol,
                    pass: None,
                    note: Some("needs lambda > 1".into()),
                });
                continue;
            }
            let r = convolution::verify_identity(id, &ip, None, tol)?;
            out.push(Check {
                suite: "free",
                name: id.as_str().into(),
                params: pl,
                value: r.max_abs_deviation,
                threshold: tol,
                pass: Some(r.pass),
                note: r.warning,
            });
        }
    }
    Ok(out)
}

fn classical_suite(p: &GfgParams, label: &str, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let z = gibbs::partition_function(p);
    let zq = gibbs::partition_function_quadrature(p, 1e-12)?;
    let rel = (z - zq.value).abs() / z;
    out.push(Check {
        suite: "classical",
        name: "PARTITION_FUNCTION".into(),
        params: label.into(),
        value: rel,
        threshold: 1e-6,
        pass: Some(rel < 1e-6),
        note: None,
    });
    let pe = pearson_max(p, 100)?;
    out.push(Check {
        suite: "classical",
        name: "PEARSON".into(),
        params: label.into(),
        value: pe,
        threshold: 1e-10,
        pass: Some(pe <= 1e-10),
        note: None,
    });
    for (k, id) in ClassicalIdentity::ALL.into_iter().enumerate() {
        if id != ClassicalIdentity::RhoMe && p.is_lambda_one() {
            out.push(Check {
                suite: "classical",
                name: id.as_str().into(),
                params: label.into(),
                value: f64::NAN,
                threshold: classical::ks_threshold(CLASSICAL_N),
                pass: None,
                note: Some("needs lambda > 1".into()),
            });
            continue;
        }
        let r = classical::verify_classical_identity(id, p, CLASSICAL_N, RngStream::new(seed, k as u64))?;
        out.push(Check {
            suite: "classical",
            name: id.as_str().into(),
            params: r.params,
            value: r.ks,
            threshold: r.threshold,
            pass: Some(r.pass),
            note: None,
        });
    }
    Ok(out)
}

/// Points `s u/(1-u)` on a uniform grid in `u`, `s` the split point.
fn gibbs_grid(p: &GfgParams, n: usize) -> Vec<f64> {
    let s = if p.is_lambda_one() { p.t * p.t / p.theta } else { p.shift() };
    (1..=n).map(|i| i as f64 / (n + 1) as f64).map(|u| s * u / (1.0 - u)).collect()
}

fn pearson_max(p: &GfgParams, n: usize) -> Result<f64> {
    gibbs_grid(p, n).iter().try_fold(0.0f64, |m, &x| Ok(m.max(gibbs::pearson_residual(p, x)?.abs())))
}

fn entropy_suite(p: &GfgParams, label: &str) -> Result<Vec<Check>> {
    let c = |name: &str, value: f64, threshold: f64, pass: bool| Check {
        suite: "entropy",
        name: name.into(),
        params: label.into(),
        value,
        threshold,
        pass: Some(pass),
        note: None,
    };
    if p.lambda >= p.boundary() {
        return Ok(vec![Check {
            suite: "entropy",
            name: "EQUILIBRIUM".into(),
            params: label.into(),
            value: f64::NAN,
            threshold: f64::NAN,
            pass: None,
            note: Some(format!("needs lambda < 1 + t/theta = {}", p.boundary())),
        }]);
    }
    let s = measures::support(p);
    let el = grid_points(s.lo, s.hi, 50)?
        .iter()
        .try_fold(0.0f64, |m, &x| Ok::<_, Error>(m.max(equilibrium::el_residual(p, x)?.abs())))?;
    let ep = equilibrium::endpoint_equations(p)?;
    let gap = ep.eq0.abs().max((ep.eq2 - 2.0).abs());
    let spread = equilibrium::effective_potential_spread(p, 50)?;
    let probe = equilibrium::maximality_probe(p, &ProbeSpec::default())?;
    Ok(vec![
        c("EULER_LAGRANGE", el, 1e-10, el <= 1e-10),
        c("ENDPOINTS", gap, 1e-8, gap <= 1e-8 && equilibrium::gaps_vanish(&ep)),
        c("POTENTIAL_SPREAD", spread, 1e-4, spread < 1e-4),
        c("MAXIMALITY", probe.min_margin, ProbeSpec::default().margin, probe.pass),
    ])
}

fn verify(suite: Suite, triple: &Triple, seed: u64) -> Result<Outcome> {
    let p = triple.params()?;
    let label = triple.label();
    let mut checks = Vec::new();
    if matches!(suite, Suite::Free | Suite::All) {
        checks.extend(free_suite(&p, &label, tolerance()?)?);
    }
    if matches!(suite, Suite::Classical | Suite::All) {
        checks.extend(classical_suite(&p, &label, seed)?);
    }
    if matches!(suite, Suite::Entropy | Suite::All) {
        checks.extend(entropy_suite(&p, &label)?);
    }
    let mut t = Table::new(&["suite", "check", "params", "value", "threshold", "status"]);
    for c in &checks {
        let st = match c.pass {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "skipped",
        };
        t.push(vec![c.suite.into(), c.name.clone(), c.params.clone(), num(c.value), num(c.threshold), st.into()]);
    }
    let failed = checks.iter().filter(|c| c.pass == Some(false)).count();
    let passed = checks.iter().filter(|c| c.pass == Some(true)).count();
    let mut params = triple.json();
    params["suite"] = json!(format!("{suite:?}").to_lowercase());
    let data = json!({
        "passed": passed, "failed": failed,
        "checks": checks.iter().map(Check::json).collect::<Vec<_>>(),
    });
    let mut o = Outcome::new("verify", params, data, t);
    o.ok = failed == 0;
    if matches!(suite, Suite::Classical | Suite::All) {
        o.seed = Some(seed);
    }
    Ok(o)
}

#[allow(clippy::too_many_arguments)]
fn rmt_cmd(
    identity: &str,
    dim: usize,
    seeds: usize,
    triple: (Option<String>, Option<String>, Option<String>),
    p: Option<f64>,
    q: Option<f64>,
    n: Option<u32>,
    seed: u64,
) -> Result<Outcome> {
    let id: IdentityId = identity.parse().map_err(|e: fgamma_core::Error| Error::Usage(e.to_string()))?;
    let mut params = rmt::RmtParams::default_for(id)?;
    match &mut params {
        RmtParams::Gfg(g) => {
            let tr = Triple {
                t: triple.0.unwrap_or_else(|| g.t.to_string()),
                theta: triple.1.unwrap_or_else(|| g.theta.to_string()),
                lambda: triple.2.unwrap_or_else(|| g.lambda.to_string()),
            };
            *g = tr.params()?;
        }
        RmtParams::Ratio { p: pp, q: qq } => {
            *pp = p.unwrap_or(*pp);
            *qq = q.unwrap_or(*qq);
        }
        RmtParams::InvSum { p: pp, n: nn } => {
            *pp = p.unwrap_or(*pp);
            *nn = n.unwrap_or(*nn);
        }
    }
    if dim < 2 {
        return Err(Error::Usage("--dim must be at least 2".into()));
    }
    let r = rmt::run_identity(id, &params, dim, seed, seeds)?;
    let mut t = Table::new(&["stream", "ks", "w1", "atom_fraction"])
        .comment("identity", id.as_str())
        .comment("expected_atom", num(r.expected_atom));
    for s in &r.seeds {
        t.push(vec![s.stream.to_string(), num(s.ks), s.w1.map_or(String::new(), num), num(s.atom_fraction)]);
    }
    let pj = json!({"identity": id.as_str(), "dim": dim, "seeds": seeds, "params": params.to_string()});
    let mut o = Outcome::new("rmt", pj, serde_json::to_value(&r)?, t);
    o.seed = Some(seed);
    o.ok = r.pass;
    Ok(o)
}

fn gibbs_cmd(triple: &Triple, grid: usize) -> Result<Outcome> {
    let p = triple.params()?;
    if grid == 0 {
        return Err(Error::Usage("grid needs at least one point".into()));
    }
    let z = gibbs::partition_function(&p);
    let zq = gibbs::partition_function_quadrature(&p, 1e-12)?;
    let xs = gibbs_grid(&p, grid);
    let mut t = Table::new(&["x", "density", "pearson_residual"]).comment("partition_function", num(z));
    let mut pts = Vec::with_capacity(xs.len());
    let mut pmax = 0.0f64;
    for &x in &xs {
        let d = gibbs::gibbs_density(&p, x);
        let r = gibbs::pearson_residual(&p, x)?;
        pmax = pmax.max(r.abs());
        t.push(vec![num(x), num(d), num(r)]);
        pts.push(json!({"x": x, "density": d, "pearson_residual": r}));
    }
    let data = json!({
        "partition_function": z,
        "partition_function_quadrature": zq.value,
        "quadrature_error": zq.error,
        "pearson_residual_max": pmax,
        "points": pts,
    });
    Ok(Outcome::new("gibbs", triple.json(), data, t))
}

fn entropy_cmd(triple: &Triple) -> Result<Outcome> {
    let p = triple.params()?;
    let probe = equilibrium::maximality_probe(&p, &ProbeSpec::default())?;
    let c = probe.candidate;
    let mut t = Table::new(&["family", "magnitude", "entropy", "margin"])
        .comment("free_entropy", num(c.total))
        .comment("logarithmic_energy", num(c.logarithmic_energy))
        .comment("potential_term", num(c.potential_term));
    let mut fams = Vec::new();
    for f in &probe.families {
        for (m, e) in f.magnitudes.iter().zip(&f.entropies) {
            t.push(vec![f.name.clone(), num(*m), num(*e), num(c.total - e)]);
        }
        fams.push(json!({"family": f.name, "magnitudes": f.magnitudes, "entropies": f.entropies}));
    }
    let data = json!({
        "entropy": {"logarithmic_energy": c.logarithmic_energy, "potential_term": c.potential_term, "total": c.total, "error": c.error},
        "probe": {"families": fams, "min_margin": probe.min_margin, "pass": probe.pass},
    });
    let mut o = Outcome::new("entropy", triple.json(), data, t);
    o.ok = probe.pass;
    Ok(o)
}

fn finite_free_cmd(triple: &Triple, dims: &[usize]) -> Result<Outcome> {
    let p = triple.params()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Usage("--dims needs positive degrees".into()));
    }
    let rows = finite_free::convergence_study(&p, dims)?;
    let mut t = Table::new(&["d", "w1", "ks", "min_root", "max_root", "residual_max", "warning"]);
    let mut js = Vec::new();
    for r in &rows {
        t.push(vec![
            r.d.to_string(),
            num(r.w1),
            num(r.ks),
            num(r.min_root),
            num(r.max_root),
            num(r.residual_max),
            r.warning.clone().unwrap_or_default(),
        ]);
        js.push(json!({
            "d": r.d, "w1": r.w1, "ks": r.ks, "min_root": r.min_root, "max_root": r.max_root,
            "residual_max": r.residual_max, "warning": r.warning,
        }));
    }
    let mut params = triple.json();
    params["dims"] = json!(dims);
    Ok(Outcome::new("finite-free", params, json!({"rows": js}), t))
}

fn dispatch(cmd: Command) -> Result<(Outcome, Common)> {
    Ok(match cmd {
        Command::Density { triple, grid, common } => (density(&triple, grid)?, common),
        Command::Transform { triple, which, from, to, grid, im, common } => {
            (transform(&triple, which, from, to, grid, im)?, common)
        }
        Command::Moments { triple, n, common } => (moments(&triple, n)?, common),
        Command::Verify { suite, triple, common } => (verify(suite, &triple, common.seed)?, common),
        Command::Rmt { identity, dim, seeds, t, theta, lambda, p, q, n, common } => {
            (rmt_cmd(&identity, dim, seeds, (t, theta, lambda), p, q, n, common.seed)?, common)
        }
        Command::Gibbs { triple, grid, common } => (gibbs_cmd(&triple, grid)?, common),
        Command::Entropy { triple, common } => (entropy_cmd(&triple)?, common),
        Command::FiniteFree { triple, dims, common } => (finite_free_cmd(&triple, &dims)?, common),
    })
}

fn emit(o: Outcome, common: &Common, stdout: &mut dyn Write) -> Result<()> {
    let mut sink: Box<dyn Write + '_> = match &common.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(&mut *stdout),
    };
    match common.format {
        Format::Json => write_json(&mut sink, &Envelope::new(o.command, o.params, o.seed, o.data))?,
        Format::Csv => write_csv(&mut sink, &finish_table(o.table, &o.params, o.seed))?,
    }
    sink.flush()?;
    Ok(())
}

fn report_error(stderr: &mut dyn Write, kind: &str, message: &str) {
    let v = json!({"error": {"kind": kind, "message": message}});
    let _ = writeln!(stderr, "{v}");
}

/// Runs the command line and returns the exit status.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            report_error(stderr, "usage", e.to_string().trim());
            return 2;
        }
    };
    if let Err(e) = init_threads() {
        report_error(stderr, e.kind(), &e.to_string());
        return 2;
    }
    let result = dispatch(cli.command).and_then(|(o, common)| {
        let ok = o.ok;
        emit(o, &common, stdout).map(|_| ok)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            report_error(stderr, e.kind(), &e.to_string());
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(std::iter::once("fgamma").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn seeds_in_hex() {
        assert_eq!(parse_seed("0xC0FFEE").unwrap(), 0xC0FFEE);
        assert_eq!(parse_seed("12").unwrap(), 12);
        assert!(parse_seed("x").is_err());
    }

    #[test]
    fn unknown_flag_is_usage() {
        let (code, _, err) = call(&["density", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("\"usage\""));
    }

    #[test]
    fn density_csv_has_metadata() {
        let (code, out, _) = call(&["density", "--lambda", "3", "--grid", "3", "--format", "csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("# params: "));
        assert!(lines[1].starts_with("# seed: "));
        assert!(lines[2].starts_with("# version: "));
        assert_eq!(lines[3], "# atom: 0.5");
        assert_eq!(lines[4], "x,density");
        assert_eq!(lines.len(), 8);
    }
}
