use std::path::PathBuf;

use affine_ensemble::concentration::{build_operator, traces};
use affine_ensemble::kernels::{admissibility, density_of_states, kernel_closed, kernel_quadrature, KernelSummary};
use affine_ensemble::sampler::{batch_stats, poisson_binomial, sample, total_variation};
use affine_ensemble::variance::{
    asymptotic_constant, asymptotic_upper_bound, reports_csv, variance_report, Methods, VarianceReport, DEFAULT_DEPTH,
};
use affine_ensemble::verify::{self, Profile, MODULES};
use affine_ensemble::{Disc, KernelSpec, Normalization, Point};
use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::args::{parse_center, parse_point, parse_radius, KernelArgs};
use crate::output::{out_dir, svg, write_atomic};
use crate::CliError;

fn fmt_c(v: Complex64) -> String {
    let sign = if v.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.12e}{sign}{:.12e}i", v.re, v.im.abs())
}

fn describe(spec: &KernelSpec) -> String {
    let s = spec.summary();
    let mut out = s.variant.to_string();
    if let Some(b) = s.b {
        out += &format!(" B={b}");
    }
    if let Some(n) = s.n {
        out += &format!(" n={n}");
    }
    if let Some(a) = s.alpha {
        out += &format!(" alpha={a}");
    }
    out
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Args)]
pub struct KernelCmd {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    z: Point,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    w: Point,
    /// Also evaluate the frequency-side integral and compare.
    #[arg(long)]
    check_quadrature: bool,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
struct KernelOut {
    kernel: KernelSummary,
    z: [f64; 2],
    w: [f64; 2],
    value: [f64; 2],
    modulus: f64,
    diagonal1: [f64; 2],
    projection: Option<[f64; 2]>,
    quadrature: Option<[f64; 2]>,
    quadrature_rel_diff: Option<f64>,
}

const QUADRATURE_TOL: f64 = 1e-6;

pub fn kernel(cmd: KernelCmd) -> Result<(), CliError> {
    let spec = cmd.kernel.spec()?;
    let unit = spec.clone().with_normalization(Normalization::Diagonal1);
    let d1 = kernel_closed(&unit, cmd.z, cmd.w)?;
    // the alpha = 0 level has no projection normalization
    let c = admissibility(&unit).ok();
    let proj = c.map(|c| d1 / c);
    let value = match spec.normalization() {
        Normalization::Diagonal1 => d1,
        Normalization::Projection => proj.ok_or_else(|| CliError::Numeric("projection normalization undefined".into()))?,
    };
    let quad = if cmd.check_quadrature {
        let q = kernel_quadrature(&spec, cmd.z, cmd.w)?;
        Some((q, (q - value).norm() / value.norm()))
    } else {
        None
    };
    let arr = |v: Complex64| [v.re, v.im];
    if cmd.json {
        let out = KernelOut {
            kernel: spec.summary(),
            z: [cmd.z.x, cmd.z.s],
            w: [cmd.w.x, cmd.w.s],
            value: arr(value),
            modulus: value.norm(),
            diagonal1: arr(d1),
            projection: proj.map(arr),
            quadrature: quad.map(|q| arr(q.0)),
            quadrature_rel_diff: quad.map(|q| q.1),
        };
        println!("{}", json(&out)?);
    } else {
        println!("kernel      {}", describe(&spec));
        println!("value       {} ({})", fmt_c(value), spec.normalization());
        println!("modulus     {:.12e}", value.norm());
        println!("diagonal1   {}", fmt_c(d1));
        match (proj, c) {
            (Some(p), Some(c)) => println!("projection  {} (C_psi = {c:.12e})", fmt_c(p)),
            _ => println!("projection  undefined (alpha = 0, kernel not square integrable)"),
        }
        if let Some((q, r)) = quad {
            println!("quadrature  {}", fmt_c(q));
            println!("rel_diff    {r:.3e}");
        }
    }
    match quad {
        Some((_, r)) if !(r <= QUADRATURE_TOL) => {
            Err(CliError::Numeric(format!("closed form and quadrature differ by {r:.3e} > {QUADRATURE_TOL:e}")))
        }
        _ => Ok(()),
    }
}

#[derive(Debug, Args)]
pub struct ConstantsCmd {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: u32,
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
struct ConstantsOut {
    kernel: KernelSummary,
    c_psi: f64,
    density_of_states: f64,
    c_extrapolated: f64,
    c_integral: f64,
    c_upper_bound: f64,
    kappa: f64,
    kappa_r_squared: f64,
    sequence: Vec<(f64, f64)>,
}

pub fn constants(cmd: ConstantsCmd) -> Result<(), CliError> {
    let spec = cmd.kernel.spec()?;
    let c = admissibility(&spec)?;
    let rho = density_of_states(&spec)?;
    let a = asymptotic_constant(&spec, cmd.depth)?;
    let upper = asymptotic_upper_bound(&spec, a.kappa)?
        * match spec.normalization() {
            Normalization::Diagonal1 => 1.0,
            Normalization::Projection => c.powi(-2),
        };
    let out = ConstantsOut {
        kernel: spec.summary(),
        c_psi: c,
        density_of_states: rho,
        c_extrapolated: a.c_extrapolated,
        c_integral: a.c_integral,
        c_upper_bound: upper,
        kappa: a.kappa,
        kappa_r_squared: a.kappa_r_squared,
        sequence: a.sequence,
    };
    if cmd.json {
        println!("{}", json(&out)?);
        return Ok(());
    }
    println!("kernel             {}", describe(&spec));
    println!("C_psi              {:.12e}", out.c_psi);
    println!("density_of_states  {:.12e}", out.density_of_states);
    println!("c_extrapolated     {:.12e} ({})", out.c_extrapolated, spec.normalization());
    println!("c_integral         {:.12e}", out.c_integral);
    println!("c_upper_bound      {:.12e}", out.c_upper_bound);
    println!("kappa              {:.12e}", out.kappa);
    println!("kappa_r_squared    {:.12}", out.kappa_r_squared);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    All,
    Geometric,
    Double,
    Trace,
}

#[derive(Debug, Args)]
pub struct VarianceCmd {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Comma-separated radii in (0, 1).
    #[arg(long = "R", value_name = "R", value_delimiter = ',', value_parser = parse_radius,
          default_values_t = affine_ensemble::variance::DEFAULT_RADII)]
    r: Vec<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: u32,
    /// Also estimate the asymptotic constant and kappa.
    #[arg(long)]
    asymptotic: bool,
    /// Directory for variance.csv and variance.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Largest accepted relative spread between methods.
const AGREEMENT_TOL: f64 = 0.01;

#[derive(Serialize)]
struct VarianceOut<'a> {
    kernel: KernelSummary,
    depth: u32,
    rows: &'a [VarianceReport],
}

pub fn variance(cmd: VarianceCmd) -> Result<(), CliError> {
    let spec = cmd.kernel.spec()?;
    let methods = match cmd.method {
        MethodArg::All => Methods::ALL,
        MethodArg::Geometric => Methods { geometric: true, double: false, trace: false },
        MethodArg::Double => Methods { geometric: false, double: true, trace: false },
        MethodArg::Trace => Methods { geometric: false, double: false, trace: true },
    };
    let asym = if cmd.asymptotic { Some(asymptotic_constant(&spec, cmd.depth)?) } else { None };
    let mut rows = Vec::with_capacity(cmd.r.len());
    for &r in &cmd.r {
        let mut row = variance_report(&spec, r, cmd.depth, methods)?;
        if let Some(a) = &asym {
            row.c_estimate = Some(a.c_extrapolated);
            row.kappa = Some(a.kappa);
        }
        rows.push(row);
    }
    let csv = reports_csv(&rows);
    let dir = out_dir(cmd.out_dir);
    write_atomic(&dir.join("variance.csv"), &csv)?;
    let body = json(&VarianceOut { kernel: spec.summary(), depth: cmd.depth, rows: &rows })?;
    write_atomic(&dir.join("variance.json"), &(body + "\n"))?;
    print!("{csv}");

    for row in &rows {
        let v = row.values();
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        if v.len() > 1 && (hi - lo) > AGREEMENT_TOL * hi {
            return Err(CliError::Numeric(format!(
                "methods disagree at R = {}: spread {:.3e} exceeds {}%",
                row.r,
                (hi - lo) / hi,
                AGREEMENT_TOL * 100.0
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SampleCmd {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Disc center `x,s`.
    #[arg(long, value_parser = parse_center, default_value = "0,1", allow_hyphen_values = true)]
    center: Point,
    #[arg(long = "R", value_name = "R", value_parser = parse_radius, default_value = "0.8")]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: u32,
    /// Number of samples, using seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    samples: usize,
    /// Print count statistics against the trace predictions instead of points.
    #[arg(long)]
    stats: bool,
    /// Write the JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an SVG of the first sample in the disc model.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Serialize)]
struct RegionOut {
    center: [f64; 2],
    #[serde(rename = "R")]
    r: f64,
}

#[derive(Serialize)]
struct SampleOut {
    kernel: KernelSummary,
    region: RegionOut,
    seed: u64,
    points: Vec<[f64; 2]>,
}

pub fn sample_cmd(cmd: SampleCmd) -> Result<(), CliError> {
    let spec = cmd.kernel.spec()?;
    if cmd.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let region = Disc::new(cmd.center, cmd.r).map_err(|e| CliError::Usage(e.to_string()))?;
    let op = build_operator(&spec, &region, cmd.depth)?;

    if cmd.stats {
        let t = traces(&op);
        let st = batch_stats(&op, cmd.samples, cmd.seed);
        let tv = total_variation(&st.counts, &poisson_binomial(op.eigenvalues()));
        let mut s = String::new();
        s += &format!("samples          {}\n", st.samples);
        s += &format!("nodes            {}\n", op.grid().len());
        s += &format!("expected         {:.6} (trace)\n", t.expected);
        s += &format!("mean             {:.6} +- {:.6} (z = {:.3})\n", st.mean, st.mean_se, (st.mean - t.expected) / st.mean_se);
        s += &format!("variance_trace   {:.6}\n", t.variance);
        s += &format!("variance         {:.6} +- {:.6} (z = {:.3})\n", st.var, st.var_se, (st.var - t.variance) / st.var_se);
        s += &format!("tv_count_law     {tv:.6}\n");
        let short = |h: &[f64]| h.iter().take(2).sum::<f64>();
        s += &format!(
            "pairs_below_0.1  {:.6e} (poisson {:.6e})\n",
            short(&st.pair_hist.counts),
            short(&st.poisson_pairs.counts)
        );
        emit(cmd.out.as_ref(), &s)?;
        return Ok(());
    }

    let mut text = String::new();
    let mut first = None;
    for k in 0..cmd.samples {
        let cfg = sample(&op, cmd.seed.wrapping_add(k as u64));
        let out = SampleOut {
            kernel: cfg.kernel.clone(),
            region: RegionOut { center: [cfg.region.center.x, cfg.region.center.s], r: cfg.region.radius },
            seed: cfg.seed,
            points: cfg.points.iter().map(|p| [p.x, p.s]).collect(),
        };
        if cmd.samples == 1 {
            text += &json(&out)?;
        } else {
            // one configuration per line
            text += &serde_json::to_string(&out).map_err(|e| CliError::Io(e.to_string()))?;
        }
        text.push('\n');
        first.get_or_insert(cfg);
    }
    emit(cmd.out.as_ref(), &text)?;
    if let (Some(path), Some(cfg)) = (cmd.svg, first) {
        write_atomic(&path, &svg(&cfg))?;
    }
    Ok(())
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Default,
    Strict,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    /// Comma-separated module names.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, value_enum, default_value_t = ProfileArg::Default)]
    tol_profile: ProfileArg,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

pub fn verify_cmd(cmd: VerifyCmd) -> Result<(), CliError> {
    if let Some(bad) = cmd.only.iter().find(|m| !MODULES.contains(&m.as_str())) {
        return Err(CliError::Usage(format!("unknown module '{bad}' (expected one of {})", MODULES.join(", "))));
    }
    let profile = match cmd.tol_profile {
        ProfileArg::Default => Profile::Default,
        ProfileArg::Strict => Profile::Strict,
    };
    let checks = verify::run(profile, &cmd.only);
    for c in &checks {
        println!(
            "{} {:<13} {:<48} {:>11.3e} <= {:<9.1e} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.name,
            c.value,
            c.tolerance,
            c.detail
        );
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    println!("{}/{} checks passed", checks.len() - failed.len(), checks.len());
    if let Some(path) = cmd.json {
        write_atomic(&path, &(json(&checks)? + "\n"))?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        let names: Vec<String> = failed.iter().map(|c| format!("{}: {}", c.module, c.name)).collect();
        Err(CliError::Numeric(format!("failed checks: {}", names.join("; "))))
    }
}
