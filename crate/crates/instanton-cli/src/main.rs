//! Batch command-line interface: wires JSON run configurations to the
//! library experiments and writes machine-readable artifacts (CSV, JSON,
//! optional SVG plots) atomically.

use clap::{Parser, Subcommand, ValueEnum};
use instanton::ade::{self, FamilySpec, RootSystem, ZetaPath};
use instanton::ale;
use instanton::chern;
use instanton::experiments::{
    audit_core_prediction, bubbling_profile, fit_exponent, lp_scan, region_rate_table,
    reparameterized_gamma, standard_grid, sweep_f, SweepParams, A1_ORBIFOLD_EULER_MASS,
};
use instanton::glue::{
    classify_region, seam_audit_csck, BackgroundOrbifoldMetric, Flavor, GluingSchedule,
};
use instanton::integrate::{
    radial_integral, tail_extrapolate, IntegralPlan, TestFunction,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SCHEMA_VERSION: &str = "1";

#[derive(Parser)]
#[command(name = "instanton", about = "ALE instanton and glued-family numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap the worker thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit nonzero when any acceptance-style row fails.
    #[arg(long, global = true)]
    strict: bool,
    /// Output formats (repeatable).
    #[arg(long, global = true, value_enum)]
    format: Vec<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print and export the configured ADE root system.
    RootSystem,
    /// Classify the configured deformation path against the root walls.
    CheckNondegenerate,
    /// Curvature mass of the Eguchi-Hanson family with tail extrapolation.
    C2Integral,
    /// Sweep the fibre integral over the t grid (with seam and curvature
    /// audits).
    Sweep,
    /// Sweep and fit the deviation exponent.
    Fit,
    /// Core curvature mass versus the orbifold Euler prediction.
    Bubbling,
    /// L^p norms of the Monge-Ampere source against epsilon (K3 flavor).
    LpScan,
    /// Pointwise second-Chern transgression identity residuals.
    BottChernCheck,
    /// Per-region convergence-rate table.
    RegionRates,
}

/// Full run configuration. Every field has a default; each run emits its
/// resolved configuration next to the results.
#[derive(Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    schema_version: String,
    family: FamilySpec,
    flavor: Flavor,
    beta: f64,
    delta: f64,
    background_quartic: f64,
    background_sextic: f64,
    phi0_coeff: f64,
    psi_coeff: f64,
    test_function: TestFunction,
    grid_points: usize,
    grid_ratio: f64,
    /// Largest grid t; defaults to 0.9 times the validity bound.
    grid_t_max: Option<f64>,
    abs_tol: f64,
    mc_n: usize,
    symmetry_threshold: f64,
    a_values: Vec<f64>,
    tail_radii: Vec<f64>,
    p_list: Vec<f64>,
    bott_chern_points: usize,
    quadrature_nodes: usize,
    bump_coeff: f64,
    seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let (rs, path) = ade::a1_standard_family();
        RunConfig {
            schema_version: SCHEMA_VERSION.to_string(),
            family: FamilySpec::from_parts(&rs, &path),
            flavor: Flavor::CscK,
            beta: 0.51,
            delta: -1.9,
            background_quartic: 0.1,
            background_sextic: 0.0,
            phi0_coeff: 0.0,
            psi_coeff: 0.0,
            test_function: TestFunction::bump(1.0),
            grid_points: 10,
            grid_ratio: 2.0,
            grid_t_max: None,
            abs_tol: 1e-8,
            mc_n: 1_000_000,
            symmetry_threshold: 1e-6,
            a_values: vec![0.5, 1.0, 2.0],
            tail_radii: vec![20.0, 40.0, 80.0],
            p_list: vec![1.1, 4.0 / 3.0],
            bott_chern_points: 100,
            quadrature_nodes: 32,
            bump_coeff: 0.3,
            seed: 0,
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

fn load_config(cli: &Cli) -> Result<RunConfig, AnyError> {
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| format!("config {}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "unsupported config schema version {:?} (expected {SCHEMA_VERSION:?})",
            cfg.schema_version
        )
        .into());
    }
    Ok(cfg)
}

fn sweep_params(cfg: &RunConfig) -> SweepParams {
    SweepParams {
        flavor: cfg.flavor,
        beta: cfg.beta,
        delta: cfg.delta,
        background: BackgroundOrbifoldMetric {
            quartic: cfg.background_quartic,
            sextic: cfg.background_sextic,
        },
        phi0_coeff: cfg.phi0_coeff,
        psi_coeff: cfg.psi_coeff,
        abs_tol: cfg.abs_tol,
        seed: cfg.seed,
    }
}

fn family(cfg: &RunConfig) -> Result<(RootSystem, ZetaPath), AnyError> {
    Ok(cfg.family.to_parts()?)
}

fn grid(cfg: &RunConfig, path: &ZetaPath, flavor: Flavor) -> Result<Vec<f64>, AnyError> {
    let (p, _) = ade::vanishing_order(path)?;
    let mut g = standard_grid(p as u32, cfg.beta, flavor, cfg.grid_points);
    if let Some(t_max) = cfg.grid_t_max {
        g = (0..cfg.grid_points)
            .map(|i| t_max / cfg.grid_ratio.powi(i as i32))
            .collect();
    } else if cfg.grid_ratio != 2.0 {
        let t_max = g[0];
        g = (0..cfg.grid_points)
            .map(|i| t_max / cfg.grid_ratio.powi(i as i32))
            .collect();
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Artifact plumbing
// ---------------------------------------------------------------------------

/// Write a file atomically: temp file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), AnyError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_file_name(format!(
        ".{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("artifact")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn formats(cli: &Cli) -> Vec<Format> {
    if cli.format.is_empty() {
        vec![Format::Csv, Format::Json]
    } else {
        cli.format.clone()
    }
}

/// JSON result artifact: payload wrapped in a schema-versioned envelope.
fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<(), AnyError> {
    let envelope = serde_json::json!({ "schema_version": SCHEMA_VERSION, "data": value });
    let mut body = serde_json::to_string_pretty(&envelope)?;
    body.push('\n');
    write_atomic(&out.join(name), body.as_bytes())
}

/// The resolved configuration is written as a plain `RunConfig` document so
/// it can be fed back through `--config` unchanged.
fn write_resolved_config(out: &Path, cfg: &RunConfig) -> Result<(), AnyError> {
    let mut body = serde_json::to_string_pretty(cfg)?;
    body.push('\n');
    write_atomic(&out.join("resolved_config.json"), body.as_bytes())
}

fn write_csv(out: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), AnyError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    // every artifact carries the schema version; for CSV it is a column
    let mut full_header = vec!["schema_version"];
    full_header.extend_from_slice(header);
    w.write_record(&full_header)?;
    for row in rows {
        let mut full_row = vec![SCHEMA_VERSION.to_string()];
        full_row.extend_from_slice(row);
        w.write_record(&full_row)?;
    }
    let bytes = w.into_inner()?;
    write_atomic(&out.join(name), &bytes)
}

/// Minimal hand-rolled log-log scatter plot with an optional fitted line.
fn write_svg_loglog(
    out: &Path,
    name: &str,
    title: &str,
    points: &[(f64, f64)],
    fit: Option<(f64, f64)>,
) -> Result<(), AnyError> {
    let (w, h, m) = (640.0, 480.0, 60.0);
    let ok: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let mut svg = String::new();
    svg.push_str(&format!("<!-- schema_version {SCHEMA_VERSION} -->\n"));
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{title}</text>\n",
        w / 2.0
    ));
    if ok.len() >= 2 {
        let (x0, x1) = ok.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| {
            (a.0.min(p.0), a.1.max(p.0))
        });
        let (y0, y1) = ok.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| {
            (a.0.min(p.1), a.1.max(p.1))
        });
        let sx = |x: f64| m + (x - x0) / (x1 - x0).max(1e-300) * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - y0) / (y1 - y0).max(1e-300) * (h - 2.0 * m);
        svg.push_str(&format!(
            "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>\n",
            w - 2.0 * m,
            h - 2.0 * m
        ));
        if let Some((slope, c)) = fit {
            let line = |x: f64| slope * x + c.ln();
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#c33\" stroke-width=\"1.5\"/>\n",
                sx(x0),
                sy(line(x0)),
                sx(x1),
                sy(line(x1))
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"44\" font-size=\"12\" text-anchor=\"middle\">fitted slope {slope:.3}</text>\n",
                w / 2.0
            ));
        }
        for &(x, y) in &ok {
            svg.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3.5\" fill=\"#236\"/>\n",
                sx(x),
                sy(y)
            ));
        }
    } else {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">no positive data</text>\n",
            w / 2.0,
            h / 2.0
        ));
    }
    svg.push_str("</svg>\n");
    write_atomic(&out.join(name), svg.as_bytes())
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_root_system(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    let (rs, _) = family(cfg)?;
    #[derive(Serialize)]
    struct Report {
        kind: String,
        rank: usize,
        root_count: usize,
        gamma_order: u64,
        roots: Vec<Vec<i64>>,
    }
    let report = Report {
        kind: format!("{:?}", rs.kind),
        rank: rs.rank,
        root_count: rs.roots.len(),
        gamma_order: rs.gamma_order(),
        roots: rs.roots.clone(),
    };
    println!(
        "{:?}{} root system: {} roots, |Gamma| = {}",
        rs.kind,
        rs.rank,
        report.root_count,
        report.gamma_order
    );
    for f in formats(cli) {
        match f {
            Format::Json => write_json(&cli.out, "root_system.json", &report)?,
            Format::Csv => {
                let rows: Vec<Vec<String>> = report
                    .roots
                    .iter()
                    .map(|r| {
                        vec![r.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")]
                    })
                    .collect();
                write_csv(&cli.out, "root_system.csv", &["root"], &rows)?;
            }
            Format::Svg => {}
        }
    }
    Ok(true)
}

fn cmd_check_nondegenerate(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    let (rs, path) = family(cfg)?;
    let verdict = ade::is_nondegenerate(&path, &rs)?;
    #[derive(Serialize)]
    struct Report {
        verdict: String,
        vanishing_order: Option<usize>,
        witness_root: Option<Vec<i64>>,
        predicted_holder_exponent: Option<String>,
    }
    let report = match &verdict {
        ade::Verdict::Nondegenerate { p } => Report {
                verdict: "nondegenerate".into(),
            vanishing_order: Some(*p),
            witness_root: None,
            predicted_holder_exponent: Some(format!("1/{}", path.d)),
        },
        ade::Verdict::DegenerateWall { root } => Report {
                verdict: "degenerate-wall".into(),
            vanishing_order: None,
            witness_root: Some(root.clone()),
            predicted_holder_exponent: None,
        },
        ade::Verdict::DegenerateOrder { p, d } => Report {
                verdict: format!("degenerate-order (p = {p} exceeds d = {d})"),
            vanishing_order: Some(*p),
            witness_root: None,
            predicted_holder_exponent: None,
        },
    };
    match (&report.witness_root, report.verdict.as_str()) {
        (Some(root), _) => println!("verdict: degenerate (witness root {root:?})"),
        (None, "nondegenerate") => println!(
            "verdict: nondegenerate (vanishing order {}, predicted exponent 1/{})",
            report.vanishing_order.unwrap(),
            path.d
        ),
        (None, v) => println!("verdict: {v}"),
    }
    for f in formats(cli) {
        match f {
            Format::Json => write_json(&cli.out, "nondegeneracy.json", &report)?,
            Format::Csv => write_csv(
                &cli.out,
                "nondegeneracy.csv",
                &["verdict", "vanishing_order", "witness_root"],
                &[vec![
                    report.verdict.clone(),
                    report.vanishing_order.map(|p| p.to_string()).unwrap_or_default(),
                    report
                        .witness_root
                        .as_ref()
                        .map(|r| format!("{r:?}"))
                        .unwrap_or_default(),
                ]],
            )?,
            Format::Svg => {}
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct C2Row {
    a: f64,
    cumulative: Vec<(f64, f64)>,
    extrapolated: f64,
    residual: f64,
}

fn cmd_c2_integral(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    let rows: Result<Vec<C2Row>, instanton::Error> = cfg
        .a_values
        .par_iter()
        .map(|&a| {
            let mut cumulative = Vec::new();
            let mut acc = 0.0;
            let mut r_prev = 0.0;
            for &radius in &cfg.tail_radii {
                let plan = IntegralPlan::radial(r_prev, radius, 2);
                acc += radial_integral(
                    &|r| Ok(instanton::integrate::core_c2_closed_form(a, r)),
                    &plan,
                )?;
                cumulative.push((radius, acc));
                r_prev = radius;
            }
            let (limit, residual) = tail_extrapolate(&cumulative, 8.0)?;
            Ok(C2Row { a, cumulative, extrapolated: limit, residual })
        })
        .collect();
    let rows = rows?;
    let mut pass = true;
    for row in &rows {
        println!(
            "c2 integral (a = {}): {:.6} +/- {:.1e} (tail residual)",
            row.a, row.extrapolated, row.residual
        );
        if (row.extrapolated - 1.5).abs() > 0.005 {
            pass = false;
        }
    }
    let spread = rows
        .iter()
        .map(|r| r.extrapolated)
        .fold(f64::NEG_INFINITY, f64::max)
        - rows.iter().map(|r| r.extrapolated).fold(f64::INFINITY, f64::min);
    println!("scale-invariance spread over a-values: {spread:.2e}");
    if spread > 1e-3 {
        pass = false;
    }
    for f in formats(cli) {
        match f {
            Format::Json => write_json(&cli.out, "c2_integral.json", &rows)?,
            Format::Csv => {
                let data: Vec<Vec<String>> = rows
                    .iter()
                    .flat_map(|row| {
                        row.cumulative.iter().map(move |&(r, v)| {
                            vec![
                                row.a.to_string(),
                                r.to_string(),
                                format!("{v:.12e}"),
                                format!("{:.12e}", row.extrapolated),
                            ]
                        })
                    })
                    .collect();
                write_csv(
                    &cli.out,
                    "c2_integral.csv",
                    &["a", "radius", "cumulative", "extrapolated"],
                    &data,
                )?;
            }
            Format::Svg => {}
        }
    }
    Ok(pass)
}

fn curvature_audit(
    cli: &Cli,
    cfg: &RunConfig,
    schedule: &GluingSchedule,
    a: f64,
) -> Result<(), AnyError> {
    let params = sweep_params(cfg);
    let flat = ale::flat_triple();
    let phi0 = instanton::glue::model_quartic_field(cfg.phi0_coeff);
    let psi = instanton::glue::model_quartic_field(cfg.psi_coeff);
    let mut rows = Vec::new();
    let r_lo = 0.3 * schedule.boundaries()[0];
    let n = 48;
    for i in 0..n {
        let frac = (i as f64 + 0.5) / n as f64;
        let r = r_lo * (1.0f64 / r_lo).powf(frac);
        let p = [0.6 * r, 0.48 * r, 0.64 * r, 0.0];
        let h = match schedule.flavor {
            Flavor::CscK => instanton::glue::glued_metric_csck(
                p,
                schedule,
                a,
                &params.background,
            )?,
            Flavor::K3 => {
                let psi_ref: Option<&dyn instanton::jets::ScalarField> =
                    if cfg.psi_coeff != 0.0 { Some(&psi) } else { None };
                instanton::glue::glued_metric_k3(p, schedule, a, &phi0, psi_ref)?
            }
        };
        let rm = chern::riemann_data(&ale::herm_to_real_metric(&h))?;
        let c2 = chern::c2_density(&h)?;
        let om = ale::herm_to_kahler_form(&h);
        let f_t = chern::ma_source(&om, &flat.holomorphic_2form(p)?)?.value();
        rows.push(vec![
            format!("{r:.6e}"),
            format!("{:?}", classify_region(r, schedule)),
            format!("{:.6e}", rm.rm_norm2),
            format!("{c2:.6e}"),
            format!("{:.6e}", rm.ricci_norm),
            format!("{f_t:.6e}"),
        ]);
    }
    write_csv(
        &cli.out,
        "curvature_audit.csv",
        &["r", "region", "rm_norm2", "c2_density", "ricci_norm", "f_t"],
        &rows,
    )
}

fn run_sweep(cfg: &RunConfig) -> Result<instanton::experiments::SweepResult, AnyError> {
    let (rs, path) = family(cfg)?;
    let params = sweep_params(cfg);
    let g = grid(cfg, &path, params.flavor)?;
    Ok(sweep_f(&rs, &path, &cfg.test_function, &g, &params)?)
}

fn cmd_sweep(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    let sweep = run_sweep(cfg)?;
    println!(
        "swept {} grid points; F(0+) = {:.8} (background {:.8} + core {:.8})",
        sweep.points.len(),
        sweep.limit_value,
        sweep.background_part,
        sweep.core_limit_part
    );
    for f in formats(cli) {
        match f {
            Format::Json => write_json(&cli.out, "sweep.json", &sweep)?,
            Format::Csv => {
                let mut rows = Vec::new();
                for pt in &sweep.points {
                    for reg in &pt.fibre.regions {
                        rows.push(vec![
                            format!("{:.9e}", pt.t),
                            format!("{:?}", reg.region),
                            format!("{:.12e}", reg.value),
                            format!("{:.3e}", reg.error),
                            reg.mode.clone(),
                        ]);
                    }
                }
                write_csv(
                    &cli.out,
                    "sweep.csv",
                    &["t", "region", "value", "error_estimate", "mode"],
                    &rows,
                )?;
            }
            Format::Svg => {
                let pts: Vec<(f64, f64)> = sweep
                    .points
                    .iter()
                    .map(|p| (p.t, (p.fibre.value - sweep.limit_value).abs()))
                    .collect();
                write_svg_loglog(
                    &cli.out,
                    "sweep.svg",
                    "fibre integral deviation vs t",
                    &pts,
                    fit_exponent(&sweep).ok().map(|f| (f.gamma, f.c)),
                )?;
            }
        }
    }
    // audits at the largest grid point
    let (_, path) = family(cfg)?;
    let (p, _) = ade::vanishing_order(&path)?;
    let t0 = sweep.grid[0];
    let schedule = GluingSchedule::new(t0, p as u32, path.d, cfg.beta, cfg.delta, cfg.flavor)?;
    let a = path.zeta_c_norm(t0).sqrt();
    curvature_audit(cli, cfg, &schedule, a)?;
    if cfg.flavor == Flavor::CscK {
        let bg = sweep_params(cfg).background;
        let audit = seam_audit_csck(&schedule, a, &bg, 40)?;
        let rows: Vec<Vec<String>> = audit
            .iter()
            .map(|row| {
                vec![
                    format!("{:.6e}", row.r),
                    format!("{:?}", row.region),
                    format!("{:.6e}", row.min_eigenvalue),
                    format!("{:.3e}", row.seam_jump),
                ]
            })
            .collect();
        write_csv(
            &cli.out,
            "seam_audit.csv",
            &["r", "region", "min_eigenvalue", "seam_jump"],
            &rows,
        )?;
    }
    Ok(true)
}

fn cmd_fit(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    let sweep = run_sweep(cfg)?;
    let fit = fit_exponent(&sweep)?;
    #[derive(Serialize)]
    struct Report {
        gamma: f64,
        gamma_base: f64,
        c: f64,
        residual: f64,
        used: usize,
        excluded: usize,
        failed: bool,
        d: u32,
        limit_value: f64,
        config_hash: String,
    }
    let report = Report {
        gamma: fit.gamma,
        gamma_base: reparameterized_gamma(&fit, sweep.d),
        c: fit.c,
        residual: fit.residual,
        used: fit.used,
        excluded: fit.excluded,
        failed: fit.failed,
        d: sweep.d,
        limit_value: sweep.limit_value,
        config_hash: sweep.config_hash.clone(),
    };
    println!(
        "fitted exponent: gamma = {:.4} in the cover variable ({:.4} in the base), \
         C = {:.4}, log-residual {:.3}{}",
        report.gamma,
        report.gamma_base,
        report.c,
        report.residual,
        if report.failed { " [FAILED residual gate]" } else { "" }
    );
    for f in formats(cli) {
        match f {
            Format::Json => write_json(&cli.out, "fit.json", &report)?,
            Format::Csv => write_csv(
                &cli.out,
                "fit.csv",
                &["gamma", "gamma_base", "c", "residual", "used", "excluded", "failed"],
                &[vec![
                    format!("{:.6}", report.gamma),
                    format!("{:.6}", report.gamma_base),
                    format!("{:.6}", report.c),
                    format!("{:.6}", report.residual),
                    report.used.to_string(),
                    report.excluded.to_string(),
                    report.failed.to_string(),
                ]],
            )?,
            Format::Svg => {
                let pts: Vec<(f64, f64)> = sweep
                    .points
                    .iter()
                    .map(|p| (p.t, (p.fibre.value - sweep.limit_value).abs()))
                    .collect();
                write_svg_loglog(
                    &cli.out,
                    "fit.svg",
                    "fibre integral deviation vs t",
                    &pts,
                    Some((fit.gamma, fit.c)),
                )?;
            }
        }
    }
    Ok(!report.failed)
}

fn cmd_bubbling(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    let (rs, path) = family(cfg)?;
    let params = sweep_params(cfg);
    let g = grid(cfg, &path, params.flavor)?;
    let profile = bubbling_profile(&rs, &path, &cfg.test_function, &g, &params)?;
    let prediction = cfg.test_function.value_at_origin() * A1_ORBIFOLD_EULER_MASS;
    let consistent = audit_core_prediction(&profile, prediction);
    match profile.fitted_order {
        Some(order) => println!(
            "core mass deviation order {order:.3} in epsilon (audit vs {prediction}: {})",
            if consistent { "consistent" } else { "MISMATCH" }
        ),
        None => println!("core mass deviation at noise floor (audit: {consistent})"),
    }
    for f in formats(cli) {
        match f {
            Format::Json => write_json(&cli.out, "bubbling.json", &profile)?,
            Format::Csv => {
                let rows: Vec<Vec<String>> = profile
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            format!("{:.9e}", r.t),
                            format!("{:.9e}", r.epsilon),
                            format!("{:.6e}", r.core_radius),
                            format!("{:.12e}", r.core_mass),
                            format!("{:.12e}", r.prediction),
                            format!("{:.6e}", r.deviation),
                        ]
                    })
                    .collect();
                write_csv(
                    &cli.out,
                    "bubbling.csv",
                    &["t", "epsilon", "core_radius", "core_mass", "prediction", "deviation"],
                    &rows,
                )?;
            }
            Format::Svg => {
                let pts: Vec<(f64, f64)> = profile
                    .rows
                    .iter()
                    .map(|r| (r.epsilon, r.deviation))
                    .collect();
                write_svg_loglog(
                    &cli.out,
                    "bubbling.svg",
                    "core mass deviation vs epsilon",
                    &pts,
                    None,
                )?;
            }
        }
    }
    Ok(consistent && profile.fitted_order.map(|o| o >= 1.8).unwrap_or(true))
}

fn cmd_lp_scan(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    let (rs, path) = family(cfg)?;
    let mut params = sweep_params(cfg);
    params.flavor = Flavor::K3;
    let g = grid(cfg, &path, Flavor::K3)?;
    let rows = lp_scan(&rs, &path, &g, &cfg.p_list, &params)?;
    let mut pass = true;
    for row in &rows {
        let ok = (row.fitted_exponent - row.predicted_exponent).abs() <= 0.3;
        pass &= ok;
        println!(
            "p = {:.4}: fitted exponent {:.3} (predicted {:.3}, residual {:.3}) {}",
            row.p,
            row.fitted_exponent,
            row.predicted_exponent,
            row.residual,
            if ok { "ok" } else { "MISS" }
        );
    }
    for f in formats(cli) {
        match f {
            Format::Json => write_json(&cli.out, "lp_scan.json", &rows)?,
            Format::Csv => {
                let data: Vec<Vec<String>> = rows
                    .iter()
                    .flat_map(|row| {
                        row.norms.iter().map(move |&(eps, norm)| {
                            vec![
                                format!("{:.6}", row.p),
                                format!("{eps:.9e}"),
                                format!("{norm:.12e}"),
                                format!("{:.4}", row.fitted_exponent),
                                format!("{:.4}", row.predicted_exponent),
                            ]
                        })
                    })
                    .collect();
                write_csv(
                    &cli.out,
                    "lp_scan.csv",
                    &["p", "epsilon", "lp_norm", "fitted_exponent", "predicted_exponent"],
                    &data,
                )?;
            }
            Format::Svg => {
                for row in &rows {
                    write_svg_loglog(
                        &cli.out,
                        &format!("lp_scan_p{:.3}.svg", row.p),
                        &format!("Lp norm of the source vs epsilon (p = {:.3})", row.p),
                        &row.norms,
                        None,
                    )?;
                }
            }
        }
    }
    Ok(pass)
}

fn cmd_bott_chern(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    use instanton::integrate::annulus_point;
    let n = cfg.bott_chern_points;
    let residuals: Result<Vec<(usize, f64)>, instanton::Error> = (0..n)
        .into_par_iter()
        .map(|i| {
            // deterministic low-discrepancy points in the annulus 0.2..1.5
            let q = [
                ((i as f64 + 0.5) / n as f64).fract(),
                (i as f64 * 0.754877666).fract(),
                (i as f64 * 0.569840291).fract(),
                (i as f64 * 0.367879441).fract(),
            ];
            let p = annulus_point(q, 0.2, 1.5);
            let h = instanton::jets::HermMatrix2::identity();
            let g = chern::bump_metric(cfg.bump_coeff, p);
            Ok((i, chern::bott_chern_residual(&h, &g, cfg.quadrature_nodes)?))
        })
        .collect();
    let residuals = residuals?;
    let max = residuals.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    let mean = residuals.iter().map(|&(_, r)| r).sum::<f64>() / residuals.len() as f64;
    let pass = max <= 1e-6;
    println!(
        "transgression identity at {n} points: max relative residual {max:.3e}, mean {mean:.3e} {}",
        if pass { "ok" } else { "EXCEEDS 1e-6" }
    );
    #[derive(Serialize)]
    struct Report {
        points: usize,
        quadrature_nodes: usize,
        max_residual: f64,
        mean_residual: f64,
    }
    for f in formats(cli) {
        match f {
            Format::Json => write_json(
                &cli.out,
                "bott_chern.json",
                &Report {
                                points: n,
                    quadrature_nodes: cfg.quadrature_nodes,
                    max_residual: max,
                    mean_residual: mean,
                },
            )?,
            Format::Csv => {
                let rows: Vec<Vec<String>> = residuals
                    .iter()
                    .map(|(i, r)| vec![i.to_string(), format!("{r:.6e}")])
                    .collect();
                write_csv(&cli.out, "bott_chern.csv", &["point", "relative_residual"], &rows)?;
            }
            Format::Svg => {}
        }
    }
    Ok(pass)
}

fn cmd_region_rates(cli: &Cli, cfg: &RunConfig) -> Result<bool, AnyError> {
    let (rs, path) = family(cfg)?;
    let params = sweep_params(cfg);
    let g = grid(cfg, &path, params.flavor)?;
    let rows = region_rate_table(&rs, &path, &cfg.test_function, &g, &params)?;
    let mut pass = true;
    for row in &rows {
        if row.status == "fail" {
            pass = false;
        }
        println!(
            "{:?}: predicted order {} in {}, fitted {}, status {}",
            row.region,
            row.predicted_order,
            row.fit_variable,
            row.fitted_order
                .map(|o| format!("{o:.3}"))
                .unwrap_or_else(|| "-".into()),
            row.status
        );
    }
    for f in formats(cli) {
        match f {
            Format::Json => write_json(&cli.out, "region_rates.json", &rows)?,
            Format::Csv => {
                let data: Vec<Vec<String>> = rows
                    .iter()
                    .map(|row| {
                        vec![
                            format!("{:?}", row.region),
                            row.predicted_order.to_string(),
                            row.fit_variable.to_string(),
                            row.fitted_order
                                .map(|o| format!("{o:.4}"))
                                .unwrap_or_default(),
                            row.residual.map(|r| format!("{r:.4}")).unwrap_or_default(),
                            row.status.to_string(),
                        ]
                    })
                    .collect();
                write_csv(
                    &cli.out,
                    "region_rates.csv",
                    &["region", "predicted_order", "fit_variable", "fitted_order", "residual", "status"],
                    &data,
                )?;
            }
            Format::Svg => {}
        }
    }
    Ok(pass)
}

fn run(cli: &Cli) -> Result<bool, AnyError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .ok();
    }
    let cfg = load_config(cli)?;
    let pass = match cli.cmd {
        Cmd::RootSystem => cmd_root_system(cli, &cfg)?,
        Cmd::CheckNondegenerate => cmd_check_nondegenerate(cli, &cfg)?,
        Cmd::C2Integral => cmd_c2_integral(cli, &cfg)?,
        Cmd::Sweep => cmd_sweep(cli, &cfg)?,
        Cmd::Fit => cmd_fit(cli, &cfg)?,
        Cmd::Bubbling => cmd_bubbling(cli, &cfg)?,
        Cmd::LpScan => cmd_lp_scan(cli, &cfg)?,
        Cmd::BottChernCheck => cmd_bott_chern(cli, &cfg)?,
        Cmd::RegionRates => cmd_region_rates(cli, &cfg)?,
    };
    // every run emits its fully resolved configuration for reproducibility
    write_resolved_config(&cli.out, &cfg)?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            if cli.strict {
                eprintln!("strict mode: at least one check failed");
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
