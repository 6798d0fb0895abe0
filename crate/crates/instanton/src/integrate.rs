//! Fibre integrals over the local model `{r ≤ R} ⊂ ℂ²/Γ`.
//!
//! Most densities in this crate are functions of the radius alone
//! (the closed-form metrics are U(2)-equivariant and the gluing data is
//! radial), so the default integration mode reduces to a 1-dimensional
//! adaptive quadrature against the orbit measure `(2π²/|Γ|) r³ dr`.
//! A quasi-random 4-dimensional Monte Carlo fallback covers non-radial
//! densities and serves as a cross-oracle; [`symmetry_check`] gates the
//! radial mode.

use crate::chern::c2_density;
use crate::glue::{
    classify_region, glued_metric_csck, glued_metric_k3, model_quartic_field,
    BackgroundOrbifoldMetric, Flavor, GluingSchedule, RegionTag,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-based initial guess for the i-th root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_n' by recurrence.
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = pk;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_01(n: usize) -> Vec<(f64, f64)> {
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Volume of the orbit sphere `S³/Γ` at radius 1: `2π²/|Γ|`.
pub fn orbit_constant(gamma_order: u64) -> f64 {
    2.0 * PI * PI / gamma_order as f64
}

/// Integration mode of a plan.
#[derive(Clone, Debug)]
pub enum Mode {
    /// Radial reduction: adaptive quadrature of `density(r)·(2π²/|Γ|)·r³`.
    Radial,
    /// Quasi-random 4D Monte Carlo with `n` samples and a scrambling seed.
    Mc { n: usize, seed: u64 },
}

/// Plan for one integral over an annulus `{r_min ≤ r ≤ r_max}` of the
/// local model with quotient group order `|Γ|`.
#[derive(Clone, Debug)]
pub struct IntegralPlan {
    pub mode: Mode,
    pub r_min: f64,
    pub r_max: f64,
    /// Radii forced as subdivision boundaries (gluing seams, where the
    /// integrand is only finitely smooth).
    pub seams: Vec<f64>,
    pub gamma_order: u64,
    /// Absolute tolerance target of the adaptive quadrature.
    pub abs_tol: f64,
}

impl IntegralPlan {
    pub fn radial(r_min: f64, r_max: f64, gamma_order: u64) -> Self {
        IntegralPlan {
            mode: Mode::Radial,
            r_min,
            r_max,
            seams: Vec::new(),
            gamma_order,
            abs_tol: 1e-8,
        }
    }

    pub fn with_seams(mut self, seams: &[f64]) -> Self {
        self.seams = seams.to_vec();
        self
    }
}

fn adaptive_simpson(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

fn integrate_segment(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Integral of a radial density over the plan's annulus:
/// `∫ density(r) · (2π²/|Γ|) · r³ dr`, adaptive with seams forced as
/// subdivision boundaries.
pub fn radial_integral(density: &dyn Fn(f64) -> Result<f64>, plan: &IntegralPlan) -> Result<f64> {
    let orbit = orbit_constant(plan.gamma_order);
    let f = |r: f64| -> Result<f64> { Ok(density(r)? * orbit * r * r * r) };
    let mut cuts: Vec<f64> = plan
        .seams
        .iter()
        .copied()
        .filter(|&s| s > plan.r_min && s < plan.r_max)
        .collect();
    cuts.push(plan.r_min);
    cuts.push(plan.r_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let n_seg = (cuts.len() - 1).max(1);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_segment(&f, w[0], w[1], plan.abs_tol / n_seg as f64)?;
    }
    Ok(total)
}

/// Halton sequence value (van der Corput radical inverse) in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Quasi-random point in `[0,1)⁴`: Halton bases (2,3,5,7) with a
/// Cranley–Patterson rotation derived from the seed (deterministic).
fn qmc_point(i: u64, shift: [f64; 4]) -> [f64; 4] {
    let mut p = [0.0; 4];
    for (k, b) in [2u64, 3, 5, 7].iter().enumerate() {
        p[k] = (radical_inverse(i + 1, *b) + shift[k]).fract();
    }
    p
}

fn seed_shift(seed: u64) -> [f64; 4] {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    [rng.gen(), rng.gen(), rng.gen(), rng.gen()]
}

/// Map a uniform `[0,1)⁴` sample to the annulus `{r0 ≤ r ≤ r1}` with the
/// exact `r³ dr` radial law and uniform S³ direction (Hopf coordinates).
pub fn annulus_point(q: [f64; 4], r0: f64, r1: f64) -> [f64; 4] {
    let r = (r0.powi(4) + q[0] * (r1.powi(4) - r0.powi(4))).powf(0.25);
    let eta = q[3].sqrt().asin();
    let (xi1, xi2) = (2.0 * PI * q[1], 2.0 * PI * q[2]);
    let (ce, se) = (eta.cos(), eta.sin());
    [
        r * ce * xi1.cos(),
        r * ce * xi1.sin(),
        r * se * xi2.cos(),
        r * se * xi2.sin(),
    ]
}

/// Quasi-random Monte Carlo integral of a chart density over the annulus
/// `{r0 ≤ r ≤ r1}` of the local model (measure divided by `|Γ|`). Returns
/// the estimate and a batch-means standard error. Deterministic for a
/// fixed seed.
pub fn mc_integral_4d(
    density: &dyn Fn([f64; 4]) -> Result<f64>,
    r0: f64,
    r1: f64,
    gamma_order: u64,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n < 100 {
        return Err(Error::Invalid(format!(
            "Monte Carlo with n = {n} < 100 has meaningless error bars"
        )));
    }
    let shift = seed_shift(seed);
    let vol = orbit_constant(gamma_order) * (r1.powi(4) - r0.powi(4)) / 4.0;
    const BATCHES: usize = 64;
    let mut batch_sums = [0.0f64; BATCHES];
    let mut batch_counts = [0usize; BATCHES];
    for i in 0..n {
        let p = annulus_point(qmc_point(i as u64, shift), r0, r1);
        let v = density(p)?;
        batch_sums[i % BATCHES] += v;
        batch_counts[i % BATCHES] += 1;
    }
    let means: Vec<f64> = batch_sums
        .iter()
        .zip(batch_counts.iter())
        .filter(|(_, &c)| c > 0)
        .map(|(&s, &c)| s / c as f64)
        .collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        / (means.len() as f64 * (means.len() as f64 - 1.0));
    Ok((vol * m, vol * var.sqrt()))
}

/// Max relative deviation of a chart density over quasi-random points of
/// the orbit sphere at radius `r` (0 for an exactly radial density).
pub fn symmetry_check(
    density: &dyn Fn([f64; 4]) -> Result<f64>,
    r: f64,
    n_samples: usize,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Invalid("symmetry check needs r > 0".into()));
    }
    let shift = seed_shift(0xa5a5_5a5a);
    let mut vals = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let q = qmc_point(i as u64, shift);
        let p = annulus_point([0.5, q[1], q[2], q[3]], r, r);
        vals.push(density(p)?);
    }
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &v in &vals {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
    }
    let mean = sum / vals.len() as f64;
    let scale = mean.abs().max(1e-300);
    Ok((hi - lo) / scale)
}

/// Limit of cumulative integrals `v(R) ≈ c − A R^{−m}` from values at ≥ 3
/// radii: least-squares in the basis `{1, R^{−m}}` with a residual
/// diagnostic. Errors when the tail is inconsistent with the declared
/// decay order (non-monotone increments or residuals comparable to the
/// fitted tail term).
pub fn tail_extrapolate(samples: &[(f64, f64)], m: f64) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::Invalid("tail extrapolation needs at least 3 radii".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    // monotone increments of decreasing magnitude
    let mut prev: Option<f64> = None;
    for w in s.windows(2) {
        let d = w[1].1 - w[0].1;
        if let Some(p) = prev {
            if d.abs() > p.abs() * 1.0000001 || (d != 0.0 && p != 0.0 && d.signum() != p.signum()) {
                return Err(Error::Diagnostic(format!(
                    "tail increments not consistent with R^-{m} decay: {p:e} then {d:e}"
                )));
            }
        }
        prev = Some(d);
    }
    // least squares v = c + a·R^{-m}
    let (mut s1, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(r, v) in &s {
        let x = r.powf(-m);
        s1 += 1.0;
        sx += x;
        sxx += x * x;
        sy += v;
        sxy += x * v;
    }
    let det = s1 * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::Diagnostic("degenerate tail fit".into()));
    }
    let c = (sxx * sy - sx * sxy) / det;
    let a = (s1 * sxy - sx * sy) / det;
    let mut resid = 0.0f64;
    for &(r, v) in &s {
        resid = resid.max((v - c - a * r.powf(-m)).abs());
    }
    let tail_scale = s.iter().map(|&(r, _)| (a * r.powf(-m)).abs()).fold(0.0, f64::max);
    if tail_scale > 0.0 && resid > 0.5 * tail_scale {
        return Err(Error::Diagnostic(format!(
            "tail residual {resid:e} not small against fitted R^-{m} term {tail_scale:e}"
        )));
    }
    Ok((c, resid))
}

/// Radial test profile: a smooth bump `f(r) = A·exp(1 − 1/(1 − (r/s)²))`
/// supported in `r < s` with `f(0) = A`. All derivatives vanish at the
/// support boundary.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TestFunction {
    pub amplitude: f64,
    pub support: f64,
}

impl TestFunction {
    /// Standard bump supported in `r < 3/4`.
    pub fn bump(amplitude: f64) -> Self {
        TestFunction { amplitude, support: 0.75 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let x = r / self.support;
        if x >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    }

    pub fn value_at_origin(&self) -> f64 {
        self.amplitude
    }
}

/// Configuration of a region-decomposed fibre integral.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FibreConfig {
    /// ALE scale of the core (`a² = |ζ_c(t)|`; equals ε for the standard
    /// family).
    pub core_scale: f64,
    pub background: BackgroundOrbifoldMetric,
    /// K3 surrogate background potential deviation coefficient (`φ̂₀`).
    pub phi0_coeff: f64,
    /// K3 surrogate `t`-dependence coefficient (`ψ`); 0 disables it.
    pub psi_coeff: f64,
    pub gamma_order: u64,
    pub abs_tol: f64,
    pub symmetry_samples: usize,
    /// Radial mode is allowed only when the orbit spread stays below this.
    pub symmetry_threshold: f64,
    pub mc_n: usize,
    pub seed: u64,
}

impl FibreConfig {
    pub fn standard(schedule: &GluingSchedule) -> Self {
        FibreConfig {
            core_scale: schedule.core_scale(),
            background: BackgroundOrbifoldMetric::default(),
            phi0_coeff: 0.1,
            psi_coeff: 0.0,
            gamma_order: 2,
            abs_tol: 1e-8,
            symmetry_samples: 64,
            symmetry_threshold: 1e-6,
            mc_n: 1_000_000,
            seed: 0,
        }
    }
}

/// One region's contribution to the fibre integral.
#[derive(Clone, Debug, Serialize)]
pub struct RegionContribution {
    pub region: RegionTag,
    pub r0: f64,
    pub r1: f64,
    pub value: f64,
    pub error: f64,
    pub mode: String,
}

/// Region-decomposed fibre integral `F̃(t) = ∫ f · c₂(glued metric)`.
#[derive(Clone, Debug, Serialize)]
pub struct FibreF {
    pub value: f64,
    pub regions: Vec<RegionContribution>,
}

/// Closed-form c₂ density of the ALE core metric at scale `a` (the
/// Ricci-flat identity `c₂ = |Rm|²/(32π²)` with the exact curvature
/// profile); regular at `r = 0`, unlike the chart jets.
pub fn core_c2_closed_form(a: f64, r: f64) -> f64 {
    let u = r * r;
    384.0 * a.powi(8) / (u * u + a.powi(4)).powi(3) / (32.0 * PI * PI)
}

fn glued_c2_at(
    p: [f64; 4],
    schedule: &GluingSchedule,
    cfg: &FibreConfig,
) -> Result<f64> {
    let h = match schedule.flavor {
        Flavor::CscK => glued_metric_csck(p, schedule, cfg.core_scale, &cfg.background)?,
        Flavor::K3 => {
            let phi0 = model_quartic_field(cfg.phi0_coeff);
            let psi = model_quartic_field(cfg.psi_coeff);
            let psi_ref: Option<&dyn crate::jets::ScalarField> =
                if cfg.psi_coeff != 0.0 { Some(&psi) } else { None };
            glued_metric_k3(p, schedule, cfg.core_scale, &phi0, psi_ref)?
        }
    };
    c2_density(&h)
}

/// Fibre integral of `f · c₂(glued metric)` over `{r ≤ min(1, supp f)}`,
/// decomposed by schedule region. The core uses the closed-form ALE
/// curvature profile; every other region runs radial quadrature behind a
/// symmetry gate, falling back to quasi-random Monte Carlo when the
/// density fails the gate.
pub fn fibre_f(
    schedule: &GluingSchedule,
    f: &TestFunction,
    cfg: &FibreConfig,
) -> Result<FibreF> {
    if !(f.support > 0.0 && f.support <= 0.75) {
        return Err(Error::Invalid(format!(
            "test function must be supported in r ≤ 3/4, got support {}",
            f.support
        )));
    }
    let mut cuts = vec![0.0];
    for s in schedule.boundaries() {
        if s < f.support {
            cuts.push(s);
        }
    }
    cuts.push(f.support);
    let mut regions = Vec::new();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (r0, r1) = (w[0], w[1]);
        let mid = 0.5 * (r0 + r1);
        let tag = classify_region(mid, schedule);
        let contrib = if tag == RegionTag::Core {
            let a = cfg.core_scale;
            let plan = IntegralPlan {
                mode: Mode::Radial,
                r_min: r0,
                r_max: r1,
                seams: Vec::new(),
                gamma_order: cfg.gamma_order,
                abs_tol: cfg.abs_tol,
            };
            let v = radial_integral(&|r| Ok(f.eval(r) * core_c2_closed_form(a, r)), &plan)?;
            RegionContribution {
                region: tag,
                r0,
                r1,
                value: v,
                error: cfg.abs_tol,
                mode: "radial-closed-form".into(),
            }
        } else {
            let density4 = |p: [f64; 4]| glued_c2_at(p, schedule, cfg);
            let spread = symmetry_check(&density4, mid, cfg.symmetry_samples)?;
            if spread <= cfg.symmetry_threshold {
                let plan = IntegralPlan {
                    mode: Mode::Radial,
                    r_min: r0,
                    r_max: r1,
                    seams: Vec::new(),
                    gamma_order: cfg.gamma_order,
                    abs_tol: cfg.abs_tol,
                };
                let v = radial_integral(
                    &|r| {
                        let p = [0.6 * r, 0.48 * r, 0.64 * r, 0.0];
                        Ok(f.eval(r) * glued_c2_at(p, schedule, cfg)?)
                    },
                    &plan,
                )?;
                RegionContribution {
                    region: tag,
                    r0,
                    r1,
                    value: v,
                    error: cfg.abs_tol,
                    mode: "radial".into(),
                }
            } else {
                let weighted = |p: [f64; 4]| -> Result<f64> {
                    let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                    Ok(f.eval(r) * glued_c2_at(p, schedule, cfg)?)
                };
                let (v, se) =
                    mc_integral_4d(&weighted, r0, r1, cfg.gamma_order, cfg.mc_n, cfg.seed)?;
                RegionContribution {
                    region: tag,
                    r0,
                    r1,
                    value: v,
                    error: se,
                    mode: "mc".into(),
                }
            }
        };
        total += contrib.value;
        regions.push(contrib);
    }
    Ok(FibreF { value: total, regions })
}

/// Background-only integral `∫_{r ≤ r_max} f · c₂(g₀)`: the first piece
/// of the limit value `F̃(0⁺)`, computed independently of any sweep.
pub fn background_c2_integral(
    f: &TestFunction,
    background: &BackgroundOrbifoldMetric,
    gamma_order: u64,
    r_max: f64,
    abs_tol: f64,
) -> Result<f64> {
    let plan = IntegralPlan {
        mode: Mode::Radial,
        r_min: 0.0,
        r_max: r_max.min(f.support),
        seams: Vec::new(),
        gamma_order,
        abs_tol,
    };
    radial_integral(
        &|r| {
            if r == 0.0 {
                // c₂(g₀) is smooth at the origin; evaluate just off it
                let p = [1e-6, 0.0, 0.0, 0.0];
                return Ok(f.eval(r) * c2_density(&background.metric(p))?);
            }
            let p = [0.6 * r, 0.48 * r, 0.64 * r, 0.0];
            Ok(f.eval(r) * c2_density(&background.metric(p))?)
        },
        &plan,
    )
}
