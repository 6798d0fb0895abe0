//! End-to-end acceptance suite. Each test covers one headline claim of the
//! library and prints a single pass/fail line (visible with `--nocapture`).

use instanton::ade::{
    self, build_root_system, AdeKind, Rat, RootSystem, Verdict, ZetaCoeff, ZetaPath,
};
use instanton::ale::{
    self, asymptotic_frame, dilate_point, eh_herm_metric, eh_triple, flat_triple, gh_triple,
};
use instanton::chern::{self, bott_chern_residual, bump_metric, c2_density};
use instanton::experiments::{
    audit_core_prediction, bubbling_profile, fit_exponent, lp_scan, region_rate_table,
    reparameterized_gamma, standard_grid, sweep_f, SweepParams, A1_ORBIFOLD_EULER_MASS,
};
use instanton::glue::{BackgroundOrbifoldMetric, Flavor};
use instanton::integrate::{
    annulus_point, core_c2_closed_form, mc_integral_4d, radial_integral, tail_extrapolate,
    IntegralPlan, TestFunction,
};
use instanton::jets::HermMatrix2;
use instanton::linalg;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

fn report(n: usize, name: &str, ok: bool, t0: Instant) {
    println!(
        "criterion {n:>2} ({name}): {} [{:.1}s]",
        if ok { "pass" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
    assert!(ok, "criterion {n} ({name}) failed");
}

/// Deterministic low-discrepancy point in the annulus `r0 <= r <= r1`.
fn qmc_point(i: usize, n: usize, r0: f64, r1: f64) -> [f64; 4] {
    let q = [
        ((i as f64 + 0.5) / n as f64).fract(),
        (i as f64 * 0.754877666).fract(),
        (i as f64 * 0.569840291).fract(),
        (i as f64 * 0.367879441).fract(),
    ];
    annulus_point(q, r0, r1)
}

fn herm_value_diff(h: &HermMatrix2, g: &HermMatrix2) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += (h.e[i][j].value() - g.e[i][j].value()).norm_sqr();
        }
    }
    acc.sqrt()
}

#[test]
fn criterion_01_curvature_mass_is_three_halves_and_scale_invariant() {
    let t0 = Instant::now();
    let radii = [20.0, 40.0, 80.0];
    let mut limits = Vec::new();
    for a in [0.5, 1.0, 2.0] {
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        let mut r_prev = 0.0;
        for &radius in &radii {
            let plan = IntegralPlan::radial(r_prev, radius, 2);
            acc += radial_integral(&|r| Ok(core_c2_closed_form(a, r)), &plan).unwrap();
            cumulative.push((radius, acc));
            r_prev = radius;
        }
        let (limit, _) = tail_extrapolate(&cumulative, 8.0).unwrap();
        limits.push(limit);
    }
    let ok_value = limits.iter().all(|v| (v - 1.5).abs() <= 0.005);
    let spread = limits.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - limits.iter().cloned().fold(f64::INFINITY, f64::min);
    report(
        1,
        "curvature mass 1.5 across scales",
        ok_value && spread <= 1e-3,
        t0,
    );
}

#[test]
fn criterion_02_asymptotic_decay_rates() {
    let t0 = Instant::now();
    let a = 1.0;
    let dir = [0.6, 0.48, 0.64, 0.0];
    let n = 12;
    let mut metric_pts = Vec::new();
    let mut density_pts = Vec::new();
    for i in 0..n {
        let r = 10.0 * 10.0f64.powf(i as f64 / (n - 1) as f64);
        let p = [dir[0] * r, dir[1] * r, dir[2] * r, dir[3] * r];
        let h = eh_herm_metric(a, p).unwrap();
        metric_pts.push((r.ln(), herm_value_diff(&h, &HermMatrix2::identity()).ln()));
        density_pts.push((r.ln(), c2_density(&h).unwrap().abs().ln()));
    }
    let slope = |pts: &[(f64, f64)]| {
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (sxx, sxy): (f64, f64) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    let s_metric = slope(&metric_pts);
    let s_density = slope(&density_pts);
    report(
        2,
        "metric decay -4 and curvature-density decay -12",
        (s_metric + 4.0).abs() <= 0.1 && (s_density + 12.0).abs() <= 0.5,
        t0,
    );
}

#[test]
fn criterion_03_ricci_flatness_of_instanton_families() {
    let t0 = Instant::now();
    let triples = [
        eh_triple(1.0, [1.0, 0.0, 0.0]).unwrap(),
        eh_triple(0.7, [0.0, 0.6, 0.8]).unwrap(),
        gh_triple(vec![[0.0, 0.0, 0.25], [0.0, 0.0, -0.25]]).unwrap(),
    ];
    let n = 1000;
    let mut ok = true;
    for triple in &triples {
        let sup: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                let p = qmc_point(i, n, 0.4, 2.0);
                let g = triple.real_metric(p).unwrap();
                chern::riemann_data(&g).unwrap().ricci_norm
            })
            .reduce(|| 0.0, f64::max);
        ok &= sup <= 1e-8;
    }
    // one monopole center: the total space is flat
    let one = gh_triple(vec![[0.0, 0.0, 0.0]]).unwrap();
    let flat_sup: f64 = (0..200usize)
        .into_par_iter()
        .map(|i| {
            let p = qmc_point(i, 200, 0.4, 2.0);
            let g = one.real_metric(p).unwrap();
            chern::riemann_data(&g).unwrap().rm_norm2
        })
        .reduce(|| 0.0, f64::max);
    report(
        3,
        "Ricci-flat samples and flat one-center space",
        ok && flat_sup <= 1e-10,
        t0,
    );
}

#[test]
fn criterion_04_transgression_identity_residuals() {
    let t0 = Instant::now();
    let n = 100;
    let max: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = qmc_point(i, n, 0.2, 1.5);
            let g = bump_metric(0.3, p);
            bott_chern_residual(&HermMatrix2::identity(), &g, 32).unwrap()
        })
        .reduce(|| 0.0, f64::max);
    report(4, "second-Chern transgression residual below 1e-6", max <= 1e-6, t0);
}

#[test]
fn criterion_05_core_mass_convergence_order() {
    let t0 = Instant::now();
    let (rs, path) = ade::a1_standard_family();
    let params = SweepParams::csck();
    let grid = standard_grid(1, params.beta, Flavor::CscK, 8);
    let f = TestFunction::bump(1.0);
    let profile = bubbling_profile(&rs, &path, &f, &grid, &params).unwrap();
    let prediction = f.value_at_origin() * A1_ORBIFOLD_EULER_MASS;
    let order_ok = profile.fitted_order.map(|o| o >= 1.8).unwrap_or(false);
    report(
        5,
        "core mass converges to the orbifold value at order >= 1.8",
        order_ok && audit_core_prediction(&profile, prediction),
        t0,
    );
}

#[test]
fn criterion_06_region_rate_tables_both_flavors() {
    let t0 = Instant::now();
    let (rs, path) = ade::a1_standard_family();
    let f = TestFunction::bump(1.0);

    let csck = SweepParams::csck();
    let grid_c = standard_grid(1, csck.beta, Flavor::CscK, 10);
    let rows_c = region_rate_table(&rs, &path, &f, &grid_c, &csck).unwrap();

    let mut k3 = SweepParams::k3();
    k3.background = BackgroundOrbifoldMetric { quartic: 0.1, sextic: 0.0 };
    k3.phi0_coeff = 0.1;
    k3.psi_coeff = 0.05;
    k3.abs_tol = 1e-11;
    let grid_k = standard_grid(1, k3.beta, Flavor::K3, 8);
    let rows_k = region_rate_table(&rs, &path, &f, &grid_k, &k3).unwrap();

    let ok = rows_c.iter().chain(rows_k.iter()).all(|r| r.status != "fail");
    report(6, "per-region convergence rates match predictions", ok, t0);
}

#[test]
fn criterion_07_holder_exponent_of_a1_family() {
    let t0 = Instant::now();
    let (rs, path) = ade::a1_standard_family();
    let params = SweepParams::csck();
    let grid = standard_grid(1, params.beta, Flavor::CscK, 10);
    let sweep = sweep_f(&rs, &path, &TestFunction::bump(1.0), &grid, &params).unwrap();
    let fit = fit_exponent(&sweep).unwrap();
    let gamma_s = fit.gamma;
    let gamma_t = reparameterized_gamma(&fit, sweep.d);
    report(
        7,
        "Holder exponent 1 in the cover, 1/2 in the base",
        (0.9..=1.1).contains(&gamma_s) && (0.45..=0.55).contains(&gamma_t) && !fit.failed,
        t0,
    );
}

#[test]
fn criterion_08_lp_norm_scaling_of_the_source() {
    let t0 = Instant::now();
    let (rs, path) = ade::a1_standard_family();
    let params = SweepParams::k3();
    let grid = standard_grid(1, params.beta, Flavor::K3, 6);
    let rows = lp_scan(&rs, &path, &grid, &[1.1, 4.0 / 3.0], &params).unwrap();
    let ok = rows.len() == 2
        && rows.iter().all(|row| {
            (row.fitted_exponent - (2.0 + 2.0 / row.p)).abs() <= 0.3
        });
    report(8, "L^p source norms scale like eps^(2 + 2/p)", ok, t0);
}

// -- criterion 9: classifier against an independent brute-force check -------

fn rand_rat(rng: &mut ChaCha8Rng) -> Rat {
    Rat::new(rng.gen_range(-3i64..=3), rng.gen_range(1i64..=4))
}

fn rand_coeff(rng: &mut ChaCha8Rng, dim: usize) -> ZetaCoeff {
    let mut c = ZetaCoeff::zero(dim);
    for v in [&mut c.r, &mut c.c_re, &mut c.c_im] {
        for x in v.iter_mut() {
            *x = rand_rat(rng);
        }
    }
    c
}

/// Independent re-derivation of the verdict: plain rational dot products
/// against every root, no shared code with the classifier beyond the data.
fn brute_force_verdict(rs: &RootSystem, path: &ZetaPath) -> Verdict {
    let (p, dot) = path
        .coeffs()
        .iter()
        .enumerate()
        .find(|(k, c)| *k >= 1 && !c.is_zero())
        .map(|(k, c)| (k, c.clone()))
        .expect("path has a nonzero coefficient");
    if p > path.d as usize {
        return Verdict::DegenerateOrder { p, d: path.d };
    }
    let dot_prod = |root: &[i64], v: &[Rat]| -> Rat {
        root.iter()
            .zip(v)
            .map(|(&r, x)| Rat::from_integer(r) * x)
            .sum()
    };
    for root in &rs.roots {
        if dot_prod(root, &dot.r).is_zero()
            && dot_prod(root, &dot.c_re).is_zero()
            && dot_prod(root, &dot.c_im).is_zero()
        {
            return Verdict::DegenerateWall { root: root.clone() };
        }
    }
    Verdict::Nondegenerate { p }
}

fn verdicts_agree(classifier: &Verdict, brute: &Verdict, rs: &RootSystem, path: &ZetaPath) -> bool {
    match (classifier, brute) {
        (Verdict::Nondegenerate { p: a }, Verdict::Nondegenerate { p: b }) => a == b,
        (Verdict::DegenerateOrder { p: a, d: da }, Verdict::DegenerateOrder { p: b, d: db }) => {
            a == b && da == db
        }
        // the wall witness may differ; it must be a genuine wall root
        (Verdict::DegenerateWall { root }, Verdict::DegenerateWall { .. }) => {
            let (_, dot) = ade::vanishing_order(path).unwrap();
            rs.pair(root, &dot.r).is_zero()
                && rs.pair(root, &dot.c_re).is_zero()
                && rs.pair(root, &dot.c_im).is_zero()
        }
        _ => false,
    }
}

#[test]
fn criterion_09_classifier_matches_brute_force() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut mismatches = 0;
    for case in 0..100 {
        let rank = if case % 2 == 0 { 2 } else { 3 };
        let rs = build_root_system(AdeKind::A, rank).unwrap();
        let dim = rs.ambient_dim();
        let d = rng.gen_range(1u32..=3);
        let n_coeffs = rng.gen_range(2usize..=4);
        let mut coeffs = vec![ZetaCoeff::zero(dim)];
        for _ in 1..n_coeffs {
            coeffs.push(rand_coeff(&mut rng, dim));
        }
        if rng.gen_bool(0.2) {
            // force a higher vanishing order (possible order degeneracy)
            coeffs[1] = ZetaCoeff::zero(dim);
        }
        if rng.gen_bool(0.3) {
            // force wall membership for the root e1 - e2
            for c in coeffs.iter_mut() {
                c.r[1] = c.r[0];
                c.c_re[1] = c.c_re[0];
                c.c_im[1] = c.c_im[0];
            }
        }
        if coeffs.iter().all(ZetaCoeff::is_zero) {
            coeffs[1].r[0] = Rat::from_integer(1);
        }
        let path = ZetaPath::new(coeffs, d, dim).unwrap();
        if path.coeffs().iter().skip(1).all(ZetaCoeff::is_zero) {
            continue;
        }
        let classifier = ade::is_nondegenerate(&path, &rs).unwrap();
        let brute = brute_force_verdict(&rs, &path);
        if !verdicts_agree(&classifier, &brute, &rs, &path) {
            mismatches += 1;
        }
    }
    // the known wall configuration must be flagged with its witness
    let rs = build_root_system(AdeKind::A, 2).unwrap();
    let mut c = ZetaCoeff::zero(3);
    c.c_re = vec![
        Rat::from_integer(1),
        Rat::from_integer(1),
        Rat::from_integer(-2),
    ];
    let wall_path = ZetaPath::new(vec![ZetaCoeff::zero(3), c], 1, 3).unwrap();
    let wall_flagged = matches!(
        ade::is_nondegenerate(&wall_path, &rs).unwrap(),
        Verdict::DegenerateWall { .. }
    );
    report(
        9,
        "classifier agrees with brute force on 100 random paths",
        mismatches == 0 && wall_flagged,
        t0,
    );
}

#[test]
fn criterion_10_structural_property_checks() {
    let t0 = Instant::now();
    let mut ok = true;

    // quaternion relations of the complex-structure triples
    let triples = [
        flat_triple(),
        eh_triple(1.0, [1.0, 0.0, 0.0]).unwrap(),
        gh_triple(vec![[0.0, 0.0, 0.25], [0.0, 0.0, -0.25]]).unwrap(),
    ];
    let minus_id = linalg::mat4_scale(&linalg::mat4_identity(), -1.0);
    for triple in &triples {
        for i in 0..8 {
            let p = qmc_point(i, 8, 0.5, 1.5);
            let [xi, xj, xk] = triple.complex_structures(p).unwrap();
            for m in [&xi, &xj, &xk] {
                let sq = linalg::mat4_mul(m, m);
                ok &= linalg::mat4_value_norm(&linalg::mat4_sub(&sq, &minus_id)) < 1e-10;
            }
            let ij = linalg::mat4_mul(&xi, &xj);
            ok &= linalg::mat4_value_norm(&linalg::mat4_sub(&ij, &xk)) < 1e-10;
        }
    }

    // dilation equivariance of the instanton metric
    for p in [[0.7, -0.2, 0.3, 0.5], [3.0, 1.0, 0.0, -2.0]] {
        let g1 = eh_herm_metric(1.0, p).unwrap();
        let g2 = eh_herm_metric(2.0, dilate_point(p, 2.0)).unwrap();
        ok &= herm_value_diff(&g1, &g2) < 1e-11;
    }

    // duality of the asymptotic frame
    for i in 0..8 {
        let p = qmc_point(i, 8, 1.2, 3.0);
        let f = asymptotic_frame(&eh_triple(1.0, [0.0, 0.6, 0.8]).unwrap(), p).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let pairing: num_complex::Complex64 =
                    (0..4).map(|k| f.dual[a][k] * f.e[b][k]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                ok &= (pairing - expect).norm() < 1e-10;
            }
        }
    }

    // radial and Monte Carlo integrals of the same density agree to 3 sigma
    let density = |p: [f64; 4]| Ok(core_c2_closed_form(1.0, ale::radius(p)));
    let plan = IntegralPlan::radial(0.5, 2.0, 2);
    let exact = radial_integral(&|r| Ok(core_c2_closed_form(1.0, r)), &plan).unwrap();
    let (mc, se) = mc_integral_4d(&density, 0.5, 2.0, 2, 200_000, 7).unwrap();
    ok &= (mc - exact).abs() <= 3.0 * se;

    // full sweeps are bit-for-bit deterministic
    let (rs, path) = ade::a1_standard_family();
    let params = SweepParams::csck();
    let grid = standard_grid(1, params.beta, Flavor::CscK, 6);
    let f = TestFunction::bump(1.0);
    let s1 = sweep_f(&rs, &path, &f, &grid, &params).unwrap();
    let s2 = sweep_f(&rs, &path, &f, &grid, &params).unwrap();
    ok &= serde_json::to_string(&s1).unwrap() == serde_json::to_string(&s2).unwrap();

    report(10, "structural invariants and determinism", ok, t0);
}
