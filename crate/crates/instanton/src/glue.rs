//! Piecewise glued metric families on the local model `{r ≤ 1} ⊂ ℂ²/Γ`.
//!
//! Two flavors are built from the same ingredients (ALE core, smooth
//! cut-offs, background orbifold metric):
//!
//! * `CscK`: the constant-scalar-curvature approximant family, glued at
//!   the metric level on `[b, 2b]` and at the potential level on
//!   `[2b, 4b]`, with schedule radii `(b, 2b, 4b, 1)`, `b = ε^β`.
//! * `K3`: the almost-Ricci-flat family glued purely at the potential
//!   level with radii `(ε^½, 2ε^½, 1/2, 3/4, 1)`.
//!
//! The background Ricci-flat potential of the second flavor is not
//! computable in a purely local model; it is replaced by the documented
//! surrogate `φ̂_t = φ̂₀ + t·ψ` with configurable smooth `O(r⁴)` fields
//! `φ̂₀`, `ψ`. Only the smooth-convergence property of the true potential
//! family is used downstream, which the surrogate reproduces.

use crate::ale::{self, radius, u_jet};
use crate::chern::metric_from_potential;
use crate::jets::{CJet, HermMatrix2, Jet, ScalarField};
use crate::linalg::{mat4_add, mat4_mul, mat4_scale, Mat4Jet};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which glued family a schedule describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    CscK,
    K3,
}

/// All radii and exponents governing one glued metric at parameter `t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluingSchedule {
    pub t: f64,
    /// Vanishing order of the deformation path (sets `ε = t^{p/2}`).
    pub p: u32,
    /// Degeneration order of the ambient family.
    pub d: u32,
    pub epsilon: f64,
    /// Gluing exponent, `b = ε^β`; must exceed 1/2.
    pub beta: f64,
    pub b: f64,
    /// Weight exponent of the Hölder norms, in (−2, 0).
    pub delta: f64,
    pub flavor: Flavor,
}

/// Largest admissible `t` for a flavor (seam ordering with a 10% safety
/// margin): `4b < 1` for `CscK`, `2ε^½ < 1/2` for `K3`.
pub fn validity_bound(p: u32, beta: f64, flavor: Flavor) -> f64 {
    let eps_max = match flavor {
        Flavor::CscK => 0.25f64.powf(1.0 / beta),
        Flavor::K3 => 1.0 / 16.0,
    };
    0.9 * eps_max.powf(2.0 / p as f64)
}

impl GluingSchedule {
    pub fn new(t: f64, p: u32, d: u32, beta: f64, delta: f64, flavor: Flavor) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Invalid(format!("t must lie in (0,1), got {t}")));
        }
        if p < 1 || d < 1 {
            return Err(Error::Invalid("orders p and d must be ≥ 1".into()));
        }
        if !(beta > 0.5) {
            return Err(Error::Invalid(format!("beta must exceed 1/2, got {beta}")));
        }
        if !(delta > -2.0 && delta < 0.0) {
            return Err(Error::Invalid(format!("delta must lie in (−2,0), got {delta}")));
        }
        let bound = validity_bound(p, beta, flavor);
        if t > bound {
            return Err(Error::Degenerate(format!(
                "schedule invalid: t = {t} exceeds the validity bound {bound:.6} \
                 (seams would collide)"
            )));
        }
        let epsilon = t.powf(p as f64 / 2.0);
        let b = epsilon.powf(beta);
        Ok(GluingSchedule { t, p, d, epsilon, beta, b, delta, flavor })
    }

    /// Region boundary radii of this schedule, ascending.
    pub fn boundaries(&self) -> Vec<f64> {
        match self.flavor {
            Flavor::CscK => vec![self.b, 2.0 * self.b, 4.0 * self.b, 1.0],
            Flavor::K3 => {
                let s = self.epsilon.sqrt();
                vec![s, 2.0 * s, 0.5, 0.75, 1.0]
            }
        }
    }

    /// ALE scale of the core at this `t` for the standard family
    /// (`a² = |ζ_c(t)| = t^p`).
    pub fn core_scale(&self) -> f64 {
        self.epsilon
    }

    /// Hölder weight `ρ_t(r) = max(r, ε)` (any positive extension beyond
    /// `r = 1` is admissible; `r` itself is used).
    pub fn weight(&self, r: f64) -> f64 {
        r.max(self.epsilon)
    }
}

/// Region of the five-region gluing diagrams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionTag {
    Core,
    InnerAnnulus,
    OuterAnnulus,
    TransitionAnnulus,
    Background,
    Outside,
}

/// Partition of `(0, ∞)` into schedule regions. `CscK` has no
/// `OuterAnnulus` band.
pub fn classify_region(r: f64, schedule: &GluingSchedule) -> RegionTag {
    match schedule.flavor {
        Flavor::CscK => {
            let b = schedule.b;
            if r <= b {
                RegionTag::Core
            } else if r <= 2.0 * b {
                RegionTag::InnerAnnulus
            } else if r <= 4.0 * b {
                RegionTag::TransitionAnnulus
            } else if r <= 1.0 {
                RegionTag::Background
            } else {
                RegionTag::Outside
            }
        }
        Flavor::K3 => {
            let s = schedule.epsilon.sqrt();
            if r <= s {
                RegionTag::Core
            } else if r <= 2.0 * s {
                RegionTag::InnerAnnulus
            } else if r <= 0.5 {
                RegionTag::OuterAnnulus
            } else if r <= 0.75 {
                RegionTag::TransitionAnnulus
            } else if r <= 1.0 {
                RegionTag::Background
            } else {
                RegionTag::Outside
            }
        }
    }
}

fn sigma(y: &Jet) -> Result<Jet> {
    Ok(y.recip()?.neg().exp())
}

/// Smooth cut-off: 0 for `x ≤ x1`, 1 for `x ≥ x2`, with the C^∞ base
/// `χ(y) = σ(y)/(σ(y) + σ(1−y))`, `σ(y) = e^{−1/y}`. All derivatives
/// vanish at both ends, so jets stay valid across the seams.
pub fn cutoff(x: &Jet, x1: f64, x2: f64) -> Result<Jet> {
    if x1 >= x2 {
        return Err(Error::Invalid(format!("cut-off needs x1 < x2, got [{x1}, {x2}]")));
    }
    let y = x.sub(&Jet::constant(x1)).scale(1.0 / (x2 - x1));
    let v = y.value();
    if v <= 0.0 {
        return Ok(Jet::constant(0.0));
    }
    if v >= 1.0 {
        return Ok(Jet::constant(1.0));
    }
    let s = sigma(&y)?;
    let s1 = sigma(&Jet::constant(1.0).sub(&y))?;
    s.div(&s.add(&s1))
}

/// Background orbifold metric `g₀ = dd^c(r² + η)` with a Γ-invariant
/// radial deviation `η = q·r⁴ + s·r⁶` (any function of `u = r²` is
/// invariant under the action on the chart cover).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BackgroundOrbifoldMetric {
    pub quartic: f64,
    pub sextic: f64,
}

impl Default for BackgroundOrbifoldMetric {
    fn default() -> Self {
        BackgroundOrbifoldMetric { quartic: 0.1, sextic: 0.0 }
    }
}

impl BackgroundOrbifoldMetric {
    pub fn eta_jet(&self, x: &[Jet; 4]) -> Jet {
        let u = u_jet(x);
        let u2 = u.mul(&u);
        u2.scale(self.quartic).add(&u2.mul(&u).scale(self.sextic))
    }

    /// Potential `r² + η` as a jet.
    pub fn potential_jet(&self, x: &[Jet; 4]) -> Jet {
        u_jet(x).add(&self.eta_jet(x))
    }

    /// `g₀` at a chart point (jets valid to order 2).
    pub fn metric(&self, point: [f64; 4]) -> HermMatrix2 {
        metric_from_potential(&self.potential_jet(&Jet::coords(point)))
    }

    /// Reported constant C with `|η| ≤ C r⁴` on `r ≤ 1`.
    pub fn sup_quartic_bound(&self) -> f64 {
        self.quartic.abs() + self.sextic.abs()
    }

    /// Smallest sampled eigenvalue of `g₀` on radii in `[r_min, 1]`;
    /// positive-definiteness audit.
    pub fn positivity_check(&self, r_min: f64, n: usize) -> Result<f64> {
        let mut min = f64::INFINITY;
        for i in 0..n {
            let r = r_min + (1.0 - r_min) * (i as f64 + 0.5) / n as f64;
            let q = crate::integrate::annulus_point(
                [0.5, (i as f64 * 0.61803).fract(), (i as f64 * 0.41421).fract(), 0.5],
                r,
                r,
            );
            let ev = self.metric(q).eigenvalues_value();
            min = min.min(ev[0]);
        }
        if min <= 0.0 {
            return Err(Error::Degenerate(format!(
                "background metric not positive definite (λ_min = {min})"
            )));
        }
        Ok(min)
    }
}

/// Multiply every entry of a hermitian jet matrix by a real scalar jet.
fn herm_scale_jet(h: &HermMatrix2, s: &Jet) -> HermMatrix2 {
    let sc = CJet::from_real(*s);
    let mut e = h.e;
    for row in e.iter_mut() {
        for entry in row.iter_mut() {
            *entry = entry.mul(&sc);
        }
    }
    HermMatrix2::new(e, h.hermitian)
}

/// The cscK-flavor glued hermitian metric at a chart point:
/// the ALE metric of scale `a` on the core, a metric-level interpolation
/// `δ + (1−χ_{(b,2b)}(r))(g_a − δ)` on the inner annulus, the potential
/// `r² + χ_{(2b,4b)}(r)·η` on the transition annulus and the background
/// `g₀` outside. Jets are full-order on the core and inner annulus and
/// order-2 on the potential-level regions.
pub fn glued_metric_csck(
    point: [f64; 4],
    schedule: &GluingSchedule,
    a: f64,
    background: &BackgroundOrbifoldMetric,
) -> Result<HermMatrix2> {
    if schedule.flavor != Flavor::CscK {
        return Err(Error::Invalid("schedule flavor is not cscK".into()));
    }
    let r = radius(point);
    let b = schedule.b;
    match classify_region(r, schedule) {
        RegionTag::Core => ale::eh_herm_metric(a, point),
        RegionTag::InnerAnnulus => {
            let x = Jet::coords(point);
            let r_jet = u_jet(&x).sqrt()?;
            let chi = cutoff(&r_jet, b, 2.0 * b)?;
            let one_minus = Jet::constant(1.0).sub(&chi);
            let dev = ale::eh_herm_metric(a, point)?.sub(&HermMatrix2::identity());
            Ok(HermMatrix2::identity().add(&herm_scale_jet(&dev, &one_minus)))
        }
        RegionTag::TransitionAnnulus => {
            let x = Jet::coords(point);
            let r_jet = u_jet(&x).sqrt()?;
            let chi = cutoff(&r_jet, 2.0 * b, 4.0 * b)?;
            let phi = u_jet(&x).add(&chi.mul(&background.eta_jet(&x)));
            Ok(metric_from_potential(&phi))
        }
        RegionTag::OuterAnnulus | RegionTag::Background | RegionTag::Outside => {
            Ok(background.metric(point))
        }
    }
}

/// The K3-flavor glued hermitian metric: `dd^c(r² + φ̃_t)` with
/// `φ̃_t = (1−χ_{(ε^½,2ε^½)})·φ_a + χ_{(ε^½,2ε^½)}(1−χ_{(1/2,3/4)})·φ̂₀
///       + χ_{(1/2,3/4)}·φ̂_t`, `φ̂_t = φ̂₀ + t·ψ` (surrogate, see module
/// docs). Exact ALE metric on the core.
pub fn glued_metric_k3(
    point: [f64; 4],
    schedule: &GluingSchedule,
    a: f64,
    hat_phi0: &dyn ScalarField,
    psi: Option<&dyn ScalarField>,
) -> Result<HermMatrix2> {
    if schedule.flavor != Flavor::K3 {
        return Err(Error::Invalid("schedule flavor is not K3".into()));
    }
    let r = radius(point);
    let s = schedule.epsilon.sqrt();
    if r <= s {
        return ale::eh_herm_metric(a, point);
    }
    let x = Jet::coords(point);
    let r_jet = u_jet(&x).sqrt()?;
    let chi1 = cutoff(&r_jet, s, 2.0 * s)?;
    let chi2 = cutoff(&r_jet, 0.5, 0.75)?;
    let phi0 = hat_phi0.eval_jet(&x)?;
    let phi_t = match psi {
        Some(f) => phi0.add(&f.eval_jet(&x)?.scale(schedule.t)),
        None => phi0,
    };
    let mut phi = Jet::constant(0.0);
    if chi1.value() < 1.0 {
        let phi_ale = ale::eh_potential_deviation(a, &x)?;
        phi = phi.add(&Jet::constant(1.0).sub(&chi1).mul(&phi_ale));
    }
    phi = phi.add(&chi1.mul(&Jet::constant(1.0).sub(&chi2)).mul(&phi0));
    phi = phi.add(&chi2.mul(&phi_t));
    Ok(metric_from_potential(&u_jet(&x).add(&phi)))
}

/// Hermitianization of a real metric with respect to an almost complex
/// structure: `h(u,v) = (h̃(Ju, Jv) + h̃(u,v))/2`, all as jet matrices.
/// Idempotent, and the identity on J-invariant inputs.
pub fn hermitianize(g: &Mat4Jet, j: &Mat4Jet) -> Mat4Jet {
    // (JᵀgJ)_{ab} = Σ J^c_a g_{cd} J^d_b
    let mut jt = crate::linalg::mat4_zero();
    for a in 0..4 {
        for b in 0..4 {
            jt[a][b] = j[b][a];
        }
    }
    let pulled = mat4_mul(&mat4_mul(&jt, g), j);
    mat4_scale(&mat4_add(&pulled, g), 0.5)
}

/// Default model background potential deviation `c·r⁴` as a scalar field.
pub fn model_quartic_field(coeff: f64) -> impl ScalarField {
    move |x: &[Jet; 4]| -> Result<Jet> {
        let u = u_jet(x);
        Ok(u.mul(&u).scale(coeff))
    }
}

/// Sampling plan for the weighted Hölder estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplePlan {
    pub r_min: f64,
    pub r_max: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    /// Relative offset of each sample's Hölder companion point.
    pub pair_offset: f64,
}

impl SamplePlan {
    pub fn standard(r_min: f64, r_max: f64) -> Self {
        SamplePlan { r_min, r_max, n_radial: 24, n_angular: 8, pair_offset: 1e-2 }
    }
}

/// Sampled weighted Hölder norm estimate
/// `Σ_{j≤k} sup ρ^{j−δ} |∇ʲ f| + sup ρ^{k+α−δ} [∇ᵏ f]_α`
/// with weight `ρ_t(r) = max(r, ε)` and derivative magnitudes measured in
/// the flat chart norm. A sampled supremum: more samples never decrease
/// it.
pub fn weighted_holder_norm(
    field: &dyn ScalarField,
    schedule: &GluingSchedule,
    k: usize,
    alpha: f64,
    delta: f64,
    plan: &SamplePlan,
) -> Result<f64> {
    if k > 2 {
        return Err(Error::Invalid(format!("weighted norms are implemented for k ≤ 2, got {k}")));
    }
    if !(plan.r_min > 0.0) {
        return Err(Error::Invalid("sample plan must stay away from r = 0".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("Hölder exponent must lie in (0,1), got {alpha}")));
    }
    let deriv_mag = |jet: &Jet, order: usize| -> f64 {
        // flat-norm magnitude of the order-j derivative block
        let mut acc = 0.0f64;
        for (pos, alpha_idx) in crate::jets::multi_indices().iter().enumerate() {
            if alpha_idx.iter().map(|&v| v as usize).sum::<usize>() == order {
                let fact: f64 = alpha_idx
                    .iter()
                    .map(|&v| (1..=v as u64).product::<u64>() as f64)
                    .product();
                let d = jet.coeff(pos) * fact;
                acc += d * d;
            }
        }
        acc.sqrt()
    };
    let mut norm = 0.0f64;
    let mut holder = 0.0f64;
    for ir in 0..plan.n_radial {
        let f = (ir as f64 + 0.5) / plan.n_radial as f64;
        let r = plan.r_min * (plan.r_max / plan.r_min).powf(f);
        for ia in 0..plan.n_angular {
            let q = crate::integrate::annulus_point(
                [
                    0.5,
                    (ia as f64 * 0.61803 + ir as f64 * 0.17).fract(),
                    (ia as f64 * 0.41421 + ir as f64 * 0.23).fract(),
                    ((ia + 1) as f64 * 0.29) .fract(),
                ],
                r,
                r,
            );
            let jet = field.jet_at(q)?;
            let rho = schedule.weight(r);
            for j in 0..=k {
                norm = norm.max(rho.powf(j as f64 - delta) * deriv_mag(&jet, j));
            }
            // Hölder companion at a nearby point
            let h = plan.pair_offset * rho;
            let q2 = [q[0] + h, q[1], q[2], q[3]];
            let jet2 = field.jet_at(q2)?;
            let mut diff = 0.0f64;
            for (pos, alpha_idx) in crate::jets::multi_indices().iter().enumerate() {
                if alpha_idx.iter().map(|&v| v as usize).sum::<usize>() == k {
                    diff += (jet.coeff(pos) - jet2.coeff(pos)).powi(2);
                }
            }
            let dist = h;
            let coeff = diff.sqrt() / dist.powf(alpha);
            holder = holder.max(rho.powf(k as f64 + alpha - delta) * coeff);
        }
    }
    Ok(norm + holder)
}

/// One row of the seam audit: metric positivity and cross-seam jump.
#[derive(Clone, Debug, Serialize)]
pub struct SeamAuditRow {
    pub r: f64,
    pub region: RegionTag,
    pub min_eigenvalue: f64,
    /// Frobenius jump of the metric components across the nearest seam
    /// (0 away from seams).
    pub seam_jump: f64,
}

fn herm_frobenius_diff(a: &HermMatrix2, b: &HermMatrix2) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += a.e[i][j].sub(&b.e[i][j]).value().norm_sqr();
        }
    }
    acc.sqrt()
}

/// Positivity and seam-continuity audit of the cscK glued family:
/// min eigenvalue at log-spaced radii plus the component jump across
/// each seam sampled at distance `1e-6`.
pub fn seam_audit_csck(
    schedule: &GluingSchedule,
    a: f64,
    background: &BackgroundOrbifoldMetric,
    n_radii: usize,
) -> Result<Vec<SeamAuditRow>> {
    let (r_lo, r_hi) = (0.25 * schedule.b, 1.2);
    let mut rows = Vec::new();
    let dir = |r: f64| [r * 0.6, r * 0.48, r * 0.64, 0.0];
    for i in 0..n_radii {
        let f = (i as f64 + 0.5) / n_radii as f64;
        let r = r_lo * (r_hi / r_lo).powf(f);
        let h = glued_metric_csck(dir(r), schedule, a, background)?;
        rows.push(SeamAuditRow {
            r,
            region: classify_region(r, schedule),
            min_eigenvalue: h.eigenvalues_value()[0],
            seam_jump: 0.0,
        });
    }
    for seam in schedule.boundaries() {
        let lo = glued_metric_csck(dir(seam - 1e-6), schedule, a, background)?;
        let hi = glued_metric_csck(dir(seam + 1e-6), schedule, a, background)?;
        rows.push(SeamAuditRow {
            r: seam,
            region: classify_region(seam, schedule),
            min_eigenvalue: lo.eigenvalues_value()[0].min(hi.eigenvalues_value()[0]),
            seam_jump: herm_frobenius_diff(&lo, &hi),
        });
    }
    rows.sort_by(|x, y| x.r.total_cmp(&y.r));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat4_identity, mat4_value};

    fn sched_csck(t: f64) -> GluingSchedule {
        GluingSchedule::new(t, 1, 2, 0.51, -1.9, Flavor::CscK).unwrap()
    }

    fn sched_k3(t: f64) -> GluingSchedule {
        GluingSchedule::new(t, 1, 2, 0.51, -1.9, Flavor::K3).unwrap()
    }

    #[test]
    fn schedule_fields_and_validity() {
        let s = sched_csck(1e-3);
        assert_eq!(s.epsilon, 1e-3f64.powf(0.5));
        assert_eq!(s.b, s.epsilon.powf(0.51));
        assert!(4.0 * s.b < 1.0);
        // too-large t collides the seams
        assert!(GluingSchedule::new(0.9, 1, 2, 0.51, -1.9, Flavor::CscK).is_err());
        assert!(GluingSchedule::new(0.9, 1, 2, 0.51, -1.9, Flavor::K3).is_err());
        assert!(GluingSchedule::new(1e-3, 1, 2, 0.4, -1.9, Flavor::CscK).is_err());
        assert!(GluingSchedule::new(1e-3, 1, 2, 0.51, 0.5, Flavor::CscK).is_err());
    }

    #[test]
    fn cutoff_saturates_and_is_monotone() {
        let x1 = 0.2;
        let x2 = 0.6;
        let below = cutoff(&Jet::coords([0.1, 0.0, 0.0, 0.0])[0], x1, x2).unwrap();
        assert_eq!(below.max_abs_coeff(), 0.0);
        let above = cutoff(&Jet::coords([0.7, 0.0, 0.0, 0.0])[0], x1, x2).unwrap();
        assert_eq!(above.value(), 1.0);
        assert_eq!(above.sub(&Jet::constant(1.0)).max_abs_coeff(), 0.0);
        // midpoint = 1/2 by symmetry of the base
        let mid = cutoff(&Jet::constant(0.4), x1, x2).unwrap();
        assert!((mid.value() - 0.5).abs() < 1e-14);
        let mut last = -1.0;
        for i in 0..50 {
            let x = 0.1 + 0.6 * i as f64 / 49.0;
            let v = cutoff(&Jet::constant(x), x1, x2).unwrap().value();
            assert!(v >= last - 1e-15);
            last = v;
        }
        assert!(cutoff(&Jet::constant(0.5), 0.7, 0.3).is_err());
    }

    #[test]
    fn region_partition() {
        let s = sched_csck(1e-3);
        assert_eq!(classify_region(0.5 * s.b, &s), RegionTag::Core);
        assert_eq!(classify_region(3.0 * s.b, &s), RegionTag::TransitionAnnulus);
        assert_eq!(classify_region(1.5, &s), RegionTag::Outside);
        let k = sched_k3(1e-4);
        assert_eq!(classify_region(0.6, &k), RegionTag::TransitionAnnulus);
        assert_eq!(classify_region(0.3, &k), RegionTag::OuterAnnulus);
        // partition: tags change only at boundaries, every r classified
        for s in [&sched_csck(1e-3), &sched_k3(1e-3)] {
            let mut r = 1e-4;
            while r < 1.4 {
                let _ = classify_region(r, s);
                r *= 1.07;
            }
        }
    }

    #[test]
    fn csck_core_and_background_identities() {
        let s = sched_csck(1e-3);
        let a = s.core_scale();
        let bg = BackgroundOrbifoldMetric::default();
        let p_core = [0.4 * s.b, 0.2 * s.b, 0.0, 0.1 * s.b];
        let h = glued_metric_csck(p_core, &s, a, &bg).unwrap();
        let reference = ale::eh_herm_metric(a, p_core).unwrap();
        assert_eq!(herm_frobenius_diff(&h, &reference), 0.0);
        let p_bg = [0.6, 0.3, 0.5, 0.4];
        let h = glued_metric_csck(p_bg, &s, a, &bg).unwrap();
        let reference = bg.metric(p_bg);
        assert_eq!(herm_frobenius_diff(&h, &reference), 0.0);
    }

    #[test]
    fn csck_seams_are_continuous() {
        let s = sched_csck(1e-3);
        let a = s.core_scale();
        let bg = BackgroundOrbifoldMetric::default();
        for row in seam_audit_csck(&s, a, &bg, 40).unwrap() {
            assert!(row.min_eigenvalue > 0.5, "λ_min = {} at r = {}", row.min_eigenvalue, row.r);
            assert!(row.seam_jump <= 1e-4, "jump {} at r = {}", row.seam_jump, row.r);
        }
    }

    #[test]
    fn csck_deviation_from_background_is_quadratic() {
        // ‖h̃_t − g₀‖ on {b ≤ r ≤ 4b} fits O(r²)
        let s = sched_csck(1e-4);
        let a = s.core_scale();
        let bg = BackgroundOrbifoldMetric::default();
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        for i in 0..12 {
            let r = s.b * 4.0f64.powf(i as f64 / 11.0);
            let p = [r * 0.6, r * 0.48, r * 0.64, 0.0];
            let h = glued_metric_csck(p, &s, a, &bg).unwrap();
            let dev = herm_frobenius_diff(&h, &bg.metric(p));
            if dev > 1e-14 {
                lx.push(r.ln());
                ly.push(dev.ln());
            }
        }
        let n = lx.len() as f64;
        let sx: f64 = lx.iter().sum();
        let sy: f64 = ly.iter().sum();
        let sxx: f64 = lx.iter().map(|v| v * v).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| a * b).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope - 2.0).abs() < 0.3, "slope = {slope}");
    }

    #[test]
    fn k3_core_identity_and_neck_order() {
        let phi0 = model_quartic_field(0.1);
        for t in [2e-4, 1e-3] {
            let s = sched_k3(t);
            let a = s.core_scale();
            let p_core = [0.5 * s.epsilon.sqrt(), 0.1 * s.epsilon.sqrt(), 0.0, 0.0];
            let h = glued_metric_k3(p_core, &s, a, &phi0, None).unwrap();
            let reference = ale::eh_herm_metric(a, p_core).unwrap();
            assert_eq!(herm_frobenius_diff(&h, &reference), 0.0);
        }
        // neck deviation from the ALE metric is O(ε): slope 1 ± 0.2 in ε
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        for t in [1e-4, 3e-4, 1e-3, 3e-3] {
            let s = sched_k3(t);
            let a = s.core_scale();
            let r = 1.5 * s.epsilon.sqrt();
            let p = [r * 0.6, r * 0.48, r * 0.64, 0.0];
            let h = glued_metric_k3(p, &s, a, &phi0, None).unwrap();
            let dev = herm_frobenius_diff(&h, &ale::eh_herm_metric(a, p).unwrap());
            lx.push(s.epsilon.ln());
            ly.push(dev.ln());
        }
        let n = lx.len() as f64;
        let sx: f64 = lx.iter().sum();
        let sy: f64 = ly.iter().sum();
        let sxx: f64 = lx.iter().map(|v| v * v).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| a * b).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope - 1.0).abs() < 0.2, "neck slope = {slope}");
    }

    #[test]
    fn k3_outer_deviation_scale() {
        // on {2ε^½ ≤ r ≤ 1/2} the gluing keeps only the background
        // potential, so the glued metric agrees with ĝ₀ exactly; what
        // that step discards is the ALE tail, which must sit below the
        // ε⁴ r⁻⁴ envelope there (with a stable constant across t)
        let phi0 = model_quartic_field(0.1);
        let mut constants = Vec::new();
        for t in [1e-4, 1e-3] {
            let s = sched_k3(t);
            let a = s.core_scale();
            for rf in [2.5, 4.0] {
                let r = rf * s.epsilon.sqrt();
                if r > 0.5 {
                    continue;
                }
                let p = [r * 0.6, r * 0.48, r * 0.64, 0.0];
                let h = glued_metric_k3(p, &s, a, &phi0, None).unwrap();
                let x = Jet::coords(p);
                let g0 = metric_from_potential(&u_jet(&x).add(&phi0.eval_jet(&x).unwrap()));
                assert_eq!(herm_frobenius_diff(&h, &g0), 0.0, "outer region not exact");
                let tail =
                    herm_frobenius_diff(&ale::eh_herm_metric(a, p).unwrap(), &HermMatrix2::identity());
                constants.push(tail / (s.epsilon.powi(4) / r.powi(4)));
            }
        }
        let max = constants.iter().cloned().fold(0.0, f64::max);
        let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0 && max / min < 3.0, "constants spread too widely: {constants:?}");
    }

    #[test]
    fn hermitianization_idempotent_and_fixed_point() {
        let t = ale::eh_triple(1.0, [0.0, 0.6, 0.8]).unwrap();
        let p = [0.7, 0.2, -0.4, 0.5];
        let j = t.complex_structures(p).unwrap()[0];
        // non-invariant test metric: flat plus an asymmetric bump
        let mut g = mat4_identity();
        g[0][0] = g[0][0].add(&Jet::variable(p[0], 0).scale(0.1));
        g[0][2] = g[0][2].add(&Jet::constant(0.07));
        g[2][0] = g[0][2];
        let once = hermitianize(&g, &j);
        let twice = hermitianize(&once, &j);
        let mut worst = 0.0f64;
        for i in 0..4 {
            for k in 0..4 {
                worst = worst.max(once[i][k].sub(&twice[i][k]).max_abs_coeff());
            }
        }
        assert!(worst < 1e-12, "idempotence defect {worst}");
        // fixed point: the EH metric itself is J-invariant
        let g_inv = ale::herm_to_real_metric(&t.herm_metric(p).unwrap());
        let fixed = hermitianize(&g_inv, &j);
        let mut defect = 0.0f64;
        for i in 0..4 {
            for k in 0..4 {
                defect = defect.max((mat4_value(&fixed)[i][k] - mat4_value(&g_inv)[i][k]).abs());
            }
        }
        assert!(defect < 1e-12, "fixed-point defect {defect}");
    }

    #[test]
    fn weighted_norm_examples() {
        let s = sched_csck(1e-3);
        let plan = SamplePlan::standard(0.5 * s.epsilon, 1.0);
        let constant = |_x: &[Jet; 4]| -> Result<Jet> { Ok(Jet::constant(3.25)) };
        let n = weighted_holder_norm(&constant, &s, 2, 0.5, 0.0, &plan).unwrap();
        assert!((n - 3.25).abs() < 1e-12, "norm of constant = {n}");
        // field = ρ^δ: the j = 0 term is exactly 1 where r ≥ ε
        let delta = s.delta;
        let eps = s.epsilon;
        let weight_field = move |x: &[Jet; 4]| -> Result<Jet> {
            let r = u_jet(x).sqrt()?;
            if r.value() < eps {
                Ok(Jet::constant(eps.powf(delta)))
            } else {
                r.powf(delta)
            }
        };
        let plan0 = SamplePlan {
            r_min: 2.0 * eps,
            r_max: 1.0,
            n_radial: 16,
            n_angular: 4,
            pair_offset: 1e-3,
        };
        let n = weighted_holder_norm(&weight_field, &s, 0, 0.5, delta, &plan0).unwrap();
        assert!(n >= 1.0 - 1e-12 && n < 1.6, "norm of weight power = {n}");
        // plan touching r = 0 is rejected
        let bad = SamplePlan { r_min: 0.0, ..plan0 };
        assert!(weighted_holder_norm(&constant, &s, 0, 0.5, 0.0, &bad).is_err());
    }

    #[test]
    fn glued_positivity_across_parameters() {
        let bg = BackgroundOrbifoldMetric::default();
        assert!(bg.positivity_check(1e-3, 200).unwrap() > 0.5);
        for t in [1e-4, 1e-3, 3e-3] {
            let s = sched_csck(t);
            let a = s.core_scale();
            let mut r = 0.3 * s.b;
            while r < 1.0 {
                let p = [r * 0.36, r * 0.48, r * 0.6, r * 0.52928];
                let rr = (p.iter().map(|v| v * v).sum::<f64>()).sqrt();
                let _ = rr;
                let h = glued_metric_csck(p, &s, a, &bg).unwrap();
                let ev = h.eigenvalues_value();
                assert!(ev[0] > 0.5, "λ_min = {} at r ≈ {r}", ev[0]);
                r *= 1.9;
            }
        }
    }
}
