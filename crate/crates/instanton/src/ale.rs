//! Closed-form ALE gravitational instanton geometry.
//!
//! The A₁ instanton is realized by the Eguchi–Hanson Kähler potential on the
//! ℂ²-cover chart minus the origin. With `u = |z|² + |w|²` and scale `a`,
//!
//! ```text
//! φ_a(u) = √(u² + a⁴) + a² log u − a² log(a² + √(u² + a⁴))
//! ```
//!
//! whose hermitian metric `h_{i j̄} = φ' δ_{ij} + φ'' z̄_i z_j` has
//! `det h ≡ 1` exactly (`φ' = √(u² + a⁴)/u`), so the metric is Ricci-flat
//! with volume form equal to the Euclidean one and holomorphic 2-form
//! `Ω = dz ∧ dw`.
//!
//! The triple of Kähler forms is `(ω₁, ω₂, ω₃) = (ω_φ, Re Ω, Im Ω)`;
//! a deformation-side instanton `Y_{(0, ζ_c)}` is realized by rotating this
//! triple by the SO(3) matrix taking `e₁` to the requested unit direction,
//! with scale `a² = |ζ_c|`. The metric tensor is unchanged by the rotation;
//! only the distinguished complex structure moves.
//!
//! A_k-type multi-center metrics use the Gibbons–Hawking ansatz on the chart
//! `(x, y, z, θ)`: `g = V dx·dx + V⁻¹ (dθ + A)²` with
//! `V = Σ 1/(2|x − p_i|)` and `dA = ±*dV` in a Dirac-string gauge.

use crate::jets::{complex_coords, CJet, HermMatrix2, Jet};
use crate::linalg::{self, Mat4CJet, Mat4Jet};
use crate::{Error, Result};
use num_complex::Complex64;

/// Euclidean radius on the cover chart.
pub fn radius(point: [f64; 4]) -> f64 {
    point.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The dilation `H_α : y ↦ α y` on the chart.
pub fn dilate_point(point: [f64; 4], alpha: f64) -> [f64; 4] {
    [point[0] * alpha, point[1] * alpha, point[2] * alpha, point[3] * alpha]
}

/// Jet of `u = |z|² + |w|² = r²` at a chart point.
pub fn u_jet(x: &[Jet; 4]) -> Jet {
    let mut u = Jet::constant(0.0);
    for xi in x {
        u = u.add(&xi.mul(xi));
    }
    u
}

/// `(φ', φ'')` of the Eguchi–Hanson potential as jets of the chart point.
fn eh_phi_derivs(a: f64, u: &Jet) -> Result<(Jet, Jet)> {
    let a4 = Jet::constant(a.powi(4));
    let s = u.mul(u).add(&a4).sqrt()?; // √(u² + a⁴)
    let phi1 = s.div(u)?;
    let phi2 = a4.neg().div(&u.mul(u).mul(&s))?;
    Ok((phi1, phi2))
}

/// Hermitian Eguchi–Hanson metric components `h_{i j̄}` (standard complex
/// chart) as jets at `point`. `a = 0` gives the flat metric. Errors at the
/// chart origin.
pub fn eh_herm_metric(a: f64, point: [f64; 4]) -> Result<HermMatrix2> {
    if radius(point) == 0.0 {
        return Err(Error::Domain("chart origin excluded (r > 0 required)".into()));
    }
    if a == 0.0 {
        return Ok(HermMatrix2::identity());
    }
    let x = Jet::coords(point);
    let u = u_jet(&x);
    let (phi1, phi2) = eh_phi_derivs(a, &u)?;
    let zc = complex_coords(point);
    let mut e = [[CJet::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut ent = zc[i].conj().mul(&zc[j]).mul(&CJet::from_real(phi2));
            if i == j {
                ent = ent.add(&CJet::from_real(phi1));
            }
            e[i][j] = ent;
        }
    }
    Ok(HermMatrix2::new(e, true))
}

/// Stable jet of the potential deviation `φ_a − r²` (which is `O(a⁴ r⁻²)`
/// for `r² ≫ a²`): the naive difference of the closed form would cancel
/// catastrophically in the gluing region.
pub fn eh_potential_deviation(a: f64, x: &[Jet; 4]) -> Result<Jet> {
    if a == 0.0 {
        return Ok(Jet::constant(0.0));
    }
    let a2 = a * a;
    let u = u_jet(x);
    let a4 = Jet::constant(a2 * a2);
    let s = u.mul(&u).add(&a4).sqrt()?;
    // √(u²+a⁴) − u = a⁴ / (s + u)
    let first = a4.div(&s.add(&u))?;
    // a² log u − a² log(a² + s) = −a² log1p((a² + (s − u))/u)
    let q = Jet::constant(a2).add(&first).div(&u)?;
    let second = q.ln_1p()?.scale(-a2);
    Ok(first.add(&second))
}

/// Convert hermitian components `h_{i j̄}` to the real metric matrix
/// `g_ab = Re Σ h_{i j̄} Z^i_a Z̄^j_b` in chart coordinates.
pub fn herm_to_real_metric(h: &HermMatrix2) -> Mat4Jet {
    herm_contract(h).0
}

/// Kähler form matrix `ω_ab = −Im Σ h_{i j̄} Z^i_a Z̄^j_b` of hermitian
/// components (the form `ω = (i/2) Σ h_{i j̄} dz^i ∧ dz̄^j`).
pub fn herm_to_kahler_form(h: &HermMatrix2) -> Mat4Jet {
    herm_contract(h).1
}

fn herm_contract(h: &HermMatrix2) -> (Mat4Jet, Mat4Jet) {
    // Z-components of the real coordinate vectors ∂x1..∂x4.
    const Z: [[Complex64; 2]; 4] = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
    ];
    let mut g = linalg::mat4_zero();
    let mut om = linalg::mat4_zero();
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = CJet::zero();
            for i in 0..2 {
                for j in 0..2 {
                    let zfac = Z[a][i] * Z[b][j].conj();
                    acc = acc.add(&h.e[i][j].scale(zfac));
                }
            }
            g[a][b] = acc.re;
            om[a][b] = acc.im.neg();
        }
    }
    (g, om)
}

/// The constant 2-forms `Re(dz∧dw)` and `Im(dz∧dw)` as matrices.
fn flat_omega_jk() -> (Mat4Jet, Mat4Jet) {
    let mut oj = linalg::mat4_zero();
    let mut ok = linalg::mat4_zero();
    // dz∧dw = (dx1 + i dx2)∧(dx3 + i dx4)
    //       = dx13 − dx24 + i (dx14 + dx23)
    let set = |m: &mut Mat4Jet, a: usize, b: usize, v: f64| {
        m[a][b] = Jet::constant(v);
        m[b][a] = Jet::constant(-v);
    };
    set(&mut oj, 0, 2, 1.0);
    set(&mut oj, 1, 3, -1.0);
    set(&mut ok, 0, 3, 1.0);
    set(&mut ok, 1, 2, 1.0);
    (oj, ok)
}

/// Rotation matrix in SO(3) taking `e₁` to the unit vector `n` (Rodrigues).
fn rotation_to(n: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!("direction must be a unit vector (|n| = {norm})")));
    }
    let c = n[0]; // cos of the rotation angle (e₁·n)
    let axis = [0.0, -n[2], n[1]]; // e₁ × n, unnormalized, |axis| = sin
    let s = (axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if s < 1e-14 {
        if c > 0.0 {
            return Ok([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        }
        // n = -e₁: rotate by π about e₂.
        return Ok([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]);
    }
    let k = [axis[0] / s, axis[1] / s, axis[2] / s];
    let mut r = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let kk = k[i] * k[j] * (1.0 - c);
            let id = if i == j { c } else { 0.0 };
            r[i][j] = id + kk;
        }
    }
    // + sin θ [k]_×
    r[0][1] -= s * k[2];
    r[1][0] += s * k[2];
    r[0][2] += s * k[1];
    r[2][0] -= s * k[1];
    r[1][2] -= s * k[0];
    r[2][1] += s * k[0];
    Ok(r)
}

/// Underlying closed-form geometry of a triple.
#[derive(Clone, Debug)]
pub enum Geometry {
    /// Eguchi–Hanson family on the ℂ²/±1 cover chart; `a = 0` is flat.
    Eh { a: f64 },
    /// Gibbons–Hawking multi-center ansatz on the `(x, y, z, θ)` chart.
    Gh { centers: Vec<[f64; 3]> },
}

/// A hyperkähler triple: Riemannian metric plus the rotated triple of
/// Kähler forms and complex structures, all evaluable with exact
/// derivatives (jets) at chart points. Immutable after construction.
#[derive(Clone, Debug)]
pub struct HyperkahlerTriple {
    pub geometry: Geometry,
    /// SO(3) matrix applied to the reference triple of Kähler forms; the
    /// first row's preimage `e₁` is sent to the distinguished direction.
    pub rotation: [[f64; 3]; 3],
}

/// Eguchi–Hanson triple with scale `a > 0`, rotated so that the
/// distinguished Kähler class points along `direction`. For a deformation
/// path value `ζ_c` use `a² = |ζ_c|` and a direction orthogonal to `e₁`.
pub fn eh_triple(a: f64, direction: [f64; 3]) -> Result<HyperkahlerTriple> {
    if !(a > 0.0) {
        return Err(Error::Invalid(format!("scale a must be positive, got {a}")));
    }
    Ok(HyperkahlerTriple { geometry: Geometry::Eh { a }, rotation: rotation_to(direction)? })
}

/// The flat limit `a → 0` (the orbifold ℂ²/±1 itself).
pub fn flat_triple() -> HyperkahlerTriple {
    HyperkahlerTriple {
        geometry: Geometry::Eh { a: 0.0 },
        rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    }
}

/// Gibbons–Hawking triple for pairwise distinct monopole centers in ℝ³.
pub fn gh_triple(centers: Vec<[f64; 3]>) -> Result<HyperkahlerTriple> {
    if centers.is_empty() {
        return Err(Error::Invalid("need at least one center".into()));
    }
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            let d2: f64 = (0..3).map(|k| (centers[i][k] - centers[j][k]).powi(2)).sum();
            if d2 == 0.0 {
                return Err(Error::Degenerate(format!(
                    "coincident centers {i} and {j}: wall configuration"
                )));
            }
        }
    }
    Ok(HyperkahlerTriple {
        geometry: Geometry::Gh { centers },
        rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    })
}

impl HyperkahlerTriple {
    /// Hermitian metric components in the standard complex chart.
    /// Defined for the Eguchi–Hanson geometry (whose metric tensor is
    /// independent of the triple rotation).
    pub fn herm_metric(&self, point: [f64; 4]) -> Result<HermMatrix2> {
        match &self.geometry {
            Geometry::Eh { a } => eh_herm_metric(*a, point),
            Geometry::Gh { .. } => Err(Error::Invalid(
                "hermitian chart components are defined for the Eguchi–Hanson chart only".into(),
            )),
        }
    }

    /// Real Riemannian metric matrix (jets) at a chart point.
    pub fn real_metric(&self, point: [f64; 4]) -> Result<Mat4Jet> {
        match &self.geometry {
            Geometry::Eh { a } => Ok(herm_to_real_metric(&eh_herm_metric(*a, point)?)),
            Geometry::Gh { centers } => gh_real_metric(centers, point),
        }
    }

    /// The rotated triple of Kähler form matrices `(ω₁, ω₂, ω₃)`.
    pub fn kahler_forms(&self, point: [f64; 4]) -> Result<[Mat4Jet; 3]> {
        let base = match &self.geometry {
            Geometry::Eh { a } => {
                let h = eh_herm_metric(*a, point)?;
                let om1 = herm_to_kahler_form(&h);
                let (om2, om3) = flat_omega_jk();
                [om1, om2, om3]
            }
            Geometry::Gh { centers } => gh_kahler_forms(centers, point)?,
        };
        let mut out = [linalg::mat4_zero(), linalg::mat4_zero(), linalg::mat4_zero()];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, b) in base.iter().enumerate() {
                if self.rotation[i][j] != 0.0 {
                    *o = linalg::mat4_add(o, &linalg::mat4_scale(b, self.rotation[i][j]));
                }
            }
        }
        Ok(out)
    }

    /// The rotated complex structures `(X₁, X₂, X₃)` as jet matrices,
    /// determined by `ω(u, v) = g(X u, v)`, i.e. `X = −g⁻¹ ω`.
    pub fn complex_structures(&self, point: [f64; 4]) -> Result<[Mat4Jet; 3]> {
        let g_inv = linalg::mat4_inv(&self.real_metric(point)?)?;
        let oms = self.kahler_forms(point)?;
        Ok([
            linalg::mat4_scale(&linalg::mat4_mul(&g_inv, &oms[0]), -1.0),
            linalg::mat4_scale(&linalg::mat4_mul(&g_inv, &oms[1]), -1.0),
            linalg::mat4_scale(&linalg::mat4_mul(&g_inv, &oms[2]), -1.0),
        ])
    }

    /// Holomorphic 2-form `Ω = ω₂ + i ω₃` of the rotated triple, as a
    /// complex antisymmetric component matrix. Satisfies
    /// `Ω ∧ Ω̄ = 2 ω₁² = 4 Vol` at every point.
    pub fn holomorphic_2form(&self, point: [f64; 4]) -> Result<Mat4CJet> {
        let oms = self.kahler_forms(point)?;
        let mut out = [[CJet::zero(); 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                out[a][b] = CJet { re: oms[1][a][b], im: oms[2][a][b] };
            }
        }
        Ok(out)
    }
}

fn gh_potential_and_connection(
    centers: &[[f64; 3]],
    x: &[Jet; 4],
) -> Result<(Jet, [Jet; 2])> {
    // V = Σ 1/(2 ρ_i), A = Σ (−z̃_i / (2 ρ_i)) dφ_i in a Dirac-string gauge
    // with every string along the vertical axis through its center.
    let mut v = Jet::constant(0.0);
    let mut ax = Jet::constant(0.0);
    let mut ay = Jet::constant(0.0);
    for p in centers {
        let dx = x[0].sub(&Jet::constant(p[0]));
        let dy = x[1].sub(&Jet::constant(p[1]));
        let dz = x[2].sub(&Jet::constant(p[2]));
        let rho2 = dx.mul(&dx).add(&dy.mul(&dy)).add(&dz.mul(&dz));
        if rho2.value() <= 0.0 {
            return Err(Error::Domain("evaluation at a monopole center".into()));
        }
        let rho = rho2.sqrt()?;
        v = v.add(&rho.scale(2.0).recip()?);
        let cyl2 = dx.mul(&dx).add(&dy.mul(&dy));
        if cyl2.value() <= 0.0 {
            return Err(Error::Domain(
                "Dirac-string gauge is singular on the vertical axis through a center; \
                 evaluate off-axis"
                    .into(),
            ));
        }
        // ω dφ with ω = −z̃/(2ρ), dφ = (x̃ dy − ỹ dx)/(x̃² + ỹ²)
        let omega = dz.neg().div(&rho.scale(2.0))?;
        let denom = cyl2.recip()?;
        ax = ax.add(&omega.mul(&dy.neg()).mul(&denom));
        ay = ay.add(&omega.mul(&dx).mul(&denom));
    }
    Ok((v, [ax, ay]))
}

fn gh_real_metric(centers: &[[f64; 3]], point: [f64; 4]) -> Result<Mat4Jet> {
    let x = Jet::coords(point);
    let (v, a) = gh_potential_and_connection(centers, &x)?;
    let v_inv = v.recip()?;
    // η = dθ + A: covector components in (x, y, z, θ).
    let eta = [a[0], a[1], Jet::constant(0.0), Jet::constant(1.0)];
    let mut g = linalg::mat4_zero();
    for i in 0..3 {
        g[i][i] = v;
    }
    for i in 0..4 {
        for j in 0..4 {
            g[i][j] = g[i][j].add(&v_inv.mul(&eta[i]).mul(&eta[j]));
        }
    }
    Ok(g)
}

fn gh_kahler_forms(centers: &[[f64; 3]], point: [f64; 4]) -> Result<[Mat4Jet; 3]> {
    let x = Jet::coords(point);
    let (v, a) = gh_potential_and_connection(centers, &x)?;
    let eta = [a[0], a[1], Jet::constant(0.0), Jet::constant(1.0)];
    // ω_i = η ∧ dx^i + V dx^j ∧ dx^k for (i, j, k) cyclic in (1, 2, 3).
    let mut out = [linalg::mat4_zero(), linalg::mat4_zero(), linalg::mat4_zero()];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let mut om = linalg::mat4_zero();
        for b in 0..4 {
            // (η ∧ dx^i)_{ab} = η_a δ_{b,i} − η_b δ_{a,i}
            om[b][i] = om[b][i].add(&eta[b]);
            om[i][b] = om[i][b].sub(&eta[b]);
        }
        om[j][k] = om[j][k].add(&v);
        om[k][j] = om[k][j].sub(&v);
        out[i] = om;
    }
    Ok(out)
}

/// A frame of the (1,0)-tangent space of the triple's distinguished complex
/// structure at a point, with its exact dual covectors.
#[derive(Clone, Debug)]
pub struct Frame {
    /// Frame vectors `e₁, e₂` as complex components in chart coordinates.
    pub e: [[Complex64; 4]; 2],
    /// Dual covectors with `dual[i](e[j]) = δ_ij`.
    pub dual: [[Complex64; 4]; 2],
}

/// Asymptotic (1,0)-frame `e^i = ½(v_i − i X v_i)` with `v₁ = ∂x1`,
/// `v₂ = ∂x3` and `X` the distinguished complex structure. Defined on the
/// asymptotic region `r ≥ 1`; for the flat aligned triple it is exactly
/// `(∂/∂z, ∂/∂w)`.
pub fn asymptotic_frame(triple: &HyperkahlerTriple, point: [f64; 4]) -> Result<Frame> {
    if radius(point) < 1.0 {
        return Err(Error::Domain(
            "asymptotic frame is defined on the region r ≥ 1 only".into(),
        ));
    }
    let xs = triple.complex_structures(point)?;
    let xv = linalg::mat4_value(&xs[0]);
    let mut e = [[Complex64::new(0.0, 0.0); 4]; 2];
    for (fi, base) in [(0usize, 0usize), (1usize, 2usize)] {
        for a in 0..4 {
            let v = if a == base { 1.0 } else { 0.0 };
            e[fi][a] = Complex64::new(0.5 * v, -0.5 * xv[a][base]);
        }
    }
    // Invert [e₁ e₂ ē₁ ē₂] to read off the dual covectors.
    let m: Vec<Vec<Complex64>> = (0..4)
        .map(|a| vec![e[0][a], e[1][a], e[0][a].conj(), e[1][a].conj()])
        .collect();
    let minv = linalg::cmat_inv(&m)?;
    let mut dual = [[Complex64::new(0.0, 0.0); 4]; 2];
    for i in 0..2 {
        for a in 0..4 {
            dual[i][a] = minv[i][a];
        }
    }
    Ok(Frame { e, dual })
}
