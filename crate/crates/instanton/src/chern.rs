//! Curvature kernel: Chern-connection curvature of a hermitian metric,
//! the second Chern form, Riemannian curvature invariants, the
//! Bott–Chern transgression between two hermitian metrics, and the
//! Monge–Ampère source of a Kähler form against a holomorphic 2-form.
//!
//! Everything here is local: inputs are jets of metric data at a single
//! chart point, outputs are densities or jet-valued forms at that point.
//! Densities are reported against the Euclidean volume form of the chart
//! (equal to the metric volume form whenever `det h = 1`).

use crate::ale::herm_to_real_metric;
use crate::integrate::gauss_legendre_01;
use crate::jets::{CJet, HermMatrix2, Jet};
use crate::linalg::{self, Mat4CJet, Mat4Jet};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Endomorphism-valued jet (2×2 complex jet matrix without a hermitian
/// symmetry claim).
pub type Endo = [[CJet; 2]; 2];

fn endo_zero() -> Endo {
    [[CJet::zero(); 2]; 2]
}

fn endo_trace(a: &Endo) -> CJet {
    a[0][0].add(&a[1][1])
}

/// Trace of the product `a·b`.
fn endo_trace_mul(a: &Endo, b: &Endo) -> CJet {
    let mut acc = CJet::zero();
    for i in 0..2 {
        for j in 0..2 {
            acc = acc.add(&a[i][j].mul(&b[j][i]));
        }
    }
    acc
}

/// Hermitian metric `h_{i j̄} = ∂_i ∂_j̄ φ` of a Kähler potential jet.
/// The result is valid to two jet orders fewer than the input.
pub fn metric_from_potential(phi: &Jet) -> HermMatrix2 {
    let c = CJet::from_real(*phi);
    let mut e = [[CJet::zero(); 2]; 2];
    for (i, row) in e.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = c.d_hol(i).d_antihol(j);
        }
    }
    HermMatrix2::new(e, true)
}

/// Constant unitary-or-not change of bundle frame: components of `h` in the
/// frame whose vectors are the columns of `f` (in the coordinate frame),
/// `h_F[a][b] = Σ_{ij} f[i][a] h_{i j̄} conj(f[j][b])`.
pub fn gauge_transform(h: &HermMatrix2, f: &[[Complex64; 2]; 2]) -> HermMatrix2 {
    let mut e = [[CJet::zero(); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = CJet::zero();
            for i in 0..2 {
                for j in 0..2 {
                    acc = acc.add(&h.e[i][j].scale(f[i][a] * f[j][b].conj()));
                }
            }
            e[a][b] = acc;
        }
    }
    HermMatrix2::new(e, h.hermitian)
}

/// Components of the Chern curvature of `h`: `r[k][l]` is the
/// endomorphism coefficient of `dz^k ∧ dz̄^l` in `∂̄(h⁻¹ ∂h)`.
/// Valid to two jet orders fewer than `h`.
pub fn curvature_components(h: &HermMatrix2) -> Result<[[Endo; 2]; 2]> {
    let hinv = h.inverse()?;
    let mut r = [[endo_zero(); 2]; 2];
    for k in 0..2 {
        let mut dh = [[CJet::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dh[i][j] = h.e[i][j].d_hol(k);
            }
        }
        // θ^i_j = h^{q̄ i} ∂_k h_{j q̄}, the transpose of (∂h)·h⁻¹ in the
        // component storage h.e[i][j] = h_{i j̄}
        let m = HermMatrix2::new(dh, false).matmul(&hinv);
        for l in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    // Θ = ∂̄θ = −(∂_l̄ θ_k) dz^k ∧ dz̄^l
                    r[k][l][i][j] = m.e[j][i].d_antihol(l).neg();
                }
            }
        }
    }
    Ok(r)
}

/// Second Chern form density against the chart volume form, as a complex
/// number whose imaginary part is a rounding diagnostic.
pub fn c2_from_components(r: &[[Endo; 2]; 2]) -> Complex64 {
    let t = |k: usize, l: usize| endo_trace(&r[k][l]).value();
    let f_tt = 2.0 * (t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0));
    let f_rr = 2.0
        * (endo_trace_mul(&r[0][0], &r[1][1]).value()
            - endo_trace_mul(&r[0][1], &r[1][0]).value());
    // c₂ = (−1/8π²)(tr Θ ∧ tr Θ − tr(Θ∧Θ)); the wedge basis
    // dz∧dz̄∧dw∧dw̄ equals −4 · dx1∧dx2∧dx3∧dx4.
    (f_tt - f_rr) * Complex64::new(1.0 / (2.0 * PI * PI), 0.0)
}

/// Pointwise density of the second Chern form of `h` against the chart
/// volume form.
pub fn c2_density(h: &HermMatrix2) -> Result<f64> {
    Ok(c2_from_components(&curvature_components(h)?).re)
}

/// Curvature summary of a hermitian metric at a point.
pub struct CurvatureData {
    /// Chern curvature components, `r[k][l]` the coefficient of
    /// `dz^k ∧ dz̄^l`.
    pub r: [[Endo; 2]; 2],
    /// Second Chern form density against the chart volume form.
    pub c2: f64,
    /// Ricci tensor `Ric_{k l̄} = −∂_k ∂_l̄ log det h`.
    pub ricci: [[Complex64; 2]; 2],
    /// Scalar curvature `2 h^{l̄ k} Ric_{k l̄}`.
    pub scalar_curv: f64,
    /// Full Riemannian curvature norm `|Rm|²` of the underlying real
    /// metric (independent pipeline through Christoffel symbols).
    pub rm_norm2: f64,
}

/// Curvature data of a hermitian metric whose jets are valid to order ≥ 4
/// (closed-form metrics). For metrics obtained from potentials, use the
/// component-level functions directly.
pub fn chern_curvature(h: &HermMatrix2) -> Result<CurvatureData> {
    let r = curvature_components(h)?;
    let c2 = c2_from_components(&r).re;
    let det = h.det();
    if det.re.value() <= 0.0 {
        return Err(Error::Degenerate("metric determinant is not positive".into()));
    }
    let log_det = CJet::from_real(det.re.ln()?);
    let mut ricci = [[Complex64::new(0.0, 0.0); 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            ricci[k][l] = -log_det.d_hol(k).d_antihol(l).value();
        }
    }
    let hinv = h.inverse()?;
    let mut scalar = Complex64::new(0.0, 0.0);
    for k in 0..2 {
        for l in 0..2 {
            scalar += hinv.e[l][k].value() * ricci[k][l];
        }
    }
    let rm = riemann_data(&herm_to_real_metric(h))?;
    Ok(CurvatureData {
        r,
        c2,
        ricci,
        scalar_curv: 2.0 * scalar.re,
        rm_norm2: rm.rm_norm2,
    })
}

/// Riemannian curvature invariants of a real metric jet matrix
/// (needs jets valid to order ≥ 2).
pub struct RiemannData {
    /// `|Rm|² = R_{abcd} R^{abcd}`.
    pub rm_norm2: f64,
    /// Ricci tensor `Ric_{ab}`.
    pub ricci: [[f64; 4]; 4],
    /// Invariant Ricci magnitude `√(Ric_{ab} Ric^{ab})`.
    pub ricci_norm: f64,
    /// Scalar curvature.
    pub scalar: f64,
}

/// Curvature of a real metric through the Levi-Civita connection:
/// Christoffel symbols as jets, then `R^a_{bcd}`, Ricci, scalar and the
/// full curvature norm, all by exact jet differentiation.
pub fn riemann_data(g: &Mat4Jet) -> Result<RiemannData> {
    let ginv = linalg::mat4_inv(g)?;
    // Γ^a_{bc} = ½ g^{ad}(∂_b g_{dc} + ∂_c g_{bd} − ∂_d g_{bc})
    let mut gamma = vec![Jet::constant(0.0); 64];
    let idx = |a: usize, b: usize, c: usize| (a * 4 + b) * 4 + c;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..=b {
                let mut acc = Jet::constant(0.0);
                for d in 0..4 {
                    let term = g[d][c]
                        .deriv(b)
                        .add(&g[b][d].deriv(c))
                        .sub(&g[b][c].deriv(d));
                    acc = acc.add(&ginv[a][d].mul(&term));
                }
                let val = acc.scale(0.5);
                gamma[idx(a, b, c)] = val;
                gamma[idx(a, c, b)] = val;
            }
        }
    }
    // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
    let mut r_up = [[[[0.0f64; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut v = gamma[idx(a, d, b)].deriv(c).value()
                        - gamma[idx(a, c, b)].deriv(d).value();
                    for e in 0..4 {
                        v += gamma[idx(a, c, e)].value() * gamma[idx(e, d, b)].value()
                            - gamma[idx(a, d, e)].value() * gamma[idx(e, c, b)].value();
                    }
                    r_up[a][b][c][d] = v;
                }
            }
        }
    }
    let gv = linalg::mat4_value(g);
    let gi = linalg::mat4_value(&ginv);
    let mut ricci = [[0.0f64; 4]; 4];
    for b in 0..4 {
        for d in 0..4 {
            ricci[b][d] = (0..4).map(|a| r_up[a][b][a][d]).sum();
        }
    }
    let mut scalar = 0.0;
    for b in 0..4 {
        for d in 0..4 {
            scalar += gi[b][d] * ricci[b][d];
        }
    }
    // mixed Ricci for the invariant norm
    let mut ric_mixed = [[0.0f64; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            ric_mixed[a][b] = (0..4).map(|c| gi[a][c] * ricci[c][b]).sum();
        }
    }
    let mut ric2 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            ric2 += ric_mixed[a][b] * ric_mixed[b][a];
        }
    }
    // |Rm|²: lower the first index, raise all four
    let mut r_low = [[[[0.0f64; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    r_low[a][b][c][d] = (0..4).map(|e| gv[a][e] * r_up[e][b][c][d]).sum();
                }
            }
        }
    }
    let mut rm2 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut up = 0.0;
                    for e in 0..4 {
                        for f in 0..4 {
                            for p in 0..4 {
                                for q in 0..4 {
                                    up += gi[a][e]
                                        * gi[b][f]
                                        * gi[c][p]
                                        * gi[d][q]
                                        * r_low[e][f][p][q];
                                }
                            }
                        }
                    }
                    rm2 += r_low[a][b][c][d] * up;
                }
            }
        }
    }
    Ok(RiemannData {
        rm_norm2: rm2,
        ricci,
        ricci_norm: ric2.max(0.0).sqrt(),
        scalar,
    })
}

/// Overall constant of the Bott–Chern transgression, fixed so that the
/// pointwise identity `c₂(g) − c₂(h) = dd^c τ(h, g)` holds; see
/// `ddc_11_density` for the `dd^c` normalization. Pinned against the
/// identity itself (the flat/bump pair test below) and frozen.
const KAPPA_TAU: Complex64 = Complex64::new(0.0, -1.0 / (2.0 * PI * PI));

/// Bott–Chern transgression `τ(h, g)` as a matrix of `(1,1)`-form
/// coefficient jets `τ[k][l] ↔ dz^k ∧ dz̄^l`, from Gauss–Legendre
/// quadrature of the linear metric path `k_s = (1−s) h + s g`.
///
/// Errors if the path leaves the positive-definite cone (it cannot for
/// positive-definite endpoints, but degenerate inputs are caught here) or
/// if fewer than 8 quadrature nodes are requested.
pub fn bott_chern_tau(h: &HermMatrix2, g: &HermMatrix2, nodes: usize) -> Result<[[CJet; 2]; 2]> {
    if nodes < 8 {
        return Err(Error::Invalid(format!(
            "transgression quadrature needs at least 8 nodes, got {nodes}"
        )));
    }
    let kdot = g.sub(h);
    let mut tau = [[CJet::zero(); 2]; 2];
    for (s, w) in gauss_legendre_01(nodes) {
        let ks = h.scale_re(1.0 - s).add(&g.scale_re(s));
        let ev = ks.eigenvalues_value();
        if ev[0] <= 0.0 {
            return Err(Error::Degenerate(format!(
                "metric path leaves the positive cone at s = {s} (λ_min = {})",
                ev[0]
            )));
        }
        // N^i_j = k_s^{q̄ i} (dk/ds)_{j q̄}, indexed like the connection
        let m = kdot.matmul(&ks.inverse()?);
        let mut n_endo: Endo = endo_zero();
        for i in 0..2 {
            for j in 0..2 {
                n_endo[i][j] = m.e[j][i];
            }
        }
        let tr_n = endo_trace(&n_endo);
        let r = curvature_components(&ks)?;
        for k in 0..2 {
            for l in 0..2 {
                let integrand = tr_n
                    .mul(&endo_trace(&r[k][l]))
                    .sub(&endo_trace_mul(&n_endo, &r[k][l]));
                tau[k][l] = tau[k][l].add(&integrand.scale(Complex64::new(w, 0.0)));
            }
        }
    }
    for row in tau.iter_mut() {
        for t in row.iter_mut() {
            *t = t.scale(KAPPA_TAU);
        }
    }
    Ok(tau)
}

/// Density of `dd^c` of a `(1,1)`-form against the chart volume form,
/// with `dd^c = (i/2) ∂ ∂̄` (the normalization with `dd^c(r²) = ω_Euc`).
pub fn ddc_11_density(tau: &[[CJet; 2]; 2]) -> f64 {
    let dd = |k: usize, l: usize, m: usize, n: usize| -> Complex64 {
        tau[k][l].d_hol(m).d_antihol(n).value()
    };
    // coefficient of dz∧dz̄∧dw∧dw̄ in ∂∂̄τ, then (i/2)·(−4) to land on Vol
    let s = dd(1, 1, 0, 0) + dd(0, 0, 1, 1) - dd(1, 0, 0, 1) - dd(0, 1, 1, 0);
    (Complex64::new(0.0, -2.0) * s).re
}

/// Relative residual of the transgression identity
/// `c₂(g) − c₂(h) = dd^c τ(h, g)` at one point.
pub fn bott_chern_residual(h: &HermMatrix2, g: &HermMatrix2, nodes: usize) -> Result<f64> {
    let c2h = c2_density(h)?;
    let c2g = c2_density(g)?;
    let dd = ddc_11_density(&bott_chern_tau(h, g, nodes)?);
    let scale = (c2g - c2h).abs().max(c2g.abs()).max(c2h.abs()).max(1e-300);
    Ok((c2g - c2h - dd).abs() / scale)
}

/// Monge–Ampère source `f = log( Ω∧Ω̄ / (2 ω̃²) )` of a Kähler form
/// matrix `ω̃` against a holomorphic 2-form matrix `Ω`, as a jet. Zero
/// exactly on a Ricci-flat model where `Ω∧Ω̄ = 2 ω̃² = 4 Vol`.
pub fn ma_source(omega_tilde: &Mat4Jet, omega_hol: &Mat4CJet) -> Result<Jet> {
    let mut conj = [[CJet::zero(); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            conj[a][b] = omega_hol[a][b].conj();
        }
    }
    let num = linalg::wedge4_coeff_c(omega_hol, &conj);
    if num.im.value().abs() > 1e-8 * num.re.value().abs().max(1e-12) {
        return Err(Error::Diagnostic(format!(
            "Ω∧Ω̄ is not real: imaginary part {:e}",
            num.im.value()
        )));
    }
    let den = linalg::wedge4_coeff(omega_tilde, omega_tilde).scale(2.0);
    if den.value() <= 0.0 {
        return Err(Error::Degenerate("ω̃² is not positively oriented".into()));
    }
    if num.re.value() <= 0.0 {
        return Err(Error::Domain("Ω∧Ω̄ is not positive".into()));
    }
    // log of a ratio near 1 through log1p of the relative excess, which
    // keeps the tiny-source regime accurate
    num.re.sub(&den).div(&den)?.ln_1p()
}

/// Closed-form non-flat hermitian metric used as a transgression test
/// partner: identity plus a localized rank-one bump,
/// `g = δ + c e^{−u} (z̄_i z_j − δ_ij)`, positive definite for c ≤ 1/2.
pub fn bump_metric(c: f64, point: [f64; 4]) -> HermMatrix2 {
    use crate::ale::u_jet;
    use crate::jets::complex_coords;
    let z = complex_coords(point);
    let x = Jet::coords(point);
    let damp = CJet::from_real(u_jet(&x).neg().exp());
    let mut e = [[CJet::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut b = z[i].conj().mul(&z[j]);
            if i == j {
                b = b.sub(&CJet::constant(Complex64::new(1.0, 0.0)));
                e[i][j] = CJet::constant(Complex64::new(1.0, 0.0));
            }
            e[i][j] = e[i][j].add(&b.mul(&damp).scale_re(c));
        }
    }
    HermMatrix2::new(e, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ale::{self, u_jet};

    fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(ys) {
            let (lx, ly) = (x.ln(), y.ln());
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn flat_metric_is_flat() {
        let r = curvature_components(&HermMatrix2::identity()).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        assert!(r[k][l][i][j].re.max_abs_coeff() == 0.0);
                        assert!(r[k][l][i][j].im.max_abs_coeff() == 0.0);
                    }
                }
            }
        }
        assert_eq!(c2_density(&HermMatrix2::identity()).unwrap(), 0.0);
        let rd = riemann_data(&linalg::mat4_identity()).unwrap();
        assert_eq!(rd.rm_norm2, 0.0);
        assert_eq!(rd.ricci_norm, 0.0);
    }

    #[test]
    fn sphere_cross_plane_curvature() {
        // Unit round S² (stereographic, Gauss curvature 1) times a flat
        // plane: scalar = 2, |Rm|² = 4, |Ric| = √2.
        let p = [0.3, -0.4, 0.2, 0.1];
        let x = Jet::coords(p);
        let conf = x[0]
            .mul(&x[0])
            .add(&x[1].mul(&x[1]))
            .add(&Jet::constant(1.0));
        let c = conf.mul(&conf).recip().unwrap().scale(4.0);
        let mut g = linalg::mat4_identity();
        g[0][0] = c;
        g[1][1] = c;
        let rd = riemann_data(&g).unwrap();
        assert!((rd.scalar - 2.0).abs() < 1e-10, "scalar = {}", rd.scalar);
        assert!((rd.rm_norm2 - 4.0).abs() < 1e-9, "|Rm|² = {}", rd.rm_norm2);
        assert!((rd.ricci_norm - 2.0f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn potential_reproduces_metric() {
        // ∂∂̄ of the closed-form potential matches the closed-form metric
        let a = 0.8;
        for p in [[0.7, 0.2, -0.4, 0.5], [1.5, -0.3, 0.2, 0.9]] {
            let x = Jet::coords(p);
            let phi = u_jet(&x).add(&ale::eh_potential_deviation(a, &x).unwrap());
            let h_pot = metric_from_potential(&phi);
            let h_ref = ale::eh_herm_metric(a, p).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let d = h_pot.e[i][j].sub(&h_ref.e[i][j]).value().norm();
                    assert!(d < 1e-12, "entry ({i},{j}) differs by {d}");
                }
            }
        }
    }

    #[test]
    fn eh_is_ricci_flat_both_pipelines() {
        for a in [0.5, 1.0, 2.0] {
            for p in [
                [0.4, 0.1, -0.3, 0.2],
                [1.0, -0.5, 0.8, 0.3],
                [2.5, 0.4, -1.2, 0.6],
            ] {
                let h = ale::eh_herm_metric(a, p).unwrap();
                let data = chern_curvature(&h).unwrap();
                for row in &data.ricci {
                    for v in row {
                        assert!(v.norm() < 1e-9, "Chern-Ricci {v} at a={a}, {p:?}");
                    }
                }
                assert!(data.scalar_curv.abs() < 1e-9);
                let rd = riemann_data(&ale::herm_to_real_metric(&h)).unwrap();
                assert!(rd.ricci_norm < 1e-8, "Ricci norm {} at a={a}, {p:?}", rd.ricci_norm);
            }
        }
    }

    #[test]
    fn c2_density_matches_riemann_norm() {
        // On a Ricci-flat metric the second Chern density equals the
        // Gauss–Bonnet integrand |Rm|²/32π² (independent pipelines:
        // complex Chern vs real Levi-Civita).
        for (a, p) in [
            (1.0, [0.6, 0.2, -0.3, 0.4]),
            (1.0, [1.5, -0.8, 0.4, 0.2]),
            (0.7, [0.3, 0.5, 0.2, -0.4]),
        ] {
            let h = ale::eh_herm_metric(a, p).unwrap();
            let data = chern_curvature(&h).unwrap();
            let expected = data.rm_norm2 / (32.0 * PI * PI);
            assert!(
                (data.c2 - expected).abs() < 1e-8 * expected.max(1e-10),
                "c2 = {}, |Rm|²/32π² = {expected}",
                data.c2
            );
            assert!(data.c2 > 0.0);
        }
    }

    #[test]
    fn eh_curvature_closed_form() {
        // |Rm|² of the scale-a metric is 384 a⁸ / (u² + a⁴)³.
        for (a, p) in [
            (1.0, [0.6, 0.2, -0.3, 0.4]),
            (1.3, [1.1, -0.2, 0.8, 0.1]),
            (0.6, [0.2, 0.4, -0.1, 0.3]),
        ] {
            let h = ale::eh_herm_metric(a, p).unwrap();
            let rd = riemann_data(&ale::herm_to_real_metric(&h)).unwrap();
            let u: f64 = p.iter().map(|x| x * x).sum();
            let expected = 384.0 * a.powi(8) / (u * u + a.powi(4)).powi(3);
            assert!(
                (rd.rm_norm2 - expected).abs() < 1e-8 * expected,
                "|Rm|² = {}, closed form {expected}",
                rd.rm_norm2
            );
        }
    }

    #[test]
    fn eh_curvature_decay_slope() {
        let rs = [10.0, 20.0, 40.0, 80.0];
        let vals: Vec<f64> = rs
            .iter()
            .map(|&r| {
                let p = [r / 2.0f64.sqrt(), 0.0, r / 2.0f64.sqrt(), 0.0];
                let h = ale::eh_herm_metric(1.0, p).unwrap();
                riemann_data(&ale::herm_to_real_metric(&h)).unwrap().rm_norm2
            })
            .collect();
        let slope = loglog_slope(&rs, &vals);
        assert!((slope + 12.0).abs() < 0.01, "slope = {slope}");
    }

    #[test]
    fn gh_one_center_is_flat() {
        let t = ale::gh_triple(vec![[0.0, 0.0, 0.0]]).unwrap();
        for p in [
            [0.5, 0.2, 0.3, 1.0],
            [1.0, -0.4, 0.6, 2.5],
            [0.2, 0.1, -0.8, 0.3],
        ] {
            let rd = riemann_data(&t.real_metric(p).unwrap()).unwrap();
            assert!(rd.rm_norm2.abs() < 1e-10, "|Rm|² = {}", rd.rm_norm2);
            assert!(rd.ricci_norm < 1e-10);
        }
    }

    #[test]
    fn gh_two_centers_is_ricci_flat() {
        let t = ale::gh_triple(vec![[0.0, 0.0, 0.5], [0.0, 0.0, -0.5]]).unwrap();
        for p in [
            [0.4, 0.1, 0.2, 0.7],
            [0.05, 0.02, 0.0, 1.3],
            [1.5, -0.6, 0.9, 0.2],
        ] {
            let rd = riemann_data(&t.real_metric(p).unwrap()).unwrap();
            assert!(rd.ricci_norm < 1e-8, "Ricci norm {} at {p:?}", rd.ricci_norm);
            assert!(rd.rm_norm2 > 0.0);
        }
    }

    #[test]
    fn gh_scaling_law() {
        // Scaling centers and the evaluation point by λ scales the metric
        // by λ and |Rm|² by λ⁻² exactly.
        let rm_at = |l: f64| -> f64 {
            let t = ale::gh_triple(vec![[0.0, 0.0, 0.5 * l], [0.0, 0.0, -0.5 * l]]).unwrap();
            let p = [0.05 * l, 0.0, 0.0, 0.4];
            riemann_data(&t.real_metric(p).unwrap()).unwrap().rm_norm2
        };
        let (r1, r2) = (rm_at(1.0), rm_at(2.0));
        assert!((r1 / r2 - 4.0).abs() < 1e-9, "ratio = {}", r1 / r2);
    }

    #[test]
    fn gh_eh_dictionary() {
        // The two-center geometry at separation ℓ matches the scale-a
        // metric with ℓ = a²/2: the curvature maximum (attained on the
        // central 2-sphere, whose value the closed form gives as 384/a⁴)
        // agrees with |Rm|² measured at the GH midpoint.
        let bolt_rm = |l: f64| -> f64 {
            let t = ale::gh_triple(vec![[0.0, 0.0, 0.5 * l], [0.0, 0.0, -0.5 * l]]).unwrap();
            // extrapolate the off-axis offset to the axis (quadratic in ρ)
            let v = |rho: f64| {
                riemann_data(&t.real_metric([rho, 0.0, 0.0, 0.4]).unwrap())
                    .unwrap()
                    .rm_norm2
            };
            let (v1, v2) = (v(0.04 * l), v(0.02 * l));
            (4.0 * v2 - v1) / 3.0
        };
        for a in [1.0f64, 1.3] {
            let l = a * a / 2.0;
            let gh = bolt_rm(l);
            let eh = 384.0 / a.powi(4);
            assert!(
                (gh - eh).abs() < 5e-4 * eh,
                "a = {a}: GH bolt |Rm|² = {gh}, EH bolt value = {eh}"
            );
        }
    }

    #[test]
    fn c2_is_frame_invariant() {
        // Constant bundle-frame changes must not move the density.
        let h = ale::eh_herm_metric(1.0, [0.7, 0.1, -0.2, 0.5]).unwrap();
        let base = c2_density(&h).unwrap();
        let frames = [
            [
                [Complex64::new(0.6, 0.8), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            [
                [Complex64::new(1.0, 0.2), Complex64::new(-0.3, 0.5)],
                [Complex64::new(0.4, -0.1), Complex64::new(0.9, 0.3)],
            ],
        ];
        for f in &frames {
            let hf = gauge_transform(&h, f);
            let v = c2_density(&hf).unwrap();
            assert!((v - base).abs() < 1e-10 * base.abs().max(1e-3), "{v} vs {base}");
        }
    }

    #[test]
    fn transgression_identity_flat_bump() {
        let flat = |_p: [f64; 4]| HermMatrix2::identity();
        for p in [
            [0.5, 0.2, -0.3, 0.4],
            [1.1, -0.6, 0.2, 0.3],
            [0.2, 0.9, 0.5, -0.1],
            [1.8, 0.3, -0.7, 0.6],
        ] {
            let g = bump_metric(0.3, p);
            assert!(g.hermitian_defect() < 1e-12);
            let res = bott_chern_residual(&flat(p), &g, 32).unwrap();
            assert!(res < 1e-6, "residual {res} at {p:?}");
        }
    }

    #[test]
    fn transgression_direction_antisymmetry() {
        // τ(h, g) = −τ(g, h) up to quadrature error.
        let p = [0.6, -0.2, 0.4, 0.3];
        let h = HermMatrix2::identity();
        let g = bump_metric(0.3, p);
        let t1 = bott_chern_tau(&h, &g, 32).unwrap();
        let t2 = bott_chern_tau(&g, &h, 32).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                let d = t1[k][l].add(&t2[k][l]).value().norm();
                assert!(d < 1e-10, "τ antisymmetry defect {d}");
            }
        }
    }

    #[test]
    fn transgression_rejects_thin_quadrature() {
        let p = [0.5, 0.2, -0.3, 0.4];
        assert!(bott_chern_tau(&HermMatrix2::identity(), &bump_metric(0.3, p), 4).is_err());
    }

    #[test]
    fn ma_source_vanishes_on_instanton() {
        for (a, p) in [(1.0, [0.5, 0.2, -0.3, 0.4]), (0.6, [1.2, -0.4, 0.7, 0.1])] {
            let t = ale::eh_triple(a, [1.0, 0.0, 0.0]).unwrap();
            let om = t.kahler_forms(p).unwrap();
            let oh = t.holomorphic_2form(p).unwrap();
            let f = ma_source(&om[0], &oh).unwrap();
            assert!(f.value().abs() < 1e-12, "f = {}", f.value());
        }
    }

    #[test]
    fn ma_source_of_scaled_form() {
        // scaling ω by c scales ω² by c², so f = −2 ln c
        let t = ale::flat_triple();
        let p = [0.4, 0.3, -0.2, 0.6];
        let om = t.kahler_forms(p).unwrap();
        let oh = t.holomorphic_2form(p).unwrap();
        let scaled = linalg::mat4_scale(&om[0], 2.0);
        let f = ma_source(&scaled, &oh).unwrap();
        assert!((f.value() + 2.0 * 2.0f64.ln()).abs() < 1e-13);
    }

}
