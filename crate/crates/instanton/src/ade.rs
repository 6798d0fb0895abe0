//! ADE root systems, deformation paths and the non-degeneracy classifier.
//!
//! A deformation path `ζ(t) = ζ_r ⊕ ζ_c` is a truncated power series in `t`
//! with coefficients in `𝔥 ⊗ ℝ³` (one real and one complex Cartan
//! component). The classifier asks two things of the leading coefficient
//! `ζ̇` (the coefficient at the vanishing order `p`):
//!
//! * `p ≤ d`, where `d` is the base-change degree of the family, and
//! * `ζ̇` avoids every root wall: for each root `θ` at least one of the
//!   three real components of `ζ̇` pairs non-trivially with `θ`.
//!
//! Pairings are evaluated in exact rational arithmetic, so wall membership
//! (a measure-zero condition) is decided without tolerances.

use crate::{Error, Result};
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub type Rat = Rational64;

/// ADE family label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdeKind {
    A,
    D,
    E,
}

/// Root system of a simply-laced (ADE) type.
///
/// Roots are stored as integer vectors. For A- and D-types these live in the
/// usual ambient coordinates (`e_i - e_j` in ℝ^{rank+1} for A, `±e_i ± e_j`
/// in ℝ^rank for D) where the pairing is the dot product. For E-types roots
/// are stored in simple-root coordinates and paired through the Cartan
/// matrix as Gram matrix. In both cases every root has squared length 2.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub kind: AdeKind,
    pub rank: usize,
    /// Integer root vectors, closed under negation.
    pub roots: Vec<Vec<i64>>,
    pub cartan_matrix: Vec<Vec<i64>>,
    pub weyl_order: u128,
    /// C*-action weights (k₁, k₂, k₃) of the defining equation of the
    /// singularity: A_rank is computed from the `(n, n, 2)` rule with
    /// `n = rank + 1`; D/E values come from the classical table of weighted
    /// homogeneous equations.
    pub cstar_weights: (u32, u32, u32),
    /// Gram matrix for the root coordinates; `None` means the dot product.
    gram: Option<Vec<Vec<i64>>>,
}

impl RootSystem {
    /// Dimension of the vector space the stored roots (and path
    /// coefficients) live in.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            AdeKind::A => self.rank + 1,
            _ => self.rank,
        }
    }

    /// Exact pairing of a root with a rational vector.
    pub fn pair(&self, root: &[i64], v: &[Rat]) -> Rat {
        match &self.gram {
            None => root
                .iter()
                .zip(v)
                .map(|(&r, x)| Rat::from_integer(r) * x)
                .sum(),
            Some(g) => {
                let mut acc = Rat::zero();
                for (i, &ri) in root.iter().enumerate() {
                    for (j, xj) in v.iter().enumerate() {
                        acc += Rat::from_integer(ri * g[i][j]) * xj;
                    }
                }
                acc
            }
        }
    }

    /// Exact squared length of a root under the system's pairing.
    pub fn root_norm2(&self, root: &[i64]) -> i64 {
        let v: Vec<Rat> = root.iter().map(|&r| Rat::from_integer(r)).collect();
        let n = self.pair(root, &v);
        assert!(n.is_integer());
        n.to_integer()
    }

    /// |Γ| of the corresponding finite subgroup of SU(2)
    /// (A_n: n+1, D_n: 4(n-2), E6: 24, E7: 48, E8: 120).
    pub fn gamma_order(&self) -> u64 {
        match self.kind {
            AdeKind::A => self.rank as u64 + 1,
            AdeKind::D => 4 * (self.rank as u64 - 2),
            AdeKind::E => match self.rank {
                6 => 24,
                7 => 48,
                8 => 120,
                _ => unreachable!(),
            },
        }
    }
}

fn cartan_from_edges(rank: usize, edges: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let mut c = vec![vec![0i64; rank]; rank];
    for i in 0..rank {
        c[i][i] = 2;
    }
    for &(a, b) in edges {
        c[a][b] = -1;
        c[b][a] = -1;
    }
    c
}

/// Enumerate all roots from the simple ones by closing under the simple
/// reflections `s_i(x) = x - (xᵀ C e_i) e_i` (simple-root coordinates).
fn roots_by_reflection(cartan: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let rank = cartan.len();
    let mut roots: Vec<Vec<i64>> = Vec::new();
    let mut frontier: Vec<Vec<i64>> = (0..rank)
        .map(|i| {
            let mut v = vec![0i64; rank];
            v[i] = 1;
            v
        })
        .collect();
    let mut seen = std::collections::HashSet::new();
    while let Some(x) = frontier.pop() {
        if !seen.insert(x.clone()) {
            continue;
        }
        roots.push(x.clone());
        for i in 0..rank {
            let pairing: i64 = (0..rank).map(|j| x[j] * cartan[i][j]).sum();
            let mut y = x.clone();
            y[i] -= pairing;
            if !seen.contains(&y) {
                frontier.push(y);
            }
        }
    }
    roots
}

/// Build the root system of a valid ADE label.
pub fn build_root_system(kind: AdeKind, rank: usize) -> Result<RootSystem> {
    match (kind, rank) {
        (AdeKind::A, r) if r >= 1 => {
            let n = r + 1;
            let mut roots = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let mut v = vec![0i64; n];
                        v[i] = 1;
                        v[j] = -1;
                        roots.push(v);
                    }
                }
            }
            let edges: Vec<_> = (0..r.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            let weyl_order = (1..=n as u128).product();
            Ok(RootSystem {
                kind,
                rank: r,
                roots,
                cartan_matrix: cartan_from_edges(r, &edges),
                weyl_order,
                cstar_weights: (n as u32, n as u32, 2),
                gram: None,
            })
        }
        (AdeKind::D, r) if r >= 3 => {
            let mut roots = Vec::new();
            for i in 0..r {
                for j in (i + 1)..r {
                    for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        let mut v = vec![0i64; r];
                        v[i] = si;
                        v[j] = sj;
                        roots.push(v);
                    }
                }
            }
            let mut edges: Vec<_> = (0..r - 2).map(|i| (i, i + 1)).collect();
            edges.pop();
            edges.push((r - 3, r - 2));
            edges.push((r - 3, r - 1));
            let weyl_order = (1..=r as u128).product::<u128>() * (1u128 << (r - 1));
            // D_n singularity x² + y²z + z^{n-1}: degrees (n-1, n-2, 2).
            let w = ((r as u32) - 1, (r as u32) - 2, 2);
            Ok(RootSystem {
                kind,
                rank: r,
                roots,
                cartan_matrix: cartan_from_edges(r, &edges),
                weyl_order,
                cstar_weights: w,
                gram: None,
            })
        }
        (AdeKind::E, r @ (6 | 7 | 8)) => {
            // Chain 0-1-...-(r-2) with the extra node r-1 attached to node 2
            // (third from the short end).
            let mut edges: Vec<_> = (0..r - 2).map(|i| (i, i + 1)).collect();
            edges.push((2, r - 1));
            let cartan = cartan_from_edges(r, &edges);
            let roots = roots_by_reflection(&cartan);
            let (weyl_order, weights) = match r {
                6 => (51_840u128, (6, 4, 3)),
                7 => (2_903_040u128, (9, 6, 4)),
                8 => (696_729_600u128, (15, 10, 6)),
                _ => unreachable!(),
            };
            Ok(RootSystem {
                kind,
                rank: r,
                roots,
                cartan_matrix: cartan.clone(),
                weyl_order,
                cstar_weights: weights,
                gram: Some(cartan),
            })
        }
        _ => Err(Error::Invalid(format!(
            "invalid ADE label: kind {kind:?}, rank {rank}"
        ))),
    }
}

/// One series coefficient of a path: an element of `𝔥 ⊗ ℝ³`, split into the
/// real Cartan component and the real/imaginary parts of the complex one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaCoeff {
    pub r: Vec<Rat>,
    pub c_re: Vec<Rat>,
    pub c_im: Vec<Rat>,
}

impl ZetaCoeff {
    pub fn zero(dim: usize) -> Self {
        ZetaCoeff {
            r: vec![Rat::zero(); dim],
            c_re: vec![Rat::zero(); dim],
            c_im: vec![Rat::zero(); dim],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.r.iter().all(Rat::is_zero)
            && self.c_re.iter().all(Rat::is_zero)
            && self.c_im.iter().all(Rat::is_zero)
    }

    pub fn scale(&self, s: Rat) -> Self {
        ZetaCoeff {
            r: self.r.iter().map(|x| x * s).collect(),
            c_re: self.c_re.iter().map(|x| x * s).collect(),
            c_im: self.c_im.iter().map(|x| x * s).collect(),
        }
    }
}

/// Truncated deformation path `ζ(t) = Σ_k coeffs[k] t^k` with base-change
/// degree `d`. The constant coefficient must vanish (the family degenerates
/// at `t = 0`); the constructor enforces this.
#[derive(Clone, Debug)]
pub struct ZetaPath {
    coeffs: Vec<ZetaCoeff>,
    pub d: u32,
    pub truncation_order: usize,
    pub dim: usize,
}

/// Default series truncation order.
pub const DEFAULT_TRUNCATION: usize = 8;

impl ZetaPath {
    /// Build from coefficients `coeffs[k]` at `t^k`. `coeffs[0]`, if
    /// present, must be zero.
    pub fn new(coeffs: Vec<ZetaCoeff>, d: u32, dim: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("base-change degree d must be ≥ 1".into()));
        }
        for c in &coeffs {
            if c.r.len() != dim || c.c_re.len() != dim || c.c_im.len() != dim {
                return Err(Error::Invalid("inconsistent coefficient dimensions".into()));
            }
        }
        if let Some(c0) = coeffs.first() {
            if !c0.is_zero() {
                return Err(Error::Invalid("ζ(0) must vanish".into()));
            }
        }
        let truncation_order = coeffs.len().max(DEFAULT_TRUNCATION);
        Ok(ZetaPath { coeffs, d, truncation_order, dim })
    }

    pub fn coeff(&self, k: usize) -> Option<&ZetaCoeff> {
        self.coeffs.get(k)
    }

    pub fn coeffs(&self) -> &[ZetaCoeff] {
        &self.coeffs
    }

    /// Scale the whole path by a nonzero rational.
    pub fn scaled(&self, s: Rat) -> Result<Self> {
        if s.is_zero() {
            return Err(Error::Invalid("scaling a path by zero".into()));
        }
        Ok(ZetaPath {
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
            ..self.clone()
        })
    }

    /// Evaluate `ζ_c(t)` in floating point; returns the complex Cartan
    /// vector as (re, im) pairs.
    pub fn zeta_c_at(&self, t: f64) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); self.dim];
        let mut tk = 1.0;
        for c in &self.coeffs {
            for (o, (re, im)) in out.iter_mut().zip(c.c_re.iter().zip(c.c_im.iter())) {
                o.0 += rat_f64(re) * tk;
                o.1 += rat_f64(im) * tk;
            }
            tk *= t;
        }
        out
    }

    /// Euclidean norm `|ζ_c(t)|` of the complex Cartan component.
    pub fn zeta_c_norm(&self, t: f64) -> f64 {
        self.zeta_c_at(t)
            .iter()
            .map(|(re, im)| re * re + im * im)
            .sum::<f64>()
            .sqrt()
    }
}

pub fn rat_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Vanishing order of a path: the least `p ≥ 1` with a nonzero coefficient,
/// together with that leading coefficient `ζ̇`.
pub fn vanishing_order(path: &ZetaPath) -> Result<(usize, ZetaCoeff)> {
    for (k, c) in path.coeffs.iter().enumerate().skip(1) {
        if !c.is_zero() {
            return Ok((k, c.clone()));
        }
    }
    Err(Error::Degenerate(format!(
        "vanishing order exceeds truncation (all coefficients zero up to t^{})",
        path.coeffs.len().saturating_sub(1)
    )))
}

/// Verdict of the non-degeneracy classifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Nondegenerate { p: usize },
    /// `p > d`, with the offending pair.
    DegenerateOrder { p: usize, d: u32 },
    /// `ζ̇` lies on the wall of this root.
    DegenerateWall { root: Vec<i64> },
}

impl Verdict {
    pub fn is_nondegenerate(&self) -> bool {
        matches!(self, Verdict::Nondegenerate { .. })
    }
}

/// Classify a path: non-degenerate iff `p ≤ d` and the leading coefficient
/// pairs non-trivially (in at least one of its three real components) with
/// every root. Exact rational arithmetic throughout.
pub fn is_nondegenerate(path: &ZetaPath, rs: &RootSystem) -> Result<Verdict> {
    if path.dim != rs.ambient_dim() {
        return Err(Error::Invalid(format!(
            "path dimension {} does not match root system ambient dimension {}",
            path.dim,
            rs.ambient_dim()
        )));
    }
    let (p, dot) = vanishing_order(path)?;
    if p > path.d as usize {
        return Ok(Verdict::DegenerateOrder { p, d: path.d });
    }
    for root in &rs.roots {
        let on_wall = rs.pair(root, &dot.r).is_zero()
            && rs.pair(root, &dot.c_re).is_zero()
            && rs.pair(root, &dot.c_im).is_zero();
        if on_wall {
            return Ok(Verdict::DegenerateWall { root: root.clone() });
        }
    }
    Ok(Verdict::Nondegenerate { p })
}

/// Predicted Hölder exponent `1/d` of the limit density. Errors when the
/// path is degenerate (the prediction's hypothesis fails).
pub fn predicted_holder_exponent(path: &ZetaPath, rs: &RootSystem) -> Result<Rat> {
    match is_nondegenerate(path, rs)? {
        Verdict::Nondegenerate { .. } => Ok(Rat::new(1, path.d as i64)),
        v => Err(Error::Degenerate(format!(
            "path is degenerate ({v:?}); no exponent prediction"
        ))),
    }
}

/// Build an A-type path from the eigenvalue series `h_i(t)` of the family
/// `xy = Π (z - h_i(t))`: re-centers the tuple to trace zero and places it
/// in the complex Cartan component (`ζ_r ≡ 0`).
///
/// `h_series[i][k]` is the coefficient of `t^k` in `h_i(t)`, as a complex
/// rational `(re, im)`.
pub fn an_family_to_zeta(h_series: &[Vec<(Rat, Rat)>], d: u32) -> Result<ZetaPath> {
    let n = h_series.len();
    if n < 2 {
        return Err(Error::Invalid("need at least two eigenvalue series".into()));
    }
    let len = h_series[0].len();
    if h_series.iter().any(|s| s.len() != len) {
        return Err(Error::Invalid("inconsistent series lengths".into()));
    }
    let n_rat = Rat::from_integer(n as i64);
    let mut coeffs = Vec::with_capacity(len);
    for k in 0..len {
        let mean_re: Rat = h_series.iter().map(|s| s[k].0).sum::<Rat>() / n_rat;
        let mean_im: Rat = h_series.iter().map(|s| s[k].1).sum::<Rat>() / n_rat;
        let mut c = ZetaCoeff::zero(n);
        for (i, s) in h_series.iter().enumerate() {
            c.c_re[i] = s[k].0 - mean_re;
            c.c_im[i] = s[k].1 - mean_im;
        }
        coeffs.push(c);
    }
    ZetaPath::new(coeffs, d, n)
}

// ---------------------------------------------------------------------------
// JSON interchange schema
// ---------------------------------------------------------------------------

/// Serializable description of a family: root system label plus path data.
///
/// Schema: rationals are `[numer, denom]` integer pairs; each series
/// coefficient lists its real Cartan vector and the complex one as
/// `[re, im]` pairs of rationals.
///
/// ```json
/// {
///   "kind": "A", "rank": 1, "d": 2,
///   "coeffs": [
///     { "r": [[0,1],[0,1]], "c": [[[0,1],[0,1]], [[0,1],[0,1]]] },
///     { "r": [[0,1],[0,1]], "c": [[[1,1],[0,1]], [[-1,1],[0,1]]] }
///   ]
/// }
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: AdeKind,
    pub rank: usize,
    pub d: u32,
    pub coeffs: Vec<CoeffSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffSpec {
    /// Real Cartan component: a rational per ambient coordinate.
    pub r: Vec<[i64; 2]>,
    /// Complex Cartan component: an `[re, im]` pair of rationals per
    /// ambient coordinate.
    pub c: Vec<[[i64; 2]; 2]>,
}

fn spec_rat(x: [i64; 2]) -> Result<Rat> {
    if x[1] == 0 {
        return Err(Error::Invalid("rational with zero denominator".into()));
    }
    Ok(Rat::new(x[0], x[1]))
}

fn rat_spec(r: &Rat) -> [i64; 2] {
    [*r.numer(), *r.denom()]
}

impl FamilySpec {
    pub fn to_parts(&self) -> Result<(RootSystem, ZetaPath)> {
        let rs = build_root_system(self.kind, self.rank)?;
        let dim = rs.ambient_dim();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if c.r.len() != dim || c.c.len() != dim {
                return Err(Error::Invalid(format!(
                    "coefficient dimension does not match ambient dimension {dim}"
                )));
            }
            let mut z = ZetaCoeff::zero(dim);
            for i in 0..dim {
                z.r[i] = spec_rat(c.r[i])?;
                z.c_re[i] = spec_rat(c.c[i][0])?;
                z.c_im[i] = spec_rat(c.c[i][1])?;
            }
            coeffs.push(z);
        }
        let path = ZetaPath::new(coeffs, self.d, dim)?;
        Ok((rs, path))
    }

    pub fn from_parts(rs: &RootSystem, path: &ZetaPath) -> Self {
        let coeffs = path
            .coeffs()
            .iter()
            .map(|c| CoeffSpec {
                r: c.r.iter().map(rat_spec).collect(),
                c: c
                    .c_re
                    .iter()
                    .zip(&c.c_im)
                    .map(|(re, im)| [rat_spec(re), rat_spec(im)])
                    .collect(),
            })
            .collect();
        FamilySpec { kind: rs.kind, rank: rs.rank, d: path.d, coeffs }
    }
}

/// The standard A₁ test family `xy = z² + t` on its degree-2 cover
/// `s² = t`: eigenvalues `h = (is, -is)` give `ζ_c(s) = s·(i, -i)`,
/// vanishing order 1 in the cover variable.
pub fn a1_standard_family() -> (RootSystem, ZetaPath) {
    let rs = build_root_system(AdeKind::A, 1).unwrap();
    let h = vec![
        vec![(Rat::zero(), Rat::zero()), (Rat::zero(), Rat::from_integer(1))],
        vec![(Rat::zero(), Rat::zero()), (Rat::zero(), Rat::from_integer(-1))],
    ];
    let path = an_family_to_zeta(&h, 2).unwrap();
    (rs, path)
}
