//! Truncated Taylor expansions ("jets") in 4 real chart coordinates.
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar field at a chart
//! point, for every multi-index `α = (α1, α2, α3, α4)` with `|α| ≤ 4`.
//! Coefficients are stored in divided form `c_α = ∂^α f / α!`, which makes
//! multiplication a plain convolution and keeps composition with univariate
//! functions a finite polynomial identity: writing `u = u(0) + w`, the
//! non-constant part `w` is nilpotent (`w⁵ = 0` at order 4), so
//! `f(u) = Σ_{k≤4} f⁽ᵏ⁾(u(0)) wᵏ / k!` exactly at this truncation order.
//!
//! Complex-valued fields use [`CJet`] (a pair of real jets) and hermitian
//! 2×2 metric components use [`HermMatrix2`].

use crate::{Error, Result};
use std::sync::OnceLock;

/// Truncation order of all jets in the crate. Curvature consumes two
/// derivatives of the metric and the pointwise transgression check consumes
/// two more, so order 4 suffices for every operation here. Raising this
/// constant (and nothing else) raises the order everywhere.
pub const ORDER: usize = 4;

/// Number of multi-indices of 4 variables with total degree ≤ [`ORDER`]:
/// binomial(ORDER + 4, 4) = 70 for ORDER = 4.
pub const N_COEFFS: usize = 70;

/// Multi-index tables, built once.
struct Tables {
    /// Multi-indices ordered by total degree, then lexicographically.
    midx: Vec<[u8; 4]>,
    /// Flat lookup `α -> position`, indexed by `((a*5+b)*5+c)*5+d`.
    lookup: [i16; 625],
    /// `α!` per position.
    factorial: Vec<f64>,
    /// All `(i, j, k)` with `midx[i] + midx[j] = midx[k]` (for products).
    mul_triples: Vec<(u16, u16, u16)>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut midx = Vec::new();
        for deg in 0..=ORDER as u8 {
            for a in 0..=deg {
                for b in 0..=deg - a {
                    for c in 0..=deg - a - b {
                        let d = deg - a - b - c;
                        midx.push([a, b, c, d]);
                    }
                }
            }
        }
        assert_eq!(midx.len(), N_COEFFS);
        let mut lookup = [-1i16; 625];
        for (pos, m) in midx.iter().enumerate() {
            let key = (((m[0] as usize * 5) + m[1] as usize) * 5 + m[2] as usize) * 5
                + m[3] as usize;
            lookup[key] = pos as i16;
        }
        let fact = |n: u8| -> f64 { (1..=n as u64).product::<u64>() as f64 };
        let factorial = midx
            .iter()
            .map(|m| fact(m[0]) * fact(m[1]) * fact(m[2]) * fact(m[3]))
            .collect();
        let mut mul_triples = Vec::new();
        for (i, a) in midx.iter().enumerate() {
            for (j, b) in midx.iter().enumerate() {
                let deg: u8 = (0..4).map(|v| a[v] + b[v]).sum();
                if deg as usize <= ORDER {
                    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                    let key = (((s[0] as usize * 5) + s[1] as usize) * 5 + s[2] as usize) * 5
                        + s[3] as usize;
                    mul_triples.push((i as u16, j as u16, lookup[key] as u16));
                }
            }
        }
        Tables { midx, lookup, factorial, mul_triples }
    })
}

/// Position of a multi-index in the coefficient table, or `None` if its
/// total degree exceeds [`ORDER`].
pub fn index_of(alpha: [u8; 4]) -> Option<usize> {
    if alpha.iter().any(|&a| a > ORDER as u8) {
        return None;
    }
    let key = (((alpha[0] as usize * 5) + alpha[1] as usize) * 5 + alpha[2] as usize) * 5
        + alpha[3] as usize;
    let p = tables().lookup[key];
    (p >= 0).then_some(p as usize)
}

/// All multi-indices with total degree ≤ [`ORDER`], in table order.
pub fn multi_indices() -> &'static [[u8; 4]] {
    &tables().midx
}

/// Jet of a real scalar field at a point: value and all mixed partials up to
/// order [`ORDER`], stored as divided Taylor coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; N_COEFFS],
}

impl Jet {
    /// The jet of a constant field.
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N_COEFFS];
        c[0] = v;
        Jet { c }
    }

    /// The jet of the coordinate field `x_i` (i in 0..4) at a point where it
    /// takes the value `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        assert!(i < 4, "chart has 4 coordinates");
        let mut c = [0.0; N_COEFFS];
        c[0] = v;
        let mut e = [0u8; 4];
        e[i] = 1;
        c[index_of(e).unwrap()] = 1.0;
        Jet { c }
    }

    /// Jets of all 4 coordinate fields at `point`.
    pub fn coords(point: [f64; 4]) -> [Jet; 4] {
        [
            Jet::variable(point[0], 0),
            Jet::variable(point[1], 1),
            Jet::variable(point[2], 2),
            Jet::variable(point[3], 3),
        ]
    }

    /// Value part (order-0 truncation).
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// The partial derivative `∂^α f` (the coefficient times `α!`).
    pub fn partial(&self, alpha: [u8; 4]) -> f64 {
        match index_of(alpha) {
            Some(p) => self.c[p] * tables().factorial[p],
            None => panic!("multi-index {alpha:?} exceeds jet order {ORDER}"),
        }
    }

    /// Raw divided coefficient at a table position.
    pub fn coeff(&self, pos: usize) -> f64 {
        self.c[pos]
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c.iter()) {
            *a += b;
        }
        Jet { c }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c.iter()) {
            *a -= b;
        }
        Jet { c }
    }

    pub fn neg(&self) -> Jet {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a = -*a;
        }
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a *= s;
        }
        Jet { c }
    }

    /// Product of two jets (truncated convolution of Taylor coefficients).
    pub fn mul(&self, o: &Jet) -> Jet {
        let mut c = [0.0; N_COEFFS];
        for &(i, j, k) in &tables().mul_triples {
            c[k as usize] += self.c[i as usize] * o.c[j as usize];
        }
        Jet { c }
    }

    /// Compose with a univariate function given its derivatives
    /// `derivs[k] = f⁽ᵏ⁾(self.value())` for `k = 0..=ORDER`.
    pub fn compose(&self, derivs: [f64; ORDER + 1]) -> Jet {
        // w = self - value is nilpotent: accumulate Σ f^(k)(v)/k! w^k.
        let mut w = *self;
        w.c[0] = 0.0;
        let mut acc = Jet::constant(derivs[0]);
        let mut wk = Jet::constant(1.0);
        let mut kfact = 1.0;
        for k in 1..=ORDER {
            kfact *= k as f64;
            wk = wk.mul(&w);
            acc = acc.add(&wk.scale(derivs[k] / kfact));
        }
        acc
    }

    /// Reciprocal `1/f`. Errors on zero value part.
    pub fn recip(&self) -> Result<Jet> {
        let v = self.c[0];
        if v == 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("reciprocal of jet with value {v}")));
        }
        // d^k/du^k (1/u) = (-1)^k k! / u^{k+1}
        let mut d = [0.0; ORDER + 1];
        let mut p = 1.0 / v;
        let mut sign = 1.0;
        let mut kfact = 1.0;
        for k in 0..=ORDER {
            if k > 0 {
                kfact *= k as f64;
            }
            d[k] = sign * kfact * p;
            p /= v;
            sign = -sign;
        }
        Ok(self.compose(d))
    }

    /// Quotient `f/g`. Errors on zero divisor value.
    pub fn div(&self, o: &Jet) -> Result<Jet> {
        Ok(self.mul(&o.recip()?))
    }

    /// Square root. Errors on non-positive value part.
    pub fn sqrt(&self) -> Result<Jet> {
        let v = self.c[0];
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("sqrt of jet with value {v}")));
        }
        let s = v.sqrt();
        // d^k/du^k u^{1/2} = (1/2)(1/2-1)...(1/2-k+1) u^{1/2-k}
        let mut d = [0.0; ORDER + 1];
        d[0] = s;
        let mut coef = 1.0;
        let mut pw = s;
        for k in 1..=ORDER {
            coef *= 0.5 - (k as f64 - 1.0);
            pw /= v;
            d[k] = coef * pw;
        }
        Ok(self.compose(d))
    }

    /// Natural logarithm. Errors on non-positive value part.
    pub fn ln(&self) -> Result<Jet> {
        let v = self.c[0];
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("log of jet with value {v}")));
        }
        // d^k/du^k log u = (-1)^{k-1} (k-1)! / u^k for k ≥ 1
        let mut d = [0.0; ORDER + 1];
        d[0] = v.ln();
        let mut p = 1.0 / v;
        let mut sign = 1.0;
        let mut km1fact = 1.0;
        for k in 1..=ORDER {
            if k > 1 {
                km1fact *= (k - 1) as f64;
            }
            d[k] = sign * km1fact * p;
            p /= v;
            sign = -sign;
        }
        Ok(self.compose(d))
    }

    /// `log(1 + f)`, evaluated stably for small value parts (the naive
    /// `(1 + f).ln()` loses the digits of a tiny `f` in the addition).
    /// Errors when `1 + value ≤ 0`.
    pub fn ln_1p(&self) -> Result<Jet> {
        let v = self.c[0];
        if v <= -1.0 || !v.is_finite() {
            return Err(Error::Domain(format!("log1p of jet with value {v}")));
        }
        let mut d = [0.0; ORDER + 1];
        d[0] = v.ln_1p();
        let mut p = 1.0 / (1.0 + v);
        let mut sign = 1.0;
        let mut km1fact = 1.0;
        for k in 1..=ORDER {
            if k > 1 {
                km1fact *= (k - 1) as f64;
            }
            d[k] = sign * km1fact * p;
            p /= 1.0 + v;
            sign = -sign;
        }
        Ok(self.compose(d))
    }

    /// Exponential.
    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.compose([e; ORDER + 1])
    }

    /// Real power `f^p`. Errors on non-positive value part (non-integer
    /// powers of negative bases are out of domain; positive bases cover
    /// every use in the crate).
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let v = self.c[0];
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("power of jet with value {v}")));
        }
        let mut d = [0.0; ORDER + 1];
        let mut coef = 1.0;
        let mut pw = v.powf(p);
        d[0] = pw;
        for k in 1..=ORDER {
            coef *= p - (k as f64 - 1.0);
            pw /= v;
            d[k] = coef * pw;
        }
        Ok(self.compose(d))
    }

    /// The jet of `∂_i f`, known one order lower: the top-order coefficients
    /// of the result are zero and must not be relied upon. Each application
    /// loses one valid order.
    pub fn deriv(&self, i: usize) -> Jet {
        assert!(i < 4);
        let t = tables();
        let mut c = [0.0; N_COEFFS];
        for (pos, m) in t.midx.iter().enumerate() {
            let mut up = *m;
            up[i] += 1;
            if let Some(q) = index_of(up) {
                c[pos] = self.c[q] * (up[i] as f64);
            }
        }
        Jet { c }
    }

    /// Maximum absolute coefficient (useful for error gauges).
    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Complex-valued jet: a pair of real jets. Arithmetic follows complex
/// arithmetic componentwise in the Taylor table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn constant(v: num_complex::Complex64) -> Self {
        CJet { re: Jet::constant(v.re), im: Jet::constant(v.im) }
    }

    pub fn from_real(j: Jet) -> Self {
        CJet { re: j, im: Jet::constant(0.0) }
    }

    pub fn zero() -> Self {
        CJet::from_real(Jet::constant(0.0))
    }

    pub fn value(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.value(), self.im.value())
    }

    pub fn add(&self, o: &CJet) -> CJet {
        CJet { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CJet) -> CJet {
        CJet { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> CJet {
        CJet { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> CJet {
        CJet { re: self.re, im: self.im.neg() }
    }

    pub fn mul(&self, o: &CJet) -> CJet {
        CJet {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn scale(&self, s: num_complex::Complex64) -> CJet {
        self.mul(&CJet::constant(s))
    }

    pub fn scale_re(&self, s: f64) -> CJet {
        CJet { re: self.re.scale(s), im: self.im.scale(s) }
    }

    /// Reciprocal via `1/z = z̄ / |z|²`. Errors on zero value part.
    pub fn recip(&self) -> Result<CJet> {
        let n2 = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        if n2.value() == 0.0 {
            return Err(Error::Domain("reciprocal of complex jet with value 0".into()));
        }
        let inv = n2.recip()?;
        Ok(CJet { re: self.re.mul(&inv), im: self.im.neg().mul(&inv) })
    }

    pub fn div(&self, o: &CJet) -> Result<CJet> {
        Ok(self.mul(&o.recip()?))
    }

    /// Holomorphic derivative `∂/∂z_k = (∂_{x_{2k}} - i ∂_{x_{2k+1}})/2`
    /// for `k ∈ {0, 1}` (`z_0 = x1 + i x2`, `z_1 = x3 + i x4`).
    /// Loses one valid jet order, like [`Jet::deriv`].
    pub fn d_hol(&self, k: usize) -> CJet {
        assert!(k < 2);
        let (re_i, im_i) = (2 * k, 2 * k + 1);
        let a = CJet { re: self.re.deriv(re_i), im: self.im.deriv(re_i) };
        let b = CJet { re: self.re.deriv(im_i), im: self.im.deriv(im_i) };
        // (a - i b)/2
        CJet {
            re: a.re.add(&b.im).scale(0.5),
            im: a.im.sub(&b.re).scale(0.5),
        }
    }

    /// Antiholomorphic derivative `∂/∂z̄_k = (∂_{x_{2k}} + i ∂_{x_{2k+1}})/2`.
    /// Loses one valid jet order.
    pub fn d_antihol(&self, k: usize) -> CJet {
        assert!(k < 2);
        let (re_i, im_i) = (2 * k, 2 * k + 1);
        let a = CJet { re: self.re.deriv(re_i), im: self.im.deriv(re_i) };
        let b = CJet { re: self.re.deriv(im_i), im: self.im.deriv(im_i) };
        // (a + i b)/2
        CJet {
            re: a.re.sub(&b.im).scale(0.5),
            im: a.im.add(&b.re).scale(0.5),
        }
    }
}

/// Complex chart coordinates `(z, w)` as jets at a real chart point.
pub fn complex_coords(point: [f64; 4]) -> [CJet; 2] {
    let x = Jet::coords(point);
    [
        CJet { re: x[0], im: x[1] },
        CJet { re: x[2], im: x[3] },
    ]
}

/// 2×2 matrix of complex jets; when flagged hermitian it stores metric
/// components `h_{i j̄}` with `h[j][i] = conj(h[i][j])` at every jet order.
#[derive(Clone, Copy, Debug)]
pub struct HermMatrix2 {
    pub e: [[CJet; 2]; 2],
    pub hermitian: bool,
}

impl HermMatrix2 {
    pub fn identity() -> Self {
        let one = CJet::from_real(Jet::constant(1.0));
        HermMatrix2 {
            e: [[one, CJet::zero()], [CJet::zero(), one]],
            hermitian: true,
        }
    }

    /// Build from entries, declaring hermitian symmetry. The caller asserts
    /// symmetry; `hermitian_defect` audits it.
    pub fn new(e: [[CJet; 2]; 2], hermitian: bool) -> Self {
        HermMatrix2 { e, hermitian }
    }

    /// Max absolute coefficient deviation of `h[j][i] - conj(h[i][j])`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let d = self.e[j][i].sub(&self.e[i][j].conj());
                worst = worst.max(d.re.max_abs_coeff()).max(d.im.max_abs_coeff());
            }
        }
        worst
    }

    pub fn add(&self, o: &HermMatrix2) -> HermMatrix2 {
        let mut e = self.e;
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] = e[i][j].add(&o.e[i][j]);
            }
        }
        HermMatrix2 { e, hermitian: self.hermitian && o.hermitian }
    }

    pub fn sub(&self, o: &HermMatrix2) -> HermMatrix2 {
        let mut e = self.e;
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] = e[i][j].sub(&o.e[i][j]);
            }
        }
        HermMatrix2 { e, hermitian: self.hermitian && o.hermitian }
    }

    pub fn scale_re(&self, s: f64) -> HermMatrix2 {
        let mut e = self.e;
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] = e[i][j].scale_re(s);
            }
        }
        HermMatrix2 { e, hermitian: self.hermitian }
    }

    pub fn matmul(&self, o: &HermMatrix2) -> HermMatrix2 {
        let mut e = [[CJet::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] = self.e[i][0].mul(&o.e[0][j]).add(&self.e[i][1].mul(&o.e[1][j]));
            }
        }
        HermMatrix2 { e, hermitian: false }
    }

    pub fn det(&self) -> CJet {
        self.e[0][0].mul(&self.e[1][1]).sub(&self.e[0][1].mul(&self.e[1][0]))
    }

    pub fn trace(&self) -> CJet {
        self.e[0][0].add(&self.e[1][1])
    }

    /// Inverse via the adjugate. Errors if the determinant value vanishes.
    pub fn inverse(&self) -> Result<HermMatrix2> {
        let det = self.det();
        if det.value().norm() == 0.0 {
            return Err(Error::Degenerate("singular 2×2 jet matrix".into()));
        }
        let dinv = det.recip()?;
        let e = [
            [self.e[1][1].mul(&dinv), self.e[0][1].neg().mul(&dinv)],
            [self.e[1][0].neg().mul(&dinv), self.e[0][0].mul(&dinv)],
        ];
        Ok(HermMatrix2 { e, hermitian: self.hermitian })
    }

    /// Eigenvalues of the hermitian value part (ascending).
    pub fn eigenvalues_value(&self) -> [f64; 2] {
        let a = self.e[0][0].re.value();
        let d = self.e[1][1].re.value();
        let b = self.e[0][1].value();
        let tr = a + d;
        let disc = ((a - d) * (a - d) / 4.0 + b.norm_sqr()).sqrt();
        [tr / 2.0 - disc, tr / 2.0 + disc]
    }
}

/// A scalar field on the chart, evaluable in jet arithmetic. Plain numeric
/// evaluation falls out by feeding constant jets.
pub trait ScalarField: Sync {
    fn eval_jet(&self, x: &[Jet; 4]) -> Result<Jet>;

    fn eval(&self, point: [f64; 4]) -> Result<f64> {
        let x = [
            Jet::constant(point[0]),
            Jet::constant(point[1]),
            Jet::constant(point[2]),
            Jet::constant(point[3]),
        ];
        Ok(self.eval_jet(&x)?.value())
    }

    /// Full jet at a chart point.
    fn jet_at(&self, point: [f64; 4]) -> Result<Jet> {
        self.eval_jet(&Jet::coords(point))
    }
}

impl<F> ScalarField for F
where
    F: Fn(&[Jet; 4]) -> Result<Jet> + Sync,
{
    fn eval_jet(&self, x: &[Jet; 4]) -> Result<Jet> {
        self(x)
    }
}

/// Cross-check jet partials of `field` at `point` against central finite
/// differences, for every multi-index of total degree ≤ `order`.
///
/// A direct high-order stencil on f64 values would drown in cancellation
/// (a 4th-order stencil at step 1e-3 loses ~12 digits), so each partial
/// `∂^α f` is instead checked by one five-point central difference of the
/// jet-computed partial `∂^{α - e_i} f` at four shifted points. Each check
/// is an O(step⁴) approximation (exact on polynomials of degree ≤ 5 in the
/// stepped variable) with benign rounding.
///
/// Returns the maximum relative deviation, with the denominator floored at 1
/// so that near-zero partials are compared absolutely.
pub fn fd_crosscheck(
    field: &dyn ScalarField,
    point: [f64; 4],
    order: usize,
    step: f64,
) -> Result<f64> {
    if order > ORDER {
        return Err(Error::Invalid(format!("order {order} exceeds jet order {ORDER}")));
    }
    if !(step > 0.0) {
        return Err(Error::Invalid("step must be positive".into()));
    }
    let center = field.jet_at(point).map_err(|e| Error::FieldEval {
        point,
        reason: e.to_string(),
    })?;
    // Jets at the axis-shifted stencil points (±h, ±2h per axis), lazy.
    let mut shifted: [[Option<Jet>; 4]; 4] = Default::default();
    // offsets and weights of the five-point first-derivative stencil
    // (the center weight is zero)
    let stencil = [(-2.0f64, 1.0f64), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let mut worst = 0.0f64;
    for m in multi_indices() {
        let deg: u8 = m.iter().sum();
        if deg == 0 || deg as usize > order {
            continue;
        }
        let i = (0..4).find(|&v| m[v] > 0).unwrap();
        let mut lower = *m;
        lower[i] -= 1;
        let mut fd = 0.0;
        for (slot, &(off, wgt)) in stencil.iter().enumerate() {
            if shifted[i][slot].is_none() {
                let mut p = point;
                p[i] += off * step;
                shifted[i][slot] = Some(field.jet_at(p).map_err(|e| Error::FieldEval {
                    point: p,
                    reason: e.to_string(),
                })?);
            }
            fd += wgt * shifted[i][slot].as_ref().unwrap().partial(lower);
        }
        fd /= 12.0 * step;
        let exact = center.partial(*m);
        if !fd.is_finite() || !exact.is_finite() {
            return Err(Error::FieldEval {
                point,
                reason: format!("non-finite derivative for multi-index {m:?}"),
            });
        }
        let denom = exact.abs().max(fd.abs()).max(1.0);
        worst = worst.max((fd - exact).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_coordinates() {
        // x1 * x2 at (1, 2, 0, 0)
        let x = Jet::coords([1.0, 2.0, 0.0, 0.0]);
        let p = x[0].mul(&x[1]);
        assert_eq!(p.value(), 2.0);
        assert_eq!(p.partial([1, 0, 0, 0]), 2.0);
        assert_eq!(p.partial([0, 1, 0, 0]), 1.0);
        assert_eq!(p.partial([1, 1, 0, 0]), 1.0);
        assert_eq!(p.partial([2, 0, 0, 0]), 0.0);
        assert_eq!(p.partial([0, 0, 1, 1]), 0.0);
    }

    #[test]
    fn log_of_one_is_zero_jet() {
        let l = Jet::constant(1.0).ln().unwrap();
        for pos in 0..N_COEFFS {
            assert_eq!(l.coeff(pos), 0.0);
        }
    }

    #[test]
    fn sqrt_against_finite_differences() {
        let field = |x: &[Jet; 4]| -> Result<Jet> {
            x[0].mul(&x[0]).add(&Jet::constant(3.0)).sqrt()
        };
        let dev = fd_crosscheck(&field, [1.0, 0.0, 0.0, 0.0], 4, 1e-3).unwrap();
        assert!(dev <= 1e-6, "deviation {dev}");
    }

    #[test]
    fn polynomial_fd_is_exact() {
        let field = |x: &[Jet; 4]| -> Result<Jet> { Ok(x[0].mul(&x[0]).mul(&x[0]).mul(&x[1])) };
        let dev = fd_crosscheck(&field, [0.7, -0.3, 0.1, 0.2], 3, 1e-3).unwrap();
        assert!(dev <= 1e-8, "deviation {dev}");
    }

    #[test]
    fn pole_inside_stencil_is_an_error() {
        // 1/(x1 - 1e-4) has a pole at the +step shift from the origin region.
        let field = |x: &[Jet; 4]| -> Result<Jet> {
            x[0].sub(&Jet::constant(1e-3)).recip()
        };
        let err = fd_crosscheck(&field, [0.0, 0.0, 0.0, 0.0], 2, 1e-3);
        assert!(err.is_err());
    }

    #[test]
    fn exp_log_roundtrip() {
        let x = Jet::coords([0.3, -0.2, 0.5, 0.1]);
        let f = x[0].mul(&x[1]).add(&x[2].mul(&x[3])).add(&Jet::constant(2.0));
        let back = f.ln().unwrap().exp();
        for pos in 0..N_COEFFS {
            assert!((back.coeff(pos) - f.coeff(pos)).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_product_matches_coordinates() {
        // z * w at a generic point, checked against real-part expansion.
        let [z, w] = complex_coords([0.4, -0.7, 1.1, 0.2]);
        let p = z.mul(&w);
        // Re(zw) = x1 x3 - x2 x4
        let x = Jet::coords([0.4, -0.7, 1.1, 0.2]);
        let re = x[0].mul(&x[2]).sub(&x[1].mul(&x[3]));
        for pos in 0..N_COEFFS {
            assert!((p.re.coeff(pos) - re.coeff(pos)).abs() < 1e-14);
        }
    }

    #[test]
    fn holomorphic_derivative_of_z_squared() {
        let [z, _] = complex_coords([0.5, 0.25, 0.0, 0.0]);
        let z2 = z.mul(&z);
        let d = z2.d_hol(0);
        // d(z²)/dz = 2z
        let two_z = z.scale_re(2.0);
        assert!((d.value() - two_z.value()).norm() < 1e-14);
        // and ∂̄(z²) = 0
        let db = z2.d_antihol(0);
        assert!(db.value().norm() < 1e-14);
    }

    #[test]
    fn herm_inverse_roundtrip() {
        let [z, w] = complex_coords([0.3, 0.1, -0.2, 0.4]);
        let off = z.mul(&w.conj()).scale_re(0.1);
        let h = HermMatrix2::new(
            [
                [CJet::from_real(Jet::constant(2.0)), off],
                [off.conj(), CJet::from_real(Jet::constant(1.5))],
            ],
            true,
        );
        let prod = h.matmul(&h.inverse().unwrap());
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod.e[i][j].re.value() - want).abs() < 1e-12);
                assert!(prod.e[i][j].im.value().abs() < 1e-12);
            }
        }
    }
}
