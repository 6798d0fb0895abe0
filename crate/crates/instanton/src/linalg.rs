//! Small fixed-size linear algebra over jets and complex numbers.

use crate::jets::{CJet, Jet};
use crate::{Error, Result};
use num_complex::Complex64;

pub type Mat4Jet = [[Jet; 4]; 4];
pub type Mat4CJet = [[CJet; 4]; 4];

pub fn mat4_zero() -> Mat4Jet {
    [[Jet::constant(0.0); 4]; 4]
}

pub fn mat4_identity() -> Mat4Jet {
    let mut m = mat4_zero();
    for i in 0..4 {
        m[i][i] = Jet::constant(1.0);
    }
    m
}

pub fn mat4_add(a: &Mat4Jet, b: &Mat4Jet) -> Mat4Jet {
    let mut m = mat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i][j].add(&b[i][j]);
        }
    }
    m
}

pub fn mat4_sub(a: &Mat4Jet, b: &Mat4Jet) -> Mat4Jet {
    let mut m = mat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i][j].sub(&b[i][j]);
        }
    }
    m
}

pub fn mat4_scale(a: &Mat4Jet, s: f64) -> Mat4Jet {
    let mut m = mat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i][j].scale(s);
        }
    }
    m
}

pub fn mat4_mul(a: &Mat4Jet, b: &Mat4Jet) -> Mat4Jet {
    let mut m = mat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = Jet::constant(0.0);
            for k in 0..4 {
                acc = acc.add(&a[i][k].mul(&b[k][j]));
            }
            m[i][j] = acc;
        }
    }
    m
}

/// Inverse of a 4×4 real jet matrix by Gaussian elimination with partial
/// pivoting on value parts. Errors on a singular value part.
pub fn mat4_inv(a: &Mat4Jet) -> Result<Mat4Jet> {
    let mut m = *a;
    let mut inv = mat4_identity();
    for col in 0..4 {
        let (pivot, pv) = (col..4)
            .map(|r| (r, m[r][col].value().abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pv == 0.0 {
            return Err(Error::Degenerate("singular 4×4 jet matrix".into()));
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let piv_inv = m[col][col].recip()?;
        for j in 0..4 {
            m[col][j] = m[col][j].mul(&piv_inv);
            inv[col][j] = inv[col][j].mul(&piv_inv);
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = m[r][col];
            for j in 0..4 {
                m[r][j] = m[r][j].sub(&f.mul(&m[col][j]));
                inv[r][j] = inv[r][j].sub(&f.mul(&inv[col][j]));
            }
        }
    }
    Ok(inv)
}

/// Value parts of a jet matrix.
pub fn mat4_value(a: &Mat4Jet) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i][j].value();
        }
    }
    m
}

/// Frobenius norm of the value part.
pub fn mat4_value_norm(a: &Mat4Jet) -> f64 {
    mat4_value(a)
        .iter()
        .flatten()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Coefficient of `dx1∧dx2∧dx3∧dx4` in the wedge `A ∧ B` of two 2-forms
/// given by antisymmetric component matrices.
pub fn wedge4_coeff(a: &Mat4Jet, b: &Mat4Jet) -> Jet {
    // A∧B(e1,e2,e3,e4) over the three pairings of {1,2,3,4} into two pairs.
    let term = |i: usize, j: usize, k: usize, l: usize| -> Jet {
        a[i][j].mul(&b[k][l]).add(&b[i][j].mul(&a[k][l]))
    };
    term(0, 1, 2, 3)
        .sub(&term(0, 2, 1, 3))
        .add(&term(0, 3, 1, 2))
}

/// Same wedge coefficient for complex-component 2-forms.
pub fn wedge4_coeff_c(a: &Mat4CJet, b: &Mat4CJet) -> CJet {
    let term = |i: usize, j: usize, k: usize, l: usize| -> CJet {
        a[i][j].mul(&b[k][l]).add(&b[i][j].mul(&a[k][l]))
    };
    term(0, 1, 2, 3)
        .sub(&term(0, 2, 1, 3))
        .add(&term(0, 3, 1, 2))
}

/// Inverse of an n×n complex matrix (numeric), partial pivoting.
pub fn cmat_inv(a: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut inv: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let (pivot, pv) = (col..n)
            .map(|r| (r, m[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pv == 0.0 {
            return Err(Error::Degenerate("singular complex matrix".into()));
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let piv = m[col][col];
        for j in 0..n {
            m[col][j] /= piv;
            inv[col][j] /= piv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col];
            for j in 0..n {
                let mc = m[col][j];
                let ic = inv[col][j];
                m[r][j] -= f * mc;
                inv[r][j] -= f * ic;
            }
        }
    }
    Ok(inv)
}
