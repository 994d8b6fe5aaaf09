//! Fixed-size complex vectors and matrices for the three-site Hilbert space.

use num_complex::Complex64;

pub type C64 = Complex64;

/// State vector in the site basis (dot, wire site 1, wire site 2).
pub type State3 = [C64; 3];

/// Dense 3x3 complex matrix, row major.
pub type Matrix3c = [[C64; 3]; 3];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity() -> Matrix3c {
    let mut m = [[ZERO; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn matmul(a: &Matrix3c, b: &Matrix3c) -> Matrix3c {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn matvec(a: &Matrix3c, v: &State3) -> State3 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

pub fn adjoint(a: &Matrix3c) -> Matrix3c {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// `<a|b>`, conjugate-linear in the first argument.
pub fn inner(a: &State3, b: &State3) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

pub fn norm_sqr(v: &State3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(v: &State3) -> f64 {
    norm_sqr(v).sqrt()
}

pub fn scale(v: &State3, s: C64) -> State3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn sub(a: &State3, b: &State3) -> State3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Multiply by a unit phase so the largest-magnitude component is real and
/// positive. Ties go to the lowest index.
pub fn fix_phase(v: &State3) -> State3 {
    let mut k = 0;
    for i in 1..3 {
        if v[i].norm() > v[k].norm() {
            k = i;
        }
    }
    let m = v[k].norm();
    if m == 0.0 {
        return *v;
    }
    let phase = v[k].conj() / m;
    let mut out = scale(v, phase);
    out[k] = C64::new(out[k].re, 0.0);
    out
}

/// Multiply `v` by the unit phase that makes `<reference|v>` real and positive.
pub fn align_phase(reference: &State3, v: &State3) -> State3 {
    let overlap = inner(reference, v);
    let m = overlap.norm();
    if m == 0.0 {
        return *v;
    }
    scale(v, overlap.conj() / m)
}

pub fn max_abs_diff(a: &Matrix3c, b: &Matrix3c) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}
