//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant (Higham 2005).

use num_complex::Complex64 as C64;

use super::{ComplexMatrix, LinalgError};

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

pub fn matexp(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 1 {
        return ComplexMatrix::from_vec(1, 1, vec![m[(0, 0)].exp()]);
    }

    let norm = m.norm_1();
    if !norm.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m.scale_real(0.5f64.powi(squarings));

    let eye = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let lin = |c: [f64; 4], m6: &ComplexMatrix| -> ComplexMatrix {
        let mut out = m6.scale_real(c[0]);
        out = &out + &a4.scale_real(c[1]);
        out = &out + &a2.scale_real(c[2]);
        &out + &eye.scale_real(c[3])
    };

    let b = PADE13;
    let inner_u = &(&a6 * &(&(&a6.scale_real(b[13]) + &a4.scale_real(b[11])) + &a2.scale_real(b[9])))
        + &lin([b[7], b[5], b[3], b[1]], &a6);
    let u = &a * &inner_u;
    let v = &(&a6 * &(&(&a6.scale_real(b[12]) + &a4.scale_real(b[10])) + &a2.scale_real(b[8])))
        + &lin([b[6], b[4], b[2], b[0]], &a6);

    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Solves `A X = B` by LU with partial pivoting.
fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = a.rows();
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| lu[(i, col)].norm().total_cmp(&lu[(j, col)].norm())).expect("non-empty range");
        if lu[(pivot, col)].norm() == 0.0 {
            return Err(LinalgError::Singular);
        }
        if pivot != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            for j in 0..m {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(pivot, j)];
                x[(pivot, j)] = tmp;
            }
        }
        let inv = C64::new(1.0, 0.0) / lu[(col, col)];
        for i in col + 1..n {
            let f = lu[(i, col)] * inv;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = lu[(col, j)];
                lu[(i, j)] -= f * v;
            }
            for j in 0..m {
                let v = x[(col, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = C64::new(1.0, 0.0) / lu[(col, col)];
        for j in 0..m {
            let mut acc = x[(col, j)];
            for k in col + 1..n {
                acc -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc * inv;
        }
    }
    Ok(x)
}
