use num_complex::Complex64 as C64;

use super::{ComplexMatrix, LinalgError};

/// Truncated singular value decomposition `M ≈ U · diag(s) · Vh`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: ComplexMatrix,
    /// Descending, non-negative. Never rescaled.
    pub s: Vec<f64>,
    pub vh: ComplexMatrix,
    /// Σ s_i² over the discarded singular values; equals ‖M − U·diag(s)·Vh‖_F².
    pub discarded_weight: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let us = ComplexMatrix::from_fn(self.u.rows(), self.rank(), |i, j| self.u[(i, j)] * self.s[j]);
        &us * &self.vh
    }
}

/// Full SVD followed by truncation to
/// `min(max_rank, #{i : s_i / s_0 > rel_tol}, min(rows, cols))` terms.
pub fn svd_truncate(m: &ComplexMatrix, max_rank: usize, rel_tol: f64) -> Result<SvdResult, LinalgError> {
    if max_rank == 0 {
        return Err(LinalgError::InvalidArgument("max_rank must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&rel_tol) {
        return Err(LinalgError::InvalidArgument(format!("rel_tol {rel_tol} outside [0, 1)")));
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    if m.max_abs() == 0.0 {
        return Err(LinalgError::Degenerate);
    }

    let (rows, cols) = (m.rows(), m.cols());
    let k = rows.min(cols);
    let (u, s_raw, vh) = match dense_svd(m) {
        Some(f) if factorization_ok(m, &f) => f,
        _ => jacobi_svd(m).ok_or(LinalgError::NoConvergence)?,
    };

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s_raw[b].total_cmp(&s_raw[a]));
    let s_all: Vec<f64> = order.iter().map(|&i| s_raw[i].max(0.0)).collect();

    let s0 = s_all[0];
    let kept_by_tol = s_all.iter().take_while(|&&s| s / s0 > rel_tol).count().max(1);
    let rank = max_rank.min(kept_by_tol).min(k);
    let discarded_weight = s_all[rank..].iter().map(|s| s * s).sum();

    let u_out = ComplexMatrix::from_fn(rows, rank, |i, j| u[(i, order[j])]);
    let vh_out = ComplexMatrix::from_fn(rank, cols, |i, j| vh[(order[i], j)]);
    Ok(SvdResult { u: u_out, s: s_all[..rank].to_vec(), vh: vh_out, discarded_weight })
}

type Factors = (ComplexMatrix, Vec<f64>, ComplexMatrix);

fn dense_svd(m: &ComplexMatrix) -> Option<Factors> {
    let svd = m.to_nalgebra().try_svd(true, true, 1e-14, 0)?;
    let u = ComplexMatrix::from_nalgebra(&svd.u?);
    let vh = ComplexMatrix::from_nalgebra(&svd.v_t?);
    Some((u, svd.singular_values.iter().copied().collect(), vh))
}

/// The LAPACK-style bidiagonal SVD occasionally returns factors that do not
/// reproduce rank-deficient inputs; every result is checked before use.
fn factorization_ok(m: &ComplexMatrix, (u, s, vh): &Factors) -> bool {
    let norm2 = m.frobenius_norm().powi(2);
    let s2: f64 = s.iter().map(|x| x * x).sum();
    if !s.iter().all(|x| x.is_finite()) || (s2 - norm2).abs() > 1e-10 * norm2 {
        return false;
    }
    let us = ComplexMatrix::from_fn(u.rows(), s.len(), |i, j| u[(i, j)] * s[j]);
    (&us * vh).distance(m) <= 1e-11 * norm2.sqrt()
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations. Slower than the
/// bidiagonal route but unconditionally accurate.
pub(crate) fn jacobi_svd(m: &ComplexMatrix) -> Option<Factors> {
    if m.rows() < m.cols() {
        let (u, s, vh) = jacobi_svd(&m.adjoint())?;
        return Some((vh.adjoint(), s, u.adjoint()));
    }
    let (rows, n) = (m.rows(), m.cols());
    // Column-major working copies: a[j] is column j.
    let mut a: Vec<Vec<C64>> = (0..n).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect())
        .collect();
    let dot = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum::<C64>();
    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&a[p], &a[p]).re;
                let beta = dot(&a[q], &a[q]).re;
                let g = dot(&a[p], &a[q]);
                let gn = g.norm();
                if gn <= 1e-15 * (alpha * beta).sqrt() || gn == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = g / gn;
                let zeta = (beta - alpha) / (2.0 * gn);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut a, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let yq = *xq * phase.conj();
                        let np = *xp * c - yq * s;
                        *xq = *xp * s + yq * c;
                        *xp = np;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let s: Vec<f64> = a.iter().map(|col| dot(col, col).re.sqrt()).collect();
    let smax = s.iter().copied().fold(0.0, f64::max);
    // Columns of negligible norm carry only rounding noise; their left
    // vectors are replaced by an orthonormal completion.
    let live: Vec<bool> = s.iter().map(|&x| x > 1e-13 * smax).collect();
    let mut cols: Vec<Option<Vec<C64>>> =
        (0..n).map(|j| live[j].then(|| a[j].iter().map(|x| x / s[j]).collect())).collect();
    for j in 0..n {
        if cols[j].is_none() {
            let basis: Vec<Vec<C64>> = cols.iter().flatten().cloned().collect();
            cols[j] = Some(complete_basis(&basis, rows));
        }
    }
    let u = ComplexMatrix::from_fn(rows, n, |i, j| cols[j].as_ref().unwrap()[i]);
    let vh = ComplexMatrix::from_fn(n, n, |i, j| v[i][j].conj());
    Some((u, s, vh))
}

/// A unit vector orthogonal to every vector of the orthonormal `basis`.
///
/// Projects each coordinate vector out of the span and keeps the largest
/// residual; with `k < dim` vectors its squared norm is at least
/// `(dim − k) / dim`.
fn complete_basis(basis: &[Vec<C64>], dim: usize) -> Vec<C64> {
    let residual = |e: usize| {
        let mut x = vec![C64::new(0.0, 0.0); dim];
        x[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in basis {
                let proj: C64 = b.iter().zip(&x).map(|(p, q)| p.conj() * q).sum();
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi -= proj * bi;
                }
            }
        }
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (norm, x)
    };
    let (norm, x) = (0..dim).map(residual).max_by(|a, b| a.0.total_cmp(&b.0)).expect("dim > 0");
    assert!(norm > 1e-8, "fewer than dim vectors cannot span the space");
    x.into_iter().map(|z| z / norm).collect()
}

/// Thin QR decomposition, `M = Q · R` with `Q` having orthonormal columns.
pub fn qr(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let qr = m.to_nalgebra().qr();
    (ComplexMatrix::from_nalgebra(&qr.q()), ComplexMatrix::from_nalgebra(&qr.r()))
}

/// Thin LQ decomposition, `M = L · Q` with `Q` having orthonormal rows.
pub fn lq(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (q, r) = qr(&m.adjoint());
    (r.adjoint(), q.adjoint())
}

/// Von Neumann entropy in bits of a Schmidt spectrum; the squared coefficients
/// are renormalized to unit sum before taking logarithms.
pub fn entropy_bits(schmidt: &[f64]) -> f64 {
    let total: f64 = schmidt.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0.0;
    }
    schmidt.iter().map(|s| s * s / total).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}
