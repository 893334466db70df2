//! Dense complex linear algebra.
//!
//! Hermitian eigenvalues come from nalgebra's symmetric eigensolver. The
//! SVD is a one-sided (Hestenes) Jacobi iteration written here, so the two
//! routes stay numerically independent: the squared singular values of `M`
//! can be checked against the eigenvalues of `M·Mᴴ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, SimError};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

const HERMITIAN_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 60;

/// Thin singular value decomposition `M = U·diag(σ)·Vᴴ`.
///
/// With `k = min(rows, cols)`, `u` is `rows × k`, `v` is `cols × k`, and
/// `singular_values` has length `k`, sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v: CMat,
}

impl Svd {
    pub fn reconstruct(&self) -> CMat {
        let k = self.singular_values.len();
        let mut us = self.u.clone();
        for j in 0..k {
            let s = self.singular_values[j];
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

pub fn frobenius_norm_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `M·Mᴴ`, Hermitian by construction.
pub fn gram(m: &CMat) -> CMat {
    let mut g = m * m.adjoint();
    symmetrize(&mut g);
    g
}

fn symmetrize(g: &mut CMat) {
    let n = g.nrows();
    for i in 0..n {
        g[(i, i)] = Complex64::new(g[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (g[(i, j)] + g[(j, i)].conj()) * 0.5;
            g[(i, j)] = avg;
            g[(j, i)] = avg.conj();
        }
    }
}

fn check_hermitian(m: &CMat) -> Result<()> {
    if !m.is_square() {
        return Err(SimError::arg(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SimError::arg("matrix has non-finite entries"));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
            if dev > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(SimError::arg(format!(
                    "matrix is not Hermitian: |m[{i},{j}] - conj(m[{j},{i}])| = {dev:e}"
                )));
            }
        }
    }
    Ok(())
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigvals(m: &CMat) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let mut h = m.clone();
    symmetrize(&mut h);
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues descending with
/// the matching unit eigenvectors as columns.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_hermitian(m)?;
    let mut h = m.clone();
    symmetrize(&mut h);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// Thin SVD by one-sided Jacobi rotations.
pub fn svd(m: &CMat) -> Result<Svd> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SimError::arg("matrix has non-finite entries"));
    }
    if m.nrows() <= m.ncols() {
        // Orthogonalize the (few) columns of Mᴴ, then swap roles back.
        let (w_dirs, sigma, rot) = one_sided_jacobi(m.adjoint());
        Ok(Svd {
            u: rot,
            singular_values: sigma,
            v: w_dirs,
        })
    } else {
        let (w_dirs, sigma, rot) = one_sided_jacobi(m.clone());
        Ok(Svd {
            u: w_dirs,
            singular_values: sigma,
            v: rot,
        })
    }
}

/// For `a` (r × c, c ≤ r) returns `(Q, σ, V)` with `a·V = Q·diag(σ)`,
/// `Q` orthonormal columns, `V` unitary, σ descending.
fn one_sided_jacobi(mut a: CMat) -> (CMat, Vec<f64>, CMat) {
    let rows = a.nrows();
    let cols = a.ncols();
    let mut v = CMat::identity(cols, cols);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let alpha: f64 = a.column(i).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a.column(j).iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = a.column(i).dotc(&a.column(j));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, i, j, c, s, phase);
                rotate_columns(&mut v, i, j, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank_tol = smax * (rows.max(cols) as f64) * f64::EPSILON;

    let mut q = CMat::zeros(rows, cols);
    let mut v_sorted = CMat::zeros(cols, cols);
    let mut filled = 0;
    for (dst, &src) in order.iter().enumerate() {
        v_sorted.set_column(dst, &v.column(src));
        if sigma[dst] > rank_tol {
            let col = a.column(src) / Complex64::new(sigma[dst], 0.0);
            q.set_column(dst, &col);
            filled += 1;
        }
    }
    complete_orthonormal(&mut q, filled);
    (q, sigma, v_sorted)
}

fn rotate_columns(m: &mut CMat, i: usize, j: usize, c: f64, s: f64, phase: Complex64) {
    // x' = c·x − s·conj(phase)·y ; y' = s·phase·x + c·y
    let pc = phase.conj();
    for r in 0..m.nrows() {
        let x = m[(r, i)];
        let y = m[(r, j)];
        m[(r, i)] = x * c - pc * y * s;
        m[(r, j)] = phase * x * s + y * c;
    }
}

/// Replace columns `filled..` with an orthonormal completion of the
/// leading `filled` columns (modified Gram-Schmidt against unit vectors).
fn complete_orthonormal(q: &mut CMat, filled: usize) {
    let rows = q.nrows();
    let mut next = filled;
    let mut candidate = 0;
    while next < q.ncols() && candidate < rows {
        let mut e = CVec::zeros(rows);
        e[candidate] = Complex64::new(1.0, 0.0);
        candidate += 1;
        for _ in 0..2 {
            for k in 0..next {
                let qk = q.column(k).clone_owned();
                let proj = qk.dotc(&e);
                e -= qk * proj;
            }
        }
        let n = e.norm();
        if n > 1e-6 {
            q.set_column(next, &(e / Complex64::new(n, 0.0)));
            next += 1;
        }
    }
}
