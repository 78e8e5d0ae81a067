//! Small dense linear algebra: row-major matrices, the top singular value
//! by power iteration, and symmetric eigenvalues by cyclic Jacobi.

use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::dot;
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidLength {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// `y = Mᵀ x`.
    pub fn mul_vec_t(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (yj, mij) in y.iter_mut().zip(self.row(i)) {
                    *yj += xi * mij;
                }
            }
        }
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(dot(&self.data, &self.data))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| libm::fabs(self.get(i, j) - self.get(j, i)) <= tol))
    }
}

/// Stopping rule for [`top_singular_value`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerIteration {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            rel_tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

/// Largest singular value by power iteration on `MᵀM`.
///
/// Starts from the normalized all-ones vector and falls back to a fixed
/// perturbation of it when the start is (numerically) in the kernel. The
/// Rayleigh quotient `‖Mq‖²` increases monotonically; iteration stops when
/// its relative increase, and the geometric-tail extrapolation of the
/// remaining increase, both fall below the tolerance.
pub fn top_singular_value(m: &DenseMatrix, opts: PowerIteration) -> Result<f64> {
    power_iteration(m, None, opts).map(|(s, _)| s)
}

/// Power iteration returning the top singular value and right singular
/// vector. `start`, when given, replaces the all-ones start (warm start for
/// sweeps over nearby matrices).
pub fn power_iteration(
    m: &DenseMatrix,
    start: Option<&[f64]>,
    opts: PowerIteration,
) -> Result<(f64, Vec<f64>)> {
    let (r, c) = (m.rows, m.cols);
    if r == 0 || c == 0 {
        return Ok((0.0, vec![0.0; c]));
    }
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix entries must be finite"));
    }
    let fro = m.frobenius();
    if fro == 0.0 {
        return Ok((0.0, vec![0.0; c]));
    }
    let mut q = match start {
        Some(s) if s.len() == c && dot(s, s) > 0.0 => s.to_vec(),
        _ => vec![1.0; c],
    };
    normalize(&mut q);
    let mut y = vec![0.0; r];
    m.mul_vec(&q, &mut y);
    if libm::sqrt(dot(&y, &y)) <= 1e-8 * fro {
        for (j, qj) in q.iter_mut().enumerate() {
            *qj = 1.0 + 0.5 * libm::sin(1.0 + 2.399_963_229_728_653 * j as f64);
        }
        normalize(&mut q);
        m.mul_vec(&q, &mut y);
    }
    let mut lambda = dot(&y, &y);
    let mut prev_delta = f64::NAN;
    let mut z = vec![0.0; c];
    for _ in 0..opts.max_iter {
        m.mul_vec_t(&y, &mut z);
        let zn = libm::sqrt(dot(&z, &z));
        if zn == 0.0 {
            return Ok((libm::sqrt(lambda), q));
        }
        for (qj, zj) in q.iter_mut().zip(&z) {
            *qj = zj / zn;
        }
        m.mul_vec(&q, &mut y);
        let next = dot(&y, &y);
        let delta = libm::fabs(next - lambda);
        lambda = lambda.max(next);
        // rounding floor of the Rayleigh quotient
        if delta <= 1e-15 * lambda {
            return Ok((libm::sqrt(lambda), q));
        }
        if delta <= opts.rel_tol * lambda && prev_delta.is_finite() {
            let ratio = if prev_delta > 0.0 {
                delta / prev_delta
            } else {
                0.0
            };
            if ratio < 1.0 && delta * ratio / (1.0 - ratio) <= opts.rel_tol * lambda {
                return Ok((libm::sqrt(lambda), q));
            }
        }
        prev_delta = delta;
    }
    Err(Error::Convergence {
        estimate: libm::sqrt(lambda),
        iterations: opts.max_iter,
    })
}

fn normalize(v: &mut [f64]) {
    let n = libm::sqrt(dot(v, v));
    v.iter_mut().for_each(|x| *x /= n);
}

/// Eigenvalues of a symmetric matrix, ascending (cyclic Jacobi rotations).
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows != m.cols {
        return Err(Error::Domain("eigenvalues need a square matrix"));
    }
    let n = m.rows;
    let mut a = m.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j) * a.get(i, j))
            .sum();
        let diag: f64 = (0..n).map(|i| a.get(i, i) * a.get(i, i)).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = libm::copysign(1.0, theta)
                    / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let cs = 1.0 / libm::sqrt(t * t + 1.0);
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, cs * akp - sn * akq);
                    a.set(k, q, sn * akp + cs * akq);
                }
                for k in 0..n {
                    let (apk, aqk) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, cs * apk - sn * aqk);
                    a.set(q, k, sn * apk + cs * aqk);
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(m: &DenseMatrix) -> f64 {
        top_singular_value(m, PowerIteration::default()).unwrap()
    }

    #[test]
    fn spectral_norm_examples() {
        assert!(libm::fabs(norm(&DenseMatrix::identity(5)) - 1.0) < 1e-14);
        let d = DenseMatrix::from_fn(3, 3, |i, j| if i == j { [3.0, 1.0, 0.5][i] } else { 0.0 });
        assert!(libm::fabs(norm(&d) - 3.0) < 1e-12);
        let (u, v) = ([1.0, 2.0], [2.0, 0.0]);
        let r1 = DenseMatrix::from_fn(2, 2, |i, j| u[i] * v[j]);
        assert!(libm::fabs(norm(&r1) - 2.0 * libm::sqrt(5.0)) < 1e-12);
    }

    #[test]
    fn start_vector_in_kernel_falls_back() {
        // rows orthogonal to the all-ones vector
        let m = DenseMatrix::from_row_major(2, 2, vec![1.0, -1.0, 2.0, -2.0]).unwrap();
        assert!(libm::fabs(norm(&m) - libm::sqrt(10.0)) < 1e-12);
    }

    #[test]
    fn zero_and_empty() {
        assert_eq!(norm(&DenseMatrix::zeros(3, 4)), 0.0);
        assert_eq!(norm(&DenseMatrix::zeros(0, 4)), 0.0);
    }

    #[test]
    fn iteration_cap_reports_estimate() {
        let d = DenseMatrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, 0.999_999]).unwrap();
        match top_singular_value(
            &d,
            PowerIteration {
                rel_tol: 1e-15,
                max_iter: 3,
            },
        ) {
            Err(Error::Convergence {
                estimate,
                iterations,
            }) => {
                assert_eq!(iterations, 3);
                assert!(estimate > 0.99 && estimate <= 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jacobi_eigenvalues() {
        let m = DenseMatrix::from_row_major(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let ev = symmetric_eigenvalues(&m).unwrap();
        assert!(libm::fabs(ev[0] - 1.0) < 1e-14 && libm::fabs(ev[1] - 3.0) < 1e-14);
    }
}
