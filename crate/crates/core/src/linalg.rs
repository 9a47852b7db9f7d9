//! Small sparse linear algebra for the potential solves.

use crate::error::{Error, Result};
use crate::real::Real;

/// Solves a tridiagonal system in place. `lower[i]` couples row `i` to
/// `i - 1` (so `lower[0]` is unused), `upper[i]` couples row `i` to `i + 1`.
pub fn thomas<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: rhs.len().min(lower.len()).min(upper.len()),
        });
    }
    let mut c = vec![T::zero(); n];
    let mut x = vec![T::zero(); n];
    let mut beta = diag.first().copied().unwrap_or(T::one());
    for i in 0..n {
        if i > 0 {
            beta = diag[i] - lower[i] * c[i - 1];
        }
        if beta == T::zero() || !beta.is_finite() {
            return Err(Error::Singular(format!("zero pivot in row {i}")));
        }
        c[i] = upper[i] / beta;
        let prev = if i > 0 { lower[i] * x[i - 1] } else { T::zero() };
        x[i] = (rhs[i] - prev) / beta;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] = x[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Symmetric matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_start = vec![0; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                let acc = vals.last_mut().expect("previous entry");
                *acc = *acc + v;
                continue;
            }
            last = Some((r, c));
            cols.push(c);
            vals.push(v);
            row_start[r + 1] += 1;
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        Self {
            n,
            row_start,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_start[i]..self.row_start[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).find(|&(c, _)| c == i).map_or(T::zero(), |(_, v)| v))
            .collect()
    }

    /// `out = (A + diag(shift)) x`
    pub fn mul_shifted(&self, shift: Option<&[T]>, x: &[T], out: &mut [T]) {
        for i in 0..self.n {
            let mut acc = shift.map_or(T::zero(), |s| s[i] * x[i]);
            for (c, v) in self.row(i) {
                acc = acc + v * x[c];
            }
            out[i] = acc;
        }
    }

    /// Tridiagonal bands when the sparsity pattern allows it.
    fn bands(&self) -> Option<(Vec<T>, Vec<T>, Vec<T>)> {
        let mut lower = vec![T::zero(); self.n];
        let mut diag = vec![T::zero(); self.n];
        let mut upper = vec![T::zero(); self.n];
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                if c == i {
                    diag[i] = v;
                } else if c + 1 == i {
                    lower[i] = v;
                } else if c == i + 1 {
                    upper[i] = v;
                } else {
                    return None;
                }
            }
        }
        Some((lower, diag, upper))
    }
}

/// Solves `(A + diag(shift)) x = b` for a symmetric positive definite
/// system: tridiagonal elimination when the pattern is banded, Jacobi
/// preconditioned conjugate gradients otherwise. `x0` seeds the iteration.
pub fn solve_spd<T: Real>(a: &CsrMatrix<T>, shift: Option<&[T]>, b: &[T], x0: Option<&[T]>, rel_tol: T) -> Result<Vec<T>> {
    if let Some((lower, mut diag, upper)) = a.bands() {
        if let Some(s) = shift {
            for (d, s) in diag.iter_mut().zip(s) {
                *d = *d + *s;
            }
        }
        return thomas(&lower, &diag, &upper, b);
    }
    pcg(a, shift, b, x0, rel_tol)
}

/// Jacobi preconditioned conjugate gradients to `‖r‖ ≤ rel_tol ‖b‖`.
pub fn pcg<T: Real>(a: &CsrMatrix<T>, shift: Option<&[T]>, b: &[T], x0: Option<&[T]>, rel_tol: T) -> Result<Vec<T>> {
    let n = a.n();
    let dot = |u: &[T], v: &[T]| u.iter().zip(v).map(|(&p, &q)| p * q).sum::<T>();
    let mut inv_diag = a.diagonal();
    for (i, d) in inv_diag.iter_mut().enumerate() {
        let full = *d + shift.map_or(T::zero(), |s| s[i]);
        if !(full > T::zero()) {
            return Err(Error::Singular(format!("nonpositive diagonal in row {i}")));
        }
        *d = T::one() / full;
    }
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    let mut r = vec![T::zero(); n];
    a.mul_shifted(shift, &x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == T::zero() {
        return Ok(vec![T::zero(); n]);
    }
    let target = rel_tol * b_norm;
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let max_iter = 20 * n + 100;
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= target {
            return Ok(x);
        }
        a.mul_shifted(shift, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::Singular("matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = dot(&r, &r).sqrt() / b_norm;
    if residual <= rel_tol {
        Ok(x)
    } else {
        Err(Error::NotConverged {
            solver: "conjugate gradients",
            iterations: max_iter,
            residual: residual.to_f64_lossy(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian_2d(nx: usize, ny: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                t.push((k, k, 4.0));
                if i > 0 {
                    t.push((k, k - 1, -1.0));
                }
                if i + 1 < nx {
                    t.push((k, k + 1, -1.0));
                }
                if j > 0 {
                    t.push((k, k - nx, -1.0));
                }
                if j + 1 < ny {
                    t.push((k, k + nx, -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(nx * ny, t)
    }

    #[test]
    fn thomas_solves_a_known_system() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1, 0, 1] has x = [1, 1, 1]
        let x = thomas(&[0.0, -1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap();
        for v in x {
            assert!((v - 1.0f64).abs() < 1e-15);
        }
    }

    #[test]
    fn thomas_reports_zero_pivot() {
        assert!(matches!(thomas(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 0.5), (0, 1, -1.0), (1, 0, -1.0)]);
        assert_eq!(a.diagonal(), vec![1.5, 2.0]);
        assert_eq!(a.row(0).collect::<Vec<_>>(), vec![(0, 1.5), (1, -1.0)]);
    }

    #[test]
    fn cg_matches_manufactured_solution() {
        let a = laplacian_2d(12, 9);
        let x_true: Vec<f64> = (0..a.n()).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let mut b = vec![0.0; a.n()];
        a.mul_shifted(None, &x_true, &mut b);
        let x = solve_spd(&a, None, &b, None, 1e-13).unwrap();
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn banded_pattern_takes_the_direct_path_with_shift() {
        let a = CsrMatrix::from_triplets(3, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)]);
        let shift = [1.0, 1.0, 1.0];
        let x = solve_spd(&a, Some(&shift), &[2.0, 1.0, 2.0], None, 1e-12).unwrap();
        for v in x {
            assert!((v - 1.0f64).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn cg_residual_meets_tolerance(seed in prop::collection::vec(-5.0f64..5.0, 30), shift in 0.0f64..3.0) {
            let a = laplacian_2d(6, 5);
            let s = vec![shift; 30];
            let x = pcg(&a, Some(&s), &seed, None, 1e-12).unwrap();
            let mut ax = vec![0.0; 30];
            a.mul_shifted(Some(&s), &x, &mut ax);
            let res: f64 = ax.iter().zip(&seed).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let bn: f64 = seed.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-12 * bn + 1e-300);
        }
    }
}
