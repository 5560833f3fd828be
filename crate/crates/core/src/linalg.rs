//! Dense solves for the small real systems of the reconstruction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Pivots below this fraction of the largest scaled entry count as zero.
const PIVOT_TOL: f64 = 1e-14;
const REFINE_TOL: f64 = 1e-12;

/// LU factorization with partial pivoting of a column-scaled real matrix.
pub(crate) struct ScaledLu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
    col_scale: Vec<f64>,
    original: DMatrix<f64>,
}

pub(crate) struct Solution {
    pub x: DVector<Complex64>,
    /// `‖A x − b‖ / ‖b‖`, or the absolute residual when `b = 0`.
    pub residual: f64,
}

impl ScaledLu {
    /// `None` when the matrix is singular to working precision.
    pub fn new(a: &DMatrix<f64>) -> Option<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "system must be square");
        let col_scale: Vec<f64> = (0..n)
            .map(|j| {
                let m = a.column(j).amax();
                if m > 0.0 {
                    m
                } else {
                    1.0
                }
            })
            .collect();
        let mut lu = a.clone();
        for (j, s) in col_scale.iter().enumerate() {
            lu.column_mut(j).unscale_mut(*s);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) =
                (k..n).map(|i| (i, lu[(i, k)].abs())).fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if pivot.is_nan() || pivot <= PIVOT_TOL {
                return None;
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = f;
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        Some(ScaledLu { lu, perm, col_scale, original: a.clone() })
    }

    fn substitute(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.lu.nrows();
        let mut x = DVector::from_iterator(n, self.perm.iter().map(|&p| b[p]));
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        for (xi, s) in x.iter_mut().zip(&self.col_scale) {
            *xi /= s;
        }
        x
    }

    fn solve_real(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = self.substitute(b);
        let r = b - &self.original * &x;
        if r.norm() > REFINE_TOL * b.norm() {
            x += self.substitute(&r);
        }
        x
    }

    /// Solves `A x = b` for complex `b` as two real solves.
    pub fn solve(&self, b: &DVector<Complex64>) -> Solution {
        let re = self.solve_real(&b.map(|z| z.re));
        let im = self.solve_real(&b.map(|z| z.im));
        let x = DVector::from_iterator(re.len(), re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)));
        let ax = self.original.map(|v| Complex64::new(v, 0.0)) * &x;
        let r = (ax - b).norm();
        let bn = b.norm();
        Solution { x, residual: if bn > 0.0 { r / bn } else { r } }
    }
}

/// 2-norm condition number `σ_max / σ_min`.
pub(crate) fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Condition number after scaling every column to unit max-abs entry.
pub(crate) fn scaled_condition_number(a: &DMatrix<f64>) -> f64 {
    let mut s = a.clone();
    for mut col in s.column_iter_mut() {
        let m = col.amax();
        if m > 0.0 {
            col.unscale_mut(m);
        }
    }
    condition_number(&s)
}
