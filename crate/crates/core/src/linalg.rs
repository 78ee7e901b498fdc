//! Small dense complex matrices: products, unitarity checks and an LU solve
//! backed by nalgebra. Sizes here are at most a few hundred, so a plain
//! row-major `Vec` is all we need.

use std::ops::{Index, IndexMut};

use num_traits::Zero;

use crate::error::{OmitError, Result};
use crate::scalar::{Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Cx::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Cx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matvec");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Cx::zero(), |acc, (a, b)| acc + *a * *b))
            .collect()
    }

    /// Largest entry magnitude of `self * self^† - I`.
    pub fn unitarity_defect(&self) -> T {
        let p = self.matmul(&self.conj_transpose());
        let mut worst = T::zero();
        for i in 0..p.rows {
            for j in 0..p.cols {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((p[(i, j)] - Cx::new(target, T::zero())).norm());
            }
        }
        worst
    }

    /// Solve `self * x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        solve_dense(self, b)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Cx<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense LU solve for the concrete float types, delegated to nalgebra.
pub trait LuScalar: Sized {
    /// Solves `A x = b` for row-major `a`; also returns the smallest pivot magnitude.
    fn lu_solve(n: usize, a: &[Cx<Self>], b: &[Cx<Self>]) -> Option<(Vec<Cx<Self>>, Self)>;
}

macro_rules! impl_lu_scalar {
    ($t:ty) => {
        impl LuScalar for $t {
            fn lu_solve(n: usize, a: &[Cx<$t>], b: &[Cx<$t>]) -> Option<(Vec<Cx<$t>>, $t)> {
                let lu = nalgebra::DMatrix::from_row_slice(n, n, a).lu();
                let min_pivot = lu.u().diagonal().iter().fold(<$t>::INFINITY, |m, z| m.min(z.norm()));
                let x = lu.solve(&nalgebra::DVector::from_column_slice(b))?;
                Some((x.iter().copied().collect(), min_pivot))
            }
        }
    };
}

impl_lu_scalar!(f32);
impl_lu_scalar!(f64);

/// Solves `a x = b`, reporting near-singular matrices instead of returning garbage.
fn solve_dense<T: Real>(a: &CMatrix<T>, b: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    if a.rows != a.cols {
        return Err(OmitError::invalid("matrix", "solve requires a square matrix"));
    }
    let n = a.rows;
    if b.len() != n {
        return Err(OmitError::invalid("rhs", format!("expected length {n}, got {}", b.len())));
    }
    let scale = a.data.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    if scale == T::zero() || !scale.is_finite() {
        return Err(OmitError::NumericalSingularity("zero or non-finite matrix".into()));
    }
    let tiny = scale * T::epsilon() * T::of_usize(n);
    match T::lu_solve(n, &a.data, b) {
        Some((x, pivot)) if pivot > tiny => Ok(x),
        Some((_, pivot)) => Err(OmitError::NumericalSingularity(format!("smallest pivot {pivot:e} at matrix scale {scale:e}"))),
        None => Err(OmitError::NumericalSingularity("exactly singular matrix".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_known_system() {
        // A x = b with x = (1+i, -2, 0.5i)
        let a = CMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64 + 0.3, (i as f64 - j as f64) * 0.7 + if i == j { 4.0 } else { 0.0 }));
        let x = vec![c(1.0, 1.0), c(-2.0, 0.0), c(0.0, 0.5)];
        let b = a.matvec(&x);
        let got = a.solve(&b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-13);
        }
    }

    #[test]
    fn needs_pivoting() {
        let mut a = CMatrix::<f64>::zeros(2, 2);
        a[(0, 1)] = c(1.0, 0.0);
        a[(1, 0)] = c(0.0, 2.0);
        let got = a.solve(&[c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((got[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((got[1] - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = CMatrix::from_fn(2, 2, |_, _| c(1.0, 1.0));
        assert!(matches!(a.solve(&[c(1.0, 0.0), c(0.0, 0.0)]), Err(OmitError::NumericalSingularity(_))));
    }

    #[test]
    fn identity_is_unitary() {
        assert_eq!(CMatrix::<f64>::identity(5).unitarity_defect(), 0.0);
    }
}
