//! Small dense symmetric-matrix helpers (row-major, square).

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Lower Cholesky factor `L` with `A = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    min_pivot: f64,
}

impl Cholesky {
    /// Factor `a + jitter * I`. Fails with `NearSingular` as soon as a squared
    /// pivot drops below `min_pivot`.
    pub fn factor(a: &SymMatrix, jitter: f64, min_pivot: f64) -> Result<Self> {
        let n = a.n;
        let mut l = vec![0.0; n * n];
        let mut smallest = f64::INFINITY;
        for j in 0..n {
            let mut d = a.get(j, j) + jitter;
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d >= min_pivot) {
                return Err(Error::NearSingular { pivot: d, index: j });
            }
            smallest = smallest.min(d);
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self {
            n,
            l,
            min_pivot: smallest,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest squared pivot encountered.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn l(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    pub fn log_det(&self) -> f64 {
        (0..self.n).map(|i| self.l(i, i).ln()).sum::<f64>() * 2.0
    }

    /// `L z`.
    pub fn mul_lower(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.l[i * n..i * n + i + 1]
                    .iter()
                    .zip(z)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Solve `L y = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solve `L^T x = b` in place.
    pub fn backward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        self.forward(b);
        self.backward(b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve() {
        let a = SymMatrix::from_fn(3, |i, j| if i == j { 4.0 } else { 1.0 });
        let c = Cholesky::factor(&a, 0.0, 1e-12).unwrap();
        let mut x = vec![6.0, 6.0, 6.0];
        c.solve(&mut x);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        // det = (4-1)^2 (4+2) = 54
        assert!((c.log_det() - 54f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn singular_reports_pivot() {
        let a = SymMatrix::from_fn(2, |_, _| 1.0);
        match Cholesky::factor(&a, 0.0, 1e-12) {
            Err(Error::NearSingular { index, pivot }) => {
                assert_eq!(index, 1);
                assert!(pivot.abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cholesky::factor(&a, 1e-6, 1e-12).is_ok());
    }

    #[test]
    fn lower_times_vector() {
        let a = SymMatrix::from_fn(2, |i, j| [[4.0, 2.0], [2.0, 5.0]][i][j]);
        let c = Cholesky::factor(&a, 0.0, 0.0).unwrap();
        let v = c.mul_lower(&[1.0, 1.0]);
        assert!((v[0] - 2.0).abs() < 1e-15 && (v[1] - 3.0).abs() < 1e-15);
    }
}
