//! Packed lower-triangular Cholesky factor that grows one row at a time.

#[derive(Debug, Clone, Default)]
pub struct TriangularFactor {
    n: usize,
    /// Row-major packed storage; row `i` occupies `i*(i+1)/2 .. (i+1)*(i+2)/2`.
    data: Vec<f64>,
}

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl TriangularFactor {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row `i` including its diagonal entry.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[row_start(i)..row_start(i + 1)]
    }

    #[inline]
    pub fn diag(&self, i: usize) -> f64 {
        self.data[row_start(i + 1) - 1]
    }

    /// Factor a dense symmetric matrix given by `entry(i, j)` for `j <= i`.
    /// Returns `None` when a pivot is not strictly positive.
    pub fn factor(n: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Option<Self> {
        let mut f = TriangularFactor {
            n: 0,
            data: Vec::with_capacity(row_start(n)),
        };
        let mut row = vec![0.0; n];
        for i in 0..n {
            for (j, r) in row.iter_mut().enumerate().take(i) {
                *r = entry(i, j);
            }
            let d2 = entry(i, i);
            if !f.push_row(&row[..i], d2) {
                return None;
            }
        }
        Some(f)
    }

    /// Solve `L v = b` in place for the first `b.len()` rows.
    pub fn forward_solve_in_place(&self, b: &mut [f64]) {
        debug_assert!(b.len() <= self.n);
        for i in 0..b.len() {
            let row = self.row(i);
            let mut s = b[i];
            for (l, v) in row[..i].iter().zip(&b[..i]) {
                s -= l * v;
            }
            b[i] = s / row[i];
        }
    }

    /// Extend by one row: `b` are the covariances with the existing rows and
    /// `diag_entry` the new diagonal of the underlying matrix. The off-diagonal
    /// part is solved in place. Returns `false` (leaving the factor unchanged)
    /// if the new pivot is not strictly positive.
    pub fn push_row(&mut self, b: &[f64], diag_entry: f64) -> bool {
        debug_assert_eq!(b.len(), self.n);
        let mut l = b.to_vec();
        self.forward_solve_in_place(&mut l);
        let pivot = diag_entry - l.iter().map(|v| v * v).sum::<f64>();
        if !(pivot > 0.0 && pivot.is_finite()) {
            return false;
        }
        self.data.extend_from_slice(&l);
        self.data.push(pivot.sqrt());
        self.n += 1;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_matrix() {
        let a = [[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]];
        let f = TriangularFactor::factor(3, |i, j| a[i][j]).unwrap();
        for i in 0..3 {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| f.row(i)[k] * f.row(j)[k]).sum();
                assert!((s - a[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = [[1.0, 2.0], [2.0, 1.0]];
        assert!(TriangularFactor::factor(2, |i, j| a[i][j]).is_none());
    }

    #[test]
    fn forward_solve() {
        let a = [[4.0, 2.0], [2.0, 5.0]];
        let f = TriangularFactor::factor(2, |i, j| a[i][j]).unwrap();
        let mut b = vec![2.0, 3.0];
        f.forward_solve_in_place(&mut b);
        // L = [[2, 0], [1, 2]]
        assert!((b[0] - 1.0).abs() < 1e-12);
        assert!((b[1] - 1.0).abs() < 1e-12);
    }
}
