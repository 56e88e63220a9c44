use crate::error::{Error, Result};
use crate::rational::Rational;
use num_traits::{One, Signed, Zero};

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<i64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, idx.len());
        for (jj, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j));
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| Rational::from_integer(x)).collect(),
        }
    }

    /// Determinant by fraction-free elimination.
    pub fn det(&self) -> Result<i64> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                what: "square matrix",
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k * n + k] == 0 {
                match (k + 1..n).find(|&i| a[i * n + k] != 0) {
                    Some(i) => {
                        for j in 0..n {
                            a.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
                }
            }
            prev = a[k * n + k];
        }
        Ok((sign * a[n * n - 1]) as i64)
    }

    pub fn rank(&self) -> usize {
        self.to_rational().rank()
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(RatMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_columns(cols: &[Vec<Rational>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        if cols.iter().any(|x| x.len() != r) {
            return Err(Error::InvalidInput("ragged matrix columns".into()));
        }
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Rational> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_f64(&self, j: usize) -> Vec<f64> {
        self.column(j).iter().map(crate::rational::rat_to_f64).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.rows, idx.len());
        for (jj, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j));
            }
        }
        m
    }

    pub fn mul(&self, o: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch {
                what: "matrix product",
                expected: self.cols,
                got: o.rows,
            });
        }
        let mut m = RatMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut s = Rational::zero();
                for k in 0..self.cols {
                    s += self.get(i, k) * o.get(k, j);
                }
                m.set(i, j, s);
            }
        }
        Ok(m)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Rational::zero(), |acc, j| acc + self.get(i, j) * v[j])
            })
            .collect()
    }

    pub fn mul_int_vec(&self, v: &[i64]) -> Vec<Rational> {
        let v: Vec<Rational> = v.iter().map(|&x| Rational::from_integer(x)).collect();
        self.mul_vec(&v)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                let t = m.get(r, j);
                m.set(r, j, m.get(p, j));
                m.set(p, j, t);
            }
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                m.set(r, j, m.get(r, j) * inv);
            }
            for i in 0..m.rows {
                if i != r {
                    let f = m.get(i, c);
                    if !f.is_zero() {
                        for j in 0..m.cols {
                            let v = m.get(i, j) - f * m.get(r, j);
                            m.set(i, j, v);
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                for j in 0..n {
                    let t = m.get(c, j);
                    m.set(c, j, m.get(p, j));
                    m.set(p, j, t);
                }
                det = -det;
            }
            let piv = m.get(c, c);
            det *= piv;
            for i in c + 1..n {
                let f = m.get(i, c) / piv;
                if !f.is_zero() {
                    for j in c..n {
                        let v = m.get(i, j) - f * m.get(c, j);
                        m.set(i, j, v);
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                what: "square matrix",
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = RatMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, Rational::one());
        }
        let (r, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] >= n {
            return Err(Error::SingularSimplex);
        }
        let mut inv = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j));
            }
        }
        Ok(inv)
    }

    /// Solve `self * x = b` exactly; `None` if inconsistent. Free variables are set to zero.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        let mut aug = RatMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i]);
        }
        let (r, piv) = aug.rref();
        if piv.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (i, &c) in piv.iter().enumerate() {
            x[c] = r.get(i, self.cols);
        }
        Some(x)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn max_abs(&self) -> Rational {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn bareiss_matches_cofactor() {
        let m = IntMatrix::from_rows(&[vec![2, 1, 1], vec![0, 2, 1], vec![1, 3, 5]]).unwrap();
        // 2(10-3) - 1(0-1) + 1(0-2) = 13
        assert_eq!(m.det().unwrap(), 13);
        assert_eq!(m.to_rational().det(), rat(13, 1));
        let s = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(s.det().unwrap(), -1);
    }

    #[test]
    fn inverse_round_trip() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![0, 2]]).unwrap().to_rational();
        let inv = m.inverse().unwrap();
        assert_eq!(inv.get(0, 1), rat(-1, 4));
        assert_eq!(m.mul(&inv).unwrap(), RatMatrix::identity(2));
    }

    #[test]
    fn singular_inverse_fails() {
        let m = IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]).unwrap().to_rational();
        assert_eq!(m.inverse(), Err(Error::SingularSimplex));
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = RatMatrix::from_columns(&[vec![rat(1, 1), rat(2, 1)]]).unwrap();
        assert_eq!(m.solve(&[rat(1, 2), rat(1, 1)]), Some(vec![rat(1, 2)]));
        assert_eq!(m.solve(&[rat(1, 1), rat(1, 1)]), None);
    }
}
