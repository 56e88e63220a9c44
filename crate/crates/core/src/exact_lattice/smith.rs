//! Smith and Hermite normal forms over the integers.

use super::matrix::IntMatrix;

/// `left * m * right = diag` with `left`, `right` unimodular.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub diag: Vec<i64>,
    pub left: IntMatrix,
    pub left_inv: IntMatrix,
    pub right: IntMatrix,
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (r, c) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut u_inv = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);

    // row_j += k * row_i, mirrored on the transforms.
    let add_row = |a: &mut IntMatrix, u: &mut IntMatrix, ui: &mut IntMatrix, i: usize, j: usize, k: i64| {
        for col in 0..a.cols() {
            a.set(j, col, a.get(j, col) + k * a.get(i, col));
        }
        for col in 0..u.cols() {
            u.set(j, col, u.get(j, col) + k * u.get(i, col));
        }
        for row in 0..ui.rows() {
            ui.set(row, i, ui.get(row, i) - k * ui.get(row, j));
        }
    };
    let add_col = |a: &mut IntMatrix, v: &mut IntMatrix, i: usize, j: usize, k: i64| {
        for row in 0..a.rows() {
            a.set(row, j, a.get(row, j) + k * a.get(row, i));
        }
        for row in 0..v.rows() {
            v.set(row, j, v.get(row, j) + k * v.get(row, i));
        }
    };
    let swap_rows = |a: &mut IntMatrix, u: &mut IntMatrix, ui: &mut IntMatrix, i: usize, j: usize| {
        for col in 0..a.cols() {
            let t = a.get(i, col);
            a.set(i, col, a.get(j, col));
            a.set(j, col, t);
        }
        for col in 0..u.cols() {
            let t = u.get(i, col);
            u.set(i, col, u.get(j, col));
            u.set(j, col, t);
        }
        for row in 0..ui.rows() {
            let t = ui.get(row, i);
            ui.set(row, i, ui.get(row, j));
            ui.set(row, j, t);
        }
    };
    let swap_cols = |a: &mut IntMatrix, v: &mut IntMatrix, i: usize, j: usize| {
        for row in 0..a.rows() {
            let t = a.get(row, i);
            a.set(row, i, a.get(row, j));
            a.set(row, j, t);
        }
        for row in 0..v.rows() {
            let t = v.get(row, i);
            v.set(row, i, v.get(row, j));
            v.set(row, j, t);
        }
    };

    for t in 0..r.min(c) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = a.get(i, j);
                    if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            if bi != t {
                swap_rows(&mut a, &mut u, &mut u_inv, t, bi);
            }
            if bj != t {
                swap_cols(&mut a, &mut v, t, bj);
            }
            let p = a.get(t, t);
            let mut clean = true;
            for i in t + 1..r {
                let q = a.get(i, t) / p;
                if q != 0 {
                    add_row(&mut a, &mut u, &mut u_inv, t, i, -q);
                }
                clean &= a.get(i, t) == 0;
            }
            for j in t + 1..c {
                let q = a.get(t, j) / p;
                if q != 0 {
                    add_col(&mut a, &mut v, t, j, -q);
                }
                clean &= a.get(t, j) == 0;
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| a.get(i, j) % p != 0));
            match bad {
                Some(i) => add_row(&mut a, &mut u, &mut u_inv, i, t, 1),
                None => break,
            }
        }
        if a.get(t, t) < 0 {
            for col in 0..c {
                a.set(t, col, -a.get(t, col));
            }
            for col in 0..r {
                u.set(t, col, -u.get(t, col));
            }
            for row in 0..r {
                u_inv.set(row, t, -u_inv.get(row, t));
            }
        }
    }
    let diag = (0..r.min(c)).map(|i| a.get(i, i)).collect();
    SmithForm {
        diag,
        left: u,
        left_inv: u_inv,
        right: v,
    }
}

/// Row-style Hermite normal form of a full-rank square generator matrix:
/// upper triangular with positive diagonal, entries above the diagonal reduced.
/// The rows span the same lattice as the rows of `m`.
pub fn hermite_rows(m: &IntMatrix) -> IntMatrix {
    let n = m.cols();
    let mut rows = m.to_rows();
    let mut out: Vec<Vec<i64>> = Vec::with_capacity(n);
    for col in 0..n {
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            for &i in &nz {
                if i != piv {
                    let q = rows[i][col] / rows[piv][col];
                    for k in 0..n {
                        rows[i][k] -= q * rows[piv][k];
                    }
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i][col] != 0) {
            let mut r = rows.remove(i);
            if r[col] < 0 {
                r.iter_mut().for_each(|x| *x = -*x);
            }
            out.push(r);
        }
        rows.retain(|r| r.iter().any(|&x| x != 0));
    }
    for i in 0..out.len() {
        let ci = out[i].iter().position(|&x| x != 0).unwrap();
        for j in 0..i {
            let q = out[j][ci].div_euclid(out[i][ci]);
            if q != 0 {
                for k in 0..n {
                    out[j][k] -= q * out[i][k];
                }
            }
        }
    }
    IntMatrix::from_rows(&out).expect("rectangular by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        let mut m = IntMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                m.set(i, j, (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum());
            }
        }
        m
    }

    #[test]
    fn smith_of_small_matrix() {
        let m = IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]).unwrap();
        let s = smith_normal_form(&m);
        assert_eq!(s.diag, vec![2, 6, 12]);
        let d = matmul(&matmul(&s.left, &m), &s.right);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), if i == j { s.diag[i] } else { 0 });
            }
        }
        assert_eq!(matmul(&s.left, &s.left_inv), IntMatrix::identity(3));
    }

    #[test]
    fn hermite_is_triangular() {
        let m = IntMatrix::from_rows(&[vec![3, 1], vec![1, 2]]).unwrap();
        let h = hermite_rows(&m);
        assert_eq!(h.get(1, 0), 0);
        assert_eq!(h.get(0, 0) * h.get(1, 1), 5);
    }
}
