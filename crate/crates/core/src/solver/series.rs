use super::eval::{eval_a_coeff, multi_indices_of_degree};
use super::pole_and_resonance;
use crate::error::{Error, Result};
use crate::exact_lattice::{lambda_membership, BasisData, RatMatrix, ReducedProblem};
use crate::geometry::gevrey_index;
use crate::numerics::log_gamma;
use crate::rational::{phase_pi, rat_to_f64, Rational};
use num_complex::Complex64;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Coefficient of `y^{k+m} / (k+m)!` in `S_k`:
/// `exp(i pi |A_{sigma bar}(k+m)|) Gamma(-beta + A_{sigma bar}(k+m))`.
pub fn gevrey_coefficient(k: &[u64], m: &[i64], beta: &[Complex64], a_sigma_bar: &RatMatrix) -> Result<Complex64> {
    if !lambda_membership(k, m, a_sigma_bar) {
        return Err(Error::NotInSupport);
    }
    let q: Vec<i64> = k.iter().zip(m).map(|(&a, &b)| a as i64 + b).collect();
    let v = a_sigma_bar.mul_int_vec(&q);
    let total: Rational = v.iter().copied().sum();
    let mut ln = Complex64::zero();
    for (i, (b, vi)) in beta.iter().zip(&v).enumerate() {
        let z = -b + rat_to_f64(vi);
        ln += log_gamma(z).map_err(|_| Error::PoleEncountered {
            coordinate: i,
            value: b.re,
        })?;
    }
    Ok(phase_pi(&total) * ln.exp())
}

fn offset(q: &[u64], k: &[u64]) -> Vec<i64> {
    q.iter().zip(k).map(|(&a, &b)| a as i64 - b as i64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    AsymptoticInYn,
    GevreySk,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable {
    pub kind: SeriesKind,
    pub support: Vec<Vec<u64>>,
    /// Coefficient of `y^q / q!` keyed by `q`.
    pub coefficients: BTreeMap<Vec<u64>, Complex64>,
    pub gevrey_index: Rational,
    pub k_label: Option<Vec<u64>>,
}

/// Table of `S_k` over `q` in `Lambda_k` with `|q| <= order`.
pub fn gevrey_table(k: &[u64], beta: &[Complex64], rp: &ReducedProblem, order: u64) -> Result<SeriesTable> {
    let asb = rp.a_sigma_bar();
    let len = asb.cols();
    let mut support = Vec::new();
    let mut coefficients = BTreeMap::new();
    for degree in 0..=order {
        let mut shell = multi_indices_of_degree(len, degree);
        shell.reverse();
        for q in shell {
            let m = offset(&q, k);
            if !lambda_membership(k, &m, &asb) {
                continue;
            }
            coefficients.insert(q.clone(), gevrey_coefficient(k, &m, beta, &asb)?);
            support.push(q);
        }
    }
    Ok(SeriesTable {
        kind: SeriesKind::GevreySk,
        support,
        coefficients,
        gevrey_index: gevrey_index(&rp.a),
        k_label: Some(k.to_vec()),
    })
}

/// Table of `A(beta; m, y')` (coefficient of `y_n^m / m!`) for `m <= order`.
pub fn asymptotic_table(
    rp: &ReducedProblem,
    p: &[i64],
    beta: &[Complex64],
    y_prime: &[Complex64],
    order: u64,
    trunc: u64,
) -> Result<SeriesTable> {
    let mut support = Vec::new();
    let mut coefficients = BTreeMap::new();
    for m in 0..=order {
        coefficients.insert(vec![m], eval_a_coeff(rp, p, beta, m, y_prime, trunc)?);
        support.push(vec![m]);
    }
    Ok(SeriesTable {
        kind: SeriesKind::AsymptoticInYn,
        support,
        coefficients,
        gevrey_index: gevrey_index(&rp.a),
        k_label: None,
    })
}

/// Phase matrix `M[p][k] = exp(i pi <2p, A_{sigma bar} k>)`, rows indexed by
/// the coset representatives and columns by `Omega`.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    pub reps: Vec<Vec<i64>>,
    pub omega: Vec<Vec<u64>>,
    pub matrix: Vec<Vec<Complex64>>,
    pub determinant: Complex64,
}

pub const SINGULAR_CONNECTION_TOL: f64 = 1e-8;

pub fn connection_solve(basis: &BasisData, beta: &[Complex64], rp: &ReducedProblem) -> Result<Connection> {
    let pr = pole_and_resonance(beta, rp, 10_000);
    if pr.in_p {
        return Err(Error::PoleEncountered {
            coordinate: pr.pole_coordinate.unwrap_or(0),
            value: beta[pr.pole_coordinate.unwrap_or(0)].re,
        });
    }
    let asb = rp.a_sigma_bar();
    let matrix: Vec<Vec<Complex64>> = basis
        .coset_reps
        .iter()
        .map(|p| {
            basis
                .omega
                .iter()
                .map(|k| {
                    let ki: Vec<i64> = k.iter().map(|&x| x as i64).collect();
                    let v = asb.mul_int_vec(&ki);
                    let s: Rational = p
                        .iter()
                        .zip(&v)
                        .map(|(&pi, vi)| Rational::from_integer(2 * pi) * vi)
                        .sum();
                    phase_pi(&s)
                })
                .collect()
        })
        .collect();
    let determinant = complex_det(&matrix);
    if determinant.norm() < SINGULAR_CONNECTION_TOL {
        return Err(Error::SingularConnection {
            det_abs: determinant.norm(),
        });
    }
    Ok(Connection {
        reps: basis.coset_reps.clone(),
        omega: basis.omega.clone(),
        matrix,
        determinant,
    })
}

impl Connection {
    /// Coefficient of `y^q / q!` of `F_{p,delta}` for `p = reps[row]`, assembled
    /// as `exp(-i pi <1 + 2p, beta>) sum_k M[p][k] S_k(q)`.
    pub fn reconstruct(&self, rp: &ReducedProblem, row: usize, beta: &[Complex64], q: &[u64]) -> Result<Complex64> {
        let asb = rp.a_sigma_bar();
        let p = &self.reps[row];
        let mut sum = Complex64::zero();
        for (col, k) in self.omega.iter().enumerate() {
            let m = offset(q, k);
            if !lambda_membership(k, &m, &asb) {
                continue;
            }
            sum += self.matrix[row][col] * gevrey_coefficient(k, &m, beta, &asb)?;
        }
        let re: f64 = p.iter().zip(beta).map(|(&pk, b)| (1 + 2 * pk) as f64 * b.re).sum();
        let im: f64 = p.iter().zip(beta).map(|(&pk, b)| (1 + 2 * pk) as f64 * b.im).sum();
        let phase = crate::rational::phase_pi_f64(-re) * (std::f64::consts::PI * im).exp();
        Ok(phase * sum)
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn complex_det(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].norm().partial_cmp(&a[j][c].norm()).unwrap())
            .unwrap();
        if a[piv][c].norm() == 0.0 {
            return Complex64::zero();
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                let v = a[c][j];
                a[i][j] -= f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_lattice::{basis_data, reduce_problem, IntMatrix};
    use crate::rational::rat;
    use crate::solver::taylor_coefficient;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn reduced(rows: &[Vec<i64>], sigma: &[usize]) -> ReducedProblem {
        reduce_problem(&IntMatrix::from_rows(rows).unwrap(), sigma).unwrap()
    }

    #[test]
    fn gevrey_coefficient_examples() {
        let asb = RatMatrix::from_columns(&[vec![rat(3, 2)]]).unwrap();
        let v = gevrey_coefficient(&[0], &[0], &[c(-0.5)], &asb).unwrap();
        assert!((v - c(std::f64::consts::PI.sqrt())).norm() < 1e-14);
        let v = gevrey_coefficient(&[1], &[0], &[c(-0.5)], &asb).unwrap();
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert_eq!(gevrey_coefficient(&[0], &[1], &[c(-0.5)], &asb), Err(Error::NotInSupport));
    }

    #[test]
    fn connection_index_one() {
        let rp = reduced(&[vec![1, 2]], &[0]);
        let conn = connection_solve(&basis_data(&rp).unwrap(), &[c(-0.5)], &rp).unwrap();
        assert_eq!(conn.matrix, vec![vec![c(1.0)]]);
    }

    #[test]
    fn connection_index_two() {
        let rp = reduced(&[vec![2, 3]], &[0]);
        let conn = connection_solve(&basis_data(&rp).unwrap(), &[c(-0.3)], &rp).unwrap();
        assert_eq!(conn.matrix, vec![vec![c(1.0), c(1.0)], vec![c(1.0), c(-1.0)]]);
        assert_eq!(conn.determinant, c(-2.0));
    }

    #[test]
    fn reconstruction_matches_taylor_coefficients() {
        let rp = reduced(&[vec![2, 1, 1, 2], vec![0, 2, 1, 2]], &[0, 1]);
        let beta = [Complex64::new(-0.3, 0.1), Complex64::new(-0.45, -0.2)];
        let conn = connection_solve(&basis_data(&rp).unwrap(), &beta, &rp).unwrap();
        assert!(conn.determinant.norm() > 1e-6);
        for (row, p) in conn.reps.iter().enumerate() {
            for degree in 0..=4 {
                for q in multi_indices_of_degree(2, degree) {
                    let got = conn.reconstruct(&rp, row, &beta, &q).unwrap();
                    let want = taylor_coefficient(&rp, p, &beta, &q).unwrap();
                    assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0), "p={p:?} q={q:?}");
                }
            }
        }
    }

    #[test]
    fn supports_are_disjoint() {
        let rp = reduced(&[vec![2, 1, 1, 2], vec![0, 2, 1, 2]], &[0, 1]);
        let beta = [c(-0.3), c(-0.45)];
        let omega = basis_data(&rp).unwrap().omega;
        let tables: Vec<SeriesTable> = omega.iter().map(|k| gevrey_table(k, &beta, &rp, 6).unwrap()).collect();
        for i in 0..tables.len() {
            for j in i + 1..tables.len() {
                assert!(tables[i].support.iter().all(|q| !tables[j].coefficients.contains_key(q)));
            }
        }
        let total: usize = tables.iter().map(|t| t.support.len()).sum();
        assert_eq!(total, multi_indices_of_degree(3, 6).len());
    }

    #[test]
    fn asymptotic_table_shape() {
        let rp = reduced(&[vec![1, 2]], &[0]);
        let t = asymptotic_table(&rp, &[0], &[c(-0.5)], &[], 3, 20).unwrap();
        assert_eq!(t.kind, SeriesKind::AsymptoticInYn);
        assert_eq!(t.support.len(), 4);
        assert_eq!(t.gevrey_index, rat(2, 1));
    }
}
