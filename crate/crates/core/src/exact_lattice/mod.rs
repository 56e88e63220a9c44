//! Exact reduction `A = B_sigma^{-1} B`, lattice quotients and series supports.
//!
//! Column indices are 0-based. In the reduced problem the simplex columns come
//! first and the outer column `a(n)` is last.

mod matrix;
mod smith;

pub use matrix::{IntMatrix, RatMatrix};
pub use smith::{hermite_rows, smith_normal_form, SmithForm};

use crate::error::{Error, Result};
use crate::rational::Rational;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::HashSet;

/// The reduced datum. `a` is `d x n` with the identity in its first `d` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedProblem {
    pub a: RatMatrix,
    pub q: Vec<i64>,
    pub lattice_index: u64,
    /// Simplex columns of the original `B`.
    pub sigma: Vec<usize>,
    /// `column_order[j]` is the column of `B` that became column `j` of `a`.
    pub column_order: Vec<usize>,
    pub b_sigma: IntMatrix,
    pub b_sigma_inv: RatMatrix,
}

impl ReducedProblem {
    pub fn d(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        self.a.column(j)
    }

    /// `a(n)`, the last column.
    pub fn a_n(&self) -> Vec<Rational> {
        self.a.column(self.n() - 1)
    }

    /// `A_{sigma bar}`: the columns after the simplex block.
    pub fn a_sigma_bar(&self) -> RatMatrix {
        let idx: Vec<usize> = (self.d()..self.n()).collect();
        self.a.select_columns(&idx)
    }

    /// Reduced problem of the submatrix keeping the given non-simplex columns.
    pub fn restrict(&self, keep: &[usize]) -> ReducedProblem {
        let mut idx: Vec<usize> = (0..self.d()).collect();
        idx.extend(keep.iter().copied().filter(|&j| j >= self.d()));
        let a = self.a.select_columns(&idx);
        let q = row_denominators(&a);
        ReducedProblem {
            column_order: idx.iter().map(|&j| self.column_order[j]).collect(),
            a,
            q,
            ..self.clone()
        }
    }
}

fn row_denominators(a: &RatMatrix) -> Vec<i64> {
    (0..a.rows())
        .map(|i| a.row(i).iter().fold(1i64, |l, x| l.lcm(x.denom())))
        .collect()
}

pub fn reduce_problem(b: &IntMatrix, sigma: &[usize]) -> Result<ReducedProblem> {
    let d = b.rows();
    let n = b.cols();
    if sigma.len() != d {
        return Err(Error::DimensionMismatch {
            what: "simplex size",
            expected: d,
            got: sigma.len(),
        });
    }
    if let Some(&j) = sigma.iter().find(|&&j| j >= n) {
        return Err(Error::InvalidInput(format!("simplex column {j} out of range")));
    }
    if sigma.iter().collect::<HashSet<_>>().len() != d {
        return Err(Error::InvalidInput("repeated simplex column".into()));
    }
    let rank = b.rank();
    if rank < d {
        return Err(Error::RankDeficient { rank, expected: d });
    }
    let b_sigma = b.select_columns(sigma);
    let det = b_sigma.det()?;
    if det == 0 {
        return Err(Error::SingularSimplex);
    }
    let b_sigma_inv = b_sigma.to_rational().inverse()?;
    let mut column_order = sigma.to_vec();
    column_order.extend((0..n).filter(|j| !sigma.contains(j)));
    let a = b_sigma_inv.mul(&b.select_columns(&column_order).to_rational())?;
    let q = row_denominators(&a);
    Ok(ReducedProblem {
        a,
        q,
        lattice_index: det.unsigned_abs(),
        sigma: sigma.to_vec(),
        column_order,
        b_sigma,
        b_sigma_inv,
    })
}

/// Canonical representatives of `Z^d / (tM) Z^d`, via the Smith form of `tM`.
/// Each representative is reduced into the Hermite box of the lattice and the
/// list is sorted lexicographically.
pub fn coset_representatives(m: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let det = m.det()?;
    if det == 0 {
        return Err(Error::SingularSimplex);
    }
    let mt = m.transpose();
    let s = smith_normal_form(&mt);
    let d = m.rows();
    let mut reps = Vec::with_capacity(det.unsigned_abs() as usize);
    let mut c = vec![0i64; d];
    loop {
        let x = s.left_inv.mul_vec(&c);
        reps.push(canonical_residue(m, &x));
        let mut i = 0;
        loop {
            if i == d {
                reps.sort();
                return Ok(reps);
            }
            c[i] += 1;
            if c[i] < s.diag[i] {
                break;
            }
            c[i] = 0;
            i += 1;
        }
    }
}

/// Reduce `x` modulo the lattice spanned by the rows of `m` into the Hermite box.
pub fn canonical_residue(m: &IntMatrix, x: &[i64]) -> Vec<i64> {
    let h = hermite_rows(m);
    let mut x = x.to_vec();
    for i in 0..h.rows() {
        let row = h.row(i);
        let c = row.iter().position(|&v| v != 0).unwrap();
        let k = x[c].div_euclid(row[c]);
        if k != 0 {
            for (xj, rj) in x.iter_mut().zip(&row) {
                *xj -= k * rj;
            }
        }
    }
    x
}

/// Whether `p - p'` lies in `(tM) Z^d`.
pub fn congruent_mod_transpose(m: &IntMatrix, p: &[i64], p2: &[i64]) -> Result<bool> {
    let inv = m.transpose().to_rational().inverse()?;
    let diff: Vec<i64> = p.iter().zip(p2).map(|(a, b)| a - b).collect();
    Ok(inv.mul_int_vec(&diff).iter().all(|x| x.is_integer()))
}

/// Fractional parts of `v`, a canonical key for `v mod Z^d`.
pub fn frac_key(v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| x - Rational::from_integer(x.floor().to_integer())).collect()
}

const OMEGA_BUDGET_CAP: u64 = 10_000_000;

/// A transversal `Omega` of `ZA / Z^d`, scanning the box `[0, index)^{n-d}`
/// with the first coordinate running fastest and keeping the first hit per coset.
pub fn omega_set(a_sigma_bar: &RatMatrix, index: u64) -> Result<Vec<Vec<u64>>> {
    let m = a_sigma_bar.cols();
    if index == 0 {
        return Err(Error::InvalidInput("index must be positive".into()));
    }
    let budget = (index as u128)
        .checked_pow(m as u32)
        .map_or(OMEGA_BUDGET_CAP, |b| (b as u64).min(OMEGA_BUDGET_CAP)) as usize;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut k = vec![0u64; m];
    for _ in 0..budget.max(1) {
        let ki: Vec<i64> = k.iter().map(|&x| x as i64).collect();
        let key = frac_key(&a_sigma_bar.mul_int_vec(&ki));
        if seen.insert(key) {
            out.push(k.clone());
            if out.len() as u64 == index {
                return Ok(out);
            }
        }
        let mut i = 0;
        while i < m {
            k[i] += 1;
            if k[i] < index {
                break;
            }
            k[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
    }
    Err(Error::EnumerationBudgetExceeded { budget })
}

/// Order of `ZA / Z^d`, counted from the box `[0, q_max)^{n-d}` of residues.
pub fn quotient_order(a_sigma_bar: &RatMatrix) -> u64 {
    let m = a_sigma_bar.cols();
    let q_max = (0..a_sigma_bar.rows())
        .flat_map(|i| a_sigma_bar.row(i))
        .fold(1i64, |l, x| l.lcm(x.denom())) as u64;
    let mut seen = HashSet::new();
    let mut k = vec![0u64; m];
    loop {
        let ki: Vec<i64> = k.iter().map(|&x| x as i64).collect();
        seen.insert(frac_key(&a_sigma_bar.mul_int_vec(&ki)));
        let mut i = 0;
        while i < m {
            k[i] += 1;
            if k[i] < q_max {
                break;
            }
            k[i] = 0;
            i += 1;
        }
        if i == m {
            return seen.len() as u64;
        }
    }
}

/// `k + m` lies in `Lambda_k`: it is nonnegative and `A_{sigma bar} m` is
/// integral. Entries of `m` may be negative.
pub fn lambda_membership(k: &[u64], m: &[i64], a_sigma_bar: &RatMatrix) -> bool {
    k.iter().zip(m).all(|(&k, &m)| k as i64 + m >= 0)
        && a_sigma_bar.mul_int_vec(m).iter().all(|x| x.is_integer())
}

/// Transversals indexing the integral solutions (`coset_reps`) and the
/// Gevrey series (`omega`).
#[derive(Clone, Debug, PartialEq)]
pub struct BasisData {
    pub omega: Vec<Vec<u64>>,
    pub coset_reps: Vec<Vec<i64>>,
}

pub fn basis_data(rp: &ReducedProblem) -> Result<BasisData> {
    let asb = rp.a_sigma_bar();
    let order = quotient_order(&asb);
    if order != rp.lattice_index {
        return Err(Error::LatticeNotSaturated {
            order,
            index: rp.lattice_index,
        });
    }
    Ok(BasisData {
        omega: omega_set(&asb, rp.lattice_index)?,
        coset_reps: coset_representatives(&rp.b_sigma)?,
    })
}

/// `|v|_1` of `A_{sigma bar} m`, the total shift of a multi-index.
pub fn shift_of(a_sigma_bar: &RatMatrix, m: &[u64]) -> Vec<Rational> {
    let mi: Vec<i64> = m.iter().map(|&x| x as i64).collect();
    a_sigma_bar.mul_int_vec(&mi)
}

pub fn is_nonnegative(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(|x| x.is_zero())
}
