//! Standing assumptions and the hull index sets `eta` and `tau_A`.

use crate::error::{Error, Result};
use crate::exact_lattice::{IntMatrix, RatMatrix};
use crate::rational::Rational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnRole {
    Simplex,
    Interior,
    Outer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnDiagnostic {
    pub column: usize,
    pub role: ColumnRole,
    /// Coordinates in the basis of the simplex columns.
    pub coords: Vec<Rational>,
    pub coord_sum: Rational,
    pub ok: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    pub ok: bool,
    pub columns: Vec<ColumnDiagnostic>,
    pub note: Option<String>,
}

fn diagnose(column: usize, role: ColumnRole, coords: Vec<Rational>) -> ColumnDiagnostic {
    let coord_sum = coords.iter().fold(Rational::zero(), |a, b| a + b);
    let positive = coords.iter().all(|x| x.is_positive());
    let reason = match role {
        ColumnRole::Simplex => {
            let unit = coords.iter().filter(|x| x.is_one()).count() == 1
                && coords.iter().filter(|x| x.is_zero()).count() + 1 == coords.len();
            (!unit).then(|| "simplex column is not a unit vector".to_string())
        }
        ColumnRole::Interior => {
            if !positive {
                Some("coordinates not strictly positive".into())
            } else if coord_sum >= Rational::one() {
                Some(format!("coordinate sum {coord_sum} >= 1"))
            } else {
                None
            }
        }
        ColumnRole::Outer => {
            if !positive {
                Some("not in the open cone of the simplex".into())
            } else if coord_sum <= Rational::one() {
                Some(format!("coordinate sum {coord_sum} <= 1"))
            } else {
                None
            }
        }
    };
    ColumnDiagnostic {
        column,
        role,
        coords,
        coord_sum,
        ok: reason.is_none(),
        reason,
    }
}

fn report(columns: Vec<ColumnDiagnostic>) -> AssumptionReport {
    AssumptionReport {
        ok: columns.iter().all(|c| c.ok),
        columns,
        note: None,
    }
}

/// Checks on the original matrix: interior columns strictly inside the
/// simplex spanned by `0` and `b(sigma)`, the last non-simplex column in the
/// open cone and beyond the opposite facet.
pub fn validate_assumption_b(b: &IntMatrix, sigma: &[usize]) -> AssumptionReport {
    let singular = |note: &str| AssumptionReport {
        ok: false,
        columns: vec![],
        note: Some(note.to_string()),
    };
    if sigma.len() != b.rows() || sigma.iter().any(|&j| j >= b.cols()) {
        return singular("simplex must select d valid columns");
    }
    let inv = match b.select_columns(sigma).to_rational().inverse() {
        Ok(inv) => inv,
        Err(_) => return singular("simplex columns are linearly dependent"),
    };
    let others: Vec<usize> = (0..b.cols()).filter(|j| !sigma.contains(j)).collect();
    if others.is_empty() {
        return singular("no column outside the simplex");
    }
    let last = *others.last().unwrap();
    let mut cols = Vec::new();
    for j in 0..b.cols() {
        let role = if sigma.contains(&j) {
            ColumnRole::Simplex
        } else if j == last {
            ColumnRole::Outer
        } else {
            ColumnRole::Interior
        };
        let coords = inv.mul_int_vec(&b.column(j));
        cols.push(diagnose(j, role, coords));
    }
    report(cols)
}

/// The same checks on a reduced matrix (identity in the first `d` columns).
pub fn validate_assumption_a(a: &RatMatrix) -> AssumptionReport {
    let (d, n) = (a.rows(), a.cols());
    if n <= d {
        return AssumptionReport {
            ok: false,
            columns: vec![],
            note: Some("no column outside the simplex".into()),
        };
    }
    let cols = (0..n)
        .map(|j| {
            let role = if j < d {
                ColumnRole::Simplex
            } else if j == n - 1 {
                ColumnRole::Outer
            } else {
                ColumnRole::Interior
            };
            let mut diag = diagnose(j, role, a.column(j));
            if role == ColumnRole::Simplex && !diag.coords[j].is_one() {
                diag.ok = false;
                diag.reason = Some(format!("column {j} is not e({j})"));
            }
            diag
        })
        .collect();
    report(cols)
}

pub fn gevrey_index(a: &RatMatrix) -> Rational {
    a.column(a.cols() - 1).iter().fold(Rational::zero(), |s, x| s + x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HullBoundary {
    pub eta: Vec<usize>,
    pub tau_a: Vec<usize>,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |s, (x, y)| s + x * y)
}

/// Normal of the hyperplane through `pts` (d points in dimension d), if they
/// are affinely independent.
fn hyperplane_normal(pts: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let d = pts[0].len();
    let normal = match d {
        1 => vec![Rational::one()],
        2 => {
            let v: Vec<Rational> = (0..2).map(|i| pts[1][i] - pts[0][i]).collect();
            vec![-v[1], v[0]]
        }
        3 => {
            let u: Vec<Rational> = (0..3).map(|i| pts[1][i] - pts[0][i]).collect();
            let v: Vec<Rational> = (0..3).map(|i| pts[2][i] - pts[0][i]).collect();
            vec![
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ]
        }
        _ => return None,
    };
    (!normal.iter().all(|x| x.is_zero())).then_some(normal)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Exact hull of `{0} ∪ {a(j)}` by enumerating supporting hyperplanes through
/// d-subsets of the points. Requires the points to span `R^d`.
pub fn hull_boundary(a: &RatMatrix) -> Result<HullBoundary> {
    let d = a.rows();
    if d == 0 || d > 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let n = a.cols();
    let mut pts = vec![vec![Rational::zero(); d]];
    pts.extend((0..n).map(|j| a.column(j)));

    // facet (as set of incident points) -> (normal, offset)
    let mut facets: BTreeMap<BTreeSet<usize>, (Vec<Rational>, Rational)> = BTreeMap::new();
    for s in subsets(pts.len(), d) {
        let chosen: Vec<Vec<Rational>> = s.iter().map(|&i| pts[i].clone()).collect();
        let Some(mut c) = hyperplane_normal(&chosen) else {
            continue;
        };
        let mut h = dot(&c, &chosen[0]);
        let vals: Vec<Rational> = pts.iter().map(|p| dot(&c, p) - h).collect();
        let has_pos = vals.iter().any(|v| v.is_positive());
        let has_neg = vals.iter().any(|v| v.is_negative());
        if has_pos && has_neg {
            continue;
        }
        if has_pos {
            c.iter_mut().for_each(|x| *x = -*x);
            h = -h;
        }
        if !has_pos && !has_neg {
            continue;
        }
        let on: BTreeSet<usize> = (0..pts.len()).filter(|&i| vals[i].is_zero()).collect();
        // facet test: incident points span a hyperplane (affine rank d)
        let base = &pts[*on.iter().next().unwrap()];
        let diffs: Vec<Vec<Rational>> = on
            .iter()
            .map(|&i| (0..d).map(|k| pts[i][k] - base[k]).collect())
            .collect();
        if d > 1 && RatMatrix::from_columns(&diffs).map_or(0, |m| m.rank()) < d - 1 {
            continue;
        }
        facets.entry(on).or_insert((c, h));
    }

    let mut tau = BTreeSet::new();
    let mut eta = BTreeSet::new();
    for i in 1..pts.len() {
        let incident: Vec<&(Vec<Rational>, Rational)> =
            facets.iter().filter(|(on, _)| on.contains(&i)).map(|(_, f)| f).collect();
        if facets.iter().any(|(on, (_, h))| on.contains(&i) && !h.is_zero()) {
            tau.insert(i - 1);
        }
        if pts[i].iter().all(|x| x.is_zero()) {
            continue;
        }
        let normals: Vec<Vec<Rational>> = incident.iter().map(|(c, _)| c.clone()).collect();
        if !normals.is_empty() && RatMatrix::from_columns(&normals)?.rank() == d {
            eta.insert(i - 1);
        }
    }
    Ok(HullBoundary {
        eta: eta.into_iter().collect(),
        tau_a: tau.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NuDecomposition {
    /// `(l, nu_l)` over `l` in `eta`, zero entries omitted.
    pub nu: Vec<(usize, Rational)>,
    pub kappa: Rational,
}

/// Nonnegative `nu` with `a(j) = sum nu_l a(l)` over `l` in `eta`, minimising
/// `sum nu`. The optimum of this linear program sits at a basic solution, so
/// all linearly independent subsets of `eta` with at most `d` elements are tried.
pub fn nu_decomposition(a: &RatMatrix, eta: &[usize], j: usize) -> Result<NuDecomposition> {
    let d = a.rows();
    let target = a.column(j);
    if target.iter().all(|x| x.is_zero()) {
        return Ok(NuDecomposition {
            nu: vec![],
            kappa: Rational::zero(),
        });
    }
    let mut best: Option<NuDecomposition> = None;
    for size in 1..=d.min(eta.len()) {
        for s in subsets(eta.len(), size) {
            let idx: Vec<usize> = s.iter().map(|&i| eta[i]).collect();
            let m = a.select_columns(&idx);
            if m.rank() < size {
                continue;
            }
            let Some(x) = m.solve(&target) else {
                continue;
            };
            if x.iter().any(|v| v.is_negative()) {
                continue;
            }
            let kappa = x.iter().fold(Rational::zero(), |s, v| s + v);
            if best.as_ref().is_none_or(|b| kappa < b.kappa) {
                let nu = idx
                    .iter()
                    .zip(&x)
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(&l, &v)| (l, v))
                    .collect();
                best = Some(NuDecomposition { nu, kappa });
            }
        }
    }
    best.ok_or(Error::InfeasibleDecomposition { column: j })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryReport {
    pub eta: Vec<usize>,
    pub tau_a: Vec<usize>,
    pub nu: BTreeMap<usize, NuDecomposition>,
    pub gevrey_index: Rational,
    pub assumption: AssumptionReport,
}

impl GeometryReport {
    pub fn kappa(&self, j: usize) -> Option<Rational> {
        self.nu.get(&j).map(|n| n.kappa)
    }
}

/// Everything above for a reduced matrix; `nu` covers the columns outside
/// `eta` and the simplex.
pub fn geometry_report(a: &RatMatrix) -> Result<GeometryReport> {
    let d = a.rows();
    let hull = hull_boundary(a)?;
    let mut nu = BTreeMap::new();
    for j in d..a.cols() {
        if !hull.eta.contains(&j) {
            nu.insert(j, nu_decomposition(a, &hull.eta, j)?);
        }
    }
    Ok(GeometryReport {
        eta: hull.eta,
        tau_a: hull.tau_a,
        nu,
        gevrey_index: gevrey_index(a),
        assumption: validate_assumption_a(a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_lattice::reduce_problem;
    use crate::rational::rat;

    fn e3a() -> RatMatrix {
        RatMatrix::from_columns(&[
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 4), rat(1, 2)],
            vec![rat(1, 2), rat(1, 1)],
        ])
        .unwrap()
    }

    #[test]
    fn assumption_b_examples() {
        let b = IntMatrix::from_rows(&[vec![2, 1, 1, 2], vec![0, 2, 1, 2]]).unwrap();
        let r = validate_assumption_b(&b, &[0, 1]);
        assert!(r.ok);
        assert_eq!(r.columns[2].coord_sum, rat(3, 4));
        assert_eq!(r.columns[3].coords, vec![rat(1, 2), rat(1, 1)]);
        let b = IntMatrix::from_rows(&[vec![2, 1, 2, 2], vec![0, 2, 1, 2]]).unwrap();
        let r = validate_assumption_b(&b, &[0, 1]);
        assert!(!r.ok);
        assert!(!r.columns[2].ok);
        assert_eq!(r.columns[2].coord_sum, rat(5, 4));
        let b = IntMatrix::from_rows(&[vec![1, 2]]).unwrap();
        assert!(validate_assumption_b(&b, &[0]).ok);
    }

    #[test]
    fn assumption_a_examples() {
        let a = |v: Vec<Rational>| RatMatrix::from_columns(&v.into_iter().map(|x| vec![x]).collect::<Vec<_>>()).unwrap();
        assert!(validate_assumption_a(&a(vec![rat(1, 1), rat(3, 2)])).ok);
        assert!(!validate_assumption_a(&a(vec![rat(1, 1), rat(1, 1)])).ok);
        assert!(validate_assumption_a(&e3a()).ok);
    }

    #[test]
    fn assumption_a_matches_b_on_e3() {
        let b = IntMatrix::from_rows(&[vec![2, 1, 1, 2], vec![0, 2, 1, 2]]).unwrap();
        let rp = reduce_problem(&b, &[0, 1]).unwrap();
        assert_eq!(validate_assumption_a(&rp.a).ok, validate_assumption_b(&b, &[0, 1]).ok);
    }

    #[test]
    fn hull_examples() {
        let a = RatMatrix::from_columns(&[vec![rat(1, 1)], vec![rat(2, 1)]]).unwrap();
        let h = hull_boundary(&a).unwrap();
        assert_eq!((h.eta, h.tau_a), (vec![1], vec![1]));
        let h = hull_boundary(&RatMatrix::identity(3)).unwrap();
        assert_eq!((h.eta, h.tau_a), (vec![0, 1, 2], vec![0, 1, 2]));
        let h = hull_boundary(&e3a()).unwrap();
        assert_eq!((h.eta, h.tau_a), (vec![0, 1, 3], vec![0, 1, 3]));
        assert_eq!(
            hull_boundary(&RatMatrix::identity(4)),
            Err(Error::UnsupportedDimension(4))
        );
    }

    #[test]
    fn nu_examples() {
        let a = RatMatrix::from_columns(&[vec![rat(1, 1)], vec![rat(3, 4)], vec![rat(3, 2)]]).unwrap();
        let nu = nu_decomposition(&a, &[2], 1).unwrap();
        assert_eq!(nu.nu, vec![(2, rat(1, 2))]);
        assert_eq!(nu.kappa, rat(1, 2));
        let nu = nu_decomposition(&e3a(), &[0, 1, 3], 2).unwrap();
        assert_eq!(nu.nu, vec![(3, rat(1, 2))]);
        assert!(nu.kappa < Rational::one());
        let dup = RatMatrix::from_columns(&[vec![rat(1, 1)], vec![rat(2, 1)], vec![rat(2, 1)]]).unwrap();
        assert_eq!(nu_decomposition(&dup, &[2], 1).unwrap().kappa, Rational::one());
        let neg = RatMatrix::from_columns(&[vec![rat(1, 1)], vec![rat(-1, 1)], vec![rat(2, 1)]]).unwrap();
        assert_eq!(
            nu_decomposition(&neg, &[2], 1),
            Err(Error::InfeasibleDecomposition { column: 1 })
        );
    }

    #[test]
    fn gevrey_examples() {
        assert_eq!(gevrey_index(&e3a()), rat(3, 2));
        let a = RatMatrix::from_columns(&[vec![rat(1, 1)], vec![rat(2, 1)]]).unwrap();
        assert_eq!(gevrey_index(&a), rat(2, 1));
    }

    #[test]
    fn report_kappa_on_e3() {
        let g = geometry_report(&e3a()).unwrap();
        assert_eq!(g.kappa(2), Some(rat(1, 2)));
        assert!(g.assumption.ok);
    }
}
