use gkz_core::cycles::{
    check_condition_arg, choose_delta, sector_of, solve_theta, upsilon_strata, CycleSpec,
};
use gkz_core::exact_lattice::{
    coset_representatives, lambda_membership, omega_set, quotient_order, reduce_problem, IntMatrix,
    RatMatrix,
};
use gkz_core::geometry::{geometry_report, validate_assumption_a, validate_assumption_b};
use gkz_core::numerics::{gamma, log_gamma, quad_halfline, quad_product, QuadratureConfig};
use gkz_core::rational::{rat, rat_to_f64, MixedReal, Rational};
use gkz_core::solver::{
    continue_f_with, eval_a0, eval_a_coeff, eval_f, gevrey_table, ContinuationOptions, PivotRule,
    SolverConfig,
};
use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn b_2x4() -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-4i64..=4, 8).prop_filter_map("singular simplex", |v| {
        let b = IntMatrix::from_rows(&[v[..4].to_vec(), v[4..].to_vec()]).unwrap();
        (b.select_columns(&[0, 1]).det().unwrap() != 0).then_some(b)
    })
}

fn b_sigma_2x2() -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-3i64..=3, 4).prop_filter_map("singular", |v| {
        let m = IntMatrix::from_rows(&[v[..2].to_vec(), v[2..].to_vec()]).unwrap();
        (m.det().unwrap() != 0).then_some(m)
    })
}

/// `(tM)^{-1} v` is integral.
fn in_transpose_lattice(m: &IntMatrix, v: &[i64]) -> bool {
    let inv = m.transpose().to_rational().inverse().unwrap();
    inv.mul_int_vec(v).iter().all(|x| x.is_integer())
}

fn frac(v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| x - x.floor()).collect()
}

fn boxed(len: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_reproduces_b(b in b_2x4()) {
        let rp = reduce_problem(&b, &[0, 1]).unwrap();
        let back = rp.b_sigma.to_rational().mul(&rp.a).unwrap();
        prop_assert_eq!(back, b.select_columns(&rp.column_order).to_rational());
        for k in 0..2 {
            prop_assert_eq!(rp.a.column(k), RatMatrix::identity(2).column(k));
        }
    }

    #[test]
    fn coset_representatives_are_a_transversal(m in b_sigma_2x2()) {
        let reps = coset_representatives(&m).unwrap();
        prop_assert_eq!(reps.len() as i64, m.det().unwrap().abs());
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                let diff: Vec<i64> = reps[i].iter().zip(&reps[j]).map(|(a, b)| a - b).collect();
                prop_assert!(!in_transpose_lattice(&m, &diff));
            }
        }
    }

    #[test]
    fn omega_is_a_maximal_transversal(b in b_2x4()) {
        let rp = reduce_problem(&b, &[0, 1]).unwrap();
        let asb = rp.a_sigma_bar();
        let order = quotient_order(&asb);
        let omega = omega_set(&asb, order).unwrap();
        prop_assert_eq!(omega.len() as u64, order);
        let key = |k: &[u64]| frac(&asb.mul_int_vec(&k.iter().map(|&x| x as i64).collect::<Vec<_>>()));
        let keys: Vec<_> = omega.iter().map(|k| key(k)).collect();
        for i in 0..keys.len() {
            for j in i + 1..keys.len() {
                prop_assert_ne!(&keys[i], &keys[j]);
            }
        }
        for k in boxed(2, order.min(6)) {
            prop_assert!(keys.contains(&key(&k)));
        }
    }

    #[test]
    fn lambda_supports_partition(b in b_2x4()) {
        let rp = reduce_problem(&b, &[0, 1]).unwrap();
        let asb = rp.a_sigma_bar();
        let omega = omega_set(&asb, quotient_order(&asb)).unwrap();
        for q in boxed(2, 5) {
            let hits = omega
                .iter()
                .filter(|k| {
                    let m: Vec<i64> = q.iter().zip(k.iter()).map(|(&a, &b)| a as i64 - b as i64).collect();
                    lambda_membership(k, &m, &asb)
                })
                .count();
            prop_assert_eq!(hits, 1);
        }
    }

    #[test]
    fn theta_solves_the_ray_equations(
        m in b_sigma_2x2(),
        args in prop::collection::vec(-3.0f64..3.0, 2),
        p in prop::collection::vec(-3i64..=3, 2),
        delta in prop::collection::vec(-0.49f64..0.49, 2),
    ) {
        let arg_x: Vec<MixedReal> = args.iter().map(|&a| MixedReal::from_f64(a)).collect();
        let delta: Vec<MixedReal> = delta.iter().map(|&d| MixedReal::from_f64(d)).collect();
        let theta = solve_theta(&m, &[0, 1], &arg_x, &p, &delta).unwrap();
        for k in 0..2 {
            let bk = m.column(k);
            let lhs = arg_x[k].value() + bk.iter().zip(&theta).map(|(b, t)| *b as f64 * t.value()).sum::<f64>();
            let rhs = 1.0 + delta[k].value() + 2.0 * p[k] as f64;
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_shifts_by_even_integers_within_a_coset(
        m in b_sigma_2x2(),
        p in prop::collection::vec(-3i64..=3, 2),
        shift in prop::collection::vec(-2i64..=2, 2),
    ) {
        // p' = p + tB_sigma * shift
        let mt = m.transpose();
        let step = mt.mul_vec(&shift);
        let p2: Vec<i64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
        let arg_x = vec![MixedReal::exact(rat(1, 3)), MixedReal::from_f64(-0.7)];
        let delta = vec![MixedReal::exact(rat(1, 5)); 2];
        let t1 = solve_theta(&m, &[0, 1], &arg_x, &p, &delta).unwrap();
        let t2 = solve_theta(&m, &[0, 1], &arg_x, &p2, &delta).unwrap();
        for k in 0..2 {
            let d = t2[k].value() - t1[k].value();
            prop_assert!((d - 2.0 * shift[k] as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_choice_is_admissible(
        num in prop::collection::vec(1i64..=7, 2),
        den in prop::collection::vec(1i64..=4, 2),
        p in prop::collection::vec(-2i64..=2, 2),
        arg in -4.0f64..4.0,
    ) {
        let a_n: Vec<Rational> = num.iter().zip(&den).map(|(&n, &d)| rat(n, d)).collect();
        prop_assume!(a_n.iter().copied().sum::<Rational>() > Rational::one());
        let a = RatMatrix::from_columns(&[
            vec![Rational::one(), Rational::zero()],
            vec![Rational::zero(), Rational::one()],
            a_n.clone(),
        ]).unwrap();
        let arg = MixedReal::from_f64(arg);
        let delta = choose_delta(&a_n, &p, arg).unwrap();
        prop_assert!(delta.iter().all(|d| d.value().abs() < 0.5 - 1e-9));
        let spec = CycleSpec::new(p.clone(), delta.clone()).unwrap();
        prop_assert!(check_condition_arg(2, &a, arg, &spec));
    }

    #[test]
    fn sector_agrees_with_condition(
        num in 1i64..=9,
        den in 1i64..=4,
        p in -2i64..=2,
        delta in -0.49f64..0.49,
        arg in -4.0f64..4.0,
    ) {
        let a = RatMatrix::from_columns(&[vec![Rational::one()], vec![rat(num, den)]]).unwrap();
        let delta = vec![MixedReal::from_f64(delta)];
        let spec = CycleSpec::new(vec![p], delta.clone()).unwrap();
        let arg = MixedReal::from_f64(arg);
        let sector = sector_of(&a.column(1), &[p], &delta);
        prop_assert_eq!(sector.contains(&arg), check_condition_arg(1, &a, arg, &spec));
    }

    #[test]
    fn upsilon_strata_cover_the_level_set_once(
        a in prop::collection::vec(1i64..=6, 2),
        lr in prop::collection::vec(-3.0f64..3.0, 2),
        eps in 0.05f64..0.5,
    ) {
        let a_n = vec![rat(a[0], 2), rat(a[1], 2)];
        let m = RatMatrix::from_columns(&[
            vec![Rational::one(), Rational::zero()],
            vec![Rational::zero(), Rational::one()],
            a_n.clone(),
        ]).unwrap();
        let cyc = upsilon_strata(eps, &m, &[2, 2]).unwrap();
        prop_assert!(cyc.pieces.iter().all(|p| p.dimension() == 2));
        // push the sample onto the level set along the diagonal
        let af: Vec<f64> = a_n.iter().map(rat_to_f64).collect();
        let t = (cyc.log_level() - af[0] * lr[0] - af[1] * lr[1]) / (af[0] + af[1]);
        let pt = [lr[0] + t, lr[1] + t];
        let strata: [(Vec<usize>, Vec<usize>); 3] = [(vec![0], vec![1]), (vec![1], vec![0]), (vec![0, 1], vec![])];
        let mut owners = 0;
        for (eta, tau) in &strata {
            let ln_tau: Vec<f64> = tau.iter().map(|&k| pt[k]).collect();
            let rho = cyc.log_rho(eta, tau, &ln_tau).unwrap();
            let on = eta.iter().all(|&j| (pt[j] - rho).abs() < 1e-9);
            if on && (tau.is_empty() || cyc.in_region(eta, tau, &ln_tau)) {
                owners += 1;
            }
        }
        prop_assume!((pt[0] - pt[1]).abs() > 1e-6);
        prop_assert_eq!(owners, 1);
        // interior points belong to the open stratum only
        let inner = [pt[0] + 0.1, pt[1] + 0.1];
        prop_assert_eq!(cyc.stratum_of(&inner, 1e-12), Some(vec![]));
        prop_assert!(cyc.in_region(&[], &[0, 1], &inner));
    }

    #[test]
    fn log_gamma_recurrence(re in -10.0f64..10.0, im in -10.0f64..10.0) {
        let z = Complex64::new(re, im);
        prop_assume!(im.abs() > 1e-3 || (re - re.round()).abs() > 1e-3);
        let step = (log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap()).exp();
        prop_assert!((step - z).norm() <= 1e-10 * z.norm());
    }

    #[test]
    fn gamma_reflection(re in -6.0f64..6.0, im in -3.0f64..3.0) {
        let z = Complex64::new(re, im);
        prop_assume!(im.abs() > 1e-2 || (re - re.round()).abs() > 1e-2);
        let v = gamma(z).unwrap() * gamma(1.0 - z).unwrap() * (PI * z).sin() / PI;
        prop_assert!((v - c(1.0)).norm() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn quadrature_without_y_is_gamma(
        d in 1usize..=2,
        re in prop::collection::vec(-3.0f64..-0.1, 2),
        im in prop::collection::vec(-1.0f64..1.0, 2),
        p in prop::collection::vec(-1i64..=1, 2),
    ) {
        let b = IntMatrix::identity(d);
        let sigma: Vec<usize> = (0..d).collect();
        let rp = reduce_problem(&b, &sigma).unwrap();
        let beta: Vec<Complex64> = (0..d).map(|k| Complex64::new(re[k], im[k])).collect();
        let spec = CycleSpec::new(p[..d].to_vec(), vec![MixedReal::zero(); d]).unwrap();
        let cfg = SolverConfig::default().with_quad(QuadratureConfig::default().with_rel_tol(1e-12));
        let f = eval_f(&rp, &spec, &beta, &[], &cfg).unwrap().value;
        let want = eval_a0(&p[..d], &beta).unwrap();
        prop_assert!((f - want).norm() <= 1e-9 * want.norm());
    }

    #[test]
    fn recursion_orders_agree(
        b1 in 0.1f64..1.4,
        b2 in -1.5f64..-0.2,
        y2 in 0.05f64..0.4,
    ) {
        let b = IntMatrix::from_rows(&[vec![2, 1, 1, 2], vec![0, 2, 1, 2]]).unwrap();
        let rp = reduce_problem(&b, &[0, 1]).unwrap();
        let delta = choose_delta(&rp.a_n(), &[0, 0], MixedReal::from_int(1)).unwrap();
        let spec = CycleSpec::new(vec![0, 0], delta).unwrap();
        let beta = [c(b1), c(b2)];
        prop_assume!((2.0 * b1 - (2.0 * b1).round()).abs() > 1e-3);
        let y = [c(y2), c(-0.5)];
        let cfg = SolverConfig::default().with_quad(QuadratureConfig::default().with_rel_tol(1e-12));
        let run = |pivot, extra_depth| {
            continue_f_with(&rp, &spec, &beta, &y, ContinuationOptions { pivot, extra_depth }, &cfg)
                .unwrap()
                .value
        };
        let a = run(PivotRule::MaxRealPart, 0);
        let b = run(PivotRule::LowestIndex, 1);
        prop_assert!((a - b).norm() < 1e-7 * a.norm());
    }
}

#[test]
fn assumption_b_agrees_with_reduced_check() {
    let mut checked = 0;
    let mut v = [0i64; 8];
    loop {
        let b = IntMatrix::from_rows(&[v[..4].to_vec(), v[4..].to_vec()]).unwrap();
        if b.select_columns(&[0, 1]).det().unwrap() != 0 {
            let rp = reduce_problem(&b, &[0, 1]).unwrap();
            let lhs = validate_assumption_b(&b, &[0, 1]).ok;
            let rhs = validate_assumption_a(&rp.a).ok;
            assert_eq!(lhs, rhs, "{b:?}");
            checked += 1;
        }
        let mut i = 0;
        while i < 8 {
            v[i] += 1;
            if v[i] <= 4 {
                break;
            }
            v[i] = 0;
            i += 1;
        }
        if i == 8 {
            break;
        }
    }
    assert!(checked > 100_000);
}

#[test]
fn kappa_dichotomy_and_vertex_inclusion() {
    let mut seen = 0;
    for cols in boxed(4, 4) {
        // third and fourth columns of a 2x4 matrix over the simplex e1, e2 scaled by 4
        let (c3, c4) = ((cols[0] as i64, cols[1] as i64), (cols[2] as i64, cols[3] as i64));
        let b = IntMatrix::from_rows(&[vec![4, 0, c3.0, c4.0], vec![0, 4, c3.1, c4.1]]).unwrap();
        if !validate_assumption_b(&b, &[0, 1]).ok {
            continue;
        }
        let rp = reduce_problem(&b, &[0, 1]).unwrap();
        let g = geometry_report(&rp.a).unwrap();
        assert!(g.eta.iter().all(|j| g.tau_a.contains(j)));
        for j in 2..rp.n() {
            if g.eta.contains(&j) {
                continue;
            }
            let kappa = g.kappa(j).unwrap();
            if g.tau_a.contains(&j) {
                assert_eq!(kappa, Rational::one(), "{b:?} column {j}");
            } else {
                assert!(kappa < Rational::one(), "{b:?} column {j}");
            }
        }
        assert!(g.tau_a.contains(&(rp.n() - 1)));
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn halfline_error_estimate_is_conservative() {
    let cfg = QuadratureConfig::default();
    for i in 0..=39 {
        let alpha = -0.9 + 0.1 * i as f64;
        let r = quad_halfline(|x| c(x.powf(alpha) * (-x).exp()), alpha, &cfg).unwrap();
        let want = gamma(c(alpha + 1.0)).unwrap();
        assert!((r.value - want).norm() <= r.error.max(1e-15 * want.norm()), "alpha {alpha}");
    }
}

#[test]
fn product_rule_is_axis_order_invariant() {
    let cfg = QuadratureConfig::default();
    let f = |r: &[f64]| c(r[0].powf(-0.3) * r[1].powf(0.6) * (-r[0] - 2.0 * r[1] - r[0] * r[1]).exp());
    let g = |r: &[f64]| f(&[r[1], r[0]]);
    let a = quad_product(f, &[-0.3, 0.6], &cfg).unwrap().value;
    let b = quad_product(g, &[0.6, -0.3], &cfg).unwrap().value;
    assert!((a - b).norm() < 10.0 * cfg.rel_tol * a.norm());
}

#[test]
fn series_supports_are_disjoint() {
    let b = IntMatrix::from_rows(&[vec![2, 1, 1, 2], vec![0, 2, 1, 2]]).unwrap();
    let rp = reduce_problem(&b, &[0, 1]).unwrap();
    let asb = rp.a_sigma_bar();
    let omega = omega_set(&asb, quotient_order(&asb)).unwrap();
    let beta = [c(-0.3), c(-0.45)];
    let tables: Vec<_> = omega.iter().map(|k| gevrey_table(k, &beta, &rp, 8).unwrap()).collect();
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            for q in &tables[i].support {
                assert!(!tables[j].coefficients.contains_key(q));
            }
        }
    }
}

#[test]
fn gevrey_growth_of_index_two_expansion() {
    let b = IntMatrix::from_rows(&[vec![2, 3]]).unwrap();
    let rp = reduce_problem(&b, &[0]).unwrap();
    let beta = [c(-0.3)];
    let coeff: Vec<f64> = (0..=31).map(|m| eval_a_coeff(&rp, &[0], &beta, m, &[], 0).unwrap().norm()).collect();
    let r1: Vec<f64> = (0..31).map(|m| coeff[m + 1] / ((m + 1) as f64 * coeff[m])).collect();
    let r2: Vec<f64> = (0..31).map(|m| coeff[m + 1] / (((m + 1) as f64).powi(2) * coeff[m])).collect();
    // first ratio keeps increasing, second stays bounded
    assert!(r1.windows(2).skip(3).all(|w| w[1] > w[0]));
    assert!(r1[30] > 2.0 * r1[5]);
    assert!(r2.iter().all(|&v| v < 2.0));
    assert!(r2.windows(2).skip(3).all(|w| w[1] < w[0]));
}
