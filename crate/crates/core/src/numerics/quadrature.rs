//! Double-exponential trapezoid rules with step halving.
//!
//! Half-lines are handled in the log variable `u = ln r` composed with the
//! map `u = t - exp(-t)`; compact intervals use tanh-sinh.

use crate::cycles::{UpsilonCycle, UpsilonPiece};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

pub const MAX_LEVELS_ENV: &str = "GKZ_ASYM_MAX_LEVELS";

/// Where the transformed integrand is considered negligible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    /// Terms below `abs_tol * negligible_fraction` are dropped.
    pub negligible_fraction: f64,
    /// Terms below this fraction of the largest term seen are dropped.
    pub relative_floor: f64,
    /// Number of consecutive negligible terms ending a walk.
    pub consecutive: usize,
    /// Step of the coarsest level.
    pub initial_step: f64,
    /// Hard bound on `|t|` for half-lines.
    pub halfline_t_max: f64,
    /// Hard bound on `|t|` for compact intervals.
    pub interval_t_max: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            negligible_fraction: 1e-2,
            relative_floor: 1e-18,
            consecutive: 3,
            initial_step: 0.5,
            halfline_t_max: 10.0,
            interval_t_max: 4.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_levels: usize,
    pub truncation: TruncationPolicy,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_levels: 10,
            truncation: TruncationPolicy::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Apply the `GKZ_ASYM_MAX_LEVELS` override when set to a valid count.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(n) = std::env::var(MAX_LEVELS_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            self.max_levels = n;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidInput("quadrature tolerances must be positive".into()));
        }
        if self.max_levels < 6 {
            return Err(Error::InvalidInput("max_levels must be at least 6".into()));
        }
        Ok(())
    }

    fn inner(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: (self.rel_tol * 0.1).max(1e-15),
            abs_tol: self.abs_tol * 0.1,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub levels: usize,
    pub evaluations: usize,
}

const MIN_LEVELS: usize = 3;

/// Trapezoid sum of `h(t)` over the real line with walk-out truncation at the
/// coarse step and halving refinement. `h` returns a value and the error of
/// any nested integral it performed.
fn trapezoid<F>(mut h: F, cfg: &QuadratureConfig, t_max: f64, axis: usize) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<(Complex64, f64)>,
{
    let pol = &cfg.truncation;
    let h0 = pol.initial_step;
    let mut evals = 0usize;
    let mut eval = |t: f64, evals: &mut usize| -> Result<(Complex64, f64)> {
        *evals += 1;
        let (v, e) = h(t)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NoConvergence {
                levels: 0,
                estimate: f64::INFINITY,
                axis: Some(axis),
            });
        }
        Ok((v, e))
    };

    let (v0, e0) = eval(0.0, &mut evals)?;
    let mut sum = v0;
    let mut abs_sum = v0.norm();
    let mut err_sum = e0;
    let mut max_abs = v0.norm();
    let abs_thr = cfg.abs_tol * pol.negligible_fraction;
    let k_max = (t_max / h0).ceil() as i64;
    let mut bounds = [0i64; 2];
    for (side, dir) in [1i64, -1].into_iter().enumerate() {
        let mut quiet = 0;
        let mut k = 0;
        while quiet < pol.consecutive && k < k_max {
            k += 1;
            let (v, e) = eval(dir as f64 * k as f64 * h0, &mut evals)?;
            sum += v;
            abs_sum += v.norm();
            err_sum += e;
            max_abs = max_abs.max(v.norm());
            if v.norm() <= abs_thr.max(pol.relative_floor * max_abs) {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        bounds[side] = dir * k;
    }
    let (k_hi, k_lo) = (bounds[0], bounds[1]);
    let t_lo = k_lo as f64 * h0;
    let span = (k_hi - k_lo) as usize;

    let mut step = h0;
    let mut prev = sum * step;
    let mut level = 0usize;
    loop {
        level += 1;
        let n_new = span << (level - 1);
        step *= 0.5;
        for j in 0..n_new {
            let t = t_lo + (2 * j + 1) as f64 * step;
            let (v, e) = eval(t, &mut evals)?;
            sum += v;
            abs_sum += v.norm();
            err_sum += e;
        }
        let cur = sum * step;
        let diff = (cur - prev).norm();
        let roundoff = 16.0 * f64::EPSILON * abs_sum * step;
        let nested = err_sum * step;
        let tol = cfg.abs_tol.max(cfg.rel_tol * cur.norm());
        if level + 1 >= MIN_LEVELS && diff <= tol {
            return Ok(QuadResult {
                value: cur,
                error: diff + roundoff + nested,
                levels: level + 1,
                evaluations: evals,
            });
        }
        if level + 1 >= cfg.max_levels {
            return Err(Error::NoConvergence {
                levels: level + 1,
                estimate: diff + roundoff + nested,
                axis: Some(axis),
            });
        }
        prev = cur;
    }
}

/// `u(t) = t - exp(-t)` and `du/dt`.
fn de_halfline(t: f64) -> (f64, f64) {
    let e = (-t).exp();
    (t - e, 1.0 + e)
}

/// `int_R g(u) du` for `g` decaying exponentially as `u -> -inf` and
/// doubly exponentially as `u -> +inf` (a half-line integrand in `u = ln r`).
pub fn quad_halfline_log<G>(g: G, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    G: Fn(f64) -> Complex64,
{
    quad_halfline_log_nested(|u| Ok((g(u), 0.0)), cfg, 0)
}

fn quad_halfline_log_nested<G>(g: G, cfg: &QuadratureConfig, axis: usize) -> Result<QuadResult>
where
    G: Fn(f64) -> Result<(Complex64, f64)>,
{
    trapezoid(
        |t| {
            let (u, w) = de_halfline(t);
            let (v, e) = g(u)?;
            Ok((v * w, e * w))
        },
        cfg,
        cfg.truncation.halfline_t_max,
        axis,
    )
}

/// `int_0^inf f(r) dr` for `f(r) ~ r^alpha` at 0 and exponential decay at infinity.
pub fn quad_halfline<F>(f: F, alpha: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    if alpha <= -1.0 {
        return Err(Error::EndpointSingularity(alpha));
    }
    cfg.validate()?;
    quad_halfline_log(
        |u| {
            let r = u.exp();
            if r == 0.0 || !r.is_finite() {
                return Complex64::new(0.0, 0.0);
            }
            f(r) * r
        },
        cfg,
    )
}

/// `int_a^b g(x) dx` by tanh-sinh.
pub fn quad_interval<G>(g: G, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    G: Fn(f64) -> Complex64,
{
    quad_interval_nested(|x| Ok((g(x), 0.0)), a, b, cfg, 0)
}

fn quad_interval_nested<G>(g: G, a: f64, b: f64, cfg: &QuadratureConfig, axis: usize) -> Result<QuadResult>
where
    G: Fn(f64) -> Result<(Complex64, f64)>,
{
    let len = b - a;
    trapezoid(
        |t| {
            let s = FRAC_PI_2 * t.sinh();
            let e = (-2.0 * s.abs()).exp();
            // sigma(1 - sigma) for sigma = 1/(1 + exp(-2s))
            let w = e / ((1.0 + e) * (1.0 + e));
            let near = len * e / (1.0 + e);
            let x = if s >= 0.0 { b - near } else { a + near };
            let jac = len * 2.0 * w * FRAC_PI_2 * t.cosh();
            if jac == 0.0 {
                return Ok((Complex64::new(0.0, 0.0), 0.0));
            }
            let (v, err) = g(x)?;
            Ok((v * jac, err * jac))
        },
        cfg,
        cfg.truncation.interval_t_max,
        axis,
    )
}

/// One axis of a nested integral. Parameters passed to the integrand are
/// `u = ln r` for radial axes and `x` for intervals.
pub enum Axis<'a> {
    /// `u` over the real line with measure `du`.
    Line,
    /// `x` in `[a, b]` with measure `dx`.
    Interval(f64, f64),
    /// `u = ln r` with `r > L`, `ln L` given by the outer parameters, measure `du`.
    Above(&'a dyn Fn(&[f64]) -> f64),
}

/// Iterated integral, outermost axis first. Errors carry the failing axis.
pub fn quad_nested(
    axes: &[Axis<'_>],
    f: &dyn Fn(&[f64]) -> Complex64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    let mut params = Vec::with_capacity(axes.len());
    let (value, error, evals) = nested_level(axes, 0, &mut params, f, cfg)?;
    Ok(QuadResult {
        value,
        error,
        levels: 0,
        evaluations: evals,
    })
}

fn nested_level(
    axes: &[Axis<'_>],
    idx: usize,
    params: &mut Vec<f64>,
    f: &dyn Fn(&[f64]) -> Complex64,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64, usize)> {
    if idx == axes.len() {
        return Ok((f(params), 0.0, 1));
    }
    let level_cfg = if idx == 0 { *cfg } else { cfg.inner() };
    let cell = std::cell::RefCell::new((params.clone(), 0usize));
    let inner = |x: f64| -> Result<(Complex64, f64)> {
        let mut st = cell.borrow_mut();
        st.0.truncate(idx);
        st.0.push(x);
        let mut p = std::mem::take(&mut st.0);
        drop(st);
        let r = nested_level(axes, idx + 1, &mut p, f, cfg);
        let mut st = cell.borrow_mut();
        st.0 = p;
        let (v, e, n) = r?;
        st.1 += n;
        Ok((v, e))
    };
    let res = match &axes[idx] {
        Axis::Line => quad_halfline_log_nested(inner, &level_cfg, idx)?,
        Axis::Interval(a, b) => quad_interval_nested(inner, *a, *b, &level_cfg, idx)?,
        Axis::Above(lower) => {
            let ln_l = lower(params);
            // r = L + e^v, dr/r = dv / (1 + L e^{-v})
            quad_halfline_log_nested(
                |v| {
                    let d = ln_l - v;
                    let (u, w) = if d <= 0.0 {
                        (v + d.exp().ln_1p(), 1.0 / (1.0 + d.exp()))
                    } else {
                        (ln_l + (-d).exp().ln_1p(), (-d).exp() / (1.0 + (-d).exp()))
                    };
                    let (val, e) = inner(u)?;
                    Ok((val * w, e * w))
                },
                &level_cfg,
                idx,
            )?
        }
    };
    let evals = cell.borrow().1;
    Ok((res.value, res.error, evals))
}

/// `int_{R>0^d} f(r) dr` as an iterated half-line integral.
pub fn quad_product<F>(f: F, alphas: &[f64], cfg: &QuadratureConfig) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> Complex64,
{
    if alphas.len() > 3 {
        return Err(Error::UnsupportedDimension(alphas.len()));
    }
    if let Some(&a) = alphas.iter().find(|&&a| a <= -1.0) {
        return Err(Error::EndpointSingularity(a));
    }
    let axes: Vec<Axis> = alphas.iter().map(|_| Axis::Line).collect();
    let g = |u: &[f64]| {
        let r: Vec<f64> = u.iter().map(|x| x.exp()).collect();
        if r.iter().any(|&x| x == 0.0 || !x.is_finite()) {
            return Complex64::new(0.0, 0.0);
        }
        f(&r) * r.iter().product::<f64>()
    };
    quad_nested(&axes, &g, cfg)
}

/// Integral over one piece of `Upsilon(epsilon)` of the form
/// `g(ln u) du_1/u_1 ^ ... ^ du_d/u_d`, where `g` receives the logarithms of
/// the coordinates on the universal cover.
pub fn quad_piece<G>(
    cycle: &UpsilonCycle,
    piece: &UpsilonPiece,
    g: G,
    cfg: &QuadratureConfig,
) -> Result<QuadResult>
where
    G: Fn(&[Complex64]) -> Complex64,
{
    let d = cycle.d();
    let a: Vec<f64> = cycle.a.iter().map(crate::rational::rat_to_f64).collect();
    let level = cycle.log_level();
    let eta = &piece.eta;
    let tau = &piece.tau;
    let s_eta: f64 = eta.iter().map(|&j| a[j]).sum();
    let n_free = tau.len().saturating_sub(1);
    let w = cycle.winding.sign();
    if !eta.is_empty() && !(s_eta > 0.0) {
        return Err(Error::ImplicitSolveFailure);
    }

    // parameter layout: free radii (tau minus last), angles (eta), inner radius
    let lower = |p: &[f64]| -> f64 {
        let i = *tau.last().unwrap();
        let free = &tau[..n_free];
        let ln_free = &p[..n_free];
        let rest: f64 = free.iter().zip(ln_free).map(|(&k, l)| a[k] * l).sum();
        if eta.is_empty() {
            return (level - rest) / a[i];
        }
        let mut ln_l = (level - rest) / (s_eta + a[i]);
        for (&k, &lk) in free.iter().zip(ln_free) {
            ln_l = ln_l.max((level - (s_eta + a[k]) * lk - (rest - a[k] * lk)) / a[i]);
        }
        ln_l
    };
    let mut axes: Vec<Axis> = (0..n_free).map(|_| Axis::Line).collect();
    axes.extend(piece.angle_box.iter().map(|&(_, len)| Axis::Interval(0.0, len)));
    if !tau.is_empty() {
        axes.push(Axis::Above(&lower));
    }

    let integrand = |p: &[f64]| -> Complex64 {
        let mut ln_r_tau = Vec::with_capacity(tau.len());
        ln_r_tau.extend_from_slice(&p[..n_free]);
        if !tau.is_empty() {
            ln_r_tau.push(p[p.len() - 1]);
        }
        let mut ln_u = vec![Complex64::new(0.0, 0.0); d];
        for (i, &k) in tau.iter().enumerate() {
            ln_u[k] = Complex64::new(ln_r_tau[i], cycle.ray_arg(k, piece.xi[i]));
        }
        if !eta.is_empty() {
            let ln_rho = cycle.log_rho(eta, tau, &ln_r_tau).unwrap_or(f64::NAN);
            for (i, &j) in eta.iter().enumerate() {
                ln_u[j] = Complex64::new(ln_rho, w * p[n_free + i]);
            }
        }
        g(&ln_u)
    };
    let mut res = quad_nested(&axes, &integrand, cfg)?;
    res.value *= cycle.piece_factor(piece);
    Ok(res)
}
