//! Global invertibility: uniform positivity exponents on compact probe
//! families, the 1D monotone-cutoff construction with a bracketing/Newton
//! inverse, Hadamard properness certificates, Hadamard-Levy norm-bound
//! certificates, and a homotopy-continuation global inverse evaluator.

use crate::error::GsfError;
use crate::expr::{Expr, PolyKernel};
use crate::gen_num::{GenNum, GenPoint};
use crate::gsf_fn::Gsf;
use crate::local_inverse::is_nondegenerate;
use crate::logval::Mag;
use crate::probes;
use crate::quad;
use crate::sets::SetNet;
use crate::verdict::Verdict;
use serde::Serialize;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GlobalKind {
    OneD,
    Hadamard,
    HadamardLevy,
}

/// Inverse-Jacobian norm bound families with analytically divergent
/// integral of 1/beta: constants and affine growth.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum Beta {
    Constant(f64),
    Affine { a: f64, b: f64 },
}

impl Beta {
    fn at(&self, s: f64) -> f64 {
        match *self {
            Beta::Constant(c) => c,
            Beta::Affine { a, b } => a + b * s,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalCert {
    pub kind: GlobalKind,
    /// Lower bound on |f'| (1D case; possibly 0).
    pub r: f64,
    /// C with ||f_eps(0)|| <= C across the grid.
    pub c_bound: f64,
    /// Surjectivity onto compactly supported points.
    pub surjective_csp: bool,
    /// (R_j, inf over eps and |x| = R_j of ||f_eps(x)||).
    pub properness_table: Vec<(f64, f64)>,
    pub beta: Option<Beta>,
}

/// Smallest integer q <= m_max such that min over probes x of A_eps of
/// |f_eps(x)| exceeds rho_eps^q on the tail.
pub fn uniform_positivity_exponent(f: &Gsf, set: &SetNet) -> Result<i64, GsfError> {
    let ctx = &f.ctx;
    let count = ctx.cfg.probes_per_dim * f.arity.max(1);
    let mut mins = Vec::with_capacity(ctx.grid.len());
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        let pts = set
            .shape
            .sample_points(eps, count)
            .ok_or_else(|| GsfError::PositivityFailure("unbounded probe set".into()))?;
        let mut min = f64::INFINITY;
        for p in &pts {
            let mut sq = 0.0;
            for j in 0..f.dim_out {
                let v = f.comp(i, j).eval(p, eps);
                sq += v * v;
            }
            min = min.min(sq.sqrt());
        }
        if !(min > 0.0) {
            return Err(GsfError::PositivityFailure(format!(
                "pointwise positivity fails at eps = {:.3e} (min {:.3e})",
                eps, min
            )));
        }
        mins.push(min);
    }
    for q in 0..=ctx.cfg.m_max {
        let ok = ctx
            .grid
            .tail_indices()
            .all(|i| mins[i] > ctx.gauge.rho(ctx.grid.points[i]).powi(q as i32));
        if ok {
            return Ok(q as i64);
        }
    }
    Err(GsfError::PositivityFailure(format!(
        "no exponent q <= {} works (tail min {:.3e})",
        ctx.cfg.m_max,
        ctx.grid.tail_indices().map(|i| mins[i]).fold(f64::INFINITY, f64::min)
    )))
}

/// Cutoff window size at a grid index: ceil(log2(1/eps)) capped at 8.
fn n_at(f: &Gsf, i: usize) -> f64 {
    let eps = f.ctx.grid.points[i];
    ((1.0 / eps).log2().ceil()).clamp(1.0, 8.0)
}

/// Smooth plateau cutoff: 1 on [-n, n], supported in [-(n+1), n+1], built
/// from two integrated smooth steps.
fn phi_expr(n: f64, step: &Arc<PolyKernel>) -> Expr {
    let x = Expr::var(0);
    let up = Expr::PolyBumpInt {
        kernel: step.clone(),
        arg: Expr::Add(
            Expr::Mul(Expr::c(2.0).boxed(), Expr::Add(x.clone().boxed(), Expr::c(n).boxed()).boxed())
                .boxed(),
            Expr::c(1.0).boxed(),
        )
        .boxed(),
    };
    let down = Expr::PolyBumpInt {
        kernel: step.clone(),
        arg: Expr::Add(
            Expr::Mul(Expr::c(2.0).boxed(), Expr::Sub(Expr::c(n).boxed(), x.boxed()).boxed())
                .boxed(),
            Expr::c(1.0).boxed(),
        )
        .boxed(),
    };
    Expr::Mul(up.boxed(), down.boxed())
}

const MONOTONE_NODES: usize = 60;

/// Derivative replacement v(t) = f'(t) phi_n(t) + 1 - phi_n(t).
fn monotone_density(f: &Gsf, i: usize, n: f64, step: &Arc<PolyKernel>) -> Expr {
    let phi = phi_expr(n, step);
    let d = f.comp(i, 0).diff(0);
    Expr::Add(
        Expr::Mul(d.boxed(), phi.clone().boxed()).boxed(),
        Expr::Sub(Expr::c(1.0).boxed(), phi.boxed()).boxed(),
    )
}

/// Thm-12 style modified net: fbar(x) = f(0) + int_0^x v(t) dt with the
/// integral realized by Gauss-Legendre nodes embedded in the expression.
pub fn build_monotone_net_1d(f: &Gsf) -> Result<Gsf, GsfError> {
    assert_eq!(f.arity, 1);
    assert_eq!(f.dim_out, 1);
    let ctx = f.ctx.clone();
    let step = PolyKernel::unit_step();
    let gl = quad::rule(MONOTONE_NODES);
    let count = ctx.cfg.probes_per_dim;
    let mut per_eps = Vec::with_capacity(ctx.grid.len());
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        let n = n_at(f, i);
        let d = f.comp(i, 0).diff(0);
        // constant sign of f' inside the window (positive orientation)
        for p in probes::in_box(&[-n], &[n], count) {
            if !(d.eval(&p, eps) > 0.0) {
                return Err(GsfError::SignChange(format!(
                    "f' <= 0 at x = {:.6} (eps = {:.3e})",
                    p[0], eps
                )));
            }
        }
        let f0 = f.comp(i, 0).eval(&[0.0], eps);
        let v = monotone_density(f, i, n, &step);
        // int_0^x v = x * sum_j (w_j/2) v(x (t_j+1)/2)
        let mut sum = Expr::c(0.0);
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            let s = 0.5 * (t + 1.0);
            let term = v.subst(&[Expr::Mul(Expr::var(0).boxed(), Expr::c(s).boxed())]);
            sum = Expr::Add(
                sum.boxed(),
                Expr::Mul(Expr::c(0.5 * w).boxed(), term.boxed()).boxed(),
            );
        }
        let fbar = Expr::Add(
            Expr::c(f0).boxed(),
            Expr::Mul(Expr::var(0).boxed(), sum.boxed()).boxed(),
        );
        // the replacement derivative must be positive everywhere probed,
        // including beyond the window
        for p in probes::in_box(&[-(n + 4.0)], &[n + 4.0], count) {
            let dv = v.eval(&p, eps);
            if !(dv > 0.0) {
                return Err(GsfError::SignChange(format!(
                    "modified derivative nonpositive at x = {:.6} (eps = {:.3e})",
                    p[0], eps
                )));
            }
        }
        per_eps.push(vec![fbar]);
    }
    Ok(Gsf::new_per_eps(ctx, per_eps, format!("monotone[{}]", f.label)))
}

/// 1D global inverse package: the certificate, the original net, and the
/// monotone-modified net actually inverted.
#[derive(Clone, Debug)]
pub struct GlobalInverse1D {
    pub cert: GlobalCert,
    pub f: Gsf,
    pub fbar: Gsf,
}

pub fn global_1d_invert(f: &Gsf, r: f64) -> Result<GlobalInverse1D, GsfError> {
    let ctx = f.ctx.clone();
    let count = ctx.cfg.probes_per_dim;
    // |f'| > r on a compact exhaustion, per tail eps
    for i in ctx.grid.tail_indices() {
        let eps = ctx.grid.points[i];
        let n = n_at(f, i);
        let d = f.comp(i, 0).diff(0);
        for p in probes::in_box(&[-n], &[n], count) {
            let dv = d.eval(&p, eps).abs();
            let ok = if r > 0.0 { dv >= r } else { dv > 0.0 };
            if !ok {
                return Err(GsfError::PositivityFailure(format!(
                    "|f'| = {:.3e} at x = {:.6} not above r = {} (eps = {:.3e})",
                    dv, p[0], r, eps
                )));
            }
        }
    }
    let fbar = build_monotone_net_1d(f)?;
    let c_bound = ctx
        .grid
        .points
        .iter()
        .enumerate()
        .map(|(i, &eps)| f.comp(i, 0).eval(&[0.0], eps).abs())
        .fold(0.0f64, f64::max);
    let cert = GlobalCert {
        kind: GlobalKind::OneD,
        r,
        c_bound,
        surjective_csp: r > 0.0,
        properness_table: Vec::new(),
        beta: None,
    };
    Ok(GlobalInverse1D { cert, f: f.clone(), fbar })
}

impl GlobalInverse1D {
    /// Inverse per eps by monotone bracketing plus safeguarded Newton;
    /// returns (g(y), floored residual net, negligibility verdict).
    pub fn eval(&self, y: &GenNum) -> Result<(GenNum, GenNum, Verdict), GsfError> {
        let ctx = self.fbar.ctx.clone();
        let step = PolyKernel::unit_step();
        let mut xs = Vec::with_capacity(ctx.grid.len());
        let mut residuals = Vec::with_capacity(ctx.grid.len());
        for (i, &eps) in ctx.grid.points.iter().enumerate() {
            let y_lin = y.samples[i].lin;
            let g = self.fbar.comp(i, 0);
            let n = n_at(&self.f, i);
            let dv = monotone_density(&self.f, i, n, &step);
            let eval = |x: f64| g.eval(&[x], eps);
            // expand a bracket around 0
            let (mut lo, mut hi) = (-1.0f64, 1.0f64);
            let mut k = 0;
            while eval(lo) > y_lin {
                lo *= 2.0;
                k += 1;
                if k > 60 {
                    return Err(GsfError::Numeric("bracket expansion failed (low)".into()));
                }
            }
            k = 0;
            while eval(hi) < y_lin {
                hi *= 2.0;
                k += 1;
                if k > 60 {
                    return Err(GsfError::Numeric("bracket expansion failed (high)".into()));
                }
            }
            // tolerance on x: the residual is compared against the local
            // slope so infinitesimal-slope nets are still located sharply
            let tol_x = ctx
                .gauge
                .rho(eps)
                .powi(ctx.cfg.q_tol as i32)
                .max(ctx.cfg.numeric_floor);
            let mut x = 0.5 * (lo + hi);
            let mut res = eval(x) - y_lin;
            let mut located = false;
            for _ in 0..300 {
                let slope = dv.eval(&[x], eps);
                if res.abs() <= tol_x * slope.abs().max(f64::MIN_POSITIVE) {
                    located = true;
                    break;
                }
                if res > 0.0 {
                    hi = x;
                } else {
                    lo = x;
                }
                let newton = x - res / slope;
                x = if slope > 0.0 && newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
                res = eval(x) - y_lin;
            }
            if !located {
                return Err(GsfError::NewtonStagnation(format!(
                    "1D inverse: residual {:.3e} not localized at eps = {:.3e}",
                    res.abs(),
                    eps
                )));
            }
            if self.cert.r > 0.0 {
                let bound = (y_lin.abs() + self.cert.c_bound) / self.cert.r;
                if x.abs() > bound * (1.0 + 1e-12) {
                    return Err(GsfError::BoundViolation {
                        eps,
                        x: x.abs(),
                        msg: format!("surjectivity bound (|y|+C)/r = {:.6e}", bound),
                    });
                }
            }
            xs.push(x);
            residuals.push(res.abs());
        }
        let out = GenNum::from_mags(
            ctx.clone(),
            format!("{}^-1(y)", self.f.label),
            xs.iter().map(|&v| Mag::from_f64(v)).collect(),
        );
        let residual = GenNum::from_linear_floored(ctx, "inverse residual", &residuals);
        let verdict = residual.is_negligible();
        Ok((out, residual, verdict))
    }

    /// Moderateness of the inverse derivatives up to order 3 at y, through
    /// the reciprocal/chain formulas evaluated at x = g(y).
    pub fn inverse_derivatives_moderate(&self, y: &GenNum) -> Result<Vec<Verdict>, GsfError> {
        let (x, _, _) = self.eval(y)?;
        let ctx = self.fbar.ctx.clone();
        let step = PolyKernel::unit_step();
        let mut g1 = Vec::new();
        let mut g2 = Vec::new();
        let mut g3 = Vec::new();
        for (i, &eps) in ctx.grid.points.iter().enumerate() {
            let n = n_at(&self.f, i);
            let v = monotone_density(&self.f, i, n, &step);
            let v1 = v.diff(0);
            let v2 = v1.diff(0);
            let p = [x.samples[i].lin];
            let (a, b, c) = (v.eval(&p, eps), v1.eval(&p, eps), v2.eval(&p, eps));
            g1.push(1.0 / a);
            g2.push(-b / a.powi(3));
            g3.push((3.0 * b * b - a * c) / a.powi(5));
        }
        let mk = |label: &str, vals: &[f64]| {
            GenNum::from_mags(
                ctx.clone(),
                label,
                vals.iter().map(|&v| Mag::from_f64(v)).collect(),
            )
            .is_moderate()
        };
        Ok(vec![mk("g'", &g1), mk("g''", &g2), mk("g'''", &g3)])
    }
}

/// Deterministic direction set on the unit sphere (axes plus low-discrepancy
/// directions), scaled to radius R.
fn sphere_probes(dim: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for a in 0..dim {
        for sgn in [1.0, -1.0] {
            let mut p = vec![0.0; dim];
            p[a] = sgn * radius;
            out.push(p);
        }
    }
    for q in probes::unit_cube(count, dim) {
        let d: Vec<f64> = q.iter().map(|&u| 2.0 * u - 1.0).collect();
        let norm: f64 = d.iter().map(|u| u * u).sum::<f64>().sqrt();
        if norm > 1e-9 {
            out.push(d.iter().map(|&u| u / norm * radius).collect());
        }
    }
    out
}

/// Hadamard certificate: Jacobian invertibility on probes plus the
/// properness table over radii R_j = 2^j.
pub fn hadamard_certificate(f: &Gsf, j_max: usize) -> Result<GlobalCert, GsfError> {
    let ctx = f.ctx.clone();
    let n = f.arity;
    assert_eq!(f.dim_out, n);
    let count = ctx.cfg.probes_per_dim * n;
    // classical per-eps determinant check on a probe cloud
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        for p in probes::ball(&vec![0.0; n], 2.0, count) {
            let j = nalgebra::DMatrix::from_fn(n, n, |r, c| {
                let mut alpha = vec![0; n];
                alpha[c] = 1;
                f.comp(i, r).diff_multi(&alpha).eval(&p, eps)
            });
            let det = j.lu().determinant();
            if det == 0.0 || !det.is_finite() {
                return Err(GsfError::Degenerate {
                    verdict: Verdict::no(
                        crate::verdict::Witness::None,
                        format!("det Df = 0 at x = {:?}, eps = {:.3e}", p, eps),
                    ),
                });
            }
        }
    }
    // generalized nondegeneracy at a few probe points
    for p in probes::ball(&vec![0.0; n], 1.0, 8) {
        let gp = GenPoint::new(
            p.iter().map(|&v| GenNum::constant(ctx.clone(), v)).collect(),
        );
        let v = is_nondegenerate(&f.jacobian(&gp));
        if !v.is_true() {
            return Err(GsfError::Degenerate { verdict: v });
        }
    }
    let mut table = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let radius = (2.0f64).powi(j as i32);
        let mut inf = f64::INFINITY;
        for (i, &eps) in ctx.grid.points.iter().enumerate() {
            for p in sphere_probes(n, radius, count) {
                let mut sq = 0.0;
                for r in 0..n {
                    let v = f.comp(i, r).eval(&p, eps);
                    sq += v * v;
                }
                inf = inf.min(sq.sqrt());
            }
        }
        table.push((radius, inf));
    }
    // plateau detection on the last steps of the table
    for w in table.windows(2).rev().take(2) {
        if w[1].1 < w[0].1 * 1.05 {
            return Err(GsfError::NotProper(w[0].0));
        }
    }
    Ok(GlobalCert {
        kind: GlobalKind::Hadamard,
        r: 0.0,
        c_bound: ctx
            .grid
            .points
            .iter()
            .enumerate()
            .map(|(i, &eps)| {
                (0..n)
                    .map(|r| f.comp(i, r).eval(&vec![0.0; n], eps).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max),
        surjective_csp: true,
        properness_table: table,
        beta: None,
    })
}

/// Hadamard-Levy certificate: ||Df_eps(x)^{-1}|| <= beta(||x||) on probes,
/// with surjectivity onto compactly supported points for constant beta.
pub fn hadamard_levy_certificate(f: &Gsf, beta: Beta) -> Result<GlobalCert, GsfError> {
    let ctx = f.ctx.clone();
    let n = f.arity;
    assert_eq!(f.dim_out, n);
    let count = ctx.cfg.probes_per_dim * n;
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        for radius in [1.0, 4.0, 16.0, 64.0] {
            for p in probes::in_box(&vec![-radius; n], &vec![radius; n], count) {
                let j = nalgebra::DMatrix::from_fn(n, n, |r, c| {
                    let mut alpha = vec![0; n];
                    alpha[c] = 1;
                    f.comp(i, r).diff_multi(&alpha).eval(&p, eps)
                });
                let sv = j.singular_values();
                let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
                let norm_x = p.iter().map(|u| u * u).sum::<f64>().sqrt();
                if smin <= 0.0 || !smin.is_finite() {
                    return Err(GsfError::Degenerate {
                        verdict: Verdict::no(
                            crate::verdict::Witness::None,
                            format!("Df singular at |x| = {:.3e}, eps = {:.3e}", norm_x, eps),
                        ),
                    });
                }
                let inv_norm = 1.0 / smin;
                let allowed = beta.at(norm_x);
                if inv_norm > allowed * (1.0 + 1e-9) {
                    return Err(GsfError::BoundViolation {
                        eps,
                        x: norm_x,
                        msg: format!(
                            "||Df^-1|| = {:.6e} above beta = {:.6e}",
                            inv_norm, allowed
                        ),
                    });
                }
            }
        }
    }
    Ok(GlobalCert {
        kind: GlobalKind::HadamardLevy,
        r: 0.0,
        c_bound: match beta {
            Beta::Constant(c) => c,
            Beta::Affine { .. } => 0.0,
        },
        surjective_csp: matches!(beta, Beta::Constant(_)),
        properness_table: Vec::new(),
        beta: Some(beta),
    })
}

/// Homotopy continuation per eps: follow f(x(t)) = (1-t) f(0) + t y with
/// Newton correction, adaptively refining from 16 up to 1024 steps.
pub fn global_inverse_eval(
    f: &Gsf,
    cert: &GlobalCert,
    y: &GenPoint,
) -> Result<(GenPoint, GenNum, Verdict), GsfError> {
    assert!(matches!(cert.kind, GlobalKind::Hadamard | GlobalKind::HadamardLevy));
    let ctx = f.ctx.clone();
    let n = f.arity;
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(ctx.grid.len());
    let mut residuals = Vec::with_capacity(ctx.grid.len());
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        let y_lin = y.lin_at(i);
        let partials: Vec<_> = (0..n)
            .flat_map(|r| {
                (0..n).map(move |c| {
                    let mut alpha = vec![0; n];
                    alpha[c] = 1;
                    f.comp(i, r).diff_multi(&alpha)
                })
            })
            .collect();
        let eval_f = |x: &[f64]| -> Vec<f64> {
            (0..n).map(|r| f.comp(i, r).eval(x, eps)).collect()
        };
        let f0 = eval_f(&vec![0.0; n]);
        let tol = ctx
            .gauge
            .rho(eps)
            .powi(ctx.cfg.q_tol as i32)
            .max(ctx.cfg.numeric_floor)
            * (1.0 + y_lin.iter().map(|u| u * u).sum::<f64>().sqrt());
        let mut steps = 16usize;
        let mut solved = None;
        'attempt: while steps <= 1024 {
            let mut x = vec![0.0; n];
            for s in 1..=steps {
                let t = s as f64 / steps as f64;
                let target: Vec<f64> = f0
                    .iter()
                    .zip(&y_lin)
                    .map(|(a, b)| (1.0 - t) * a + t * b)
                    .collect();
                let mut converged = false;
                for _ in 0..50 {
                    let fx = eval_f(&x);
                    let res: f64 = fx
                        .iter()
                        .zip(&target)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    if res <= tol {
                        converged = true;
                        break;
                    }
                    let jm = nalgebra::DMatrix::from_fn(n, n, |r, c| {
                        partials[r * n + c].eval(&x, eps)
                    });
                    let rhs = nalgebra::DVector::from_iterator(
                        n,
                        fx.iter().zip(&target).map(|(a, b)| a - b),
                    );
                    match jm.lu().solve(&rhs) {
                        Some(step) => {
                            for (xi, si) in x.iter_mut().zip(step.iter()) {
                                *xi -= si;
                            }
                        }
                        None => break,
                    }
                }
                if !converged {
                    steps *= 2;
                    continue 'attempt;
                }
            }
            solved = Some(x);
            break;
        }
        let x = solved.ok_or_else(|| {
            GsfError::Continuation(format!(
                "no step count up to 1024 converged at eps = {:.3e}",
                eps
            ))
        })?;
        let fx = eval_f(&x);
        let res: f64 = fx
            .iter()
            .zip(&y_lin)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        xs.push(x);
        residuals.push(res);
    }
    let coords = (0..n)
        .map(|k| {
            GenNum::from_mags(
                ctx.clone(),
                format!("g(y)[{}]", k),
                xs.iter().map(|x| Mag::from_f64(x[k])).collect(),
            )
        })
        .collect();
    let residual = GenNum::from_linear_floored(ctx, "continuation residual", &residuals);
    let verdict = residual.is_negligible();
    Ok((GenPoint::new(coords), residual, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::gauge::Context;

    fn gsf(src: &str) -> Gsf {
        Gsf::from_str_1d(Context::default_ctx(), src).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, y: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn positivity_exponents() {
        let ctx = Context::default_ctx();
        let one = gsf("1");
        let a = SetNet::interval(Expr::c(-1.0), Expr::c(1.0));
        assert_eq!(uniform_positivity_exponent(&one, &a).unwrap(), 1);
        let shifted = gsf("x^2 + eps");
        assert_eq!(uniform_positivity_exponent(&shifted, &a).unwrap(), 2);
        let bad = Gsf::from_str_1d(ctx, "x").unwrap();
        assert!(matches!(
            uniform_positivity_exponent(&bad, &a),
            Err(GsfError::PositivityFailure(_))
        ));
    }

    #[test]
    fn monotone_net_agrees_inside_window() {
        let f = gsf("x + sin(x)/2");
        let fbar = build_monotone_net_1d(&f).unwrap();
        let ctx = f.ctx.clone();
        for i in ctx.grid.tail_indices() {
            let eps = ctx.grid.points[i];
            let n = super::n_at(&f, i);
            for x in [-n, -0.5 * n, 0.0, 1.0, 0.9 * n] {
                let a = f.comp(i, 0).eval(&[x], eps);
                let b = fbar.comp(i, 0).eval(&[x], eps);
                assert!((a - b).abs() <= 1e-9, "x = {}: {} vs {}", x, a, b);
            }
        }
    }

    #[test]
    fn monotone_net_positive_derivative_outside() {
        // f' = 1 - 2x e^{-x^2} dips but stays positive; the modified
        // derivative must be positive at every probe, including far out
        let f = gsf("x + exp(-(x^2))");
        let fbar = build_monotone_net_1d(&f).unwrap();
        let ctx = f.ctx.clone();
        let step = PolyKernel::unit_step();
        for i in ctx.grid.tail_indices().take(2) {
            let eps = ctx.grid.points[i];
            let n = super::n_at(&f, i);
            let v = super::monotone_density(&f, i, n, &step);
            for x in [-20.0, -n - 0.5, 0.3, n + 0.5, 20.0] {
                assert!(v.eval(&[x], eps) > 0.0, "x = {}", x);
            }
        }
        drop(fbar);
    }

    #[test]
    fn linear_inverse_exact() {
        let inv = global_1d_invert(&gsf("2*x"), 2.0).unwrap();
        let y = GenNum::constant(Context::default_ctx(), 3.0);
        let (x, _, v) = inv.eval(&y).unwrap();
        assert!(v.is_true());
        // y/2 up to the rounding of the embedded quadrature weight sum
        assert!(x.samples.iter().all(|m| (m.lin - 1.5).abs() <= 1e-14));
    }

    #[test]
    fn sine_perturbed_inverse_matches_bisection() {
        let f = gsf("x + sin(x)/2");
        let inv = global_1d_invert(&f, 0.5).unwrap();
        assert!(inv.cert.surjective_csp);
        let y = GenNum::constant(Context::default_ctx(), std::f64::consts::PI);
        let (x, _, v) = inv.eval(&y).unwrap();
        assert!(v.is_true());
        let oracle = bisect(|t| t + 0.5 * t.sin(), std::f64::consts::PI, 0.0, 4.0);
        for m in &x.samples {
            assert!((m.lin - oracle).abs() <= 1e-12, "{} vs {}", m.lin, oracle);
        }
        // containment in the certified bound (|y|+C)/r, sample-by-sample
        let bound = (std::f64::consts::PI + inv.cert.c_bound) / inv.cert.r;
        assert!(x.samples.iter().all(|m| m.lin <= bound));
        let mods = inv.inverse_derivatives_moderate(&y).unwrap();
        assert!(mods.iter().all(Verdict::is_true));
    }

    #[test]
    fn infinitesimal_slope_no_surjectivity() {
        let inv = global_1d_invert(&gsf("eps * x"), 0.0).unwrap();
        assert!(!inv.cert.surjective_csp);
        // still invertible onto its image: y = eps recovers x = 1
        let y = GenNum::from_net_str(Context::default_ctx(), "eps").unwrap();
        let (x, _, _) = inv.eval(&y).unwrap();
        for m in &x.samples {
            assert!((m.lin - 1.0).abs() <= 1e-9, "{}", m.lin);
        }
    }

    #[test]
    fn hadamard_table_shapes() {
        let ctx = Context::default_ctx();
        let id2 = Gsf::new_uniform(
            ctx.clone(),
            vec![Expr::var(0), Expr::var(1)],
            "identity",
        );
        let cert = hadamard_certificate(&id2, 6).unwrap();
        for (r, v) in &cert.properness_table {
            assert!((v - r).abs() <= 1e-9);
        }
        let cubic = Gsf::new_uniform(
            ctx.clone(),
            vec![
                parse_expr("x1 + x1^3").unwrap(),
                parse_expr("x2 + x2^3").unwrap(),
            ],
            "cubic",
        );
        let cert = hadamard_certificate(&cubic, 6).unwrap();
        let (r_last, v_last) = *cert.properness_table.last().unwrap();
        // worst direction is the diagonal: norm ~ R^3 / 2
        assert!(v_last >= r_last.powi(3) * 0.4, "{} at {}", v_last, r_last);
        let flat = Gsf::new_uniform(ctx, vec![parse_expr("atan(x)").unwrap()], "arctan");
        assert!(matches!(hadamard_certificate(&flat, 6), Err(GsfError::NotProper(_))));
    }

    #[test]
    fn hadamard_levy_bounds() {
        let ctx = Context::default_ctx();
        let half = Gsf::new_uniform(
            ctx.clone(),
            vec![parse_expr("x1/2").unwrap(), parse_expr("x2/2").unwrap()],
            "half",
        );
        assert!(hadamard_levy_certificate(&half, Beta::Constant(2.0)).is_ok());
        assert!(matches!(
            hadamard_levy_certificate(&half, Beta::Constant(1.5)),
            Err(GsfError::BoundViolation { .. })
        ));
        let sine = Gsf::new_uniform(
            ctx.clone(),
            vec![
                parse_expr("x1 + sin(x1)/2").unwrap(),
                parse_expr("x2 + sin(x2)/2").unwrap(),
            ],
            "sine",
        );
        assert!(hadamard_levy_certificate(&sine, Beta::Constant(2.0)).is_ok());
        let cube = Gsf::new_uniform(ctx, vec![parse_expr("x^3").unwrap()], "cube");
        assert!(matches!(
            hadamard_levy_certificate(&cube, Beta::Constant(100.0)),
            Err(GsfError::Degenerate { .. }) | Err(GsfError::BoundViolation { .. })
        ));
    }

    #[test]
    fn continuation_matches_oracles() {
        let ctx = Context::default_ctx();
        let cubic = Gsf::new_uniform(
            ctx.clone(),
            vec![
                parse_expr("x1 + x1^3").unwrap(),
                parse_expr("x2 + x2^3").unwrap(),
            ],
            "cubic",
        );
        let cert = hadamard_certificate(&cubic, 6).unwrap();
        let y = GenPoint::new(vec![
            GenNum::constant(ctx.clone(), 2.0),
            GenNum::constant(ctx.clone(), 2.0),
        ]);
        let (x, _, v) = global_inverse_eval(&cubic, &cert, &y).unwrap();
        assert!(v.is_true());
        let oracle = bisect(|t| t + t * t * t, 2.0, 0.0, 2.0);
        for c in &x.coords {
            for m in &c.samples {
                assert!((m.lin - oracle).abs() <= 1e-12, "{} vs {}", m.lin, oracle);
            }
        }
        // round trip
        let (fx, _) = cubic.eval(&x).unwrap();
        for (a, b) in fx.coords.iter().zip(&y.coords) {
            assert!(a.sub(b).is_negligible().is_true());
        }
        // identity and affine shift
        let id = Gsf::new_uniform(ctx.clone(), vec![Expr::var(0)], "id");
        let cert_id = hadamard_certificate(&id, 6).unwrap();
        let y1 = GenPoint::new(vec![GenNum::constant(ctx.clone(), 0.75)]);
        let (x1, _, _) = global_inverse_eval(&id, &cert_id, &y1).unwrap();
        assert!(x1.coords[0].sub(&y1.coords[0]).is_negligible().is_true());
    }
}
