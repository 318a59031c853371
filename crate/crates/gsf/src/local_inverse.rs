//! Certified local inversion: nondegeneracy, sharp- and Fermat-topology
//! certificates with per-eps radius searches, a damped projected Newton
//! inverse evaluator, adjugate-formula inverse Jacobians with the
//! determinant lower bound, and the sharp-norm differentiability check.

use crate::error::GsfError;
use crate::gauge::Ctx;
use crate::gen_num::{GenMatrix, GenNum, GenPoint};
use crate::gsf_fn::Gsf;
use crate::logval::Mag;
use crate::probes;
use crate::sets::{ball_membership, BallKind};
use crate::verdict::Verdict;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertKind {
    Sharp,
    Fermat,
}

/// A local invertibility certificate around x0: the inverse-Jacobian norm
/// a, the deviation bound b with a*b = 1/2, c = 2a, and the certified
/// radius r with guaranteed image ball of radius r/c around y0.
#[derive(Clone, Debug)]
pub struct LocalCert {
    pub kind: CertKind,
    pub f: Gsf,
    pub x0: GenPoint,
    pub y0: GenPoint,
    pub a: GenNum,
    pub b: GenNum,
    pub c: GenNum,
    pub r: GenNum,
    pub image_radius: GenNum,
    /// Real radii (r, s) for the Fermat kind.
    pub fermat_radii: Option<(f64, f64)>,
    pub probes_per_eps: usize,
}

/// Generalized nondegeneracy: |det A| strictly positive.
pub fn is_nondegenerate(a: &GenMatrix) -> Verdict {
    a.det().abs_net().is_strictly_positive()
}

fn op_norm_mat(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// True when every probe x of B_{2r}(x0) keeps ||Df(x0) - Df(x)|| < bound
/// at one grid point.
fn deviation_ok(
    f: &Gsf,
    grid_i: usize,
    x0_lin: &[f64],
    j0: &nalgebra::DMatrix<f64>,
    bound: f64,
    r: f64,
    probes_count: usize,
) -> bool {
    let eps = f.ctx.grid.points[grid_i];
    let n = f.arity;
    let partials: Vec<_> = (0..f.dim_out)
        .flat_map(|j| {
            (0..n).map(move |k| {
                let mut alpha = vec![0; n];
                alpha[k] = 1;
                f.comp(grid_i, j).diff_multi(&alpha)
            })
        })
        .collect();
    probes::ball(x0_lin, 2.0 * r, probes_count).iter().all(|p| {
        let jp = nalgebra::DMatrix::from_fn(f.dim_out, n, |rr, cc| {
            partials[rr * n + cc].eval(p, eps)
        });
        let dev = op_norm_mat(&(j0 - &jp));
        dev.is_finite() && dev < bound
    })
}

/// Largest radius (from 1.0, halving) accepted by `deviation_ok`.
fn radius_at_eps(
    f: &Gsf,
    grid_i: usize,
    x0_lin: &[f64],
    j0: &nalgebra::DMatrix<f64>,
    bound: f64,
    probes_count: usize,
    budget: usize,
) -> Result<f64, GsfError> {
    let mut r = 1.0f64;
    for _ in 0..budget {
        if deviation_ok(f, grid_i, x0_lin, j0, bound, r, probes_count) {
            return Ok(r);
        }
        r *= 0.5;
    }
    Err(GsfError::RadiusSearch(format!(
        "halving budget exhausted at eps = {:.3e} (last r = {:.3e})",
        f.ctx.grid.points[grid_i],
        r
    )))
}

/// Sharp-topology certificate: per-eps radii, so r may be infinitesimal.
pub fn sharp_ift_certificate(f: &Gsf, x0: &GenPoint) -> Result<LocalCert, GsfError> {
    let ctx = f.ctx.clone();
    let j0 = f.jacobian(x0);
    let nondeg = is_nondegenerate(&j0);
    if !nondeg.is_true() {
        return Err(GsfError::Degenerate { verdict: nondeg });
    }
    let a = j0.try_inverse()?.op_norm();
    let one = GenNum::constant(ctx.clone(), 1.0);
    let b = one.div(&a.scale(2.0))?;
    let c = a.scale(2.0);
    let probes_count = ctx.cfg.probes_per_dim * f.arity;
    let mut r_samples = Vec::with_capacity(ctx.grid.len());
    for i in 0..ctx.grid.len() {
        let r = radius_at_eps(
            f,
            i,
            &x0.lin_at(i),
            &j0.per_eps[i],
            b.samples[i].lin,
            probes_count,
            ctx.cfg.halving_budget,
        )?;
        r_samples.push(Mag::from_f64(r));
    }
    let r = GenNum::from_mags(ctx.clone(), "r", r_samples);
    let image_radius = r.div(&c)?;
    let y0 = f.eval_point(x0);
    Ok(LocalCert {
        kind: CertKind::Sharp,
        f: f.clone(),
        x0: x0.clone(),
        y0,
        a,
        b,
        c,
        r,
        image_radius,
        fermat_radii: None,
        probes_per_eps: probes_count,
    })
}

/// Fermat-topology certificate: requires a finite inverse-Jacobian norm
/// (a <= k on the tail) and yields real radii r and s < r/c.
pub fn fermat_ift_certificate(f: &Gsf, x0: &GenPoint, k: f64) -> Result<LocalCert, GsfError> {
    let cert = sharp_ift_certificate(f, x0)?;
    let ctx = &f.ctx;
    // finiteness of a: nonnegative exponent and a real bound on the tail
    let est = cert.a.exponent_estimate();
    let finite = match est.finite() {
        Some(e) => est.stable && e >= -ctx.cfg.exponent_slack,
        None => true, // zero net: trivially finite
    };
    let tail_max_a = ctx
        .grid
        .tail_indices()
        .map(|i| cert.a.samples[i].lin)
        .fold(0.0f64, f64::max);
    if !finite || tail_max_a > k {
        return Err(GsfError::NotFinite(format!(
            "||Df(x0)^-1|| is not finitely bounded by {} (tail max {:.3e}, exponent {:?})",
            k,
            tail_max_a,
            est.finite()
        )));
    }
    // Fermat continuity of the derivative at x0
    let n = f.arity;
    let mut alpha = vec![0; n];
    alpha[0] = 1;
    let (lip, _) = f.differentiate(&alpha).lipschitz_probe(x0, BallKind::Fermat);
    if lip.is_false() {
        return Err(GsfError::NotFinite(format!(
            "Df is not Fermat-Lipschitz near x0: {}",
            lip
        )));
    }
    // a real radius valid across the tail
    let probes_count = cert.probes_per_eps;
    let bound: f64 = ctx
        .grid
        .tail_indices()
        .map(|i| cert.b.samples[i].lin)
        .fold(f64::INFINITY, f64::min);
    let j0 = f.jacobian(x0);
    let mut r = 1.0f64;
    let mut found = None;
    'outer: for _ in 0..60 {
        for i in ctx.grid.tail_indices() {
            if !deviation_ok(f, i, &x0.lin_at(i), &j0.per_eps[i], bound, r, probes_count) {
                r *= 0.5;
                continue 'outer;
            }
        }
        found = Some(r);
        break;
    }
    let r = found.ok_or_else(|| {
        GsfError::RadiusSearch("no real Fermat radius found within budget".into())
    })?;
    let c_tail = ctx
        .grid
        .tail_indices()
        .map(|i| cert.c.samples[i].lin)
        .fold(0.0f64, f64::max);
    let s = 0.5 * r / c_tail;
    if s <= 0.0 || !s.is_finite() {
        return Err(GsfError::RadiusSearch("degenerate Fermat image radius".into()));
    }
    Ok(LocalCert { kind: CertKind::Fermat, fermat_radii: Some((r, s)), ..cert })
}

/// Damped projected Newton per eps, from x0, staying inside B_r(x0).
pub fn local_inverse_eval(
    cert: &LocalCert,
    y: &GenPoint,
) -> Result<(GenPoint, GenNum, Verdict), GsfError> {
    let ctx = cert.f.ctx.clone();
    let member = ball_membership(y, &cert.y0, &cert.image_radius, BallKind::Sharp);
    if member.is_false() {
        return Err(GsfError::DomainViolation(format!(
            "y outside the guaranteed image ball: {}",
            member
        )));
    }
    let n = cert.f.arity;
    let d = cert.f.dim_out;
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(ctx.grid.len());
    let mut residuals: Vec<f64> = Vec::with_capacity(ctx.grid.len());
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        let x0_lin = cert.x0.lin_at(i);
        let y_lin = y.lin_at(i);
        let r_lin = cert.r.samples[i].lin;
        // target accuracy in x; the image-space tolerance is scaled by the
        // derivative lower bound b so Newton keeps going for functions with
        // infinitesimal slope
        let tol_x = ctx
            .gauge
            .rho(eps)
            .powi(ctx.cfg.q_tol as i32)
            .max(ctx.cfg.numeric_floor);
        let tol = tol_x * (2.0 * cert.b.samples[i].lin).min(1.0);
        let partials: Vec<_> = (0..d)
            .flat_map(|j| {
                (0..n).map(move |k| {
                    let mut alpha = vec![0; n];
                    alpha[k] = 1;
                    cert.f.comp(i, j).diff_multi(&alpha)
                })
            })
            .collect();
        let eval_f = |x: &[f64]| -> Vec<f64> {
            (0..d).map(|j| cert.f.comp(i, j).eval(x, eps)).collect()
        };
        let res_norm = |fx: &[f64]| -> f64 {
            fx.iter()
                .zip(&y_lin)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let mut x = x0_lin.clone();
        let mut fx = eval_f(&x);
        let mut res = res_norm(&fx);
        let mut stagnant = 0;
        for _ in 0..200 {
            if res <= tol {
                break;
            }
            let jm = nalgebra::DMatrix::from_fn(d, n, |rr, cc| {
                partials[rr * n + cc].eval(&x, eps)
            });
            let rhs = nalgebra::DVector::from_iterator(
                d,
                fx.iter().zip(&y_lin).map(|(a, b)| a - b),
            );
            let step = jm
                .lu()
                .solve(&rhs)
                .ok_or_else(|| GsfError::Numeric("singular Jacobian in Newton".into()))?;
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let mut cand: Vec<f64> =
                    x.iter().zip(step.iter()).map(|(xi, s)| xi - lambda * s).collect();
                // project back into the certified ball
                let dist: f64 = cand
                    .iter()
                    .zip(&x0_lin)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dist > r_lin && dist > 0.0 {
                    let scale = r_lin / dist;
                    cand = cand
                        .iter()
                        .zip(&x0_lin)
                        .map(|(a, b)| b + (a - b) * scale)
                        .collect();
                }
                let fc = eval_f(&cand);
                let rc = res_norm(&fc);
                if rc < res {
                    x = cand;
                    fx = fc;
                    res = rc;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !improved {
                stagnant += 1;
                if stagnant >= 10 {
                    return Err(GsfError::NewtonStagnation(format!(
                        "eps = {:.3e}, residual stuck at {:.3e} (tol {:.3e})",
                        eps, res, tol
                    )));
                }
            } else {
                stagnant = 0;
            }
        }
        if res > tol {
            return Err(GsfError::NewtonStagnation(format!(
                "eps = {:.3e}: residual {:.3e} above tolerance {:.3e}",
                eps, res, tol
            )));
        }
        xs.push(x);
        residuals.push(res);
    }
    let coords = (0..n)
        .map(|k| {
            let vals: Vec<f64> = xs.iter().map(|x| x[k]).collect();
            GenNum::from_mags(
                ctx.clone(),
                format!("f^-1(y)[{}]", k),
                vals.iter().map(|&v| Mag::from_f64(v)).collect(),
            )
        })
        .collect();
    let residual = GenNum::from_linear_floored(ctx.clone(), "newton residual", &residuals);
    let verdict = residual.is_negligible();
    Ok((GenPoint::new(coords), residual, verdict))
}

/// Adjugate-transpose of a square matrix (cofactor formula).
fn adjugate(m: &nalgebra::DMatrix<f64>) -> nalgebra::DMatrix<f64> {
    let n = m.nrows();
    if n == 1 {
        return nalgebra::DMatrix::from_element(1, 1, 1.0);
    }
    nalgebra::DMatrix::from_fn(n, n, |r, c| {
        // cofactor C_{c,r} (transposed)
        let minor = m.clone().remove_row(c).remove_column(r);
        let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.lu().determinant()
    })
}

/// Inverse Jacobian at y by the exact cofactor formula, checked against the
/// certified determinant lower bound 1/(C * c^n) with C = n^(n/2).
pub fn inverse_jacobian(cert: &LocalCert, y: &GenPoint) -> Result<GenMatrix, GsfError> {
    let (x, _, _) = local_inverse_eval(cert, y)?;
    let j = cert.f.jacobian(&x);
    let n = cert.f.arity;
    let big_c = (n as f64).powf(n as f64 / 2.0);
    let ctx = cert.f.ctx.clone();
    let mut per = Vec::with_capacity(ctx.grid.len());
    for i in 0..ctx.grid.len() {
        let m = &j.per_eps[i];
        let det = m.clone().lu().determinant();
        let c_lin = cert.c.samples[i].lin;
        let lower = 1.0 / (big_c * c_lin.powi(n as i32));
        if det.abs() < lower {
            return Err(GsfError::DetBoundViolation(format!(
                "|det| = {:.3e} below 1/(C c^n) = {:.3e} at eps = {:.3e}",
                det.abs(),
                lower,
                ctx.grid.points[i]
            )));
        }
        per.push(adjugate(m) / det);
    }
    Ok(GenMatrix::new(ctx, per))
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientRow {
    pub k: i64,
    /// ||f(x_k) - f(x0) - Df(x0)(x_k - x0)||_e / ||x_k - x0||_e
    pub quotient: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientDecayReport {
    pub rows: Vec<QuotientRow>,
    /// Fitted q of the quadratic bound: quotient_k <= e^q * ||x_k||_e.
    pub q_hat: f64,
    pub pass: bool,
}

/// Sharp-norm differentiability along x_k = x0 + [eps^k] e_1. The Taylor
/// numerator is evaluated in remainder form (x_k^2 times an integral of the
/// second derivative), which is exact in the log domain and free of the
/// f64 cancellation a direct difference would hit.
pub fn sharp_differentiability_check(
    f: &Gsf,
    x0: &GenPoint,
    k_max: i64,
) -> Result<QuotientDecayReport, GsfError> {
    let ctx: Ctx = f.ctx.clone();
    if ctx.gauge != crate::gauge::Gauge::Eps {
        return Err(GsfError::GaugeNotEps(ctx.gauge.name().into()));
    }
    let n = f.arity;
    let gl = crate::quad::rule(40);
    let mut rows = Vec::new();
    for k in 1..=k_max {
        // numerator samples: h^2 * int_0^1 (1-t) f''(x0 + t h e1) dt, h = eps^k
        let mut num_samples = Vec::with_capacity(ctx.grid.len());
        let mut den_samples = Vec::with_capacity(ctx.grid.len());
        for (i, &eps) in ctx.grid.points.iter().enumerate() {
            let h = Mag::from_f64(eps).powi(k);
            let x0_lin = x0.lin_at(i);
            let mut alpha = vec![0usize; n];
            alpha[0] = 2;
            let mut sq = 0.0f64;
            for j in 0..f.dim_out {
                let d2 = f.comp(i, j).diff_multi(&alpha);
                let integral = gl.integrate(0.0, 1.0, |t| {
                    let mut p = x0_lin.clone();
                    p[0] += t * h.lin;
                    (1.0 - t) * d2.eval(&p, eps)
                });
                sq += integral * integral;
            }
            num_samples.push(h.mul(h).mul(Mag::from_f64(sq.sqrt())));
            den_samples.push(h);
        }
        let num = GenNum::from_mags(ctx.clone(), "taylor numerator", num_samples);
        let den = GenNum::from_mags(ctx.clone(), "step", den_samples);
        let quotient = num.sharp_norm()? / den.sharp_norm()?;
        rows.push(QuotientRow { k, quotient });
    }
    let mut q_hat = rows
        .iter()
        .filter(|r| r.quotient > 0.0)
        .map(|r| r.quotient.ln() + r.k as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    if q_hat == f64::NEG_INFINITY {
        q_hat = 0.0; // all quotients exactly zero
    }
    let monotone = rows.windows(2).all(|w| w[1].quotient <= w[0].quotient * (1.0 + 1e-9));
    // slack on the fitted normalization: the per-k valuations carry the
    // same estimator tolerance as exponent_estimate
    let target = (-8.0 + ctx.cfg.exponent_slack).exp();
    let normalized_last = rows
        .last()
        .map(|r| r.quotient * (-q_hat).exp())
        .unwrap_or(f64::NAN);
    let pass = monotone && normalized_last <= target;
    Ok(QuotientDecayReport { rows, q_hat, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::gauge::Context;

    fn gsf(src: &str) -> Gsf {
        Gsf::from_str_1d(Context::default_ctx(), src).unwrap()
    }

    fn pt(src: &str) -> GenPoint {
        GenPoint::from_exprs(Context::default_ctx(), &[parse_expr(src).unwrap()])
    }

    /// Bisection oracle for strictly increasing 1D functions.
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
    fn nondegeneracy_cases() {
        let ctx = Context::default_ctx();
        assert!(is_nondegenerate(&GenMatrix::identity(ctx.clone(), 2)).is_true());
        let per: Vec<_> = ctx
            .grid
            .points
            .iter()
            .map(|&e| nalgebra::DMatrix::from_row_slice(2, 2, &[e, 0.0, 0.0, 1.0]))
            .collect();
        assert!(is_nondegenerate(&GenMatrix::new(ctx.clone(), per)).is_true());
        let per: Vec<_> = ctx
            .grid
            .points
            .iter()
            .map(|_| nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]))
            .collect();
        assert!(is_nondegenerate(&GenMatrix::new(ctx, per)).is_false());
    }

    #[test]
    fn identity_certificate() {
        let f = gsf("x");
        let cert = sharp_ift_certificate(&f, &pt("0")).unwrap();
        assert!(cert.a.samples.iter().all(|m| (m.lin - 1.0).abs() < 1e-12));
        assert!(cert.r.samples.iter().all(|m| m.lin == 1.0));
        let y = pt("1/4");
        let (x, _, v) = local_inverse_eval(&cert, &y).unwrap();
        assert!(v.is_true());
        assert!(x.coords[0].sub(&y.coords[0]).is_negligible().is_true());
    }

    #[test]
    fn infinitesimal_scaling_certificate() {
        // f(x) = eps * x: a = 1/eps infinite; sharp cert passes with an
        // infinitesimal image radius
        let f = gsf("eps * x");
        let cert = sharp_ift_certificate(&f, &pt("0")).unwrap();
        let est = cert.image_radius.exponent_estimate();
        assert!(est.finite().unwrap() > 0.25, "image radius exponent {:?}", est);
        // y = [eps^2] -> x = [eps]
        let y = pt("eps^2");
        let (x, _, v) = local_inverse_eval(&cert, &y).unwrap();
        assert!(v.is_true());
        let expect = GenNum::from_net_str(Context::default_ctx(), "eps").unwrap();
        assert!(x.coords[0].sub(&expect).is_negligible().is_true());
        // and the Fermat certificate must refuse it
        let err = fermat_ift_certificate(&f, &pt("0"), 1e6).unwrap_err();
        assert!(matches!(err, GsfError::NotFinite(_)));
    }

    #[test]
    fn cubic_perturbation_matches_bisection() {
        let f = gsf("x + x^3");
        let cert = fermat_ift_certificate(&f, &pt("0"), 10.0).unwrap();
        let (_, s) = cert.fermat_radii.unwrap();
        assert!(s > 0.0);
        let y = pt("1/40");
        let (x, _, v) = local_inverse_eval(&cert, &y).unwrap();
        assert!(!v.is_false());
        let oracle = bisect(|t| t + t * t * t, 0.025, -1.0, 1.0);
        for m in &x.coords[0].samples {
            assert!((m.lin - oracle).abs() <= 1e-12, "{} vs {}", m.lin, oracle);
        }
    }

    #[test]
    fn inverse_jacobian_identity_product() {
        let f = gsf("x + x^3");
        let cert = sharp_ift_certificate(&f, &pt("0")).unwrap();
        let y = pt("1/20");
        let inv_j = inverse_jacobian(&cert, &y).unwrap();
        let (x, _, _) = local_inverse_eval(&cert, &y).unwrap();
        let j = f.jacobian(&x);
        let prod = inv_j.mul_mat(&j);
        for m in &prod.per_eps {
            assert!((m[(0, 0)] - 1.0).abs() <= 1e-10);
        }
        // at y = 0 the inverse derivative is 1
        let y0 = pt("0");
        let inv0 = inverse_jacobian(&cert, &y0).unwrap();
        assert!(inv0.per_eps.iter().all(|m| (m[(0, 0)] - 1.0).abs() < 1e-10));
    }

    #[test]
    fn afj_quadratic_decay_for_square() {
        let f = gsf("x^2");
        let report = sharp_differentiability_check(&f, &pt("0"), 8).unwrap();
        assert!(report.pass, "{:?}", report);
        // f'' = 2, int (1-t) 2 dt = 1: quotient is exactly e^{-k}
        for row in &report.rows {
            assert!(
                (row.quotient - (-(row.k as f64)).exp()).abs() < 1e-12 * row.quotient,
                "{:?}",
                row
            );
        }
        assert!(report.q_hat.abs() < 1e-9);
    }

    #[test]
    fn afj_exact_zero_for_linear() {
        let f = gsf("3*x");
        let report = sharp_differentiability_check(&f, &pt("0"), 8).unwrap();
        assert!(report.rows.iter().all(|r| r.quotient == 0.0));
        assert!(report.pass);
    }
}
