//! Scripted pipelines reproducing the six worked examples as verdict and
//! exponent assertions, each returning a structured report.

use crate::embedding::{embed, DistSpec};
use crate::error::GsfError;
use crate::expr::parse_expr;
use crate::gauge::Ctx;
use crate::gen_num::{GenNum, GenPoint};
use crate::gsf_fn::Gsf;
use crate::local_inverse::{inverse_jacobian, local_inverse_eval, sharp_ift_certificate};
use crate::local_inverse::fermat_ift_certificate;
use crate::logval::Mag;
use crate::mollifier::{MollifierNet, MollifierOptions};
use crate::report::{Report, ReportItem, Table};
use crate::sets::{ball_membership, BallKind};

pub fn run_example(id: usize, ctx: &Ctx) -> Result<Report, GsfError> {
    match id {
        1 => example_heaviside(ctx),
        2 => example_delta_composition(ctx),
        3 => example_infinitesimal_scaling(ctx),
        4 => example_fast_oscillation(ctx),
        5 => example_small_sine(ctx),
        6 => example_cubic(ctx),
        _ => Err(GsfError::Config(format!("no example with id {}", id))),
    }
}

pub fn run_all(ctx: &Ctx) -> Result<Vec<Report>, GsfError> {
    (1..=6).map(|id| run_example(id, ctx)).collect()
}

fn psi0_net(ctx: &Ctx) -> Result<MollifierNet, GsfError> {
    MollifierNet::default_net(ctx.clone(), MollifierOptions { d: Some(0.5), psi0: true })
}

/// Smooth Heaviside: infinite derivative at 0 makes it a diffeomorphism on
/// an infinitesimal neighborhood only.
fn example_heaviside(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("examples run 1", ctx);
    let net = psi0_net(ctx)?;
    let h = embed(&DistSpec::heaviside(0.0), &net)?;
    let x0 = GenPoint::from_exprs(ctx.clone(), &[parse_expr("0")?]);
    let cert = sharp_ift_certificate(&h, &x0)?;
    // H'(0) = delta(0) = b, an infinite number
    let dh = {
        let per: Vec<Mag> = (0..ctx.grid.len())
            .map(|i| Mag::from_f64(h.comp(i, 0).diff(0).eval(&[0.0], ctx.grid.points[i])))
            .collect();
        GenNum::from_mags(ctx.clone(), "H'(0)", per)
    };
    let e_dh = dh.exponent_estimate();
    let b_exp = net.b_net().valuation()?.finite().unwrap_or(f64::NAN);
    let dh_exp = e_dh.finite().unwrap_or(f64::NAN);
    report.push(
        ReportItem::exponent("H'(0) exponent", dh_exp, (dh_exp - b_exp).abs() <= 0.1)
            .note("matches the concentration scale; negative, so H'(0) is infinite"),
    );
    let r_exp = cert.r.exponent_estimate().finite().unwrap_or(f64::NAN);
    report.push(
        ReportItem::exponent("certified radius exponent", r_exp, r_exp > 0.0)
            .note("positive exponent: the neighborhood is infinitesimal"),
    );
    // H'(s) = 0 for real s outside the mollifier support: no finite radius
    let far = h.comp(ctx.grid.len() - 1, 0).diff(0).eval(&[0.5], ctx.grid.points[ctx.grid.len() - 1]);
    report.push(ReportItem::value("H' at real x=1/2 (tail eps)", far, far == 0.0));
    Ok(report)
}

/// delta o delta is invertible around the mean-value point c where its
/// derivative equals b / (1 - k), with delta(k) = 1.
fn example_delta_composition(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("examples run 2", ctx);
    // a slower concentration net: with b = [eps^-1], the window where
    // (delta o delta)' crosses b/(1-k) is narrower than one f64 ulp of x
    // on the grid tail, so the mean-value point is not representable there
    let b_expr = crate::expr::Expr::PowF(crate::expr::Expr::Eps.boxed(), -0.25);
    let net = MollifierNet::new(
        ctx.clone(),
        b_expr,
        MollifierOptions { d: Some(0.5), psi0: true },
    )?;
    let delta = embed(&DistSpec::delta(0, 0.0), &net)?;
    let dd = delta.compose(&delta)?;
    let b = net.b_net();
    let mut c_samples = Vec::with_capacity(ctx.grid.len());
    let mut slope_samples = Vec::with_capacity(ctx.grid.len());
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        let b_lin = b.samples[i].lin;
        let d_expr = delta.comp(i, 0);
        // k in [0, 1/2] with delta(k) = 1
        let dk = |x: f64| d_expr.eval(&[x], eps) - 1.0;
        let k = first_root(&dk, 0.0, 1.0 / b_lin, 2000).ok_or_else(|| {
            GsfError::Numeric(format!("no delta(k)=1 crossing at eps = {:.3e}", eps))
        })?;
        let target = b_lin / (1.0 - k);
        // the mean-value point: (delta o delta)'(c) = b / (1 - k)
        let g = dd.comp(i, 0).diff(0);
        let gx = |x: f64| g.eval(&[x], eps) - target;
        let c = first_root(&gx, k, 1.0 / b_lin, 6000).ok_or_else(|| {
            GsfError::Numeric(format!("no mean-value crossing at eps = {:.3e}", eps))
        })?;
        c_samples.push(Mag::from_f64(c));
        slope_samples.push(Mag::from_f64(g.eval(&[c], eps)));
    }
    let c_point = GenPoint::new(vec![GenNum::from_mags(ctx.clone(), "c", c_samples)]);
    let cert = sharp_ift_certificate(&dd, &c_point)?;
    let slope = GenNum::from_mags(ctx.clone(), "(dd)'(c)", slope_samples);
    let e_slope = slope.exponent_estimate().finite().unwrap_or(f64::NAN);
    let e_b = b.valuation()?.finite().unwrap_or(f64::NAN);
    report.push(
        ReportItem::exponent("(delta o delta)'(c) exponent", e_slope, (e_slope - e_b).abs() <= 0.1)
            .note("equal to the exponent of b"),
    );
    let r_exp = cert.r.exponent_estimate().finite().unwrap_or(f64::NAN);
    report.push(ReportItem::exponent("certified radius exponent at c", r_exp, r_exp > 0.0));
    Ok(report)
}

/// First sign change of f on [lo, hi] located by scan + bisection.
fn first_root(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, scan: usize) -> Option<f64> {
    let mut prev_x = lo;
    let mut prev_v = f(lo);
    for s in 1..=scan {
        let x = lo + (hi - lo) * s as f64 / scan as f64;
        let v = f(x);
        if prev_v == 0.0 {
            return Some(prev_x);
        }
        if v == 0.0 {
            return Some(x);
        }
        if prev_v.signum() != v.signum() {
            let (mut a, mut bx) = (prev_x, x);
            let mut fa = prev_v;
            for _ in 0..200 {
                let m = 0.5 * (a + bx);
                let fm = f(m);
                if fm == 0.0 {
                    return Some(m);
                }
                if fa.signum() != fm.signum() {
                    bx = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            return Some(0.5 * (a + bx));
        }
        prev_x = x;
        prev_v = v;
    }
    None
}

/// f(x) = r x with r = [eps]: the sharp theorem applies with an
/// infinitesimal image radius; the Fermat theorem must refuse.
fn example_infinitesimal_scaling(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("examples run 3", ctx);
    let f = Gsf::from_str_1d(ctx.clone(), "eps * x")?;
    let x0 = GenPoint::from_exprs(ctx.clone(), &[parse_expr("0")?]);
    let fermat = fermat_ift_certificate(&f, &x0, 1e6);
    let fermat_refused = matches!(fermat, Err(GsfError::NotFinite(_)));
    report.push(
        ReportItem::value("fermat certificate refused", f64::from(u8::from(fermat_refused)), fermat_refused)
            .note("||Df(x0)^-1|| = 1/eps is not finite"),
    );
    let cert = sharp_ift_certificate(&f, &x0)?;
    let s_exp = cert.image_radius.exponent_estimate().finite().unwrap_or(f64::NAN);
    report.push(
        ReportItem::exponent("image radius s exponent", s_exp, s_exp > 0.0)
            .note("positive exponent: s is infinitesimal"),
    );
    // and the inverse really divides by r
    let y = GenPoint::from_exprs(ctx.clone(), &[parse_expr("eps^2")?]);
    let (x, _, v) = local_inverse_eval(&cert, &y)?;
    let expect = GenNum::from_net_str(ctx.clone(), "eps")?;
    let round = x.coords[0].sub(&expect).is_negligible();
    report.push(ReportItem::verdict("f^-1([eps^2]) = [eps]", round.clone(), round.is_true()));
    report.push(ReportItem::verdict("inverse residual negligible", v.clone(), v.is_true()));
    Ok(report)
}

/// f(x) = sin(x/r), r = [eps]: injective on the infinitesimal interval
/// (-pi r/2, pi r/2) but not in any real ball.
fn example_fast_oscillation(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("examples run 4", ctx);
    let f = Gsf::from_str_1d(ctx.clone(), "sin(x / eps)")?;
    let alphas = [-1.2f64, -0.7, -0.2, 0.3, 0.9, 1.4];
    for w in alphas.windows(2) {
        let xa = GenNum::from_expr(ctx.clone(), &parse_expr(&format!("{} * eps", w[0]))?);
        let xb = GenNum::from_expr(ctx.clone(), &parse_expr(&format!("{} * eps", w[1]))?);
        let fa = eval_1d(&f, &xa);
        let fb = eval_1d(&f, &xb);
        let gap = fa.sub(&fb).abs_net().is_strictly_positive();
        report.push(
            ReportItem::verdict(
                format!("injective pair alpha = {}, {}", w[0], w[1]),
                gap.clone(),
                gap.is_true(),
            )
            .note("points alpha*r inside (-pi r/2, pi r/2)"),
        );
    }
    for radius in [0.1f64, 1.0, 10.0] {
        let x2 = GenNum::from_expr(ctx.clone(), &parse_expr("2 * pi * eps")?);
        let inside = {
            let margin: Vec<Mag> = x2
                .samples
                .iter()
                .map(|m| Mag::from_f64(radius).sub(Mag::from_f64(m.lin.abs())))
                .collect();
            GenNum::from_mags(ctx.clone(), "margin", margin).is_strictly_positive()
        };
        let sep = x2.abs_net().is_strictly_positive();
        // f(0) = 0 = f(2 pi r); the evaluation is numeric, so floor the
        // ~1e-16 sine rounding before the negligibility test
        let vals: Vec<f64> = eval_1d(&f, &x2).samples.iter().map(|m| m.lin).collect();
        let collision =
            GenNum::from_linear_floored(ctx.clone(), "f(2 pi r)", &vals).is_negligible();
        let ok = inside.is_true() && sep.is_true() && collision.is_true();
        report.push(
            ReportItem::verdict(
                format!("non-injective witness in ball radius {}", radius),
                collision,
                ok,
            )
            .note("x = 2 pi r collides with x = 0 inside every real ball"),
        );
    }
    Ok(report)
}

fn eval_1d(f: &Gsf, x: &GenNum) -> GenNum {
    let ctx = f.ctx.clone();
    let samples: Vec<Mag> = (0..ctx.grid.len())
        .map(|i| Mag::from_f64(f.comp(i, 0).eval(&[x.samples[i].lin], ctx.grid.points[i])))
        .collect();
    GenNum::from_mags(ctx, format!("{}({})", f.label, x.label), samples)
}

/// f(x) = r sin x: invertible near 0 but the image, hence the inverse's
/// domain, is confined to the infinitesimal interval (-r, r).
fn example_small_sine(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("examples run 5", ctx);
    let f = Gsf::from_str_1d(ctx.clone(), "eps * sin(x)")?;
    let x0 = GenPoint::from_exprs(ctx.clone(), &[parse_expr("0")?]);
    let cert = sharp_ift_certificate(&f, &x0)?;
    let r_net = GenNum::from_net_str(ctx.clone(), "eps")?;
    let confined = r_net.sub(&cert.image_radius).is_strictly_positive();
    report.push(
        ReportItem::verdict("image radius below r", confined.clone(), confined.is_true())
            .note("the inverse's domain stays inside (-r, r)"),
    );
    let y_in = GenPoint::from_exprs(ctx.clone(), &[parse_expr("eps / 8")?]);
    let m_in = ball_membership(&y_in, &cert.y0, &cert.image_radius, BallKind::Sharp);
    report.push(ReportItem::verdict("y = [eps/8] inside the image ball", m_in.clone(), m_in.is_true()));
    let (x_in, _, v) = local_inverse_eval(&cert, &y_in)?;
    report.push(ReportItem::verdict("inverse residual negligible", v.clone(), v.is_true()));
    // the recovered point is asin(1/8), a real number, not infinitesimal
    let asin = (0.125f64).asin();
    let dev = x_in.coords[0]
        .samples
        .iter()
        .map(|m| (m.lin - asin).abs())
        .fold(0.0f64, f64::max);
    report.push(ReportItem::value("max |f^-1([eps/8]) - asin(1/8)|", dev, dev <= 1e-9));
    let y_out = GenPoint::from_exprs(ctx.clone(), &[parse_expr("2 * eps")?]);
    let m_out = ball_membership(&y_out, &cert.y0, &cert.image_radius, BallKind::Sharp);
    report.push(
        ReportItem::verdict("y = [2 eps] outside the image ball", m_out.clone(), m_out.is_false())
            .note("the inverse does not extend past (-r, r)"),
    );
    Ok(report)
}

/// f(x) = x^3: rejected at 0 (degenerate derivative); away from (-r, r)
/// the inverse exists with infinite derivative at infinitesimal points.
fn example_cubic(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("examples run 6", ctx);
    let f = Gsf::from_str_1d(ctx.clone(), "x^3")?;
    let origin = GenPoint::from_exprs(ctx.clone(), &[parse_expr("0")?]);
    let rejected = matches!(sharp_ift_certificate(&f, &origin), Err(GsfError::Degenerate { .. }));
    report.push(
        ReportItem::value("certificate at 0 rejected", f64::from(u8::from(rejected)), rejected)
            .note("f'(0) = 0 is not nondegenerate"),
    );
    // x0 = [eps^2] lies outside (-r, r) for r = [eps^3]
    let x0 = GenPoint::from_exprs(ctx.clone(), &[parse_expr("eps^2")?]);
    let r_net = GenNum::from_net_str(ctx.clone(), "eps^3")?;
    let outside = x0.coords[0].abs_net().sub(&r_net).is_strictly_positive();
    report.push(
        ReportItem::verdict("x0 = [eps^2] outside (-r, r)", outside.clone(), outside.is_true())
            .note("r = [eps^3]"),
    );
    let cert = sharp_ift_certificate(&f, &x0)?;
    let y0 = GenPoint::from_exprs(ctx.clone(), &[parse_expr("eps^6")?]);
    let inv_j = inverse_jacobian(&cert, &y0)?;
    let entries: Vec<Mag> = inv_j.per_eps.iter().map(|m| Mag::from_f64(m[(0, 0)])).collect();
    let inv_d = GenNum::from_mags(ctx.clone(), "(f^-1)'", entries);
    let e = inv_d.exponent_estimate().finite().unwrap_or(f64::NAN);
    report.push(
        ReportItem::exponent("inverse derivative exponent at y = [eps^6]", e, e < 0.0)
            .note("1/(3 eps^4): infinite derivative at an infinitesimal point"),
    );
    report.push(ReportItem::value("exponent matches -4", e, (e + 4.0).abs() <= 0.1));
    let table = Table {
        name: "inverse derivative".into(),
        columns: vec!["eps".into(), "value".into()],
        rows: ctx
            .grid
            .points
            .iter()
            .zip(&inv_d.samples)
            .map(|(&eps, m)| vec![eps, m.lin])
            .collect(),
    };
    report.push_table(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::Context;

    #[test]
    fn all_examples_pass() {
        let ctx = Context::default_ctx();
        for id in 1..=6 {
            let report = run_example(id, &ctx).unwrap();
            assert!(
                report.pass(),
                "example {} failed:\n{}",
                id,
                report.to_json()
            );
        }
    }
}
