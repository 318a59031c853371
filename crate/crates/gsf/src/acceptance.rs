//! The seven release criteria as reportable checks, shared by the
//! integration test target and the CLI selftest.

use crate::embedding::{derivative_commutation_check, embed, pairing_limit, DistSpec};
use crate::error::GsfError;
use crate::expr::parse_expr;
use crate::gauge::Ctx;
use crate::gen_num::{GenNum, GenPoint};
use crate::global_inverse::{
    global_1d_invert, global_inverse_eval, hadamard_certificate, hadamard_levy_certificate, Beta,
};
use crate::gsf_fn::Gsf;
use crate::local_inverse::{
    sharp_differentiability_check, inverse_jacobian, local_inverse_eval, sharp_ift_certificate,
};
use crate::mollifier::{Mollifier1D, MollifierNet, MollifierOptions};
use crate::quad;
use crate::report::{Report, ReportItem};

pub const CRITERIA: [(usize, &str); 7] = [
    (1, "ring and verdict corpus"),
    (2, "mollifier moments"),
    (3, "distribution embedding"),
    (4, "local inverse"),
    (5, "worked examples"),
    (6, "global inverse"),
    (7, "sharp-norm differentiability"),
];

pub fn run_criterion(id: usize, ctx: &Ctx) -> Result<Report, GsfError> {
    match id {
        1 => criterion_ring(ctx),
        2 => criterion_mollifier(ctx),
        3 => criterion_embedding(ctx),
        4 => criterion_local_inverse(ctx),
        5 => criterion_examples(ctx),
        6 => criterion_global_inverse(ctx),
        7 => criterion_sharp_diff(ctx),
        _ => Err(GsfError::Config(format!("no criterion {}", id))),
    }
}

/// A corpus entry: the net plus its analytically known classification
/// (None = not asserted for this net).
struct CorpusNet {
    x: GenNum,
    moderate: Option<bool>,
    negligible: Option<bool>,
    strictly_positive: Option<bool>,
}

fn corpus(ctx: &Ctx) -> Vec<CorpusNet> {
    let mut nets = Vec::new();
    let from = |src: &str| GenNum::from_net_str(ctx.clone(), src).unwrap();
    // gauge powers rho^a
    for a in -8i32..=8 {
        nets.push(CorpusNet {
            x: from(&format!("eps^{}", a)),
            moderate: Some(true),
            negligible: Some(false),
            strictly_positive: Some(true),
        });
    }
    // constants
    for c in [-3.0f64, -1.0, -0.5, 0.5, 1.0, 2.0, 7.25] {
        nets.push(CorpusNet {
            x: GenNum::constant(ctx.clone(), c),
            moderate: Some(true),
            negligible: Some(false),
            strictly_positive: Some(c > 0.0),
        });
    }
    nets.push(CorpusNet {
        x: GenNum::zero(ctx.clone()),
        moderate: Some(true),
        negligible: Some(true),
        strictly_positive: Some(false),
    });
    // sums of powers: exponent = min of the two
    for a in 0i32..=6 {
        for b in (a + 1)..=7 {
            nets.push(CorpusNet {
                x: from(&format!("eps^{} + eps^{}", a, b)),
                moderate: Some(true),
                negligible: Some(false),
                strictly_positive: Some(true),
            });
        }
    }
    // power plus positive constant
    for a in 1i32..=8 {
        for c in [0.25f64, 1.0, 3.0] {
            nets.push(CorpusNet {
                x: from(&format!("eps^{} + {}", a, c)),
                moderate: Some(true),
                negligible: Some(false),
                strictly_positive: Some(true),
            });
        }
    }
    // differences that cancel to zero
    for a in 1i32..=8 {
        let p = from(&format!("eps^{}", a));
        nets.push(CorpusNet {
            x: p.sub(&p),
            moderate: Some(true),
            negligible: Some(true),
            strictly_positive: Some(false),
        });
    }
    // bounded oscillators scaled by powers: moderate, not negligible on
    // this grid, sign indefinite (positivity not asserted)
    for a in 0i32..=7 {
        for phase in [0.0f64, 0.3, 1.1] {
            nets.push(CorpusNet {
                x: from(&format!("eps^{} * sin(1/eps + {})", a, phase)),
                moderate: Some(true),
                negligible: Some(false),
                strictly_positive: None,
            });
        }
    }
    // shifted oscillators, nonnegative by construction
    for a in 0i32..=7 {
        nets.push(CorpusNet {
            x: from(&format!("eps^{} * (2 + sin(1/eps))", a)),
            moderate: Some(true),
            negligible: Some(false),
            strictly_positive: Some(true),
        });
    }
    // negated powers
    for a in 0i32..=7 {
        nets.push(CorpusNet {
            x: from(&format!("-(eps^{})", a)),
            moderate: Some(true),
            negligible: Some(false),
            strictly_positive: Some(false),
        });
    }
    // sub-gauge decay: negligible against rho = eps
    for a in [1.0f64, 2.0] {
        nets.push(CorpusNet {
            x: from(&format!("exp(-{}/eps)", a)),
            moderate: Some(true),
            negligible: Some(true),
            strictly_positive: Some(false),
        });
    }
    // non-moderate growth
    for a in [1.0f64, 2.0] {
        nets.push(CorpusNet {
            x: from(&format!("exp({}/eps)", a)),
            moderate: Some(false),
            negligible: Some(false),
            strictly_positive: None,
        });
    }
    // scaled powers across both signs of the exponent
    for a in -6i32..=6 {
        for c in [0.5f64, 2.0] {
            nets.push(CorpusNet {
                x: from(&format!("{} * eps^{}", c, a)),
                moderate: Some(true),
                negligible: Some(false),
                strictly_positive: Some(true),
            });
        }
    }
    // cosine oscillators, sign indefinite
    for a in 0i32..=7 {
        for phase in [0.2f64, 0.9] {
            nets.push(CorpusNet {
                x: from(&format!("eps^{} * cos(1/eps + {})", a, phase)),
                moderate: Some(true),
                negligible: Some(false),
                strictly_positive: None,
            });
        }
    }
    // differences with a dominant leading power stay strictly positive
    for a in 0i32..=3 {
        for b in (a + 1)..=4 {
            nets.push(CorpusNet {
                x: from(&format!("eps^{} - eps^{}", a, b)),
                moderate: Some(true),
                negligible: Some(false),
                strictly_positive: Some(true),
            });
        }
    }
    // random-ish rationals times powers
    for a in 0i32..=5 {
        for num in [3i32, 5, 11, 13] {
            nets.push(CorpusNet {
                x: from(&format!("{} * eps^{} / 7", num, a)),
                moderate: Some(true),
                negligible: Some(false),
                strictly_positive: Some(true),
            });
        }
    }
    nets
}

fn criterion_ring(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("selftest 1", ctx);
    let nets = corpus(ctx);
    report.push(ReportItem::value("corpus size", nets.len() as f64, nets.len() >= 200));
    let mut misclassified = 0usize;
    let mut positivity_failures = 0usize;
    for n in &nets {
        let m = n.x.is_moderate();
        let g = n.x.is_negligible();
        let p = n.x.is_strictly_positive();
        if let Some(want) = n.moderate {
            if m.is_true() != want || m.is_indeterminate() {
                misclassified += 1;
            }
        }
        if let Some(want) = n.negligible {
            if g.is_true() != want || g.is_indeterminate() {
                misclassified += 1;
            }
        }
        if let Some(want) = n.strictly_positive {
            // nonpositive nets may legitimately come out False or
            // Indeterminate; only a wrong True/False is a misclassification
            if want != p.is_true() && (want || p.is_indeterminate()) {
                misclassified += 1;
            }
        }
        // strict positivity => invertibility and positive tail samples
        if p.is_true() {
            let one = GenNum::constant(ctx.clone(), 1.0);
            if one.div(&n.x).is_err() {
                positivity_failures += 1;
            }
            if ctx.grid.tail_indices().any(|i| n.x.samples[i].sign <= 0) {
                positivity_failures += 1;
            }
        }
    }
    report.push(ReportItem::value("misclassifications", misclassified as f64, misclassified == 0));
    report.push(ReportItem::value(
        "positivity/invertibility failures",
        positivity_failures as f64,
        positivity_failures == 0,
    ));
    // order antisymmetry: x <= y and y <= x force a negligible difference
    let mut anti_failures = 0usize;
    for (a, b) in [
        ("eps", "eps + exp(-1/eps)"),
        ("eps^2", "eps^2"),
        ("1 + eps^5", "1 + eps^5 + exp(-2/eps)"),
    ] {
        let x = GenNum::from_net_str(ctx.clone(), a)?;
        let y = GenNum::from_net_str(ctx.clone(), b)?;
        if x.leq(&y).is_true() && y.leq(&x).is_true() {
            if !x.sub(&y).is_negligible().is_true() {
                anti_failures += 1;
            }
        } else {
            anti_failures += 1;
        }
    }
    report.push(ReportItem::value("antisymmetry failures", anti_failures as f64, anti_failures == 0));
    Ok(report)
}

fn criterion_mollifier(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("selftest 2", ctx);
    let gl = quad::rule(ctx.cfg.quad_nodes_oracle);
    for j in 0..=10usize {
        let opts = MollifierOptions { d: Some(0.5), psi0: false };
        let m = Mollifier1D::build(j, opts, &ctx.cfg)?;
        let res = m.max_residual();
        report.push(ReportItem::value(format!("j={} max moment residual", j), res, res <= 1e-10));
        // reproduction of polynomials of degree <= j
        let mut worst = 0.0f64;
        for deg in 0..=j {
            for &x in &[-0.35f64, 0.0, 0.41, 0.8] {
                let conv = gl.integrate(-1.0, 1.0, |s| m.density(s) * (x - s).powi(deg as i32));
                worst = worst.max((conv - x.powi(deg as i32)).abs());
            }
        }
        report.push(ReportItem::value(
            format!("j={} polynomial reproduction error", j),
            worst,
            worst <= 1e-8,
        ));
    }
    Ok(report)
}

fn criterion_embedding(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("selftest 3", ctx);
    let net = MollifierNet::default_net(ctx.clone(), MollifierOptions { d: Some(0.5), psi0: false })?;
    let phi = parse_expr("exp(-(x^2)) * (1 + x/3)")?;
    let support = (-6.0, 6.0);
    for (name, spec) in [
        ("delta", DistSpec::delta(0, 0.0)),
        ("delta'", DistSpec::delta(1, 0.0)),
        ("heaviside", DistSpec::heaviside(0.0)),
    ] {
        let pr = pairing_limit(&spec, &phi, support, &net);
        let err = pr.final_error();
        let tail: Vec<f64> = ctx
            .grid
            .tail_indices()
            .map(|i| pr.rows[i].abs_err)
            .collect();
        let monotone = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) || w[1] <= 1e-12);
        report.push(ReportItem::value(format!("{} pairing final error", name), err, err <= 1e-6));
        report.push(ReportItem::value(
            format!("{} pairing tail monotone", name),
            f64::from(u8::from(monotone)),
            monotone,
        ));
    }
    // derivative of the embedded Heaviside is the embedded delta, at the
    // expression level
    let probe_xs = [-0.7, -0.1, 0.0, 0.2, 1.3];
    let c1 = derivative_commutation_check(&DistSpec::heaviside(0.0), &net, 1, &probe_xs)?;
    report.push(ReportItem::value("d(iota H) vs iota(delta)", c1, c1 == 0.0));
    let c2 = derivative_commutation_check(&DistSpec::delta(0, 0.0), &net, 1, &probe_xs)?;
    report.push(ReportItem::value("d(iota delta) vs iota(delta')", c2, c2 == 0.0));
    // half-jump calibration
    let h = embed(&DistSpec::heaviside(0.0), &net)?;
    let dev = (0..ctx.grid.len())
        .map(|i| (h.comp(i, 0).eval(&[0.0], ctx.grid.points[i]) - 0.5).abs())
        .fold(0.0f64, f64::max);
    report.push(ReportItem::value("max |H(0) - 1/2|", dev, dev <= 1e-10));
    Ok(report)
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

fn criterion_local_inverse(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("selftest 4", ctx);
    let origin = GenPoint::from_exprs(ctx.clone(), &[parse_expr("0")?]);
    // (source, y expression, per-eps oracle for the preimage)
    let cases: Vec<(&str, &str, Box<dyn Fn(f64) -> f64>)> = vec![
        ("eps * x", "eps^2 / 4", Box::new(|eps| eps / 4.0)),
        ("x", "3/8", Box::new(|_| 0.375)),
        ("x + x^3", "1/40", Box::new(|_| bisect(|t| t + t * t * t, 0.025, -1.0, 1.0))),
        (
            "sin(x / eps)",
            "eps^0 / 8",
            Box::new(|eps| eps * bisect(|s| s.sin(), 0.125, -1.5, 1.5)),
        ),
    ];
    for (src, y_src, oracle) in &cases {
        let f = Gsf::from_str_1d(ctx.clone(), src)?;
        let cert = sharp_ift_certificate(&f, &origin)?;
        let y = GenPoint::from_exprs(ctx.clone(), &[parse_expr(y_src)?]);
        let (x, _, v) = local_inverse_eval(&cert, &y)?;
        report.push(ReportItem::verdict(
            format!("{}: round-trip residual negligible", src),
            v.clone(),
            v.is_true(),
        ));
        let dev = ctx
            .grid
            .points
            .iter()
            .enumerate()
            .map(|(i, &eps)| (x.coords[0].samples[i].lin - oracle(eps)).abs())
            .fold(0.0f64, f64::max);
        report.push(ReportItem::value(format!("{}: max |x - oracle|", src), dev, dev <= 1e-12));
        // inverse Jacobian times Jacobian, and the determinant lower bound
        match inverse_jacobian(&cert, &y) {
            Ok(inv_j) => {
                let j = f.jacobian(&x);
                let prod_dev = inv_j
                    .mul_mat(&j)
                    .per_eps
                    .iter()
                    .map(|m| (m[(0, 0)] - 1.0).abs())
                    .fold(0.0f64, f64::max);
                report.push(ReportItem::value(
                    format!("{}: |inv(Df) Df - 1|", src),
                    prod_dev,
                    prod_dev <= 1e-10,
                ));
            }
            Err(e) => {
                report.push(
                    ReportItem::value(format!("{}: inverse Jacobian", src), f64::NAN, false)
                        .note(e.to_string()),
                );
            }
        }
    }
    Ok(report)
}

fn criterion_examples(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("selftest 5", ctx);
    for sub in crate::examples::run_all(ctx)? {
        let pass = sub.pass();
        report.push(ReportItem::value(sub.command.clone(), f64::from(u8::from(pass)), pass));
    }
    Ok(report)
}

fn criterion_global_inverse(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("selftest 6", ctx);
    // 1D theorem with r = 1/2
    let f = Gsf::from_str_1d(ctx.clone(), "x + sin(x)/2")?;
    let inv = global_1d_invert(&f, 0.5)?;
    let y_val = std::f64::consts::PI;
    let y = GenNum::constant(ctx.clone(), y_val);
    let (g, _, v) = inv.eval(&y)?;
    report.push(ReportItem::verdict("1D inverse residual negligible", v.clone(), v.is_true()));
    let oracle = bisect(|t| t + 0.5 * t.sin(), y_val, 0.0, 4.0);
    let dev = g.samples.iter().map(|m| (m.lin - oracle).abs()).fold(0.0f64, f64::max);
    report.push(ReportItem::value("1D inverse vs bisection oracle", dev, dev <= 1e-12));
    let bound = (y_val.abs() + inv.cert.c_bound) / inv.cert.r;
    let contained = g.samples.iter().all(|m| m.lin.abs() <= bound);
    report.push(ReportItem::value(
        "surjectivity bound (|y|+C)/r holds",
        f64::from(u8::from(contained)),
        contained,
    ));
    // Hadamard: componentwise x + x^3 passes, arctan does not
    let cubic = Gsf::new_uniform(
        ctx.clone(),
        vec![parse_expr("x1 + x1^3")?, parse_expr("x2 + x2^3")?],
        "cubic2",
    );
    let had = hadamard_certificate(&cubic, 6);
    report.push(ReportItem::value(
        "Hadamard certificate for componentwise x + x^3",
        f64::from(u8::from(had.is_ok())),
        had.is_ok(),
    ));
    let flat = Gsf::new_uniform(ctx.clone(), vec![parse_expr("atan(x)")?], "arctan");
    let not_proper = matches!(hadamard_certificate(&flat, 6), Err(GsfError::NotProper(_)));
    report.push(ReportItem::value(
        "Hadamard rejects arctan",
        f64::from(u8::from(not_proper)),
        not_proper,
    ));
    // Hadamard-Levy with the measured constant: sup 1/(1+3x^2) = 1
    let measured_c = 1.0;
    let hl = hadamard_levy_certificate(&cubic, Beta::Constant(measured_c));
    report.push(
        ReportItem::value(
            "Hadamard-Levy constant certificate",
            f64::from(u8::from(hl.is_ok())),
            hl.is_ok(),
        )
        .note(format!("measured C = {}", measured_c)),
    );
    let cert = had?;
    let y2 = GenPoint::new(vec![
        GenNum::constant(ctx.clone(), 2.0),
        GenNum::constant(ctx.clone(), 2.0),
    ]);
    let (x2, _, v2) = global_inverse_eval(&cubic, &cert, &y2)?;
    let oracle2 = bisect(|t| t + t * t * t, 2.0, 0.0, 2.0);
    let dev2 = x2
        .coords
        .iter()
        .flat_map(|c| c.samples.iter())
        .map(|m| (m.lin - oracle2).abs())
        .fold(0.0f64, f64::max);
    report.push(ReportItem::value("continuation vs bisection oracle", dev2, dev2 <= 1e-10));
    report.push(ReportItem::verdict(
        "continuation residual negligible",
        v2.clone(),
        v2.is_true(),
    ));
    Ok(report)
}

fn criterion_sharp_diff(ctx: &Ctx) -> Result<Report, GsfError> {
    let mut report = Report::new("selftest 7", ctx);
    let square = Gsf::from_str_1d(ctx.clone(), "x^2")?;
    let x0 = GenPoint::from_exprs(ctx.clone(), &[parse_expr("0")?]);
    let r1 = sharp_differentiability_check(&square, &x0, 8)?;
    report.push(
        ReportItem::value("x^2 quotient decay", r1.rows.last().unwrap().quotient, r1.pass)
            .note(format!("fitted q = {:.3}", r1.q_hat)),
    );
    let net = MollifierNet::default_net(ctx.clone(), MollifierOptions { d: Some(0.5), psi0: false })?;
    let delta = embed(&DistSpec::delta(0, 0.0), &net)?;
    let r2 = sharp_differentiability_check(&delta, &x0, 8)?;
    report.push(
        ReportItem::value("delta quotient decay", r2.rows.last().unwrap().quotient, r2.pass)
            .note(format!("fitted q = {:.3}", r2.q_hat)),
    );
    Ok(report)
}
