//! Generalized smooth functions: nets of smooth expressions evaluated at
//! generalized points, with derivative-moderateness certification, exact
//! differentiation, Jacobians, composition, incremental ratios, and
//! Lipschitz probes.

use crate::error::GsfError;
use crate::expr::Expr;
use crate::gauge::Ctx;
use crate::gen_num::{GenMatrix, GenNum, GenPoint};
use crate::logval::Mag;
use crate::probes;
use crate::sets::SetNet;
use crate::verdict::{Truth, Verdict, Witness};
use serde::Serialize;

/// The defining net: either one expression vector for all eps, or one per
/// grid point (mollifier schedules change the expression with eps).
#[derive(Clone, Debug)]
pub enum NetFamily {
    Uniform(Vec<Expr>),
    PerEps(Vec<Vec<Expr>>),
}

/// How the point set X of the domain is meant: sharp or Fermat
/// neighborhoods, or compactly supported points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Sharp,
    Fermat,
    Csp,
}

#[derive(Clone, Debug)]
pub struct Gsf {
    pub ctx: Ctx,
    pub family: NetFamily,
    pub arity: usize,
    pub dim_out: usize,
    pub domain: Option<SetNet>,
    pub domain_kind: DomainKind,
    pub label: String,
}

/// Moderateness verdicts of all derivatives up to the certification order.
#[derive(Clone, Debug, Serialize)]
pub struct EvalCertificate {
    pub order: usize,
    pub entries: Vec<CertEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertEntry {
    pub alpha: Vec<usize>,
    pub component: usize,
    pub verdict: Verdict,
}

impl EvalCertificate {
    pub fn all_certified(&self) -> bool {
        self.entries.iter().all(|e| !e.verdict.is_false())
    }
}

/// All multi-indices over n variables with total order <= k, by order.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; n]];
    let mut frontier = out.clone();
    for _ in 0..k {
        let mut next = Vec::new();
        for a in &frontier {
            for v in 0..n {
                let mut b = a.clone();
                b[v] += 1;
                if !next.contains(&b) {
                    next.push(b);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

impl Gsf {
    pub fn new_uniform(ctx: Ctx, comps: Vec<Expr>, label: impl Into<String>) -> Gsf {
        let arity = comps.iter().map(Expr::arity).max().unwrap_or(0);
        let dim_out = comps.len();
        Gsf {
            ctx,
            family: NetFamily::Uniform(comps),
            arity,
            dim_out,
            domain: None,
            domain_kind: DomainKind::Sharp,
            label: label.into(),
        }
    }

    pub fn new_per_eps(ctx: Ctx, per_eps: Vec<Vec<Expr>>, label: impl Into<String>) -> Gsf {
        assert_eq!(per_eps.len(), ctx.grid.len());
        let arity =
            per_eps.iter().flatten().map(Expr::arity).max().unwrap_or(0);
        let dim_out = per_eps[0].len();
        Gsf {
            ctx,
            family: NetFamily::PerEps(per_eps),
            arity,
            dim_out,
            domain: None,
            domain_kind: DomainKind::Sharp,
            label: label.into(),
        }
    }

    pub fn from_str_1d(ctx: Ctx, src: &str) -> Result<Gsf, GsfError> {
        let e = crate::expr::parse_expr(src)?;
        Ok(Gsf::new_uniform(ctx, vec![e], src))
    }

    pub fn with_domain(mut self, domain: SetNet, kind: DomainKind) -> Gsf {
        self.domain = Some(domain);
        self.domain_kind = kind;
        self
    }

    /// Component expression at a grid index.
    pub fn comp(&self, grid_i: usize, j: usize) -> &Expr {
        match &self.family {
            NetFamily::Uniform(c) => &c[j],
            NetFamily::PerEps(p) => &p[grid_i][j],
        }
    }

    fn map_family(&self, f: impl Fn(&Expr) -> Expr) -> NetFamily {
        match &self.family {
            NetFamily::Uniform(c) => NetFamily::Uniform(c.iter().map(&f).collect()),
            NetFamily::PerEps(p) => {
                NetFamily::PerEps(p.iter().map(|row| row.iter().map(&f).collect()).collect())
            }
        }
    }

    fn check_domain(&self, x: &GenPoint) -> Result<(), GsfError> {
        if let Some(dom) = &self.domain {
            let v = match self.domain_kind {
                DomainKind::Sharp | DomainKind::Fermat => {
                    crate::sets::strongly_internal_membership(x, dom)
                }
                DomainKind::Csp => crate::sets::internal_membership(x, dom),
            };
            if v.is_false() {
                return Err(GsfError::DomainViolation(format!(
                    "{} not in {}: {}",
                    x.coords[0].label, dom.label, v
                )));
            }
        }
        Ok(())
    }

    /// Raw sampled evaluation without certification.
    pub fn eval_point(&self, x: &GenPoint) -> GenPoint {
        let coords = (0..self.dim_out)
            .map(|j| {
                let samples: Vec<Mag> = self
                    .ctx
                    .grid
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, &eps)| {
                        let args: Vec<Mag> =
                            x.coords.iter().map(|c| c.samples[i]).collect();
                        self.comp(i, j).eval_mag_at(&args, eps)
                    })
                    .collect();
                GenNum::from_mags(
                    self.ctx.clone(),
                    format!("{}[{}](x)", self.label, j),
                    samples,
                )
            })
            .collect();
        GenPoint::new(coords)
    }

    /// Certified evaluation: domain check, value, and moderateness of all
    /// derivatives up to the configured order. Moderateness False is an
    /// error; Indeterminate entries stay visible in the certificate.
    pub fn eval(&self, x: &GenPoint) -> Result<(GenPoint, EvalCertificate), GsfError> {
        self.check_domain(x)?;
        let value = self.eval_point(x);
        let order = self.ctx.cfg.cert_order;
        let mut entries = Vec::new();
        for alpha in multi_indices(self.arity.max(1), order) {
            let df = self.differentiate(&alpha);
            let y = df.eval_point(x);
            for (j, c) in y.coords.iter().enumerate() {
                let verdict = c.is_moderate();
                if verdict.is_false() {
                    return Err(GsfError::NotModerate { alpha, verdict });
                }
                entries.push(CertEntry { alpha: alpha.clone(), component: j, verdict });
            }
        }
        Ok((value, EvalCertificate { order, entries }))
    }

    /// Exact derivative for a multi-index over the variables.
    pub fn differentiate(&self, alpha: &[usize]) -> Gsf {
        let fam = self.map_family(|e| e.diff_multi(alpha));
        Gsf {
            ctx: self.ctx.clone(),
            family: fam,
            arity: self.arity,
            dim_out: self.dim_out,
            domain: self.domain.clone(),
            domain_kind: self.domain_kind,
            label: format!("D^{:?} {}", alpha, self.label),
        }
    }

    /// First-partials matrix sampled per eps.
    pub fn jacobian(&self, x: &GenPoint) -> GenMatrix {
        let n = self.arity;
        let partials: Vec<Gsf> = (0..n)
            .map(|v| {
                let mut alpha = vec![0; n];
                alpha[v] = 1;
                self.differentiate(&alpha)
            })
            .collect();
        let cols: Vec<GenPoint> = partials.iter().map(|p| p.eval_point(x)).collect();
        let per_eps = (0..self.ctx.grid.len())
            .map(|i| {
                nalgebra::DMatrix::from_fn(self.dim_out, n, |r, c| {
                    cols[c].coords[r].samples[i].lin
                })
            })
            .collect();
        GenMatrix::new(self.ctx.clone(), per_eps)
    }

    /// [Df_eps(x_eps) . v_eps] with exact log tracking per entry.
    pub fn directional_derivative(&self, x: &GenPoint, v: &GenPoint) -> GenPoint {
        let n = self.arity;
        let coords = (0..self.dim_out)
            .map(|j| {
                let samples: Vec<Mag> = self
                    .ctx
                    .grid
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, &eps)| {
                        let args: Vec<Mag> =
                            x.coords.iter().map(|c| c.samples[i]).collect();
                        let mut acc = Mag::ZERO;
                        for k in 0..n {
                            let mut alpha = vec![0; n];
                            alpha[k] = 1;
                            let d = self.comp(i, j).diff_multi(&alpha);
                            acc = acc.add(
                                d.eval_mag_at(&args, eps).mul(v.coords[k].samples[i]),
                            );
                        }
                        acc
                    })
                    .collect();
                GenNum::from_mags(self.ctx.clone(), format!("D{}[{}].v", self.label, j), samples)
            })
            .collect();
        GenPoint::new(coords)
    }

    /// Expression-level composition self(g(x)).
    pub fn compose(&self, g: &Gsf) -> Result<Gsf, GsfError> {
        if g.dim_out != self.arity {
            return Err(GsfError::Numeric(format!(
                "composition shape mismatch: inner gives {}, outer takes {}",
                g.dim_out, self.arity
            )));
        }
        let len = self.ctx.grid.len();
        let per_eps: Vec<Vec<Expr>> = (0..len)
            .map(|i| {
                let subs: Vec<Expr> =
                    (0..g.dim_out).map(|j| g.comp(i, j).clone()).collect();
                (0..self.dim_out)
                    .map(|j| self.comp(i, j).subst(&subs).simplify())
                    .collect()
            })
            .collect();
        let label = format!("{} . {}", self.label, g.label);
        let uniform = matches!(
            (&self.family, &g.family),
            (NetFamily::Uniform(_), NetFamily::Uniform(_))
        );
        Ok(if uniform {
            Gsf {
                arity: g.arity,
                ..Gsf::new_uniform(self.ctx.clone(), per_eps[0].clone(), label)
            }
        } else {
            Gsf { arity: g.arity, ..Gsf::new_per_eps(self.ctx.clone(), per_eps, label) }
        })
    }

    /// Taylor-form incremental ratio check: for each h, the residual
    /// |f(x+hv) - f(x) - h * rhat(x,h)| with rhat = int_0^1 Df(x+thv).v dt
    /// must be negligible (or Indeterminate) on the grid.
    pub fn incremental_ratio_check(
        &self,
        x: &GenPoint,
        v: &GenPoint,
        h_set: &[GenNum],
    ) -> Vec<(String, Verdict)> {
        let n = self.arity;
        let gl = crate::quad::rule(40);
        let partials: Vec<Vec<Expr>> = (0..self.ctx.grid.len())
            .map(|i| {
                (0..self.dim_out)
                    .flat_map(|j| {
                        (0..n).map(move |k| {
                            let mut alpha = vec![0; n];
                            alpha[k] = 1;
                            self.comp(i, j).diff_multi(&alpha)
                        })
                    })
                    .collect()
            })
            .collect();
        h_set
            .iter()
            .map(|h| {
                let mut residuals = Vec::with_capacity(self.ctx.grid.len());
                for (i, &eps) in self.ctx.grid.points.iter().enumerate() {
                    let xi: Vec<f64> = x.lin_at(i);
                    let vi: Vec<f64> = v.lin_at(i);
                    let hi = h.samples[i].lin;
                    let shifted: Vec<f64> =
                        xi.iter().zip(&vi).map(|(a, b)| a + hi * b).collect();
                    let mut sq = 0.0;
                    for j in 0..self.dim_out {
                        let fx = self.comp(i, j).eval(&xi, eps);
                        let fxh = self.comp(i, j).eval(&shifted, eps);
                        let rhat = gl.integrate(0.0, 1.0, |t| {
                            let p: Vec<f64> = xi
                                .iter()
                                .zip(&vi)
                                .map(|(a, b)| a + t * hi * b)
                                .collect();
                            (0..n)
                                .map(|k| partials[i][j * n + k].eval(&p, eps) * vi[k])
                                .sum()
                        });
                        let r = fxh - fx - hi * rhat;
                        sq += r * r;
                    }
                    residuals.push(sq.sqrt());
                }
                let net = GenNum::from_linear_floored(
                    self.ctx.clone(),
                    format!("taylor residual, h = {}", h.label),
                    &residuals,
                );
                (h.label.clone(), net.is_negligible())
            })
            .collect()
    }

    /// Probe-based Lipschitz estimate in a small ball of the given kind
    /// around x0. Returns the verdict plus the tail estimate of L.
    pub fn lipschitz_probe(&self, x0: &GenPoint, kind: crate::sets::BallKind) -> (Verdict, f64) {
        let n = self.arity.max(1);
        let count = self.ctx.cfg.probes_per_dim;
        let mut l_samples = Vec::with_capacity(self.ctx.grid.len());
        for (i, &eps) in self.ctx.grid.points.iter().enumerate() {
            let radius = match kind {
                crate::sets::BallKind::Sharp => self.ctx.gauge.rho(eps),
                crate::sets::BallKind::Fermat => 0.25,
            };
            let center = x0.lin_at(i);
            let pts = probes::ball(&center, radius, count);
            let vals: Vec<Vec<f64>> = pts
                .iter()
                .map(|p| (0..self.dim_out).map(|j| self.comp(i, j).eval(p, eps)).collect())
                .collect();
            let mut l: f64 = 0.0;
            for w in 0..pts.len() - 1 {
                let (p, q) = (&pts[w], &pts[w + 1]);
                let dx: f64 = p
                    .iter()
                    .zip(q)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dx == 0.0 {
                    continue;
                }
                let df: f64 = vals[w]
                    .iter()
                    .zip(&vals[w + 1])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                l = l.max(df / dx);
            }
            l_samples.push(if l.is_finite() { l } else { f64::MAX });
        }
        let net = GenNum::from_fn(self.ctx.clone(), "L", {
            let ls = l_samples.clone();
            let pts = self.ctx.grid.points.clone();
            move |e| {
                let i = pts.iter().position(|&p| p == e).unwrap();
                ls[i]
            }
        });
        let tail_l = self
            .ctx
            .grid
            .tail_indices()
            .map(|i| l_samples[i])
            .fold(0.0f64, f64::max);
        let _ = n;
        let verdict = match kind {
            crate::sets::BallKind::Sharp => {
                let v = net.is_moderate();
                match v.value {
                    Truth::True => Verdict::yes(Witness::Real { r: tail_l }, "sampled L moderate"),
                    _ => v,
                }
            }
            crate::sets::BallKind::Fermat => {
                let est = net.exponent_estimate();
                match est.finite() {
                    Some(e) if est.stable && e >= -self.ctx.cfg.exponent_slack => Verdict::yes(
                        Witness::Real { r: tail_l },
                        "sampled L finite in the Fermat sense",
                    ),
                    Some(e) if est.stable => Verdict::no(
                        Witness::Exponent { e },
                        "sampled L has negative exponent (infinite)",
                    ),
                    _ => Verdict::unknown("unstable L exponent"),
                }
            }
        };
        (verdict, tail_l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::gauge::Context;
    use crate::sets::BallKind;

    fn gsf(src: &str) -> Gsf {
        Gsf::from_str_1d(Context::default_ctx(), src).unwrap()
    }

    fn pt(src: &str) -> GenPoint {
        GenPoint::from_exprs(Context::default_ctx(), &[parse_expr(src).unwrap()])
    }

    #[test]
    fn eval_square_at_infinitesimal() {
        let f = gsf("x^2");
        let (y, cert) = f.eval(&pt("eps")).unwrap();
        assert!(cert.all_certified());
        let expect = GenNum::from_net_str(Context::default_ctx(), "eps^2").unwrap();
        assert!(y.coords[0].sub(&expect).is_negligible().is_true());
    }

    #[test]
    fn exploding_net_rejected() {
        let f = gsf("exp(x/eps)");
        let err = f.eval(&pt("1")).unwrap_err();
        assert!(matches!(err, GsfError::NotModerate { .. }));
    }

    #[test]
    fn second_derivative_of_cube() {
        let f = gsf("x^3");
        let d2 = f.differentiate(&[2]);
        let y = d2.eval_point(&pt("eps"));
        let expect = GenNum::from_net_str(Context::default_ctx(), "6*eps").unwrap();
        assert!(y.coords[0].sub(&expect).is_negligible().is_true());
    }

    #[test]
    fn infinite_derivative_of_fast_oscillation() {
        // f(x) = sin(x/r) with r = [eps]: f'(0) = [1/eps]
        let f = gsf("sin(x/eps)");
        let d = f.differentiate(&[1]);
        let y = d.eval_point(&pt("0"));
        let est = y.coords[0].exponent_estimate();
        assert!((est.finite().unwrap() + 1.0).abs() < 0.05);
    }

    #[test]
    fn jacobian_chain_rule() {
        let ctx = Context::default_ctx();
        // f: R^2 -> R^2, g: R^2 -> R^2
        let f = Gsf::new_uniform(
            ctx.clone(),
            vec![parse_expr("x1 * x2").unwrap(), parse_expr("sin(x1)").unwrap()],
            "f",
        );
        let g = Gsf::new_uniform(
            ctx.clone(),
            vec![parse_expr("x1 + x2^2").unwrap(), parse_expr("x2 - 1").unwrap()],
            "g",
        );
        let x = GenPoint::from_reals(ctx.clone(), &[0.3, 0.7]);
        let comp = f.compose(&g).unwrap();
        let lhs = comp.jacobian(&x);
        let gx = g.eval_point(&x);
        let rhs = f.jacobian(&gx).mul_mat(&g.jacobian(&x));
        let diff = lhs.sub_mat(&rhs);
        for m in &diff.per_eps {
            assert!(m.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn directional_derivative_with_infinite_vector() {
        let f = gsf("x^2");
        let x = pt("1");
        let v = GenPoint::from_exprs(Context::default_ctx(), &[parse_expr("1/eps").unwrap()]);
        let d = f.directional_derivative(&x, &v);
        // 2 * 1/eps
        let est = d.coords[0].exponent_estimate();
        assert!((est.finite().unwrap() + 1.0).abs() < 0.05);
    }

    #[test]
    fn incremental_ratio_exact_for_square() {
        let ctx = Context::default_ctx();
        let f = gsf("x^2");
        let x = pt("1/3");
        let v = pt("1");
        let h = GenNum::from_net_str(ctx, "eps").unwrap();
        let report = f.incremental_ratio_check(&x, &v, &[h]);
        assert!(report[0].1.is_true(), "{}", report[0].1);
    }

    #[test]
    fn lipschitz_probes() {
        let f = gsf("2*x");
        let zero = pt("0");
        let (v, l) = f.lipschitz_probe(&zero, BallKind::Sharp);
        assert!(v.is_true());
        assert!((l - 2.0).abs() < 1e-6);
        let (v, l) = f.lipschitz_probe(&zero, BallKind::Fermat);
        assert!(v.is_true());
        assert!((l - 2.0).abs() < 1e-6);
        let (v, l) = gsf("sin(x)").lipschitz_probe(&zero, BallKind::Fermat);
        assert!(v.is_true());
        assert!(l <= 1.0 + 1e-9);
    }

    #[test]
    fn multi_index_generation() {
        let idx = multi_indices(2, 2);
        assert!(idx.contains(&vec![0, 0]));
        assert!(idx.contains(&vec![1, 1]));
        assert!(idx.contains(&vec![2, 0]));
        assert_eq!(idx.len(), 6);
    }
}
