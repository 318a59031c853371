//! Embedding of distributions as generalized smooth functions by
//! convolution with the concentrated mollifier net: T -> [(T * psi^b_eps)].
//!
//! The embedded Heaviside is the cumulative kernel expression; the embedded
//! delta derivatives are its exact expression derivatives, so commutation
//! with d/dx is structural, not numeric.

use crate::error::GsfError;
use crate::expr::{Expr, PolyKernel};
use crate::gsf_fn::Gsf;
use crate::mollifier::MollifierNet;
use crate::quad;
use serde::Serialize;
use std::sync::Arc;

/// Number of convolution nodes for embedding regular densities.
const CONV_NODES: usize = 80;

#[derive(Clone, Debug)]
pub enum DistAtom {
    /// k-th derivative of the Dirac delta at a point.
    Delta { order: usize, at: f64 },
    Heaviside { at: f64 },
    /// A smooth compactly supported density.
    Regular { expr: Expr, support: (f64, f64) },
}

#[derive(Clone, Debug)]
pub struct DistSpec {
    pub terms: Vec<(f64, DistAtom)>,
}

impl DistSpec {
    pub fn delta(order: usize, at: f64) -> DistSpec {
        DistSpec { terms: vec![(1.0, DistAtom::Delta { order, at })] }
    }

    pub fn heaviside(at: f64) -> DistSpec {
        DistSpec { terms: vec![(1.0, DistAtom::Heaviside { at })] }
    }

    pub fn regular(expr: Expr, support: (f64, f64)) -> DistSpec {
        DistSpec { terms: vec![(1.0, DistAtom::Regular { expr, support })] }
    }

    /// Distributional derivative within the catalog.
    pub fn derivative(&self) -> Result<DistSpec, GsfError> {
        let terms = self
            .terms
            .iter()
            .map(|(c, a)| {
                Ok((
                    *c,
                    match a {
                        DistAtom::Delta { order, at } => {
                            DistAtom::Delta { order: order + 1, at: *at }
                        }
                        DistAtom::Heaviside { at } => DistAtom::Delta { order: 0, at: *at },
                        DistAtom::Regular { expr, support } => {
                            DistAtom::Regular { expr: expr.diff(0), support: *support }
                        }
                    },
                ))
            })
            .collect::<Result<_, GsfError>>()?;
        Ok(DistSpec { terms })
    }

    /// Parses `delta@a`, `delta'@a`, `delta''@a`, `heaviside@a`.
    pub fn parse(src: &str) -> Result<DistSpec, GsfError> {
        let (name, at) = src
            .split_once('@')
            .ok_or_else(|| GsfError::Parse(format!("expected name@point, got {:?}", src)))?;
        let at: f64 =
            at.trim().parse().map_err(|_| GsfError::Parse(format!("bad point {:?}", at)))?;
        let base = name.trim_end_matches('\'');
        let order = name.len() - base.len();
        match base.trim() {
            "delta" => Ok(DistSpec::delta(order, at)),
            "heaviside" | "H" if order == 0 => Ok(DistSpec::heaviside(at)),
            other => Err(GsfError::UnsupportedDist(other.into())),
        }
    }

    fn label(&self) -> String {
        self.terms
            .iter()
            .map(|(c, a)| {
                let name = match a {
                    DistAtom::Delta { order, at } => {
                        format!("delta{}@{}", "'".repeat(*order), at)
                    }
                    DistAtom::Heaviside { at } => format!("H@{}", at),
                    DistAtom::Regular { expr, .. } => format!("reg({})", expr),
                };
                if *c == 1.0 { name } else { format!("{}*{}", c, name) }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn heaviside_expr(kernel: Arc<PolyKernel>, b: &Expr, at: f64) -> Expr {
    let shifted = if at == 0.0 {
        Expr::Var(0)
    } else {
        Expr::Sub(Expr::Var(0).boxed(), Expr::Const(at).boxed())
    };
    Expr::PolyBumpInt {
        kernel,
        arg: Expr::Mul(b.clone().boxed(), shifted.boxed()).boxed(),
    }
}

fn atom_expr(atom: &DistAtom, kernel: Arc<PolyKernel>, psi_mono: &[f64], b: &Expr) -> Expr {
    match atom {
        DistAtom::Heaviside { at } => heaviside_expr(kernel, b, *at),
        DistAtom::Delta { order, at } => {
            let mut e = heaviside_expr(kernel, b, *at);
            for _ in 0..=*order {
                e = e.diff(0);
            }
            e
        }
        DistAtom::Regular { expr, support: _ } => {
            // (f * psi^b)(x) = sum_q w_q psi(s_q) f(x - s_q / b)
            let gl = quad::rule(CONV_NODES);
            let inv_b = Expr::Div(Expr::Const(1.0).boxed(), b.clone().boxed());
            let mut acc = Expr::Const(0.0);
            for (&s, &w) in gl.nodes.iter().zip(&gl.weights) {
                let psi_s = crate::expr::eval_poly(psi_mono, s) * crate::expr::unit_bump(s);
                if psi_s == 0.0 {
                    continue;
                }
                let arg = Expr::Sub(
                    Expr::Var(0).boxed(),
                    Expr::Mul(Expr::Const(s).boxed(), inv_b.clone().boxed()).boxed(),
                );
                acc = Expr::Add(
                    acc.boxed(),
                    Expr::Mul(Expr::Const(w * psi_s).boxed(), expr.subst(&[arg]).boxed())
                        .boxed(),
                );
            }
            acc.simplify()
        }
    }
}

/// iota^b(T): the embedded GSF, with per-grid expressions following the
/// mollifier's moment schedule.
pub fn embed(spec: &DistSpec, net: &MollifierNet) -> Result<Gsf, GsfError> {
    let ctx = net.ctx.clone();
    let mut kernels: Vec<Option<Arc<PolyKernel>>> = vec![None; ctx.cfg.j_max + 1];
    let mut per_eps = Vec::with_capacity(ctx.grid.len());
    for i in 0..ctx.grid.len() {
        let j = net.j_at(i);
        if kernels[j].is_none() {
            kernels[j] = Some(net.per_grid[i].kernel());
        }
        let kernel = kernels[j].clone().unwrap();
        let mut e = Expr::Const(0.0);
        for (c, atom) in &spec.terms {
            let a = atom_expr(atom, kernel.clone(), &net.per_grid[i].mono, &net.b);
            e = Expr::Add(e.boxed(), Expr::Mul(Expr::Const(*c).boxed(), a.boxed()).boxed());
        }
        per_eps.push(vec![e.simplify()]);
    }
    Ok(Gsf::new_per_eps(ctx, per_eps, format!("iota({})", spec.label())))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingRow {
    pub eps: f64,
    pub value: f64,
    pub abs_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub exact: f64,
    pub rows: Vec<PairingRow>,
    /// Empirical decay exponent of the error in b (log-log fit over the
    /// region above the noise floor); None when already at the floor.
    pub rate: Option<f64>,
}

impl PairingReport {
    pub fn final_error(&self) -> f64 {
        self.rows.last().map(|r| r.abs_err).unwrap_or(f64::NAN)
    }
}

/// Exact pairing <T, phi> for the catalog, with phi given symbolically and
/// compactly supported in `support`.
pub fn exact_pairing(spec: &DistSpec, phi: &Expr, support: (f64, f64)) -> f64 {
    let gl = quad::rule(400);
    spec.terms
        .iter()
        .map(|(c, atom)| {
            c * match atom {
                DistAtom::Delta { order, at } => {
                    let mut d = phi.clone();
                    for _ in 0..*order {
                        d = d.diff(0);
                    }
                    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                    sign * d.eval(&[*at], 0.0)
                }
                DistAtom::Heaviside { at } => {
                    let lo = at.max(support.0);
                    if lo >= support.1 {
                        0.0
                    } else {
                        gl.integrate(lo, support.1, |x| phi.eval(&[x], 0.0))
                    }
                }
                DistAtom::Regular { expr, support: s } => {
                    let (lo, hi) = (s.0.max(support.0), s.1.min(support.1));
                    if lo >= hi {
                        0.0
                    } else {
                        gl.integrate(lo, hi, |x| expr.eval(&[x], 0.0) * phi.eval(&[x], 0.0))
                    }
                }
            }
        })
        .sum()
}

/// Tabulates int iota(T)_eps * phi over the grid against the exact pairing.
/// Delta terms are integrated after exact integration by parts, so the
/// numbers are free of b^k-amplified cancellation.
pub fn pairing_limit(
    spec: &DistSpec,
    phi: &Expr,
    support: (f64, f64),
    net: &MollifierNet,
) -> PairingReport {
    let ctx = &net.ctx;
    let gl = quad::rule(ctx.cfg.quad_nodes);
    let exact = exact_pairing(spec, phi, support);
    let b_lin: Vec<f64> = ctx.grid.points.iter().map(|&e| net.b.eval(&[], e)).collect();
    let mut rows = Vec::with_capacity(ctx.grid.len());
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        let b = b_lin[i];
        let moll = &net.per_grid[i];
        let mut value = 0.0;
        for (c, atom) in &spec.terms {
            value += c * match atom {
                DistAtom::Delta { order, at } => {
                    // b^k int psi^(k)(s) phi(a + s/b) ds
                    //   = (-1)^k int psi(s) phi^(k)(a + s/b) ds
                    let mut d = phi.clone();
                    for _ in 0..*order {
                        d = d.diff(0);
                    }
                    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                    sign * gl.integrate(-1.0, 1.0, |s| {
                        moll.density(s) * d.eval(&[at + s / b], 0.0)
                    })
                }
                DistAtom::Heaviside { at } => {
                    let kernel = moll.kernel();
                    let trans = gl.integrate(-1.0, 1.0, |s| {
                        kernel.cumulative(s) * phi.eval(&[at + s / b], 0.0)
                    }) / b;
                    let hi = support.1;
                    let plateau = if at + 1.0 / b < hi {
                        gl.integrate(at + 1.0 / b, hi, |x| {
                            kernel.total * phi.eval(&[x], 0.0)
                        })
                    } else {
                        0.0
                    };
                    trans + plateau
                }
                DistAtom::Regular { expr, support: s } => {
                    // smooth in x: integrate the embedded sum directly
                    let emb = atom_expr(
                        &DistAtom::Regular { expr: expr.clone(), support: *s },
                        moll.kernel(),
                        &moll.mono,
                        &net.b,
                    );
                    gl.integrate(s.0.min(support.0) - 1.0, s.1.max(support.1) + 1.0, |x| {
                        emb.eval(&[x], eps) * phi.eval(&[x], 0.0)
                    })
                }
            };
        }
        rows.push(PairingRow { eps, value, abs_err: (value - exact).abs() });
    }
    // fit the decay exponent in b over the pre-noise-floor prefix
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .zip(&b_lin)
        .filter(|(r, _)| r.abs_err > 1e-13)
        .map(|(r, &b)| (b.ln(), r.abs_err.ln()))
        .collect();
    let rate = if pts.len() >= 3 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        Some(-(n * sxy - sx * sy) / (n * sxx - sx * sx))
    } else {
        None
    };
    PairingReport { exact, rows, rate }
}

/// Max pointwise difference of d^alpha(iota T) and iota(d^alpha T) over
/// probe points, per grid tail. Exactly zero for delta/Heaviside terms by
/// construction; regular terms differ only by node reuse.
pub fn derivative_commutation_check(
    spec: &DistSpec,
    net: &MollifierNet,
    order: usize,
    probe_xs: &[f64],
) -> Result<f64, GsfError> {
    let mut dspec = spec.clone();
    for _ in 0..order {
        dspec = dspec.derivative()?;
    }
    let f = embed(spec, net)?;
    let g = embed(&dspec, net)?;
    let mut alpha = vec![0usize; 1];
    alpha[0] = order;
    let df = f.differentiate(&alpha);
    let mut worst = 0.0f64;
    for i in net.ctx.grid.tail_indices() {
        let eps = net.ctx.grid.points[i];
        for &x in probe_xs {
            let a = df.comp(i, 0).eval(&[x], eps);
            let b = g.comp(i, 0).eval(&[x], eps);
            let scale = a.abs().max(b.abs()).max(1.0);
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::gauge::Context;
    use crate::gen_num::GenPoint;
    use crate::mollifier::MollifierOptions;

    fn net(options: MollifierOptions) -> MollifierNet {
        MollifierNet::default_net(Context::default_ctx(), options).unwrap()
    }

    #[test]
    fn heaviside_midpoint_calibration() {
        let n = net(MollifierOptions { d: Some(0.5), psi0: false });
        let h = embed(&DistSpec::heaviside(0.0), &n).unwrap();
        let ctx = Context::default_ctx();
        let zero = GenPoint::from_reals(ctx, &[0.0]);
        let y = h.eval_point(&zero);
        for s in &y.coords[0].samples {
            assert!((s.lin - 0.5).abs() <= 1e-10, "H(0) sample {}", s.lin);
        }
    }

    #[test]
    fn delta_at_zero_is_b() {
        let n = net(MollifierOptions { d: None, psi0: true });
        let d = embed(&DistSpec::delta(0, 0.0), &n).unwrap();
        let ctx = Context::default_ctx();
        let zero = GenPoint::from_reals(ctx.clone(), &[0.0]);
        let y = d.eval_point(&zero);
        let b = n.b_net();
        for (s, bv) in y.coords[0].samples.iter().zip(&b.samples) {
            assert!(
                (s.lin / bv.lin - 1.0).abs() <= 1e-9,
                "delta(0) = {} vs b = {}",
                s.lin,
                bv.lin
            );
        }
    }

    #[test]
    fn delta_pairing_converges() {
        let n = net(MollifierOptions::default());
        let phi = parse_expr("bump(x, -1, 1)").unwrap();
        let report = pairing_limit(&DistSpec::delta(0, 0.0), &phi, (-1.0, 1.0), &n);
        assert!(report.final_error() <= 1e-6, "err {}", report.final_error());
        // error decays along the schedule until the floor
        let errs: Vec<f64> = report.rows.iter().map(|r| r.abs_err).collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "non-monotone: {:?}", errs);
        }
    }

    #[test]
    fn delta_prime_pairing() {
        let n = net(MollifierOptions::default());
        let phi = parse_expr("bump(x, -1, 1) * (x + 1/2)").unwrap();
        let exact = exact_pairing(&DistSpec::delta(1, 0.0), &phi, (-1.0, 1.0));
        let dphi = phi.diff(0);
        assert!((exact + dphi.eval(&[0.0], 0.0)).abs() < 1e-14);
        let report = pairing_limit(&DistSpec::delta(1, 0.0), &phi, (-1.0, 1.0), &n);
        assert!(report.final_error() <= 1e-6, "err {}", report.final_error());
    }

    #[test]
    fn heaviside_pairing() {
        let n = net(MollifierOptions { d: Some(0.5), psi0: false });
        let phi = parse_expr("bump(x, 1/5, 4/5)").unwrap();
        let report = pairing_limit(&DistSpec::heaviside(0.0), &phi, (0.2, 0.8), &n);
        assert!(report.final_error() <= 1e-6, "err {}", report.final_error());
        assert!(report.exact > 0.0);
    }

    #[test]
    fn commutation_is_structural() {
        let n = net(MollifierOptions { d: Some(0.5), psi0: false });
        let xs: Vec<f64> = (-8..=8).map(|i| i as f64 / 8.0).collect();
        // d(iota H) = iota(delta) and d(iota delta) = iota(delta')
        let w = derivative_commutation_check(&DistSpec::heaviside(0.0), &n, 1, &xs).unwrap();
        assert_eq!(w, 0.0);
        let w = derivative_commutation_check(&DistSpec::delta(0, 0.0), &n, 1, &xs).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn regular_embedding_reproduces_constants() {
        let n = net(MollifierOptions::default());
        // f = 1 on a window; interior embedded values must be 1
        let f = DistSpec::regular(parse_expr("1").unwrap(), (-2.0, 2.0));
        let g = embed(&f, &n).unwrap();
        let i = n.ctx.grid.len() - 1;
        for &x in &[-0.5, 0.0, 0.7] {
            let v = g.comp(i, 0).eval(&[x], n.ctx.grid.points[i]);
            assert!((v - 1.0).abs() <= 1e-10, "at {}: {}", x, v);
        }
    }

    #[test]
    fn regular_commutation_small() {
        let n = net(MollifierOptions::default());
        let f = DistSpec::regular(parse_expr("x").unwrap(), (-4.0, 4.0));
        let xs = [-0.5, 0.0, 0.5];
        let w = derivative_commutation_check(&f, &n, 1, &xs).unwrap();
        assert!(w <= 1e-8, "commutation defect {}", w);
    }

    #[test]
    fn dist_spec_parsing() {
        assert!(matches!(
            DistSpec::parse("delta@0").unwrap().terms[0].1,
            DistAtom::Delta { order: 0, .. }
        ));
        assert!(matches!(
            DistSpec::parse("delta''@1.5").unwrap().terms[0].1,
            DistAtom::Delta { order: 2, .. }
        ));
        assert!(matches!(
            DistSpec::parse("heaviside@0").unwrap().terms[0].1,
            DistAtom::Heaviside { .. }
        ));
        assert!(DistSpec::parse("comb@0").is_err());
    }
}
