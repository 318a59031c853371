//! Mollifier construction: psi = (polynomial) * chi on (-1,1) with unit
//! integral and vanishing moments up to order j, optional boundary-split
//! (integral over the negative half-line pinned to d) and point
//! normalization psi(0) = 1. Certificates come from an independent
//! double-node quadrature oracle.

use crate::config::Config;
use crate::error::GsfError;
use crate::expr::{self, poly_expr, unit_bump, Expr, PolyKernel};
use crate::gauge::Ctx;
use crate::gen_num::GenNum;
use crate::quad;
use serde::Serialize;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MollifierOptions {
    /// Pin int_{-1}^0 psi to this value (Heaviside-at-0 calibration).
    pub d: Option<f64>,
    /// Add the constraint psi(0) = 1.
    pub psi0: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintResidual {
    pub name: String,
    pub residual: f64,
}

/// One mollifier: the polynomial factor in monomial coefficients, plus
/// certificates from the 400-node oracle.
#[derive(Clone, Debug)]
pub struct Mollifier1D {
    pub j: usize,
    pub options: MollifierOptions,
    pub mono: Vec<f64>,
    pub certificates: Vec<ConstraintResidual>,
    pub l1_norm: f64,
    pub cond: f64,
}

/// Monomial coefficient vectors of the Legendre polynomials P_0..P_n.
fn legendre_mono(n: usize) -> Vec<Vec<f64>> {
    let mut p: Vec<Vec<f64>> = vec![vec![1.0], vec![0.0, 1.0]];
    for k in 1..n {
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let mut next = vec![0.0; k + 2];
        for (i, &c) in p[k].iter().enumerate() {
            next[i + 1] += (2 * k + 1) as f64 * c;
        }
        for (i, &c) in p[k - 1].iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        for c in &mut next {
            *c /= (k + 1) as f64;
        }
        p.push(next);
    }
    p.truncate(n + 1);
    p
}

struct ConstraintSet {
    names: Vec<String>,
    rhs: Vec<f64>,
}

fn constraints(j: usize, options: &MollifierOptions) -> ConstraintSet {
    let mut names = vec!["int psi = 1".to_string()];
    let mut rhs = vec![1.0];
    for a in 1..=j {
        names.push(format!("int x^{} psi = 0", a));
        rhs.push(0.0);
    }
    if let Some(d) = options.d {
        names.push(format!("int_(-inf)^0 psi = {}", d));
        rhs.push(d);
    }
    if options.psi0 {
        names.push("psi(0) = 1".to_string());
        rhs.push(1.0);
    }
    ConstraintSet { names, rhs }
}

/// Applies constraint `row` to the polynomial-times-bump with the given
/// monomial coefficients, using an n-node rule.
fn apply_constraint(
    row: usize,
    j: usize,
    options: &MollifierOptions,
    mono: &[f64],
    nodes: usize,
) -> f64 {
    let gl = quad::rule(nodes);
    let dens = |s: f64| expr::eval_poly(mono, s) * unit_bump(s);
    if row <= j {
        let a = row as i32; // row 0 is the unit integral (alpha = 0)
        gl.integrate(-1.0, 1.0, |s| s.powi(a) * dens(s))
    } else if row == j + 1 && options.d.is_some() {
        gl.integrate(-1.0, 0.0, dens)
    } else {
        dens(0.0)
    }
}

impl Mollifier1D {
    pub fn build(j: usize, options: MollifierOptions, cfg: &Config) -> Result<Mollifier1D, GsfError> {
        if j > cfg.j_max {
            return Err(GsfError::UnsupportedDist(format!(
                "moment order {} above the cap {}",
                j, cfg.j_max
            )));
        }
        let cs = constraints(j, &options);
        let n_rows = cs.rhs.len();
        // one spare basis function per optional constraint keeps the system
        // solvable when symmetry makes rows dependent (d = 1/2 case)
        let extras = options.d.is_some() as usize + options.psi0 as usize;
        let n_cols = n_rows + extras;
        let basis = legendre_mono(n_cols - 1);
        let m = nalgebra::DMatrix::from_fn(n_rows, n_cols, |r, c| {
            apply_constraint(r, j, &options, &basis[c], cfg.quad_nodes)
        });
        let rhs = nalgebra::DVector::from_vec(cs.rhs.clone());
        let svd = m.clone().svd(true, true);
        let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let cutoff = max_sv * 1e-13;
        let min_sv = svd
            .singular_values
            .iter()
            .cloned()
            .filter(|&s| s > cutoff)
            .fold(f64::INFINITY, f64::min);
        let cond = max_sv / min_sv;
        if cond > cfg.moment_cond_cap {
            return Err(GsfError::IllConditioned { cond });
        }
        let c = svd
            .solve(&rhs, cutoff)
            .map_err(|e| GsfError::Numeric(format!("moment solve: {}", e)))?;
        // assemble monomial coefficients of the polynomial factor
        let mut mono = vec![0.0; n_cols];
        for (i, &ci) in c.iter().enumerate() {
            for (p, &bp) in basis[i].iter().enumerate() {
                mono[p] += ci * bp;
            }
        }
        // certify against the double-node oracle
        let mut certificates = Vec::new();
        for r in 0..n_rows {
            let got = apply_constraint(r, j, &options, &mono, cfg.quad_nodes_oracle);
            certificates.push(ConstraintResidual {
                name: cs.names[r].clone(),
                residual: (got - cs.rhs[r]).abs(),
            });
        }
        let gl = quad::rule(cfg.quad_nodes_oracle);
        let l1_norm =
            gl.integrate(-1.0, 1.0, |s| (expr::eval_poly(&mono, s) * unit_bump(s)).abs());
        Ok(Mollifier1D { j, options, mono, certificates, l1_norm, cond })
    }

    pub fn density(&self, x: f64) -> f64 {
        expr::eval_poly(&self.mono, x) * unit_bump(x)
    }

    pub fn max_residual(&self) -> f64 {
        self.certificates.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn kernel(&self) -> Arc<PolyKernel> {
        PolyKernel::new(self.mono.clone())
    }

    /// psi as an expression in Var(0).
    pub fn expr(&self) -> Expr {
        Expr::Mul(
            Expr::Bump { arg: Expr::Var(0).boxed(), lo: -1.0, hi: 1.0 }.boxed(),
            poly_expr(&self.mono, Expr::Var(0)).boxed(),
        )
    }
}

/// r (.) phi: x -> (1/r) phi(x/r), with an eps-dependent scale expression.
pub fn scale_action(r: &Expr, phi: &Expr) -> Expr {
    Expr::Mul(
        Expr::Div(Expr::Const(1.0).boxed(), r.clone().boxed()).boxed(),
        phi.subst(&[Expr::Div(Expr::Var(0).boxed(), r.clone().boxed())]).boxed(),
    )
    .simplify()
}

/// a (+) phi: y -> phi(y - a).
pub fn translate_action(a: &Expr, phi: &Expr) -> Expr {
    phi.subst(&[Expr::Sub(Expr::Var(0).boxed(), a.clone().boxed())]).simplify()
}

/// The eps-indexed mollifier net: per-grid moment order via the schedule
/// j(eps) = min(floor(log2(1/eps)), j_max), concentrated by the scale b.
#[derive(Clone, Debug)]
pub struct MollifierNet {
    pub ctx: Ctx,
    pub b: Expr,
    pub options: MollifierOptions,
    pub per_grid: Vec<Arc<Mollifier1D>>,
}

impl MollifierNet {
    pub fn new(ctx: Ctx, b: Expr, options: MollifierOptions) -> Result<MollifierNet, GsfError> {
        let mut by_j: Vec<Option<Arc<Mollifier1D>>> = vec![None; ctx.cfg.j_max + 1];
        let mut per_grid = Vec::with_capacity(ctx.grid.len());
        for i in 0..ctx.grid.len() {
            let j = Self::schedule(&ctx, i);
            if by_j[j].is_none() {
                by_j[j] = Some(Arc::new(Mollifier1D::build(j, options, &ctx.cfg)?));
            }
            per_grid.push(by_j[j].clone().unwrap());
        }
        Ok(MollifierNet { ctx, b, options, per_grid })
    }

    /// Default net for the eps gauge: b = [eps^-1].
    pub fn default_net(ctx: Ctx, options: MollifierOptions) -> Result<MollifierNet, GsfError> {
        let b = Expr::PowI(Expr::Eps.boxed(), -1);
        MollifierNet::new(ctx, b, options)
    }

    fn schedule(ctx: &Ctx, grid_i: usize) -> usize {
        let k = ctx.cfg.grid_kmin as usize + grid_i;
        k.min(ctx.cfg.j_max)
    }

    pub fn j_at(&self, grid_i: usize) -> usize {
        Self::schedule(&self.ctx, grid_i)
    }

    /// psi^b_eps(x) = b_eps * psi_eps(b_eps * x), as an expression in Var(0).
    pub fn psi_b_expr(&self, grid_i: usize) -> Expr {
        let inv_b = Expr::Div(Expr::Const(1.0).boxed(), self.b.clone().boxed());
        scale_action(&inv_b, &self.per_grid[grid_i].expr())
    }

    pub fn b_net(&self) -> GenNum {
        GenNum::from_expr(self.ctx.clone(), &self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::Context;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn order_zero_is_normalized_bump() {
        let m = Mollifier1D::build(0, MollifierOptions::default(), &cfg()).unwrap();
        assert!(m.max_residual() <= 1e-10, "residual {}", m.max_residual());
        assert!((m.l1_norm - 1.0).abs() < 1e-10);
        assert!(m.density(0.3) > 0.0);
    }

    #[test]
    fn vanishing_moments_certified() {
        let m = Mollifier1D::build(2, MollifierOptions::default(), &cfg()).unwrap();
        assert!(m.max_residual() <= 1e-10, "residual {}", m.max_residual());
        let hi = Mollifier1D::build(10, MollifierOptions::default(), &cfg()).unwrap();
        assert!(hi.max_residual() <= 1e-10, "j=10 residual {}", hi.max_residual());
    }

    #[test]
    fn symmetric_split_drops_odd_coefficient() {
        let m = Mollifier1D::build(
            1,
            MollifierOptions { d: Some(0.5), psi0: false },
            &cfg(),
        )
        .unwrap();
        assert!(m.max_residual() <= 1e-10, "residual {}", m.max_residual());
        // odd monomial coefficients vanish by symmetry
        assert!(m.mono.get(1).map_or(true, |c| c.abs() < 1e-9), "{:?}", m.mono);
    }

    #[test]
    fn point_normalized_variant() {
        let m = Mollifier1D::build(
            2,
            MollifierOptions { d: None, psi0: true },
            &cfg(),
        )
        .unwrap();
        assert!(m.max_residual() <= 1e-10, "residual {}", m.max_residual());
        assert!((m.density(0.0) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn polynomial_reproduction() {
        // vanishing moments up to j reproduce polynomials of degree <= j
        let j = 3;
        let m = Mollifier1D::build(j, MollifierOptions::default(), &cfg()).unwrap();
        let gl = quad::rule(200);
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + x * x * x;
        for &x in &[0.0, 0.4, -1.3] {
            let conv = gl.integrate(-1.0, 1.0, |t| p(x - t) * m.density(t));
            assert!((conv - p(x)).abs() <= 1e-8, "at {}: {} vs {}", x, conv, p(x));
        }
    }

    #[test]
    fn group_action_identities() {
        let m = Mollifier1D::build(1, MollifierOptions::default(), &cfg()).unwrap();
        let phi = m.expr();
        // r = 1 acts as the identity
        let same = scale_action(&Expr::Const(1.0), &phi);
        for &x in &[-0.5, 0.2, 0.9] {
            assert!((same.eval(&[x], 0.5) - phi.eval(&[x], 0.5)).abs() < 1e-14);
        }
        // integral is scale invariant
        let gl = quad::rule(400);
        let scaled = scale_action(&Expr::Const(0.25), &phi);
        let i0 = gl.integrate(-1.0, 1.0, |x| phi.eval(&[x], 0.5));
        let i1 = gl.integrate(-0.25, 0.25, |x| scaled.eval(&[x], 0.5));
        assert!((i0 - i1).abs() < 1e-12);
        // distributivity r (.) (a (+) phi) = ra (+) (r (.) phi)
        let a = Expr::Const(0.3);
        let lhs = scale_action(&Expr::Const(0.5), &translate_action(&a, &phi));
        let rhs = translate_action(&Expr::Const(0.5 * 0.3), &scale_action(&Expr::Const(0.5), &phi));
        for i in 0..64 {
            let x = -2.0 + 4.0 * (i as f64) / 63.0;
            assert!(
                (lhs.eval(&[x], 0.5) - rhs.eval(&[x], 0.5)).abs() < 1e-14,
                "at {}",
                x
            );
        }
    }

    #[test]
    fn net_schedule_and_concentration() {
        let ctx = Context::default_ctx();
        let net = MollifierNet::default_net(ctx.clone(), MollifierOptions::default()).unwrap();
        assert_eq!(net.j_at(0), 4);
        assert_eq!(net.j_at(ctx.grid.len() - 1), 10);
        // psi^b integrates to 1 for moderate eps
        let e = net.psi_b_expr(2); // eps = 2^-6, b = 64
        let gl = quad::rule(400);
        let eps = ctx.grid.points[2];
        let i = gl.integrate(-eps, eps, |x| e.eval(&[x], eps));
        assert!((i - 1.0).abs() < 1e-9, "got {}", i);
    }
}
