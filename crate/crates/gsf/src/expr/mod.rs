//! eps-parametric smooth expression trees with exact node-level
//! differentiation.
//!
//! The grammar covers constants, `+ - * / ^`, `exp log sin cos atan`, the
//! standard compactly supported bump, and a cumulative bump kernel
//! (`PolyBumpInt`) used for smooth cutoffs and the embedded Heaviside.
//! Multiplication short-circuits on an exactly-zero left factor so that
//! bump-times-rational derivative trees stay finite at the support boundary.

mod parse;

pub use parse::parse_expr;

use crate::logval::Mag;
use crate::quad;
use std::fmt;
use std::sync::Arc;

/// Polynomial-times-bump kernel p(s)*chi(s) on (-1,1), chi the unit bump,
/// with a precomputed full integral. Coefficients are monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyKernel {
    pub mono: Vec<f64>,
    pub total: f64,
}

impl PolyKernel {
    pub fn new(mono: Vec<f64>) -> Arc<PolyKernel> {
        let gl = quad::rule(200);
        let total = gl.integrate(-1.0, 1.0, |s| eval_poly(&mono, s) * unit_bump(s));
        Arc::new(PolyKernel { mono, total })
    }

    /// Rescales the polynomial so the cumulative total is exactly 1.0;
    /// the clamped plateau of `cumulative` is then algebraically exact.
    pub fn normalized(mono: Vec<f64>) -> Arc<PolyKernel> {
        let raw = PolyKernel::new(mono);
        let scaled: Vec<f64> = raw.mono.iter().map(|c| c / raw.total).collect();
        Arc::new(PolyKernel { mono: scaled, total: 1.0 })
    }

    /// The normalized smooth-step kernel: chi / int(chi).
    pub fn unit_step() -> Arc<PolyKernel> {
        PolyKernel::normalized(vec![1.0])
    }

    pub fn density(&self, s: f64) -> f64 {
        eval_poly(&self.mono, s) * unit_bump(s)
    }

    /// Cumulative integral from -1 to t, clamped outside the support.
    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= -1.0 {
            0.0
        } else if t >= 1.0 {
            self.total
        } else {
            quad::rule(200).integrate(-1.0, t, |s| self.density(s))
        }
    }
}

/// The standard unit bump on (-1,1): exp(-1/(1-s^2)), 0 outside.
pub fn unit_bump(s: f64) -> f64 {
    let w = 1.0 - s * s;
    if w <= 0.0 {
        0.0
    } else {
        (-1.0 / w).exp()
    }
}

pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Eps,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    PowI(Box<Expr>, i64),
    PowF(Box<Expr>, f64),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Atan(Box<Expr>),
    /// Bump supported on (lo, hi) applied to the inner expression.
    Bump { arg: Box<Expr>, lo: f64, hi: f64 },
    /// Cumulative kernel integral: int_{-1}^{arg} p(s) chi(s) ds.
    PolyBumpInt { kernel: Arc<PolyKernel>, arg: Box<Expr> },
}

use Expr::*;

impl Expr {
    pub fn c(v: f64) -> Expr {
        Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Var(i)
    }

    pub fn boxed(self) -> Box<Expr> {
        Box::new(self)
    }

    /// Number of variables (max index + 1) referenced, ignoring `eps`.
    pub fn arity(&self) -> usize {
        match self {
            Const(_) | Eps => 0,
            Var(i) => i + 1,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.arity().max(b.arity()),
            Neg(a) | PowI(a, _) | PowF(a, _) | Exp(a) | Ln(a) | Sin(a) | Cos(a) | Atan(a) => {
                a.arity()
            }
            Bump { arg, .. } | PolyBumpInt { arg, .. } => arg.arity(),
        }
    }

    /// Evaluates in plain f64. `x` supplies the variables, `eps` the parameter.
    pub fn eval(&self, x: &[f64], eps: f64) -> f64 {
        match self {
            Const(v) => *v,
            Var(i) => x[*i],
            Eps => eps,
            Add(a, b) => a.eval(x, eps) + b.eval(x, eps),
            Sub(a, b) => a.eval(x, eps) - b.eval(x, eps),
            Mul(a, b) => {
                let va = a.eval(x, eps);
                // exact-zero short-circuit keeps bump-boundary rationals finite
                if va == 0.0 {
                    0.0
                } else {
                    va * b.eval(x, eps)
                }
            }
            Div(a, b) => a.eval(x, eps) / b.eval(x, eps),
            Neg(a) => -a.eval(x, eps),
            PowI(a, k) => a.eval(x, eps).powi(*k as i32),
            PowF(a, p) => a.eval(x, eps).powf(*p),
            Exp(a) => a.eval(x, eps).exp(),
            Ln(a) => a.eval(x, eps).ln(),
            Sin(a) => a.eval(x, eps).sin(),
            Cos(a) => a.eval(x, eps).cos(),
            Atan(a) => a.eval(x, eps).atan(),
            Bump { arg, lo, hi } => {
                let t = arg.eval(x, eps);
                let s = 2.0 / (hi - lo);
                unit_bump(s * (t - 0.5 * (lo + hi)))
            }
            PolyBumpInt { kernel, arg } => kernel.cumulative(arg.eval(x, eps)),
        }
    }

    /// Dual-track evaluation for eps-only nets: exact log handling through
    /// `+ - * / ^ exp ln`, linear fallback elsewhere.
    pub fn eval_mag(&self, eps: f64) -> Mag {
        self.eval_mag_at(&[], eps)
    }

    /// Dual-track evaluation with generalized (possibly infinitesimal or
    /// infinite) arguments. Transcendental nodes fall back to the linear
    /// track of their inputs.
    pub fn eval_mag_at(&self, x: &[Mag], eps: f64) -> Mag {
        match self {
            Const(v) => Mag::from_f64(*v),
            Var(i) => x[*i],
            Eps => Mag::from_f64(eps),
            Add(a, b) => a.eval_mag_at(x, eps).add(b.eval_mag_at(x, eps)),
            Sub(a, b) => a.eval_mag_at(x, eps).sub(b.eval_mag_at(x, eps)),
            Mul(a, b) => a.eval_mag_at(x, eps).mul(b.eval_mag_at(x, eps)),
            Div(a, b) => a.eval_mag_at(x, eps).div(b.eval_mag_at(x, eps)),
            Neg(a) => a.eval_mag_at(x, eps).neg(),
            PowI(a, k) => a.eval_mag_at(x, eps).powi(*k),
            PowF(a, p) => a.eval_mag_at(x, eps).powf(*p),
            Exp(a) => a.eval_mag_at(x, eps).exp(),
            Ln(a) => a.eval_mag_at(x, eps).ln_val(),
            Sin(_) | Cos(_) | Atan(_) | Bump { .. } | PolyBumpInt { .. } => {
                let lin: Vec<f64> = x.iter().map(|m| m.lin).collect();
                Mag::from_f64(self.eval(&lin, eps))
            }
        }
    }

    /// Exact derivative with respect to variable `v`.
    pub fn diff(&self, v: usize) -> Expr {
        let d = match self {
            Const(_) | Eps => Const(0.0),
            Var(i) => Const(if *i == v { 1.0 } else { 0.0 }),
            Add(a, b) => Add(a.diff(v).boxed(), b.diff(v).boxed()),
            Sub(a, b) => Sub(a.diff(v).boxed(), b.diff(v).boxed()),
            Mul(a, b) => Add(
                Mul(a.diff(v).boxed(), b.clone()).boxed(),
                Mul(a.clone(), b.diff(v).boxed()).boxed(),
            ),
            Div(a, b) => Div(
                Sub(
                    Mul(a.diff(v).boxed(), b.clone()).boxed(),
                    Mul(a.clone(), b.diff(v).boxed()).boxed(),
                )
                .boxed(),
                PowI(b.clone(), 2).boxed(),
            ),
            Neg(a) => Neg(a.diff(v).boxed()),
            PowI(a, k) => Mul(
                Mul(Const(*k as f64).boxed(), PowI(a.clone(), k - 1).boxed()).boxed(),
                a.diff(v).boxed(),
            ),
            PowF(a, p) => Mul(
                Mul(Const(*p).boxed(), PowF(a.clone(), p - 1.0).boxed()).boxed(),
                a.diff(v).boxed(),
            ),
            Exp(a) => Mul(Exp(a.clone()).boxed(), a.diff(v).boxed()),
            Ln(a) => Div(a.diff(v).boxed(), a.clone()),
            Sin(a) => Mul(Cos(a.clone()).boxed(), a.diff(v).boxed()),
            Cos(a) => Neg(Mul(Sin(a.clone()).boxed(), a.diff(v).boxed()).boxed()),
            Atan(a) => Div(
                a.diff(v).boxed(),
                Add(Const(1.0).boxed(), PowI(a.clone(), 2).boxed()).boxed(),
            ),
            Bump { arg, lo, hi } => {
                // chi'(u) = chi(u) * (-2u)/(1-u^2)^2, u = s(arg - c)
                let s = 2.0 / (hi - lo);
                let c = 0.5 * (lo + hi);
                let u = Mul(Const(s).boxed(), Sub(arg.clone(), Const(c).boxed()).boxed());
                let rat = Div(
                    Mul(Const(-2.0 * s).boxed(), u.clone().boxed()).boxed(),
                    PowI(
                        Sub(Const(1.0).boxed(), PowI(u.boxed(), 2).boxed()).boxed(),
                        2,
                    )
                    .boxed(),
                );
                // bump factor first: zero short-circuit guards the rational
                Mul(
                    Bump { arg: arg.clone(), lo: *lo, hi: *hi }.boxed(),
                    Mul(rat.boxed(), arg.diff(v).boxed()).boxed(),
                )
            }
            PolyBumpInt { kernel, arg } => {
                let density = Mul(
                    Bump { arg: arg.clone(), lo: -1.0, hi: 1.0 }.boxed(),
                    poly_expr(&kernel.mono, (**arg).clone()).boxed(),
                );
                Mul(density.boxed(), arg.diff(v).boxed())
            }
        };
        d.simplify()
    }

    /// Derivative for a multi-index over the variables.
    pub fn diff_multi(&self, alpha: &[usize]) -> Expr {
        let mut e = self.clone();
        for (v, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                e = e.diff(v);
            }
        }
        e
    }

    /// Substitutes `subs[i]` for `Var(i)`.
    pub fn subst(&self, subs: &[Expr]) -> Expr {
        match self {
            Const(_) | Eps => self.clone(),
            Var(i) => subs[*i].clone(),
            Add(a, b) => Add(a.subst(subs).boxed(), b.subst(subs).boxed()),
            Sub(a, b) => Sub(a.subst(subs).boxed(), b.subst(subs).boxed()),
            Mul(a, b) => Mul(a.subst(subs).boxed(), b.subst(subs).boxed()),
            Div(a, b) => Div(a.subst(subs).boxed(), b.subst(subs).boxed()),
            Neg(a) => Neg(a.subst(subs).boxed()),
            PowI(a, k) => PowI(a.subst(subs).boxed(), *k),
            PowF(a, p) => PowF(a.subst(subs).boxed(), *p),
            Exp(a) => Exp(a.subst(subs).boxed()),
            Ln(a) => Ln(a.subst(subs).boxed()),
            Sin(a) => Sin(a.subst(subs).boxed()),
            Cos(a) => Cos(a.subst(subs).boxed()),
            Atan(a) => Atan(a.subst(subs).boxed()),
            Bump { arg, lo, hi } => Bump { arg: arg.subst(subs).boxed(), lo: *lo, hi: *hi },
            PolyBumpInt { kernel, arg } => {
                PolyBumpInt { kernel: kernel.clone(), arg: arg.subst(subs).boxed() }
            }
        }
    }

    /// Constant folding and unit/zero elision. Keeps trees from exploding
    /// under repeated differentiation.
    pub fn simplify(&self) -> Expr {
        match self {
            Add(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x + y),
                (Const(z), e) if z == 0.0 => e,
                (e, Const(z)) if z == 0.0 => e,
                (x, y) => Add(x.boxed(), y.boxed()),
            },
            Sub(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x - y),
                (e, Const(z)) if z == 0.0 => e,
                (Const(z), e) if z == 0.0 => Neg(e.boxed()).simplify(),
                (x, y) if x == y => Const(0.0),
                (x, y) => Sub(x.boxed(), y.boxed()),
            },
            Mul(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x * y),
                (Const(z), _) if z == 0.0 => Const(0.0),
                (_, Const(z)) if z == 0.0 => Const(0.0),
                (Const(o), e) if o == 1.0 => e,
                (e, Const(o)) if o == 1.0 => e,
                (x, y) => Mul(x.boxed(), y.boxed()),
            },
            Div(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) if y != 0.0 => Const(x / y),
                (Const(z), _) if z == 0.0 => Const(0.0),
                (e, Const(o)) if o == 1.0 => e,
                (x, y) => Div(x.boxed(), y.boxed()),
            },
            Neg(a) => match a.simplify() {
                Const(x) => Const(-x),
                Neg(inner) => *inner,
                e => Neg(e.boxed()),
            },
            PowI(a, k) => match (a.simplify(), k) {
                (_, 0) => Const(1.0),
                (e, 1) => e,
                (Const(x), k) => Const(x.powi(*k as i32)),
                (e, k) => PowI(e.boxed(), *k),
            },
            PowF(a, p) => match a.simplify() {
                Const(x) => Const(x.powf(*p)),
                e => PowF(e.boxed(), *p),
            },
            Exp(a) => match a.simplify() {
                Const(x) => Const(x.exp()),
                e => Exp(e.boxed()),
            },
            Ln(a) => match a.simplify() {
                Const(x) => Const(x.ln()),
                e => Ln(e.boxed()),
            },
            Sin(a) => match a.simplify() {
                Const(x) => Const(x.sin()),
                e => Sin(e.boxed()),
            },
            Cos(a) => match a.simplify() {
                Const(x) => Const(x.cos()),
                e => Cos(e.boxed()),
            },
            Atan(a) => match a.simplify() {
                Const(x) => Const(x.atan()),
                e => Atan(e.boxed()),
            },
            Bump { arg, lo, hi } => Bump { arg: arg.simplify().boxed(), lo: *lo, hi: *hi },
            PolyBumpInt { kernel, arg } => {
                PolyBumpInt { kernel: kernel.clone(), arg: arg.simplify().boxed() }
            }
            other => other.clone(),
        }
    }
}

/// Horner-form expression for a monomial-coefficient polynomial.
pub fn poly_expr(coeffs: &[f64], arg: Expr) -> Expr {
    let mut acc = Const(0.0);
    for &c in coeffs.iter().rev() {
        acc = Add(Mul(acc.boxed(), arg.clone().boxed()).boxed(), Const(c).boxed());
    }
    acc.simplify()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const(v) => write!(f, "{}", v),
            Var(0) => write!(f, "x"),
            Var(i) => write!(f, "x{}", i + 1),
            Eps => write!(f, "eps"),
            Add(a, b) => write!(f, "({} + {})", a, b),
            Sub(a, b) => write!(f, "({} - {})", a, b),
            Mul(a, b) => write!(f, "({} * {})", a, b),
            Div(a, b) => write!(f, "({} / {})", a, b),
            Neg(a) => write!(f, "(-{})", a),
            PowI(a, k) => write!(f, "{}^{}", a, k),
            PowF(a, p) => write!(f, "{}^{}", a, p),
            Exp(a) => write!(f, "exp({})", a),
            Ln(a) => write!(f, "log({})", a),
            Sin(a) => write!(f, "sin({})", a),
            Cos(a) => write!(f, "cos({})", a),
            Atan(a) => write!(f, "atan({})", a),
            Bump { arg, lo, hi } => write!(f, "bump({}, {}, {})", arg, lo, hi),
            PolyBumpInt { arg, .. } => write!(f, "cumkernel({})", arg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(e: &Expr, x: f64, eps: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1.0);
        (e.eval(&[x + h], eps) - e.eval(&[x - h], eps)) / (2.0 * h)
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let cases = [
            "x^3 + 2*x",
            "sin(x) * exp(x/2)",
            "atan(x^2) - log(x + 3)",
            "x / (1 + x^2)",
            "bump(x, -1, 1)",
            "x^0.5 + eps * x",
        ];
        for src in cases {
            let e = parse_expr(src).unwrap();
            let d = e.diff(0);
            for &x in &[0.3, 0.7, 0.11] {
                let exact = d.eval(&[x], 0.25);
                let approx = fd(&e, x, 0.25);
                assert!(
                    (exact - approx).abs() <= 1e-6 * exact.abs().max(1.0),
                    "{} at {}: {} vs {}",
                    src,
                    x,
                    exact,
                    approx
                );
            }
        }
    }

    #[test]
    fn bump_derivative_finite_at_boundary() {
        let e = parse_expr("bump(x, -1, 1)").unwrap();
        let d = e.diff(0);
        for &x in &[-1.0, 1.0, -2.0, 0.999999, 2.0] {
            let v = d.eval(&[x], 0.5);
            assert!(v.is_finite(), "bump' at {} = {}", x, v);
        }
        assert_eq!(d.eval(&[1.5], 0.5), 0.0);
    }

    #[test]
    fn cumulative_kernel_derivative_is_density() {
        let kern = PolyKernel::unit_step();
        let e = PolyBumpInt { kernel: kern.clone(), arg: Var(0).boxed() };
        let d = e.diff(0);
        let x = 0.3;
        assert!((d.eval(&[x], 0.5) - kern.density(x)).abs() < 1e-12);
        // full range is 1 for the normalized step kernel
        assert!((e.eval(&[2.0], 0.5) - 1.0).abs() < 1e-12);
        assert_eq!(e.eval(&[-2.0], 0.5), 0.0);
    }

    #[test]
    fn mag_eval_is_exact_for_power_nets() {
        let e = parse_expr("eps^-3").unwrap();
        let m = e.eval_mag(2f64.powi(-40));
        assert!((m.ln - 3.0 * 40.0 * 2f64.ln()).abs() < 1e-9);
        let e = parse_expr("exp(1/eps)").unwrap();
        let m = e.eval_mag(2f64.powi(-30));
        assert_eq!(m.ln, 2f64.powi(30));
    }

    #[test]
    fn chain_rule_through_composition() {
        let f = parse_expr("sin(x)").unwrap();
        let g = parse_expr("x^2 + 1").unwrap();
        let comp = f.subst(&[g.clone()]);
        let d = comp.diff(0);
        let x = 0.4f64;
        let expect = (x * x + 1.0).cos() * 2.0 * x;
        assert!((d.eval(&[x], 0.5) - expect).abs() < 1e-12);
    }
}
