//! Sharp and Fermat balls, internal / strongly internal set membership via
//! signed distances, sharp boundedness, and sampled eps-wise inclusion.
//!
//! Set nets are restricted to shapes with exact distance oracles: boxes and
//! balls with eps-dependent bounds, half-lines, and finite unions.

use crate::expr::Expr;
use crate::gauge::Ctx;
use crate::gen_num::{GenNum, GenPoint};
use crate::logval::Mag;
use crate::probes;
use crate::verdict::{Verdict, Witness};

#[derive(Clone, Debug)]
pub enum Shape {
    /// Cartesian box with per-axis eps-dependent bounds.
    Box { lo: Vec<Expr>, hi: Vec<Expr> },
    /// Euclidean ball with eps-dependent center and radius.
    Ball { center: Vec<Expr>, radius: Expr },
    /// 1D half-line: (a, +inf) when `positive`, else (-inf, a).
    HalfLine { endpoint: Expr, positive: bool },
    Union(Vec<Shape>),
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Box { lo, .. } => lo.len(),
            Shape::Ball { center, .. } => center.len(),
            Shape::HalfLine { .. } => 1,
            Shape::Union(parts) => parts[0].dim(),
        }
    }

    /// Signed distance at parameter eps: positive inside (distance to the
    /// complement), negative outside (minus the distance to the set).
    /// For unions the inside branch is a lower bound (still 1-Lipschitz).
    pub fn signed_dist(&self, eps: f64, x: &[Mag]) -> Mag {
        match self {
            Shape::Box { lo, hi } => {
                // per-axis excess over the box; all nonpositive <=> inside
                let q: Vec<Mag> = lo
                    .iter()
                    .zip(hi)
                    .zip(x)
                    .map(|((l, h), &xi)| {
                        let l = l.eval_mag(eps);
                        let h = h.eval_mag(eps);
                        l.sub(xi).max(xi.sub(h))
                    })
                    .collect();
                let worst = q.iter().copied().reduce(Mag::max).unwrap();
                if worst.sign <= 0 {
                    worst.neg()
                } else {
                    let mut s = Mag::ZERO;
                    for qi in q {
                        if qi.sign > 0 {
                            s = s.add(qi.mul(qi));
                        }
                    }
                    s.powf(0.5).neg()
                }
            }
            Shape::Ball { center, radius } => {
                let mut s = Mag::ZERO;
                for (c, &xi) in center.iter().zip(x) {
                    let d = xi.sub(c.eval_mag(eps));
                    s = s.add(d.mul(d));
                }
                radius.eval_mag(eps).sub(s.powf(0.5))
            }
            Shape::HalfLine { endpoint, positive } => {
                let a = endpoint.eval_mag(eps);
                if *positive {
                    x[0].sub(a)
                } else {
                    a.sub(x[0])
                }
            }
            Shape::Union(parts) => parts
                .iter()
                .map(|p| p.signed_dist(eps, x))
                .reduce(Mag::max)
                .unwrap(),
        }
    }

    /// Exact sup of |x| over the shape at eps, or None when unbounded.
    fn norm_bound(&self, eps: f64) -> Option<Mag> {
        match self {
            Shape::Box { lo, hi } => {
                let lo: Vec<Mag> = lo.iter().map(|e| e.eval_mag(eps)).collect();
                let hi: Vec<Mag> = hi.iter().map(|e| e.eval_mag(eps)).collect();
                let mut worst = Mag::ZERO;
                for mask in 0..(1u32 << lo.len()) {
                    let mut s = Mag::ZERO;
                    for d in 0..lo.len() {
                        let c = if mask >> d & 1 == 0 { lo[d] } else { hi[d] };
                        s = s.add(c.mul(c));
                    }
                    worst = worst.max(s.powf(0.5));
                }
                Some(worst)
            }
            Shape::Ball { center, radius } => {
                let mut s = Mag::ZERO;
                for c in center {
                    let c = c.eval_mag(eps);
                    s = s.add(c.mul(c));
                }
                Some(s.powf(0.5).add(radius.eval_mag(eps).abs()))
            }
            Shape::HalfLine { .. } => None,
            Shape::Union(parts) => {
                let mut worst = Mag::ZERO;
                for p in parts {
                    worst = worst.max(p.norm_bound(eps)?);
                }
                Some(worst)
            }
        }
    }

    /// Deterministic sample points (linear coordinates) at eps, including
    /// boundary extremes; None for unbounded shapes.
    pub fn sample_points(&self, eps: f64, count: usize) -> Option<Vec<Vec<f64>>> {
        match self {
            Shape::Box { lo, hi } => {
                let lo: Vec<f64> = lo.iter().map(|e| e.eval(&[], eps)).collect();
                let hi: Vec<f64> = hi.iter().map(|e| e.eval(&[], eps)).collect();
                Some(probes::in_box(&lo, &hi, count))
            }
            Shape::Ball { center, radius } => {
                let c: Vec<f64> = center.iter().map(|e| e.eval(&[], eps)).collect();
                Some(probes::ball(&c, radius.eval(&[], eps), count))
            }
            Shape::HalfLine { .. } => None,
            Shape::Union(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.sample_points(eps, count)?);
                }
                Some(out)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SetNet {
    pub shape: Shape,
    pub label: String,
}

impl SetNet {
    pub fn new(shape: Shape, label: impl Into<String>) -> SetNet {
        SetNet { shape, label: label.into() }
    }

    /// 1D box [lo, hi] with expression bounds.
    pub fn interval(lo: Expr, hi: Expr) -> SetNet {
        let label = format!("[{}, {}]", lo, hi);
        SetNet::new(Shape::Box { lo: vec![lo], hi: vec![hi] }, label)
    }

    pub fn ball(center: Vec<Expr>, radius: Expr) -> SetNet {
        let label = format!("ball(r = {})", radius);
        SetNet::new(Shape::Ball { center, radius }, label)
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallKind {
    Sharp,
    Fermat,
}

/// Membership of x in the ball around c: sharp balls compare against a
/// generalized radius, Fermat balls against a real one.
pub fn ball_membership(
    x: &GenPoint,
    c: &GenPoint,
    r: &GenNum,
    kind: BallKind,
) -> Verdict {
    let dist = x.sub(c).norm();
    match kind {
        BallKind::Sharp => dist.lt_sharp(r),
        BallKind::Fermat => dist.lt_fermat(r),
    }
}

fn dist_nets(x: &GenPoint, a: &SetNet) -> (GenNum, GenNum) {
    let ctx = x.ctx().clone();
    let mut to_set = Vec::with_capacity(ctx.grid.len());
    let mut to_comp = Vec::with_capacity(ctx.grid.len());
    for (i, &eps) in ctx.grid.points.iter().enumerate() {
        let coords: Vec<Mag> = x.coords.iter().map(|c| c.samples[i]).collect();
        let sd = a.shape.signed_dist(eps, &coords);
        to_set.push(if sd.sign >= 0 { Mag::ZERO } else { sd.neg() });
        to_comp.push(if sd.sign > 0 { sd } else { Mag::ZERO });
    }
    (
        GenNum::from_mags(ctx.clone(), format!("d(x, {})", a.label), to_set),
        GenNum::from_mags(ctx, format!("d(x, {}^c)", a.label), to_comp),
    )
}

/// x in [A_eps]: the distance to the set net is negligible.
pub fn internal_membership(x: &GenPoint, a: &SetNet) -> Verdict {
    let (to_set, _) = dist_nets(x, a);
    to_set.is_negligible()
}

/// x in <A_eps>: the distance to the complement is strictly positive.
pub fn strongly_internal_membership(x: &GenPoint, a: &SetNet) -> Verdict {
    let (_, to_comp) = dist_nets(x, a);
    to_comp.is_strictly_positive()
}

/// Sharp boundedness: the sup of |x| over A_eps is a moderate net.
pub fn is_sharply_bounded(ctx: &Ctx, a: &SetNet) -> Verdict {
    let mut sups = Vec::with_capacity(ctx.grid.len());
    for &eps in &ctx.grid.points {
        match a.shape.norm_bound(eps) {
            Some(m) => sups.push(m),
            None => {
                return Verdict::no(Witness::None, "shape unbounded (half-line)")
            }
        }
    }
    let sup = GenNum::from_mags(ctx.clone(), format!("sup|{}|", a.label), sups);
    let v = sup.is_moderate();
    match v.value {
        crate::verdict::Truth::True => Verdict::yes(
            v.witness,
            format!("contained in the ball of twice the sup radius; {}", v.diagnostics),
        ),
        _ => v,
    }
}

/// Sampled eps-wise inclusion B_eps subset-of Omega_eps on the tail.
pub fn eps_inclusion(ctx: &Ctx, b: &SetNet, omega: &SetNet) -> Verdict {
    if is_sharply_bounded(ctx, b).is_false() {
        return Verdict::unknown("inclusion requires a sharply bounded inner set");
    }
    let count = ctx.cfg.probes_per_dim * b.dim();
    for i in ctx.grid.tail_indices() {
        let eps = ctx.grid.points[i];
        let Some(points) = b.shape.sample_points(eps, count) else {
            return Verdict::unknown("inner set not sampleable");
        };
        for p in points {
            let coords: Vec<Mag> = p.iter().map(|&v| Mag::from_f64(v)).collect();
            let sd = omega.shape.signed_dist(eps, &coords);
            if sd.sign < 0 {
                return Verdict::no(
                    Witness::Real { r: sd.lin },
                    format!("point {:?} escapes at eps = {:.3e}", p, eps),
                );
            }
        }
    }
    Verdict::yes(
        Witness::None,
        format!("all {} sampled points per tail eps inside (sampled, not proven)", count),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::gauge::Context;
    use crate::verdict::Truth;

    fn ex(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn pt(src: &str) -> GenPoint {
        GenPoint::from_exprs(Context::default_ctx(), &[ex(src)])
    }

    #[test]
    fn ball_memberships() {
        let ctx = Context::default_ctx();
        let zero = GenPoint::from_reals(ctx.clone(), &[0.0]);
        // center point always inside a strictly positive ball
        let r = GenNum::from_net_str(ctx.clone(), "eps^3").unwrap();
        assert!(ball_membership(&zero, &zero, &r, BallKind::Sharp).is_true());
        // |x - c| = eps vs sharp radius eps^2: outside
        let x = pt("eps");
        let r2 = GenNum::from_net_str(ctx.clone(), "eps^2").unwrap();
        assert!(ball_membership(&x, &zero, &r2, BallKind::Sharp).is_false());
        // infinitesimal inside the Fermat ball of radius 1/2
        let half = GenNum::constant(ctx, 0.5);
        assert!(ball_membership(&x, &zero, &half, BallKind::Fermat).is_true());
    }

    #[test]
    fn internal_membership_unit_interval() {
        let a = SetNet::interval(ex("0"), ex("1"));
        assert!(internal_membership(&pt("eps"), &a).is_true());
        // distance below every tested power
        assert!(internal_membership(&pt("1 + eps^32"), &a).is_true());
        // distance eps is not negligible
        let v = internal_membership(&pt("1 + eps"), &a);
        assert_eq!(v.value, Truth::False);
        assert_eq!(v.witness, Witness::Power { m: 2 });
        // shrinking ball still contains its center
        let b = SetNet::ball(vec![ex("0")], ex("eps"));
        assert!(internal_membership(&pt("0"), &b).is_true());
    }

    #[test]
    fn strongly_internal_membership_cases() {
        let sym = SetNet::interval(ex("-1"), ex("1"));
        let v = strongly_internal_membership(&pt("0"), &sym);
        assert!(v.is_true());
        assert_eq!(v.witness, Witness::Power { m: 1 });
        // (0, eps) contains eps/2 with infinitesimal margin
        let thin = SetNet::interval(ex("0"), ex("eps"));
        let v = strongly_internal_membership(&pt("eps/2"), &thin);
        assert!(v.is_true());
        assert_eq!(v.witness, Witness::Power { m: 2 });
        // boundary point is not strongly internal
        let unit = SetNet::interval(ex("0"), ex("1"));
        assert!(strongly_internal_membership(&pt("0"), &unit).is_false());
    }

    #[test]
    fn duality_and_perturbation() {
        let ctx = Context::default_ctx();
        let a = SetNet::interval(ex("-1"), ex("1"));
        let x = pt("1/2");
        assert!(strongly_internal_membership(&x, &a).is_true());
        assert!(internal_membership(&x, &a).is_true());
        // negligible perturbation cannot flip a strongly internal verdict
        let x2 = GenPoint::new(vec![x.coords[0]
            .add(&GenNum::from_net_str(ctx, "eps^31").unwrap())]);
        assert!(strongly_internal_membership(&x2, &a).is_true());
    }

    #[test]
    fn sharp_boundedness() {
        let ctx = Context::default_ctx();
        let big = SetNet::ball(vec![ex("0")], ex("1/eps"));
        let v = is_sharply_bounded(&ctx, &big);
        assert!(v.is_true());
        let hl = SetNet::new(
            Shape::HalfLine { endpoint: ex("0"), positive: true },
            "(0, inf)",
        );
        assert!(is_sharply_bounded(&ctx, &hl).is_false());
    }

    #[test]
    fn inclusion_check() {
        let ctx = Context::default_ctx();
        let inner = SetNet::interval(ex("-1 + eps"), ex("1 - eps"));
        let outer = SetNet::interval(ex("-1"), ex("1"));
        assert!(eps_inclusion(&ctx, &inner, &outer).is_true());
        let escape = SetNet::interval(ex("0"), ex("1 + eps"));
        let unit = SetNet::interval(ex("0"), ex("1"));
        assert!(eps_inclusion(&ctx, &escape, &unit).is_false());
    }
}
