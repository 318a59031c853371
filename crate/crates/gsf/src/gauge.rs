//! Gauges, the finite eps-grid, and the shared evaluation context.

use crate::config::Config;
use crate::error::GsfError;
use crate::logval::Mag;
use std::sync::Arc;

/// The asymptotic gauge rho: a positive net rho_eps -> 0 together with an
/// exact log form for underflow-safe comparisons.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gauge {
    /// rho_eps = eps; the Robinson-Colombeau ring R-tilde.
    Eps,
    /// rho_eps = e^{-1/eps}.
    Exp,
}

impl Gauge {
    pub fn from_name(name: &str) -> Result<Gauge, GsfError> {
        match name {
            "eps" => Ok(Gauge::Eps),
            "exp" => Ok(Gauge::Exp),
            other => Err(GsfError::Config(format!("unknown gauge {:?}", other))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gauge::Eps => "eps",
            Gauge::Exp => "exp",
        }
    }

    pub fn rho(&self, eps: f64) -> f64 {
        match self {
            Gauge::Eps => eps,
            Gauge::Exp => (-1.0 / eps).exp(),
        }
    }

    /// Exact log rho_eps.
    pub fn log_rho(&self, eps: f64) -> f64 {
        match self {
            Gauge::Eps => eps.ln(),
            Gauge::Exp => -1.0 / eps,
        }
    }
}

/// Finite strictly decreasing eps-sample grid; all nets are evaluated here.
#[derive(Clone, Debug)]
pub struct EpsGrid {
    pub points: Vec<f64>,
    pub tail_window: usize,
}

impl EpsGrid {
    pub fn dyadic(kmin: u32, kmax: u32, tail_window: usize) -> EpsGrid {
        let points: Vec<f64> = (kmin..=kmax).map(|k| 2f64.powi(-(k as i32))).collect();
        assert!(tail_window <= points.len());
        EpsGrid { points, tail_window }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of the `tail_window` smallest-eps points.
    pub fn tail_indices(&self) -> std::ops::Range<usize> {
        self.points.len() - self.tail_window..self.points.len()
    }
}

/// Shared gauge + grid + thresholds. Immutable; cloned by `Arc`.
#[derive(Clone, Debug)]
pub struct Context {
    pub gauge: Gauge,
    pub grid: EpsGrid,
    pub cfg: Config,
}

pub type Ctx = Arc<Context>;

impl Context {
    pub fn new(cfg: Config) -> Result<Ctx, GsfError> {
        cfg.validate().map_err(GsfError::Config)?;
        let gauge = Gauge::from_name(&cfg.gauge)?;
        let grid = EpsGrid::dyadic(cfg.grid_kmin, cfg.grid_kmax, cfg.tail_window);
        // rho must be positive and nonincreasing on the grid, vanishing on the tail
        let mut prev = f64::INFINITY;
        for &e in &grid.points {
            let lr = gauge.log_rho(e);
            assert!(lr < prev + 1e-15, "gauge not nonincreasing on grid");
            prev = lr;
        }
        Ok(Arc::new(Context { gauge, grid, cfg }))
    }

    pub fn default_ctx() -> Ctx {
        Context::new(Config::default()).expect("default config is valid")
    }

    /// Context with the exp gauge and otherwise default settings.
    pub fn exp_ctx() -> Ctx {
        let cfg = Config { gauge: "exp".into(), ..Config::default() };
        Context::new(cfg).expect("exp config is valid")
    }

    /// log rho_eps at grid index i.
    pub fn log_rho_at(&self, i: usize) -> f64 {
        self.gauge.log_rho(self.grid.points[i])
    }

    /// rho_eps^m at grid index i, as a log-magnitude.
    pub fn log_rho_pow(&self, i: usize, m: i64) -> f64 {
        self.log_rho_at(i) * m as f64
    }

    pub fn rho_mag(&self, i: usize) -> Mag {
        Mag::from_sign_ln(1, self.log_rho_at(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_grid_shape() {
        let ctx = Context::default_ctx();
        assert_eq!(ctx.grid.len(), 37);
        assert_eq!(ctx.grid.points[0], 2f64.powi(-4));
        assert_eq!(*ctx.grid.points.last().unwrap(), 2f64.powi(-40));
        assert_eq!(ctx.grid.tail_indices().len(), 8);
    }

    #[test]
    fn exp_gauge_log_exact() {
        let g = Gauge::Exp;
        // underflows in linear f64 but the log form stays exact
        let e = 2f64.powi(-40);
        assert_eq!(g.rho(e), 0.0);
        assert_eq!(g.log_rho(e), -(2f64.powi(40)));
    }
}
