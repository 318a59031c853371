//! Thresholds and grid configuration.
//!
//! Every tolerance used by the decision procedures is pinned here; nothing
//! downstream invents its own magic numbers.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Config {
    /// Gauge name: "eps" (rho_eps = eps) or "exp" (rho_eps = e^{-1/eps}).
    pub gauge: String,
    /// Grid is eps_k = 2^{-k} for k in `grid_kmin..=grid_kmax`.
    pub grid_kmin: u32,
    pub grid_kmax: u32,
    /// Number of smallest-eps points used for asymptotic decisions.
    pub tail_window: usize,
    /// Moderateness bound: x is moderate when |x_eps| <= rho_eps^{-n_max}.
    pub n_max: i64,
    /// Negligibility / invertibility power search bound.
    pub m_max: i64,
    /// Linear-domain values below this are treated as exact zero when
    /// classifying raw samples.
    pub zero_threshold: f64,
    /// Absolute floor for numerically computed residuals (Newton, probes);
    /// values below it are stored as exact zeros.
    pub numeric_floor: f64,
    /// Max in-window deviation of log|x_eps|/log rho_eps still called stable.
    pub exponent_slack: f64,
    /// Exponent above which a net is considered infinitesimal by the
    /// Fermat-topology comparisons.
    pub fermat_exponent_threshold: f64,
    /// Smallest real lower bound accepted by `lt_fermat`.
    pub fermat_real_floor: f64,
    /// Newton residual target: ||f(x)-y|| <= rho_eps^{q_tol} (or numeric_floor).
    pub q_tol: i64,
    /// GSF derivative-moderateness certification order.
    pub cert_order: usize,
    /// Deterministic probe points per ball/set, scaled by dimension.
    pub probes_per_dim: usize,
    /// Mollifier moment order cap.
    pub j_max: usize,
    /// Gauss-Legendre node counts: working and oracle quadrature.
    pub quad_nodes: usize,
    pub quad_nodes_oracle: usize,
    /// Condition-number cap for the mollifier moment system.
    pub moment_cond_cap: f64,
    /// Halving budget for certificate radius searches.
    pub halving_budget: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            gauge: "eps".into(),
            grid_kmin: 4,
            grid_kmax: 40,
            tail_window: 8,
            n_max: 100,
            m_max: 30,
            zero_threshold: 1e-300,
            numeric_floor: 1e-13,
            exponent_slack: 0.05,
            fermat_exponent_threshold: 0.25,
            fermat_real_floor: 1e-9,
            q_tol: 10,
            cert_order: 3,
            probes_per_dim: 64,
            j_max: 10,
            quad_nodes: 200,
            quad_nodes_oracle: 400,
            moment_cond_cap: 1e12,
            halving_budget: 400,
        }
    }
}

impl Config {
    /// Parses a simple `key = value` text config, one pair per line.
    /// Unknown keys are rejected; `#` starts a comment.
    pub fn from_kv_text(text: &str) -> Result<Config, String> {
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |e: &str| format!("line {}: {}: {}", i + 1, k, e);
            match k {
                "gauge" => {
                    if v != "eps" && v != "exp" {
                        return Err(bad("gauge must be eps or exp"));
                    }
                    cfg.gauge = v.to_string();
                }
                "grid" => {
                    let (a, b) = v.split_once(':').ok_or_else(|| bad("expected kmin:kmax"))?;
                    cfg.grid_kmin = a.trim().parse().map_err(|_| bad("bad kmin"))?;
                    cfg.grid_kmax = b.trim().parse().map_err(|_| bad("bad kmax"))?;
                }
                "tail_window" => cfg.tail_window = v.parse().map_err(|_| bad("bad value"))?,
                "n_max" => cfg.n_max = v.parse().map_err(|_| bad("bad value"))?,
                "m_max" => cfg.m_max = v.parse().map_err(|_| bad("bad value"))?,
                "j_max" => cfg.j_max = v.parse().map_err(|_| bad("bad value"))?,
                _ => return Err(format!("line {}: unknown key {}", i + 1, k)),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.grid_kmin >= self.grid_kmax {
            return Err("grid: kmin must be < kmax".into());
        }
        let len = (self.grid_kmax - self.grid_kmin + 1) as usize;
        if self.tail_window > len {
            return Err("tail_window exceeds grid length".into());
        }
        Ok(())
    }
}
