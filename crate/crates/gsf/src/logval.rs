//! Dual-track scalar: a linear `f64` value paired with an exact
//! (sign, log-magnitude) representation.
//!
//! All asymptotic decisions compare log-magnitudes, so nets like
//! `exp(-1/eps)` stay meaningful far below the `f64` underflow threshold.
//! The linear track is kept for value reporting and for plain numerics
//! where magnitudes are tame.

/// Linear values with magnitude inside this band are trusted to rebuild the
/// log track after an operation; outside it we fall back to log-domain
/// formulas.
const LIN_TRUST_LO: f64 = 1e-290;
const LIN_TRUST_HI: f64 = 1e290;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mag {
    /// Linear value; may be 0.0 or +/-inf when the log track is live.
    pub lin: f64,
    /// Sign: -1, 0 (exact zero) or +1.
    pub sign: i8,
    /// Natural log of the magnitude; `NEG_INFINITY` iff `sign == 0`.
    pub ln: f64,
}

impl Mag {
    pub const ZERO: Mag = Mag { lin: 0.0, sign: 0, ln: f64::NEG_INFINITY };

    pub fn from_f64(v: f64) -> Mag {
        if v == 0.0 {
            Mag::ZERO
        } else {
            Mag { lin: v, sign: if v > 0.0 { 1 } else { -1 }, ln: v.abs().ln() }
        }
    }

    /// Builds a value from an exact sign and log-magnitude.
    pub fn from_sign_ln(sign: i8, ln: f64) -> Mag {
        if sign == 0 || ln == f64::NEG_INFINITY {
            return Mag::ZERO;
        }
        Mag { lin: sign as f64 * ln.exp(), sign, ln }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// True when the linear track is reliable for rebuilding the log track.
    fn lin_trusted(v: f64) -> bool {
        v.is_finite() && v != 0.0 && v.abs() >= LIN_TRUST_LO && v.abs() <= LIN_TRUST_HI
    }

    fn rebuild(lin: f64, sign: i8, ln: f64) -> Mag {
        if Self::lin_trusted(lin) {
            Mag { lin, sign: if lin > 0.0 { 1 } else { -1 }, ln: lin.abs().ln() }
        } else if sign == 0 {
            Mag { lin: 0.0, sign: 0, ln: f64::NEG_INFINITY }
        } else {
            Mag { lin, sign, ln }
        }
    }

    pub fn neg(self) -> Mag {
        Mag { lin: -self.lin, sign: -self.sign, ln: self.ln }
    }

    pub fn abs(self) -> Mag {
        Mag { lin: self.lin.abs(), sign: if self.sign == 0 { 0 } else { 1 }, ln: self.ln }
    }

    pub fn add(self, o: Mag) -> Mag {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let lin = self.lin + o.lin;
        let (sign, ln) = if self.sign == o.sign {
            // log-sum-exp
            let m = self.ln.max(o.ln);
            (self.sign, m + ((self.ln - m).exp() + (o.ln - m).exp()).ln())
        } else if self.ln == o.ln {
            (0, f64::NEG_INFINITY)
        } else {
            let (big, small) = if self.ln > o.ln { (self, o) } else { (o, self) };
            (big.sign, big.ln + (-(-(small.ln - big.ln).abs()).exp()).ln_1p())
        };
        Mag::rebuild(lin, sign, ln)
    }

    pub fn sub(self, o: Mag) -> Mag {
        self.add(o.neg())
    }

    pub fn mul(self, o: Mag) -> Mag {
        if self.is_zero() || o.is_zero() {
            return Mag::ZERO;
        }
        Mag::rebuild(self.lin * o.lin, self.sign * o.sign, self.ln + o.ln)
    }

    pub fn div(self, o: Mag) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        Mag::rebuild(self.lin / o.lin, self.sign * o.sign, self.ln - o.ln)
    }

    /// Integer power with exact log handling.
    pub fn powi(self, k: i64) -> Mag {
        if self.is_zero() {
            return if k == 0 { Mag::from_f64(1.0) } else { Mag::ZERO };
        }
        let sign = if k % 2 == 0 { 1 } else { self.sign };
        Mag::rebuild(self.lin.powi(k as i32), sign, self.ln * k as f64)
    }

    /// Real power; requires a nonnegative base unless the exponent is integral.
    pub fn powf(self, p: f64) -> Mag {
        if p.fract() == 0.0 && p.abs() < 9e15 {
            return self.powi(p as i64);
        }
        if self.is_zero() {
            return Mag::ZERO;
        }
        Mag::rebuild(self.lin.powf(p), 1, self.ln * p)
    }

    /// `exp(x)`: the log track of the result is the linear value of `x`, exact.
    pub fn exp(self) -> Mag {
        Mag { lin: self.lin.exp(), sign: 1, ln: self.lin }
    }

    /// `ln(x)`: the linear result is the log track of `x`, exact.
    pub fn ln_val(self) -> Mag {
        Mag::from_f64(self.ln)
    }

    /// Ordering by signed magnitude (exact, in log domain).
    pub fn cmp_signed(&self, o: &Mag) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self.sign, o.sign) {
            (a, b) if a < b => Less,
            (a, b) if a > b => Greater,
            (0, 0) => Equal,
            (1, 1) => self.ln.partial_cmp(&o.ln).unwrap_or(Equal),
            _ => o.ln.partial_cmp(&self.ln).unwrap_or(Equal),
        }
    }

    pub fn min(self, o: Mag) -> Mag {
        if self.cmp_signed(&o) == std::cmp::Ordering::Greater {
            o
        } else {
            self
        }
    }

    pub fn max(self, o: Mag) -> Mag {
        if self.cmp_signed(&o) == std::cmp::Ordering::Less {
            o
        } else {
            self
        }
    }

    /// `|self| <= e^{bound_ln}` decided in log domain.
    pub fn abs_le_ln(&self, bound_ln: f64) -> bool {
        self.sign == 0 || self.ln <= bound_ln
    }

    /// `self > e^{bound_ln}` (signed) decided in log domain.
    pub fn gt_ln(&self, bound_ln: f64) -> bool {
        self.sign > 0 && self.ln > bound_ln
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_exact_cancellation() {
        let a = Mag::from_sign_ln(1, -5000.0);
        let b = Mag::from_sign_ln(-1, -5000.0);
        assert!(a.add(b).is_zero());
    }

    #[test]
    fn underflow_product_keeps_log() {
        // eps^30 at eps = 2^-40 underflows f64 but the log track is exact
        let eps = Mag::from_f64(2f64.powi(-40));
        let p = eps.powi(30);
        assert_eq!(p.lin, 0.0);
        assert!((p.ln - 30.0 * (2f64.powi(-40)).ln()).abs() < 1e-9);
        assert_eq!(p.sign, 1);
    }

    #[test]
    fn exp_of_large_argument() {
        // e^{1/eps} at eps = 2^-20: linear overflows, ln = 2^20 exactly
        let inv_eps = Mag::from_f64(2f64.powi(20));
        let e = inv_eps.exp();
        assert_eq!(e.ln, 2f64.powi(20));
        assert_eq!(e.sign, 1);
    }

    #[test]
    fn signed_ordering() {
        let a = Mag::from_f64(-3.0);
        let b = Mag::from_f64(0.5);
        assert_eq!(a.min(b), a);
        assert_eq!(a.max(b), b);
        assert_eq!(Mag::from_f64(2.0).abs(), Mag::from_f64(2.0));
        assert_eq!(Mag::from_f64(-2.0).abs().lin, 2.0);
    }
}
