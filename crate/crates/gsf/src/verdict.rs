//! Three-valued verdicts for asymptotic statements decided on a finite grid.

use serde::Serialize;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Indeterminate,
}

/// Justification attached to a decided verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The power m of tail-power tests: x_eps > rho_eps^m on the tail.
    Power { m: i64 },
    /// A real lower bound r (Fermat comparisons).
    Real { r: f64 },
    /// An exponent estimate.
    Exponent { e: f64 },
    /// Exact zero net.
    ZeroNet,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub value: Truth,
    pub witness: Witness,
    pub diagnostics: String,
}

impl Verdict {
    pub fn yes(witness: Witness, diag: impl Into<String>) -> Verdict {
        Verdict { value: Truth::True, witness, diagnostics: diag.into() }
    }

    pub fn no(witness: Witness, diag: impl Into<String>) -> Verdict {
        Verdict { value: Truth::False, witness, diagnostics: diag.into() }
    }

    pub fn unknown(diag: impl Into<String>) -> Verdict {
        Verdict { value: Truth::Indeterminate, witness: Witness::None, diagnostics: diag.into() }
    }

    pub fn is_true(&self) -> bool {
        self.value == Truth::True
    }

    pub fn is_false(&self) -> bool {
        self.value == Truth::False
    }

    pub fn is_indeterminate(&self) -> bool {
        self.value == Truth::Indeterminate
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.value {
            Truth::True => "True",
            Truth::False => "False",
            Truth::Indeterminate => "Indeterminate",
        };
        write!(f, "{}", v)?;
        match &self.witness {
            Witness::Power { m } => write!(f, " (witness m={})", m)?,
            Witness::Real { r } => write!(f, " (witness r={})", r)?,
            Witness::Exponent { e } => write!(f, " (exponent {})", e)?,
            Witness::ZeroNet => write!(f, " (zero net)")?,
            Witness::None => {}
        }
        if !self.diagnostics.is_empty() {
            write!(f, " [{}]", self.diagnostics)?;
        }
        Ok(())
    }
}
