//! Convex margin losses `φ(t)` evaluated at `t = y βᵀx`.

use std::fmt;
use std::str::FromStr;

use crate::error::{positive, Error, Result};

/// A margin loss with its first derivative.
pub trait MarginLoss: Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Logistic,
    Exponential,
    Squared,
    SquaredHinge,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [
        LossKind::Logistic,
        LossKind::Exponential,
        LossKind::Squared,
        LossKind::SquaredHinge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::Exponential => "exponential",
            LossKind::Squared => "squared",
            LossKind::SquaredHinge => "squared_hinge",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown loss {s:?}")))
    }
}

/// A named margin loss together with the interval `[−M, M]` on which its
/// curvature constants are stated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    kind: LossKind,
    interval_bound: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind, interval_bound: f64) -> Result<Self> {
        positive("interval_bound", interval_bound)?;
        Ok(Self { kind, interval_bound })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// `M`.
    pub fn interval_bound(&self) -> f64 {
        self.interval_bound
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        match self.kind {
            LossKind::Logistic => {
                let s = sigmoid(t);
                s * (1.0 - s)
            }
            LossKind::Exponential => (-t).exp(),
            LossKind::Squared => 2.0,
            LossKind::SquaredHinge => {
                if t < 1.0 {
                    2.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `μ = inf φ''` over `[−M, M]`.
    pub fn strong_convexity(&self) -> f64 {
        let m = self.interval_bound;
        match self.kind {
            LossKind::Logistic => self.second_derivative(m),
            LossKind::Exponential => (-m).exp(),
            LossKind::Squared => 2.0,
            LossKind::SquaredHinge => {
                if m < 1.0 {
                    2.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `D = sup |φ'|` over `[−M, M]`.
    pub fn derivative_bound(&self) -> f64 {
        let m = self.interval_bound;
        match self.kind {
            LossKind::Logistic => sigmoid(m),
            LossKind::Exponential => m.exp(),
            LossKind::Squared | LossKind::SquaredHinge => 2.0 * (1.0 + m),
        }
    }

    /// `sup φ''` over `[−M, M]`, used to scale the initial step.
    pub fn curvature_bound(&self) -> f64 {
        match self.kind {
            LossKind::Logistic => 0.25,
            LossKind::Exponential => self.interval_bound.min(700.0).exp(),
            LossKind::Squared | LossKind::SquaredHinge => 2.0,
        }
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl MarginLoss for LossSpec {
    fn value(&self, t: f64) -> f64 {
        match self.kind {
            LossKind::Logistic => {
                if t >= 0.0 {
                    (-t).exp().ln_1p()
                } else {
                    -t + t.exp().ln_1p()
                }
            }
            LossKind::Exponential => (-t).exp(),
            LossKind::Squared => (1.0 - t) * (1.0 - t),
            LossKind::SquaredHinge => {
                let h = (1.0 - t).max(0.0);
                h * h
            }
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match self.kind {
            LossKind::Logistic => -sigmoid(-t),
            LossKind::Exponential => -(-t).exp(),
            LossKind::Squared => -2.0 * (1.0 - t),
            LossKind::SquaredHinge => -2.0 * (1.0 - t).max(0.0),
        }
    }
}
