//! Strictly increasing bijections of the real line used as the scalar part
//! of canonical spectral order isomorphisms.

use crate::error::{Error, Result};
use crate::order::ConeTag;

const CONE_SLACK: f64 = 1e-12;

/// A strictly increasing bijection.
///
/// `PiecewiseLinear` interpolates its knots and continues the first and last
/// segments affinely, so it is a bijection of ℝ whose inverse is again
/// piecewise linear. `Power` is `t ↦ scale · sign(t) · |t|^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneBijection {
    PiecewiseLinear { xs: Vec<f64>, ys: Vec<f64> },
    Power { exponent: f64, scale: f64 },
}

impl MonotoneBijection {
    pub fn identity() -> Self {
        Self::PiecewiseLinear {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
        }
    }

    pub fn piecewise_linear(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::NotMonotone(format!(
                "{} abscissae but {} ordinates",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::NotMonotone("need at least two knots".into()));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::NotMonotone("non-finite knot".into()));
        }
        for (name, v) in [("abscissae", &xs), ("ordinates", &ys)] {
            if v.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::NotMonotone(format!(
                    "{name} are not strictly increasing"
                )));
            }
        }
        Ok(Self::PiecewiseLinear { xs, ys })
    }

    pub fn power(exponent: f64, scale: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0 && scale.is_finite() && scale > 0.0) {
            return Err(Error::NotMonotone(format!(
                "power map needs positive exponent and scale, got {exponent} and {scale}"
            )));
        }
        Ok(Self::Power { exponent, scale })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::PiecewiseLinear { xs, ys } => interpolate(xs, ys, t),
            Self::Power { exponent, scale } => scale * t.signum() * t.abs().powf(*exponent),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Self::PiecewiseLinear { xs, ys } => Self::PiecewiseLinear {
                xs: ys.clone(),
                ys: xs.clone(),
            },
            // s·|t|^p = u  ⇔  |t| = (u/s)^{1/p} = s^{-1/p} |u|^{1/p}
            Self::Power { exponent, scale } => Self::Power {
                exponent: 1.0 / exponent,
                scale: scale.powf(-1.0 / exponent),
            },
        }
    }

    /// `self ∘ inner`. Mixed piecewise-linear/power compositions leave both
    /// classes and are rejected.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        match (self, inner) {
            (
                Self::Power {
                    exponent: p,
                    scale: s,
                },
                Self::Power {
                    exponent: q,
                    scale: r,
                },
            ) => Self::power(p * q, s * r.powf(*p)),
            (Self::PiecewiseLinear { xs: ox, .. }, Self::PiecewiseLinear { xs: ix, .. }) => {
                let inv = inner.inverse();
                let mut knots: Vec<f64> = ix
                    .iter()
                    .copied()
                    .chain(ox.iter().map(|&y| inv.eval(y)))
                    .collect();
                knots.sort_by(f64::total_cmp);
                knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
                let ys = knots.iter().map(|&x| self.eval(inner.eval(x))).collect();
                Self::piecewise_linear(knots, ys)
            }
            _ => Err(Error::NotMonotone(
                "composition of piecewise-linear and power maps is not representable".into(),
            )),
        }
    }

    /// Checks that the map restricts to a bijection of the cone's scalar
    /// domain: `[0,1]` for effects, `[0,∞)` for positives, ℝ otherwise.
    pub fn check_cone(&self, cone: ConeTag) -> Result<()> {
        let fixes = |t: f64| (self.eval(t) - t).abs() <= CONE_SLACK;
        let ok = match cone {
            ConeTag::SelfAdjoint => true,
            ConeTag::Positive => fixes(0.0),
            ConeTag::Effect => fixes(0.0) && fixes(1.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NotMonotone(format!(
                "map does not restrict to a bijection of the {cone} scalar domain"
            )))
        }
    }

    /// Largest deviation from the identity over the given points.
    pub fn identity_residual(&self, points: &[f64]) -> f64 {
        points
            .iter()
            .map(|&t| (self.eval(t) - t).abs())
            .fold(0.0, f64::max)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let last = xs.len() - 1;
    // segment index i such that t lies in [xs[i], xs[i+1]], clamped to the
    // end segments for the affine tails
    let i = xs
        .partition_point(|&x| x <= t)
        .saturating_sub(1)
        .min(last - 1);
    let (x0, x1, y0, y1) = (xs[i], xs[i + 1], ys[i], ys[i + 1]);
    if t == x1 {
        return y1;
    }
    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
}
