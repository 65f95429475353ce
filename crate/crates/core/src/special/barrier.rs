//! Log-barrier Newton method for separable convex problems
//!
//! ```text
//! minimize  Σᵢ fᵢ(xᵢ)   subject to  lᵢ < xᵢ ≤ uᵢ,  Σᵢ xᵢ ≤ B
//! ```
//!
//! The Hessian of the barrier problem is diagonal plus rank one, so each
//! Newton step is a Sherman–Morrison solve. Changes in the barrier objective
//! are accumulated per coordinate with `ln_1p` so that line searches stay
//! meaningful when the barrier weight is large.

use crate::error::{Error, Result};

/// One coordinate term `fᵢ` of a separable convex objective.
pub(crate) trait SeparableObjective {
    fn grad(&self, i: usize, x: f64) -> f64;
    fn hess(&self, i: usize, x: f64) -> f64;
    /// `fᵢ(x + h) − fᵢ(x)`, evaluated without cancellation.
    fn delta(&self, i: usize, x: f64, h: f64) -> f64;
}

/// Final duality-gap bound `m / t`.
const GAP: f64 = 1e-14;
const T_GROWTH: f64 = 20.0;
/// Half the squared Newton decrement; bounds the centering error by `NEWTON_TOL / t`.
const NEWTON_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;

pub(crate) fn minimize<F: SeparableObjective>(
    f: &F,
    lower: &[f64],
    upper: &[f64],
    budget: f64,
) -> Result<Vec<f64>> {
    let n = lower.len();
    let slack_lo: f64 = budget - lower.iter().sum::<f64>();
    let width: f64 = lower.iter().zip(upper).map(|(l, u)| u - l).sum();
    if !(slack_lo > 0.0) || lower.iter().zip(upper).any(|(l, u)| !(u > l)) {
        return Err(Error::RegimeViolation("constraint set has empty interior".into()));
    }
    let theta = 0.5_f64.min(0.5 * slack_lo / width);
    let mut p = Point {
        x: lower.iter().zip(upper).map(|(l, u)| l + theta * (u - l)).collect(),
        below: lower.iter().zip(upper).map(|(l, u)| theta * (u - l)).collect(),
        above: lower.iter().zip(upper).map(|(l, u)| (1.0 - theta) * (u - l)).collect(),
        spare: slack_lo - theta * width,
    };

    let m = (2 * n + 1) as f64;
    let mut t = 1.0;
    loop {
        center(f, t, &mut p)?;
        if m / t < GAP {
            return Ok(p.x);
        }
        t *= T_GROWTH;
    }
}

/// Iterate with its constraint slacks carried alongside, so that slacks far
/// below the magnitude of `x` do not suffer cancellation.
struct Point {
    x: Vec<f64>,
    below: Vec<f64>,
    above: Vec<f64>,
    spare: f64,
}

fn center<F: SeparableObjective>(f: &F, t: f64, p: &mut Point) -> Result<()> {
    let n = p.x.len();
    for _ in 0..MAX_NEWTON {
        let s = p.spare;
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        for i in 0..n {
            let (a, b) = (p.below[i], p.above[i]);
            g[i] = t * f.grad(i, p.x[i]) - 1.0 / a + 1.0 / b + 1.0 / s;
            h[i] = t * f.hess(i, p.x[i]) + 1.0 / (a * a) + 1.0 / (b * b);
        }
        // (diag(h) + 11ᵀ/s²)⁻¹ via Sherman–Morrison.
        let hg: Vec<f64> = (0..n).map(|i| g[i] / h[i]).collect();
        let h1: Vec<f64> = h.iter().map(|v| 1.0 / v).collect();
        let coef = hg.iter().sum::<f64>() / (s * s + h1.iter().sum::<f64>());
        let step: Vec<f64> = (0..n).map(|i| -(hg[i] - h1[i] * coef)).collect();
        let decrement: f64 = -g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
        if decrement / 2.0 <= NEWTON_TOL {
            return Ok(());
        }

        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = step.iter().map(|d| alpha * d).collect();
            let total: f64 = trial.iter().sum();
            let feasible =
                (0..n).all(|i| trial[i] > -p.below[i] && trial[i] < p.above[i]) && total < s;
            if feasible {
                let mut change = -(-total / s).ln_1p();
                for i in 0..n {
                    change += t * f.delta(i, p.x[i], trial[i])
                        - (trial[i] / p.below[i]).ln_1p()
                        - (-trial[i] / p.above[i]).ln_1p();
                }
                if change <= -0.25 * alpha * decrement {
                    for i in 0..n {
                        p.x[i] += trial[i];
                        p.below[i] += trial[i];
                        p.above[i] -= trial[i];
                    }
                    p.spare -= total;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-20 {
                // No representable descent left along the Newton direction.
                return Ok(());
            }
        }
    }
    Err(Error::NumericalFailure("barrier centering did not converge".into()))
}
