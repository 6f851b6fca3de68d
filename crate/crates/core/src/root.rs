//! Safeguarded Newton–bisection for monotone scalar equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    /// Stop once `|g(x)|` is at most this.
    pub f_tol: f64,
    /// Stop once the bracket is narrower than this.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            f_tol: 1e-12,
            x_tol: 1e-15,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds the zero of a strictly increasing `g` on the real line, starting
/// from `guess`. `g_and_slope` returns `(g(x), g'(x))`.
///
/// The bracket is grown geometrically from `guess`, then narrowed with Newton
/// steps that fall back to bisection whenever they leave the bracket.
pub fn solve_increasing<F>(mut g_and_slope: F, guess: f64, cfg: RootConfig) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !guess.is_finite() {
        return Err(Error::Numeric(format!("root search started from non-finite guess {guess}")));
    }
    let (g0, _) = g_and_slope(guess);
    if g0.abs() <= cfg.f_tol {
        return Ok(Root {
            x: guess,
            residual: g0,
            iterations: 0,
        });
    }

    // grow a bracket [lo, hi] with g(lo) < 0 < g(hi)
    let (mut lo, mut hi) = (guess, guess);
    let mut step = 1.0;
    let mut grown = 0;
    if g0 < 0.0 {
        loop {
            hi += step;
            let (g, _) = g_and_slope(hi);
            if g >= 0.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
            grown += 1;
            if grown > 60 {
                return Err(Error::Numeric(format!(
                    "no sign change found above {guess} (g = {g:e} at {hi})"
                )));
            }
        }
    } else {
        loop {
            lo -= step;
            let (g, _) = g_and_slope(lo);
            if g <= 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
            grown += 1;
            if grown > 60 {
                return Err(Error::Numeric(format!(
                    "no sign change found below {guess} (g = {g:e} at {lo})"
                )));
            }
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut last = f64::NAN;
    for iter in 1..=cfg.max_iter {
        let (g, slope) = g_and_slope(x);
        last = g;
        if g.abs() <= cfg.f_tol {
            return Ok(Root {
                x,
                residual: g,
                iterations: iter,
            });
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= cfg.x_tol * (1.0 + x.abs()) {
            return Ok(Root {
                x,
                residual: g,
                iterations: iter,
            });
        }
        let newton = x - g / slope;
        x = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Numeric(format!(
        "root search did not converge in {} iterations: bracket [{lo}, {hi}], residual {last:e}",
        cfg.max_iter
    )))
}
