//! Smallest sharpness at which an inequality family can be violated.
//!
//! The violation margin `f(η) = max value − bound` is sampled on a coarse η
//! grid, the single sign change is located, and bisection narrows it down.
//! Maximizing over τ (and optionally the state) uses a grid followed by a
//! golden-section polish around the best grid point.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inequalities::{is_violation, value_from, Family, Spec};
use crate::jointmeas::BiasLaw;
use crate::measurement::{Statistics, EFFECT_TOL};
use crate::scan::GridPoint;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateChoice {
    Pure { theta: f64, phi: f64 },
    Mixed,
}

impl StateChoice {
    fn angles(self) -> (f64, f64) {
        match self {
            StateChoice::Pure { theta, phi } => (theta, phi),
            StateChoice::Mixed => (f64::NAN, f64::NAN),
        }
    }
}

/// Where the inner maximization runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Fixed { state: StateChoice, tau: f64 },
    OverTau { state: StateChoice },
    /// Over pure states and τ.
    OverAll,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdQuery {
    pub family: Family,
    /// One member of the family, or the largest of all members if `None`.
    pub spec: Option<usize>,
    pub bias: BiasLaw,
    pub axis_alpha: f64,
    pub axis_beta: f64,
    pub domain: Domain,
}

impl ThresholdQuery {
    pub fn new(family: Family, bias: BiasLaw, domain: Domain) -> Self {
        Self {
            family,
            spec: None,
            bias,
            axis_alpha: 0.0,
            axis_beta: PI / 2.0,
            domain,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdOptions {
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub coarse_step: f64,
    /// Final width of the η bracket.
    pub tolerance: f64,
    pub tau_step: f64,
    /// Grid step for θ and φ, and for τ when maximizing over states too.
    pub angle_step: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            eta_lo: 0.0,
            eta_hi: 1.0,
            coarse_step: 1e-3,
            tolerance: 1e-4,
            tau_step: PI / 720.0,
            angle_step: PI / 60.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub margin: f64,
    pub theta: f64,
    pub phi: f64,
    pub tau: f64,
    pub spec_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdResult {
    pub eta: f64,
    pub bracket: (f64, f64),
    /// Maximizer at the upper end of the bracket.
    pub at: Maximum,
}

fn value_at(q: &ThresholdQuery, eta: f64, theta: f64, phi: f64, tau: f64) -> Result<(usize, f64)> {
    let point = GridPoint {
        theta,
        phi,
        tau,
        eta,
        x: q.bias.x(eta),
        axis_alpha: q.axis_alpha,
        axis_beta: q.axis_beta,
    };
    let stats = Statistics::collect(&point.state(), &point.setup()?)?;
    let indices: Vec<usize> = match q.spec {
        Some(i) => vec![i],
        None => (0..q.family.spec_count()).collect(),
    };
    let mut best = (0, f64::NEG_INFINITY);
    for i in indices {
        let spec = Spec::of(q.family, i)
            .ok_or_else(|| Error::Invariant(format!("{} has no member {i}", q.family)))?;
        let v = value_from(&stats, &spec);
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

/// Maximizes `f` on `[a, b]`, assuming one peak in the interval.
pub fn golden_max(mut a: f64, mut b: f64, iterations: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

const POLISH_ITERATIONS: usize = 60;

fn tau_grid(step: f64) -> Vec<f64> {
    let n = (PI / step).round().max(2.0) as usize;
    (1..n).map(|k| k as f64 * PI / n as f64).collect()
}

/// Largest margin over the query's domain at one η.
pub fn max_margin(q: &ThresholdQuery, eta: f64, opts: &ThresholdOptions) -> Result<Maximum> {
    let bound = q.family.bound();
    let eval = |theta: f64, phi: f64, tau: f64| -> Result<Maximum> {
        let (spec_index, v) = value_at(q, eta, theta, phi, tau)?;
        Ok(Maximum {
            margin: v - bound,
            theta,
            phi,
            tau,
            spec_index,
        })
    };
    // Polishing only ever replaces a grid maximum with something larger.
    let better = |a: Maximum, b: Maximum| if b.margin > a.margin { b } else { a };
    let soft = |theta: f64, phi: f64, tau: f64| eval(theta, phi, tau).map_or(f64::NEG_INFINITY, |m| m.margin);

    match q.domain {
        Domain::Fixed { state, tau } => {
            let (theta, phi) = state.angles();
            eval(theta, phi, tau)
        }
        Domain::OverTau { state } => {
            let (theta, phi) = state.angles();
            let mut best = Maximum {
                margin: f64::NEG_INFINITY,
                theta,
                phi,
                tau: 0.0,
                spec_index: 0,
            };
            for tau in tau_grid(opts.tau_step) {
                best = better(best, eval(theta, phi, tau)?);
            }
            let h = opts.tau_step;
            let (t, _) = golden_max(best.tau - h, best.tau + h, POLISH_ITERATIONS, |t| soft(theta, phi, t));
            Ok(better(best, eval(theta, phi, t)?))
        }
        Domain::OverAll => {
            let h = opts.angle_step;
            let nt = (PI / 2.0 / h).round() as usize;
            let np = (2.0 * PI / h).round() as usize;
            let mut best = Maximum {
                margin: f64::NEG_INFINITY,
                theta: 0.0,
                phi: 0.0,
                tau: 0.0,
                spec_index: 0,
            };
            for i in 0..=nt {
                for j in 0..np {
                    for tau in tau_grid(h) {
                        best = better(best, eval(i as f64 * h, j as f64 * h, tau)?);
                    }
                }
            }
            for _ in 0..3 {
                let (th, ph, ta) = (best.theta, best.phi, best.tau);
                let (t, _) = golden_max(th - h, th + h, POLISH_ITERATIONS, |v| soft(v, ph, ta));
                best = better(best, eval(t, ph, ta)?);
                let (th, ta) = (best.theta, best.tau);
                let (p, _) = golden_max(best.phi - h, best.phi + h, POLISH_ITERATIONS, |v| soft(th, v, ta));
                best = better(best, eval(th, p, ta)?);
                let (th, ph) = (best.theta, best.phi);
                let (t, _) = golden_max(best.tau - h, best.tau + h, POLISH_ITERATIONS, |v| soft(th, ph, v));
                best = better(best, eval(th, ph, t)?);
            }
            Ok(best)
        }
    }
}

/// η at which the family's maximal violation margin changes sign.
pub fn threshold_eta(q: &ThresholdQuery, opts: &ThresholdOptions) -> Result<ThresholdResult> {
    let hi = opts.eta_hi.min(q.bias.eta_max() + EFFECT_TOL).min(1.0);
    let lo = opts.eta_lo.max(0.0);
    let n = ((hi - lo) / opts.coarse_step).ceil().max(1.0) as usize;
    let etas: Vec<f64> = (0..=n).map(|k| (lo + k as f64 * opts.coarse_step).min(hi)).collect();
    let maxima = etas
        .par_iter()
        .map(|&eta| max_margin(q, eta, opts))
        .collect::<Result<Vec<_>>>()?;
    let positive = |m: &Maximum| is_violation(m.margin, 0.0);

    let crossings: Vec<usize> = (1..maxima.len())
        .filter(|&k| positive(&maxima[k]) != positive(&maxima[k - 1]))
        .collect();
    match crossings.len() {
        0 => {
            return Err(Error::NoBracket {
                lo,
                hi,
                f_lo: maxima[0].margin,
                f_hi: maxima[maxima.len() - 1].margin,
            })
        }
        1 => {}
        n => return Err(Error::NotMonotone { crossings: n }),
    }
    let k = crossings[0];
    let (mut a, mut b) = (etas[k - 1], etas[k]);
    let side_a = positive(&maxima[k - 1]);
    let mut at_b = maxima[k];
    while b - a > opts.tolerance {
        let mid = 0.5 * (a + b);
        let m = max_margin(q, mid, opts)?;
        if positive(&m) == side_a {
            a = mid;
        } else {
            b = mid;
            at_b = m;
        }
    }
    Ok(ThresholdResult {
        eta: 0.5 * (a + b),
        bracket: (a, b),
        at: at_b,
    })
}
