//! Randomized invariant checks over the whole pipeline.
//!
//! Each check draws its own cases from a ChaCha stream keyed by the seed and
//! the case number, so results do not depend on thread scheduling.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::inequalities::{entropy, is_violation, wlgi_from, WlgiSpec};
use crate::linalg::{Operator, Vec3};
use crate::measurement::{
    effect_at_time, luders_update, Outcome, Povm, QubitState, Setup, Statistics, Time, TimeSet,
};
use crate::nsit::{aot_residual, threshold_check_from};

pub const DEFAULT_CASES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0x5eed_1e66;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual seen, in the check's own units.
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }
}

/// A random state and setup. About one case in five uses a mixed state and
/// half use a tilted rotation axis; the bias is zero, `η − 1` or random.
pub fn random_case(rng: &mut ChaCha8Rng) -> Result<(QubitState, Setup)> {
    let state = if rng.gen_bool(0.2) {
        let r = random_unit(rng) * rng.gen::<f64>().cbrt();
        QubitState::from_bloch(r)?
    } else {
        QubitState::pure(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI))
    };
    let eta = rng.gen::<f64>();
    let x = match rng.gen_range(0..3) {
        0 => 0.0,
        1 => eta - 1.0,
        _ => (1.0 - eta) * rng.gen_range(-1.0..=1.0),
    };
    let axis = if rng.gen_bool(0.5) {
        Vec3::x()
    } else {
        random_unit(rng)
    };
    let setup = Setup::new(rng.gen_range(0.0..PI), axis, Povm::new(x, random_unit(rng) * eta)?)?;
    Ok((state, setup))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

fn case_rng(seed: u64, check: usize, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(check as u64));
    rng.set_stream(case as u64);
    rng
}

/// Runs `body` on `cases` random draws. It returns the residual and whether
/// the case passed.
fn check<F>(name: &'static str, index: usize, cases: usize, seed: u64, body: F) -> CheckOutcome
where
    F: Fn(&mut ChaCha8Rng) -> Result<(f64, bool)> + Sync,
{
    let results: Vec<(usize, Result<(f64, bool)>)> = (0..cases)
        .into_par_iter()
        .map(|i| (i, body(&mut case_rng(seed, index, i))))
        .collect();
    let mut out = CheckOutcome {
        name,
        cases,
        failures: 0,
        worst: 0.0,
        first_failure: None,
    };
    for (i, r) in results {
        let failed = match r {
            Ok((residual, ok)) => {
                out.worst = out.worst.max(residual);
                (!ok).then(|| format!("case {i}: residual {residual:.3e}"))
            }
            Err(e) => Some(format!("case {i}: {e}")),
        };
        if let Some(msg) = failed {
            out.failures += 1;
            out.first_failure.get_or_insert(msg);
        }
    }
    out
}

fn normalization(rng: &mut ChaCha8Rng) -> Result<(f64, bool)> {
    let (state, setup) = random_case(rng)?;
    let stats = Statistics::collect(&state, &setup)?;
    let mut worst = 0.0f64;
    let mut nonneg = true;
    let dists = Time::ALL
        .iter()
        .map(|&t| stats.single(t))
        .chain([
            stats.pair(Time::T1, Time::T2),
            stats.pair(Time::T1, Time::T3),
            stats.pair(Time::T2, Time::T3),
            stats.triple(),
        ]);
    for d in dists {
        worst = worst.max((d.sum() - 1.0).abs());
        nonneg &= d.probs().iter().all(|&p| p >= -1e-12);
    }
    Ok((worst, worst < 1e-10 && nonneg))
}

fn arrow_of_time(rng: &mut ChaCha8Rng) -> Result<(f64, bool)> {
    let (state, setup) = random_case(rng)?;
    let r = aot_residual(&Statistics::collect(&state, &setup)?)?;
    Ok((r, r < 1e-10))
}

/// Probabilities from effects pulled back to `t1`, with no state evolution:
/// `P(i,j,k) = tr(E₃ S₂ S₁ ρ S₁ S₂)` with `S = √E`.
fn heisenberg_schrodinger(rng: &mut ChaCha8Rng) -> Result<(f64, bool)> {
    let (state, setup) = random_case(rng)?;
    let stats = Statistics::collect(&state, &setup)?;
    let rho = state.rho();
    let eff = |t: Time, o: Outcome| -> Result<(Operator, Operator)> {
        let e = effect_at_time(&setup, t, o)?;
        Ok((e.operator(), e.sqrt()?))
    };
    let mut worst = 0.0f64;
    for a in Outcome::ALL {
        let (_, s1) = eff(Time::T1, a)?;
        for b in Outcome::ALL {
            let (e2, s2) = eff(Time::T2, b)?;
            let pair12 = (e2 * s1 * *rho * s1).trace().re;
            worst = worst.max((pair12 - stats.pair_prob((Time::T1, a), (Time::T2, b))).abs());
            for c in Outcome::ALL {
                let (e3, _) = eff(Time::T3, c)?;
                let p = (e3 * s2 * s1 * *rho * s1 * s2).trace().re;
                let q = stats.triple().prob_of(&[(Time::T1, a), (Time::T2, b), (Time::T3, c)]);
                worst = worst.max((p - q).abs());
            }
            let (e3, _) = eff(Time::T3, b)?;
            let pair13 = (e3 * s1 * *rho * s1).trace().re;
            worst = worst.max((pair13 - stats.pair_prob((Time::T1, a), (Time::T3, b))).abs());
        }
    }
    Ok((worst, worst < 1e-10))
}

/// With `η = 1, x = 0` every effect is a projector, equal to its own square
/// root, and a pure state stays pure after an update.
fn sharp_projector(rng: &mut ChaCha8Rng) -> Result<(f64, bool)> {
    let state = QubitState::pure(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
    let setup = Setup::new(rng.gen_range(0.0..PI), random_unit(rng), Povm::spin(1.0, random_unit(rng))?)?;
    let mut worst = 0.0f64;
    for t in Time::ALL {
        for o in Outcome::ALL {
            let e = effect_at_time(&setup, t, o)?;
            let p = e.operator();
            worst = worst.max((p * p).max_abs_diff(&p));
            worst = worst.max(e.sqrt()?.max_abs_diff(&p));
            if let (_, Some(post)) = luders_update(&state, &e)? {
                worst = worst.max((post.purity() - 1.0).abs());
            }
        }
    }
    Ok((worst, worst < 1e-10))
}

/// `max(H(A), H(B)) ≤ H(A,B) ≤ H(A) + H(B)` for every pair and for the triple
/// split as (first two, last).
fn entropy_chain(rng: &mut ChaCha8Rng) -> Result<(f64, bool)> {
    let (state, setup) = random_case(rng)?;
    let stats = Statistics::collect(&state, &setup)?;
    let mut worst = 0.0f64;
    let joints = [
        (stats.pair(Time::T1, Time::T2), Time::T2),
        (stats.pair(Time::T1, Time::T3), Time::T3),
        (stats.pair(Time::T2, Time::T3), Time::T3),
        (stats.triple(), Time::T3),
    ];
    for (joint, last) in joints {
        let h = entropy(joint.probs());
        let ha = entropy(joint.marginalize(joint.vars().without(last))?.probs());
        let hb = entropy(joint.marginalize(TimeSet::single(last))?.probs());
        worst = worst.max(ha - h).max(hb - h).max(h - ha - hb);
    }
    Ok((worst.max(0.0), worst <= 1e-12))
}

fn threshold_equivalence(rng: &mut ChaCha8Rng) -> Result<(f64, bool)> {
    let (state, setup) = random_case(rng)?;
    let stats = Statistics::collect(&state, &setup)?;
    let mut worst = 0.0f64;
    let mut ok = true;
    for spec in WlgiSpec::all() {
        let value = wlgi_from(&stats, &spec);
        let chk = threshold_check_from(&stats, &spec);
        worst = worst.max((chk.lhs - chk.rhs - value).abs());
        if value.abs() > 1e-10 {
            ok &= chk.predicted_violation == is_violation(value, 0.0);
        }
    }
    Ok((worst, ok && worst <= 1e-12))
}

pub const CHECK_NAMES: [&str; 6] = [
    "normalization",
    "arrow-of-time",
    "heisenberg-schrodinger",
    "sharp-projector",
    "entropy-chain-rule",
    "threshold-check-equivalence",
];

pub fn run(cases: usize, seed: u64) -> SelftestReport {
    let checks = vec![
        check(CHECK_NAMES[0], 0, cases, seed, normalization),
        check(CHECK_NAMES[1], 1, cases, seed, arrow_of_time),
        check(CHECK_NAMES[2], 2, cases, seed, heisenberg_schrodinger),
        check(CHECK_NAMES[3], 3, cases, seed, sharp_projector),
        check(CHECK_NAMES[4], 4, cases, seed, entropy_chain),
        check(CHECK_NAMES[5], 5, cases, seed, threshold_equivalence),
    ];
    SelftestReport { seed, checks }
}
