//! Standard, Wigner-form and entropic Leggett-Garg inequalities.
//!
//! Every two-time probability comes from an experiment in which only those
//! two measurements are made ([`Statistics`]), never from a marginal of the
//! three-time run.

pub mod closed_form;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Vec3;
use crate::measurement::{JointDistribution, Outcome, QubitState, Setup, Statistics, Time};

/// A value counts as a violation only if it exceeds the bound by more than this.
pub const VIOLATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Slgi,
    Wlgi,
    Elgi,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Slgi, Family::Wlgi, Family::Elgi];

    pub fn bound(self) -> f64 {
        match self {
            Family::Slgi => 1.0,
            Family::Wlgi | Family::Elgi => 0.0,
        }
    }

    pub fn spec_count(self) -> usize {
        match self {
            Family::Slgi => 4,
            Family::Wlgi => 24,
            Family::Elgi => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Slgi => "slgi",
            Family::Wlgi => "wlgi",
            Family::Elgi => "elgi",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "slgi" => Ok(Family::Slgi),
            "wlgi" => Ok(Family::Wlgi),
            "elgi" => Ok(Family::Elgi),
            other => Err(format!("unknown inequality family '{other}' (expected slgi, wlgi or elgi)")),
        }
    }
}

/// Outcome relabeling `M_i → s_i M_i` of the standard inequality.
///
/// Flipping all three signs leaves the inequality unchanged, so `s1 = +1`
/// and the four specs are ordered `(+++), (++−), (+−+), (+−−)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SlgiSpec {
    pub signs: [i8; 3],
}

impl SlgiSpec {
    pub fn all() -> [SlgiSpec; 4] {
        [
            SlgiSpec { signs: [1, 1, 1] },
            SlgiSpec { signs: [1, 1, -1] },
            SlgiSpec { signs: [1, -1, 1] },
            SlgiSpec { signs: [1, -1, -1] },
        ]
    }

    pub fn standard() -> SlgiSpec {
        SlgiSpec::all()[0]
    }

    /// Canonical position; specs differing by a global flip share an index.
    pub fn index(&self) -> usize {
        let s1 = self.signs[0];
        let s2 = self.signs[1] * s1;
        let s3 = self.signs[2] * s1;
        usize::from(s2 < 0) * 2 + usize::from(s3 < 0)
    }

    fn sign(&self, t: Time) -> f64 {
        f64::from(self.signs[t.index()])
    }
}

/// One of the 24 Wigner-form inequalities
/// `P(M_p^u, M_q^v) − P(M_r^s, M_p^u) − P(M_r^{−s}, M_q^v) ≤ 0`
/// with `p < q` and `r` the remaining time.
///
/// Canonical order is lexicographic in `(pair, u, v, s)` with pairs ordered
/// `(1,2), (1,3), (2,3)` and `+` before `−`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WlgiSpec {
    pub pair: (Time, Time),
    pub u: Outcome,
    pub v: Outcome,
    pub split: Outcome,
}

const WLGI_PAIRS: [(Time, Time); 3] = [(Time::T1, Time::T2), (Time::T1, Time::T3), (Time::T2, Time::T3)];

/// A signed two-time probability `c·P(first, second)`.
pub type WlgiTerm = (f64, (Time, Outcome), (Time, Outcome));

impl WlgiSpec {
    /// `P(M2⁺,M3⁻) − P(M1⁺,M2⁺) − P(M1⁻,M3⁻) ≤ 0`
    pub const STANDARD: WlgiSpec = WlgiSpec {
        pair: (Time::T2, Time::T3),
        u: Outcome::Plus,
        v: Outcome::Minus,
        split: Outcome::Plus,
    };

    /// `P(M1⁺,M3⁻) − P(M1⁺,M2⁻) − P(M2⁺,M3⁻) ≤ 0`
    pub const OUTER: WlgiSpec = WlgiSpec {
        pair: (Time::T1, Time::T3),
        u: Outcome::Plus,
        v: Outcome::Minus,
        split: Outcome::Minus,
    };

    pub fn all() -> Vec<WlgiSpec> {
        let mut out = Vec::with_capacity(24);
        for pair in WLGI_PAIRS {
            for u in Outcome::ALL {
                for v in Outcome::ALL {
                    for split in Outcome::ALL {
                        out.push(WlgiSpec { pair, u, v, split });
                    }
                }
            }
        }
        out
    }

    pub fn from_index(i: usize) -> Option<WlgiSpec> {
        Self::all().get(i).copied()
    }

    pub fn index(&self) -> usize {
        let pair = WLGI_PAIRS
            .iter()
            .position(|&p| p == self.pair)
            .expect("pair is one of the three ordered pairs");
        let bit = |o: Outcome| usize::from(o == Outcome::Minus);
        pair * 8 + bit(self.u) * 4 + bit(self.v) * 2 + bit(self.split)
    }

    /// The time summed over in the derivation.
    pub fn marginalized(&self) -> Time {
        Time::ALL
            .into_iter()
            .find(|&t| t != self.pair.0 && t != self.pair.1)
            .expect("three distinct times")
    }

    /// The three probabilities as `(coefficient, first, second)`.
    pub fn terms(&self) -> [WlgiTerm; 3] {
        let (p, q) = self.pair;
        let r = self.marginalized();
        [
            (1.0, (p, self.u), (q, self.v)),
            (-1.0, (r, self.split), (p, self.u)),
            (-1.0, (r, self.split.flip()), (q, self.v)),
        ]
    }
}

impl fmt::Display for WlgiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |(t, o): (Time, Outcome)| format!("M{}{}", t.number(), o);
        let [a, b, c] = self.terms();
        let ordered = |(x, y): ((Time, Outcome), (Time, Outcome))| {
            if x.0 < y.0 {
                format!("P({},{})", name(x), name(y))
            } else {
                format!("P({},{})", name(y), name(x))
            }
        };
        write!(
            f,
            "{} - {} - {} <= 0",
            ordered((a.1, a.2)),
            ordered((b.1, b.2)),
            ordered((c.1, c.2))
        )
    }
}

/// Entropic inequality `H(A,C) − H(A,B) − H(B,C) + H(B) ≤ 0` with `B = middle`.
///
/// Ordered by the conditioned variable, `t1, t2, t3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElgiSpec {
    pub middle: Time,
}

impl ElgiSpec {
    pub const STANDARD: ElgiSpec = ElgiSpec { middle: Time::T2 };

    pub fn all() -> [ElgiSpec; 3] {
        Time::ALL.map(|middle| ElgiSpec { middle })
    }

    pub fn index(&self) -> usize {
        self.middle.index()
    }

    fn outer(&self) -> (Time, Time) {
        let mut rest = Time::ALL.into_iter().filter(|&t| t != self.middle);
        (rest.next().unwrap(), rest.next().unwrap())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spec {
    Slgi(SlgiSpec),
    Wlgi(WlgiSpec),
    Elgi(ElgiSpec),
}

impl Spec {
    pub fn family(&self) -> Family {
        match self {
            Spec::Slgi(_) => Family::Slgi,
            Spec::Wlgi(_) => Family::Wlgi,
            Spec::Elgi(_) => Family::Elgi,
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Spec::Slgi(s) => s.index(),
            Spec::Wlgi(s) => s.index(),
            Spec::Elgi(s) => s.index(),
        }
    }

    pub fn of(family: Family, index: usize) -> Option<Spec> {
        match family {
            Family::Slgi => SlgiSpec::all().get(index).copied().map(Spec::Slgi),
            Family::Wlgi => WlgiSpec::from_index(index).map(Spec::Wlgi),
            Family::Elgi => ElgiSpec::all().get(index).copied().map(Spec::Elgi),
        }
    }
}

/// The physical parameters an inequality was evaluated at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub bloch: Vec3,
    pub tau: f64,
    pub eta: f64,
    pub x: f64,
    pub axis: Vec3,
}

impl Params {
    pub fn of(state: &QubitState, setup: &Setup) -> Self {
        let povm = setup.povm();
        Self {
            bloch: state.bloch(),
            tau: setup.tau(),
            eta: povm.eta(),
            x: povm.x(),
            axis: setup.axis(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityResult {
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
    pub spec: Spec,
    pub params: Params,
}

impl InequalityResult {
    fn new(value: f64, spec: Spec, params: Params) -> Self {
        let bound = spec.family().bound();
        Self {
            value,
            bound,
            violated: is_violation(value, bound),
            spec,
            params,
        }
    }
}

pub fn is_violation(value: f64, bound: f64) -> bool {
    value > bound + VIOLATION_TOL
}

pub fn slgi_from(stats: &Statistics, spec: &SlgiSpec) -> f64 {
    let term = |a: Time, b: Time| spec.sign(a) * spec.sign(b) * stats.correlator(a, b);
    term(Time::T1, Time::T2) + term(Time::T2, Time::T3) - term(Time::T1, Time::T3)
}

pub fn wlgi_from(stats: &Statistics, spec: &WlgiSpec) -> f64 {
    spec.terms()
        .iter()
        .map(|&(c, a, b)| c * stats.pair_prob(a, b))
        .sum()
}

pub fn elgi_from(stats: &Statistics, spec: &ElgiSpec) -> f64 {
    let b = spec.middle;
    let (a, c) = spec.outer();
    shannon_entropy(stats.pair(a, c)) - shannon_entropy(stats.pair(a, b))
        - shannon_entropy(stats.pair(b, c))
        + shannon_entropy(stats.single(b))
}

pub fn value_from(stats: &Statistics, spec: &Spec) -> f64 {
    match spec {
        Spec::Slgi(s) => slgi_from(stats, s),
        Spec::Wlgi(s) => wlgi_from(stats, s),
        Spec::Elgi(s) => elgi_from(stats, s),
    }
}

pub fn slgi_value(state: &QubitState, setup: &Setup, spec: &SlgiSpec) -> Result<InequalityResult> {
    let stats = Statistics::collect(state, setup)?;
    Ok(InequalityResult::new(
        slgi_from(&stats, spec),
        Spec::Slgi(*spec),
        Params::of(state, setup),
    ))
}

pub fn wlgi_value(state: &QubitState, setup: &Setup, spec: &WlgiSpec) -> Result<InequalityResult> {
    let stats = Statistics::collect(state, setup)?;
    Ok(InequalityResult::new(
        wlgi_from(&stats, spec),
        Spec::Wlgi(*spec),
        Params::of(state, setup),
    ))
}

/// All 24 Wigner-form values in canonical order.
pub fn wlgi_all(state: &QubitState, setup: &Setup) -> Result<Vec<InequalityResult>> {
    let stats = Statistics::collect(state, setup)?;
    let params = Params::of(state, setup);
    Ok(WlgiSpec::all()
        .into_iter()
        .map(|s| InequalityResult::new(wlgi_from(&stats, &s), Spec::Wlgi(s), params))
        .collect())
}

pub fn elgi_value(state: &QubitState, setup: &Setup, spec: &ElgiSpec) -> Result<InequalityResult> {
    let stats = Statistics::collect(state, setup)?;
    Ok(InequalityResult::new(
        elgi_from(&stats, spec),
        Spec::Elgi(*spec),
        Params::of(state, setup),
    ))
}

/// `−Σ p ln p` in nats, with `0 ln 0 = 0`.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub fn shannon_entropy(dist: &JointDistribution) -> f64 {
    entropy(dist.probs())
}

/// Every inequality of every family at one parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyValues {
    pub slgi: [f64; 4],
    pub wlgi: Vec<f64>,
    pub elgi: [f64; 3],
}

impl FamilyValues {
    pub fn from_stats(stats: &Statistics) -> Self {
        Self {
            slgi: SlgiSpec::all().map(|s| slgi_from(stats, &s)),
            wlgi: WlgiSpec::all().iter().map(|s| wlgi_from(stats, s)).collect(),
            elgi: ElgiSpec::all().map(|s| elgi_from(stats, &s)),
        }
    }

    pub fn values(&self, family: Family) -> &[f64] {
        match family {
            Family::Slgi => &self.slgi,
            Family::Wlgi => &self.wlgi,
            Family::Elgi => &self.elgi,
        }
    }

    /// `(spec index, value)` of the largest member; the first wins ties.
    pub fn max(&self, family: Family) -> (usize, f64) {
        self.values(family)
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    pub fn violated(&self, family: Family) -> bool {
        is_violation(self.max(family).1, family.bound())
    }
}
