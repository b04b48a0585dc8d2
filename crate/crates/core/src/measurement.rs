//! Sequential unsharp measurements of a qubit at up to three times.
//!
//! The detector is the two-outcome POVM `M± = (𝕀 ± (x𝕀 + m⃗·σ⃗))/2`. Between
//! consecutive times the system evolves under `exp(−iτ n̂·σ⃗)`, and each
//! measurement updates the state with the Lüders rule `√E ρ √E / tr(ρE)`.
//! Distributions are computed in the Schrödinger picture: the same POVM is
//! applied at every measured time and the state carries the evolution.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{qubit_unitary, Operator, PauliCoeffs, Vec3, AXIS_TOL};

/// Slack allowed in `|x| + |m⃗| ≤ 1`.
pub const EFFECT_TOL: f64 = 1e-12;
/// Branches with probability at or below this are dropped (no post-state).
pub const ZERO_PROB: f64 = 1e-12;
/// Maximum tolerated deviation of a distribution's total from 1.
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Time {
    T1,
    T2,
    T3,
}

impl Time {
    pub const ALL: [Time; 3] = [Time::T1, Time::T2, Time::T3];

    /// Zero-based position, also the number of evolution steps from `t1`.
    pub fn index(self) -> usize {
        match self {
            Time::T1 => 0,
            Time::T2 => 1,
            Time::T3 => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Time> {
        Time::ALL.get(i).copied()
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.number())
    }
}

/// A subset of `{t1, t2, t3}`, iterated in temporal order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct TimeSet(u8);

impl TimeSet {
    pub const EMPTY: TimeSet = TimeSet(0);
    pub const ALL: TimeSet = TimeSet(0b111);

    pub fn of(times: &[Time]) -> Self {
        times.iter().fold(Self::EMPTY, |s, &t| s.with(t))
    }

    pub fn single(t: Time) -> Self {
        Self::EMPTY.with(t)
    }

    pub fn pair(a: Time, b: Time) -> Self {
        Self::of(&[a, b])
    }

    pub fn with(self, t: Time) -> Self {
        TimeSet(self.0 | (1 << t.index()))
    }

    pub fn without(self, t: Time) -> Self {
        TimeSet(self.0 & !(1 << t.index()))
    }

    pub fn contains(self, t: Time) -> bool {
        self.0 & (1 << t.index()) != 0
    }

    pub fn is_subset_of(self, other: TimeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Time> {
        Time::ALL.into_iter().filter(move |t| self.contains(*t))
    }

    pub fn first(self) -> Option<Time> {
        self.iter().next()
    }

    pub fn last(self) -> Option<Time> {
        self.iter().last()
    }

    /// Position of `t` among the members, if present.
    pub fn position(self, t: Time) -> Option<usize> {
        self.iter().position(|s| s == t)
    }
}

impl fmt::Display for TimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|t| t.to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    fn bit(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    fn from_bit(bit: usize) -> Outcome {
        if bit == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
        })
    }
}

/// A qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    rho: Operator,
}

impl QubitState {
    /// `cosθ|0⟩ + e^{iφ} sinθ|1⟩`, Bloch vector `(sin2θ cosφ, sin2θ sinφ, cos2θ)`.
    pub fn pure(theta: f64, phi: f64) -> Self {
        let s2 = (2.0 * theta).sin();
        Self::from_bloch_unchecked(Vec3::new(
            s2 * phi.cos(),
            s2 * phi.sin(),
            (2.0 * theta).cos(),
        ))
    }

    /// `𝕀/2`
    pub fn maximally_mixed() -> Self {
        Self::from_bloch_unchecked(Vec3::zeros())
    }

    pub fn from_bloch(r: Vec3) -> Result<Self> {
        let len = r.norm();
        if !len.is_finite() || len > 1.0 + EFFECT_TOL {
            return Err(Error::Invariant(format!(
                "Bloch vector of length {len} is not a state"
            )));
        }
        Ok(Self::from_bloch_unchecked(r))
    }

    fn from_bloch_unchecked(r: Vec3) -> Self {
        Self {
            rho: Operator::from_pauli(&PauliCoeffs::new(0.5, r * 0.5)),
        }
    }

    /// Validates a density matrix: Hermitian, unit trace, PSD.
    pub fn from_operator(rho: Operator) -> Result<Self> {
        let c = rho.to_pauli()?;
        if (c.a0 - 0.5).abs() > 0.5e-12 {
            return Err(Error::Invariant(format!(
                "density matrix has trace {}",
                2.0 * c.a0
            )));
        }
        let eig = c.eigen();
        if eig.lower < -1e-12 {
            return Err(Error::NotPsd {
                eigenvalue: eig.lower,
            });
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> &Operator {
        &self.rho
    }

    pub fn bloch(&self) -> Vec3 {
        let c = self.rho.pauli_parts_unchecked();
        c.a * 2.0
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    pub fn evolved(&self, u: &Operator) -> Self {
        Self {
            rho: self.rho.conjugate_by(u),
        }
    }
}

/// The two-outcome POVM `{M⁺, M⁻}` with bias `x` and Bloch vector `m⃗`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Povm {
    x: f64,
    m: Vec3,
}

impl Povm {
    pub fn new(x: f64, m: Vec3) -> Result<Self> {
        let eta = m.norm();
        let total = x.abs() + eta;
        if !total.is_finite() || total > 1.0 + EFFECT_TOL {
            return Err(Error::InvalidEffect { x, eta, total });
        }
        Ok(Self { x, m })
    }

    /// Unbiased spin POVM `(𝕀 ± η n̂·σ⃗)/2`.
    pub fn spin(eta: f64, direction: Vec3) -> Result<Self> {
        Self::new(0.0, direction.normalize() * eta)
    }

    /// Biased POVM with `x = η − 1`, so `M⁺ = η(𝕀 + n̂·σ⃗)/2`.
    pub fn biased(eta: f64, direction: Vec3) -> Result<Self> {
        Self::new(eta - 1.0, direction.normalize() * eta)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn m(&self) -> Vec3 {
        self.m
    }

    pub fn eta(&self) -> f64 {
        self.m.norm()
    }

    pub fn effect(&self, outcome: Outcome) -> Effect {
        Effect {
            x: self.x,
            m: self.m,
            sign: outcome,
        }
    }

    /// Heisenberg-evolved POVM `U† M U`; the bias is carried over unchanged.
    pub fn evolved(&self, u: &Operator) -> Povm {
        let m = Operator::sigma_dot(&self.m)
            .heisenberg_by(u)
            .pauli_parts_unchecked()
            .a;
        Povm { x: self.x, m }
    }
}

/// One element `(𝕀 + s(x𝕀 + m⃗·σ⃗))/2` of a two-outcome POVM.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Effect {
    pub x: f64,
    pub m: Vec3,
    pub sign: Outcome,
}

impl Effect {
    pub fn operator(&self) -> Operator {
        let s = self.sign.sign();
        Operator::from_pauli(&PauliCoeffs::new(0.5 * (1.0 + s * self.x), self.m * (0.5 * s)))
    }

    /// Lüders square root `√E`.
    pub fn sqrt(&self) -> Result<Operator> {
        self.operator().sqrt_psd()
    }

    pub fn povm(&self) -> Povm {
        Povm {
            x: self.x,
            m: self.m,
        }
    }
}

/// Everything about the three-time protocol except which times are measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Setup {
    tau: f64,
    axis: Vec3,
    povm: Povm,
}

impl Setup {
    pub fn new(tau: f64, axis: Vec3, povm: Povm) -> Result<Self> {
        let norm = axis.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > AXIS_TOL {
            return Err(Error::BadAxis { norm });
        }
        if !tau.is_finite() {
            return Err(Error::Invariant(format!("non-finite phase {tau}")));
        }
        Ok(Self { tau, axis, povm })
    }

    /// `σx` Hamiltonian with the POVM along `ẑ` at `t1`.
    pub fn standard(tau: f64, x: f64, eta: f64) -> Result<Self> {
        Self::new(tau, Vec3::x(), Povm::new(x, Vec3::z() * eta)?)
    }

    /// Unit axis `(cosα sinβ, cosα cosβ, sinα)` of `H = ω(...)·σ⃗`.
    pub fn axis_from_angles(alpha: f64, beta: f64) -> Vec3 {
        Vec3::new(
            alpha.cos() * beta.sin(),
            alpha.cos() * beta.cos(),
            alpha.sin(),
        )
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn povm(&self) -> Povm {
        self.povm
    }

    pub fn unitary(&self, steps: usize) -> Operator {
        qubit_unitary(&self.axis, self.tau * steps as f64)
            .expect("axis validated at construction")
    }

    /// The POVM measured at `time` expressed at `t1` (Heisenberg picture).
    pub fn povm_at(&self, time: Time) -> Povm {
        self.povm.evolved(&self.unitary(time.index()))
    }

    pub fn schedule(&self, measured: TimeSet) -> Schedule {
        Schedule {
            setup: *self,
            measured,
        }
    }
}

/// A setup plus the subset of times at which a measurement is performed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub setup: Setup,
    pub measured: TimeSet,
}

impl Schedule {
    pub fn new(setup: Setup, measured: TimeSet) -> Result<Self> {
        if measured.is_empty() {
            return Err(Error::EmptySchedule);
        }
        Ok(Self { setup, measured })
    }
}

pub fn make_pure_state(theta: f64, phi: f64) -> QubitState {
    QubitState::pure(theta, phi)
}

/// Effect at `time` in the Heisenberg picture, `U†(kτ) M U(kτ)` with `k = time − 1`.
pub fn effect_at_time(setup: &Setup, time: Time, outcome: Outcome) -> Result<Effect> {
    let base = setup.povm();
    Povm::new(base.x(), base.m())?;
    Ok(setup.povm_at(time).effect(outcome))
}

/// Probability of `effect` and the Lüders post-measurement state.
///
/// Returns `None` for the post-state when the outcome has probability at or
/// below [`ZERO_PROB`].
pub fn luders_update(state: &QubitState, effect: &Effect) -> Result<(f64, Option<QubitState>)> {
    let root = effect.sqrt()?;
    let (p, post) = luders_raw(state.rho(), &effect.operator(), &root);
    Ok((p, post.map(|rho| QubitState { rho })))
}

fn luders_raw(rho: &Operator, effect: &Operator, root: &Operator) -> (f64, Option<Operator>) {
    let p = (*rho * *effect).trace().re.clamp(0.0, 1.0);
    if p <= ZERO_PROB {
        return (p, None);
    }
    let post = (*root * *rho * *root).scale(1.0 / p);
    (p, Some(post))
}

/// Joint outcome distribution of a sequential measurement schedule.
///
/// Probabilities are stored with the earliest variable as the most
/// significant index bit and `+` before `−`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    schedule: Schedule,
    vars: TimeSet,
    probs: Vec<f64>,
}

pub fn run_schedule(state: &QubitState, schedule: &Schedule) -> Result<JointDistribution> {
    if schedule.measured.is_empty() {
        return Err(Error::EmptySchedule);
    }
    let setup = &schedule.setup;
    let povm = setup.povm();
    Povm::new(povm.x(), povm.m())?;

    let effects: Vec<(Operator, Operator)> = Outcome::ALL
        .iter()
        .map(|&o| {
            let e = povm.effect(o);
            Ok((e.operator(), e.sqrt()?))
        })
        .collect::<Result<_>>()?;

    let mut branches: Vec<(f64, Option<Operator>)> = vec![(1.0, Some(*state.rho()))];
    let mut clock = 0usize;
    for t in schedule.measured.iter() {
        let u = setup.unitary(t.index() - clock);
        clock = t.index();
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (weight, rho) in branches {
            match rho {
                Some(rho) if weight > 0.0 => {
                    let rho = rho.conjugate_by(&u);
                    for (effect, root) in &effects {
                        let (p, post) = luders_raw(&rho, effect, root);
                        next.push((weight * p, post));
                    }
                }
                _ => {
                    next.push((0.0, None));
                    next.push((0.0, None));
                }
            }
        }
        branches = next;
    }

    let probs: Vec<f64> = branches.into_iter().map(|(p, _)| p).collect();
    let dist = JointDistribution {
        schedule: *schedule,
        vars: schedule.measured,
        probs,
    };
    dist.check_normalized()?;
    Ok(dist)
}

impl JointDistribution {
    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// The times whose outcomes index this table.
    pub fn vars(&self) -> TimeSet {
        self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let sum = self.sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { sum });
        }
        Ok(())
    }

    fn shift(&self, t: Time) -> usize {
        let pos = self.vars.position(t).expect("time is a variable");
        self.vars.len() - 1 - pos
    }

    /// Outcome of variable `t` in the table entry at `index`.
    pub fn outcome_at(&self, index: usize, t: Time) -> Outcome {
        Outcome::from_bit((index >> self.shift(t)) & 1)
    }

    /// Probability of outcomes listed in temporal order of [`Self::vars`].
    pub fn prob(&self, outcomes: &[Outcome]) -> f64 {
        assert_eq!(outcomes.len(), self.vars.len(), "one outcome per variable");
        let index = outcomes.iter().fold(0, |acc, o| (acc << 1) | o.bit());
        self.probs[index]
    }

    /// Probability of an assignment given as `(time, outcome)` pairs in any order.
    pub fn prob_of(&self, assignment: &[(Time, Outcome)]) -> f64 {
        assert_eq!(assignment.len(), self.vars.len(), "one outcome per variable");
        let index = assignment.iter().fold(0, |acc, &(t, o)| {
            assert!(self.vars.contains(t), "{t} is not a variable of {}", self.vars);
            acc | (o.bit() << self.shift(t))
        });
        self.probs[index]
    }

    /// Probability of a partial assignment, summing over the unassigned variables.
    pub fn marginal_prob(&self, assignment: &[(Time, Outcome)]) -> f64 {
        for &(t, _) in assignment {
            assert!(self.vars.contains(t), "{t} is not a variable of {}", self.vars);
        }
        self.probs
            .iter()
            .enumerate()
            .filter(|&(i, _)| assignment.iter().all(|&(t, o)| self.outcome_at(i, t) == o))
            .map(|(_, p)| p)
            .sum()
    }

    /// Iterates `(outcomes in temporal order, probability)`.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<Outcome>, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| {
            let outcomes = self.vars.iter().map(|t| self.outcome_at(i, t)).collect();
            (outcomes, p)
        })
    }

    /// Sums out every variable not in `keep`.
    pub fn marginalize(&self, keep: TimeSet) -> Result<JointDistribution> {
        if keep.is_empty() || !keep.is_subset_of(self.vars) {
            return Err(Error::BadSubset {
                requested: keep.to_string(),
                measured: self.vars.to_string(),
            });
        }
        let mut out = JointDistribution {
            schedule: self.schedule,
            vars: keep,
            probs: vec![0.0; 1 << keep.len()],
        };
        for (i, &p) in self.probs.iter().enumerate() {
            let j = keep
                .iter()
                .fold(0, |acc, t| (acc << 1) | self.outcome_at(i, t).bit());
            out.probs[j] += p;
        }
        Ok(out)
    }

    /// Same distribution with the outcome labels of `t` exchanged.
    pub fn relabeled(&self, t: Time) -> JointDistribution {
        if !self.vars.contains(t) {
            return self.clone();
        }
        let mask = 1 << self.shift(t);
        let mut out = self.clone();
        for (i, p) in out.probs.iter_mut().enumerate() {
            *p = self.probs[i ^ mask];
        }
        out
    }

    /// `Σ (∏ signs) P` over all entries; the two-time correlator for pairs.
    pub fn correlator(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let parity = (i.count_ones() % 2) as i32;
                if parity == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }
}

/// `⟨M_i M_j⟩ = Σ kl P(M_i^k, M_j^l)` from a two-measurement schedule.
pub fn correlator(state: &QubitState, schedule: &Schedule) -> Result<f64> {
    if schedule.measured.len() != 2 {
        return Err(Error::BadSubset {
            requested: schedule.measured.to_string(),
            measured: "a pair of times".into(),
        });
    }
    Ok(run_schedule(state, schedule)?.correlator())
}

/// Distributions of all seven non-empty schedules for one state and setup.
#[derive(Clone, Debug)]
pub struct Statistics {
    singles: [JointDistribution; 3],
    pairs: [JointDistribution; 3],
    triple: JointDistribution,
}

const PAIRS: [(Time, Time); 3] = [(Time::T1, Time::T2), (Time::T1, Time::T3), (Time::T2, Time::T3)];

fn pair_slot(a: Time, b: Time) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    PAIRS
        .iter()
        .position(|&p| p == (a, b))
        .unwrap_or_else(|| panic!("({a}, {b}) is not a pair of distinct times"))
}

impl Statistics {
    pub fn collect(state: &QubitState, setup: &Setup) -> Result<Self> {
        let run = |set: TimeSet| run_schedule(state, &setup.schedule(set));
        Ok(Self {
            singles: [
                run(TimeSet::single(Time::T1))?,
                run(TimeSet::single(Time::T2))?,
                run(TimeSet::single(Time::T3))?,
            ],
            pairs: [
                run(TimeSet::pair(Time::T1, Time::T2))?,
                run(TimeSet::pair(Time::T1, Time::T3))?,
                run(TimeSet::pair(Time::T2, Time::T3))?,
            ],
            triple: run(TimeSet::ALL)?,
        })
    }

    pub fn single(&self, t: Time) -> &JointDistribution {
        &self.singles[t.index()]
    }

    pub fn pair(&self, a: Time, b: Time) -> &JointDistribution {
        &self.pairs[pair_slot(a, b)]
    }

    pub fn triple(&self) -> &JointDistribution {
        &self.triple
    }

    /// Stand-alone two-time probability `P(M_a^oa, M_b^ob)`, any argument order.
    pub fn pair_prob(&self, (a, oa): (Time, Outcome), (b, ob): (Time, Outcome)) -> f64 {
        self.pair(a, b).prob_of(&[(a, oa), (b, ob)])
    }

    pub fn correlator(&self, a: Time, b: Time) -> f64 {
        self.pair(a, b).correlator()
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}
