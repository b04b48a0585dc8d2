//! Joint measurability of two-outcome qubit POVMs.
//!
//! An effect is written `(𝕀 + x𝕀 + m·σ)/2`. Two such POVMs `(x, m)` and
//! `(y, n)` are jointly measurable iff
//! `(1 − F_x² − F_y²)(1 − x²/F_x² − y²/F_y²) ≤ (m·n − xy)²`, where
//! `F_x = (√((1+x)² − m²) + √((1−x)² − m²))/2`.
//! For `x = y = 0` this is `|m + n| + |m − n| ≤ 2`.

use crate::error::Result;
use crate::linalg::Vec3;
use crate::measurement::{Povm, Setup, Time};

/// Slack allowed on the compatible side of each criterion.
pub const JM_TOL: f64 = 1e-12;

/// A criterion `lhs ≤ rhs` evaluated as `margin = lhs − rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JmCheck {
    pub compatible: bool,
    pub margin: f64,
}

impl JmCheck {
    fn from_margin(margin: f64) -> Self {
        Self {
            compatible: margin <= JM_TOL,
            margin,
        }
    }
}

pub fn busch_f(x: f64, eta: f64) -> f64 {
    let root = |s: f64| (s * s - eta * eta).max(0.0).sqrt();
    (root(1.0 + x) + root(1.0 - x)) / 2.0
}

/// `x²/F²`, continued by its limit `0` where `F` vanishes (`x = 0`, `|m| = 1`).
fn bias_ratio(x: f64, f: f64) -> f64 {
    if f == 0.0 {
        0.0
    } else {
        x * x / (f * f)
    }
}

pub fn pairwise_jm_general(a: &Povm, b: &Povm) -> JmCheck {
    let (x, m) = (a.x(), a.m());
    let (y, n) = (b.x(), b.m());
    let fx = busch_f(x, m.norm());
    let fy = busch_f(y, n.norm());
    let lhs = (1.0 - fx * fx - fy * fy) * (1.0 - bias_ratio(x, fx) - bias_ratio(y, fy));
    let rhs = (m.dot(&n) - x * y).powi(2);
    JmCheck::from_margin(lhs - rhs)
}

pub fn pairwise_jm_unbiased(m: &Vec3, n: &Vec3) -> JmCheck {
    JmCheck::from_margin((m + n).norm() + (m - n).norm() - 2.0)
}

fn triple_sum(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (a + b + c).norm() + (a - b - c).norm() + (-a + b - c).norm() + (-a - b + c).norm()
}

/// Four-norm criterion `Σ |±m₁ ± m₂ ± m₃| ≤ 4` for unbiased triples.
pub fn triplewise_jm_unbiased(m1: &Vec3, m2: &Vec3, m3: &Vec3) -> JmCheck {
    JmCheck::from_margin(triple_sum(m1, m2, m3) - 4.0)
}

fn unit(v: &Vec3) -> Vec3 {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        Vec3::z()
    }
}

/// Largest η keeping two unbiased POVMs along `a` and `b` compatible.
pub fn pair_threshold_unbiased(a: &Vec3, b: &Vec3) -> f64 {
    let (a, b) = (unit(a), unit(b));
    (2.0 / ((a + b).norm() + (a - b).norm())).min(1.0)
}

/// Largest η keeping two POVMs with `x = η − 1` along `a` and `b` compatible.
///
/// Exactly parallel directions give identical POVMs, compatible at every η,
/// while any tilt drops the threshold to about 1/2.
pub fn pair_threshold_biased(a: &Vec3, b: &Vec3) -> f64 {
    let c = unit(a).dot(&unit(b)).clamp(-1.0, 1.0);
    if c >= 1.0 {
        return 1.0;
    }
    1.0 / (1.0 + ((1.0 + c) / 2.0).sqrt())
}

pub fn triple_threshold_unbiased(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (4.0 / triple_sum(&unit(a), &unit(b), &unit(c))).min(1.0)
}

/// Largest η in `[0, hi]` with `compatible(η)`, assuming compatibility is lost
/// at most once as η grows.
pub fn threshold_by_bisection(hi: f64, tol: f64, compatible: impl Fn(f64) -> bool) -> f64 {
    if compatible(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if compatible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// How the bias of the measured POVM depends on η.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BiasLaw {
    Zero,
    EtaMinusOne,
    Fixed(f64),
}

impl BiasLaw {
    pub fn of(povm: &Povm) -> Self {
        let (x, eta) = (povm.x(), povm.eta());
        if x == 0.0 {
            BiasLaw::Zero
        } else if (x - (eta - 1.0)).abs() <= 1e-12 {
            BiasLaw::EtaMinusOne
        } else {
            BiasLaw::Fixed(x)
        }
    }

    pub fn x(self, eta: f64) -> f64 {
        match self {
            BiasLaw::Zero => 0.0,
            BiasLaw::EtaMinusOne => eta - 1.0,
            BiasLaw::Fixed(x) => x,
        }
    }

    pub fn eta_max(self) -> f64 {
        match self {
            BiasLaw::Fixed(x) => 1.0 - x.abs(),
            _ => 1.0,
        }
    }
}

/// Threshold for two measurement directions under a bias law.
pub fn pair_threshold(law: BiasLaw, a: &Vec3, b: &Vec3) -> f64 {
    match law {
        BiasLaw::Zero => pair_threshold_unbiased(a, b),
        BiasLaw::EtaMinusOne => pair_threshold_biased(a, b),
        BiasLaw::Fixed(_) => pair_threshold_numeric(law, a, b),
    }
}

pub fn pair_threshold_numeric(law: BiasLaw, a: &Vec3, b: &Vec3) -> f64 {
    let (a, b) = (unit(a), unit(b));
    threshold_by_bisection(law.eta_max(), 1e-12, |eta| {
        let x = law.x(eta);
        match (Povm::new(x, a * eta), Povm::new(x, b * eta)) {
            (Ok(p), Ok(q)) => pairwise_jm_general(&p, &q).compatible,
            _ => false,
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairVerdict {
    pub pair: (Time, Time),
    pub compatible: bool,
    pub margin: f64,
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripleVerdict {
    pub compatible: bool,
    pub margin: f64,
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JmVerdict {
    /// Pairs `(t1,t2)`, `(t2,t3)`, `(t1,t3)`.
    pub pairwise: [PairVerdict; 3],
    /// Only for unbiased POVMs.
    pub triplewise: Option<TripleVerdict>,
}

pub const JM_PAIRS: [(Time, Time); 3] = [(Time::T1, Time::T2), (Time::T2, Time::T3), (Time::T1, Time::T3)];

/// Compatibility of the effects measured at the three times, each pulled back
/// to `t1`. The bias law is inferred from the POVM.
pub fn jm_verdict(setup: &Setup) -> Result<JmVerdict> {
    jm_verdict_with(setup, BiasLaw::of(&setup.povm()))
}

/// As [`jm_verdict`], with thresholds following an explicit bias law.
pub fn jm_verdict_with(setup: &Setup, law: BiasLaw) -> Result<JmVerdict> {
    let povms = Time::ALL.map(|t| setup.povm_at(t));
    let dirs = povms.map(|p| unit(&p.m()));
    let pairwise = JM_PAIRS.map(|(a, b)| {
        let check = pairwise_jm_general(&povms[a.index()], &povms[b.index()]);
        PairVerdict {
            pair: (a, b),
            compatible: check.compatible,
            margin: check.margin,
            threshold: pair_threshold(law, &dirs[a.index()], &dirs[b.index()]),
        }
    });
    let triplewise = (law == BiasLaw::Zero).then(|| {
        let [m1, m2, m3] = povms.map(|p| p.m());
        let check = triplewise_jm_unbiased(&m1, &m2, &m3);
        TripleVerdict {
            compatible: check.compatible,
            margin: check.margin,
            threshold: triple_threshold_unbiased(&dirs[0], &dirs[1], &dirs[2]),
        }
    });
    Ok(JmVerdict { pairwise, triplewise })
}

impl JmVerdict {
    pub fn pair(&self, a: Time, b: Time) -> &PairVerdict {
        self.pairwise
            .iter()
            .find(|v| v.pair == (a, b) || v.pair == (b, a))
            .expect("all three pairs are present")
    }
}
