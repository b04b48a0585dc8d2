//! Parameter sweeps, η thresholds and report output.

pub mod config;
pub mod figures;
pub mod report;
pub mod threshold;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inequalities::{is_violation, Family, FamilyValues};
use crate::jointmeas::{jm_verdict_with, BiasLaw, JmVerdict};
use crate::linalg::Vec3;
use crate::measurement::{Povm, QubitState, Setup, Statistics, Time, EFFECT_TOL};
use crate::nsit::{nsit_satisfied, DisturbanceReport, NsitVerdict};

pub use config::{parse_config, ConfigError, ScanConfig, SpecSelection, StateKind};
pub use report::ScanRecord;

/// One grid point after bias resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    /// NaN for the maximally mixed state, like `phi`.
    pub theta: f64,
    pub phi: f64,
    pub tau: f64,
    pub eta: f64,
    pub x: f64,
    pub axis_alpha: f64,
    pub axis_beta: f64,
}

impl GridPoint {
    pub fn state(&self) -> QubitState {
        if self.theta.is_nan() {
            QubitState::maximally_mixed()
        } else {
            QubitState::pure(self.theta, self.phi)
        }
    }

    pub fn setup(&self) -> Result<Setup> {
        let axis = Setup::axis_from_angles(self.axis_alpha, self.axis_beta);
        Setup::new(self.tau, axis, Povm::new(self.x, Vec3::z() * self.eta)?)
    }
}

/// Everything computed at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEvaluation {
    pub point: GridPoint,
    pub values: FamilyValues,
    pub disturbances: DisturbanceReport,
    pub nsit: NsitVerdict,
    pub jm: JmVerdict,
}

pub fn evaluate_point(point: &GridPoint, law: BiasLaw, tolerance: f64) -> Result<PointEvaluation> {
    let setup = point.setup()?;
    let stats = Statistics::collect(&point.state(), &setup)?;
    let disturbances = DisturbanceReport::from_stats(&stats)?;
    Ok(PointEvaluation {
        point: *point,
        values: FamilyValues::from_stats(&stats),
        nsit: nsit_satisfied(&disturbances, tolerance),
        disturbances,
        jm: jm_verdict_with(&setup, law)?,
    })
}

impl PointEvaluation {
    fn record(&self, family: Family, spec_index: usize, value: f64) -> ScanRecord {
        let p = &self.point;
        let bound = family.bound();
        let pair = |a, b| self.jm.pair(a, b).compatible;
        ScanRecord {
            theta: p.theta,
            phi: p.phi,
            tau: p.tau,
            eta: p.eta,
            x: p.x,
            axis_alpha: p.axis_alpha,
            axis_beta: p.axis_beta,
            family,
            spec_index,
            value,
            bound,
            violated: is_violation(value, bound),
            nsit_12: self.nsit.nsit_12,
            nsit_13: self.nsit.nsit_13,
            nsit_23: self.nsit.nsit_23,
            nsit_123: self.nsit.nsit_123,
            nsit_1_2_3: self.nsit.nsit_1_2_3,
            jm_12: pair(Time::T1, Time::T2),
            jm_23: pair(Time::T2, Time::T3),
            jm_13: pair(Time::T1, Time::T3),
            jm_triple: self.jm.triplewise.map(|t| t.compatible),
        }
    }

    pub fn records(&self, families: &[Family], specs: SpecSelection) -> Vec<ScanRecord> {
        let mut out = Vec::new();
        for &family in families {
            match specs {
                SpecSelection::Max => {
                    let (i, v) = self.values.max(family);
                    out.push(self.record(family, i, v));
                }
                SpecSelection::All => {
                    for (i, &v) in self.values.values(family).iter().enumerate() {
                        out.push(self.record(family, i, v));
                    }
                }
                SpecSelection::Only(i) => out.push(self.record(family, i, self.values.values(family)[i])),
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanOutput {
    pub records: Vec<ScanRecord>,
    /// Grid points dropped because `|x| + η > 1`.
    pub skipped: usize,
    pub evaluated: usize,
}

impl ScanOutput {
    pub fn extend(&mut self, other: ScanOutput) {
        self.records.extend(other.records);
        self.skipped += other.skipped;
        self.evaluated += other.evaluated;
    }
}

/// Grid points in output order: θ, then φ, then τ, then η, the last varying fastest.
/// The second value counts points dropped for an invalid effect.
pub fn grid_points(cfg: &ScanConfig) -> (Vec<GridPoint>, usize) {
    let (thetas, phis) = match cfg.state {
        StateKind::Pure => (cfg.theta.clone(), cfg.phi.clone()),
        StateKind::Mixed => (vec![f64::NAN], vec![f64::NAN]),
    };
    let mut points = Vec::with_capacity(cfg.point_count());
    let mut skipped = 0;
    for &theta in &thetas {
        for &phi in &phis {
            for &tau in &cfg.tau {
                for &eta in &cfg.eta {
                    let x = cfg.bias.x(eta);
                    if x.abs() + eta > 1.0 + EFFECT_TOL {
                        skipped += 1;
                        continue;
                    }
                    points.push(GridPoint {
                        theta,
                        phi,
                        tau,
                        eta,
                        x,
                        axis_alpha: cfg.axis_alpha,
                        axis_beta: cfg.axis_beta,
                    });
                }
            }
        }
    }
    (points, skipped)
}

/// Evaluates a run with `jobs` worker threads (all cores if `None`).
/// Records come out in grid order whatever the thread count.
pub fn scan(cfg: &ScanConfig, jobs: Option<usize>) -> Result<ScanOutput> {
    let (points, skipped) = grid_points(cfg);
    let work = || {
        points
            .par_iter()
            .map(|p| evaluate_point(p, cfg.bias, cfg.tolerance).map(|e| e.records(&cfg.families, cfg.specs)))
            .collect::<Result<Vec<_>>>()
    };
    let per_point = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(ScanOutput {
        evaluated: points.len(),
        skipped,
        records: per_point.into_iter().flatten().collect(),
    })
}

pub fn scan_all(runs: &[ScanConfig], jobs: Option<usize>) -> Result<ScanOutput> {
    let mut out = ScanOutput::default();
    for run in runs {
        out.extend(scan(run, jobs)?);
    }
    Ok(out)
}
