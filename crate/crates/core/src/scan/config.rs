//! Scan configuration files.
//!
//! A file holds one or more runs, each a TOML table:
//!
//! ```toml
//! [spin-surface]
//! state = "pure"                     # or "mixed"
//! theta = 1.7
//! phi = "pi/2"
//! tau = { from = "pi/360", to = "359pi/360", points = 359 }
//! eta = { from = 0.9, to = 1.0, step = 0.001 }
//! bias = "zero"                      # "eta-minus-one" or a number
//! families = ["elgi"]
//! ```
//!
//! Angles are numbers or expressions such as `"pi/3"`, `"5pi/6"` or `"-0.5*pi"`.
//! Grids are a single value, a list, or a `{ from, to, points | step }` range.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};
use toml::Spanned;

use crate::inequalities::Family;
use crate::jointmeas::BiasLaw;
use crate::nsit::NSIT_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}, field '{}': {}", self.field, self.message),
            None => write!(f, "config error in field '{}': {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    /// `cosθ|0⟩ + e^{iφ} sinθ|1⟩` over the θ and φ grids.
    Pure,
    /// `𝕀/2`; θ and φ are reported as NaN.
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecSelection {
    /// One record per family: the largest member and its index.
    Max,
    /// One record per member of each family.
    All,
    /// Only the member with this index.
    Only(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub name: String,
    pub state: StateKind,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub tau: Vec<f64>,
    pub eta: Vec<f64>,
    pub bias: BiasLaw,
    pub axis_alpha: f64,
    pub axis_beta: f64,
    pub families: Vec<Family>,
    pub specs: SpecSelection,
    /// Disturbances at or below this count as zero.
    pub tolerance: f64,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_ANGLE_STEP: f64 = PI / 60.0;
pub const DEFAULT_TAU_STEP: f64 = PI / 360.0;

pub fn default_theta_grid() -> Vec<f64> {
    (0..=60).map(|k| k as f64 * DEFAULT_ANGLE_STEP).collect()
}

pub fn default_phi_grid() -> Vec<f64> {
    (0..120).map(|k| k as f64 * DEFAULT_ANGLE_STEP).collect()
}

pub fn default_tau_grid() -> Vec<f64> {
    (0..=360).map(|k| k as f64 * DEFAULT_TAU_STEP).collect()
}

impl ScanConfig {
    /// A run with default grids, `x = 0`, rotation about x̂ and all families.
    pub fn new(name: impl Into<String>, eta: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            state: StateKind::Pure,
            theta: default_theta_grid(),
            phi: default_phi_grid(),
            tau: default_tau_grid(),
            eta,
            bias: BiasLaw::Zero,
            axis_alpha: 0.0,
            axis_beta: PI / 2.0,
            families: Family::ALL.to_vec(),
            specs: SpecSelection::Max,
            tolerance: NSIT_TOL,
            out: None,
        }
    }

    /// Number of grid points before bias filtering.
    pub fn point_count(&self) -> usize {
        let (t, p) = match self.state {
            StateKind::Pure => (self.theta.len(), self.phi.len()),
            StateKind::Mixed => (1, 1),
        };
        t * p * self.tau.len() * self.eta.len()
    }
}

/// Parses `1.2`, `pi`, `-pi/4`, `5pi/6`, `0.25*pi`, `2*pi/3`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let s: String = text
        .trim()
        .to_ascii_lowercase()
        .replace('π', "pi")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let Some((pre, post)) = s.split_once("pi") else {
        return s.parse().ok().filter(|v: &f64| v.is_finite());
    };
    let pre = pre.strip_suffix('*').unwrap_or(pre);
    let coef = match pre {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let div = match post {
        "" => 1.0,
        d => d.strip_prefix('/')?.parse::<f64>().ok().filter(|&d| d != 0.0)?,
    };
    Some(coef * PI / div).filter(|v| v.is_finite())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAngle {
    Num(f64),
    Expr(String),
}

impl RawAngle {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            RawAngle::Num(v) => Ok(*v),
            RawAngle::Expr(s) => parse_angle(s).ok_or_else(|| format!("cannot read '{s}' as a number or angle")),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    from: RawAngle,
    to: RawAngle,
    points: Option<i64>,
    step: Option<RawAngle>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGrid {
    Single(RawAngle),
    List(Vec<RawAngle>),
    Range(RawRange),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawBias {
    Num(f64),
    Name(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSpecs {
    Index(usize),
    Name(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    state: Option<Spanned<String>>,
    theta: Option<Spanned<RawGrid>>,
    phi: Option<Spanned<RawGrid>>,
    tau: Option<Spanned<RawGrid>>,
    eta: Option<Spanned<RawGrid>>,
    bias: Option<Spanned<RawBias>>,
    axis_alpha: Option<Spanned<RawAngle>>,
    axis_beta: Option<Spanned<RawAngle>>,
    families: Option<Spanned<Vec<String>>>,
    specs: Option<Spanned<RawSpecs>>,
    tolerance: Option<Spanned<f64>>,
    out: Option<Spanned<String>>,
}

/// Runs in file order.
struct RawFile(Vec<(Spanned<String>, RawRun)>);

impl<'de> Deserialize<'de> for RawFile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawFile;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("one table per run")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<RawFile, A::Error> {
                let mut runs = Vec::new();
                while let Some(key) = map.next_key::<Spanned<String>>()? {
                    let run = map.next_value::<RawRun>()?;
                    runs.push((key, run));
                }
                Ok(RawFile(runs))
            }
        }
        d.deserialize_map(V)
    }
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    /// Best guess at the `section.key` an error offset falls in.
    fn field_at(&self, offset: usize) -> String {
        let offset = offset.min(self.text.len());
        let line_start = self.text[..offset].rfind('\n').map_or(0, |i| i + 1);
        let line_end = self.text[offset..].find('\n').map_or(self.text.len(), |i| offset + i);
        let line = self.text[line_start..line_end].trim();
        let section = self.text[..line_start]
            .lines()
            .rev()
            .map(str::trim)
            .find(|l| l.starts_with('[') && l.ends_with(']'))
            .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
        if line.starts_with('[') {
            return line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        let key = line.split_once('=').map(|(k, _)| k.trim().to_string());
        match (section, key) {
            (Some(s), Some(k)) => format!("{s}.{k}"),
            (None, Some(k)) => k,
            (Some(s), None) => s,
            (None, None) => String::new(),
        }
    }

    fn error(&self, span: Option<Range<usize>>, field: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: span.map(|s| self.line_of(s.start)),
            field: field.into(),
            message: message.into(),
        }
    }
}

pub fn parse_config(text: &str) -> std::result::Result<Vec<ScanConfig>, ConfigError> {
    let src = Source { text };
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let span = e.span();
        let field = span.clone().map(|s| src.field_at(s.start)).unwrap_or_default();
        src.error(span, field, e.message().trim().to_string())
    })?;
    if raw.0.is_empty() {
        return Err(src.error(None, "", "no runs defined; add a [section] per run"));
    }
    raw.0
        .into_iter()
        .map(|(name, run)| resolve(&src, name.get_ref().clone(), name.span(), run))
        .collect()
}

pub fn load_config(path: &Path) -> crate::Result<Vec<ScanConfig>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_config(&text)?)
}

fn grid_values(raw: &RawGrid) -> std::result::Result<Vec<f64>, String> {
    match raw {
        RawGrid::Single(a) => Ok(vec![a.value()?]),
        RawGrid::List(items) => {
            if items.is_empty() {
                return Err("grid must have at least one point".into());
            }
            items.iter().map(RawAngle::value).collect()
        }
        RawGrid::Range(r) => {
            let from = r.from.value()?;
            let to = r.to.value()?;
            let points = match (r.points, &r.step) {
                (Some(_), Some(_)) => return Err("give either points or step, not both".into()),
                (None, None) => return Err("range needs points or step".into()),
                (Some(n), None) if n < 1 => return Err(format!("points must be at least 1, got {n}")),
                (Some(n), None) => n as usize,
                (None, Some(step)) => {
                    let step = step.value()?;
                    if step <= 0.0 || to < from {
                        return Err("step ranges need step > 0 and to >= from".into());
                    }
                    ((to - from) / step + 1e-9).floor() as usize + 1
                }
            };
            if points == 1 {
                return Ok(vec![from]);
            }
            let h = (to - from) / (points - 1) as f64;
            Ok((0..points).map(|k| from + k as f64 * h).collect())
        }
    }
}

fn resolve(src: &Source, name: String, name_span: Range<usize>, raw: RawRun) -> std::result::Result<ScanConfig, ConfigError> {
    let key = |k: &str| format!("{name}.{k}");
    let fail = |span: Range<usize>, k: &str, msg: String| src.error(Some(span), key(k), msg);

    let grid = |g: &Option<Spanned<RawGrid>>, k: &str| -> std::result::Result<Option<Vec<f64>>, ConfigError> {
        g.as_ref()
            .map(|g| grid_values(g.get_ref()).map_err(|m| fail(g.span(), k, m)))
            .transpose()
    };
    let angle = |a: &Option<Spanned<RawAngle>>, k: &str, default: f64| -> std::result::Result<f64, ConfigError> {
        a.as_ref()
            .map_or(Ok(default), |a| a.get_ref().value().map_err(|m| fail(a.span(), k, m)))
    };

    let mut cfg = ScanConfig::new(name.clone(), Vec::new());

    if let Some(s) = &raw.state {
        cfg.state = match s.get_ref().as_str() {
            "pure" => StateKind::Pure,
            "mixed" | "maximally-mixed" => StateKind::Mixed,
            other => return Err(fail(s.span(), "state", format!("unknown state '{other}' (expected pure or mixed)"))),
        };
    }
    match cfg.state {
        StateKind::Pure => {
            if let Some(t) = grid(&raw.theta, "theta")? {
                cfg.theta = t;
            }
            if let Some(p) = grid(&raw.phi, "phi")? {
                cfg.phi = p;
            }
        }
        StateKind::Mixed => {
            for (g, k) in [(&raw.theta, "theta"), (&raw.phi, "phi")] {
                if let Some(g) = g {
                    return Err(fail(g.span(), k, "a mixed state takes no angles".into()));
                }
            }
            cfg.theta = vec![f64::NAN];
            cfg.phi = vec![f64::NAN];
        }
    }
    if let Some(t) = grid(&raw.tau, "tau")? {
        cfg.tau = t;
    }
    cfg.eta = match (&raw.eta, grid(&raw.eta, "eta")?) {
        (Some(span), Some(eta)) => {
            if let Some(bad) = eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
                return Err(fail(span.span(), "eta", format!("eta must lie in [0, 1], got {bad}")));
            }
            eta
        }
        _ => return Err(fail(name_span, "eta", "missing eta grid".into())),
    };

    if let Some(b) = &raw.bias {
        cfg.bias = match b.get_ref() {
            RawBias::Num(x) if x.is_finite() && x.abs() <= 1.0 => BiasLaw::Fixed(*x),
            RawBias::Num(x) => return Err(fail(b.span(), "bias", format!("bias must lie in [-1, 1], got {x}"))),
            RawBias::Name(s) => match s.as_str() {
                "zero" => BiasLaw::Zero,
                "eta-minus-one" => BiasLaw::EtaMinusOne,
                other => {
                    return Err(fail(
                        b.span(),
                        "bias",
                        format!("unknown bias '{other}' (expected zero, eta-minus-one or a number)"),
                    ))
                }
            },
        };
    }
    cfg.axis_alpha = angle(&raw.axis_alpha, "axis_alpha", cfg.axis_alpha)?;
    cfg.axis_beta = angle(&raw.axis_beta, "axis_beta", cfg.axis_beta)?;

    if let Some(f) = &raw.families {
        if f.get_ref().is_empty() {
            return Err(fail(f.span(), "families", "list at least one family".into()));
        }
        cfg.families = f
            .get_ref()
            .iter()
            .map(|s| s.parse::<Family>().map_err(|m| fail(f.span(), "families", m)))
            .collect::<std::result::Result<_, _>>()?;
    }
    if let Some(s) = &raw.specs {
        cfg.specs = match s.get_ref() {
            RawSpecs::Name(n) if n == "max" => SpecSelection::Max,
            RawSpecs::Name(n) if n == "all" => SpecSelection::All,
            RawSpecs::Name(other) => {
                return Err(fail(s.span(), "specs", format!("unknown selection '{other}' (expected max, all or an index)")))
            }
            RawSpecs::Index(i) => {
                if let Some(f) = cfg.families.iter().find(|f| *i >= f.spec_count()) {
                    return Err(fail(s.span(), "specs", format!("{f} has {} members, index {i} is out of range", f.spec_count())));
                }
                SpecSelection::Only(*i)
            }
        };
    }
    if let Some(t) = &raw.tolerance {
        let t = *t.get_ref();
        if !(t.is_finite() && t >= 0.0) {
            return Err(fail(raw.tolerance.as_ref().unwrap().span(), "tolerance", format!("tolerance must be >= 0, got {t}")));
        }
        cfg.tolerance = t;
    }
    cfg.out = raw.out.map(|o| PathBuf::from(o.into_inner()));
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn angles() {
        assert_abs_diff_eq!(parse_angle("pi/3").unwrap(), PI / 3.0);
        assert_abs_diff_eq!(parse_angle("5pi/6").unwrap(), 5.0 * PI / 6.0);
        assert_abs_diff_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_abs_diff_eq!(parse_angle("0.25 * pi").unwrap(), PI / 4.0);
        assert_abs_diff_eq!(parse_angle("π").unwrap(), PI);
        assert_eq!(parse_angle("1.7"), Some(1.7));
        assert_eq!(parse_angle("pi/0"), None);
        assert_eq!(parse_angle("two"), None);
        assert_eq!(parse_angle("pi*2"), None);
    }

    #[test]
    fn full_run() {
        let text = r#"
[first]
theta = 1.7
phi = "pi/2"
tau = { from = 0, to = "pi", points = 5 }
eta = { from = 0.9, to = 1.0, step = 0.05 }
bias = "eta-minus-one"
families = ["elgi", "slgi"]
specs = "all"

[second]
state = "mixed"
tau = ["pi/4", 1.0]
eta = 1
bias = 0.0
axis_alpha = "pi/4"
axis_beta = "pi/4"
tolerance = 1e-6
"#;
        let runs = parse_config(text).unwrap();
        assert_eq!(runs.len(), 2);
        let a = &runs[0];
        assert_eq!(a.name, "first");
        assert_eq!(a.theta, vec![1.7]);
        assert_eq!(a.tau.len(), 5);
        assert_abs_diff_eq!(a.tau[4], PI);
        assert_eq!(a.eta.len(), 3);
        assert_eq!(a.bias, BiasLaw::EtaMinusOne);
        assert_eq!(a.families, vec![Family::Elgi, Family::Slgi]);
        assert_eq!(a.specs, SpecSelection::All);
        let b = &runs[1];
        assert_eq!(b.state, StateKind::Mixed);
        assert!(b.theta[0].is_nan());
        assert_eq!(b.eta, vec![1.0]);
        assert_eq!(b.bias, BiasLaw::Fixed(0.0));
        assert_eq!(b.tolerance, 1e-6);
        assert_eq!(b.point_count(), 2);
    }

    #[test]
    fn defaults() {
        let runs = parse_config("[r]\neta = 0.5\n").unwrap();
        let r = &runs[0];
        assert_eq!(r.theta.len(), 61);
        assert_eq!(r.phi.len(), 120);
        assert_eq!(r.tau.len(), 361);
        assert_eq!(r.bias, BiasLaw::Zero);
        assert_eq!(r.families, Family::ALL.to_vec());
        assert_abs_diff_eq!(r.axis_beta, PI / 2.0);
    }

    #[test]
    fn unknown_key_reports_line_and_field() {
        let err = parse_config("[r]\neta = 0.5\nsharpness = 1\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert_eq!(err.field, "r.sharpness");
        assert!(err.message.contains("sharpness"), "{}", err.message);
    }

    #[test]
    fn semantic_errors_report_line() {
        let err = parse_config("[r]\ntau = 0.1\neta = { from = 0.5, to = 1.5, points = 3 }\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert_eq!(err.field, "r.eta");

        let err = parse_config("[r]\neta = 0.5\nbias = \"huge\"\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (Some(3), "r.bias"));

        let err = parse_config("[r]\nstate = \"mixed\"\ntheta = 1\neta = 1\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (Some(3), "r.theta"));

        let err = parse_config("[r]\neta = { from = 0, to = 1 }\n").unwrap_err();
        assert_eq!(err.field, "r.eta");

        let err = parse_config("[r]\ntau = 0.3\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (Some(1), "r.eta"));

        let err = parse_config("[r]\neta = 0.5\nfamilies = [\"chsh\"]\n").unwrap_err();
        assert_eq!(err.field, "r.families");

        let err = parse_config("[r]\neta = 0.5\nspecs = 4\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (Some(3), "r.specs"));
    }

    #[test]
    fn single_member_selection() {
        let runs = parse_config("[r]\neta = 0.5\nfamilies = [\"wlgi\"]\nspecs = 18\n").unwrap();
        assert_eq!(runs[0].specs, SpecSelection::Only(18));
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_config("[r]\neta = = 0.5\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(parse_config("").is_err());
        assert!(parse_config("eta = 0.5").is_err());
    }
}
