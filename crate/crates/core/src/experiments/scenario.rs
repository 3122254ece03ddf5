//! Scenario files: one `key = value` per line, `#` starts a comment, lists
//! are comma-separated. Numeric values may be small arithmetic expressions
//! over `pi`, e.g. `pi/2 - 1e-3` or `pi/30`.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}: {message}", location(*.line, .key))]
pub struct ScenarioError {
    /// 1-based line number; 0 when the problem is not tied to one line.
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

fn location(line: usize, key: &Option<String>) -> String {
    match (line, key) {
        (0, Some(k)) => format!("field `{k}`"),
        (0, None) => "scenario".to_string(),
        (l, Some(k)) => format!("line {l}, field `{k}`"),
        (l, None) => format!("line {l}"),
    }
}

impl ScenarioError {
    fn at(line: usize, key: &str, message: impl Into<String>) -> Self {
        ScenarioError {
            line,
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    fn field(key: &str, message: impl Into<String>) -> Self {
        Self::at(0, key, message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    Fields,
    Levels,
    Populations,
    TruncationScan,
    Validate,
}

impl Output {
    pub fn as_str(self) -> &'static str {
        match self {
            Output::Fields => "fields",
            Output::Levels => "levels",
            Output::Populations => "populations",
            Output::TruncationScan => "truncation_scan",
            Output::Validate => "validate",
        }
    }
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fields" => Ok(Output::Fields),
            "levels" => Ok(Output::Levels),
            "populations" => Ok(Output::Populations),
            "truncation_scan" | "truncation" => Ok(Output::TruncationScan),
            "validate" => Ok(Output::Validate),
            other => Err(format!("unknown output `{other}`")),
        }
    }
}

/// Truncation of the sweep, given either way round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    /// Field-vector deviation from the z axis at the cutoff instants.
    Delta0(f64),
    /// Maximal phase angle `γτ_c`.
    GammaTauC(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub two_j: u32,
    pub gamma_over_eta1: f64,
    pub eta1: f64,
    pub window: Option<WindowSpec>,
    /// `2m` of the initial diabatic state; defaults to `2j`.
    pub initial_m: i32,
    pub samples: usize,
    pub tol: f64,
    pub outputs: Vec<Output>,
    /// Extra sweep ratios drawn alongside `gamma_over_eta1` in the fields plot.
    pub reference_gamma_over_eta1: Vec<f64>,
    pub scan_gamma_over_eta1: Vec<f64>,
    pub scan_delta0_max: f64,
    pub scan_points: usize,
    pub validate_two_j: Vec<u32>,
    /// Added to the matched `η₂` (in units of `η₁`) for negative controls.
    pub eta2_perturbation: f64,
}

pub const DEFAULT_SAMPLES: usize = 400;

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "scenario".to_string(),
            two_j: 1,
            gamma_over_eta1: 0.8,
            eta1: 1.0,
            window: None,
            initial_m: 1,
            samples: DEFAULT_SAMPLES,
            tol: crate::oracle::DEFAULT_TOL,
            outputs: Vec::new(),
            reference_gamma_over_eta1: vec![0.01],
            scan_gamma_over_eta1: vec![0.5, 0.8, 0.9, 0.99],
            scan_delta0_max: PI / 12.0,
            scan_points: 200,
            validate_two_j: vec![1, 2, 3],
            eta2_perturbation: 0.0,
        }
    }
}

const KEYS: &[&str] = &[
    "name",
    "two_j",
    "gamma_over_eta1",
    "eta1",
    "delta0",
    "gamma_tau_c",
    "initial_m",
    "samples",
    "tol",
    "outputs",
    "reference_gamma_over_eta1",
    "scan_gamma_over_eta1",
    "scan_delta0_max",
    "scan_points",
    "validate_two_j",
    "eta2_perturbation",
];

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError {
            line: 0,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        text.parse()
    }

    pub fn require_window(&self) -> Result<WindowSpec, ScenarioError> {
        self.window.ok_or_else(|| ScenarioError {
            line: 0,
            key: None,
            message: "exactly one of `delta0` / `gamma_tau_c` is required for this output".to_string(),
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let ratio_ok = |r: f64| r > 0.0 && r < 1.0;
        if !ratio_ok(self.gamma_over_eta1) {
            return Err(ScenarioError::field("gamma_over_eta1", "must lie strictly in (0, 1)"));
        }
        if !(self.eta1 > 0.0 && self.eta1.is_finite()) {
            return Err(ScenarioError::field("eta1", "must be positive"));
        }
        if self.samples < 2 {
            return Err(ScenarioError::field("samples", "must be at least 2"));
        }
        if !(self.tol >= crate::oracle::MIN_TOL && self.tol <= crate::oracle::MAX_TOL) {
            return Err(ScenarioError::field("tol", "must lie in [1e-13, 1e-6]"));
        }
        let two_j = self.two_j as i32;
        if self.initial_m.abs() > two_j || (two_j - self.initial_m) % 2 != 0 {
            return Err(ScenarioError::field(
                "initial_m",
                format!("2m = {} is not a level of 2j = {}", self.initial_m, self.two_j),
            ));
        }
        match self.window {
            Some(WindowSpec::Delta0(d)) if !(d > 0.0 && d < PI / 2.0) => {
                return Err(ScenarioError::field("delta0", "must lie strictly in (0, pi/2)"));
            }
            Some(WindowSpec::GammaTauC(g)) if !(g > 0.0 && g < PI / 2.0) => {
                return Err(ScenarioError::field("gamma_tau_c", "must lie strictly in (0, pi/2)"));
            }
            _ => {}
        }
        if let Some(r) = self.reference_gamma_over_eta1.iter().find(|r| !ratio_ok(**r)) {
            return Err(ScenarioError::field(
                "reference_gamma_over_eta1",
                format!("{r} not in (0, 1)"),
            ));
        }
        if let Some(r) = self.scan_gamma_over_eta1.iter().find(|r| !ratio_ok(**r)) {
            return Err(ScenarioError::field(
                "scan_gamma_over_eta1",
                format!("{r} not in (0, 1)"),
            ));
        }
        if !(self.scan_delta0_max > 0.0 && self.scan_delta0_max < PI / 2.0) {
            return Err(ScenarioError::field(
                "scan_delta0_max",
                "must lie strictly in (0, pi/2)",
            ));
        }
        if self.scan_points < 2 {
            return Err(ScenarioError::field("scan_points", "must be at least 2"));
        }
        if !self.eta2_perturbation.is_finite() {
            return Err(ScenarioError::field("eta2_perturbation", "must be finite"));
        }
        Ok(())
    }
}

impl FromStr for Scenario {
    type Err = ScenarioError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut sc = Scenario::default();
        let mut seen = HashSet::new();
        let mut initial_m_given = false;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ScenarioError {
                line: line_no,
                key: None,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ScenarioError::at(line_no, key, "unknown key"));
            }
            if !seen.insert(key.to_string()) {
                return Err(ScenarioError::at(line_no, key, "duplicate key"));
            }
            let err = |m: String| ScenarioError::at(line_no, key, m);
            match key {
                "name" => {
                    if value.is_empty() || value.contains([',', '\n']) {
                        return Err(err("must be non-empty and contain no commas".into()));
                    }
                    sc.name = value.to_string();
                }
                "two_j" => sc.two_j = parse_int(value).map_err(err)?,
                "gamma_over_eta1" => sc.gamma_over_eta1 = eval(value).map_err(err)?,
                "eta1" => sc.eta1 = eval(value).map_err(err)?,
                "delta0" | "gamma_tau_c" => {
                    if sc.window.is_some() {
                        return Err(err("give exactly one of `delta0` / `gamma_tau_c`".into()));
                    }
                    let v = eval(value).map_err(err)?;
                    sc.window = Some(if key == "delta0" {
                        WindowSpec::Delta0(v)
                    } else {
                        WindowSpec::GammaTauC(v)
                    });
                }
                "initial_m" => {
                    sc.initial_m = parse_int(value).map_err(err)?;
                    initial_m_given = true;
                }
                "samples" => sc.samples = parse_int(value).map_err(err)?,
                "tol" => sc.tol = eval(value).map_err(err)?,
                "outputs" => sc.outputs = parse_list(value, |s| s.parse::<Output>()).map_err(err)?,
                "reference_gamma_over_eta1" => sc.reference_gamma_over_eta1 = parse_list(value, eval).map_err(err)?,
                "scan_gamma_over_eta1" => sc.scan_gamma_over_eta1 = parse_list(value, eval).map_err(err)?,
                "scan_delta0_max" => sc.scan_delta0_max = eval(value).map_err(err)?,
                "scan_points" => sc.scan_points = parse_int(value).map_err(err)?,
                "validate_two_j" => sc.validate_two_j = parse_list(value, parse_int).map_err(err)?,
                "eta2_perturbation" => sc.eta2_perturbation = eval(value).map_err(err)?,
                _ => unreachable!("key list checked above"),
            }
        }
        if !initial_m_given {
            sc.initial_m = sc.two_j as i32;
        }
        sc.validate()?;
        Ok(sc)
    }
}

impl fmt::Display for Scenario {
    /// One-line parameter record written into every CSV comment.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scenario={} two_j={} gamma_over_eta1={} eta1={}",
            self.name, self.two_j, self.gamma_over_eta1, self.eta1
        )?;
        match self.window {
            Some(WindowSpec::Delta0(d)) => write!(f, " delta0={d}")?,
            Some(WindowSpec::GammaTauC(g)) => write!(f, " gamma_tau_c={g}")?,
            None => {}
        }
        write!(
            f,
            " initial_m={} samples={} tol={:e}",
            self.initial_m, self.samples, self.tol
        )?;
        if self.eta2_perturbation != 0.0 {
            write!(f, " eta2_perturbation={}", self.eta2_perturbation)?;
        }
        Ok(())
    }
}

fn parse_int<I: FromStr>(s: &str) -> Result<I, String> {
    s.parse::<I>().map_err(|_| format!("expected an integer, found `{s}`"))
}

fn parse_list<V, F>(s: &str, item: F) -> Result<Vec<V>, String>
where
    F: Fn(&str) -> Result<V, String>,
{
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| item(p.trim())).collect()
}

/// Evaluates `+ - * /`, parentheses, unary minus, numbers and `pi`.
pub fn eval(s: &str) -> Result<f64, String> {
    let mut p = ExprParser {
        src: s.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(format!("unexpected input in `{s}` at column {}", p.pos + 1));
    }
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            v = if op == b'+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.factor()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            v = if op == b'*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn factor(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err("missing `)`".to_string());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'p') if self.src[self.pos..].starts_with(b"pi") => {
                self.pos += 2;
                Ok(PI)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) => Err(format!("unexpected `{}`", c as char)),
            None => Err("unexpected end of value".to_string()),
        }
    }

    fn number(&mut self) -> Result<f64, String> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && (p.src[p.pos].is_ascii_digit() || p.src[p.pos] == b'.') {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            digits(self);
        }
        let tok = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        tok.parse::<f64>().map_err(|_| format!("bad number `{tok}`"))
    }
}
