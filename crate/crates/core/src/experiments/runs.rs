use std::f64::consts::FRAC_PI_3;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::csv::{format_value, write_file};
use super::scenario::{Scenario, WindowSpec};
use super::{Dataset, ExperimentError, ARTIFACT_VERSION};
use crate::counterdiabatic::{two_level_cd_transfer, CdDrive, CdProtocol};
use crate::oracle::integrate_columns;
use crate::protocol::{
    infidelity_bound, two_level_truncated_transfer, TangentDrive, TangentProtocol, TruncationWindow,
};
use crate::su2::{m_label, Spin};

type Drive = TangentDrive<f64>;
type Window = TruncationWindow<f64>;

/// Window used by `run_validate` when the scenario does not set one.
const DEFAULT_VALIDATION_GAMMA_TAU_C: f64 = FRAC_PI_3;

const ORACLE_FIDELITY_DEFICIT: f64 = 1e-8;
const ORACLE_NORM_DRIFT: f64 = 1e-9;
const MATRIX_AGREEMENT: f64 = 1e-12;

/// `samples` points uniform on `[−τ_c, τ_c]`, plus `t = 0` when the grid
/// would otherwise skip it (even `samples`).
pub fn time_grid(tau_c: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    let step = 2.0 * tau_c / (n - 1) as f64;
    let mut ts: Vec<f64> = (0..n)
        .map(|k| if k == n - 1 { tau_c } else { -tau_c + step * k as f64 })
        .collect();
    if n % 2 == 1 {
        ts[n / 2] = 0.0;
    } else {
        ts.insert(n / 2, 0.0);
    }
    ts
}

fn drive_for(sc: &Scenario, ratio: f64) -> Result<Drive, ExperimentError> {
    let ctx = || format!("drive with gamma_over_eta1 = {ratio}");
    let matched = TangentDrive::from_ratio(sc.eta1, ratio).map_err(ExperimentError::numerical(ctx()))?;
    if sc.eta2_perturbation == 0.0 {
        return Ok(matched);
    }
    let eta2 = matched.eta2() + sc.eta2_perturbation * sc.eta1;
    TangentDrive::unmatched(sc.eta1, eta2, matched.gamma()).map_err(ExperimentError::numerical(ctx()))
}

fn window_for(drive: &Drive, spec: WindowSpec) -> Result<Window, ExperimentError> {
    let (w, ctx) = match spec {
        WindowSpec::Delta0(d) => (TruncationWindow::from_delta0(drive, d), format!("window delta0 = {d}")),
        WindowSpec::GammaTauC(g) => (
            TruncationWindow::from_gamma_tau_c(drive, g),
            format!("window gamma_tau_c = {g}"),
        ),
    };
    w.map_err(ExperimentError::numerical(ctx))
}

fn describe(w: &Window) -> String {
    format!(
        "window tau_c = {}, delta = {}, delta0 = {}",
        w.tau_c(),
        w.delta(),
        w.delta0()
    )
}

/// `Ω_z/η₁` over the truncated window for the scenario ratio and each
/// reference ratio, in long format.
pub fn run_fields(sc: &Scenario) -> Result<Dataset, ExperimentError> {
    let spec = sc.require_window()?;
    let mut ratios = vec![sc.gamma_over_eta1];
    for &r in &sc.reference_gamma_over_eta1 {
        if !ratios.contains(&r) {
            ratios.push(r);
        }
    }
    let columns = ["gamma_over_eta1", "t_eta1", "gamma_t", "omega_z_over_eta1"];
    let mut out = Dataset::new("fields", sc.to_string(), columns.map(String::from).to_vec());
    for ratio in ratios {
        let drive = drive_for(sc, ratio)?;
        let w = window_for(&drive, spec)?;
        for t in time_grid(w.tau_c(), sc.samples) {
            let [_, _, oz] = drive.field_at(t).map_err(ExperimentError::numerical(describe(&w)))?;
            out.push(vec![ratio, t * drive.eta1(), drive.gamma() * t, oz / drive.eta1()]);
        }
    }
    Ok(out)
}

/// Diabatic levels, the `∓mη₁ sec γt` reference curves and the
/// instantaneous spectrum, all in units of `η₁`.
pub fn run_levels(sc: &Scenario) -> Result<Dataset, ExperimentError> {
    let drive = drive_for(sc, sc.gamma_over_eta1)?;
    let w = window_for(&drive, sc.require_window()?)?;
    let spin = Spin::new(sc.two_j);
    let proto = TangentProtocol::new(drive, spin);

    let mut columns = vec!["t_eta1".to_string()];
    for kind in ["E_diabatic_", "E_adiabatic_reference_", "E_instantaneous_"] {
        columns.extend(spin.two_ms().map(|m| format!("{kind}{}", m_label(m))));
    }
    let mut out = Dataset::new("levels", sc.to_string(), columns);
    let e1 = drive.eta1();
    let numerical = || ExperimentError::numerical(describe(&w));
    for t in time_grid(w.tau_c(), sc.samples) {
        let mut row = vec![t * e1];
        for m in spin.two_ms() {
            row.push(proto.diabatic_energy(m, t).map_err(numerical())? / e1);
        }
        for m in spin.two_ms() {
            row.push(proto.adiabatic_reference_energy(m, t).map_err(numerical())? / e1);
        }
        row.extend(
            proto
                .instantaneous_eigenvalues(t)
                .map_err(numerical())?
                .iter()
                .map(|e| e / e1),
        );
        out.push(row);
    }
    Ok(out)
}

/// Level populations along the diabatic solution that starts in
/// `initial_m` at `t = −τ_c`.
pub fn run_populations(sc: &Scenario) -> Result<Dataset, ExperimentError> {
    let drive = drive_for(sc, sc.gamma_over_eta1)?;
    let w = window_for(&drive, sc.require_window()?)?;
    let spin = Spin::new(sc.two_j);
    let proto = TangentProtocol::new(drive, spin);

    let mut columns = vec!["t_eta1".to_string()];
    columns.extend(spin.two_ms().map(|m| format!("p_{}", m_label(m))));
    let mut out = Dataset::new("populations", sc.to_string(), columns);
    for t in time_grid(w.tau_c(), sc.samples) {
        let psi = proto
            .diabatic_state(sc.initial_m, -w.tau_c(), t)
            .map_err(ExperimentError::numerical(describe(&w)))?;
        let mut row = vec![t * drive.eta1()];
        row.extend(psi.populations());
        out.push(row);
    }
    Ok(out)
}

/// Transfer probability `P(−j ← j)` of the truncated tangent and
/// counter-diabatic pulses over a `(γ/η₁, δ₀)` grid.
pub fn run_truncation_scan(sc: &Scenario) -> Result<Dataset, ExperimentError> {
    let spin = Spin::new(sc.two_j);
    let top = sc.two_j as i32;
    let n = sc.scan_points;
    let delta0s: Vec<f64> = (0..n).map(|k| sc.scan_delta0_max * k as f64 / (n - 1) as f64).collect();
    let points: Vec<(f64, f64)> = sc
        .scan_gamma_over_eta1
        .iter()
        .flat_map(|&r| delta0s.iter().map(move |&d| (r, d)))
        .collect();

    let rows: Vec<Result<Vec<f64>, ExperimentError>> = points
        .par_iter()
        .map(|&(ratio, delta0)| {
            if delta0 == 0.0 {
                // Untruncated sweep: complete transfer for both protocols.
                return Ok(vec![delta0, ratio, 0.0, 1.0, 1.0, 0.0, 0.0]);
            }
            let drive = drive_for(sc, ratio)?;
            let w = window_for(&drive, WindowSpec::Delta0(delta0))?;
            let numerical = || ExperimentError::numerical(describe(&w));
            let p_tan = TangentProtocol::new(drive, spin)
                .truncated_transition_matrix(&w)
                .and_then(|p| p.get(-top, top))
                .map_err(numerical())?;
            let p_cd = CdProtocol::new(CdDrive::new(drive), spin)
                .truncated_transition(&w)
                .and_then(|p| p.get(-top, top))
                .map_err(numerical())?;
            Ok(vec![
                delta0,
                ratio,
                w.delta(),
                p_tan,
                p_cd,
                infidelity_bound(w.delta()),
                infidelity_bound(w.delta0()),
            ])
        })
        .collect();

    let columns = [
        "delta0",
        "gamma_over_eta1",
        "delta",
        "P_tangent",
        "P_cd",
        "bound_tangent",
        "bound_cd",
    ];
    let mut out = Dataset::new("truncation_scan", sc.to_string(), columns.map(String::from).to_vec());
    for row in rows {
        out.push(row?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Pass,
    Fail,
    /// The check could not be evaluated (e.g. the integrator gave up).
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub check: String,
    pub two_j: u32,
    pub measured: f64,
    pub threshold: f64,
    pub outcome: CheckOutcome,
}

impl CheckRecord {
    fn measured(check: &str, two_j: u32, measured: f64, threshold: f64) -> Self {
        let outcome = if measured <= threshold {
            CheckOutcome::Pass
        } else {
            CheckOutcome::Fail
        };
        CheckRecord {
            check: check.to_string(),
            two_j,
            measured,
            threshold,
            outcome,
        }
    }

    fn errored(check: &str, two_j: u32, threshold: f64, message: String) -> Self {
        CheckRecord {
            check: check.to_string(),
            two_j,
            measured: f64::NAN,
            threshold,
            outcome: CheckOutcome::Error(message),
        }
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            CheckOutcome::Pass => "pass",
            CheckOutcome::Fail => "fail",
            CheckOutcome::Error(_) => "error",
        }
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<5} {} 2j={} measured={:.3e} threshold={:.1e}",
            self.status().to_uppercase(),
            self.check,
            self.two_j,
            self.measured,
            self.threshold
        )?;
        if let CheckOutcome::Error(msg) = &self.outcome {
            write!(f, " ({msg})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub comment: String,
    pub checks: Vec<CheckRecord>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome == CheckOutcome::Pass)
    }

    /// 0 when every check passed, 3 when any check could not be evaluated,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else if self.checks.iter().any(|c| matches!(c.outcome, CheckOutcome::Error(_))) {
            3
        } else {
            1
        }
    }

    pub fn find(&self, check: &str, two_j: u32) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == check && c.two_j == two_j)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# {ARTIFACT_VERSION} {}\ncheck,two_j,measured,threshold,status,detail\n",
            self.comment
        );
        for c in &self.checks {
            let detail = match &c.outcome {
                CheckOutcome::Error(m) => m.replace([',', '\n'], ";"),
                _ => String::new(),
            };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.check,
                c.two_j,
                format_value(c.measured),
                format_value(c.threshold),
                c.status(),
                detail
            ));
        }
        s
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, ExperimentError> {
        write_file(dir, "validate.csv", &self.to_csv())
    }
}

/// Analytic-versus-integrator checks for every `2j` in
/// `validate_two_j`, on the scenario drive and window (default
/// `γτ_c = π/3`). Integrator failures become `error` records naming the
/// window instead of aborting the suite.
pub fn run_validate(sc: &Scenario) -> Result<ValidationReport, ExperimentError> {
    let drive = drive_for(sc, sc.gamma_over_eta1)?;
    let spec = sc
        .window
        .unwrap_or(WindowSpec::GammaTauC(DEFAULT_VALIDATION_GAMMA_TAU_C));
    let w = window_for(&drive, spec)?;
    let per_j: Vec<Result<Vec<CheckRecord>, ExperimentError>> = sc
        .validate_two_j
        .par_iter()
        .map(|&two_j| validate_spin(&drive, &w, Spin::new(two_j), sc.tol))
        .collect();
    let mut checks = Vec::new();
    for records in per_j {
        checks.extend(records?);
    }
    let mut comment = sc.to_string();
    comment.push_str(&format!(" tau_c={} delta={}", w.tau_c(), w.delta()));
    Ok(ValidationReport { comment, checks })
}

fn validate_spin(drive: &Drive, w: &Window, spin: Spin, tol: f64) -> Result<Vec<CheckRecord>, ExperimentError> {
    let two_j = spin.two_j();
    let (t0, t1) = (-w.tau_c(), w.tau_c());
    let numerical = || ExperimentError::numerical(format!("2j = {two_j}, {}", describe(w)));
    let proto = TangentProtocol::new(*drive, spin);
    let cd = CdProtocol::new(CdDrive::new(*drive), spin);
    let mut out = Vec::new();

    let analytic = proto.propagator(t0, t1).map_err(numerical())?;
    match integrate_columns(&drive.drive_function(), spin, t0, t1, tol) {
        Ok(r) => {
            let numeric = r.final_propagator.expect("propagator requested");
            let deficit = 1.0 - analytic.fidelity(&numeric);
            out.push(CheckRecord::measured(
                "tangent_oracle_fidelity_deficit",
                two_j,
                deficit,
                ORACLE_FIDELITY_DEFICIT,
            ));
            out.push(CheckRecord::measured(
                "oracle_norm_drift",
                two_j,
                r.max_norm_drift,
                ORACLE_NORM_DRIFT,
            ));
        }
        Err(e) => {
            let msg = format!("{e}; {}", describe(w));
            out.push(CheckRecord::errored(
                "tangent_oracle_fidelity_deficit",
                two_j,
                ORACLE_FIDELITY_DEFICIT,
                msg.clone(),
            ));
            out.push(CheckRecord::errored("oracle_norm_drift", two_j, ORACLE_NORM_DRIFT, msg));
        }
    }

    let cd_analytic = cd.propagator(t0, t1).map_err(numerical())?;
    match integrate_columns(&cd.drive().drive_function(), spin, t0, t1, tol) {
        Ok(r) => {
            let numeric = r.final_propagator.expect("propagator requested");
            let deficit = 1.0 - cd_analytic.fidelity(&numeric);
            out.push(CheckRecord::measured(
                "cd_oracle_fidelity_deficit",
                two_j,
                deficit,
                ORACLE_FIDELITY_DEFICIT,
            ));
        }
        Err(e) => out.push(CheckRecord::errored(
            "cd_oracle_fidelity_deficit",
            two_j,
            ORACLE_FIDELITY_DEFICIT,
            format!("{e}; {}", describe(w)),
        )),
    }

    let p = proto.truncated_transition_matrix(w).map_err(numerical())?;
    let from_u = analytic.matrix().map(|z| z.norm_sqr());
    let gap = (p.probabilities() - from_u).amax();
    out.push(CheckRecord::measured(
        "transition_matrix_vs_propagator",
        two_j,
        gap,
        MATRIX_AGREEMENT,
    ));
    out.push(CheckRecord::measured(
        "transition_stochasticity",
        two_j,
        p.stochasticity_defect(),
        MATRIX_AGREEMENT,
    ));

    if two_j == 1 {
        let closed = two_level_truncated_transfer(drive, w).map_err(numerical())?;
        let product = p.get(-1, 1).map_err(numerical())?;
        out.push(CheckRecord::measured(
            "tangent_closed_form",
            two_j,
            (closed - product).abs(),
            MATRIX_AGREEMENT,
        ));
        let cd_closed = two_level_cd_transfer(cd.drive(), w).map_err(numerical())?;
        let cd_product = cd
            .truncated_transition(w)
            .and_then(|p| p.get(-1, 1))
            .map_err(numerical())?;
        out.push(CheckRecord::measured(
            "cd_closed_form",
            two_j,
            (cd_closed - cd_product).abs(),
            MATRIX_AGREEMENT,
        ));
    }
    Ok(out)
}
