use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tanpulse::experiments::{
    plot_script, run_fields, run_levels, run_populations, run_truncation_scan, run_validate, Dataset, ExperimentError,
    Output, Scenario, ScenarioError,
};
use tanpulse::oracle::{MAX_TOL, MIN_TOL};

#[derive(Parser)]
#[command(
    name = "tanpulse",
    version,
    about = "Tangent-pulse population transfer: datasets and validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Longitudinal field Ω_z/η₁ over the truncated window
    Fields(Common),
    /// Diabatic, reference and instantaneous energy levels
    Levels(Common),
    /// Level populations along the diabatic solution
    Populations(Common),
    /// Transfer probability versus truncation for both protocols
    Truncation(Common),
    /// Analytic-versus-integrator checks; exits 1 on any failed check
    Validate(Common),
    /// Every output listed under `outputs` in the scenario
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (`key = value` lines)
    #[arg(long)]
    scenario: PathBuf,

    /// Output directory, created if missing
    #[arg(long)]
    out: PathBuf,

    /// Integrator tolerance, overrides the scenario value
    #[arg(long)]
    tol: Option<f64>,

    /// Worker threads for grid evaluation (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

fn load(common: &Common) -> Result<Scenario, ExperimentError> {
    let mut sc = Scenario::from_path(&common.scenario)?;
    if let Some(tol) = common.tol {
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            return Err(ScenarioError {
                line: 0,
                key: Some("tol".into()),
                message: format!("--tol {tol} must lie in [{MIN_TOL:e}, {MAX_TOL:e}]"),
            }
            .into());
        }
        sc.tol = tol;
    }
    Ok(sc)
}

fn write_dataset(d: &Dataset, dir: &Path) -> Result<(), ExperimentError> {
    let csv = d.write_to(dir)?;
    println!("wrote {}", csv.display());
    if let Some(script) = plot_script(&d.stem) {
        let path = dir.join(format!("{}_plot.py", d.stem));
        std::fs::write(&path, script).map_err(|source| ExperimentError::Io {
            path: path.clone(),
            source,
        })?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Runs one output and returns its exit status.
fn execute(output: Output, sc: &Scenario, dir: &Path) -> Result<i32, ExperimentError> {
    let dataset = match output {
        Output::Fields => run_fields(sc)?,
        Output::Levels => run_levels(sc)?,
        Output::Populations => run_populations(sc)?,
        Output::TruncationScan => run_truncation_scan(sc)?,
        Output::Validate => {
            let report = run_validate(sc)?;
            for c in &report.checks {
                println!("{c}");
            }
            let passed = report.checks.iter().filter(|c| c.status() == "pass").count();
            println!("{passed}/{} checks passed", report.checks.len());
            let path = report.write_to(dir)?;
            println!("wrote {}", path.display());
            return Ok(report.exit_code());
        }
    };
    write_dataset(&dataset, dir)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, outputs): (&Common, Option<Output>) = match &cli.command {
        Command::Fields(c) => (c, Some(Output::Fields)),
        Command::Levels(c) => (c, Some(Output::Levels)),
        Command::Populations(c) => (c, Some(Output::Populations)),
        Command::Truncation(c) => (c, Some(Output::TruncationScan)),
        Command::Validate(c) => (c, Some(Output::Validate)),
        Command::Run(c) => (c, None),
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    };

    let result = pool.install(|| -> Result<i32, ExperimentError> {
        let sc = load(common)?;
        let list = match outputs {
            Some(o) => vec![o],
            None => sc.outputs.clone(),
        };
        let mut status = 0;
        for o in list {
            status = status.max(execute(o, &sc, &common.out)?);
        }
        Ok(status)
    });

    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
