//! `zenochem` — propagate radical-pair spin dynamics, compute
//! magnetic-field-effect curves, and self-check the numerics.
//!
//! Exit codes: 0 success, 1 runtime or validation failure, 2 configuration
//! error (including unknown config keys and capacity limits).

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zenochem_core::experiments::{
    builtin_scenarios, run_scenario, scenario_by_name, OutputKind, Scenario,
};
use zenochem_core::model::SimParams;
use zenochem_core::propagation::propagate;
use zenochem_core::spin::SystemSpec;
use zenochem_core::validation::run_full_suite;
use zenochem_core::Error;

use config::RunPlan;
use output::{ensure_dir, join, series_file_name, write_csv, write_plot_script, PlotEntry};

/// An error carrying the process exit code it should produce.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError { message, code: 2 }
    }
    pub fn runtime(message: String) -> Self {
        CliError { message, code: 1 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            // Problems a config edit fixes are config errors; mid-run
            // numerical failures are runtime errors.
            Error::DimensionMismatch { .. }
            | Error::DimensionCap { .. }
            | Error::InvalidSpin { .. }
            | Error::InvalidParam { .. }
            | Error::UnknownScenario(_)
            | Error::InvalidScenario { .. } => CliError::config(e.to_string()),
            Error::IntegrationBlowup { .. } | Error::JumpProbabilityOverflow { .. } => {
                CliError::runtime(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "zenochem",
    version,
    about = "Radical-pair spin dynamics: recombination kinetics and magnetic-field effects"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configuration file (inline system or named scenario)
    Run {
        /// TOML configuration path
        #[arg(long)]
        config: PathBuf,
        /// Output directory for CSV files
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a built-in scenario and write its absorption/MFE curves
    Mfe {
        /// Scenario name (see `list-scenarios`)
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-run a scenario's field comparison across relaxation rates
    Sweep {
        #[arg(long)]
        scenario: String,
        /// Comma-separated relaxation rates in 1/us, e.g. 0,1,10
        #[arg(long, value_delimiter = ',', required = true)]
        ksr: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every correctness property and report pass/fail
    Validate,
    /// List the built-in scenarios
    ListScenarios,
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Honors ZENOCHEM_THREADS as a cap on sweep parallelism.
fn configure_threads() {
    if let Ok(v) = std::env::var("ZENOCHEM_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring ZENOCHEM_THREADS={v:?} (want a positive integer)"),
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Run { config, out } => {
            cmd_run(&config, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Mfe { scenario, out } => {
            let sc = scenario_by_name(&scenario)?;
            ensure_dir(&out)?;
            let files = write_scenario_files(&sc, None, &out)?;
            write_plot_script(&sc.name, &files, &out.join("plot.gp"))?;
            for f in &files {
                println!("wrote {}", join(&out, &f.file).display());
            }
            println!("wrote {}", out.join("plot.gp").display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { scenario, ksr, out } => {
            let sc = scenario_by_name(&scenario)?;
            ensure_dir(&out)?;
            let mut files = Vec::new();
            for &k_sr in &ksr {
                let mut variant = sc.clone();
                variant.params_base.k_sr = k_sr;
                variant.field_k_sr = None;
                files.extend(write_scenario_files(&variant, Some(k_sr), &out)?);
            }
            write_plot_script(
                &format!("{} sweep", sc.name),
                &files,
                &out.join("plot.gp"),
            )?;
            for f in &files {
                println!("wrote {}", join(&out, &f.file).display());
            }
            println!("wrote {}", out.join("plot.gp").display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate => {
            let results = run_full_suite();
            let mut failed = 0;
            for r in &results {
                println!(
                    "{} {:24} {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
                if !r.passed {
                    failed += 1;
                }
            }
            println!(
                "{} of {} properties passed",
                results.len() - failed,
                results.len()
            );
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::ListScenarios => {
            for sc in builtin_scenarios() {
                let fields: Vec<String> = sc
                    .fields_to_compare
                    .iter()
                    .map(|b| format!("{b}"))
                    .collect();
                let theories: Vec<&str> =
                    sc.theories.iter().map(|t| t.label()).collect();
                println!("{}", sc.name);
                println!(
                    "    fields: [{}] uT; theories: {}; dt={} us",
                    fields.join(", "),
                    theories.join(", "),
                    sc.params_base.dt_us
                );
                println!("    {}", sc.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Runs every cell of a scenario and writes its CSVs into `dir`. Returns the
/// plot entries describing what was written. `k_sr_tag` stamps sweep output
/// file names with the relaxation rate.
fn write_scenario_files(
    sc: &Scenario,
    k_sr_tag: Option<f64>,
    dir: &Path,
) -> Result<Vec<PlotEntry>, CliError> {
    let runs = run_scenario(sc)?;
    let theory_suffix = sc.theories.len() > 1;
    let wants_absorption = sc.outputs.contains(&OutputKind::TransientAbsorption);
    let mut entries = Vec::new();
    for run in &runs {
        let theory = theory_suffix.then(|| run.theory.label());
        let decorate = |label: String| match (theory, k_sr_tag) {
            (Some(t), Some(k)) => format!("{label}, kSR={k}, {t}"),
            (Some(t), None) => format!("{label}, {t}"),
            (None, Some(k)) => format!("{label}, kSR={k}"),
            (None, None) => label,
        };
        if wants_absorption {
            let file = series_file_name("absorption", run.field_ut, k_sr_tag, theory);
            write_csv(&run.trajectory, None, &join(dir, &file))?;
            entries.push(PlotEntry::absorption(
                file,
                decorate(format!("B={} uT", run.field_ut)),
            ));
        }
        if let Some(mfe) = &run.mfe_values {
            let file = series_file_name("mfe", run.field_ut, k_sr_tag, theory);
            write_csv(&run.trajectory, Some(mfe), &join(dir, &file))?;
            entries.push(PlotEntry::mfe(
                file,
                decorate(format!(
                    "B={} vs {} uT",
                    run.field_ut, sc.fields_to_compare[0]
                )),
            ));
        }
    }
    Ok(entries)
}

/// The `run` subcommand: named scenario or single inline propagation.
fn cmd_run(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let (file, plan) = config::load(config_path)?;
    ensure_dir(out_dir)?;
    match plan {
        RunPlan::Scenario(name) => {
            let mut sc = scenario_by_name(&name)?;
            if let Some(stride) = file.output.rho_sample_stride {
                sc.params_base.rho_sample_stride = stride;
            }
            let files = write_scenario_files(&sc, None, out_dir)?;
            if file.output.emit_plot_script {
                write_plot_script(&sc.name, &files, &out_dir.join("plot.gp"))?;
            }
            for f in &files {
                println!("wrote {}", join(out_dir, &f.file).display());
            }
        }
        RunPlan::Inline { spec, params, reference_field_ut } => {
            let csv_name = file.output.csv_path.as_deref().unwrap_or("run.csv");
            let path = join(out_dir, csv_name);
            let mfe = run_inline(&spec, &params, reference_field_ut, &path)?;
            println!("wrote {}", path.display());
            if file.output.emit_plot_script {
                let file_name = path
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| csv_name.to_string());
                let mut entries = vec![PlotEntry::absorption(
                    file_name.clone(),
                    format!("B={:?} uT", params.b_field_ut),
                )];
                if mfe {
                    entries.push(PlotEntry::mfe(file_name, "field effect".into()));
                }
                let script = path.with_file_name("plot.gp");
                write_plot_script("configured run", &entries, &script)?;
                println!("wrote {}", script.display());
            }
        }
    }
    Ok(())
}

/// Propagates an inline configuration (plus its reference field, when set)
/// and writes the CSV. Returns whether an MFE column was written.
fn run_inline(
    spec: &SystemSpec,
    params: &SimParams,
    reference_field_ut: Option<[f64; 3]>,
    path: &Path,
) -> Result<bool, CliError> {
    let traj = propagate(spec, params)?;
    let mfe_col = match reference_field_ut {
        Some(b_ref) => {
            let reference = propagate(
                spec,
                &SimParams {
                    b_field_ut: b_ref,
                    ..params.clone()
                },
            )?;
            Some(
                traj.population
                    .iter()
                    .zip(&reference.population)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<f64>>(),
            )
        }
        None => None,
    };
    write_csv(&traj, mfe_col.as_deref(), path)?;
    Ok(mfe_col.is_some())
}
