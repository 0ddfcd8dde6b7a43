use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dimrac::error::Result;
use dimrac::informativity::{gains_from_data, informative_for_mrc, informative_for_sysid, Trajectory};
use dimrac::sim_harness::io::{export_csv, export_report, report_to_json, ModelFile, ScenarioFile};
use dimrac::sim_harness::{plots, presets, run, RunReport, Scenario, StepRecord, Verdict};

#[derive(Parser)]
#[command(name = "dimrac", version, about = "Data-informativity-driven model reference adaptive control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a JSON config file.
    Simulate {
        /// Path to the scenario JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Override the scenario's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the step log, report, and plots.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also emit SVG diagnostic plots (requires --out).
        #[arg(long)]
        plot: bool,
    },
    /// Run one of the built-in benchmark scenarios S1..S8.
    Paper {
        /// Scenario name, S1 through S8.
        #[arg(long)]
        scenario: String,
        /// Override the scenario's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the step log, report, and plots.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also emit SVG diagnostic plots (requires --out).
        #[arg(long)]
        plot: bool,
    },
    /// Check whether recorded data are informative for the given reference
    /// model and, if so, print the extracted gains.
    Check {
        /// Trajectory CSV (columns t, u1..um, x1..xn).
        #[arg(long)]
        data: PathBuf,
        /// Reference-model JSON file with keys Am, Bm.
        #[arg(long)]
        model: PathBuf,
    },
}

fn emit_artifacts(
    scenario: &Scenario,
    report: &RunReport,
    steps: &[StepRecord],
    out: Option<&PathBuf>,
    plot: bool,
) -> Result<()> {
    println!("{}", report_to_json(report)?);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let n = scenario.plant.state_dim();
        let m = scenario.plant.input_dim();
        export_csv(steps, n, m, &dir.join("steps.csv"))?;
        export_report(report, &dir.join("report.json"))?;
        if plot {
            plots::export_all(steps, dir)?;
        }
    } else if plot {
        eprintln!("warning: --plot ignored without --out");
    }
    Ok(())
}

fn verdict_exit(verdict: Verdict) -> ExitCode {
    match verdict {
        Verdict::Converged => ExitCode::SUCCESS,
        Verdict::Unsolvable => ExitCode::from(2),
        Verdict::MaxSteps => ExitCode::from(3),
    }
}

fn run_scenario(
    mut scenario: Scenario,
    seed: Option<u64>,
    out: Option<&PathBuf>,
    plot: bool,
) -> Result<ExitCode> {
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let (report, steps) = run(&scenario)?;
    emit_artifacts(&scenario, &report, &steps, out, plot)?;
    Ok(verdict_exit(report.verdict))
}

fn check(data: &PathBuf, model_path: &PathBuf) -> Result<ExitCode> {
    let traj = Trajectory::import_csv(data)?;
    let model = ModelFile::load(model_path)?;
    let sysid = informative_for_sysid(&traj)?;
    let mrc = informative_for_mrc(&traj, &model)?;
    println!("samples: {}", traj.len());
    println!("informative for system identification: {sysid}");
    println!("informative for model reference control: {mrc}");
    if mrc {
        let gains = gains_from_data(&traj, &model)?;
        println!("K = {:.6}", gains.k);
        println!("L = {:.6}", gains.l);
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            plot,
        } => {
            let scenario = ScenarioFile::load(&config)?.into_scenario()?;
            run_scenario(scenario, seed, out.as_ref(), plot)
        }
        Command::Paper {
            scenario,
            seed,
            out,
            plot,
        } => {
            let preset = presets::paper_scenarios()
                .into_iter()
                .find(|s| s.name.eq_ignore_ascii_case(&scenario))
                .ok_or_else(|| {
                    dimrac::Error::Config(format!(
                        "unknown scenario {scenario:?}; expected S1 through S8"
                    ))
                })?;
            run_scenario(preset, seed, out.as_ref(), plot)
        }
        Command::Check { data, model } => check(&data, &model),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
