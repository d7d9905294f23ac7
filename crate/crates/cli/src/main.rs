use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dfaf_core::experiments::{
    fit_scenario, preset, run_scenario, sweep_alpha, Kind, Output, Report, Scenario, PRESETS,
};
use dfaf_core::Error;

/// Outage analysis of opportunistic DF-AF selection relaying over
/// Nakagami-m fading: closed forms, asymptotes and Monte Carlo.
#[derive(Parser, Debug)]
#[command(name = "dfaf", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Scenario file (TOML) or preset name.
    #[arg(long, global = true)]
    scenario: Option<String>,

    /// Master seed for the Monte Carlo streams.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo trials per grid point.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Confidence level of the Wilson intervals, e.g. 0.99.
    #[arg(long, global = true)]
    confidence: Option<f64>,

    /// Output CSV file; a directory when the scenario is a preset group.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for Monte Carlo (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact closed-form outage curves (selection combining).
    Analytic,
    /// Monte Carlo outage estimates.
    Simulate,
    /// High-SNR asymptotic outage.
    Asymptotic,
    /// Every output the scenario requests.
    Compare,
    /// Fit diversity orders to closed-form curves.
    FitDiversity {
        #[arg(long, default_value_t = 35.0)]
        window_lo: f64,
        #[arg(long, default_value_t = 45.0)]
        window_hi: f64,
    },
    /// Monte Carlo outage across source/relay power splits.
    SweepAlpha,
    /// Built-in scenarios.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand, Debug)]
enum PresetAction {
    /// List preset names.
    List,
    /// Print a preset as a scenario file.
    Show { name: String },
}

fn load_scenarios(opts: &GlobalOpts) -> Result<Vec<Scenario>, Error> {
    let spec = opts
        .scenario
        .as_deref()
        .ok_or_else(|| Error::Config("--scenario <file|preset> is required".into()))?;
    let mut scenarios = if Path::new(spec).is_file() {
        vec![Scenario::from_toml(&fs::read_to_string(spec)?)?]
    } else {
        preset(spec)?
    };
    for s in &mut scenarios {
        if let Some(seed) = opts.seed {
            s.seed = seed;
        }
        if let Some(trials) = opts.trials {
            s.trials = trials;
        }
        if let Some(c) = opts.confidence {
            s.confidence = c;
        }
    }
    Ok(scenarios)
}

fn keep_bounds(s: &Scenario, main: Output) -> Vec<Output> {
    let mut outputs = vec![main];
    if main == Output::Asymptotic && s.wants(Output::Bounds) {
        outputs.push(Output::Bounds);
    }
    outputs
}

fn run_one(command: &Command, s: &mut Scenario, workers: Option<usize>) -> Result<Report, Error> {
    match command {
        Command::Analytic | Command::Asymptotic | Command::Simulate => {
            let main = match command {
                Command::Analytic => Output::Analytic,
                Command::Asymptotic => Output::Asymptotic,
                _ => Output::Montecarlo,
            };
            match s.kind()? {
                Kind::Curve(..) => {
                    s.outputs = keep_bounds(s, main);
                    run_scenario(s, workers)
                }
                Kind::AlphaSweep(..) if main == Output::Montecarlo => sweep_alpha(s, workers),
                _ => Err(Error::Config(format!(
                    "scenario `{}` is not an SNR curve; use `compare`, `sweep-alpha` or `fit-diversity`",
                    s.name
                ))),
            }
        }
        Command::Compare => run_scenario(s, workers),
        Command::FitDiversity {
            window_lo,
            window_hi,
        } => fit_scenario(s, (*window_lo, *window_hi)),
        Command::SweepAlpha => sweep_alpha(s, workers),
        Command::Presets { .. } => unreachable!("handled before scenario loading"),
    }
}

fn emit(reports: &[Report], out: Option<&Path>) -> Result<(), Error> {
    for r in reports {
        for w in &r.warnings {
            eprintln!("warning: {w}");
        }
        if r.dominance_violations > 0 {
            eprintln!(
                "warning: {}: DF-AF lost to another scheme in {} coupled trials",
                r.name, r.dominance_violations
            );
        }
    }
    match (out, reports) {
        (Some(path), [single]) => single.table.write_csv(fs::File::create(path)?),
        (Some(dir), many) => {
            fs::create_dir_all(dir)?;
            for r in many {
                r.table
                    .write_csv(fs::File::create(dir.join(format!("{}.csv", r.name)))?)?;
            }
            Ok(())
        }
        (None, [single]) => single.table.write_csv(io::stdout().lock()),
        (None, many) => {
            let mut stdout = io::stdout().lock();
            for r in many {
                writeln!(stdout, "# {}", r.name)?;
                r.table.write_csv(&mut stdout)?;
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Command::Presets { action } = &cli.command {
        match action {
            PresetAction::List => {
                for (name, about) in PRESETS {
                    println!("{name:<24} {about}");
                }
            }
            PresetAction::Show { name } => {
                for s in preset(name)? {
                    println!("{}", s.to_toml());
                }
            }
        }
        return Ok(());
    }
    let reports = load_scenarios(&cli.global)?
        .iter_mut()
        .map(|s| run_one(&cli.command, s, cli.global.workers))
        .collect::<Result<Vec<_>, _>>()?;
    emit(&reports, cli.global.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
