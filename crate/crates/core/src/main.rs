use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use stirap_core::cli::presets::{preset, preset_names};
use stirap_core::cli::run::{to_json, SimulationSummary};
use stirap_core::cli::{run_design, run_simulate, run_spectrum, CliError, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "stirap", version, about = "Design and simulate four-pulse phase-sensitive population transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate from |1> and write CSV, JSON summary, and optional gnuplot script.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Solve for the control pulse and print the report.
    Design {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the dressed spectrum and null eigenvector at one time.
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long, short, default_value_t = 0.0, allow_negative_numbers = true)]
        time: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a builtin preset (fig2a, fig2b, fig3a, fig3b, fig4, fig5) or `all`.
    Reproduce {
        preset: String,
        #[command(flatten)]
        run: RunFlags,
        /// Worker threads for `all`.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use a builtin preset instead of a config file.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Initial integration step (refined by halving).
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long, value_enum)]
    decay: Option<Toggle>,
    #[arg(long)]
    emit_plot: bool,
}

impl RunFlags {
    fn options(&self) -> RunOptions {
        RunOptions {
            out_dir: self.out.clone(),
            grid_step: self.grid_step,
            decay: self.decay.map(|d| matches!(d, Toggle::On)),
            emit_plot: self.emit_plot,
        }
    }
}

fn load(source: &Source) -> Result<ExperimentConfig, CliError> {
    match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
            ExperimentConfig::parse(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                other => other,
            })
        }
        (None, Some(name)) => preset(name),
        (None, None) => unreachable!("clap enforces one source"),
    }
}

fn write_report(out: &Option<PathBuf>, file: String, json: &str) -> Result<(), CliError> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), source: e })?;
        let path = dir.join(file);
        std::fs::write(&path, format!("{json}\n")).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    }
    Ok(())
}

fn summary_line(s: &SimulationSummary) -> String {
    let p = s.final_yields;
    let m = s.max_populations;
    let mut line = format!(
        "{}: final P1..P5 = [{:.3e}, {:.3e}, {:.3e}, {:.4}, {:.3e}]  max P2 {:.2e}  max P3 {:.2e}  max P5 {:.2e}",
        s.name, p[0], p[1], p[2], p[3], p[4], m[1], m[2], m[4]
    );
    if let Some(sp) = &s.superposition {
        line += &format!("  final P4' {:.4}  max P3' {:.2e}", sp.final_p4p, sp.max_p3p);
    }
    line
}

fn simulate_and_report(config: &ExperimentConfig, options: &RunOptions) -> Result<String, CliError> {
    let (sim, files) = run_simulate(config, options)?;
    let mut line = summary_line(&sim.summary);
    line += &format!("\n  wrote {} and {}", files.csv.display(), files.summary.display());
    if let Some(p) = files.plot {
        line += &format!(" and {}", p.display());
    }
    Ok(line)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { source, run } => {
            let config = load(&source)?;
            println!("{}", simulate_and_report(&config, &run.options())?);
        }
        Command::Design { source, out } => {
            let config = load(&source)?;
            let json = to_json(&run_design(&config)?);
            write_report(&out, format!("{}_design.json", config.stem()), &json)?;
            println!("{json}");
        }
        Command::Spectrum { source, time, out } => {
            let config = load(&source)?;
            let json = to_json(&run_spectrum(&config, time)?);
            write_report(&out, format!("{}_spectrum.json", config.stem()), &json)?;
            println!("{json}");
        }
        Command::Reproduce { preset: name, run, jobs } => {
            let names: Vec<&str> = if name == "all" { preset_names().collect() } else { vec![name.as_str()] };
            let configs = names.iter().map(|n| preset(n)).collect::<Result<Vec<_>, _>>()?;
            let options = run.options();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .expect("thread pool");
            let results: Vec<Result<String, CliError>> =
                pool.install(|| configs.par_iter().map(|c| simulate_and_report(c, &options)).collect());
            for r in results {
                println!("{}", r?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
