//! Drivers for the three CLI verbs and their output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::complex::format_complex;
use super::{CliError, ExperimentConfig};
use crate::design::{DesignSolution, SuppressedTarget, RESIDUAL_SAMPLES};
use crate::error::Error;
use crate::propagate::{branching_ratio_from, propagate_converged, BranchingRatio, Trajectory};
use crate::pulse::{PulseSet, RabiSchedule, RabiSet};
use crate::spectrum::{
    dressed_spectrum, node_residual, null_eigenvector, quadratic_roots, restriction_holds, ProductLevel,
};
use crate::superposition::{entangled_representation, project_onto_targets};
use crate::system::{basis_state, norm_sqr, FiveLevelSystem};

pub const DEFAULT_OUT_DIR: &str = "out";
pub const DEFAULT_MAX_ROWS: usize = 2001;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub grid_step: Option<f64>,
    /// `None` applies the configured decay rates.
    pub decay: Option<bool>,
    pub emit_plot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSummary {
    pub solved: bool,
    pub amplitude: f64,
    pub phase: f64,
    pub width: f64,
    pub center: f64,
    /// Peak control Rabi frequency `Ω_C·T`.
    pub peak_rabi: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_node_residual: Option<f64>,
}

impl ControlSummary {
    fn new(system: &FiveLevelSystem, pulses: &PulseSet, solution: Option<&DesignSolution>) -> Self {
        let c = &pulses.control;
        Self {
            solved: solution.is_some(),
            amplitude: c.peak_amplitude,
            phase: c.phase,
            width: c.width,
            center: c.center,
            peak_rabi: format_complex(RabiSchedule::new(system, pulses).peaks().control),
            max_node_residual: solution.map(|s| s.residual_report),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BranchingSummary {
    Value(f64),
    Label(&'static str),
}

impl From<crate::Result<BranchingRatio>> for BranchingSummary {
    fn from(b: crate::Result<BranchingRatio>) -> Self {
        match b {
            Ok(BranchingRatio::Finite(x)) => BranchingSummary::Value(x),
            Ok(BranchingRatio::Infinite) => BranchingSummary::Label("infinite"),
            Err(_) => BranchingSummary::Label("indeterminate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub t_start: f64,
    pub t_end: f64,
    pub initial_step: f64,
    pub final_step: f64,
    pub refinements: usize,
    pub final_population_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperpositionSummary {
    pub theta: f64,
    pub beta: f64,
    pub target_state: String,
    pub final_p3p: f64,
    pub final_p4p: f64,
    pub max_p3p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub name: String,
    pub include_decay: bool,
    pub decay_rates: [f64; 2],
    pub grid: GridSummary,
    pub control: ControlSummary,
    pub final_populations: [f64; 5],
    /// Final populations plus the flux each decaying level has emitted.
    pub final_yields: [f64; 5],
    pub final_norm: f64,
    /// `P₄/P₃` of the final yields.
    pub branching_ratio: BranchingSummary,
    pub max_populations: [f64; 5],
    pub min_null_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub superposition: Option<SuperpositionSummary>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: ExperimentConfig,
    pub system: FiveLevelSystem,
    pub pulses: PulseSet,
    pub target: SuppressedTarget,
    pub trajectory: Trajectory,
    pub summary: SimulationSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Design (if requested) and propagate from |1⟩; no files are written.
pub fn simulate(config: &ExperimentConfig, options: &RunOptions) -> Result<Simulation, CliError> {
    let system = config.system()?;
    let target = config.suppressed_target()?;
    if !crate::design::check_restriction(&system, &target) {
        return Err(Error::RestrictionViolated.into());
    }
    let (pulses, solution) = config.pulse_set()?;
    let grid = config.time_grid(&system, &pulses, options.grid_step)?;
    let include_decay = options.decay.unwrap_or(true);
    let settings = config.propagation_settings(include_decay);
    let trajectory = propagate_converged(&system, &pulses, &basis_state(1), &grid, &settings)?;

    let schedule = RabiSchedule::new(&system, &pulses);
    let min_null_fidelity = trajectory
        .times
        .iter()
        .zip(&trajectory.amplitudes)
        .filter_map(|(&t, psi)| null_eigenvector(&schedule.at(t)).ok().map(|v| v.fidelity(psi)))
        .reduce(f64::min);
    let yields = trajectory.final_yields();
    let convergence = trajectory.convergence.expect("converged trajectory");
    let superposition = match target {
        SuppressedTarget::Superposition(t) => {
            let max_p3p = trajectory.amplitudes.iter().map(|a| project_onto_targets(a, &t).0).fold(0.0, f64::max);
            let (final_p3p, final_p4p) = project_onto_targets(trajectory.final_amplitudes(), &t);
            Some(SuperpositionSummary {
                theta: t.theta,
                beta: t.beta,
                target_state: entangled_representation(&t).to_string(),
                final_p3p,
                final_p4p,
                max_p3p,
            })
        }
        _ => None,
    };
    let summary = SimulationSummary {
        name: config.name.clone(),
        include_decay,
        decay_rates: [trajectory.decay_rates.0, trajectory.decay_rates.1],
        grid: GridSummary {
            t_start: grid.t_start,
            t_end: grid.t_end,
            initial_step: grid.step,
            final_step: convergence.step,
            refinements: convergence.refinements,
            final_population_change: convergence.final_population_change,
        },
        control: ControlSummary::new(&system, &pulses, solution.as_ref()),
        final_populations: trajectory.final_populations(),
        final_yields: yields,
        final_norm: norm_sqr(trajectory.final_amplitudes()),
        branching_ratio: branching_ratio_from(yields[2], yields[3]).into(),
        max_populations: [1, 2, 3, 4, 5].map(|k| trajectory.max_population(k)),
        min_null_fidelity,
        superposition,
    };
    Ok(Simulation { config: config.clone(), system, pulses, target, trajectory, summary })
}

fn out_dir(config: &ExperimentConfig, options: &RunOptions) -> PathBuf {
    options
        .out_dir
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn trajectory_csv(sim: &Simulation, max_rows: usize) -> String {
    let traj = &sim.trajectory;
    let schedule = RabiSchedule::new(&sim.system, &sim.pulses);
    let projected = match sim.target {
        SuppressedTarget::Superposition(t) => Some(t),
        _ => None,
    };
    let mut out = String::from("t,P1,P2,P3,P4,P5,fidelity");
    if projected.is_some() {
        out.push_str(",P3p,P4p");
    }
    out.push('\n');
    let n = traj.len();
    let stride = n.div_ceil(max_rows.max(2) - 1).max(1);
    let rows = (0..n).step_by(stride).chain((!(n - 1).is_multiple_of(stride)).then_some(n - 1));
    for i in rows {
        let t = traj.times[i];
        let psi = &traj.amplitudes[i];
        let _ = write!(out, "{t:.9}");
        for p in traj.populations(i) {
            let _ = write!(out, ",{p:.10e}");
        }
        match null_eigenvector(&schedule.at(t)) {
            Ok(v) => {
                let _ = write!(out, ",{:.10e}", v.fidelity(psi));
            }
            Err(_) => out.push_str(",nan"),
        }
        if let Some(target) = &projected {
            let (p3, p4) = project_onto_targets(psi, target);
            let _ = write!(out, ",{p3:.10e},{p4:.10e}");
        }
        out.push('\n');
    }
    out
}

pub fn gnuplot_script(csv_name: &str, title: &str, superposition: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel 't / T'");
    let _ = writeln!(s, "set ylabel 'population'");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set yrange [1e-8:1.5]");
    let columns: &[usize] = if superposition { &[2, 3, 6, 8, 9] } else { &[2, 3, 4, 5, 6] };
    let parts: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let file = if k == 0 { format!("'{csv_name}'") } else { "''".to_string() };
            format!("{file} using 1:{c} with lines")
        })
        .collect();
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}

/// Simulate and write `<stem>.csv`, `<stem>.json`, and optionally `<stem>.gp`.
pub fn run_simulate(config: &ExperimentConfig, options: &RunOptions) -> Result<(Simulation, SimulationFiles), CliError> {
    let sim = simulate(config, options)?;
    let dir = out_dir(config, options);
    fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let stem = config.stem();
    let csv = dir.join(format!("{stem}.csv"));
    let summary = dir.join(format!("{stem}.json"));
    write_file(&csv, &trajectory_csv(&sim, config.output.max_rows.unwrap_or(DEFAULT_MAX_ROWS)))?;
    write_file(&summary, &(to_json(&sim.summary) + "\n"))?;
    let plot = if options.emit_plot || config.output.plot {
        let path = dir.join(format!("{stem}.gp"));
        let superposition = matches!(sim.target, SuppressedTarget::Superposition(_));
        write_file(&path, &gnuplot_script(&format!("{stem}.csv"), &config.name, superposition))?;
        Some(path)
    } else {
        None
    };
    Ok((sim, SimulationFiles { csv, summary, plot }))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports contain only serializable values")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub name: String,
    pub target: String,
    pub control: ControlSummary,
    pub restriction_ok: bool,
    pub max_node_residual: f64,
    pub residual_samples: usize,
}

fn describe_target(target: &SuppressedTarget) -> String {
    match target {
        SuppressedTarget::Level3 => "suppress |3>".into(),
        SuppressedTarget::Level4 => "suppress |4>".into(),
        SuppressedTarget::Superposition(t) => {
            format!("suppress theta={} beta={}; target {}", t.theta, t.beta, entangled_representation(t))
        }
    }
}

/// Solve for the control pulse, ignoring any explicit control timing in the config.
pub fn run_design(config: &ExperimentConfig) -> Result<DesignReport, CliError> {
    let problem = config.design_problem()?;
    let solution = crate::design::design_control_pulse(&problem)?;
    let pulses = solution.pulses(&problem);
    Ok(DesignReport {
        name: config.name.clone(),
        target: describe_target(&problem.suppressed_target),
        control: ControlSummary::new(&problem.system, &pulses, Some(&solution)),
        restriction_ok: solution.restriction_ok,
        max_node_residual: solution.residual_report,
        residual_samples: RESIDUAL_SAMPLES,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RabiSummary {
    pub pump: String,
    pub stokes3: String,
    pub stokes4: String,
    pub branch3: String,
    pub branch4: String,
    pub control: String,
}

impl From<&RabiSet> for RabiSummary {
    fn from(r: &RabiSet) -> Self {
        Self {
            pump: format_complex(r.pump),
            stokes3: format_complex(r.stokes3),
            stokes4: format_complex(r.stokes4),
            branch3: format_complex(r.branch3),
            branch4: format_complex(r.branch4),
            control: format_complex(r.control),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub name: String,
    pub time: f64,
    pub rabis: RabiSummary,
    pub max_rabi: f64,
    /// Field-free or fully cancelling: the null state is undefined.
    pub degenerate: bool,
    /// Ascending; the middle entry is the null eigenvalue 0.
    pub eigenvalues: [f64; 5],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_vector: Option<[String; 5]>,
    pub node_residual_level3: f64,
    pub node_residual_level4: f64,
    pub restriction_holds: bool,
}

pub fn run_spectrum(config: &ExperimentConfig, time: f64) -> Result<SpectrumReport, CliError> {
    let system = config.system()?;
    let (pulses, _) = config.pulse_set()?;
    let rabis = RabiSchedule::new(&system, &pulses).at(time);
    let (eigenvalues, null_vector, degenerate) = match dressed_spectrum(&rabis) {
        Ok(s) => (s.eigenvalues(), Some(s.null_state.components.map(format_complex)), false),
        Err(Error::DegenerateCase) => {
            let (hi, lo) = quadratic_roots(&rabis);
            let (a, b) = (hi.max(0.0).sqrt(), lo.max(0.0).sqrt());
            ([-a, -b, 0.0, b, a], None, true)
        }
        Err(e) => return Err(e.into()),
    };
    Ok(SpectrumReport {
        name: config.name.clone(),
        time,
        rabis: RabiSummary::from(&rabis),
        max_rabi: rabis.max_magnitude(),
        degenerate,
        eigenvalues,
        null_vector,
        node_residual_level3: node_residual(&rabis, ProductLevel::Level3),
        node_residual_level4: node_residual(&rabis, ProductLevel::Level4),
        restriction_holds: restriction_holds(&rabis),
    })
}
