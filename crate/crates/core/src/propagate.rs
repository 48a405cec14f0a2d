//! Time-dependent Schrödinger propagation, `i dψ/dt = H(t) ψ`, with classical
//! fourth-order Runge-Kutta on a uniform grid.
//!
//! Accuracy is controlled by step halving: the grid is refined until doubling
//! the resolution moves every final population by less than the tolerance.
//! Decay of the product states enters as `-iΓ` on the diagonal and is
//! integrated by the same stepper.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pulse::{PulseSet, RabiSchedule};
use crate::spectrum::{null_eigenvector, null_gap, NullEigenvector, ProductLevel};
use crate::system::{build_hamiltonian, norm_sqr, populations, Amplitudes, FiveLevelSystem};

/// Default half-width of the simulation window, in units of the widest pulse.
pub const DEFAULT_WINDOW_WIDTHS: f64 = 4.0;
/// Default initial step, as a fraction of the narrowest pulse width.
pub const DEFAULT_STEPS_PER_WIDTH: f64 = 200.0;
/// Cap on `step · √(Σ|Ω_peak|²)` for the initial step.
pub const MAX_PHASE_PER_STEP: f64 = 0.25;
pub const DEFAULT_MAX_REFINEMENTS: usize = 4;
pub const DEFAULT_CONVERGENCE_TOLERANCE: f64 = 1e-8;
/// Below this final population a target state counts as empty.
pub const EMPTY_POPULATION: f64 = 1e-15;

const MIN_STEPS: usize = 10;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    /// Uniform spacing; always divides `t_end − t_start` exactly.
    pub step: f64,
}

impl TimeGrid {
    /// Grid on `[t_start, t_end]` with spacing no larger than `max_step`.
    pub fn new(t_start: f64, t_end: f64, max_step: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(Error::InvalidGrid(format!("need t_start < t_end, got [{t_start}, {t_end}]")));
        }
        if !(max_step > 0.0) || !max_step.is_finite() {
            return Err(Error::InvalidGrid(format!("step must be positive, got {max_step}")));
        }
        let span = t_end - t_start;
        let n = (span / max_step * (1.0 - 1e-12)).ceil() as usize;
        if n < MIN_STEPS {
            return Err(Error::InvalidGrid(format!(
                "step {max_step} gives {n} steps over [{t_start}, {t_end}]; at least {MIN_STEPS} required"
            )));
        }
        Ok(Self { t_start, t_end, step: span / n as f64 })
    }

    /// Window `[min center − 4·max width, max center + 4·max width]`, initial
    /// step `min width / 200`, further capped so that the largest possible
    /// dressed energy advances by at most 0.25 rad per step.
    pub fn default_for(system: &FiveLevelSystem, pulses: &PulseSet) -> Result<Self> {
        let (start, end) = pulses.window(DEFAULT_WINDOW_WIDTHS);
        Self::new(start, end, default_step(system, pulses))
    }

    pub fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.step).round() as usize
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps() {
            self.t_end
        } else {
            self.t_start + i as f64 * self.step
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps()).map(move |i| self.time(i))
    }

    pub fn refined(&self) -> Self {
        Self { step: self.step / 2.0, ..*self }
    }
}

pub fn default_step(system: &FiveLevelSystem, pulses: &PulseSet) -> f64 {
    let by_width = pulses.min_width() / DEFAULT_STEPS_PER_WIDTH;
    let peak_norm = RabiSchedule::new(system, pulses).peaks().total_square().sqrt();
    if peak_norm > 0.0 {
        by_width.min(MAX_PHASE_PER_STEP / peak_norm)
    } else {
        by_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSettings {
    pub include_decay: bool,
    pub max_refinements: usize,
    pub tolerance: f64,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        Self {
            include_decay: true,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            tolerance: DEFAULT_CONVERGENCE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    /// Step of the accepted (finest) run.
    pub step: f64,
    /// Halvings performed beyond the initial grid.
    pub refinements: usize,
    /// Largest change of a final population between the last two runs.
    pub final_population_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Amplitudes>,
    pub convergence: Option<Convergence>,
    /// `(Γ₃, Γ₄)` applied during propagation; zero when decay was off.
    pub decay_rates: (f64, f64),
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn populations(&self, i: usize) -> [f64; 5] {
        populations(&self.amplitudes[i])
    }

    pub fn final_amplitudes(&self) -> &Amplitudes {
        self.amplitudes.last().expect("trajectory has at least one point")
    }

    pub fn final_populations(&self) -> [f64; 5] {
        populations(self.final_amplitudes())
    }

    /// `max_t P_level` for a 1-based level.
    pub fn max_population(&self, level: usize) -> f64 {
        self.amplitudes.iter().map(|a| a[level - 1].norm_sqr()).fold(0.0, f64::max)
    }

    pub fn norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(norm_sqr)
    }

    /// Product yields: populations with the flux lost from |3⟩ and |4⟩ up to
    /// each time, `2Γ∫P dt` (trapezoid), added back onto those levels.
    pub fn product_yields(&self) -> Vec<[f64; 5]> {
        let (g3, g4) = self.decay_rates;
        let h = self.grid.step;
        let mut lost = [0.0, 0.0];
        let mut prev: Option<[f64; 5]> = None;
        self.amplitudes
            .iter()
            .map(|a| {
                let p = populations(a);
                if let Some(q) = prev {
                    lost[0] += g3 * h * (p[2] + q[2]);
                    lost[1] += g4 * h * (p[3] + q[3]);
                }
                prev = Some(p);
                let mut y = p;
                y[2] += lost[0];
                y[3] += lost[1];
                y
            })
            .collect()
    }

    pub fn final_yields(&self) -> [f64; 5] {
        *self.product_yields().last().expect("trajectory has at least one point")
    }
}

fn rhs(system: &FiveLevelSystem, schedule: &RabiSchedule, include_decay: bool, t: f64, psi: &Amplitudes) -> Amplitudes {
    let h = build_hamiltonian(system, &schedule.at(t), include_decay);
    let mut out = h.apply(psi);
    for z in out.iter_mut() {
        *z = Complex64::new(z.im, -z.re); // −i·z
    }
    out
}

fn axpy(a: &Amplitudes, k: &Amplitudes, s: f64) -> Amplitudes {
    let mut out = *a;
    for (o, x) in out.iter_mut().zip(k) {
        *o += x * s;
    }
    out
}

fn validate_initial(initial: &Amplitudes) -> Result<()> {
    let n = norm_sqr(initial);
    if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState(format!("initial state must be normalized, ‖ψ‖² = {n}")));
    }
    Ok(())
}

/// A single RK4 pass over `grid`, no refinement.
pub fn propagate_fixed(
    system: &FiveLevelSystem,
    pulses: &PulseSet,
    initial: &Amplitudes,
    grid: &TimeGrid,
    include_decay: bool,
) -> Result<Trajectory> {
    validate_initial(initial)?;
    let schedule = RabiSchedule::new(system, pulses);
    let n = grid.steps();
    let h = grid.step;
    let mut times = Vec::with_capacity(n + 1);
    let mut amplitudes = Vec::with_capacity(n + 1);
    let mut psi = *initial;
    times.push(grid.t_start);
    amplitudes.push(psi);
    let f = |t: f64, y: &Amplitudes| rhs(system, &schedule, include_decay, t, y);
    for i in 0..n {
        let t = grid.time(i);
        let k1 = f(t, &psi);
        let k2 = f(t + 0.5 * h, &axpy(&psi, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &axpy(&psi, &k2, 0.5 * h));
        let k4 = f(t + h, &axpy(&psi, &k3, h));
        for j in 0..5 {
            psi[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
        times.push(grid.time(i + 1));
        amplitudes.push(psi);
    }
    let decay_rates = if include_decay { (system.decay_rate_3, system.decay_rate_4) } else { (0.0, 0.0) };
    Ok(Trajectory { grid: *grid, times, amplitudes, convergence: None, decay_rates })
}

/// Propagate with step halving until final populations (product yields when
/// decay is on) agree to `settings.tolerance`; returns the finest run.
pub fn propagate_converged(
    system: &FiveLevelSystem,
    pulses: &PulseSet,
    initial: &Amplitudes,
    grid: &TimeGrid,
    settings: &PropagationSettings,
) -> Result<Trajectory> {
    let mut coarse = propagate_fixed(system, pulses, initial, grid, settings.include_decay)?;
    let mut current = *grid;
    let mut change = f64::INFINITY;
    for round in 1..=settings.max_refinements.max(1) {
        current = current.refined();
        let mut fine = propagate_fixed(system, pulses, initial, &current, settings.include_decay)?;
        let a = coarse.final_yields();
        let b = fine.final_yields();
        change = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if change < settings.tolerance {
            fine.convergence = Some(Convergence { step: current.step, refinements: round, final_population_change: change });
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::GridTooCoarse { step: current.step, change })
}

pub fn propagate(
    system: &FiveLevelSystem,
    pulses: &PulseSet,
    initial: &Amplitudes,
    grid: &TimeGrid,
    include_decay: bool,
) -> Result<Trajectory> {
    let settings = PropagationSettings { include_decay, ..Default::default() };
    propagate_converged(system, pulses, initial, grid, &settings)
}

/// Trapezoid rule on uniformly spaced samples.
fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// First-order decay yield `2Γ ∫ |⟨λ₁(t)|level⟩|² dt` in the adiabatic limit.
pub fn perturbative_yield(
    system: &FiveLevelSystem,
    pulses: &PulseSet,
    grid: &TimeGrid,
    level: ProductLevel,
) -> Result<f64> {
    let gamma = match level {
        ProductLevel::Level3 => system.decay_rate_3,
        ProductLevel::Level4 => system.decay_rate_4,
    };
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let schedule = RabiSchedule::new(system, pulses);
    let overlaps = grid
        .times()
        .map(|t| null_eigenvector(&schedule.at(t)).map(|v| v.population(level.level())))
        .collect::<Result<Vec<_>>>()?;
    Ok(2.0 * gamma * trapezoid(&overlaps, grid.step))
}

/// Accumulated decay loss `2Γ ∫ P(t) dt` from a propagated trajectory.
pub fn accumulated_decay(trajectory: &Trajectory, system: &FiveLevelSystem, level: ProductLevel) -> f64 {
    let gamma = match level {
        ProductLevel::Level3 => system.decay_rate_3,
        ProductLevel::Level4 => system.decay_rate_4,
    };
    let pops: Vec<f64> = trajectory.amplitudes.iter().map(|a| a[level.level() - 1].norm_sqr()).collect();
    2.0 * gamma * trapezoid(&pops, trajectory.grid.step)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostic {
    pub t: f64,
    /// Smallest nonzero `|λ|`: the gap separating the null state.
    pub gap: f64,
    /// `‖d|λ₁⟩/dt‖ / gap`; `None` where the null state is undefined.
    pub coupling_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticityReport {
    pub steps: Vec<StepDiagnostic>,
    pub min_gap: f64,
    pub max_coupling_ratio: f64,
}

impl AdiabaticityReport {
    /// Minimum gap over steps whose time lies in `[start, end]`.
    pub fn min_gap_within(&self, start: f64, end: f64) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.t >= start && s.t <= end)
            .map(|s| s.gap)
            .fold(f64::INFINITY, f64::min)
    }
}

fn null_state_at(schedule: &RabiSchedule, t: f64) -> Result<Option<NullEigenvector>> {
    match null_eigenvector(&schedule.at(t)) {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateCase) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Gap to the null state and the null state's rate of change relative to it,
/// at every grid point. The derivative is a central difference at grid
/// resolution of phase-aligned null vectors.
pub fn adiabaticity_report(system: &FiveLevelSystem, pulses: &PulseSet, grid: &TimeGrid) -> Result<AdiabaticityReport> {
    let schedule = RabiSchedule::new(system, pulses);
    let h = grid.step;
    let mut steps = Vec::with_capacity(grid.steps() + 1);
    for t in grid.times() {
        let gap = null_gap(&schedule.at(t));
        let coupling_ratio = match (null_state_at(&schedule, t)?, null_state_at(&schedule, t - h)?, null_state_at(&schedule, t + h)?) {
            (Some(mid), Some(before), Some(after)) if gap > 0.0 => {
                let before = before.aligned_with(&mid.components);
                let after = after.aligned_with(&mid.components);
                let deriv: f64 = after
                    .components
                    .iter()
                    .zip(&before.components)
                    .map(|(a, b)| ((a - b) / (2.0 * h)).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                Some(deriv / gap)
            }
            _ => None,
        };
        steps.push(StepDiagnostic { t, gap, coupling_ratio });
    }
    let min_gap = steps.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
    let max_coupling_ratio = steps.iter().filter_map(|s| s.coupling_ratio).fold(0.0, f64::max);
    Ok(AdiabaticityReport { steps, min_gap, max_coupling_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchingRatio {
    Finite(f64),
    Infinite,
}

impl BranchingRatio {
    pub fn value(self) -> f64 {
        match self {
            BranchingRatio::Finite(b) => b,
            BranchingRatio::Infinite => f64::INFINITY,
        }
    }
}

/// `B = P₄(t_end) / P₃(t_end)`.
pub fn branching_ratio(trajectory: &Trajectory) -> Result<BranchingRatio> {
    let p = trajectory.final_populations();
    branching_ratio_from(p[2], p[3])
}

/// `B = P₄ / P₃` for explicit final values, e.g. product yields under decay.
pub fn branching_ratio_from(p3: f64, p4: f64) -> Result<BranchingRatio> {
    match (p3 < EMPTY_POPULATION, p4 < EMPTY_POPULATION) {
        (true, true) => Err(Error::Indeterminate),
        (true, false) => Ok(BranchingRatio::Infinite),
        _ => Ok(BranchingRatio::Finite(p4 / p3)),
    }
}

/// `|⟨λ₁(t)|ψ(t)⟩|²` along a trajectory; `None` where the null state is undefined.
pub fn null_state_fidelity(system: &FiveLevelSystem, pulses: &PulseSet, trajectory: &Trajectory) -> Vec<Option<f64>> {
    let schedule = RabiSchedule::new(system, pulses);
    trajectory
        .times
        .iter()
        .zip(&trajectory.amplitudes)
        .map(|(&t, psi)| null_eigenvector(&schedule.at(t)).ok().map(|v| v.fidelity(psi)))
        .collect()
}

pub fn zero_state() -> Amplitudes {
    [ZERO; 5]
}
