//! Alternating optimization over pairing, power and trajectory, plus the
//! IAF and static-AF baselines.

use serde::{Deserialize, Serialize};

use crate::channel::{compute_gains, rate_matrix};
use crate::error::{Error, Result};
use crate::pairing::{solve_pairing, Pairing};
use crate::power::{pairing_rate, solve_power, PowerProfile};
use crate::scenario::{AoMeasure, Endpoints, ScenarioConfig, Trajectory, Waypoint};
use crate::trajectory::solve_trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    IterationCapped,
}

/// Buffering delay over matched pairs, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayStats {
    pub mean_s: f64,
    pub max_s: f64,
}

impl DelayStats {
    pub fn of(pairing: &Pairing, slot_duration: f64) -> Self {
        if pairing.is_empty() {
            return Self::default();
        }
        let total: usize = pairing.delays().sum();
        let max = pairing.delays().max().unwrap_or(0);
        Self {
            mean_s: total as f64 / pairing.len() as f64 * slot_duration,
            max_s: max as f64 * slot_duration,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub pairing: Pairing,
    pub powers: PowerProfile,
    pub trajectory: Trajectory,
    /// Average spectral efficiency (bps/Hz) after each AO iteration.
    pub objective_trace: Vec<f64>,
    pub delay_stats: DelayStats,
    pub iterations: usize,
    pub status: Status,
    /// Trajectory subproblems that stopped at their Newton budget.
    pub unconverged_subproblems: usize,
}

impl SolveResult {
    /// Final average spectral efficiency, bps/Hz.
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }
}

/// Average spectral efficiency `(1/N) sum R[i][j]` over matched pairs.
pub fn average_rate(
    config: &ScenarioConfig,
    pairing: &Pairing,
    powers: &PowerProfile,
    traj: &Trajectory,
) -> f64 {
    pairing_rate(pairing, &compute_gains(config, traj), powers) / config.slots as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairingRule {
    /// Maximum-weight matching under the config's delay mask.
    Matched,
    Identity,
}

struct State {
    pairing: Pairing,
    powers: PowerProfile,
    trajectory: Trajectory,
    trace: Vec<f64>,
    iterations: usize,
    unconverged: usize,
}

impl State {
    fn snapshot(&self, config: &ScenarioConfig, status: Status) -> SolveResult {
        SolveResult {
            pairing: self.pairing.clone(),
            powers: self.powers.clone(),
            trajectory: self.trajectory.clone(),
            objective_trace: self.trace.clone(),
            delay_stats: DelayStats::of(&self.pairing, config.slot_duration()),
            iterations: self.iterations,
            status,
            unconverged_subproblems: self.unconverged,
        }
    }
}

/// Keeps matched slots strictly positive so the reciprocal SCA is defined.
fn clamp_matched(powers: &PowerProfile, pairing: &Pairing, config: &ScenarioConfig) -> PowerProfile {
    let n = config.slots;
    let floor_s = 1e-12 * config.energy_source / n as f64;
    let floor_u = 1e-12 * config.energy_uav / n as f64;
    let mut out = PowerProfile::zeros(n);
    for &(i, j) in &pairing.pairs {
        out.source[i] = powers.source[i].max(floor_s);
        out.uav[j] = powers.uav[j].max(floor_u);
    }
    out
}

fn ao_step(config: &ScenarioConfig, rule: PairingRule, state: &State) -> Result<State> {
    let pairing = match rule {
        PairingRule::Identity => Pairing::identity(config.slots),
        PairingRule::Matched => {
            solve_pairing(&rate_matrix(config, &state.trajectory, &state.powers)?)?
        }
    };
    let gains = compute_gains(config, &state.trajectory);
    let init = clamp_matched(&state.powers, &pairing, config);
    let power = solve_power(
        &pairing,
        &gains,
        &init,
        config.energy_source,
        config.energy_uav,
        &config.solver,
    )?;
    // Pairs whose power vanished carry no rate and are dropped.
    let pairing = Pairing::new(
        pairing
            .pairs
            .iter()
            .copied()
            .filter(|&(i, j)| power.powers.source[i] > 0.0 && power.powers.uav[j] > 0.0)
            .collect(),
    );
    let traj = solve_trajectory(
        &pairing,
        &power.powers,
        &state.trajectory,
        config,
        &config.solver,
    )?;
    let objective = average_rate(config, &pairing, &power.powers, &traj.trajectory);
    let mut trace = state.trace.clone();
    trace.push(objective);
    Ok(State {
        pairing,
        powers: power.powers,
        trajectory: traj.trajectory,
        trace,
        iterations: state.iterations + 1,
        unconverged: state.unconverged + traj.unconverged_subproblems,
    })
}

fn run_ao(config: &ScenarioConfig, rule: PairingRule) -> Result<SolveResult> {
    config.validate()?;
    let n = config.slots;
    let mut state = State {
        pairing: Pairing::new(Vec::new()),
        powers: PowerProfile::uniform(n, config.energy_source, config.energy_uav),
        trajectory: Trajectory::straight_line(config),
        trace: Vec::new(),
        iterations: 0,
        unconverged: 0,
    };
    let eps = match config.solver.ao_measure {
        AoMeasure::Total => config.solver.ao_tolerance / n as f64,
        AoMeasure::Average => config.solver.ao_tolerance,
    };
    while state.iterations < config.solver.ao_max_iterations {
        state = match ao_step(config, rule, &state) {
            Ok(next) => next,
            Err(e) => {
                return Err(Error::SubSolver {
                    source: Box::new(e),
                    last: Box::new(state.snapshot(config, Status::IterationCapped)),
                })
            }
        };
        log::debug!(
            "AO iteration {}: {:.9} bps/Hz, {} pairs",
            state.iterations,
            state.trace.last().unwrap(),
            state.pairing.len()
        );
        if let [.., prev, last] = state.trace[..] {
            if (last - prev).abs() < eps {
                return Ok(state.snapshot(config, Status::Converged));
            }
        }
    }
    Ok(state.snapshot(config, Status::IterationCapped))
}

/// Joint pairing, power and trajectory optimization (SAF).
///
/// Starts from uniform power and the straight-line trajectory and cycles
/// pairing, power and trajectory until the objective changes by less than
/// the AO tolerance. Honors `config.max_delay`.
pub fn solve_saf(config: &ScenarioConfig) -> Result<SolveResult> {
    run_ao(config, PairingRule::Matched)
}

/// SAF restricted to delays of at most `max_delay` slots.
pub fn solve_saf_delay_constrained(config: &ScenarioConfig, max_delay: usize) -> Result<SolveResult> {
    run_ao(&config.clone().with_max_delay(Some(max_delay)), PairingRule::Matched)
}

/// The same AO loop with every slot forwarded immediately (IAF).
pub fn solve_iaf(config: &ScenarioConfig) -> Result<SolveResult> {
    run_ao(config, PairingRule::Identity)
}

/// Best fixed hover point on the S-D axis with uniform power and immediate
/// forwarding. `grid_points` positions are spaced evenly over `[0, L]`;
/// with fixed endpoints only positions reachable from both are considered.
pub fn solve_static_af(config: &ScenarioConfig, grid_points: usize) -> Result<SolveResult> {
    config.validate()?;
    if grid_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "static AF needs at least 2 grid points (got {grid_points})"
        )));
    }
    let n = config.slots;
    let pairing = Pairing::identity(n);
    let powers = PowerProfile::uniform(n, config.energy_source, config.energy_uav);
    let mut best: Option<(f64, Trajectory)> = None;
    for g in 0..grid_points {
        let x = config.distance * g as f64 / (grid_points - 1) as f64;
        let traj = Trajectory::constant(Waypoint::new(x, 0.0), n);
        if matches!(config.endpoints, Endpoints::Fixed { .. }) && traj.check(config).is_err() {
            continue;
        }
        let value = average_rate(config, &pairing, &powers, &traj);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, traj));
        }
    }
    let (value, trajectory) = best.ok_or_else(|| {
        Error::Infeasible("no static hover point on the S-D axis is reachable from both endpoints".into())
    })?;
    Ok(SolveResult {
        delay_stats: DelayStats::of(&pairing, config.slot_duration()),
        pairing,
        powers,
        trajectory,
        objective_trace: vec![value],
        iterations: 1,
        status: Status::Converged,
        unconverged_subproblems: 0,
    })
}
