//! UAV trajectory for a fixed pairing and power allocation.
//!
//! Each pair rate is jointly convex in the squared distances
//! `theta_s = |p_i - S|^2 + H^2` and `theta_u = |p_j - D|^2 + H^2`, so its
//! tangent plane in `(theta_s, theta_u)` is a global under-estimator that
//! matches the rate and its gradient w.r.t. the waypoints at the expansion
//! point. The resulting surrogate is a concave quadratic in the waypoints;
//! each SCA step maximizes it over the speed constraints.

pub mod banded;
mod barrier;

use std::f64::consts::LN_2;

pub use barrier::{solve_qcqp, QcqpSolution};

use crate::channel::{compute_gains, spectral_efficiency};
use crate::error::{Error, Result};
use crate::pairing::Pairing;
use crate::power::{pairing_rate, PowerProfile};
use crate::scenario::{Endpoints, ScenarioConfig, SolverParams, Trajectory};

/// Pair rate as a function of received-power scale `beta = P gamma0` and
/// squared distances `theta`.
pub fn distance_rate(beta_s: f64, beta_u: f64, theta_s: f64, theta_u: f64) -> f64 {
    if beta_s == 0.0 || beta_u == 0.0 {
        return 0.0;
    }
    let f = beta_u * theta_s + beta_s * theta_u + theta_s * theta_u;
    spectral_efficiency(beta_s * beta_u / f)
}

/// Negated partial derivatives `(B_s, B_u)` of [`distance_rate`] w.r.t.
/// `theta_s` and `theta_u`.
pub fn distance_slopes(beta_s: f64, beta_u: f64, theta_s: f64, theta_u: f64) -> (f64, f64) {
    let f = beta_u * theta_s + beta_s * theta_u + theta_s * theta_u;
    let num = beta_s * beta_u;
    (
        num / (f * (beta_s + theta_s) * LN_2),
        num / (f * (beta_u + theta_u) * LN_2),
    )
}

fn theta_source(config: &ScenarioConfig, x: f64, y: f64) -> f64 {
    x * x + y * y + config.altitude * config.altitude
}

fn theta_destination(config: &ScenarioConfig, x: f64, y: f64) -> f64 {
    let dx = x - config.distance;
    dx * dx + y * y + config.altitude * config.altitude
}

/// Tangent slopes for every pair with non-zero power on both hops.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCoefficients {
    pub pairs: Vec<(usize, usize)>,
    pub source: Vec<f64>,
    pub destination: Vec<f64>,
    /// Pair rate at the expansion point.
    pub local_rate: Vec<f64>,
    /// `(theta_s, theta_u)` at the expansion point.
    pub local_theta: Vec<(f64, f64)>,
}

pub fn tangent_bound_coefficients(
    pairing: &Pairing,
    powers: &PowerProfile,
    local: &Trajectory,
    config: &ScenarioConfig,
) -> Result<TangentCoefficients> {
    local.check(config)?;
    let mut out = TangentCoefficients {
        pairs: Vec::new(),
        source: Vec::new(),
        destination: Vec::new(),
        local_rate: Vec::new(),
        local_theta: Vec::new(),
    };
    for &(i, j) in &pairing.pairs {
        let beta_s = powers.source[i] * config.gamma0;
        let beta_u = powers.uav[j] * config.gamma0;
        if beta_s == 0.0 || beta_u == 0.0 {
            continue;
        }
        let (pi, pj) = (local.waypoints[i], local.waypoints[j]);
        let ts = theta_source(config, pi.x, pi.y);
        let tu = theta_destination(config, pj.x, pj.y);
        let (bs, bu) = distance_slopes(beta_s, beta_u, ts, tu);
        out.pairs.push((i, j));
        out.source.push(bs);
        out.destination.push(bu);
        out.local_rate.push(distance_rate(beta_s, beta_u, ts, tu));
        out.local_theta.push((ts, tu));
    }
    Ok(out)
}

/// Concave quadratic surrogate over the waypoints:
/// `offset - sum_k (c_s[k] theta_s[k] + c_u[k] theta_u[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySubproblem {
    pub distance: f64,
    pub altitude: f64,
    pub max_step: f64,
    pub endpoints: Endpoints,
    /// Per-slot weight on the squared distance to S (sum of `B_s` of the pair
    /// receiving in that slot).
    pub toward_source: Vec<f64>,
    /// Per-slot weight on the squared distance to D.
    pub toward_destination: Vec<f64>,
    pub offset: f64,
    pub expansion: Trajectory,
}

impl TrajectorySubproblem {
    pub fn new(config: &ScenarioConfig, coeffs: &TangentCoefficients, expansion: Trajectory) -> Self {
        let n = config.slots;
        let mut toward_source = vec![0.0; n];
        let mut toward_destination = vec![0.0; n];
        let mut offset = 0.0;
        for (p, &(i, j)) in coeffs.pairs.iter().enumerate() {
            toward_source[i] += coeffs.source[p];
            toward_destination[j] += coeffs.destination[p];
            let (ts, tu) = coeffs.local_theta[p];
            offset += coeffs.local_rate[p] + coeffs.source[p] * ts + coeffs.destination[p] * tu;
        }
        Self {
            distance: config.distance,
            altitude: config.altitude,
            max_step: config.max_step(),
            endpoints: config.endpoints,
            toward_source,
            toward_destination,
            offset,
            expansion,
        }
    }

    /// Surrogate value at `traj`.
    pub fn surrogate(&self, traj: &Trajectory) -> f64 {
        let h2 = self.altitude * self.altitude;
        let cost: f64 = traj
            .waypoints
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let dx = p.x - self.distance;
                self.toward_source[k] * (p.x * p.x + p.y * p.y + h2)
                    + self.toward_destination[k] * (dx * dx + p.y * p.y + h2)
            })
            .sum();
        self.offset - cost
    }
}

/// True objective of the trajectory step: total rate of matched pairs.
pub fn trajectory_rate(
    pairing: &Pairing,
    powers: &PowerProfile,
    traj: &Trajectory,
    config: &ScenarioConfig,
) -> f64 {
    pairing_rate(pairing, &compute_gains(config, traj), powers)
}

#[derive(Debug, Clone)]
pub struct TrajectorySolution {
    pub trajectory: Trajectory,
    /// True objective after each accepted SCA step; first entry is `init`.
    pub trace: Vec<f64>,
    /// Subproblems that hit the Newton budget and returned their best iterate.
    pub unconverged_subproblems: usize,
}

pub fn solve_trajectory(
    pairing: &Pairing,
    powers: &PowerProfile,
    init: &Trajectory,
    config: &ScenarioConfig,
    params: &SolverParams,
) -> Result<TrajectorySolution> {
    init.check(config)?;
    if powers.len() != config.slots {
        return Err(Error::InvalidArgument(format!(
            "power profile has {} slots, expected {}",
            powers.len(),
            config.slots
        )));
    }
    let mut current = init.clone();
    let mut value = trajectory_rate(pairing, powers, &current, config);
    let mut trace = vec![value];
    let mut unconverged = 0;
    for _ in 0..params.trajectory_max_iterations {
        let coeffs = tangent_bound_coefficients(pairing, powers, &current, config)?;
        if coeffs.pairs.is_empty() {
            break;
        }
        let sub = TrajectorySubproblem::new(config, &coeffs, current.clone());
        let candidate = match solve_qcqp(&sub, params) {
            Ok(sol) => sol.trajectory,
            Err(Error::NotConverged { residual, best }) => {
                log::debug!("trajectory subproblem stopped at kkt residual {residual:.3e}");
                unconverged += 1;
                *best
            }
            Err(e) => return Err(e),
        };
        if candidate.check(config).is_err() {
            break;
        }
        let next_value = trajectory_rate(pairing, powers, &candidate, config);
        if next_value < value {
            break;
        }
        let gain = (next_value - value) / value.abs().max(f64::MIN_POSITIVE);
        current = candidate;
        value = next_value;
        trace.push(value);
        if gain < params.trajectory_tolerance {
            break;
        }
    }
    Ok(TrajectorySolution {
        trajectory: current,
        trace,
        unconverged_subproblems: unconverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Waypoint;
    use approx::assert_relative_eq;

    #[test]
    fn slopes_by_hand() {
        let (bs, bu) = distance_slopes(1.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(bs, 1.0 / (6.0 * LN_2), max_relative = 1e-15);
        assert_eq!(bs, bu);
        let (far_s, far_u) = distance_slopes(1.0, 1.0, 1e6, 1e6);
        assert!(far_s < 1e-12 && far_u < 1e-12);
    }

    #[test]
    fn zero_power_pairs_are_dropped() {
        let config = ScenarioConfig::default().with_slots(3);
        let traj = Trajectory::straight_line(&config);
        let mut powers = PowerProfile::uniform(3, config.energy_source, config.energy_uav);
        powers.source[1] = 0.0;
        let c = tangent_bound_coefficients(&Pairing::identity(3), &powers, &traj, &config).unwrap();
        assert_eq!(c.pairs, vec![(0, 0), (2, 2)]);
    }

    #[test]
    fn surrogate_matches_rate_at_expansion() {
        let config = ScenarioConfig::default().with_slots(5);
        let traj = Trajectory::new(
            (0..5)
                .map(|k| Waypoint::new(300.0 + 7.0 * k as f64, 20.0 - 3.0 * k as f64))
                .collect(),
        );
        let powers = PowerProfile::uniform(5, config.energy_source, config.energy_uav);
        let pairing = Pairing::new(vec![(0, 4), (1, 1), (2, 3)]);
        let coeffs = tangent_bound_coefficients(&pairing, &powers, &traj, &config).unwrap();
        let sub = TrajectorySubproblem::new(&config, &coeffs, traj.clone());
        assert_relative_eq!(
            sub.surrogate(&traj),
            trajectory_rate(&pairing, &powers, &traj, &config),
            max_relative = 1e-12
        );
    }

    fn uniform(config: &ScenarioConfig) -> PowerProfile {
        PowerProfile::uniform(config.slots, config.energy_source, config.energy_uav)
    }

    #[test]
    fn single_slot_goes_to_midpoint() {
        let config = ScenarioConfig::default().with_slots(1);
        let init = Trajectory::new(vec![Waypoint::new(200.0, 50.0)]);
        let sol =
            solve_trajectory(&Pairing::identity(1), &uniform(&config), &init, &config, &config.solver)
                .unwrap();
        let p = sol.trajectory.waypoints[0];
        assert!((p.x - 1000.0).abs() < 1e-3 * config.distance && p.y.abs() < 1e-3 * config.distance);
    }

    #[test]
    fn stretched_chain_binds_every_step() {
        // Only the first and last slot carry data, and they are too far apart
        // for both to sit above their nodes.
        let mut config = ScenarioConfig::default().with_slots(5);
        config.max_speed = 5.0;
        let d_u = config.max_step();
        assert_eq!(d_u, 100.0);
        let pairing = Pairing::new(vec![(0, 4)]);
        let powers = uniform(&config);
        let init = Trajectory::straight_line(&config);
        let coeffs = tangent_bound_coefficients(&pairing, &powers, &init, &config).unwrap();
        let sub = TrajectorySubproblem::new(&config, &coeffs, init);
        let sol = solve_qcqp(&sub, &config.solver).unwrap();
        assert!(sol.kkt_residual < 1e-6);
        let w = &sol.trajectory.waypoints;
        for pair in w.windows(2) {
            let step = pair[0].dist2(pair[1]).sqrt();
            assert!((step - d_u).abs() < 1e-6 * d_u, "step {step}");
        }

        // 1-D brute force over the first waypoint with the chain fully
        // stretched along the axis.
        let (cs, cu) = (sub.toward_source[0], sub.toward_destination[4]);
        let span = 4.0 * d_u;
        let best = (0..=200_000)
            .map(|k| k as f64 * config.distance / 200_000.0)
            .min_by(|a, b| {
                let f = |x: f64| cs * x * x + cu * (x + span - config.distance).powi(2);
                f(*a).total_cmp(&f(*b))
            })
            .unwrap();
        assert!((w[0].x - best).abs() < 0.02, "{} vs {best}", w[0].x);
        assert!(w.iter().all(|p| p.y.abs() < 1e-9));
    }

    #[test]
    fn axis_is_preserved() {
        let config = ScenarioConfig::default().with_slots(30);
        let pairing = Pairing::new((0..10).map(|i| (i, 29 - i)).chain((10..20).map(|i| (i, i))).collect());
        let init = Trajectory::straight_line(&config);
        let sol = solve_trajectory(&pairing, &uniform(&config), &init, &config, &config.solver).unwrap();
        assert!(sol.trace.len() > 1);
        assert!(sol.trajectory.waypoints.iter().all(|p| p.y.abs() < 1e-9));
        for w in sol.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        sol.trajectory.check(&config).unwrap();
    }

    #[test]
    fn optimal_expansion_is_a_fixed_point() {
        let config = ScenarioConfig::default().with_slots(1);
        let mid = Trajectory::new(vec![Waypoint::new(1000.0, 0.0)]);
        let powers = uniform(&config);
        let coeffs = tangent_bound_coefficients(&Pairing::identity(1), &powers, &mid, &config).unwrap();
        let sub = TrajectorySubproblem::new(&config, &coeffs, mid.clone());
        let sol = solve_qcqp(&sub, &config.solver).unwrap();
        let before = sub.surrogate(&mid);
        assert!((sol.objective - before).abs() <= 1e-9 * before.abs());
    }
}
