//! Log-barrier Newton solver for the trajectory surrogate.
//!
//! The surrogate is a separable concave quadratic in the waypoints and the
//! speed limits are a chain of balls, so the barrier Hessian is
//! block-tridiagonal with 2x2 blocks. Positions are scaled by `D_u`
//! internally so every ball has unit radius.

use super::banded::{Block2, BlockTridiagonal};
use super::TrajectorySubproblem;
use crate::error::{Error, Result};
use crate::scenario::{Endpoints, SolverParams, Trajectory, Waypoint};

/// Newton decrement (squared, halved) that ends a centering stage.
const CENTERING_TOLERANCE: f64 = 1e-11;
/// Below this decrement the full Newton step is taken.
const QUADRATIC_REGION: f64 = 0.25;
/// Share of the objective allotted to the barrier in the first stage.
const INITIAL_GAP_SHARE: f64 = 0.1;
/// Interpolation weight toward a strictly feasible reference when the
/// starting point touches a speed constraint.
const BOUNDARY_SHRINK: f64 = 1e-6;
const MAX_STAGES: usize = 64;

#[derive(Debug, Clone)]
pub struct QcqpSolution {
    pub trajectory: Trajectory,
    /// Multipliers of the speed constraints `|p_a - p_b|^2 <= D_u^2` in
    /// flight order (launch leg first when endpoints are fixed), 1/m^2.
    pub multipliers: Vec<f64>,
    /// Max of normalized stationarity and relative duality gap.
    pub kkt_residual: f64,
    /// Surrogate value at `trajectory`.
    pub objective: f64,
    pub newton_iterations: usize,
}

/// One speed constraint: the difference `v[to] - v[from]` where either side
/// may be a fixed endpoint.
#[derive(Debug, Clone, Copy)]
enum Leg {
    Launch,
    Chain(usize),
    Landing,
}

struct Barrier<'a> {
    sub: &'a TrajectorySubproblem,
    n: usize,
    scale: f64,
    /// Destination x-coordinate in scaled units.
    target: f64,
    start: Option<[f64; 2]>,
    end: Option<[f64; 2]>,
    legs: Vec<Leg>,
}

impl<'a> Barrier<'a> {
    fn new(sub: &'a TrajectorySubproblem) -> Self {
        let n = sub.toward_source.len();
        let scale = sub.max_step;
        let (start, end) = match sub.endpoints {
            Endpoints::Free => (None, None),
            Endpoints::Fixed { start, end } => (
                Some([start.x / scale, start.y / scale]),
                Some([end.x / scale, end.y / scale]),
            ),
        };
        let mut legs = Vec::with_capacity(n + 1);
        if start.is_some() {
            legs.push(Leg::Launch);
        }
        legs.extend((0..n.saturating_sub(1)).map(Leg::Chain));
        if end.is_some() {
            legs.push(Leg::Landing);
        }
        Self {
            sub,
            n,
            scale,
            target: sub.distance / scale,
            start,
            end,
            legs,
        }
    }

    fn difference(&self, u: &[[f64; 2]], leg: Leg) -> [f64; 2] {
        let (a, b) = match leg {
            Leg::Launch => (self.start.unwrap(), u[0]),
            Leg::Chain(k) => (u[k], u[k + 1]),
            Leg::Landing => (u[self.n - 1], self.end.unwrap()),
        };
        [b[0] - a[0], b[1] - a[1]]
    }

    fn slack(&self, u: &[[f64; 2]], leg: Leg) -> f64 {
        let d = self.difference(u, leg);
        1.0 - d[0] * d[0] - d[1] * d[1]
    }

    fn min_slack(&self, u: &[[f64; 2]]) -> f64 {
        self.legs
            .iter()
            .map(|&l| self.slack(u, l))
            .fold(f64::INFINITY, f64::min)
    }

    /// Weighted squared distances `sum c_s theta_s + c_u theta_u` in m^2
    /// units; the surrogate is `offset - cost`.
    fn cost(&self, u: &[[f64; 2]]) -> f64 {
        let s2 = self.scale * self.scale;
        let h2 = self.sub.altitude * self.sub.altitude;
        u.iter()
            .enumerate()
            .map(|(k, p)| {
                let cs = self.sub.toward_source[k];
                let cu = self.sub.toward_destination[k];
                let dx = p[0] - self.target;
                cs * (s2 * (p[0] * p[0] + p[1] * p[1]) + h2)
                    + cu * (s2 * (dx * dx + p[1] * p[1]) + h2)
            })
            .sum()
    }

    fn cost_gradient(&self, u: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let s2 = self.scale * self.scale;
        u.iter()
            .enumerate()
            .map(|(k, p)| {
                let cs = self.sub.toward_source[k];
                let cu = self.sub.toward_destination[k];
                [
                    2.0 * s2 * (cs * p[0] + cu * (p[0] - self.target)),
                    2.0 * s2 * (cs + cu) * p[1],
                ]
            })
            .collect()
    }

    /// `t * cost - sum log(slack)`, or `None` outside the domain.
    fn value(&self, u: &[[f64; 2]], t: f64) -> Option<f64> {
        let mut log_sum = 0.0;
        for &leg in &self.legs {
            let s = self.slack(u, leg);
            if !(s > 0.0) {
                return None;
            }
            log_sum += s.ln();
        }
        Some(t * self.cost(u) - log_sum)
    }

    fn newton_system(&self, u: &[[f64; 2]], t: f64) -> (BlockTridiagonal, Vec<[f64; 2]>) {
        let s2 = self.scale * self.scale;
        let mut hess = BlockTridiagonal::zeros(self.n);
        let mut grad = self.cost_gradient(u);
        for (k, g) in grad.iter_mut().enumerate() {
            g[0] *= t;
            g[1] *= t;
            let c = self.sub.toward_source[k] + self.sub.toward_destination[k];
            hess.diag[k] = Block2::scaled_identity(2.0 * t * s2 * c);
        }
        for &leg in &self.legs {
            let d = self.difference(u, leg);
            let s = 1.0 - d[0] * d[0] - d[1] * d[1];
            // -log(1 - |d|^2): gradient 2d/s, Hessian 2I/s + 4dd^T/s^2.
            let gd = [2.0 * d[0] / s, 2.0 * d[1] / s];
            let h = Block2::identity_plus_outer(2.0 / s, 4.0 / (s * s), d);
            match leg {
                Leg::Launch => {
                    grad[0][0] += gd[0];
                    grad[0][1] += gd[1];
                    hess.diag[0] = hess.diag[0].add(&h);
                }
                Leg::Chain(k) => {
                    grad[k][0] -= gd[0];
                    grad[k][1] -= gd[1];
                    grad[k + 1][0] += gd[0];
                    grad[k + 1][1] += gd[1];
                    hess.add_difference_term(k, &h);
                }
                Leg::Landing => {
                    let last = self.n - 1;
                    grad[last][0] -= gd[0];
                    grad[last][1] -= gd[1];
                    hess.diag[last] = hess.diag[last].add(&h);
                }
            }
        }
        (hess, grad)
    }

    /// Multiplier estimates `1 / (t s)` converted to meter units.
    fn multipliers(&self, u: &[[f64; 2]], t: f64) -> Vec<f64> {
        let s2 = self.scale * self.scale;
        self.legs
            .iter()
            .map(|&leg| 1.0 / (t * self.slack(u, leg) * s2))
            .collect()
    }

    /// Normalizer for stationarity: the largest gradient magnitude the
    /// cost can produce over the S-D span.
    fn gradient_scale(&self) -> f64 {
        let cmax = (0..self.n)
            .map(|k| self.sub.toward_source[k] + self.sub.toward_destination[k])
            .fold(0.0, f64::max);
        2.0 * cmax * self.sub.distance.max(self.sub.max_step)
    }

    fn kkt_residual(&self, u: &[[f64; 2]], t: f64) -> f64 {
        let (_, grad) = self.newton_system(u, t);
        // grad / t is the Lagrangian gradient in scaled coordinates.
        let stationarity = grad
            .iter()
            .flat_map(|g| [g[0].abs(), g[1].abs()])
            .fold(0.0, f64::max)
            / (t * self.scale)
            / self.gradient_scale();
        let gap = self.legs.len() as f64 / t / self.cost(u).max(f64::MIN_POSITIVE);
        stationarity.max(gap)
    }

    fn to_trajectory(&self, u: &[[f64; 2]]) -> Trajectory {
        Trajectory::new(
            u.iter()
                .map(|p| Waypoint::new(p[0] * self.scale, p[1] * self.scale))
                .collect(),
        )
    }

    /// Strictly feasible reference trajectory in scaled units.
    fn reference(&self, u: &[[f64; 2]]) -> Vec<[f64; 2]> {
        match (self.start, self.end) {
            (Some(a), Some(b)) => (0..self.n)
                .map(|k| {
                    let f = (k + 1) as f64 / (self.n + 1) as f64;
                    [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
                })
                .collect(),
            _ => {
                let m = self.n as f64;
                let cx = u.iter().map(|p| p[0]).sum::<f64>() / m;
                let cy = u.iter().map(|p| p[1]).sum::<f64>() / m;
                vec![[cx, cy]; self.n]
            }
        }
    }
}

/// Maximizes the surrogate subject to the speed constraints.
pub fn solve_qcqp(sub: &TrajectorySubproblem, params: &SolverParams) -> Result<QcqpSolution> {
    let barrier = Barrier::new(sub);
    let n = barrier.n;
    if n == 0 || sub.expansion.len() != n || sub.toward_destination.len() != n {
        return Err(Error::InvalidArgument("malformed trajectory subproblem".into()));
    }
    let expansion_value = sub.surrogate(&sub.expansion);
    let flat = (0..n).all(|k| sub.toward_source[k] + sub.toward_destination[k] == 0.0);
    if flat {
        return Ok(QcqpSolution {
            trajectory: sub.expansion.clone(),
            multipliers: vec![0.0; barrier.legs.len()],
            kkt_residual: 0.0,
            objective: expansion_value,
            newton_iterations: 0,
        });
    }

    let mut u: Vec<[f64; 2]> = sub
        .expansion
        .waypoints
        .iter()
        .map(|p| [p.x / barrier.scale, p.y / barrier.scale])
        .collect();
    if barrier.min_slack(&u) < 1e-12 {
        let reference = barrier.reference(&u);
        for (p, q) in u.iter_mut().zip(&reference) {
            p[0] = (1.0 - BOUNDARY_SHRINK) * p[0] + BOUNDARY_SHRINK * q[0];
            p[1] = (1.0 - BOUNDARY_SHRINK) * p[1] + BOUNDARY_SHRINK * q[1];
        }
        if !(barrier.min_slack(&u) > 0.0) {
            return Err(Error::Infeasible(
                "expansion point is not feasible for the speed constraints".into(),
            ));
        }
    }

    let m = barrier.legs.len() as f64;
    let mut t = if barrier.legs.is_empty() {
        1.0
    } else {
        m / (INITIAL_GAP_SHARE * barrier.cost(&u).max(f64::MIN_POSITIVE))
    };
    let mut used = 0usize;
    let mut stages = 0usize;
    let not_converged = |u: &[[f64; 2]], t: f64| Error::NotConverged {
        residual: barrier.kkt_residual(u, t),
        best: Box::new(barrier.to_trajectory(u)),
    };

    loop {
        // Centering.
        loop {
            if used >= params.newton_max_iterations {
                return Err(not_converged(&u, t));
            }
            let (hess, grad) = barrier.newton_system(&u, t);
            let rhs: Vec<[f64; 2]> = grad.iter().map(|g| [-g[0], -g[1]]).collect();
            let step = hess.solve(&rhs)?;
            let decrement2: f64 = grad
                .iter()
                .zip(&step)
                .map(|(g, s)| -(g[0] * s[0] + g[1] * s[1]))
                .sum();
            if decrement2 / 2.0 <= CENTERING_TOLERANCE {
                break;
            }
            used += 1;
            let current = barrier.value(&u, t).expect("iterate stays interior");
            let mut alpha = if decrement2.sqrt() < QUADRATIC_REGION {
                1.0
            } else {
                1.0 / (1.0 + decrement2.sqrt())
            };
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<[f64; 2]> = u
                    .iter()
                    .zip(&step)
                    .map(|(p, s)| [p[0] + alpha * s[0], p[1] + alpha * s[1]])
                    .collect();
                if let Some(v) = barrier.value(&trial, t) {
                    if v <= current - 0.25 * alpha * decrement2 || decrement2.sqrt() < QUADRATIC_REGION
                    {
                        u = trial;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                // No representable progress left at this barrier weight.
                break;
            }
        }

        let residual = barrier.kkt_residual(&u, t);
        if residual <= params.barrier_tolerance || barrier.legs.is_empty() {
            let trajectory = barrier.to_trajectory(&u);
            let objective = sub.surrogate(&trajectory);
            let (trajectory, objective) = if objective < expansion_value {
                (sub.expansion.clone(), expansion_value)
            } else {
                (trajectory, objective)
            };
            return Ok(QcqpSolution {
                trajectory,
                multipliers: barrier.multipliers(&u, t),
                kkt_residual: residual,
                objective,
                newton_iterations: used,
            });
        }
        stages += 1;
        if stages >= MAX_STAGES {
            return Err(not_converged(&u, t));
        }
        t *= params.barrier_growth;
    }
}
