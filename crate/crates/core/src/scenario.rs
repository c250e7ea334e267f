//! Problem instance description and the UAV trajectory type.
//!
//! Geometry: the source sits at the origin, the destination at `(L, 0)`,
//! and the UAV flies at constant altitude `H`. Powers are in milliwatts and
//! `gamma0` is the reference SNR at 1 m per milliwatt, so a gain
//! `gamma0 / d^2` multiplied by a power gives a linear SNR. Reference SNRs
//! quoted in dB are per watt of transmit power (see [`gamma0_from_db`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed on squared per-slot displacement.
pub const SPEED_TOLERANCE: f64 = 1e-9;

/// Converts a level in dB (or dBm) to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Per-milliwatt `gamma0` from a reference SNR in dB per watt.
///
/// -169 dBm/Hz over 20 MHz is -96 dBm of noise and the 5 GHz free-space
/// loss at 1 m is about 46.4 dB, so 80 dB is the SNR of a 1 W transmitter.
pub fn gamma0_from_db(db_per_watt: f64) -> f64 {
    db_to_linear(db_per_watt - 30.0)
}

/// Inverse of [`gamma0_from_db`].
pub fn gamma0_to_db(gamma0: f64) -> f64 {
    10.0 * gamma0.log10() + 30.0
}

/// Quantity whose change ends the AO loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoMeasure {
    /// Sum of pair rates over all slots, bps/Hz.
    #[default]
    Total,
    /// Sum of pair rates divided by `N`.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
}

impl Waypoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, other: Waypoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Launch/landing handling for the speed constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Endpoints {
    /// Only consecutive waypoints are coupled.
    Free,
    /// The first waypoint must be reachable from `start` and `end` from the
    /// last waypoint within one slot.
    Fixed { start: Waypoint, end: Waypoint },
}

/// Tolerances and iteration caps of the nested solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Stop AO when `ao_measure` changes by less than this.
    pub ao_tolerance: f64,
    pub ao_measure: AoMeasure,
    pub ao_max_iterations: usize,
    /// Relative objective improvement that ends the power SCA loop.
    pub power_tolerance: f64,
    pub power_max_iterations: usize,
    /// Relative objective improvement that ends the trajectory SCA loop.
    pub trajectory_tolerance: f64,
    pub trajectory_max_iterations: usize,
    /// Target KKT residual of each trajectory subproblem.
    pub barrier_tolerance: f64,
    /// Factor applied to the barrier weight between centering stages.
    pub barrier_growth: f64,
    /// Newton step budget across all barrier stages of one subproblem.
    pub newton_max_iterations: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            ao_tolerance: 0.01,
            ao_measure: AoMeasure::Total,
            ao_max_iterations: 100,
            power_tolerance: 1e-6,
            power_max_iterations: 50,
            trajectory_tolerance: 1e-6,
            trajectory_max_iterations: 30,
            barrier_tolerance: 1e-6,
            barrier_growth: 10.0,
            newton_max_iterations: 2000,
        }
    }
}

/// Physical and algorithmic parameters of one problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Horizontal source-destination distance `L`, meters.
    pub distance: f64,
    /// Flight altitude `H`, meters.
    pub altitude: f64,
    /// Flight period `T`, seconds.
    pub period: f64,
    /// Number of time slots `N`.
    pub slots: usize,
    /// Maximum UAV speed, m/s.
    pub max_speed: f64,
    /// Reference SNR at 1 m per milliwatt, linear.
    pub gamma0: f64,
    /// Source energy budget, mW x slots.
    pub energy_source: f64,
    /// UAV energy budget, mW x slots.
    pub energy_uav: f64,
    pub endpoints: Endpoints,
    /// Maximum buffering delay in slots; `None` is unbounded.
    pub max_delay: Option<usize>,
    pub solver: SolverParams,
}

impl Default for ScenarioConfig {
    /// 2 km link, 100 m altitude, 100 s in 400 slots, 40 m/s, 80 dB
    /// reference SNR per watt, 15 dBm average power on both nodes, free
    /// endpoints.
    fn default() -> Self {
        let slots = 400;
        let energy = slots as f64 * db_to_linear(15.0);
        Self {
            distance: 2000.0,
            altitude: 100.0,
            period: 100.0,
            slots,
            max_speed: 40.0,
            gamma0: gamma0_from_db(80.0),
            energy_source: energy,
            energy_uav: energy,
            endpoints: Endpoints::Free,
            max_delay: None,
            solver: SolverParams::default(),
        }
    }
}

impl ScenarioConfig {
    /// Maximum displacement per slot, `V_u * T / N`.
    pub fn max_step(&self) -> f64 {
        self.max_speed * (self.period / self.slots as f64)
    }

    pub fn slot_duration(&self) -> f64 {
        self.period / self.slots as f64
    }

    /// Sets both energy budgets from an average per-slot power in dBm.
    pub fn with_power_dbm(mut self, dbm: f64) -> Self {
        let energy = self.slots as f64 * db_to_linear(dbm);
        self.energy_source = energy;
        self.energy_uav = energy;
        self
    }

    pub fn with_slots(mut self, slots: usize) -> Self {
        let per_slot_s = self.energy_source / self.slots as f64;
        let per_slot_u = self.energy_uav / self.slots as f64;
        self.slots = slots;
        self.energy_source = per_slot_s * slots as f64;
        self.energy_uav = per_slot_u * slots as f64;
        self
    }

    pub fn with_max_delay(mut self, max_delay: Option<usize>) -> Self {
        self.max_delay = max_delay;
        self
    }

    /// Collects every range violation instead of stopping at the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be finite and > 0 (got {v})"));
            }
        };
        positive("distance", self.distance);
        positive("altitude", self.altitude);
        positive("period", self.period);
        positive("max_speed", self.max_speed);
        positive("gamma0", self.gamma0);
        positive("energy_source", self.energy_source);
        positive("energy_uav", self.energy_uav);
        if self.slots == 0 {
            out.push("slots (N) must be >= 1".to_string());
        }

        let s = &self.solver;
        let mut tol = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("solver.{name} must be finite and > 0 (got {v})"));
            }
        };
        tol("ao_tolerance", s.ao_tolerance);
        tol("power_tolerance", s.power_tolerance);
        tol("trajectory_tolerance", s.trajectory_tolerance);
        tol("barrier_tolerance", s.barrier_tolerance);
        if !(s.barrier_growth.is_finite() && s.barrier_growth > 1.0) {
            out.push(format!(
                "solver.barrier_growth must be > 1 (got {})",
                s.barrier_growth
            ));
        }
        for (name, v) in [
            ("ao_max_iterations", s.ao_max_iterations),
            ("power_max_iterations", s.power_max_iterations),
            ("trajectory_max_iterations", s.trajectory_max_iterations),
            ("newton_max_iterations", s.newton_max_iterations),
        ] {
            if v == 0 {
                out.push(format!("solver.{name} must be >= 1"));
            }
        }

        if let Endpoints::Fixed { start, end } = self.endpoints {
            let finite = [start.x, start.y, end.x, end.y].iter().all(|v| v.is_finite());
            if !finite {
                out.push("endpoints must be finite".to_string());
            } else if self.slots > 0 && self.max_step() > 0.0 {
                // The straight flight start -> end must be strictly feasible.
                let reach = (self.slots + 1) as f64 * self.max_step();
                let span = start.dist2(end).sqrt();
                if span >= reach {
                    out.push(format!(
                        "endpoints are {span} m apart but only {reach} m are reachable \
                         (strictly) within {} slots",
                        self.slots
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// Per-slot UAV waypoints at altitude `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Waypoint>) -> Self {
        Self { waypoints }
    }

    pub fn constant(at: Waypoint, slots: usize) -> Self {
        Self {
            waypoints: vec![at; slots],
        }
    }

    /// Straight-line initial trajectory.
    ///
    /// With free endpoints the UAV spans S to D evenly when the speed limit
    /// allows it; otherwise it flies at full speed along the S-D axis on a
    /// segment centered at `L / 2`. With fixed endpoints the waypoints are
    /// evenly spaced on the launch-landing segment.
    pub fn straight_line(config: &ScenarioConfig) -> Self {
        let n = config.slots;
        let step = config.max_step();
        let waypoints = match config.endpoints {
            Endpoints::Free => {
                let l = config.distance;
                if n == 1 {
                    vec![Waypoint::new(l / 2.0, 0.0)]
                } else if l / (n - 1) as f64 <= step {
                    (0..n)
                        .map(|k| Waypoint::new(l * k as f64 / (n - 1) as f64, 0.0))
                        .collect()
                } else {
                    let mid = (n - 1) as f64 / 2.0;
                    (0..n)
                        .map(|k| Waypoint::new(l / 2.0 + (k as f64 - mid) * step, 0.0))
                        .collect()
                }
            }
            Endpoints::Fixed { start, end } => (0..n)
                .map(|k| {
                    let f = (k + 1) as f64 / (n + 1) as f64;
                    Waypoint::new(
                        start.x + f * (end.x - start.x),
                        start.y + f * (end.y - start.y),
                    )
                })
                .collect(),
        };
        Self { waypoints }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Squared displacements constrained by the speed limit, in flight order
    /// (launch leg first, landing leg last when endpoints are fixed).
    pub fn squared_steps(&self, endpoints: &Endpoints) -> Vec<f64> {
        let w = &self.waypoints;
        let mut steps = Vec::with_capacity(w.len() + 1);
        if let (Endpoints::Fixed { start, .. }, Some(first)) = (endpoints, w.first()) {
            steps.push(start.dist2(*first));
        }
        steps.extend(w.windows(2).map(|p| p[0].dist2(p[1])));
        if let (Endpoints::Fixed { end, .. }, Some(last)) = (endpoints, w.last()) {
            steps.push(last.dist2(*end));
        }
        steps
    }

    /// Largest relative overshoot of a squared step over `D_u^2`; `<= 0`
    /// means every speed constraint holds.
    pub fn speed_violation(&self, config: &ScenarioConfig) -> f64 {
        let d2 = config.max_step().powi(2);
        self.squared_steps(&config.endpoints)
            .into_iter()
            .map(|s| s / d2 - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check(&self, config: &ScenarioConfig) -> Result<()> {
        if self.len() != config.slots {
            return Err(Error::InvalidArgument(format!(
                "trajectory has {} waypoints, expected {}",
                self.len(),
                config.slots
            )));
        }
        if self.waypoints.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidArgument("non-finite waypoint".into()));
        }
        let v = self.speed_violation(config);
        if v > SPEED_TOLERANCE {
            return Err(Error::Infeasible(format!(
                "speed constraint exceeded by a relative {v:.3e}"
            )));
        }
        Ok(())
    }
}
