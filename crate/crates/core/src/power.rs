//! Source/UAV power allocation for a fixed pairing and trajectory.
//!
//! In the reciprocal variables `T = 1/P` each pair rate is jointly convex,
//! so its tangent plane is a global under-estimator. Maximizing the sum of
//! tangent planes under the energy budgets has a closed-form solution,
//! `P_i = E sqrt(A_i) / sum_k sqrt(A_k)`, and iterating it is a
//! minorize-maximize scheme with a monotone objective.

use std::f64::consts::LN_2;

use crate::channel::{hop_snr, pair_rate, spectral_efficiency, ChannelGains};
use crate::error::{Error, Result};
use crate::pairing::Pairing;
use crate::scenario::SolverParams;

/// Relative tolerance on the energy budgets.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

/// Per-slot transmit powers in milliwatts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    pub source: Vec<f64>,
    pub uav: Vec<f64>,
}

impl PowerProfile {
    pub fn uniform(n: usize, energy_source: f64, energy_uav: f64) -> Self {
        Self {
            source: vec![energy_source / n as f64; n],
            uav: vec![energy_uav / n as f64; n],
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            source: vec![0.0; n],
            uav: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn check(&self, energy_source: f64, energy_uav: f64) -> Result<()> {
        for (name, powers, budget) in [
            ("source", &self.source, energy_source),
            ("uav", &self.uav, energy_uav),
        ] {
            if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "{name} powers must be finite and non-negative"
                )));
            }
            let total: f64 = powers.iter().sum();
            if total > budget * (1.0 + ENERGY_TOLERANCE) {
                return Err(Error::Infeasible(format!(
                    "{name} energy {total} exceeds budget {budget}"
                )));
            }
        }
        Ok(())
    }
}

/// Rate in the reciprocal variables, `log2(1 + rho_s rho_u / D)` with
/// `D = rho_u T_s + rho_s T_u + T_s T_u`.
pub fn reciprocal_rate(t_s: f64, t_u: f64, rho_s: f64, rho_u: f64) -> f64 {
    let d = rho_u * t_s + rho_s * t_u + t_s * t_u;
    spectral_efficiency(rho_s * rho_u / d)
}

/// Negated partial derivatives `(A_s, A_u)` of [`reciprocal_rate`] at
/// `(t_s, t_u)`.
pub fn reciprocal_slopes(t_s: f64, t_u: f64, rho_s: f64, rho_u: f64) -> (f64, f64) {
    let d = rho_u * t_s + rho_s * t_u + t_s * t_u;
    let num = rho_s * rho_u;
    (
        num / (d * (t_s + rho_s) * LN_2),
        num / (d * (t_u + rho_u) * LN_2),
    )
}

/// Tangent-plane lower bound of [`reciprocal_rate`] expanded at
/// `(local_s, local_u)`.
pub fn reciprocal_rate_lower_bound(
    t_s: f64,
    t_u: f64,
    local_s: f64,
    local_u: f64,
    rho_s: f64,
    rho_u: f64,
) -> f64 {
    let (a_s, a_u) = reciprocal_slopes(local_s, local_u, rho_s, rho_u);
    reciprocal_rate(local_s, local_u, rho_s, rho_u) - a_s * (t_s - local_s) - a_u * (t_u - local_u)
}

/// Tangent slopes per matched pair, in pairing order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaCoefficients {
    pub slots: usize,
    pub pairs: Vec<(usize, usize)>,
    pub source: Vec<f64>,
    pub uav: Vec<f64>,
}

pub fn sca_coefficients(
    pairing: &Pairing,
    gains: &ChannelGains,
    local: &PowerProfile,
) -> Result<ScaCoefficients> {
    let mut source = Vec::with_capacity(pairing.len());
    let mut uav = Vec::with_capacity(pairing.len());
    for &(i, j) in &pairing.pairs {
        let (ps, pu) = (local.source[i], local.uav[j]);
        if !(ps > 0.0 && pu > 0.0) {
            return Err(Error::Precondition(format!(
                "pair ({i},{j}) has zero local power; reciprocal undefined"
            )));
        }
        // Same slopes as `reciprocal_slopes`, written in powers so that
        // tiny powers do not overflow `T = 1/P`.
        let (rs, ru) = (gains.source[i], gains.destination[j]);
        let (a, b) = (ps * rs, pu * ru);
        let common = rs * ru * ps * pu / ((a + b + 1.0) * LN_2);
        source.push(common * ps / (1.0 + a));
        uav.push(common * pu / (1.0 + b));
    }
    Ok(ScaCoefficients {
        slots: gains.len(),
        pairs: pairing.pairs.clone(),
        source,
        uav,
    })
}

/// Exact maximizer of the tangent-plane surrogate under both energy
/// budgets. Slots without a matched pair get zero power; the budgets are
/// met with equality over matched slots.
pub fn closed_form_update(
    coeffs: &ScaCoefficients,
    energy_source: f64,
    energy_uav: f64,
) -> Result<PowerProfile> {
    if coeffs.pairs.is_empty() {
        return Err(Error::Precondition(
            "closed-form update needs at least one matched pair".into(),
        ));
    }
    let n = coeffs.slots;
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for (p, &(i, j)) in coeffs.pairs.iter().enumerate() {
        rows[i] += coeffs.source[p];
        cols[j] += coeffs.uav[p];
    }
    Ok(PowerProfile {
        source: allocate(&rows, energy_source)?,
        uav: allocate(&cols, energy_uav)?,
    })
}

fn allocate(row_sums: &[f64], energy: f64) -> Result<Vec<f64>> {
    if row_sums.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::Precondition("non-finite SCA coefficient".into()));
    }
    let roots: Vec<f64> = row_sums.iter().map(|a| a.sqrt()).collect();
    let total: f64 = roots.iter().sum();
    if total <= 0.0 {
        return Err(Error::Precondition("all SCA coefficients vanish".into()));
    }
    Ok(roots.into_iter().map(|r| energy * r / total).collect())
}

/// Total rate over matched pairs.
pub fn pairing_rate(pairing: &Pairing, gains: &ChannelGains, powers: &PowerProfile) -> f64 {
    pairing
        .pairs
        .iter()
        .map(|&(i, j)| pair_rate(gains, powers, i, j))
        .sum()
}

#[derive(Debug, Clone)]
pub struct PowerSolution {
    pub powers: PowerProfile,
    /// True objective (sum of matched pair rates) after each update; the
    /// first entry is the initial point.
    pub trace: Vec<f64>,
}

pub fn solve_power(
    pairing: &Pairing,
    gains: &ChannelGains,
    init: &PowerProfile,
    energy_source: f64,
    energy_uav: f64,
    params: &SolverParams,
) -> Result<PowerSolution> {
    let n = gains.len();
    if init.source.len() != n || init.uav.len() != n {
        return Err(Error::InvalidArgument(format!(
            "power profile has {} slots, expected {n}",
            init.len()
        )));
    }
    init.check(energy_source, energy_uav)?;
    if pairing.is_empty() {
        return Ok(PowerSolution {
            powers: PowerProfile::zeros(n),
            trace: vec![0.0],
        });
    }

    let mut current = init.clone();
    let mut value = pairing_rate(pairing, gains, &current);
    let mut trace = vec![value];
    for _ in 0..params.power_max_iterations {
        // Zero is a fixed point of the update; such pairs carry no rate.
        let active = Pairing::new(
            pairing
                .pairs
                .iter()
                .copied()
                .filter(|&(i, j)| current.source[i] > 0.0 && current.uav[j] > 0.0)
                .collect(),
        );
        if active.is_empty() {
            break;
        }
        let coeffs = sca_coefficients(&active, gains, &current)?;
        let next = closed_form_update(&coeffs, energy_source, energy_uav)?;
        let next_value = pairing_rate(pairing, gains, &next);
        if next_value < value {
            // Rounding-level regression at the fixed point.
            break;
        }
        let gain = (next_value - value) / value.abs().max(f64::MIN_POSITIVE);
        current = next;
        value = next_value;
        trace.push(value);
        if gain < params.power_tolerance {
            break;
        }
    }
    Ok(PowerSolution {
        powers: current,
        trace,
    })
}

/// Partial derivatives of the pair rate w.r.t. `(P_s, P_u)`.
fn rate_power_gradient(p_s: f64, p_u: f64, rho_s: f64, rho_u: f64) -> (f64, f64) {
    let a = p_s * rho_s;
    let b = p_u * rho_u;
    let sum = a + b + 1.0;
    (
        rho_s * b / (sum * (a + 1.0) * LN_2),
        rho_u * a / (sum * (b + 1.0) * LN_2),
    )
}

/// Normalized KKT residual of the power problem restricted to matched
/// slots: relative spread of the marginal rates around the budget
/// multiplier (slots at essentially zero power only need a marginal rate not
/// above it), plus the unused share of each budget.
pub fn power_kkt_residual(
    pairing: &Pairing,
    gains: &ChannelGains,
    powers: &PowerProfile,
    energy_source: f64,
    energy_uav: f64,
) -> f64 {
    let mut grad_s = Vec::new();
    let mut grad_u = Vec::new();
    for &(i, j) in &pairing.pairs {
        let (gs, gu) = rate_power_gradient(
            powers.source[i],
            powers.uav[j],
            gains.source[i],
            gains.destination[j],
        );
        grad_s.push((gs, powers.source[i]));
        grad_u.push((gu, powers.uav[j]));
    }
    let side = |grads: &[(f64, f64)], energy: f64| {
        let used: f64 = grads.iter().map(|g| g.1).sum();
        let lambda = grads.iter().map(|&(g, p)| g * p).sum::<f64>() / used;
        let floor = 1e-9 * energy;
        let spread = grads
            .iter()
            .map(|&(g, p)| {
                if p > floor {
                    (g - lambda).abs()
                } else {
                    (g - lambda).max(0.0)
                }
            })
            .fold(0.0, f64::max)
            / lambda;
        spread.max((energy - used).abs() / energy)
    };
    side(&grad_s, energy_source).max(side(&grad_u, energy_uav))
}

/// The end-to-end SNR of a matched pair at given powers; exposed for
/// diagnostics.
pub fn pair_snr(gains: &ChannelGains, powers: &PowerProfile, i: usize, j: usize) -> f64 {
    hop_snr(powers.source[i] * gains.source[i], powers.uav[j] * gains.destination[j])
}
