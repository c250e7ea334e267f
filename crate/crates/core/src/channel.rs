//! Free-space channel gains, end-to-end AF SNR and per-pair rates.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::power::PowerProfile;
use crate::scenario::{ScenarioConfig, Trajectory};

/// Normalized gains `gamma0 / d^2` per slot, 1/mW.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGains {
    /// Source to UAV.
    pub source: Vec<f64>,
    /// UAV to destination.
    pub destination: Vec<f64>,
}

impl ChannelGains {
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

pub fn source_gain(config: &ScenarioConfig, x: f64, y: f64) -> f64 {
    config.gamma0 / (x * x + y * y + config.altitude * config.altitude)
}

pub fn destination_gain(config: &ScenarioConfig, x: f64, y: f64) -> f64 {
    let dx = x - config.distance;
    config.gamma0 / (dx * dx + y * y + config.altitude * config.altitude)
}

pub fn compute_gains(config: &ScenarioConfig, traj: &Trajectory) -> ChannelGains {
    let (source, destination) = traj
        .waypoints
        .iter()
        .map(|p| {
            (
                source_gain(config, p.x, p.y),
                destination_gain(config, p.x, p.y),
            )
        })
        .unzip();
    ChannelGains {
        source,
        destination,
    }
}

/// End-to-end SNR of an AF hop pair, `a b / (a + b + 1)` with
/// `a = P_s rho_s` and `b = P_u rho_u`.
///
/// Evaluated as `1 / (1/a + 1/b + 1/(a b))`, which is exactly symmetric in
/// the two hops and has the right limits when either hop is zero or
/// unbounded.
pub fn snr_pair(p_s: f64, p_u: f64, rho_s: f64, rho_u: f64) -> Result<f64> {
    if [p_s, p_u, rho_s, rho_u].iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "snr_pair needs non-negative inputs (P_s={p_s}, P_u={p_u}, rho_s={rho_s}, rho_u={rho_u})"
        )));
    }
    Ok(hop_snr(p_s * rho_s, p_u * rho_u))
}

/// SNR from the two received per-hop SNRs; inputs assumed non-negative.
#[inline]
pub(crate) fn hop_snr(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    1.0 / (1.0 / a + 1.0 / b + 1.0 / (a * b))
}

/// `log2(1 + snr)`.
#[inline]
pub fn spectral_efficiency(snr: f64) -> f64 {
    snr.ln_1p() / LN_2
}

/// Rate of receiving in slot `i` and forwarding in slot `j`.
#[inline]
pub fn pair_rate(gains: &ChannelGains, powers: &PowerProfile, i: usize, j: usize) -> f64 {
    spectral_efficiency(hop_snr(
        powers.source[i] * gains.source[i],
        powers.uav[j] * gains.destination[j],
    ))
}

/// Whether pairing receive slot `i` with transmit slot `j` is admissible.
#[inline]
pub fn pair_allowed(i: usize, j: usize, max_delay: Option<usize>) -> bool {
    j >= i && max_delay.is_none_or(|d| j - i <= d)
}

/// Square matrix of pair rates in bps/Hz. Inadmissible pairs are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    n: usize,
    entries: Vec<Option<f64>>,
}

impl RateMatrix {
    /// Builds from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("rate matrix must be square".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    if !(v.is_finite() && *v >= 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "rate ({i},{j}) = {v} is not a finite non-negative value"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Upper-triangular matrix (causal pairs only) built from a dense table;
    /// entries below the diagonal or beyond `max_delay` are ignored.
    pub fn causal(values: &[Vec<f64>], max_delay: Option<usize>) -> Result<Self> {
        let n = values.len();
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, row)| {
                (0..n)
                    .map(|j| {
                        pair_allowed(i, j, max_delay).then(|| row.get(j).copied().unwrap_or(f64::NAN))
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.n + j]
    }

    pub fn max_value(&self) -> f64 {
        self.entries.iter().flatten().copied().fold(0.0, f64::max)
    }
}

pub fn rate_matrix(
    config: &ScenarioConfig,
    traj: &Trajectory,
    powers: &PowerProfile,
) -> Result<RateMatrix> {
    let n = config.slots;
    if traj.len() != n || powers.source.len() != n || powers.uav.len() != n {
        return Err(Error::InvalidArgument(format!(
            "rate_matrix: expected {n} slots, got trajectory {} / powers {}+{}",
            traj.len(),
            powers.source.len(),
            powers.uav.len()
        )));
    }
    if powers.source.iter().chain(&powers.uav).any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidArgument("powers must be non-negative".into()));
    }
    let gains = compute_gains(config, traj);
    let mut entries = vec![None; n * n];
    for i in 0..n {
        for j in i..n {
            if pair_allowed(i, j, config.max_delay) {
                entries[i * n + j] = Some(pair_rate(&gains, powers, i, j));
            }
        }
    }
    Ok(RateMatrix { n, entries })
}
