//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver code paths it checks against.

#![allow(dead_code)]

use std::path::Path;

use rand::Rng;
use saf_relay::experiment::{ExperimentSpec, Variant};
use saf_relay::scenario::Endpoints;
use saf_relay::ScenarioConfig;

/// Best total weight over all partial causal matchings by exhaustive search.
/// `rates[i][j]` is used for `j >= i` (and `j - i <= max_delay`).
pub fn brute_force_pairing(rates: &[Vec<f64>], max_delay: Option<usize>) -> f64 {
    fn go(i: usize, rates: &[Vec<f64>], max_delay: Option<usize>, used: &mut [bool]) -> f64 {
        let n = rates.len();
        if i == n {
            return 0.0;
        }
        let mut best = go(i + 1, rates, max_delay, used);
        for j in i..n {
            if used[j] || max_delay.is_some_and(|d| j - i > d) {
                continue;
            }
            used[j] = true;
            best = best.max(rates[i][j] + go(i + 1, rates, max_delay, used));
            used[j] = false;
        }
        best
    }
    go(0, rates, max_delay, &mut vec![false; rates.len()])
}

/// `log2(1 + a b / (a + b + 1))` for received SNRs `a`, `b`.
pub fn af_rate(a: f64, b: f64) -> f64 {
    (1.0 + a * b / (a + b + 1.0)).log2()
}

fn af_rate_gradient(a: f64, b: f64) -> (f64, f64) {
    let s = a + b + 1.0;
    let ln2 = std::f64::consts::LN_2;
    (b / (s * (1.0 + a) * ln2), a / (s * (1.0 + b) * ln2))
}

/// Euclidean projection onto `{x >= 0, sum x = total}`.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - total) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// A matched power instance: `pairs` over `n` slots with per-slot gains.
#[derive(Debug, Clone)]
pub struct PowerInstance {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub rho_s: Vec<f64>,
    pub rho_u: Vec<f64>,
    pub energy_s: f64,
    pub energy_u: f64,
}

impl PowerInstance {
    pub fn objective(&self, ps: &[f64], pu: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|&(i, j)| af_rate(ps[i] * self.rho_s[i], pu[j] * self.rho_u[j]))
            .sum()
    }
}

/// Projected-gradient ascent with backtracking on the (concave) power
/// problem. Only matched slots carry variables; the rest stay at zero.
pub fn power_oracle(inst: &PowerInstance) -> (Vec<f64>, Vec<f64>, f64) {
    let n = inst.n;
    let recv: Vec<usize> = inst.pairs.iter().map(|p| p.0).collect();
    let send: Vec<usize> = inst.pairs.iter().map(|p| p.1).collect();
    let spread = |slots: &[usize], energy: f64| {
        let mut v = vec![0.0; n];
        for &k in slots {
            v[k] = energy / slots.len() as f64;
        }
        v
    };
    let mut ps = spread(&recv, inst.energy_s);
    let mut pu = spread(&send, inst.energy_u);
    let mut value = inst.objective(&ps, &pu);
    // Step in units of the budgets so both sides move comparably.
    let mut step = 1.0;
    for _ in 0..200_000 {
        let mut gs = vec![0.0; n];
        let mut gu = vec![0.0; n];
        for &(i, j) in &inst.pairs {
            let (da, db) = af_rate_gradient(ps[i] * inst.rho_s[i], pu[j] * inst.rho_u[j]);
            gs[i] += da * inst.rho_s[i];
            gu[j] += db * inst.rho_u[j];
        }
        let restrict = |x: &[f64], g: &[f64], slots: &[usize], e: f64, t: f64| {
            let sub: Vec<f64> = slots.iter().map(|&k| x[k] + t * e * e * g[k]).collect();
            let proj = project_simplex(&sub, e);
            let mut out = vec![0.0; n];
            for (&k, v) in slots.iter().zip(proj) {
                out[k] = v;
            }
            out
        };
        let mut accepted = false;
        let mut t = step * 2.0;
        while t > 1e-30 {
            let ns = restrict(&ps, &gs, &recv, inst.energy_s, t);
            let nu = restrict(&pu, &gu, &send, inst.energy_u, t);
            let nv = inst.objective(&ns, &nu);
            if nv > value {
                let moved: f64 = ns.iter().zip(&ps).map(|(a, b)| (a - b).abs()).sum::<f64>()
                    / inst.energy_s
                    + nu.iter().zip(&pu).map(|(a, b)| (a - b).abs()).sum::<f64>() / inst.energy_u;
                ps = ns;
                pu = nu;
                value = nv;
                step = t;
                accepted = moved > 1e-15;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (ps, pu, value)
}

/// Random partial causal matching with at least one pair.
pub fn random_pairing(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    loop {
        let mut used = vec![false; n];
        let mut pairs = Vec::new();
        for i in 0..n {
            if rng.random_bool(0.25) {
                continue;
            }
            let free: Vec<usize> = (i..n).filter(|&j| !used[j]).collect();
            if free.is_empty() {
                continue;
            }
            let j = free[rng.random_range(0..free.len())];
            used[j] = true;
            pairs.push((i, j));
        }
        if !pairs.is_empty() {
            return pairs;
        }
    }
}

/// Ground-truth throughput from the exported files of one run.
pub fn recompute_throughput(dir: &Path, config: &ScenarioConfig) -> f64 {
    let traj = parse_csv(&dir.join("trajectory.csv"));
    let powers = parse_csv(&dir.join("powers.csv"));
    let pairs = parse_csv(&dir.join("pairing.csv"));
    let h2 = config.altitude * config.altitude;
    let gain = |k: usize, gx: f64| {
        let (x, y) = (traj[k][1], traj[k][2]);
        config.gamma0 / ((x - gx) * (x - gx) + y * y + h2)
    };
    let total: f64 = pairs
        .iter()
        .map(|row| {
            let (i, j) = (row[0] as usize - 1, row[1] as usize - 1);
            af_rate(powers[i][1] * gain(i, 0.0), powers[j][2] * gain(j, config.distance))
        })
        .sum();
    total / config.slots as f64
}

/// Numeric rows of a CSV file with a header line.
pub fn parse_csv(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

/// Random small scenario with free endpoints.
pub fn random_config(rng: &mut impl Rng) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.distance = rng.random_range(800.0..3000.0);
    c.altitude = rng.random_range(50.0..150.0);
    c.period = rng.random_range(40.0..120.0);
    c.max_speed = rng.random_range(20.0..60.0);
    c.endpoints = Endpoints::Free;
    c.with_slots(rng.random_range(8..=40))
        .with_power_dbm(rng.random_range(5.0..25.0))
}

/// Maximal runs of slots whose displacement to the next waypoint stays below
/// `threshold`, as `(first, last, mean_x, mean_y)`.
pub fn hover_clusters(xy: &[(f64, f64)], threshold: f64) -> Vec<(usize, usize, f64, f64)> {
    let n = xy.len();
    let hovering: Vec<bool> = (0..n)
        .map(|k| {
            let other = if k + 1 < n { xy[k + 1] } else { xy[k - 1] };
            ((xy[k].0 - other.0).powi(2) + (xy[k].1 - other.1).powi(2)).sqrt() < threshold
        })
        .collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        if !hovering[k] {
            k += 1;
            continue;
        }
        let first = k;
        while k < n && hovering[k] {
            k += 1;
        }
        let m = (k - first) as f64;
        let mx = xy[first..k].iter().map(|p| p.0).sum::<f64>() / m;
        let my = xy[first..k].iter().map(|p| p.1).sum::<f64>() / m;
        out.push((first, k - 1, mx, my));
    }
    out
}

/// Experiment over both core variants with a small slot count.
pub fn small_experiment(output: &Path) -> ExperimentSpec {
    ExperimentSpec {
        slots: 30,
        variants: vec![Variant::Saf, Variant::Iaf],
        sweep_dbm: vec![10.0, 20.0],
        output_dir: output.to_path_buf(),
        ..ExperimentSpec::default()
    }
}
