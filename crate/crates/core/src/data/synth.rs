//! Seeded synthetic road networks and speed histories for desk-scale runs.
//!
//! Each link follows a daily profile: a 60 mph free-flow baseline, a slow
//! sinusoid, and morning and evening rush-hour dips. Noise is bounded: a
//! per-step uniform jitter on each link plus slowly drifting clipped AR(1)
//! disturbances, one shared by the whole network and a weaker one per link.
//! The shared part is what lets neighbouring links inform a prediction. When the topology has a non-adjacent pair, the link farthest
//! from link 0 shares link 0's noiseless profile exactly.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::io::{write_road_network, write_speed_csv};
use super::series::{RoadNetworkSpec, SpeedSeries};
use crate::error::{Error, Result};

pub const FREE_FLOW_MPH: f64 = 60.0;
pub const MAX_SPEED_MPH: f64 = 70.0;
pub const LINK_SPACING_MILES: f64 = 1.0;

const JITTER_MPH: f64 = 2.0;
const DRIFT_PERSISTENCE: f64 = 0.97;
const DRIFT_STEP_MPH: f64 = 0.8;
const DRIFT_LIMIT_MPH: f64 = 6.0;
const LOCAL_DRIFT_STEP_MPH: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Chain,
    Ring,
    Grid,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Chain => "chain",
            Topology::Ring => "ring",
            Topology::Grid => "grid",
        })
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Topology::Chain),
            "ring" => Ok(Topology::Ring),
            "grid" => Ok(Topology::Grid),
            other => Err(Error::BadParams(format!("unknown topology {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub links: usize,
    pub days: usize,
    pub seed: u64,
    pub topology: Topology,
    pub interval_minutes: u32,
    /// Multiplier on both noise components; 0 gives exactly periodic data.
    pub noise_scale: f64,
}

impl SynthConfig {
    pub fn new(links: usize, days: usize, seed: u64, topology: Topology) -> Self {
        Self {
            links,
            days,
            seed,
            topology,
            interval_minutes: 5,
            noise_scale: 1.0,
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.noise_scale = 0.0;
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct Dip {
    depth: f64,
    center_hour: f64,
    width_hours: f64,
}

#[derive(Debug, Clone, Copy)]
struct LinkProfile {
    wave_amplitude: f64,
    wave_phase: f64,
    morning: Dip,
    evening: Dip,
}

impl LinkProfile {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        Self {
            wave_amplitude: rng.random_range(1.0..4.0),
            wave_phase: rng.random_range(0.0..2.0 * PI),
            morning: Dip {
                depth: rng.random_range(5.0..30.0),
                center_hour: rng.random_range(7.0..9.0),
                width_hours: rng.random_range(0.6..1.2),
            },
            evening: Dip {
                depth: rng.random_range(5.0..30.0),
                center_hour: rng.random_range(16.5..18.5),
                width_hours: rng.random_range(0.6..1.2),
            },
        }
    }

    fn speed_at(&self, hour: f64) -> f64 {
        let dip = |d: &Dip| {
            let z = (hour - d.center_hour) / d.width_hours;
            d.depth * (-0.5 * z * z).exp()
        };
        FREE_FLOW_MPH + self.wave_amplitude * (2.0 * PI * hour / 24.0 + self.wave_phase).sin()
            - dip(&self.morning)
            - dip(&self.evening)
    }
}

fn topology_adjacency(n: usize, topology: Topology) -> Array2<u8> {
    let mut adj = Array2::<u8>::zeros((n, n));
    let mut connect = |a: usize, b: usize| {
        if a != b {
            adj[[a, b]] = 1;
            adj[[b, a]] = 1;
        }
    };
    match topology {
        Topology::Chain => (1..n).for_each(|i| connect(i - 1, i)),
        Topology::Ring => (0..n).for_each(|i| connect(i, (i + 1) % n)),
        Topology::Grid => {
            let cols = (n as f64).sqrt().ceil() as usize;
            for i in 0..n {
                if (i % cols) + 1 < cols && i + 1 < n {
                    connect(i, i + 1);
                }
                if i + cols < n {
                    connect(i, i + cols);
                }
            }
        }
    }
    adj
}

fn hop_distances(adj: &Array2<u8>, source: usize) -> Vec<Option<usize>> {
    let n = adj.nrows();
    let mut dist = vec![None; n];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for v in 0..n {
            if adj[[u, v]] == 1 && dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Generates a deterministic speed history and matching road network.
pub fn generate_synthetic(config: &SynthConfig) -> Result<(SpeedSeries, RoadNetworkSpec)> {
    let n = config.links;
    if n < 2 || config.days < 2 {
        return Err(Error::BadShape(format!(
            "synthetic data needs at least 2 links and 2 days, got {n} links and {} days",
            config.days
        )));
    }
    if !(config.noise_scale.is_finite() && config.noise_scale >= 0.0) {
        return Err(Error::BadParams(format!("noise scale {}", config.noise_scale)));
    }
    if config.interval_minutes == 0 || !super::series::MINUTES_PER_DAY.is_multiple_of(config.interval_minutes) {
        return Err(Error::BadShape(format!("interval {} minutes", config.interval_minutes)));
    }

    let adjacency = topology_adjacency(n, config.topology);
    let mut distance = Array2::<f64>::zeros((n, n));
    let hops: Vec<Vec<Option<usize>>> = (0..n).map(|i| hop_distances(&adjacency, i)).collect();
    for i in 0..n {
        for j in 0..n {
            // Every generated topology is connected.
            distance[[i, j]] = hops[i][j].expect("connected topology") as f64 * LINK_SPACING_MILES;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut profiles: Vec<LinkProfile> = (0..n).map(|_| LinkProfile::sample(&mut rng)).collect();
    let (twin, far) = hops[0]
        .iter()
        .enumerate()
        .map(|(j, d)| (j, d.unwrap_or(0)))
        .max_by_key(|&(j, d)| (d, j))
        .expect("at least two links");
    if far >= 2 {
        profiles[twin] = profiles[0];
    }

    let steps_per_day = (super::series::MINUTES_PER_DAY / config.interval_minutes) as usize;
    let t = steps_per_day * config.days;
    let hours_per_step = config.interval_minutes as f64 / 60.0;
    let mut shared = 0.0;
    let mut drift = vec![0.0; n];
    let mut values = Array2::<f64>::zeros((t, n));
    for step in 0..t {
        let hour = (step % steps_per_day) as f64 * hours_per_step;
        if config.noise_scale > 0.0 {
            let innovation = rng.random_range(-DRIFT_STEP_MPH..DRIFT_STEP_MPH);
            shared = (DRIFT_PERSISTENCE * shared + innovation).clamp(-DRIFT_LIMIT_MPH, DRIFT_LIMIT_MPH);
        }
        for (link, profile) in profiles.iter().enumerate() {
            let mut noise = 0.0;
            if config.noise_scale > 0.0 {
                let innovation = rng.random_range(-LOCAL_DRIFT_STEP_MPH..LOCAL_DRIFT_STEP_MPH);
                drift[link] = (DRIFT_PERSISTENCE * drift[link] + innovation).clamp(-DRIFT_LIMIT_MPH, DRIFT_LIMIT_MPH);
                let jitter = rng.random_range(-JITTER_MPH..JITTER_MPH);
                noise = config.noise_scale * (shared + drift[link] + jitter);
            }
            values[[step, link]] = (profile.speed_at(hour) + noise).clamp(0.0, MAX_SPEED_MPH);
        }
    }

    let series = SpeedSeries::new(values, config.interval_minutes, 0)?;
    let network = RoadNetworkSpec::new(adjacency, distance)?;
    Ok((series, network))
}

/// Writes `speed.csv`, `adjacency.csv`, `distance.csv` and `manifest.txt` into `dir`.
pub fn write_synthetic(dir: impl AsRef<Path>, config: &SynthConfig, series: &SpeedSeries, network: &RoadNetworkSpec) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_speed_csv(series, dir.join("speed.csv"))?;
    write_road_network(network, dir.join("adjacency.csv"), dir.join("distance.csv"))?;
    let manifest = format!(
        "seed={}\ntopology={}\nlinks={}\ndays={}\ninterval_minutes={}\nnoise_scale={}\n",
        config.seed, config.topology, config.links, config.days, config.interval_minutes, config.noise_scale
    );
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::s;

    #[test]
    fn deterministic_per_seed() {
        let cfg = SynthConfig::new(6, 2, 11, Topology::Ring);
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&SynthConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn chain_edge_count() {
        let (_, net) = generate_synthetic(&SynthConfig::new(20, 7, 1, Topology::Chain)).unwrap();
        let nonzero = net.adjacency().iter().filter(|&&v| v != 0).count();
        assert_eq!(nonzero, 2 * (20 - 1));
        assert_eq!(net.distance()[[0, 19]], 19.0);
    }

    #[test]
    fn ring_and_grid_shapes() {
        let (_, ring) = generate_synthetic(&SynthConfig::new(5, 2, 1, Topology::Ring)).unwrap();
        assert_eq!(ring.adjacency().iter().filter(|&&v| v != 0).count(), 10);
        let (_, grid) = generate_synthetic(&SynthConfig::new(9, 2, 1, Topology::Grid)).unwrap();
        // 3x3 grid: 12 undirected edges.
        assert_eq!(grid.adjacency().iter().filter(|&&v| v != 0).count(), 24);
        assert_eq!(grid.distance()[[0, 8]], 4.0);
    }

    #[test]
    fn noiseless_profile_is_daily_periodic() {
        let (series, _) = generate_synthetic(&SynthConfig::new(4, 3, 5, Topology::Chain).noiseless()).unwrap();
        let day = series.steps_per_day();
        let v = series.values();
        assert_eq!(v.slice(s![0..day, ..]), v.slice(s![day..2 * day, ..]));
        assert_eq!(v.slice(s![0..day, ..]), v.slice(s![2 * day..3 * day, ..]));
    }

    #[test]
    fn twin_links_share_noiseless_profile() {
        let (series, net) = generate_synthetic(&SynthConfig::new(20, 2, 3, Topology::Chain).noiseless()).unwrap();
        assert_eq!(net.adjacency()[[0, 19]], 0);
        assert_eq!(series.values().column(0), series.values().column(19));
        assert_ne!(series.values().column(0), series.values().column(1));
    }

    #[test]
    fn speeds_are_bounded() {
        let (series, _) = generate_synthetic(&SynthConfig::new(10, 3, 9, Topology::Grid)).unwrap();
        assert!(series.values().iter().all(|&v| (0.0..=MAX_SPEED_MPH).contains(&v)));
        assert!(series.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(matches!(
            generate_synthetic(&SynthConfig::new(1, 7, 0, Topology::Chain)),
            Err(Error::BadShape(_))
        ));
        assert!(matches!(
            generate_synthetic(&SynthConfig::new(5, 1, 0, Topology::Chain)),
            Err(Error::BadShape(_))
        ));
    }
}
