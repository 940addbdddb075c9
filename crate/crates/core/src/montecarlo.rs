//! Seeded trajectory simulation of the walk and empirical TV to uniform.
//!
//! Trajectory `i` draws its steps from a ChaCha8 generator seeded with the
//! config seed and switched to stream `i`, so every trajectory is reproducible
//! on its own and the merged histograms do not depend on thread count.
//! Empirical TV is biased upward at small sample sizes; no correction is made.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::recurrence::{big_ratio, SequenceWindow};

/// Trajectories simulated per work item.
pub const BLOCK: u64 = 4096;

/// Largest `(t_max + 1) * N` kept as dense per-time histograms.
const DENSE_CELLS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy)]
pub struct SimConfig<'a> {
    window: &'a SequenceWindow,
    t_max: u64,
    num_trajectories: u64,
    seed: u64,
}

impl<'a> SimConfig<'a> {
    pub fn new(
        window: &'a SequenceWindow,
        t_max: u64,
        num_trajectories: u64,
        seed: u64,
    ) -> Result<Self> {
        if num_trajectories == 0 {
            return Err(domain("num_trajectories must be at least 1"));
        }
        Ok(Self {
            window,
            t_max,
            num_trajectories,
            seed,
        })
    }

    pub fn window(&self) -> &SequenceWindow {
        self.window
    }

    pub fn t_max(&self) -> u64 {
        self.t_max
    }

    pub fn num_trajectories(&self) -> u64 {
        self.num_trajectories
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// The generator for trajectory `index`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Empirical `(t, TV)` for `t = 0..=t_max`.
pub fn simulate_tv(config: &SimConfig<'_>) -> Vec<(u64, f64)> {
    let window = config.window;
    match window.modulus_u64() {
        Some(1) => (0..=config.t_max).map(|t| (t, 0.0)).collect(),
        Some(modulus) => {
            let steps = window.residues(modulus);
            let add = move |x: &u64, s: &u64| ((*x as u128 + *s as u128) % modulus as u128) as u64;
            let cells = (config.t_max + 1).checked_mul(modulus);
            if cells.is_some_and(|c| c <= DENSE_CELLS) {
                let counts = dense_histograms(config, &steps, modulus, add);
                tv_curve_u64(config, modulus, counts.iter().map(|row| Counts::Dense(row)))
            } else {
                let maps = sparse_histograms(config, &steps, 0u64, add);
                tv_curve_u64(config, modulus, maps.iter().map(Counts::Sparse))
            }
        }
        None => {
            let modulus = window.modulus().clone();
            let steps: Vec<BigUint> = window.values().iter().map(|g| g % &modulus).collect();
            let add = |x: &BigUint, s: &BigUint| (x + s) % &modulus;
            let maps = sparse_histograms(config, &steps, BigUint::zero(), add);
            tv_curve_big(config, &modulus, &maps)
        }
    }
}

fn block_range(config: &SimConfig<'_>, block: u64) -> std::ops::Range<u64> {
    let start = block * BLOCK;
    start..(start + BLOCK).min(config.num_trajectories)
}

fn num_blocks(config: &SimConfig<'_>) -> u64 {
    config.num_trajectories.div_ceil(BLOCK)
}

fn dense_histograms<F>(config: &SimConfig<'_>, steps: &[u64], modulus: u64, add: F) -> Vec<Vec<u64>>
where
    F: Fn(&u64, &u64) -> u64 + Sync,
{
    let rows = (config.t_max + 1) as usize;
    let states = modulus as usize;
    let empty = || vec![vec![0u64; states]; rows];
    (0..num_blocks(config))
        .into_par_iter()
        .fold(empty, |mut acc, block| {
            for traj in block_range(config, block) {
                let mut rng = trajectory_rng(config.seed, traj);
                let mut x = 0u64;
                acc[0][0] += 1;
                for row in acc.iter_mut().skip(1) {
                    x = add(&x, &steps[rng.random_range(0..steps.len())]);
                    row[x as usize] += 1;
                }
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(&b) {
                for (ca, cb) in ra.iter_mut().zip(rb) {
                    *ca += cb;
                }
            }
            a
        })
}

fn sparse_histograms<P, F>(
    config: &SimConfig<'_>,
    steps: &[P],
    origin: P,
    add: F,
) -> Vec<HashMap<P, u64>>
where
    P: Clone + Eq + Hash + Send + Sync,
    F: Fn(&P, &P) -> P + Sync,
{
    let rows = (config.t_max + 1) as usize;
    let empty = || vec![HashMap::new(); rows];
    (0..num_blocks(config))
        .into_par_iter()
        .fold(empty, |mut acc, block| {
            for traj in block_range(config, block) {
                let mut rng = trajectory_rng(config.seed, traj);
                let mut x = origin.clone();
                *acc[0].entry(x.clone()).or_insert(0) += 1;
                for row in acc.iter_mut().skip(1) {
                    x = add(&x, &steps[rng.random_range(0..steps.len())]);
                    *row.entry(x.clone()).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, c) in rb {
                    *ra.entry(x).or_insert(0) += c;
                }
            }
            a
        })
}

enum Counts<'a> {
    Dense(&'a [u64]),
    Sparse(&'a HashMap<u64, u64>),
}

/// `sum_x |c_x N - M|` over all `N` states, with unvisited states adding `M`.
fn tv_numerator_u64(counts: Counts<'_>, modulus: u64, total: u64) -> u128 {
    let n = modulus as u128;
    let m = total as u128;
    let term = |c: u64| (c as u128 * n).abs_diff(m);
    match counts {
        Counts::Dense(row) => row.iter().map(|&c| term(c)).sum(),
        Counts::Sparse(map) => {
            let visited: u128 = map.values().map(|&c| term(c)).sum();
            visited + (n - map.len() as u128) * m
        }
    }
}

fn tv_curve_u64<'a>(
    config: &SimConfig<'_>,
    modulus: u64,
    rows: impl Iterator<Item = Counts<'a>>,
) -> Vec<(u64, f64)> {
    let m = config.num_trajectories;
    let denom = 2.0 * m as f64 * modulus as f64;
    rows.enumerate()
        .map(|(t, row)| (t as u64, tv_numerator_u64(row, modulus, m) as f64 / denom))
        .collect()
}

fn tv_curve_big(
    config: &SimConfig<'_>,
    modulus: &BigUint,
    maps: &[HashMap<BigUint, u64>],
) -> Vec<(u64, f64)> {
    let m = BigUint::from(config.num_trajectories);
    let denom = BigUint::from(2u8) * &m * modulus;
    maps.iter()
        .enumerate()
        .map(|(t, map)| {
            let mut num = (modulus - BigUint::from(map.len())) * &m;
            for &c in map.values() {
                let scaled = BigUint::from(c) * modulus;
                num += if scaled >= m {
                    scaled - &m
                } else {
                    &m - scaled
                };
            }
            (t as u64, big_ratio(&num, &denom))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::{generate, Preset, RecurrenceSpec};

    fn window(p: Preset, n: usize) -> SequenceWindow {
        generate(&p.spec(), n).unwrap()
    }

    #[test]
    fn zero_trajectories_rejected() {
        let w = window(Preset::Pow2, 3);
        assert!(SimConfig::new(&w, 5, 0, 1).is_err());
    }

    #[test]
    fn single_state_is_always_mixed() {
        let w = window(Preset::Pow3, 1);
        let cfg = SimConfig::new(&w, 4, 100, 7).unwrap();
        assert!(simulate_tv(&cfg).iter().all(|&(_, tv)| tv == 0.0));
    }

    #[test]
    fn time_zero_is_exact() {
        let w = window(Preset::Pow3, 3);
        let cfg = SimConfig::new(&w, 2, 1000, 3).unwrap();
        let curve = simulate_tv(&cfg);
        assert_eq!(curve[0], (0, 1.0 - 1.0 / 9.0));
    }

    #[test]
    fn seeded_runs_repeat() {
        let w = window(Preset::FibOdd, 5);
        let cfg = SimConfig::new(&w, 10, 20_000, 42).unwrap();
        assert_eq!(simulate_tv(&cfg), simulate_tv(&cfg));
        let other = SimConfig::new(&w, 10, 20_000, 43).unwrap();
        assert_ne!(simulate_tv(&cfg), simulate_tv(&other));
    }

    #[test]
    fn pow3_n2_t2_near_one_sixth() {
        let w = window(Preset::Pow3, 2);
        let cfg = SimConfig::new(&w, 2, 400_000, 11).unwrap();
        let tv = simulate_tv(&cfg)[2].1;
        assert!((tv - 1.0 / 6.0).abs() < 3e-3, "{tv}");
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let w = window(Preset::Pow2, 6);
        let cfg = SimConfig::new(&w, 6, 5000, 9).unwrap();
        let steps = w.residues(32);
        let add = |x: &u64, s: &u64| (x + s) % 32;
        let dense = dense_histograms(&cfg, &steps, 32, add);
        let sparse = sparse_histograms(&cfg, &steps, 0u64, add);
        let a = tv_curve_u64(&cfg, 32, dense.iter().map(|r| Counts::Dense(r)));
        let b = tv_curve_u64(&cfg, 32, sparse.iter().map(Counts::Sparse));
        assert_eq!(a, b);
    }

    #[test]
    fn big_modulus_path_runs() {
        // 2^70 overflows a machine word.
        let w = generate(&RecurrenceSpec::geometric(2).unwrap(), 71).unwrap();
        assert!(w.modulus_u64().is_none());
        let cfg = SimConfig::new(&w, 3, 50, 5).unwrap();
        let curve = simulate_tv(&cfg);
        assert_eq!(curve.len(), 4);
        // 50 trajectories cover a vanishing fraction of 2^70 states.
        assert!(curve.iter().all(|&(_, tv)| tv > 0.999_999));
    }
}
