//! Independent oracles for the exact engine: integer path counting for TV,
//! a naive DFT for the spectrum, and unreduced angles.

use std::f64::consts::PI;

use num_complex::Complex64;
use recwalk::montecarlo::{simulate_tv, SimConfig};
use recwalk::recurrence::{generate, Preset, RecurrenceSpec};
use recwalk::spectrum::compute_spectrum;
use recwalk::walk::{
    evolve, evolve_direct, mixing_time, step_distribution, tv_to_uniform, SpectralEvolver,
};
use recwalk::DEFAULT_MAX_STATES;

/// Counts of length-`t` step sequences ending at each state, as exact integers.
struct PathCounts {
    steps: Vec<usize>,
    counts: Vec<u128>,
    total: u128,
}

impl PathCounts {
    fn new(steps: Vec<usize>, modulus: usize) -> Self {
        let mut counts = vec![0u128; modulus];
        counts[0] = 1;
        Self {
            steps,
            counts,
            total: 1,
        }
    }

    fn advance(&mut self) {
        let n = self.counts.len();
        let mut next = vec![0u128; n];
        for (x, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &s in &self.steps {
                next[(x + s) % n] += c;
            }
        }
        self.counts = next;
        self.total *= self.steps.len() as u128;
    }

    /// `2 N M * TV` where `M` is the number of paths.
    fn tv_numerator(&self) -> u128 {
        let n = self.counts.len() as u128;
        self.counts
            .iter()
            .map(|&c| (c * n).abs_diff(self.total))
            .sum()
    }

    /// Exact check `TV <= p/q`.
    fn tv_at_most(&self, p: u128, q: u128) -> bool {
        let n = self.counts.len() as u128;
        q * self.tv_numerator() <= 2 * p * n * self.total
    }

    fn tv(&self) -> f64 {
        let n = self.counts.len() as f64;
        self.tv_numerator() as f64 / (2.0 * n * self.total as f64)
    }
}

fn path_counts(preset: Preset, n: usize) -> PathCounts {
    let w = generate(&preset.spec(), n).unwrap();
    let modulus = w.modulus_u64().unwrap();
    let steps = w
        .residues(modulus)
        .into_iter()
        .map(|s| s as usize)
        .collect();
    PathCounts::new(steps, modulus as usize)
}

fn exact_t_mix(preset: Preset, n: usize) -> u64 {
    let mut pc = path_counts(preset, n);
    let mut t = 0;
    while !pc.tv_at_most(1, 4) {
        pc.advance();
        t += 1;
    }
    t
}

#[test]
fn mixing_times_match_integer_path_counts() {
    for preset in Preset::ALL {
        for n in 1..=9 {
            let w = generate(&preset.spec(), n).unwrap();
            let got = mixing_time(&w, 0.25, DEFAULT_MAX_STATES).unwrap().t_mix;
            assert_eq!(got, exact_t_mix(preset, n), "{preset} n={n}");
        }
    }
}

#[test]
fn integer_oracle_known_values() {
    assert_eq!(exact_t_mix(Preset::Pow2, 9), 6);
    assert_eq!(exact_t_mix(Preset::FibOdd, 9), 8);
    assert_eq!(exact_t_mix(Preset::Pow3, 8), 10);
    // TV is exactly 1/4 after one step on Z/4 with steps {1, 2, 0}.
    let mut pc = path_counts(Preset::Pow2, 3);
    pc.advance();
    assert_eq!(pc.tv_numerator() * 4, 2 * 4 * pc.total);
}

#[test]
fn tv_curve_matches_integer_path_counts() {
    for preset in Preset::ALL {
        let n = 7;
        let w = generate(&preset.spec(), n).unwrap();
        let result = mixing_time(&w, 0.25, DEFAULT_MAX_STATES).unwrap();
        let mut pc = path_counts(preset, n);
        for &(t, tv) in &result.tv_curve {
            assert!(
                (tv - pc.tv()).abs() < 1e-12,
                "{preset} t={t}: {tv} vs {}",
                pc.tv()
            );
            pc.advance();
        }
    }
}

/// `sum_x p(x) exp(2 pi i k x / N)` computed term by term.
fn naive_dft(probs: &[f64], k: usize) -> Complex64 {
    let n = probs.len();
    probs
        .iter()
        .enumerate()
        .map(|(x, &p)| p * Complex64::from_polar(1.0, 2.0 * PI * ((k * x) % n) as f64 / n as f64))
        .sum()
}

#[test]
fn spectrum_matches_naive_dft_of_step_law() {
    for preset in Preset::ALL {
        for n in 1..=7 {
            let w = generate(&preset.spec(), n).unwrap();
            let spectrum = compute_spectrum(&w, DEFAULT_MAX_STATES).unwrap();
            let step = step_distribution(&w, DEFAULT_MAX_STATES).unwrap();
            let modulus = spectrum.modulus() as usize;
            for k in 1..=modulus {
                let expect = naive_dft(step.probs(), k % modulus);
                let got = spectrum.eigenvalue(k as u64).unwrap();
                assert!((got - expect).norm() < 1e-9, "{preset} n={n} k={k}");
            }
        }
    }
}

#[test]
fn fft_coefficients_match_closed_form() {
    let w = generate(&Preset::FibOdd.spec(), 9).unwrap();
    let spectrum = compute_spectrum(&w, DEFAULT_MAX_STATES).unwrap();
    let step = step_distribution(&w, DEFAULT_MAX_STATES).unwrap();
    let from_fft = SpectralEvolver::from_step(&step);
    let from_closed = SpectralEvolver::from_spectrum(&spectrum);
    for (a, b) in from_fft.coeffs().iter().zip(from_closed.coeffs()) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn exponent_reduction_agrees_with_unreduced_angles() {
    for preset in Preset::ALL {
        for n in 2..=9 {
            let w = generate(&preset.spec(), n).unwrap();
            let modulus = w.modulus_u64().unwrap();
            if modulus > 10_000 {
                continue;
            }
            let spectrum = compute_spectrum(&w, DEFAULT_MAX_STATES).unwrap();
            let gs = w.residues(u64::MAX);
            for k in 1..=modulus {
                // The unreduced route itself rounds its largest angle to within
                // a few ulps; allow for that on top of 1e-12.
                let largest = 2.0 * PI * (k * gs[n - 1]) as f64 / modulus as f64;
                let tol = 1e-12 + 4.0 * f64::EPSILON * largest;
                let unreduced: Complex64 = gs
                    .iter()
                    .map(|&g| {
                        Complex64::from_polar(1.0, 2.0 * PI * (k * g) as f64 / modulus as f64)
                    })
                    .sum::<Complex64>()
                    / n as f64;
                let got = spectrum.eigenvalue(k).unwrap();
                let err = (got - unreduced).norm();
                assert!(err < tol, "{preset} n={n} k={k} err={err:e}");
            }
        }
    }
}

#[test]
fn direct_and_spectral_evolution_agree_on_random_step_sets() {
    let specs = [
        RecurrenceSpec::new(vec![1, 1], vec![1, 2]).unwrap(),
        RecurrenceSpec::new(vec![1, 0, 1], vec![1, 2, 3]).unwrap(),
        RecurrenceSpec::new(vec![2, -1], vec![1, 3]).unwrap(),
        RecurrenceSpec::geometric(5).unwrap(),
    ];
    for spec in &specs {
        for n in 2..=6 {
            let w = generate(spec, n).unwrap();
            if w.modulus_u64().unwrap() > 10_000 {
                continue;
            }
            let step = step_distribution(&w, DEFAULT_MAX_STATES).unwrap();
            for t in [1, 2, 7, 33, 64] {
                let a = evolve_direct(&step, t);
                let b = evolve(&step, t);
                let err = a
                    .probs()
                    .iter()
                    .zip(b.probs())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                assert!(err <= 1e-9, "{spec:?} n={n} t={t} err={err}");
            }
        }
    }
}

#[test]
fn evolved_mass_stays_normalised() {
    let w = generate(&Preset::Pow3.spec(), 6).unwrap();
    let step = step_distribution(&w, DEFAULT_MAX_STATES).unwrap();
    let evolver = SpectralEvolver::from_step(&step);
    for t in [1, 10, 1_000, 100_000, 1_000_000] {
        let mass: f64 = evolver.distribution_at(t).probs().iter().sum();
        assert!((mass - 1.0).abs() <= 1e-9, "t={t} mass={mass}");
    }
    let far = evolver.distribution_at(1_000_000);
    assert!(tv_to_uniform(&far) < 1e-9);
}

#[test]
fn monte_carlo_tracks_integer_oracle() {
    let w = generate(&Preset::Pow2.spec(), 4).unwrap();
    let cfg = SimConfig::new(&w, 8, 200_000, 2024).unwrap();
    let mut pc = path_counts(Preset::Pow2, 4);
    for (t, tv) in simulate_tv(&cfg) {
        assert!((tv - pc.tv()).abs() < 1e-2, "t={t}: {tv} vs {}", pc.tv());
        pc.advance();
    }
}
