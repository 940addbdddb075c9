//! Exact distributions of the walk, total-variation distance to uniform and
//! mixing times.
//!
//! Evolution has two routes. The spectral route raises each Fourier
//! coefficient to the `t`-th power and inverts with one FFT; the direct route
//! repeatedly convolves with the (sparse) step law. Mixing-time scans use the
//! spectral route.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::recurrence::SequenceWindow;
use crate::spectrum::{compute_spectrum, Spectrum};

/// Slack allowed when comparing a floating TV distance against `epsilon`, so
/// that exact ties count as mixed.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Hard stop for mixing-time scans.
pub const MAX_SCAN_STEPS: u64 = 1_000_000;

/// A probability vector over Z/N.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates `probs` against the given tolerances: no entry below
    /// `-negative_dust` and total mass within `mass_tol` of 1.
    pub fn with_tolerance(probs: Vec<f64>, negative_dust: f64, mass_tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no states".into()));
        }
        if let Some((x, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| p.is_nan() || **p < -negative_dust)
        {
            return Err(Error::InvalidDistribution(format!("probs[{x}] = {p}")));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > mass_tol {
            return Err(Error::InvalidDistribution(format!("total mass {mass}")));
        }
        Ok(Self { probs })
    }

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, 1e-15, 1e-12)
    }

    pub fn point_mass(states: usize) -> Self {
        let mut probs = vec![0.0; states.max(1)];
        probs[0] = 1.0;
        Self { probs }
    }

    pub fn uniform(states: usize) -> Self {
        Self {
            probs: vec![1.0 / states as f64; states],
        }
    }

    pub fn states(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// Law of one step: `probs[x] = #{i : G_i = x mod N} / n`.
pub fn step_distribution(window: &SequenceWindow, max_states: u64) -> Result<Distribution> {
    let modulus = window.modulus_capped(max_states)?;
    let weight = 1.0 / window.n() as f64;
    let mut probs = vec![0.0; modulus as usize];
    for r in window.residues(modulus) {
        probs[r as usize] += weight;
    }
    Ok(Distribution { probs })
}

/// Distribution after `t` steps from the point mass at 0, by `t` sparse
/// cyclic convolutions. Cost `O(t * N * |support|)`.
pub fn evolve_direct(step: &Distribution, t: u64) -> Distribution {
    let n = step.states();
    let support: Vec<(usize, f64)> = step
        .probs
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, p)| p != 0.0)
        .collect();
    let mut cur = Distribution::point_mass(n).probs;
    let mut next = vec![0.0; n];
    for _ in 0..t {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (x, &p) in cur.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for &(s, q) in &support {
                let y = if x + s >= n { x + s - n } else { x + s };
                next[y] += p * q;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Distribution { probs: cur }
}

/// `z^t` by repeated squaring, pulling intermediate results back onto the
/// unit circle whenever rounding pushes them outside it.
pub fn pow_clamped(z: Complex64, mut t: u64) -> Complex64 {
    fn clamp(z: Complex64) -> Complex64 {
        let r = z.norm();
        if r > 1.0 {
            z / r
        } else {
            z
        }
    }
    let mut acc = Complex64::new(1.0, 0.0);
    let mut base = clamp(z);
    while t > 0 {
        if t & 1 == 1 {
            acc = clamp(acc * base);
        }
        t >>= 1;
        if t > 0 {
            base = clamp(base * base);
        }
    }
    acc
}

/// Spectral evolution: holds the Fourier coefficients of the step law and
/// an FFT plan, and produces the `t`-step distribution in `O(N log N)`.
pub struct SpectralEvolver {
    /// `coeffs[k mod N] = lambda_k`
    coeffs: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
}

impl SpectralEvolver {
    /// Coefficients from the closed-form spectrum.
    pub fn from_spectrum(spectrum: &Spectrum) -> Self {
        let ev = spectrum.eigenvalues();
        let n = ev.len();
        let mut coeffs = Vec::with_capacity(n);
        coeffs.push(ev[n - 1]);
        coeffs.extend_from_slice(&ev[..n - 1]);
        Self::from_coeffs(coeffs)
    }

    /// Coefficients `lambda_k = sum_x p(x) exp(2 pi i k x / N)` of an
    /// arbitrary step law, by FFT.
    pub fn from_step(step: &Distribution) -> Self {
        let n = step.states();
        let mut buf: Vec<Complex64> = step.probs.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        Self::from_coeffs(buf)
    }

    fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(coeffs.len());
        Self { coeffs, fft }
    }

    pub fn states(&self) -> usize {
        self.coeffs.len()
    }

    /// Fourier coefficients indexed by `k mod N`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `p_t(x) = (1/N) sum_k lambda_k^t exp(-2 pi i k x / N)`.
    pub fn distribution_at(&self, t: u64) -> Distribution {
        let n = self.coeffs.len();
        let mut buf: Vec<Complex64> = self.coeffs.iter().map(|&z| pow_clamped(z, t)).collect();
        self.fft.process(&mut buf);
        let scale = 1.0 / n as f64;
        Distribution {
            probs: buf.into_iter().map(|z| z.re * scale).collect(),
        }
    }
}

/// Distribution after `t` steps from the point mass at 0 (spectral route).
pub fn evolve(step: &Distribution, t: u64) -> Distribution {
    if t == 0 {
        return Distribution::point_mass(step.states());
    }
    SpectralEvolver::from_step(step).distribution_at(t)
}

/// `(1/2) sum_x |p(x) - 1/N|`.
pub fn tv_to_uniform(dist: &Distribution) -> f64 {
    let u = 1.0 / dist.states() as f64;
    0.5 * dist.probs.iter().map(|p| (p - u).abs()).sum::<f64>()
}

/// Exact mixing time and the scanned TV curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingResult {
    pub n: usize,
    pub states: u64,
    pub epsilon: f64,
    pub t_mix: u64,
    /// `(t, tv)` for every scanned `t = 0..=t_mix`.
    pub tv_curve: Vec<(u64, f64)>,
}

/// Smallest `t` with `TV(P_0^t, uniform) <= epsilon`, by forward scan.
pub fn mixing_time(window: &SequenceWindow, epsilon: f64, max_states: u64) -> Result<MixingResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let states = window.modulus_capped(max_states)?;
    let n = window.n();
    if states == 1 {
        return Ok(MixingResult {
            n,
            states,
            epsilon,
            t_mix: 0,
            tv_curve: vec![(0, 0.0)],
        });
    }
    let spectrum = compute_spectrum(window, max_states)?;
    mixing_time_from_spectrum(&spectrum, epsilon)
}

/// Mixing-time scan over an already computed spectrum.
pub fn mixing_time_from_spectrum(spectrum: &Spectrum, epsilon: f64) -> Result<MixingResult> {
    let evolver = SpectralEvolver::from_spectrum(spectrum);
    let mut tv_curve = Vec::new();
    for t in 0..=MAX_SCAN_STEPS {
        let tv = if t == 0 {
            tv_to_uniform(&Distribution::point_mass(evolver.states()))
        } else {
            tv_to_uniform(&evolver.distribution_at(t))
        };
        tv_curve.push((t, tv));
        if tv <= epsilon + TIE_TOLERANCE {
            return Ok(MixingResult {
                n: spectrum.n(),
                states: spectrum.modulus(),
                epsilon,
                t_mix: t,
                tv_curve,
            });
        }
    }
    Err(Error::NoMixing {
        steps: MAX_SCAN_STEPS,
    })
}
