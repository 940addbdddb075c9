//! Eigenvalues of the circulant transition matrix.
//!
//! For the walk on Z/N with step set `{G_1, ..., G_n}` the eigenvalues are
//!
//! ```text
//! lambda_k = (1/n) * sum_i exp(2 pi i * (k G_i mod N) / N),   k = 1..N
//! ```
//!
//! The product `k G_i` is reduced modulo `N` in integer arithmetic before it
//! is turned into an angle; the unreduced angle loses all precision once
//! `k G_i` passes 2^53. Eigenvalues are indexed from 1 so that `lambda_N = 1`
//! is the trivial one.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::recurrence::{generate, RecurrenceSpec, SequenceWindow};

/// Largest state space the streaming pass will walk over.
pub const STREAM_MAX_STATES: u64 = 1 << 36;

const CHUNK: usize = 4096;

/// `exp(2 pi i r / N)` for `0 <= r < N`, using the representative of `r`
/// in `(-N/2, N/2]` so the angle stays in `[-pi, pi]`.
pub fn unit_root(r: u64, modulus: u64) -> Complex64 {
    debug_assert!(r < modulus);
    let signed = if r > modulus / 2 {
        r as f64 - modulus as f64
    } else {
        r as f64
    };
    let (s, c) = (TAU * signed / modulus as f64).sin_cos();
    Complex64::new(c, s)
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Unnormalised eigenvalue `sum_i exp(2 pi i k r_i / N)` for residues `r_i`.
/// The summation order over `i` is fixed.
pub fn unnormalized_from_residues(residues: &[u64], modulus: u64, k: u64) -> Complex64 {
    let k = k % modulus;
    residues.iter().fold(Complex64::new(0.0, 0.0), |acc, &r| {
        acc + unit_root(mul_mod(k, r, modulus), modulus)
    })
}

/// Sum of `f(i)` over `0..len` in fixed-size chunks reduced in index order,
/// so the result does not depend on the thread count.
pub(crate) fn ordered_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).sum())
        .collect();
    partials.iter().sum()
}

pub(crate) fn pow_u64(x: f64, t: u64) -> f64 {
    match i32::try_from(t) {
        Ok(t) => x.powi(t),
        Err(_) => x.powf(t as f64),
    }
}

/// Full spectrum of the transition matrix of one walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    modulus: u64,
    /// `eigenvalues[k - 1] = lambda_k`
    eigenvalues: Vec<Complex64>,
    slem: Option<f64>,
}

/// `n * lambda_{n,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnnormalizedEigenvalue {
    pub n: usize,
    pub k: u64,
    #[serde(serialize_with = "serialize_complex")]
    pub value: Complex64,
}

fn serialize_complex<S: serde::Serializer>(
    z: &Complex64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Computes all `G_n` eigenvalues; `G_n` must not exceed `max_states`.
pub fn compute_spectrum(window: &SequenceWindow, max_states: u64) -> Result<Spectrum> {
    let modulus = window.modulus_capped(max_states)?;
    let residues = window.residues(modulus);
    let n = window.n();
    let scale = 1.0 / n as f64;
    let eigenvalues: Vec<Complex64> = (1..=modulus)
        .into_par_iter()
        .map(|k| unnormalized_from_residues(&residues, modulus, k) * scale)
        .collect();
    let slem = (modulus > 1).then(|| {
        eigenvalues[..eigenvalues.len() - 1]
            .par_iter()
            .map(|z| z.norm())
            .reduce(|| 0.0, f64::max)
    });
    Ok(Spectrum {
        n,
        modulus,
        eigenvalues,
        slem,
    })
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of states `N = G_n`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// All eigenvalues, `lambda_1` first and `lambda_N = 1` last.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// `lambda_k` for `1 <= k <= N`.
    pub fn eigenvalue(&self, k: u64) -> Result<Complex64> {
        if k == 0 || k > self.modulus {
            return Err(Error::IndexOutOfRange {
                k,
                max: self.modulus,
            });
        }
        Ok(self.eigenvalues[(k - 1) as usize])
    }

    pub fn unnormalized(&self, k: u64) -> Result<UnnormalizedEigenvalue> {
        let value = self.eigenvalue(k)? * self.n as f64;
        Ok(UnnormalizedEigenvalue {
            n: self.n,
            k,
            value,
        })
    }

    /// Eigenvalues `lambda_1..lambda_{N-1}`.
    pub fn nontrivial(&self) -> &[Complex64] {
        &self.eigenvalues[..self.eigenvalues.len() - 1]
    }

    /// Second largest eigenvalue modulus.
    pub fn slem(&self) -> Result<f64> {
        self.slem.ok_or(Error::DegenerateStateSpace)
    }

    /// `sum_{k=1}^{N-1} |lambda_k|^{2t}`.
    pub fn power_sum(&self, t: u64) -> f64 {
        let nontrivial = self.nontrivial();
        ordered_sum(nontrivial.len(), |i| pow_u64(nontrivial[i].norm_sqr(), t))
    }

    /// The `top` eigenvalues of largest modulus as `(k, lambda_k)`, ties
    /// broken by increasing `k`.
    pub fn top_by_modulus(&self, top: usize) -> Vec<(u64, Complex64)> {
        let mut idx: Vec<u64> = (1..=self.modulus).collect();
        idx.sort_by(|&a, &b| {
            let (za, zb) = (
                self.eigenvalues[(a - 1) as usize],
                self.eigenvalues[(b - 1) as usize],
            );
            zb.norm().total_cmp(&za.norm()).then(a.cmp(&b))
        });
        idx.truncate(top);
        idx.into_iter()
            .map(|k| (k, self.eigenvalues[(k - 1) as usize]))
            .collect()
    }
}

/// Second largest eigenvalue modulus of a spectrum.
pub fn slem(spectrum: &Spectrum) -> Result<f64> {
    spectrum.slem()
}

/// SLEM and eigenvalue power sums from a single pass over `k` without
/// storing the spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSummary {
    pub modulus: u64,
    pub slem: f64,
    /// `power_sums[t] = sum_{k=1}^{N-1} |lambda_k|^{2t}` for `t = 0..=t_max`.
    pub power_sums: Vec<f64>,
}

pub fn stream_spectrum(window: &SequenceWindow, t_max: u64) -> Result<StreamSummary> {
    let modulus = window.modulus_capped(STREAM_MAX_STATES)?;
    if modulus < 2 {
        return Err(Error::DegenerateStateSpace);
    }
    let residues = window.residues(modulus);
    let scale = 1.0 / window.n() as f64;
    let terms = t_max as usize + 1;
    let nontrivial = modulus - 1;
    let chunks = nontrivial.div_ceil(CHUNK as u64);
    let partials: Vec<(f64, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = 1 + c * CHUNK as u64;
            let hi = (lo + CHUNK as u64).min(modulus);
            let mut best = 0.0f64;
            let mut sums = vec![0.0; terms];
            for k in lo..hi {
                let m2 = (unnormalized_from_residues(&residues, modulus, k) * scale).norm_sqr();
                best = best.max(m2);
                let mut p = 1.0;
                for s in sums.iter_mut() {
                    *s += p;
                    p *= m2;
                }
            }
            (best, sums)
        })
        .collect();
    let mut best = 0.0f64;
    let mut power_sums = vec![0.0; terms];
    for (b, sums) in partials {
        best = best.max(b);
        for (acc, s) in power_sums.iter_mut().zip(sums) {
            *acc += s;
        }
    }
    Ok(StreamSummary {
        modulus,
        slem: best.sqrt(),
        power_sums,
    })
}

/// `sum_{i=0}^{n-1} xi_{c^i}^k`, the unnormalised eigenvalue of the
/// first-order walk `{c^{n-1}}`, evaluated term by term.
pub fn unnormalized_first_order(c: u64, n: usize, k: u64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut ci: u64 = 1;
    for i in 0..n {
        acc += unit_root(k % ci, ci);
        if i + 1 < n {
            ci = ci.checked_mul(c).expect("c^(n-1) fits in u64");
        }
    }
    acc
}

/// Lifts `lambda~_{n,k}` of the first-order walk to the `c` eigenvalues
/// `lambda~_{n+1, k + j c^{n-1}}`, `j = 0..c-1`, each computed directly from
/// the level-`n+1` walk.
pub fn lift_eigenvalue(window: &SequenceWindow, k: u64) -> Result<Vec<(u64, Complex64)>> {
    let c = window.first_order_base().ok_or(Error::NotFirstOrder)?;
    let n = window.n();
    let level = window
        .modulus_u64()
        .ok_or_else(|| domain("c^(n-1) does not fit in u64"))?;
    if k == 0 || k > level {
        return Err(Error::IndexOutOfRange { k, max: level });
    }
    let next_modulus = level
        .checked_mul(c)
        .ok_or_else(|| domain("c^n does not fit in u64"))?;
    let next = generate(window.spec(), n + 1)?;
    let residues = next.residues(next_modulus);
    Ok((0..c)
        .map(|j| {
            let idx = k + j * level;
            (
                idx,
                unnormalized_from_residues(&residues, next_modulus, idx),
            )
        })
        .collect())
}

/// Largest deviation from the lifting identity
/// `lambda~_{n+1, k + j c^{n-1}} = lambda~_{n,k} + xi_{c^n}^{k + j c^{n-1}}`
/// over all `k` and `j` at level `n`.
pub fn lifting_error(c: u64, n: usize) -> Result<f64> {
    let window = generate(&RecurrenceSpec::geometric(c)?, n)?;
    let level = window
        .modulus_u64()
        .ok_or_else(|| domain("c^(n-1) does not fit in u64"))?;
    let next_modulus = level
        .checked_mul(c)
        .ok_or_else(|| domain("c^n does not fit in u64"))?;
    let here = window.residues(level);
    let next = generate(window.spec(), n + 1)?.residues(next_modulus);
    let worst = (1..=level)
        .into_par_iter()
        .map(|k| {
            let base = unnormalized_from_residues(&here, level, k);
            (0..c)
                .map(|j| {
                    let idx = k + j * level;
                    let lifted = unnormalized_from_residues(&next, next_modulus, idx);
                    let predicted = base + unit_root(idx % next_modulus, next_modulus);
                    (lifted - predicted).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}
