//! Closed-form mixing-time bounds and the quantities their proofs use.
//!
//! Upper bounds:
//! - general recurrences: `kappa n ln(G_n - 1) - kappa n ln(4 eps^2)`,
//!   `kappa = 1 / (4 - 4 cos(pi/(s+1)))`;
//! - first order `{c^{n-1}}`: `kappa n ln((n-1)(c-1)) - kappa n ln(ln(4 eps^2 + 1))`,
//!   `kappa = 1 / (1 - cos(pi/c))`;
//! - the eigenvalue sum itself: smallest `t` with
//!   `(1/4) sum_k |lambda_k|^{2t} <= eps^2`.
//!
//! Lower bounds:
//! - relaxation: `(1/(1 - slem) - 1) ln(1/(2 eps))`;
//! - exponential growth: `(n - gamma ln n)/(gamma ln n) ln(1/(2 eps))`,
//!   `gamma = 2/ln(eta_1) + pi^2/ln 2`;
//! - first order: `(gamma n - 1) ln(1/(2 eps))`, `gamma = 1/(1 - cos(2 pi/c))`.
//!
//! Every logarithm is natural.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, Pow};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::recurrence::{estimate_growth, generate, ln_big, s_value, SequenceWindow};
use crate::spectrum::{compute_spectrum, stream_spectrum, unit_root, Spectrum};
use crate::walk::mixing_time_from_spectrum;

/// Smallest accepted `eta_1 - 1`; `gamma` has a pole at `eta_1 = 1`.
pub const ETA1_MIN_EXCESS: f64 = 1e-9;

fn check_bound_eps(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(domain(format!(
            "bounds need 0 < epsilon < 1/2, got {epsilon}"
        )))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(domain(format!("bounds need n >= 2, got {n}")))
    }
}

pub fn kappa_general(s: u64) -> f64 {
    1.0 / (4.0 - 4.0 * (PI / (s as f64 + 1.0)).cos())
}

/// General upper bound on `t_mix(epsilon)`.
pub fn upper_general(n: usize, modulus: &BigUint, s: u64, epsilon: f64) -> Result<f64> {
    check_n(n)?;
    check_bound_eps(epsilon)?;
    if s == 0 {
        return Err(domain("s must be at least 1"));
    }
    if *modulus < BigUint::from(2u32) {
        return Err(domain("G_n must be at least 2"));
    }
    let kappa = kappa_general(s);
    let ln_states = ln_big(&(modulus - 1u32));
    let n = n as f64;
    Ok(kappa * n * ln_states - kappa * n * (4.0 * epsilon * epsilon).ln())
}

/// `gamma = 2/ln(eta_1) + pi^2/ln 2`.
pub fn gamma_general(eta1: f64) -> Result<f64> {
    if !eta1.is_finite() || eta1 < 1.0 + ETA1_MIN_EXCESS {
        return Err(domain(format!(
            "eta1 must exceed 1 + {ETA1_MIN_EXCESS:e}, got {eta1}"
        )));
    }
    Ok(2.0 / eta1.ln() + PI * PI / LN_2)
}

/// Lower bound for exponentially growing sequences.
pub fn lower_general(n: usize, gamma: f64, epsilon: f64) -> Result<f64> {
    check_n(n)?;
    check_bound_eps(epsilon)?;
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(domain(format!(
            "gamma must be a positive real, got {gamma}"
        )));
    }
    let g = gamma * (n as f64).ln();
    Ok((n as f64 - g) / g * (1.0 / (2.0 * epsilon)).ln())
}

/// Largest `j` in `1..n` with `G_{n-j} / G_n > 1/n`, or 0 when `j = 1`
/// already fails. Compared exactly as `n G_{n-j} > G_n`.
pub fn m_of_n(window: &SequenceWindow) -> usize {
    let n = window.n();
    let top = window.modulus();
    let nn = BigUint::from(n);
    (1..n)
        .take_while(|&j| &nn * window.term(n - j) > *top)
        .last()
        .unwrap_or(0)
}

pub fn kappa_first_order(c: u64) -> f64 {
    1.0 / (1.0 - (PI / c as f64).cos())
}

fn check_c(c: u64) -> Result<()> {
    if c >= 2 {
        Ok(())
    } else {
        Err(domain(format!(
            "first-order base c must be at least 2, got {c}"
        )))
    }
}

/// Upper bound for the first-order sequence `{c^{n-1}}`.
pub fn upper_first_order(c: u64, n: usize, epsilon: f64) -> Result<f64> {
    check_c(c)?;
    check_n(n)?;
    check_bound_eps(epsilon)?;
    let kappa = kappa_first_order(c);
    let n_f = n as f64;
    let spread = ((n - 1) as f64 * (c - 1) as f64).ln();
    let tail = (4.0 * epsilon * epsilon + 1.0).ln().ln();
    Ok(kappa * n_f * spread - kappa * n_f * tail)
}

/// `gamma = 1/(1 - cos(2 pi / c))`; infinite at `c = 2`, reported as an error.
pub fn gamma_first_order(c: u64) -> Result<f64> {
    check_c(c)?;
    if c == 2 {
        return Err(domain(
            "first-order lower bound is undefined at c = 2 (cos(2 pi/2) = 1)",
        ));
    }
    Ok(1.0 / (1.0 - (2.0 * PI / c as f64).cos()))
}

/// Lower bound for the first-order sequence `{c^{n-1}}`, `c >= 3`.
pub fn lower_first_order(c: u64, n: usize, epsilon: f64) -> Result<f64> {
    let gamma = gamma_first_order(c)?;
    check_n(n)?;
    check_bound_eps(epsilon)?;
    Ok((gamma * n as f64 - 1.0) * (1.0 / (2.0 * epsilon)).ln())
}

/// Relaxation-time lower bound from the SLEM.
pub fn relaxation_lower(slem: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&slem) {
        return Err(domain(format!("slem must lie in [0, 1), got {slem}")));
    }
    check_bound_eps(epsilon)?;
    Ok((1.0 / (1.0 - slem) - 1.0) * (1.0 / (2.0 * epsilon)).ln())
}

fn check_ubl_eps(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Smallest `t` with `(1/4) sum_{k=1}^{N-1} |lambda_k|^{2t} <= epsilon^2`.
pub fn ubl_implied_t(spectrum: &Spectrum, epsilon: f64) -> Result<u64> {
    check_ubl_eps(epsilon)?;
    let slem = spectrum.slem()?;
    if slem >= 1.0 {
        return Err(domain("slem is 1; the eigenvalue sum never decays"));
    }
    let target = epsilon * epsilon;
    let moduli_sq: Vec<f64> = spectrum.nontrivial().iter().map(|z| z.norm_sqr()).collect();
    let mut t = 0u64;
    loop {
        let sum = crate::spectrum::ordered_sum(moduli_sq.len(), |i| {
            crate::spectrum::pow_u64(moduli_sq[i], t)
        });
        if 0.25 * sum <= target {
            return Ok(t);
        }
        t += 1;
    }
}

/// Same criterion as [`ubl_implied_t`] on power sums `sums[t]`; `None` when
/// no listed `t` satisfies it.
pub fn ubl_implied_t_from_sums(power_sums: &[f64], epsilon: f64) -> Option<u64> {
    let target = epsilon * epsilon;
    power_sums
        .iter()
        .position(|&s| 0.25 * s <= target)
        .map(|t| t as u64)
}

/// One level of the dominating multiset for first-order moduli.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundLevel {
    /// `n + (m/2)(cos(pi/c) - 1)`
    pub value: f64,
    /// `C(n-1, m) (c-1)^m`
    #[serde(serialize_with = "serialize_big")]
    pub multiplicity: BigUint,
}

fn serialize_big<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// The `n` levels `m = 0..n-1` that dominate the unnormalised eigenvalue
/// moduli of the first-order walk `{c^{n-1}}`. Multiplicities sum to `c^{n-1}`.
pub fn seq2bound_multiset(c: u64, n: usize) -> Result<Vec<BoundLevel>> {
    check_c(c)?;
    check_n(n)?;
    let cos = (PI / c as f64).cos();
    let mut binom = BigUint::one();
    let base = BigUint::from(c - 1);
    Ok((0..n)
        .map(|m| {
            if m > 0 {
                binom = binom.clone() * BigUint::from(n - m) / BigUint::from(m);
            }
            BoundLevel {
                value: n as f64 + m as f64 / 2.0 * (cos - 1.0),
                multiplicity: &binom * Pow::pow(&base, m),
            }
        })
        .collect())
}

/// `|lambda_{c^{n-2}}|` read from the spectrum, its closed form
/// `|xi_c + n - 1| / n`, and the value `1 - (1 - cos(2 pi/c))/n` it bounds
/// from above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderWitness {
    pub measured: f64,
    pub closed_form: f64,
    pub threshold: f64,
}

pub fn first_order_witness(spectrum: &Spectrum, c: u64) -> Result<FirstOrderWitness> {
    check_c(c)?;
    let n = spectrum.n();
    check_n(n)?;
    let k = spectrum.modulus() / c;
    let measured = spectrum.eigenvalue(k)?.norm();
    let closed_form = (unit_root(1, c) + Complex64::new((n - 1) as f64, 0.0)).norm() / n as f64;
    let threshold = 1.0 - (1.0 - (2.0 * PI / c as f64).cos()) / n as f64;
    Ok(FirstOrderWitness {
        measured,
        closed_form,
        threshold,
    })
}

/// Overrides and limits for [`evaluate_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub eta1: Option<f64>,
    pub gamma: Option<f64>,
    pub max_states: u64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            eta1: None,
            gamma: None,
            max_states: crate::DEFAULT_MAX_STATES,
        }
    }
}

/// Every applicable bound for one `(sequence, n, epsilon)`, plus the exact
/// mixing time when the state space is small enough.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub sequence: String,
    pub n: usize,
    /// `G_n` in decimal.
    pub states: String,
    pub epsilon: f64,
    pub s: u64,
    pub kappa_general: f64,
    pub upper_general: f64,
    pub eta1: Option<f64>,
    pub gamma_general: Option<f64>,
    pub m_of_n: usize,
    pub lower_general: Option<f64>,
    pub c: Option<u64>,
    pub kappa_first_order: Option<f64>,
    pub upper_first_order: Option<f64>,
    pub gamma_first_order: Option<f64>,
    pub lower_first_order: Option<f64>,
    pub slem: f64,
    pub relaxation_lower: f64,
    pub ubl_implied_t: Option<u64>,
    pub exact_t_mix: Option<u64>,
}

pub fn evaluate_bounds(
    window: &SequenceWindow,
    sequence: &str,
    epsilon: f64,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let n = window.n();
    check_n(n)?;
    check_bound_eps(epsilon)?;
    let spec = window.spec();
    let s = s_value(spec)?;
    let upper = upper_general(n, window.modulus(), s, epsilon)?;

    let growth_window = if n >= 3 {
        window.clone()
    } else {
        generate(spec, 3)?
    };
    let growth = estimate_growth(&growth_window, opts.eta1)?;
    let gamma = match opts.gamma {
        Some(g) => Some(g),
        None if growth.is_exponential || opts.eta1.is_some() => {
            growth.eta1_lower.map(gamma_general).transpose()?
        }
        None => None,
    };
    let lower_gen = gamma.map(|g| lower_general(n, g, epsilon)).transpose()?;

    let c = window.first_order_base();
    let (kappa_fo, upper_fo, gamma_fo, lower_fo) = match c {
        Some(c) => (
            Some(kappa_first_order(c)),
            Some(upper_first_order(c, n, epsilon)?),
            gamma_first_order(c).ok(),
            lower_first_order(c, n, epsilon).ok(),
        ),
        None => (None, None, None, None),
    };

    let dense = window.modulus_u64().is_some_and(|m| m <= opts.max_states);
    let (slem, ubl, exact) = if dense {
        let spectrum = compute_spectrum(window, opts.max_states)?;
        let slem = spectrum.slem()?;
        let ubl = ubl_implied_t(&spectrum, epsilon)?;
        let exact = mixing_time_from_spectrum(&spectrum, epsilon)?.t_mix;
        (slem, Some(ubl), Some(exact))
    } else {
        let horizon = upper.ceil().max(0.0) as u64 + 1;
        let summary = stream_spectrum(window, horizon)?;
        (
            summary.slem,
            ubl_implied_t_from_sums(&summary.power_sums, epsilon),
            None,
        )
    };

    Ok(BoundReport {
        sequence: sequence.to_string(),
        n,
        states: window.modulus().to_string(),
        epsilon,
        s,
        kappa_general: kappa_general(s),
        upper_general: upper,
        eta1: growth.eta1_lower,
        gamma_general: gamma,
        m_of_n: m_of_n(window),
        lower_general: lower_gen,
        c,
        kappa_first_order: kappa_fo,
        upper_first_order: upper_fo,
        gamma_first_order: gamma_fo,
        lower_first_order: lower_fo,
        slem,
        relaxation_lower: relaxation_lower(slem, epsilon)?,
        ubl_implied_t: ubl,
        exact_t_mix: exact,
    })
}

impl BoundReport {
    /// Bounds contradicted by the exact mixing time (empty when the exact
    /// value is absent or everything brackets it).
    pub fn violations(&self) -> Vec<String> {
        let Some(t) = self.exact_t_mix else {
            return Vec::new();
        };
        let tf = t as f64;
        let mut out = Vec::new();
        let lowers = [
            ("relaxation_lower", Some(self.relaxation_lower)),
            ("lower_general", self.lower_general),
            ("lower_first_order", self.lower_first_order),
        ];
        for (name, v) in lowers {
            if let Some(v) = v {
                if v > tf + 1e-9 {
                    out.push(format!("{name} = {v} exceeds t_mix = {t}"));
                }
            }
        }
        let uppers = [
            ("upper_general", Some(self.upper_general)),
            ("upper_first_order", self.upper_first_order),
            ("ubl_implied_t", self.ubl_implied_t.map(|u| u as f64)),
        ];
        for (name, v) in uppers {
            if let Some(v) = v {
                if tf > v.ceil() {
                    out.push(format!("t_mix = {t} exceeds ceil({name}) = {}", v.ceil()));
                }
            }
        }
        out
    }
}
