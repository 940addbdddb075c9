//! Numerical checks of the eigenvalue inequalities behind the bounds.
//!
//! Each suite sweeps a family of walks and reports the worst slack, i.e. the
//! smallest value of `bound - measured` over every case it checked.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Pow;
use serde::Serialize;

use crate::bounds::{seq2bound_multiset, ubl_implied_t};
use crate::error::{domain, Error, Result};
use crate::recurrence::{generate, s_value, Preset, RecurrenceSpec};
use crate::spectrum::{compute_spectrum, lifting_error};
use crate::walk::{tv_to_uniform, Distribution, SpectralEvolver};
use crate::DEFAULT_MAX_STATES;

const MAX_LISTED_FAILURES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    EigmodBound,
    AngleCover,
    Lifting,
    MultisetDomination,
    UblConsistency,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::EigmodBound,
        Suite::AngleCover,
        Suite::Lifting,
        Suite::MultisetDomination,
        Suite::UblConsistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::EigmodBound => "eigmod-bound",
            Suite::AngleCover => "angle-cover",
            Suite::Lifting => "lifting",
            Suite::MultisetDomination => "multiset-domination",
            Suite::UblConsistency => "ubl-consistency",
        }
    }

    /// Slack below which a case counts as a failure.
    pub fn tolerance(self) -> f64 {
        match self {
            Suite::EigmodBound => -1e-12,
            Suite::AngleCover => 0.0,
            Suite::Lifting => 0.0,
            Suite::MultisetDomination => -1e-9,
            Suite::UblConsistency => -1e-9,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

/// Resolves a suite name, with `all` selecting every suite.
pub fn select_suites(name: &str) -> Result<Vec<Suite>> {
    if name == "all" {
        Ok(Suite::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

/// What each suite sweeps over.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyLimits {
    /// Named sequences for the per-sequence suites.
    pub sequences: Vec<(String, RecurrenceSpec)>,
    pub n_min: usize,
    pub n_max: usize,
    pub max_states: u64,
    /// Target distance for the UBL scan horizon.
    pub epsilon: f64,
    pub lift_bases: Vec<u64>,
    /// Largest `c^n` checked by the lifting suite.
    pub lift_cap: u64,
    pub domination_bases: Vec<u64>,
    /// Largest `c^{n-1}` checked by the domination suite.
    pub domination_cap: u64,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        Self {
            sequences: Preset::ALL
                .iter()
                .map(|p| (p.name().to_string(), p.spec()))
                .collect(),
            n_min: 2,
            n_max: 8,
            max_states: DEFAULT_MAX_STATES,
            epsilon: 0.25,
            lift_bases: vec![2, 3],
            lift_cap: 100_000,
            domination_bases: vec![2, 3, 4],
            domination_cap: 100_000,
        }
    }
}

impl VerifyLimits {
    fn check(&self) -> Result<()> {
        if self.n_min < 2 {
            return Err(domain(format!(
                "suite requires n >= 2, got n_min = {}",
                self.n_min
            )));
        }
        if self.n_max < self.n_min {
            return Err(domain(format!(
                "n_max = {} is below n_min = {}",
                self.n_max, self.n_min
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub cases: u64,
    pub worst_slack: f64,
    pub worst_case: String,
    pub tolerance: f64,
    /// First few failing cases.
    pub failures: Vec<String>,
}

struct Tracker {
    suite: Suite,
    cases: u64,
    worst_slack: f64,
    worst_case: String,
    failures: Vec<String>,
    failed: bool,
}

impl Tracker {
    fn new(suite: Suite) -> Self {
        Self {
            suite,
            cases: 0,
            worst_slack: f64::INFINITY,
            worst_case: String::new(),
            failures: Vec::new(),
            failed: false,
        }
    }

    fn record(&mut self, slack: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        let failing = slack.is_nan() || slack < self.suite.tolerance();
        let worse = slack < self.worst_slack || self.worst_case.is_empty();
        let listed = failing && self.failures.len() < MAX_LISTED_FAILURES;
        if worse || listed {
            let label = case();
            if listed {
                self.failures.push(format!("{label}: slack {slack:e}"));
            }
            if worse {
                self.worst_slack = slack;
                self.worst_case = label;
            }
        }
        self.failed |= failing;
    }

    /// A failure that has no numeric slack.
    fn fail(&mut self, message: String) {
        self.failed = true;
        if self.failures.len() < MAX_LISTED_FAILURES {
            self.failures.push(message);
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite,
            passed: !self.failed && self.cases > 0,
            cases: self.cases,
            worst_slack: self.worst_slack,
            worst_case: self.worst_case,
            tolerance: self.suite.tolerance(),
            failures: self.failures,
        }
    }
}

pub fn run_suites(suites: &[Suite], limits: &VerifyLimits) -> Result<Vec<SuiteReport>> {
    suites.iter().map(|&s| run_suite(s, limits)).collect()
}

pub fn run_suite(suite: Suite, limits: &VerifyLimits) -> Result<SuiteReport> {
    limits.check()?;
    match suite {
        Suite::EigmodBound => eigmod_bound(limits),
        Suite::AngleCover => angle_cover(limits),
        Suite::Lifting => lifting(limits),
        Suite::MultisetDomination => multiset_domination(limits),
        Suite::UblConsistency => ubl_consistency(limits),
    }
}

/// `1 - (2/n)(1 - |cos(pi/(s+1))|)`.
pub fn eigmod_bound_value(n: usize, s: u64) -> f64 {
    1.0 - 2.0 / n as f64 * (1.0 - (PI / (s as f64 + 1.0)).cos().abs())
}

fn eigmod_bound(limits: &VerifyLimits) -> Result<SuiteReport> {
    let mut tr = Tracker::new(Suite::EigmodBound);
    for (name, spec) in &limits.sequences {
        let s = s_value(spec)?;
        for n in limits.n_min..=limits.n_max {
            let spectrum = compute_spectrum(&generate(spec, n)?, limits.max_states)?;
            let bound = eigmod_bound_value(n, s);
            for (i, z) in spectrum.nontrivial().iter().enumerate() {
                tr.record(bound - z.norm(), || format!("{name} n={n} k={}", i + 1));
            }
        }
    }
    Ok(tr.finish())
}

fn angle_cover(limits: &VerifyLimits) -> Result<SuiteReport> {
    let mut tr = Tracker::new(Suite::AngleCover);
    for (name, spec) in &limits.sequences {
        let s = s_value(spec)? as u128;
        for n in limits.n_min..=limits.n_max {
            let window = generate(spec, n)?;
            let modulus = window.modulus_capped(limits.max_states)?;
            let big_n = modulus as u128;
            let residues = window.residues(modulus);
            let scale = ((s + 1) * big_n) as f64;
            for k in 1..modulus {
                // angle 2 pi r / N lies in [2 pi/(s+1), 2 pi s/(s+1)]
                // iff (s+1) r >= N and (s+1) r <= s N.
                let best = residues[..n - 1]
                    .iter()
                    .map(|&g| {
                        let r = (k as u128 * g as u128) % big_n;
                        let scaled = (s + 1) * r;
                        let lo = scaled as i128 - big_n as i128;
                        let hi = (s * big_n) as i128 - scaled as i128;
                        lo.min(hi)
                    })
                    .max()
                    .unwrap_or(i128::MIN);
                if best == i128::MIN {
                    tr.fail(format!("{name} n={n} k={k}: no candidate j"));
                    continue;
                }
                tr.record(best as f64 / scale, || format!("{name} n={n} k={k}"));
            }
        }
    }
    Ok(tr.finish())
}

/// Threshold on the lifting-identity error.
pub const LIFTING_TOLERANCE: f64 = 1e-9;

fn lifting(limits: &VerifyLimits) -> Result<SuiteReport> {
    let mut tr = Tracker::new(Suite::Lifting);
    for &c in &limits.lift_bases {
        let mut n = 1usize;
        while c
            .checked_pow(n as u32)
            .is_some_and(|p| p <= limits.lift_cap)
        {
            let err = lifting_error(c, n)?;
            // strict: error must stay below the tolerance
            let slack = if err < LIFTING_TOLERANCE {
                LIFTING_TOLERANCE - err
            } else {
                -err
            };
            tr.record(slack, || format!("c={c} n={n} max error {err:e}"));
            n += 1;
        }
    }
    Ok(tr.finish())
}

/// Worst pairwise slack between descending unnormalised moduli and the
/// descending expansion of the bound multiset, and whether the multiset
/// totals `c^{n-1}` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationCheck {
    pub worst_slack: f64,
    pub total_matches: bool,
    pub pairs: usize,
}

pub fn domination_check(c: u64, n: usize, max_states: u64) -> Result<DominationCheck> {
    let spec = RecurrenceSpec::geometric(c)?;
    let spectrum = compute_spectrum(&generate(&spec, n)?, max_states)?;
    let scale = n as f64;
    let mut moduli: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .map(|z| z.norm() * scale)
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));

    let levels = seq2bound_multiset(c, n)?;
    let total: BigUint = levels.iter().map(|l| &l.multiplicity).sum();
    let expected: BigUint = Pow::pow(BigUint::from(c), (n - 1) as u32);
    let total_matches = total == expected;

    let mut bounds: Vec<f64> = Vec::with_capacity(moduli.len());
    for level in &levels {
        let count: u64 = level.multiplicity.clone().try_into().unwrap_or(u64::MAX);
        let room = moduli.len().saturating_sub(bounds.len()) as u64;
        bounds.extend(std::iter::repeat_n(level.value, count.min(room) as usize));
    }
    bounds.sort_by(|a, b| b.total_cmp(a));
    let worst_slack = moduli
        .iter()
        .zip(&bounds)
        .map(|(m, b)| b - m)
        .fold(f64::INFINITY, f64::min);
    let pairs = moduli.len().min(bounds.len());
    let total_matches = total_matches && pairs == moduli.len();
    Ok(DominationCheck {
        worst_slack,
        total_matches,
        pairs,
    })
}

fn multiset_domination(limits: &VerifyLimits) -> Result<SuiteReport> {
    let mut tr = Tracker::new(Suite::MultisetDomination);
    for &c in &limits.domination_bases {
        let mut n = 2usize;
        while c
            .checked_pow((n - 1) as u32)
            .is_some_and(|p| p <= limits.domination_cap)
        {
            let check = domination_check(c, n, limits.max_states)?;
            if !check.total_matches {
                tr.fail(format!("c={c} n={n}: multiplicities do not total c^(n-1)"));
            }
            tr.record(check.worst_slack, || format!("c={c} n={n}"));
            n += 1;
        }
    }
    Ok(tr.finish())
}

fn ubl_consistency(limits: &VerifyLimits) -> Result<SuiteReport> {
    let mut tr = Tracker::new(Suite::UblConsistency);
    for (name, spec) in &limits.sequences {
        for n in limits.n_min..=limits.n_max {
            let spectrum = compute_spectrum(&generate(spec, n)?, limits.max_states)?;
            let horizon = ubl_implied_t(&spectrum, limits.epsilon)?;
            let evolver = SpectralEvolver::from_spectrum(&spectrum);
            for t in 0..=horizon {
                let dist = if t == 0 {
                    Distribution::point_mass(evolver.states())
                } else {
                    evolver.distribution_at(t)
                };
                let tv = tv_to_uniform(&dist);
                let slack = 0.25 * spectrum.power_sum(t) - tv * tv;
                tr.record(slack, || format!("{name} n={n} t={t}"));
            }
        }
    }
    Ok(tr.finish())
}
