//! Linear-recurrence integer sequences `G_n = a_1 G_{n-1} + ... + a_d G_{n-d}`
//! with `G_1 = 1`, generated in exact arithmetic.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Threshold on the asymptotic growth ratio separating exponential from
/// polynomial growth.
pub const GROWTH_DELTA: f64 = 1e-6;

/// Number of renormalised floating-point recurrence steps used to estimate
/// the asymptotic growth ratio. A sequence growing like `m^p` has ratio
/// `1 + p/m` there, well below `1 + GROWTH_DELTA` for `p < 8`.
const ASYMPTOTIC_STEPS: usize = 1 << 23;

/// Coefficients and initial terms of a linear recurrence.
///
/// Serialises as `{"coeffs": [...], "init": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecurrenceSpec {
    coeffs: Vec<i64>,
    init: Vec<u64>,
}

impl RecurrenceSpec {
    pub fn new(coeffs: Vec<i64>, init: Vec<u64>) -> Result<Self> {
        let spec = Self { coeffs, init };
        spec.validate()?;
        Ok(spec)
    }

    /// First-order sequence `1, c, c^2, ...`.
    pub fn geometric(c: u64) -> Result<Self> {
        if c < 2 {
            return Err(domain(format!(
                "geometric base must be at least 2, got {c}"
            )));
        }
        let c = i64::try_from(c).map_err(|_| domain("geometric base does not fit in i64"))?;
        Self::new(vec![c], vec![1])
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() {
            return Err(Error::EmptyRecurrence);
        }
        if self.init.len() != self.coeffs.len() {
            return Err(Error::InitialTermsMismatch {
                order: self.coeffs.len(),
                got: self.init.len(),
            });
        }
        if self.init[0] != 1 {
            return Err(Error::FirstTermNotOne(self.init[0]));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn init(&self) -> &[u64] {
        &self.init
    }

    /// `Some(c)` when this is the first-order recurrence `G_n = c G_{n-1}`
    /// with `G_1 = 1` and `c > 1`.
    pub fn first_order_base(&self) -> Option<u64> {
        match (self.coeffs.as_slice(), self.init.as_slice()) {
            ([c], [1]) if *c > 1 => Some(*c as u64),
            _ => None,
        }
    }
}

/// Sum of the positive recurrence coefficients.
pub fn s_value(spec: &RecurrenceSpec) -> Result<u64> {
    let s: u64 = spec
        .coeffs
        .iter()
        .filter(|&&a| a > 0)
        .map(|&a| a as u64)
        .sum();
    if s == 0 {
        return Err(Error::NoPositiveCoefficient);
    }
    Ok(s)
}

/// The three sequences of the reference mixing-time table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `G_n = 2^{n-1}`
    Pow2,
    /// `G_n = 3^{n-1}`
    Pow3,
    /// `G_n = 3 G_{n-1} - G_{n-2}` with `G_1 = 1, G_2 = 3`
    FibOdd,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Pow2, Preset::Pow3, Preset::FibOdd];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Pow2 => "pow2",
            Preset::Pow3 => "pow3",
            Preset::FibOdd => "fib-odd",
        }
    }

    pub fn spec(self) -> RecurrenceSpec {
        match self {
            Preset::Pow2 => RecurrenceSpec {
                coeffs: vec![2],
                init: vec![1],
            },
            Preset::Pow3 => RecurrenceSpec {
                coeffs: vec![3],
                init: vec![1],
            },
            Preset::FibOdd => RecurrenceSpec {
                coeffs: vec![3, -1],
                init: vec![1, 3],
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| domain(format!("unknown preset `{s}`")))
    }
}

/// The exact values `G_1, ..., G_n` of a recurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceWindow {
    spec: RecurrenceSpec,
    values: Vec<BigUint>,
}

/// Generates `G_1..G_n`, rejecting sequences that are not positive and
/// strictly increasing.
pub fn generate(spec: &RecurrenceSpec, n: usize) -> Result<SequenceWindow> {
    spec.validate()?;
    if n == 0 {
        return Err(domain("window length n must be at least 1"));
    }
    let d = spec.order();
    let mut signed: Vec<BigInt> = Vec::with_capacity(n);
    for i in 0..n {
        let next = if i < d {
            BigInt::from(spec.init[i])
        } else {
            spec.coeffs
                .iter()
                .enumerate()
                .map(|(j, &a)| BigInt::from(a) * &signed[i - 1 - j])
                .sum()
        };
        if next.sign() != Sign::Plus {
            return Err(Error::NonPositiveTerm {
                index: i + 1,
                value: next.to_string(),
            });
        }
        if i > 0 && next <= signed[i - 1] {
            return Err(Error::NonIncreasingSequence { index: i + 1 });
        }
        signed.push(next);
    }
    let values = signed
        .into_iter()
        .map(|v| v.to_biguint().expect("checked positive"))
        .collect();
    Ok(SequenceWindow {
        spec: spec.clone(),
        values,
    })
}

impl SequenceWindow {
    pub fn spec(&self) -> &RecurrenceSpec {
        &self.spec
    }

    /// Window length `n` (number of steps in the step set).
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// `G_i` for 1-based `i`.
    pub fn term(&self, i: usize) -> &BigUint {
        &self.values[i - 1]
    }

    /// The modulus `G_n`.
    pub fn modulus(&self) -> &BigUint {
        self.values.last().expect("window is non-empty")
    }

    pub fn modulus_u64(&self) -> Option<u64> {
        self.modulus().to_u64()
    }

    /// `G_n` as a `u64` no larger than `cap`.
    pub fn modulus_capped(&self, cap: u64) -> Result<u64> {
        match self.modulus_u64() {
            Some(m) if m <= cap => Ok(m),
            _ => Err(Error::StateSpaceTooLarge {
                states: self.modulus().to_string(),
                cap,
            }),
        }
    }

    /// Step residues `G_i mod N` for a modulus that fits a machine word.
    pub fn residues(&self, modulus: u64) -> Vec<u64> {
        let m = BigUint::from(modulus);
        self.values
            .iter()
            .map(|g| (g % &m).to_u64().expect("residue below a u64 modulus"))
            .collect()
    }

    /// The first-order base `c` when this window is `1, c, ..., c^{n-1}`.
    pub fn first_order_base(&self) -> Option<u64> {
        self.spec.first_order_base()
    }
}

/// Growth-rate summary for a generated window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthEstimate {
    /// Last ratio `G_n / G_{n-1}` in the window.
    pub dominant_rate: f64,
    /// Ratio of consecutive terms after extending the recurrence by
    /// `2^23` renormalised floating-point steps.
    pub asymptotic_rate: f64,
    /// `asymptotic_rate >= 1 + GROWTH_DELTA`.
    pub is_exponential: bool,
    /// Lower growth base: the override when given, otherwise the smallest
    /// ratio in the trailing half of the window (only for exponential
    /// sequences).
    pub eta1_lower: Option<f64>,
}

/// Estimates the growth rate of a window of length at least 3.
///
/// These are numerical estimates, not certificates. `eta1_override` replaces
/// the window-based lower base and must exceed 1.
pub fn estimate_growth(
    window: &SequenceWindow,
    eta1_override: Option<f64>,
) -> Result<GrowthEstimate> {
    let n = window.n();
    if n < 3 {
        return Err(Error::WindowTooShort { n, required: 3 });
    }
    if let Some(eta) = eta1_override {
        if !(eta > 1.0 && eta.is_finite()) {
            return Err(domain(format!(
                "eta1 override must be a finite real > 1, got {eta}"
            )));
        }
    }
    let v = window.values();
    let ratios: Vec<f64> = v.windows(2).map(|w| big_ratio(&w[1], &w[0])).collect();
    let dominant_rate = *ratios.last().expect("n >= 3");
    let asymptotic_rate = asymptotic_ratio(window);
    let is_exponential = asymptotic_rate >= 1.0 + GROWTH_DELTA;

    let trailing = &ratios[ratios.len() / 2..];
    let window_eta = trailing.iter().copied().fold(f64::INFINITY, f64::min);
    let eta1_lower = match eta1_override {
        Some(eta) => Some(eta),
        None if is_exponential && window_eta > 1.0 => Some(window_eta),
        None => None,
    };
    Ok(GrowthEstimate {
        dominant_rate,
        asymptotic_rate,
        is_exponential,
        eta1_lower,
    })
}

fn asymptotic_ratio(window: &SequenceWindow) -> f64 {
    let coeffs: Vec<f64> = window.spec().coeffs().iter().map(|&a| a as f64).collect();
    let d = coeffs.len();
    let v = window.values();
    let top = v.last().expect("non-empty");
    // state[j] = G_{m-j} / G_m, zero-padded when the window is shorter than d.
    let mut state: Vec<f64> = (0..d)
        .map(|j| {
            if j < v.len() {
                big_ratio(&v[v.len() - 1 - j], top)
            } else {
                0.0
            }
        })
        .collect();
    let mut ratio = 1.0;
    for _ in 0..ASYMPTOTIC_STEPS {
        let next: f64 = coeffs.iter().zip(&state).map(|(a, g)| a * g).sum();
        if next.is_nan() || next <= 0.0 {
            break;
        }
        ratio = next;
        state.rotate_right(1);
        state[0] = next;
        for g in &mut state {
            *g /= next;
        }
    }
    ratio
}

/// `a / b` as a double, accurate for arbitrarily large operands.
pub fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = a.bits().min(b.bits()).saturating_sub(64);
    let (a, b) = (a >> shift, b >> shift);
    a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(f64::INFINITY)
}

/// Natural logarithm of a positive arbitrary-precision integer.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if x.is_one() {
        return 0.0;
    }
    let shift = x.bits().saturating_sub(64);
    let head = (x >> shift).to_f64().expect("64-bit head converts");
    head.ln() + shift as f64 * std::f64::consts::LN_2
}
