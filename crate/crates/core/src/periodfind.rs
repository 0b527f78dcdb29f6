//! Period finding from the phase of a running wave superposition.
//!
//! The values `f(k) = m^k mod N` are mapped to unit waves with phases
//! `φ(k) = π·f(k)/N` and summed one after another. Because the sequence is
//! periodic, the running sum after `q` whole periods is `q` times the
//! one-period sum, so its phase sits exactly on the limiting value at every
//! multiple of the period `r` and drifts towards it in between. The period
//! is the first `k` whose phase is that persistent value, gated by the
//! arithmetic check `m^k ≡ 1 (mod N)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{divisors, gcd, is_prime, mul_mod, pow_mod, prime_power};
use crate::phasor::{circular_distance, Phasor, PhasorSum};

/// Largest modulus the integer paths support.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodError {
    #[error("modulus must be in [2, 2^62], got {0}")]
    BadModulus(u64),
    #[error("base must satisfy 2 <= m < N, got m = {base} for N = {modulus}")]
    BadBase { base: u64, modulus: u64 },
    #[error("gcd({base}, {modulus}) = {gcd}, which is already a factor")]
    NotCoprime { base: u64, modulus: u64, gcd: u64 },
    #[error("sequence length must be at least 1")]
    EmptySequence,
    #[error("no running phase persisted within tolerance over {len} terms")]
    NotConverged { len: usize },
    #[error("phase matches at k = {candidates:?} all failed m^k ≡ 1 (mod N)")]
    FalseMatch { candidates: Vec<usize> },
    #[error("period {period} is not minimal: m^{divisor} ≡ 1")]
    NotMinimal { period: u64, divisor: u64 },
    #[error("period {0} is odd")]
    OddPeriod(u64),
    #[error("both gcd candidates are trivial (m^(r/2) mod N = {half_power})")]
    TrivialCase { half_power: u64 },
    #[error("{0} is even; factor 2 directly")]
    EvenModulus(u64),
    #[error("{0} is prime")]
    PrimeModulus(u64),
    #[error("{modulus} = {prime}^{exponent} is a prime power")]
    PrimePower { modulus: u64, prime: u64, exponent: u32 },
    #[error("no factor found after {0} attempts")]
    ExhaustedAttempts(usize),
}

/// `f(k) = m^k mod N` for `k = 1..=K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModularSequence {
    modulus: u64,
    base: u64,
    values: Vec<u64>,
}

impl ModularSequence {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Default length: four times the a priori period bound `N − 1`.
pub fn default_length(modulus: u64) -> usize {
    (4 * modulus.saturating_sub(1)).max(4) as usize
}

/// Builds the sequence by iterated modular multiplication.
pub fn mod_sequence(modulus: u64, base: u64, len: usize) -> Result<ModularSequence, PeriodError> {
    if !(2..=MAX_MODULUS).contains(&modulus) {
        return Err(PeriodError::BadModulus(modulus));
    }
    if base < 2 || base >= modulus {
        return Err(PeriodError::BadBase { base, modulus });
    }
    let g = gcd(base, modulus);
    if g != 1 {
        return Err(PeriodError::NotCoprime { base, modulus, gcd: g });
    }
    if len == 0 {
        return Err(PeriodError::EmptySequence);
    }
    let mut values = Vec::with_capacity(len);
    let mut f = 1;
    for _ in 0..len {
        f = mul_mod(f, base, modulus);
        values.push(f);
    }
    Ok(ModularSequence {
        modulus,
        base,
        values,
    })
}

/// `φ(k) = π·f(k)/N`, each in `[0, π)`.
pub fn phase_map(seq: &ModularSequence) -> Vec<f64> {
    let n = seq.modulus as f64;
    seq.values.iter().map(|&f| f as f64 / n * PI).collect()
}

/// One entry of a running superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunningSum {
    pub amplitude: f64,
    /// `None` where the partial sum vanishes and has no phase.
    pub phase: Option<f64>,
}

/// Amplitudes below this are treated as a vanished partial sum.
const ZERO_AMPLITUDE: f64 = 1e-9;

/// Entry `K` is the superposition of unit waves at `phases[0..K]`.
pub fn running_phase(phases: &[f64]) -> Vec<RunningSum> {
    let mut sum = PhasorSum::new(1.0, phases.len());
    phases
        .iter()
        .map(|&phi| {
            sum.add(&Phasor::unit(phi));
            let w = sum.value();
            RunningSum {
                amplitude: w.amplitude(),
                phase: (w.amplitude() > ZERO_AMPLITUDE).then_some(w.phase()),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodResult {
    pub period: u64,
    /// Running phase at the period, equal to the limit of the running phase.
    pub converged_phase: f64,
    /// Running phase at the last term of the sequence.
    pub terminal_phase: Option<f64>,
    pub phase_trace: Vec<RunningSum>,
    /// Phase-persistent positions rejected by the arithmetic check.
    pub false_matches: Vec<usize>,
    pub factors: Vec<u64>,
}

/// Finds the period from the running phase.
///
/// A position `k` is phase-stable when the running phase at every multiple
/// `jk ≤ K` stays within `tol` of the phase at `k`; at least one multiple
/// beyond `k` is required. The first stable `k` with `f(k) = 1` is the
/// period. Factors are filled in when the gcd step succeeds.
pub fn find_period(seq: &ModularSequence, tol: f64) -> Result<PeriodResult, PeriodError> {
    let trace = running_phase(&phase_map(seq));
    let len = trace.len();
    let mut false_matches = Vec::new();

    for k in 1..=len / 2 {
        let Some(here) = trace[k - 1].phase else {
            continue;
        };
        let stable = (2 * k..=len).step_by(k).all(|j| {
            trace[j - 1]
                .phase
                .is_some_and(|p| circular_distance(p, here) <= tol)
        });
        if !stable {
            continue;
        }
        if seq.values[k - 1] != 1 || pow_mod(seq.base, k as u64, seq.modulus) != 1 {
            false_matches.push(k);
            continue;
        }
        let period = k as u64;
        for d in divisors(period) {
            if d < period && pow_mod(seq.base, d, seq.modulus) == 1 {
                return Err(PeriodError::NotMinimal { period, divisor: d });
            }
        }
        let factors = factor_step(seq.modulus, seq.base, period).unwrap_or_default();
        return Ok(PeriodResult {
            period,
            converged_phase: here,
            terminal_phase: trace[len - 1].phase,
            phase_trace: trace,
            false_matches,
            factors,
        });
    }
    if false_matches.is_empty() {
        Err(PeriodError::NotConverged { len })
    } else {
        Err(PeriodError::FalseMatch {
            candidates: false_matches,
        })
    }
}

/// `gcd(m^(r/2) + 1, N)` and `gcd(m^(r/2) − 1, N)`, keeping the nontrivial ones.
pub fn factor_step(modulus: u64, base: u64, period: u64) -> Result<Vec<u64>, PeriodError> {
    if period % 2 == 1 {
        return Err(PeriodError::OddPeriod(period));
    }
    let half = pow_mod(base, period / 2, modulus);
    let plus = gcd((half + 1) % modulus, modulus);
    let minus = gcd((half + modulus - 1) % modulus, modulus);
    let mut factors = Vec::with_capacity(2);
    for d in [plus, minus] {
        if d > 1 && d < modulus && !factors.contains(&d) {
            factors.push(d);
        }
    }
    if factors.is_empty() {
        Err(PeriodError::TrivialCase { half_power: half })
    } else {
        Ok(factors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AttemptOutcome {
    /// The base shared a factor with N.
    SharedFactor(u64),
    Factors(Vec<u64>),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attempt {
    pub base: u64,
    pub period: Option<u64>,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorReport {
    pub modulus: u64,
    pub factor: u64,
    pub attempts: Vec<Attempt>,
    /// Period result of the successful attempt, if it went through period finding.
    pub period: Option<PeriodResult>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorOptions {
    pub seed: u64,
    pub max_attempts: usize,
    pub tol: f64,
    /// Sequence length per attempt; `None` uses [`default_length`].
    pub len: Option<usize>,
}

impl Default for FactorOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_attempts: 16,
            tol: 1e-9,
            len: None,
        }
    }
}

/// Checks that `n` is an odd composite and not a prime power.
pub fn check_factorizable(n: u64) -> Result<(), PeriodError> {
    if !(4..=MAX_MODULUS).contains(&n) {
        return Err(PeriodError::BadModulus(n));
    }
    if n.is_multiple_of(2) {
        return Err(PeriodError::EvenModulus(n));
    }
    if is_prime(n) {
        return Err(PeriodError::PrimeModulus(n));
    }
    if let Some((prime, exponent)) = prime_power(n) {
        return Err(PeriodError::PrimePower {
            modulus: n,
            prime,
            exponent,
        });
    }
    Ok(())
}

/// Tries seeded random bases until one yields a nontrivial factor.
pub fn factorize(n: u64, options: &FactorOptions) -> Result<FactorReport, PeriodError> {
    check_factorizable(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let len = options.len.unwrap_or_else(|| default_length(n));
    let mut attempts = Vec::new();
    for _ in 0..options.max_attempts {
        let base = rng.gen_range(2..n - 1);
        let g = gcd(base, n);
        if g != 1 {
            attempts.push(Attempt {
                base,
                period: None,
                outcome: AttemptOutcome::SharedFactor(g),
            });
            return Ok(FactorReport {
                modulus: n,
                factor: g,
                attempts,
                period: None,
            });
        }
        let seq = mod_sequence(n, base, len)?;
        match find_period(&seq, options.tol) {
            Ok(result) => match factor_step(n, base, result.period) {
                Ok(factors) => {
                    attempts.push(Attempt {
                        base,
                        period: Some(result.period),
                        outcome: AttemptOutcome::Factors(factors.clone()),
                    });
                    return Ok(FactorReport {
                        modulus: n,
                        factor: factors[0],
                        attempts,
                        period: Some(result),
                    });
                }
                Err(e) => attempts.push(Attempt {
                    base,
                    period: Some(result.period),
                    outcome: AttemptOutcome::Failed(e.to_string()),
                }),
            },
            Err(e) => attempts.push(Attempt {
                base,
                period: None,
                outcome: AttemptOutcome::Failed(e.to_string()),
            }),
        }
    }
    Err(PeriodError::ExhaustedAttempts(attempts.len()))
}

/// `k,f_k,phi_k,running_phase,running_amplitude`; an empty phase cell marks
/// a vanished partial sum.
pub fn phase_trace_csv(seq: &ModularSequence, trace: &[RunningSum]) -> String {
    let phases = phase_map(seq);
    let mut out = String::from("k,f_k,phi_k,running_phase,running_amplitude\n");
    for (k, ((f, phi), entry)) in seq.values.iter().zip(&phases).zip(trace).enumerate() {
        let phase = entry.phase.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", k + 1, f, phi, phase, entry.amplitude));
    }
    out
}
