//! Oracle instances: fixed per-input phase shifts and attenuations, a
//! reference power, and an exact query counter.
//!
//! A query drives input `i` at phase `φ_i`; the wave reaches the output as
//! `σ_i·sin(ωt + φ_i + Δ_i)` and the detector measures the power of the
//! sum. The one input combination that makes every `φ_i + Δ_i` equal gives
//! constructive interference and is the database entry being searched for.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phasor::{
    circular_distance, detect, Bit, Phasor, PhasorError, PhasorSum, Power, Tolerance,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("an oracle needs at least 2 inputs, got {0}")]
    TooFewInputs(usize),
    #[error("all phase shifters are equal; this combination is excluded")]
    AllShiftersEqual,
    #[error("shifter {index} is {value} rad; binary oracles accept only ±π/4")]
    BadShifterValue { index: usize, value: f64 },
    #[error("shifter {index} is {value} rad, which is not in the phase alphabet")]
    ValueNotInAlphabet { index: usize, value: f64 },
    #[error("expected {expected} input phases, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("attenuation {index} is {value}; must lie in (0, 1]")]
    BadSigma { index: usize, value: f64 },
    #[error("invalid phase alphabet: {0}")]
    BadAlphabet(String),
    #[error("alphabet index {index} out of range for an alphabet of {size} values")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("expected exactly one aligned combination, found {0}")]
    NoUniqueTarget(usize),
    #[error("invalid oracle document: {0}")]
    Document(String),
    #[error(transparent)]
    Phasor(#[from] PhasorError),
}

/// Ordered set of admissible input phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhaseAlphabet {
    values: Vec<f64>,
}

impl PhaseAlphabet {
    pub fn new(values: Vec<f64>) -> Result<Self, OracleError> {
        if values.len() < 2 {
            return Err(OracleError::BadAlphabet(format!(
                "need at least 2 values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::BadAlphabet("non-finite phase".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OracleError::BadAlphabet("values must be strictly increasing".into()));
        }
        let eps = Tolerance::DEFAULT.value();
        if values[0] < -eps || values[values.len() - 1] > FRAC_PI_2 + eps {
            return Err(OracleError::BadAlphabet("values must lie in [0, π/2]".into()));
        }
        Ok(Self { values })
    }

    /// `{0, π/2}`.
    pub fn binary() -> Self {
        Self {
            values: vec![0.0, FRAC_PI_2],
        }
    }

    /// `m` equally spaced phases from 0 to `max` inclusive.
    pub fn uniform(m: usize, max: f64) -> Result<Self, OracleError> {
        if m < 2 {
            return Err(OracleError::BadAlphabet(format!("need at least 2 values, got {m}")));
        }
        Self::new((0..m).map(|k| max * k as f64 / (m - 1) as f64).collect())
    }

    /// `{0, π/14, 2π/14, …, 6π/14, π/2}`.
    pub fn eighths_of_quarter_turn() -> Self {
        Self {
            values: (0..8).map(|k| k as f64 * PI / 14.0).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn index_of(&self, phase: f64, tol: Tolerance) -> Option<usize> {
        self.values
            .iter()
            .position(|&v| circular_distance(v, phase) <= tol.value())
    }

    fn is_binary(&self) -> bool {
        let eps = Tolerance::DEFAULT.value();
        self.values.len() == 2
            && self.values[0].abs() <= eps
            && (self.values[1] - FRAC_PI_2).abs() <= eps
    }
}

impl TryFrom<Vec<f64>> for PhaseAlphabet {
    type Error = OracleError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<PhaseAlphabet> for Vec<f64> {
    fn from(a: PhaseAlphabet) -> Self {
        a.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    /// Shifters ±π/4 over the alphabet `{0, π/2}`.
    Binary,
    /// Shifters drawn from the alphabet itself.
    Multivalued,
}

/// Result of one oracle query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub a_out: f64,
    pub phi_out: f64,
    pub p_out: Power,
    pub bit: Bit,
}

/// An oracle instance. Immutable apart from its query counter.
#[derive(Debug)]
pub struct OracleSpec {
    kind: OracleKind,
    deltas: Vec<f64>,
    sigmas: Vec<f64>,
    p_ref: Power,
    alphabet: PhaseAlphabet,
    max_sigma: f64,
    /// `lattice[i][j]`: grid components of input `i` driven at alphabet value `j`.
    lattice: Vec<Vec<(i128, i128)>>,
    queries: AtomicU64,
}

impl Clone for OracleSpec {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind,
            deltas: self.deltas.clone(),
            sigmas: self.sigmas.clone(),
            p_ref: self.p_ref,
            alphabet: self.alphabet.clone(),
            max_sigma: self.max_sigma,
            lattice: self.lattice.clone(),
            queries: AtomicU64::new(self.queries()),
        }
    }
}

impl PartialEq for OracleSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.deltas == other.deltas
            && self.sigmas == other.sigmas
            && self.p_ref == other.p_ref
            && self.alphabet == other.alphabet
    }
}

/// Binary oracle with unit attenuations and `P_ref = n²`.
pub fn build_binary_oracle(deltas: &[f64]) -> Result<OracleSpec, OracleError> {
    let n = deltas.len();
    if n < 2 {
        return Err(OracleError::TooFewInputs(n));
    }
    let eps = Tolerance::DEFAULT.value();
    let mut snapped = Vec::with_capacity(n);
    for (index, &value) in deltas.iter().enumerate() {
        if (value - FRAC_PI_4).abs() <= eps {
            snapped.push(FRAC_PI_4);
        } else if (value + FRAC_PI_4).abs() <= eps {
            snapped.push(-FRAC_PI_4);
        } else {
            return Err(OracleError::BadShifterValue { index, value });
        }
    }
    if snapped.windows(2).all(|w| w[0] == w[1]) {
        return Err(OracleError::AllShiftersEqual);
    }
    let p_ref = Power::new((n * n) as f64)?;
    OracleSpec::assemble(
        OracleKind::Binary,
        snapped,
        vec![1.0; n],
        p_ref,
        PhaseAlphabet::binary(),
    )
}

/// Multivalued oracle with unit attenuations. `p_ref` defaults to `n²`.
pub fn build_multivalued_oracle(
    deltas: &[f64],
    alphabet: PhaseAlphabet,
    p_ref: Option<Power>,
) -> Result<OracleSpec, OracleError> {
    let n = deltas.len();
    if n < 2 {
        return Err(OracleError::TooFewInputs(n));
    }
    let snapped = snap_to_alphabet(deltas, &alphabet)?;
    let p_ref = match p_ref {
        Some(p) => p,
        None => Power::new((n * n) as f64)?,
    };
    OracleSpec::assemble(OracleKind::Multivalued, snapped, vec![1.0; n], p_ref, alphabet)
}

fn snap_to_alphabet(deltas: &[f64], alphabet: &PhaseAlphabet) -> Result<Vec<f64>, OracleError> {
    let mut indices = Vec::with_capacity(deltas.len());
    for (index, &value) in deltas.iter().enumerate() {
        if !value.is_finite() {
            return Err(OracleError::ValueNotInAlphabet { index, value });
        }
        match alphabet
            .values()
            .iter()
            .position(|&v| (v - value).abs() <= Tolerance::DEFAULT.value())
        {
            Some(j) => indices.push(j),
            None => return Err(OracleError::ValueNotInAlphabet { index, value }),
        }
    }
    if indices.windows(2).all(|w| w[0] == w[1]) {
        return Err(OracleError::AllShiftersEqual);
    }
    Ok(indices.into_iter().map(|j| alphabet.values()[j]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    Binary,
    Multivalued,
}

/// Deterministic pseudo-random oracle.
///
/// Multivalued shifters always include the alphabet minimum and maximum,
/// which for an equally spaced alphabet is exactly the condition for a single
/// constructive combination.
pub fn random_oracle(
    n: usize,
    kind: RandomKind,
    alphabet: Option<&PhaseAlphabet>,
    seed: u64,
) -> Result<OracleSpec, OracleError> {
    if n < 2 {
        return Err(OracleError::TooFewInputs(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        RandomKind::Binary => {
            let mut signs: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            if signs.iter().all(|&s| s == signs[0]) {
                let flip = rng.gen_range(0..n);
                signs[flip] = !signs[flip];
            }
            let deltas: Vec<f64> = signs
                .iter()
                .map(|&s| if s { FRAC_PI_4 } else { -FRAC_PI_4 })
                .collect();
            build_binary_oracle(&deltas)
        }
        RandomKind::Multivalued => {
            let alphabet = alphabet
                .cloned()
                .unwrap_or_else(PhaseAlphabet::eighths_of_quarter_turn);
            let m = alphabet.len();
            let mut idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
            let lo = rng.gen_range(0..n);
            let mut hi = rng.gen_range(0..n - 1);
            if hi >= lo {
                hi += 1;
            }
            idx[lo] = 0;
            idx[hi] = m - 1;
            let deltas: Vec<f64> = idx.iter().map(|&j| alphabet.values()[j]).collect();
            build_multivalued_oracle(&deltas, alphabet, None)
        }
    }
}

/// JSON form: `{n, deltas, sigmas, p_ref, alphabet}` with angles in radians.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleDocument {
    n: usize,
    deltas: Vec<f64>,
    sigmas: Vec<f64>,
    p_ref: f64,
    alphabet: Vec<f64>,
}

impl OracleSpec {
    fn assemble(
        kind: OracleKind,
        deltas: Vec<f64>,
        sigmas: Vec<f64>,
        p_ref: Power,
        alphabet: PhaseAlphabet,
    ) -> Result<Self, OracleError> {
        for (index, &value) in sigmas.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(OracleError::BadSigma { index, value });
            }
        }
        let max_sigma = sigmas.iter().copied().fold(0.0, f64::max);
        let grid = PhasorSum::new(max_sigma, deltas.len());
        let lattice = deltas
            .iter()
            .zip(&sigmas)
            .map(|(&d, &s)| {
                alphabet
                    .values()
                    .iter()
                    .map(|&a| {
                        Phasor::new(s, a + d).map(|w| {
                            let (i, q) = w.components();
                            grid.quantize(i, q)
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            kind,
            deltas,
            sigmas,
            p_ref,
            alphabet,
            max_sigma,
            lattice,
            queries: AtomicU64::new(0),
        })
    }

    /// Validates a full parameter set. The kind is binary when the alphabet is
    /// `{0, π/2}` and every shifter is ±π/4, multivalued otherwise.
    pub fn from_parts(
        deltas: Vec<f64>,
        sigmas: Vec<f64>,
        p_ref: Power,
        alphabet: PhaseAlphabet,
    ) -> Result<Self, OracleError> {
        let n = deltas.len();
        if n < 2 {
            return Err(OracleError::TooFewInputs(n));
        }
        if sigmas.len() != n {
            return Err(OracleError::ArityMismatch {
                expected: n,
                got: sigmas.len(),
            });
        }
        let eps = Tolerance::DEFAULT.value();
        let binary_shifters = deltas
            .iter()
            .all(|d| (d.abs() - FRAC_PI_4).abs() <= eps);
        if alphabet.is_binary() && binary_shifters {
            let template = build_binary_oracle(&deltas)?;
            Self::assemble(
                OracleKind::Binary,
                template.deltas,
                sigmas,
                p_ref,
                PhaseAlphabet::binary(),
            )
        } else {
            let snapped = snap_to_alphabet(&deltas, &alphabet)?;
            Self::assemble(OracleKind::Multivalued, snapped, sigmas, p_ref, alphabet)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, OracleError> {
        let doc: OracleDocument =
            serde_json::from_str(text).map_err(|e| OracleError::Document(e.to_string()))?;
        if doc.n != doc.deltas.len() {
            return Err(OracleError::ArityMismatch {
                expected: doc.n,
                got: doc.deltas.len(),
            });
        }
        let p_ref = Power::new(doc.p_ref)?;
        let alphabet = PhaseAlphabet::new(doc.alphabet)?;
        Self::from_parts(doc.deltas, doc.sigmas, p_ref, alphabet)
    }

    pub fn to_json(&self) -> String {
        let doc = OracleDocument {
            n: self.n(),
            deltas: self.deltas.clone(),
            sigmas: self.sigmas.clone(),
            p_ref: self.p_ref.value(),
            alphabet: self.alphabet.values().to_vec(),
        };
        serde_json::to_string_pretty(&doc).expect("oracle document serializes")
    }

    pub fn n(&self) -> usize {
        self.deltas.len()
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn p_ref(&self) -> Power {
        self.p_ref
    }

    pub fn alphabet(&self) -> &PhaseAlphabet {
        &self.alphabet
    }

    /// Total queries issued against this oracle so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Drives the inputs at arbitrary phases (they need not be alphabet
    /// values) and measures the output. Counts as one query.
    pub fn query(&self, phases: &[f64]) -> Result<Measurement, OracleError> {
        if phases.len() != self.n() {
            return Err(OracleError::ArityMismatch {
                expected: self.n(),
                got: phases.len(),
            });
        }
        let mut sum = PhasorSum::new(self.max_sigma, self.n());
        for ((&phi, &d), &s) in phases.iter().zip(&self.deltas).zip(&self.sigmas) {
            sum.add(&Phasor::new(s, phi + d)?);
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.measure(&sum))
    }

    /// Query with every input at an alphabet value, given by index.
    pub fn query_lattice(&self, indices: &[usize]) -> Result<Measurement, OracleError> {
        if indices.len() != self.n() {
            return Err(OracleError::ArityMismatch {
                expected: self.n(),
                got: indices.len(),
            });
        }
        let m = self.alphabet.len();
        let mut sum = PhasorSum::new(self.max_sigma, self.n());
        for (row, &j) in self.lattice.iter().zip(indices) {
            let &term = row
                .get(j)
                .ok_or(OracleError::IndexOutOfRange { index: j, size: m })?;
            sum.add_quantized(term);
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.measure(&sum))
    }

    /// Uncounted evaluation for analysis code (margins), never for searches.
    pub(crate) fn evaluate(&self, phases: &[f64]) -> Measurement {
        debug_assert_eq!(phases.len(), self.n());
        let mut sum = PhasorSum::new(self.max_sigma, self.n());
        for ((&phi, &d), &s) in phases.iter().zip(&self.deltas).zip(&self.sigmas) {
            sum.add(&Phasor::new(s, phi + d).expect("finite phase"));
        }
        self.measure(&sum)
    }

    fn measure(&self, sum: &PhasorSum) -> Measurement {
        let out = sum.value();
        let p_out = Power::new(out.amplitude() * out.amplitude()).expect("finite power");
        Measurement {
            a_out: out.amplitude(),
            phi_out: out.phase(),
            p_out,
            bit: detect(p_out, self.p_ref, Tolerance::DEFAULT),
        }
    }

    /// Alphabet index combinations whose waves all arrive in phase.
    pub(crate) fn aligned_combinations(&self) -> Vec<Vec<usize>> {
        let tol = Tolerance::DEFAULT;
        let mut found = Vec::new();
        for &a0 in self.alphabet.values() {
            let common = a0 + self.deltas[0];
            let combo: Option<Vec<usize>> = self
                .deltas
                .iter()
                .map(|&d| self.alphabet.index_of(common - d, tol))
                .collect();
            if let Some(c) = combo {
                found.push(c);
            }
        }
        found
    }

    /// Alphabet index of the constructive value for each input, if unique.
    pub(crate) fn unique_alignment(&self) -> Result<Vec<usize>, OracleError> {
        let mut all = self.aligned_combinations();
        if all.len() == 1 {
            Ok(all.pop().unwrap())
        } else {
            Err(OracleError::NoUniqueTarget(all.len()))
        }
    }

    pub fn phases_of(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&j| self.alphabet.values()[j]).collect()
    }
}

/// Analytic ground truth: the unique alphabet combination with every input
/// arriving in phase. Quarantined so that search code cannot consult it.
#[cfg(feature = "ground-truth")]
pub fn target_of(oracle: &OracleSpec) -> Result<Vec<f64>, OracleError> {
    oracle.unique_alignment().map(|idx| oracle.phases_of(&idx))
}
