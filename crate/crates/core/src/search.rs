//! Superposition searches over an oracle and the exhaustive baseline.
//!
//! All searches talk to the oracle only through counted queries, so the
//! reported query totals are directly comparable.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::angle;
use crate::oracle::{Measurement, OracleError, OracleKind, OracleSpec, PhaseAlphabet};
use crate::phasor::{detect, superpose, Bit, Phasor, Tolerance};

/// Default ceiling on the number of combinations brute force will visit.
pub const DEFAULT_EXHAUSTION_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("search requires a binary oracle")]
    NotBinary,
    #[error("segment search requires a power-of-two alphabet, got {0} values")]
    AlphabetNotPowerOfTwo(usize),
    #[error("step {step}: powers {p_zero} and {p_one} are equal within tolerance")]
    TieAtStep { step: usize, p_zero: f64, p_one: f64 },
    #[error("confirmation query gave logic 0 (p_out = {p_out}, p_ref = {p_ref})")]
    VerificationFailed {
        solution: Vec<f64>,
        p_out: f64,
        p_ref: f64,
    },
    #[error("search space of {size} combinations exceeds the cap of {cap}")]
    SpaceTooLarge { size: u128, cap: u64 },
    #[error("step {step} is out of range for {n} inputs, or {decided} decided phases were given")]
    BadStep {
        step: usize,
        n: usize,
        decided: usize,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// How the bit-by-bit search decides between the two candidate phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ComparisonMode {
    /// Compare the two measured powers directly.
    #[default]
    Direct,
    /// Load the first power into the detector reference and read the
    /// detector bit for the second measurement.
    Detector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub tolerance: Tolerance,
    pub mode: ComparisonMode,
    pub exhaustion_cap: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            tolerance: Tolerance::DEFAULT,
            mode: ComparisonMode::Direct,
            exhaustion_cap: DEFAULT_EXHAUSTION_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Selected,
    Rejected,
    Candidate,
    Maximum,
    Confirmed,
    Unconfirmed,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Selected => "selected",
            Outcome::Rejected => "rejected",
            Outcome::Candidate => "candidate",
            Outcome::Maximum => "maximum",
            Outcome::Confirmed => "confirmed",
            Outcome::Unconfirmed => "unconfirmed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    /// Input index (1-based) or segment box the query belongs to.
    pub target: String,
    pub phases: Vec<f64>,
    pub a_out: f64,
    pub p_out: f64,
    pub outcome: Outcome,
}

impl QueryRecord {
    fn new(target: String, phases: Vec<f64>, m: &Measurement, outcome: Outcome) -> Self {
        Self {
            target,
            phases,
            a_out: m.a_out,
            p_out: m.p_out.value(),
            outcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub decision: String,
    pub queries: Vec<QueryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub solution: Vec<f64>,
    pub solution_indices: Vec<usize>,
    /// Every alphabet combination tied with the solution, solution first.
    pub co_maxima: Vec<Vec<usize>>,
    pub queries: u64,
    pub trace: Vec<TraceStep>,
    pub verified: bool,
}

impl SearchResult {
    /// One row per recorded query:
    /// `step,input_index_or_box,phases_pi,phases,a_out,p_out,decision`.
    pub fn trace_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "step",
            "input_index_or_box",
            "phases_pi",
            "phases",
            "a_out",
            "p_out",
            "decision",
        ])
        .expect("in-memory write");
        for step in &self.trace {
            for q in &step.queries {
                w.write_record([
                    step.step.to_string(),
                    q.target.clone(),
                    angle::join(&q.phases, angle::in_pi),
                    angle::join(&q.phases, |x| x.to_string()),
                    q.a_out.to_string(),
                    q.p_out.to_string(),
                    q.outcome.as_str().to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Bit-by-bit search: each input is resolved with two queries while the
/// undecided inputs sit at π/4, then one confirmation query. `2n + 1` total.
pub fn binary_superposition_search(
    oracle: &OracleSpec,
    options: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    if oracle.kind() != OracleKind::Binary {
        return Err(SearchError::NotBinary);
    }
    let start = oracle.queries();
    let n = oracle.n();
    let tol = options.tolerance;
    let mut decided: Vec<f64> = Vec::with_capacity(n);
    let mut indices = Vec::with_capacity(n);
    let mut trace = Vec::with_capacity(n + 1);

    for i in 0..n {
        let mut phases = decided.clone();
        phases.push(0.0);
        phases.resize(n, FRAC_PI_4);
        let m_zero = oracle.query(&phases)?;
        let zero_phases = phases.clone();
        phases[i] = FRAC_PI_2;
        let m_one = oracle.query(&phases)?;

        let (p0, p1) = (m_zero.p_out.value(), m_one.p_out.value());
        if (p1 - p0).abs() <= tol.value() {
            return Err(SearchError::TieAtStep {
                step: i + 1,
                p_zero: p0,
                p_one: p1,
            });
        }
        let pick_one = match options.mode {
            ComparisonMode::Direct => p1 > p0,
            ComparisonMode::Detector => detect(m_one.p_out, m_zero.p_out, tol) == Bit::One,
        };
        let (o0, o1) = if pick_one {
            (Outcome::Rejected, Outcome::Selected)
        } else {
            (Outcome::Selected, Outcome::Rejected)
        };
        let target = (i + 1).to_string();
        trace.push(TraceStep {
            step: i + 1,
            decision: format!("input {} = {}", i + 1, if pick_one { "π/2" } else { "0" }),
            queries: vec![
                QueryRecord::new(target.clone(), zero_phases, &m_zero, o0),
                QueryRecord::new(target, phases, &m_one, o1),
            ],
        });
        decided.push(if pick_one { FRAC_PI_2 } else { 0.0 });
        indices.push(usize::from(pick_one));
    }

    let check = oracle.query(&decided)?;
    let verified = check.bit == Bit::One;
    trace.push(TraceStep {
        step: n + 1,
        decision: format!("confirmation bit {}", check.bit),
        queries: vec![QueryRecord::new(
            "all".into(),
            decided.clone(),
            &check,
            if verified {
                Outcome::Confirmed
            } else {
                Outcome::Unconfirmed
            },
        )],
    });
    if !verified {
        return Err(SearchError::VerificationFailed {
            solution: decided,
            p_out: check.p_out.value(),
            p_ref: oracle.p_ref().value(),
        });
    }
    Ok(SearchResult {
        solution: decided,
        co_maxima: vec![indices.clone()],
        solution_indices: indices,
        queries: oracle.queries() - start,
        trace,
        verified,
    })
}

/// Normalized power gap `(P_true − P_false) / n²` when resolving input
/// `step` (0-based) with the inputs before it fixed to `decided`.
pub fn step_margin(oracle: &OracleSpec, step: usize, decided: &[f64]) -> Result<f64, SearchError> {
    let n = oracle.n();
    if step >= n || decided.len() != step {
        return Err(SearchError::BadStep {
            step,
            n,
            decided: decided.len(),
        });
    }
    let target = oracle.unique_alignment()?;
    let values = oracle.alphabet().values();
    let right = values[target[step]];
    let absent_midpoint = (oracle.alphabet().min() + oracle.alphabet().max()) / 2.0;
    let mut phases = decided.to_vec();
    phases.push(right);
    phases.resize(n, absent_midpoint);
    let p_true = oracle.evaluate(&phases).p_out.value();
    let mut worst = f64::INFINITY;
    for (j, &wrong) in values.iter().enumerate() {
        if j == target[step] {
            continue;
        }
        phases[step] = wrong;
        worst = worst.min(p_true - oracle.evaluate(&phases).p_out.value());
    }
    Ok(worst / (n * n) as f64)
}

/// Step-1 margin for the shifter pattern with the first `n − 1` shifters at
/// +π/4 and the last at −π/4, evaluated from explicitly built phasors.
pub fn worst_case_margin(n: usize) -> Result<f64, SearchError> {
    if n < 2 {
        return Err(OracleError::TooFewInputs(n).into());
    }
    // input 1 at 0 or π/2 (+π/4 shift); inputs 2..n-1 at π/4 (+π/4 shift);
    // input n at π/4 (−π/4 shift)
    let mut waves = Vec::with_capacity(n);
    waves.push(Phasor::unit(FRAC_PI_4));
    waves.extend(std::iter::repeat_n(Phasor::unit(FRAC_PI_2), n - 2));
    waves.push(Phasor::unit(0.0));
    let p_true = superpose(&waves).expect("non-empty").amplitude().powi(2);
    waves[0] = Phasor::unit(3.0 * FRAC_PI_4);
    let p_false = superpose(&waves).expect("non-empty").amplitude().powi(2);
    Ok((p_true - p_false) / (n * n) as f64)
}

/// `n,margin` rows.
pub fn margin_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("n,margin\n");
    for (n, m) in rows {
        out.push_str(&format!("{n},{m}\n"));
    }
    out
}

/// Axis-aligned box of alphabet index ranges, inclusive on both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentBox {
    ranges: Vec<(usize, usize)>,
}

impl SegmentBox {
    pub fn full(n: usize, m: usize) -> Self {
        Self {
            ranges: vec![(0, m - 1); n],
        }
    }

    pub fn new(ranges: Vec<(usize, usize)>) -> Self {
        assert!(ranges.iter().all(|(lo, hi)| lo <= hi), "empty range");
        Self { ranges }
    }

    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    pub fn widest_axis(&self) -> usize {
        self.ranges.iter().map(|(lo, hi)| hi - lo + 1).max().unwrap_or(0)
    }

    /// Superposition phase of each axis: the centre of the box's share of
    /// the continuous interval `[min, max]`, which is cut into `m` equal
    /// cells. A single-value range maps to that value.
    pub fn midpoints(&self, alphabet: &PhaseAlphabet) -> Vec<f64> {
        let m = alphabet.len() as f64;
        let (lo_phase, span) = (alphabet.min(), alphabet.max() - alphabet.min());
        self.ranges
            .iter()
            .map(|&(lo, hi)| {
                if lo == hi {
                    alphabet.values()[lo]
                } else {
                    lo_phase + span * (lo + hi + 1) as f64 / (2.0 * m)
                }
            })
            .collect()
    }

    /// Halves every axis; children are ordered with the first axis slowest
    /// and the lower half first.
    pub fn split(&self) -> Vec<SegmentBox> {
        let halves: Vec<[(usize, usize); 2]> = self
            .ranges
            .iter()
            .map(|&(lo, hi)| {
                let mid = lo + (hi - lo).div_ceil(2);
                [(lo, mid - 1), (mid, hi)]
            })
            .collect();
        let n = halves.len();
        (0..1usize << n)
            .map(|mask| SegmentBox {
                ranges: (0..n)
                    .map(|axis| halves[axis][(mask >> (n - 1 - axis)) & 1])
                    .collect(),
            })
            .collect()
    }

    /// Lattice points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(self.ranges.len())];
        for &(lo, hi) in &self.ranges {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (lo..=hi).map(move |j| {
                        let mut p = prefix.clone();
                        p.push(j);
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn label(&self) -> String {
        self.ranges
            .iter()
            .map(|(lo, hi)| format!("{lo}-{hi}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Segment subdivision search: halve every axis, query every child box at
/// its midpoint phases, keep the strongest child (all of them on a tie), and
/// once every axis holds at most two values check the remaining lattice
/// points one by one.
pub fn segment_search(
    oracle: &OracleSpec,
    options: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let alphabet = oracle.alphabet();
    let m = alphabet.len();
    if !m.is_power_of_two() {
        return Err(SearchError::AlphabetNotPowerOfTwo(m));
    }
    let start = oracle.queries();
    let tol = options.tolerance.value();
    let mut boxes = vec![SegmentBox::full(oracle.n(), m)];
    let mut trace = Vec::new();
    let mut step = 0;

    while boxes[0].widest_axis() > 2 {
        step += 1;
        let mut measured = Vec::new();
        for child in boxes.iter().flat_map(SegmentBox::split) {
            let phases = child.midpoints(alphabet);
            let meas = oracle.query(&phases)?;
            measured.push((child, phases, meas));
        }
        let best = measured
            .iter()
            .map(|(_, _, m)| m.p_out.value())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut kept = Vec::new();
        let mut records = Vec::with_capacity(measured.len());
        for (child, phases, meas) in measured {
            let win = meas.p_out.value() >= best - tol;
            records.push(QueryRecord::new(
                child.label(),
                phases,
                &meas,
                if win { Outcome::Selected } else { Outcome::Rejected },
            ));
            if win {
                kept.push(child);
            }
        }
        let decision = if kept.len() == 1 {
            format!("descend into {}", kept[0].label())
        } else {
            format!("tie: descend into {} boxes", kept.len())
        };
        trace.push(TraceStep {
            step,
            decision,
            queries: records,
        });
        boxes = kept;
    }

    step += 1;
    let mut measured = Vec::new();
    for b in &boxes {
        for point in b.points() {
            let meas = oracle.query_lattice(&point)?;
            measured.push((point, meas));
        }
    }
    let best = measured
        .iter()
        .map(|(_, m)| m.p_out.value())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut co_maxima = Vec::new();
    let mut records = Vec::with_capacity(measured.len());
    let mut best_bit = Bit::Zero;
    for (point, meas) in measured {
        let top = meas.p_out.value() >= best - tol;
        if top {
            if co_maxima.is_empty() {
                best_bit = meas.bit;
            }
            co_maxima.push(point.clone());
        }
        records.push(QueryRecord::new(
            point.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            oracle.phases_of(&point),
            &meas,
            if top { Outcome::Maximum } else { Outcome::Candidate },
        ));
    }
    let solution_indices = co_maxima[0].clone();
    trace.push(TraceStep {
        step,
        decision: format!("maximum at {:?}", solution_indices),
        queries: records,
    });
    Ok(SearchResult {
        solution: oracle.phases_of(&solution_indices),
        solution_indices,
        co_maxima,
        queries: oracle.queries() - start,
        trace,
        verified: best_bit == Bit::One,
    })
}

/// Queries every alphabet combination in lexicographic order and returns
/// the argmax of the output power (all ties reported). The scan is spread
/// over the rayon pool; the query counter stays exact.
pub fn brute_force(oracle: &OracleSpec, options: &SearchOptions) -> Result<SearchResult, SearchError> {
    let n = oracle.n();
    let m = oracle.alphabet().len();
    let size = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > options.exhaustion_cap as u128 {
        return Err(SearchError::SpaceTooLarge {
            size,
            cap: options.exhaustion_cap,
        });
    }
    let size = size as u64;
    let tol = options.tolerance.value();
    let start = oracle.queries();

    let decode = |mut code: u64| -> Vec<usize> {
        let mut idx = vec![0; n];
        for slot in idx.iter_mut().rev() {
            *slot = (code % m as u64) as usize;
            code /= m as u64;
        }
        idx
    };

    type Best = (f64, Vec<(u64, Measurement)>);
    let merge = |mut a: Best, b: Best| -> Best {
        let top = a.0.max(b.0);
        a.1.extend(b.1);
        a.1.retain(|(_, meas)| meas.p_out.value() >= top - tol);
        (top, a.1)
    };
    let (_, mut winners) = (0..size)
        .into_par_iter()
        .map(|code| {
            // size fits in u64, so n ≤ 64
            let mut idx = [0usize; 64];
            let mut rest = code;
            for slot in idx[..n].iter_mut().rev() {
                *slot = (rest % m as u64) as usize;
                rest /= m as u64;
            }
            oracle.query_lattice(&idx[..n]).map(|meas| (code, meas))
        })
        .try_fold(
            || (f64::NEG_INFINITY, Vec::new()),
            |acc, item| {
                item.map(|(code, meas)| {
                    let p = meas.p_out.value();
                    if p < acc.0 - tol {
                        acc
                    } else {
                        merge(acc, (p, vec![(code, meas)]))
                    }
                })
            },
        )
        .try_reduce(|| (f64::NEG_INFINITY, Vec::new()), |a, b| Ok(merge(a, b)))?;
    winners.sort_by_key(|(code, _)| *code);

    let co_maxima: Vec<Vec<usize>> = winners.iter().map(|(c, _)| decode(*c)).collect();
    let records = winners
        .iter()
        .zip(&co_maxima)
        .map(|((_, meas), idx)| {
            QueryRecord::new(
                idx.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                oracle.phases_of(idx),
                meas,
                Outcome::Maximum,
            )
        })
        .collect();
    let solution_indices = co_maxima[0].clone();
    Ok(SearchResult {
        solution: oracle.phases_of(&solution_indices),
        verified: winners[0].1.bit == Bit::One,
        solution_indices,
        queries: oracle.queries() - start,
        trace: vec![TraceStep {
            step: 1,
            decision: format!("exhaustive scan of {size} combinations, {} maxima", co_maxima.len()),
            queries: records,
        }],
        co_maxima,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_binary_oracle, build_multivalued_oracle};
    use std::f64::consts::PI;

    const P4: f64 = FRAC_PI_4;

    fn example2() -> OracleSpec {
        build_multivalued_oracle(
            &[5.0 * PI / 14.0, FRAC_PI_2, 0.0],
            PhaseAlphabet::eighths_of_quarter_turn(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn smallest_binary_instance() {
        let o = build_binary_oracle(&[-P4, P4]).unwrap();
        let r = binary_superposition_search(&o, &SearchOptions::default()).unwrap();
        assert_eq!(r.solution, vec![FRAC_PI_2, 0.0]);
        assert_eq!(r.queries, 5);
        assert!(r.verified);
        assert_eq!(r.trace.len(), 3);
    }

    #[test]
    fn detector_mode_matches_direct_mode() {
        let o = build_binary_oracle(&[P4, -P4, -P4, P4, P4]).unwrap();
        let direct = binary_superposition_search(&o, &SearchOptions::default()).unwrap();
        let opts = SearchOptions {
            mode: ComparisonMode::Detector,
            ..Default::default()
        };
        let detector = binary_superposition_search(&o, &opts).unwrap();
        assert_eq!(direct.solution, detector.solution);
        assert_eq!(detector.queries, 11);
    }

    #[test]
    fn binary_search_rejects_multivalued() {
        assert_eq!(
            binary_superposition_search(&example2(), &SearchOptions::default()).unwrap_err(),
            SearchError::NotBinary
        );
    }

    #[test]
    fn huge_tolerance_reports_tie() {
        let o = build_binary_oracle(&[P4, -P4, P4]).unwrap();
        let opts = SearchOptions {
            tolerance: Tolerance(100.0),
            ..Default::default()
        };
        assert!(matches!(
            binary_superposition_search(&o, &opts),
            Err(SearchError::TieAtStep { step: 1, .. })
        ));
    }

    #[test]
    fn segment_box_geometry() {
        let b = SegmentBox::full(3, 8);
        let kids = b.split();
        assert_eq!(kids.len(), 8);
        assert_eq!(kids[1].ranges(), &[(0, 3), (0, 3), (4, 7)]);
        let a = PhaseAlphabet::eighths_of_quarter_turn();
        let mids = kids[1].midpoints(&a);
        for (x, y) in mids.iter().zip([PI / 8.0, PI / 8.0, 3.0 * PI / 8.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        let single = SegmentBox::new(vec![(3, 3), (0, 1)]);
        assert_eq!(single.midpoints(&a)[0], a.values()[3]);
        assert_eq!(single.points(), vec![vec![3, 0], vec![3, 1]]);
        assert_eq!(single.label(), "3-3;0-1");
    }

    #[test]
    fn segment_search_needs_power_of_two() {
        let a = PhaseAlphabet::uniform(6, FRAC_PI_2).unwrap();
        let o = build_multivalued_oracle(&[0.0, FRAC_PI_2], a, None).unwrap();
        assert_eq!(
            segment_search(&o, &SearchOptions::default()).unwrap_err(),
            SearchError::AlphabetNotPowerOfTwo(6)
        );
    }

    #[test]
    fn segment_search_on_binary_alphabet_is_exhaustive() {
        let o = build_multivalued_oracle(&[0.0, FRAC_PI_2, 0.0], PhaseAlphabet::binary(), None)
            .unwrap();
        let r = segment_search(&o, &SearchOptions::default()).unwrap();
        assert_eq!(r.queries, 8);
        assert_eq!(r.solution_indices, vec![1, 0, 1]);
        assert!(r.verified);
    }

    #[test]
    fn brute_force_cap() {
        let o = build_binary_oracle(&[P4, -P4, P4, P4]).unwrap();
        let opts = SearchOptions {
            exhaustion_cap: 8,
            ..Default::default()
        };
        assert_eq!(
            brute_force(&o, &opts).unwrap_err(),
            SearchError::SpaceTooLarge { size: 16, cap: 8 }
        );
        assert_eq!(o.queries(), 0);
    }

    #[test]
    fn margins_for_two_input_oracle() {
        let o = build_binary_oracle(&[P4, -P4]).unwrap();
        assert!(step_margin(&o, 0, &[]).unwrap() > 0.0);
        assert!(step_margin(&o, 1, &[0.0]).unwrap() > 0.0);
        assert!(step_margin(&o, 2, &[0.0, 0.0]).is_err());
        assert!(step_margin(&o, 1, &[]).is_err());
        assert!(worst_case_margin(1).is_err());
    }

    #[test]
    fn trace_csv_shape() {
        let o = build_binary_oracle(&[-P4, P4]).unwrap();
        let r = binary_superposition_search(&o, &SearchOptions::default()).unwrap();
        let csv = r.trace_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,input_index_or_box,phases_pi,phases,a_out,p_out,decision");
        assert_eq!(lines.len(), 1 + 5);
        assert!(lines[1].starts_with("1,1,0;0.25,"));
        assert!(lines[5].ends_with(",confirmed"));
    }

    #[test]
    fn margin_csv_rows() {
        assert_eq!(margin_csv(&[(7, 0.5)]), "n,margin\n7,0.5\n");
    }
}
