//! Tabulated oracles: measured output voltages looked up by input phase
//! combination, searched with the same two-stage segment procedure.
//!
//! Table format (UTF-8, LF): a header `phi1_deg,...,phiN_deg,voltage_mV`
//! followed by one row per measured combination, phases in decimal degrees
//! and the voltage in decimal millivolts.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::oracle::{build_multivalued_oracle, OracleError, PhaseAlphabet};

/// Co-maxima within this many millivolts are reported together.
pub const DEFAULT_VOLTAGE_TOLERANCE: f64 = 0.0015;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: combination already present")]
    DuplicateCombination { line: usize },
    #[error("line {line}: expected {expected} fields, found {found}")]
    MixedArity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("combination {0:?} was not measured")]
    CombinationNotMeasured(Vec<f64>),
    #[error("expected {expected} phases, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("leaf measurements for segment {segment:?} are missing ({missing:?} absent)")]
    MissingLeafData { segment: Vec<f64>, missing: Vec<f64> },
    #[error("invalid segment geometry: {0}")]
    BadGeometry(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn key(combo: &[f64]) -> Vec<u64> {
    // +0.0 folds −0.0 onto 0.0
    combo.iter().map(|&x| (x + 0.0).to_bits()).collect()
}

/// Measured phase-combination → voltage table with a query counter.
#[derive(Debug)]
pub struct TabulatedOracle {
    arity: usize,
    rows: Vec<(Vec<f64>, f64)>,
    index: HashMap<Vec<u64>, usize>,
    queries: AtomicU64,
}

impl PartialEq for TabulatedOracle {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.rows == other.rows
    }
}

impl TabulatedOracle {
    /// Builds a table from rows; the same validation as [`load_table`].
    pub fn from_rows(arity: usize, rows: Vec<(Vec<f64>, f64)>) -> Result<Self, DatasetError> {
        if arity == 0 {
            return Err(DatasetError::MalformedRow {
                line: 1,
                reason: "no phase columns".into(),
            });
        }
        let mut index = HashMap::with_capacity(rows.len());
        for (i, (combo, volts)) in rows.iter().enumerate() {
            let line = i + 2;
            if combo.len() != arity {
                return Err(DatasetError::MixedArity {
                    line,
                    expected: arity + 1,
                    found: combo.len() + 1,
                });
            }
            if combo.iter().any(|x| !x.is_finite()) {
                return Err(DatasetError::MalformedRow {
                    line,
                    reason: "non-finite phase".into(),
                });
            }
            if !volts.is_finite() || *volts < 0.0 {
                return Err(DatasetError::MalformedRow {
                    line,
                    reason: format!("voltage must be finite and non-negative, got {volts}"),
                });
            }
            if index.insert(key(combo), i).is_some() {
                return Err(DatasetError::DuplicateCombination { line });
            }
        }
        Ok(Self {
            arity,
            rows,
            index,
            queries: AtomicU64::new(0),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[(Vec<f64>, f64)] {
        &self.rows
    }

    /// Distinct phase values appearing in any column, ascending.
    pub fn phase_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().flat_map(|(c, _)| c.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Uncounted lookup.
    pub fn get(&self, combo: &[f64]) -> Option<f64> {
        self.index.get(&key(combo)).map(|&i| self.rows[i].1)
    }

    /// Stored voltage for `combo`; counts as one query. Absent combinations
    /// are errors, never interpolated.
    pub fn query(&self, combo: &[f64]) -> Result<f64, DatasetError> {
        if combo.len() != self.arity {
            return Err(DatasetError::ArityMismatch {
                expected: self.arity,
                got: combo.len(),
            });
        }
        let v = self
            .get(combo)
            .ok_or_else(|| DatasetError::CombinationNotMeasured(combo.to_vec()))?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(v)
    }

    /// Serializes in the table format; `load_table` reads it back exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 1..=self.arity {
            out.push_str(&format!("phi{i}_deg,"));
        }
        out.push_str("voltage_mV\n");
        for (combo, volts) in &self.rows {
            for x in combo {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{volts}\n"));
        }
        out
    }
}

/// Parses a table. Surrounding whitespace in fields is ignored.
pub fn load_table(source: &str) -> Result<TabulatedOracle, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        None => {
            return Err(DatasetError::MalformedRow {
                line: 1,
                reason: "empty input, header expected".into(),
            })
        }
        Some(r) => r.map_err(|e| DatasetError::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?,
    };
    let columns = header.len();
    if columns < 2 {
        return Err(DatasetError::MalformedRow {
            line: 1,
            reason: "header needs phase columns and a voltage column".into(),
        });
    }
    for (i, name) in header.iter().enumerate() {
        let expected = if i + 1 == columns {
            "voltage_mV".to_string()
        } else {
            format!("phi{}_deg", i + 1)
        };
        if name != expected {
            return Err(DatasetError::MalformedRow {
                line: 1,
                reason: format!("header column {} is {name:?}, expected {expected:?}", i + 1),
            });
        }
    }
    let arity = columns - 1;

    let mut rows = Vec::new();
    for (i, record) in records.enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| DatasetError::MalformedRow {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != columns {
            return Err(DatasetError::MixedArity {
                line,
                expected: columns,
                found: record.len(),
            });
        }
        let numbers = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| DatasetError::MalformedRow {
                line,
                reason: e.to_string(),
            })?;
        let volts = numbers[arity];
        rows.push((numbers[..arity].to_vec(), volts));
    }
    if rows.is_empty() {
        return Err(DatasetError::MalformedRow {
            line: 2,
            reason: "no data rows".into(),
        });
    }
    TabulatedOracle::from_rows(arity, rows)
}

/// Splits each axis's alphabet into a lower and an upper half, each
/// represented in the first stage by one superposition phase label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentGeometry {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub labels: [f64; 2],
}

impl SegmentGeometry {
    pub fn new(alphabet: Vec<f64>, labels: [f64; 2]) -> Result<Self, DatasetError> {
        if alphabet.len() < 2 || !alphabet.len().is_multiple_of(2) {
            return Err(DatasetError::BadGeometry(format!(
                "alphabet size must be even and at least 2, got {}",
                alphabet.len()
            )));
        }
        if labels[0] == labels[1] {
            return Err(DatasetError::BadGeometry("labels must differ".into()));
        }
        let upper = alphabet[alphabet.len() / 2..].to_vec();
        let mut lower = alphabet;
        lower.truncate(upper.len());
        Ok(Self {
            lower,
            upper,
            labels,
        })
    }

    /// Phases 0°, 7°, 14°, 21°; halves labelled 4° and 18° as measured.
    pub fn four_phase_degrees() -> Self {
        Self {
            lower: vec![0.0, 7.0],
            upper: vec![14.0, 21.0],
            labels: [4.0, 18.0],
        }
    }

    pub fn alphabet(&self) -> Vec<f64> {
        self.lower.iter().chain(&self.upper).copied().collect()
    }

    fn half_for(&self, label: f64) -> &[f64] {
        if label == self.labels[0] {
            &self.lower
        } else {
            &self.upper
        }
    }
}

/// Every combination of a per-axis value list, first axis slowest.
fn product(axes: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableEntry {
    pub combination: Vec<f64>,
    pub voltage_mv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSearchReport {
    /// Every stage-1 measurement in query order.
    pub segment_measurements: Vec<TableEntry>,
    pub winning_segments: Vec<TableEntry>,
    /// Every stage-2 measurement in query order.
    pub leaf_measurements: Vec<TableEntry>,
    pub candidates: Vec<TableEntry>,
    pub segment_queries: u64,
    pub leaf_queries: u64,
    /// Leaf queries beyond one segment's worth, caused by stage-1 ties.
    pub extra_leaf_queries: u64,
    pub total_queries: u64,
    /// Queries a one-by-one scan of the full lattice needs.
    pub exhaustive_queries: u64,
}

impl DatasetSearchReport {
    /// The highest-voltage candidate; the first queried wins exact ties.
    pub fn strongest(&self) -> &TableEntry {
        self.candidates
            .iter()
            .reduce(|best, c| if c.voltage_mv > best.voltage_mv { c } else { best })
            .expect("at least one candidate")
    }

    /// `stage,combination_deg,voltage_mV,role` rows for both stages.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,combination_deg,voltage_mV,role\n");
        let join = |c: &[f64]| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        let mut emit = |stage: u8, entries: &[TableEntry], winners: &[TableEntry], role: &str| {
            for e in entries {
                let won = winners.iter().any(|w| w.combination == e.combination);
                out.push_str(&format!(
                    "{stage},{},{},{}\n",
                    join(&e.combination),
                    e.voltage_mv,
                    if won { role } else { "measured" }
                ));
            }
        };
        emit(1, &self.segment_measurements, &self.winning_segments, "winner");
        emit(2, &self.leaf_measurements, &self.candidates, "maximum");
        out
    }
}

/// Stage 1 queries every midpoint-label combination in `segment_table` and
/// keeps the strongest (all within `tolerance_mv` of it); stage 2 queries
/// every leaf of each kept segment in `leaf_table` and reports the co-maxima.
pub fn segment_search_tabulated(
    segment_table: &TabulatedOracle,
    leaf_table: &TabulatedOracle,
    geometry: &SegmentGeometry,
    tolerance_mv: f64,
) -> Result<DatasetSearchReport, DatasetError> {
    let n = segment_table.arity();
    if leaf_table.arity() != n {
        return Err(DatasetError::ArityMismatch {
            expected: n,
            got: leaf_table.arity(),
        });
    }
    let seg_start = segment_table.queries();

    let labels: &[f64] = &geometry.labels;
    let mut segment_measurements = Vec::with_capacity(1 << n);
    for combo in product(&vec![labels; n]) {
        let v = segment_table.query(&combo)?;
        segment_measurements.push(TableEntry {
            combination: combo,
            voltage_mv: v,
        });
    }
    let winning_segments = top_entries(&segment_measurements, tolerance_mv);
    let segment_queries = segment_table.queries() - seg_start;
    // read after stage 1 so one table may serve both stages
    let leaf_start = leaf_table.queries();

    let mut leaf_measurements = Vec::new();
    for seg in &winning_segments {
        let axes: Vec<&[f64]> = seg.combination.iter().map(|&l| geometry.half_for(l)).collect();
        for leaf in product(&axes) {
            match leaf_table.query(&leaf) {
                Ok(v) => leaf_measurements.push(TableEntry {
                    combination: leaf,
                    voltage_mv: v,
                }),
                Err(DatasetError::CombinationNotMeasured(missing)) => {
                    return Err(DatasetError::MissingLeafData {
                        segment: seg.combination.clone(),
                        missing,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
    let candidates = top_entries(&leaf_measurements, tolerance_mv);
    let leaf_queries = leaf_table.queries() - leaf_start;
    let per_segment = (geometry.lower.len() as u64).pow(n as u32);
    let m = (geometry.lower.len() + geometry.upper.len()) as u64;
    Ok(DatasetSearchReport {
        segment_measurements,
        winning_segments,
        leaf_measurements,
        candidates,
        segment_queries,
        leaf_queries,
        extra_leaf_queries: leaf_queries.saturating_sub(per_segment),
        total_queries: segment_queries + leaf_queries,
        exhaustive_queries: m.pow(n as u32),
    })
}

fn top_entries(entries: &[TableEntry], tolerance: f64) -> Vec<TableEntry> {
    let best = entries.iter().map(|e| e.voltage_mv).fold(f64::NEG_INFINITY, f64::max);
    entries
        .iter()
        .filter(|e| e.voltage_mv >= best - tolerance)
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub seed: u64,
    /// Half-width of the uniform noise band, in mV.
    pub amplitude_mv: f64,
}

/// Full voltage mV for the constructive combination.
pub const SYNTHETIC_PEAK_MV: f64 = 0.95;

/// Synthetic device table over the four-phase geometry: every midpoint-label
/// combination followed by every leaf, voltage proportional to the output
/// amplitude of an oracle with shifters `deltas_deg` (scaled so that full
/// constructive interference reads [`SYNTHETIC_PEAK_MV`]), plus optional
/// bounded uniform noise. Voltages are clamped at zero.
pub fn synthesize_device_table(
    deltas_deg: &[f64],
    noise: Option<Noise>,
) -> Result<TabulatedOracle, DatasetError> {
    let geometry = SegmentGeometry::four_phase_degrees();
    let alphabet_deg = geometry.alphabet();
    let alphabet = PhaseAlphabet::new(alphabet_deg.iter().map(|d| d.to_radians()).collect())?;
    let deltas: Vec<f64> = deltas_deg.iter().map(|d| d.to_radians()).collect();
    let oracle = build_multivalued_oracle(&deltas, alphabet, None)?;
    let n = oracle.n();
    let scale = SYNTHETIC_PEAK_MV / n as f64;
    let mut rng = noise.map(|z| (ChaCha8Rng::seed_from_u64(z.seed), z.amplitude_mv));

    let labels: &[f64] = &geometry.labels;
    let combos = product(&vec![labels; n])
        .into_iter()
        .chain(product(&vec![alphabet_deg.as_slice(); n]));
    let mut rows = Vec::new();
    for combo in combos {
        let phases: Vec<f64> = combo.iter().map(|d| d.to_radians()).collect();
        let mut v = scale * oracle.query(&phases)?.a_out;
        if let Some((rng, amp)) = rng.as_mut() {
            if *amp > 0.0 {
                v += rng.gen_range(-*amp..=*amp);
            }
        }
        rows.push((combo, v.max(0.0)));
    }
    TabulatedOracle::from_rows(n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "phi1_deg,phi2_deg,voltage_mV\n4,4,0.5\n4,18,0.7\n18,4,0.6\n18,18,0.2\n";

    #[test]
    fn loads_small_table() {
        let t = load_table(SMALL).unwrap();
        assert_eq!(t.arity(), 2);
        assert_eq!(t.len(), 4);
        assert_eq!(t.get(&[4.0, 18.0]), Some(0.7));
        assert_eq!(t.phase_values(), vec![4.0, 18.0]);
    }

    #[test]
    fn loader_errors() {
        assert!(matches!(load_table(""), Err(DatasetError::MalformedRow { line: 1, .. })));
        assert!(matches!(
            load_table("phi1_deg,voltage_mV\n"),
            Err(DatasetError::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            load_table("a,b\n1,2\n"),
            Err(DatasetError::MalformedRow { line: 1, .. })
        ));
        assert!(matches!(
            load_table("phi1_deg,voltage_mV\n1,x\n"),
            Err(DatasetError::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            load_table("phi1_deg,voltage_mV\n1,-0.5\n"),
            Err(DatasetError::MalformedRow { line: 2, .. })
        ));
        assert_eq!(
            load_table("phi1_deg,voltage_mV\n1,0.5\n1,0.6\n").unwrap_err(),
            DatasetError::DuplicateCombination { line: 3 }
        );
        assert_eq!(
            load_table("phi1_deg,phi2_deg,voltage_mV\n1,2,0.5\n1,0.6\n").unwrap_err(),
            DatasetError::MixedArity {
                line: 3,
                expected: 3,
                found: 2
            }
        );
        assert!(matches!(
            load_table("phi1_deg,voltage_mV\nNaN,0.5\n"),
            Err(DatasetError::MalformedRow { .. })
        ));
    }

    #[test]
    fn negative_zero_matches_zero() {
        let t = load_table("phi1_deg,phi2_deg,voltage_mV\n-0,1,0.5\n").unwrap();
        assert_eq!(t.get(&[0.0, 1.0]), Some(0.5));
        assert!(load_table("phi1_deg,voltage_mV\n0,0.5\n-0,0.6\n").is_err());
    }

    #[test]
    fn counted_lookup() {
        let t = load_table(SMALL).unwrap();
        assert_eq!(t.query(&[18.0, 4.0]).unwrap(), 0.6);
        assert_eq!(
            t.query(&[5.0, 5.0]).unwrap_err(),
            DatasetError::CombinationNotMeasured(vec![5.0, 5.0])
        );
        assert!(matches!(t.query(&[4.0]), Err(DatasetError::ArityMismatch { .. })));
        assert_eq!(t.queries(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let t = load_table(SMALL).unwrap();
        assert_eq!(load_table(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn geometry_from_alphabet() {
        let g = SegmentGeometry::new(vec![0.0, 7.0, 14.0, 21.0], [4.0, 18.0]).unwrap();
        assert_eq!(g, SegmentGeometry::four_phase_degrees());
        assert!(SegmentGeometry::new(vec![0.0, 7.0, 14.0], [4.0, 18.0]).is_err());
        assert!(SegmentGeometry::new(vec![0.0, 7.0], [4.0, 4.0]).is_err());
    }

    #[test]
    fn missing_leaves_are_reported() {
        let segs = load_table(SMALL).unwrap();
        let leaves = load_table("phi1_deg,phi2_deg,voltage_mV\n0,14,0.5\n").unwrap();
        let err = segment_search_tabulated(
            &segs,
            &leaves,
            &SegmentGeometry::four_phase_degrees(),
            DEFAULT_VOLTAGE_TOLERANCE,
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::MissingLeafData { ref segment, .. } if segment == &vec![4.0, 18.0]));
    }

    #[test]
    fn synthetic_table_shape() {
        let t = synthesize_device_table(&[0.0, 21.0, 21.0], None).unwrap();
        assert_eq!(t.len(), 8 + 64);
        assert!(t.rows().iter().all(|(_, v)| *v >= 0.0));
        assert!((t.get(&[21.0, 0.0, 0.0]).unwrap() - SYNTHETIC_PEAK_MV).abs() < 1e-12);
        assert!(synthesize_device_table(&[7.0, 7.0], None).is_err());
    }
}
