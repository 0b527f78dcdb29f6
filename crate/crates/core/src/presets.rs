//! Ready-made instances of the worked examples.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::dataset::{load_table, DatasetError, TabulatedOracle};
use crate::oracle::{build_binary_oracle, build_multivalued_oracle, OracleSpec, PhaseAlphabet};
use crate::phasor::Power;

/// Measured stage-1 voltages of the five-antenna device, one row per
/// midpoint combination (4° or 18° on each antenna).
pub const EXAMPLE3_STEP1_CSV: &str = include_str!("../data/example3_step1.csv");

pub const EXAMPLE1_DELTAS: [f64; 5] = [FRAC_PI_4, -FRAC_PI_4, -FRAC_PI_4, FRAC_PI_4, FRAC_PI_4];

pub const EXAMPLE2_DELTAS: [f64; 3] = [5.0 * PI / 14.0, FRAC_PI_2, 0.0];

/// Shifters in degrees under which the synthetic device peaks at (21,0,0,0,21).
pub const EXAMPLE3_SYNTHETIC_DELTAS_DEG: [f64; 5] = [0.0, 21.0, 21.0, 21.0, 0.0];

/// The two leaf voltages reported by the one-by-one scan of the device.
pub const EXAMPLE3_REPORTED_MAXIMA: [([f64; 5], f64); 2] = [
    ([21.0, 0.0, 0.0, 0.0, 21.0], 0.9501),
    ([21.0, 7.0, 7.0, 0.0, 21.0], 0.9507),
];

pub fn example1() -> OracleSpec {
    build_binary_oracle(&EXAMPLE1_DELTAS).expect("valid preset")
}

pub fn example2_alphabet() -> PhaseAlphabet {
    PhaseAlphabet::eighths_of_quarter_turn()
}

/// Threshold at the constructive power `n² = 9`.
pub fn example2() -> OracleSpec {
    build_multivalued_oracle(&EXAMPLE2_DELTAS, example2_alphabet(), None).expect("valid preset")
}

/// Threshold at the printed reference value 3.
pub fn example2_printed_reference() -> OracleSpec {
    let p_ref = Power::new(3.0).expect("positive");
    build_multivalued_oracle(&EXAMPLE2_DELTAS, example2_alphabet(), Some(p_ref))
        .expect("valid preset")
}

pub fn example3_segment_table() -> TabulatedOracle {
    load_table(EXAMPLE3_STEP1_CSV).expect("bundled fixture parses")
}

/// Synthetic stage-2 table for the winning segment {14,21}×{0,7}³×{14,21}.
///
/// These leaves were never published. Voltages are `0.90·a_out/n` of the
/// synthetic oracle, except the two reported maxima which carry the
/// reported values.
pub fn example3_leaf_table() -> Result<TabulatedOracle, DatasetError> {
    let alphabet = PhaseAlphabet::new(vec![0.0, 7.0, 14.0, 21.0].into_iter().map(f64::to_radians).collect())?;
    let deltas: Vec<f64> = EXAMPLE3_SYNTHETIC_DELTAS_DEG.iter().map(|d| d.to_radians()).collect();
    let oracle = build_multivalued_oracle(&deltas, alphabet, None)?;
    let n = oracle.n();
    let outer = [14.0, 21.0];
    let inner = [0.0, 7.0];
    let mut rows = Vec::with_capacity(32);
    for &a in &outer {
        for &b in &inner {
            for &c in &inner {
                for &d in &inner {
                    for &e in &outer {
                        let combo = vec![a, b, c, d, e];
                        let reported = EXAMPLE3_REPORTED_MAXIMA
                            .iter()
                            .find(|(m, _)| m[..] == combo[..])
                            .map(|(_, v)| *v);
                        let volts = match reported {
                            Some(v) => v,
                            None => {
                                let phases: Vec<f64> = combo.iter().map(|d| d.to_radians()).collect();
                                0.90 * oracle.evaluate(&phases).a_out / n as f64
                            }
                        };
                        rows.push((combo, volts));
                    }
                }
            }
        }
    }
    TabulatedOracle::from_rows(n, rows)
}
