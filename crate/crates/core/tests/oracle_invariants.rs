use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use wave_oracle::oracle::{
    build_binary_oracle, build_multivalued_oracle, random_oracle, target_of, RandomKind,
};
use wave_oracle::{Bit, OracleError, OracleSpec, PhaseAlphabet};

fn binary_patterns(n: usize) -> impl Iterator<Item = Vec<f64>> {
    (1..(1u32 << n) - 1).map(move |mask| {
        (0..n)
            .map(|i| if mask >> i & 1 == 1 { -FRAC_PI_4 } else { FRAC_PI_4 })
            .collect()
    })
}

/// Independently computed output amplitude of a lattice point.
fn amplitude(oracle: &OracleSpec, phases: &[f64]) -> f64 {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for ((p, d), s) in phases.iter().zip(oracle.deltas()).zip(oracle.sigmas()) {
        re += s * (p + d).cos();
        im += s * (p + d).sin();
    }
    re.hypot(im)
}

#[test]
fn binary_target_is_the_unique_full_power_point() {
    for n in 2..=10 {
        for deltas in binary_patterns(n) {
            let oracle = build_binary_oracle(&deltas).unwrap();
            let target = target_of(&oracle).unwrap();
            for (p, d) in target.iter().zip(&deltas) {
                assert!((p + d - FRAC_PI_4).abs() < 1e-15);
            }
            let mut full = 0;
            for mask in 0..1u32 << n {
                let phases: Vec<f64> = (0..n)
                    .map(|i| if mask >> (n - 1 - i) & 1 == 1 { FRAC_PI_2 } else { 0.0 })
                    .collect();
                let meas = oracle.query(&phases).unwrap();
                assert!((meas.a_out - amplitude(&oracle, &phases)).abs() < 1e-12);
                if meas.bit == Bit::One {
                    full += 1;
                    assert_eq!(phases, target);
                    assert!((meas.a_out - n as f64).abs() < 1e-12);
                } else {
                    assert!(meas.a_out < n as f64 - 1e-6);
                }
            }
            assert_eq!(full, 1, "{deltas:?}");
            assert_eq!(oracle.queries(), 1 << n);
        }
    }
}

#[test]
fn multivalued_full_spread_oracles_have_one_target() {
    let alphabet = PhaseAlphabet::eighths_of_quarter_turn();
    let values = alphabet.values().to_vec();
    let mut oracles = 0;
    for a in 0..8 {
        for b in 0..8 {
            for c in 0..8 {
                let idx = [a, b, c];
                let lo = *idx.iter().min().unwrap();
                let hi = *idx.iter().max().unwrap();
                let deltas: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
                let built = build_multivalued_oracle(&deltas, alphabet.clone(), None);
                if lo == hi {
                    assert_eq!(built.unwrap_err(), OracleError::AllShiftersEqual);
                    continue;
                }
                let oracle = built.unwrap();
                let target = target_of(&oracle);
                if lo != 0 || hi != 7 {
                    // a narrower spread leaves room to slide the common phase
                    assert!(matches!(target, Err(OracleError::NoUniqueTarget(k)) if k > 1));
                    continue;
                }
                let target = target.unwrap();
                let common = target[0] + deltas[0];
                for (p, d) in target.iter().zip(&deltas) {
                    assert!((p + d - common).abs() < 1e-12);
                }
                let best = oracle.query(&target).unwrap();
                assert!((best.a_out - 3.0).abs() < 1e-12);
                assert_eq!(best.bit, Bit::One);
                oracles += 1;
            }
        }
    }
    // 8³ − 2·7³ + 6³ triples contain both extremes
    assert_eq!(oracles, 42);
}

#[test]
fn lattice_and_phase_queries_agree_bit_for_bit() {
    let oracle = random_oracle(6, RandomKind::Multivalued, Some(&PhaseAlphabet::eighths_of_quarter_turn()), 5)
        .unwrap();
    for code in 0..8usize.pow(3) {
        let idx = [code / 64, code / 8 % 8, code % 8, 0, 7, 3];
        let a = oracle.query_lattice(&idx).unwrap();
        let b = oracle.query(&oracle.phases_of(&idx)).unwrap();
        assert_eq!(a.a_out.to_bits(), b.a_out.to_bits());
        assert_eq!(a.phi_out.to_bits(), b.phi_out.to_bits());
    }
}

#[test]
fn second_example_reference_points() {
    let oracle = build_multivalued_oracle(
        &[5.0 * PI / 14.0, FRAC_PI_2, 0.0],
        PhaseAlphabet::eighths_of_quarter_turn(),
        None,
    )
    .unwrap();
    let probe = [PI / 8.0, PI / 8.0, 3.0 * PI / 8.0];
    let a = oracle.query(&probe).unwrap().a_out;
    assert!((a - amplitude(&oracle, &probe)).abs() < 1e-12);
    assert!((a - 2.84675).abs() < 5e-5);
    let top = oracle.query(&[PI / 7.0, 0.0, FRAC_PI_2]).unwrap();
    assert!((top.a_out - 3.0).abs() < 1e-12);
    assert!(matches!(
        build_multivalued_oracle(&[0.0, PI / 3.0, 0.0], PhaseAlphabet::eighths_of_quarter_turn(), None),
        Err(OracleError::ValueNotInAlphabet { index: 1, .. })
    ));
}

#[test]
fn random_oracles_are_valid_and_reproducible() {
    for seed in 0..200 {
        let a = random_oracle(12, RandomKind::Binary, None, seed).unwrap();
        let b = random_oracle(12, RandomKind::Binary, None, seed).unwrap();
        assert_eq!(a, b);
        assert!(a.deltas().iter().any(|&d| d != a.deltas()[0]));
        assert!(target_of(&a).is_ok());
        let m = random_oracle(4, RandomKind::Multivalued, Some(&PhaseAlphabet::eighths_of_quarter_turn()), seed)
            .unwrap();
        assert!(target_of(&m).is_ok());
    }
    let wide = random_oracle(100, RandomKind::Binary, None, 1).unwrap();
    assert!(wide.deltas().contains(&FRAC_PI_4) && wide.deltas().contains(&-FRAC_PI_4));
}

#[test]
fn json_documents_round_trip() {
    let oracle = random_oracle(5, RandomKind::Multivalued, Some(&PhaseAlphabet::eighths_of_quarter_turn()), 9)
        .unwrap();
    let back = OracleSpec::from_json(&oracle.to_json()).unwrap();
    assert_eq!(back, oracle);
    assert_eq!(back.kind(), oracle.kind());
}
