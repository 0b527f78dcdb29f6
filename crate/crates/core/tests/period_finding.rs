use std::f64::consts::PI;

use wave_oracle::periodfind::{
    check_factorizable, default_length, factor_step, factorize, find_period, mod_sequence,
    phase_map, phase_trace_csv, running_phase, FactorOptions, PeriodError,
};

fn order(base: u64, modulus: u64) -> u64 {
    let mut x = base % modulus;
    let mut r = 1;
    while x != 1 {
        x = x * base % modulus;
        r += 1;
    }
    r
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn period_matches_multiplicative_order_for_every_base() {
    for modulus in 3..=300u64 {
        for base in 2..modulus {
            if gcd(base, modulus) != 1 {
                continue;
            }
            let seq = mod_sequence(modulus, base, default_length(modulus)).unwrap();
            let found = find_period(&seq, 1e-9).unwrap();
            assert_eq!(found.period, order(base, modulus), "N={modulus} m={base}");
        }
    }
}

#[test]
fn sequence_of_255_and_13() {
    let seq = mod_sequence(255, 13, 8).unwrap();
    assert_eq!(seq.values(), &[13, 169, 157, 1, 13, 169, 157, 1]);
    let phases = phase_map(&seq);
    assert!((phases[0] - 13.0 * PI / 255.0).abs() < 1e-15);
    let trace = running_phase(&phases);
    let (re, im) = phases
        .iter()
        .take(4)
        .fold((0.0, 0.0), |(r, i), p| (r + p.cos(), i + p.sin()));
    let expected = im.atan2(re);
    assert!((trace[3].phase.unwrap() - expected).abs() < 1e-12);
    assert!((expected - PI / 3.0).abs() < 1e-12);
    assert!((trace[7].phase.unwrap() - PI / 3.0).abs() < 1e-12);
}

#[test]
fn period_of_2805_and_13() {
    let seq = mod_sequence(2805, 13, default_length(2805)).unwrap();
    let result = find_period(&seq, 1e-9).unwrap();
    assert_eq!(result.period, 20);
    let (re, im) = phase_map(&seq)
        .iter()
        .take(20)
        .fold((0.0, 0.0), |(r, i), p| (r + p.cos(), i + p.sin()));
    assert!((result.converged_phase - im.atan2(re)).abs() < 1e-12);
    assert!((result.converged_phase / PI - 0.41541966755277926).abs() < 1e-12);
    assert!((result.terminal_phase.unwrap() - result.converged_phase).abs() < 1e-3);
}

#[test]
fn too_short_sequences_do_not_converge() {
    let seq = mod_sequence(2805, 13, 30).unwrap();
    assert!(matches!(
        find_period(&seq, 1e-9),
        Err(PeriodError::NotConverged { .. } | PeriodError::FalseMatch { .. })
    ));
    let seq = mod_sequence(2805, 13, 40).unwrap();
    assert_eq!(find_period(&seq, 1e-9).unwrap().period, 20);
}

#[test]
fn gcd_step_results() {
    assert_eq!(factor_step(255, 13, 4).unwrap(), vec![85, 3]);
    assert_eq!(factor_step(15, 2, 4).unwrap(), vec![5, 3]);
    assert_eq!(factor_step(15, 2, 3), Err(PeriodError::OddPeriod(3)));
    // 14^1 ≡ −1 (mod 15)
    assert!(matches!(factor_step(15, 14, 2), Err(PeriodError::TrivialCase { half_power: 14 })));
}

#[test]
fn factorize_finds_divisors() {
    for n in [15u64, 21, 33, 35, 39, 51, 55, 77, 85, 91, 255, 1001, 2805, 3127] {
        for seed in 0..5 {
            let options = FactorOptions {
                seed,
                ..FactorOptions::default()
            };
            let report = factorize(n, &options).unwrap();
            assert!(report.factor > 1 && report.factor < n && n % report.factor == 0, "{n}");
            assert_eq!(factorize(n, &options).unwrap(), report);
        }
    }
}

#[test]
fn factorize_rejects_unsuitable_moduli() {
    assert_eq!(check_factorizable(16), Err(PeriodError::EvenModulus(16)));
    assert_eq!(check_factorizable(13), Err(PeriodError::PrimeModulus(13)));
    assert_eq!(
        check_factorizable(27),
        Err(PeriodError::PrimePower {
            modulus: 27,
            prime: 3,
            exponent: 3
        })
    );
    assert_eq!(check_factorizable(3), Err(PeriodError::BadModulus(3)));
    assert!(check_factorizable(15).is_ok());
}

#[test]
fn sequence_input_errors() {
    assert_eq!(mod_sequence(1, 2, 4), Err(PeriodError::BadModulus(1)));
    assert!(matches!(mod_sequence(15, 15, 4), Err(PeriodError::BadBase { .. })));
    assert_eq!(
        mod_sequence(15, 6, 4),
        Err(PeriodError::NotCoprime {
            base: 6,
            modulus: 15,
            gcd: 3
        })
    );
    assert_eq!(mod_sequence(15, 2, 0), Err(PeriodError::EmptySequence));
}

#[test]
fn trace_csv_layout() {
    let seq = mod_sequence(15, 2, 8).unwrap();
    let trace = running_phase(&phase_map(&seq));
    let csv = phase_trace_csv(&seq, &trace);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,f_k,phi_k,running_phase,running_amplitude");
    assert_eq!(lines.len(), 9);
    assert!(lines[1].starts_with("1,2,"));
    assert!(lines[4].starts_with("4,1,"));
}
