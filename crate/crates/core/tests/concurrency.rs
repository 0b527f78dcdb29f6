use std::sync::Arc;
use std::thread;

use wave_oracle::oracle::{random_oracle, RandomKind};
use wave_oracle::presets;
use wave_oracle::search::{brute_force, SearchOptions};

#[test]
fn query_counter_is_exact_under_contention() {
    let oracle = Arc::new(random_oracle(16, RandomKind::Binary, None, 3).unwrap());
    let threads = 8;
    let per_thread = 5000;
    let handles: Vec<_> = (0..threads)
        .map(|t| {
            let oracle = Arc::clone(&oracle);
            thread::spawn(move || {
                let mut last = 0.0;
                for i in 0..per_thread {
                    let idx: Vec<usize> = (0..16).map(|b| (i + t) >> b & 1).collect();
                    last = oracle.query_lattice(&idx).unwrap().a_out;
                }
                last
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(oracle.queries(), (threads * per_thread) as u64);
}

#[test]
fn parallel_scan_counts_every_point_once() {
    let oracle = random_oracle(14, RandomKind::Binary, None, 11).unwrap();
    let first = brute_force(&oracle, &SearchOptions::default()).unwrap();
    let second = brute_force(&oracle, &SearchOptions::default()).unwrap();
    assert_eq!(first.queries, 1 << 14);
    assert_eq!(oracle.queries(), 2 << 14);
    assert_eq!(first, second);
}

#[test]
fn table_counter_is_exact_under_contention() {
    let table = Arc::new(presets::example3_segment_table());
    let rows: Arc<Vec<Vec<f64>>> = Arc::new(table.rows().iter().map(|(c, _)| c.clone()).collect());
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let table = Arc::clone(&table);
            let rows = Arc::clone(&rows);
            thread::spawn(move || {
                for _ in 0..100 {
                    for r in rows.iter() {
                        table.query(r).unwrap();
                    }
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(table.queries(), 4 * 100 * 32);
}
