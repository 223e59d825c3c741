use std::path::PathBuf;

use ipsample::eval::randomize;
use ipsample::{read_csv_path, seeded_rng};

fn table1() -> ipsample::NumericalDataset {
    read_csv_path(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/table1.csv")).unwrap()
}

// Frozen from the first run; any change to the swap procedure or RNG use shows up here.
#[test]
fn randomized_running_example_is_frozen() {
    let ds = table1();
    let r = randomize(&ds, &mut seeded_rng(5), 10).unwrap();
    assert_eq!(
        r.dataset.to_rows(),
        vec![
            vec![3, 8, 130],
            vec![6, 7, 110],
            vec![2, 12, 91],
            vec![4, 9, 102],
            vec![2, 12, 101],
        ]
    );
    assert_eq!(r.swaps_per_attribute, vec![10; 3]);
}

#[test]
fn zero_swaps_is_identity() {
    let ds = table1();
    let r = randomize(&ds, &mut seeded_rng(5), 0).unwrap();
    assert_eq!(r.dataset.to_rows(), ds.to_rows());
}
