mod common;

use common::*;
use k2triples::{Dataset, FormatError, PatternForm, TripleStore};
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn store_bytes_are_stable_across_reload() {
    let mut rng = StdRng::seed_from_u64(21);
    for k in [2, 3, 5] {
        let sz = sizes(30, 20, 25, 6);
        let (store, triples) = random_store(&mut rng, sz, 800, k);
        let mut bytes = Vec::new();
        store.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), store.serialized_len());
        let loaded = TripleStore::read_from(&mut bytes.as_slice()).unwrap();
        let mut again = Vec::new();
        loaded.write_to(&mut again).unwrap();
        assert_eq!(bytes, again);
        for form in PatternForm::ALL {
            let pattern = random_pattern(&mut rng, form, sz, &triples);
            assert!(store.solve(&pattern).unwrap().eq(loaded.solve(&pattern).unwrap()));
        }
    }
}

#[test]
fn dataset_file_round_trip() {
    let ds = example_dataset(3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("example.k2ts");
    ds.save(&path).unwrap();
    let loaded = Dataset::load(&path).unwrap();
    assert_eq!(ds.to_bytes(), loaded.to_bytes());
    assert_eq!(std::fs::read(&path).unwrap(), ds.to_bytes());
}

#[test]
fn rejects_damaged_files() {
    let bytes = example_dataset(2).to_bytes();
    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(Dataset::read_from(&mut bad_magic.as_slice()), Err(FormatError::BadMagic { .. })));
    let mut bad_version = bytes.clone();
    bad_version[4] = 9;
    assert!(matches!(
        Dataset::read_from(&mut bad_version.as_slice()),
        Err(FormatError::UnsupportedVersion(9))
    ));
    for cut in [3, 10, bytes.len() / 2, bytes.len() - 1] {
        assert!(Dataset::read_from(&mut &bytes[..cut]).is_err(), "cut at {cut}");
    }
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(Dataset::read_from(&mut trailing.as_slice()).is_err());
}
