//! Runs the fuzz-target properties on stable: every checked-in corpus seed,
//! plus random byte-level mutations of those seeds.

use std::path::PathBuf;

use antijam::harness::{parse_metrics, write_metrics, ExperimentConfig, Pgm};
use antijam::qnet::QNetworkParams;
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds for {target}");
    files.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

fn checkpoint_decode(data: &[u8]) {
    if let Ok(params) = QNetworkParams::from_bytes(data) {
        assert_eq!(params.to_bytes(), data);
    }
}

fn config_parse(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_toml(text) {
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }
}

fn metrics_csv_parse(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_metrics(text) {
        let mut out = Vec::new();
        write_metrics(&rows, &mut out).unwrap();
        assert_eq!(
            parse_metrics(std::str::from_utf8(&out).unwrap())
                .unwrap()
                .len(),
            rows.len()
        );
    }
}

fn pgm_decode(data: &[u8]) {
    if let Ok(img) = Pgm::from_bytes(data) {
        assert_eq!(img.pixels.len(), img.width * img.height);
        assert_eq!(Pgm::from_bytes(&img.to_bytes()).unwrap(), img);
    }
}

type Target = fn(&[u8]);
const TARGETS: [(&str, Target); 4] = [
    ("checkpoint_decode", checkpoint_decode),
    ("config_parse", config_parse),
    ("metrics_csv_parse", metrics_csv_parse),
    ("pgm_decode", pgm_decode),
];

#[test]
fn seeds_hold_the_target_properties() {
    for (name, target) in TARGETS {
        for s in seeds(name) {
            target(&s);
        }
    }
}

#[test]
fn valid_seeds_decode() {
    assert!(QNetworkParams::from_bytes(&seeds("checkpoint_decode")[0]).is_ok());
    assert!(
        ExperimentConfig::from_toml(std::str::from_utf8(&seeds("config_parse")[1]).unwrap())
            .is_ok()
    );
    assert_eq!(
        parse_metrics(std::str::from_utf8(&seeds("metrics_csv_parse")[1]).unwrap())
            .unwrap()
            .len(),
        3
    );
    assert!(seeds("pgm_decode")
        .iter()
        .all(|s| Pgm::from_bytes(s).is_ok()));
}

#[derive(Debug, Clone)]
enum Mutation {
    Flip(usize, u8),
    Truncate(usize),
    Insert(usize, u8),
    Remove(usize),
}

fn mutate(mut data: Vec<u8>, ms: &[Mutation]) -> Vec<u8> {
    for m in ms {
        let n = data.len().max(1);
        match *m {
            Mutation::Flip(i, x) => {
                if let Some(b) = data.get_mut(i % n) {
                    *b ^= x;
                }
            }
            Mutation::Truncate(i) => data.truncate(i % n),
            Mutation::Insert(i, x) => data.insert(i % (data.len() + 1), x),
            Mutation::Remove(i) => {
                if !data.is_empty() {
                    data.remove(i % n);
                }
            }
        }
    }
    data
}

fn mutation() -> impl Strategy<Value = Mutation> {
    prop_oneof![
        (any::<usize>(), 1u8..).prop_map(|(i, x)| Mutation::Flip(i, x)),
        any::<usize>().prop_map(Mutation::Truncate),
        (any::<usize>(), any::<u8>()).prop_map(|(i, x)| Mutation::Insert(i, x)),
        any::<usize>().prop_map(Mutation::Remove),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn mutated_seeds_hold_the_target_properties(
        which in 0usize..4,
        pick in any::<usize>(),
        ms in proptest::collection::vec(mutation(), 1..6),
    ) {
        let (name, target) = TARGETS[which];
        let all = seeds(name);
        target(&mutate(all[pick % all.len()].clone(), &ms));
    }
}
