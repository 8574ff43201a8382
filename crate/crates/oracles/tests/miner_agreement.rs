use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulelist::mca::{self, McaOptions, ScoreTable};
use rulelist_oracles::agreement::{
    check_apriori, check_miner, random_dataset, random_miner_config, random_scores,
};

#[test]
fn pruned_search_matches_enumeration_on_tied_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..300 {
        let n = rng.random_range(6..=40);
        let labels = rng.random_range(2..=3);
        let ds = random_dataset(&mut rng, n, 18, labels);
        let scores = random_scores(&mut rng, &ds);
        let config = random_miner_config(&mut rng);
        if let Err(e) = check_miner(&ds, &scores, &config) {
            panic!("case {case} {config:?}: {e}");
        }
    }
}

#[test]
fn pruned_search_matches_enumeration_on_mca_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for case in 0..100 {
        let ds = random_dataset(&mut rng, 30, 16, 2);
        let model = mca::fit_dataset(&ds, &McaOptions::default()).unwrap();
        let scores = ScoreTable::new(&model, &ds);
        let mut config = random_miner_config(&mut rng);
        config.mu_min = [0.0, 0.1, 0.2, 0.3][rng.random_range(0..4)];
        if let Err(e) = check_miner(&ds, &scores, &config) {
            panic!("case {case} {config:?}: {e}");
        }
    }
}

#[test]
fn apriori_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..100 {
        let (n, labels) = (rng.random_range(6..=40), rng.random_range(2..=3));
        let ds = random_dataset(&mut rng, n, 16, labels);
        let config = random_miner_config(&mut rng);
        if let Err(e) = check_apriori(&ds, &config) {
            panic!("case {case} {config:?}: {e}");
        }
    }
}
