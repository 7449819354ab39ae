use nbse::eval::{
    accuracy, retention_sweep, stratified_split, train_linear_classifier, ClassifierParams,
    LabeledDataset, Method, SweepConfig,
};
use nbse::oracles::{make_synthetic, SyntheticSpec};
use nbse::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn loss_never_increases() {
    let s = make_synthetic(&SyntheticSpec::sbm_blobs(90, 5, 1.5, 2)).unwrap();
    let model = train_linear_classifier(&s.data, &ClassifierParams::default()).unwrap();
    assert!(model.loss_history.len() >= 2);
    assert!(model.loss_history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn independent_labels_sit_at_chance() {
    let mut total = 0.0;
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, d) = (400, 5);
        let x = DataMatrix::new(m, d, (0..m * d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let y: Vec<usize> = (0..m).map(|i| i % 2).collect();
        let data = LabeledDataset::new(x, y, 2).unwrap();
        let (train, test) = stratified_split(&data.y, 2, 0.2, seed).unwrap();
        let model = train_linear_classifier(&data.subset(&train).unwrap(), &ClassifierParams::default()).unwrap();
        let held = data.subset(&test).unwrap();
        total += accuracy(&model.predict(&held.x).unwrap(), &held.y);
    }
    let mean = total / 5.0;
    assert!((mean - 0.5).abs() <= 0.1, "mean held-out accuracy {mean}");
}

#[test]
fn selectors_coincide_at_full_retention_and_sweeps_repeat() {
    let s = make_synthetic(&SyntheticSpec::redundant_groups(80, 3, 3, 1)).unwrap();
    let d = s.data.x.cols();
    let cfg = SweepConfig {
        proportions: vec![1.0, 0.5],
        seeds: vec![0, 1, 2],
        phi: Some((0..d).map(|l| l as f64).collect()),
        ..SweepConfig::default()
    };
    let a = retention_sweep(&s.data, &cfg).unwrap();
    for seed in [0, 1, 2] {
        let accs: Vec<f64> = [Method::Nbse, Method::Anova, Method::Random]
            .iter()
            .map(|&m| {
                a.records
                    .iter()
                    .find(|r| r.method == m && r.p == 1.0 && r.seed == seed)
                    .unwrap()
                    .accuracy
            })
            .collect();
        assert!(accs.iter().all(|&v| v == accs[0]), "seed {seed}: {accs:?}");
    }
    assert!(a.points.iter().all(|c| (0.0..=1.0).contains(&c.mean) && c.std >= 0.0));
    assert_eq!(retention_sweep(&s.data, &cfg).unwrap(), a);
}
