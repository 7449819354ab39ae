use nbse::nbse::{
    feature_axis_embedding, fingerprint, global_beta_n, FeatureParams, FingerprintMode,
    FingerprintParams,
};
use nbse::nishimori::{beta_n_per_feature, SearchParams};
use nbse::DataMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Every column is the same latent signal plus `noise`-sized jitter.
fn latent_plus_noise(m: usize, d: usize, noise: f64, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..m).map(|i| 3.0 * (i % 2) as f64 + gauss(&mut rng)).collect();
    let values = (0..m * d).map(|k| z[k / d] + noise * gauss(&mut rng)).collect();
    DataMatrix::new(m, d, values).unwrap()
}

fn permute_columns(x: &DataMatrix, perm: &[usize]) -> DataMatrix {
    x.select_columns(perm).unwrap()
}

#[test]
fn per_feature_roots_stay_near_the_global_root() {
    let x = latent_plus_noise(150, 8, 0.02, 1);
    let params = FingerprintParams::default();
    let global = global_beta_n(&x, &params).unwrap().beta_n;
    let roots = beta_n_per_feature(&x, &params.graph, &params.search);
    let worst = roots
        .iter()
        .map(|r| (r.beta_n().expect("slice has a root") - global).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.1 * global, "max |β_l − β_g| = {worst}, β_g = {global}");
}

#[test]
fn fingerprint_columns_are_unit_norm_with_sign_convention() {
    let x = latent_plus_noise(60, 4, 0.5, 2);
    for mode in [FingerprintMode::Global, FingerprintMode::PerFeature] {
        let fp = fingerprint(&x, mode, &FingerprintParams::default()).unwrap();
        assert_eq!(fp.n_features(), 4);
        for col in &fp.columns {
            let norm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
            let top = col.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            assert!(top > 0.0);
        }
    }
}

#[test]
fn permuting_features_permutes_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (m, d) = (50, 12);
    let x = DataMatrix::new(m, d, (0..m * d).map(|_| gauss(&mut rng)).collect()).unwrap();
    let perm = [5, 0, 11, 3, 7, 1, 9, 2, 10, 4, 8, 6];
    let y = permute_columns(&x, &perm);

    let params = FingerprintParams::default();
    let fx = fingerprint(&x, FingerprintMode::PerFeature, &params).unwrap();
    let fy = fingerprint(&y, FingerprintMode::PerFeature, &params).unwrap();
    for (k, &l) in perm.iter().enumerate() {
        assert_eq!(fy.columns[k], fx.columns[l]);
    }

    let fp = FeatureParams::default();
    let px = feature_axis_embedding(&x, &fp).unwrap().phi;
    let py = feature_axis_embedding(&y, &fp).unwrap().phi;
    for (k, &l) in perm.iter().enumerate() {
        assert!((py[k] - px[l]).abs() < 1e-9, "entry {k}: {} vs {}", py[k], px[l]);
    }
}

#[test]
fn planted_feature_groups_occupy_separate_phi_ranges() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = 80;
    let protos: Vec<Vec<f64>> = (0..3).map(|_| (0..m).map(|_| gauss(&mut rng)).collect()).collect();
    let mut columns = Vec::new();
    let mut group = Vec::new();
    for (g, p) in protos.iter().enumerate() {
        for _ in 0..5 {
            columns.push(p.iter().map(|v| v + 0.05 * gauss(&mut rng)).collect::<Vec<f64>>());
            group.push(g);
        }
    }
    let x = DataMatrix::from_columns(&columns).unwrap();
    // k = 6 exceeds the group size, so the feature graph is connected
    let phi = feature_axis_embedding(&x, &FeatureParams { k_feat: Some(6), ..FeatureParams::default() })
        .unwrap()
        .phi;
    let range = |g: usize| {
        let v: Vec<f64> = (0..phi.len()).filter(|&l| group[l] == g).map(|l| phi[l]).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let mut ranges: Vec<(f64, f64)> = (0..3).map(range).collect();
    ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let spread = ranges.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
    let gaps: Vec<f64> = ranges.windows(2).map(|w| w[1].0 - w[0].1).collect();
    assert!(gaps.iter().all(|&g| g > spread), "spread {spread}, gaps {gaps:?}");
}

#[test]
fn search_defaults_are_usable_for_feature_graphs() {
    let x = latent_plus_noise(40, 6, 1.0, 5);
    let e = feature_axis_embedding(&x, &FeatureParams::default()).unwrap();
    assert_eq!(e.phi.len(), 6);
    assert!(e.root.residual <= SearchParams::default().tol_lambda);
}
