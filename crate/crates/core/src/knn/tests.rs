use super::*;
use crate::data::{sample_student_mixture, student_log_density};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn one_d(xs: &[f64], signs: &[i64]) -> LabeledDataset {
    let labels = signs.iter().map(|&s| Label::from_i64(s).unwrap()).collect();
    LabeledDataset::from_flat(1, xs.to_vec(), labels).unwrap()
}

#[test]
fn radius_examples() {
    let pts = [0.0, 1.0, 2.0, 5.0];
    assert_eq!(knn_radius(&pts, 1, &[0.0], 2).unwrap(), 1.0);
    assert_eq!(knn_radius(&pts, 1, &[0.0], 4).unwrap(), 5.0);
    assert_eq!(knn_radius(&pts, 1, &[2.0], 1).unwrap(), 0.0);
    assert!(matches!(
        knn_radius(&pts, 1, &[0.0], 0),
        Err(Error::InvalidK { k: 0, n: 4 })
    ));
    assert!(matches!(
        knn_radius(&pts, 1, &[0.0], 5),
        Err(Error::InvalidK { k: 5, n: 4 })
    ));
}

#[test]
fn model_validation() {
    let d = one_d(&[0.0, 1.0], &[1, 1]);
    assert!(matches!(KnnModel::new(d, 1), Err(Error::DegenerateClass { .. })));
    let d = one_d(&[0.0, 1.0], &[1, -1]);
    assert!(matches!(KnnModel::new(d.clone(), 3), Err(Error::InvalidK { .. })));
    assert_eq!(KnnModel::new(d, 2).unwrap().p_hat(), 0.5);
}

#[test]
fn eta_examples() {
    let model = KnnModel::new(one_d(&[0.0, 1.0, 2.0], &[1, -1, 1]), 2).unwrap();
    assert_eq!(model.eta(&[0.0]), 0.5);
    assert_eq!(model.radius(&[0.0]), 1.0);

    // A single-class training set cannot form a model, so the all-positive and
    // all-negative cases are read off neighborhoods that contain one class only.
    let model = KnnModel::new(one_d(&[0.0, 0.1, 0.2, 10.0, 10.1], &[1, 1, 1, -1, -1]), 3).unwrap();
    assert_eq!(model.eta(&[0.05]), 1.0);
    let model = KnnModel::new(one_d(&[0.0, 0.1, 0.2, 10.0, 10.1], &[-1, -1, -1, 1, 1]), 3).unwrap();
    assert_eq!(model.eta(&[0.05]), 0.0);
}

#[test]
fn ties_are_broken_by_index() {
    // Points at -1 and +1 are equidistant from 0; index 0 wins.
    let model = KnnModel::new(one_d(&[-1.0, 1.0, 3.0], &[1, -1, -1]), 1).unwrap();
    assert_eq!(model.neighbors(&[0.0])[0].index, 0);
    assert_eq!(model.eta(&[0.0]), 1.0);
    let model = KnnModel::new(one_d(&[1.0, -1.0, 3.0], &[-1, 1, -1]), 1).unwrap();
    assert_eq!(model.eta(&[0.0]), 0.0);
}

#[test]
fn classify_examples() {
    let model = KnnModel::new(one_d(&[0.0, 1.0, 2.0, 3.0], &[1, -1, 1, -1]), 2).unwrap();
    assert_eq!(model.p_hat(), 0.5);
    // η̂ = p̂ exactly maps to +1.
    assert_eq!(model.eta(&[0.4]), 0.5);
    assert_eq!(model.classify(&[0.4]), Label::Positive);

    let model = KnnModel::new(one_d(&[0.0, 0.1, 5.0, 5.1, 5.2], &[1, 1, -1, -1, -1]), 2).unwrap();
    assert_eq!(model.classify(&[0.05]), Label::Positive);
    assert_eq!(model.classify(&[5.1]), Label::Negative);
}

#[test]
fn bayes_rule_examples() {
    let half = BayesOracle::new(|_: &[f64]| 0.5, 0.5).unwrap();
    assert_eq!(bayes_balanced_classify(&half, &[0.0]), Label::Positive);
    let low = BayesOracle::new(|_: &[f64]| 0.01, 0.02).unwrap();
    assert_eq!(bayes_balanced_classify(&low, &[0.0]), Label::Negative);
    let high = BayesOracle::new(|_: &[f64]| 0.03, 0.02).unwrap();
    assert_eq!(bayes_balanced_classify(&high, &[0.0]), Label::Positive);
    assert!(BayesOracle::new(|_: &[f64]| 0.5, 1.0).is_err());
}

#[test]
fn radius_is_monotone_in_k() {
    let mix = StudentMixtureParams::reference(0.3).unwrap();
    let data = sample_student_mixture(&mix, 300, 1);
    let mut rng = substream(2, &[]);
    for _ in 0..50 {
        let q = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let radii: Vec<f64> = (1..=300)
            .map(|k| knn_radius(data.features(), 2, &q, k).unwrap())
            .collect();
        assert!(radii.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn tree_and_brute_force_agree_on_mixture() {
    let mix = StudentMixtureParams::reference(0.1).unwrap();
    let data = sample_student_mixture(&mix, 3000, 8);
    let tree = KnnModel::with_search(data.clone(), 25, NeighborSearch::KdTree).unwrap();
    let brute = KnnModel::with_search(data, 25, NeighborSearch::BruteForce).unwrap();
    let mut rng = substream(3, &[]);
    for _ in 0..500 {
        let q = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        assert_eq!(tree.neighbors(&q), brute.neighbors(&q));
        assert_eq!(tree.radius(&q).to_bits(), brute.radius(&q).to_bits());
    }
}

#[test]
fn classification_is_permutation_invariant() {
    let mix = StudentMixtureParams::reference(0.2).unwrap();
    let data = sample_student_mixture(&mix, 1000, 4);
    let mut perm: Vec<usize> = (0..data.len()).collect();
    perm.shuffle(&mut substream(5, &[]));
    let shuffled = data.select(&perm);
    let a = KnnModel::new(data, 15).unwrap();
    let b = KnnModel::new(shuffled, 15).unwrap();
    let mut rng = substream(6, &[]);
    let queries: Vec<f64> = (0..400).map(|_| rng.gen_range(-4.0..4.0)).collect();
    assert_eq!(a.classify_batch(&queries), b.classify_batch(&queries));
}

#[test]
fn identity_vanishes_for_bayes_rule() {
    let mix = StudentMixtureParams::reference(0.05).unwrap();
    let oracle = BayesOracle::new(mix.clone(), 0.05).unwrap();
    let est = excess_am_risk_identity(&oracle, |x| bayes_balanced_classify(&oracle, x), &mix, 20_000, 1).unwrap();
    assert_eq!(est.mean, 0.0);
    assert_eq!(est.std_err, 0.0);
}

#[test]
fn identity_rejects_mismatched_prior() {
    let mix = StudentMixtureParams::reference(0.05).unwrap();
    let oracle = BayesOracle::new(mix.clone(), 0.1).unwrap();
    assert!(excess_am_risk_identity(&oracle, |_| Label::Positive, &mix, 10, 1).is_err());
}

/// `½ ∫ 1{η < p} |η − p| f / (p(1−p)) dx` on a midpoint grid over `[−L, L]²`.
fn grid_identity_for_constant_positive(mix: &StudentMixtureParams, half_width: f64, h: f64) -> f64 {
    let p = mix.p();
    let steps = (2.0 * half_width / h) as usize;
    let mut total = 0.0;
    for i in 0..steps {
        let x = -half_width + (i as f64 + 0.5) * h;
        let mut row = 0.0;
        for j in 0..steps {
            let y = -half_width + (j as f64 + 0.5) * h;
            let pt = [x, y];
            let fp = student_log_density(mix, Label::Positive, &pt).exp();
            let fn_ = student_log_density(mix, Label::Negative, &pt).exp();
            let f = p * fp + (1.0 - p) * fn_;
            let eta = p * fp / f;
            if eta < p {
                row += (p - eta) * f;
            }
        }
        total += row;
    }
    0.5 * total * h * h / (p * (1.0 - p))
}

#[test]
fn identity_matches_grid_integration_for_constant_classifier() {
    let mix = StudentMixtureParams::reference(0.05).unwrap();
    let oracle = BayesOracle::new(mix.clone(), 0.05).unwrap();
    let grid = grid_identity_for_constant_positive(&mix, 30.0, 0.02);
    let est = excess_am_risk_identity(&oracle, |_| Label::Positive, &mix, 400_000, 7).unwrap();
    assert!(grid > 0.05, "{grid}");
    assert!(
        (est.mean - grid).abs() < 3.0 * est.std_err + 1e-3,
        "{est:?} vs grid {grid}"
    );
}

#[test]
fn identity_and_direct_difference_agree() {
    let mix = StudentMixtureParams::reference(0.05).unwrap();
    let oracle = BayesOracle::new(mix.clone(), 0.05).unwrap();
    let clf = |x: &[f64]| {
        if x[0] + x[1] > 1.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    };
    let a = excess_am_risk_identity(&oracle, clf, &mix, 200_000, 1).unwrap();
    let b = direct_excess_am_risk(&oracle, clf, &mix, 200_000, 2).unwrap();
    let combined = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!(a.mean > 0.0 && b.mean > 0.0);
    assert!((a.mean - b.mean).abs() < 3.0 * combined, "{a:?} vs {b:?}");
}

proptest! {
    #[test]
    fn eta_stays_in_unit_interval(seed in 0u64..500, k in 1usize..40, x in -5.0f64..5.0) {
        let mut rng = substream(seed, &[]);
        // Integer coordinates make boundary ties common.
        let xs: Vec<f64> = (0..40).map(|_| rng.gen_range(-4..=4) as f64).collect();
        let mut signs: Vec<i64> = (0..40).map(|_| if rng.gen_bool(0.3) { 1 } else { -1 }).collect();
        signs[0] = 1;
        signs[1] = -1;
        let model = KnnModel::new(one_d(&xs, &signs), k).unwrap();
        let e = model.eta(&[x.round()]);
        prop_assert!((0.0..=1.0).contains(&e));
        prop_assert_eq!(model.neighbors(&[x.round()]).len(), k);
    }
}
