use neurolos_core::classic::{
    BoostConfig, Classifier, ForestConfig, Growth, KnnConfig, Learner, ModelKind, ModelSpec, Params, SvmConfig,
};
use neurolos_core::eval::{default_space, random_search, Halving};
use neurolos_core::features::{group_split, smote_oversample, split_indices, stratified_folds, Dataset, SplitSpec};
use neurolos_core::seq::{Encoder, EncoderConfig, Lstm, LstmConfig, SequenceNet};
use neurolos_core::synthgen::planted_tabular;
use neurolos_core::{Executor, Matrix, Sequential};
use proptest::prelude::*;

/// Runs units last to first, then restores index order.
struct Backwards;

impl Executor for Backwards {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let mut out: Vec<T> = (0..n).rev().map(f).collect();
        out.reverse();
        out
    }
}

fn labels() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..3, 30..150)
}

fn rows(n: usize, d: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-5.0f64..5.0, n * d).prop_map(move |v| Matrix::from_vec(n, d, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stratified_split_is_a_partition_with_class_shares(y in labels(), seed in any::<u64>(), frac in 0.1f64..0.5) {
        let spec = SplitSpec { test_fraction: frac, seed, stratify: true };
        let (train, test) = split_indices(&y, 3, &vec![true; y.len()], &spec).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
        for c in 0..3 {
            let n = y.iter().filter(|&&v| v == c).count() as f64;
            let t = test.iter().filter(|&&i| y[i] == c).count() as f64;
            prop_assert!((t - n * frac).abs() <= 1.0, "class {} has {} of {} in test", c, t, n);
        }
    }

    #[test]
    fn folds_are_stratified(y in labels(), seed in any::<u64>(), k in 2usize..6) {
        let fold = stratified_folds(&y, 3, k, seed).unwrap();
        for c in 0..3 {
            let sizes: Vec<usize> = (0..k).map(|f| (0..y.len()).filter(|&i| y[i] == c && fold[i] == f).count()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{:?}", sizes);
        }
    }

    #[test]
    fn group_split_never_divides_a_group(groups in prop::collection::vec(0i64..25, 20..120), seed in any::<u64>()) {
        prop_assume!(groups.iter().collect::<std::collections::BTreeSet<_>>().len() >= 2);
        let (a, b) = group_split(&groups, 0.3, seed).unwrap();
        prop_assert_eq!(a.len() + b.len(), groups.len());
        for &i in &a {
            prop_assert!(b.iter().all(|&j| groups[j] != groups[i]));
        }
    }

    #[test]
    fn smote_stays_between_parents(x in rows(60, 3), seed in any::<u64>(), k in 1usize..6) {
        let y: Vec<usize> = (0..60).map(|i| if i < 36 { 0 } else if i < 50 { 1 } else { 2 }).collect();
        let ds = Dataset::new(x, vec!["a".into(), "b".into(), "c".into()], y, 3).unwrap();
        let out = smote_oversample(&ds, k, seed).unwrap();
        prop_assert_eq!(out.dataset.class_counts(), vec![36, 36, 36]);
        for (s, o) in out.origins.iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&o.lambda));
            let row = out.dataset.x.row(60 + s);
            for (j, &v) in row.iter().enumerate() {
                let (a, b) = (ds.x.get(o.base, j), ds.x.get(o.neighbor, j));
                prop_assert!(v >= a.min(b) && v <= a.max(b));
            }
        }
    }

    #[test]
    fn knn_is_invariant_to_uniform_scaling(x in rows(30, 2), q in rows(10, 2), scale in 0.01f64..100.0) {
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let scaled = |m: &Matrix| Matrix::from_vec(m.rows(), m.cols(), m.as_slice().iter().map(|v| v * scale).collect()).unwrap();
        let cfg = KnnConfig { k: 4, ..KnnConfig::default() };
        let a = cfg.fit(&x, &y, 3, 0).unwrap().predict(&q);
        let b = cfg.fit(&scaled(&x), &y, 3, 0).unwrap().predict(&scaled(&q));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sequence_probabilities_sum_to_one(x in rows(6, 3), seed in 0u64..1000) {
        let lstm = Lstm::new(LstmConfig { hidden: 5, ..LstmConfig::default() }, 3, 3, seed).unwrap();
        let enc = Encoder::new(EncoderConfig { d_model: 8, n_heads: 2, n_blocks: 1, ffn_dim: 8, ..EncoderConfig::default() }, 3, 3, seed).unwrap();
        for p in [lstm.probabilities(&x).unwrap(), enc.probabilities(&x).unwrap()] {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}

#[test]
fn fitted_models_do_not_depend_on_unit_order() {
    let ds = planted_tabular(200, 5, 2, 0.4, 1).unwrap();
    let forest = ForestConfig {
        n_estimators: 12,
        ..ForestConfig::default()
    };
    assert_eq!(
        forest.fit_with(&ds.x, &ds.y, 3, 4, &Sequential).unwrap(),
        forest.fit_with(&ds.x, &ds.y, 3, 4, &Backwards).unwrap()
    );
    for growth in [Growth::Depthwise, Growth::Oblivious] {
        let boost = BoostConfig {
            n_rounds: 10,
            subsample: 0.8,
            colsample_bytree: 0.6,
            bagging_temperature: 0.5,
            random_strength: 1.0,
            growth,
            ..BoostConfig::default()
        };
        assert_eq!(
            boost.fit_with(&ds.x, &ds.y, 3, 4, &Sequential).unwrap(),
            boost.fit_with(&ds.x, &ds.y, 3, 4, &Backwards).unwrap()
        );
    }
    let svm = SvmConfig::default();
    assert_eq!(
        svm.fit_with(&ds.x, &ds.y, 3, 4, &Sequential).unwrap(),
        svm.fit_with(&ds.x, &ds.y, 3, 4, &Backwards).unwrap()
    );
}

#[test]
fn search_is_reproducible_and_stays_in_its_space() {
    let ds = planted_tabular(150, 4, 2, 0.3, 2).unwrap();
    let space = default_space(ModelKind::Knn);
    let objective = |p: &Params, fraction: f64| {
        let n = ((ds.len() as f64 * fraction) as usize).max(30);
        let spec = ModelSpec::from_params(ModelKind::Knn, p)?;
        let m = spec.fit(&ds.x, &ds.y, 3, 0)?;
        let hits = (0..n).filter(|&i| m.predict_row(ds.x.row(i)) == ds.y[i]).count();
        Ok(hits as f64 / n as f64)
    };
    let halving = Some(Halving { rungs: 2, reduction: 2 });
    let a = random_search(&space, objective, 10, 9, halving, &Sequential).unwrap();
    let b = random_search(&space, objective, 10, 9, halving, &Backwards).unwrap();
    assert_eq!(a, b);
    assert!(a.trials.iter().all(|t| space.contains(&t.params)));
    let best = a.best.value.unwrap();
    assert!(a.trials.iter().filter_map(|t| t.value).all(|v| v <= best));
}
