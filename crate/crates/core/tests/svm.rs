use melaseg::dataset::{Class, LabelTable};
use melaseg::features_assembly::{FeatureVector, FEATURE_COUNT};
use melaseg::svm::{
    load_model, model_from_json, model_to_json, save_model, score, train_binary, train_binary_with, train_ova,
    Kernel, Standardizer, SvmParams, TrainingSet,
};
use melaseg::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

fn k(x: &[f64], z: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
    (1.0 + dot).powi(2)
}

fn q_matrix(data: &TrainingSet) -> Vec<Vec<f64>> {
    let l = data.len();
    (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    data.labels[i] as f64 * data.labels[j] as f64 * k(&data.vectors[i], &data.vectors[j])
                })
                .collect()
        })
        .collect()
}

fn dual_objective(q: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let mut quad = 0.0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            quad += alpha[i] * alpha[j] * q[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto {0 ≤ α ≤ C, Σ y_i α_i = 0}: the minimizer is
/// clamp(v − λy) for the λ that restores the equality, found by bisection.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> { v.iter().zip(y).map(|(a, yi)| (a - lam * yi).clamp(0.0, c)).collect() };
    let balance = |lam: f64| -> f64 { at(lam).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let bound = v.iter().map(|a| a.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Dense dual QP by accelerated projected gradient ascent.
fn qp_oracle(data: &TrainingSet, c: f64) -> (Vec<f64>, f64) {
    let q = q_matrix(data);
    let y: Vec<f64> = data.labels.iter().map(|&v| v as f64).collect();
    let l = data.len();
    let lipschitz = q.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let mut alpha = vec![0.0; l];
    let mut momentum = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..8_000 {
        let grad: Vec<f64> = (0..l)
            .map(|i| 1.0 - (0..l).map(|j| q[i][j] * momentum[j]).sum::<f64>())
            .collect();
        let moved: Vec<f64> = momentum.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
        let next = project(&moved, &y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        momentum = next
            .iter()
            .zip(&alpha)
            .map(|(n, a)| n + (t - 1.0) / t_next * (n - a))
            .collect();
        alpha = next;
        t = t_next;
    }
    let obj = dual_objective(&q, &alpha);
    (alpha, obj)
}

/// Largest violation of the first-order optimality conditions.
fn kkt_violation(data: &TrainingSet, alpha: &[f64], c: f64) -> f64 {
    let q = q_matrix(data);
    let l = data.len();
    let (mut up, mut low) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 0..l {
        let y = data.labels[t] as f64;
        let g = (0..l).map(|j| q[t][j] * alpha[j]).sum::<f64>() - 1.0;
        let v = -y * g;
        let in_up = if y > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
        let in_low = if y > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
        if in_up {
            up = up.max(v);
        }
        if in_low {
            low = low.min(v);
        }
    }
    (up - low).max(0.0)
}

fn random_set(seed: u64, n: usize) -> TrainingSet {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    loop {
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)])
            .collect();
        let labels: Vec<i8> = vectors
            .iter()
            .map(|v| {
                let noisy = v[0] * v[1] + 0.3 * rng.random_range(-1.0..1.0);
                if noisy > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        if let Ok(set) = TrainingSet::new(vectors, labels) {
            return set;
        }
    }
}

#[test]
fn xor_is_separated() {
    let data = TrainingSet::new(
        vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![-1, -1, 1, 1],
    )
    .unwrap();
    let model = train_binary(&data, 10.0).unwrap();
    for (x, &y) in data.vectors.iter().zip(&data.labels) {
        assert_eq!(model.decision(x) > 0.0, y > 0, "{x:?}");
    }
    let report = train_binary_with(&data, &SvmParams::with_c(10.0)).unwrap();
    let (_, oracle) = qp_oracle(&data, 10.0);
    assert!((report.objective - oracle).abs() < 1e-4);
}

#[test]
fn overlapping_classes_with_small_c_hit_the_bound() {
    let data = TrainingSet::new(
        vec![vec![-1.0], vec![-0.5], vec![0.2], vec![0.0], vec![0.4], vec![1.0], vec![-0.1]],
        vec![-1, -1, -1, 1, 1, 1, 1],
    )
    .unwrap();
    let c = 0.1;
    let r = train_binary_with(&data, &SvmParams::with_c(c)).unwrap();
    assert!(r.alphas.contains(&c));
    let (oracle_alpha, oracle_obj) = qp_oracle(&data, c);
    assert!(oracle_alpha.iter().any(|&a| (a - c).abs() < 1e-6));
    assert!((r.objective - oracle_obj).abs() < 1e-4);
}

#[test]
fn free_support_vectors_sit_on_the_margin() {
    let data = random_set(17, 30);
    let r = train_binary_with(&data, &SvmParams::with_c(5.0)).unwrap();
    for (x, (&a, &y)) in data.vectors.iter().zip(r.alphas.iter().zip(&data.labels)) {
        if a > 1e-8 && a < 5.0 {
            let f = r.model.decision(x);
            assert!((f - y as f64).abs() <= 1e-3, "f = {f}, y = {y}");
        }
    }
}

#[test]
fn duplicating_a_separable_set_keeps_the_decision_function() {
    // separable with margin, so no multiplier reaches C and doubling the
    // data (which doubles the effective C) changes nothing
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..12 {
        let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let side = if a + b > 0.0 { 1 } else { -1 };
        vectors.push(vec![a + 0.6 * side as f64, b + 0.6 * side as f64]);
        labels.push(side);
    }
    let data = TrainingSet::new(vectors.clone(), labels.clone()).unwrap();
    let doubled = TrainingSet::new(
        vectors.iter().chain(&vectors).cloned().collect(),
        labels.iter().chain(&labels).copied().collect(),
    )
    .unwrap();
    let params = SvmParams {
        tolerance: 1e-8,
        ..SvmParams::with_c(100.0)
    };
    let a = train_binary_with(&data, &params).unwrap();
    let b = train_binary_with(&doubled, &params).unwrap();
    assert!(a.alphas.iter().all(|&v| v < 100.0));
    for _ in 0..100 {
        let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let (fa, fb) = (a.model.decision(&p), b.model.decision(&p));
        assert!((fa - fb).abs() < 1e-6, "{fa} vs {fb}");
    }
}

#[test]
fn row_order_does_not_matter() {
    let data = random_set(3, 40);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let shuffled = TrainingSet::new(
        order.iter().map(|&i| data.vectors[i].clone()).collect(),
        order.iter().map(|&i| data.labels[i]).collect(),
    )
    .unwrap();
    let a = train_binary(&data, 1.0).unwrap();
    let b = train_binary(&shuffled, 1.0).unwrap();
    let mut sa = a.support_vectors.clone();
    let mut sb = b.support_vectors.clone();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    assert_eq!(sa, sb);
    for x in &data.vectors {
        assert!((a.decision(x) - b.decision(x)).abs() < 1e-6);
    }
}

fn cluster_features(per_class: usize, seed: u64) -> (Vec<FeatureVector>, LabelTable) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut features = Vec::new();
    let mut labels = LabelTable::new();
    for (c, class) in Class::ALL.into_iter().enumerate() {
        for i in 0..per_class {
            let id = format!("{}_{i:02}", class.as_str());
            let mut values = [0.0; FEATURE_COUNT];
            for (d, v) in values.iter_mut().enumerate() {
                // centers 12σ apart along three different axes
                let center = if d % 3 == c { 12.0 } else { 0.0 };
                *v = center + noise.sample(&mut rng) + 100.0 * d as f64;
            }
            features.push(FeatureVector {
                image_id: id.clone(),
                values,
            });
            labels.insert(id, class).unwrap();
        }
    }
    (features, labels)
}

#[test]
fn one_vs_all_separates_gaussian_clusters() {
    let (features, labels) = cluster_features(20, 1);
    let model = train_ova(&features, &labels, &SvmParams::default()).unwrap();
    let (mut mel_ok, mut sk_ok, mut class_ok) = (0, 0, 0);
    for fv in &features {
        let truth = labels.get(&fv.image_id).unwrap();
        let p = model.predict(&fv.values).unwrap();
        mel_ok += ((p.melanoma_decision > 0.0) == (truth == Class::Melanoma)) as usize;
        sk_ok += ((p.sk_decision > 0.0) == (truth == Class::SeborrheicKeratosis)) as usize;
        class_ok += (p.class == truth) as usize;
    }
    assert!(mel_ok as f64 / 60.0 >= 0.95, "{mel_ok}");
    assert!(sk_ok as f64 / 60.0 >= 0.95, "{sk_ok}");
    assert!(class_ok as f64 / 60.0 >= 0.95, "{class_ok}");
}

#[test]
fn one_vs_all_needs_every_class() {
    let (features, _) = cluster_features(5, 2);
    let mut all_nevus = LabelTable::new();
    for fv in &features {
        all_nevus.insert(fv.image_id.clone(), Class::Nevus).unwrap();
    }
    assert!(matches!(
        train_ova(&features, &all_nevus, &SvmParams::default()),
        Err(Error::MissingClass(_))
    ));
}

#[test]
fn model_file_round_trip_and_validation() {
    let (features, labels) = cluster_features(6, 3);
    let model = train_ova(&features, &labels, &SvmParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, model);
    for fv in &features {
        let (a, b) = (model.predict(&fv.values).unwrap(), back.predict(&fv.values).unwrap());
        assert_eq!(a.melanoma_decision, b.melanoma_decision);
        assert_eq!(a.sk_decision, b.sk_decision);
    }

    let text = model_to_json(&model).unwrap();
    assert!(text.contains("\"schema_version\": \"melaseg-svm-1\""));
    // every number carries 17 significant digits
    let bias = format!("{:.16e}", model.melanoma_vs_rest.bias);
    assert!(text.contains(&bias));

    let wrong = text.replace("melaseg-svm-1", "melaseg-svm-0");
    assert!(matches!(model_from_json(&wrong), Err(Error::Model(_))));
    assert!(model_from_json(&text[..text.len() / 2]).is_err());

    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["melanoma_vs_rest"]["coefficients"][0] = serde_json::json!(1.0e6);
    assert!(matches!(model_from_json(&json.to_string()), Err(Error::Model(_))));
}

#[test]
fn two_point_model_survives_a_round_trip() {
    let data = TrainingSet::new(vec![vec![-1.0], vec![1.0]], vec![-1, 1]).unwrap();
    let m = train_binary(&data, 10.0).unwrap();
    let ova = melaseg::svm::OvaSvmModel {
        melanoma_vs_rest: m.clone(),
        sk_vs_rest: m.clone(),
        standardizer: Standardizer {
            means: vec![0.0],
            stds: vec![1.0],
        },
        feature_order: vec!["x".into()],
    };
    let back = model_from_json(&model_to_json(&ova).unwrap()).unwrap();
    assert_eq!(back.melanoma_vs_rest.decision(&[1.0]), m.decision(&[1.0]));
    assert_eq!(back.melanoma_vs_rest.decision(&[-1.0]), m.decision(&[-1.0]));
    assert_eq!(back.melanoma_vs_rest.kernel, Kernel::default());
}

#[test]
fn standardized_training_matrix_has_unit_moments() {
    let (features, _) = cluster_features(7, 4);
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.values.to_vec()).collect();
    let s = Standardizer::fit(&rows).unwrap();
    let z: Vec<Vec<f64>> = rows.iter().map(|r| s.apply(r)).collect();
    let n = z.len() as f64;
    for c in 0..FEATURE_COUNT {
        let mean = z.iter().map(|r| r[c]).sum::<f64>() / n;
        let var = z.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn smo_matches_the_dense_qp_oracle(seed in any::<u64>(), n in 4usize..=12, c in 0.05f64..5.0) {
        let data = random_set(seed, n);
        let r = train_binary_with(&data, &SvmParams::with_c(c)).unwrap();
        let (_, oracle) = qp_oracle(&data, c);
        prop_assert!((r.objective - oracle).abs() < 1e-4, "smo {} oracle {}", r.objective, oracle);

        let q = q_matrix(&data);
        prop_assert!((dual_objective(&q, &r.alphas) - r.objective).abs() < 1e-9);
        let balance: f64 = r.alphas.iter().zip(&data.labels).map(|(a, &y)| a * y as f64).sum();
        prop_assert!(balance.abs() <= 1e-6);
        for &a in &r.alphas {
            prop_assert!((0.0..=c).contains(&a));
        }
        prop_assert!(kkt_violation(&data, &r.alphas, c) <= 2e-3);
    }

    #[test]
    fn score_preserves_order(a in -40.0f64..40.0, b in -40.0f64..40.0) {
        if a < b {
            prop_assert!(score(a) <= score(b));
        }
        // strictly inside (0, 1) wherever f64 can represent it
        let s = score(a);
        prop_assert!((0.0..=1.0).contains(&s));
        if a.abs() < 36.0 {
            prop_assert!(s > 0.0 && s < 1.0);
        }
    }
}
