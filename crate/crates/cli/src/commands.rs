use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use image::imageops::{self, FilterType};
use log::{info, warn};
use rayon::prelude::*;

use melaseg::color_features::GlcmParams;
use melaseg::dataset::{
    list_images, list_masks, load_image, load_labels, load_mask, load_submission, mask_file_name,
    save_mask, write_submission,
};
use melaseg::evaluation::{classification_metrics, evaluate_segmentation, write_report};
use melaseg::features_assembly::{
    extract_features_with, feature_names, read_features_csv, write_features_csv, FeatureParams,
    FeatureVector,
};
use melaseg::morphology::largest_component;
use melaseg::segmentation::{segment_with, SegmentParams, SeedSpec};
use melaseg::svm::{load_model, save_model, train_ova, OvaSvmModel, SvmParams};
use melaseg::texture_features::TextureParams;
use melaseg::{BinaryMask, LabelTable, RgbImage, SubmissionRow};

/// Folds used to pick C when several values are given.
const CV_FOLDS: usize = 5;

/// Logs every failure and reports whether all items succeeded.
fn report_failures(stage: &str, failures: &[(String, String)]) -> bool {
    for (id, msg) in failures {
        warn!("{stage}: skipped {id}: {msg}");
    }
    failures.is_empty()
}

fn nearest_resize(mask: &BinaryMask, width: usize, height: usize) -> Result<BinaryMask> {
    let (sw, sh) = (mask.width(), mask.height());
    Ok(BinaryMask::from_fn(width, height, |x, y| {
        mask.get(x * sw / width, y * sh / height)
    })?)
}

fn segment_one(
    img: &RgbImage,
    lesion_seed: Option<(f64, f64, f64)>,
    se_radius: usize,
    max_dim: Option<usize>,
) -> Result<BinaryMask> {
    let (w, h) = (img.width(), img.height());
    let longest = w.max(h);
    let scale = match max_dim {
        Some(m) if longest > m => m as f64 / longest as f64,
        _ => 1.0,
    };
    let seeds = match lesion_seed {
        Some((x, y, r)) => SeedSpec::manual(x * scale, y * scale, r * scale),
        None => SeedSpec::auto(),
    };
    let params = SegmentParams { seeds, se_radius };
    if scale == 1.0 {
        return Ok(segment_with(img, &params)?);
    }
    let sw = ((w as f64 * scale).round() as u32).max(1);
    let sh = ((h as f64 * scale).round() as u32).max(1);
    let small = RgbImage::from_image(&imageops::resize(&img.to_image(), sw, sh, FilterType::Triangle));
    let mask = segment_with(&small, &params)?;
    nearest_resize(&mask, w, h)
}

pub fn segment(
    input: &Path,
    output: &Path,
    lesion_seed: Option<(f64, f64, f64)>,
    se_radius: usize,
    max_dim: Option<usize>,
) -> Result<bool> {
    let images = list_images(input)?;
    std::fs::create_dir_all(output).with_context(|| format!("creating {}", output.display()))?;
    let failures: Vec<(String, String)> = images
        .par_iter()
        .filter_map(|(id, path)| {
            let run = || -> Result<()> {
                let img = load_image(path)?;
                let mask = segment_one(&img, lesion_seed, se_radius, max_dim)?;
                save_mask(&mask, output.join(mask_file_name(id)))?;
                Ok(())
            };
            run().err().map(|e| (id.clone(), format!("{e:#}")))
        })
        .collect();
    info!("segmented {} of {} images", images.len() - failures.len(), images.len());
    Ok(report_failures("segment", &failures))
}

pub fn extract(
    input: &Path,
    masks: &Path,
    output: &Path,
    delta: f64,
    ngtdm_levels: usize,
    glcm_levels: usize,
) -> Result<bool> {
    let images = list_images(input)?;
    let mask_paths: BTreeMap<String, PathBuf> = list_masks(masks)?.into_iter().collect();
    let params = FeatureParams {
        texture: TextureParams {
            delta,
            levels: ngtdm_levels,
        },
        glcm: GlcmParams {
            levels: glcm_levels,
            ..GlcmParams::default()
        },
    };
    let results: Vec<std::result::Result<FeatureVector, (String, String)>> = images
        .par_iter()
        .map(|(id, path)| {
            let run = || -> Result<FeatureVector> {
                let mask_path = mask_paths.get(id).context("no mask")?;
                let img = load_image(path)?;
                let mask = largest_component(&load_mask(mask_path)?);
                Ok(extract_features_with(id, &img, &mask, &params)?)
            };
            run().map_err(|e| (id.clone(), format!("{e:#}")))
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(fv) => rows.push(fv),
            Err(f) => failures.push(f),
        }
    }
    rows.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    write_features_csv(&rows, output)?;
    info!("wrote {} feature rows to {}", rows.len(), output.display());
    Ok(report_failures("extract", &failures))
}

fn submission_rows(model: &OvaSvmModel, rows: &[FeatureVector]) -> Result<Vec<SubmissionRow>> {
    rows.iter()
        .map(|fv| {
            let p = model.predict(&fv.values)?;
            Ok(SubmissionRow {
                image_id: fv.image_id.clone(),
                melanoma: p.melanoma_score,
                seborrheic_keratosis: p.sk_score,
            })
        })
        .collect()
}

fn subset(labels: &LabelTable, rows: &[FeatureVector]) -> LabelTable {
    rows.iter()
        .filter_map(|fv| labels.get(&fv.image_id).map(|c| (fv.image_id.clone(), c)))
        .collect()
}

fn three_class_accuracy(model: &OvaSvmModel, rows: &[FeatureVector], labels: &LabelTable) -> Result<f64> {
    let mut correct = 0usize;
    for fv in rows {
        let class = model.predict(&fv.values)?.class;
        if Some(class) == labels.get(&fv.image_id) {
            correct += 1;
        }
    }
    Ok(correct as f64 / rows.len().max(1) as f64)
}

/// Mean held-out three-class accuracy over folds assigned round-robin in id order.
fn cross_validate(rows: &[FeatureVector], labels: &LabelTable, c: f64) -> Result<f64> {
    let folds = CV_FOLDS.min(rows.len());
    let mut total = 0.0;
    for k in 0..folds {
        let (test, train): (Vec<_>, Vec<_>) =
            rows.iter().enumerate().partition(|(i, _)| i % folds == k);
        let train: Vec<FeatureVector> = train.into_iter().map(|(_, r)| r.clone()).collect();
        let test: Vec<FeatureVector> = test.into_iter().map(|(_, r)| r.clone()).collect();
        let model = train_ova(&train, labels, &SvmParams::with_c(c))
            .with_context(|| format!("fold {k} with C={c}"))?;
        total += three_class_accuracy(&model, &test, labels)?;
    }
    Ok(total / folds as f64)
}

pub fn train(input: &Path, labels_path: &Path, model_path: &Path, cs: &[f64]) -> Result<bool> {
    let mut rows = read_features_csv(input)?;
    rows.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let labels = load_labels(labels_path)?;
    let missing: Vec<&str> = rows
        .iter()
        .filter(|fv| labels.get(&fv.image_id).is_none())
        .map(|fv| fv.image_id.as_str())
        .collect();
    if !missing.is_empty() {
        bail!("no label for {} image(s): {}", missing.len(), missing.join(", "));
    }
    let c = if cs.len() == 1 {
        cs[0]
    } else {
        let mut best = (f64::NEG_INFINITY, cs[0]);
        for &c in cs {
            let acc = cross_validate(&rows, &labels, c)?;
            println!("C={c}\tcv_accuracy={acc:.4}");
            // strict improvement keeps the earliest C on ties
            if acc > best.0 {
                best = (acc, c);
            }
        }
        info!("selected C={}", best.1);
        best.1
    };
    let model = train_ova(&rows, &labels, &SvmParams::with_c(c))?;
    save_model(&model, model_path)?;

    let report = classification_metrics(&submission_rows(&model, &rows)?, &subset(&labels, &rows))?;
    println!("C={c}");
    for task in &report.tasks {
        println!("{}\ttraining_accuracy={:.4}", task.task, task.metrics.accuracy);
    }
    println!("three_class\ttraining_accuracy={:.4}", report.accuracy);
    Ok(true)
}

pub fn predict(input: &Path, model_path: &Path, output: &Path) -> Result<bool> {
    let model = load_model(model_path)?;
    let expected = feature_names();
    if model.feature_order != expected {
        let first = model
            .feature_order
            .iter()
            .zip(&expected)
            .position(|(a, b)| a != b)
            .unwrap_or(model.feature_order.len().min(expected.len()));
        bail!(
            "model feature order differs from the features file at position {} ({:?} vs {:?})",
            first + 1,
            model.feature_order.get(first),
            expected.get(first)
        );
    }
    let rows = read_features_csv(input)?;
    write_submission(&submission_rows(&model, &rows)?, output)?;
    info!("wrote {} predictions to {}", rows.len(), output.display());
    Ok(true)
}

pub fn evaluate_seg(pred_dir: &Path, truth_dir: &Path, output: &Path) -> Result<bool> {
    let pred: BTreeMap<String, PathBuf> = list_masks(pred_dir)?.into_iter().collect();
    let truth: BTreeMap<String, PathBuf> = list_masks(truth_dir)?.into_iter().collect();
    let only_pred: Vec<&str> = pred.keys().filter(|k| !truth.contains_key(*k)).map(String::as_str).collect();
    let only_truth: Vec<&str> = truth.keys().filter(|k| !pred.contains_key(*k)).map(String::as_str).collect();
    if !only_pred.is_empty() || !only_truth.is_empty() {
        bail!("mask id mismatch: without truth {only_pred:?}; without prediction {only_truth:?}");
    }
    let pairs = pred
        .par_iter()
        .map(|(id, p)| Ok((id.clone(), load_mask(p)?, load_mask(&truth[id])?)))
        .collect::<Result<Vec<_>>>()?;
    let report = evaluate_segmentation(&pairs)?;
    write_report(&report.to_json(), &report.to_csv(), output)?;
    let o = &report.overall;
    println!(
        "items={} accuracy={:.4} dice={:.4} jaccard={:.4} sensitivity={:.4} specificity={:.4}",
        o.items, o.accuracy, o.dice, o.jaccard, o.sensitivity, o.specificity
    );
    Ok(true)
}

pub fn evaluate_cls(submission: &Path, labels_path: &Path, output: &Path) -> Result<bool> {
    let rows = load_submission(submission)?;
    let labels = load_labels(labels_path)?;
    let report = classification_metrics(&rows, &labels)?;
    write_report(&report.to_json(), &report.to_csv(), output)?;
    for task in &report.tasks {
        let m = &task.metrics;
        println!(
            "{} accuracy={:.4} sensitivity={:.4} specificity={:.4}",
            task.task, m.accuracy, m.sensitivity, m.specificity
        );
    }
    println!("three_class accuracy={:.4}", report.accuracy);
    Ok(true)
}
