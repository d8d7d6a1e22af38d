//! Soft-margin SVM with a polynomial kernel, trained by SMO, and the
//! one-vs-all pair of binary models used for the two lesion tasks.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Class, LabelTable};
use crate::error::{Error, Result};
use crate::features_assembly::{feature_names, FeatureVector};

pub const SCHEMA_VERSION: &str = "melaseg-svm-1";
pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;
pub const DEFAULT_CACHE_BYTES: usize = 2 << 30;
pub const SUPPORT_THRESHOLD: f64 = 1e-8;
pub const CONSTANT_STD: f64 = 1e-12;
const TAU: f64 = 1e-12;

/// `K(x, z) = (offset + ⟨x, z⟩)^degree`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub degree: u32,
    pub offset: f64,
}

impl Default for Kernel {
    fn default() -> Self {
        Self {
            degree: 2,
            offset: 1.0,
        }
    }
}

impl Kernel {
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        let dot: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
        (self.offset + dot).powi(self.degree as i32)
    }
}

/// Polynomial kernel of degree 2 with offset 1.
pub fn kernel(x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch(format!(
            "kernel arguments of length {} and {}",
            x.len(),
            z.len()
        )));
    }
    Ok(Kernel::default().eval(x, z))
}

/// Per-column z-scoring fitted on training data.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot standardize an empty matrix".into()))?;
        let d = first.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch("rows differ in length".into()));
        }
        let n = rows.len() as f64;
        let means: Vec<f64> = (0..d).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n).collect();
        let stds = (0..d)
            .map(|c| {
                let var = rows.iter().map(|r| (r[c] - means[c]).powi(2)).sum::<f64>() / n;
                var.sqrt()
            })
            .collect();
        Ok(Self { means, stds })
    }

    pub fn is_constant(&self, column: usize) -> bool {
        self.stds[column] < CONSTANT_STD
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(c, v)| {
                if self.is_constant(c) {
                    0.0
                } else {
                    (v - self.means[c]) / self.stds[c]
                }
            })
            .collect()
    }
}

pub fn fit_standardizer(rows: &[Vec<f64>]) -> Result<Standardizer> {
    Standardizer::fit(rows)
}

pub fn apply_standardizer(s: &Standardizer, x: &[f64]) -> Vec<f64> {
    s.apply(x)
}

/// Labeled binary training data; labels are +1 or −1.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<i8>,
}

impl TrainingSet {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors and {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        if labels.iter().any(|&y| y != 1 && y != -1) {
            return Err(Error::InvalidInput("labels must be +1 or -1".into()));
        }
        if let Some(first) = vectors.first() {
            if vectors.iter().any(|v| v.len() != first.len()) {
                return Err(Error::DimensionMismatch("vectors differ in length".into()));
            }
        }
        if vectors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("training vectors must be finite".into()));
        }
        if !(labels.contains(&1) && labels.contains(&-1)) {
            return Err(Error::SingleClass);
        }
        Ok(Self { vectors, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: Kernel,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest Gram matrix, in bytes, that is precomputed.
    pub cache_bytes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            kernel: Kernel::default(),
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            cache_bytes: DEFAULT_CACHE_BYTES,
        }
    }
}

impl SvmParams {
    pub fn with_c(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }
}

/// Dual expansion `f(x) = Σ coef_i·K(s_i, x) + bias` with `coef_i = α_i·y_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarySvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub kernel: Kernel,
}

impl BinarySvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(s, a)| a * self.kernel.eval(s, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// Checks the invariants a trained model satisfies.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Model(m));
        if self.support_vectors.is_empty() {
            return bad("model has no support vectors".into());
        }
        if self.support_vectors.len() != self.coefficients.len() {
            return bad("support vector and coefficient counts differ".into());
        }
        let d = self.dim();
        if self.support_vectors.iter().any(|s| s.len() != d) {
            return bad("support vectors differ in length".into());
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("C must be positive, got {}", self.c));
        }
        let finite = self.bias.is_finite()
            && self.coefficients.iter().all(|a| a.is_finite())
            && self.support_vectors.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return bad("non-finite model parameter".into());
        }
        if let Some(a) = self.coefficients.iter().find(|a| a.abs() > self.c * (1.0 + 1e-9)) {
            return bad(format!("coefficient {a} exceeds C = {}", self.c));
        }
        let balance: f64 = self.coefficients.iter().sum();
        if balance.abs() > 1e-6 {
            return bad(format!("coefficients sum to {balance:e}, expected 0"));
        }
        Ok(())
    }
}

pub fn decision(m: &BinarySvmModel, x: &[f64]) -> f64 {
    m.decision(x)
}

/// Logistic map of a decision value to (0, 1).
pub fn score(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// Diagnostics of one SMO run. `alphas` follows the input row order.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub model: BinarySvmModel,
    pub alphas: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub max_violation: f64,
}

enum Gram<'a> {
    Cached(Vec<f64>),
    OnDemand(&'a [Vec<f64>], Kernel),
}

impl Gram<'_> {
    fn row(&self, i: usize, l: usize, out: &mut [f64]) {
        match self {
            Gram::Cached(k) => out.copy_from_slice(&k[i * l..(i + 1) * l]),
            Gram::OnDemand(x, kern) => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = kern.eval(&x[i], &x[j]);
                }
            }
        }
    }

    fn diag(&self, i: usize, l: usize) -> f64 {
        match self {
            Gram::Cached(k) => k[i * l + i],
            Gram::OnDemand(x, kern) => kern.eval(&x[i], &x[i]),
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

pub fn train_binary(data: &TrainingSet, c: f64) -> Result<BinarySvmModel> {
    Ok(train_binary_with(data, &SvmParams::with_c(c))?.model)
}

/// SMO on the dual `max Σα − ½ΣΣ α_i α_j y_i y_j K_ij` subject to
/// `0 ≤ α ≤ C`, `Σ α_i y_i = 0`, choosing the maximal violating pair.
///
/// Rows are processed in a canonical (sorted) order, so the result does not
/// depend on how the caller ordered the training set.
pub fn train_binary_with(data: &TrainingSet, params: &SvmParams) -> Result<TrainReport> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidInput(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tolerance > 0.0) {
        return Err(Error::InvalidInput("KKT tolerance must be positive".into()));
    }
    let data = TrainingSet::new(data.vectors.clone(), data.labels.clone())?;
    let l = data.len();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        lexicographic(&data.vectors[a], &data.vectors[b]).then(data.labels[a].cmp(&data.labels[b]))
    });
    let x: Vec<Vec<f64>> = order.iter().map(|&k| data.vectors[k].clone()).collect();
    let y: Vec<f64> = order.iter().map(|&k| data.labels[k] as f64).collect();
    let kern = params.kernel;
    let cache_fits = l
        .checked_mul(l)
        .and_then(|n| n.checked_mul(8))
        .is_some_and(|bytes| bytes <= params.cache_bytes);
    let gram = if cache_fits {
        let mut k = vec![0.0; l * l];
        for i in 0..l {
            for j in i..l {
                let v = kern.eval(&x[i], &x[j]);
                k[i * l + j] = v;
                k[j * l + i] = v;
            }
        }
        Gram::Cached(k)
    } else {
        Gram::OnDemand(&x, kern)
    };

    let c = params.c;
    let mut alpha = vec![0.0; l];
    // gradient of ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij
    let mut grad = vec![-1.0; l];
    let (mut ki, mut kj) = (vec![0.0; l], vec![0.0; l]);
    let mut iterations = 0;
    let max_violation = loop {
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for t in 0..l {
            let v = -y[t] * grad[t];
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if up && v > gmax {
                (i, gmax) = (t, v);
            }
            if low && v < gmin {
                (j, gmin) = (t, v);
            }
        }
        let violation = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || violation < params.tolerance {
            break violation.max(0.0);
        }
        if iterations >= params.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                max_violation: violation,
            });
        }
        iterations += 1;

        gram.row(i, l, &mut ki);
        gram.row(j, l, &mut kj);
        let (kii, kjj, kij) = (gram.diag(i, l), gram.diag(j, l), ki[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (kii + kjj - 2.0 * kij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            let quad = (kii + kjj - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..l {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    };

    // bias: mean of y_i G_i over free multipliers, else the feasible midpoint
    let (mut upper, mut lower, mut free_sum, mut free_n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0);
    for t in 0..l {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (upper + lower) / 2.0
    };
    let objective = -0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();

    let (mut support_vectors, mut coefficients) = (Vec::new(), Vec::new());
    for t in 0..l {
        if alpha[t] > SUPPORT_THRESHOLD {
            support_vectors.push(x[t].clone());
            coefficients.push(alpha[t] * y[t]);
        }
    }
    let model = BinarySvmModel {
        support_vectors,
        coefficients,
        bias: -rho,
        c,
        kernel: kern,
    };
    model.validate()?;
    let mut alphas = vec![0.0; l];
    for (pos, &k) in order.iter().enumerate() {
        alphas[k] = alpha[pos];
    }
    Ok(TrainReport {
        model,
        alphas,
        iterations,
        objective,
        max_violation,
    })
}

/// The two one-vs-rest models sharing one standardizer.
#[derive(Clone, Debug, PartialEq)]
pub struct OvaSvmModel {
    pub melanoma_vs_rest: BinarySvmModel,
    pub sk_vs_rest: BinarySvmModel,
    pub standardizer: Standardizer,
    pub feature_order: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub melanoma_decision: f64,
    pub sk_decision: f64,
    pub melanoma_score: f64,
    pub sk_score: f64,
    pub class: Class,
}

/// Melanoma if its decision is positive and not below the SK decision,
/// seborrheic keratosis if positive and strictly above, nevus otherwise.
pub fn class_from_decisions(f_mel: f64, f_sk: f64) -> Class {
    if f_mel > 0.0 && f_mel >= f_sk {
        Class::Melanoma
    } else if f_sk > 0.0 && f_sk > f_mel {
        Class::SeborrheicKeratosis
    } else {
        Class::Nevus
    }
}

impl OvaSvmModel {
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.standardizer.dim() {
            return Err(Error::DimensionMismatch(format!(
                "feature vector of length {}, model expects {}",
                x.len(),
                self.standardizer.dim()
            )));
        }
        let z = self.standardizer.apply(x);
        let f_mel = self.melanoma_vs_rest.decision(&z);
        let f_sk = self.sk_vs_rest.decision(&z);
        Ok(Prediction {
            melanoma_decision: f_mel,
            sk_decision: f_sk,
            melanoma_score: score(f_mel),
            sk_score: score(f_sk),
            class: class_from_decisions(f_mel, f_sk),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.standardizer.dim();
        if self.standardizer.stds.len() != d || self.feature_order.len() != d {
            return Err(Error::Model(format!(
                "standardizer ({d} means, {} stds) and feature order ({}) disagree",
                self.standardizer.stds.len(),
                self.feature_order.len()
            )));
        }
        if self.standardizer.stds.iter().any(|s| !(*s >= 0.0 && s.is_finite()))
            || self.standardizer.means.iter().any(|m| !m.is_finite())
        {
            return Err(Error::Model("invalid standardizer entries".into()));
        }
        for (name, m) in [("melanoma_vs_rest", &self.melanoma_vs_rest), ("sk_vs_rest", &self.sk_vs_rest)] {
            m.validate().map_err(|e| Error::Model(format!("{name}: {e}")))?;
            if m.dim() != d {
                return Err(Error::Model(format!(
                    "{name}: support vectors have length {}, expected {d}",
                    m.dim()
                )));
            }
        }
        Ok(())
    }
}

pub fn predict(m: &OvaSvmModel, x: &FeatureVector) -> Result<Prediction> {
    m.predict(&x.values)
}

/// Standardizes, then trains melanoma-vs-rest and SK-vs-rest (concurrently).
pub fn train_ova(features: &[FeatureVector], labels: &LabelTable, params: &SvmParams) -> Result<OvaSvmModel> {
    let mut classes = Vec::with_capacity(features.len());
    for fv in features {
        let class = labels
            .get(&fv.image_id)
            .ok_or_else(|| Error::InvalidInput(format!("no label for {}", fv.image_id)))?;
        classes.push(class);
    }
    for class in Class::ALL {
        if !classes.contains(&class) {
            return Err(Error::MissingClass(class.as_str()));
        }
    }
    let raw: Vec<Vec<f64>> = features.iter().map(|f| f.values.to_vec()).collect();
    let standardizer = Standardizer::fit(&raw)?;
    let z: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.apply(r)).collect();
    let task = |positive: Class| -> Result<BinarySvmModel> {
        let y = classes.iter().map(|&c| if c == positive { 1 } else { -1 }).collect();
        let set = TrainingSet::new(z.clone(), y)?;
        Ok(train_binary_with(&set, params)?.model)
    };
    let (mel, sk) = std::thread::scope(|s| {
        let h = s.spawn(|| task(Class::SeborrheicKeratosis));
        let mel = task(Class::Melanoma);
        (mel, h.join().expect("training thread panicked"))
    });
    Ok(OvaSvmModel {
        melanoma_vs_rest: mel?,
        sk_vs_rest: sk?,
        standardizer,
        feature_order: feature_names(),
    })
}

/// Decimal number written with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(format!("{:.16e}", self.0))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Num)
    }
}

fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

fn floats(v: &[Num]) -> Vec<f64> {
    v.iter().map(|n| n.0).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFile {
    #[serde(rename = "type")]
    kind: String,
    degree: u32,
    offset: Num,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BinaryFile {
    c: Num,
    kernel: KernelFile,
    bias: Num,
    support_vectors: Vec<Vec<Num>>,
    coefficients: Vec<Num>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StandardizerFile {
    means: Vec<Num>,
    stds: Vec<Num>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: String,
    feature_order: Vec<String>,
    standardizer: StandardizerFile,
    melanoma_vs_rest: BinaryFile,
    sk_vs_rest: BinaryFile,
}

impl From<&BinarySvmModel> for BinaryFile {
    fn from(m: &BinarySvmModel) -> Self {
        Self {
            c: Num(m.c),
            kernel: KernelFile {
                kind: "polynomial".into(),
                degree: m.kernel.degree,
                offset: Num(m.kernel.offset),
            },
            bias: Num(m.bias),
            support_vectors: m.support_vectors.iter().map(|s| nums(s)).collect(),
            coefficients: nums(&m.coefficients),
        }
    }
}

impl TryFrom<BinaryFile> for BinarySvmModel {
    type Error = Error;

    fn try_from(f: BinaryFile) -> Result<Self> {
        if f.kernel.kind != "polynomial" {
            return Err(Error::Model(format!("unsupported kernel {:?}", f.kernel.kind)));
        }
        Ok(Self {
            support_vectors: f.support_vectors.iter().map(|s| floats(s)).collect(),
            coefficients: floats(&f.coefficients),
            bias: f.bias.0,
            c: f.c.0,
            kernel: Kernel {
                degree: f.kernel.degree,
                offset: f.kernel.offset.0,
            },
        })
    }
}

pub fn model_to_json(m: &OvaSvmModel) -> Result<String> {
    m.validate()?;
    let file = ModelFile {
        schema_version: SCHEMA_VERSION.into(),
        feature_order: m.feature_order.clone(),
        standardizer: StandardizerFile {
            means: nums(&m.standardizer.means),
            stds: nums(&m.standardizer.stds),
        },
        melanoma_vs_rest: (&m.melanoma_vs_rest).into(),
        sk_vs_rest: (&m.sk_vs_rest).into(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Model(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<OvaSvmModel> {
    let version: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Model(format!("corrupted model file: {e}")))?;
    match version.get("schema_version").and_then(|v| v.as_str()) {
        Some(SCHEMA_VERSION) => {}
        other => {
            return Err(Error::Model(format!(
                "schema version {other:?}, expected {SCHEMA_VERSION:?}"
            )))
        }
    }
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Model(format!("corrupted model file: {e}")))?;
    let model = OvaSvmModel {
        melanoma_vs_rest: file.melanoma_vs_rest.try_into()?,
        sk_vs_rest: file.sk_vs_rest.try_into()?,
        standardizer: Standardizer {
            means: floats(&file.standardizer.means),
            stds: floats(&file.standardizer.stds),
        },
        feature_order: file.feature_order,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(m: &OvaSvmModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(m)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<OvaSvmModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
