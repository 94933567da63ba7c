//! JSONL annotation ingest, coordinate normalization, and the augmented
//! training-set writer.
//!
//! The interchange schema is one JSON object per line:
//!
//! ```json
//! {"record_id":"r0","image_ref":"shots/0.png","screen_width":1080,
//!  "screen_height":1920,"elements":[{"element_type":"button",
//!  "bbox":[100.0,200.0,300.0,400.0],"description":"Submit","epsilon":0.03}]}
//! ```
//!
//! `screen_width`/`screen_height` are present iff the coordinates are in
//! pixels; [`normalize_record`] divides them out, clamps sub-pixel overshoot,
//! and drops the dimensions. `epsilon` is an optional per-element override of
//! the augmentation range. Images are never opened; `image_ref` is opaque.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use iaml_core::geometry::BBox;
use iaml_core::sampler::{AugmentationConfig, RngStream, Strategy};
use iaml_core::UIElement;

#[derive(Debug)]
pub enum DatasetError {
    /// Schema or invariant violation; carries a human-readable location.
    Validation(String),
    Io(std::io::Error),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::Validation(msg) => write!(f, "{msg}"),
            DatasetError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DatasetError {}

impl From<std::io::Error> for DatasetError {
    fn from(e: std::io::Error) -> Self {
        DatasetError::Io(e)
    }
}

fn validation(msg: impl Into<String>) -> DatasetError {
    DatasetError::Validation(msg.into())
}

/// One element as serialized on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementEntry {
    pub element_type: String,
    /// `[x_min, y_min, x_max, y_max]`, normalized or pixel.
    pub bbox: [f64; 4],
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
}

/// One screen annotation as serialized on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub record_id: String,
    #[serde(default)]
    pub image_ref: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub screen_width: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub screen_height: Option<u32>,
    pub elements: Vec<ElementEntry>,
}

impl AnnotationRecord {
    /// Convert to validated core elements. Requires normalized coordinates.
    pub fn to_elements(&self) -> Result<Vec<UIElement>, DatasetError> {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if e.element_type.is_empty() {
                    return Err(validation(format!(
                        "record {}: element {i} has an empty element_type",
                        self.record_id
                    )));
                }
                let [x0, y0, x1, y1] = e.bbox;
                let bbox = BBox::new(x0, y0, x1, y1).map_err(|err| {
                    validation(format!(
                        "record {}: element {i} bbox {:?}: {err}",
                        self.record_id, e.bbox
                    ))
                })?;
                let mut el = UIElement::new(e.element_type.clone(), bbox, e.description.clone());
                el.epsilon = e.epsilon;
                Ok(el)
            })
            .collect()
    }
}

/// Normalize one record to unit coordinates.
///
/// With screen dimensions present the coordinates are pixels: each is divided
/// by the screen extent, overshoot up to one pixel is clamped, more than one
/// pixel out of bounds is an error, and the dimensions are dropped so the
/// operation is idempotent. Without dimensions the coordinates must already
/// lie in `[0, 1]`.
pub fn normalize_record(r: &AnnotationRecord) -> Result<AnnotationRecord, DatasetError> {
    let mut out = r.clone();
    match (r.screen_width, r.screen_height) {
        (Some(w), Some(h)) => {
            if w == 0 || h == 0 {
                return Err(validation(format!(
                    "record {}: zero screen dimension",
                    r.record_id
                )));
            }
            let (w, h) = (w as f64, h as f64);
            for (i, e) in out.elements.iter_mut().enumerate() {
                for (axis, c) in e.bbox.iter_mut().enumerate() {
                    let extent = if axis % 2 == 0 { w } else { h };
                    if *c < -1.0 || *c > extent + 1.0 {
                        return Err(validation(format!(
                            "record {}: element {i} coordinate {c} out of screen bounds by more than 1 pixel",
                            r.record_id
                        )));
                    }
                    *c = (*c / extent).clamp(0.0, 1.0);
                }
            }
            out.screen_width = None;
            out.screen_height = None;
        }
        (None, None) => {
            for (i, e) in out.elements.iter().enumerate() {
                if e.bbox.iter().any(|c| !(0.0..=1.0).contains(c)) {
                    return Err(validation(format!(
                        "record {}: element {i} has unnormalized coordinates but no screen dimensions",
                        r.record_id
                    )));
                }
            }
        }
        _ => {
            return Err(validation(format!(
                "record {}: screen_width and screen_height must be present together",
                r.record_id
            )));
        }
    }
    Ok(out)
}

/// Load, normalize, and validate a JSONL annotation file. Errors carry the
/// line number for parse failures and the record id for invariant failures.
pub fn load_records(path: &Path) -> Result<Vec<AnnotationRecord>, DatasetError> {
    let file = fs::File::open(path)
        .map_err(|e| DatasetError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: AnnotationRecord = serde_json::from_str(&line).map_err(|e| {
            validation(format!("{}:{}: malformed JSON: {e}", path.display(), line_no + 1))
        })?;
        if !seen_ids.insert(raw.record_id.clone()) {
            return Err(validation(format!(
                "{}:{}: duplicate record_id {}",
                path.display(),
                line_no + 1,
                raw.record_id
            )));
        }
        let normalized = normalize_record(&raw)?;
        // Surface invariant violations (inverted/degenerate boxes) at load.
        normalized.to_elements()?;
        records.push(normalized);
    }
    Ok(records)
}

/// Re-serialize records verbatim (full coordinate precision), one JSON object
/// per line.
pub fn write_records(records: &[AnnotationRecord], path: &Path) -> Result<(), DatasetError> {
    let mut buf = String::new();
    for r in records {
        buf.push_str(&serde_json::to_string(r).expect("record serialization cannot fail"));
        buf.push('\n');
    }
    atomic_write(path, buf.as_bytes())?;
    Ok(())
}

/// `sha256:<hex>` digest of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String, DatasetError> {
    let bytes = fs::read(path)?;
    Ok(digest_bytes(&bytes))
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("sha256:{:x}", hasher.finalize())
}

/// Write to a sibling temp file, then rename into place, so error paths never
/// leave a partial output behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    let tmp = tmp_path(path);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Everything needed to reproduce an augmented file byte for byte.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AugmentedManifest {
    pub config: ManifestConfig,
    pub source_path: String,
    pub source_digest: String,
    pub output_path: String,
    pub output_digest: String,
    pub records: u64,
    pub skipped_records: u64,
    pub replica_counts: ReplicaCounts,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestConfig {
    pub epsilon: f64,
    pub n_trials: u32,
    pub tau: f64,
    pub k_replicas: u32,
    pub master_seed: u64,
    pub strategy: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplicaCounts {
    pub per_record: u32,
    pub output_lines: u64,
}

/// Options of one augmentation run beyond the sampling config itself.
#[derive(Clone, Copy, Debug)]
pub struct AugmentOptions {
    pub strategy: Strategy,
    /// Skip records whose augmentation fails instead of aborting.
    pub skip_bad: bool,
    pub workers: usize,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::IouPayoff,
            skip_bad: false,
            workers: 1,
        }
    }
}

pub fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::IouPayoff => "iaml",
        Strategy::UniformNoise => "random",
    }
}

/// Serialize one augmented line with 2-fractional-digit coordinates, the
/// granularity of the reward-index discretization. Field order and byte
/// layout are fixed; replica 0 of a record is the original elements pushed
/// through this same writer.
fn augmented_line(record: &AnnotationRecord, replica_idx: u32, elements: &[UIElement]) -> String {
    let mut line = String::with_capacity(128);
    line.push_str("{\"record_id\":");
    line.push_str(&serde_json::to_string(&record.record_id).unwrap());
    line.push_str(",\"replica_idx\":");
    line.push_str(&replica_idx.to_string());
    line.push_str(",\"image_ref\":");
    line.push_str(&serde_json::to_string(&record.image_ref).unwrap());
    line.push_str(",\"elements\":[");
    for (i, e) in elements.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str("{\"element_type\":");
        line.push_str(&serde_json::to_string(&e.element_type).unwrap());
        line.push_str(&format!(
            ",\"bbox\":[{:.2},{:.2},{:.2},{:.2}]",
            e.bbox.x_min(),
            e.bbox.y_min(),
            e.bbox.x_max(),
            e.bbox.y_max()
        ));
        line.push_str(",\"description\":");
        line.push_str(&serde_json::to_string(&e.description).unwrap());
        line.push('}');
    }
    line.push_str("]}");
    line
}

fn augment_one_record(
    idx: usize,
    record: &AnnotationRecord,
    cfg: &AugmentationConfig,
    strategy: Strategy,
) -> Result<Vec<String>, DatasetError> {
    let elements = record.to_elements()?;
    let replicas = iaml_core::sampler::augment_replicas(&elements, cfg, strategy, idx as u64)
        .map_err(|e| {
            validation(format!(
                "record {} (index {idx}): augmentation failed: {e}",
                record.record_id
            ))
        })?;
    Ok(replicas
        .iter()
        .enumerate()
        .map(|(r, elems)| augmented_line(record, r as u32, elems))
        .collect())
}

/// Emit `k_replicas` lines per record (replica 0 verbatim through the
/// 2-decimal writer) plus a manifest that pins the reproduction.
///
/// Records keep their input order in the output regardless of worker count;
/// per-record streams are derived from the record index, so parallel and
/// serial runs produce identical bytes.
pub fn write_augmented(
    records: &[AnnotationRecord],
    cfg: &AugmentationConfig,
    source_path: &Path,
    out_path: &Path,
    opts: &AugmentOptions,
) -> Result<AugmentedManifest, DatasetError> {
    cfg.validate()
        .map_err(|e| validation(format!("invalid augmentation config: {e}")))?;

    let results: Vec<Result<Vec<String>, DatasetError>> = if opts.workers > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| validation(format!("worker pool: {e}")))?;
        pool.install(|| {
            records
                .par_iter()
                .enumerate()
                .map(|(idx, r)| augment_one_record(idx, r, cfg, opts.strategy))
                .collect()
        })
    } else {
        records
            .iter()
            .enumerate()
            .map(|(idx, r)| augment_one_record(idx, r, cfg, opts.strategy))
            .collect()
    };

    let mut buf = String::new();
    let mut skipped = 0u64;
    for (record, lines) in records.iter().zip(results) {
        match lines {
            Ok(lines) => {
                for line in lines {
                    buf.push_str(&line);
                    buf.push('\n');
                }
            }
            Err(e) if opts.skip_bad => {
                eprintln!("warning: skipping record {}: {e}", record.record_id);
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    atomic_write(out_path, buf.as_bytes())?;

    let manifest = AugmentedManifest {
        config: ManifestConfig {
            epsilon: cfg.epsilon,
            n_trials: cfg.n_trials,
            tau: cfg.tau,
            k_replicas: cfg.k_replicas,
            master_seed: cfg.master_seed,
            strategy: strategy_name(opts.strategy).to_string(),
        },
        source_path: source_path.display().to_string(),
        source_digest: file_digest(source_path)?,
        output_path: out_path.display().to_string(),
        output_digest: digest_bytes(buf.as_bytes()),
        records: records.len() as u64,
        skipped_records: skipped,
        replica_counts: ReplicaCounts {
            per_record: cfg.k_replicas,
            output_lines: (records.len() as u64 - skipped) * cfg.k_replicas as u64,
        },
    };
    let manifest_path = manifest_path_for(out_path);
    atomic_write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)
            .expect("manifest serialization cannot fail")
            .as_bytes(),
    )?;
    Ok(manifest)
}

pub fn manifest_path_for(out_path: &Path) -> PathBuf {
    let mut name = out_path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out_path.with_file_name(name)
}

/// One line of an augmented file, for consumers and round-trip checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentedRecord {
    pub record_id: String,
    pub replica_idx: u32,
    #[serde(default)]
    pub image_ref: String,
    pub elements: Vec<ElementEntry>,
}

pub fn load_augmented(path: &Path) -> Result<Vec<AugmentedRecord>, DatasetError> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| {
            validation(format!("{}:{}: malformed JSON: {e}", path.display(), line_no + 1))
        })?);
    }
    Ok(out)
}

/// Deterministic pseudo-random subset of `⌈fraction·n⌉` items, returned in
/// their original order.
pub fn subsample<T: Clone>(items: &[T], fraction: f64, seed: u64) -> Vec<T> {
    assert!(
        fraction > 0.0 && fraction <= 1.0,
        "fraction must be in (0, 1]"
    );
    let m = iaml_core::toy::train::ceil_fraction(items.len(), fraction);
    if m == items.len() {
        return items.to_vec();
    }
    // Partial Fisher-Yates over the index vector, then order-restore.
    let mut rng = RngStream::from_seed_value(seed ^ 0x7375_6273_616d_706c);
    let mut indices: Vec<usize> = (0..items.len()).collect();
    for i in 0..m {
        let j = i + rng.below(indices.len() - i);
        indices.swap(i, j);
    }
    let mut chosen: Vec<usize> = indices[..m].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| items[i].clone()).collect()
}
