//! Image, mask and label-table I/O for ISIC-style directories, plus the
//! challenge submission CSV.
//!
//! Layout: images are `<dir>/ISIC_<id>.jpg` (or `.png`), ground-truth masks
//! `<dir>/ISIC_<id>_segmentation.png`, labels one CSV with header
//! `image_id,melanoma,seborrheic_keratosis`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageReader, Luma};

use crate::error::{Error, Result};

/// sRGB image with 8 bits per channel, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    /// Rotates the image by 90° clockwise.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut pixels = Vec::with_capacity(w * h);
        for y in 0..w {
            for x in 0..h {
                pixels.push(self.get(y, h - 1 - x));
            }
        }
        Self {
            width: h,
            height: w,
            pixels,
        }
    }

    pub fn to_image(&self) -> image::RgbImage {
        let raw = self.pixels.iter().flat_map(|p| p.iter().copied()).collect();
        image::RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer length matches dimensions")
    }

    pub fn from_image(img: &image::RgbImage) -> Self {
        let pixels = img.pixels().map(|p| p.0).collect();
        Self {
            width: img.width() as usize,
            height: img.height() as usize,
            pixels,
        }
    }
}

/// Per-pixel lesion/skin labels, row-major. `true` is lesion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    labels: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, labels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "mask must be at least 1x1, got {width}x{height}"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {width}x{height} mask",
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub(crate) fn labels_mut(&mut self) -> &mut [bool] {
        &mut self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.labels[y * self.width + x]
    }

    /// Out-of-canvas coordinates read as skin.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.labels[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, lesion: bool) {
        self.labels[y * self.width + x] = lesion;
    }

    pub fn lesion_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            labels: self.labels.iter().map(|&l| !l).collect(),
        }
    }

    /// Rotates the mask by 90° clockwise.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut labels = Vec::with_capacity(w * h);
        for y in 0..w {
            for x in 0..h {
                labels.push(self.get(y, h - 1 - x));
            }
        }
        Self {
            width: h,
            height: w,
            labels,
        }
    }

    pub fn same_dims(&self, width: usize, height: usize) -> bool {
        self.width == width && self.height == height
    }

    pub fn to_image(&self) -> GrayImage {
        let raw = self.labels.iter().map(|&l| if l { 255 } else { 0 }).collect();
        GrayImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer length matches dimensions")
    }

    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width() as usize,
            height: img.height() as usize,
            labels: img.pixels().map(|&Luma([v])| v >= MASK_THRESHOLD).collect(),
        }
    }
}

/// Gray value at or above which a ground-truth mask pixel is lesion.
pub const MASK_THRESHOLD: u8 = 128;

/// Diagnostic class of one lesion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Melanoma,
    SeborrheicKeratosis,
    Nevus,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Melanoma, Class::SeborrheicKeratosis, Class::Nevus];

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Melanoma => "melanoma",
            Class::SeborrheicKeratosis => "seborrheic_keratosis",
            Class::Nevus => "nevus",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Image id to ground-truth class.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelTable {
    entries: BTreeMap<String, Class>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, image_id: impl Into<String>, class: Class) -> Result<()> {
        let id = image_id.into();
        if self.entries.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.entries.insert(id, class);
        Ok(())
    }

    pub fn get(&self, image_id: &str) -> Option<Class> {
        self.entries.get(image_id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Class)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

impl FromIterator<(String, Class)> for LabelTable {
    /// Later duplicates overwrite earlier ones; use [`LabelTable::insert`]
    /// to reject them.
    fn from_iter<I: IntoIterator<Item = (String, Class)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

/// One row of a submission: image id, melanoma score, seborrheic keratosis score.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmissionRow {
    pub image_id: String,
    pub melanoma: f64,
    pub seborrheic_keratosis: f64,
}

pub const SUBMISSION_HEADER: &str = "image_id,melanoma,seborrheic_keratosis";

fn decode_error(path: &Path, e: impl fmt::Display) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn open_dynamic(path: &Path) -> Result<DynamicImage> {
    ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| decode_error(path, e))
}

/// Decodes a JPEG or PNG into 8-bit sRGB. Sources with 16-bit channels are
/// rescaled; alpha is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = open_dynamic(path)?;
    Ok(RgbImage::from_image(&img.to_rgb8()))
}

/// Loads a grayscale ground-truth mask; values >= 128 are lesion.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    match open_dynamic(path)? {
        DynamicImage::ImageLuma8(g) => Ok(BinaryMask::from_gray(&g)),
        DynamicImage::ImageLuma16(g) => Ok(BinaryMask::from_gray(
            &DynamicImage::ImageLuma16(g).to_luma8(),
        )),
        other => Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("expected a grayscale mask, found {:?}", other.color()),
        }),
    }
}

/// Writes a mask as an 8-bit grayscale PNG with 0 = skin and 255 = lesion.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    mask.to_image()
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => decode_error(path, other),
        })
}

/// File name of the mask for `image_id`, following the ISIC convention.
pub fn mask_file_name(image_id: &str) -> String {
    format!("{image_id}_segmentation.png")
}

/// Lists the JPEG/PNG images of a directory as `(image_id, path)`, sorted by
/// id. Files named like masks (`*_segmentation.png`) are skipped.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<(String, PathBuf)>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if !matches!(ext.as_deref(), Some("jpg" | "jpeg" | "png")) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if stem.ends_with("_segmentation") || stem.ends_with("_superpixels") {
            continue;
        }
        out.push((stem.to_string(), path));
    }
    out.sort();
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateId(w[0].0.clone()));
    }
    Ok(out)
}

/// Lists `*_segmentation.png` masks of a directory as `(image_id, path)`,
/// sorted by id.
pub fn list_masks(dir: impl AsRef<Path>) -> Result<Vec<(String, PathBuf)>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let Some(name) = path.file_name().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some(id) = name.strip_suffix("_segmentation.png") {
            out.push((id.to_string(), path.clone()));
        }
    }
    out.sort();
    Ok(out)
}

fn parse_flag(path: &Path, id: &str, column: &str, raw: &str) -> Result<bool> {
    let v: f64 = raw.trim().parse().map_err(|_| {
        Error::csv(path, format!("{id}: {column} value {raw:?} is not a number"))
    })?;
    if v == 0.0 {
        Ok(false)
    } else if v == 1.0 {
        Ok(true)
    } else {
        Err(Error::csv(
            path,
            format!("{id}: {column} must be 0 or 1, got {raw}"),
        ))
    }
}

/// Reads the ground-truth label CSV. Nevus is the implicit class when both
/// binary columns are zero.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelTable> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: format!("missing column {name:?}"),
        })
    };
    let id_col = column("image_id")?;
    let mel_col = column("melanoma")?;
    let sk_col = column("seborrheic_keratosis")?;

    let mut table = LabelTable::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let field = |i: usize| {
            record
                .get(i)
                .ok_or_else(|| Error::csv(path, format!("short row {:?}", record)))
        };
        let id = field(id_col)?;
        let mel = parse_flag(path, id, "melanoma", field(mel_col)?)?;
        let sk = parse_flag(path, id, "seborrheic_keratosis", field(sk_col)?)?;
        let class = match (mel, sk) {
            (true, true) => {
                return Err(Error::InconsistentLabel {
                    image_id: id.to_string(),
                })
            }
            (true, false) => Class::Melanoma,
            (false, true) => Class::SeborrheicKeratosis,
            (false, false) => Class::Nevus,
        };
        table.insert(id, class)?;
    }
    Ok(table)
}

/// Writes the ground-truth label CSV in the same format [`load_labels`] reads.
pub fn write_labels(table: &LabelTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(SUBMISSION_HEADER);
    out.push('\n');
    for (id, class) in table.iter() {
        let (m, s) = match class {
            Class::Melanoma => ("1.0", "0.0"),
            Class::SeborrheicKeratosis => ("0.0", "1.0"),
            Class::Nevus => ("0.0", "0.0"),
        };
        out.push_str(&format!("{id},{m},{s}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the challenge submission CSV: fixed header, scores with exactly six
/// decimals, rows in input order.
pub fn write_submission(rows: &[SubmissionRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    for row in rows {
        for (name, v) in [
            ("melanoma", row.melanoma),
            ("seborrheic_keratosis", row.seborrheic_keratosis),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{}: {name} score {v} outside [0, 1]",
                    row.image_id
                )));
            }
        }
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<fs::File>| -> std::io::Result<()> {
        writeln!(w, "{SUBMISSION_HEADER}")?;
        for row in rows {
            writeln!(
                w,
                "{},{:.6},{:.6}",
                row.image_id, row.melanoma, row.seborrheic_keratosis
            )?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(path, e))
}

/// Reads a submission CSV back, preserving row order.
pub fn load_submission(path: impl AsRef<Path>) -> Result<Vec<SubmissionRow>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["image_id", "melanoma", "seborrheic_keratosis"] {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("unexpected header {:?}", headers),
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let num = |i: usize| -> Result<f64> {
            record[i]
                .parse()
                .map_err(|_| Error::csv(path, format!("bad score {:?}", &record[i])))
        };
        rows.push(SubmissionRow {
            image_id: record[0].to_string(),
            melanoma: num(1)?,
            seborrheic_keratosis: num(2)?,
        });
    }
    Ok(rows)
}
