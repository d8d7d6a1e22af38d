//! Lesion segmentation by nearest color marker in the (a*, b*) plane.
//!
//! A marker is the mean (a*, b*) of a sample region. Every pixel takes the
//! label of the closer marker; the raw label matrix is then cleaned into a
//! single filled lesion region.

use crate::colorspace::{srgb_to_lab, LabImage};
use crate::dataset::{BinaryMask, RgbImage};
use crate::error::{Error, Result};
use crate::morphology;

/// Where a marker's sample region came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkerSource {
    AutoCenter,
    AutoBorder,
    Manual,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorMarker {
    pub a_star: f64,
    pub b_star: f64,
    pub source: MarkerSource,
}

impl ColorMarker {
    pub fn new(a_star: f64, b_star: f64, source: MarkerSource) -> Self {
        Self {
            a_star,
            b_star,
            source,
        }
    }

    #[inline]
    pub fn distance(&self, a: f64, b: f64) -> f64 {
        let da = a - self.a_star;
        let db = b - self.b_star;
        (da * da + db * db).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedMode {
    Auto,
    Manual,
}

/// Sample disk in pixel coordinates (pixel centers at integer positions).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedDisk {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl SeedDisk {
    fn contains(&self, x: usize, y: usize) -> bool {
        let dx = x as f64 - self.cx;
        let dy = y as f64 - self.cy;
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// How the lesion and skin sample regions are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedSpec {
    pub mode: SeedMode,
    pub lesion_disk: Option<SeedDisk>,
    /// Width of the skin frame as a fraction of `min(width, height)`.
    pub skin_band: Option<f64>,
}

pub const AUTO_LESION_RADIUS_FRACTION: f64 = 0.15;
pub const DEFAULT_SKIN_BAND_FRACTION: f64 = 0.05;
/// Markers closer than this in (a*, b*) are considered indistinguishable.
pub const MIN_MARKER_DISTANCE: f64 = 1e-3;
pub const DEFAULT_SE_RADIUS: usize = 3;

impl SeedSpec {
    pub fn auto() -> Self {
        Self {
            mode: SeedMode::Auto,
            lesion_disk: None,
            skin_band: None,
        }
    }

    pub fn manual(cx: f64, cy: f64, radius: f64) -> Self {
        Self {
            mode: SeedMode::Manual,
            lesion_disk: Some(SeedDisk { cx, cy, radius }),
            skin_band: None,
        }
    }

    pub fn with_skin_band(mut self, fraction: f64) -> Self {
        self.skin_band = Some(fraction);
        self
    }

    fn lesion_region(&self, width: usize, height: usize) -> Result<SeedDisk> {
        match self.mode {
            SeedMode::Auto => Ok(SeedDisk {
                cx: (width as f64 - 1.0) / 2.0,
                cy: (height as f64 - 1.0) / 2.0,
                radius: AUTO_LESION_RADIUS_FRACTION * width.min(height) as f64,
            }),
            SeedMode::Manual => {
                let disk = self.lesion_disk.ok_or_else(|| {
                    Error::InvalidInput("manual seed mode requires a lesion disk".into())
                })?;
                if !(disk.radius >= 1.0) || !disk.cx.is_finite() || !disk.cy.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "lesion disk radius must be >= 1, got {}",
                        disk.radius
                    )));
                }
                let inside = disk.cx - disk.radius >= 0.0
                    && disk.cy - disk.radius >= 0.0
                    && disk.cx + disk.radius <= width as f64 - 1.0
                    && disk.cy + disk.radius <= height as f64 - 1.0;
                if !inside {
                    return Err(Error::SeedOutOfBounds(format!(
                        "disk ({}, {}, r={}) exceeds {width}x{height}",
                        disk.cx, disk.cy, disk.radius
                    )));
                }
                Ok(disk)
            }
        }
    }

    fn band_width(&self, width: usize, height: usize) -> Result<usize> {
        let frac = self.skin_band.unwrap_or(DEFAULT_SKIN_BAND_FRACTION);
        if !(frac > 0.0 && frac < 0.5) {
            return Err(Error::InvalidInput(format!(
                "skin band fraction must lie in (0, 0.5), got {frac}"
            )));
        }
        Ok(((frac * width.min(height) as f64).round() as usize).max(1))
    }
}

impl Default for SeedSpec {
    fn default() -> Self {
        Self::auto()
    }
}

fn mean_ab(
    lab: &LabImage,
    mut include: impl FnMut(usize, usize) -> bool,
) -> Option<(f64, f64)> {
    let (mut sa, mut sb, mut n) = (0.0, 0.0, 0usize);
    for y in 0..lab.height() {
        for x in 0..lab.width() {
            if include(x, y) {
                let p = lab.get(x, y);
                sa += p.a;
                sb += p.b;
                n += 1;
            }
        }
    }
    (n > 0).then(|| (sa / n as f64, sb / n as f64))
}

/// Estimates the lesion and skin markers as region means of (a*, b*).
///
/// Auto mode samples a disk of radius `0.15·min(w, h)` at the image center
/// for the lesion and a border frame of width `0.05·min(w, h)` for the skin.
/// Lesion-disk pixels are excluded from the skin frame.
pub fn estimate_markers(lab: &LabImage, seeds: &SeedSpec) -> Result<(ColorMarker, ColorMarker)> {
    let (w, h) = (lab.width(), lab.height());
    let disk = seeds.lesion_region(w, h)?;
    let band = seeds.band_width(w, h)?;

    let (la, lb) =
        mean_ab(lab, |x, y| disk.contains(x, y)).ok_or(Error::EmptySeedRegion("lesion"))?;
    let in_band = |x: usize, y: usize| x < band || y < band || x + band >= w || y + band >= h;
    let (sa, sb) = mean_ab(lab, |x, y| in_band(x, y) && !disk.contains(x, y))
        .ok_or(Error::EmptySeedRegion("skin"))?;

    let lesion_source = match seeds.mode {
        SeedMode::Auto => MarkerSource::AutoCenter,
        SeedMode::Manual => MarkerSource::Manual,
    };
    let lesion = ColorMarker::new(la, lb, lesion_source);
    let skin = ColorMarker::new(sa, sb, MarkerSource::AutoBorder);
    let distance = lesion.distance(skin.a_star, skin.b_star);
    if !(distance >= MIN_MARKER_DISTANCE) {
        return Err(Error::DegenerateMarkers {
            lesion,
            skin,
            distance,
        });
    }
    Ok((lesion, skin))
}

/// Labels each pixel lesion iff it is strictly closer to the lesion marker
/// than to the skin marker in (a*, b*); ties go to skin. L* is ignored.
pub fn classify_pixels(lab: &LabImage, lesion: &ColorMarker, skin: &ColorMarker) -> BinaryMask {
    let labels = lab
        .pixels()
        .iter()
        .map(|p| lesion.distance(p.a, p.b) < skin.distance(p.a, p.b))
        .collect();
    BinaryMask::new(lab.width(), lab.height(), labels).expect("dimensions taken from the image")
}

/// Cleans a raw label matrix into one filled lesion region.
///
/// Opening by reconstruction with a disk of `se_radius` (components that
/// vanish under the opening are dropped, the others are kept whole), closing
/// with the same disk, largest 8-connected component, hole filling. Falls
/// back to the largest component of the input if the opening erases
/// everything; an all-skin input is returned as is.
pub fn postprocess(mask: &BinaryMask, se_radius: usize) -> BinaryMask {
    if mask.lesion_count() == 0 {
        return mask.clone();
    }
    let opened = morphology::open(mask, se_radius);
    if opened.lesion_count() == 0 {
        return morphology::largest_component(mask);
    }
    let kept = morphology::reconstruct(&opened, mask);
    let closed = morphology::close(&kept, se_radius);
    morphology::fill_holes(&morphology::largest_component(&closed))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentParams {
    pub seeds: SeedSpec,
    pub se_radius: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            seeds: SeedSpec::auto(),
            se_radius: DEFAULT_SE_RADIUS,
        }
    }
}

/// Full segmentation with the default structuring-element radius.
pub fn segment(img: &RgbImage, seeds: &SeedSpec) -> Result<BinaryMask> {
    segment_with(
        img,
        &SegmentParams {
            seeds: *seeds,
            se_radius: DEFAULT_SE_RADIUS,
        },
    )
}

pub fn segment_with(img: &RgbImage, params: &SegmentParams) -> Result<BinaryMask> {
    let lab = srgb_to_lab(img);
    let (lesion, skin) = estimate_markers(&lab, &params.seeds)?;
    let raw = classify_pixels(&lab, &lesion, &skin);
    Ok(postprocess(&raw, params.se_radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::rgb_to_lab;
    use crate::morphology::{label_components, Connectivity};

    const RED: [u8; 3] = [200, 30, 40];
    const GRAY: [u8; 3] = [128, 128, 128];

    fn disk_mask(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            dx * dx + dy * dy <= r * r
        })
        .unwrap()
    }

    #[test]
    fn constant_image_gives_degenerate_markers() {
        let color = [150, 90, 70];
        let img = RgbImage::filled(40, 30, color).unwrap();
        let lab = srgb_to_lab(&img);
        let err = estimate_markers(&lab, &SeedSpec::manual(20.0, 15.0, 5.0)).unwrap_err();
        let expected = rgb_to_lab(color);
        match err {
            Error::DegenerateMarkers { lesion, skin, .. } => {
                assert_eq!(lesion.source, MarkerSource::Manual);
                assert!((lesion.a_star - expected.a).abs() < 1e-9);
                assert!((lesion.b_star - expected.b).abs() < 1e-9);
                assert!((lesion.a_star - skin.a_star).abs() < 1e-9);
                assert!((lesion.b_star - skin.b_star).abs() < 1e-9);
            }
            other => panic!("expected degenerate markers, got {other:?}"),
        }
        assert!(matches!(
            segment(&img, &SeedSpec::auto()),
            Err(Error::DegenerateMarkers { .. })
        ));
    }

    #[test]
    fn auto_markers_on_red_disk() {
        let (w, h) = (100, 80);
        let disk = disk_mask(w, h, 49.5, 39.5, 25.0);
        let img = RgbImage::from_fn(w, h, |x, y| if disk.get(x, y) { RED } else { GRAY }).unwrap();
        let (lesion, skin) = estimate_markers(&srgb_to_lab(&img), &SeedSpec::auto()).unwrap();
        let red = rgb_to_lab(RED);
        // center disk r = 12 lies entirely inside the red disk; the frame is all gray
        assert!((lesion.a_star - red.a).abs() < 0.5 && (lesion.b_star - red.b).abs() < 0.5);
        assert!(skin.a_star.abs() < 0.5 && skin.b_star.abs() < 0.5);
        assert_eq!(lesion.source, MarkerSource::AutoCenter);
        assert_eq!(skin.source, MarkerSource::AutoBorder);
    }

    #[test]
    fn manual_disk_must_fit() {
        let img = RgbImage::filled(20, 20, GRAY).unwrap();
        let lab = srgb_to_lab(&img);
        assert!(matches!(
            estimate_markers(&lab, &SeedSpec::manual(2.0, 10.0, 5.0)),
            Err(Error::SeedOutOfBounds(_))
        ));
        assert!(matches!(
            estimate_markers(&lab, &SeedSpec::manual(10.0, 10.0, 0.5)),
            Err(Error::InvalidInput(_))
        ));
        let no_disk = SeedSpec {
            mode: SeedMode::Manual,
            lesion_disk: None,
            skin_band: None,
        };
        assert!(estimate_markers(&lab, &no_disk).is_err());
    }

    #[test]
    fn three_four_five_pixel_goes_to_lesion() {
        let lesion = ColorMarker::new(0.0, 0.0, MarkerSource::Manual);
        let skin = ColorMarker::new(10.0, 10.0, MarkerSource::Manual);
        assert_eq!(lesion.distance(3.0, 4.0), 5.0);
        assert!((skin.distance(3.0, 4.0) - 85f64.sqrt()).abs() < 1e-12);
        let lab = LabImage::from_ab(1, 1, &[(3.0, 4.0)]);
        assert!(classify_pixels(&lab, &lesion, &skin).get(0, 0));
    }

    #[test]
    fn equidistant_pixel_goes_to_skin() {
        let lesion = ColorMarker::new(-2.0, 0.0, MarkerSource::Manual);
        let skin = ColorMarker::new(2.0, 0.0, MarkerSource::Manual);
        let lab = LabImage::from_ab(2, 1, &[(0.0, 7.0), (0.0, -3.0)]);
        assert_eq!(classify_pixels(&lab, &lesion, &skin).lesion_count(), 0);
    }

    #[test]
    fn two_color_partition_is_recovered_by_brute_force() {
        let (w, h) = (17, 11);
        let truth = BinaryMask::from_fn(w, h, |x, y| (x * 3 + y * 5) % 7 < 3).unwrap();
        let img = RgbImage::from_fn(w, h, |x, y| if truth.get(x, y) { RED } else { GRAY }).unwrap();
        let lab = srgb_to_lab(&img);
        let (r, g) = (rgb_to_lab(RED), rgb_to_lab(GRAY));
        let lesion = ColorMarker::new(r.a, r.b, MarkerSource::Manual);
        let skin = ColorMarker::new(g.a, g.b, MarkerSource::Manual);
        let mask = classify_pixels(&lab, &lesion, &skin);
        // brute force: enumerate every pixel's two distances
        for y in 0..h {
            for x in 0..w {
                let p = lab.get(x, y);
                let dl = ((p.a - r.a).powi(2) + (p.b - r.b).powi(2)).sqrt();
                let ds = ((p.a - g.a).powi(2) + (p.b - g.b).powi(2)).sqrt();
                assert_eq!(mask.get(x, y), dl < ds);
                assert_eq!(mask.get(x, y), truth.get(x, y));
            }
        }
    }

    #[test]
    fn lightness_offset_does_not_change_labels() {
        let img = RgbImage::from_fn(20, 20, |x, y| [(x * 12) as u8, (y * 12) as u8, 90]).unwrap();
        let lab = srgb_to_lab(&img);
        let lesion = ColorMarker::new(20.0, 10.0, MarkerSource::Manual);
        let skin = ColorMarker::new(-5.0, 30.0, MarkerSource::Manual);
        let base = classify_pixels(&lab, &lesion, &skin);
        let shifted = lab.map(|mut p| {
            p.l += 17.25;
            p
        });
        assert_eq!(classify_pixels(&shifted, &lesion, &skin), base);
    }

    #[test]
    fn swapping_markers_complements_off_ties() {
        let img = RgbImage::from_fn(20, 20, |x, y| [(x * 12) as u8, (y * 12) as u8, 90]).unwrap();
        let lab = srgb_to_lab(&img);
        let lesion = ColorMarker::new(20.0, 10.0, MarkerSource::Manual);
        let skin = ColorMarker::new(-5.0, 30.0, MarkerSource::Manual);
        let a = classify_pixels(&lab, &lesion, &skin);
        let b = classify_pixels(&lab, &skin, &lesion);
        for (i, p) in lab.pixels().iter().enumerate() {
            if lesion.distance(p.a, p.b) != skin.distance(p.a, p.b) {
                assert_ne!(a.labels()[i], b.labels()[i]);
            }
        }
    }

    #[test]
    fn postprocess_keeps_solid_disk() {
        let m = disk_mask(60, 60, 30.0, 30.0, 15.0);
        assert_eq!(postprocess(&m, 3), m);
    }

    #[test]
    fn postprocess_drops_specks() {
        let disk = disk_mask(60, 60, 30.0, 30.0, 15.0);
        let mut noisy = disk.clone();
        for (x, y) in [(2, 2), (57, 3), (5, 50), (55, 55), (40, 4)] {
            noisy.set(x, y, true);
        }
        assert_eq!(postprocess(&noisy, 3), disk);
    }

    #[test]
    fn postprocess_fills_interior_hole() {
        let disk = disk_mask(60, 60, 30.0, 30.0, 15.0);
        let mut holed = disk.clone();
        for y in 29..32 {
            for x in 29..32 {
                holed.set(x, y, false);
            }
        }
        assert_eq!(postprocess(&holed, 3), disk);
    }

    #[test]
    fn postprocess_empty_and_tiny_inputs() {
        let empty = BinaryMask::empty(10, 10).unwrap();
        assert_eq!(postprocess(&empty, 3), empty);
        // a 2x2 blob does not survive the opening: fall back to the largest raw component
        let tiny = BinaryMask::from_fn(10, 10, |x, y| (4..6).contains(&x) && (4..6).contains(&y) || (x, y) == (0, 0)).unwrap();
        let out = postprocess(&tiny, 3);
        assert_eq!(out.lesion_count(), 4);
        assert_eq!(label_components(&out, Connectivity::Eight).count(), 1);
    }

    #[test]
    fn relabeling_is_stable() {
        let img = RgbImage::from_fn(30, 30, |x, y| [(x * 8) as u8, (y * 8) as u8, 60]).unwrap();
        let lab = srgb_to_lab(&img);
        let lesion = ColorMarker::new(30.0, 20.0, MarkerSource::Manual);
        let skin = ColorMarker::new(0.0, 0.0, MarkerSource::Manual);
        let m1 = classify_pixels(&lab, &lesion, &skin);
        let m2 = classify_pixels(&lab, &lesion, &skin);
        assert_eq!(m1, m2);
    }
}
