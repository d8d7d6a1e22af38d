//! Binary morphology and connected components on [`BinaryMask`].
//!
//! Structuring elements are digital disks `{(dx, dy) : dx² + dy² ≤ r²}`.
//! Erosion treats pixels outside the canvas as lesion and dilation treats
//! them as skin, so opening never adds and closing never removes pixels.

use std::collections::VecDeque;

use crate::dataset::BinaryMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        }
    }
}

/// Half-widths of the disk rows for dy = -r..=r.
fn disk_half_widths(radius: usize) -> Vec<(i64, usize)> {
    let r = radius as i64;
    (-r..=r)
        .map(|dy| {
            let mut w = 0usize;
            while ((w + 1) * (w + 1)) as i64 + dy * dy <= r * r {
                w += 1;
            }
            (dy, w)
        })
        .collect()
}

fn row_prefix_sums(mask: &BinaryMask) -> Vec<u32> {
    let (w, h) = (mask.width(), mask.height());
    let mut prefix = vec![0u32; (w + 1) * h];
    for y in 0..h {
        let row = &mask.labels()[y * w..(y + 1) * w];
        let out = &mut prefix[y * (w + 1)..(y + 1) * (w + 1)];
        for x in 0..w {
            out[x + 1] = out[x] + row[x] as u32;
        }
    }
    prefix
}

fn morph(mask: &BinaryMask, radius: usize, erode: bool) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width(), mask.height());
    let prefix = row_prefix_sums(mask);
    let spans = disk_half_widths(radius);
    let mut out = mask.clone();
    for y in 0..h {
        for x in 0..w {
            let mut value = erode;
            for &(dy, hw) in &spans {
                let yy = y as i64 + dy;
                if yy < 0 || yy >= h as i64 {
                    continue;
                }
                let lo = x.saturating_sub(hw);
                let hi = (x + hw).min(w - 1);
                let row = &prefix[yy as usize * (w + 1)..];
                let count = row[hi + 1] - row[lo];
                if erode && count as usize != hi + 1 - lo {
                    value = false;
                    break;
                }
                if !erode && count > 0 {
                    value = true;
                    break;
                }
            }
            out.set(x, y, value);
        }
    }
    out
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    morph(mask, radius, true)
}

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    morph(mask, radius, false)
}

pub fn open(mask: &BinaryMask, radius: usize) -> BinaryMask {
    dilate(&erode(mask, radius), radius)
}

pub fn close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    erode(&dilate(mask, radius), radius)
}

/// Connected lesion components. Labels are 1-based in raster order of each
/// component's first pixel; 0 marks skin.
#[derive(Clone, Debug)]
pub struct Components {
    pub labels: Vec<u32>,
    /// `sizes[k]` is the pixel count of label `k + 1`.
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Label of the largest component; ties go to the lowest label.
    pub fn largest(&self) -> Option<u32> {
        let mut best: Option<(usize, u32)> = None;
        for (k, &s) in self.sizes.iter().enumerate() {
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, k as u32 + 1));
            }
        }
        best.map(|(_, l)| l)
    }
}

fn flood(
    mask: &BinaryMask,
    target: bool,
    conn: Connectivity,
    labels: &mut [u32],
    start: usize,
    label: u32,
) -> usize {
    let w = mask.width() as i64;
    let h = mask.height() as i64;
    let mut queue = VecDeque::new();
    labels[start] = label;
    queue.push_back(start);
    let mut size = 0;
    while let Some(i) = queue.pop_front() {
        size += 1;
        let (x, y) = ((i as i64) % w, (i as i64) / w);
        for &(dx, dy) in conn.offsets() {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let j = (ny * w + nx) as usize;
            if labels[j] == 0 && mask.labels()[j] == target {
                labels[j] = label;
                queue.push_back(j);
            }
        }
    }
    size
}

pub fn label_components(mask: &BinaryMask, conn: Connectivity) -> Components {
    let mut labels = vec![0u32; mask.labels().len()];
    let mut sizes = Vec::new();
    for i in 0..labels.len() {
        if mask.labels()[i] && labels[i] == 0 {
            let label = sizes.len() as u32 + 1;
            sizes.push(flood(mask, true, conn, &mut labels, i, label));
        }
    }
    Components { labels, sizes }
}

/// Keeps only the largest 8-connected lesion component.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let comps = label_components(mask, Connectivity::Eight);
    let Some(keep) = comps.largest() else {
        return mask.clone();
    };
    let mut out = mask.clone();
    for (v, &l) in out.labels_mut().iter_mut().zip(&comps.labels) {
        *v = l == keep;
    }
    out
}

/// Components of `mask` (8-connected) that contain at least one pixel of
/// `marker`; everything else becomes skin.
pub fn reconstruct(marker: &BinaryMask, mask: &BinaryMask) -> BinaryMask {
    let comps = label_components(mask, Connectivity::Eight);
    let mut keep = vec![false; comps.count() + 1];
    for (&m, &l) in marker.labels().iter().zip(&comps.labels) {
        if m && l > 0 {
            keep[l as usize] = true;
        }
    }
    let mut out = mask.clone();
    for (v, &l) in out.labels_mut().iter_mut().zip(&comps.labels) {
        *v = l > 0 && keep[l as usize];
    }
    out
}

/// Turns skin regions that are not 4-connected to the canvas border into lesion.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut reached = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            let on_border = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            let i = y * w + x;
            if on_border && !mask.labels()[i] && reached[i] == 0 {
                flood(mask, false, Connectivity::Four, &mut reached, i, 1);
            }
        }
    }
    let mut out = mask.clone();
    for (v, &r) in out.labels_mut().iter_mut().zip(&reached) {
        if r == 0 {
            *v = true;
        }
    }
    out
}
