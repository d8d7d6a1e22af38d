//! Shape descriptors of a single lesion region.
//!
//! All computations run in a local frame anchored at the mask's bounding box,
//! so translating the lesion on the canvas leaves every value bit-identical.

use std::f64::consts::PI;

use crate::dataset::BinaryMask;
use crate::error::{Error, Result};
use crate::morphology::{label_components, Connectivity};

/// Outer boundary of a lesion region as 8-connected pixel positions.
///
/// Counterclockwise as displayed (y axis pointing down), starting at the
/// top-most, left-most lesion pixel. The closing step from the last point back
/// to the first is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<(i64, i64)>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Arc length of the closed chain: 1 per axis step, √2 per diagonal step.
    pub fn perimeter(&self) -> f64 {
        closed_length(&self.points)
    }
}

fn closed_length(points: &[(i64, i64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            (((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as f64).sqrt()
        })
        .sum()
}

// Clockwise on screen, starting west.
const DIRS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(d: (i64, i64)) -> usize {
    DIRS.iter()
        .position(|&v| v == d)
        .expect("neighbor offset is a unit 8-step")
}

/// Moore-neighbor tracing of the outer boundary of the component containing
/// the first lesion pixel in raster order.
pub fn trace_contour(mask: &BinaryMask) -> Result<Contour> {
    let start = mask
        .labels()
        .iter()
        .position(|&l| l)
        .ok_or(Error::NoLesion)?;
    let w = mask.width();
    let s = ((start % w) as i64, (start / w) as i64);
    let lesion = |p: (i64, i64)| mask.get_signed(p.0, p.1);

    // Returns the next boundary pixel and the direction from it to its backtrack.
    let step = |cur: (i64, i64), back: usize| -> Option<((i64, i64), usize)> {
        for k in 1..=8 {
            let d = (back + k) % 8;
            let n = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
            if lesion(n) {
                let prev = DIRS[(d + 7) % 8];
                let rel = (prev.0 - DIRS[d].0, prev.1 - DIRS[d].1);
                return Some((n, dir_index(rel)));
            }
        }
        None
    };

    let mut points = vec![s];
    let Some((first, mut back)) = step(s, 0) else {
        return Ok(Contour { points });
    };
    let mut cur = first;
    points.push(first);
    // Stop when the start pixel is about to repeat its first move.
    let limit = 4 * mask.labels().len() + 8;
    loop {
        let (next, nb) = step(cur, back).expect("a traced pixel has a lesion neighbor");
        if cur == s && next == first {
            break;
        }
        points.push(next);
        cur = next;
        back = nb;
        if points.len() > limit {
            unreachable!("boundary trace failed to close");
        }
    }
    if points.len() > 1 && *points.last().unwrap() == s {
        points.pop();
    }
    points[1..].reverse();
    Ok(Contour { points })
}

/// The 17 shape descriptors of one lesion.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeFeatures {
    pub area: f64,
    pub perimeter: f64,
    pub compactness: f64,
    pub asymmetry: f64,
    pub aspect_ratio: f64,
    pub eccentricity: f64,
    pub bending_energy: f64,
    pub contour_moment_1: f64,
    pub contour_moment_2: f64,
    pub contour_moment_3: f64,
    pub hu_1: f64,
    pub hu_2: f64,
    pub hu_3: f64,
    pub hull_area: f64,
    pub hull_perimeter: f64,
    pub convexity: f64,
    pub solidity: f64,
}

impl ShapeFeatures {
    pub const NAMES: [&'static str; 17] = [
        "area",
        "perimeter",
        "compactness",
        "asymmetry",
        "aspect_ratio",
        "eccentricity",
        "bending_energy",
        "contour_moment_1",
        "contour_moment_2",
        "contour_moment_3",
        "hu_1",
        "hu_2",
        "hu_3",
        "hull_area",
        "hull_perimeter",
        "convexity",
        "solidity",
    ];

    pub fn values(&self) -> [f64; 17] {
        [
            self.area,
            self.perimeter,
            self.compactness,
            self.asymmetry,
            self.aspect_ratio,
            self.eccentricity,
            self.bending_energy,
            self.contour_moment_1,
            self.contour_moment_2,
            self.contour_moment_3,
            self.hu_1,
            self.hu_2,
            self.hu_3,
            self.hull_area,
            self.hull_perimeter,
            self.convexity,
            self.solidity,
        ]
    }
}

pub const BENDING_SAMPLES: usize = 128;
pub const BENDING_SIGMA: f64 = 2.0;

/// Lesion pixels in bounding-box coordinates plus a local occupancy grid.
struct Region {
    pixels: Vec<(i64, i64)>,
    width: usize,
    height: usize,
    grid: Vec<bool>,
    origin: (i64, i64),
}

impl Region {
    fn from_mask(mask: &BinaryMask) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                if mask.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        let (width, height) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut grid = vec![false; width * height];
        let mut pixels = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                if mask.get(x, y) {
                    let (lx, ly) = (x - x0, y - y0);
                    grid[ly * width + lx] = true;
                    pixels.push((lx as i64, ly as i64));
                }
            }
        }
        Self {
            pixels,
            width,
            height,
            grid,
            origin: (x0 as i64, y0 as i64),
        }
    }

    fn at(&self, x: i64, y: i64) -> f64 {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            0.0
        } else if self.grid[y as usize * self.width + x as usize] {
            1.0
        } else {
            0.0
        }
    }

    /// Bilinear interpolation of the occupancy indicator.
    fn sample(&self, x: f64, y: f64) -> f64 {
        let (fx, fy) = (x.floor(), y.floor());
        let (tx, ty) = (x - fx, y - fy);
        let (ix, iy) = (fx as i64, fy as i64);
        let mut v = 0.0;
        for (dx, wx) in [(0, 1.0 - tx), (1, tx)] {
            for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
                let w = wx * wy;
                if w != 0.0 {
                    v += w * self.at(ix + dx, iy + dy);
                }
            }
        }
        v
    }
}

/// Central moments up to order 3, in the local frame.
struct Moments {
    area: f64,
    cx: f64,
    cy: f64,
    mu: [[f64; 4]; 4],
}

impl Moments {
    fn of(pixels: &[(i64, i64)]) -> Self {
        let n = pixels.len() as f64;
        let (sx, sy) = pixels
            .iter()
            .fold((0i64, 0i64), |(a, b), &(x, y)| (a + x, b + y));
        let (cx, cy) = (sx as f64 / n, sy as f64 / n);
        let mut mu = [[0.0; 4]; 4];
        for &(x, y) in pixels {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let xp = [1.0, dx, dx * dx, dx * dx * dx];
            let yp = [1.0, dy, dy * dy, dy * dy * dy];
            for p in 0..4 {
                for q in 0..4 - p {
                    mu[p][q] += xp[p] * yp[q];
                }
            }
        }
        Self { area: n, cx, cy, mu }
    }

    fn eta(&self, p: usize, q: usize) -> f64 {
        self.mu[p][q] / self.area.powf(1.0 + (p + q) as f64 / 2.0)
    }

    /// Eigenvalues (λ₊, λ₋) of the covariance matrix.
    fn eigen(&self) -> (f64, f64) {
        let a = self.mu[2][0] / self.area;
        let b = self.mu[1][1] / self.area;
        let c = self.mu[0][2] / self.area;
        let mid = (a + c) / 2.0;
        let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
        (mid + rad, (mid - rad).max(0.0))
    }

    /// Unit directions of the two principal axes.
    fn axes(&self) -> [(f64, f64); 2] {
        if self.mu[1][1] == 0.0 {
            return [(1.0, 0.0), (0.0, 1.0)];
        }
        let theta = 0.5 * (2.0 * self.mu[1][1]).atan2(self.mu[2][0] - self.mu[0][2]);
        let (s, c) = theta.sin_cos();
        [(c, s), (-s, c)]
    }
}

fn reflect(p: (f64, f64), c: (f64, f64), u: (f64, f64)) -> (f64, f64) {
    let (dx, dy) = (p.0 - c.0, p.1 - c.1);
    let t = dx * u.0 + dy * u.1;
    (c.0 + 2.0 * t * u.0 - dx, c.1 + 2.0 * t * u.1 - dy)
}

/// |M Δ R(M)| for the reflection R about the line through `c` along `u`,
/// with R(M) resampled bilinearly on the pixel lattice.
fn reflected_difference(region: &Region, c: (f64, f64), u: (f64, f64)) -> f64 {
    let mut diff = 0.0;
    for &(x, y) in &region.pixels {
        let r = reflect((x as f64, y as f64), c, u);
        diff += 1.0 - region.sample(r.0, r.1);
    }
    // skin pixels whose mirror image touches the region
    let corners = [
        (-1.0, -1.0),
        (region.width as f64, -1.0),
        (-1.0, region.height as f64),
        (region.width as f64, region.height as f64),
    ];
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in corners {
        let r = reflect(p, c, u);
        lo_x = lo_x.min(r.0);
        lo_y = lo_y.min(r.1);
        hi_x = hi_x.max(r.0);
        hi_y = hi_y.max(r.1);
    }
    for y in lo_y.floor() as i64..=hi_y.ceil() as i64 {
        for x in lo_x.floor() as i64..=hi_x.ceil() as i64 {
            if region.at(x, y) == 1.0 {
                continue;
            }
            let r = reflect((x as f64, y as f64), c, u);
            diff += region.sample(r.0, r.1);
        }
    }
    diff
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Resamples the closed polygon to `n` points equally spaced in arc length.
fn resample_closed(points: &[(f64, f64)], n: usize) -> Vec<(f64, f64)> {
    let m = points.len();
    let seg: Vec<f64> = (0..m)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % m]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        })
        .collect();
    let total: f64 = seg.iter().sum();
    let mut out = Vec::with_capacity(n);
    let (mut i, mut acc) = (0usize, 0.0);
    for k in 0..n {
        let target = total * k as f64 / n as f64;
        while i < m - 1 && acc + seg[i] < target {
            acc += seg[i];
            i += 1;
        }
        let t = if seg[i] > 0.0 {
            ((target - acc) / seg[i]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (points[i], points[(i + 1) % m]);
        out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
    }
    out
}

/// Mean squared curvature of the smoothed contour resampled from `start`.
fn bending_energy_from(pts: &[(f64, f64)], start: usize, kernel: &[f64]) -> f64 {
    let rotated: Vec<(f64, f64)> = pts[start..].iter().chain(&pts[..start]).copied().collect();
    let n = BENDING_SAMPLES;
    let sampled = resample_closed(&rotated, n);
    let r = (kernel.len() / 2) as i64;
    let smooth: Vec<(f64, f64)> = (0..n as i64)
        .map(|i| {
            let mut acc = (0.0, 0.0);
            for (j, w) in kernel.iter().enumerate() {
                let idx = (i + j as i64 - r).rem_euclid(n as i64) as usize;
                acc.0 += w * sampled[idx].0;
                acc.1 += w * sampled[idx].1;
            }
            acc
        })
        .collect();
    let mut sum = 0.0;
    for i in 0..n {
        let (p, c, q) = (smooth[(i + n - 1) % n], smooth[i], smooth[(i + 1) % n]);
        let (dx, dy) = ((q.0 - p.0) / 2.0, (q.1 - p.1) / 2.0);
        let (ddx, ddy) = (q.0 - 2.0 * c.0 + p.0, q.1 - 2.0 * c.1 + p.1);
        let speed2 = dx * dx + dy * dy;
        if speed2 > 0.0 {
            let k = (dx * ddy - dy * ddx) / speed2.powf(1.5);
            sum += k * k;
        }
    }
    sum / n as f64
}

/// Averaged over every contour vertex as the resampling origin, so the value
/// does not depend on where the trace started.
fn bending_energy(contour: &[(i64, i64)]) -> f64 {
    if contour.len() < 2 {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = contour.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
    let kernel = gaussian_kernel(BENDING_SIGMA);
    let total: f64 = (0..pts.len()).map(|s| bending_energy_from(&pts, s, &kernel)).sum();
    total / pts.len() as f64
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull by Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn shoelace(poly: &[(i64, i64)]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: i64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice.abs() as f64 / 2.0
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Number of pixel centers inside or on the hull polygon, by Pick's theorem
/// `I + B = A + B/2 + 1`. Degenerate hulls (point, segment) are handled by
/// the same formula with A = 0.
fn lattice_count(hull: &[(i64, i64)]) -> f64 {
    let n = hull.len();
    let boundary: i64 = if n < 2 {
        0
    } else {
        (0..n)
            .map(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                gcd((a.0 - b.0).abs(), (a.1 - b.1).abs())
            })
            .sum()
    };
    shoelace(hull) + boundary as f64 / 2.0 + 1.0
}

/// Computes all shape descriptors of a single-component lesion mask.
pub fn compute_shape_features(mask: &BinaryMask) -> Result<ShapeFeatures> {
    match label_components(mask, Connectivity::Eight).count() {
        0 => return Err(Error::NoLesion),
        1 => {}
        n => return Err(Error::MultipleComponents(n)),
    }
    let region = Region::from_mask(mask);
    let contour: Vec<(i64, i64)> = trace_contour(mask)?
        .points
        .into_iter()
        .map(|(x, y)| (x - region.origin.0, y - region.origin.1))
        .collect();

    let mom = Moments::of(&region.pixels);
    let area = mom.area;
    let perimeter = closed_length(&contour);
    let compactness = perimeter * perimeter / (4.0 * PI * area);

    let (l_major, l_minor) = mom.eigen();
    let degenerate = !(l_major > 0.0) || l_minor <= 1e-12 * l_major;
    let (aspect_ratio, eccentricity) = if degenerate {
        (1.0, 0.0)
    } else {
        ((l_major / l_minor).sqrt(), (1.0 - l_minor / l_major).max(0.0).sqrt())
    };

    let centroid = (mom.cx, mom.cy);
    let asymmetry = mom
        .axes()
        .iter()
        .map(|&u| reflected_difference(&region, centroid, u) / (2.0 * area))
        .sum::<f64>()
        / 2.0;

    let dists: Vec<f64> = contour
        .iter()
        .map(|&(x, y)| ((x as f64 - mom.cx).powi(2) + (y as f64 - mom.cy).powi(2)).sqrt())
        .collect();
    let mean_d = dists.iter().sum::<f64>() / dists.len() as f64;
    let contour_moment = |k: i32| {
        if mean_d <= 0.0 {
            return 0.0;
        }
        let m = dists.iter().map(|d| (d - mean_d).powi(k)).sum::<f64>() / dists.len() as f64;
        m / mean_d.powi(k)
    };

    let (e20, e02, e11) = (mom.eta(2, 0), mom.eta(0, 2), mom.eta(1, 1));
    let (e30, e03, e21, e12) = (mom.eta(3, 0), mom.eta(0, 3), mom.eta(2, 1), mom.eta(1, 2));
    let hu_1 = e20 + e02;
    let hu_2 = (e20 - e02).powi(2) + 4.0 * e11 * e11;
    let hu_3 = (e30 - 3.0 * e12).powi(2) + (3.0 * e21 - e03).powi(2);

    let hull = convex_hull(&contour);
    let hull_perimeter = closed_length(&hull);
    let hull_area = lattice_count(&hull);
    let convexity = if perimeter > 0.0 {
        hull_perimeter / perimeter
    } else {
        1.0
    };
    let solidity = area / hull_area;

    Ok(ShapeFeatures {
        area,
        perimeter,
        compactness,
        asymmetry,
        aspect_ratio,
        eccentricity,
        bending_energy: bending_energy(&contour),
        contour_moment_1: contour_moment(1),
        contour_moment_2: contour_moment(2),
        contour_moment_3: contour_moment(3),
        hu_1,
        hu_2,
        hu_3,
        hull_area,
        hull_perimeter,
        convexity,
        solidity,
    })
}
