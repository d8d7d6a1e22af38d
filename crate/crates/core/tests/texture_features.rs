use melaseg::synthetic::Shape;
use melaseg::texture_features::{
    busyness, fuzzy_texture_spectrum, gray, FuzzySpectrum, GrayGrid, FTS_BINS,
};
use melaseg::{BinaryMask, RgbImage};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn grid(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> GrayGrid {
    let values = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| f(x, y))
        .collect();
    GrayGrid::new(w, h, values).unwrap()
}

fn full(w: usize, h: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| true).unwrap()
}

fn noise(w: usize, h: usize, seed: u64) -> GrayGrid {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values = (0..w * h).map(|_| rng.random::<u8>()).collect();
    GrayGrid::new(w, h, values).unwrap()
}

/// Literal per-pixel enumeration: fuzzy code of each neighbor, texture unit
/// for each of the four corner starts of the clockwise ring, smallest kept.
fn oracle_spectrum(g: &GrayGrid, mask: &BinaryMask, delta: f64) -> (Vec<u64>, Vec<f64>) {
    let ring = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];
    let mut counts = vec![0u64; FTS_BINS];
    let mut units = Vec::new();
    for y in 0..g.height() as i64 {
        for x in 0..g.width() as i64 {
            let inside = |dx: i64, dy: i64| mask.get_signed(x + dx, y + dy);
            if !inside(0, 0) || !ring.iter().all(|&(dx, dy)| inside(dx, dy)) {
                continue;
            }
            let v0 = g.get(x as usize, y as usize) as f64;
            let e: Vec<f64> = ring
                .iter()
                .map(|&(dx, dy)| {
                    let vi = g.get((x + dx) as usize, (y + dy) as usize) as f64;
                    if vi <= v0 - 2.0 * delta {
                        0.0
                    } else if vi >= v0 + 2.0 * delta {
                        2.0
                    } else {
                        1.0 + (vi - v0) / (2.0 * delta)
                    }
                })
                .collect();
            let mut best = f64::INFINITY;
            for start in [0, 2, 4, 6] {
                let u: f64 = (0..8).map(|i| e[(start + i) % 8] * 3f64.powi(i as i32)).sum();
                best = best.min(u);
            }
            let bin = ((best / 6560.0 * 64.0).floor() as usize).min(63);
            counts[bin] += 1;
            units.push(best);
        }
    }
    (counts, units)
}

/// Straight transcription of the busyness definition, float arithmetic.
fn oracle_busyness(g: &GrayGrid, mask: &BinaryMask, levels: usize) -> f64 {
    let q = |x: usize, y: usize| (g.get(x, y) as usize * levels / 256) as f64;
    let (w, h) = (g.width() as i64, g.height() as i64);
    let mut p = vec![0.0; levels];
    let mut s = vec![0.0; levels];
    let mut n = 0.0;
    for y in 0..h {
        for x in 0..w {
            if !mask.get_signed(x, y) {
                continue;
            }
            let level = q(x as usize, y as usize);
            p[level as usize] += 1.0;
            n += 1.0;
            let mut neighbors = Vec::new();
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if (dx, dy) != (0, 0) && mask.get_signed(x + dx, y + dy) {
                        neighbors.push(q((x + dx) as usize, (y + dy) as usize));
                    }
                }
            }
            if !neighbors.is_empty() {
                let avg = neighbors.iter().sum::<f64>() / neighbors.len() as f64;
                s[level as usize] += (level - avg).abs();
            }
        }
    }
    for v in &mut p {
        *v /= n;
    }
    let num: f64 = (0..levels).map(|i| p[i] * s[i]).sum();
    let mut den = 0.0;
    for i in 0..levels {
        for j in 0..levels {
            if p[i] > 0.0 && p[j] > 0.0 {
                den += (i as f64 * p[i] - j as f64 * p[j]).abs();
            }
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn checkerboard(n: usize) -> GrayGrid {
    grid(n, n, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 })
}

#[test]
fn noise_spectrum_matches_brute_force_enumeration() {
    let g = noise(16, 16, 99);
    let mask = full(16, 16);
    let s = fuzzy_texture_spectrum(&g, &mask, 10.0).unwrap();
    let (counts, units) = oracle_spectrum(&g, &mask, 10.0);
    assert_eq!(s.contributing, 14 * 14);
    for (h, c) in s.histogram.iter().zip(&counts) {
        assert_eq!(*h, *c as f64 / 196.0);
    }
    let mean = units.iter().map(|u| u / 6560.0).sum::<f64>() / 196.0;
    assert!((s.mean - mean).abs() < 1e-12);
    let constant = fuzzy_texture_spectrum(&grid(16, 16, |_, _| 90), &mask, 10.0).unwrap();
    assert!(s.entropy > constant.entropy);
    assert!((s.histogram.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn spectrum_on_an_irregular_mask_matches_brute_force() {
    let g = noise(60, 50, 5);
    let mask = Shape::Blob {
        cx: 30.0,
        cy: 25.0,
        r0: 18.0,
        harmonics: vec![(3, 0.2, 0.5)],
    }
    .rasterize(60, 50);
    let s = fuzzy_texture_spectrum(&g, &mask, 7.5).unwrap();
    let (counts, _) = oracle_spectrum(&g, &mask, 7.5);
    let n: u64 = counts.iter().sum();
    assert_eq!(s.contributing as u64, n);
    for (h, c) in s.histogram.iter().zip(&counts) {
        assert_eq!(*h, *c as f64 / n as f64);
    }
}

#[test]
fn four_by_four_checkerboard_busyness() {
    let g = checkerboard(4);
    let b = busyness(&g, &full(4, 4), 32).unwrap();
    // corner, edge and interior pixels deviate from their neighbor mean by
    // 62/3, 93/5 and 31/2; weighted by p = 1/2 and divided by 2·15.5
    let hand = 2201.0 / 465.0;
    assert!((b - hand).abs() < 1e-12, "{b} vs {hand}");
    assert!((b - oracle_busyness(&g, &full(4, 4), 32)).abs() < 1e-12);
}

#[test]
fn checkerboard_is_busier_than_two_blocks() {
    let blocks = grid(8, 8, |x, _| if x < 4 { 0 } else { 255 });
    let board = checkerboard(8);
    let mask = full(8, 8);
    let b_blocks = busyness(&blocks, &mask, 32).unwrap();
    let b_board = busyness(&board, &mask, 32).unwrap();
    assert!((b_blocks - oracle_busyness(&blocks, &mask, 32)).abs() < 1e-12);
    assert!((b_board - oracle_busyness(&board, &mask, 32)).abs() < 1e-12);
    assert!(b_blocks > 0.0 && b_board > b_blocks, "{b_blocks} {b_board}");
}

#[test]
fn two_level_busyness_is_unchanged_by_a_one_bin_offset() {
    let balanced = grid(8, 8, |x, _| if x % 2 == 0 { 40 } else { 160 });
    let shifted = grid(8, 8, |x, y| balanced.get(x, y) + 8);
    let a = busyness(&balanced, &full(8, 8), 32).unwrap();
    let b = busyness(&shifted, &full(8, 8), 32).unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn unbalanced_histograms_are_not_offset_invariant() {
    // the denominator Σ|i·p_i − j·p_j| depends on absolute levels unless the
    // occupied levels are equally likely
    let g = grid(8, 8, |x, y| if (x + 2 * y) % 4 == 0 { 40 } else { 160 });
    let shifted = grid(8, 8, |x, y| g.get(x, y) + 8);
    let a = busyness(&g, &full(8, 8), 32).unwrap();
    let b = busyness(&shifted, &full(8, 8), 32).unwrap();
    assert!((a - b).abs() > 1e-6, "{a} {b}");
}

#[test]
fn lesion_of_a_planted_image() {
    let img = RgbImage::from_fn(40, 40, |x, y| {
        if (x as f64 - 20.0).hypot(y as f64 - 20.0) < 12.0 {
            [90, 50, 40]
        } else {
            [220, 180, 160]
        }
    })
    .unwrap();
    let mask = Shape::disk(20.0, 20.0, 11.9).rasterize(40, 40);
    let g = gray(&img);
    let s: FuzzySpectrum = fuzzy_texture_spectrum(&g, &mask, 10.0).unwrap();
    assert_eq!(s.energy, 1.0);
    assert_eq!(busyness(&g, &mask, 32).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn texture_is_invariant_to_translation_and_quarter_turns(
        seed in any::<u64>(),
        r in 5.0f64..12.0,
        dx in 0usize..6,
        dy in 0usize..6,
    ) {
        let g = noise(34, 34, seed);
        let mask = Shape::disk(14.0, 14.0, r).rasterize(34, 34);
        let moved_mask = Shape::disk(14.0 + dx as f64, 14.0 + dy as f64, r).rasterize(34, 34);
        let moved = grid(34, 34, |x, y| {
            if x >= dx && y >= dy { g.get(x - dx, y - dy) } else { 0 }
        });
        let s0 = fuzzy_texture_spectrum(&g, &mask, 10.0).unwrap();
        let s1 = fuzzy_texture_spectrum(&moved, &moved_mask, 10.0).unwrap();
        prop_assert_eq!(&s0, &s1);
        let b0 = busyness(&g, &mask, 32).unwrap();
        prop_assert_eq!(b0, busyness(&moved, &moved_mask, 32).unwrap());

        let (gr, mr) = (g.rotate90(), mask.rotate90());
        let s2 = fuzzy_texture_spectrum(&gr, &mr, 10.0).unwrap();
        prop_assert_eq!(s0.histogram, s2.histogram);
        prop_assert!((s0.mean - s2.mean).abs() < 1e-9);
        prop_assert!((s0.variance - s2.variance).abs() < 1e-9);
        prop_assert!((b0 - busyness(&gr, &mr, 32).unwrap()).abs() < 1e-9);
        prop_assert!((b0 - oracle_busyness(&g, &mask, 32)).abs() < 1e-9 * b0.max(1.0));
    }
}
