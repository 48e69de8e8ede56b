//! Procedural test images for desk-scale experiments.
//!
//! Each group draws a base canvas from its own palette of colours and shapes;
//! group members are mildly shifted crops of that canvas with a brightness
//! offset, in the spirit of near-duplicate photo benchmarks.

use etc_cbir_core::{Raster, SplitMix64};

/// Canvas edge before cropping.
const CANVAS: usize = 112;
/// Edge of every emitted image.
pub const IMAGE_SIZE: usize = 96;

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = (h / 60.0) % 6.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|ch| ((ch + m) * 255.0).round().clamp(0.0, 255.0) as u8)
}

fn palette(rng: &mut SplitMix64, n: usize) -> Vec<[u8; 3]> {
    (0..n)
        .map(|_| {
            let h = rng.next_f64() * 360.0;
            let s = 0.35 + 0.65 * rng.next_f64();
            let v = 0.25 + 0.75 * rng.next_f64();
            hsv_to_rgb(h, s, v)
        })
        .collect()
}

fn range(rng: &mut SplitMix64, lo: usize, hi: usize) -> usize {
    lo + rng.next_below((hi - lo) as u64) as usize
}

/// A canvas made of a background, rectangles, discs and stripe patches.
pub fn canvas(seed: u64) -> Raster {
    let mut rng = SplitMix64::new(seed);
    let colors = palette(&mut rng, 4);
    let mut img = Raster::filled(CANVAS, CANVAS, colors[0]);
    let shapes = range(&mut rng, 5, 9);
    for _ in 0..shapes {
        let color = colors[range(&mut rng, 1, colors.len())];
        let alt = colors[range(&mut rng, 0, colors.len())];
        let x0 = range(&mut rng, 0, CANVAS - 8);
        let y0 = range(&mut rng, 0, CANVAS - 8);
        let w = range(&mut rng, 12, 48).min(CANVAS - x0);
        let h = range(&mut rng, 12, 48).min(CANVAS - y0);
        let kind = rng.next_below(3);
        let period = range(&mut rng, 2, 7);
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                let inside = match kind {
                    0 => true,
                    1 => {
                        let (cx, cy) = (x0 as f64 + w as f64 / 2.0, y0 as f64 + h as f64 / 2.0);
                        let (rx, ry) = (w as f64 / 2.0, h as f64 / 2.0);
                        let dx = (x as f64 - cx) / rx;
                        let dy = (y as f64 - cy) / ry;
                        dx * dx + dy * dy <= 1.0
                    }
                    _ => true,
                };
                if !inside {
                    continue;
                }
                let px = if kind == 2 && ((x + y) / period) % 2 == 1 {
                    alt
                } else {
                    color
                };
                img.set_pixel(x, y, px);
            }
        }
    }
    // light sensor noise
    let mut data = img.into_data();
    for v in data.iter_mut() {
        let n = rng.next_below(7) as i32 - 3;
        *v = (*v as i32 + n).clamp(0, 255) as u8;
    }
    Raster::new(CANVAS, CANVAS, data).expect("canvas size is fixed")
}

/// A `IMAGE_SIZE` crop at `(dx, dy)` with every sample shifted by
/// `brightness`.
pub fn variant(base: &Raster, dx: usize, dy: usize, brightness: i32) -> Raster {
    let mut data = Vec::with_capacity(IMAGE_SIZE * IMAGE_SIZE * 3);
    for y in dy..dy + IMAGE_SIZE {
        for x in dx..dx + IMAGE_SIZE {
            for ch in base.pixel(x, y) {
                data.push((ch as i32 + brightness).clamp(0, 255) as u8);
            }
        }
    }
    Raster::new(IMAGE_SIZE, IMAGE_SIZE, data).expect("crop size is fixed")
}

#[derive(Debug, Clone)]
pub struct SynthImage {
    pub id: String,
    pub group: usize,
    pub raster: Raster,
}

/// `groups x per_group` images. Member 0 of each group is the unshifted
/// crop; the rest are shifted by up to 15 pixels with brightness offsets in
/// `[-20, 20]`.
pub fn corpus(groups: usize, per_group: usize, seed: u64) -> Vec<SynthImage> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(groups * per_group);
    for g in 0..groups {
        let base = canvas(rng.next_u64());
        for i in 0..per_group {
            let raster = if i == 0 {
                variant(&base, 0, 0, 0)
            } else {
                let dx = range(&mut rng, 0, CANVAS - IMAGE_SIZE);
                let dy = range(&mut rng, 0, CANVAS - IMAGE_SIZE);
                let b = rng.next_below(41) as i32 - 20;
                variant(&base, dx, dy, b)
            };
            out.push(SynthImage {
                id: format!("g{g:03}_{i}"),
                group: g,
                raster,
            });
        }
    }
    out
}

/// Independent training images (one crop per canvas).
pub fn training_set(count: usize, seed: u64) -> Vec<Raster> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| variant(&canvas(rng.next_u64()), 8, 8, 0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let a = corpus(2, 3, 7);
        let b = corpus(2, 3, 7);
        assert_eq!(a.len(), 6);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.raster, y.raster);
            assert_eq!(x.raster.width(), IMAGE_SIZE);
            assert!(x.raster.is_block_aligned());
        }
        assert_eq!(a[3].group, 1);
        assert_ne!(a[0].raster, a[3].raster);
    }

    #[test]
    fn hsv_primaries() {
        assert_eq!(hsv_to_rgb(0.0, 1.0, 1.0), [255, 0, 0]);
        assert_eq!(hsv_to_rgb(120.0, 1.0, 1.0), [0, 255, 0]);
        assert_eq!(hsv_to_rgb(240.0, 1.0, 1.0), [0, 0, 255]);
    }
}
