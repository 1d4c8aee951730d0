//! Procedural frost: elongated multi-octave value noise, thresholded into ice
//! patches and alpha-blended over the image.

use super::Raster;
use crate::rng::CounterRng;

const STREAM_FROST: u64 = 0x6672_6F73_74; // "frost"
const OCTAVES: u32 = 4;
const BASE_CELL: f64 = 24.0;
/// Streak elongation: lattice cells are this many times longer along the
/// streak direction than across it.
const STRETCH: f64 = 3.0;
/// Half-width of the soft edge around the coverage threshold.
const EDGE: f64 = 0.08;
/// Per-channel ice tint for RGB (slightly blue).
const TINT: [f64; 3] = [0.92, 0.97, 1.0];

#[inline]
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn lattice(rng: &CounterRng, i: i64, j: i64) -> f64 {
    rng.substream(i as u64).uniform_at(j as u64)
}

fn value_noise(rng: &CounterRng, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (i, j) = (x0 as i64, y0 as i64);
    let (tx, ty) = (smoothstep(x - x0), smoothstep(y - y0));
    let a = lattice(rng, i, j);
    let b = lattice(rng, i + 1, j);
    let c = lattice(rng, i, j + 1);
    let d = lattice(rng, i + 1, j + 1);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

/// Fractal noise in `[0, 1]` for a `width × height` frame. Each octave halves
/// the cell size and turns the streak direction by 60°.
pub fn frost_field(width: usize, height: usize, seed: u64) -> Vec<f64> {
    let root = CounterRng::new(seed, STREAM_FROST);
    let base_angle = root.uniform_at(u64::MAX) * std::f64::consts::PI;
    let octaves: Vec<(CounterRng, f64, f64, f64, f64)> = (0..OCTAVES)
        .map(|o| {
            let cell = BASE_CELL / f64::from(1 << o);
            let (s, c) = (base_angle + f64::from(o) * std::f64::consts::FRAC_PI_3).sin_cos();
            (root.substream(u64::from(o)), cell, s, c, 0.5f64.powi(o as i32))
        })
        .collect();
    let total_amp: f64 = octaves.iter().map(|o| o.4).sum();

    let mut field = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let mut v = 0.0;
            for (rng, cell, s, c, amp) in &octaves {
                let along = (xf * c + yf * s) / (cell * STRETCH);
                let across = (-xf * s + yf * c) / cell;
                v += amp * value_noise(rng, along, across);
            }
            field.push(v / total_amp);
        }
    }
    field
}

/// Blends ice over `img`. `coverage` lowers the noise threshold above which
/// ice forms, `opacity` scales how much it hides the image.
pub fn frost(img: &Raster, opacity: f64, coverage: f64, seed: u64) -> Raster {
    let field = frost_field(img.width, img.height, seed);
    let sparkle = frost_field(img.width, img.height, seed ^ 0x5EED);
    // Fractal sums concentrate around 0.5, so map coverage onto the band
    // where most of the field's mass lies.
    let threshold = 0.75 - 0.5 * coverage;
    let ch = img.channels;
    let mut data = Vec::with_capacity(img.data.len());
    for (p, (&n, &s)) in field.iter().zip(&sparkle).enumerate() {
        let mask = smoothstep((n - threshold + EDGE) / (2.0 * EDGE));
        let alpha = opacity * mask;
        let brightness = 0.75 + 0.25 * s;
        for c in 0..ch {
            let ice = if ch == 3 { brightness * TINT[c] } else { brightness };
            let v = img.data[p * ch + c];
            data.push((v * (1.0 - alpha) + ice * alpha).clamp(0.0, 1.0));
        }
    }
    Raster { data, ..img.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_in_unit_range_and_seeded() {
        let a = frost_field(64, 32, 1);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(a, frost_field(64, 32, 1));
        assert_ne!(a, frost_field(64, 32, 2));
    }

    #[test]
    fn coverage_grows_ice_area() {
        let img = Raster::from_data(128, 64, 1, vec![0.1; 128 * 64]).unwrap();
        let iced = |cov| {
            frost(&img, 0.65, cov, 9)
                .data
                .iter()
                .filter(|v| **v > 0.2)
                .count()
        };
        let areas: Vec<usize> = [0.3, 0.5, 0.7].into_iter().map(iced).collect();
        assert!(areas[0] < areas[1] && areas[1] < areas[2], "{areas:?}");
        assert!(areas[0] > 0);
    }
}
