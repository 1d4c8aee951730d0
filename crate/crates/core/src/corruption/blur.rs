use super::Raster;

/// Mirror index into `[0, n)` without repeating the edge sample.
#[inline]
fn reflect(mut i: i64, n: usize) -> usize {
    let n = n as i64;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

/// Box average along a centred line of `length` taps at `angle_deg`
/// (0 = horizontal, positive angles rotate toward +y). Borders reflect.
pub fn motion_blur(img: &Raster, length: usize, angle_deg: f64) -> Raster {
    let length = length.max(1);
    let half = (length as i64 - 1) / 2;
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let taps: Vec<(i64, i64)> = (-half..=half)
        .chain(if length % 2 == 0 { Some(half + 1) } else { None })
        .map(|k| ((k as f64 * cos).round() as i64, (k as f64 * sin).round() as i64))
        .collect();
    let n = taps.len() as f64;

    let (w, h, ch) = (img.width, img.height, img.channels);
    let mut data = vec![0.0; img.data.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for &(dx, dy) in &taps {
                    let sx = reflect(x as i64 + dx, w);
                    let sy = reflect(y as i64 + dy, h);
                    acc += img.at(sx, sy, c);
                }
                data[(y * w + x) * ch + c] = (acc / n).clamp(0.0, 1.0);
            }
        }
    }
    Raster { data, ..img.clone() }
}
