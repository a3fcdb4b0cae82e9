use std::collections::VecDeque;

use super::{ContactMask, GrayImage};
use crate::error::{Error, Result};

/// Canny-style edge map: 3×3 Sobel gradient, non-maximum suppression along
/// the quantized gradient direction, then dual-threshold hysteresis with
/// 8-connectivity.
///
/// Thresholds apply to the raw Sobel magnitude, so a clean intensity step of
/// `d` gray levels produces a magnitude of `4d`. Borders are replicated.
pub fn edge_map(img: &GrayImage, low_thresh: f64, high_thresh: f64) -> Result<ContactMask> {
    if !(0.0..=255.0).contains(&low_thresh)
        || !(0.0..=255.0).contains(&high_thresh)
        || low_thresh >= high_thresh
    {
        return Err(Error::InvalidParameter(format!(
            "edge thresholds low={low_thresh} high={high_thresh}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let (mag, dir) = sobel(img);

    let mut thin = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let (dx, dy): (isize, isize) = match dir[i] {
                0 => (1, 0),
                1 => (1, 1),
                2 => (0, 1),
                _ => (1, -1),
            };
            let a = sample(&mag, w, h, x as isize + dx, y as isize + dy);
            let b = sample(&mag, w, h, x as isize - dx, y as isize - dy);
            if m >= a && m >= b {
                thin[i] = m;
            }
        }
    }

    let (low, high) = (low_thresh as f32, high_thresh as f32);
    let mut out = ContactMask::empty(w, h);
    let bits = out.bits_mut();
    let mut queue = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= high && !bits[i] {
            bits[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !bits[j] && thin[j] >= low {
                    bits[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(out)
}

fn sample(mag: &[f32], w: usize, h: usize, x: isize, y: isize) -> f32 {
    if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
        0.0
    } else {
        mag[y as usize * w + x as usize]
    }
}

/// Gradient magnitude and direction bin (0: horizontal, 1: down-right
/// diagonal, 2: vertical, 3: up-right diagonal) in image coordinates.
fn sobel(img: &GrayImage) -> (Vec<f32>, Vec<u8>) {
    let (w, h) = (img.width(), img.height());
    let data = img.data();
    let clamped = |x: isize, y: isize| -> i32 {
        let cx = x.clamp(0, w as isize - 1) as usize;
        let cy = y.clamp(0, h as isize - 1) as usize;
        i32::from(data[cy * w + cx])
    };
    let mut mag = vec![0.0f32; w * h];
    let mut dir = vec![0u8; w * h];
    // tan(22.5°), tan(67.5°)
    let (t1, t2) = (0.414_213_57f32, 2.414_213_6f32);
    let mut store = |i: usize, gx: i32, gy: i32| {
        let (gx, gy) = (gx as f32, gy as f32);
        mag[i] = (gx * gx + gy * gy).sqrt();
        let (ax, ay) = (gx.abs(), gy.abs());
        dir[i] = if ay <= t1 * ax {
            0
        } else if ay >= t2 * ax {
            2
        } else if (gx > 0.0) == (gy > 0.0) {
            1
        } else {
            3
        };
    };
    for y in 0..h {
        let interior_row = y > 0 && y + 1 < h;
        for x in 0..w {
            let (gx, gy) = if interior_row && x > 0 && x + 1 < w {
                let p = |dx: usize, dy: usize| i32::from(data[(y + dy - 1) * w + x + dx - 1]);
                (
                    (p(2, 0) + 2 * p(2, 1) + p(2, 2)) - (p(0, 0) + 2 * p(0, 1) + p(0, 2)),
                    (p(0, 2) + 2 * p(1, 2) + p(2, 2)) - (p(0, 0) + 2 * p(1, 0) + p(2, 0)),
                )
            } else {
                let (x, y) = (x as isize, y as isize);
                let p = |dx: isize, dy: isize| clamped(x + dx, y + dy);
                (
                    (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1)),
                    (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1)),
                )
            };
            store(y * w + x, gx, gy);
        }
    }
    (mag, dir)
}
