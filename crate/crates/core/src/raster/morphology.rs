//! Binary morphology on [`ContactMask`]s.
//!
//! Dilation and erosion by a disk are computed from exact Euclidean distance
//! transforms, so their cost does not depend on the radius.

use super::ContactMask;
use crate::error::{Error, Result};

const FAR: f64 = 1e20;

/// Squared distance from every pixel to the nearest feature pixel.
///
/// With `border_is_feature` the ring of pixels just outside the image counts
/// as feature.
fn squared_edt<F: Fn(usize) -> bool>(
    width: usize,
    height: usize,
    is_feature: F,
    border_is_feature: bool,
) -> Vec<f64> {
    // Vertical distances by two sweeps over rows, then the exact lower
    // envelope along each row.
    const NONE: u32 = u32::MAX / 2;
    let mut col = vec![0u32; width * height];
    let edge = if border_is_feature { 1 } else { NONE };
    for x in 0..width {
        col[x] = if is_feature(x) { 0 } else { edge };
    }
    for y in 1..height {
        let (prev, cur) = col.split_at_mut(y * width);
        let prev = &prev[(y - 1) * width..];
        for x in 0..width {
            cur[x] = if is_feature(y * width + x) {
                0
            } else {
                (prev[x] + 1).min(NONE)
            };
        }
    }
    let last = (height - 1) * width;
    for x in 0..width {
        col[last + x] = col[last + x].min(edge);
    }
    for y in (0..height.saturating_sub(1)).rev() {
        let (cur, next) = col.split_at_mut((y + 1) * width);
        let cur = &mut cur[y * width..];
        for x in 0..width {
            cur[x] = cur[x].min(next[x] + 1);
        }
    }

    let mut grid = vec![FAR; width * height];
    let pad = usize::from(border_is_feature);
    let n_max = width + 2;
    let mut f = vec![0.0; n_max];
    let mut d = vec![0.0; n_max];
    let mut v = vec![0usize; n_max];
    let mut z = vec![0.0; n_max + 1];
    for y in 0..height {
        let n = width + 2 * pad;
        let row = &col[y * width..(y + 1) * width];
        for k in 0..n {
            f[k] = if border_is_feature && (k == 0 || k == n - 1) {
                0.0
            } else {
                let c = row[k - pad];
                if c >= NONE {
                    FAR
                } else {
                    f64::from(c) * f64::from(c)
                }
            };
        }
        dt_1d(&f[..n], &mut d[..n], &mut v, &mut z);
        grid[y * width..(y + 1) * width].copy_from_slice(&d[pad..pad + width]);
    }
    grid
}

/// Lower envelope of parabolas (Felzenszwalb & Huttenlocher).
fn dt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let intersect = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64)
    };
    for q in 1..n {
        let mut s = intersect(q, v[k]);
        // z[0] is -inf, so this stops at k == 0 at the latest
        while s <= z[k] {
            k -= 1;
            s = intersect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}

/// Dilation by a disk of the given radius (pixel centers within the radius).
pub fn dilate(mask: &ContactMask, radius_px: f64) -> ContactMask {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let r2 = radius_px * radius_px;
    let reach = radius_px.max(0.0).floor() as isize;
    let stamp = (2 * reach + 1).pow(2) as usize;
    if mask.area_px().saturating_mul(stamp) < w * h * 4 {
        // Sparse: the nearest set pixel to any unset pixel lies on the
        // 4-connected boundary, so stamping boundary pixels is exact.
        let offsets: Vec<(isize, isize)> = (-reach..=reach)
            .flat_map(|dy| (-reach..=reach).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| ((dx * dx + dy * dy) as f64) <= r2)
            .collect();
        let mut out = bits.to_vec();
        let is_set = |x: isize, y: isize| {
            x >= 0 && y >= 0 && x < w as isize && y < h as isize && bits[y as usize * w + x as usize]
        };
        for y in 0..h as isize {
            for x in 0..w as isize {
                if !is_set(x, y)
                    || (is_set(x - 1, y) && is_set(x + 1, y) && is_set(x, y - 1) && is_set(x, y + 1))
                {
                    continue;
                }
                for &(dx, dy) in &offsets {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && nx < w as isize && ny < h as isize {
                        out[ny as usize * w + nx as usize] = true;
                    }
                }
            }
        }
        return ContactMask::from_bits(w, h, out).expect("same dimensions");
    }
    let d2 = squared_edt(w, h, |i| bits[i], false);
    let out = d2.iter().map(|&d| d <= r2).collect();
    ContactMask::from_bits(w, h, out).expect("same dimensions")
}

/// Erosion by a disk. Pixels outside the image count as set unless
/// `border_is_background`.
pub fn erode(mask: &ContactMask, radius_px: f64, border_is_background: bool) -> ContactMask {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let d2 = squared_edt(w, h, |i| !bits[i], border_is_background);
    let r2 = radius_px * radius_px;
    let out = d2.iter().map(|&d| d > r2).collect();
    ContactMask::from_bits(w, h, out).expect("same dimensions")
}

/// Number of 3×3 squares and 3×3 crosses whose Minkowski sum is the
/// closing element for `radius_px`. The sum is an octagon of Chebyshev
/// radius `floor(radius_px)` with diagonal reach close to a disk's.
pub fn octagon_steps(radius_px: f64) -> (usize, usize) {
    let k = radius_px.max(0.0).floor() as usize;
    let squares = (k as f64 * (std::f64::consts::SQRT_2 - 1.0)).round() as usize;
    (squares, k - squares)
}

/// Closing (dilation then erosion) by the octagon of [`octagon_steps`].
///
/// Each larger octagon is a Minkowski sum of a smaller one, so the result
/// never shrinks as the radius grows. Pixels outside the image count as set
/// during the erosion.
pub fn closing(mask: &ContactMask, radius_px: f64) -> ContactMask {
    let (w, h) = (mask.width(), mask.height());
    let (squares, crosses) = octagon_steps(radius_px);
    let kernels: Vec<bool> = std::iter::repeat_n(true, squares)
        .chain(std::iter::repeat_n(false, crosses))
        .collect();
    let mut bits = mask.bits().to_vec();
    for &square in &kernels {
        bits = step_3x3(&bits, w, h, square, true);
    }
    for &square in &kernels {
        bits = step_3x3(&bits, w, h, square, false);
    }
    ContactMask::from_bits(w, h, bits).expect("same dimensions")
}

/// One dilation (`grow`) or erosion by a 3×3 square or cross. Out-of-image
/// neighbours are ignored, which makes them unset for dilation and set for
/// erosion.
fn step_3x3(bits: &[bool], w: usize, h: usize, square: bool, grow: bool) -> Vec<bool> {
    let pick = |a: bool, b: bool| if grow { a | b } else { a & b };
    let mut horiz = vec![false; w * h];
    for (src, dst) in bits.chunks_exact(w).zip(horiz.chunks_exact_mut(w)) {
        dst.copy_from_slice(src);
        for x in 1..w {
            dst[x] = pick(dst[x], src[x - 1]);
            dst[x - 1] = pick(dst[x - 1], src[x]);
        }
    }
    // Square: vertical pass over the horizontal result. Cross: horizontal
    // result combined with the vertical neighbours of the input.
    let source = if square { &horiz } else { bits };
    let mut out = horiz.clone();
    for y in 1..h {
        let (above, below) = out.split_at_mut(y * w);
        let above = &mut above[(y - 1) * w..];
        let below = &mut below[..w];
        let (src_above, src_below) = (&source[(y - 1) * w..y * w], &source[y * w..(y + 1) * w]);
        for x in 0..w {
            above[x] = pick(above[x], src_below[x]);
            below[x] = pick(below[x], src_above[x]);
        }
    }
    out
}

/// Sets every background pixel not 4-connected to the image border.
pub fn fill_holes(mask: &ContactMask) -> ContactMask {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut outside = vec![false; w * h];
    let mut stack = Vec::new();
    let seed = |i: usize, outside: &mut Vec<bool>, stack: &mut Vec<usize>| {
        if !bits[i] && !outside[i] {
            outside[i] = true;
            stack.push(i);
        }
    };
    for x in 0..w {
        seed(x, &mut outside, &mut stack);
        seed((h - 1) * w + x, &mut outside, &mut stack);
    }
    for y in 0..h {
        seed(y * w, &mut outside, &mut stack);
        seed(y * w + w - 1, &mut outside, &mut stack);
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        let mut visit = |j: usize| {
            if !bits[j] && !outside[j] {
                outside[j] = true;
                stack.push(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < w {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - w);
        }
        if y + 1 < h {
            visit(i + w);
        }
    }
    let out = outside.iter().map(|&o| !o).collect();
    ContactMask::from_bits(w, h, out).expect("same dimensions")
}

/// 8-connected components as lists of pixel indices, in raster order of
/// their first pixel.
pub fn connected_components(mask: &ContactMask) -> Vec<Vec<usize>> {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut seen = vec![false; w * h];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            pixels.push(i);
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if bits[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        pixels.sort_unstable();
        components.push(pixels);
    }
    components
}

/// Groups edge pixels into a filled contact region: closing with an octagon,
/// hole filling, and removal of components smaller than `min_component_px`.
/// An empty result means no contact.
pub fn contact_mask(
    edges: &ContactMask,
    close_radius_px: f64,
    min_component_px: usize,
) -> Result<ContactMask> {
    if !(close_radius_px >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "close radius {close_radius_px} px must be >= 1"
        )));
    }
    let (w, h) = (edges.width(), edges.height());
    let mut out = ContactMask::empty(w, h);
    let Some((bx0, by0, bx1, by1)) = edges.bounding_box() else {
        return Ok(out);
    };
    // Everything happens inside the edge bounding box grown by more than the
    // closing radius; the ring beyond it is unset in every intermediate, so
    // the crop gives the same result as the full frame.
    let pad = close_radius_px.ceil() as usize + 2;
    let (x0, y0) = (bx0.saturating_sub(pad), by0.saturating_sub(pad));
    let (x1, y1) = ((bx1 + pad).min(w - 1), (by1 + pad).min(h - 1));
    let (cw, ch) = (x1 - x0 + 1, y1 - y0 + 1);
    let mut crop = ContactMask::empty(cw, ch);
    for y in 0..ch {
        for x in 0..cw {
            if edges.get(x0 + x, y0 + y) {
                crop.set(x, y, true);
            }
        }
    }
    let filled = fill_holes(&closing(&crop, close_radius_px));
    for component in connected_components(&filled) {
        if component.len() >= min_component_px {
            for i in component {
                out.set(x0 + i % cw, y0 + i / cw, true);
            }
        }
    }
    Ok(out)
}

/// Euclidean distance from set pixels to the nearest unset pixel, computed
/// over the mask's bounding box. Pixels outside the image are background.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    x0: isize,
    y0: isize,
    width: usize,
    height: usize,
    squared: Vec<f64>,
}

impl DistanceMap {
    /// Distance in pixels at an image pixel; zero off the mask.
    pub fn at(&self, x: usize, y: usize) -> f64 {
        let (cx, cy) = (x as isize - self.x0, y as isize - self.y0);
        if cx < 0 || cy < 0 || cx >= self.width as isize || cy >= self.height as isize {
            return 0.0;
        }
        self.squared[cy as usize * self.width + cx as usize].sqrt()
    }
}

pub fn distance_to_background(mask: &ContactMask) -> DistanceMap {
    let Some((bx0, by0, bx1, by1)) = mask.bounding_box() else {
        return DistanceMap {
            x0: 0,
            y0: 0,
            width: 0,
            height: 0,
            squared: Vec::new(),
        };
    };
    // One pixel of padding guarantees a background ring around the crop.
    let (x0, y0) = (bx0 as isize - 1, by0 as isize - 1);
    let (width, height) = (bx1 - bx0 + 3, by1 - by0 + 3);
    let (mw, mh) = (mask.width() as isize, mask.height() as isize);
    let bits = mask.bits();
    let is_background = |i: usize| {
        let (x, y) = (x0 + (i % width) as isize, y0 + (i / width) as isize);
        x < 0 || y < 0 || x >= mw || y >= mh || !bits[y as usize * mask.width() + x as usize]
    };
    let squared = squared_edt(width, height, is_background, false);
    DistanceMap {
        x0,
        y0,
        width,
        height,
        squared,
    }
}
