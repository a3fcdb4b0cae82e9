use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tactile_slip::{GrayImage, Vec2};

use crate::model::GelModel;
use crate::object::ObjectSpec;
use crate::sim::GroundTruthFrame;

/// Bilinear value noise in [0, 1] on a square lattice.
struct Texture {
    cell: f64,
    cols: usize,
    lattice: Vec<f64>,
}

impl Texture {
    fn new(width: usize, height: usize, cell: f64, seed: u64) -> Self {
        let cols = (width as f64 / cell).ceil() as usize + 2;
        let rows = (height as f64 / cell).ceil() as usize + 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lattice = (0..cols * rows).map(|_| rng.random::<f64>()).collect();
        Self { cell, cols, lattice }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let (gx, gy) = (x / self.cell, y / self.cell);
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        let (fx, fy) = (gx - ix as f64, gy - iy as f64);
        let v = |i: usize, j: usize| self.lattice[j * self.cols + i];
        let top = v(ix, iy) * (1.0 - fx) + v(ix + 1, iy) * fx;
        let bottom = v(ix, iy + 1) * (1.0 - fx) + v(ix + 1, iy + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Synthetic tactile image of `frame`.
///
/// The imprint is a brightened, textured copy of the patch at the object's
/// initial placement; its contrast grows with texture strength and normal
/// force. Markers are anti-aliased dark disks at the observed positions.
pub fn render(frame: &GroundTruthFrame, model: &GelModel, obj: &ObjectSpec, texture_seed: u64) -> GrayImage {
    let geom = model.geometry;
    let rp = &model.render;
    let (w, h) = (geom.width_px, geom.height_px);
    let bg = f64::from(rp.background);
    let contrast = model.imprint_contrast(obj.texture_strength, frame.pose.force);
    let mut level = vec![bg; w * h];
    if contrast > 0.0 {
        let texture = Texture::new(w, h, rp.texture_cell_px, texture_seed);
        let ext = obj.shape.outer_extent();
        let (ax, ay) = geom.mm_to_px(obj.centre + Vec2::new(-ext, ext));
        let (bx, by) = geom.mm_to_px(obj.centre + Vec2::new(ext, -ext));
        let span = |a: f64, b: f64, n: usize| {
            let lo = (a.min(b) - 1.0).floor().clamp(0.0, n as f64) as usize;
            let hi = (a.max(b) + 1.0).ceil().clamp(0.0, n as f64) as usize;
            lo..hi
        };
        for y in span(ay, by, h) {
            for x in span(ax, bx, w) {
                let p = geom.px_to_mm(x as f64, y as f64);
                if obj.shape.contains(p - obj.centre) {
                    let t = texture.at(x as f64, y as f64);
                    level[y * w + x] = bg + contrast * (1.0 - rp.texture_depth + rp.texture_depth * t);
                }
            }
        }
    }

    let r = rp.marker_radius_px;
    let s = rp.supersample;
    let ink = f64::from(rp.marker_intensity);
    for &pos in &frame.positions {
        let (cx, cy) = geom.mm_to_px(pos);
        let x0 = (cx - r - 1.0).floor().max(0.0) as usize;
        let y0 = (cy - r - 1.0).floor().max(0.0) as usize;
        let x1 = ((cx + r + 1.0).ceil() as isize).min(w as isize - 1);
        let y1 = ((cy + r + 1.0).ceil() as isize).min(h as isize - 1);
        if x1 < 0 || y1 < 0 {
            continue;
        }
        for y in y0..=y1 as usize {
            for x in x0..=x1 as usize {
                let mut inside = 0usize;
                for sy in 0..s {
                    for sx in 0..s {
                        let dx = x as f64 - 0.5 + (sx as f64 + 0.5) / s as f64 - cx;
                        let dy = y as f64 - 0.5 + (sy as f64 + 0.5) / s as f64 - cy;
                        if dx * dx + dy * dy <= r * r {
                            inside += 1;
                        }
                    }
                }
                if inside > 0 {
                    let cover = inside as f64 / (s * s) as f64;
                    let i = y * w + x;
                    level[i] = level[i] * (1.0 - cover) + ink * cover;
                }
            }
        }
    }
    let data = level.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8).collect();
    GrayImage::new(w, h, data).expect("dimensions come from the geometry")
}
