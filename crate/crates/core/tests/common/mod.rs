#![allow(dead_code)]

use tactile_slip::{MarkerObservation, Vec2};

pub const PITCH: f64 = 1.5;

/// Rest positions of the default 19 × 25 marker grid, row by row.
pub fn rest_grid() -> Vec<Vec2> {
    let mut out = Vec::with_capacity(475);
    for i in 0..19 {
        for j in 0..25 {
            out.push(Vec2::new(2.0 + PITCH * j as f64, 1.5 + PITCH * i as f64));
        }
    }
    out
}

pub fn observations(points: &[Vec2], in_contact: impl Fn(usize) -> bool) -> Vec<MarkerObservation> {
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| MarkerObservation {
            id: 0,
            position: p,
            area_px: 50,
            in_contact: in_contact(i),
        })
        .collect()
}

pub fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
    (a - b).norm() <= tol
}
