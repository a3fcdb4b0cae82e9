//! Marker correspondence between two frames and the resulting displacement
//! field.
//!
//! Matching strategies implement [`Matcher`] and are looked up by name in a
//! [`MatcherRegistry`], so the detector can be configured with any of them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::raster::MarkerObservation;

/// Partial bijection between reference and current marker indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Correspondence {
    /// `(ref_index, cur_index)`, sorted by reference index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_ref: Vec<usize>,
    pub unmatched_cur: Vec<usize>,
}

impl Correspondence {
    fn from_pairs(pairs: Vec<(usize, usize)>, n_ref: usize, n_cur: usize) -> Self {
        let mut ref_used = vec![false; n_ref];
        let mut cur_used = vec![false; n_cur];
        for &(i, j) in &pairs {
            ref_used[i] = true;
            cur_used[j] = true;
        }
        Self {
            pairs,
            unmatched_ref: (0..n_ref).filter(|&i| !ref_used[i]).collect(),
            unmatched_cur: (0..n_cur).filter(|&j| !cur_used[j]).collect(),
        }
    }

    /// Pairs by equal nonzero marker id.
    pub fn by_id(reference: &[MarkerObservation], current: &[MarkerObservation]) -> Self {
        let index: HashMap<u32, usize> = current
            .iter()
            .enumerate()
            .filter(|(_, m)| m.id != 0)
            .map(|(j, m)| (m.id, j))
            .collect();
        let pairs = reference
            .iter()
            .enumerate()
            .filter(|(_, m)| m.id != 0)
            .filter_map(|(i, m)| index.get(&m.id).map(|&j| (i, j)))
            .collect();
        Self::from_pairs(pairs, reference.len(), current.len())
    }

    /// Fraction of reference markers that found a partner.
    pub fn match_fraction(&self) -> f64 {
        let n_ref = self.pairs.len() + self.unmatched_ref.len();
        if n_ref == 0 {
            1.0
        } else {
            self.pairs.len() as f64 / n_ref as f64
        }
    }

    /// The same correspondence seen from the other frame.
    pub fn transposed(&self) -> Self {
        let mut pairs: Vec<_> = self.pairs.iter().map(|&(i, j)| (j, i)).collect();
        pairs.sort_unstable();
        Self {
            pairs,
            unmatched_ref: self.unmatched_cur.clone(),
            unmatched_cur: self.unmatched_ref.clone(),
        }
    }

    pub fn is_partial_bijection(&self) -> bool {
        let mut refs: Vec<_> = self.pairs.iter().map(|p| p.0).collect();
        let mut curs: Vec<_> = self.pairs.iter().map(|p| p.1).collect();
        refs.sort_unstable();
        curs.sort_unstable();
        refs.windows(2).all(|w| w[0] != w[1]) && curs.windows(2).all(|w| w[0] != w[1])
    }
}

/// A strategy for pairing markers across two frames.
pub trait Matcher: Send + Sync {
    fn name(&self) -> &'static str;

    fn match_points(&self, reference: &[Vec2], current: &[Vec2], max_radius: f64)
        -> Correspondence;
}

impl fmt::Debug for dyn Matcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matcher({})", self.name())
    }
}

fn closer(candidate: (f64, usize), best: Option<(f64, usize)>) -> bool {
    match best {
        None => true,
        Some(b) => candidate.0 < b.0 || (candidate.0 == b.0 && candidate.1 < b.1),
    }
}

fn mutual_pairs(
    ref_nearest: &[Option<usize>],
    cur_nearest: &[Option<usize>],
    n_cur: usize,
) -> Correspondence {
    let pairs = ref_nearest
        .iter()
        .enumerate()
        .filter_map(|(i, nn)| nn.filter(|&j| cur_nearest[j] == Some(i)).map(|j| (i, j)))
        .collect();
    Correspondence::from_pairs(pairs, ref_nearest.len(), n_cur)
}

/// Mutual nearest neighbours by exhaustive search, O(n·m).
#[derive(Debug, Default, Clone, Copy)]
pub struct BruteForceMutualNearest;

impl BruteForceMutualNearest {
    fn nearest(from: &[Vec2], to: &[Vec2], r2: f64) -> Vec<Option<usize>> {
        from.iter()
            .map(|&p| {
                let mut best = None;
                for (j, &q) in to.iter().enumerate() {
                    let d2 = (p - q).norm_squared();
                    if d2 <= r2 && closer((d2, j), best) {
                        best = Some((d2, j));
                    }
                }
                best.map(|b| b.1)
            })
            .collect()
    }
}

impl Matcher for BruteForceMutualNearest {
    fn name(&self) -> &'static str {
        "mutual-nn-brute"
    }

    fn match_points(&self, reference: &[Vec2], current: &[Vec2], max_radius: f64) -> Correspondence {
        let r2 = max_radius * max_radius;
        let ref_nn = Self::nearest(reference, current, r2);
        let cur_nn = Self::nearest(current, reference, r2);
        mutual_pairs(&ref_nn, &cur_nn, current.len())
    }
}

/// Mutual nearest neighbours using a uniform grid with cell size equal to
/// the match radius, so each query inspects a 3×3 block of cells.
#[derive(Debug, Default, Clone, Copy)]
pub struct GridMutualNearest;

struct GridIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl GridIndex {
    fn new(points: &[Vec2], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(*p, cell)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key(p: Vec2, cell: f64) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    fn nearest(&self, points: &[Vec2], q: Vec2, r2: f64) -> Option<usize> {
        let (cx, cy) = Self::key(q, self.cell);
        let mut best = None;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let Some(bucket) = self.buckets.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bucket {
                    let d2 = (points[j] - q).norm_squared();
                    if d2 <= r2 && closer((d2, j), best) {
                        best = Some((d2, j));
                    }
                }
            }
        }
        best.map(|b| b.1)
    }
}

impl Matcher for GridMutualNearest {
    fn name(&self) -> &'static str {
        "mutual-nn-grid"
    }

    fn match_points(&self, reference: &[Vec2], current: &[Vec2], max_radius: f64) -> Correspondence {
        let r2 = max_radius * max_radius;
        let cur_index = GridIndex::new(current, max_radius);
        let ref_index = GridIndex::new(reference, max_radius);
        let ref_nn: Vec<_> = reference
            .iter()
            .map(|&p| cur_index.nearest(current, p, r2))
            .collect();
        let cur_nn: Vec<_> = current
            .iter()
            .map(|&p| ref_index.nearest(reference, p, r2))
            .collect();
        mutual_pairs(&ref_nn, &cur_nn, current.len())
    }
}

/// Name → matcher lookup.
#[derive(Clone)]
pub struct MatcherRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Matcher>>,
}

impl Default for MatcherRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl MatcherRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(GridMutualNearest));
        registry.register(Arc::new(BruteForceMutualNearest));
        registry
    }

    pub fn register(&mut self, matcher: Arc<dyn Matcher>) {
        self.entries.insert(matcher.name(), matcher);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Matcher>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "matcher",
                name: name.to_owned(),
                known: self.names().join(", "),
            })
    }
}

/// Mutual-nearest-neighbour matching of two marker lists with the default
/// grid-indexed strategy.
pub fn match_markers(
    reference: &[MarkerObservation],
    current: &[MarkerObservation],
    max_match_radius: f64,
) -> Result<Correspondence> {
    if !(max_match_radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "match radius {max_match_radius}"
        )));
    }
    let a: Vec<Vec2> = reference.iter().map(|m| m.position).collect();
    let b: Vec<Vec2> = current.iter().map(|m| m.position).collect();
    Ok(GridMutualNearest.match_points(&a, &b, max_match_radius))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementEntry {
    pub marker_id: u32,
    pub ref_pos: Vec2,
    pub cur_pos: Vec2,
    pub disp: Vec2,
    pub in_contact: bool,
    pub inner: bool,
}

/// Reference → current displacement of every matched marker.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DisplacementField {
    pub entries: Vec<DisplacementEntry>,
}

impl DisplacementField {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn in_contact(&self) -> impl Iterator<Item = &DisplacementEntry> {
        self.entries.iter().filter(|e| e.in_contact)
    }

    pub fn contact_count(&self) -> usize {
        self.in_contact().count()
    }
}

/// One entry per matched pair. Marker ids come from the reference
/// observation, or its 1-based index when untracked.
pub fn displacement_field(
    corr: &Correspondence,
    reference: &[MarkerObservation],
    current: &[MarkerObservation],
) -> DisplacementField {
    let entries = corr
        .pairs
        .iter()
        .map(|&(i, j)| {
            let (r, c) = (&reference[i], &current[j]);
            DisplacementEntry {
                marker_id: if r.id != 0 { r.id } else { i as u32 + 1 },
                ref_pos: r.position,
                cur_pos: c.position,
                disp: c.position - r.position,
                in_contact: c.in_contact,
                inner: false,
            }
        })
        .collect();
    DisplacementField { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: usize, cols: usize, pitch: f64) -> Vec<MarkerObservation> {
        let mut v = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                v.push(MarkerObservation::at(Vec2::new(
                    2.0 + c as f64 * pitch,
                    1.5 + r as f64 * pitch,
                )));
            }
        }
        v
    }

    #[test]
    fn identical_lists_pair_identically() {
        let g = grid(5, 6, 1.5);
        let corr = match_markers(&g, &g, 0.7).unwrap();
        assert_eq!(corr.pairs, (0..30).map(|i| (i, i)).collect::<Vec<_>>());
        assert!(corr.unmatched_ref.is_empty() && corr.unmatched_cur.is_empty());
    }

    #[test]
    fn sub_half_pitch_shift_keeps_identity() {
        let g = grid(5, 6, 1.5);
        let shifted: Vec<_> = g
            .iter()
            .map(|m| MarkerObservation::at(m.position + Vec2::new(0.4, 0.0)))
            .collect();
        let corr = match_markers(&g, &shifted, 0.7).unwrap();
        assert_eq!(corr.pairs.len(), 30);
        assert!(corr.pairs.iter().all(|&(i, j)| i == j));
        let field = displacement_field(&corr, &g, &shifted);
        for e in &field.entries {
            assert!((e.disp - Vec2::new(0.4, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn deleted_marker_is_reported() {
        let g = grid(4, 4, 1.5);
        let mut cur = g.clone();
        cur.remove(5);
        let corr = match_markers(&g, &cur, 0.7).unwrap();
        assert_eq!(corr.unmatched_ref, vec![5]);
        assert!(corr.unmatched_cur.is_empty());
        assert_eq!(corr.pairs.len(), 15);
        assert!(corr.is_partial_bijection());
    }

    #[test]
    fn empty_pairs_give_empty_field() {
        let corr = Correspondence::default();
        assert!(displacement_field(&corr, &[], &[]).is_empty());
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let r = [Vec2::new(0.0, 0.0)];
        let c = [Vec2::new(0.5, 0.0), Vec2::new(-0.5, 0.0)];
        let corr = GridMutualNearest.match_points(&r, &c, 0.7);
        assert_eq!(corr.pairs, vec![(0, 0)]);
        assert_eq!(corr.unmatched_cur, vec![1]);
    }

    #[test]
    fn registry_lookup() {
        let reg = MatcherRegistry::with_builtins();
        assert_eq!(reg.names(), vec!["mutual-nn-brute", "mutual-nn-grid"]);
        assert_eq!(reg.get("mutual-nn-grid").unwrap().name(), "mutual-nn-grid");
        assert!(matches!(
            reg.get("hungarian"),
            Err(Error::UnknownStrategy { .. })
        ));
    }

    #[test]
    fn pairing_by_id() {
        let mut a = grid(1, 3, 1.5);
        let mut b = a.clone();
        for (k, m) in a.iter_mut().enumerate() {
            m.id = k as u32 + 1;
        }
        b[0].id = 3;
        b[1].id = 0;
        b[2].id = 1;
        let corr = Correspondence::by_id(&a, &b);
        assert_eq!(corr.pairs, vec![(0, 2), (2, 0)]);
        assert_eq!(corr.unmatched_ref, vec![1]);
        assert_eq!(corr.unmatched_cur, vec![1]);
    }
}
