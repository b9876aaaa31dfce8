//! Labeled tiles, patches and finite tiling windows.
//!
//! Supports are axis-aligned boxes in dimension 1, 2 or 3. Every operation
//! here is pure; values are immutable once built.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dpv::DpvKind;
use crate::error::{IlcError, Result};
use crate::solenoid::SolLabel;

/// Tolerance in length units for overlap and adjacency tests.
pub const GEOM_TOL: f64 = 1e-9;

/// Which tiling system a label belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum System {
    VarLength,
    Dpv,
    Solenoid,
    Symbolic,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::VarLength => "subst1d",
            System::Dpv => "dpv",
            System::Solenoid => "solenoid",
            System::Symbolic => "symbolic",
        }
    }

    pub fn from_name(s: &str) -> Option<System> {
        match s {
            "subst1d" => Some(System::VarLength),
            "dpv" => Some(System::Dpv),
            "solenoid" => Some(System::Solenoid),
            "symbolic" => Some(System::Symbolic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    /// Tile length in `[1, 3]` for the variable-length substitution.
    Length(f64),
    Dpv(DpvKind),
    Sol(SolLabel),
    /// Plain symbol, used by symbolic fixtures (periodic and full-shift toys).
    Symbol(u32),
}

impl Label {
    pub fn system(&self) -> System {
        match self {
            Label::Length(_) => System::VarLength,
            Label::Dpv(_) => System::Dpv,
            Label::Sol(_) => System::Solenoid,
            Label::Symbol(_) => System::Symbolic,
        }
    }
}

/// Axis-aligned box. Coordinates past `dim` are zero and ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub dim: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Aabb {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Aabb> {
        if lo.len() != hi.len() {
            return Err(IlcError::DimensionMismatch(lo.len(), hi.len()));
        }
        let dim = lo.len();
        if !(1..=3).contains(&dim) {
            return Err(IlcError::Validation(format!("unsupported dimension {dim}")));
        }
        let mut b = Aabb {
            dim,
            lo: [0.0; 3],
            hi: [0.0; 3],
        };
        for i in 0..dim {
            if !lo[i].is_finite() || !hi[i].is_finite() {
                return Err(IlcError::Validation("non-finite box coordinate".into()));
            }
            if hi[i] <= lo[i] {
                return Err(IlcError::Validation(format!(
                    "box has empty interior along axis {i}: [{}, {}]",
                    lo[i], hi[i]
                )));
            }
            b.lo[i] = lo[i];
            b.hi[i] = hi[i];
        }
        Ok(b)
    }

    pub fn interval(a: f64, b: f64) -> Aabb {
        Aabb {
            dim: 1,
            lo: [a, 0.0, 0.0],
            hi: [b, 0.0, 0.0],
        }
    }

    pub fn rect(x: f64, y: f64, w: f64, h: f64) -> Aabb {
        Aabb {
            dim: 2,
            lo: [x, y, 0.0],
            hi: [x + w, y + h, 0.0],
        }
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.dim]
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.dim]
    }

    pub fn side(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim).map(|i| self.side(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|i| self.side(i)).product()
    }

    pub fn translate(&self, x: &[f64]) -> Aabb {
        let mut b = *self;
        for (i, &d) in x.iter().enumerate().take(self.dim) {
            b.lo[i] += d;
            b.hi[i] += d;
        }
        b
    }

    pub fn contains_point(&self, p: &[f64], tol: f64) -> bool {
        (0..self.dim).all(|i| p[i] >= self.lo[i] - tol && p[i] <= self.hi[i] + tol)
    }

    pub fn contains_box(&self, other: &Aabb, tol: f64) -> bool {
        (0..self.dim).all(|i| other.lo[i] >= self.lo[i] - tol && other.hi[i] <= self.hi[i] + tol)
    }

    /// Euclidean distance from a point to the closed box.
    pub fn distance_to_point(&self, p: &[f64]) -> f64 {
        (0..self.dim)
            .map(|i| {
                let d = (self.lo[i] - p[i]).max(0.0).max(p[i] - self.hi[i]);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// True when the closed Euclidean ball of radius `r` about `center` lies in the box.
    pub fn contains_ball(&self, center: &[f64], r: f64, tol: f64) -> bool {
        (0..self.dim).all(|i| center[i] - r >= self.lo[i] - tol && center[i] + r <= self.hi[i] + tol)
    }

    /// Overlap depth along each axis; negative means a gap.
    fn overlaps(&self, other: &Aabb) -> [f64; 3] {
        let mut o = [f64::INFINITY; 3];
        for (i, slot) in o.iter_mut().enumerate().take(self.dim) {
            *slot = self.hi[i].min(other.hi[i]) - self.lo[i].max(other.lo[i]);
        }
        o
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut b = *self;
        for i in 0..self.dim {
            b.lo[i] = b.lo[i].min(other.lo[i]);
            b.hi[i] = b.hi[i].max(other.hi[i]);
        }
        b
    }

    /// Positive-volume intersection test.
    pub fn meets_interior(&self, other: &Aabb) -> bool {
        self.overlaps(other)[..self.dim].iter().all(|&o| o > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tile {
    pub label: Label,
    pub support: Aabb,
    pub control: [f64; 3],
}

impl Tile {
    pub fn new(label: Label, support: Aabb, control: &[f64]) -> Result<Tile> {
        if control.len() != support.dim {
            return Err(IlcError::DimensionMismatch(control.len(), support.dim));
        }
        if !support.contains_point(control, GEOM_TOL) {
            return Err(IlcError::Validation(
                "control point lies outside the tile support".into(),
            ));
        }
        let mut c = [0.0; 3];
        c[..control.len()].copy_from_slice(control);
        Ok(Tile {
            label,
            support,
            control: c,
        })
    }

    /// Tile whose control point is the lower corner of its support.
    pub fn at_lower_corner(label: Label, support: Aabb) -> Tile {
        Tile {
            label,
            support,
            control: support.lo,
        }
    }

    pub fn dim(&self) -> usize {
        self.support.dim
    }

    pub fn control(&self) -> &[f64] {
        &self.control[..self.support.dim]
    }
}

fn cmp_points(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// A finite, connected, interior-disjoint collection of tiles, ordered
/// lexicographically by control point.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    tiles: Vec<Tile>,
}

impl Patch {
    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.tiles.first().map_or(0, Tile::dim)
    }

    /// Builds a patch from tiles already known to be valid (produced by the
    /// generators in this crate); only sorts them.
    pub(crate) fn from_trusted(mut tiles: Vec<Tile>) -> Patch {
        sort_tiles(&mut tiles);
        Patch { tiles }
    }

    pub fn bounding_box(&self) -> Option<Aabb> {
        let mut it = self.tiles.iter();
        let first = it.next()?.support;
        Some(it.fold(first, |acc, t| acc.union(&t.support)))
    }

    pub fn total_volume(&self) -> f64 {
        self.tiles.iter().map(|t| t.support.volume()).sum()
    }

    pub fn min_side(&self) -> f64 {
        self.tiles
            .iter()
            .map(|t| t.support.min_side())
            .fold(f64::INFINITY, f64::min)
    }

    /// Tiles whose supports meet the interior of `region`.
    pub fn restrict(&self, region: &Aabb) -> Vec<Tile> {
        self.tiles
            .iter()
            .filter(|t| t.support.meets_interior(region))
            .copied()
            .collect()
    }
}

fn sort_tiles(tiles: &mut [Tile]) {
    tiles.sort_by(|a, b| cmp_points(a.control(), b.control()));
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Checks interior-disjointness and connectivity and returns the tiles as a
/// patch in canonical order.
pub fn validate_patch(tiles: Vec<Tile>, tol: f64) -> Result<Patch> {
    if tiles.is_empty() {
        return Err(IlcError::Validation("a patch needs at least one tile".into()));
    }
    let dim = tiles[0].dim();
    if let Some(t) = tiles.iter().find(|t| t.dim() != dim) {
        return Err(IlcError::DimensionMismatch(dim, t.dim()));
    }
    let mut tiles = tiles;
    sort_tiles(&mut tiles);

    // Sweep along the first axis.
    let mut order: Vec<usize> = (0..tiles.len()).collect();
    order.sort_by(|&a, &b| tiles[a].support.lo[0].total_cmp(&tiles[b].support.lo[0]));
    let mut sets = DisjointSets::new(tiles.len());
    for (pos, &i) in order.iter().enumerate() {
        let bi = &tiles[i].support;
        for &j in &order[pos + 1..] {
            let bj = &tiles[j].support;
            if bj.lo[0] > bi.hi[0] + tol {
                break;
            }
            let o = bi.overlaps(bj);
            let o = &o[..dim];
            if o.iter().all(|&d| d > tol) {
                let depth = o.iter().copied().fold(f64::INFINITY, f64::min);
                return Err(IlcError::Overlap {
                    first: i.min(j),
                    second: i.max(j),
                    depth,
                    tol,
                });
            }
            // Adjacent when the closed boxes share a facet (positive overlap on
            // all but at most one axis, touching on the remaining one).
            let touching = o.iter().filter(|&&d| d.abs() <= tol).count();
            let positive = o.iter().filter(|&&d| d > tol).count();
            if o.iter().all(|&d| d >= -tol) && (positive == dim - 1 || (dim == 1 && touching == 1)) {
                sets.union(i, j);
            }
        }
    }
    let components = (0..tiles.len()).filter(|&i| sets.find(i) == i).count();
    if components > 1 {
        return Err(IlcError::Disconnected { components });
    }
    Ok(Patch { tiles })
}

/// Construction record of a window.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub system: String,
    pub params: Vec<(String, f64)>,
    pub iterations: u32,
    /// Net translation applied since construction.
    pub anchor: Vec<f64>,
    /// Extent of the `n`-supertile containing the origin, for `n = 0, 1, ...`,
    /// when the construction knows it.
    pub extents: Vec<Aabb>,
}

impl Provenance {
    pub fn new(system: System, iterations: u32, dim: usize) -> Provenance {
        Provenance {
            system: system.name().to_string(),
            params: Vec::new(),
            iterations,
            anchor: vec![0.0; dim],
            extents: Vec::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Provenance {
        self.params.push((name.to_string(), value));
        self
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

/// A finite stand-in for an infinite tiling: a patch plus the box it certifiably covers.
#[derive(Debug, Clone, PartialEq)]
pub struct TilingWindow {
    pub patch: Patch,
    pub window: Aabb,
    pub provenance: Provenance,
}

impl TilingWindow {
    pub fn new(patch: Patch, window: Aabb, provenance: Provenance) -> Result<TilingWindow> {
        if patch.dim() != window.dim {
            return Err(IlcError::DimensionMismatch(patch.dim(), window.dim));
        }
        let covered: f64 = patch
            .tiles()
            .iter()
            .map(|t| intersection_volume(&t.support, &window))
            .sum();
        if (covered - window.volume()).abs() > GEOM_TOL * window.volume().max(1.0) * 10.0 {
            return Err(IlcError::Validation(format!(
                "window not covered by the patch (covered {covered}, window {})",
                window.volume()
            )));
        }
        Ok(TilingWindow {
            patch,
            window,
            provenance,
        })
    }

    pub(crate) fn from_trusted(patch: Patch, window: Aabb, provenance: Provenance) -> TilingWindow {
        TilingWindow {
            patch,
            window,
            provenance,
        }
    }

    pub fn dim(&self) -> usize {
        self.window.dim
    }

    /// Index of a tile whose control point sits at `p`.
    pub fn tile_with_control_at(&self, p: &[f64], tol: f64) -> Option<usize> {
        self.patch
            .tiles()
            .iter()
            .position(|t| t.control().iter().zip(p).all(|(a, b)| (a - b).abs() <= tol))
    }
}

fn intersection_volume(a: &Aabb, b: &Aabb) -> f64 {
    a.overlaps(b)[..a.dim].iter().map(|&o| o.max(0.0)).product()
}

/// Translation by `+x`. `T - x` is written `translate(T, -x)`.
pub trait Translate: Sized {
    fn translate(&self, x: &[f64]) -> Self;
}

impl Translate for Tile {
    fn translate(&self, x: &[f64]) -> Tile {
        let mut t = *self;
        t.support = self.support.translate(x);
        for (c, &d) in t.control.iter_mut().zip(x).take(self.dim()) {
            *c += d;
        }
        t
    }
}

impl Translate for Patch {
    fn translate(&self, x: &[f64]) -> Patch {
        Patch {
            tiles: self.tiles.iter().map(|t| t.translate(x)).collect(),
        }
    }
}

impl Translate for TilingWindow {
    fn translate(&self, x: &[f64]) -> TilingWindow {
        let mut provenance = self.provenance.clone();
        for (a, d) in provenance.anchor.iter_mut().zip(x) {
            *a += d;
        }
        provenance.extents = provenance.extents.iter().map(|e| e.translate(x)).collect();
        TilingWindow {
            patch: self.patch.translate(x),
            window: self.window.translate(x),
            provenance,
        }
    }
}

pub fn translate<T: Translate>(object: &T, x: &[f64]) -> T {
    object.translate(x)
}

/// `Vol((∂U)^{+r}) / Vol(U)` for a box `U`, with Euclidean neighborhoods.
///
/// The outer parallel body is measured by the Steiner formula and the inner
/// parallel body is the box shrunk by `r` on every side.
pub fn van_hove_ratio(support: &Aabb, r: f64) -> f64 {
    assert!(r >= 0.0, "van Hove radius must be nonnegative");
    if r == 0.0 {
        return 0.0;
    }
    let s: Vec<f64> = (0..support.dim).map(|i| support.side(i)).collect();
    let pi = std::f64::consts::PI;
    let outer = match s.len() {
        1 => s[0] + 2.0 * r,
        2 => s[0] * s[1] + 2.0 * r * (s[0] + s[1]) + pi * r * r,
        _ => {
            let v = s[0] * s[1] * s[2];
            let area = 2.0 * (s[0] * s[1] + s[1] * s[2] + s[0] * s[2]);
            let edges = s[0] + s[1] + s[2];
            v + area * r + pi * r * r * edges + 4.0 / 3.0 * pi * r * r * r
        }
    };
    let inner: f64 = s.iter().map(|&x| (x - 2.0 * r).max(0.0)).product();
    (outer - inner) / support.volume()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(a: f64) -> Tile {
        Tile::at_lower_corner(Label::Symbol(0), Aabb::interval(a, a + 1.0))
    }

    #[test]
    fn translate_identity_and_inverse() {
        let t = Tile::at_lower_corner(Label::Length(2.0), Aabb::interval(0.0, 2.0));
        assert_eq!(translate(&t, &[0.0]), t);
        assert_eq!(translate(&translate(&t, &[1.25]), &[-1.25]), t);
        let moved = translate(&t, &[1.0]);
        assert_eq!(moved.support, Aabb::interval(1.0, 3.0));
        assert_eq!(moved.control(), &[1.0]);
        assert_eq!(moved.label, Label::Length(2.0));
    }

    #[test]
    fn patch_validation_cases() {
        let p = validate_patch(vec![unit(1.0), unit(0.0)], GEOM_TOL).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.tiles()[0].control(), &[0.0]);

        let gap = validate_patch(vec![unit(0.0), unit(2.0)], GEOM_TOL);
        assert!(matches!(gap, Err(IlcError::Disconnected { components: 2 })));

        let overlap = validate_patch(vec![unit(0.0), unit(0.5)], GEOM_TOL);
        assert!(matches!(overlap, Err(IlcError::Overlap { .. })));
    }

    #[test]
    fn corner_contact_does_not_connect_rectangles() {
        let a = Tile::at_lower_corner(Label::Symbol(0), Aabb::rect(0.0, 0.0, 1.0, 1.0));
        let b = Tile::at_lower_corner(Label::Symbol(0), Aabb::rect(1.0, 1.0, 1.0, 1.0));
        assert!(matches!(
            validate_patch(vec![a, b], GEOM_TOL),
            Err(IlcError::Disconnected { .. })
        ));
        let c = Tile::at_lower_corner(Label::Symbol(0), Aabb::rect(1.0, 0.5, 1.0, 1.0));
        assert!(validate_patch(vec![a, c], GEOM_TOL).is_ok());
    }

    #[test]
    fn control_point_must_lie_in_support() {
        assert!(Tile::new(Label::Symbol(0), Aabb::interval(0.0, 1.0), &[2.0]).is_err());
    }

    #[test]
    fn van_hove_examples() {
        let square = Aabb::rect(0.0, 0.0, 1.0, 1.0);
        assert_eq!(van_hove_ratio(&square, 0.0), 0.0);
        let interval = Aabb::interval(0.0, 10.0);
        assert!((van_hove_ratio(&interval, 1.0) - 0.4).abs() < 1e-15);
        // fully swallowed interval: neighborhood is [-r, L + r]
        let short = Aabb::interval(0.0, 1.0);
        assert!((van_hove_ratio(&short, 1.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn van_hove_nonincreasing_in_side() {
        let mut last = f64::INFINITY;
        for side in [1.0, 2.0, 5.0, 10.0, 50.0] {
            let v = van_hove_ratio(&Aabb::rect(0.0, 0.0, side, side), 0.5);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn window_must_be_covered() {
        let p = validate_patch(vec![unit(0.0), unit(1.0)], GEOM_TOL).unwrap();
        let prov = Provenance::new(System::Symbolic, 0, 1);
        assert!(TilingWindow::new(p.clone(), Aabb::interval(0.0, 2.0), prov.clone()).is_ok());
        assert!(TilingWindow::new(p, Aabb::interval(-0.5, 2.0), prov).is_err());
    }
}
