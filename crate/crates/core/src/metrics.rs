//! Tile, patch and tiling distances, and the window metric `d_L`.

use crate::error::{IlcError, Result};
use crate::geometry::{Aabb, Label, Patch, Tile, TilingWindow, Translate};
use crate::matching::bottleneck_assignment;
use crate::solenoid::CompactificationSpec;

/// Label metrics for the systems. Every value is capped at 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelMetric {
    pub solenoid: CompactificationSpec,
}

impl LabelMetric {
    pub fn distance(&self, a: &Label, b: &Label) -> Result<f64> {
        let d = match (a, b) {
            (Label::Length(x), Label::Length(y)) => (x - y).abs() / 2.0,
            (Label::Dpv(x), Label::Dpv(y)) => discrete(x == y),
            (Label::Sol(x), Label::Sol(y)) => self.solenoid.label_distance(*x, *y)?,
            (Label::Symbol(x), Label::Symbol(y)) => discrete(x == y),
            _ => return Err(IlcError::SystemMismatch(a.system().name(), b.system().name())),
        };
        Ok(d.min(1.0))
    }
}

fn discrete(same: bool) -> f64 {
    if same {
        0.0
    } else {
        1.0
    }
}

fn corners(b: &Aabb) -> impl Iterator<Item = [f64; 3]> + '_ {
    (0..1usize << b.dim).map(move |mask| {
        let mut p = [0.0; 3];
        for (i, slot) in p.iter_mut().enumerate().take(b.dim) {
            *slot = if mask >> i & 1 == 1 { b.hi[i] } else { b.lo[i] };
        }
        p
    })
}

/// Exact Hausdorff distance between two boxes.
///
/// The distance to a convex set is convex, so each one-sided supremum is
/// attained at a corner.
pub fn hausdorff_distance(a: &Aabb, b: &Aabb) -> Result<f64> {
    if a.dim != b.dim {
        return Err(IlcError::DimensionMismatch(a.dim, b.dim));
    }
    let one_sided = |x: &Aabb, y: &Aabb| corners(x).map(|p| y.distance_to_point(&p[..x.dim])).fold(0.0, f64::max);
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

pub fn tile_distance(t1: &Tile, t2: &Tile) -> Result<f64> {
    tile_distance_with(t1, t2, &LabelMetric::default())
}

pub fn tile_distance_with(t1: &Tile, t2: &Tile, metric: &LabelMetric) -> Result<f64> {
    let label = metric.distance(&t1.label, &t2.label)?;
    Ok(hausdorff_distance(&t1.support, &t2.support)?.max(label))
}

/// Optimal patch distance with the assignment that realizes it.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatch {
    pub value: f64,
    /// `assignment[i]` is the tile of the second patch paired with tile `i`
    /// of the first; empty when the cardinalities differ.
    pub assignment: Vec<usize>,
}

pub fn patch_distance(p1: &Patch, p2: &Patch) -> f64 {
    match_tiles(p1.tiles(), p2.tiles(), &LabelMetric::default()).value
}

pub fn patch_distance_with(p1: &Patch, p2: &Patch, metric: &LabelMetric) -> PatchMatch {
    match_tiles(p1.tiles(), p2.tiles(), metric)
}

fn tile_cost(a: &Tile, b: &Tile, metric: &LabelMetric) -> f64 {
    // tiles of different systems or dimensions are as far apart as allowed
    tile_distance_with(a, b, metric).unwrap_or(1.0)
}

/// Bottleneck distance between two tile lists in canonical order.
///
/// When pairing tiles in order already achieves a value `v` below a quarter of
/// the smallest tile side, any other bijection moves some tile onto a
/// different tile of the other patch, at cost at least `min_side/2 - v > v`;
/// the ordered pairing is then optimal and the assignment problem is skipped.
pub(crate) fn match_tiles(a: &[Tile], b: &[Tile], metric: &LabelMetric) -> PatchMatch {
    if a.len() != b.len() {
        return PatchMatch {
            value: 1.0,
            assignment: Vec::new(),
        };
    }
    let n = a.len();
    let ordered = a
        .iter()
        .zip(b)
        .map(|(x, y)| tile_cost(x, y, metric))
        .fold(0.0, f64::max);
    let min_side = a
        .iter()
        .chain(b)
        .map(|t| t.support.min_side())
        .fold(f64::INFINITY, f64::min);
    if ordered < min_side / 4.0 {
        return PatchMatch {
            value: ordered,
            assignment: (0..n).collect(),
        };
    }
    let cost: Vec<f64> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| (x, y)))
        .map(|(x, y)| tile_cost(x, y, metric))
        .collect();
    let (value, assignment) = bottleneck_assignment(n, &cost);
    PatchMatch { value, assignment }
}

/// Upper bound on the bottleneck distance: the ordered pairing alone, or 1 on
/// a cardinality mismatch.
pub(crate) fn ordered_match_value(a: &[Tile], b: &[Tile], metric: &LabelMetric) -> f64 {
    if a.len() != b.len() {
        return 1.0;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| tile_cost(x, y, metric))
        .fold(0.0, f64::max)
}

/// Radius of the largest ball about the origin inside the window.
fn inner_radius(w: &TilingWindow) -> f64 {
    (0..w.dim())
        .map(|i| (-w.window.lo[i]).min(w.window.hi[i]))
        .fold(f64::INFINITY, f64::min)
}

/// Sub-patches of `w` whose support contains the open ball of radius `r`:
/// the tiles meeting the ball, plus in one dimension up to two more tiles on
/// either side.
fn covering_subpatches(w: &TilingWindow, r: f64) -> Vec<Vec<Tile>> {
    let tiles = w.patch.tiles();
    let origin = [0.0; 3];
    let meets: Vec<usize> = (0..tiles.len())
        .filter(|&i| tiles[i].support.distance_to_point(&origin[..w.dim()]) < r)
        .collect();
    if w.dim() != 1 || meets.is_empty() {
        return vec![meets.iter().map(|&i| tiles[i]).collect()];
    }
    // one-dimensional tiles are in left-to-right order and the cover is contiguous
    let (first, last) = (meets[0], *meets.last().unwrap());
    let mut out = Vec::new();
    for left in 0..=2usize.min(first) {
        for right in 0..=2usize.min(tiles.len() - 1 - last) {
            out.push(tiles[first - left..=last + right].to_vec());
        }
    }
    out
}

/// True when some pair of sub-patches covering `B_{1/eps}(0)` lies within
/// `eps`, which certifies `d(T1, T2) <= eps`.
pub fn tilings_close(t1: &TilingWindow, t2: &TilingWindow, eps: f64, metric: &LabelMetric) -> Result<bool> {
    if t1.dim() != t2.dim() {
        return Err(IlcError::DimensionMismatch(t1.dim(), t2.dim()));
    }
    if eps > 1.0 {
        return Ok(true);
    }
    let r = 1.0 / eps;
    let reach = inner_radius(t1).min(inner_radius(t2));
    if reach < r {
        return Err(IlcError::InsufficientWindow(format!(
            "the ball of radius {r} is not inside the windows (inner radius {reach})"
        )));
    }
    let c1 = covering_subpatches(t1, r);
    let c2 = covering_subpatches(t2, r);
    for a in &c1 {
        for b in c2.iter().filter(|b| b.len() == a.len()) {
            if ordered_match_value(a, b, metric) < eps || match_tiles(a, b, metric).value < eps {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Tiling distance to within `tol`, found by bisection on `eps`.
pub fn tiling_distance(t1: &TilingWindow, t2: &TilingWindow, tol: f64) -> Result<f64> {
    tiling_distance_with(t1, t2, tol, &LabelMetric::default())
}

pub fn tiling_distance_with(t1: &TilingWindow, t2: &TilingWindow, tol: f64, metric: &LabelMetric) -> Result<f64> {
    if tol <= 0.0 {
        return Err(IlcError::Validation("tolerance must be positive".into()));
    }
    let reach = inner_radius(t1).min(inner_radius(t2));
    if reach < 1.0 {
        return Err(IlcError::InsufficientWindow(format!(
            "windows must contain the unit ball about the origin (inner radius {reach})"
        )));
    }
    if !tilings_close(t1, t2, 1.0, metric)? {
        return Ok(1.0);
    }
    let eps_min = 1.0 / reach;
    if tilings_close(t1, t2, eps_min, metric)? {
        if eps_min <= tol {
            return Ok(eps_min);
        }
        return Err(IlcError::InsufficientWindow(format!(
            "distance is at most {eps_min}; certifying it to {tol} needs radius {}",
            1.0 / tol
        )));
    }
    let (mut lo, mut hi) = (eps_min, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if tilings_close(t1, t2, mid, metric)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `d_L` evaluated on a grid of translates, with the grid step used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowDistance {
    pub value: f64,
    pub step: f64,
}

/// `sup_{x in [0,L]^d} d(T1 - x, T2 - x)` over grid points; a lower bound
/// that converges to the supremum as the step shrinks.
pub fn dl_distance(
    t1: &TilingWindow,
    t2: &TilingWindow,
    big_l: f64,
    step: f64,
    tol: f64,
    metric: &LabelMetric,
) -> Result<WindowDistance> {
    if big_l < 0.0 || step <= 0.0 {
        return Err(IlcError::Validation("need L >= 0 and a positive step".into()));
    }
    let d = t1.dim();
    let per_axis = (big_l / step).ceil() as usize + 1;
    let used_step = if per_axis > 1 {
        big_l / (per_axis - 1) as f64
    } else {
        0.0
    };
    let mut value: f64 = 0.0;
    let total = per_axis.pow(d as u32);
    for idx in 0..total {
        let mut x = [0.0; 3];
        let mut rest = idx;
        for slot in x.iter_mut().take(d) {
            *slot = -((rest % per_axis) as f64 * used_step);
            rest /= per_axis;
        }
        let a = t1.translate(&x[..d]);
        let b = t2.translate(&x[..d]);
        value = value.max(tiling_distance_with(&a, &b, tol, metric)?);
        if value >= 1.0 {
            break;
        }
    }
    Ok(WindowDistance {
        value,
        step: used_step.max(step.min(big_l)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{validate_patch, Provenance, System, GEOM_TOL};
    use proptest::prelude::*;

    fn seg(a: f64, b: f64) -> Aabb {
        Aabb::interval(a, b)
    }

    fn len_tile(a: f64, len: f64) -> Tile {
        Tile::at_lower_corner(Label::Length(len), seg(a, a + len))
    }

    /// Window of tiles with the given lengths laid out from `start`.
    fn line(start: f64, lengths: &[f64], window: Aabb) -> TilingWindow {
        let mut x = start;
        let mut tiles = Vec::new();
        for &l in lengths {
            tiles.push(len_tile(x, l));
            x += l;
        }
        let patch = validate_patch(tiles, GEOM_TOL).unwrap();
        TilingWindow::new(patch, window, Provenance::new(System::VarLength, 0, 1)).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_distance(&seg(0.0, 1.0), &seg(0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&seg(0.0, 1.0), &seg(0.0, 3.0)).unwrap(), 2.0);
        assert!((hausdorff_distance(&seg(0.0, 1.0), &seg(0.3, 1.3)).unwrap() - 0.3).abs() < 1e-15);
        let sq = Aabb::rect(0.0, 0.0, 1.0, 1.0);
        assert!(hausdorff_distance(&sq, &seg(0.0, 1.0)).is_err());
        // corner of the larger square is sqrt(2) from the unit square
        let big = Aabb::rect(0.0, 0.0, 2.0, 2.0);
        assert!((hausdorff_distance(&sq, &big).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tile_distance_examples() {
        let t1 = len_tile(0.0, 1.0);
        let t3 = len_tile(0.0, 3.0);
        assert_eq!(tile_distance(&t1, &t1).unwrap(), 0.0);
        assert_eq!(tile_distance(&t1, &t3).unwrap(), 2.0);
        let d = tile_distance(&t3, &t3.translate(&[0.01])).unwrap();
        assert!((d - 0.01).abs() < 1e-15);
        let s = Tile::at_lower_corner(Label::Symbol(0), seg(0.0, 1.0));
        assert!(matches!(tile_distance(&t1, &s), Err(IlcError::SystemMismatch(..))));
    }

    #[test]
    fn patch_distance_examples() {
        let p = validate_patch(vec![len_tile(0.0, 1.5), len_tile(1.5, 2.0)], GEOM_TOL).unwrap();
        assert_eq!(patch_distance(&p, &p), 0.0);
        assert!((patch_distance(&p, &p.translate(&[0.01])) - 0.01).abs() < 1e-15);
        let q = validate_patch(
            vec![len_tile(0.0, 1.0), len_tile(1.0, 1.0), len_tile(2.0, 1.0)],
            GEOM_TOL,
        )
        .unwrap();
        assert_eq!(patch_distance(&p, &q), 1.0);
    }

    #[test]
    fn swapped_symbols_use_the_assignment_search() {
        // the ordered pairing costs 1 (labels differ); swapping costs a full shift
        let a = |x: f64, s| Tile::at_lower_corner(Label::Symbol(s), seg(x, x + 1.0));
        let p = validate_patch(vec![a(0.0, 0), a(1.0, 1)], GEOM_TOL).unwrap();
        let q = validate_patch(vec![a(0.0, 1), a(1.0, 0)], GEOM_TOL).unwrap();
        let m = patch_distance_with(&p, &q, &LabelMetric::default());
        assert_eq!(m.value, 1.0);
        let r = validate_patch(vec![a(0.5, 0), a(1.5, 1)], GEOM_TOL).unwrap();
        let m = patch_distance_with(&p, &r, &LabelMetric::default());
        assert_eq!(m.value, 0.5);
        assert_eq!(m.assignment, vec![0, 1]);
    }

    #[test]
    fn tiling_distance_self_and_agreement_radius() {
        let lengths = vec![1.25; 240];
        let t = line(-150.0, &lengths, seg(-140.0, 140.0));
        assert!(tiling_distance(&t, &t, 0.01).unwrap() <= 0.01);

        // identical on [-20, 20], different lengths beyond
        let mut other = lengths.clone();
        for l in other.iter_mut().take(100) {
            *l = 1.5;
        }
        for l in other.iter_mut().skip(136) {
            *l = 1.5;
        }
        let start = -(100.0 * 1.5 + 20.0 * 1.25);
        let u = line(start, &other, seg(-140.0, 140.0));
        let t2 = line(-150.0, &lengths, seg(-140.0, 140.0));
        let d = tiling_distance(&t2, &u, 1e-3).unwrap();
        assert!(d <= 1.0 / 20.0 + 1e-3, "d = {d}");
        assert!(d > 0.0);
    }

    #[test]
    fn different_labels_everywhere_cap_at_one() {
        let sym = |s: u32| {
            let tiles = (-30..30)
                .map(|i| Tile::at_lower_corner(Label::Symbol(s), seg(i as f64, i as f64 + 1.0)))
                .collect();
            let patch = validate_patch(tiles, GEOM_TOL).unwrap();
            TilingWindow::new(patch, seg(-30.0, 30.0), Provenance::new(System::Symbolic, 0, 1)).unwrap()
        };
        assert_eq!(tiling_distance(&sym(0), &sym(1), 1e-3).unwrap(), 1.0);
    }

    #[test]
    fn insufficient_window_is_reported() {
        let t = line(-3.0, &[1.5; 4], seg(-3.0, 3.0));
        assert!(matches!(
            tiling_distance(&t, &t, 0.01),
            Err(IlcError::InsufficientWindow(_))
        ));
    }

    #[test]
    fn dl_is_monotone_in_l() {
        let lengths: Vec<f64> = (0..120).map(|i| 1.0 + (i % 7) as f64 * 0.25).collect();
        let t = line(-100.0, &lengths, seg(-90.0, 90.0));
        let u = t.translate(&[0.05]);
        let m = LabelMetric::default();
        let w = crate::geometry::Aabb::interval(-85.0, 85.0);
        let u = TilingWindow::new(u.patch.clone(), w, u.provenance.clone()).unwrap();
        let t = TilingWindow::new(t.patch.clone(), w, t.provenance.clone()).unwrap();
        let small = dl_distance(&t, &u, 2.0, 0.5, 0.01, &m).unwrap();
        let large = dl_distance(&t, &u, 4.0, 0.5, 0.01, &m).unwrap();
        assert!(large.value >= small.value);
        assert!(dl_distance(&t, &t, 2.0, 0.5, 0.02, &m).unwrap().value <= 0.02);
    }

    fn arb_len_patch(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(1.0f64..3.0, n)
    }

    proptest! {
        #[test]
        fn patch_metric_axioms(a in arb_len_patch(3), b in arb_len_patch(3), c in arb_len_patch(3),
                               sa in -1.0f64..1.0, sb in -1.0f64..1.0, sc in -1.0f64..1.0) {
            let mk = |ls: &[f64], s: f64| {
                let mut x = s;
                let tiles = ls.iter().map(|&l| { let t = len_tile(x, l); x += l; t }).collect();
                validate_patch(tiles, GEOM_TOL).unwrap()
            };
            let (p, q, r) = (mk(&a, sa), mk(&b, sb), mk(&c, sc));
            let d = |x: &Patch, y: &Patch| patch_distance(x, y);
            prop_assert_eq!(d(&p, &p), 0.0);
            prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-12);
            prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12);
        }
    }
}
