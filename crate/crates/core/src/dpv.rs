//! The direct product variation: a rearranged product of the horizontal
//! substitution `a -> abbb, b -> a` with vertical doubling.
//!
//! ```text
//!         A B B B
//!   A ->  B B B A       B -> A
//!                            A
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{IlcError, Result};
use crate::geometry::{Aabb, Label, Patch, Provenance, System, Tile, TilingWindow, GEOM_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DpvKind {
    A,
    B,
}

impl DpvKind {
    pub fn index(self) -> usize {
        match self {
            DpvKind::A => 0,
            DpvKind::B => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DpvKind::A => "A",
            DpvKind::B => "B",
        }
    }
}

/// Which rearrangement to apply to the product of the two 1D substitutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DpvRule {
    /// Bottom row `B B B A`, top row `A B B B`.
    Varied,
    /// Both rows `A B B B`: the plain direct product.
    Product,
}

impl DpvRule {
    fn rows(self, kind: DpvKind) -> &'static [&'static [DpvKind]] {
        use DpvKind::*;
        match (self, kind) {
            (DpvRule::Varied, A) => &[&[B, B, B, A], &[A, B, B, B]],
            (DpvRule::Product, A) => &[&[A, B, B, B], &[A, B, B, B]],
            (_, B) => &[&[A], &[A]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpvParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `a/b = p/q` in lowest terms, when declared rational.
    pub ratio: Option<(u64, u64)>,
}

/// Natural width of `A` for the horizontal substitution (the Perron
/// eigenvalue of `a -> abbb, b -> a` when `b = 1`).
pub fn natural_a() -> f64 {
    (1.0 + 13f64.sqrt()) / 2.0
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl DpvParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<DpvParams> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(IlcError::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(DpvParams { a, b, c, ratio: None })
    }

    pub fn natural() -> DpvParams {
        DpvParams::new(natural_a(), 1.0, 1.0).unwrap()
    }

    /// Widths with declared ratio `a/b = p/q`.
    pub fn rational(p: u64, q: u64, b: f64, c: f64) -> Result<DpvParams> {
        if p == 0 || q == 0 {
            return Err(IlcError::Validation("ratio terms must be positive".into()));
        }
        let g = gcd(p, q);
        let (p, q) = (p / g, q / g);
        let mut params = DpvParams::new(b * p as f64 / q as f64, b, c)?;
        params.ratio = Some((p, q));
        Ok(params)
    }

    pub fn width(&self, kind: DpvKind) -> f64 {
        match kind {
            DpvKind::A => self.a,
            DpvKind::B => self.b,
        }
    }

    /// Width of the image of a tile under one horizontal substitution step.
    fn image_width(&self, kind: DpvKind) -> f64 {
        match kind {
            DpvKind::A => self.a + 3.0 * self.b,
            DpvKind::B => self.a,
        }
    }
}

pub fn dpv_tile(kind: DpvKind, x: f64, y: f64, params: &DpvParams) -> Tile {
    Tile::at_lower_corner(Label::Dpv(kind), Aabb::rect(x, y, params.width(kind), params.c))
}

fn kind_of(t: &Tile) -> Result<DpvKind> {
    match t.label {
        Label::Dpv(k) => Ok(k),
        other => Err(IlcError::SystemMismatch("dpv", other.system().name())),
    }
}

/// Groups tiles into rows by their lower edge; each row is sorted by `x`.
fn rows_of(tiles: &[Tile], c: f64) -> Vec<(f64, Vec<Tile>)> {
    let mut rows: Vec<(f64, Vec<Tile>)> = Vec::new();
    for t in tiles {
        let y = t.support.lo[1];
        match rows.iter_mut().find(|(ry, _)| (ry - y).abs() <= GEOM_TOL * c.max(1.0)) {
            Some((_, r)) => r.push(*t),
            None => rows.push((y, vec![*t])),
        }
    }
    for (_, r) in rows.iter_mut() {
        r.sort_by(|p, q| p.support.lo[0].total_cmp(&q.support.lo[0]));
    }
    rows.sort_by(|p, q| p.0.total_cmp(&q.0));
    rows
}

/// One substitution step applied to a patch whose rows share a left edge.
///
/// Horizontal positions follow the 1D substitution (`a -> a + 3b`, `b -> a`),
/// heights double from the bottom edge of the patch.
pub fn dpv_substitute(patch: &Patch, params: &DpvParams, rule: DpvRule) -> Result<Patch> {
    let bbox = patch
        .bounding_box()
        .ok_or_else(|| IlcError::Validation("empty patch".into()))?;
    if bbox.dim != 2 {
        return Err(IlcError::DimensionMismatch(2, bbox.dim));
    }
    let (x0, y0) = (bbox.lo[0], bbox.lo[1]);
    let tol = GEOM_TOL * (1.0 + bbox.side(0));
    let mut out = Vec::with_capacity(patch.len() * 8);
    for (y, row) in rows_of(patch.tiles(), params.c) {
        if (row[0].support.lo[0] - x0).abs() > tol {
            return Err(IlcError::Validation(format!(
                "row at height {y} does not start at the left edge {x0}"
            )));
        }
        let new_y = y0 + 2.0 * (y - y0);
        let mut x = x0;
        let mut expected = x0;
        for (i, t) in row.iter().enumerate() {
            let kind = kind_of(t)?;
            let (lo, hi) = (t.support.lo[0], t.support.hi[0]);
            if (lo - expected).abs() > tol || (hi - lo - params.width(kind)).abs() > tol {
                return Err(IlcError::Overlap {
                    first: i.saturating_sub(1),
                    second: i,
                    depth: ((lo - expected).abs()).max((hi - lo - params.width(kind)).abs()),
                    tol,
                });
            }
            expected = hi;
            for (r, kinds) in rule.rows(kind).iter().enumerate() {
                let mut cx = x;
                for &k in kinds.iter() {
                    out.push(dpv_tile(k, cx, new_y + r as f64 * params.c, params));
                    cx += params.width(k);
                }
            }
            x += params.image_width(kind);
        }
    }
    Ok(Patch::from_trusted(out))
}

/// `P_n(kind)` with its lower-left corner at the origin.
pub fn dpv_supertile(kind: DpvKind, n: u32, params: &DpvParams, rule: DpvRule) -> Result<Patch> {
    let count = column_sum(&matrix_power(n), kind.index());
    if count > DPV_TILE_CAP {
        return Err(IlcError::SizeLimit {
            requested: count,
            limit: DPV_TILE_CAP,
        });
    }
    let mut p = Patch::from_trusted(vec![dpv_tile(kind, 0.0, 0.0, params)]);
    for _ in 0..n {
        p = dpv_substitute(&p, params, rule)?;
    }
    Ok(p)
}

/// Largest supertile the generators will build.
pub const DPV_TILE_CAP: u64 = 50_000_000;

pub fn dpv_window(kind: DpvKind, n: u32, params: &DpvParams, rule: DpvRule) -> Result<TilingWindow> {
    let patch = dpv_supertile(kind, n, params, rule)?;
    let window = patch.bounding_box().expect("supertiles are nonempty");
    let prov = Provenance::new(System::Dpv, n, 2)
        .with_param("a", params.a)
        .with_param("b", params.b)
        .with_param("c", params.c);
    Ok(TilingWindow::from_trusted(patch, window, prov))
}

pub type Matrix2 = [[u64; 2]; 2];

/// Entry `(i, j)` counts tiles of type `i` in the substitution of type `j`.
pub fn transition_matrix() -> Matrix2 {
    [[2, 2], [6, 0]]
}

fn mat_mul(x: &Matrix2, y: &Matrix2) -> Matrix2 {
    let mut z = [[0u64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            z[i][j] = (0..2).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    z
}

pub fn matrix_power(n: u32) -> Matrix2 {
    let m = transition_matrix();
    (0..n).fold([[1, 0], [0, 1]], |acc, _| mat_mul(&m, &acc))
}

pub fn column_sum(m: &Matrix2, j: usize) -> u64 {
    m[0][j] + m[1][j]
}

/// Perron eigenvalue `1 + sqrt(13)` and the eigenvector `(lambda, 6)` with
/// `M v = lambda v` for the column convention of [`transition_matrix`].
pub fn perron_data() -> (f64, [f64; 2]) {
    let lambda = 1.0 + 13f64.sqrt();
    (lambda, [lambda, 6.0])
}

/// `(Vol P_n(A), Vol P_n(B)) = (ac, bc) M^n`.
pub fn supertile_volumes(n: u32, params: &DpvParams) -> [f64; 2] {
    let m = matrix_power(n);
    let unit = [params.a * params.c, params.b * params.c];
    [0, 1].map(|j| unit[0] * m[0][j] as f64 + unit[1] * m[1][j] as f64)
}

/// Frequencies `(rho_n(A), rho_n(B)) = (lambda, 6) / K` and the normalizer `K`.
pub fn supertile_frequencies(n: u32, params: &DpvParams) -> ([f64; 2], f64) {
    let (lambda, v) = perron_data();
    let vol = supertile_volumes(n, params);
    let k = v[0] * vol[0] + v[1] * vol[1];
    debug_assert!(lambda > 0.0);
    ([v[0] / k, v[1] / k], k)
}

/// A unit 2-face of the integer lattice, spanned by horizontal direction
/// `tag.0` and vertical direction `tag.1` from `corner`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Facet {
    pub corner: Vec<i64>,
    pub tag: (u8, u8),
}

/// Offset from the image corner and tag of one child facet.
pub type FacetChild = (Vec<i64>, (u8, u8));

/// Facet substitution for a DPV with `h` horizontal and `v` vertical letters,
/// living in `Z^(h+v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetSubstitution {
    pub h: usize,
    pub v: usize,
    /// Image of each basis vector under the linear part (column `i` is the
    /// image of `e_i`).
    pub linear: Vec<Vec<i64>>,
    /// Children of the facet with each tag, as `(offset, tag)`.
    pub children: Vec<((u8, u8), Vec<FacetChild>)>,
}

impl FacetSubstitution {
    /// The two-letter example: `e1 -> (1,3,0)`, `e2 -> (1,0,0)`, `e3 -> (0,0,2)`.
    pub fn standard(rule: DpvRule) -> FacetSubstitution {
        let linear = vec![vec![1, 3, 0], vec![1, 0, 0], vec![0, 0, 2]];
        let mut children = Vec::new();
        for kind in [DpvKind::A, DpvKind::B] {
            let mut list = Vec::new();
            for (r, row) in rule.rows(kind).iter().enumerate() {
                // walk the staircase of the row: an A steps along e1, a B along e2
                let mut pos = vec![0i64, 0, r as i64];
                for &k in row.iter() {
                    list.push((pos.clone(), (k.index() as u8, 0)));
                    pos[k.index()] += 1;
                }
            }
            children.push(((kind.index() as u8, 0), list));
        }
        FacetSubstitution {
            h: 2,
            v: 1,
            linear,
            children,
        }
    }

    fn apply_linear(&self, p: &[i64]) -> Vec<i64> {
        let dim = self.h + self.v;
        (0..dim)
            .map(|r| (0..dim).map(|c| self.linear[c][r] * p[c]).sum())
            .collect()
    }

    pub fn step(&self, surface: &FacetSurface) -> FacetSurface {
        let mut facets: Vec<Facet> = surface
            .facets
            .iter()
            .flat_map(|f| {
                let base = self.apply_linear(&f.corner);
                let kids = &self
                    .children
                    .iter()
                    .find(|(t, _)| *t == f.tag)
                    .expect("every tag has children")
                    .1;
                kids.iter().map(move |(off, tag)| Facet {
                    corner: base.iter().zip(off).map(|(b, o)| b + o).collect(),
                    tag: *tag,
                })
            })
            .collect();
        facets.sort();
        facets.dedup();
        FacetSurface { facets }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetSurface {
    /// Distinct facets in sorted order.
    pub facets: Vec<Facet>,
}

pub fn build_stepped_surface(kind: DpvKind, n: u32, rule: DpvRule) -> Result<FacetSurface> {
    let count = column_sum(&matrix_power(n), kind.index());
    if count > DPV_TILE_CAP {
        return Err(IlcError::SizeLimit {
            requested: count,
            limit: DPV_TILE_CAP,
        });
    }
    let sub = FacetSubstitution::standard(rule);
    let mut s = FacetSurface {
        facets: vec![Facet {
            corner: vec![0, 0, 0],
            tag: (kind.index() as u8, 0),
        }],
    };
    for _ in 0..n {
        s = sub.step(&s);
    }
    Ok(s)
}

/// Projects a surface to the plane by `(a b 0; 0 0 c)`, or in general by
/// the horizontal widths and vertical heights.
pub fn project_surface_general(surface: &FacetSurface, widths: &[f64], heights: &[f64]) -> Result<Patch> {
    let h = widths.len();
    let tiles: Vec<Tile> = surface
        .facets
        .iter()
        .map(|f| {
            let x: f64 = (0..h).map(|i| widths[i] * f.corner[i] as f64).sum();
            let y: f64 = (0..heights.len()).map(|j| heights[j] * f.corner[h + j] as f64).sum();
            let label = if h == 2 && heights.len() == 1 {
                Label::Dpv(if f.tag.0 == 0 { DpvKind::A } else { DpvKind::B })
            } else {
                Label::Symbol(f.tag.0 as u32 * 256 + f.tag.1 as u32)
            };
            let support = Aabb::rect(x, y, widths[f.tag.0 as usize], heights[f.tag.1 as usize]);
            Tile::at_lower_corner(label, support)
        })
        .collect();
    crate::geometry::validate_patch(tiles, GEOM_TOL)
}

pub fn project_surface(surface: &FacetSurface, params: &DpvParams) -> Result<Patch> {
    project_surface_general(surface, &[params.a, params.b], &[params.c])
}

/// Places in a surface where the top of one row of facets and the bottom of
/// the next do not meet: missing faces parallel to the horizontal plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hole {
    /// Lattice height of the plane containing the hole.
    pub height: i64,
    /// Lattice points on exactly one of the two staircases.
    pub unshared_points: usize,
}

pub fn surface_holes(surface: &FacetSurface) -> Vec<Hole> {
    use std::collections::{BTreeMap, BTreeSet};
    let h = 2;
    // lattice points of the horizontal staircase at the bottom (k) and top (k+1) of each facet
    let mut bottoms: BTreeMap<i64, BTreeSet<Vec<i64>>> = BTreeMap::new();
    let mut tops: BTreeMap<i64, BTreeSet<Vec<i64>>> = BTreeMap::new();
    for f in &surface.facets {
        let k = f.corner[h];
        let start: Vec<i64> = f.corner[..h].to_vec();
        let mut end = start.clone();
        end[f.tag.0 as usize] += 1;
        for p in [start, end] {
            bottoms.entry(k).or_default().insert(p.clone());
            tops.entry(k + 1).or_default().insert(p);
        }
    }
    let mut holes = Vec::new();
    for (k, below) in &tops {
        if let Some(above) = bottoms.get(k) {
            let unshared = below.symmetric_difference(above).count();
            if unshared > 0 {
                holes.push(Hole {
                    height: *k,
                    unshared_points: unshared,
                });
            }
        }
    }
    holes
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultLine {
    pub y: f64,
    /// Signed displacement from each interior vertical edge above the line to
    /// the nearest vertical edge below it.
    pub offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultLineReport {
    pub lines: Vec<FaultLine>,
    /// Smallest nonzero offset magnitude over all lines.
    pub min_positive: Option<f64>,
    /// Heights of tile edges that do not run across the whole patch.
    pub partial: Vec<f64>,
}

impl FaultLineReport {
    /// Distinct nonzero offset magnitudes, merged within `tol`.
    pub fn distinct_offsets(&self, tol: f64) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .lines
            .iter()
            .flat_map(|l| l.offsets.iter().map(|o| o.abs()))
            .filter(|&o| o > tol)
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup_by(|x, y| (*x - *y).abs() <= tol);
        all
    }
}

pub fn find_fault_lines(patch: &Patch) -> Result<FaultLineReport> {
    let bbox = patch
        .bounding_box()
        .ok_or_else(|| IlcError::Validation("empty patch".into()))?;
    if bbox.dim != 2 {
        return Err(IlcError::DimensionMismatch(2, bbox.dim));
    }
    let tol = GEOM_TOL * (1.0 + bbox.side(0).max(bbox.side(1)));
    let tiles = patch.tiles();
    let mut heights: Vec<f64> = tiles.iter().map(|t| t.support.lo[1]).collect();
    heights.retain(|&y| y > bbox.lo[1] + tol);
    heights.sort_by(f64::total_cmp);
    heights.dedup_by(|x, y| (*x - *y).abs() <= tol);

    let mut lines = Vec::new();
    let mut partial = Vec::new();
    for y in heights {
        let crossing = tiles
            .iter()
            .any(|t| t.support.lo[1] < y - tol && t.support.hi[1] > y + tol);
        let edges = |above: bool| -> (Vec<f64>, f64) {
            let mut e = Vec::new();
            let mut covered = 0.0;
            for t in tiles {
                let on = if above {
                    (t.support.lo[1] - y).abs() <= tol
                } else {
                    (t.support.hi[1] - y).abs() <= tol
                };
                if on {
                    e.push(t.support.lo[0]);
                    e.push(t.support.hi[0]);
                    covered += t.support.side(0);
                }
            }
            e.sort_by(f64::total_cmp);
            e.dedup_by(|x, y| (*x - *y).abs() <= tol);
            (e, covered)
        };
        let (above, cov_above) = edges(true);
        let (below, cov_below) = edges(false);
        let full = bbox.side(0);
        if crossing || (cov_above - full).abs() > tol || (cov_below - full).abs() > tol {
            partial.push(y);
            continue;
        }
        let interior = |x: f64| x > bbox.lo[0] + tol && x < bbox.hi[0] - tol;
        let offsets = above
            .iter()
            .copied()
            .filter(|&x| interior(x))
            .map(|x| {
                let i = below.partition_point(|&b| b < x);
                let mut best = f64::INFINITY;
                for j in [i.wrapping_sub(1), i] {
                    if let Some(&b) = below.get(j) {
                        if (x - b).abs() < best.abs() {
                            best = x - b;
                        }
                    }
                }
                if best.abs() <= tol {
                    0.0
                } else {
                    best
                }
            })
            .collect();
        lines.push(FaultLine { y, offsets });
    }
    let min_positive = lines
        .iter()
        .flat_map(|l| l.offsets.iter())
        .map(|o| o.abs())
        .filter(|&o| o > 0.0)
        .fold(None, |m: Option<f64>, o| Some(m.map_or(o, |m| m.min(o))));
    Ok(FaultLineReport {
        lines,
        min_positive,
        partial,
    })
}

/// What the fault offsets force on a horizontal eigenvalue `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub enum HorizontalConstraint {
    /// `alpha . x = 0`: offsets are irrationally related or arbitrarily small.
    Zero { reason: String },
    /// `alpha . x` lies in `(1/m) Z` where `m` generates all offsets.
    Lattice { m: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConstraint {
    pub horizontal: HorizontalConstraint,
    /// The vertical eigenvalues of the solenoid hierarchy, `c Z[1/2]`.
    pub vertical: String,
}

impl std::fmt::Display for HorizontalConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HorizontalConstraint::Zero { .. } => write!(f, "alpha.x = 0"),
            HorizontalConstraint::Lattice { m } => write!(f, "alpha.x in (1/{m})Z"),
        }
    }
}

/// Settings for deciding rationality of offset ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalitySearch {
    /// Largest denominator tried.
    pub max_denominator: u64,
    /// Relative tolerance for accepting `p/q`.
    pub tol: f64,
    /// Offsets below this magnitude count as arbitrarily small.
    pub small: f64,
}

impl Default for RationalitySearch {
    fn default() -> Self {
        RationalitySearch {
            max_denominator: 1_000_000,
            tol: 1e-13,
            small: 1e-9,
        }
    }
}

/// Best rational approximation `p/q` with `q <= max_q` whose error is within
/// `tol * |r|`, from the continued fraction of `r > 0`.
pub fn rational_approx(r: f64, max_q: u64, tol: f64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut x = r;
    for _ in 0..64 {
        let a = x.floor();
        if a > u64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1).and_then(|v| v.checked_add(h0))?;
        let k2 = a.checked_mul(k1).and_then(|v| v.checked_add(k0))?;
        if k2 > max_q {
            break;
        }
        if (r - h2 as f64 / k2 as f64).abs() <= tol * r.abs().max(1e-300) {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a as f64;
        if frac <= 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

pub fn spectrum_constraints(shears: &[f64], search: &RationalitySearch) -> Result<SpectrumConstraint> {
    let vertical = "(0, c Z[1/2])".to_string();
    let nonzero: Vec<f64> = shears.iter().map(|s| s.abs()).filter(|&s| s > 1e-15).collect();
    if nonzero.is_empty() {
        return Err(IlcError::DegenerateInput("all shears are zero".into()));
    }
    if let Some(s) = nonzero.iter().find(|&&s| s < search.small) {
        return Ok(SpectrumConstraint {
            horizontal: HorizontalConstraint::Zero {
                reason: format!("offset {s:e} below {:e}", search.small),
            },
            vertical,
        });
    }
    // every offset must be an integer multiple of a common unit m
    let base = nonzero.iter().copied().fold(f64::INFINITY, f64::min);
    let mut denom_lcm: u64 = 1;
    let mut numerators = Vec::new();
    for &s in &nonzero {
        match rational_approx(s / base, search.max_denominator, search.tol) {
            Some((p, q)) => {
                numerators.push((p, q));
                denom_lcm = denom_lcm / gcd(denom_lcm, q) * q;
                if denom_lcm > search.max_denominator {
                    return Ok(SpectrumConstraint {
                        horizontal: HorizontalConstraint::Zero {
                            reason: "common denominator exceeds the search bound".into(),
                        },
                        vertical,
                    });
                }
            }
            None => {
                return Ok(SpectrumConstraint {
                    horizontal: HorizontalConstraint::Zero {
                        reason: format!("{s} and {base} are irrationally related"),
                    },
                    vertical,
                })
            }
        }
    }
    let g = numerators.iter().map(|&(p, q)| p * (denom_lcm / q)).fold(0, gcd);
    let m = base * g as f64 / denom_lcm as f64;
    Ok(SpectrumConstraint {
        horizontal: HorizontalConstraint::Lattice { m },
        vertical,
    })
}
