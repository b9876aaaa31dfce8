//! The variable tile-length substitution on `[1, 3]`:
//! `t_x -> t_{3x/2}` for `x <= 2`, and `t_x -> t_x t_{x/2}` for `x > 2`.

use crate::error::{IlcError, Result};
use crate::geometry::{Aabb, Label, Patch, Provenance, System, Tile, TilingWindow, Translate};

/// Default cap on the number of tiles in one supertile.
pub const DEFAULT_TILE_CAP: u64 = 100_000_000;

/// Expansion factor.
pub const SCALE: f64 = 1.5;

fn check_length(x: f64) -> Result<()> {
    if !(1.0..=3.0).contains(&x) || !x.is_finite() {
        return Err(IlcError::OutOfRange {
            value: x,
            lo: 1.0,
            hi: 3.0,
        });
    }
    Ok(())
}

/// Lengths of the tiles that `t_x` substitutes to, left to right.
pub fn substitute(x: f64) -> Result<Vec<f64>> {
    check_length(x)?;
    Ok(if x <= 2.0 { vec![1.5 * x] } else { vec![x, x / 2.0] })
}

/// A tile of a supertile of length `L`, of length `(2^j / 3^k) L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponents {
    pub j: u32,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarSupertile {
    pub level: u32,
    pub seed: f64,
    pub tiles: Vec<Exponents>,
}

/// `x 3^p / 2^q`, rounded once.
fn scaled(x: f64, p: u32, q: u32) -> f64 {
    x * 3f64.powi(p as i32) / 2f64.powi(q as i32)
}

impl VarSupertile {
    pub fn total_length(&self) -> f64 {
        scaled(self.seed, self.level, self.level)
    }

    pub fn length_of(&self, e: Exponents) -> f64 {
        // (2^j / 3^k)(3/2)^n x = x 3^(n-k) / 2^(n-j)
        scaled(self.seed, self.level - e.k, self.level - e.j)
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.tiles.iter().map(|&e| self.length_of(e)).collect()
    }

    /// Left endpoints, starting at 0.
    pub fn left_endpoints(&self) -> Vec<f64> {
        let mut x = 0.0;
        self.tiles
            .iter()
            .map(|&e| {
                let at = x;
                x += self.length_of(e);
                at
            })
            .collect()
    }

    pub fn patch(&self) -> Patch {
        let lefts = self.left_endpoints();
        let tiles = self
            .tiles
            .iter()
            .zip(lefts)
            .map(|(&e, a)| {
                let l = self.length_of(e);
                Tile::at_lower_corner(Label::Length(l), Aabb::interval(a, a + l))
            })
            .collect();
        Patch::from_trusted(tiles)
    }

    /// The supertile as a window, shifted so that the left endpoint of tile
    /// `anchor` sits at the origin.
    pub fn window_at(&self, anchor: usize) -> Result<TilingWindow> {
        if anchor >= self.tiles.len() {
            return Err(IlcError::Validation(format!(
                "anchor {anchor} out of range for {} tiles",
                self.tiles.len()
            )));
        }
        let patch = self.patch();
        let offset = patch.tiles()[anchor].control()[0];
        let total = patch.tiles().last().map_or(0.0, |t| t.support.hi[0]);
        let prov = Provenance::new(System::VarLength, self.level, 1).with_param("seed", self.seed);
        let w = TilingWindow::from_trusted(patch, Aabb::interval(0.0, total), prov);
        Ok(w.translate(&[-offset]))
    }
}

pub fn iterate(x: f64, n: u32) -> Result<VarSupertile> {
    iterate_capped(x, n, DEFAULT_TILE_CAP)
}

/// Applies the substitution `n` times, tracking each length as
/// `x 3^p / 2^q` so the comparison with 2 is made on a single rounding.
pub fn iterate_capped(x: f64, n: u32, cap: u64) -> Result<VarSupertile> {
    check_length(x)?;
    // tiles are at least 1 long, so the count is at most the total length
    let bound = scaled(x, n, n).floor() as u64;
    if bound > cap {
        return Err(IlcError::SizeLimit {
            requested: bound,
            limit: cap,
        });
    }
    // (p, q) with length x 3^p / 2^q after the current number of steps
    let mut tiles: Vec<(u32, u32)> = vec![(0, 0)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(tiles.len() * 2);
        for &(p, q) in &tiles {
            if scaled(x, p, q) <= 2.0 {
                next.push((p + 1, q + 1));
            } else {
                next.push((p, q));
                next.push((p, q + 1));
            }
        }
        tiles = next;
    }
    Ok(VarSupertile {
        level: n,
        seed: x,
        tiles: tiles
            .into_iter()
            .map(|(p, q)| Exponents { j: n - q, k: n - p })
            .collect(),
    })
}

/// `[(3/2)^n, 3 (3/2)^n]`.
pub fn supertile_length_range(n: u32) -> (f64, f64) {
    let s = SCALE.powi(n as i32);
    (s, 3.0 * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubSupertile {
    pub j: u32,
    pub k: u32,
    pub length: f64,
}

/// The `n`-supertiles of the `N`-supertile of length `big_l`, left to right.
pub fn sub_supertile_lengths(big_l: f64, big_n: u32, n: u32) -> Result<Vec<SubSupertile>> {
    if n >= big_n {
        return Err(IlcError::Validation(format!("need n < N, got n={n}, N={big_n}")));
    }
    let (lo, hi) = supertile_length_range(big_n);
    if !(lo..=hi).contains(&big_l) {
        return Err(IlcError::OutOfRange { value: big_l, lo, hi });
    }
    // S^N(t_y) = S^n(S^(N-n)(t_y)) with y = L / (3/2)^N
    let y = (big_l / SCALE.powi(big_n as i32)).clamp(1.0, 3.0);
    let st = iterate(y, big_n - n)?;
    let s = SCALE.powi(n as i32);
    Ok(st
        .tiles
        .iter()
        .map(|&e| SubSupertile {
            j: e.j,
            k: e.k,
            length: st.length_of(e) * s,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitivityReport {
    pub n: u32,
    pub eps: f64,
    /// Level at which the gaps were measured.
    pub big_n: u32,
    /// Largest gap between realized `n`-supertile lengths, per sample.
    pub max_gaps: Vec<(f64, f64)>,
    pub passed: bool,
    /// Smallest level in `n+1..=big_n` at which every sample passes.
    pub minimal_level: Option<u32>,
}

/// Largest gap left in `[(3/2)^n, 3 (3/2)^n]` by the realized lengths,
/// including the gaps at the two ends.
pub fn largest_gap(lengths: &[f64], n: u32) -> f64 {
    let (lo, hi) = supertile_length_range(n);
    let mut v: Vec<f64> = lengths.to_vec();
    v.sort_by(f64::total_cmp);
    let mut prev = lo;
    let mut gap: f64 = 0.0;
    for x in v {
        gap = gap.max(x - prev);
        prev = x;
    }
    gap.max(hi - prev)
}

fn gaps_at(n: u32, big_n: u32, seeds: &[f64]) -> Result<Vec<(f64, f64)>> {
    seeds
        .iter()
        .map(|&x| {
            let big_l = x * SCALE.powi(big_n as i32);
            let lens: Vec<f64> = sub_supertile_lengths(big_l, big_n, n)?
                .iter()
                .map(|s| s.length)
                .collect();
            Ok((x, largest_gap(&lens, n)))
        })
        .collect()
}

/// Checks that every sampled `N`-supertile (length `(3/2)^N x` for each seed
/// `x`) contains `n`-supertiles of every length up to `eps`.
pub fn check_primitivity(n: u32, eps: f64, big_n: u32, seeds: &[f64]) -> Result<PrimitivityReport> {
    if eps <= 0.0 || big_n <= n {
        return Err(IlcError::Validation("need eps > 0 and N > n".into()));
    }
    for &x in seeds {
        check_length(x)?;
    }
    let max_gaps = gaps_at(n, big_n, seeds)?;
    let passed = max_gaps.iter().all(|&(_, g)| g < eps);
    let mut minimal_level = None;
    for level in n + 1..=big_n {
        let gaps = if level == big_n {
            max_gaps.clone()
        } else {
            gaps_at(n, level, seeds)?
        };
        if gaps.iter().all(|&(_, g)| g < eps) {
            minimal_level = Some(level);
            break;
        }
    }
    Ok(PrimitivityReport {
        n,
        eps,
        big_n,
        max_gaps,
        passed,
        minimal_level,
    })
}

fn lengths_by_side(w: &TilingWindow) -> Result<(Vec<f64>, Vec<f64>)> {
    let tiles = w.patch.tiles();
    let origin = tiles
        .iter()
        .position(|t| t.control()[0].abs() <= 1e-9)
        .ok_or_else(|| IlcError::Validation("no tile has its left endpoint at the origin".into()))?;
    let len = |t: &Tile| match t.label {
        Label::Length(l) => Ok(l),
        other => Err(IlcError::SystemMismatch("subst1d", other.system().name())),
    };
    let inside = |t: &&Tile| w.window.contains_box(&t.support, 1e-9);
    let right = tiles[origin..]
        .iter()
        .take_while(inside)
        .map(len)
        .collect::<Result<_>>()?;
    let left = tiles[..origin]
        .iter()
        .rev()
        .take_while(inside)
        .map(len)
        .collect::<Result<_>>()?;
    Ok((right, left))
}

/// Where two transversal windows first disagree about tiles being at most
/// `3/2` long, scanning outward from the origin tile by tile; the position
/// reported is the left endpoint in the first window.
pub fn transversal_discriminator(w1: &TilingWindow, w2: &TilingWindow) -> Result<Option<f64>> {
    let (r1, l1) = lengths_by_side(w1)?;
    let (r2, l2) = lengths_by_side(w2)?;
    if r1.is_empty() || r2.is_empty() {
        return Err(IlcError::InsufficientWindow(
            "the origin tile is not inside the window".into(),
        ));
    }
    let small = |x: f64| x <= 1.5;
    let (mut right_at, mut left_at) = (0.0, 0.0);
    let steps = r1.len().max(l1.len()).max(r2.len()).max(l2.len());
    for i in 0..steps {
        if let (Some(&a), Some(&b)) = (r1.get(i), r2.get(i)) {
            if small(a) != small(b) {
                return Ok(Some(right_at));
            }
            right_at += a;
        }
        if let (Some(&a), Some(&b)) = (l1.get(i), l2.get(i)) {
            left_at -= a;
            if small(a) != small(b) {
                return Ok(Some(left_at));
            }
        }
    }
    Ok(None)
}
