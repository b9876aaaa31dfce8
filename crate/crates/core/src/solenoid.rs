//! Solenoid extensions: the fusion rule `P_k(l) = P_{k-1}(l) P_{k-1}(k-1)`
//! with labels in a compactification of the nonnegative integers.

use serde::{Deserialize, Serialize};

use crate::error::{IlcError, Result};
use crate::geometry::{Aabb, Label, Patch, Provenance, System, Tile, TilingWindow, Translate};
use crate::metrics::{tilings_close, LabelMetric};

/// Largest level the brute-force transition counter will expand.
pub const BRUTE_MAX_LEVEL: u32 = 16;

/// A solenoid label: a nonnegative integer or one of the limit points.
///
/// The derived order puts every integer below every limit point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolLabel {
    Int(u32),
    Limit(u8),
}

impl std::fmt::Display for SolLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolLabel::Int(n) => write!(f, "{n}"),
            SolLabel::Limit(i) => write!(f, "inf{i}"),
        }
    }
}

impl std::str::FromStr for SolLabel {
    type Err = IlcError;

    fn from_str(s: &str) -> Result<SolLabel> {
        if let Some(rest) = s.strip_prefix("inf") {
            let i = if rest.is_empty() {
                0
            } else {
                rest.parse().map_err(|_| bad_label(s))?
            };
            return Ok(SolLabel::Limit(i));
        }
        s.parse().map(SolLabel::Int).map_err(|_| bad_label(s))
    }
}

fn bad_label(s: &str) -> IlcError {
    IlcError::LabelNotAllowed(format!("cannot parse solenoid label {s:?}"))
}

/// The label set's compactification.
///
/// Integers are assigned to limit points by a periodic pattern: `m` converges
/// to limit point `classes[m % classes.len()]`. One point is `[0]`, the
/// even/odd two-point space is `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactificationSpec {
    classes: Vec<u8>,
}

impl CompactificationSpec {
    pub fn one_point() -> Self {
        CompactificationSpec { classes: vec![0] }
    }

    pub fn two_point_parity() -> Self {
        CompactificationSpec { classes: vec![0, 1] }
    }

    /// Periodic assignment of integers to `k` limit points; every limit point
    /// must receive infinitely many integers.
    pub fn periodic(classes: Vec<u8>) -> Result<Self> {
        if classes.is_empty() {
            return Err(IlcError::Validation("empty class pattern".into()));
        }
        let k = *classes.iter().max().unwrap() as usize + 1;
        if (0..k).any(|c| !classes.contains(&(c as u8))) {
            return Err(IlcError::Validation(
                "every limit point needs a convergent sequence".into(),
            ));
        }
        Ok(CompactificationSpec { classes })
    }

    pub fn limit_count(&self) -> u8 {
        self.classes.iter().copied().max().unwrap_or(0) + 1
    }

    pub fn class_of(&self, m: u32) -> u8 {
        self.classes[m as usize % self.classes.len()]
    }

    /// Number of integers below `m` in the same class.
    pub fn rank(&self, m: u32) -> u32 {
        let p = self.classes.len() as u32;
        let c = self.class_of(m);
        let per_period = self.classes.iter().filter(|&&x| x == c).count() as u32;
        let partial = self.classes[..(m % p) as usize].iter().filter(|&&x| x == c).count() as u32;
        (m / p) * per_period + partial
    }

    pub fn check(&self, l: SolLabel) -> Result<()> {
        match l {
            SolLabel::Limit(i) if i >= self.limit_count() => Err(IlcError::LabelNotAllowed(format!(
                "limit point {l} not in a space with {} limit points",
                self.limit_count()
            ))),
            _ => Ok(()),
        }
    }

    /// Distance to the limit point of `m`'s own class.
    fn to_limit(&self, m: u32) -> f64 {
        0.5f64.powi(self.rank(m) as i32)
    }

    pub fn label_distance(&self, a: SolLabel, b: SolLabel) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            _ if a == b => 0.0,
            (SolLabel::Limit(_), SolLabel::Limit(_)) => 1.0,
            (SolLabel::Int(m), SolLabel::Limit(c)) | (SolLabel::Limit(c), SolLabel::Int(m)) => {
                if self.class_of(m) == c {
                    self.to_limit(m)
                } else {
                    1.0
                }
            }
            (SolLabel::Int(m), SolLabel::Int(n)) => {
                if self.class_of(m) == self.class_of(n) {
                    (self.to_limit(m) - self.to_limit(n)).abs()
                } else {
                    1.0
                }
            }
        })
    }

    /// Smallest `N` with `d(N', N'') < delta` for all integers `N', N'' >= N`,
    /// searched up to `max_level`.
    pub fn tail_radius_level(&self, delta: f64, max_level: u32) -> Option<u32> {
        if self.limit_count() > 1 && delta <= 1.0 {
            // the tail always contains integers from two classes
            return None;
        }
        (0..=max_level).find(|&n| {
            // labels of the tail sit within 2^-rank(n) of the limit and of each other
            self.to_limit(n) < delta
        })
    }
}

impl Default for CompactificationSpec {
    fn default() -> Self {
        CompactificationSpec::one_point()
    }
}

/// `label_distance` as a free function.
pub fn label_distance(a: SolLabel, b: SolLabel, spec: &CompactificationSpec) -> Result<f64> {
    spec.label_distance(a, b)
}

/// 2-adic valuation of a nonzero integer.
pub fn nu2(i: i64) -> u32 {
    assert!(i != 0, "2-adic valuation of zero");
    i.trailing_zeros()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolSupertile {
    pub level: u32,
    pub head: SolLabel,
    pub labels: Vec<SolLabel>,
}

impl SolSupertile {
    pub fn to_window(&self) -> TilingWindow {
        let tiles = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, &l)| unit_tile(i as i64, l))
            .collect();
        let len = self.labels.len() as f64;
        let prov = Provenance::new(System::Solenoid, self.level, 1);
        TilingWindow::from_trusted(Patch::from_trusted(tiles), Aabb::interval(0.0, len), prov)
    }
}

fn unit_tile(i: i64, l: SolLabel) -> Tile {
    Tile::at_lower_corner(Label::Sol(l), Aabb::interval(i as f64, i as f64 + 1.0))
}

fn allowed_at_level(k: u32, l: SolLabel) -> Result<()> {
    match l {
        SolLabel::Int(m) if m < k => Err(IlcError::LabelNotAllowed(format!(
            "a level-{k} supertile cannot have head {m}"
        ))),
        _ => Ok(()),
    }
}

pub fn build_supertile(k: u32, head: SolLabel) -> Result<SolSupertile> {
    allowed_at_level(k, head)?;
    if k > 30 {
        return Err(IlcError::SizeLimit {
            requested: 1u64 << k.min(63),
            limit: 1 << 30,
        });
    }
    let mut labels = Vec::with_capacity(1 << k);
    labels.push(head);
    for j in 0..k {
        // P_{j+1}(l) = P_j(l) P_j(j), and P_j(j) = j followed by the common tail
        let tail: Vec<SolLabel> = labels[1..].to_vec();
        labels.push(SolLabel::Int(j));
        labels.extend(tail);
    }
    Ok(SolSupertile { level: k, head, labels })
}

/// Closed-form count of `n`-supertiles of type `m` inside `P_N(k)`.
pub fn transition_count_formula(n: u32, big_n: u32, m: SolLabel, k: SolLabel) -> u64 {
    match m {
        SolLabel::Int(mi) if n <= mi && m < k && mi < big_n => 1u64 << (big_n - (mi + 1)),
        _ if m == k && SolLabel::Int(big_n) <= m => 1,
        _ => 0,
    }
}

/// Counts of every `n`-supertile type inside `P_N(k)`, found by expanding
/// `P_N(k)` and reading it in blocks of `2^n`.
pub fn supertile_census(n: u32, big_n: u32, k: SolLabel) -> Result<Vec<(SolLabel, u64)>> {
    if n >= big_n {
        return Err(IlcError::Validation(format!("need n < N, got n={n}, N={big_n}")));
    }
    if big_n > BRUTE_MAX_LEVEL {
        return Err(IlcError::SizeLimit {
            requested: 1 << big_n,
            limit: 1 << BRUTE_MAX_LEVEL,
        });
    }
    let whole = build_supertile(big_n, k)?;
    let block = 1usize << n;
    let mut census: Vec<(SolLabel, u64)> = Vec::new();
    for chunk in whole.labels.chunks(block) {
        let head = chunk[0];
        let expected = build_supertile(n, head)?;
        if expected.labels != chunk {
            return Err(IlcError::Validation(format!(
                "block with head {head} is not a level-{n} supertile"
            )));
        }
        match census.iter_mut().find(|(l, _)| *l == head) {
            Some((_, c)) => *c += 1,
            None => census.push((head, 1)),
        }
    }
    census.sort();
    Ok(census)
}

pub fn transition_count_brute(n: u32, big_n: u32, m: SolLabel, k: SolLabel) -> Result<u64> {
    Ok(supertile_census(n, big_n, k)?
        .into_iter()
        .find(|(l, _)| *l == m)
        .map_or(0, |(_, c)| c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub big_n: u32,
    pub m: SolLabel,
    pub k: SolLabel,
    pub formula: u64,
    pub brute: u64,
}

/// Compares formula and brute force for `0 <= n < N <= max_n`, integer
/// labels up to `max_label` and one limit label.
pub fn transition_sweep(max_n: u32, max_label: u32) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    let mut jobs = Vec::new();
    for big_n in 1..=max_n {
        for n in 0..big_n {
            let heads = (big_n..=max_label)
                .map(SolLabel::Int)
                .chain(std::iter::once(SolLabel::Limit(0)));
            for k in heads {
                jobs.push((n, big_n, k));
            }
        }
    }
    let rows: Result<Vec<Vec<SweepRow>>> = jobs
        .par_iter()
        .map(|&(n, big_n, k)| {
            let census = supertile_census(n, big_n, k)?;
            let types = (n..=max_label)
                .map(SolLabel::Int)
                .chain(std::iter::once(SolLabel::Limit(0)));
            Ok(types
                .map(|m| SweepRow {
                    n,
                    big_n,
                    m,
                    k,
                    formula: transition_count_formula(n, big_n, m, k),
                    brute: census.iter().find(|(l, _)| *l == m).map_or(0, |&(_, c)| c),
                })
                .collect())
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Tiles at integer positions `lo..hi`; position `i != 0` carries `nu2(|i|)`
/// and position 0 carries `center`.
pub fn toeplitz_fill(lo: i64, hi: i64, center: Option<SolLabel>, spec: &CompactificationSpec) -> Result<TilingWindow> {
    if hi <= lo {
        return Err(IlcError::Validation(format!("empty window {lo}..{hi}")));
    }
    let center = center.unwrap_or(SolLabel::Limit(0));
    spec.check(center)?;
    if let SolLabel::Int(_) = center {
        // an integer here would end the infinite-order supertile at the origin
        return Err(IlcError::LabelNotAllowed(format!(
            "the origin slot takes a limit label, got {center}"
        )));
    }
    if hi - lo > 1 << 26 {
        return Err(IlcError::SizeLimit {
            requested: (hi - lo) as u64,
            limit: 1 << 26,
        });
    }
    let tiles = (lo..hi)
        .map(|i| {
            let l = if i == 0 { center } else { SolLabel::Int(nu2(i.abs())) };
            unit_tile(i, l)
        })
        .collect();
    // the origin heads a supertile of every level
    let prov = Provenance::new(System::Solenoid, 62, 1);
    Ok(TilingWindow::from_trusted(
        Patch::from_trusted(tiles),
        Aabb::interval(lo as f64, hi as f64),
        prov,
    ))
}

/// Labels of a window read left to right.
pub fn window_labels(w: &TilingWindow) -> Vec<SolLabel> {
    w.patch
        .tiles()
        .iter()
        .map(|t| match t.label {
            Label::Sol(l) => l,
            other => panic!("non-solenoid label {other:?} in a solenoid window"),
        })
        .collect()
}

/// Finite piece of a point of the dyadic solenoid.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPoint {
    pub coords: Vec<f64>,
}

impl DyadicPoint {
    /// Largest violation of `2 x_n = x_{n-1} (mod 1)`.
    pub fn compatibility_defect(&self) -> f64 {
        self.coords
            .windows(2)
            .map(|w| {
                let r = (2.0 * w[1] - w[0]).rem_euclid(1.0);
                r.min(1.0 - r)
            })
            .fold(0.0, f64::max)
    }
}

/// Coordinates of a window in the dyadic solenoid, using the supertile
/// lattice recorded in its provenance (level-`n` supertiles are the blocks
/// `[anchor + q 2^n, anchor + (q+1) 2^n)`).
pub fn solenoid_map(w: &TilingWindow, depth: u32) -> Result<DyadicPoint> {
    if w.provenance.system != System::Solenoid.name() {
        return Err(IlcError::Validation("not a solenoid window".into()));
    }
    if depth > w.provenance.iterations {
        return Err(IlcError::InsufficientWindow(format!(
            "depth {depth} exceeds the {} supertile levels recorded",
            w.provenance.iterations
        )));
    }
    let anchor = w.provenance.anchor.first().copied().unwrap_or(0.0);
    let origin = -anchor;
    let tile_start = origin.floor();
    let mut x = origin - tile_start;
    let mut coords = vec![x];
    for n in 1..=depth {
        let size = (1u64 << n) as f64;
        let start = (origin / size).floor() * size;
        let in_right = origin - start >= size / 2.0;
        x = if in_right { (x + 1.0) / 2.0 } else { x / 2.0 };
        coords.push(x);
    }
    Ok(DyadicPoint { coords })
}

/// `sum_{n in S, n <= cutoff} 2^-n` and a bound on the omitted tail.
pub fn gap_alpha(in_set: impl Fn(u32) -> bool, cutoff: u32) -> (f64, f64) {
    let sum = (0..=cutoff).filter(|&n| in_set(n)).map(|n| 0.5f64.powi(n as i32)).sum();
    (sum, 0.5f64.powi(cutoff as i32))
}

#[derive(Debug, Clone)]
pub struct ExpansivityWitness {
    /// Level of the supertiles whose heads may differ.
    pub level: u32,
    pub first: TilingWindow,
    pub second: TilingWindow,
    /// Integer translates at which closeness was checked.
    pub translates: Vec<i64>,
}

/// Looks for two distinct tilings that stay `delta`-close under translation.
///
/// The candidate pair is the Toeplitz tiling and its shift by `2^N`: the
/// origin then sits at the same place of its `N`-supertile in both while the
/// supertile heads differ. `translate_samples` integer translates spread over
/// `[-half_width, half_width]` are checked, with `half_width` derived from
/// `n_window`.
pub fn expansivity_probe(
    spec: &CompactificationSpec,
    delta: f64,
    n_window: u32,
    translate_samples: usize,
) -> Result<Option<ExpansivityWitness>> {
    if delta <= 0.0 {
        return Err(IlcError::Validation("delta must be positive".into()));
    }
    let metric = LabelMetric { solenoid: spec.clone() };
    let max_level = 12;
    let candidates: Vec<u32> = if delta > 1.0 {
        vec![0]
    } else {
        match spec.tail_radius_level(delta, max_level) {
            Some(n) => vec![n],
            None => (1..=max_level.min(8)).collect(),
        }
    };
    // the probe must see the ball of radius 1/delta around every translate
    let reach = (2.0 / delta).ceil() as i64 + 2;
    let half_width = (1i64 << n_window.min(20)).max(4);
    let sampled: Vec<i64> = if translate_samples <= 1 {
        vec![0]
    } else {
        (0..translate_samples)
            .map(|s| -half_width + (2 * half_width * s as i64) / (translate_samples as i64 - 1))
            .collect()
    };
    for level in candidates {
        let shift = 1i64 << level;
        // the two tilings differ only at multiples of the shift; centering a
        // translate on each of a few consecutive ones exposes every pairing
        // of label classes
        let mut translates = sampled.clone();
        translates.extend((-4..=4).map(|j| j * shift));
        translates.sort_unstable();
        translates.dedup();
        let span = half_width.max(4 * shift);
        let lo = -span - reach - 2 * shift;
        let hi = span + reach + 2 * shift;
        let base = toeplitz_fill(lo, hi + shift, None, spec)?;
        let first = restrict_window(&base, lo as f64, hi as f64);
        let moved = base.translate(&[-(shift as f64)]);
        let second = restrict_window(&moved, lo as f64, hi as f64);
        if first.patch == second.patch {
            continue;
        }
        let eps = if delta > 1.0 { delta } else { delta * (1.0 - 1e-9) };
        let mut all_close = true;
        for &x in &translates {
            let a = first.translate(&[-(x as f64)]);
            let b = second.translate(&[-(x as f64)]);
            if !tilings_close(&a, &b, eps, &metric)? {
                all_close = false;
                break;
            }
        }
        if all_close {
            return Ok(Some(ExpansivityWitness {
                level,
                first,
                second,
                translates,
            }));
        }
    }
    Ok(None)
}

/// Sub-window `[lo, hi]` of a unit-tile window aligned to the integers.
fn restrict_window(w: &TilingWindow, lo: f64, hi: f64) -> TilingWindow {
    let region = Aabb::interval(lo, hi);
    let tiles = w.patch.restrict(&region);
    TilingWindow::from_trusted(Patch::from_trusted(tiles), region, w.provenance.clone())
}

/// Fixed point of `X -> YX, Y -> XX` (`true` for `X`), first `len` symbols.
pub fn period_doubling_word(len: usize) -> Vec<bool> {
    let mut word = vec![true];
    while word.len() < len {
        word = word
            .iter()
            .flat_map(|&s| if s { [true, false] } else { [true, true] })
            .collect();
    }
    word.truncate(len);
    word
}
