//! Complexity functions: greedy ε-separated sets over sampled windows,
//! scaling-exponent fits and ε-entropy.
//!
//! Two tilings are `d_L`-within `ε` when their patches on the padded window
//! `[-1/ε, L + 1/ε]^d` agree up to `ε`. Samples store the tiles meeting that
//! window (the core) plus a collar of width `ε`, so a core tile whose partner
//! pokes just outside the window on the other side still finds it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dpv::{dpv_supertile, supertile_frequencies, supertile_volumes, DpvKind, DpvParams, DpvRule};
use crate::error::{IlcError, Result};
use crate::geometry::{Aabb, Label, Patch, Tile};
use crate::metrics::{tile_distance_with, LabelMetric};
use crate::solenoid::{nu2, CompactificationSpec, SolLabel};
use crate::subst1d::{iterate, SCALE};

/// Default number of sampled windows per `(ε, L)`.
pub const DEFAULT_BUDGET: usize = 2000;

/// Tiles of one sampled tiling around the padded window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    /// Sorted by lower corner, lexicographically.
    pub tiles: Vec<Tile>,
    /// `core[i]` when tile `i` meets the interior of the padded window.
    pub core: Vec<bool>,
}

impl WindowSample {
    /// Keeps the tiles of `tiles` meeting `window` grown by `collar`, marking
    /// those meeting `window` itself.
    pub fn from_tiles(tiles: impl IntoIterator<Item = Tile>, window: &Aabb, collar: f64) -> WindowSample {
        let grown = grow(window, collar);
        let mut kept: Vec<Tile> = tiles.into_iter().filter(|t| t.support.meets_interior(&grown)).collect();
        kept.sort_by(|a, b| cmp_lo(&a.support, &b.support));
        let core = kept.iter().map(|t| t.support.meets_interior(window)).collect();
        WindowSample { tiles: kept, core }
    }

    /// Partner of `t` within `eps`: unique when `eps` is under half the
    /// smallest tile side, since two candidates would overlap.
    fn partner(&self, t: &Tile, eps: f64, metric: &LabelMetric) -> bool {
        let x = t.support.lo[0];
        let start = self.tiles.partition_point(|s| s.support.lo[0] < x - eps);
        self.tiles[start..]
            .iter()
            .take_while(|s| s.support.lo[0] <= x + eps)
            .any(|s| {
                (1..t.dim()).all(|i| (s.support.lo[i] - t.support.lo[i]).abs() <= eps)
                    && tile_distance_with(t, s, metric).is_ok_and(|d| d <= eps)
            })
    }
}

fn grow(b: &Aabb, r: f64) -> Aabb {
    let mut g = *b;
    for i in 0..b.dim {
        g.lo[i] -= r;
        g.hi[i] += r;
    }
    g
}

fn cmp_lo(a: &Aabb, b: &Aabb) -> std::cmp::Ordering {
    for i in 0..a.dim {
        match a.lo[i].total_cmp(&b.lo[i]) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// `d_L(a, b) <= eps` for two samples drawn at the same `(eps, L)`.
pub fn samples_within(a: &WindowSample, b: &WindowSample, eps: f64, metric: &LabelMetric) -> bool {
    let covered = |x: &WindowSample, y: &WindowSample| {
        x.tiles
            .iter()
            .zip(&x.core)
            .filter(|(_, &c)| c)
            .all(|(t, _)| y.partner(t, eps, metric))
    };
    covered(a, b) && covered(b, a)
}

/// A tiling space we can draw random padded windows from.
pub trait SampleSpace: Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn metric(&self) -> LabelMetric {
        LabelMetric::default()
    }

    /// Smallest tile side; the partner search needs `eps` below half of it.
    fn min_side(&self) -> f64;

    /// One window of a tiling drawn from the space's invariant measure.
    fn draw(&self, eps: f64, l: f64, rng: &mut ChaCha8Rng) -> Result<WindowSample>;
}

/// `[-1/eps, L + 1/eps]^d`.
pub fn padded_window(eps: f64, l: f64, dim: usize) -> Aabb {
    let r = 1.0 / eps;
    let lo = vec![-r; dim];
    let hi = vec![l + r; dim];
    Aabb::new(&lo, &hi).expect("window sides are positive")
}

/// Variable-length tilings, sampled inside long supertiles chosen with
/// probability proportional to their length.
#[derive(Debug, Clone, Default)]
pub struct VarLengthSampler;

impl VarLengthSampler {
    /// Seed `x` with density proportional to `x f_0(x)` on `[1, 3]`.
    fn size_biased_seed(u: f64) -> f64 {
        let c = 3.0 * 3f64.ln() - 2.0 * 2f64.ln();
        let t = u * c;
        if t <= 2f64.ln() {
            t.exp()
        } else {
            2.0 * ((t - 2f64.ln()) / 3.0).exp()
        }
    }
}

impl SampleSpace for VarLengthSampler {
    fn name(&self) -> String {
        "subst1d".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn min_side(&self) -> f64 {
        1.0
    }

    fn draw(&self, eps: f64, l: f64, rng: &mut ChaCha8Rng) -> Result<WindowSample> {
        let width = l + 2.0 / eps + 2.0 * eps;
        // supertiles several times the window keep boundary effects rare
        let mut n = 0;
        while SCALE.powi(n as i32) < 8.0 * width {
            n += 1;
        }
        let x = Self::size_biased_seed(rng.gen());
        let st = iterate(x, n)?;
        let total = st.total_length();
        let start = rng.gen_range(0.0..total - width);
        // place the padded window's lower corner at -1/eps
        let shift = start + eps + 1.0 / eps;
        let lefts = st.left_endpoints();
        let tiles = st.tiles.iter().zip(lefts).filter_map(|(&e, a)| {
            let len = st.length_of(e);
            let (lo, hi) = (a - shift, a + len - shift);
            (hi > -1.0 / eps - 2.0 * eps && lo < l + 1.0 / eps + 2.0 * eps)
                .then(|| Tile::at_lower_corner(Label::Length(len), Aabb::interval(lo, hi)))
        });
        Ok(WindowSample::from_tiles(tiles, &padded_window(eps, l, 1), eps))
    }
}

/// DPV tilings, sampled inside cached supertiles of a level large enough
/// for the window.
#[derive(Debug)]
pub struct DpvSampler {
    pub params: DpvParams,
    pub rule: DpvRule,
    cache: Mutex<HashMap<u32, Arc<[Patch; 2]>>>,
}

impl DpvSampler {
    pub fn new(params: DpvParams, rule: DpvRule) -> DpvSampler {
        DpvSampler {
            params,
            rule,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn supertiles(&self, n: u32) -> Result<Arc<[Patch; 2]>> {
        let mut cache = self.cache.lock().expect("cache lock");
        if let Some(p) = cache.get(&n) {
            return Ok(p.clone());
        }
        let built = Arc::new([
            dpv_supertile(DpvKind::A, n, &self.params, self.rule)?,
            dpv_supertile(DpvKind::B, n, &self.params, self.rule)?,
        ]);
        cache.insert(n, built.clone());
        Ok(built)
    }
}

impl SampleSpace for DpvSampler {
    fn name(&self) -> String {
        "dpv".into()
    }

    fn dim(&self) -> usize {
        2
    }

    fn min_side(&self) -> f64 {
        self.params.a.min(self.params.b).min(self.params.c)
    }

    fn draw(&self, eps: f64, l: f64, rng: &mut ChaCha8Rng) -> Result<WindowSample> {
        let width = l + 2.0 / eps + 2.0 * eps;
        // B supertiles are the narrower kind: their width is that of A one
        // level down
        let mut n = 1;
        while {
            let v = supertile_volumes(n - 1, &self.params);
            let a_width = v[0] / (self.params.c * 2f64.powi(n as i32 - 1));
            a_width.min(self.params.c * 2f64.powi(n as i32)) < 4.0 * width
        } {
            n += 1;
        }
        let patches = self.supertiles(n)?;
        let (rho, _) = supertile_frequencies(n, &self.params);
        let vol = supertile_volumes(n, &self.params);
        let kind = if rng.gen::<f64>() < rho[0] * vol[0] { 0 } else { 1 };
        let patch = &patches[kind];
        let bb = patch.bounding_box().expect("supertiles are nonempty");
        let x0 = rng.gen_range(bb.lo[0]..bb.hi[0] - width);
        let y0 = rng.gen_range(bb.lo[1]..bb.hi[1] - width);
        let shift = [x0 + eps + 1.0 / eps, y0 + eps + 1.0 / eps];
        let window = padded_window(eps, l, 2);
        let grown = grow(&window, 2.0 * eps).translate(&shift);
        let tiles = patch.tiles();
        // tiles are sorted by lower x; the widest tile bounds the look-back
        let reach = self.params.a.max(self.params.b);
        let start = tiles.partition_point(|t| t.support.lo[0] < grown.lo[0] - reach);
        let picked = tiles[start..]
            .iter()
            .take_while(|t| t.support.lo[0] < grown.hi[0])
            .filter(|t| t.support.meets_interior(&grown))
            .map(|t| Tile {
                label: t.label,
                support: t.support.translate(&[-shift[0], -shift[1]]),
                control: [t.control[0] - shift[0], t.control[1] - shift[1], 0.0],
            });
        Ok(WindowSample::from_tiles(picked, &window, eps))
    }
}

/// Solenoid tilings: unit tiles labeled by the 2-adic valuation of a
/// random odometer position, shifted by a uniform real offset.
#[derive(Debug, Clone, Default)]
pub struct SolenoidSampler {
    pub spec: CompactificationSpec,
}

impl SampleSpace for SolenoidSampler {
    fn name(&self) -> String {
        "solenoid".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn metric(&self) -> LabelMetric {
        LabelMetric {
            solenoid: self.spec.clone(),
        }
    }

    fn min_side(&self) -> f64 {
        1.0
    }

    fn draw(&self, eps: f64, l: f64, rng: &mut ChaCha8Rng) -> Result<WindowSample> {
        let r: i64 = rng.gen_range(0..1i64 << 40);
        let t: f64 = rng.gen();
        let lo = (-1.0 / eps - 2.0).floor() as i64;
        let hi = (l + 1.0 / eps + 2.0).ceil() as i64;
        let tiles = (lo..=hi).map(|i| {
            let label = match i + r {
                0 => SolLabel::Limit(0),
                j => SolLabel::Int(nu2(j)),
            };
            let x = i as f64 - t;
            Tile::at_lower_corner(Label::Sol(label), Aabb::interval(x, x + 1.0))
        });
        Ok(WindowSample::from_tiles(tiles, &padded_window(eps, l, 1), eps))
    }
}

/// Translates of the periodic tiling by unit tiles: the hull is a circle
/// of circumference 1 and every complexity function is independent of `L`.
#[derive(Debug, Clone, Default)]
pub struct PeriodicSampler;

impl SampleSpace for PeriodicSampler {
    fn name(&self) -> String {
        "periodic".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn min_side(&self) -> f64 {
        1.0
    }

    fn draw(&self, eps: f64, l: f64, rng: &mut ChaCha8Rng) -> Result<WindowSample> {
        let t: f64 = rng.gen();
        let lo = (-1.0 / eps - 2.0).floor() as i64;
        let hi = (l + 1.0 / eps + 2.0).ceil() as i64;
        let tiles = (lo..=hi).map(|i| {
            let x = i as f64 - t;
            Tile::at_lower_corner(Label::Symbol(0), Aabb::interval(x, x + 1.0))
        });
        Ok(WindowSample::from_tiles(tiles, &padded_window(eps, l, 1), eps))
    }
}

/// Synthetic fixture with `N(ε, L) = 2^ceil(L)`: a window is a uniformly
/// random binary word of length `ceil(L)` on unit tiles, with no padding.
#[derive(Debug, Clone, Default)]
pub struct ExponentialSampler;

impl SampleSpace for ExponentialSampler {
    fn name(&self) -> String {
        "exponential".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn min_side(&self) -> f64 {
        1.0
    }

    fn draw(&self, _eps: f64, l: f64, rng: &mut ChaCha8Rng) -> Result<WindowSample> {
        let len = l.ceil() as usize;
        let tiles: Vec<Tile> = (0..len)
            .map(|i| {
                let bit = u32::from(rng.gen_bool(0.5));
                Tile::at_lower_corner(Label::Symbol(bit), Aabb::interval(i as f64, i as f64 + 1.0))
            })
            .collect();
        let core = vec![true; tiles.len()];
        Ok(WindowSample { tiles, core })
    }
}

/// Result of one greedy pass at fixed `(ε, L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub eps: f64,
    pub l: f64,
    /// `|S|`: the ε-balls around `S` cover every sample.
    pub n1_upper: usize,
    /// `|S|`: `S` is ε-separated.
    pub n3_lower: usize,
    /// `N2(ε) >= N3(ε) >= |S|`.
    pub n2_lower: usize,
    /// `N2(2ε) <= N1(ε)`, which the samples bound by `|S|`.
    pub n2_double_eps_upper: usize,
    pub samples: usize,
    /// Samples among the last tenth of draws that still joined `S`.
    pub late_additions: usize,
    pub seed: u64,
}

impl ComplexityEstimate {
    pub fn sepset_size(&self) -> usize {
        self.n3_lower
    }

    /// The bounds are on the sample set: `|S|` bounds `N1` from above only
    /// for the sampled tilings.
    pub const SEMANTICS: &'static str = "N3>=|S|;N1(samples)<=|S|";
}

/// Greedy maximal ε-separated set over `budget` windows.
///
/// Draws are seeded per index, so a larger budget extends the same sample
/// sequence and never shrinks `S`. `max_comparisons` caps the pairwise
/// checks; exceeding it is `BudgetExhausted`.
pub fn estimate_n(
    eps: f64,
    l: f64,
    sampler: &dyn SampleSpace,
    budget: usize,
    seed: u64,
    max_comparisons: Option<u64>,
) -> Result<ComplexityEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(IlcError::OutOfRange {
            value: eps,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(IlcError::Validation(format!("L must be positive, got {l}")));
    }
    if budget == 0 {
        return Err(IlcError::Validation("budget must be at least 1".into()));
    }
    if eps >= sampler.min_side() / 2.0 {
        return Err(IlcError::InsufficientWindow(format!(
            "eps = {eps} is not below half the smallest tile side {}",
            sampler.min_side()
        )));
    }
    let metric = sampler.metric();
    let mut set: Vec<WindowSample> = Vec::new();
    let mut comparisons = 0u64;
    let mut late = 0;
    for i in 0..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let w = sampler.draw(eps, l, &mut rng)?;
        comparisons += set.len() as u64;
        if let Some(cap) = max_comparisons {
            if comparisons > cap {
                return Err(IlcError::BudgetExhausted(format!(
                    "{comparisons} comparisons after {i} samples exceed the cap {cap}"
                )));
            }
        }
        let covered = set.par_iter().any(|s| samples_within(s, &w, eps, &metric));
        if !covered {
            if i >= budget - budget.div_ceil(10) {
                late += 1;
            }
            set.push(w);
        }
    }
    let k = set.len();
    Ok(ComplexityEstimate {
        eps,
        l,
        n1_upper: k,
        n3_lower: k,
        n2_lower: k,
        n2_double_eps_upper: k,
        samples: budget,
        late_additions: late,
        seed,
    })
}

/// Least-squares exponent of `ln N` against `ln(1 + L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub intercept: f64,
    /// Percentile bootstrap interval, 95%.
    pub ci: (f64, f64),
}

fn least_squares(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-12 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

const BOOTSTRAP_ROUNDS: usize = 2000;

/// Needs at least five values of `L` with `max L >= 10 min L`.
pub fn fit_scaling(estimates: &[ComplexityEstimate]) -> Result<ScalingFit> {
    if estimates.len() < 5 {
        return Err(IlcError::DegenerateInput(format!(
            "need at least 5 values of L, got {}",
            estimates.len()
        )));
    }
    let lmin = estimates.iter().map(|e| e.l).fold(f64::INFINITY, f64::min);
    let lmax = estimates.iter().map(|e| e.l).fold(0.0, f64::max);
    if lmax < 10.0 * lmin {
        return Err(IlcError::DegenerateInput(format!(
            "L values {lmin}..{lmax} do not span a decade"
        )));
    }
    if estimates.iter().any(|e| e.n3_lower == 0) {
        return Err(IlcError::DegenerateInput("an estimate has an empty set".into()));
    }
    let points: Vec<(f64, f64)> = estimates
        .iter()
        .map(|e| ((1.0 + e.l).ln(), (e.n3_lower as f64).ln()))
        .collect();
    let (alpha, intercept) = least_squares(&points).expect("L values are distinct");
    let mut rng = ChaCha8Rng::seed_from_u64(estimates[0].seed);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_ROUNDS);
    while slopes.len() < BOOTSTRAP_ROUNDS {
        let resample: Vec<(f64, f64)> = (0..points.len())
            .map(|_| points[rng.gen_range(0..points.len())])
            .collect();
        if let Some((s, _)) = least_squares(&resample) {
            slopes.push(s);
        }
    }
    slopes.sort_by(f64::total_cmp);
    let at = |q: f64| slopes[((q * (slopes.len() - 1) as f64).round()) as usize];
    Ok(ScalingFit {
        alpha,
        intercept,
        ci: (at(0.025), at(0.975)),
    })
}

/// `max ln N / L^d` over the larger half of the `L` values.
///
/// This estimates a limsup from finite data; a decreasing sequence of
/// values along `L` is the signature of zero entropy.
pub fn epsilon_entropy(estimates: &[ComplexityEstimate], d: u32) -> Result<f64> {
    if estimates.is_empty() {
        return Err(IlcError::DegenerateInput("no estimates".into()));
    }
    let mut sorted: Vec<&ComplexityEstimate> = estimates.iter().collect();
    sorted.sort_by(|a, b| a.l.total_cmp(&b.l));
    let tail = &sorted[sorted.len() / 2..];
    Ok(tail
        .iter()
        .map(|e| (e.n3_lower.max(1) as f64).ln() / e.l.powi(d as i32))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Exact complexity numbers of the periodic unit-tile fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactCounts {
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
}

/// The hull is a circle of circumference 1 with arc-length metric, for
/// every `L`. Closed balls of radius `ε` are arcs of length `2ε`; a set of
/// diameter `ε < 1/2` has measure at most `ε`, so arcs are optimal for `N2`;
/// separated points have pairwise distance `> ε`.
pub fn periodic_fixture_exact(eps: f64) -> Result<ExactCounts> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(IlcError::Validation(format!("eps must be positive, got {eps}")));
    }
    if eps >= 0.5 {
        return Ok(ExactCounts { n1: 1, n2: 1, n3: 1 });
    }
    let inv = 1.0 / eps;
    Ok(ExactCounts {
        n1: (0.5 * inv).ceil() as u64,
        n2: inv.ceil() as u64,
        n3: inv.ceil() as u64 - 1,
    })
}

/// One estimate per `L`, in input order.
pub fn estimate_series(
    eps: f64,
    ls: &[f64],
    sampler: &dyn SampleSpace,
    budget: usize,
    seed: u64,
) -> Result<Vec<ComplexityEstimate>> {
    ls.iter()
        .map(|&l| estimate_n(eps, l, sampler, budget, seed, None))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_biased_seed_covers_the_range() {
        assert_eq!(VarLengthSampler::size_biased_seed(0.0), 1.0);
        assert!((VarLengthSampler::size_biased_seed(1.0) - 3.0).abs() < 1e-12);
        let c = 3.0 * 3f64.ln() - 2.0 * 2f64.ln();
        assert!((VarLengthSampler::size_biased_seed(2f64.ln() / c) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_within_is_circle_distance() {
        let s = PeriodicSampler;
        let metric = s.metric();
        let mk = |t: f64| {
            let tiles = (-15..20).map(|i| {
                let x = i as f64 - t;
                Tile::at_lower_corner(Label::Symbol(0), Aabb::interval(x, x + 1.0))
            });
            WindowSample::from_tiles(tiles, &padded_window(0.1, 5.0, 1), 0.1)
        };
        assert!(samples_within(&mk(0.02), &mk(0.98), 0.1, &metric));
        assert!(samples_within(&mk(0.3), &mk(0.39), 0.1, &metric));
        assert!(!samples_within(&mk(0.3), &mk(0.45), 0.1, &metric));
    }

    #[test]
    fn exact_counts_satisfy_the_chain() {
        for i in 1..400 {
            let eps = i as f64 / 397.0;
            let e = periodic_fixture_exact(eps).unwrap();
            let d = periodic_fixture_exact(2.0 * eps).unwrap();
            assert!(d.n2 <= e.n1 && e.n1 <= e.n3 && e.n3 <= e.n2, "eps {eps}: {d:?} {e:?}");
        }
        let e = periodic_fixture_exact(0.1).unwrap();
        assert_eq!((e.n1, e.n2, e.n3), (5, 10, 9));
    }

    #[test]
    fn greedy_on_the_periodic_fixture() {
        for eps in [0.1, 0.17, 0.3] {
            let est = estimate_n(eps, 5.0, &PeriodicSampler, 400, 3, None).unwrap();
            let exact = periodic_fixture_exact(eps).unwrap();
            let half = periodic_fixture_exact(2.0 * eps).unwrap();
            assert!(est.n3_lower as u64 <= exact.n3);
            assert!(est.n3_lower as u64 >= half.n2);
        }
        let a = estimate_n(0.1, 5.0, &PeriodicSampler, 300, 9, None).unwrap();
        let b = estimate_n(0.1, 40.0, &PeriodicSampler, 300, 9, None).unwrap();
        assert_eq!(a.n3_lower, b.n3_lower);
    }

    #[test]
    fn doubling_the_budget_never_shrinks_the_set() {
        let s = SolenoidSampler::default();
        let a = estimate_n(0.2, 4.0, &s, 100, 1, None).unwrap();
        let b = estimate_n(0.2, 4.0, &s, 200, 1, None).unwrap();
        assert!(b.n3_lower >= a.n3_lower);
    }

    #[test]
    fn comparison_cap() {
        let r = estimate_n(0.1, 5.0, &ExponentialSampler, 200, 1, Some(10));
        assert!(matches!(r, Err(IlcError::BudgetExhausted(_))));
    }

    #[test]
    fn exponential_fixture_entropy() {
        let ls = [4.0, 5.0, 6.0, 7.0, 8.0];
        let est = estimate_series(0.1, &ls, &ExponentialSampler, 4000, 11).unwrap();
        let h = epsilon_entropy(&est, 1).unwrap();
        assert!((h - 2f64.ln()).abs() <= 0.1 * 2f64.ln(), "{h}");
        let periodic = estimate_series(0.1, &ls, &PeriodicSampler, 200, 11).unwrap();
        assert!(epsilon_entropy(&periodic, 1).unwrap() < 0.5);
    }

    #[test]
    fn fit_recovers_a_power_law() {
        let ls: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 160.0];
        let est: Vec<ComplexityEstimate> = ls
            .iter()
            .map(|&l| {
                let n = ((1.0 + l) * (1.0 + l)).round() as usize;
                ComplexityEstimate {
                    eps: 0.1,
                    l,
                    n1_upper: n,
                    n3_lower: n,
                    n2_lower: n,
                    n2_double_eps_upper: n,
                    samples: n,
                    late_additions: 0,
                    seed: 0,
                }
            })
            .collect();
        let fit = fit_scaling(&est).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-3);
        assert!(fit.ci.0 <= fit.alpha && fit.alpha <= fit.ci.1);
        assert!(matches!(fit_scaling(&est[..4]), Err(IlcError::DegenerateInput(_))));
        assert!(matches!(fit_scaling(&est[1..]), Err(IlcError::DegenerateInput(_))));
    }

    #[test]
    fn samplers_produce_core_tiles_around_the_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samplers: Vec<Box<dyn SampleSpace>> = vec![
            Box::new(VarLengthSampler),
            Box::new(DpvSampler::new(DpvParams::natural(), DpvRule::Varied)),
            Box::new(SolenoidSampler::default()),
        ];
        for s in &samplers {
            let w = s.draw(0.25, 3.0, &mut rng).unwrap();
            let window = padded_window(0.25, 3.0, s.dim());
            let core_volume: f64 = w
                .tiles
                .iter()
                .zip(&w.core)
                .filter(|(_, &c)| c)
                .map(|(t, _)| t.support.volume())
                .sum();
            assert!(core_volume >= window.volume() - 1e-6, "{}", s.name());
            // a sample is within any eps of itself
            assert!(samples_within(&w, &w, 1e-12, &s.metric()));
        }
    }
}
