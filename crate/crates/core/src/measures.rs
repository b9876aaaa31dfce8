//! Supertile measures, their consistency checks, and patch frequencies
//! estimated by ergodic averages or through transition maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dpv::{dpv_supertile, matrix_power, supertile_frequencies, supertile_volumes, DpvKind, DpvParams, DpvRule};
use crate::error::{IlcError, Result};
use crate::geometry::{van_hove_ratio, Label, Patch, Tile, TilingWindow, Translate};
use crate::metrics::{match_tiles, LabelMetric};
use crate::quad::adaptive_simpson;
use crate::solenoid::{build_supertile, transition_count_formula, SolLabel};
use crate::subst1d::{iterate, supertile_length_range, SCALE};

/// `3 ln 3 - 2 ln 2`.
pub fn density_constant() -> f64 {
    3.0 * 3f64.ln() - 2.0 * 2f64.ln()
}

/// Invariant density of `n`-supertile lengths for the variable-length example.
pub fn density(n: u32, x: f64) -> f64 {
    let s = SCALE.powi(n as i32);
    let c = density_constant();
    if x < s || x > 3.0 * s {
        0.0
    } else if x <= 2.0 * s {
        1.0 / (c * x * x)
    } else {
        3.0 / (c * x * x)
    }
}

/// `∫_a^b f_n` from the antiderivatives `-1/(Cx)` and `-3/(Cx)`.
pub fn rho_closed_form(n: u32, a: f64, b: f64) -> Result<f64> {
    let (lo, hi) = supertile_length_range(n);
    let slack = 1e-12 * hi;
    if a > b || a < lo - slack || b > hi + slack {
        return Err(IlcError::OutOfRange {
            value: if a < lo - slack || a > b { a } else { b },
            lo,
            hi,
        });
    }
    let c = density_constant();
    let mid = 2.0 * SCALE.powi(n as i32);
    let piece = |p: f64, q: f64, coef: f64| {
        if q <= p {
            0.0
        } else {
            coef / c * (1.0 / p - 1.0 / q)
        }
    };
    Ok(piece(a, b.min(mid), 1.0) + piece(a.max(mid), b, 3.0))
}

/// Per-level supertile measures.
#[derive(Debug, Clone, PartialEq)]
pub enum SupertileMeasureSeq {
    /// Density `scale * f_n` on the interval of `n`-supertile lengths.
    VarLength { scale: f64 },
    /// Weights `(lambda, 6) / K_n` on the two DPV supertile types.
    Dpv { params: DpvParams },
    /// Weights `2^-(m+1)` on integer labels `m >= n`, zero on limit labels.
    Solenoid,
}

impl SupertileMeasureSeq {
    pub fn var_length() -> Self {
        SupertileMeasureSeq::VarLength { scale: 1.0 }
    }
}

/// Labels beyond this carry weight below `2^-61`; sums are truncated here.
const SOL_LABEL_CUTOFF: u32 = 60;

fn sol_weight(n: u32, m: SolLabel) -> f64 {
    match m {
        SolLabel::Int(m) if m >= n => 0.5f64.powi(m as i32 + 1),
        _ => 0.0,
    }
}

/// `|∫ Vol dρ_n - 1|`.
pub fn check_volume_normalized(rho: &SupertileMeasureSeq, n: u32, tol: f64) -> Result<f64> {
    match rho {
        SupertileMeasureSeq::VarLength { scale } => {
            let s = SCALE.powi(n as i32);
            let c = density_constant();
            // split at the breakpoint; the density jumps there
            let lower = adaptive_simpson(&|x| scale / (c * x), s, 2.0 * s, tol / 20.0)?;
            let upper = adaptive_simpson(&|x| 3.0 * scale / (c * x), 2.0 * s, 3.0 * s, tol / 20.0)?;
            Ok((lower + upper - 1.0).abs())
        }
        SupertileMeasureSeq::Dpv { params } => {
            let (r, _) = supertile_frequencies(n, params);
            let v = supertile_volumes(n, params);
            Ok((r[0] * v[0] + r[1] * v[1] - 1.0).abs())
        }
        SupertileMeasureSeq::Solenoid => {
            let vol = 2f64.powi(n as i32);
            let total: f64 = (n..=SOL_LABEL_CUTOFF)
                .map(|m| vol * sol_weight(n, SolLabel::Int(m)))
                .sum();
            Ok((total - 1.0).abs())
        }
    }
}

/// Number of `n`-supertiles with length in `[a, b]` inside an `m`-supertile
/// of length `len`, by the splitting rule at each level.
fn descendants_in(len: f64, m: u32, n: u32, a: f64, b: f64) -> u32 {
    if m == n {
        return u32::from(len >= a && len <= b);
    }
    if len <= 2.0 * SCALE.powi(m as i32) {
        descendants_in(len, m - 1, n, a, b)
    } else {
        descendants_in(2.0 * len / 3.0, m - 1, n, a, b) + descendants_in(len / 3.0, m - 1, n, a, b)
    }
}

/// Lengths at level `m` where the descendant count into `[a, b]` can jump.
fn breakpoints(m: u32, n: u32, a: f64, b: f64, out: &mut Vec<f64>) {
    if m == n {
        out.extend([a, b]);
        return;
    }
    let mut lower = Vec::new();
    breakpoints(m - 1, n, a, b, &mut lower);
    out.push(2.0 * SCALE.powi(m as i32));
    for p in lower {
        // unsplit children keep their length; split ones are 2/3 and 1/3 of it
        out.extend([p, 1.5 * p, 3.0 * p]);
    }
}

/// `∫ #(n-supertiles of Q with length in [a,b]) dρ_N(Q)`, integrating the
/// density by quadrature between consecutive breakpoints of the count.
fn pushed_mass(scale: f64, n: u32, big_n: u32, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (lo, hi) = supertile_length_range(big_n);
    let mut cuts = Vec::new();
    breakpoints(big_n, n, a, b, &mut cuts);
    cuts.retain(|&x| x > lo && x < hi);
    cuts.extend([lo, hi]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * hi);
    let pieces = cuts.len().max(2) - 1;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let count = descendants_in(0.5 * (p + q), big_n, n, a, b);
        if count == 0 {
            continue;
        }
        let mid = 2.0 * SCALE.powi(big_n as i32);
        let coef = if 0.5 * (p + q) <= mid { 1.0 } else { 3.0 };
        let c = density_constant();
        let piece = adaptive_simpson(&|x| coef / (c * x * x), p, q, tol / (10.0 * pieces as f64))?;
        total += scale * count as f64 * piece;
    }
    Ok(total)
}

/// Largest `|ρ_n(I) - (M_{n,N} ρ_N)(I)|` over a test family.
///
/// For the variable-length system the family is the intervals of width
/// `width` covering the level-`n` length range.
pub fn check_transition_consistency(rho: &SupertileMeasureSeq, n: u32, big_n: u32, tol: f64) -> Result<f64> {
    check_transition_consistency_with(rho, n, big_n, tol, 0.1)
}

pub fn check_transition_consistency_with(
    rho: &SupertileMeasureSeq,
    n: u32,
    big_n: u32,
    tol: f64,
    width: f64,
) -> Result<f64> {
    if n >= big_n {
        return Err(IlcError::Validation(format!("need n < N, got n={n}, N={big_n}")));
    }
    match rho {
        SupertileMeasureSeq::VarLength { scale } => {
            let (lo, hi) = supertile_length_range(n);
            let pieces = ((hi - lo) / width).ceil() as usize;
            let mut worst: f64 = 0.0;
            for i in 0..pieces {
                let a = lo + i as f64 * width;
                let b = (a + width).min(hi);
                let direct = scale * rho_closed_form(n, a, b)?;
                let pushed = pushed_mass(*scale, n, big_n, a, b, tol)?;
                worst = worst.max((direct - pushed).abs());
            }
            Ok(worst)
        }
        SupertileMeasureSeq::Dpv { params } => {
            let (rn, _) = supertile_frequencies(n, params);
            let (rbig, _) = supertile_frequencies(big_n, params);
            let m = matrix_power(big_n - n);
            Ok((0..2)
                .map(|i| {
                    let pushed = m[i][0] as f64 * rbig[0] + m[i][1] as f64 * rbig[1];
                    (rn[i] - pushed).abs()
                })
                .fold(0.0, f64::max))
        }
        SupertileMeasureSeq::Solenoid => {
            let heads: Vec<SolLabel> = (big_n..=SOL_LABEL_CUTOFF).map(SolLabel::Int).collect();
            let mut worst: f64 = 0.0;
            for m in n..=SOL_LABEL_CUTOFF.min(big_n + 20) {
                let m = SolLabel::Int(m);
                let pushed: f64 = heads
                    .iter()
                    .map(|&k| transition_count_formula(n, big_n, m, k) as f64 * sol_weight(big_n, k))
                    .sum();
                worst = worst.max((sol_weight(n, m) - pushed).abs());
            }
            Ok(worst)
        }
    }
}

/// A family of patches whose occurrences are counted once per anchor tile.
#[derive(Debug, Clone, PartialEq)]
pub enum TrimSet {
    /// Single variable-length tiles with length in `[lo, hi]`.
    LengthRange { lo: f64, hi: f64 },
    /// Single tiles carrying exactly this label.
    Label(Label),
    /// Patches within `eps` of `base`, anchored at its first tile's control
    /// point.
    Patch { base: Patch, eps: f64 },
}

impl TrimSet {
    /// Largest extent of a member, used for boundary corrections.
    pub fn diameter(&self) -> f64 {
        match self {
            TrimSet::LengthRange { hi, .. } => *hi,
            TrimSet::Label(_) => 3.0,
            TrimSet::Patch { base, eps } => {
                let b = base.bounding_box().expect("family patches are nonempty");
                (0..b.dim).map(|i| b.side(i)).fold(0.0, f64::max) + eps
            }
        }
    }
}

fn tile_hits(family: &TrimSet, t: &Tile) -> bool {
    match family {
        TrimSet::LengthRange { lo, hi } => {
            matches!(t.label, Label::Length(l) if l >= *lo && l <= *hi)
        }
        TrimSet::Label(l) => t.label == *l,
        TrimSet::Patch { .. } => false,
    }
}

/// Number of anchor positions in `w` where a member of the family occurs
/// entirely inside the window.
pub fn count_occurrences(family: &TrimSet, w: &TilingWindow) -> usize {
    count_in_tiles(family, w.patch.tiles(), &w.window)
}

fn count_in_tiles(family: &TrimSet, tiles: &[Tile], window: &crate::geometry::Aabb) -> usize {
    match family {
        TrimSet::Patch { base, eps } => {
            let metric = LabelMetric::default();
            let first = base.tiles()[0];
            let mut hits = 0;
            for anchor in tiles {
                if !window.contains_box(&anchor.support, 1e-9) {
                    continue;
                }
                let shift: Vec<f64> = (0..first.dim()).map(|i| anchor.control[i] - first.control[i]).collect();
                let placed = base.translate(&shift);
                let region = placed.bounding_box().expect("nonempty");
                if !window.contains_box(&region, *eps) {
                    continue;
                }
                // tiles of w whose interiors meet the shrunken copy of the member
                let candidates: Vec<Tile> = tiles
                    .iter()
                    .filter(|t| {
                        placed
                            .tiles()
                            .iter()
                            .any(|p| shrunk_meets(&p.support, &t.support, *eps))
                    })
                    .copied()
                    .collect();
                if match_tiles(placed.tiles(), &candidates, &metric).value <= *eps {
                    hits += 1;
                }
            }
            hits
        }
        _ => tiles
            .iter()
            .filter(|t| window.contains_box(&t.support, 1e-9) && tile_hits(family, t))
            .count(),
    }
}

fn shrunk_meets(a: &crate::geometry::Aabb, b: &crate::geometry::Aabb, eps: f64) -> bool {
    (0..a.dim).all(|i| {
        let lo = a.lo[i] + eps;
        let hi = a.hi[i] - eps;
        hi.min(b.hi[i]) > lo.max(b.lo[i])
    })
}

/// Estimates at successive levels and whether they settled.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySequence {
    pub values: Vec<(u32, f64)>,
    /// Relative change below `1e-3` across the last three levels.
    pub converged: bool,
}

fn settled(values: &[(u32, f64)]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let tail = &values[values.len() - 3..];
    tail.windows(2)
        .all(|w| (w[1].1 - w[0].1).abs() <= 1e-3 * w[1].1.abs().max(1e-300))
}

/// `∫ #(I in P) dρ_n(P)` for `n = 0..=n_max`.
///
/// Variable-length supertiles are drawn by stratified inverse-CDF sampling of
/// `f_n` (`samples` strata per level); DPV and solenoid levels are summed
/// exactly over the supertile types.
pub fn freq_estimate_transition(
    family: &TrimSet,
    rho: &SupertileMeasureSeq,
    n_max: u32,
    samples: usize,
    seed: u64,
) -> Result<FrequencySequence> {
    let mut values = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..=n_max {
        let v = match rho {
            SupertileMeasureSeq::VarLength { scale } => {
                let s = SCALE.powi(n as i32);
                let mass = scale / (density_constant() * s);
                let mut total = 0usize;
                for i in 0..samples {
                    let u = (i as f64 + rng.gen::<f64>()) / samples as f64;
                    let len = inverse_cdf(n, u);
                    let st = iterate((len / s).clamp(1.0, 3.0), n)?;
                    let w = st.window_at(0)?;
                    total += count_occurrences(family, &w);
                }
                mass * total as f64 / samples as f64
            }
            SupertileMeasureSeq::Dpv { params } => {
                let (r, _) = supertile_frequencies(n, params);
                let mut v = 0.0;
                for kind in [DpvKind::A, DpvKind::B] {
                    let p = dpv_supertile(kind, n, params, DpvRule::Varied)?;
                    let window = p.bounding_box().expect("nonempty");
                    v += r[kind.index()] * count_in_tiles(family, p.tiles(), &window) as f64;
                }
                v
            }
            SupertileMeasureSeq::Solenoid => {
                let mut v = 0.0;
                for m in n..n + 24 {
                    let head = SolLabel::Int(m);
                    let w = build_supertile(n, head)?.to_window();
                    v += sol_weight(n, head) * count_occurrences(family, &w) as f64;
                }
                v
            }
        };
        values.push((n, v));
    }
    let converged = settled(&values);
    Ok(FrequencySequence { values, converged })
}

/// Inverse of the cumulative distribution of `f_n`, normalized to mass 1.
pub fn inverse_cdf(n: u32, u: f64) -> f64 {
    let s = SCALE.powi(n as i32);
    let c = density_constant();
    let total = 1.0 / (c * s);
    let target = u.clamp(0.0, 1.0) * total;
    let first = 0.5 / (c * s);
    if target <= first {
        // (1/C)(1/s - 1/x) = target
        1.0 / (1.0 / s - c * target)
    } else {
        // first + (3/C)(1/(2s) - 1/x) = target
        1.0 / (1.0 / (2.0 * s) - c * (target - first) / 3.0)
    }
}

/// An ergodic-average frequency with the boundary share of the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicEstimate {
    pub value: f64,
    /// `Vol((∂W)^{+r}) / Vol(W)` with `r` the family's diameter: occurrences
    /// near the boundary are the only ones the count can miss.
    pub boundary_share: f64,
}

/// Occurrences per unit volume of the window.
pub fn freq_estimate_ergodic(family: &TrimSet, w: &TilingWindow) -> Result<ErgodicEstimate> {
    let r = family.diameter();
    let share = van_hove_ratio(&w.window, r);
    if share >= 1.0 {
        return Err(IlcError::InsufficientWindow(format!(
            "the window is within {r} of its boundary everywhere"
        )));
    }
    Ok(ErgodicEstimate {
        value: count_occurrences(family, w) as f64 / w.window.volume(),
        boundary_share: share,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpv::{perron_data, DpvParams};
    use crate::geometry::{validate_patch, Aabb, Provenance, System, GEOM_TOL};

    #[test]
    fn closed_form_masses() {
        let c = density_constant();
        assert!((rho_closed_form(0, 1.0, 2.0).unwrap() - 0.5 / c).abs() < 1e-15);
        assert!((rho_closed_form(0, 2.0, 3.0).unwrap() - 0.5 / c).abs() < 1e-15);
        assert!((0.5 / c - 0.261843).abs() < 1e-6);
        assert!(rho_closed_form(0, 0.5, 2.0).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for n in [0, 3, 7] {
            let (lo, hi) = supertile_length_range(n);
            let a = lo + 0.3 * (hi - lo);
            let b = lo + 0.9 * (hi - lo);
            let mid = 2.0 * SCALE.powi(n as i32);
            let q = adaptive_simpson(&|x| density(n, x), a, mid, 1e-13).unwrap()
                + adaptive_simpson(&|x| 3.0 / (density_constant() * x * x), mid, b, 1e-13).unwrap();
            assert!((q - rho_closed_form(n, a, b).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn volume_normalization() {
        let rho = SupertileMeasureSeq::var_length();
        for n in 0..=10 {
            assert!(check_volume_normalized(&rho, n, 1e-10).unwrap() <= 1e-9);
        }
        let doubled = SupertileMeasureSeq::VarLength { scale: 2.0 };
        assert!((check_volume_normalized(&doubled, 0, 1e-10).unwrap() - 1.0).abs() < 1e-9);
        let dpv = SupertileMeasureSeq::Dpv {
            params: DpvParams::natural(),
        };
        assert!(check_volume_normalized(&dpv, 4, 1e-12).unwrap() < 1e-12);
        assert!(check_volume_normalized(&SupertileMeasureSeq::Solenoid, 3, 1e-12).unwrap() < 1e-12);
    }

    #[test]
    fn transition_consistency() {
        let rho = SupertileMeasureSeq::var_length();
        assert!(check_transition_consistency(&rho, 0, 1, 1e-9).unwrap() <= 1e-6);
        assert!(check_transition_consistency(&rho, 1, 3, 1e-9).unwrap() <= 1e-6);
        // a density that is not invariant fails the check
        let dpv = SupertileMeasureSeq::Dpv {
            params: DpvParams::new(1.3, 1.0, 0.7).unwrap(),
        };
        assert!(check_transition_consistency(&dpv, 2, 5, 1e-12).unwrap() < 1e-12);
        assert!(check_transition_consistency(&SupertileMeasureSeq::Solenoid, 1, 6, 1e-12).unwrap() < 1e-15);
    }

    #[test]
    fn inverse_cdf_inverts() {
        for n in [0, 4] {
            for u in [0.0, 0.1, 0.5, 0.77, 1.0] {
                let x = inverse_cdf(n, u);
                let (lo, _) = supertile_length_range(n);
                let mass = rho_closed_form(n, lo, x).unwrap() * density_constant() * SCALE.powi(n as i32);
                assert!((mass - u).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn counting() {
        let st = iterate(2.5, 2).unwrap();
        let w = st.window_at(0).unwrap();
        let fam = TrimSet::LengthRange { lo: 1.0, hi: 1.5 };
        assert_eq!(count_occurrences(&fam, &w), 1);

        let t = |x: f64| Tile::at_lower_corner(Label::Symbol(0), Aabb::interval(x, x + 1.0));
        let p = validate_patch(vec![t(0.0), t(1.0), t(2.0)], GEOM_TOL).unwrap();
        let w = TilingWindow::new(p, Aabb::interval(0.0, 3.0), Provenance::new(System::Symbolic, 0, 1)).unwrap();
        let single = TrimSet::Patch {
            base: validate_patch(vec![t(0.0)], GEOM_TOL).unwrap(),
            eps: 1e-9,
        };
        assert_eq!(count_occurrences(&single, &w), 3);
        let pair = TrimSet::Patch {
            base: validate_patch(vec![t(5.0), t(6.0)], GEOM_TOL).unwrap(),
            eps: 1e-9,
        };
        assert_eq!(count_occurrences(&pair, &w), 2);
        let far = TrimSet::Patch {
            base: validate_patch(vec![t(0.0), t(1.0), t(2.0), t(3.0)], GEOM_TOL).unwrap(),
            eps: 1e-9,
        };
        assert_eq!(count_occurrences(&far, &w), 0);
    }

    #[test]
    fn periodic_frequency_is_one() {
        let t = |x: f64| Tile::at_lower_corner(Label::Symbol(0), Aabb::interval(x, x + 1.0));
        let p = validate_patch((0..200).map(|i| t(i as f64)).collect(), GEOM_TOL).unwrap();
        let w = TilingWindow::new(p, Aabb::interval(0.0, 200.0), Provenance::new(System::Symbolic, 0, 1)).unwrap();
        let e = freq_estimate_ergodic(&TrimSet::Label(Label::Symbol(0)), &w).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn dpv_transition_frequency_is_the_eigen_frequency() {
        let params = DpvParams::natural();
        let rho = SupertileMeasureSeq::Dpv { params };
        let seq = freq_estimate_transition(&TrimSet::Label(Label::Dpv(DpvKind::A)), &rho, 5, 1, 0).unwrap();
        let (lambda, _) = perron_data();
        let (_, k0) = supertile_frequencies(0, &params);
        for (_, v) in &seq.values {
            assert!((v - lambda / k0).abs() < 1e-12);
        }
        assert!(seq.converged);
    }

    #[test]
    fn var_length_transition_frequency() {
        let rho = SupertileMeasureSeq::var_length();
        let fam = TrimSet::LengthRange { lo: 1.0, hi: 2.0 };
        let seq = freq_estimate_transition(&fam, &rho, 8, 400, 5).unwrap();
        let target = 0.5 / density_constant();
        assert!((seq.values[0].1 - target).abs() < 1e-3);
        let last = seq.values.last().unwrap().1;
        assert!((last - target).abs() < 0.02 * target, "{last}");
    }
}
