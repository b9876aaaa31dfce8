//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complexity::{
    estimate_n, fit_scaling, ComplexityEstimate, DpvSampler, SampleSpace, SolenoidSampler, VarLengthSampler,
    DEFAULT_BUDGET,
};
use crate::dpv::{build_stepped_surface, dpv_supertile, find_fault_lines, DpvKind, DpvParams, DpvRule};
use crate::error::{IlcError, Result};
use crate::geometry::{validate_patch, Patch, TilingWindow, GEOM_TOL};
use crate::json::{family_from_json, num, window_from_json, window_to_json};
use crate::measures::{freq_estimate_ergodic, freq_estimate_transition, SupertileMeasureSeq};
use crate::metrics::{dl_distance, patch_distance_with, tile_distance_with, tiling_distance_with, LabelMetric};
use crate::render::{render_bars, render_rects, surface_to_obj, SvgStyle};
use crate::solenoid::{
    build_supertile, expansivity_probe, toeplitz_fill, transition_sweep, CompactificationSpec, SolLabel,
};
use crate::subst1d::iterate;

/// Everything a run depends on. Echoed into CSV headers.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "ilc", version, about = "Tiling spaces with infinite local complexity")]
pub struct RunConfig {
    /// Seed of the random generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the artifact here (atomically) instead of to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Default output format when a command has no `--emit`.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Emit>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Csv,
    Svg,
    Obj,
    Text,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
pub enum Command {
    /// Variable-length substitution supertiles.
    Subst1d(Subst1dArgs),
    /// Direct product variation: supertiles, stepped surfaces, fault lines.
    Dpv(DpvArgs),
    /// Solenoid fusion tilings.
    Solenoid {
        #[command(subcommand)]
        action: SolenoidAction,
    },
    /// Distance between two JSON patch documents.
    Dist(DistArgs),
    /// Patch frequency estimates.
    Freq(FreqArgs),
    /// Greedy ε-separated set sizes and scaling exponent.
    Complexity(ComplexityArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Subst1dArgs {
    /// Initial tile length, in [1, 3].
    #[arg(long = "seed")]
    pub x: f64,
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum KindArg {
    A,
    B,
}

impl From<KindArg> for DpvKind {
    fn from(k: KindArg) -> DpvKind {
        match k {
            KindArg::A => DpvKind::A,
            KindArg::B => DpvKind::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum RuleArg {
    Varied,
    Product,
}

impl From<RuleArg> for DpvRule {
    fn from(r: RuleArg) -> DpvRule {
        match r {
            RuleArg::Varied => DpvRule::Varied,
            RuleArg::Product => DpvRule::Product,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DpvShape {
    /// Widths of A and B; natural widths when omitted.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub widths: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub height: f64,
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = KindArg::A)]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value_t = RuleArg::Varied)]
    pub rule: RuleArg,
}

impl DpvShape {
    fn params(&self) -> Result<DpvParams> {
        match &self.widths {
            Some(w) => DpvParams::new(w[0], w[1], self.height),
            None => {
                let natural = DpvParams::natural();
                DpvParams::new(natural.a, natural.b, self.height)
            }
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_conflicts_with_subcommands = true)]
pub struct DpvArgs {
    #[command(subcommand)]
    pub action: Option<DpvAction>,
    #[command(flatten)]
    pub shape: DpvShape,
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
pub enum DpvAction {
    /// Stepped surface in Z^3.
    Surface {
        #[command(flatten)]
        shape: DpvShape,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
    },
    /// Full-width horizontal lines and their offsets.
    Faults {
        #[command(flatten)]
        shape: DpvShape,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SpecArg {
    OnePoint,
    TwoPoint,
}

impl SpecArg {
    fn spec(self) -> CompactificationSpec {
        match self {
            SpecArg::OnePoint => CompactificationSpec::one_point(),
            SpecArg::TwoPoint => CompactificationSpec::two_point_parity(),
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
pub enum SolenoidAction {
    /// Label sequence of one supertile.
    Supertile {
        #[arg(long)]
        k: u32,
        /// Head label: an integer >= k or `inf0`, `inf1`, ...
        #[arg(long)]
        head: String,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
    },
    /// Transition counts, formula against enumeration.
    Sweep {
        #[arg(long = "max-N", default_value_t = 12)]
        max_n: u32,
        #[arg(long, default_value_t = 14)]
        max_label: u32,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
    },
    /// Search for two distinct tilings that stay δ-close.
    Probe {
        #[arg(long, value_enum, default_value_t = SpecArg::OnePoint)]
        spec: SpecArg,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 6)]
        n_window: u32,
        #[arg(long, default_value_t = 17)]
        samples: usize,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum DistKind {
    Tile,
    Patch,
    Tiling,
    #[value(name = "dL")]
    #[serde(rename = "dL")]
    DL,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DistArgs {
    #[arg(long, value_enum)]
    pub kind: DistKind,
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Window length for `dL`.
    #[arg(long = "L", default_value_t = 1.0)]
    pub l: f64,
    /// Translate grid step for `dL`; a quarter of the tolerance when omitted.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum, default_value_t = SpecArg::OnePoint)]
    pub spec: SpecArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SystemArg {
    Subst1d,
    Dpv,
    Solenoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Route {
    Ergodic,
    Transition,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FreqArgs {
    #[arg(long, value_enum)]
    pub system: SystemArg,
    /// JSON file describing the family.
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long, value_enum)]
    pub route: Route,
    /// Supertile level (ergodic) or deepest level (transition).
    #[arg(long)]
    pub n: Option<u32>,
    /// Strata per level for the transition route.
    #[arg(long, env = "ILC_BUDGET", default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ComplexityArgs {
    #[arg(long, value_enum)]
    pub system: SystemArg,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long = "L", value_delimiter = ',', default_values_t = [10.0, 20.0, 40.0, 80.0, 160.0])]
    pub ls: Vec<f64>,
    #[arg(long, env = "ILC_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
}

/// Output of one run and the notes printed to stderr alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub content: String,
    pub notes: Vec<String>,
}

impl Artifact {
    fn new(content: String) -> Artifact {
        Artifact {
            content,
            notes: Vec::new(),
        }
    }
}

fn pick(emit: Option<Emit>, global: Option<Emit>, default: Emit, allowed: &[Emit]) -> Result<Emit> {
    let e = emit.or(global).unwrap_or(default);
    if allowed.contains(&e) {
        Ok(e)
    } else {
        Err(IlcError::Validation(format!(
            "format {e:?} not available here; choose one of {allowed:?}"
        )))
    }
}

fn config_line(config: &RunConfig) -> String {
    let json = serde_json::to_string(config).expect("configs serialize");
    format!("# config: {json}\n")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| IlcError::Io(format!("{}: {e}", path.display())))
}

/// Dispatches a parsed configuration and returns the artifact.
pub fn run(config: &RunConfig) -> Result<Artifact> {
    let global = config.format;
    match &config.command {
        Command::Subst1d(a) => subst1d(config, a, global),
        Command::Dpv(a) => match &a.action {
            None => dpv_tiles(&a.shape, pick(a.emit, global, Emit::Svg, &[Emit::Svg, Emit::Json])?),
            Some(DpvAction::Surface { shape, emit }) => {
                dpv_surface(shape, pick(*emit, global, Emit::Obj, &[Emit::Obj, Emit::Json])?)
            }
            Some(DpvAction::Faults { shape, emit }) => {
                pick(*emit, global, Emit::Csv, &[Emit::Csv])?;
                dpv_faults(config, shape)
            }
        },
        Command::Solenoid { action } => solenoid(config, action, global),
        Command::Dist(a) => dist(a),
        Command::Freq(a) => {
            pick(a.emit, global, Emit::Csv, &[Emit::Csv])?;
            freq(config, a)
        }
        Command::Complexity(a) => {
            pick(a.emit, global, Emit::Csv, &[Emit::Csv])?;
            complexity(config, a)
        }
    }
}

fn subst1d(config: &RunConfig, a: &Subst1dArgs, global: Option<Emit>) -> Result<Artifact> {
    let emit = pick(a.emit, global, Emit::Json, &[Emit::Json, Emit::Csv, Emit::Svg])?;
    let st = iterate(a.x, a.n)?;
    Ok(Artifact::new(match emit {
        Emit::Json => window_to_json(&st.window_at(0)?) + "\n",
        Emit::Svg => {
            let rows: Result<Vec<Patch>> = (0..=a.n).map(|k| iterate(a.x, k).map(|s| s.patch())).collect();
            render_bars(&rows?, &SvgStyle::default())?
        }
        _ => {
            let mut out = config_line(config);
            out.push_str("index,left,length,j,k\n");
            for (i, ((e, left), len)) in st.tiles.iter().zip(st.left_endpoints()).zip(st.lengths()).enumerate() {
                let _ = writeln!(out, "{i},{},{},{},{}", num(left), num(len), e.j, e.k);
            }
            out
        }
    }))
}

fn dpv_tiles(shape: &DpvShape, emit: Emit) -> Result<Artifact> {
    let params = shape.params()?;
    let kind: DpvKind = shape.kind.into();
    let patch = dpv_supertile(kind, shape.n, &params, shape.rule.into())?;
    Ok(Artifact::new(match emit {
        Emit::Json => window_to_json(&crate::dpv::dpv_window(kind, shape.n, &params, shape.rule.into())?) + "\n",
        _ => {
            let faults = find_fault_lines(&patch)?;
            render_rects(&patch, Some(&faults), &SvgStyle::default())?
        }
    }))
}

fn dpv_surface(shape: &DpvShape, emit: Emit) -> Result<Artifact> {
    let surface = build_stepped_surface(shape.kind.into(), shape.n, shape.rule.into())?;
    Ok(Artifact::new(match emit {
        Emit::Obj => surface_to_obj(&surface, 2)?,
        _ => {
            let parts: Vec<String> = surface
                .facets
                .iter()
                .map(|f| {
                    let c: Vec<String> = f.corner.iter().map(i64::to_string).collect();
                    format!("{{\"corner\":[{}],\"tag\":[{},{}]}}", c.join(","), f.tag.0, f.tag.1)
                })
                .collect();
            format!("{{\"facets\":[{}]}}\n", parts.join(","))
        }
    }))
}

fn dpv_faults(config: &RunConfig, shape: &DpvShape) -> Result<Artifact> {
    let params = shape.params()?;
    let patch = dpv_supertile(shape.kind.into(), shape.n, &params, shape.rule.into())?;
    let report = find_fault_lines(&patch)?;
    let mut out = config_line(config);
    out.push_str("y,offset\n");
    for line in &report.lines {
        for o in &line.offsets {
            let _ = writeln!(out, "{},{}", num(line.y), num(*o));
        }
    }
    let mut art = Artifact::new(out);
    art.notes.push(format!(
        "{} fault lines; smallest positive offset {}",
        report.lines.len(),
        report.min_positive.map_or("none".into(), |m| format!("{m}"))
    ));
    Ok(art)
}

fn solenoid(config: &RunConfig, action: &SolenoidAction, global: Option<Emit>) -> Result<Artifact> {
    match action {
        SolenoidAction::Supertile { k, head, emit } => {
            let head: SolLabel = head.parse()?;
            let st = build_supertile(*k, head)?;
            Ok(Artifact::new(
                match pick(*emit, global, Emit::Text, &[Emit::Text, Emit::Json])? {
                    Emit::Json => window_to_json(&st.to_window()) + "\n",
                    _ => {
                        let labels: Vec<String> = st.labels.iter().map(SolLabel::to_string).collect();
                        labels.join(",") + "\n"
                    }
                },
            ))
        }
        SolenoidAction::Sweep { max_n, max_label, emit } => {
            pick(*emit, global, Emit::Csv, &[Emit::Csv])?;
            let rows = transition_sweep(*max_n, *max_label)?;
            let mismatches = rows.iter().filter(|r| r.formula != r.brute).count();
            let mut out = config_line(config);
            out.push_str("n,N,m,k,formula,brute,mismatch\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.n,
                    r.big_n,
                    r.m,
                    r.k,
                    r.formula,
                    r.brute,
                    u8::from(r.formula != r.brute)
                );
            }
            let mut art = Artifact::new(out);
            art.notes.push(format!("{} rows, {mismatches} mismatches", rows.len()));
            Ok(art)
        }
        SolenoidAction::Probe {
            spec,
            delta,
            n_window,
            samples,
            emit,
        } => {
            let emit = pick(*emit, global, Emit::Text, &[Emit::Text, Emit::Json])?;
            let found = expansivity_probe(&spec.spec(), *delta, *n_window, *samples)?;
            Ok(Artifact::new(match (found, emit) {
                (None, Emit::Json) => "null\n".into(),
                (None, _) => "no witness\n".into(),
                (Some(w), Emit::Json) => format!(
                    "{{\"level\":{},\"translates\":{},\"first\":{},\"second\":{}}}\n",
                    w.level,
                    serde_json::to_string(&w.translates).expect("integers serialize"),
                    window_to_json(&w.first),
                    window_to_json(&w.second)
                ),
                (Some(w), _) => format!(
                    "witness: the tiling and its shift by 2^{} stay within {} at {} translates\n",
                    w.level,
                    delta,
                    w.translates.len()
                ),
            }))
        }
    }
}

fn dist(a: &DistArgs) -> Result<Artifact> {
    let t1 = window_from_json(&read(&a.first)?)?;
    let t2 = window_from_json(&read(&a.second)?)?;
    let metric = LabelMetric {
        solenoid: a.spec.spec(),
    };
    let text = match a.kind {
        DistKind::Tile => {
            let single = |w: &TilingWindow, p: &Path| match w.patch.tiles() {
                [t] => Ok(*t),
                _ => Err(IlcError::Validation(format!(
                    "{} must hold exactly one tile",
                    p.display()
                ))),
            };
            let d = tile_distance_with(&single(&t1, &a.first)?, &single(&t2, &a.second)?, &metric)?;
            format!("{d}\n")
        }
        DistKind::Patch => {
            let m = patch_distance_with(&t1.patch, &t2.patch, &metric);
            let perm: Vec<String> = m.assignment.iter().map(usize::to_string).collect();
            format!("{}\n{}\n", m.value, perm.join(" "))
        }
        DistKind::Tiling => format!("{}\n", tiling_distance_with(&t1, &t2, a.tol, &metric)?),
        DistKind::DL => {
            let step = a.step.unwrap_or(a.tol / 4.0);
            let d = dl_distance(&t1, &t2, a.l, step, a.tol, &metric)?;
            format!("{}\n", d.value)
        }
    };
    Ok(Artifact::new(text))
}

fn freq(config: &RunConfig, a: &FreqArgs) -> Result<Artifact> {
    let family = family_from_json(&read(&a.family)?)?;
    let mut out = config_line(config);
    let mut notes = Vec::new();
    match a.route {
        Route::Ergodic => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let w = match a.system {
                SystemArg::Subst1d => iterate(rng.gen_range(1.0..=3.0), a.n.unwrap_or(25))?.window_at(0)?,
                SystemArg::Dpv => {
                    let p = dpv_supertile(DpvKind::A, a.n.unwrap_or(6), &DpvParams::natural(), DpvRule::Varied)?;
                    let b = p.bounding_box().expect("nonempty");
                    TilingWindow::new(
                        validate_patch(p.tiles().to_vec(), GEOM_TOL)?,
                        b,
                        crate::geometry::Provenance::new(crate::geometry::System::Dpv, a.n.unwrap_or(6), 2),
                    )?
                }
                SystemArg::Solenoid => {
                    let half = 1i64 << a.n.unwrap_or(14).min(24);
                    toeplitz_fill(-half, half, None, &CompactificationSpec::one_point())?
                }
            };
            let e = freq_estimate_ergodic(&family, &w)?;
            out.push_str("route,volume,value,boundary_share\n");
            let _ = writeln!(
                out,
                "ergodic,{},{},{}",
                num(w.window.volume()),
                num(e.value),
                num(e.boundary_share)
            );
        }
        Route::Transition => {
            let rho = match a.system {
                SystemArg::Subst1d => SupertileMeasureSeq::var_length(),
                SystemArg::Dpv => SupertileMeasureSeq::Dpv {
                    params: DpvParams::natural(),
                },
                SystemArg::Solenoid => SupertileMeasureSeq::Solenoid,
            };
            let seq = freq_estimate_transition(&family, &rho, a.n.unwrap_or(8), a.samples, config.seed)?;
            out.push_str("route,n,value\n");
            for (n, v) in &seq.values {
                let _ = writeln!(out, "transition,{n},{}", num(*v));
            }
            notes.push(format!("converged: {}", seq.converged));
        }
    }
    Ok(Artifact { content: out, notes })
}

fn complexity(config: &RunConfig, a: &ComplexityArgs) -> Result<Artifact> {
    let sampler: Box<dyn SampleSpace> = match a.system {
        SystemArg::Subst1d => Box::new(VarLengthSampler),
        SystemArg::Dpv => Box::new(DpvSampler::new(DpvParams::natural(), DpvRule::Varied)),
        SystemArg::Solenoid => Box::new(SolenoidSampler::default()),
    };
    let sampler = sampler.as_ref();
    // each L is its own task; collecting keeps input order
    let estimates: Result<Vec<ComplexityEstimate>> =
        a.ls.par_iter()
            .map(|&l| estimate_n(a.eps, l, sampler, a.budget, config.seed, None))
            .collect();
    let estimates = estimates?;
    let mut out = config_line(config);
    out.push_str("eps,L,sepset_size,semantics,seed\n");
    for e in &estimates {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(e.eps),
            num(e.l),
            e.sepset_size(),
            ComplexityEstimate::SEMANTICS,
            e.seed
        );
    }
    let mut art = Artifact::new(out);
    if let Ok(fit) = fit_scaling(&estimates) {
        art.notes.push(format!(
            "alpha = {:.4} (95% CI {:.4} .. {:.4})",
            fit.alpha, fit.ci.0, fit.ci.1
        ));
    }
    if estimates.iter().any(|e| e.sepset_size() == e.samples) {
        art.notes
            .push("every sample was separated at some L: the budget bounds the estimate".into());
    }
    Ok(art)
}

/// Writes `content` to `path` through a temporary file in the same
/// directory, so readers never see a partial artifact.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path).map_err(|e| IlcError::Io(e.to_string()))?;
    Ok(())
}

/// Runs and writes the artifact; returns the process exit status.
pub fn main_with(config: &RunConfig) -> i32 {
    let result = run(config).and_then(|art| {
        for n in &art.notes {
            eprintln!("{n}");
        }
        match &config.out {
            Some(p) => write_atomic(p, &art.content),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(art.content.as_bytes())?;
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("ilc").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn subcommand_seed_is_the_tile_length() {
        let c = parse(&["--seed", "7", "subst1d", "--seed", "1.625", "--n", "9"]);
        assert_eq!(c.seed, 7);
        match &c.command {
            Command::Subst1d(a) => assert_eq!((a.x, a.n), (1.625, 9)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dpv_forms() {
        let c = parse(&[
            "dpv", "--widths", "1.5", "1", "--height", "1", "--n", "2", "--emit", "svg",
        ]);
        let art = run(&c).unwrap();
        assert!(art.content.starts_with("<svg"));
        let c = parse(&["dpv", "surface", "--n", "3", "--emit", "obj"]);
        assert_eq!(
            run(&c).unwrap().content.lines().filter(|l| l.starts_with("f ")).count(),
            152
        );
        let c = parse(&["dpv", "faults", "--n", "3"]);
        let out = run(&c).unwrap().content;
        assert!(out.starts_with("# config: {"));
        assert_eq!(out.lines().nth(1), Some("y,offset"));
    }

    #[test]
    fn wrong_format_is_a_validation_error() {
        let c = parse(&["solenoid", "sweep", "--max-N", "3", "--emit", "svg"]);
        assert_eq!(run(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn sweep_has_no_mismatches() {
        let c = parse(&["solenoid", "sweep", "--max-N", "5", "--max-label", "7"]);
        let art = run(&c).unwrap();
        assert!(art.content.lines().skip(2).all(|l| l.ends_with(",0")));
        assert!(art.notes[0].ends_with(" 0 mismatches"));
    }

    #[test]
    fn config_echo_is_json() {
        let c = parse(&[
            "--seed",
            "3",
            "complexity",
            "--system",
            "solenoid",
            "--L",
            "2,4",
            "--budget",
            "20",
        ]);
        let line = config_line(&c);
        let v: serde_json::Value = serde_json::from_str(line.trim_start_matches("# config: ")).unwrap();
        assert_eq!(v["seed"], 3);
        assert_eq!(v["command"]["Complexity"]["budget"], 20);
    }

    #[test]
    fn atomic_write_replaces_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
