//! SVG and OBJ export. Output is deterministic: fixed element order and
//! six-decimal coordinates.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dpv::{DpvKind, FacetSurface, FaultLineReport};
use crate::error::{IlcError, Result};
use crate::geometry::{Label, Patch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgStyle {
    /// Pixels per length unit.
    pub scale: f64,
    /// Height of one bar row, in pixels.
    pub bar_height: f64,
    pub margin: f64,
    pub max_tiles: usize,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            scale: 10.0,
            bar_height: 12.0,
            margin: 4.0,
            max_tiles: 200_000,
        }
    }
}

fn f6(x: f64) -> String {
    // avoid "-0.000000"
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".into()
    } else {
        s
    }
}

/// Fixed greyscale ramp over tile lengths `[1, 3]`: short tiles light,
/// long tiles dark.
pub fn length_grey(len: f64) -> String {
    let t = ((len - 1.0) / 2.0).clamp(0.0, 1.0);
    let v = (235.0 - 200.0 * t).round() as u8;
    format!("#{v:02x}{v:02x}{v:02x}")
}

fn check_size(count: usize, style: &SvgStyle) -> Result<()> {
    if count == 0 {
        return Err(IlcError::Validation("nothing to render".into()));
    }
    if count > style.max_tiles {
        return Err(IlcError::SizeLimit {
            requested: count as u64,
            limit: style.max_tiles as u64,
        });
    }
    Ok(())
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        f6(w),
        f6(h),
        f6(w),
        f6(h)
    );
}

/// One bar per row, each row a one-dimensional patch drawn from its own
/// leftmost point, tiles colored by length.
pub fn render_bars(rows: &[Patch], style: &SvgStyle) -> Result<String> {
    let count = rows.iter().map(Patch::len).sum();
    check_size(count, style)?;
    if rows.iter().any(|r| !r.is_empty() && r.dim() != 1) {
        return Err(IlcError::Validation("bars need one-dimensional patches".into()));
    }
    let width = rows
        .iter()
        .filter_map(Patch::bounding_box)
        .map(|b| b.side(0))
        .fold(0.0, f64::max);
    let m = style.margin;
    let row_step = style.bar_height + m;
    let mut out = String::new();
    header(
        &mut out,
        width * style.scale + 2.0 * m,
        rows.len() as f64 * row_step + m,
    );
    for (r, row) in rows.iter().enumerate() {
        let Some(bb) = row.bounding_box() else { continue };
        let y = m + r as f64 * row_step;
        for t in row.tiles() {
            let len = t.support.side(0);
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#000000\" stroke-width=\"0.2\"/>",
                f6(m + (t.support.lo[0] - bb.lo[0]) * style.scale),
                f6(y),
                f6(len * style.scale),
                f6(style.bar_height),
                length_grey(len)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Outlined rectangles, `A` shaded and `B` white, with fault lines in red
/// when supplied. The y axis points up.
pub fn render_rects(patch: &Patch, faults: Option<&FaultLineReport>, style: &SvgStyle) -> Result<String> {
    check_size(patch.len(), style)?;
    if patch.dim() != 2 {
        return Err(IlcError::Validation("rectangles need a two-dimensional patch".into()));
    }
    let bb = patch.bounding_box().expect("nonempty");
    let (s, m) = (style.scale, style.margin);
    let h = bb.side(1) * s + 2.0 * m;
    let px = |x: f64| m + (x - bb.lo[0]) * s;
    let py = |y: f64| h - m - (y - bb.lo[1]) * s;
    let mut out = String::new();
    header(&mut out, bb.side(0) * s + 2.0 * m, h);
    for t in patch.tiles() {
        let fill = match t.label {
            Label::Dpv(DpvKind::A) => "#c8c8c8",
            _ => "#ffffff",
        };
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#000000\" stroke-width=\"0.5\"/>",
            f6(px(t.support.lo[0])),
            f6(py(t.support.hi[1])),
            f6(t.support.side(0) * s),
            f6(t.support.side(1) * s),
            fill
        );
    }
    if let Some(report) = faults {
        for line in &report.lines {
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#d00000\" stroke-width=\"1.5\"/>",
                f6(px(bb.lo[0])),
                f6(py(line.y)),
                f6(px(bb.hi[0])),
                f6(py(line.y))
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Wavefront OBJ of a stepped surface: one quad per facet, integer
/// vertices, shared vertices listed once in order of first use. `h` is the
/// number of horizontal letters; a facet with tag `(i, j)` spans `e_i` and
/// `e_(h+j)`.
pub fn surface_to_obj(surface: &FacetSurface, h: usize) -> Result<String> {
    if surface.facets.is_empty() {
        return Err(IlcError::Validation("empty surface".into()));
    }
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut verts: Vec<Vec<i64>> = Vec::new();
    let mut faces = Vec::with_capacity(surface.facets.len());
    for f in &surface.facets {
        let (i, j) = (f.tag.0 as usize, h + f.tag.1 as usize);
        if i >= f.corner.len() || j >= f.corner.len() {
            return Err(IlcError::Validation(format!(
                "facet tag {:?} outside the lattice",
                f.tag
            )));
        }
        let mut quad = [0usize; 4];
        for (slot, (di, dj)) in quad.iter_mut().zip([(0, 0), (1, 0), (1, 1), (0, 1)]) {
            let mut p = f.corner.clone();
            p[i] += di;
            p[j] += dj;
            *slot = *index.entry(p.clone()).or_insert_with(|| {
                verts.push(p);
                verts.len()
            });
        }
        faces.push(quad);
    }
    let mut out = String::new();
    let _ = writeln!(out, "# {} facets", faces.len());
    for v in &verts {
        let coords: Vec<String> = v.iter().map(i64::to_string).collect();
        let _ = writeln!(out, "v {}", coords.join(" "));
    }
    for q in &faces {
        let _ = writeln!(out, "f {} {} {} {}", q[0], q[1], q[2], q[3]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpv::{build_stepped_surface, dpv_supertile, find_fault_lines, DpvParams, DpvRule};
    use crate::subst1d::iterate;

    #[test]
    fn dpv_rectangle_count() {
        let p = dpv_supertile(DpvKind::A, 3, &DpvParams::natural(), DpvRule::Varied).unwrap();
        let faults = find_fault_lines(&p).unwrap();
        let svg = render_rects(&p, Some(&faults), &SvgStyle::default()).unwrap();
        assert_eq!(svg.matches("<rect").count(), 152);
        assert_eq!(svg.matches("<line").count(), faults.lines.len());
        assert_eq!(svg, render_rects(&p, Some(&faults), &SvgStyle::default()).unwrap());
    }

    #[test]
    fn bars_are_deterministic() {
        let rows: Vec<Patch> = (0..=9).map(|n| iterate(1.625, n).unwrap().patch()).collect();
        let a = render_bars(&rows, &SvgStyle::default()).unwrap();
        assert_eq!(a, render_bars(&rows, &SvgStyle::default()).unwrap());
        let tiles: usize = rows.iter().map(Patch::len).sum();
        assert_eq!(a.matches("<rect").count(), tiles);
        assert!(!a.contains("-0.000000"));
    }

    #[test]
    fn empty_and_oversized() {
        assert!(matches!(
            render_bars(&[], &SvgStyle::default()),
            Err(IlcError::Validation(_))
        ));
        let p = iterate(2.0, 8).unwrap().patch();
        let tiny = SvgStyle {
            max_tiles: 3,
            ..SvgStyle::default()
        };
        assert!(matches!(render_bars(&[p], &tiny), Err(IlcError::SizeLimit { .. })));
    }

    #[test]
    fn grey_ramp() {
        assert_eq!(length_grey(1.0), "#ebebeb");
        assert_eq!(length_grey(3.0), "#232323");
    }

    #[test]
    fn obj_has_one_quad_per_facet() {
        let s = build_stepped_surface(DpvKind::A, 3, DpvRule::Varied).unwrap();
        let obj = surface_to_obj(&s, 2).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 152);
        for l in obj.lines().filter(|l| l.starts_with("v ")) {
            assert!(l[2..].split(' ').all(|c| c.parse::<i64>().is_ok()));
        }
    }
}
