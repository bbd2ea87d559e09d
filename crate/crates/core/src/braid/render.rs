//! Braid diagrams as ASCII art, SVG and TikZ `braid` package source.
//!
//! Strand positions run top to bottom and letters left to right. In `σ_i`
//! the strand moving from position `i` to `i + 1` passes over; in `σ_i^-1`
//! it passes under.

use std::fmt::Write;

use super::BraidWord;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Svg,
    Tikz,
}

impl std::str::FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(Self::Ascii),
            "svg" => Ok(Self::Svg),
            "tikz" => Ok(Self::Tikz),
            _ => Err(format!("unknown render format '{s}' (expected ascii, svg or tikz)")),
        }
    }
}

pub fn render(w: &BraidWord, format: RenderFormat) -> String {
    match format {
        RenderFormat::Ascii => render_ascii(w),
        RenderFormat::Svg => render_svg(w),
        RenderFormat::Tikz => render_tikz(w),
    }
}

/// Rows between neighbouring strands.
const GAP: usize = 3;
/// Columns taken by one crossing.
const BLOCK: usize = 4;

/// Text diagram with strands `GAP` rows apart. Each letter is a
/// `BLOCK`-column X in which the under-strand is broken.
pub fn render_ascii(w: &BraidWord) -> String {
    let n = w.n();
    let rows = GAP * (n - 1) + 1;
    let width = 1 + w.len() * (BLOCK + 1);
    let mut grid = vec![vec![' '; width]; rows];
    for r in (0..rows).step_by(GAP) {
        grid[r][0] = '-';
    }
    for (k, l) in w.letters().iter().enumerate() {
        let x = 1 + k * (BLOCK + 1);
        let top = GAP * (l.index - 1);
        for p in 0..n {
            if p + 1 != l.index && p != l.index {
                grid[GAP * p][x..x + BLOCK].fill('-');
            }
        }
        for d in 0..BLOCK {
            let down_over = l.sign > 0;
            let middle = d == 1 || d == 2;
            // strand going down: '\' from (top, x) to (top + 3, x + 3)
            if down_over || !middle {
                grid[top + d][x + d] = '\\';
            }
            // strand going up: '/' from (top + 3, x) to (top, x + 3)
            if !down_over || !middle {
                grid[top + GAP - d][x + d] = '/';
            }
        }
        for r in (0..rows).step_by(GAP) {
            grid[r][x + BLOCK] = '-';
        }
    }
    let mut out = String::new();
    for row in grid {
        let line: String = row.into_iter().collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

const SVG_DX: f64 = 40.0;
const SVG_DY: f64 = 30.0;
const SVG_MARGIN: f64 = 10.0;
/// Fraction of a crossing removed from the under-strand around its middle.
const SVG_HOLE: f64 = 0.2;

fn pt(x: f64, y: f64) -> String {
    format!("{},{}", x, y)
}

/// SVG diagram: one `<polyline>` per strand piece, the under-strand of each
/// crossing drawn as two pieces with a gap.
pub fn render_svg(w: &BraidWord) -> String {
    let n = w.n();
    let width = SVG_DX * w.len().max(1) as f64 + 2.0 * SVG_MARGIN;
    let height = SVG_DY * (n - 1) as f64 + 2.0 * SVG_MARGIN;
    let y = |p: usize| SVG_MARGIN + SVG_DY * p as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, r#"<g fill="none" stroke="black" stroke-width="2">"#);
    let mut line = |a: (f64, f64), b: (f64, f64)| {
        let _ = writeln!(out, r#"<polyline points="{} {}"/>"#, pt(a.0, a.1), pt(b.0, b.1));
    };
    if w.is_empty() {
        for p in 0..n {
            line((SVG_MARGIN, y(p)), (SVG_MARGIN + SVG_DX, y(p)));
        }
    }
    for (k, l) in w.letters().iter().enumerate() {
        let x0 = SVG_MARGIN + SVG_DX * k as f64;
        let x1 = x0 + SVG_DX;
        for p in 0..n {
            if p + 1 != l.index && p != l.index {
                line((x0, y(p)), (x1, y(p)));
            }
        }
        let (ya, yb) = (y(l.index - 1), y(l.index));
        let down = ((x0, ya), (x1, yb));
        let up = ((x0, yb), (x1, ya));
        let (over, under) = if l.sign > 0 { (down, up) } else { (up, down) };
        line(over.0, over.1);
        let lerp = |s: f64| {
            (
                under.0 .0 + (under.1 .0 - under.0 .0) * s,
                under.0 .1 + (under.1 .1 - under.0 .1) * s,
            )
        };
        line(under.0, lerp(0.5 - SVG_HOLE));
        line(lerp(0.5 + SVG_HOLE), under.1);
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// The token stream `a_{2} a_{1}^{-1} ...` of the TikZ `braid` package.
pub fn tikz_tokens(w: &BraidWord) -> String {
    w.letters()
        .iter()
        .map(|l| {
            if l.sign > 0 {
                format!("a_{{{}}}", l.index)
            } else {
                format!("a_{{{}}}^{{-1}}", l.index)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// A complete `tikzpicture` with a single `\braid` command.
pub fn render_tikz(w: &BraidWord) -> String {
    format!(
        "\\begin{{tikzpicture}}\n\\braid[number of strands={}] (braid) {};\n\\end{{tikzpicture}}\n",
        w.n(),
        tikz_tokens(w)
    )
}
