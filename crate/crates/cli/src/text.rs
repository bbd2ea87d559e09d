//! Plain-text rendering of results.

use std::fmt::Write;

use braidtrack_core::branchlocus::BranchSet;
use braidtrack_core::engine::GroupReport;
use braidtrack_core::poly::Complex;

/// Components smaller than this are printed as zero.
const SNAP: f64 = 1e-12;

/// `x` with 6 significant digits, `%g` style.
pub fn real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        let s = format!("{:.5e}", x);
        let (mant, e) = s.split_once('e').expect("exponent form");
        return format!("{}e{}", trim(mant), e);
    }
    let decimals = (5 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `a+bi` with 6 significant digits per part.
pub fn complex(c: Complex) -> String {
    let snap = |x: f64| if x.abs() < SNAP { 0.0 } else { x };
    let c = Complex::new(snap(c.re), snap(c.im));
    let im = real(c.im);
    if im.starts_with('-') {
        format!("{}{}i", real(c.re), im)
    } else {
        format!("{}+{}i", real(c.re), im)
    }
}

pub fn branch(set: &BranchSet) -> String {
    let mut out = String::new();
    for (p, m) in set.points.iter().zip(&set.multiplicities) {
        let _ = writeln!(out, "{} (multiplicity {m})", complex(*p));
    }
    out
}

pub fn report(r: &GroupReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "strands: {}", r.n);
    let _ = writeln!(out, "lambda: {}", complex(r.lambda));
    let _ = writeln!(out, "base: {}", complex(r.base));
    let _ = writeln!(out, "generators: {}", r.generators.len());
    for (k, g) in r.generators.iter().enumerate() {
        let _ = writeln!(out, "generator {} at {} (multiplicity {})", k + 1, complex(g.branch_point), g.multiplicity);
        let _ = writeln!(out, "  word: {}", g.word);
        let _ = writeln!(out, "  core: {}", g.core);
        let _ = writeln!(out, "  permutation: {}", g.perm);
        let _ = writeln!(
            out,
            "  crossings: {}, max residual {}",
            g.crossings.len(),
            real(g.diagnostics.residual_max)
        );
    }
    let order = r.monodromy.order.map_or("not computed".to_string(), |o| o.to_string());
    let transitive = if r.monodromy.transitive { "transitive" } else { "intransitive" };
    let _ = writeln!(out, "monodromy: order {order}, {transitive}");
    out
}
