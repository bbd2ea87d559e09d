//! Keyhole loops: closed polylines based at a common point that wind once
//! around one branch point and not at all around the others.
//!
//! A loop is an approach polyline from the base to a vertex of a small
//! counterclockwise polygon about the target, the polygon itself, and the
//! approach retraced backwards. The approach runs straight where it can and
//! detours around any other branch point it would pass too close to.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branchlocus::BranchSet;
use crate::homotopy::Segment;
use crate::poly::Complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("branch set is empty")]
    EmptyBranchSet,
    #[error("target index {0} out of range")]
    BadTarget(usize),
    #[error("polygon needs at least 3 sides, got {0}")]
    TooFewSides(usize),
    #[error("radius factor must lie in (0, 0.5), got {0}")]
    BadRadiusFactor(f64),
    #[error("point {p} lies on the loop")]
    OnLoop { p: Complex },
    #[error("could not route a loop around {target} after {attempts} attempts; vertices tried last: {vertices:?}")]
    Routing {
        target: Complex,
        attempts: usize,
        vertices: Vec<Complex>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopOptions {
    pub polygon_sides: usize,
    pub radius_factor: f64,
    /// Fixed polygon radius instead of `radius_factor` times the distance
    /// to the nearest other branch point.
    pub radius: Option<f64>,
    /// Angle of the first polygon vertex; by default it faces the base.
    pub phase: Option<f64>,
}

impl Default for LoopOptions {
    fn default() -> Self {
        Self {
            polygon_sides: 4,
            radius_factor: 0.2,
            radius: None,
            phase: None,
        }
    }
}

/// A closed polyline `vertices[0] = base -> ... -> base`.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    pub base: Complex,
    pub target: Complex,
    pub radius: f64,
    pub vertices: Vec<Complex>,
    /// Number of approach segments; the polygon follows, then as many
    /// return segments.
    pub approach_len: usize,
}

/// Which part of a keyhole loop a segment belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Approach,
    Polygon,
    Return,
}

impl Loop {
    pub fn segments(&self) -> Vec<Segment> {
        self.vertices
            .windows(2)
            .map(|w| Segment {
                start: w[0],
                end: w[1],
            })
            .collect()
    }

    pub fn part(&self, segment: usize) -> Part {
        let total = self.vertices.len() - 1;
        if segment < self.approach_len {
            Part::Approach
        } else if segment >= total - self.approach_len {
            Part::Return
        } else {
            Part::Polygon
        }
    }
}

fn dist_to_segment(p: Complex, a: Complex, b: Complex) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let u = ((p - a) * d.conj()).re / len2;
    (p - (a + d * u.clamp(0.0, 1.0))).norm()
}

/// Winding number of the closed polyline `vertices` about `p`.
pub fn winding_number_of(vertices: &[Complex], p: Complex) -> Result<i64, LoopError> {
    let mut total = 0.0;
    for w in vertices.windows(2) {
        if dist_to_segment(p, w[0], w[1]) <= 1e-9 {
            return Err(LoopError::OnLoop { p });
        }
        total += ((w[1] - p) / (w[0] - p)).arg();
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

pub fn winding_number(lp: &Loop, p: Complex) -> Result<i64, LoopError> {
    winding_number_of(&lp.vertices, p)
}

fn spread(points: &[Complex]) -> f64 {
    let mut s: f64 = 0.0;
    for (k, a) in points.iter().enumerate() {
        for b in &points[k + 1..] {
            s = s.max((a - b).norm());
        }
    }
    if points.len() < 2 || s == 0.0 {
        1.0
    } else {
        s
    }
}

/// A base point to the right of every branch point, slightly above the
/// real axis.
pub fn choose_base(branch: &BranchSet, seed: u64) -> Result<Complex, LoopError> {
    if branch.is_empty() {
        return Err(LoopError::EmptyBranchSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: f64 = rng.gen_range(1e-3..0.1);
    let eps: f64 = rng.gen_range(1e-3..0.1);
    let sp = spread(&branch.points);
    let max_re = branch.points.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Complex::new(max_re + (1.0 + r) * sp, eps * sp))
}

/// Polygon radius for each branch point, as `factor` times the distance to
/// its nearest neighbour (or to `base` when it is alone).
fn own_radii(points: &[Complex], base: Complex, factor: f64) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let near = points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min);
            factor * if near.is_finite() { near } else { (base - p).norm() }
        })
        .collect()
}

/// Routes a polyline from `from` to `to` around the discs `(center, r)`.
fn route(from: Complex, to: Complex, obstacles: &[(Complex, f64)]) -> Vec<Complex> {
    let mut path = vec![from, to];
    for _ in 0..64 {
        let mut hit: Option<(usize, f64, Complex, f64)> = None;
        for k in 0..path.len() - 1 {
            let (a, b) = (path[k], path[k + 1]);
            let d = b - a;
            for &(c, r) in obstacles {
                if dist_to_segment(c, a, b) >= r || (c - to).norm() < 1e-300 {
                    continue;
                }
                let u = ((c - a) * d.conj()).re / d.norm_sqr();
                if hit.is_none_or(|h| (h.0, h.1) > (k, u)) {
                    hit = Some((k, u, c, r));
                }
            }
            if hit.is_some() {
                break;
            }
        }
        let Some((k, _, c, r)) = hit else {
            return path;
        };
        let (a, b) = (path[k], path[k + 1]);
        let dir = (b - a) / (b - a).norm();
        let mut normal = dir * Complex::new(0.0, 1.0);
        // go round on the side away from the centre
        let foot = a + dir * ((c - a) * dir.conj()).re;
        if ((c - foot) * normal.conj()).re > 0.0 {
            normal = -normal;
        }
        let w1 = c - dir * (1.6 * r) + normal * (1.6 * r);
        let w2 = c + dir * (1.6 * r) + normal * (1.6 * r);
        path.splice(k + 1..k + 1, [w1, w2]);
    }
    path
}

/// The keyhole loop around `branch.points[target_idx]`.
pub fn keyhole_loop(
    branch: &BranchSet,
    target_idx: usize,
    base: Complex,
    opts: &LoopOptions,
    seed: u64,
) -> Result<Loop, LoopError> {
    let pts = &branch.points;
    if pts.is_empty() {
        return Err(LoopError::EmptyBranchSet);
    }
    if target_idx >= pts.len() {
        return Err(LoopError::BadTarget(target_idx));
    }
    if opts.polygon_sides < 3 {
        return Err(LoopError::TooFewSides(opts.polygon_sides));
    }
    if !(opts.radius_factor > 0.0 && opts.radius_factor < 0.5) {
        return Err(LoopError::BadRadiusFactor(opts.radius_factor));
    }
    let tau = pts[target_idx];
    let radii = own_radii(pts, base, opts.radius_factor);
    let rho = opts.radius.unwrap_or(radii[target_idx]);
    let obstacles: Vec<(Complex, f64)> = pts
        .iter()
        .zip(&radii)
        .enumerate()
        .filter(|(k, _)| *k != target_idx)
        .map(|(_, (&p, &r))| (p, r))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (target_idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let m = opts.polygon_sides;
    const ATTEMPTS: usize = 12;
    let mut last = Vec::new();
    for attempt in 0..ATTEMPTS {
        let mut phi0 = opts.phase.unwrap_or_else(|| (base - tau).arg());
        if attempt > 0 {
            phi0 += rng.gen_range(-PI..PI) / m as f64;
        }
        let poly: Vec<Complex> = (0..m)
            .map(|k| tau + Complex::from_polar(rho, phi0 + 2.0 * PI * k as f64 / m as f64))
            .collect();
        let approach = route(base, poly[0], &obstacles);
        let mut vertices = approach.clone();
        vertices.extend_from_slice(&poly[1..]);
        vertices.push(poly[0]);
        vertices.extend(approach.iter().rev().skip(1));
        let lp = Loop {
            base,
            target: tau,
            radius: rho,
            approach_len: approach.len() - 1,
            vertices,
        };
        if verify(&lp, pts, &radii, target_idx) {
            return Ok(lp);
        }
        last = lp.vertices;
    }
    Err(LoopError::Routing {
        target: tau,
        attempts: ATTEMPTS,
        vertices: last,
    })
}

fn verify(lp: &Loop, pts: &[Complex], radii: &[f64], target_idx: usize) -> bool {
    for (k, &p) in pts.iter().enumerate() {
        let want = if k == target_idx { 1 } else { 0 };
        if winding_number(lp, p) != Ok(want) {
            return false;
        }
        let clearance = if k == target_idx { lp.radius } else { radii[k] };
        let min = lp
            .vertices
            .windows(2)
            .map(|w| dist_to_segment(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min);
        if min <= 0.25 * clearance {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn set(points: &[Complex]) -> BranchSet {
        BranchSet {
            points: points.to_vec(),
            multiplicities: vec![1; points.len()],
            min_gap: 0.0,
        }
    }

    #[test]
    fn winding_examples() {
        let sq = [c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0)];
        assert_eq!(winding_number_of(&sq, c(0.0, 0.0)), Ok(1));
        assert_eq!(winding_number_of(&sq, c(10.0, 0.0)), Ok(0));
        let rev: Vec<Complex> = sq.iter().rev().copied().collect();
        assert_eq!(winding_number_of(&rev, c(0.0, 0.0)), Ok(-1));
        assert!(winding_number_of(&sq, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn base_examples() {
        let b = choose_base(&set(&[c(0.0, 0.0)]), 1).unwrap();
        assert!(b.re > 1.0 && b.re < 1.1 && b.im > 0.0 && b.im < 0.1);
        let b = choose_base(&set(&[c(-3.0, 0.0), c(1.0, 0.0)]), 1).unwrap();
        assert!(b.re > 5.0 && b.re < 5.4);
        for seed in 0..1000 {
            let pts = [c(-3.0, 0.0), c(1.0, 0.0), c(0.5, 2.0)];
            let b = choose_base(&set(&pts), seed).unwrap();
            let sp = spread(&pts);
            assert!(pts.iter().all(|p| (p - b).norm() > 0.5 * sp));
        }
    }

    #[test]
    fn single_point_loop() {
        let bs = set(&[c(0.0, 0.0)]);
        let opts = LoopOptions {
            polygon_sides: 3,
            radius: Some(1.0),
            phase: Some(0.2),
            ..LoopOptions::default()
        };
        let lp = keyhole_loop(&bs, 0, c(2.0, 0.01), &opts, 0).unwrap();
        assert_eq!(winding_number(&lp, c(0.0, 0.0)), Ok(1));
        assert_eq!(lp.vertices.len(), 1 + 1 + 3 + 1);
        assert_eq!(lp.vertices.first(), lp.vertices.last());
        assert_eq!(lp.part(0), Part::Approach);
        assert_eq!(lp.part(2), Part::Polygon);
        assert_eq!(lp.part(4), Part::Return);
    }

    #[test]
    fn two_point_loops() {
        let bs = set(&[c(-3.0, 0.0), c(1.0, 0.0)]);
        let base = choose_base(&bs, 3).unwrap();
        for k in 0..2 {
            let lp = keyhole_loop(&bs, k, base, &LoopOptions::default(), 3).unwrap();
            assert_eq!(winding_number(&lp, bs.points[k]), Ok(1));
            assert_eq!(winding_number(&lp, bs.points[1 - k]), Ok(0));
            let segs = lp.segments();
            assert!(segs.windows(2).all(|w| w[0].end == w[1].start));
            assert_eq!(segs[0].start, segs.last().unwrap().end);
        }
    }

    #[test]
    fn detours_in_crowded_sets() {
        // points lined up so that straight approaches pass through others
        let pts: Vec<Complex> = (0..6).map(|k| c(k as f64 * 0.5, 0.01 * k as f64)).collect();
        let bs = set(&pts);
        let base = c(4.0, 0.0);
        for k in 0..pts.len() {
            let lp = keyhole_loop(&bs, k, base, &LoopOptions::default(), 9).unwrap();
            for (j, &p) in pts.iter().enumerate() {
                assert_eq!(winding_number(&lp, p), Ok(if j == k { 1 } else { 0 }));
            }
            let again = keyhole_loop(&bs, k, base, &LoopOptions::default(), 9).unwrap();
            assert_eq!(lp, again);
        }
    }

    #[test]
    fn option_validation() {
        let bs = set(&[c(0.0, 0.0)]);
        let bad = LoopOptions { polygon_sides: 2, ..LoopOptions::default() };
        assert_eq!(keyhole_loop(&bs, 0, c(1.0, 0.0), &bad, 0), Err(LoopError::TooFewSides(2)));
        let bad = LoopOptions { radius_factor: 0.7, ..LoopOptions::default() };
        assert!(matches!(keyhole_loop(&bs, 0, c(1.0, 0.0), &bad, 0), Err(LoopError::BadRadiusFactor(_))));
        assert_eq!(keyhole_loop(&bs, 3, c(1.0, 0.0), &LoopOptions::default(), 0), Err(LoopError::BadTarget(3)));
    }
}
