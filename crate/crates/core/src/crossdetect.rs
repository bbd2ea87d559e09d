//! Crossings of the fiber along one segment.
//!
//! Two strands cross when their real parts coincide. Along a tracked segment
//! every pair's real-part difference is interpolated between samples by a
//! cubic Hermite polynomial (values and `d/ds` are both known); intervals
//! where the cubic is inconclusive are re-tracked with smaller steps. Each
//! sign change is then refined by safeguarded Newton iteration on the true
//! difference. The resulting events are turned into Artin letters by the
//! imaginary-part rule: `σ_i` when `Im z^(i) < Im z^(i+1)` in the incoming
//! real-part ordering, `σ_i^-1` otherwise.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::branchlocus::{Line, LineArrangement};
use crate::homotopy::{step, track_segment, velocity, Fiber, Sample, Segment, TrackError, TrackOptions};
use crate::poly::{BivariatePoly, Complex};

/// Crossings closer than this to either end of a segment are refused.
const ENDPOINT_MARGIN: f64 = 1e-6;
/// Smallest admissible `|d/ds Re(z_a - z_b)|` at a crossing.
const TRANSVERSAL_MIN: f64 = 1e-6;
/// Largest admissible residual of the defining system at a crossing.
const RESIDUAL_MAX: f64 = 1e-6;
/// A cubic whose interior extremum comes this close to zero, relative to
/// the endpoint values, is re-tracked more finely.
const DIP: f64 = 0.25;
/// Maximum nesting of interval re-tracking.
const MAX_DEPTH: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossError {
    #[error("improper crossing at s = {s} (t = {t}): {count} strands share a real part")]
    Improper {
        s: f64,
        t: Complex,
        count: usize,
        witness: Fiber,
    },
    #[error("crossing at the segment endpoint (s = {s})")]
    EndpointCrossing { s: f64 },
    #[error("non-adjacent strands crossed at s = {s}; a crossing was missed")]
    MissedCrossing { s: f64 },
    #[error("strands collide at s = {s}: imaginary parts agree to {gap:e}")]
    Collision { s: f64, gap: f64 },
    #[error("crossing at s = {s} is not transversal (d/ds = {derivative:e})")]
    NonTransversal { s: f64, derivative: f64 },
    #[error("crossing at s = {s} has system residual {residual:e}")]
    Residual { s: f64, residual: f64 },
    #[error("final real-part order disagrees with the crossing sequence")]
    OrderMismatch,
    #[error(transparent)]
    Track(#[from] TrackError),
}

impl CrossError {
    /// Errors cured by a new generic direction `λ`.
    pub fn wants_new_lambda(&self) -> bool {
        matches!(
            self,
            Self::Improper { .. } | Self::NonTransversal { .. } | Self::Collision { .. }
        )
    }

    /// Errors cured by moving the loop.
    pub fn wants_new_loop(&self) -> bool {
        matches!(self, Self::EndpointCrossing { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossOptions {
    pub cross_tol: f64,
    pub refine_tol: f64,
    pub proper_tol: f64,
    pub lambda_retries: usize,
    pub rng_seed: u64,
}

impl Default for CrossOptions {
    fn default() -> Self {
        Self {
            cross_tol: 1e-7,
            refine_tol: 1e-10,
            proper_tol: 1e-7,
            lambda_retries: 5,
            rng_seed: 0,
        }
    }
}

/// A letter of the braid word together with where it happened.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub s: f64,
    pub t: Complex,
    /// Position `i` of the lower strand, 1-based: the letter is `σ_i^sign`.
    pub index: usize,
    pub sign: i8,
    /// Fiber at the crossing, in the real-part order just before it.
    pub pre_fiber: Fiber,
    /// `cross_system_error` at the crossing.
    pub residual: f64,
}

/// Outcome of one segment.
#[derive(Clone, Debug)]
pub struct SegmentCrossings {
    pub crossings: Vec<Crossing>,
    /// End fiber, sorted by real part.
    pub end: Fiber,
}

/// `+1` iff `Im z^(i) < Im z^(i+1)` in the given (incoming) order.
pub fn classify_crossing(fiber: &Fiber, i: usize, copts: &CrossOptions) -> Result<i8, CrossError> {
    let (a, b) = (fiber.points[i - 1], fiber.points[i]);
    let gap = (a.im - b.im).abs();
    if gap <= copts.proper_tol {
        return Err(CrossError::Collision { s: f64::NAN, gap });
    }
    Ok(if a.im < b.im { 1 } else { -1 })
}

/// Number of points with `|Re z - x| < proper_tol`.
pub fn check_proper(points: &[Complex], x: f64, proper_tol: f64) -> usize {
    points.iter().filter(|z| (z.re - x).abs() < proper_tol).count()
}

/// The four residuals of the system whose isolated solutions contain the
/// crossings along `seg`: `f(x + i y1, t)`, `g(x - i y1, t̄)`,
/// `f(x + i y2, t)`, `g(x - i y2, t̄)` with `t = t(s)` and `g` the
/// coefficient-conjugate of `f`.
pub fn cross_system_residual(
    f: &BivariatePoly,
    seg: &Segment,
    s: f64,
    x: f64,
    y1: f64,
    y2: f64,
) -> [Complex; 4] {
    let g = f.conj_poly();
    let t = seg.at(s);
    [
        f.eval(Complex::new(x, y1), t),
        g.eval(Complex::new(x, -y1), t.conj()),
        f.eval(Complex::new(x, y2), t),
        g.eval(Complex::new(x, -y2), t.conj()),
    ]
}

/// Largest of the four crossing-system residuals, each divided by the size
/// of its evaluation `Σ |c_ij| |z|^i |t|^j` when that exceeds 1. On
/// unit-scale inputs this is the plain residual; on fibers far from the
/// origin it stays meaningful where the plain one is below roundoff.
pub fn cross_system_error(f: &BivariatePoly, seg: &Segment, s: f64, x: f64, y1: f64, y2: f64) -> f64 {
    let t = seg.at(s);
    let r = cross_system_residual(f, seg, s, x, y1, y2);
    let scale = |y: f64| f.jet(Complex::new(x, y), t).scale.max(1.0);
    let (a, b) = (scale(y1), scale(y2));
    (r[0].norm() / a)
        .max(r[1].norm() / a)
        .max(r[2].norm() / b)
        .max(r[3].norm() / b)
}

/// Generic direction for attempt `attempt`: `λ = 1` first, then
/// `exp(iθ)` with `θ` drawn from a stream seeded by `rng_seed`.
pub fn regularize_lambda(copts: &CrossOptions, attempt: usize) -> Complex {
    if attempt == 0 {
        return Complex::new(1.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(copts.rng_seed);
    let mut theta = 0.0;
    for _ in 0..attempt {
        theta = rng.gen_range(0.0..2.0 * PI);
    }
    Complex::from_polar(1.0, theta)
}

/// A refined coincidence of real parts of strands `a` and `b`.
#[derive(Clone, Debug)]
struct Event {
    s: f64,
    a: usize,
    b: usize,
    /// Fiber at `s`, indexed by strand.
    fiber: Fiber,
}

fn argsort_re(points: &[Complex]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| points[i].re.total_cmp(&points[j].re).then(points[i].im.total_cmp(&points[j].im)));
    idx
}

fn min_adjacent_re_gap(points: &[Complex]) -> f64 {
    let order = argsort_re(points);
    order
        .windows(2)
        .map(|w| points[w[1]].re - points[w[0]].re)
        .fold(f64::INFINITY, f64::min)
}

/// Turns events (strands indexed as in `start`) into letters, checking
/// adjacency, properness and the final order. `residual` evaluates the
/// defining system for a crossing of strands `a`, `b` at `s`.
fn process_events(
    seg: &Segment,
    start: &[Complex],
    end: &[Complex],
    mut events: Vec<Event>,
    copts: &CrossOptions,
    residual: impl Fn(usize, usize, f64, f64, f64, f64) -> f64,
) -> Result<Vec<Crossing>, CrossError> {
    events.sort_by(|x, y| x.s.total_cmp(&y.s).then((x.a, x.b).cmp(&(y.a, y.b))));
    let mut order = argsort_re(start);
    let mut pos_of = vec![0; start.len()];
    for (p, &k) in order.iter().enumerate() {
        pos_of[k] = p;
    }
    let mut out = Vec::with_capacity(events.len());
    let mut k = 0;
    while k < events.len() {
        let mut group_end = k + 1;
        while group_end < events.len() && events[group_end].s - events[k].s <= copts.refine_tol {
            group_end += 1;
        }
        let group = &events[k..group_end];
        let mut used = vec![false; start.len()];
        let mut staged = Vec::with_capacity(group.len());
        for ev in group {
            if ev.s < ENDPOINT_MARGIN || ev.s > 1.0 - ENDPOINT_MARGIN {
                return Err(CrossError::EndpointCrossing { s: ev.s });
            }
            let x = 0.5 * (ev.fiber.points[ev.a].re + ev.fiber.points[ev.b].re);
            let count = check_proper(&ev.fiber.points, x, copts.proper_tol);
            if count >= 3 || used[ev.a] || used[ev.b] {
                return Err(CrossError::Improper {
                    s: ev.s,
                    t: ev.fiber.t,
                    count: count.max(3),
                    witness: ev.fiber.clone(),
                });
            }
            used[ev.a] = true;
            used[ev.b] = true;
            let (pa, pb) = (pos_of[ev.a], pos_of[ev.b]);
            if pa.abs_diff(pb) != 1 {
                return Err(CrossError::MissedCrossing { s: ev.s });
            }
            staged.push((pa.min(pb), ev));
        }
        staged.sort_by_key(|x| x.0);
        for (p, ev) in staged {
            let pre = Fiber {
                t: ev.fiber.t,
                points: order.iter().map(|&j| ev.fiber.points[j]).collect(),
            };
            let sign = classify_crossing(&pre, p + 1, copts).map_err(|e| match e {
                CrossError::Collision { gap, .. } => CrossError::Collision { s: ev.s, gap },
                other => other,
            })?;
            let (lo, hi) = (pre.points[p], pre.points[p + 1]);
            let x = 0.5 * (lo.re + hi.re);
            let r = residual(order[p], order[p + 1], ev.s, x, lo.im, hi.im);
            if r >= RESIDUAL_MAX {
                return Err(CrossError::Residual { s: ev.s, residual: r });
            }
            out.push(Crossing {
                s: ev.s,
                t: seg.at(ev.s),
                index: p + 1,
                sign,
                pre_fiber: pre,
                residual: r,
            });
            order.swap(p, p + 1);
            pos_of[order[p]] = p;
            pos_of[order[p + 1]] = p + 1;
        }
        k = group_end;
    }
    if order != argsort_re(end) {
        return Err(CrossError::OrderMismatch);
    }
    Ok(out)
}

/// Root structure of the Hermite cubic of one strand pair on one interval.
enum Cubic {
    /// Monotone pieces with a sign change; each carries a root estimate
    /// in `(0, 1)`.
    Roots(Vec<f64>),
    Ambiguous,
}

fn hermite(h0: f64, h1: f64, m0: f64, m1: f64) -> Cubic {
    let c3 = 2.0 * h0 + m0 - 2.0 * h1 + m1;
    let c2 = -3.0 * h0 - 2.0 * m0 + 3.0 * h1 - m1;
    let c1 = m0;
    let c0 = h0;
    let eval = |u: f64| ((c3 * u + c2) * u + c1) * u + c0;
    let mut crit: Vec<f64> = Vec::new();
    // 3 c3 u^2 + 2 c2 u + c1 = 0
    let (qa, qb, qc) = (3.0 * c3, 2.0 * c2, c1);
    if qa.abs() > 1e-300 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (qb + qb.signum() * sq);
            for u in [q / qa, if q != 0.0 { qc / q } else { f64::NAN }] {
                if u > 0.0 && u < 1.0 {
                    crit.push(u);
                }
            }
        }
    } else if qb.abs() > 1e-300 {
        let u = -qc / qb;
        if u > 0.0 && u < 1.0 {
            crit.push(u);
        }
    }
    crit.sort_by(f64::total_cmp);
    let scale = h0.abs().max(h1.abs());
    for &u in &crit {
        if eval(u).abs() < DIP * scale {
            return Cubic::Ambiguous;
        }
    }
    let mut knots = vec![0.0];
    knots.extend(&crit);
    knots.push(1.0);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (eval(lo), eval(hi));
        if flo == 0.0 || fhi == 0.0 || (flo < 0.0) == (fhi < 0.0) {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (eval(mid) < 0.0) == (flo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    if roots.len() >= 2 {
        return Cubic::Ambiguous;
    }
    Cubic::Roots(roots)
}

/// A sign change of `Re(z_a - z_b)` between two samples.
struct Bracket {
    a: usize,
    b: usize,
    left: Sample,
    right_s: f64,
    right_h: f64,
    guess: f64,
}

fn pair_h(smp: &Sample, a: usize, b: usize) -> (f64, f64) {
    (
        (smp.fiber.points[a] - smp.fiber.points[b]).re,
        (smp.velocity[a] - smp.velocity[b]).re,
    )
}

/// Re-tracks `[left.s, right.s]` of `seg` with at least four steps.
fn retrack(
    f: &BivariatePoly,
    seg: &Segment,
    left: &Sample,
    right: &Sample,
    topts: &TrackOptions,
) -> Result<Vec<Sample>, TrackError> {
    let (s0, s1) = (left.s, right.s);
    let width = s1 - s0;
    let sub = seg.sub(s0, s1);
    let mut opts = *topts;
    opts.step_max = 0.25;
    opts.step_init = 0.25;
    opts.step_min = (topts.step_min / width).min(0.25);
    let start = Fiber {
        t: sub.start,
        points: left.fiber.points.clone(),
    };
    let tr = track_segment(f, &sub, &start, &opts)?;
    let mut out: Vec<Sample> = tr
        .samples
        .into_iter()
        .map(|smp| Sample {
            s: s0 + smp.s * width,
            fiber: Fiber {
                t: smp.fiber.t,
                points: smp.fiber.points,
            },
            velocity: smp.velocity.into_iter().map(|v| v / width).collect(),
        })
        .collect();
    // keep the original endpoints bit-for-bit
    if let Some(first) = out.first_mut() {
        *first = left.clone();
    }
    if let Some(last) = out.last_mut() {
        *last = right.clone();
    }
    Ok(out)
}

fn scan_interval(
    f: &BivariatePoly,
    seg: &Segment,
    left: &Sample,
    right: &Sample,
    topts: &TrackOptions,
    depth: usize,
    out: &mut Vec<Bracket>,
) -> Result<(), CrossError> {
    let n = left.fiber.points.len();
    let width = right.s - left.s;
    let mut found = Vec::new();
    let mut ambiguous = false;
    'pairs: for a in 0..n {
        for b in a + 1..n {
            let (h0, d0) = pair_h(left, a, b);
            let (h1, d1) = pair_h(right, a, b);
            match hermite(h0, h1, d0 * width, d1 * width) {
                Cubic::Roots(r) => {
                    if let Some(&u) = r.first() {
                        found.push((a, b, h1, u));
                    } else if (h0 < 0.0) != (h1 < 0.0) {
                        // cubic and samples disagree on the sign pattern
                        ambiguous = true;
                        break 'pairs;
                    }
                }
                Cubic::Ambiguous => {
                    ambiguous = true;
                    break 'pairs;
                }
            }
        }
    }
    if ambiguous && depth < MAX_DEPTH {
        let finer = retrack(f, seg, left, right, topts)?;
        for w in finer.windows(2) {
            scan_interval(f, seg, &w[0], &w[1], topts, depth + 1, out)?;
        }
        return Ok(());
    }
    if ambiguous {
        // at the depth limit fall back on the sign pattern of the samples
        for a in 0..n {
            for b in a + 1..n {
                let (h0, d0) = pair_h(left, a, b);
                let (h1, _) = pair_h(right, a, b);
                if (h0 < 0.0) != (h1 < 0.0) {
                    found.push((a, b, h1, (h0 / (h0 - h1)).clamp(0.0, 1.0)));
                } else if h0.abs() < 1e-9 || d0.abs() < TRANSVERSAL_MIN {
                    return Err(CrossError::NonTransversal {
                        s: left.s,
                        derivative: d0,
                    });
                }
            }
        }
    }
    for (a, b, right_h, u) in found {
        out.push(Bracket {
            a,
            b,
            left: left.clone(),
            right_s: right.s,
            right_h,
            guess: left.s + u * width,
        });
    }
    Ok(())
}

/// Fiber and `dz/ds` at `s`, stepping from `from` (with `s >= from.s`).
fn advance(
    f: &BivariatePoly,
    seg: &Segment,
    from: &Sample,
    s: f64,
    topts: &TrackOptions,
) -> Result<(Vec<Complex>, Vec<Complex>), TrackError> {
    let mut pieces = 1usize;
    while pieces <= 1 << 12 {
        let h = (s - from.s) / pieces as f64;
        let mut cur_s = from.s;
        let mut z = from.fiber.points.clone();
        let mut k1 = from.velocity.clone();
        let mut halted = false;
        for _ in 0..pieces {
            if h == 0.0 {
                break;
            }
            match step(f, seg, cur_s, &z, &k1, h, topts) {
                Some(next) => {
                    cur_s += h;
                    z = next;
                    k1 = velocity(f, seg, cur_s, &z)?;
                }
                None => {
                    halted = true;
                    break;
                }
            }
        }
        if !halted {
            return Ok((z, k1));
        }
        pieces *= 2;
    }
    Err(TrackError::StepUnderflow { s, t: seg.at(s) })
}

/// Locates the sign change of `Re(z_a - z_b)` in the bracket.
fn refine(
    f: &BivariatePoly,
    seg: &Segment,
    br: &Bracket,
    topts: &TrackOptions,
    copts: &CrossOptions,
) -> Result<Event, CrossError> {
    let (a, b) = (br.a, br.b);
    let (mut lo, mut hi) = (br.left.s, br.right_s);
    let (h_lo, _) = pair_h(&br.left, a, b);
    let lo_neg = h_lo < 0.0;
    debug_assert!(lo_neg != (br.right_h < 0.0));
    let mut s = br.guess.clamp(lo, hi);
    let mut best: Option<(f64, f64, Vec<Complex>, Vec<Complex>)> = None;
    for _ in 0..100 {
        let (z, v) = advance(f, seg, &br.left, s, topts)?;
        let h = (z[a] - z[b]).re;
        let dh = (v[a] - v[b]).re;
        let done = h.abs() < copts.refine_tol || hi - lo < 1e-15;
        if best.as_ref().is_none_or(|bst| h.abs() < bst.0.abs()) {
            best = Some((h, s, z, v));
        }
        if done {
            break;
        }
        if (h < 0.0) == lo_neg {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - h / dh;
        s = if dh != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let (_, s, z, v) = best.expect("at least one iterate");
    let dh = (v[a] - v[b]).re;
    if dh.abs() <= TRANSVERSAL_MIN {
        return Err(CrossError::NonTransversal { s, derivative: dh });
    }
    Ok(Event {
        s,
        a,
        b,
        fiber: Fiber {
            t: seg.at(s),
            points: z,
        },
    })
}

fn check_endpoints(start: &[Complex], end: &[Complex], copts: &CrossOptions) -> Result<(), CrossError> {
    if min_adjacent_re_gap(start) <= copts.cross_tol {
        return Err(CrossError::EndpointCrossing { s: 0.0 });
    }
    if min_adjacent_re_gap(end) <= copts.cross_tol {
        return Err(CrossError::EndpointCrossing { s: 1.0 });
    }
    Ok(())
}

/// Tracks `start` along `seg` and returns the crossings in order.
pub fn detect_crossings(
    f: &BivariatePoly,
    seg: &Segment,
    start: &Fiber,
    topts: &TrackOptions,
    copts: &CrossOptions,
) -> Result<SegmentCrossings, CrossError> {
    let start = start.sorted_by_re();
    let track = track_segment(f, seg, &start, topts)?;
    check_endpoints(&start.points, &track.end.points, copts)?;
    let mut brackets = Vec::new();
    for w in track.samples.windows(2) {
        scan_interval(f, seg, &w[0], &w[1], topts, 0, &mut brackets)?;
    }
    let events = brackets
        .iter()
        .map(|br| refine(f, seg, br, topts, copts))
        .collect::<Result<Vec<_>, _>>()?;
    let crossings = process_events(seg, &start.points, &track.end.points, events, copts, |_, _, s, x, y1, y2| {
        cross_system_error(f, seg, s, x, y1, y2)
    })?;
    Ok(SegmentCrossings {
        crossings,
        end: track.end.sorted_by_re(),
    })
}

/// The fiber of an arrangement over `t`: one point per line.
pub fn arrangement_fiber(arr: &LineArrangement, t: Complex) -> Vec<Complex> {
    arr.lines.iter().map(|l| l.z_at(t)).collect()
}

fn line_pair_poly(u: &Line, v: &Line) -> BivariatePoly {
    let p = |l: &Line| {
        BivariatePoly::new(vec![vec![l.c, l.b], vec![l.a, Complex::new(0.0, 0.0)]])
            .expect("line has a z term")
    };
    p(u).mul(&p(v))
}

/// Crossings along `seg` for a line arrangement. Each strand is affine in
/// `s`, so every pair crosses at most once, at a closed-form parameter.
/// Strands are indexed by line.
pub fn detect_crossings_lines(
    arr: &LineArrangement,
    seg: &Segment,
    copts: &CrossOptions,
) -> Result<Vec<Crossing>, CrossError> {
    let start = arrangement_fiber(arr, seg.start);
    let end = arrangement_fiber(arr, seg.end);
    check_endpoints(&start, &end, copts)?;
    let d = arr.d();
    let mut events = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let h0 = (start[a] - start[b]).re;
            let h1 = (end[a] - end[b]).re;
            if (h0 < 0.0) == (h1 < 0.0) {
                continue;
            }
            let s = h0 / (h0 - h1);
            if (h1 - h0).abs() <= TRANSVERSAL_MIN {
                return Err(CrossError::NonTransversal {
                    s,
                    derivative: h1 - h0,
                });
            }
            let t = seg.at(s);
            events.push(Event {
                s,
                a,
                b,
                fiber: Fiber {
                    t,
                    points: arrangement_fiber(arr, t),
                },
            });
        }
    }
    process_events(seg, &start, &end, events, copts, |a, b, s, x, y1, y2| {
        let g = line_pair_poly(&arr.lines[a], &arr.lines[b]);
        cross_system_error(&g, seg, s, x, y1, y2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::initial_fiber;
    use crate::poly::parse_poly;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn triangle(k: usize) -> Complex {
        Complex::from_polar(1.0, 2.0 * PI * k as f64 / 3.0 + 0.2)
    }

    fn run_loop(f: &BivariatePoly, vertices: &[Complex]) -> Vec<Crossing> {
        let topts = TrackOptions::default();
        let copts = CrossOptions::default();
        let mut fiber = initial_fiber(f, vertices[0], &topts).unwrap();
        let mut out = Vec::new();
        for w in vertices.windows(2) {
            let seg = Segment::new(w[0], w[1]).unwrap();
            let r = detect_crossings(f, &seg, &fiber, &topts, &copts).unwrap();
            out.extend(r.crossings);
            fiber = r.end;
        }
        out
    }

    #[test]
    fn cusp_triangle_crossings() {
        let f = parse_poly("z^3 - t^2").unwrap();
        let xs = run_loop(&f, &[triangle(0), triangle(1), triangle(2), triangle(0)]);
        let letters: Vec<(usize, i8)> = xs.iter().map(|x| (x.index, x.sign)).collect();
        assert_eq!(letters, vec![(2, 1), (1, 1), (2, 1), (1, 1)]);
        let moduli: Vec<f64> = xs.iter().map(|x| x.t.norm()).collect();
        for (m, e) in moduli.iter().zip([0.527, 0.510, 0.667, 0.755]) {
            assert!((m - e).abs() < 5e-2, "{moduli:?}");
        }
        assert!(xs[0].t.re.abs() < 1e-6, "first crossing on the imaginary axis");
        for x in &xs {
            assert!(x.residual < 1e-6);
            let (lo, hi) = (x.pre_fiber.points[x.index - 1], x.pre_fiber.points[x.index]);
            assert!((lo.re - hi.re).abs() < 1e-10);
        }
    }

    #[test]
    fn single_strand_has_no_crossings() {
        let f = parse_poly("z - t").unwrap();
        let seg = Segment::new(c(-1.0, 0.3), c(2.0, -1.0)).unwrap();
        let topts = TrackOptions::default();
        let start = initial_fiber(&f, seg.start, &topts).unwrap();
        let r = detect_crossings(&f, &seg, &start, &topts, &CrossOptions::default()).unwrap();
        assert!(r.crossings.is_empty());
    }

    #[test]
    fn reversal_inverts_and_reverses() {
        let f = parse_poly("z^3 - t^2*(1 - t)").unwrap();
        let seg = Segment::new(c(-0.7, 0.9), c(1.6, -0.8)).unwrap();
        let topts = TrackOptions::default();
        let copts = CrossOptions::default();
        let start = initial_fiber(&f, seg.start, &topts).unwrap();
        let fwd = detect_crossings(&f, &seg, &start, &topts, &copts).unwrap();
        let back = detect_crossings(&f, &seg.reversed(), &fwd.end, &topts, &copts).unwrap();
        assert!(!fwd.crossings.is_empty());
        assert_eq!(fwd.crossings.len(), back.crossings.len());
        for (x, y) in fwd.crossings.iter().zip(back.crossings.iter().rev()) {
            assert_eq!(x.index, y.index);
            assert_eq!(x.sign, -y.sign);
            assert!((x.s - (1.0 - y.s)).abs() < 1e-8);
        }
    }

    #[test]
    fn classify_examples() {
        let copts = CrossOptions::default();
        let fib = |a: Complex, b: Complex| Fiber { t: c(0.0, 0.0), points: vec![a, b] };
        assert_eq!(classify_crossing(&fib(c(0.3, -0.5), c(0.3, 0.5)), 1, &copts).unwrap(), 1);
        assert_eq!(classify_crossing(&fib(c(0.3, 0.5), c(0.3, -0.5)), 1, &copts).unwrap(), -1);
        assert!(matches!(
            classify_crossing(&fib(c(0.3, 0.5), c(0.3, 0.5)), 1, &copts),
            Err(CrossError::Collision { .. })
        ));
    }

    #[test]
    fn proper_examples() {
        assert_eq!(check_proper(&[c(1.0, 1.0), c(1.0, -1.0), c(5.0, 0.0)], 1.0, 1e-7), 2);
        assert_eq!(check_proper(&[c(1.0, 1.0), c(1.0, 0.0), c(1.0, -1.0)], 1.0, 1e-7), 3);
        assert_eq!(check_proper(&[], 0.0, 1e-7), 0);
    }

    #[test]
    fn residual_symmetry() {
        let f = parse_poly("z^3 - t^2").unwrap();
        let seg = Segment::new(c(0.2, 0.0), c(0.9, 0.0)).unwrap();
        let r = cross_system_residual(&f, &seg, 0.3, 0.4, 0.2, -0.7);
        assert!((r[1] - r[0].conj()).norm() < 1e-15);
        let d = cross_system_residual(&f, &seg, 0.3, 0.4, 0.2, 0.2);
        assert_eq!(d[2], d[0]);
        assert_eq!(d[3], d[1]);
    }

    #[test]
    fn lambda_stream() {
        let copts = CrossOptions {
            rng_seed: 7,
            ..CrossOptions::default()
        };
        assert_eq!(regularize_lambda(&copts, 0), c(1.0, 0.0));
        let a = regularize_lambda(&copts, 1);
        assert_eq!(a, regularize_lambda(&copts, 1));
        assert!((a.norm() - 1.0).abs() < 1e-15);
        assert_ne!(a, regularize_lambda(&copts, 2));
    }

    #[test]
    fn collinear_strands_are_improper() {
        // the strands z = t, 2t, 3t share a real part wherever Re(t / λ) = 0,
        // and any loop around 0 meets that line whatever λ is
        let f = parse_poly("(z - t)*(z - 2t)*(z - 3t)").unwrap();
        let topts = TrackOptions::default();
        let copts = CrossOptions { rng_seed: 7, ..CrossOptions::default() };
        let square = [c(1.0, 0.9), c(-1.1, 1.0), c(-0.9, -1.0), c(1.0, -1.1), c(1.0, 0.9)];
        for attempt in 0..3 {
            let g = f.scale_z(regularize_lambda(&copts, attempt)).unwrap();
            let mut fiber = initial_fiber(&g, square[0], &topts).unwrap();
            let mut improper = false;
            for w in square.windows(2) {
                let seg = Segment::new(w[0], w[1]).unwrap();
                match detect_crossings(&g, &seg, &fiber, &topts, &copts) {
                    Ok(r) => fiber = r.end,
                    Err(CrossError::Improper { count, .. }) => {
                        assert!(count >= 3);
                        improper = true;
                        break;
                    }
                    Err(e) => panic!("unexpected {e}"),
                }
            }
            assert!(improper, "attempt {attempt}");
        }
    }

    #[test]
    fn fast_path_matches_tracking() {
        let arr = crate::branchlocus::dehomogenize_arrangement(&crate::branchlocus::five_line_matrix(), 2).unwrap();
        let f = arr.to_poly();
        let seg = Segment::new(c(-1.3, 0.7), c(1.1, -0.9)).unwrap();
        let topts = TrackOptions::default();
        let copts = CrossOptions::default();
        let fast = detect_crossings_lines(&arr, &seg, &copts).unwrap();
        let start = initial_fiber(&f, seg.start, &topts).unwrap();
        let slow = detect_crossings(&f, &seg, &start, &topts, &copts).unwrap();
        let l = |xs: &[Crossing]| xs.iter().map(|x| (x.index, x.sign)).collect::<Vec<_>>();
        assert_eq!(l(&fast), l(&slow.crossings));
        for (x, y) in fast.iter().zip(&slow.crossings) {
            assert!((x.s - y.s).abs() < 1e-8);
        }
    }
}
