//! Predictor–corrector continuation of a full fiber along a segment of the
//! `t`-line.
//!
//! The predictor integrates `dz/ds = -f_t (δ'' - δ') / f_z` with a classical
//! Runge–Kutta step; every prediction is polished by Newton's method at the
//! new `t`. Steps that fail to correct, let two strands come too close, or
//! would let a strand jump to its neighbour are rejected and halved.

use thiserror::Error;

use crate::poly::{roots, BivariatePoly, Complex, PolyError, RootsError, EPS};

/// Moduli of `f_z` below this are treated as a vanishing derivative.
const DERIVATIVE_FLOOR: f64 = 1e-14;

/// Relative size of a Newton correction below which an iterate is final.
const STEP_FLOOR: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("fiber over t = {t} has roots only {min_distance:e} apart")]
    ClusteredFiber { t: Complex, min_distance: f64 },
    #[error("fiber over t = {t} has {found} points, expected {expected}")]
    WrongFiberSize {
        t: Complex,
        found: usize,
        expected: usize,
    },
    #[error("root solve failed at t = {t}: {source}")]
    RootSolve { t: Complex, source: RootsError },
    #[error("step size underflow at s = {s} (t = {t}); the segment passes too near the branch locus")]
    StepUnderflow { s: f64, t: Complex },
    #[error("Newton's method diverged at t = {t} from z = {z}")]
    NewtonDivergence { t: Complex, z: Complex },
    #[error("derivative collapse at t = {t}, z = {z} (near a multiple root)")]
    DerivativeCollapse { t: Complex, z: Complex },
    #[error("start fiber is over {found}, segment starts at {expected}")]
    StartMismatch { found: Complex, expected: Complex },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Directed segment `t(s) = (1 - s) start + s end`, `s ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: Complex,
    pub end: Complex,
}

impl Segment {
    pub fn new(start: Complex, end: Complex) -> Result<Self, TrackError> {
        if start == end {
            return Err(TrackError::DegenerateSegment);
        }
        Ok(Self { start, end })
    }

    pub fn at(&self, s: f64) -> Complex {
        self.start * (1.0 - s) + self.end * s
    }

    /// `dt/ds`.
    pub fn velocity(&self) -> Complex {
        self.end - self.start
    }

    pub fn reversed(&self) -> Self {
        Self {
            start: self.end,
            end: self.start,
        }
    }

    /// Sub-segment `[s0, s1]`, reparameterized over `[0, 1]`.
    pub fn sub(&self, s0: f64, s1: f64) -> Self {
        Self {
            start: self.at(s0),
            end: self.at(s1),
        }
    }
}

/// The points over `t`. Order is meaningful: along a track, index `k` is
/// always the continuation of the start fiber's index `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fiber {
    pub t: Complex,
    pub points: Vec<Complex>,
}

impl Fiber {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        min_pairwise(&self.points)
    }

    pub fn max_residual(&self, f: &BivariatePoly) -> f64 {
        self.points
            .iter()
            .map(|&z| f.eval(z, self.t).norm())
            .fold(0.0, f64::max)
    }

    /// Same fiber with points sorted by real part (ties by imaginary part).
    pub fn sorted_by_re(&self) -> Self {
        let mut points = self.points.clone();
        points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Self { t: self.t, points }
    }
}

pub(crate) fn min_pairwise(points: &[Complex]) -> f64 {
    let mut best = f64::INFINITY;
    for (k, a) in points.iter().enumerate() {
        for b in &points[k + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackOptions {
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub min_separation: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            step_init: 1e-2,
            step_min: 1e-9,
            step_max: 5e-2,
            newton_tol: 1e-11,
            newton_max_iter: 20,
            min_separation: 1e-8,
        }
    }
}

impl TrackOptions {
    /// Checks `0 < step_min <= step_init <= step_max <= 1` and positivity.
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.step_min
            && self.step_min <= self.step_init
            && self.step_init <= self.step_max
            && self.step_max <= 1.0)
        {
            return Err("need 0 < step_min <= step_init <= step_max <= 1".into());
        }
        if !(self.newton_tol > 0.0 && self.min_separation > 0.0) || self.newton_max_iter == 0 {
            return Err("tolerances and iteration limit must be positive".into());
        }
        Ok(())
    }
}

/// One accepted point of a track: the fiber at parameter `s` and the
/// derivative `dz/ds` of each strand there.
#[derive(Clone, Debug)]
pub struct Sample {
    pub s: f64,
    pub fiber: Fiber,
    pub velocity: Vec<Complex>,
}

#[derive(Clone, Debug)]
pub struct Track {
    pub samples: Vec<Sample>,
    pub end: Fiber,
}

fn roundoff_floor(f: &BivariatePoly, scale: f64) -> f64 {
    8.0 * (f.degz() + f.degt() + 2) as f64 * EPS * scale
}

/// Newton's method on `f(·, t)` from a single starting value.
pub fn newton_point(
    f: &BivariatePoly,
    t: Complex,
    z0: Complex,
    opts: &TrackOptions,
) -> Result<Complex, TrackError> {
    let mut z = z0;
    let mut last_step = f64::INFINITY;
    let mut ratio = 0.0;
    for _ in 0..opts.newton_max_iter {
        let j = f.jet(z, t);
        if !j.f.norm().is_finite() {
            return Err(TrackError::NewtonDivergence { t, z: z0 });
        }
        if j.f.norm() <= roundoff_floor(f, j.scale) {
            return Ok(z);
        }
        if j.fz.norm() < DERIVATIVE_FLOOR {
            return Err(TrackError::DerivativeCollapse { t, z });
        }
        let dz = j.f / j.fz;
        z -= dz;
        let step = dz.norm();
        if last_step.is_finite() && last_step > 0.0 {
            ratio = step / last_step;
        }
        last_step = step;
        if step <= STEP_FLOOR * z.norm().max(1.0) && f.eval(z, t).norm() <= opts.newton_tol {
            return Ok(z);
        }
    }
    // steadily shrinking steps without quadratic speed-up: a multiple root
    if (0.2..0.95).contains(&ratio) {
        Err(TrackError::DerivativeCollapse { t, z })
    } else {
        Err(TrackError::NewtonDivergence { t, z: z0 })
    }
}

/// Refines each entry of `approx` to a root of `f(·, t)`.
pub fn newton_correct(
    f: &BivariatePoly,
    t: Complex,
    approx: &[Complex],
    opts: &TrackOptions,
) -> Result<Vec<Complex>, TrackError> {
    approx.iter().map(|&z| newton_point(f, t, z, opts)).collect()
}

/// All `n = deg_z f` roots over `t0`, ordered by real part.
pub fn initial_fiber(
    f: &BivariatePoly,
    t0: Complex,
    opts: &TrackOptions,
) -> Result<Fiber, TrackError> {
    let p = f.restrict_t(t0)?;
    if p.degree() != f.degz() {
        return Err(TrackError::WrongFiberSize {
            t: t0,
            found: p.degree(),
            expected: f.degz(),
        });
    }
    let raw = roots(&p, 1e-12).map_err(|source| TrackError::RootSolve { t: t0, source })?;
    let min_distance = min_pairwise(&raw);
    if min_distance <= opts.min_separation {
        return Err(TrackError::ClusteredFiber { t: t0, min_distance });
    }
    let points = newton_correct(f, t0, &raw, opts)?;
    let min_distance = min_pairwise(&points);
    if min_distance <= opts.min_separation {
        return Err(TrackError::ClusteredFiber { t: t0, min_distance });
    }
    Ok(Fiber { t: t0, points }.sorted_by_re())
}

/// `dz/ds` for every strand at `(s, z)`.
pub(crate) fn velocity(
    f: &BivariatePoly,
    seg: &Segment,
    s: f64,
    z: &[Complex],
) -> Result<Vec<Complex>, TrackError> {
    let t = seg.at(s);
    let v = seg.velocity();
    z.iter()
        .map(|&zk| {
            let j = f.jet(zk, t);
            if j.fz.norm() < DERIVATIVE_FLOOR {
                Err(TrackError::DerivativeCollapse { t, z: zk })
            } else {
                Ok(-j.ft * v / j.fz)
            }
        })
        .collect()
}

fn axpy(z: &[Complex], h: f64, k: &[Complex]) -> Vec<Complex> {
    z.iter().zip(k).map(|(a, b)| a + b * h).collect()
}

/// One predictor–corrector step of size `h` from `(s, z)` with known
/// derivative `k1`. Returns the corrected fiber at `s + h`, or `None` if the
/// step must be retried smaller.
pub(crate) fn step(
    f: &BivariatePoly,
    seg: &Segment,
    s: f64,
    z: &[Complex],
    k1: &[Complex],
    h: f64,
    opts: &TrackOptions,
) -> Option<Vec<Complex>> {
    let k2 = velocity(f, seg, s + h / 2.0, &axpy(z, h / 2.0, k1)).ok()?;
    let k3 = velocity(f, seg, s + h / 2.0, &axpy(z, h / 2.0, &k2)).ok()?;
    let k4 = velocity(f, seg, s + h, &axpy(z, h, &k3)).ok()?;
    let pred: Vec<Complex> = (0..z.len())
        .map(|k| z[k] + (k1[k] + k2[k] * 2.0 + k3[k] * 2.0 + k4[k]) * (h / 6.0))
        .collect();
    let t_new = if s + h >= 1.0 { seg.end } else { seg.at(s + h) };
    let corrected = newton_correct(f, t_new, &pred, opts).ok()?;
    let sep = min_pairwise(&corrected);
    if sep < 4.0 * opts.min_separation {
        return None;
    }
    for k in 0..z.len() {
        // the corrector must stay well inside the predicted point's basin
        if (corrected[k] - pred[k]).norm() > 0.1 * sep {
            return None;
        }
        // no strand may end closer to another strand's old position
        let own = (corrected[k] - z[k]).norm();
        if (0..z.len()).any(|l| l != k && (corrected[l] - z[k]).norm() <= own) {
            return None;
        }
    }
    Some(corrected)
}

/// Tracks `start` along `seg`, retaining every accepted step.
pub fn track_segment(
    f: &BivariatePoly,
    seg: &Segment,
    start: &Fiber,
    opts: &TrackOptions,
) -> Result<Track, TrackError> {
    if (start.t - seg.start).norm() > 1e-12 * seg.start.norm().max(1.0) {
        return Err(TrackError::StartMismatch {
            found: start.t,
            expected: seg.start,
        });
    }
    let mut s = 0.0;
    let mut z = start.points.clone();
    let mut k1 = velocity(f, seg, 0.0, &z)?;
    let mut samples = vec![Sample {
        s,
        fiber: Fiber {
            t: seg.start,
            points: z.clone(),
        },
        velocity: k1.clone(),
    }];
    let mut h = opts.step_init.min(opts.step_max);
    let mut streak = 0;
    while s < 1.0 {
        let hh = h.min(1.0 - s);
        match step(f, seg, s, &z, &k1, hh, opts) {
            Some(next) => {
                s = if s + hh >= 1.0 - 1e-15 { 1.0 } else { s + hh };
                z = next;
                let t = if s == 1.0 { seg.end } else { seg.at(s) };
                k1 = velocity(f, seg, s, &z)?;
                samples.push(Sample {
                    s,
                    fiber: Fiber { t, points: z.clone() },
                    velocity: k1.clone(),
                });
                streak += 1;
                if streak >= 5 {
                    h = (h * 2.0).min(opts.step_max);
                    streak = 0;
                }
            }
            None => {
                h /= 2.0;
                streak = 0;
                if h < opts.step_min {
                    return Err(TrackError::StepUnderflow { s, t: seg.at(s) });
                }
            }
        }
    }
    let end = Fiber {
        t: seg.end,
        points: z,
    };
    Ok(Track { samples, end })
}

/// Tracks along a polyline of vertices, returning the end fiber.
pub fn track_path(
    f: &BivariatePoly,
    vertices: &[Complex],
    start: &Fiber,
    opts: &TrackOptions,
) -> Result<Fiber, TrackError> {
    let mut fiber = start.clone();
    for w in vertices.windows(2) {
        fiber = track_segment(f, &Segment::new(w[0], w[1])?, &fiber, opts)?.end;
    }
    Ok(fiber)
}

/// For each point of `from`, the index of the nearest point of `to`.
pub fn nearest_matching(from: &[Complex], to: &[Complex]) -> Vec<usize> {
    from.iter()
        .map(|a| {
            (0..to.len())
                .min_by(|&i, &j| (to[i] - a).norm().total_cmp(&(to[j] - a).norm()))
                .expect("nonempty fiber")
        })
        .collect()
}
