//! Generators of the braid group of a curve, a line arrangement or a
//! hypersurface cut by a generic line.
//!
//! Every generator is the braid traced by the fiber over a keyhole loop
//! about one branch point. All loops share a base point and a base fiber
//! and are run under one direction `λ`, so their words live in the same
//! identification of strands.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branchlocus::{
    arrangement_branch_points, branch_points, BranchError, BranchSet, LineArrangement, DEFAULT_TOL,
};
use crate::braid::{BraidError, BraidWord, Permutation};
use crate::crossdetect::{
    arrangement_fiber, cross_system_error, detect_crossings, detect_crossings_lines,
    regularize_lambda, CrossError, CrossOptions, Crossing, SegmentCrossings,
};
use crate::homotopy::{
    initial_fiber, min_pairwise, nearest_matching, newton_point, track_path, Fiber, Segment,
    TrackError, TrackOptions,
};
use crate::looper::{choose_base, keyhole_loop, Loop, LoopError, LoopOptions, Part};
use crate::poly::{roots, BivariatePoly, Complex, MultivariatePoly, PolyError};

/// A fiber must come back to itself within this distance per point.
pub const RETURN_TOL: f64 = 1e-6;
/// Largest strand count for which the group order is computed.
pub const CLOSURE_MAX_N: usize = 12;
const LOOP_RETRIES: usize = 4;
const TRACK_RETRIES: usize = 2;
const LINE_REDRAWS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid options: {0}")]
    Options(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("base fiber: {0}")]
    BaseFiber(TrackError),
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error("loop about {branch_point}, segment {segment} ({part:?}): {source}")]
    Crossing {
        branch_point: Complex,
        segment: usize,
        part: Part,
        source: CrossError,
    },
    #[error("loop about {branch_point}: fiber returned {deviation:e} away from the base fiber")]
    FiberReturn { branch_point: Complex, deviation: f64 },
    #[error("loop about {branch_point}: word gives {word} but endpoint tracking gives {endpoint}")]
    PermutationMismatch {
        branch_point: Complex,
        word: Permutation,
        endpoint: Permutation,
    },
    #[error("no generic direction found after {attempts} attempt(s); last failure: {last}")]
    LambdaExhausted { attempts: usize, last: Box<EngineError> },
    #[error("restriction: {0}")]
    Restriction(String),
}

impl EngineError {
    /// Whether the run failed because every `λ` tried gave an improper,
    /// non-transversal or colliding crossing.
    pub fn is_lambda_exhaustion(&self) -> bool {
        matches!(self, Self::LambdaExhausted { .. })
    }

    fn wants_new_lambda(&self) -> bool {
        matches!(self, Self::Crossing { source, .. } if source.wants_new_lambda())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineOptions {
    pub track: TrackOptions,
    pub cross: CrossOptions,
    pub looping: LoopOptions,
    /// Seeds the base point and loop perturbations.
    pub seed: u64,
    /// Use this direction instead of drawing one; no retries then.
    pub lambda: Option<Complex>,
    /// Use this base point instead of drawing one.
    pub base: Option<Complex>,
    pub branch_tol: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            track: TrackOptions::default(),
            cross: CrossOptions::default(),
            looping: LoopOptions::default(),
            seed: 0,
            lambda: None,
            base: None,
            branch_tol: DEFAULT_TOL,
        }
    }
}

impl EngineOptions {
    /// Defaults with every random stream seeded by `seed`.
    pub fn seeded(seed: u64) -> Self {
        let mut o = Self { seed, ..Self::default() };
        o.cross.rng_seed = seed;
        o
    }
}

/// A crossing with the loop segment it happened on.
#[derive(Clone, Debug, PartialEq)]
pub struct LocatedCrossing {
    pub crossing: Crossing,
    pub segment: usize,
    pub part: Part,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub residual_max: f64,
    /// Largest distance between a returned fiber point and the base fiber.
    pub return_deviation: f64,
    pub loop_retries: usize,
    pub track_retries: usize,
}

/// One generator.
#[derive(Clone, Debug, PartialEq)]
pub struct BraidReport {
    pub branch_point: Complex,
    pub multiplicity: usize,
    pub lp: Loop,
    pub crossings: Vec<LocatedCrossing>,
    /// Letters of the whole loop, basing conjugation included.
    pub word: BraidWord,
    pub reduced_word: BraidWord,
    /// Letters of the approach alone.
    pub approach: BraidWord,
    /// `g⁻¹ w g` freely reduced, `g` the approach word.
    pub core: BraidWord,
    pub perm: Permutation,
    /// The same permutation read off by tracking the loop without
    /// looking at crossings.
    pub endpoint_perm: Permutation,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monodromy {
    /// Group order, or `None` above `CLOSURE_MAX_N` strands.
    pub order: Option<u64>,
    pub transitive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Curve,
    Arrangement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupReport {
    pub kind: InputKind,
    pub n: usize,
    pub seed: u64,
    pub lambda: Complex,
    pub lambda_attempts: usize,
    pub base: Complex,
    pub branch: BranchSet,
    pub generators: Vec<BraidReport>,
    pub monodromy_perms: Vec<Permutation>,
    pub monodromy: Monodromy,
}

/// Order and transitivity of the group generated by `perms` on `n` points.
pub fn monodromy_closure(perms: &[Permutation], n: usize) -> Monodromy {
    let transitive = orbits(perms, n) == 1;
    let order = if n <= CLOSURE_MAX_N {
        Some(group_order(perms, n))
    } else {
        None
    };
    Monodromy { order, transitive }
}

fn orbits(perms: &[Permutation], n: usize) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for g in perms {
        for x in 0..n {
            let (a, b) = (find(&mut parent, x), find(&mut parent, g.image()[x] - 1));
            parent[a] = b;
        }
    }
    (0..n).filter(|&x| find(&mut parent, x) == x).count()
}

type Perm = Vec<usize>;

/// `p` then `q`.
fn compose(p: &[usize], q: &[usize]) -> Perm {
    p.iter().map(|&x| q[x]).collect()
}

fn invert(p: &[usize]) -> Perm {
    let mut out = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        out[y] = x;
    }
    out
}

struct Level {
    base: usize,
    gens: Vec<Perm>,
    /// `trans[u]` maps `base` to `u`.
    trans: HashMap<usize, Perm>,
}

impl Level {
    fn new(base: usize, n: usize) -> Self {
        let mut trans = HashMap::new();
        trans.insert(base, (0..n).collect());
        Self {
            base,
            gens: Vec::new(),
            trans,
        }
    }

    fn extend_orbit(&mut self) {
        let mut queue: VecDeque<usize> = self.trans.keys().copied().collect();
        while let Some(u) = queue.pop_front() {
            for s in &self.gens {
                let v = s[u];
                if !self.trans.contains_key(&v) {
                    let t = compose(&self.trans[&u], s);
                    self.trans.insert(v, t);
                    queue.push_back(v);
                }
            }
        }
    }
}

/// Sifts `h` from level `from`; returns the residue and the level where it
/// stopped, or `None` if `h` lies in the current chain.
fn strip(levels: &[Level], mut h: Perm, from: usize) -> Option<(Perm, usize)> {
    for (k, lv) in levels.iter().enumerate().skip(from) {
        let beta = h[lv.base];
        match lv.trans.get(&beta) {
            Some(t) => h = compose(&h, &invert(t)),
            None => return Some((h, k)),
        }
    }
    if h.iter().enumerate().all(|(x, &y)| x == y) {
        None
    } else {
        Some((h, levels.len()))
    }
}

/// Adds `g` to the generating sets of levels `lo..=hi`; `g` fixes the base
/// points of all levels below `hi`.
fn add_generator(levels: &mut Vec<Level>, lo: usize, hi: usize, g: Perm) {
    let n = g.len();
    if hi == levels.len() {
        let moved = (0..n).find(|&x| g[x] != x).expect("non-identity residue");
        levels.push(Level::new(moved, n));
    }
    for lv in &mut levels[lo..=hi] {
        lv.gens.push(g.clone());
        lv.extend_orbit();
    }
    for l in (lo..=hi).rev() {
        close_level(levels, l);
    }
}

/// Sifts every Schreier generator of level `l` through the levels below
/// it, extending the chain until all of them pass.
fn close_level(levels: &mut Vec<Level>, l: usize) {
    let mut k = 0;
    loop {
        let lv = &levels[l];
        let mut orbit: Vec<usize> = lv.trans.keys().copied().collect();
        orbit.sort_unstable();
        let pairs = orbit.len() * lv.gens.len();
        if k >= pairs {
            return;
        }
        let (u, s) = (orbit[k / lv.gens.len()], &lv.gens[k % lv.gens.len()]);
        k += 1;
        let schreier = compose(&compose(&lv.trans[&u], s), &invert(&lv.trans[&s[u]]));
        if let Some((r, j)) = strip(levels, schreier, l + 1) {
            add_generator(levels, l + 1, j, r);
        }
    }
}

/// Order of the generated group by the Schreier–Sims method.
fn group_order(perms: &[Permutation], n: usize) -> u64 {
    let mut levels: Vec<Level> = Vec::new();
    for p in perms {
        let g: Perm = p.image().iter().map(|x| x - 1).collect();
        if let Some((r, j)) = strip(&levels, g, 0) {
            add_generator(&mut levels, 0, j, r);
        }
    }
    debug_assert!(perms.iter().all(|p| p.n() == n));
    levels.iter().map(|lv| lv.trans.len() as u64).product()
}

/// What the fiber lives on.
enum Model {
    Curve(BivariatePoly),
    Lines(LineArrangement),
}

impl Model {
    fn crossings(
        &self,
        seg: &Segment,
        fiber: &Fiber,
        topts: &TrackOptions,
        copts: &CrossOptions,
    ) -> Result<SegmentCrossings, CrossError> {
        match self {
            Model::Curve(f) => detect_crossings(f, seg, fiber, topts, copts),
            Model::Lines(arr) => {
                let crossings = detect_crossings_lines(arr, seg, copts)?;
                let end = Fiber {
                    t: seg.end,
                    points: arrangement_fiber(arr, seg.end),
                };
                Ok(SegmentCrossings {
                    crossings,
                    end: end.sorted_by_re(),
                })
            }
        }
    }

    fn base_fiber(&self, base: Complex, topts: &TrackOptions) -> Result<Fiber, EngineError> {
        match self {
            Model::Curve(f) => initial_fiber(f, base, topts).map_err(EngineError::BaseFiber),
            Model::Lines(arr) => {
                let points = arrangement_fiber(arr, base);
                let min_distance = min_pairwise(&points);
                if min_distance <= topts.min_separation {
                    return Err(EngineError::BaseFiber(TrackError::ClusteredFiber {
                        t: base,
                        min_distance,
                    }));
                }
                Ok(Fiber { t: base, points }.sorted_by_re())
            }
        }
    }

    /// Where each base-fiber point ends up, tracked with crossings ignored.
    fn endpoint_perm(
        &self,
        lp: &Loop,
        start: &Fiber,
        topts: &TrackOptions,
    ) -> Result<Option<Permutation>, TrackError> {
        match self {
            Model::Curve(f) => {
                let end = track_path(f, &lp.vertices, start, topts)?;
                let landing = nearest_matching(&end.points, &start.points);
                let mut image = vec![0; start.len()];
                for (j, &p) in landing.iter().enumerate() {
                    image[p] = j + 1;
                }
                Ok(Permutation::new(image))
            }
            // each strand stays on its line and the line meets the base
            // fiber in one point
            Model::Lines(_) => Ok(Some(Permutation::identity(start.len()))),
        }
    }
}

struct LoopRun {
    crossings: Vec<LocatedCrossing>,
    end: Fiber,
}

fn run_loop(
    model: &Model,
    lp: &Loop,
    start: &Fiber,
    topts: &TrackOptions,
    copts: &CrossOptions,
) -> Result<LoopRun, EngineError> {
    let mut fiber = start.clone();
    let mut crossings = Vec::new();
    for (segment, seg) in lp.segments().iter().enumerate() {
        let part = lp.part(segment);
        let r = model
            .crossings(seg, &fiber, topts, copts)
            .map_err(|source| EngineError::Crossing {
                branch_point: lp.target,
                segment,
                part,
                source,
            })?;
        crossings.extend(r.crossings.into_iter().map(|crossing| LocatedCrossing {
            crossing,
            segment,
            part,
        }));
        fiber = r.end;
    }
    Ok(LoopRun {
        crossings,
        end: fiber,
    })
}

fn return_deviation(end: &Fiber, start: &Fiber) -> Option<f64> {
    let m = nearest_matching(&end.points, &start.points);
    let mut seen = vec![false; start.len()];
    let mut dev: f64 = 0.0;
    for (j, &k) in m.iter().enumerate() {
        if seen[k] {
            return None;
        }
        seen[k] = true;
        dev = dev.max((end.points[j] - start.points[k]).norm());
    }
    Some(dev)
}

/// Splits a loop's crossings into the loop word, its approach word and
/// the core `free_reduce(g⁻¹ w g)`.
pub fn words_of(n: usize, crossings: &[LocatedCrossing]) -> Result<(BraidWord, BraidWord, BraidWord), BraidError> {
    let word = BraidWord::from_crossings(n, crossings.iter().map(|c| (c.crossing.index, c.crossing.sign)))?;
    let approach = BraidWord::from_crossings(
        n,
        crossings
            .iter()
            .filter(|c| c.part == Part::Approach)
            .map(|c| (c.crossing.index, c.crossing.sign)),
    )?;
    let core = approach.invert().concat(&word)?.concat(&approach)?.free_reduce();
    Ok((word, approach, core))
}

fn tighten(t: &TrackOptions) -> TrackOptions {
    let mut t = *t;
    t.step_max /= 4.0;
    t.step_init = (t.step_init / 4.0).max(t.step_min);
    t.step_max = t.step_max.max(t.step_init);
    t
}

fn retracks(e: &EngineError) -> bool {
    match e {
        EngineError::Crossing { source, .. } => matches!(
            source,
            CrossError::Track(_)
                | CrossError::MissedCrossing { .. }
                | CrossError::OrderMismatch
                | CrossError::Residual { .. }
        ),
        EngineError::FiberReturn { .. } | EngineError::PermutationMismatch { .. } => true,
        _ => false,
    }
}

/// A loop about the same point with its polygon turned by a seeded angle.
fn moved_loop(
    branch: &BranchSet,
    k: usize,
    base: Complex,
    opts: &EngineOptions,
    retry: usize,
) -> Result<Loop, LoopError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((k as u64) << 32) ^ retry as u64);
    let m = opts.looping.polygon_sides as f64;
    let phase = opts.looping.phase.unwrap_or_else(|| (base - branch.points[k]).arg());
    let mut lo = opts.looping;
    lo.phase = Some(phase + rng.gen_range(-PI..PI) / m);
    keyhole_loop(branch, k, base, &lo, opts.seed.wrapping_add(retry as u64))
}

fn run_generator(
    model: &Model,
    branch: &BranchSet,
    k: usize,
    first: &Loop,
    base_fiber: &Fiber,
    opts: &EngineOptions,
) -> Result<BraidReport, EngineError> {
    let n = base_fiber.len();
    let mut lp = first.clone();
    let mut topts = opts.track;
    let (mut loop_retries, mut track_retries) = (0, 0);
    loop {
        let attempt = run_loop(model, &lp, base_fiber, &topts, &opts.cross).and_then(|run| {
            let deviation = return_deviation(&run.end, base_fiber).unwrap_or(f64::INFINITY);
            if deviation > RETURN_TOL {
                return Err(EngineError::FiberReturn {
                    branch_point: lp.target,
                    deviation,
                });
            }
            let (word, approach, core) = words_of(n, &run.crossings)?;
            let perm = word.permutation();
            let endpoint_perm = model
                .endpoint_perm(&lp, base_fiber, &topts)
                .map_err(|e| EngineError::Crossing {
                    branch_point: lp.target,
                    segment: 0,
                    part: Part::Approach,
                    source: CrossError::Track(e),
                })?
                .ok_or(EngineError::FiberReturn {
                    branch_point: lp.target,
                    deviation: f64::INFINITY,
                })?;
            if endpoint_perm != perm {
                return Err(EngineError::PermutationMismatch {
                    branch_point: lp.target,
                    word: perm,
                    endpoint: endpoint_perm,
                });
            }
            let residual_max = run.crossings.iter().map(|c| c.crossing.residual).fold(0.0, f64::max);
            Ok(BraidReport {
                branch_point: branch.points[k],
                multiplicity: branch.multiplicities[k],
                lp: lp.clone(),
                reduced_word: word.free_reduce(),
                crossings: run.crossings,
                word,
                approach,
                core,
                perm,
                endpoint_perm,
                diagnostics: Diagnostics {
                    residual_max,
                    return_deviation: deviation,
                    loop_retries,
                    track_retries,
                },
            })
        });
        match attempt {
            Ok(r) => return Ok(r),
            Err(e) if e.wants_new_lambda() => return Err(e),
            Err(EngineError::Crossing { source, .. })
                if source.wants_new_loop() && loop_retries < LOOP_RETRIES =>
            {
                loop_retries += 1;
                lp = moved_loop(branch, k, lp.base, opts, loop_retries)?;
            }
            Err(e) if retracks(&e) && track_retries < TRACK_RETRIES => {
                track_retries += 1;
                topts = tighten(&topts);
            }
            Err(e) => return Err(e),
        }
    }
}

fn empty_report(kind: InputKind, n: usize, opts: &EngineOptions, branch: BranchSet) -> GroupReport {
    GroupReport {
        kind,
        n,
        seed: opts.seed,
        lambda: opts.lambda.unwrap_or(Complex::new(1.0, 0.0)),
        lambda_attempts: 0,
        base: opts.base.unwrap_or(Complex::new(0.0, 0.0)),
        branch,
        generators: Vec::new(),
        monodromy_perms: Vec::new(),
        monodromy: monodromy_closure(&[], n),
    }
}

fn validate(opts: &EngineOptions) -> Result<(), EngineError> {
    opts.track.validate().map_err(EngineError::Options)?;
    if opts.lambda.is_some_and(|l| !(l.norm() > 0.0 && l.re.is_finite() && l.im.is_finite())) {
        return Err(EngineError::Options("lambda must be finite and nonzero".into()));
    }
    Ok(())
}

fn generate(
    kind: InputKind,
    n: usize,
    branch: BranchSet,
    scaled: impl Fn(Complex) -> Result<Model, EngineError>,
    opts: &EngineOptions,
) -> Result<GroupReport, EngineError> {
    let base = match opts.base {
        Some(b) => b,
        None => choose_base(&branch, opts.seed)?,
    };
    let loops = (0..branch.len())
        .map(|k| keyhole_loop(&branch, k, base, &opts.looping, opts.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let attempts = if opts.lambda.is_some() {
        1
    } else {
        opts.cross.lambda_retries + 1
    };
    let mut last = None;
    for attempt in 0..attempts {
        let lambda = opts
            .lambda
            .unwrap_or_else(|| regularize_lambda(&opts.cross, attempt));
        let model = scaled(lambda)?;
        let base_fiber = model.base_fiber(base, &opts.track)?;
        let results: Vec<Result<BraidReport, EngineError>> = (0..branch.len())
            .into_par_iter()
            .map(|k| run_generator(&model, &branch, k, &loops[k], &base_fiber, opts))
            .collect();
        match results.into_iter().collect::<Result<Vec<_>, _>>() {
            Ok(generators) => {
                let monodromy_perms: Vec<Permutation> = generators.iter().map(|g| g.perm.clone()).collect();
                let monodromy = monodromy_closure(&monodromy_perms, n);
                return Ok(GroupReport {
                    kind,
                    n,
                    seed: opts.seed,
                    lambda,
                    lambda_attempts: attempt + 1,
                    base,
                    branch,
                    generators,
                    monodromy_perms,
                    monodromy,
                });
            }
            Err(e) if e.wants_new_lambda() => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(EngineError::LambdaExhausted {
        attempts,
        last: Box::new(last.expect("at least one attempt")),
    })
}

/// Braid group generators of the curve `f(z, t) = 0`, one per branch point.
pub fn braid_generators(f: &BivariatePoly, opts: &EngineOptions) -> Result<GroupReport, EngineError> {
    validate(opts)?;
    let n = f.degz();
    let empty = BranchSet {
        points: Vec::new(),
        multiplicities: Vec::new(),
        min_gap: f64::INFINITY,
    };
    if n == 1 {
        return Ok(empty_report(InputKind::Curve, n, opts, empty));
    }
    let branch = branch_points(f, opts.branch_tol)?;
    if branch.is_empty() {
        return Ok(empty_report(InputKind::Curve, n, opts, branch));
    }
    generate(
        InputKind::Curve,
        n,
        branch,
        |lambda| Ok(Model::Curve(f.scale_z(lambda)?)),
        opts,
    )
}

/// Braid group generators of a line arrangement. Strands are followed line
/// by line, so crossings come from pairs of lines in closed form.
pub fn arrangement_braid_generators(
    arr: &LineArrangement,
    opts: &EngineOptions,
) -> Result<GroupReport, EngineError> {
    validate(opts)?;
    let n = arr.d();
    let branch = arrangement_branch_points(arr, opts.branch_tol).set;
    if branch.is_empty() {
        return Ok(empty_report(InputKind::Arrangement, n, opts, branch));
    }
    generate(
        InputKind::Arrangement,
        n,
        branch,
        |lambda| Ok(Model::Lines(arr.scale_z(lambda))),
        opts,
    )
}

fn random_point(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex> {
    (0..m)
        .map(|_| {
            let r = 2.0 * rng.gen::<f64>().sqrt();
            Complex::from_polar(r, rng.gen_range(0.0..2.0 * PI))
        })
        .collect()
}

/// `F(z, u0 + t v)` for `F` in `z, u1, ..., um`. A missing `u0` or `v` is
/// drawn from the polydisk of radius 2, and redrawn while it makes the
/// leading z-coefficient vanish. Returns the curve with the line used.
pub fn restrict_to_line(
    big: &MultivariatePoly,
    u0: Option<&[Complex]>,
    v: Option<&[Complex]>,
    seed: u64,
) -> Result<(BivariatePoly, Vec<Complex>, Vec<Complex>), EngineError> {
    let m = big.m();
    let n = big.degree_in(0);
    if n == 0 {
        return Err(EngineError::Poly(PolyError::ZeroZDegree));
    }
    for (name, p) in [("u0", u0), ("v", v)] {
        if let Some(p) = p {
            if p.len() != m {
                return Err(EngineError::Restriction(format!(
                    "{name} has {} coordinates, expected {m}",
                    p.len()
                )));
            }
        }
    }
    if v.is_some_and(|v| v.iter().all(|c| c.norm() == 0.0)) {
        return Err(EngineError::Restriction("direction v is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let redraws = if u0.is_some() && v.is_some() { 1 } else { LINE_REDRAWS };
    for _ in 0..redraws {
        let p0 = u0.map_or_else(|| random_point(&mut rng, m), <[Complex]>::to_vec);
        let dir = v.map_or_else(|| random_point(&mut rng, m), <[Complex]>::to_vec);
        let z = MultivariatePoly::variable(2, 0);
        let t = MultivariatePoly::variable(2, 1);
        let coords: Vec<MultivariatePoly> = p0
            .iter()
            .zip(&dir)
            .map(|(&a, &b)| MultivariatePoly::constant(2, a).add(&t.scale(b)))
            .collect();
        let mut out = MultivariatePoly::zero(2);
        for (e, &c) in big.terms() {
            let mut term = z.pow(e[0]).scale(c);
            for (x, &k) in coords.iter().zip(&e[1..]) {
                term = term.mul(&x.pow(k));
            }
            out = out.add(&term);
        }
        if out.degree_in(0) == n {
            return Ok((out.to_bivariate()?, p0, dir));
        }
    }
    Err(EngineError::Restriction(format!(
        "the leading z-coefficient vanished on every line tried ({redraws})"
    )))
}

/// A complex number as `[re, im]`.
pub type Pair = [f64; 2];

fn pair(c: Complex) -> Pair {
    [c.re, c.im]
}

fn unpair(p: Pair) -> Complex {
    Complex::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingJson {
    pub s: f64,
    pub t: Pair,
    pub index: usize,
    pub sign: i8,
    pub segment: usize,
    pub part: Part,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub branch_point: Pair,
    pub multiplicity: usize,
    pub word: String,
    pub core: String,
    pub perm: Vec<usize>,
    pub crossings: Vec<CrossingJson>,
    pub residual_max: f64,
    pub loop_vertices: Vec<Pair>,
    pub approach_len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub kind: InputKind,
    pub n: usize,
    pub seed: u64,
    pub lambda: Pair,
    pub lambda_attempts: usize,
    pub base: Pair,
    pub generators: Vec<GeneratorJson>,
    pub monodromy: Monodromy,
}

impl GroupReport {
    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            kind: self.kind,
            n: self.n,
            seed: self.seed,
            lambda: pair(self.lambda),
            lambda_attempts: self.lambda_attempts,
            base: pair(self.base),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorJson {
                    branch_point: pair(g.branch_point),
                    multiplicity: g.multiplicity,
                    word: g.word.to_string(),
                    core: g.core.to_string(),
                    perm: g.perm.image().to_vec(),
                    crossings: g
                        .crossings
                        .iter()
                        .map(|c| CrossingJson {
                            s: c.crossing.s,
                            t: pair(c.crossing.t),
                            index: c.crossing.index,
                            sign: c.crossing.sign,
                            segment: c.segment,
                            part: c.part,
                        })
                        .collect(),
                    residual_max: g.diagnostics.residual_max,
                    loop_vertices: g.lp.vertices.iter().copied().map(pair).collect(),
                    approach_len: g.lp.approach_len,
                })
                .collect(),
            monodromy: self.monodromy,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serializes")
    }
}

/// Step back along the segment used to read a crossing's incoming order.
const SIGN_PROBE: f64 = 1e-5;

/// Checks a report against the curve it claims to describe: every
/// crossing must solve the crossing system on its segment, carry the
/// sign the incoming order gives it, and the words and permutations must
/// follow from the crossings. Returns one message per failed check.
pub fn verify_report(f: &BivariatePoly, report: &ReportJson, topts: &TrackOptions) -> Vec<String> {
    let mut fails = Vec::new();
    let lambda = unpair(report.lambda);
    let g = match f.scale_z(lambda) {
        Ok(g) => g,
        Err(e) => return vec![format!("lambda: {e}")],
    };
    if g.degz() != report.n {
        return vec![format!("report has {} strands, curve has {}", report.n, g.degz())];
    }
    for (k, gen) in report.generators.iter().enumerate() {
        let vertices: Vec<Complex> = gen.loop_vertices.iter().copied().map(unpair).collect();
        let segments: Vec<Segment> = vertices.windows(2).map(|w| Segment { start: w[0], end: w[1] }).collect();
        let mut letters = Vec::new();
        let mut located = Vec::new();
        for (j, c) in gen.crossings.iter().enumerate() {
            let here = format!("generator {k}, crossing {j}");
            let Some(seg) = segments.get(c.segment) else {
                fails.push(format!("{here}: no segment {}", c.segment));
                continue;
            };
            if c.index == 0 || c.index >= report.n {
                fails.push(format!("{here}: index {} out of range", c.index));
                continue;
            }
            let t = seg.at(c.s);
            if (t - unpair(c.t)).norm() > 1e-9 * t.norm().max(1.0) {
                fails.push(format!("{here}: t does not lie at s on its segment"));
            }
            match crossing_check(&g, seg, c, topts) {
                Ok((residual, sign)) => {
                    if residual >= 1e-6 {
                        fails.push(format!("{here}: residual {residual:e}"));
                    }
                    if sign != c.sign {
                        fails.push(format!("{here}: sign {} but the incoming order gives {sign}", c.sign));
                    }
                }
                Err(e) => fails.push(format!("{here}: {e}")),
            }
            letters.push((c.index, c.sign));
            located.push(c.part == Part::Approach);
        }
        let Ok(word) = BraidWord::from_crossings(report.n, letters.iter().copied()) else {
            fails.push(format!("generator {k}: crossings do not form a word"));
            continue;
        };
        if BraidWord::parse(report.n, &gen.word).ok().as_ref() != Some(&word) {
            fails.push(format!("generator {k}: word {} disagrees with its crossings", gen.word));
        }
        let approach = BraidWord::from_crossings(
            report.n,
            letters.iter().zip(&located).filter(|(_, &a)| a).map(|(&l, _)| l),
        )
        .expect("subword of a valid word");
        let core = approach
            .invert()
            .concat(&word)
            .and_then(|w| w.concat(&approach))
            .map(|w| w.free_reduce());
        if core.ok().map(|c| c.to_string()) != Some(gen.core.clone()) {
            fails.push(format!("generator {k}: core {} disagrees with its crossings", gen.core));
        }
        if word.permutation().image() != gen.perm.as_slice() {
            fails.push(format!(
                "generator {k}: permutation {:?} but the word gives {}",
                gen.perm,
                word.permutation()
            ));
        }
    }
    let perms: Option<Vec<Permutation>> =
        report.generators.iter().map(|g| Permutation::new(g.perm.clone())).collect();
    match perms {
        Some(p) if monodromy_closure(&p, report.n) != report.monodromy => {
            fails.push("monodromy summary disagrees with the permutations".into())
        }
        Some(_) => {}
        None => fails.push("a permutation is malformed".into()),
    }
    fails
}

/// Residual of the crossing system at a reported crossing and the sign
/// implied by the two strands' order just before it.
fn crossing_check(
    g: &BivariatePoly,
    seg: &Segment,
    c: &CrossingJson,
    topts: &TrackOptions,
) -> Result<(f64, i8), String> {
    let t = seg.at(c.s);
    let p = g.restrict_t(t).map_err(|e| e.to_string())?;
    let mut fiber = roots(&p, 1e-12).map_err(|e| e.to_string())?;
    if fiber.len() != g.degz() {
        return Err("fiber size drops at the crossing".into());
    }
    fiber.sort_by(|a, b| a.re.total_cmp(&b.re));
    let (a, b) = (fiber[c.index - 1], fiber[c.index]);
    let x = 0.5 * (a.re + b.re);
    let residual = cross_system_error(g, seg, c.s, x, a.im, b.im);
    let back = seg.at(c.s - SIGN_PROBE);
    let pa = newton_point(g, back, a, topts).map_err(|e| e.to_string())?;
    let pb = newton_point(g, back, b, topts).map_err(|e| e.to_string())?;
    let (lo, hi) = if pa.re < pb.re { (pa, pb) } else { (pb, pa) };
    Ok((residual, if lo.im < hi.im { 1 } else { -1 }))
}
