//! Finite supersets of the branch locus.
//!
//! For a general curve these are the roots of `D(t) = Res_z(f, f_z)`, found by
//! sampling Sylvester determinants on a circle and interpolating. For a line
//! arrangement they are the projections of the pairwise intersections.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{czero, roots, BivariatePoly, Complex, RootsError, UnivariatePoly};

/// Radius of the circle of interpolation nodes.
const SAMPLE_RADIUS: f64 = 1.17;
/// Coefficients smaller than this, relative to the largest, are trimmed
/// from the top of `D`.
const TRIM: f64 = 1e-9;
/// Relative uncertainty assumed on the interpolated coefficients of `D`
/// when deciding whether nearby roots are one multiple root.
const COEFF_NOISE: f64 = 1e-12;
/// Reciprocal condition number below which a Sylvester matrix counts as
/// singular.
const SINGULAR: f64 = 1e-13;
/// Default dedupe radius.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchError {
    #[error("discriminant is identically zero: f has a repeated factor")]
    ZeroDiscriminant,
    #[error("root solve of the discriminant failed: {0}")]
    Roots(#[from] RootsError),
    #[error("an arrangement needs at least 2 lines, got {0}")]
    TooFewLines(usize),
    #[error("line {0} is zero")]
    ZeroLine(usize),
    #[error("lines {0} and {1} are proportional")]
    ProportionalLines(usize, usize),
    #[error("line {0} is vertical (no z term) in this chart")]
    VerticalLine(usize),
    #[error("could not find a generic chart after {0} draws")]
    NoGenericChart(usize),
    #[error("arrangement matrix must have 3 rows, got {0}")]
    BadMatrix(usize),
}

/// Sorted, deduplicated branch points.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSet {
    pub points: Vec<Complex>,
    /// Root multiplicity of each point in the defining polynomial (1 for each
    /// arrangement intersection).
    pub multiplicities: Vec<usize>,
    pub min_gap: f64,
}

impl BranchSet {
    fn from_clusters(mut items: Vec<(Complex, usize)>) -> Self {
        items.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        let points: Vec<Complex> = items.iter().map(|x| x.0).collect();
        let min_gap = crate::homotopy::min_pairwise(&points);
        Self {
            multiplicities: items.iter().map(|x| x.1).collect(),
            points,
            min_gap,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sylvester determinant `Res_z(f(·, t), f_z(·, t))` at a single `t`, with
/// formal degrees `n` and `n - 1`.
pub fn sylvester_det(f: &BivariatePoly, t: Complex) -> Complex {
    let (det, _) = sylvester_det_scaled(f, t);
    det
}

/// Determinant together with the reciprocal condition number of the matrix.
fn sylvester_det_scaled(f: &BivariatePoly, t: Complex) -> (Complex, f64) {
    let n = f.degz();
    let p: Vec<Complex> = f
        .rows()
        .iter()
        .map(|row| crate::poly::horner(row, t))
        .collect();
    let q: Vec<Complex> = (1..=n).map(|i| p[i] * i as f64).collect();
    let size = 2 * n - 1;
    let mut m = DMatrix::<Complex>::zeros(size, size);
    // descending coefficients along each row
    for r in 0..n - 1 {
        for k in 0..=n {
            m[(r, r + k)] = p[n - k];
        }
    }
    for r in 0..n {
        for k in 0..n {
            m[(n - 1 + r, r + k)] = q[n - 1 - k];
        }
    }
    let sv = m.singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let inv_cond = if hi > 0.0 { lo / hi } else { 0.0 };
    (m.determinant(), inv_cond)
}

/// `D(t) = Res_z(f, f_z)` by interpolation, with the default rotation.
pub fn discriminant_poly(f: &BivariatePoly) -> Result<UnivariatePoly, BranchError> {
    discriminant_poly_seeded(f, 0)
}

/// `D(t)` with the interpolation circle rotated by a seeded random angle.
pub fn discriminant_poly_seeded(f: &BivariatePoly, seed: u64) -> Result<UnivariatePoly, BranchError> {
    let n = f.degz();
    let m = f.degt();
    let count = (2 * n - 1) * m + 1;
    let phase = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..2.0 * PI / count as f64);
    let nodes: Vec<Complex> = (0..count)
        .map(|k| Complex::from_polar(SAMPLE_RADIUS, phase + 2.0 * PI * k as f64 / count as f64))
        .collect();
    let mut values = Vec::with_capacity(count);
    let mut zero = true;
    for &t in &nodes {
        let (d, inv_cond) = sylvester_det_scaled(f, t);
        if inv_cond > SINGULAR {
            zero = false;
        }
        values.push(d);
    }
    if zero {
        return Err(BranchError::ZeroDiscriminant);
    }
    // inverse DFT gives the coefficients of D(R e^{iφ} w) in w
    let mut coeffs = Vec::with_capacity(count);
    for j in 0..count {
        let mut acc = czero();
        for (k, v) in values.iter().enumerate() {
            acc += v * Complex::from_polar(1.0, -2.0 * PI * (j * k) as f64 / count as f64);
        }
        let unscale = Complex::from_polar(SAMPLE_RADIUS.powi(j as i32), phase * j as f64);
        coeffs.push(acc / count as f64 / unscale);
    }
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() < TRIM * max) {
        coeffs.pop();
    }
    Ok(UnivariatePoly::new(coeffs))
}

fn centroid(pts: &[Complex]) -> Complex {
    pts.iter().sum::<Complex>() / pts.len() as f64
}

/// Single-linkage clusters of `pts` at radius `tol`.
fn single_linkage(pts: &[Complex], tol: f64) -> Vec<Vec<Complex>> {
    let n = pts.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], mut x: usize) -> usize {
        while label[x] != x {
            label[x] = label[label[x]];
            x = label[x];
        }
        x
    }
    for a in 0..n {
        for b in a + 1..n {
            if (pts[a] - pts[b]).norm() <= tol {
                let (ra, rb) = (find(&mut label, a), find(&mut label, b));
                label[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<Complex>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for (k, &p) in pts.iter().enumerate() {
        let r = find(&mut label, k);
        if index[r] == usize::MAX {
            index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index[r]].push(p);
    }
    groups
}

/// Radius within which a `k`-fold root of `p` at `c` can be scattered by
/// interpolation noise. The coefficient of `t^i` is taken to be uncertain by
/// [`COEFF_NOISE`] times the size of `p` on the sample circle over `R^i`.
fn noise_radius(p: &UnivariatePoly, c: Complex, k: usize) -> f64 {
    let b = p.shift(c);
    let bk = b.coeffs().get(k).map_or(0.0, |x| x.norm());
    if bk == 0.0 {
        return f64::INFINITY;
    }
    let level = COEFF_NOISE * p.abs_eval(SAMPLE_RADIUS);
    let u = UnivariatePoly::new(
        (0..p.coeffs().len())
            .map(|i| Complex::new(level / SAMPLE_RADIUS.powi(i as i32), 0.0))
            .collect(),
    )
    .shift(Complex::new(c.norm(), 0.0));
    (0..k)
        .map(|j| {
            let uj = u.coeffs().get(j).map_or(0.0, |x| x.re);
            (uj / bk).powf(1.0 / (k - j) as f64)
        })
        .fold(0.0, f64::max)
}

fn spread(pts: &[Complex]) -> f64 {
    let c = centroid(pts);
    pts.iter().map(|p| (p - c).norm()).fold(0.0, f64::max)
}

/// Groups the roots of `p` into distinct points with multiplicities.
fn cluster_roots(p: &UnivariatePoly, raw: &[Complex], tol: f64) -> Vec<(Complex, usize)> {
    let mut clusters = single_linkage(raw, tol);
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let d = (centroid(&clusters[a]) - centroid(&clusters[b])).norm();
                if best.is_some_and(|(bd, _, _)| bd <= d) {
                    continue;
                }
                let mut union = clusters[a].clone();
                union.extend(&clusters[b]);
                if spread(&union) <= noise_radius(p, centroid(&union), union.len()) {
                    best = Some((d, a, b));
                }
            }
        }
        match best {
            Some((_, a, b)) => {
                let moved = clusters.remove(b);
                clusters[a].extend(moved);
            }
            None => break,
        }
    }
    clusters
        .iter()
        .map(|c| (polish_multiple(p, centroid(c), c.len(), spread(c)), c.len()))
        .collect()
}

/// A `k`-fold root of `p` is a simple root of `p^(k-1)`; refine the cluster
/// centroid there with Newton's method, keeping the centroid if the
/// iteration wanders out of the cluster.
fn polish_multiple(p: &UnivariatePoly, c: Complex, k: usize, radius: f64) -> Complex {
    if k == 1 {
        return c;
    }
    let mut q = p.clone();
    for _ in 1..k {
        q = q.derivative();
    }
    let mut z = c;
    for _ in 0..8 {
        let (v, dv) = q.eval_d(z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    if (z - c).norm() <= 2.0 * radius.max(1e-12) {
        z
    } else {
        c
    }
}

/// Distinct roots of the discriminant, deduplicated at radius `tol`.
pub fn branch_points(f: &BivariatePoly, tol: f64) -> Result<BranchSet, BranchError> {
    let d = discriminant_poly(f)?;
    if d.degree() == 0 {
        return Ok(BranchSet::from_clusters(Vec::new()));
    }
    let raw = roots(&d, 1e-12)?;
    Ok(BranchSet::from_clusters(cluster_roots(&d, &raw, tol)))
}

/// A line `a z + b t + c = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
}

impl Line {
    /// The strand `z(t)` of this line.
    pub fn z_at(&self, t: Complex) -> Complex {
        -(self.b * t + self.c) / self.a
    }

    fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr()).sqrt()
    }
}

fn proportional(u: [Complex; 3], v: [Complex; 3], rel: f64) -> bool {
    let nu = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    cross.iter().map(|x| x.norm()).fold(0.0, f64::max) <= rel * nu * nv
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineArrangement {
    pub lines: Vec<Line>,
}

impl LineArrangement {
    /// Validates that every line involves `z` and that no two lines are
    /// proportional.
    pub fn new(lines: Vec<Line>) -> Result<Self, BranchError> {
        if lines.len() < 2 {
            return Err(BranchError::TooFewLines(lines.len()));
        }
        for (k, l) in lines.iter().enumerate() {
            if l.norm() == 0.0 {
                return Err(BranchError::ZeroLine(k));
            }
            if l.a.norm() <= 1e-12 * l.norm() {
                return Err(BranchError::VerticalLine(k));
            }
        }
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (u, v) = (&lines[i], &lines[j]);
                if proportional([u.a, u.b, u.c], [v.a, v.b, v.c], 1e-12) {
                    return Err(BranchError::ProportionalLines(i, j));
                }
            }
        }
        Ok(Self { lines })
    }

    pub fn d(&self) -> usize {
        self.lines.len()
    }

    /// The product of the defining linear forms as a curve.
    pub fn to_poly(&self) -> BivariatePoly {
        let mut acc: Option<BivariatePoly> = None;
        for l in &self.lines {
            let p = BivariatePoly::new(vec![vec![l.c, l.b], vec![l.a, czero()]])
                .expect("line has a z term");
            acc = Some(match acc {
                None => p,
                Some(q) => q.mul(&p),
            });
        }
        acc.expect("at least two lines")
    }

    /// The arrangement of `f(λz, t)`: every `a` is multiplied by `λ`.
    pub fn scale_z(&self, lambda: Complex) -> Self {
        Self {
            lines: self
                .lines
                .iter()
                .map(|l| Line {
                    a: l.a * lambda,
                    b: l.b,
                    c: l.c,
                })
                .collect(),
        }
    }
}

/// Branch points of an arrangement, and the pairs skipped as parallel.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrangementBranches {
    pub set: BranchSet,
    pub parallel_pairs: Vec<(usize, usize)>,
}

/// Projections of all pairwise intersections, deduplicated at `tol`.
pub fn arrangement_branch_points(arr: &LineArrangement, tol: f64) -> ArrangementBranches {
    let mut ts = Vec::new();
    let mut parallel_pairs = Vec::new();
    for i in 0..arr.d() {
        for j in i + 1..arr.d() {
            let (u, v) = (&arr.lines[i], &arr.lines[j]);
            let det = u.a * v.b - v.a * u.b;
            if det.norm() <= 1e-12 * u.norm() * v.norm() {
                parallel_pairs.push((i, j));
                continue;
            }
            ts.push((v.a * u.c - u.a * v.c) / det);
        }
    }
    let clusters = single_linkage(&ts, tol)
        .into_iter()
        .map(|c| (centroid(&c), 1))
        .collect();
    ArrangementBranches {
        set: BranchSet::from_clusters(clusters),
        parallel_pairs,
    }
}

/// Passes a 3×d matrix of linear forms through a seeded random change of
/// coordinates and reads off affine lines in the chart where the third new
/// coordinate is 1.
pub fn dehomogenize_arrangement(
    matrix: &[Vec<Complex>],
    seed: u64,
) -> Result<LineArrangement, BranchError> {
    if matrix.len() != 3 {
        return Err(BranchError::BadMatrix(matrix.len()));
    }
    let d = matrix[0].len();
    if matrix.iter().any(|r| r.len() != d) {
        return Err(BranchError::BadMatrix(3));
    }
    if d < 2 {
        return Err(BranchError::TooFewLines(d));
    }
    let cols: Vec<[Complex; 3]> = (0..d)
        .map(|k| [matrix[0][k], matrix[1][k], matrix[2][k]])
        .collect();
    for (k, col) in cols.iter().enumerate() {
        if col.iter().all(|x| x.norm() == 0.0) {
            return Err(BranchError::ZeroLine(k));
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            if proportional(cols[i], cols[j], 1e-12) {
                return Err(BranchError::ProportionalLines(i, j));
            }
        }
    }
    const DRAWS: usize = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..DRAWS {
        let a = DMatrix::<Complex>::from_fn(3, 3, |_, _| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        if a.determinant().norm() < 1e-2 {
            continue;
        }
        let lines: Vec<Line> = cols
            .iter()
            .map(|col| {
                let img: Vec<Complex> = (0..3)
                    .map(|r| (0..3).map(|k| a[(k, r)] * col[k]).sum())
                    .collect();
                Line {
                    a: img[0],
                    b: img[1],
                    c: img[2],
                }
            })
            .collect();
        // keep clear of near-vertical lines as well as exact ones
        if lines.iter().any(|l| l.a.norm() < 1e-3 * l.norm()) {
            continue;
        }
        if let Ok(arr) = LineArrangement::new(lines) {
            return Ok(arr);
        }
    }
    Err(BranchError::NoGenericChart(DRAWS))
}

/// Arrangement input: either a 3×d matrix of forms or explicit affine lines.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArrangementJson {
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
    Lines { lines: Vec<[[f64; 2]; 3]> },
}

impl ArrangementJson {
    pub fn into_arrangement(self, seed: u64) -> Result<LineArrangement, BranchError> {
        let c = |x: [f64; 2]| Complex::new(x[0], x[1]);
        match self {
            Self::Matrix { matrix } => {
                let m: Vec<Vec<Complex>> = matrix
                    .into_iter()
                    .map(|r| r.into_iter().map(c).collect())
                    .collect();
                dehomogenize_arrangement(&m, seed)
            }
            Self::Lines { lines } => LineArrangement::new(
                lines
                    .into_iter()
                    .map(|[a, b, cc]| Line {
                        a: c(a),
                        b: c(b),
                        c: c(cc),
                    })
                    .collect(),
            ),
        }
    }
}

/// The 3×14 matrix of the fourteen-line example arrangement.
pub fn fourteen_line_matrix() -> Vec<Vec<Complex>> {
    let rows: [[f64; 14]; 3] = [
        [1., 0., 1., 0., 1., 1., 2., 3., 2., 3., 1., 1., -1., 0.],
        [0., 1., 0., 1., 1., 2., 1., 2., 3., 1., 3., -1., 1., 0.],
        [0., 0., 1., 1., 2., 2., 2., 4., 4., 4., 4., 4., 4., 1.],
    ];
    rows.iter()
        .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
        .collect()
}

/// Columns for `t w z (t - w) (t + w + z)` in coordinates `(t, w, z)`.
pub fn five_line_matrix() -> Vec<Vec<Complex>> {
    let rows: [[f64; 5]; 3] = [[1., 0., 0., 1., 1.], [0., 1., 0., -1., 1.], [0., 0., 1., 0., 1.]];
    rows.iter()
        .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
        .collect()
}
