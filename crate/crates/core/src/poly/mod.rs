//! Complex polynomials in one, two and many variables.
//!
//! [`BivariatePoly`] is the defining equation `f(z, t)` of a plane curve and is
//! stored densely, row `i` holding the coefficients of `z^i` as a polynomial
//! in `t`. [`UnivariatePoly`] is used for fibers `f(·, t0)` and for the
//! discriminant. [`MultivariatePoly`] is the sparse form used for
//! hypersurfaces in `z, u1, ..., um` before restriction to a line.

mod parse;
mod roots;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use num_complex::Complex64 as Complex;
pub use parse::{parse_multivariate, parse_poly, ParseError};
pub use roots::{roots, roots_with, RootOptions, RootsError};

/// Machine epsilon for `f64`.
pub(crate) const EPS: f64 = f64::EPSILON;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial has z-degree 0; a curve needs at least one strand")]
    ZeroZDegree,
    #[error("coefficient is not finite")]
    NonFinite,
    #[error("scaling factor must be nonzero")]
    ZeroLambda,
    #[error("restriction f(z, {t0}) is identically zero")]
    DegenerateRestriction { t0: Complex },
    #[error("malformed coefficient matrix: {0}")]
    Malformed(String),
}

pub(crate) fn czero() -> Complex {
    Complex::new(0.0, 0.0)
}

pub(crate) fn cone() -> Complex {
    Complex::new(1.0, 0.0)
}

pub(crate) fn is_finite(c: Complex) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

/// Horner evaluation of an ascending coefficient slice.
pub(crate) fn horner(coeffs: &[Complex], x: Complex) -> Complex {
    coeffs.iter().rev().fold(czero(), |acc, &c| acc * x + c)
}

/// Value and first derivative of an ascending coefficient slice.
pub(crate) fn horner_d(coeffs: &[Complex], x: Complex) -> (Complex, Complex) {
    let mut p = czero();
    let mut dp = czero();
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// A polynomial `f(z, t) = Σ a[i][j] z^i t^j` with complex coefficients.
///
/// The top row `i = degz` always contains a nonzero coefficient and
/// `degz >= 1`; trailing all-zero columns are trimmed so `degt` is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePoly {
    coeffs: Vec<Vec<Complex>>,
}

/// Value of `f` together with its partial derivatives at a point.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub f: Complex,
    pub fz: Complex,
    pub ft: Complex,
    /// `Σ |a_ij| |z|^i |t|^j`, the scale against which rounding error in `f`
    /// is measured.
    pub scale: f64,
}

impl BivariatePoly {
    /// Builds a polynomial from a dense matrix `a[i][j]` (z-degree `i`,
    /// t-degree `j`). Rows may have different lengths.
    pub fn new(mut coeffs: Vec<Vec<Complex>>) -> Result<Self, PolyError> {
        if coeffs.iter().flatten().any(|c| !is_finite(*c)) {
            return Err(PolyError::NonFinite);
        }
        while coeffs
            .last()
            .is_some_and(|row| row.iter().all(|c| c.norm() == 0.0))
        {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(PolyError::ZeroZDegree);
        }
        let width = coeffs
            .iter()
            .map(|row| {
                row.iter()
                    .rposition(|c| c.norm() > 0.0)
                    .map_or(0, |p| p + 1)
            })
            .max()
            .unwrap_or(1)
            .max(1);
        for row in &mut coeffs {
            row.resize(width, czero());
        }
        Ok(Self { coeffs })
    }

    /// Builds from real coefficients, convenient for fixtures.
    pub fn from_real(coeffs: &[&[f64]]) -> Result<Self, PolyError> {
        Self::new(
            coeffs
                .iter()
                .map(|row| row.iter().map(|&x| Complex::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn degz(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degt(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Coefficient of `z^i t^j`, zero outside the stored range.
    pub fn coeff(&self, i: usize, j: usize) -> Complex {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or_else(czero)
    }

    pub fn rows(&self) -> &[Vec<Complex>] {
        &self.coeffs
    }

    /// Row polynomials `r_i(t)` evaluated at `t`.
    fn rows_at(&self, t: Complex) -> Vec<Complex> {
        self.coeffs.iter().map(|row| horner(row, t)).collect()
    }

    pub fn eval(&self, z: Complex, t: Complex) -> Complex {
        horner(&self.rows_at(t), z)
    }

    /// `f`, `∂f/∂z`, `∂f/∂t` and the absolute evaluation scale in one pass.
    pub fn jet(&self, z: Complex, t: Complex) -> Jet {
        let (zn, tn) = (z.norm(), t.norm());
        let mut f = czero();
        let mut fz = czero();
        let mut ft = czero();
        let mut scale = 0.0;
        for row in self.coeffs.iter().rev() {
            let (r, dr) = horner_d(row, t);
            fz = fz * z + f;
            f = f * z + r;
            ft = ft * z + dr;
            scale = scale * zn + row.iter().rev().fold(0.0, |acc, c| acc * tn + c.norm());
        }
        Jet { f, fz, ft, scale }
    }

    /// Formal partial derivative in `z`. Fails with [`PolyError::ZeroZDegree`]
    /// when `f` is z-linear; use [`BivariatePoly::d_dz_rows`] for that case.
    pub fn d_dz(&self) -> Result<Self, PolyError> {
        Self::new(self.d_dz_rows())
    }

    /// Rows of `∂f/∂z`, without the `degz >= 1` restriction.
    pub fn d_dz_rows(&self) -> Vec<Vec<Complex>> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, row)| row.iter().map(|&c| c * i as f64).collect())
            .collect()
    }

    /// Replaces every coefficient by its complex conjugate.
    pub fn conj_poly(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| c.conj()).collect())
                .collect(),
        }
    }

    /// `f(λz, t)`: row `i` is multiplied by `λ^i`.
    pub fn scale_z(&self, lambda: Complex) -> Result<Self, PolyError> {
        if lambda.norm() == 0.0 || !is_finite(lambda) {
            return Err(PolyError::ZeroLambda);
        }
        let mut pow = cone();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for row in &self.coeffs {
            coeffs.push(row.iter().map(|&c| c * pow).collect());
            pow *= lambda;
        }
        Ok(Self { coeffs })
    }

    /// The univariate polynomial `z ↦ f(z, t0)`.
    pub fn restrict_t(&self, t0: Complex) -> Result<UnivariatePoly, PolyError> {
        let p = UnivariatePoly::new(self.rows_at(t0));
        if p.is_zero() {
            return Err(PolyError::DegenerateRestriction { t0 });
        }
        Ok(p)
    }

    /// Leading z-coefficient `a_n(t)` as a univariate polynomial in `t`.
    pub fn leading_row(&self) -> UnivariatePoly {
        UnivariatePoly::new(self.coeffs[self.degz()].clone())
    }

    /// Product of two bivariate polynomials.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![vec![czero(); self.degt() + other.degt() + 1]; self.degz() + other.degz() + 1];
        for (i1, r1) in self.coeffs.iter().enumerate() {
            for (j1, &a) in r1.iter().enumerate() {
                if a.norm() == 0.0 {
                    continue;
                }
                for (i2, r2) in other.coeffs.iter().enumerate() {
                    for (j2, &b) in r2.iter().enumerate() {
                        out[i1 + i2][j1 + j2] += a * b;
                    }
                }
            }
        }
        Self::new(out).expect("product of curves keeps positive z-degree")
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            degz: self.degz(),
            degt: self.degt(),
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self, PolyError> {
        if json.coeffs.len() != json.degz + 1 {
            return Err(PolyError::Malformed(format!(
                "expected {} rows, found {}",
                json.degz + 1,
                json.coeffs.len()
            )));
        }
        if let Some(row) = json.coeffs.iter().find(|r| r.len() != json.degt + 1) {
            return Err(PolyError::Malformed(format!(
                "expected rows of length {}, found {}",
                json.degt + 1,
                row.len()
            )));
        }
        Self::new(
            json.coeffs
                .iter()
                .map(|row| row.iter().map(|&[re, im]| Complex::new(re, im)).collect())
                .collect(),
        )
    }
}

/// Canonical JSON form: `{"degz":n,"degt":m,"coeffs":[[[re,im],...],...]}`,
/// row-major in the z-degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub degz: usize,
    pub degt: usize,
    pub coeffs: Vec<Vec<[f64; 2]>>,
}

fn fmt_complex_literal(c: Complex) -> String {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => format!("{}", c.re),
        (true, false) => format!("{}i", c.im),
        _ if c.im < 0.0 => format!("({}-{}i)", c.re, -c.im),
        _ => format!("({}+{}i)", c.re, c.im),
    }
}

impl fmt::Display for BivariatePoly {
    /// Prints in the input grammar, so `parse_poly(&f.to_string())`
    /// reproduces `f` exactly.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, row) in self.coeffs.iter().enumerate().rev() {
            for (j, &c) in row.iter().enumerate().rev() {
                if c.norm() == 0.0 {
                    continue;
                }
                if !first {
                    write!(out, " + ")?;
                }
                first = false;
                write!(out, "{}", fmt_complex_literal(c))?;
                match i {
                    0 => {}
                    1 => write!(out, "*z")?,
                    _ => write!(out, "*z^{i}")?,
                }
                match j {
                    0 => {}
                    1 => write!(out, "*t")?,
                    _ => write!(out, "*t^{j}")?,
                }
            }
        }
        if first {
            write!(out, "0")?;
        }
        Ok(())
    }
}

/// A univariate complex polynomial, coefficients in ascending degree.
/// The leading coefficient is nonzero unless the polynomial is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariatePoly {
    coeffs: Vec<Complex>,
}

impl UnivariatePoly {
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex]) -> Self {
        let mut c = vec![cone()];
        for &r in roots {
            let mut next = vec![czero(); c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex {
        self.coeffs.last().copied().unwrap_or_else(czero)
    }

    pub fn eval(&self, x: Complex) -> Complex {
        horner(&self.coeffs, x)
    }

    pub fn eval_d(&self, x: Complex) -> (Complex, Complex) {
        horner_d(&self.coeffs, x)
    }

    /// `Σ |a_k| |x|^k`.
    pub fn abs_eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Taylor coefficients of `p(c + w)` in `w`.
    pub fn shift(&self, c: Complex) -> Self {
        let mut b = self.coeffs.clone();
        let n = b.len();
        for k in 0..n.saturating_sub(1) {
            for j in (k..n - 1).rev() {
                let next = b[j + 1];
                b[j] += c * next;
            }
        }
        Self::new(b)
    }
}

/// Sparse polynomial in `z, u1, ..., um`. Exponent tuples have length `m + 1`
/// with the z-exponent first; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MultivariatePoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Complex>,
}

impl MultivariatePoly {
    /// Zero polynomial in `nvars` variables (the first is `z`).
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable with index `var`.
    pub fn variable(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, cone());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Complex)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent tuple length");
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Complex) {
        let v = self.terms.get(&exps).copied().unwrap_or_else(czero) + c;
        if v.norm() == 0.0 {
            self.terms.remove(&exps);
        } else {
            self.terms.insert(exps, v);
        }
    }

    /// Number of variables including `z`.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of `u` variables.
    pub fn m(&self) -> usize {
        self.nvars - 1
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant value if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<Complex> {
        match self.terms.len() {
            0 => Some(czero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(e, _)| e.iter().all(|&x| x == 0))
                .map(|(_, &c)| c),
            _ => None,
        }
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: Complex) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, cone());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    pub fn eval(&self, point: &[Complex]) -> Complex {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .zip(point)
                    .fold(c, |acc, (&k, &x)| acc * x.powu(k))
            })
            .sum()
    }

    /// Converts a polynomial in exactly two variables `(z, t)`.
    pub fn to_bivariate(&self) -> Result<BivariatePoly, PolyError> {
        if self.nvars != 2 {
            return Err(PolyError::Malformed(format!(
                "expected 2 variables, found {}",
                self.nvars
            )));
        }
        let n = self.degree_in(0) as usize;
        let m = self.degree_in(1) as usize;
        let mut coeffs = vec![vec![czero(); m + 1]; n + 1];
        for (e, &c) in &self.terms {
            coeffs[e[0] as usize][e[1] as usize] += c;
        }
        BivariatePoly::new(coeffs)
    }
}
