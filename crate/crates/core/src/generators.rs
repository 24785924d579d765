//! Compactly supported generators and the randomized GHC certificate.
//!
//! A generator is supported on the open interval `(0, s)`. Complex generators
//! are certified through the `Xi_phi` system of products of real and imaginary
//! parts; real generators through their own integer shifts.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GeneratorError;

const CHIRP_SUPPORT: usize = 4;
const BSPLINE_SUPPORT: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    /// `(2/3) sqrt(2 pi |b|) exp(-i a (x-2)^2 / 2b) exp(-i p (x-2) / b) cos^2(pi (x-2) / 4)` on `(0, 4)`.
    Chirp { a: f64, b: f64, p: f64 },
    /// Real part of [`GeneratorKind::Chirp`].
    ChirpRealPart { a: f64, b: f64, p: f64 },
    /// Uniform cubic B-spline with knots `0, 1, 2, 3, 4`.
    CubicBspline,
    /// Linear interpolation of grid values at `i * s / (len - 1)`.
    Tabulated { values: Vec<Complex64> },
    /// `exp(i alpha x) * base(x)` for a real-valued base generator.
    Modulated { base: Box<Generator>, alpha: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    kind: GeneratorKind,
    support: usize,
}

impl Generator {
    pub fn chirp(a: f64, b: f64, p: f64) -> Result<Self, GeneratorError> {
        check_chirp(a, b, p)?;
        Ok(Generator { kind: GeneratorKind::Chirp { a, b, p }, support: CHIRP_SUPPORT })
    }

    pub fn chirp_real_part(a: f64, b: f64, p: f64) -> Result<Self, GeneratorError> {
        check_chirp(a, b, p)?;
        Ok(Generator { kind: GeneratorKind::ChirpRealPart { a, b, p }, support: CHIRP_SUPPORT })
    }

    pub fn cubic_bspline() -> Self {
        Generator { kind: GeneratorKind::CubicBspline, support: BSPLINE_SUPPORT }
    }

    /// Grid values at `x_i = i * support / (len - 1)`; the endpoint values are
    /// ignored because evaluation on the closed boundary is always zero.
    pub fn tabulated(support: usize, values: Vec<Complex64>) -> Result<Self, GeneratorError> {
        if support < 2 {
            return Err(GeneratorError::Support(support));
        }
        if values.len() < 2 {
            return Err(GeneratorError::Grid(values.len()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GeneratorError::NonFinite);
        }
        Ok(Generator { kind: GeneratorKind::Tabulated { values }, support })
    }

    pub fn modulated(base: Generator, alpha: f64) -> Result<Self, GeneratorError> {
        if base.is_complex() {
            return Err(GeneratorError::ComplexBase);
        }
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(GeneratorError::Modulation(alpha));
        }
        let support = base.support;
        Ok(Generator { kind: GeneratorKind::Modulated { base: Box::new(base), alpha }, support })
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn support_len(&self) -> usize {
        self.support
    }

    pub fn is_complex(&self) -> bool {
        match &self.kind {
            GeneratorKind::Chirp { .. } | GeneratorKind::Modulated { .. } => true,
            GeneratorKind::ChirpRealPart { .. } | GeneratorKind::CubicBspline => false,
            GeneratorKind::Tabulated { values } => values.iter().any(|v| v.im != 0.0),
        }
    }

    /// Value at `x`; exactly zero outside the open support `(0, s)`.
    pub fn eval(&self, x: f64) -> Complex64 {
        if !(x > 0.0 && x < self.support as f64) {
            return Complex64::new(0.0, 0.0);
        }
        match &self.kind {
            GeneratorKind::Chirp { a, b, p } => chirp_value(*a, *b, *p, x),
            GeneratorKind::ChirpRealPart { a, b, p } => Complex64::new(chirp_value(*a, *b, *p, x).re, 0.0),
            GeneratorKind::CubicBspline => Complex64::new(cubic_bspline(x), 0.0),
            GeneratorKind::Tabulated { values } => {
                let h = self.support as f64 / (values.len() - 1) as f64;
                let pos = x / h;
                let i = (pos.floor() as usize).min(values.len() - 2);
                let w = pos - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
            GeneratorKind::Modulated { base, alpha } => {
                base.eval(x) * Complex64::from_polar(1.0, alpha * x)
            }
        }
    }

    /// Value at `shift + t`. Every sample location in the crate is addressed
    /// this way so that synthesis and reconstruction round identically.
    #[inline]
    pub fn eval_shifted(&self, shift: i64, t: f64) -> Complex64 {
        self.eval(shift as f64 + t)
    }

    /// An upper bound on `sup |phi|`, used to scale degeneracy tolerances.
    pub fn peak(&self) -> f64 {
        match &self.kind {
            GeneratorKind::Chirp { b, .. } | GeneratorKind::ChirpRealPart { b, .. } => chirp_amplitude(*b),
            GeneratorKind::CubicBspline => 2.0 / 3.0,
            GeneratorKind::Tabulated { values } => values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            GeneratorKind::Modulated { base, .. } => base.peak(),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GeneratorKind::Chirp { a, b, p } => write!(f, "chirp(a={a}, b={b}, p={p})"),
            GeneratorKind::ChirpRealPart { a, b, p } => write!(f, "chirp_real_part(a={a}, b={b}, p={p})"),
            GeneratorKind::CubicBspline => write!(f, "cubic_bspline"),
            GeneratorKind::Tabulated { values } => write!(f, "tabulated(s={}, {} points)", self.support, values.len()),
            GeneratorKind::Modulated { base, alpha } => write!(f, "exp(i {alpha} x) * {base}"),
        }
    }
}

/// Serializable description of a generator, as found in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<usize>,
    /// Tabulated grid values as `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    Chirp,
    ChirpRealPart,
    CubicBspline,
    Tabulated,
}

impl GeneratorSpec {
    pub fn chirp(a: f64, b: f64, p: f64) -> Self {
        GeneratorSpec { kind: SpecKind::Chirp, a: Some(a), b: Some(b), p: Some(p), support: None, values: None }
    }

    pub fn chirp_real_part(a: f64, b: f64, p: f64) -> Self {
        GeneratorSpec { kind: SpecKind::ChirpRealPart, ..Self::chirp(a, b, p) }
    }

    pub fn build(&self) -> Result<Generator, GeneratorError> {
        let chirp_params = || -> Result<(f64, f64, f64), GeneratorError> {
            match (self.a, self.b) {
                (Some(a), Some(b)) => Ok((a, b, self.p.unwrap_or(0.0))),
                _ => Err(GeneratorError::ChirpParameters { a: self.a.unwrap_or(0.0), b: self.b.unwrap_or(0.0) }),
            }
        };
        let support_ok = |expected: usize| match self.support {
            Some(s) if s != expected => Err(GeneratorError::Support(s)),
            _ => Ok(()),
        };
        match self.kind {
            SpecKind::Chirp => {
                support_ok(CHIRP_SUPPORT)?;
                let (a, b, p) = chirp_params()?;
                Generator::chirp(a, b, p)
            }
            SpecKind::ChirpRealPart => {
                support_ok(CHIRP_SUPPORT)?;
                let (a, b, p) = chirp_params()?;
                Generator::chirp_real_part(a, b, p)
            }
            SpecKind::CubicBspline => {
                support_ok(BSPLINE_SUPPORT)?;
                Ok(Generator::cubic_bspline())
            }
            SpecKind::Tabulated => {
                let values = self.values.as_ref().ok_or(GeneratorError::Grid(0))?;
                let support = self.support.ok_or(GeneratorError::Support(0))?;
                Generator::tabulated(support, values.iter().map(|v| Complex64::new(v[0], v[1])).collect())
            }
        }
    }
}

fn check_chirp(a: f64, b: f64, p: f64) -> Result<(), GeneratorError> {
    if !(a.is_finite() && b.is_finite() && p.is_finite()) {
        return Err(GeneratorError::NonFinite);
    }
    if a == 0.0 || b == 0.0 {
        return Err(GeneratorError::ChirpParameters { a, b });
    }
    Ok(())
}

fn chirp_amplitude(b: f64) -> f64 {
    2.0 / 3.0 * (2.0 * PI * b.abs()).sqrt()
}

fn chirp_value(a: f64, b: f64, p: f64, x: f64) -> Complex64 {
    let u = x - 2.0;
    let envelope = (PI * u / 4.0).cos();
    let phase = -(a * u * u / (2.0 * b) + p * u / b);
    Complex64::from_polar(chirp_amplitude(b) * envelope * envelope, phase)
}

fn cubic_bspline(x: f64) -> f64 {
    if x < 1.0 {
        x * x * x / 6.0
    } else if x < 2.0 {
        let u = x - 1.0;
        (1.0 + 3.0 * u + 3.0 * u * u - 3.0 * u * u * u) / 6.0
    } else if x < 3.0 {
        let u = 3.0 - x;
        (1.0 + 3.0 * u + 3.0 * u * u - 3.0 * u * u * u) / 6.0
    } else {
        let u = 4.0 - x;
        u * u * u / 6.0
    }
}

/// Which function system is built from a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemLabel {
    /// Products `Re Re(+k) + Im Im(+k)`, `Re Im(+k) - Im Re(+k)` for `k = 1..s-1`, and `|phi|^2`.
    #[serde(rename = "Xi_phi")]
    XiPhi,
    /// Shifts `phi(. + k)`, `k = 0..s-1`, of a complex generator.
    #[serde(rename = "Lambda_phi_1")]
    LambdaPhi1,
    /// Products `phi * conj(phi(. + k))`, `k = 0..s-1`.
    #[serde(rename = "Lambda_phi_2")]
    LambdaPhi2,
    /// Shifts `phi(. + k)`, `k = 0..s-1`, of a real generator.
    #[serde(rename = "Lambda_varphi")]
    LambdaVarphi,
}

impl fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SystemLabel::XiPhi => "Xi_phi",
            SystemLabel::LambdaPhi1 => "Lambda_phi_1",
            SystemLabel::LambdaPhi2 => "Lambda_phi_2",
            SystemLabel::LambdaVarphi => "Lambda_varphi",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Member {
    Symmetric(usize),
    Antisymmetric(usize),
    ModulusSquared,
    Shift(usize),
    ConjugateProduct(usize),
}

/// An ordered list of functions on `(0, 1)` derived from one generator.
#[derive(Clone, Debug)]
pub struct FunctionSystem {
    generator: Generator,
    label: SystemLabel,
    members: Vec<Member>,
}

impl FunctionSystem {
    pub fn label(&self) -> SystemLabel {
        self.label
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// Value of member `index` at `x`; zero outside `(0, 1)`.
    pub fn eval_member(&self, index: usize, x: f64) -> Complex64 {
        if !(x > 0.0 && x < 1.0) {
            return Complex64::new(0.0, 0.0);
        }
        let g = &self.generator;
        let phi = g.eval(x);
        match self.members[index] {
            Member::Symmetric(k) => {
                let w = g.eval_shifted(k as i64, x);
                Complex64::new(phi.re * w.re + phi.im * w.im, 0.0)
            }
            Member::Antisymmetric(k) => {
                let w = g.eval_shifted(k as i64, x);
                Complex64::new(phi.re * w.im - phi.im * w.re, 0.0)
            }
            Member::ModulusSquared => Complex64::new(phi.norm_sqr(), 0.0),
            Member::Shift(k) => g.eval_shifted(k as i64, x),
            Member::ConjugateProduct(k) => phi * g.eval_shifted(k as i64, x).conj(),
        }
    }
}

pub fn build_system(gen: &Generator, label: SystemLabel) -> Result<FunctionSystem, GeneratorError> {
    let s = gen.support_len();
    let members = match label {
        SystemLabel::XiPhi => {
            require_complex(gen, label, true)?;
            (1..s)
                .map(Member::Symmetric)
                .chain((1..s).map(Member::Antisymmetric))
                .chain(std::iter::once(Member::ModulusSquared))
                .collect()
        }
        SystemLabel::LambdaPhi1 => {
            require_complex(gen, label, true)?;
            (0..s).map(Member::Shift).collect()
        }
        SystemLabel::LambdaPhi2 => {
            require_complex(gen, label, true)?;
            (0..s).map(Member::ConjugateProduct).collect()
        }
        SystemLabel::LambdaVarphi => {
            require_complex(gen, label, false)?;
            (0..s).map(Member::Shift).collect()
        }
    };
    Ok(FunctionSystem { generator: gen.clone(), label, members })
}

fn require_complex(gen: &Generator, label: SystemLabel, complex: bool) -> Result<(), GeneratorError> {
    if gen.is_complex() != complex {
        return Err(GeneratorError::IncompatibleSystem { label: label.to_string(), generator: gen.to_string() });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhcVerdict {
    Plausible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhcReport {
    pub system: SystemLabel,
    pub members: usize,
    pub tuples_tested: usize,
    /// Largest `|det|` seen, after scaling each matrix by its largest entry.
    pub max_abs_determinant: f64,
    pub passing_tuple: Option<Vec<f64>>,
    pub tolerance: f64,
    pub verdict: GhcVerdict,
}

/// Randomized linear-independence certificate.
///
/// Draws up to `num_tuples` point tuples uniformly from `(0, 1)^m` and stops at
/// the first one whose normalized collocation matrix `[g_j(x_i)] / max|g_j(x_i)|`
/// has `|det| > tol`.
pub fn check_ghc(system: &FunctionSystem, num_tuples: usize, seed: u64, tol: f64) -> GhcReport {
    let m = system.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_det = 0.0f64;
    let mut tested = 0;
    let mut passing = None;
    for _ in 0..num_tuples {
        let points: Vec<f64> = (0..m).map(|_| open_unit(&mut rng)).collect();
        tested += 1;
        let det = normalized_determinant(system, &points);
        max_det = max_det.max(det);
        if det > tol {
            passing = Some(points);
            break;
        }
    }
    GhcReport {
        system: system.label(),
        members: m,
        tuples_tested: tested,
        max_abs_determinant: max_det,
        verdict: if passing.is_some() { GhcVerdict::Plausible } else { GhcVerdict::Inconclusive },
        passing_tuple: passing,
        tolerance: tol,
    }
}

/// `|det [g_j(x_i)]|` after dividing every entry by the largest entry modulus.
pub fn normalized_determinant(system: &FunctionSystem, points: &[f64]) -> f64 {
    let m = system.len();
    assert_eq!(points.len(), m, "one point per member");
    let mut mat = DMatrix::from_fn(m, m, |i, j| system.eval_member(j, points[i]));
    let peak = mat.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    mat /= Complex64::new(peak, 0.0);
    mat.determinant().norm()
}

pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let t: f64 = rng.gen();
        if t > 0.0 && t < 1.0 {
            return t;
        }
    }
}
