//! Phase decoding and coefficient recovery.
//!
//! Interval by interval, the phase of one sample is decoded from magnitude data
//! and the coefficients recovered so far; the next coefficient then follows
//! linearly. Complex generators use three samples per interval and a pair of
//! quadratics sharing the wanted root, real generators use two samples and a
//! sign test.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::PdcrError;
use crate::generators::Generator;
use crate::numeric::{real, Cplx, Real};
use crate::sampling::MagnitudeSamples;
use crate::signal::{aux_v, CausalSignal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Complex,
    Real,
}

impl Mode {
    pub fn density(self) -> usize {
        match self {
            Mode::Complex => 3,
            Mode::Real => 2,
        }
    }
}

/// Which sample of an interval carries the decoded phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pivot {
    /// Always the first point of the interval.
    First,
    /// The point where `|phi|` is largest, which keeps the division in the
    /// coefficient update as well conditioned as the design allows.
    LargestGenerator,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdcrOptions {
    /// Phase assigned to `f(t0)` on the complex path.
    pub initial_phase: f64,
    /// Sign assigned to `f(t0)` on the real path.
    pub initial_sign: f64,
    /// Relative threshold for `|phi(t)|`, `|f(t0)|` and the quadratic's leading coefficient.
    pub degeneracy_tol: f64,
    /// The best root match must be at most this fraction of the runner-up.
    pub tie_ratio: f64,
    /// Roots closer than this are treated as one double root.
    pub double_root_tol: f64,
    pub pivot: Pivot,
}

impl Default for PdcrOptions {
    fn default() -> Self {
        PdcrOptions {
            initial_phase: 0.0,
            initial_sign: 1.0,
            degeneracy_tol: 1e-12,
            tie_ratio: 0.5,
            double_root_tol: 1e-6,
            pivot: Pivot::LargestGenerator,
        }
    }
}

/// `(A + Bi) z^2 - C z + (A - Bi) = 0` at one pair of points.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticData {
    pub step: usize,
    pub ab: Cplx,
    pub c: Real,
    /// Magnitude `|A + Bi|` would have without cancellation.
    pub scale: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub n: usize,
    pub pivot: usize,
    pub ab_modulus: Vec<f64>,
    pub ab_relative: Vec<f64>,
    pub discriminant: Vec<f64>,
    pub roots: Vec<[Complex64; 2]>,
    pub root_product: Vec<Complex64>,
    pub best_distance: f64,
    pub runner_up_distance: Option<f64>,
    pub double_root: bool,
    pub selected: Complex64,
    pub negative_input: bool,
}

#[derive(Clone, Debug)]
pub struct ReconState {
    coeffs: Vec<Cplx>,
    phase0: f64,
    phases: Vec<Vec<f64>>,
    diagnostics: Vec<StepDiagnostics>,
}

impl ReconState {
    pub fn new(c0: Cplx, phase0: f64) -> Self {
        ReconState { coeffs: vec![c0], phase0, phases: Vec::new(), diagnostics: Vec::new() }
    }

    /// Seeds a state with known coefficients `c_0..c_{n-1}`.
    pub fn from_coeffs(coeffs: Vec<Cplx>) -> Self {
        ReconState { coeffs, phase0: 0.0, phases: Vec::new(), diagnostics: Vec::new() }
    }

    /// The next interval to process.
    pub fn step(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Cplx] {
        &self.coeffs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    Ok,
    DegenerateSample { step: usize },
    AmbiguousRoot { step: usize },
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub generator: Generator,
    pub mode: Mode,
    pub coeffs: Vec<Cplx>,
    /// Phase of `f(t0)`.
    pub phase0: f64,
    /// `phases[n - 1][j]` is the decoded phase of `f(n + t_{n_j})`.
    pub phases: Vec<Vec<f64>>,
    pub status: Status,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl ReconstructionResult {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn coeffs_f64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(Cplx::to_c64).collect()
    }

    pub fn signal(&self) -> Option<CausalSignal> {
        CausalSignal::from_exact(self.generator.clone(), self.coeffs.clone()).ok()
    }

    pub fn selected_roots(&self) -> Vec<Complex64> {
        self.diagnostics.iter().map(|d| d.selected).collect()
    }

    fn from_state(state: ReconState, gen: &Generator, mode: Mode, status: Status) -> Self {
        ReconstructionResult {
            generator: gen.clone(),
            mode,
            coeffs: state.coeffs,
            phase0: state.phase0,
            phases: state.phases,
            status,
            diagnostics: state.diagnostics,
        }
    }
}

fn degenerate_phi(phi: Complex64, gen: &Generator, tol: f64) -> bool {
    phi.norm() <= tol * gen.peak()
}

pub fn quad_data(
    state: &ReconState,
    gen: &Generator,
    samples: &MagnitudeSamples,
    n: usize,
    jx: usize,
    jy: usize,
    tol: f64,
) -> Result<QuadraticData, PdcrError> {
    let (x, y) = (samples.point(n, jx), samples.point(n, jy));
    let phx64 = gen.eval(x);
    if degenerate_phi(phx64, gen, tol) {
        return Err(PdcrError::DegenerateSample { step: n });
    }
    let (phx, phy) = (Cplx::from_c64(phx64), Cplx::from_c64(gen.eval(y)));
    let vx = aux_v(&state.coeffs, gen, n, x)?;
    let vy = aux_v(&state.coeffs, gen, n, y)?;
    let (mx, my) = (samples.value(n, jx), samples.value(n, jy));
    let nx = phx.norm_sqr();
    let ny = phy.norm_sqr();
    let bracket = phx.conj() * &phy * &vy.conj() - vx.conj().scale(&ny);
    let ab = bracket.scale(&(mx.clone() / &nx));
    let ratio = &phy / &phx;
    let cross = (&vx * &vy.conj() * &ratio).re;
    let ny_nx = ny / &nx;
    let c = mx.clone().square() * &ny_nx;
    let c = my.clone().square() - vy.norm_sqr() + cross * 2u32 - c - vx.norm_sqr() * &ny_nx;
    let r = ny_nx.to_f64().sqrt();
    let sc = mx.to_f64().abs() * r * (vy.abs().to_f64() + vx.abs().to_f64() * r);
    Ok(QuadraticData { step: n, ab, c, scale: sc })
}

/// Real-path coefficients `(A, C)`; every quantity involved is real.
pub fn quad_data_real(
    state: &ReconState,
    gen: &Generator,
    samples: &MagnitudeSamples,
    n: usize,
    jx: usize,
    jy: usize,
    tol: f64,
) -> Result<(Real, Real), PdcrError> {
    if gen.is_complex() {
        return Err(PdcrError::ComplexGenerator);
    }
    let (x, y) = (samples.point(n, jx), samples.point(n, jy));
    let phx64 = gen.eval(x);
    if degenerate_phi(phx64, gen, tol) {
        return Err(PdcrError::DegenerateSample { step: n });
    }
    let (phx, phy) = (real(phx64.re), real(gen.eval(y).re));
    let vx = aux_v(&state.coeffs, gen, n, x)?.re;
    let vy = aux_v(&state.coeffs, gen, n, y)?.re;
    let (mx, my) = (samples.value(n, jx), samples.value(n, jy));
    let phx2 = phx.clone().square();
    let phy2 = phy.clone().square();
    let a = mx.clone() / &phx2 * (phx.clone() * &phy * &vy - vx.clone() * &phy2);
    let q = phy2 / phx2;
    let c = my.clone().square() - vy.clone().square() + vx.clone() * &vy * &phy / &phx * 2u32
        - q * (mx.clone().square() + vx.square());
    Ok((a, c))
}

/// Both roots of `(A + Bi) z^2 - C z + (A - Bi) = 0`. The larger-modulus
/// numerator is formed first and the second root taken from the product.
pub fn solve_phase_quadratic(q: &QuadraticData, tol: f64) -> Result<(Cplx, Cplx), PdcrError> {
    let m = q.ab.abs();
    if m.is_zero() || m.to_f64() <= tol * q.scale {
        return Err(PdcrError::AmbiguousRoot { step: q.step });
    }
    let disc = q.c.clone().square() - q.ab.norm_sqr() * 4u32;
    let sq = Cplx::from_real(disc).sqrt();
    let cz = Cplx::from_real(q.c.clone());
    let num = if q.c.is_sign_negative() { cz - sq } else { cz + sq };
    let two = real(2.0);
    let z1 = &num / &q.ab.scale(&two);
    let z2 = &q.ab.conj().scale(&two) / &num;
    Ok((z1, z2))
}

/// Outcome of matching the roots of two quadratics.
#[derive(Clone, Debug, PartialEq)]
pub struct RootMatch {
    pub root: Cplx,
    pub best: f64,
    pub runner_up: Option<f64>,
    pub double_root: bool,
}

/// The root of the first pair that (nearly) also solves the second, normalized
/// to unit modulus.
pub fn select_root(
    step: usize,
    first: &(Cplx, Cplx),
    second: &(Cplx, Cplx),
    opts: &PdcrOptions,
) -> Result<RootMatch, PdcrError> {
    let dist = |a: &Cplx, b: &Cplx| (a.clone() - b).abs().to_f64();
    let to_second = |z: &Cplx| dist(z, &second.0).min(dist(z, &second.1));
    if dist(&first.0, &first.1) < opts.double_root_tol {
        let mid = (first.0.clone() + &first.1).scale(&real(0.5));
        return Ok(RootMatch { best: to_second(&mid), root: mid.unit(), runner_up: None, double_root: true });
    }
    let (d1, d2) = (to_second(&first.0), to_second(&first.1));
    let (root, best, runner) = if d1 <= d2 { (&first.0, d1, d2) } else { (&first.1, d2, d1) };
    if best > opts.tie_ratio * runner {
        return Err(PdcrError::AmbiguousRoot { step });
    }
    Ok(RootMatch { root: root.unit(), best, runner_up: Some(runner), double_root: false })
}

/// `c_n = (z |f(n + x)| - v_n(x)) / phi(x)` with `x` the `j`-th point of interval `n`.
pub fn recover_coefficient(
    state: &ReconState,
    gen: &Generator,
    samples: &MagnitudeSamples,
    n: usize,
    j: usize,
    z: &Cplx,
    tol: f64,
) -> Result<Cplx, PdcrError> {
    let x = samples.point(n, j);
    let phx = gen.eval(x);
    if degenerate_phi(phx, gen, tol) {
        return Err(PdcrError::DegenerateSample { step: n });
    }
    let v = aux_v(&state.coeffs, gen, n, x)?;
    Ok((z.scale(samples.value(n, j)) - v) / &Cplx::from_c64(phx))
}

/// `sgn(C / A)`; zero counts as positive.
pub fn sign_decode(a_re: &Real, c_re: &Real) -> f64 {
    if c_re.is_zero() || a_re.is_sign_negative() == c_re.is_sign_negative() {
        1.0
    } else {
        -1.0
    }
}

fn pivot_index(samples: &MagnitudeSamples, gen: &Generator, n: usize, rule: Pivot) -> usize {
    match rule {
        Pivot::First => 0,
        Pivot::LargestGenerator => (0..samples.density())
            .map(|j| (j, gen.eval(samples.point(n, j)).norm()))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0,
    }
}

fn initial_coefficient(samples: &MagnitudeSamples, gen: &Generator, direction: &Cplx, tol: f64) -> Option<Cplx> {
    let ph = gen.eval(samples.t0());
    let m = samples.value0();
    if degenerate_phi(ph, gen, tol) || m.to_f64().abs() <= tol * gen.peak() {
        return None;
    }
    Some(direction.scale(m) / &Cplx::from_c64(ph))
}

fn decode_phases(state: &ReconState, gen: &Generator, samples: &MagnitudeSamples, n: usize, cn: &Cplx) -> Vec<f64> {
    (0..samples.density())
        .map(|j| {
            let t = samples.point(n, j);
            let v = aux_v(&state.coeffs, gen, n, t).unwrap_or_else(|_| Cplx::zero());
            (v + cn.mul_c64(gen.eval(t))).arg()
        })
        .collect()
}

fn negative_input(samples: &MagnitudeSamples, n: usize) -> bool {
    (0..samples.density()).any(|j| samples.value(n, j).is_sign_negative())
}

fn check_density(samples: &MagnitudeSamples, mode: Mode) -> Result<(), PdcrError> {
    if samples.density() != mode.density() {
        return Err(PdcrError::Density { expected: mode.density(), found: samples.density() });
    }
    Ok(())
}

fn complex_step(
    state: &mut ReconState,
    gen: &Generator,
    samples: &MagnitudeSamples,
    n: usize,
    opts: &PdcrOptions,
) -> Result<(), PdcrError> {
    let tol = opts.degeneracy_tol;
    let p = pivot_index(samples, gen, n, opts.pivot);
    let others: Vec<usize> = (0..samples.density()).filter(|&j| j != p).collect();
    let q1 = quad_data(state, gen, samples, n, p, others[0], tol)?;
    let q2 = quad_data(state, gen, samples, n, p, others[1], tol)?;
    let r1 = solve_phase_quadratic(&q1, tol)?;
    let r2 = solve_phase_quadratic(&q2, tol)?;
    let m = select_root(n, &r1, &r2, opts)?;
    let cn = recover_coefficient(state, gen, samples, n, p, &m.root, tol)?;
    let mut phases = decode_phases(state, gen, samples, n, &cn);
    phases[p] = m.root.arg();
    let qs = [&q1, &q2];
    let diag = StepDiagnostics {
        n,
        pivot: p,
        ab_modulus: qs.iter().map(|q| q.ab.abs().to_f64()).collect(),
        ab_relative: qs.iter().map(|q| q.ab.abs().to_f64() / q.scale).collect(),
        discriminant: qs.iter().map(|q| (q.c.clone().square() - q.ab.norm_sqr() * 4u32).to_f64()).collect(),
        roots: [&r1, &r2].iter().map(|r| [r.0.to_c64(), r.1.to_c64()]).collect(),
        root_product: [&r1, &r2].iter().map(|r| (&r.0 * &r.1).to_c64()).collect(),
        best_distance: m.best,
        runner_up_distance: m.runner_up,
        double_root: m.double_root,
        selected: m.root.to_c64(),
        negative_input: negative_input(samples, n),
    };
    state.coeffs.push(cn);
    state.phases.push(phases);
    state.diagnostics.push(diag);
    Ok(())
}

fn real_step(
    state: &mut ReconState,
    gen: &Generator,
    samples: &MagnitudeSamples,
    n: usize,
    opts: &PdcrOptions,
) -> Result<(), PdcrError> {
    let tol = opts.degeneracy_tol;
    let p = pivot_index(samples, gen, n, opts.pivot);
    let o = 1 - p;
    let (a, c) = quad_data_real(state, gen, samples, n, p, o, tol)?;
    // The scale of A without cancellation, shared with the complex path.
    let scale = quad_data(state, gen, samples, n, p, o, tol)?.scale;
    if a.is_zero() || a.to_f64().abs() <= tol * scale {
        return Err(PdcrError::DegenerateSample { step: n });
    }
    let q = QuadraticData { step: n, ab: Cplx::from_real(a.clone()), c: c.clone(), scale };
    let roots = solve_phase_quadratic(&q, tol)?;
    let z = Cplx::from_real(real(sign_decode(&a, &c)));
    let cn = Cplx::from_real(recover_coefficient(state, gen, samples, n, p, &z, tol)?.re);
    let mut phases = decode_phases(state, gen, samples, n, &cn);
    phases[p] = z.arg();
    let diag = StepDiagnostics {
        n,
        pivot: p,
        ab_modulus: vec![a.to_f64().abs()],
        ab_relative: vec![a.to_f64().abs() / scale],
        discriminant: vec![(c.square() - a.square() * 4u32).to_f64()],
        roots: vec![[roots.0.to_c64(), roots.1.to_c64()]],
        root_product: vec![(&roots.0 * &roots.1).to_c64()],
        best_distance: 0.0,
        runner_up_distance: None,
        double_root: true,
        selected: z.to_c64(),
        negative_input: negative_input(samples, n),
    };
    state.coeffs.push(cn);
    state.phases.push(phases);
    state.diagnostics.push(diag);
    Ok(())
}

fn run(
    samples: &MagnitudeSamples,
    gen: &Generator,
    opts: &PdcrOptions,
    mode: Mode,
) -> Result<ReconstructionResult, PdcrError> {
    let (direction, phase0) = match mode {
        Mode::Complex => (Cplx::from_c64(Complex64::from_polar(1.0, opts.initial_phase)).unit(), opts.initial_phase),
        Mode::Real => {
            let s = if opts.initial_sign < 0.0 { -1.0 } else { 1.0 };
            (Cplx::from_real(real(s)), if s < 0.0 { std::f64::consts::PI } else { 0.0 })
        }
    };
    let Some(mut c0) = initial_coefficient(samples, gen, &direction, opts.degeneracy_tol) else {
        let state = ReconState { coeffs: Vec::new(), phase0, phases: Vec::new(), diagnostics: Vec::new() };
        return Ok(ReconstructionResult::from_state(state, gen, mode, Status::DegenerateSample { step: 0 }));
    };
    if mode == Mode::Real {
        c0 = Cplx::from_real(c0.re);
    }
    let mut state = ReconState::new(c0, phase0);
    for n in 1..=samples.n_max() {
        let outcome = match mode {
            Mode::Complex => complex_step(&mut state, gen, samples, n, opts),
            Mode::Real => real_step(&mut state, gen, samples, n, opts),
        };
        let status = match outcome {
            Ok(()) => continue,
            Err(PdcrError::DegenerateSample { step }) => Status::DegenerateSample { step },
            Err(PdcrError::AmbiguousRoot { step }) => Status::AmbiguousRoot { step },
            Err(e) => return Err(e),
        };
        return Ok(ReconstructionResult::from_state(state, gen, mode, status));
    }
    Ok(ReconstructionResult::from_state(state, gen, mode, Status::Ok))
}

/// Recovers `c_0..c_{n_max}` from density-3 magnitude samples, up to one
/// unimodular factor fixed by `opts.initial_phase`.
pub fn reconstruct_complex(
    samples: &MagnitudeSamples,
    gen: &Generator,
    opts: &PdcrOptions,
) -> Result<ReconstructionResult, PdcrError> {
    check_density(samples, Mode::Complex)?;
    run(samples, gen, opts, Mode::Complex)
}

/// Recovers real `c_0..c_{n_max}` from density-2 samples, up to a sign fixed by
/// `opts.initial_sign`.
pub fn reconstruct_real(
    samples: &MagnitudeSamples,
    gen: &Generator,
    opts: &PdcrOptions,
) -> Result<ReconstructionResult, PdcrError> {
    if gen.is_complex() {
        return Err(PdcrError::ComplexGenerator);
    }
    check_density(samples, Mode::Real)?;
    run(samples, gen, opts, Mode::Real)
}

pub fn reconstruct(
    samples: &MagnitudeSamples,
    gen: &Generator,
    opts: &PdcrOptions,
    mode: Mode,
) -> Result<ReconstructionResult, PdcrError> {
    match mode {
        Mode::Complex => reconstruct_complex(samples, gen, opts),
        Mode::Real => reconstruct_real(samples, gen, opts),
    }
}

/// Recovers `c_0..c_{l-1}`, which determine `f` on `[0, l]`, from the samples
/// in intervals `0..l`.
pub fn reconstruct_local(
    samples: &MagnitudeSamples,
    gen: &Generator,
    opts: &PdcrOptions,
    mode: Mode,
    l: usize,
) -> Result<ReconstructionResult, PdcrError> {
    if l == 0 || l - 1 > samples.n_max() {
        return Err(PdcrError::LocalRange { l, available: samples.n_max() });
    }
    reconstruct(&samples.truncated(l - 1), gen, opts, mode)
}
