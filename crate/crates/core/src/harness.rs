//! Monte Carlo trials: random signals, random designs, optional noise,
//! reconstruction and alignment-invariant scoring.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{GeneratorError, MetricError, PdcrError, SamplingError, SignalError};
use crate::generators::{open_unit, Generator, GeneratorSpec};
use crate::pdcr::{reconstruct, Mode, PdcrOptions, ReconstructionResult, Status};
use crate::sampling::{add_noise, draw_points_with, measure, Design, MagnitudeSamples};
use crate::signal::{max_gap, CausalSignal};

/// Floor applied to log10 errors.
pub const ERROR_FLOOR: f64 = -16.0;

fn log_ratio(num: f64, den: f64) -> f64 {
    let r = num / den;
    if r > 0.0 {
        r.log10().max(ERROR_FLOOR)
    } else {
        ERROR_FLOOR
    }
}

fn l2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

fn check_lengths<T>(truth: &[T], recovered: &[T]) -> Result<(), MetricError> {
    if truth.len() != recovered.len() {
        return Err(MetricError::LengthMismatch(truth.len(), recovered.len()));
    }
    Ok(())
}

/// `log10(min_gamma |c - e^{i gamma} c~| / |c|)`, floored at -16.
pub fn error_complex(truth: &[Complex64], recovered: &[Complex64]) -> Result<f64, MetricError> {
    check_lengths(truth, recovered)?;
    let norm = l2(truth.iter().map(|c| c.norm()));
    if norm == 0.0 {
        return Err(MetricError::ZeroReference);
    }
    let d: Complex64 = truth.iter().zip(recovered).map(|(c, r)| c * r.conj()).sum();
    let u = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
    let resid = l2(truth.iter().zip(recovered).map(|(c, r)| (c - u * r).norm()));
    Ok(log_ratio(resid, norm))
}

/// `log10(min(|c - c~|, |c + c~|) / |c|)`, floored at -16.
pub fn error_real(truth: &[f64], recovered: &[f64]) -> Result<f64, MetricError> {
    check_lengths(truth, recovered)?;
    let norm = l2(truth.iter().copied());
    if norm == 0.0 {
        return Err(MetricError::ZeroReference);
    }
    let minus = l2(truth.iter().zip(recovered).map(|(c, r)| c - r));
    let plus = l2(truth.iter().zip(recovered).map(|(c, r)| c + r));
    Ok(log_ratio(minus.min(plus), norm))
}

pub fn alignment_error(mode: Mode, truth: &[Complex64], recovered: &[Complex64]) -> Result<f64, MetricError> {
    match mode {
        Mode::Complex => error_complex(truth, recovered),
        Mode::Real => {
            let t: Vec<f64> = truth.iter().map(|c| c.re).collect();
            let r: Vec<f64> = recovered.iter().map(|c| c.re).collect();
            error_real(&t, &r)
        }
    }
}

/// Fraction of errors at or below `x`.
pub fn cdf(errors: &[f64], x: f64) -> Result<f64, MetricError> {
    if errors.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(errors.iter().filter(|&&e| e <= x).count() as f64 / errors.len() as f64)
}

/// CDF on the grid `-16, -15.95, ..., 1`.
pub fn cdf_curve(errors: &[f64]) -> Result<Vec<[f64; 2]>, MetricError> {
    if errors.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((0..=340)
        .map(|i| {
            let x = ERROR_FLOOR + 0.05 * i as f64;
            let below = sorted.partition_point(|&e| e <= x);
            [x, below as f64 / sorted.len() as f64]
        })
        .collect())
}

/// Largest deviation between `|g|` on the design and the given magnitudes,
/// relative to the largest magnitude.
pub fn consistency_residual(recovered: &CausalSignal, samples: &MagnitudeSamples) -> f64 {
    let again = measure(recovered, samples.design());
    let rows = samples.rows();
    let peak = rows.iter().map(|(_, _, v)| v.to_f64().abs()).fold(0.0, f64::max);
    let worst = rows
        .iter()
        .zip(again.rows())
        .map(|((_, _, a), (_, _, b))| (a.clone() - b).to_f64().abs())
        .fold(0.0, f64::max);
    if peak > 0.0 {
        worst / peak
    } else {
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruthSource {
    /// The same coefficients in every trial.
    Fixed { coeffs: Vec<Complex64> },
    /// Fresh coefficients per trial: uniform on the unit disk (complex) or on
    /// `[-1, 1]` with `|c_0| >= 0.1` (real).
    Random { len: usize },
}

fn default_trials() -> usize {
    1000
}

fn default_threshold() -> f64 {
    -1.8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub generator: GeneratorSpec,
    pub truth: TruthSource,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub mode: Mode,
    pub n_max: usize,
    /// `None` runs noiseless.
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    pub seed: u64,
    #[serde(default)]
    pub options: PdcrOptions,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid trial configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Pdcr(#[from] PdcrError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl TrialConfig {
    pub fn validate(&self) -> Result<Generator, HarnessError> {
        let gen = self.generator.build()?;
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.threshold.is_nan() || self.threshold >= 0.0 {
            return bad("threshold must be negative");
        }
        if self.n_max == 0 {
            return bad("n_max must be at least 1");
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(SamplingError::Snr(snr).into());
            }
        }
        if self.mode == Mode::Real && gen.is_complex() {
            return Err(PdcrError::ComplexGenerator.into());
        }
        match &self.truth {
            TruthSource::Fixed { coeffs } => {
                CausalSignal::new(gen.clone(), coeffs)?;
                if self.mode == Mode::Real && coeffs.iter().any(|c| c.im != 0.0) {
                    return bad("real mode needs real coefficients");
                }
            }
            TruthSource::Random { len } if *len == 0 => return bad("random truth needs len >= 1"),
            TruthSource::Random { .. } => {}
        }
        Ok(gen)
    }
}

/// Per-trial stream: the master seed selects the key, the trial index the stream.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn random_coefficients<R: Rng + ?Sized>(rng: &mut R, len: usize, mode: Mode, support: usize) -> Vec<Complex64> {
    loop {
        let coeffs: Vec<Complex64> = (0..len)
            .map(|k| match mode {
                Mode::Complex => loop {
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    if z.norm_sqr() < 1.0 && z.norm_sqr() > 0.0 {
                        break z;
                    }
                },
                Mode::Real => loop {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    if (k > 0 && x != 0.0) || x.abs() >= 0.1 {
                        break Complex64::new(x, 0.0);
                    }
                },
            })
            .collect();
        if max_gap(&coeffs) + 1 < support {
            return coeffs;
        }
    }
}

/// Draws a design, redrawing any point where the generator is numerically zero.
pub fn draw_design<R: Rng + ?Sized>(rng: &mut R, gen: &Generator, density: usize, n_max: usize, tol: f64) -> Design {
    let mut design = draw_points_with(rng, density, n_max);
    let floor = tol * gen.peak();
    while gen.eval(design.t0).norm() <= floor {
        design.t0 = open_unit(rng);
    }
    for row in &mut design.points {
        for t in row.iter_mut() {
            while gen.eval(*t).norm() <= floor {
                *t = open_unit(rng);
            }
        }
    }
    design
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub error: f64,
    pub status: Status,
    /// Re-synthesis residual against the noiseless magnitudes (successful runs only).
    pub consistency: Option<f64>,
}

/// One complete trial, with everything needed to inspect it afterwards.
#[derive(Clone, Debug)]
pub struct TrialRun {
    pub truth: Vec<Complex64>,
    pub clean: MagnitudeSamples,
    pub samples: MagnitudeSamples,
    pub result: ReconstructionResult,
    pub outcome: TrialOutcome,
}

pub fn run_trial(cfg: &TrialConfig, gen: &Generator, trial: usize) -> Result<TrialRun, HarnessError> {
    let mut rng = trial_rng(cfg.seed, trial);
    let truth = match &cfg.truth {
        TruthSource::Fixed { coeffs } => coeffs.clone(),
        TruthSource::Random { len } => random_coefficients(&mut rng, *len, cfg.mode, gen.support_len()),
    };
    let f = CausalSignal::new(gen.clone(), &truth)?;
    let design = draw_design(&mut rng, gen, cfg.mode.density(), cfg.n_max, cfg.options.degeneracy_tol);
    let clean = measure(&f, &design);
    let samples = match cfg.snr_db {
        Some(snr) => add_noise(&clean, snr, &mut rng)?,
        None => clean.clone(),
    };
    let result = reconstruct(&samples, gen, &cfg.options, cfg.mode)?;
    let (error, consistency) = if result.is_ok() {
        let mut rec = result.coeffs_f64();
        rec.resize(truth.len(), Complex64::new(0.0, 0.0));
        let consistency = match (&cfg.snr_db, result.signal()) {
            (None, Some(sig)) => Some(consistency_residual(&sig, &clean)),
            _ => None,
        };
        (alignment_error(cfg.mode, &truth, &rec)?, consistency)
    } else {
        (0.0, None)
    };
    let outcome = TrialOutcome { trial, error, status: result.status, consistency };
    Ok(TrialRun { truth, clean, samples, result, outcome })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureTally {
    pub degenerate_sample: usize,
    pub ambiguous_root: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: TrialConfig,
    pub success_rate: f64,
    pub failures: FailureTally,
    pub max_consistency_residual: Option<f64>,
    pub outcomes: Vec<TrialOutcome>,
    #[serde(skip)]
    pub cdf: Vec<[f64; 2]>,
    #[serde(skip)]
    pub wall_clock_s: f64,
}

impl TrialReport {
    pub fn errors(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.error).collect()
    }
}

/// Runs `cfg.trials` independent trials in parallel on the current rayon pool.
/// Results do not depend on the number of threads.
pub fn run_trials(cfg: &TrialConfig) -> Result<TrialReport, HarnessError> {
    let start = Instant::now();
    let gen = cfg.validate()?;
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &gen, i).map(|r| r.outcome))
        .collect::<Result<Vec<_>, _>>()?;
    let errors: Vec<f64> = outcomes.iter().map(|o| o.error).collect();
    let mut failures = FailureTally::default();
    for o in &outcomes {
        match o.status {
            Status::Ok => {}
            Status::DegenerateSample { .. } => failures.degenerate_sample += 1,
            Status::AmbiguousRoot { .. } => failures.ambiguous_root += 1,
        }
    }
    let max_consistency_residual = outcomes.iter().filter_map(|o| o.consistency).reduce(f64::max);
    Ok(TrialReport {
        config: cfg.clone(),
        success_rate: cdf(&errors, cfg.threshold)?,
        failures,
        max_consistency_residual,
        cdf: cdf_curve(&errors)?,
        outcomes,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub report: TrialReport,
}

/// One `run_trials` per SNR value, same master seed throughout.
pub fn snr_sweep(cfg: &TrialConfig, snr_list: &[f64]) -> Result<Vec<SweepPoint>, HarnessError> {
    snr_list
        .iter()
        .map(|&snr| {
            let c = TrialConfig { snr_db: Some(snr), ..cfg.clone() };
            Ok(SweepPoint { snr_db: snr, report: run_trials(&c)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_error_examples() {
        let t = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(error_complex(&t, &t).unwrap(), ERROR_FLOOR);
        let rot: Vec<Complex64> = t.iter().map(|z| z * Complex64::from_polar(1.0, 0.7)).collect();
        assert_eq!(error_complex(&t, &rot).unwrap(), ERROR_FLOOR);
        let e = error_complex(&t, &[c(1.0, 0.0), c(0.1, 0.0)]).unwrap();
        assert!((e - (0.1f64).log10()).abs() < 1e-12);
        assert_eq!(error_complex(&t, &[c(1.0, 0.0)]).unwrap_err(), MetricError::LengthMismatch(2, 1));
        assert_eq!(error_complex(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap_err(), MetricError::ZeroReference);
    }

    #[test]
    fn closed_form_phase_matches_grid_search() {
        let t = [c(0.3, -0.4), c(0.9, 0.1), c(-0.2, 0.5)];
        let r = [c(0.1, 0.6), c(-0.3, 0.8), c(0.5, 0.0)];
        let norm = l2(t.iter().map(|z| z.norm()));
        let best = (0..10_000)
            .map(|i| {
                let u = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / 1e4);
                l2(t.iter().zip(&r).map(|(a, b)| (a - u * b).norm()))
            })
            .fold(f64::INFINITY, f64::min);
        let closed = 10f64.powf(error_complex(&t, &r).unwrap()) * norm;
        assert!(closed <= best + 1e-12);
        assert!((closed - best).abs() < 1e-6);
    }

    #[test]
    fn real_error_takes_better_sign() {
        let t = [1.0, -2.0];
        assert_eq!(error_real(&t, &[-1.0, 2.0]).unwrap(), ERROR_FLOOR);
        let e = error_real(&t, &[1.0, -2.1]).unwrap();
        assert!((e - (0.1 / 5f64.sqrt()).log10()).abs() < 1e-12);
        let e = error_real(&t, &[-1.0, 2.1]).unwrap();
        assert!((e - (0.1 / 5f64.sqrt()).log10()).abs() < 1e-12);
    }

    #[test]
    fn cdf_examples() {
        let e = [-3.0, -2.0, -1.0, 0.0];
        assert_eq!(cdf(&e, -1.8).unwrap(), 0.5);
        assert_eq!(cdf(&e, -1.0).unwrap(), 0.75);
        assert_eq!(cdf(&[], -1.0).unwrap_err(), MetricError::Empty);
        let curve = cdf_curve(&e).unwrap();
        assert_eq!(curve.len(), 341);
        assert_eq!(curve[0][0], -16.0);
        assert!((curve[340][0] - 1.0).abs() < 1e-12);
        assert_eq!(curve[340][1], 1.0);
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(errors in prop::collection::vec(-16.0f64..1.0, 1..50), a in -16.0f64..1.0, b in -16.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(cdf(&errors, lo).unwrap() <= cdf(&errors, hi).unwrap());
            let curve = cdf_curve(&errors).unwrap();
            prop_assert!(curve.windows(2).all(|w| w[0][1] <= w[1][1]));
        }

        #[test]
        fn error_is_phase_invariant(re in prop::collection::vec(-1.0f64..1.0, 4), im in prop::collection::vec(-1.0f64..1.0, 4), theta in 0.0f64..std::f64::consts::TAU) {
            let t: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| c(*a, *b)).collect();
            prop_assume!(l2(t.iter().map(|z| z.norm())) > 1e-3);
            let r: Vec<Complex64> = t.iter().map(|z| z * Complex64::from_polar(1.0, theta) + c(0.01, 0.0)).collect();
            let r2: Vec<Complex64> = r.iter().map(|z| z * Complex64::from_polar(1.0, 1.0)).collect();
            prop_assert!((error_complex(&t, &r).unwrap() - error_complex(&t, &r2).unwrap()).abs() < 1e-9);
        }
    }

    fn config(mode: Mode) -> TrialConfig {
        let generator = match mode {
            Mode::Complex => GeneratorSpec::chirp(4.0, 0.8, 1.0),
            Mode::Real => GeneratorSpec::chirp_real_part(10.0, -0.238, 1.0),
        };
        TrialConfig {
            generator,
            truth: TruthSource::Random { len: 8 },
            trials: 40,
            mode,
            n_max: 10,
            snr_db: None,
            threshold: -1.8,
            seed: 11,
            options: PdcrOptions::default(),
        }
    }

    #[test]
    fn random_truth_is_admissible() {
        let mut rng = trial_rng(3, 0);
        for _ in 0..200 {
            let z = random_coefficients(&mut rng, 12, Mode::Complex, 4);
            assert!(z.iter().all(|c| c.norm() < 1.0));
            assert!(max_gap(&z) < 3);
            let x = random_coefficients(&mut rng, 12, Mode::Real, 4);
            assert!(x.iter().all(|c| c.im == 0.0 && c.re.abs() <= 1.0));
            assert!(x[0].re.abs() >= 0.1);
        }
    }

    #[test]
    fn noiseless_trials_succeed() {
        for mode in [Mode::Complex, Mode::Real] {
            let rep = run_trials(&config(mode)).unwrap();
            assert_eq!(rep.success_rate, 1.0, "{mode:?}");
            assert!(rep.max_consistency_residual.unwrap() < 1e-8);
            assert_eq!(rep.outcomes.len(), 40);
        }
    }

    #[test]
    fn trials_are_reproducible_across_thread_counts() {
        let cfg = TrialConfig { snr_db: Some(120.0), ..config(Mode::Complex) };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_trials(&cfg)).unwrap();
        let b = four.install(|| run_trials(&cfg)).unwrap();
        let c = four.install(|| run_trials(&cfg)).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        assert_eq!(b.outcomes, c.outcomes);
        let other = run_trials(&TrialConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.outcomes, other.outcomes);
    }

    #[test]
    fn fixed_truth_and_failed_trials() {
        let cfg = TrialConfig {
            truth: TruthSource::Fixed { coeffs: vec![c(1.0, 0.0), c(0.5, 0.5)] },
            n_max: 3,
            trials: 5,
            ..config(Mode::Complex)
        };
        let gen = cfg.validate().unwrap();
        let run = run_trial(&cfg, &gen, 2).unwrap();
        assert_eq!(run.truth.len(), 2);
        assert!(run.outcome.error < -10.0);
        // Noise this strong typically breaks the recursion; failures score 0.
        let noisy = TrialConfig { snr_db: Some(0.0), trials: 30, ..config(Mode::Complex) };
        let rep = run_trials(&noisy).unwrap();
        for o in &rep.outcomes {
            if o.status != Status::Ok {
                assert_eq!(o.error, 0.0);
                assert!(o.consistency.is_none());
            }
        }
        assert_eq!(rep.failures.ambiguous_root + rep.failures.degenerate_sample + rep.outcomes.iter().filter(|o| o.status == Status::Ok).count(), 30);
    }

    #[test]
    fn config_validation() {
        let ok = config(Mode::Complex);
        assert!(ok.validate().is_ok());
        assert!(TrialConfig { trials: 0, ..ok.clone() }.validate().is_err());
        assert!(TrialConfig { threshold: 0.5, ..ok.clone() }.validate().is_err());
        assert!(TrialConfig { n_max: 0, ..ok.clone() }.validate().is_err());
        assert!(TrialConfig { snr_db: Some(f64::NAN), ..ok.clone() }.validate().is_err());
        assert!(TrialConfig { mode: Mode::Real, ..ok.clone() }.validate().is_err());
        assert!(TrialConfig { truth: TruthSource::Random { len: 0 }, ..ok.clone() }.validate().is_err());
        let real = config(Mode::Real);
        assert!(TrialConfig { truth: TruthSource::Fixed { coeffs: vec![c(1.0, 0.5)] }, ..real }.validate().is_err());
        let json = r#"{"generator":{"kind":"chirp","a":4,"b":0.8,"p":1},"truth":{"source":"random","len":4},"mode":"complex","n_max":6,"seed":1,"bogus":1}"#;
        assert!(serde_json::from_str::<TrialConfig>(json).is_err());
        let json = json.replace(r#","bogus":1"#, "");
        let cfg: TrialConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg.trials, 1000);
        assert_eq!(cfg.threshold, -1.8);
    }

    #[test]
    fn sweep_points_follow_the_list() {
        let cfg = TrialConfig { trials: 4, ..config(Mode::Complex) };
        let pts = snr_sweep(&cfg, &[200.0, 300.0]).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].report.config.snr_db, Some(300.0));
    }
}
