use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use sis_phaseless::generators::{build_system, check_ghc, GhcVerdict};
use sis_phaseless::harness::{alignment_error, draw_design, run_trials, trial_rng, TrialConfig};
use sis_phaseless::io::{
    read_coefficients, read_samples, write_coefficients, write_noise_meta, write_report, write_result_json,
    write_samples,
};
use sis_phaseless::pdcr::{reconstruct, reconstruct_complex, reconstruct_local, Mode, PdcrOptions, Status};
use sis_phaseless::sampling::{add_noise, measure};
use sis_phaseless::signal::{ambiguous_pair, CausalSignal};

mod config;

use config::{load, resolve, AmbiguityConfig, GhcConfig, MonteCarloConfig, ReconstructConfig};

#[derive(Parser, Debug)]
#[command(name = "sisphase", version, about = "Phaseless sampling and reconstruction of causal SIS signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Randomized linear-independence check of a generator's function system.
    CheckGhc,
    /// Reconstruct one signal from magnitude samples.
    Reconstruct,
    /// Monte Carlo success rates, optionally over an (a, SNR) grid.
    Montecarlo,
    /// Two signals with equal magnitudes that are not unimodular multiples.
    AmbiguityDemo,
}

enum Outcome {
    Done,
    Inconclusive,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Inconclusive) => ExitCode::from(2),
        Ok(Outcome::Failed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let config = cli.config.as_deref().ok_or_else(|| anyhow!("--config is required"))?;
    match cli.command {
        Command::CheckGhc => cmd_check_ghc(cli, config),
        Command::Reconstruct => cmd_reconstruct(cli, config),
        Command::Montecarlo => cmd_montecarlo(cli, config),
        Command::AmbiguityDemo => cmd_ambiguity_demo(cli, config),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn cmd_check_ghc(cli: &Cli, path: &Path) -> Result<Outcome> {
    let cfg: GhcConfig = load(path)?;
    let gen = cfg.generator.build()?;
    let system = build_system(&gen, cfg.system)?;
    let report = check_ghc(&system, cfg.tuples, cli.seed.unwrap_or(cfg.seed), cfg.tolerance);
    serde_json::to_writer_pretty(create(&cli.out, "ghc_report.json")?, &report)?;
    println!(
        "{gen} {}: {:?} after {} tuple(s), max |det| {:.3e}",
        cfg.system, report.verdict, report.tuples_tested, report.max_abs_determinant
    );
    Ok(match report.verdict {
        GhcVerdict::Plausible => Outcome::Done,
        GhcVerdict::Inconclusive => Outcome::Inconclusive,
    })
}

fn cmd_reconstruct(cli: &Cli, path: &Path) -> Result<Outcome> {
    let cfg: ReconstructConfig = load(path)?;
    let gen = cfg.generator.build()?;
    let tol = cfg.options.degeneracy_tol;
    let (samples, truth) = match (&cfg.truth, &cfg.samples) {
        (Some(t), None) => {
            let truth = read_coefficients(File::open(resolve(path, t)).context("opening truth CSV")?)?;
            if cfg.mode == Mode::Real && truth.iter().any(|c| c.im != 0.0) {
                bail!("real mode needs real coefficients");
            }
            let seed = cli.seed.or(cfg.seed).ok_or_else(|| anyhow!("synthesizing samples needs a seed"))?;
            let f = CausalSignal::new(gen.clone(), &truth)?;
            let n_max = cfg.n_max.unwrap_or(truth.len() - 1);
            if n_max == 0 {
                bail!("n_max must be at least 1");
            }
            let mut rng = trial_rng(seed, 0);
            let design = draw_design(&mut rng, &gen, cfg.mode.density(), n_max, tol);
            let clean = measure(&f, &design);
            let samples = match cfg.snr_db {
                Some(snr) => add_noise(&clean, snr, &mut rng)?,
                None => clean,
            };
            write_samples(create(&cli.out, "samples.csv")?, &samples)?;
            write_noise_meta(create(&cli.out, "noise.json")?, samples.noise())?;
            (samples, Some(truth))
        }
        (None, Some(s)) => {
            let file = File::open(resolve(path, s)).context("opening samples CSV")?;
            (read_samples(file, cfg.mode.density())?, None)
        }
        _ => bail!("config needs exactly one of `truth` and `samples`"),
    };
    let result = match cfg.local {
        Some(l) => reconstruct_local(&samples, &gen, &cfg.options, cfg.mode, l)?,
        None => reconstruct(&samples, &gen, &cfg.options, cfg.mode)?,
    };
    let error = match (&truth, result.is_ok()) {
        (Some(t), true) => {
            let mut rec = result.coeffs_f64();
            rec.resize(t.len(), Complex64::new(0.0, 0.0));
            let n = rec.len().min(cfg.local.unwrap_or(usize::MAX));
            Some(alignment_error(cfg.mode, &t[..n], &rec[..n])?)
        }
        _ => None,
    };
    write_coefficients(create(&cli.out, "coefficients.csv")?, &result.coeffs_f64())?;
    write_result_json(create(&cli.out, "result.json")?, &result, error)?;
    match error {
        Some(e) => println!("status {:?}, {} coefficients, error {e:.2}", result.status, result.coeffs.len()),
        None => println!("status {:?}, {} coefficients", result.status, result.coeffs.len()),
    }
    Ok(if result.is_ok() { Outcome::Done } else { Outcome::Failed })
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn cmd_montecarlo(cli: &Cli, path: &Path) -> Result<Outcome> {
    let cfg: MonteCarloConfig = load(path)?;
    let Some(seed) = cli.seed else {
        match cfg.seed {
            Some(s) => bail!("montecarlo needs --seed (the config's seed {s} is not used on its own)"),
            None => bail!("montecarlo needs --seed"),
        }
    };
    let base = cfg.trial_config(seed);
    let Some(sweep) = &cfg.sweep else {
        let report = run_trials(&base)?;
        write_report(&cli.out, &report)?;
        println!(
            "success rate {:.4} over {} trials ({} ambiguous, {} degenerate) in {:.1}s",
            report.success_rate,
            report.outcomes.len(),
            report.failures.ambiguous_root,
            report.failures.degenerate_sample,
            report.wall_clock_s
        );
        return Ok(Outcome::Done);
    };
    let rates: Vec<Option<f64>> =
        if sweep.a.is_empty() { vec![cfg.generator.a] } else { sweep.a.iter().copied().map(Some).collect() };
    let mut table = create(&cli.out, "table.csv")?;
    let mut header = vec!["a".to_string()];
    header.extend(sweep.snr_db.iter().copied().map(fmt_num));
    let mut rows = vec![header];
    for a in rates {
        let generator = match (a, sweep.a.is_empty()) {
            (Some(a), false) => cfg.with_rate(a)?,
            _ => cfg.generator.clone(),
        };
        let mut row = vec![a.map(fmt_num).unwrap_or_default()];
        for &snr in &sweep.snr_db {
            let point = TrialConfig { generator: generator.clone(), snr_db: Some(snr), ..base.clone() };
            let report = run_trials(&point)?;
            let name = match a {
                Some(a) => format!("a{}_snr{}", fmt_num(a), fmt_num(snr)),
                None => format!("snr{}", fmt_num(snr)),
            };
            write_report(&cli.out.join(name), &report)?;
            println!("a={} snr={snr}: success rate {:.4}", row[0], report.success_rate);
            row.push(format!("{:.4}", report.success_rate));
        }
        rows.push(row);
    }
    use std::io::Write;
    for r in rows {
        writeln!(table, "{}", r.join(","))?;
    }
    table.flush()?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct PairReconstruction {
    status: Status,
    error_vs_f: Option<f64>,
    error_vs_g: Option<f64>,
}

#[derive(Serialize)]
struct DemoReport {
    generator: String,
    alpha: f64,
    beta: f64,
    coeffs_f: Vec<[f64; 2]>,
    coeffs_g: Vec<[f64; 2]>,
    /// Expected `e^{i(2 alpha - beta)}`.
    c_tilde_1: [f64; 2],
    grid_points: usize,
    max_magnitude_gap: f64,
    /// `min_theta |c - e^{i theta} c~| / |c|` over the same number of angles.
    alignment_residual: f64,
    seed: u64,
    from_f_samples: PairReconstruction,
    from_g_samples: PairReconstruction,
}

fn pairs(c: &[Complex64]) -> Vec<[f64; 2]> {
    c.iter().map(|z| [z.re, z.im]).collect()
}

fn cmd_ambiguity_demo(cli: &Cli, path: &Path) -> Result<Outcome> {
    let cfg: AmbiguityConfig = load(path)?;
    if cfg.grid == 0 {
        bail!("grid must be at least 1");
    }
    let base = cfg.generator.build()?;
    let (f, g) = ambiguous_pair(&base, cfg.alpha, cfg.beta, cfg.n)?;
    let span = (cfg.n + f.support_len()) as f64;
    let mut grid = csv_writer(create(&cli.out, "grid.csv")?);
    grid.write_record(["x", "abs_f", "abs_g"])?;
    let mut gap = 0.0f64;
    for i in 0..cfg.grid {
        let x = span * i as f64 / cfg.grid as f64;
        let (a, b) = (f.evaluate(x).norm(), g.evaluate(x).norm());
        gap = gap.max((a - b).abs());
        grid.write_record([x.to_string(), a.to_string(), b.to_string()])?;
    }
    grid.flush()?;
    let c = f.coeffs_f64();
    let ct = g.coeffs_f64();
    let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let residual = (0..cfg.grid)
        .map(|i| {
            let r = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / cfg.grid as f64);
            c.iter().zip(&ct).map(|(a, b)| (a - r * b).norm_sqr()).sum::<f64>().sqrt() / norm
        })
        .fold(f64::INFINITY, f64::min);

    let seed = cli.seed.unwrap_or(cfg.seed);
    let gen = f.generator().clone();
    let opts = PdcrOptions::default();
    let design = draw_design(&mut trial_rng(seed, 0), &gen, Mode::Complex.density(), cfg.n + 2, opts.degeneracy_tol);
    let recon = |s: &CausalSignal| -> Result<PairReconstruction> {
        let r = reconstruct_complex(&measure(s, &design), &gen, &opts)?;
        if !r.is_ok() {
            return Ok(PairReconstruction { status: r.status, error_vs_f: None, error_vs_g: None });
        }
        let mut rec = r.coeffs_f64();
        rec.truncate(c.len());
        Ok(PairReconstruction {
            status: r.status,
            error_vs_f: Some(alignment_error(Mode::Complex, &c, &rec)?),
            error_vs_g: Some(alignment_error(Mode::Complex, &ct, &rec)?),
        })
    };
    let report = DemoReport {
        generator: gen.to_string(),
        alpha: cfg.alpha,
        beta: cfg.beta,
        coeffs_f: pairs(&c),
        coeffs_g: pairs(&ct),
        c_tilde_1: [ct[1].re, ct[1].im],
        grid_points: cfg.grid,
        max_magnitude_gap: gap,
        alignment_residual: residual,
        seed,
        from_f_samples: recon(&f)?,
        from_g_samples: recon(&g)?,
    };
    serde_json::to_writer_pretty(create(&cli.out, "demo.json")?, &report)?;
    println!("max magnitude gap {gap:.3e}, alignment residual {residual:.4}");
    Ok(Outcome::Done)
}

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}
