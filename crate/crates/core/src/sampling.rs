//! Random sample designs, magnitude measurement and additive noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::SamplingError;
use crate::generators::open_unit;
use crate::numeric::{real, Real};
use crate::signal::CausalSignal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub density: usize,
    pub n_max: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(density: usize, n_max: usize, seed: u64) -> Result<Self, SamplingError> {
        check_density(density)?;
        if n_max == 0 {
            return Err(SamplingError::EmptyPlan);
        }
        Ok(SamplePlan { density, n_max, seed })
    }

    pub fn sample_count(&self) -> usize {
        1 + self.density * self.n_max
    }
}

fn check_density(density: usize) -> Result<(), SamplingError> {
    if density == 2 || density == 3 {
        Ok(())
    } else {
        Err(SamplingError::Density(density))
    }
}

/// Sample offsets: `t0` in interval 0 and `points[n - 1]` in interval `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub density: usize,
    pub t0: f64,
    pub points: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(density: usize, t0: f64, points: Vec<Vec<f64>>) -> Result<Self, SamplingError> {
        check_density(density)?;
        check_offset(t0)?;
        for (i, row) in points.iter().enumerate() {
            if row.len() != density {
                return Err(SamplingError::IntervalSize { interval: i + 1, found: row.len(), expected: density });
            }
            for &t in row {
                check_offset(t)?;
            }
        }
        Ok(Design { density, t0, points })
    }

    pub fn n_max(&self) -> usize {
        self.points.len()
    }

    pub fn sample_count(&self) -> usize {
        1 + self.density * self.points.len()
    }

    /// `(n, t)` for every sample, interval 0 first.
    pub fn locations(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        std::iter::once((0, self.t0))
            .chain(self.points.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |&t| (i + 1, t))))
    }
}

fn check_offset(t: f64) -> Result<(), SamplingError> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(SamplingError::Offset(t))
    }
}

pub fn draw_points(plan: &SamplePlan) -> Design {
    draw_points_with(&mut ChaCha8Rng::seed_from_u64(plan.seed), plan.density, plan.n_max)
}

/// Draws a design from an existing stream; the draw order is `t0`, then
/// interval by interval.
pub fn draw_points_with<R: Rng + ?Sized>(rng: &mut R, density: usize, n_max: usize) -> Design {
    let t0 = open_unit(rng);
    let points = (0..n_max).map(|_| (0..density).map(|_| open_unit(rng)).collect()).collect();
    Design { density, t0, points }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMeta {
    pub snr_db: f64,
    pub sigma2: f64,
    pub energy: f64,
    pub count: usize,
}

/// Magnitudes `|f|` on a design. Values keep the working precision so that
/// noiseless data carries the full precision of the synthesis.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnitudeSamples {
    design: Design,
    value0: Real,
    values: Vec<Vec<Real>>,
    noise: Option<NoiseMeta>,
}

impl MagnitudeSamples {
    pub fn new(design: Design, value0: Real, values: Vec<Vec<Real>>) -> Result<Self, SamplingError> {
        if values.len() != design.points.len() {
            return Err(SamplingError::IntervalSize {
                interval: values.len().min(design.points.len()) + 1,
                found: 0,
                expected: design.density,
            });
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != design.density {
                return Err(SamplingError::IntervalSize { interval: i + 1, found: row.len(), expected: design.density });
            }
        }
        Ok(MagnitudeSamples { design, value0, values, noise: None })
    }

    pub fn with_noise_meta(mut self, meta: Option<NoiseMeta>) -> Self {
        self.noise = meta;
        self
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn density(&self) -> usize {
        self.design.density
    }

    pub fn n_max(&self) -> usize {
        self.design.n_max()
    }

    pub fn t0(&self) -> f64 {
        self.design.t0
    }

    pub fn value0(&self) -> &Real {
        &self.value0
    }

    /// Offset of point `j` in interval `n >= 1`.
    pub fn point(&self, n: usize, j: usize) -> f64 {
        self.design.points[n - 1][j]
    }

    /// Magnitude at point `j` of interval `n >= 1`.
    pub fn value(&self, n: usize, j: usize) -> &Real {
        &self.values[n - 1][j]
    }

    pub fn noise(&self) -> Option<&NoiseMeta> {
        self.noise.as_ref()
    }

    pub fn sample_count(&self) -> usize {
        self.design.sample_count()
    }

    /// `(n, t, value)` rows, interval 0 first.
    pub fn rows(&self) -> Vec<(usize, f64, Real)> {
        let mut out = vec![(0, self.design.t0, self.value0.clone())];
        for (i, (pts, vals)) in self.design.points.iter().zip(&self.values).enumerate() {
            out.extend(pts.iter().zip(vals).map(|(&t, v)| (i + 1, t, v.clone())));
        }
        out
    }

    /// Keeps intervals `0..=n_max` only.
    pub fn truncated(&self, n_max: usize) -> MagnitudeSamples {
        let n = n_max.min(self.n_max());
        MagnitudeSamples {
            design: Design {
                density: self.design.density,
                t0: self.design.t0,
                points: self.design.points[..n].to_vec(),
            },
            value0: self.value0.clone(),
            values: self.values[..n].to_vec(),
            noise: self.noise,
        }
    }
}

pub fn measure(f: &CausalSignal, design: &Design) -> MagnitudeSamples {
    let value0 = f.evaluate_at(0, design.t0).abs();
    let values = design
        .points
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|&t| f.evaluate_at(i + 1, t).abs()).collect())
        .collect();
    MagnitudeSamples { design: design.clone(), value0, values, noise: None }
}

/// `sigma^2 = |F|^2 / (K 10^(snr/10))` with `K` the sample count.
pub fn noise_variance(energy: f64, count: usize, snr_db: f64) -> f64 {
    energy / (count as f64 * 10f64.powf(snr_db / 10.0))
}

pub fn add_noise<R: Rng + ?Sized>(
    samples: &MagnitudeSamples,
    snr_db: f64,
    rng: &mut R,
) -> Result<MagnitudeSamples, SamplingError> {
    if !snr_db.is_finite() {
        return Err(SamplingError::Snr(snr_db));
    }
    let rows = samples.rows();
    let energy: f64 = rows.iter().map(|(_, _, v)| v.to_f64().powi(2)).sum();
    let count = rows.len();
    let sigma2 = noise_variance(energy, count, snr_db);
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|_| SamplingError::Snr(snr_db))?;
    let mut out = samples.clone();
    out.value0 += real(normal.sample(rng));
    for row in &mut out.values {
        for v in row.iter_mut() {
            *v += real(normal.sample(rng));
        }
    }
    out.noise = Some(NoiseMeta { snr_db, sigma2, energy, count });
    Ok(out)
}
