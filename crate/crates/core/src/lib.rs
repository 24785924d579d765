//! Reconstruction of causal signals in shift-invariant spaces from
//! magnitude-only random samples.
//!
//! ```
//! use sis_phaseless::prelude::*;
//! use num_complex::Complex64;
//!
//! let gen = Generator::chirp(4.0, 0.8, 1.0).unwrap();
//! let coeffs = [Complex64::new(0.5, 0.2), Complex64::new(-0.3, 0.7), Complex64::new(0.1, -0.4)];
//! let f = CausalSignal::new(gen.clone(), &coeffs).unwrap();
//! let design = draw_points(&SamplePlan::new(3, 5, 11).unwrap());
//! let samples = measure(&f, &design);
//! let result = reconstruct_complex(&samples, &gen, &PdcrOptions::default()).unwrap();
//! let err = error_complex(&coeffs, &result.coeffs_f64()[..3]).unwrap();
//! assert!(err < -10.0);
//! ```

pub mod error;
pub mod generators;
pub mod harness;
pub mod io;
pub mod numeric;
pub mod pdcr;
pub mod sampling;
pub mod signal;

pub mod prelude {
    pub use crate::generators::{build_system, check_ghc, Generator, GeneratorSpec, GhcReport, GhcVerdict, SystemLabel};
    pub use crate::harness::{cdf, error_complex, error_real, run_trials, snr_sweep, TrialConfig, TrialReport, TruthSource};
    pub use crate::pdcr::{
        reconstruct, reconstruct_complex, reconstruct_local, reconstruct_real, Mode, PdcrOptions, Pivot,
        ReconstructionResult, Status,
    };
    pub use crate::sampling::{add_noise, draw_points, measure, Design, MagnitudeSamples, SamplePlan};
    pub use crate::signal::{ambiguous_pair, index_set, max_gap, CausalSignal};
}
