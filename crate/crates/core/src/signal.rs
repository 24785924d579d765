//! Causal signals `f = sum_{k >= 0} c_k phi(. - k)` with finitely many coefficients.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;

use crate::error::SignalError;
use crate::generators::Generator;
use crate::numeric::{real, Cplx};

#[derive(Clone, Debug)]
pub struct CausalSignal {
    generator: Generator,
    coeffs: Vec<Cplx>,
}

impl CausalSignal {
    pub fn new(generator: Generator, coeffs: &[Complex64]) -> Result<Self, SignalError> {
        Self::from_exact(generator, coeffs.iter().copied().map(Cplx::from_c64).collect())
    }

    pub fn from_real(generator: Generator, coeffs: &[f64]) -> Result<Self, SignalError> {
        Self::from_exact(generator, coeffs.iter().map(|&c| Cplx::from_real(real(c))).collect())
    }

    /// Builds a signal from extended-precision coefficients (as produced by reconstruction).
    pub fn from_exact(generator: Generator, coeffs: Vec<Cplx>) -> Result<Self, SignalError> {
        let first = coeffs.first().ok_or(SignalError::Empty)?;
        if first.is_zero() {
            return Err(SignalError::ZeroLeadingCoefficient);
        }
        Ok(CausalSignal { generator, coeffs })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn coeffs(&self) -> &[Cplx] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(Cplx::to_c64).collect()
    }

    /// Largest index with a nonzero coefficient.
    pub fn max_index(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn is_real(&self) -> bool {
        !self.generator.is_complex() && self.coeffs.iter().all(|c| c.im.is_zero())
    }

    pub fn support_len(&self) -> usize {
        self.generator.support_len()
    }

    /// `f(x)` at an arbitrary real location.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        let s = self.support_len() as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let u = x - *k as f64;
                u > 0.0 && u < s
            })
            .map(|(k, c)| c.to_c64() * self.generator.eval(x - k as f64))
            .sum()
    }

    /// `f(n + t)` in extended precision, with each generator argument
    /// formed as `(n - k) + t`.
    pub fn evaluate_at(&self, n: usize, t: f64) -> Cplx {
        let s = self.support_len();
        let lo = (n + 1).saturating_sub(s);
        let hi = n.min(self.coeffs.len().saturating_sub(1));
        let mut acc = Cplx::zero();
        if self.coeffs.is_empty() {
            return acc;
        }
        for k in lo..=hi {
            acc = acc + self.coeffs[k].mul_c64(self.generator.eval_shifted((n - k) as i64, t));
        }
        acc
    }
}

/// The index set `I_n`: `{0..n-1}` while `n <= s-1`, else `{n-s+1..n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    pub n: usize,
    pub s: usize,
    pub members: Range<usize>,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn index_set(n: usize, s: usize) -> Result<IndexSet, SignalError> {
    if n == 0 {
        return Err(SignalError::ZeroIndex);
    }
    if s < 2 {
        return Err(SignalError::Support(s));
    }
    let start = if n < s { 0 } else { n + 1 - s };
    Ok(IndexSet { n, s, members: start..n })
}

/// `v_{n,f}(t) = sum_{k in I_n} c_k phi(n + t - k)` from the coefficients known so far.
pub fn aux_v(coeffs_so_far: &[Cplx], gen: &Generator, n: usize, t: f64) -> Result<Cplx, SignalError> {
    let set = index_set(n, gen.support_len())?;
    if coeffs_so_far.len() < n {
        return Err(SignalError::MissingCoefficient(coeffs_so_far.len()));
    }
    Ok(set
        .members
        .map(|k| coeffs_so_far[k].mul_c64(gen.eval_shifted((n - k) as i64, t)))
        .fold(Cplx::zero(), |a, b| a + b))
}

/// Longest run of zero coefficients `c_i..c_{i+g-1}` (`i >= 1`) that is
/// followed by a nonzero coefficient; 0 if there is none.
pub fn max_gap(coeffs: &[Complex64]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for c in coeffs.iter().skip(1) {
        if *c == Complex64::new(0.0, 0.0) {
            run += 1;
        } else {
            best = best.max(run);
            run = 0;
        }
    }
    best
}

/// Necessary condition for nonseparability: `max_gap < s - 1`.
pub fn is_nonseparable_candidate(f: &CausalSignal) -> bool {
    max_gap(&f.coeffs_f64()) + 1 < f.support_len()
}

/// Two causal signals over `exp(i alpha x) varphi(x)` with identical moduli
/// everywhere that are not unimodular multiples of each other.
///
/// `c_0 = 1`, `c_1 = exp(i beta)`, `c_k = 1` for `2 <= k <= n`; the partner has
/// `exp(2 i alpha k) conj(c_k)`.
pub fn ambiguous_pair(
    varphi: &Generator,
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<(CausalSignal, CausalSignal), SignalError> {
    if n < 2 {
        return Err(SignalError::TooShort(n));
    }
    let diff = (alpha - beta) / PI;
    if (diff - diff.round()).abs() < 1e-12 {
        return Err(SignalError::DegenerateModulation { alpha, beta });
    }
    let phi = Generator::modulated(varphi.clone(), alpha)?;
    let mut coeffs = vec![Complex64::new(1.0, 0.0); n + 1];
    coeffs[1] = Complex64::from_polar(1.0, beta);
    let partner: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| Complex64::from_polar(1.0, 2.0 * alpha * k as f64) * c.conj())
        .collect();
    Ok((CausalSignal::new(phi.clone(), &coeffs)?, CausalSignal::new(phi, &partner)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chirp() -> Generator {
        Generator::chirp(4.0, 0.8, 1.0).unwrap()
    }

    #[test]
    fn single_term_signal() {
        let f = CausalSignal::new(chirp(), &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!((f.evaluate(2.0).re - 1.49468).abs() < 1e-4);
        assert_eq!(f.evaluate(-0.5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn two_term_signal() {
        let g = chirp();
        let f = CausalSignal::new(g.clone(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        // Frozen from a 50-digit evaluation of phi(2.5) + i phi(1.5).
        let expected = Complex64::new(0.4022806397314812, 0.06508418814918702);
        assert!((f.evaluate(2.5) - expected).norm() < 1e-13, "{}", f.evaluate(2.5));
        let direct = g.eval(2.5) + Complex64::new(0.0, 1.0) * g.eval(1.5);
        assert!((f.evaluate(2.5) - direct).norm() < 1e-15);
    }

    #[test]
    fn rejects_zero_leading_coefficient() {
        assert_eq!(
            CausalSignal::new(chirp(), &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap_err(),
            SignalError::ZeroLeadingCoefficient
        );
    }

    #[test]
    fn max_index_skips_trailing_zeros() {
        let c = [1.0, 2.0, 0.0, 3.0, 0.0, 0.0].map(|v| Complex64::new(v, 0.0));
        assert_eq!(CausalSignal::new(chirp(), &c).unwrap().max_index(), 3);
    }

    #[test]
    fn index_sets() {
        assert_eq!(index_set(1, 4).unwrap().members, 0..1);
        assert_eq!(index_set(3, 4).unwrap().members, 0..3);
        assert_eq!(index_set(5, 4).unwrap().members, 2..5);
        assert_eq!(index_set(0, 4).unwrap_err(), SignalError::ZeroIndex);
        for n in 1..=50 {
            for s in 2..=8 {
                let set = index_set(n, s).unwrap();
                assert_eq!(set.len(), n.min(s - 1));
                assert!(set.members.clone().all(|k| k < n));
            }
        }
    }

    #[test]
    fn aux_v_first_step() {
        let g = chirp();
        let c0 = Cplx::from_c64(Complex64::new(0.3, -0.7));
        let v = aux_v(&[c0], &g, 1, 0.4).unwrap();
        let expected = Complex64::new(0.3, -0.7) * g.eval(1.4);
        assert!((v.to_c64() - expected).norm() < 1e-15);
    }

    #[test]
    fn aux_v_zero_coefficients() {
        let c = vec![Cplx::from_real(real(1.0)), Cplx::zero(), Cplx::zero(), Cplx::zero(), Cplx::zero()];
        assert!(aux_v(&c, &chirp(), 5, 0.3).unwrap().is_zero());
    }

    #[test]
    fn aux_v_missing_coefficient() {
        assert_eq!(
            aux_v(&[Cplx::from_real(real(1.0))], &chirp(), 3, 0.5).unwrap_err(),
            SignalError::MissingCoefficient(1)
        );
    }

    #[test]
    fn aux_v_matches_full_sum_minus_new_term() {
        let g = chirp();
        let c: Vec<Complex64> =
            (0..7).map(|k| Complex64::new(0.5 + 0.1 * k as f64, (k as f64 * 1.3).sin())).collect();
        let f = CausalSignal::new(g.clone(), &c).unwrap();
        let x = 0.61;
        let v = aux_v(f.coeffs(), &g, 5, x).unwrap();
        let oracle = f.evaluate_at(5, x) - f.coeffs()[5].mul_c64(g.eval(x));
        assert!((v.clone() - oracle).abs().to_f64() < 1e-60);
        let explicit = c[2] * g.eval(3.0 + x) + c[3] * g.eval(2.0 + x) + c[4] * g.eval(1.0 + x);
        assert!((v.to_c64() - explicit).norm() < 1e-14);
    }

    #[test]
    fn gaps() {
        let z = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        assert_eq!(max_gap(&z(&[1.0, 1.0, 1.0])), 0);
        assert_eq!(max_gap(&z(&[1.0, 0.0, 0.0, 1.0])), 2);
        assert_eq!(max_gap(&z(&[1.0, 0.0, 0.0, 0.0])), 0);
        let g = chirp();
        let sep = CausalSignal::new(g.clone(), &z(&[1.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(!is_nonseparable_candidate(&sep));
        let ok = CausalSignal::new(g, &z(&[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(is_nonseparable_candidate(&ok));
        let short = Generator::tabulated(2, z(&[0.0, 1.0, 0.0]).to_vec()).unwrap();
        assert!(is_nonseparable_candidate(&CausalSignal::new(short, &z(&[1.0, 1.0])).unwrap()));
    }

    fn brute_gap(c: &[Complex64]) -> usize {
        let mut best = 0;
        for i in 1..c.len() {
            for gamma in 1..c.len() {
                if i + gamma < c.len()
                    && c[i + gamma] != Complex64::new(0.0, 0.0)
                    && c[i..i + gamma].iter().all(|v| *v == Complex64::new(0.0, 0.0))
                {
                    best = best.max(gamma);
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn max_gap_matches_exhaustive_scan(mask in proptest::collection::vec(any::<bool>(), 1..30)) {
            let mut c: Vec<Complex64> = mask.iter().map(|&b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0)).collect();
            c[0] = Complex64::new(1.0, 0.0);
            prop_assert_eq!(max_gap(&c), brute_gap(&c));
        }

        #[test]
        fn recursion_identity(x in 0.001f64..0.999, n in 1usize..12, seed in 0u64..1000) {
            let g = Generator::chirp(50.0, 0.8, 1.0).unwrap();
            let c: Vec<Complex64> = (0..12).map(|k| Complex64::from_polar(1.0 + ((seed + k) % 5) as f64 * 0.1, (seed * 31 + k * 7) as f64)).collect();
            let f = CausalSignal::new(g.clone(), &c).unwrap();
            let v = aux_v(f.coeffs(), &g, n, x).unwrap();
            let lhs = f.evaluate_at(n, x);
            let rhs = v + f.coeffs()[n].mul_c64(g.eval(x));
            let scale = lhs.abs().to_f64().max(1.0);
            prop_assert!((lhs.clone() - rhs).abs().to_f64() <= 1e-12 * scale);
            // The general-location evaluator agrees to f64 rounding.
            prop_assert!((f.evaluate(n as f64 + x) - lhs.to_c64()).norm() < 1e-10);
        }

        #[test]
        fn evaluation_is_linear(x in -1.0f64..12.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let g = chirp();
            let c1 = [Complex64::new(1.0, a), Complex64::new(b, 0.5), Complex64::new(0.3, -0.2)];
            let c2 = [Complex64::new(-0.5, 0.1), Complex64::new(a, b), Complex64::new(1.0, 1.0)];
            let sum: Vec<Complex64> = c1.iter().zip(&c2).map(|(p, q)| p + q).collect();
            let f1 = CausalSignal::new(g.clone(), &c1).unwrap();
            let f2 = CausalSignal::new(g.clone(), &c2).unwrap();
            let f12 = CausalSignal::new(g, &sum).unwrap();
            prop_assert!((f12.evaluate(x) - f1.evaluate(x) - f2.evaluate(x)).norm() < 1e-12);
        }

        #[test]
        fn ambiguous_pair_moduli_agree(alpha in 0.1f64..3.0, beta in -3.0f64..3.0, x in -1.0f64..10.0) {
            prop_assume!(((alpha - beta) / PI - ((alpha - beta) / PI).round()).abs() > 1e-3);
            let (f, g) = ambiguous_pair(&Generator::cubic_bspline(), alpha, beta, 3).unwrap();
            prop_assert!((f.evaluate(x).norm() - g.evaluate(x).norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn ambiguous_pair_coefficients() {
        let (f, g) = ambiguous_pair(&Generator::cubic_bspline(), 1.0, 0.0, 2).unwrap();
        let c = f.coeffs_f64();
        let ct = g.coeffs_f64();
        assert_eq!(c, vec![Complex64::new(1.0, 0.0); 3]);
        assert!((ct[1] - Complex64::from_polar(1.0, 2.0)).norm() < 1e-15);
        // Not a unimodular multiple: theta grid search.
        let norm_c: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let best = (0..20000)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / 20000.0;
                let r = Complex64::from_polar(1.0, th);
                c.iter().zip(&ct).map(|(a, b)| (a - r * b).norm_sqr()).sum::<f64>().sqrt() / norm_c
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best > 0.1, "{best}");
    }

    #[test]
    fn ambiguous_pair_rejects_degenerate() {
        assert!(ambiguous_pair(&Generator::cubic_bspline(), 1.0, 1.0, 2).is_err());
        assert!(ambiguous_pair(&Generator::cubic_bspline(), 1.0, 1.0 - PI, 2).is_err());
        assert!(ambiguous_pair(&Generator::cubic_bspline(), 1.0, 0.0, 1).is_err());
    }
}
