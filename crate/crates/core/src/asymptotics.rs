//! Finite-n convergence diagnostics: quantile sweeps over blocklengths,
//! second-order normalization, tail-window limsup/liminf surrogates, and a
//! Gaussian comparison oracle.
//!
//! Nothing here claims a limit. Verdicts are computed over a finite range of
//! blocklengths, using the last half of that range as the tail window.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::probability::{output_distribution, MemorylessModel};
use crate::spectrum::{info_density_spectrum, self_information_spectrum, spectrum_memoryless_exact, Atom, Scale, Spectrum};

/// Slack added to `δ` in ball-membership comparisons.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// `v ↦ (v − nR)/√n` on a total-scale spectrum.
pub fn normalize_second_order(s: &Spectrum, rate: f64) -> Result<Spectrum> {
    let total = s.to_total()?;
    let n = total.n() as f64;
    let root = n.sqrt();
    let shifted = total.atoms().iter().map(|a: &Atom| ((a.value - n * rate) / root, a.prob));
    Spectrum::from_weighted(shifted, total.n(), Scale::SecondOrder { rate })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallMode {
    Limsup,
    Liminf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallVerdict {
    pub member: bool,
    /// Max (limsup) or min (liminf) of the distances over the tail window.
    pub statistic: f64,
    /// Limsup: window entries above `δ` (all of the window when a member).
    /// Liminf: window entries at or below `δ`.
    pub witness: Vec<(usize, f64)>,
}

/// Last half of a sequence of `(n, value)` records (the whole sequence when
/// it has one entry).
pub fn tail_window<T>(records: &[T]) -> &[T] {
    &records[records.len() / 2..]
}

/// Finite-range surrogate for `limsup d_n ≤ δ` or `liminf d_n ≤ δ`.
pub fn ball_membership(distances: &[(usize, f64)], delta: f64, mode: BallMode) -> Result<BallVerdict> {
    if distances.is_empty() {
        return Err(Error::domain("ball membership needs at least one distance"));
    }
    let window = tail_window(distances);
    let limit = delta + MEMBERSHIP_SLACK;
    Ok(match mode {
        BallMode::Limsup => {
            let statistic = window.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
            let member = statistic <= limit;
            let witness = if member { window.to_vec() } else { window.iter().copied().filter(|r| r.1 > limit).collect() };
            BallVerdict { member, statistic, witness }
        }
        BallMode::Liminf => {
            let statistic = window.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            let witness: Vec<(usize, f64)> = window.iter().copied().filter(|r| r.1 <= limit).collect();
            BallVerdict { member: !witness.is_empty(), statistic, witness }
        }
    })
}

// Rational approximation of the standard normal quantile (P. J. Acklam),
// relative error below 1.15e-9 on (0, 1).
const ACKLAM_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.38357751867269e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACKLAM_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACKLAM_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACKLAM_D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
const ACKLAM_SPLIT: f64 = 0.02425;

/// `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal quantile level {p} outside (0, 1)")));
    }
    let tail = |q: f64| {
        let c = &ACKLAM_C;
        let d = &ACKLAM_D;
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    };
    Ok(if p < ACKLAM_SPLIT {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - ACKLAM_SPLIT {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let (a, b) = (&ACKLAM_A, &ACKLAM_B);
        let q = p - 0.5;
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    })
}

/// `√V · Φ⁻¹(1 − δ)`: the Gaussian prediction for the upper δ-quantile of a
/// centered sum with per-letter variance `V`.
pub fn gaussian_approx_quantile(variance: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta = {delta} must lie in (0, 1)")));
    }
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::domain(format!("variance {variance} must be >= 0")));
    }
    if variance == 0.0 || delta == 0.5 {
        return Ok(0.0);
    }
    Ok(variance.sqrt() * inverse_normal_cdf(1.0 - delta)?)
}

/// Which information density a sweep tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    /// `log W(Y|X)/P_Y(Y)` against the true output law.
    MutualInformation,
    /// `log 1/P_X(X)` of the source alone.
    SelfInformation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub n: usize,
    /// Zero-based component governing this blocklength.
    pub component: usize,
    /// Upper δ-quantile of the per-letter density.
    pub first_order_quantile: f64,
    /// Upper δ-quantile of `(total − nR)/√n`, when a rate was given.
    pub second_order_quantile: Option<f64>,
    pub mean_per_letter: f64,
    pub variance_per_letter: f64,
}

/// Single-letter density spectra of each model component.
pub fn component_spectra(model: &MemorylessModel, kind: DensityKind) -> Result<Vec<Spectrum>> {
    model
        .components()
        .iter()
        .map(|(px, w)| match kind {
            DensityKind::MutualInformation => {
                let py = output_distribution(px, w)?;
                info_density_spectrum(px, w, &py, 1, false)
            }
            DensityKind::SelfInformation => self_information_spectrum(px, 1, false),
        })
        .collect()
}

/// Quantiles of the exact block spectrum at every `n` in `n_list`.
pub fn convergence_sweep(
    model: &MemorylessModel,
    n_list: &[usize],
    delta: f64,
    rate: Option<f64>,
    kind: DensityKind,
    atom_cap: usize,
) -> Result<Vec<ConvergenceRecord>> {
    if n_list.is_empty() {
        return Err(Error::domain("empty blocklength list"));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("blocklengths must be positive and strictly increasing"));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::domain(format!("delta = {delta} outside [0, 1]")));
    }
    let letters = component_spectra(model, kind)?;
    n_list
        .par_iter()
        .map(|&n| {
            let total = spectrum_memoryless_exact(&letters, n, model.mode(), atom_cap)?;
            let per_letter = total.to_per_letter()?;
            let (mean, var) = match per_letter.mean_var() {
                Ok((m, v)) => (m, v * n as f64),
                Err(_) => (f64::INFINITY, f64::NAN),
            };
            let second = match rate {
                Some(r) => Some(normalize_second_order(&total, r)?.eps_upper_quantile(delta)?),
                None => None,
            };
            Ok(ConvergenceRecord {
                n,
                component: model.component_index(n),
                first_order_quantile: per_letter.eps_upper_quantile(delta)?,
                second_order_quantile: second,
                mean_per_letter: mean,
                variance_per_letter: var,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{Alphabet, Channel, FiniteDistribution};
    use crate::spectrum::DEFAULT_ATOM_CAP;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn second_order_examples() {
        let (n, r) = (9, 0.4);
        let s = Spectrum::point_mass(n as f64 * r, n, Scale::Total).unwrap();
        let t = normalize_second_order(&s, r).unwrap();
        assert!(t.atoms()[0].value.abs() < 1e-15);

        let s = Spectrum::from_weighted([(0.3, 0.4), (1.7, 0.6)], 1, Scale::Total).unwrap();
        let t = normalize_second_order(&s, 0.0).unwrap();
        for (a, b) in s.atoms().iter().zip(t.atoms()) {
            assert_eq!(a.value, b.value);
            assert_eq!(a.prob, b.prob);
        }

        let s = Spectrum::from_weighted([(1.0, 0.25), (5.0, 0.75)], 4, Scale::Total).unwrap();
        let t = normalize_second_order(&s, 0.5).unwrap();
        let (mean, _) = s.mean_var().unwrap();
        let (shifted, _) = t.mean_var().unwrap();
        assert!((shifted - 2.0 * (mean / 4.0 - 0.5)).abs() < 1e-15);
        let mass: f64 = t.atoms().iter().map(|a| a.prob).sum();
        assert_eq!(mass, 1.0);
    }

    #[test]
    fn ball_examples() {
        let zeros: Vec<(usize, f64)> = (1..=10).map(|n| (n, 0.0)).collect();
        for mode in [BallMode::Limsup, BallMode::Liminf] {
            assert!(ball_membership(&zeros, 0.0, mode).unwrap().member);
        }

        let alternating: Vec<(usize, f64)> = (1..=10).map(|n| (n, if n % 2 == 0 { 0.0 } else { 1.0 })).collect();
        let sup = ball_membership(&alternating, 0.0, BallMode::Limsup).unwrap();
        let inf = ball_membership(&alternating, 0.0, BallMode::Liminf).unwrap();
        assert!(!sup.member && inf.member);
        assert!(inf.witness.iter().all(|r| r.0 % 2 == 0));
        assert!(sup.witness.iter().all(|r| r.0 % 2 == 1));

        let flat: Vec<(usize, f64)> = (1..=6).map(|n| (n, 0.3)).collect();
        for mode in [BallMode::Limsup, BallMode::Liminf] {
            assert!(!ball_membership(&flat, 0.2, mode).unwrap().member);
        }
        assert!(ball_membership(&[], 0.2, BallMode::Limsup).is_err());
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_approx_quantile(0.0, 0.1).unwrap(), 0.0);
        assert_eq!(gaussian_approx_quantile(2.5, 0.5).unwrap(), 0.0);
        // Φ(1) = 0.841344746…, so the 0.158655 upper quantile of N(0,1) is ≈ 1
        let q = gaussian_approx_quantile(1.0, 0.158655).unwrap();
        assert!((q - 1.0).abs() < 1e-5, "{q}");
        assert!(gaussian_approx_quantile(1.0, 0.0).is_err());
        assert!(gaussian_approx_quantile(1.0, 1.0).is_err());
    }

    #[test]
    fn inverse_normal_matches_reference_library() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let reference = Normal::new(0.0, 1.0).unwrap();
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let err = (inverse_normal_cdf(p).unwrap() - reference.inverse_cdf(p)).abs();
            assert!(err < 1e-8, "p = {p}: {err}");
        }
        for p in [1e-8, 1e-6, 1e-4, 0.01, 0.99, 1.0 - 1e-6] {
            let err = (inverse_normal_cdf(p).unwrap() - reference.inverse_cdf(p)).abs();
            assert!(err < 1e-8, "p = {p}: {err}");
        }
    }

    fn identity_model(px: FiniteDistribution) -> MemorylessModel {
        let w = Channel::identity(px.alphabet().clone());
        MemorylessModel::iid(px, w).unwrap()
    }

    #[test]
    fn sweep_examples() {
        let point = identity_model(FiniteDistribution::point_mass(Alphabet::binary(), 1).unwrap());
        let recs = convergence_sweep(&point, &[1, 2, 5], 0.2, Some(0.0), DensityKind::MutualInformation, DEFAULT_ATOM_CAP).unwrap();
        assert!(recs.iter().all(|r| r.first_order_quantile == 0.0 && r.second_order_quantile == Some(0.0)));

        let uniform = identity_model(FiniteDistribution::uniform(Alphabet::binary()));
        let recs = convergence_sweep(&uniform, &[1, 3, 8, 64], 0.3, None, DensityKind::MutualInformation, DEFAULT_ATOM_CAP).unwrap();
        assert!(recs.iter().all(|r| (r.first_order_quantile - LN2).abs() < 1e-12));

        assert!(convergence_sweep(&uniform, &[3, 2], 0.3, None, DensityKind::MutualInformation, DEFAULT_ATOM_CAP).is_err());
    }

    #[test]
    fn bernoulli_second_order_quantile_is_near_gaussian() {
        let src = FiniteDistribution::bernoulli(0.3).unwrap();
        let model = identity_model(src.clone());
        let rate = src.entropy();
        let recs = convergence_sweep(&model, &[10_000], 0.158655, Some(rate), DensityKind::SelfInformation, DEFAULT_ATOM_CAP).unwrap();
        let letter = self_information_spectrum(&src, 1, false).unwrap();
        let (_, v) = letter.mean_var().unwrap();
        let q = recs[0].second_order_quantile.unwrap();
        assert!((q - v.sqrt()).abs() < 0.05, "{q} vs {}", v.sqrt());
        assert!((v.sqrt() - 0.388).abs() < 1e-3);
    }

    #[test]
    fn first_order_quantiles_approach_the_mean() {
        let src = FiniteDistribution::bernoulli(0.3).unwrap();
        let model = identity_model(src.clone());
        let ns: Vec<usize> = (6..=12).map(|k| 1usize << k).collect();
        let recs = convergence_sweep(&model, &ns, 0.2, None, DensityKind::SelfInformation, DEFAULT_ATOM_CAP).unwrap();
        let gaps: Vec<f64> = recs.iter().map(|r| (r.first_order_quantile - src.entropy()).abs()).collect();
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "{gaps:?}");
        }
    }

    #[test]
    fn upper_and_lower_second_order_quantiles_are_symmetric() {
        let src = FiniteDistribution::bernoulli(0.4).unwrap();
        let model = identity_model(src.clone());
        let rate = src.entropy();
        for delta in [0.1, 0.25] {
            let hi = convergence_sweep(&model, &[4096], delta, Some(rate), DensityKind::SelfInformation, DEFAULT_ATOM_CAP).unwrap();
            let lo = convergence_sweep(&model, &[4096], 1.0 - delta, Some(rate), DensityKind::SelfInformation, DEFAULT_ATOM_CAP).unwrap();
            let (a, b) = (hi[0].second_order_quantile.unwrap(), lo[0].second_order_quantile.unwrap());
            assert!((a + b).abs() < 0.05, "delta {delta}: {a} vs {b}");
        }
    }

    #[test]
    fn alternating_sweep_separates_parities() {
        let b = Alphabet::binary();
        let u = FiniteDistribution::uniform(b.clone());
        let flat = Channel::constant_rows(b.clone(), &u);
        let model = MemorylessModel::alternating((u.clone(), Channel::identity(b.clone())), (u, flat)).unwrap();
        let ns: Vec<usize> = (1..=16).collect();
        let recs = convergence_sweep(&model, &ns, 0.1, None, DensityKind::MutualInformation, DEFAULT_ATOM_CAP).unwrap();
        let values: Vec<(usize, f64)> = recs.iter().map(|r| (r.n, r.first_order_quantile)).collect();
        let sup = ball_membership(&values, 0.0, BallMode::Limsup).unwrap();
        let inf = ball_membership(&values, 0.0, BallMode::Liminf).unwrap();
        assert!((sup.statistic - LN2).abs() < 1e-12);
        assert_eq!(inf.statistic, 0.0);
    }
}
