//! Exact distributions of information densities and quantile operators on them.
//!
//! A [`Spectrum`] is a finite discrete law on `ℝ ∪ {+∞}`. Values that agree
//! within [`DEDUP_TOLERANCE`] are merged, and the same tolerance defines
//! equality in [`Spectrum::tail_probability`], so an atom sitting on a
//! threshold is never split by rounding noise.

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, composition_count, for_each_composition, ln_factorials};
use crate::probability::{Channel, FiniteDistribution, ProductMode, PRODUCT_SUM_TOLERANCE};

/// Absolute tolerance for merging density values.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

/// Default cap on the number of atoms produced by exact convolution.
pub const DEFAULT_ATOM_CAP: usize = 10_000_000;

/// What the atom values of a spectrum measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scale {
    /// Unnormalized block density, e.g. `log Wⁿ(y|x)/P(y)`.
    Total,
    /// Block density divided by the blocklength.
    PerLetter,
    /// `(total − nR)/√n`.
    SecondOrder { rate: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    atoms: Vec<Atom>,
    n: usize,
    scale: Scale,
}

impl Spectrum {
    /// Builds a spectrum from unsorted `(value, prob)` pairs. Zero-probability
    /// pairs are dropped and values within [`DEDUP_TOLERANCE`] are merged onto
    /// the smallest member of their run.
    pub fn from_weighted<I>(pairs: I, n: usize, scale: Scale) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<Atom> = Vec::new();
        for (value, prob) in pairs {
            if value.is_nan() || value == f64::NEG_INFINITY {
                return Err(Error::domain(format!("spectrum value {value} is not allowed")));
            }
            if !prob.is_finite() || prob < 0.0 {
                return Err(Error::validation(format!("spectrum probability {prob} is invalid")));
            }
            if prob > 0.0 {
                raw.push(Atom { value, prob });
            }
        }
        raw.sort_by(|a, b| a.value.total_cmp(&b.value));
        let total = compensated_sum(raw.iter().map(|a| a.prob));
        if (total - 1.0).abs() > PRODUCT_SUM_TOLERANCE {
            return Err(Error::validation(format!("spectrum mass sums to {total}")));
        }

        let mut atoms: Vec<Atom> = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            let anchor = raw[i].value;
            let mut j = i;
            while j < raw.len() && (raw[j].value == anchor || raw[j].value - anchor <= DEDUP_TOLERANCE) {
                j += 1;
            }
            let prob = compensated_sum(raw[i..j].iter().map(|a| a.prob));
            atoms.push(Atom { value: anchor, prob });
            i = j;
        }
        Ok(Spectrum { atoms, n, scale })
    }

    pub fn point_mass(value: f64, n: usize, scale: Scale) -> Result<Self> {
        Self::from_weighted([(value, 1.0)], n, scale)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Probability of the `+∞` atom (0 if absent).
    pub fn infinite_mass(&self) -> f64 {
        match self.atoms.last() {
            Some(a) if a.value == f64::INFINITY => a.prob,
            _ => 0.0,
        }
    }

    pub fn finite_atoms(&self) -> &[Atom] {
        match self.atoms.last() {
            Some(a) if a.value == f64::INFINITY => &self.atoms[..self.atoms.len() - 1],
            _ => &self.atoms,
        }
    }

    fn rescaled(&self, factor: f64, scale: Scale) -> Spectrum {
        Spectrum {
            atoms: self.atoms.iter().map(|a| Atom { value: a.value * factor, prob: a.prob }).collect(),
            n: self.n,
            scale,
        }
    }

    /// Same law with values divided by the blocklength.
    pub fn to_per_letter(&self) -> Result<Spectrum> {
        match self.scale {
            Scale::PerLetter => Ok(self.clone()),
            Scale::Total => Ok(self.rescaled(1.0 / self.n as f64, Scale::PerLetter)),
            Scale::SecondOrder { .. } => Err(Error::domain("second-order spectra cannot be rescaled")),
        }
    }

    /// Same law with values on the unnormalized block scale.
    pub fn to_total(&self) -> Result<Spectrum> {
        match self.scale {
            Scale::Total => Ok(self.clone()),
            Scale::PerLetter => Ok(self.rescaled(self.n as f64, Scale::Total)),
            Scale::SecondOrder { .. } => Err(Error::domain("second-order spectra cannot be rescaled")),
        }
    }

    /// `Pr{Z > α}` when `strict`, else `Pr{Z ≥ α}`; values within
    /// [`DEDUP_TOLERANCE`] of `α` count as equal to it.
    pub fn tail_probability(&self, alpha: f64, strict: bool) -> f64 {
        let start = if strict {
            self.atoms.partition_point(|a| a.value <= alpha + DEDUP_TOLERANCE)
        } else {
            self.atoms.partition_point(|a| a.value < alpha - DEDUP_TOLERANCE)
        };
        compensated_sum(self.atoms[start..].iter().map(|a| a.prob)).min(1.0)
    }

    /// Tail of the per-letter density `(1/n)·Z` at threshold `c`, whatever
    /// scale the atoms are stored on.
    pub fn per_letter_tail(&self, c: f64, strict: bool) -> Result<f64> {
        match self.scale {
            Scale::PerLetter => Ok(self.tail_probability(c, strict)),
            Scale::Total => Ok(self.tail_probability(c * self.n as f64, strict)),
            Scale::SecondOrder { .. } => Err(Error::domain("per-letter tails need a total or per-letter spectrum")),
        }
    }

    /// `inf{α : Pr{Z > α} ≤ ε}` on the step function of this spectrum.
    /// Returns `−∞` for `ε = 1` and `+∞` when the infinite atom alone
    /// exceeds `ε`.
    pub fn eps_upper_quantile(&self, eps: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::domain(format!("quantile level {eps} outside [0, 1]")));
        }
        if eps >= 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        // suffix[j] = Pr{Z ≥ atoms[j]}; Pr{Z > atoms[j]} = suffix[j + 1]
        let m = self.atoms.len();
        let mut suffix = vec![0.0; m + 1];
        let mut comp = 0.0;
        for j in (0..m).rev() {
            let y = self.atoms[j].prob - comp;
            let t = suffix[j + 1] + y;
            comp = (t - suffix[j + 1]) - y;
            suffix[j] = t;
        }
        for j in 0..m {
            if suffix[j + 1] <= eps {
                return Ok(self.atoms[j].value);
            }
        }
        Ok(f64::INFINITY)
    }

    /// Mean and variance by weighted sums; errors on an infinite atom.
    pub fn mean_var(&self) -> Result<(f64, f64)> {
        if self.infinite_mass() > 0.0 {
            return Err(Error::domain("spectrum has an infinite atom; moments are undefined"));
        }
        let mean = compensated_sum(self.atoms.iter().map(|a| a.prob * a.value));
        let var = compensated_sum(self.atoms.iter().map(|a| a.prob * (a.value - mean).powi(2)));
        Ok((mean, var))
    }
}

/// Law of `log W(y|x)/ref(y)` under `P_X × W`, divided by `n` when
/// `normalize` is set. `n` is the blocklength the inputs describe.
/// Pairs with `ref(y) = 0` but positive joint mass land on the `+∞` atom.
pub fn info_density_spectrum(
    px: &FiniteDistribution,
    w: &Channel,
    reference: &FiniteDistribution,
    n: usize,
    normalize: bool,
) -> Result<Spectrum> {
    if px.alphabet() != w.input() || reference.alphabet() != w.output() {
        return Err(Error::domain("info density: alphabets of source, channel, and reference disagree"));
    }
    if n == 0 {
        return Err(Error::domain("blocklength must be at least 1"));
    }
    let mut pairs = Vec::new();
    for (x, &p) in px.pmf().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (y, &wy) in w.row(x).iter().enumerate() {
            let joint = p * wy;
            if joint == 0.0 {
                continue;
            }
            let r = reference.prob(y);
            let v = if r == 0.0 { f64::INFINITY } else { (wy / r).ln() };
            pairs.push((v, joint));
        }
    }
    let spectrum = Spectrum::from_weighted(pairs, n, Scale::Total)?;
    if normalize {
        spectrum.to_per_letter()
    } else {
        Ok(spectrum)
    }
}

/// Law of `log 1/P(X)` under `P`.
pub fn self_information_spectrum(p: &FiniteDistribution, n: usize, normalize: bool) -> Result<Spectrum> {
    let pairs = p.pmf().iter().filter(|&&q| q > 0.0).map(|&q| (-q.ln(), q));
    let spectrum = Spectrum::from_weighted(pairs, n, Scale::Total)?;
    if normalize {
        spectrum.to_per_letter()
    } else {
        Ok(spectrum)
    }
}

/// Exact law of the sum of `n` independent copies of a per-letter density.
///
/// `per_letter` holds one spectrum (i.i.d.) or two (alternating, indexed by
/// the parity of `n`). The sum is grouped by composition: with `k` distinct
/// finite per-letter values `vᵢ` (probabilities `pᵢ`), the count vector
/// `c` with `Σcᵢ = n` has value `Σ cᵢvᵢ` and multinomial probability, so the
/// cost is `C(n+k−1, k−1)` atoms rather than `|𝒳|ⁿ|𝒴|ⁿ` pairs. Any
/// per-letter `+∞` mass makes the sum infinite.
pub fn spectrum_memoryless_exact(per_letter: &[Spectrum], n: usize, mode: ProductMode, atom_cap: usize) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::domain("blocklength must be at least 1"));
    }
    let base = match (mode, per_letter.len()) {
        (ProductMode::Iid, 1) => &per_letter[0],
        (ProductMode::Alternating, 2) => &per_letter[usize::from(n.is_multiple_of(2))],
        (m, len) => {
            return Err(Error::domain(format!("{m:?} mode needs {} component spectra, got {len}", if m == ProductMode::Iid { 1 } else { 2 })))
        }
    };
    let base = base.to_total()?;
    if base.n() != 1 {
        return Err(Error::domain("per-letter spectrum must describe a single letter"));
    }
    let finite = base.finite_atoms();
    let k = finite.len();
    let count = if k == 0 { Some(0) } else { composition_count(n, k) };
    match count {
        Some(c) if c <= atom_cap as u128 => {}
        _ => {
            return Err(Error::resource(format!(
                "exact convolution of {k} per-letter atoms over n = {n} needs more than {atom_cap} atoms"
            )))
        }
    }

    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let inf_mass = base.infinite_mass();
    if inf_mass > 0.0 {
        let all_finite = (1.0 - inf_mass).powi(n as i32);
        pairs.push((f64::INFINITY, 1.0 - all_finite));
    }
    if k > 0 {
        let lf = ln_factorials(n);
        let ln_p: Vec<f64> = finite.iter().map(|a| a.prob.ln()).collect();
        pairs.reserve(count.unwrap_or(0) as usize);
        for_each_composition(n, k, |counts| {
            let mut ln_prob = lf[n];
            for (i, &c) in counts.iter().enumerate() {
                if c > 0 {
                    ln_prob += c as f64 * ln_p[i] - lf[c];
                }
            }
            let value = compensated_sum(counts.iter().zip(finite).map(|(&c, a)| c as f64 * a.value));
            pairs.push((value, ln_prob.exp()));
        });
    }
    Spectrum::from_weighted(pairs, n, Scale::Total)
}
