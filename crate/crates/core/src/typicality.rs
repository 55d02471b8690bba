//! Method-of-types predicates and the typical-set truncation of a block law.
//!
//! Sequences are slices of letter indices into the relevant letter alphabet.

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, for_each_composition, ln_factorials};
use crate::probability::{output_distribution, Channel, FiniteDistribution, PRODUCT_SUM_TOLERANCE};

/// Empirical distribution of a sequence, kept as integer counts over `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeVector {
    counts: Vec<u64>,
    n: u64,
}

impl TypeVector {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn freq(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.n as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.freq(i)).collect()
    }
}

/// Type of `x` over an alphabet of `k` letters.
pub fn type_of(x: &[usize], k: usize) -> Result<TypeVector> {
    if x.is_empty() {
        return Err(Error::domain("type of an empty sequence"));
    }
    let mut counts = vec![0u64; k];
    for &s in x {
        *counts.get_mut(s).ok_or_else(|| Error::domain(format!("symbol index {s} outside alphabet of size {k}")))? += 1;
    }
    Ok(TypeVector { counts, n: x.len() as u64 })
}

/// Joint type of `(x, y)`; pair `(a, b)` sits at index `a·ky + b`.
pub fn joint_type_of(x: &[usize], kx: usize, y: &[usize], ky: usize) -> Result<TypeVector> {
    if x.len() != y.len() {
        return Err(Error::domain(format!("sequence lengths differ: {} vs {}", x.len(), y.len())));
    }
    if let Some(&b) = y.iter().find(|&&b| b >= ky) {
        return Err(Error::domain(format!("symbol index {b} outside alphabet of size {ky}")));
    }
    if let Some(&a) = x.iter().find(|&&a| a >= kx) {
        return Err(Error::domain(format!("symbol index {a} outside alphabet of size {kx}")));
    }
    let pairs: Vec<usize> = x.iter().zip(y).map(|(&a, &b)| a * ky + b).collect();
    type_of(&pairs, kx * ky)
}

fn within(counts: &[u64], n: u64, target: &[f64], eps: f64) -> bool {
    counts.iter().zip(target).all(|(&c, &p)| (c as f64 / n as f64 - p).abs() <= eps)
}

/// `y ∈ T_{Y,ε}`: every letter frequency within `ε` of `P_Y`.
pub fn is_typical_output(y: &[usize], py: &FiniteDistribution, eps: f64) -> Result<bool> {
    let t = type_of(y, py.len())?;
    Ok(within(&t.counts, t.n, py.pmf(), eps))
}

/// `y ∈ T_{W,ε}(x)`: `|P_xy(a,b) − P_x(a)W(b|a)| ≤ ε` for every pair.
pub fn is_cond_typical(y: &[usize], x: &[usize], w: &Channel, eps: f64) -> Result<bool> {
    let (kx, ky) = (w.rows(), w.cols());
    let joint = joint_type_of(x, kx, y, ky)?;
    let tx = type_of(x, kx)?;
    let expected: Vec<f64> = (0..kx).flat_map(|a| (0..ky).map(move |b| (a, b))).map(|(a, b)| tx.freq(a) * w.get(a, b)).collect();
    Ok(within(&joint.counts, joint.n, &expected, eps))
}

/// `P ∈ A_Y(ε)`: `|PW(b) − P_Y(b)| ≤ 2|𝒳|ε` for every output letter.
pub fn in_ay(p: &FiniteDistribution, w: &Channel, py: &FiniteDistribution, eps: f64) -> Result<bool> {
    let pw = output_distribution(p, w)?;
    if pw.alphabet() != py.alphabet() {
        return Err(Error::domain("output alphabet of the channel differs from P_Y"));
    }
    let slack = 2.0 * w.rows() as f64 * eps;
    Ok(pw.pmf().iter().zip(py.pmf()).all(|(a, b)| (a - b).abs() <= slack))
}

/// The typicality slack `|𝒳|·ε` applied before truncating output sequences.
pub fn input_scaled_tolerance(eps: f64, input_alphabet_size: usize) -> f64 {
    input_alphabet_size as f64 * eps
}

/// Conditions a block law `P` over `𝒴ⁿ` on `T_{Y,ε}` built from the letter
/// law `py`; returns the conditional law and `τ = P(T_{Y,ε})`.
pub fn truncate_to_typical(p: &FiniteDistribution, py: &FiniteDistribution, eps: f64) -> Result<(FiniteDistribution, f64)> {
    let alphabet = p.alphabet();
    if alphabet.base() != *py.alphabet() {
        return Err(Error::domain("block alphabet is not built from the marginal's alphabet"));
    }
    let mask: Vec<bool> = (0..p.len())
        .map(|i| is_typical_output(&alphabet.digits(i), py, eps))
        .collect::<Result<_>>()?;
    let tau = compensated_sum(p.pmf().iter().zip(&mask).filter(|(_, &m)| m).map(|(&q, _)| q));
    if tau <= 0.0 {
        return Err(Error::DegenerateTruncation);
    }
    let pmf = p.pmf().iter().zip(&mask).map(|(&q, &m)| if m { q / tau } else { 0.0 }).collect();
    Ok((FiniteDistribution::with_tolerance(alphabet.clone(), pmf, PRODUCT_SUM_TOLERANCE)?, tau.min(1.0)))
}

/// `Pr{Yⁿ ∈ T_{Y,ε}}` for i.i.d. `Yⁿ ~ lawⁿ`, summed over type classes
/// instead of sequences.
pub fn typical_set_probability(law: &FiniteDistribution, py: &FiniteDistribution, n: usize, eps: f64) -> Result<f64> {
    if law.alphabet() != py.alphabet() {
        return Err(Error::domain("letter law and marginal use different alphabets"));
    }
    if n == 0 {
        return Err(Error::domain("blocklength must be at least 1"));
    }
    let lf = ln_factorials(n);
    let mut terms = Vec::new();
    for_each_composition(n, law.len(), |counts| {
        let counts64: Vec<u64> = counts.iter().map(|&c| c as u64).collect();
        if !within(&counts64, n as u64, py.pmf(), eps) {
            return;
        }
        let mut ln_prob = lf[n];
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let q = law.prob(i);
            if q == 0.0 {
                return;
            }
            ln_prob += c as f64 * q.ln() - lf[c];
        }
        terms.push(ln_prob.exp());
    });
    Ok(compensated_sum(terms).min(1.0))
}
