//! Resolvability codes: deterministic maps from a uniform index to channel
//! input sequences, evaluated exactly through the block channel.
//!
//! Random codes are drawn with ChaCha8 (`rand_chacha` 0.9) seeded through
//! `SeedableRng::seed_from_u64`. Each draw consumes one `u64` from the stream;
//! its top 53 bits form a uniform `u ∈ [0, 1)` that selects the first
//! outcome whose cumulative mass exceeds `u`. Trial `t` of
//! [`best_random_code`] uses seed `seed + t` (wrapping).

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial, compensated_sum};
use crate::probability::{variational_distance, Alphabet, Channel, FiniteDistribution, PRODUCT_SUM_TOLERANCE};
use crate::spectrum::{info_density_spectrum, Spectrum};

/// Default cap on the number of codeword multisets visited by exhaustive search.
pub const DEFAULT_SEARCH_BUDGET: u128 = 1_000_000;

/// Ties in exhaustive search are distances within this of the minimum.
const TIE_TOLERANCE: f64 = 1e-12;

/// A multiset of `M` codewords in `𝒳ⁿ`, stored as sequence indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvabilityCode {
    alphabet: Alphabet,
    n: usize,
    codewords: Vec<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CodeFile {
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(default)]
    seed: Option<u64>,
    codewords: Vec<String>,
}

impl ResolvabilityCode {
    /// `alphabet` is the block input alphabet and `n` the blocklength it encodes.
    pub fn new(alphabet: Alphabet, n: usize, codewords: Vec<usize>, seed: Option<u64>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::domain("a code needs at least one codeword"));
        }
        if n == 0 {
            return Err(Error::domain("blocklength must be at least 1"));
        }
        if let Some(&bad) = codewords.iter().find(|&&c| c >= alphabet.len()) {
            return Err(Error::domain(format!("codeword index {bad} outside the input alphabet")));
        }
        Ok(ResolvabilityCode { alphabet, n, codewords, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.codewords.len()
    }

    pub fn codewords(&self) -> &[usize] {
        &self.codewords
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn labels(&self) -> Vec<String> {
        self.codewords.iter().map(|&c| self.alphabet.label(c)).collect()
    }

    /// Codewords sorted, for multiset comparison.
    pub fn sorted_codewords(&self) -> Vec<usize> {
        let mut v = self.codewords.clone();
        v.sort_unstable();
        v
    }

    /// Law of `φ(U_M)`: each codeword weighted by its multiplicity over `M`.
    pub fn input_distribution(&self) -> Result<FiniteDistribution> {
        let mut pmf = vec![0.0; self.alphabet.len()];
        let w = 1.0 / self.m() as f64;
        for &c in &self.codewords {
            pmf[c] += w;
        }
        FiniteDistribution::with_tolerance(self.alphabet.clone(), pmf, PRODUCT_SUM_TOLERANCE)
    }

    /// JSON form: `{"n": .., "M": .., "seed": .., "codewords": ["0101", ..]}`.
    pub fn to_json(&self) -> String {
        let file = CodeFile { n: self.n, m: self.m(), seed: self.seed, codewords: self.labels() };
        serde_json::to_string_pretty(&file).expect("code file serializes")
    }

    pub fn from_json(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let file: CodeFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("code file: {e}")))?;
        if file.codewords.len() != file.m {
            return Err(Error::validation(format!(
                "code file declares M = {} but lists {} codewords",
                file.m,
                file.codewords.len()
            )));
        }
        let codewords = file.codewords.iter().map(|l| alphabet.index_of(l)).collect::<Result<Vec<_>>>()?;
        Self::new(alphabet.clone(), file.n, codewords, file.seed)
    }
}

fn check_code_channel(code: &ResolvabilityCode, wn: &Channel) -> Result<()> {
    if code.alphabet() != wn.input() {
        return Err(Error::domain("code alphabet differs from the block channel input"));
    }
    Ok(())
}

/// `P(y) = (1/M) Σᵢ Wⁿ(y|φ(i))`.
pub fn code_output_distribution(code: &ResolvabilityCode, wn: &Channel) -> Result<FiniteDistribution> {
    check_code_channel(code, wn)?;
    let sorted = code.sorted_codewords();
    let mut runs: Vec<(usize, f64)> = Vec::new();
    for &c in &sorted {
        match runs.last_mut() {
            Some((x, k)) if *x == c => *k += 1.0,
            _ => runs.push((c, 1.0)),
        }
    }
    let m = code.m() as f64;
    let pmf = (0..wn.cols())
        .map(|y| compensated_sum(runs.iter().map(|&(x, k)| k * wn.get(x, y))) / m)
        .collect();
    FiniteDistribution::with_tolerance(wn.output().clone(), pmf, PRODUCT_SUM_TOLERANCE)
}

/// Variational distance between the code's output law and `target`.
pub fn code_distance(code: &ResolvabilityCode, wn: &Channel, target: &FiniteDistribution) -> Result<f64> {
    variational_distance(&code_output_distribution(code, wn)?, target)
}

/// Inverse-CDF sampler over a finite distribution.
struct Sampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl Sampler {
    fn new(p: &FiniteDistribution) -> Self {
        let mut acc = 0.0;
        let cumulative = p
            .pmf()
            .iter()
            .map(|&q| {
                acc += q;
                acc
            })
            .collect();
        let last_positive = p.pmf().iter().rposition(|&q| q > 0.0).unwrap_or(0);
        Sampler { cumulative, last_positive }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        self.cumulative.partition_point(|&c| c <= u).min(self.last_positive)
    }
}

/// `M` i.i.d. codewords from `P_X` over `𝒳ⁿ`.
pub fn random_code(px: &FiniteDistribution, n: usize, m: usize, seed: u64) -> Result<ResolvabilityCode> {
    if m == 0 {
        return Err(Error::domain("code size M must be at least 1"));
    }
    let sampler = Sampler::new(px);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codewords = (0..m).map(|_| sampler.draw(&mut rng)).collect();
    ResolvabilityCode::new(px.alphabet().clone(), n, codewords, Some(seed))
}

#[derive(Clone, Debug)]
pub struct RandomSearch {
    pub code: ResolvabilityCode,
    pub distance: f64,
    /// Zero-based trial that produced `code`.
    pub trial: u64,
}

/// Best of `trials` seeded random codes; the earliest trial wins ties.
pub fn best_random_code(
    px: &FiniteDistribution,
    n: usize,
    wn: &Channel,
    target: &FiniteDistribution,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<RandomSearch> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let results: Vec<(u64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let code = random_code(px, n, m, seed.wrapping_add(t))?;
            Ok((t, code_distance(&code, wn, target)?))
        })
        .collect::<Result<_>>()?;
    let (trial, distance) = results.iter().copied().fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let code = random_code(px, n, m, seed.wrapping_add(trial))?;
    Ok(RandomSearch { code, distance, trial })
}

/// Number of size-`m` multisets over `k` items.
pub fn multiset_count(k: usize, m: usize) -> Option<u128> {
    binomial((k + m - 1) as u128, m as u128)
}

/// Visits every nondecreasing index tuple of length `m` over `0..k` whose
/// first entry is `first`, passing the running row sum alongside.
fn visit_multisets<F>(wn: &Channel, first: usize, m: usize, f: &mut F)
where
    F: FnMut(&[usize], &[f64]),
{
    let cols = wn.cols();
    let k = wn.rows();
    let mut word = vec![first; m];
    let mut sums = vec![vec![0.0; cols]; m];
    sums[0].copy_from_slice(wn.row(first));
    recurse(wn, k, 1, &mut word, &mut sums, f);

    fn recurse<F: FnMut(&[usize], &[f64])>(wn: &Channel, k: usize, depth: usize, word: &mut [usize], sums: &mut [Vec<f64>], f: &mut F) {
        let m = word.len();
        if depth == m {
            f(word, &sums[m - 1]);
            return;
        }
        for x in word[depth - 1]..k {
            word[depth] = x;
            let (done, rest) = sums.split_at_mut(depth);
            for ((dst, &prev), &w) in rest[0].iter_mut().zip(&done[depth - 1]).zip(wn.row(x)) {
                *dst = prev + w;
            }
            recurse(wn, k, depth + 1, word, sums, f);
        }
    }
}

fn mixture_distance(sum: &[f64], m: f64, target: &FiniteDistribution) -> f64 {
    (0.5 * compensated_sum(sum.iter().zip(target.pmf()).map(|(s, t)| (s / m - t).abs()))).clamp(0.0, 1.0)
}

/// Global minimum of the code distance over all codeword multisets of size
/// `m`. Among codes within 1e-12 of the minimum, the lexicographically
/// smallest sorted codeword tuple is returned.
pub fn exhaustive_optimal_code(wn: &Channel, target: &FiniteDistribution, m: usize, n: usize, budget: u128) -> Result<(ResolvabilityCode, f64)> {
    if m == 0 {
        return Err(Error::domain("code size M must be at least 1"));
    }
    if target.alphabet() != wn.output() {
        return Err(Error::domain("target alphabet differs from the block channel output"));
    }
    let k = wn.rows();
    match multiset_count(k, m) {
        Some(c) if c <= budget => {}
        _ => {
            return Err(Error::resource(format!(
                "exhaustive search over C({} + {m} - 1, {m}) codeword multisets exceeds the budget {budget}",
                k
            )))
        }
    }
    let mf = m as f64;
    let minimum = (0..k)
        .into_par_iter()
        .map(|first| {
            let mut best = f64::INFINITY;
            visit_multisets(wn, first, m, &mut |_, sum| best = best.min(mixture_distance(sum, mf, target)));
            best
        })
        .reduce(|| f64::INFINITY, f64::min);

    let mut found: Option<Vec<usize>> = None;
    for first in 0..k {
        visit_multisets(wn, first, m, &mut |word, sum| {
            if found.is_none() && mixture_distance(sum, mf, target) <= minimum + TIE_TOLERANCE {
                found = Some(word.to_vec());
            }
        });
        if found.is_some() {
            break;
        }
    }
    let words = found.expect("the minimum is attained by some multiset");
    let code = ResolvabilityCode::new(wn.input().clone(), n, words, None)?;
    let d = code_distance(&code, wn, target)?;
    Ok((code, d))
}

/// Spectrum of `(1/n) log Wⁿ(Ỹ|X̃)/ref(Ỹ)` with `X̃ = φ(U_M)`.
pub fn code_info_spectrum(code: &ResolvabilityCode, wn: &Channel, reference: &FiniteDistribution) -> Result<Spectrum> {
    check_code_channel(code, wn)?;
    info_density_spectrum(&code.input_distribution()?, wn, reference, code.n(), true)
}
