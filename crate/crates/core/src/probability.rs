//! Exact finite-alphabet probability primitives.
//!
//! Distributions and channels are stored as dense `f64` arrays indexed by an
//! [`Alphabet`]. Block alphabets `𝒳ⁿ` are represented implicitly as a base
//! alphabet raised to a power; sequence index `i` corresponds to the base-`|𝒳|`
//! digits of `i`, most significant letter first, so index order is
//! lexicographic order of sequences.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Tolerance on "sums to one" for user-supplied distributions and channels.
pub const INPUT_SUM_TOLERANCE: f64 = 1e-12;

/// Tolerance on "sums to one" after n-fold products and mixtures.
pub const PRODUCT_SUM_TOLERANCE: f64 = 1e-9;

/// Default cap on the number of enumerated outcomes (or matrix entries).
pub const DEFAULT_ENUMERATION_BUDGET: usize = 1 << 22;

/// An ordered set of symbol labels, optionally raised to a block power.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Arc<[String]>,
    power: usize,
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.power == 1 {
            write!(f, "Alphabet{:?}", &*self.symbols)
        } else {
            write!(f, "Alphabet{:?}^{}", &*self.symbols, self.power)
        }
    }
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = labels.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::validation("alphabet is empty"));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::validation(format!("alphabet label {i} is empty")));
            }
            if s.contains(',') || s.chars().any(char::is_whitespace) {
                return Err(Error::validation(format!(
                    "alphabet label {s:?} contains a comma or whitespace"
                )));
            }
            if symbols[..i].contains(s) {
                return Err(Error::validation(format!("duplicate alphabet label {s:?}")));
            }
        }
        Ok(Alphabet { symbols: symbols.into(), power: 1 })
    }

    /// `{0, 1}`.
    pub fn binary() -> Self {
        Alphabet::new(["0", "1"]).expect("static labels")
    }

    /// `{0, 1, …, k-1}` with decimal labels.
    pub fn numbered(k: usize) -> Result<Self> {
        Alphabet::new((0..k).map(|i| i.to_string()))
    }

    /// Size of the (block) alphabet.
    pub fn len(&self) -> usize {
        self.symbols.len().pow(self.power as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn base_len(&self) -> usize {
        self.symbols.len()
    }

    /// Block length this alphabet represents (1 for a letter alphabet).
    pub fn power(&self) -> usize {
        self.power
    }

    /// The single-letter alphabet this block alphabet is built from.
    pub fn base(&self) -> Alphabet {
        Alphabet { symbols: self.symbols.clone(), power: 1 }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// The block alphabet `𝒳ⁿ`, refusing sizes above `budget`.
    pub fn pow(&self, n: usize, budget: usize) -> Result<Alphabet> {
        if self.power != 1 {
            return Err(Error::domain("only letter alphabets can be raised to a power"));
        }
        if n == 0 {
            return Err(Error::domain("blocklength must be at least 1"));
        }
        let size = checked_size(self.symbols.len(), n)
            .filter(|&s| s <= budget)
            .ok_or_else(|| {
                Error::resource(format!(
                    "|alphabet|^n = {}^{} exceeds the enumeration budget {}; use \
                     spectrum_memoryless_exact for spectra of memoryless models",
                    self.symbols.len(),
                    n,
                    budget
                ))
            })?;
        debug_assert!(size > 0);
        Ok(Alphabet { symbols: self.symbols.clone(), power: n })
    }

    /// Letter indices of sequence `index`, most significant first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let k = self.symbols.len();
        let mut out = vec![0; self.power];
        for slot in out.iter_mut().rev() {
            *slot = index % k;
            index /= k;
        }
        out
    }

    /// Inverse of [`Alphabet::digits`].
    pub fn index_of_digits(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.power {
            return Err(Error::domain(format!(
                "sequence length {} does not match blocklength {}",
                digits.len(),
                self.power
            )));
        }
        let k = self.symbols.len();
        let mut idx = 0usize;
        for &d in digits {
            if d >= k {
                return Err(Error::domain(format!("letter index {d} outside alphabet of size {k}")));
            }
            idx = idx * k + d;
        }
        Ok(idx)
    }

    fn single_char(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    /// Display label of an outcome. Sequences over single-character
    /// alphabets are concatenated (`"010"`); otherwise letters are joined
    /// with commas.
    pub fn label(&self, index: usize) -> String {
        if self.power == 1 {
            return self.symbols[index].clone();
        }
        let digits = self.digits(index);
        let sep = if self.single_char() { "" } else { "," };
        digits.iter().map(|&d| self.symbols[d].as_str()).collect::<Vec<_>>().join(sep)
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Parses a label produced by [`Alphabet::label`].
    pub fn index_of(&self, label: &str) -> Result<usize> {
        let unknown = || Error::domain(format!("unknown symbol {label:?} for {self:?}"));
        if self.power == 1 {
            return self.symbol_index(label).ok_or_else(unknown);
        }
        let letters: Vec<String> = if self.single_char() {
            label.chars().map(String::from).collect()
        } else {
            label.split(',').map(String::from).collect()
        };
        let digits = letters
            .iter()
            .map(|l| self.symbol_index(l).ok_or_else(unknown))
            .collect::<Result<Vec<_>>>()?;
        self.index_of_digits(&digits)
    }
}

fn checked_size(k: usize, n: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = acc.checked_mul(k)?;
    }
    Some(acc)
}

fn check_same(a: &Alphabet, b: &Alphabet, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::domain(format!("alphabet mismatch in {what}: {a:?} vs {b:?}")));
    }
    Ok(())
}

/// A probability mass function over a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    alphabet: Alphabet,
    pmf: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(alphabet: Alphabet, pmf: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(alphabet, pmf, INPUT_SUM_TOLERANCE)
    }

    pub fn with_tolerance(alphabet: Alphabet, pmf: Vec<f64>, tol: f64) -> Result<Self> {
        if pmf.len() != alphabet.len() {
            return Err(Error::validation(format!(
                "pmf has {} entries but the alphabet has {} symbols",
                pmf.len(),
                alphabet.len()
            )));
        }
        for (i, &p) in pmf.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::validation(format!("pmf entry {i} is {p}; must be finite and >= 0")));
            }
        }
        let sum = compensated_sum(pmf.iter().copied());
        if (sum - 1.0).abs() > tol {
            return Err(Error::validation(format!("pmf sums to {sum}, expected 1 within {tol:e}")));
        }
        Ok(FiniteDistribution { alphabet, pmf })
    }

    /// Convenience constructor over a fresh letter alphabet.
    pub fn from_labels<S: Into<String>>(labels: impl IntoIterator<Item = S>, pmf: Vec<f64>) -> Result<Self> {
        Self::new(Alphabet::new(labels)?, pmf)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        FiniteDistribution { alphabet, pmf: vec![1.0 / k as f64; k] }
    }

    pub fn point_mass(alphabet: Alphabet, index: usize) -> Result<Self> {
        if index >= alphabet.len() {
            return Err(Error::domain(format!("point mass index {index} outside alphabet")));
        }
        let mut pmf = vec![0.0; alphabet.len()];
        pmf[index] = 1.0;
        Ok(FiniteDistribution { alphabet, pmf })
    }

    /// Binary distribution with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(Alphabet::binary(), vec![1.0 - p, p])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.pmf[index]
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        compensated_sum(self.pmf.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()))
    }

    /// The i.i.d. product `Pⁿ` over `𝒳ⁿ`.
    pub fn power(&self, n: usize, budget: usize) -> Result<Self> {
        let alphabet = self.alphabet.pow(n, budget)?;
        let mut pmf = vec![1.0];
        for _ in 0..n {
            pmf = pmf.iter().flat_map(|&acc| self.pmf.iter().map(move |&p| acc * p)).collect();
        }
        FiniteDistribution::with_tolerance(alphabet, pmf, PRODUCT_SUM_TOLERANCE)
    }
}

/// A row-stochastic matrix from an input alphabet to an output alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    matrix: Vec<f64>,
}

impl Channel {
    pub fn new(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(input, output, rows, INPUT_SUM_TOLERANCE)
    }

    pub fn with_tolerance(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::validation(format!(
                "channel has {} rows but the input alphabet has {} symbols",
                rows.len(),
                input.len()
            )));
        }
        let cols = output.len();
        let mut matrix = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::validation(format!(
                    "channel row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::validation(format!(
                        "channel row {r} entry {c} is {w}; must be finite and >= 0"
                    )));
                }
            }
            let sum = compensated_sum(row.iter().copied());
            if (sum - 1.0).abs() > tol {
                return Err(Error::validation(format!(
                    "channel row {r} sums to {sum}, expected 1 within {tol:e}"
                )));
            }
            matrix.extend_from_slice(row);
        }
        Ok(Channel { input, output, matrix })
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        let mut matrix = vec![0.0; k * k];
        for i in 0..k {
            matrix[i * k + i] = 1.0;
        }
        Channel { input: alphabet.clone(), output: alphabet, matrix }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        let b = Alphabet::binary();
        Channel::new(b.clone(), b, vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Channel whose every row equals `row`.
    pub fn constant_rows(input: Alphabet, row: &FiniteDistribution) -> Self {
        let matrix = (0..input.len()).flat_map(|_| row.pmf().iter().copied()).collect();
        Channel { input, output: row.alphabet().clone(), matrix }
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn rows(&self) -> usize {
        self.input.len()
    }

    pub fn cols(&self) -> usize {
        self.output.len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let c = self.cols();
        &self.matrix[x * c..(x + 1) * c]
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.cols() + y]
    }

    /// The memoryless extension `Wⁿ(y|x) = Π W(yᵢ|xᵢ)`.
    pub fn power(&self, n: usize, budget: usize) -> Result<Self> {
        let input = self.input.pow(n, budget)?;
        let output = self.output.pow(n, budget)?;
        let entries = input.len().checked_mul(output.len()).filter(|&e| e <= budget);
        if entries.is_none() {
            return Err(Error::resource(format!(
                "materializing W^{n} needs {}x{} entries, above the enumeration budget {budget}",
                input.len(),
                output.len()
            )));
        }
        let (r1, c1) = (self.rows(), self.cols());
        let mut matrix = vec![1.0];
        let (mut rows, mut cols) = (1usize, 1usize);
        for _ in 0..n {
            let mut next = vec![0.0; rows * r1 * cols * c1];
            let next_cols = cols * c1;
            for x in 0..rows {
                for xl in 0..r1 {
                    let out_row = x * r1 + xl;
                    for y in 0..cols {
                        let acc = matrix[x * cols + y];
                        for yl in 0..c1 {
                            next[out_row * next_cols + y * c1 + yl] = acc * self.matrix[xl * c1 + yl];
                        }
                    }
                }
            }
            matrix = next;
            rows *= r1;
            cols *= c1;
        }
        let ch = Channel { input, output, matrix };
        debug_assert!((0..ch.rows()).all(|x| (compensated_sum(ch.row(x).iter().copied()) - 1.0).abs() <= PRODUCT_SUM_TOLERANCE));
        Ok(ch)
    }
}

/// How a two-component memoryless model picks its per-block law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductMode {
    Iid,
    /// Component 1 for odd blocklengths, component 2 for even ones.
    Alternating,
}

/// A memoryless source/channel model: one `(P_X, W)` pair, or two pairs
/// selected by the parity of the blocklength.
#[derive(Clone, Debug)]
pub struct MemorylessModel {
    mode: ProductMode,
    components: Vec<(FiniteDistribution, Channel)>,
}

impl MemorylessModel {
    pub fn iid(source: FiniteDistribution, channel: Channel) -> Result<Self> {
        check_same(source.alphabet(), channel.input(), "source vs channel input")?;
        Ok(MemorylessModel { mode: ProductMode::Iid, components: vec![(source, channel)] })
    }

    pub fn alternating(odd: (FiniteDistribution, Channel), even: (FiniteDistribution, Channel)) -> Result<Self> {
        check_same(odd.0.alphabet(), odd.1.input(), "odd-n source vs channel input")?;
        check_same(even.0.alphabet(), even.1.input(), "even-n source vs channel input")?;
        check_same(odd.1.input(), even.1.input(), "component input alphabets")?;
        check_same(odd.1.output(), even.1.output(), "component output alphabets")?;
        Ok(MemorylessModel { mode: ProductMode::Alternating, components: vec![odd, even] })
    }

    pub fn mode(&self) -> ProductMode {
        self.mode
    }

    pub fn components(&self) -> &[(FiniteDistribution, Channel)] {
        &self.components
    }

    /// Zero-based index of the component governing blocklength `n`.
    pub fn component_index(&self, n: usize) -> usize {
        match self.mode {
            ProductMode::Iid => 0,
            ProductMode::Alternating => usize::from(n.is_multiple_of(2)),
        }
    }

    pub fn component(&self, n: usize) -> &(FiniteDistribution, Channel) {
        &self.components[self.component_index(n)]
    }

    pub fn at(&self, n: usize) -> Result<ProductSpec> {
        ProductSpec::new(self.clone(), n)
    }
}

/// A memoryless model at a fixed blocklength.
#[derive(Clone, Debug)]
pub struct ProductSpec {
    model: MemorylessModel,
    n: usize,
}

impl ProductSpec {
    pub fn new(model: MemorylessModel, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("blocklength must be at least 1"));
        }
        Ok(ProductSpec { model, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &MemorylessModel {
        &self.model
    }

    pub fn component(&self) -> &(FiniteDistribution, Channel) {
        self.model.component(self.n)
    }
}

/// Variational distance `½ Σ |P(z) − Q(z)|`.
pub fn variational_distance(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    check_same(p.alphabet(), q.alphabet(), "variational distance")?;
    let half_l1 = 0.5 * compensated_sum(p.pmf.iter().zip(&q.pmf).map(|(a, b)| (a - b).abs()));
    Ok(half_l1.clamp(0.0, 1.0))
}

/// Output law `P_Y(b) = Σ_a P_X(a) W(b|a)`.
pub fn output_distribution(px: &FiniteDistribution, w: &Channel) -> Result<FiniteDistribution> {
    check_same(px.alphabet(), w.input(), "output distribution")?;
    let pmf = (0..w.cols())
        .map(|b| compensated_sum(px.pmf.iter().enumerate().map(|(a, &p)| p * w.get(a, b))))
        .collect();
    FiniteDistribution::with_tolerance(w.output().clone(), pmf, PRODUCT_SUM_TOLERANCE)
}

/// Exact block law of the source: `Π P_{X_{j(n)}}(xᵢ)`.
pub fn product_distribution(spec: &ProductSpec, budget: usize) -> Result<FiniteDistribution> {
    spec.component().0.power(spec.n, budget)
}

/// Exact block channel: `Π W_{j(n)}(yᵢ|xᵢ)`.
pub fn product_channel(spec: &ProductSpec, budget: usize) -> Result<Channel> {
    spec.component().1.power(spec.n, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn distance_examples() {
        let b = Alphabet::binary();
        let half = FiniteDistribution::uniform(b.clone());
        let point = FiniteDistribution::point_mass(b.clone(), 0).unwrap();
        assert_eq!(variational_distance(&half, &half).unwrap(), 0.0);
        assert_eq!(variational_distance(&half, &point).unwrap(), 0.5);
        let other = FiniteDistribution::point_mass(b, 1).unwrap();
        assert_eq!(variational_distance(&point, &other).unwrap(), 1.0);
    }

    #[test]
    fn distance_rejects_mismatched_alphabets() {
        let p = FiniteDistribution::uniform(Alphabet::binary());
        let q = FiniteDistribution::uniform(Alphabet::new(["a", "b"]).unwrap());
        assert!(matches!(variational_distance(&p, &q), Err(Error::Domain(_))));
    }

    #[test]
    fn output_distribution_examples() {
        let b = Alphabet::binary();
        let uniform = FiniteDistribution::uniform(b.clone());
        let out = output_distribution(&uniform, &Channel::bsc(0.2).unwrap()).unwrap();
        assert!(out.pmf().iter().all(|&p| approx(p, 0.5, 1e-15)));

        let px = FiniteDistribution::bernoulli(0.3).unwrap();
        let out = output_distribution(&px, &Channel::identity(b.clone())).unwrap();
        assert_eq!(out.pmf(), px.pmf());

        let r = FiniteDistribution::from_labels(["u", "v", "w"], vec![0.2, 0.3, 0.5]).unwrap();
        let w = Channel::constant_rows(b, &r);
        let out = output_distribution(&px, &w).unwrap();
        for (a, b) in out.pmf().iter().zip(r.pmf()) {
            assert!(approx(*a, *b, 1e-15));
        }
    }

    #[test]
    fn product_distribution_examples() {
        let model = MemorylessModel::iid(FiniteDistribution::bernoulli(0.5).unwrap(), Channel::identity(Alphabet::binary())).unwrap();
        let p = product_distribution(&model.at(2).unwrap(), DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(p.pmf(), &[0.25; 4]);

        let point = FiniteDistribution::point_mass(Alphabet::binary(), 1).unwrap();
        let p = point.power(5, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(p.prob(31), 1.0);
        assert_eq!(p.alphabet().label(31), "11111");

        let src = FiniteDistribution::new(Alphabet::binary(), vec![0.3, 0.7]).unwrap();
        let p = src.power(2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let expect = [0.09, 0.21, 0.21, 0.49];
        for (a, b) in p.pmf().iter().zip(expect) {
            assert!(approx(*a, b, 1e-15));
        }
    }

    #[test]
    fn product_channel_examples() {
        let b = Alphabet::binary();
        let id2 = Channel::identity(b.clone()).power(2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(id2, Channel::identity(b.pow(2, 16).unwrap()));

        let bsc = Channel::bsc(0.1).unwrap();
        assert_eq!(bsc.power(1, 16).unwrap().matrix, bsc.matrix);

        let w2 = bsc.power(2, 16).unwrap();
        let x = w2.input().index_of("01").unwrap();
        let y = w2.output().index_of("00").unwrap();
        assert!(approx(w2.get(x, y), 0.09, 1e-15));
    }

    #[test]
    fn alternating_spec_selects_by_parity() {
        let b = Alphabet::binary();
        let odd = (FiniteDistribution::uniform(b.clone()), Channel::identity(b.clone()));
        let even = (FiniteDistribution::point_mass(b.clone(), 0).unwrap(), Channel::bsc(0.5).unwrap());
        let model = MemorylessModel::alternating(odd, even).unwrap();
        let p3 = product_distribution(&model.at(3).unwrap(), 64).unwrap();
        assert_eq!(p3.pmf(), &[0.125; 8]);
        let p2 = product_distribution(&model.at(2).unwrap(), 64).unwrap();
        assert_eq!(p2.prob(0), 1.0);
        let w2 = product_channel(&model.at(2).unwrap(), 64).unwrap();
        assert!(w2.row(3).iter().all(|&v| v == 0.25));
    }

    #[test]
    fn budget_is_enforced() {
        let p = FiniteDistribution::bernoulli(0.2).unwrap();
        assert!(matches!(p.power(23, DEFAULT_ENUMERATION_BUDGET), Err(Error::Resource(_))));
        assert!(matches!(Channel::bsc(0.1).unwrap().power(12, DEFAULT_ENUMERATION_BUDGET), Err(Error::Resource(_))));
    }

    #[test]
    fn validation_names_the_row() {
        let b = Alphabet::binary();
        let err = Channel::new(b.clone(), b.clone(), vec![vec![0.5, 0.5], vec![0.5, 0.4]]).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
        assert!(FiniteDistribution::new(b.clone(), vec![1.2, -0.2]).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let a = Alphabet::new(["x", "yy"]).unwrap().pow(3, 64).unwrap();
        for i in 0..a.len() {
            assert_eq!(a.index_of(&a.label(i)).unwrap(), i);
        }
        assert_eq!(a.label(1), "x,x,yy");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn dist(k: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(0.0f64..1.0, k).prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-3).prop_map(|v| {
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            })
        }

        fn mk(v: Vec<f64>) -> FiniteDistribution {
            FiniteDistribution::with_tolerance(Alphabet::numbered(v.len()).unwrap(), v, 1e-9).unwrap()
        }

        proptest! {
            #[test]
            fn triangle_inequality(p in dist(4), q in dist(4), r in dist(4)) {
                let (p, q, r) = (mk(p), mk(q), mk(r));
                let pq = variational_distance(&p, &q).unwrap();
                let qr = variational_distance(&q, &r).unwrap();
                let pr = variational_distance(&p, &r).unwrap();
                prop_assert!(pr <= pq + qr + 1e-15);
                prop_assert!((0.0..=1.0).contains(&pq));
                prop_assert_eq!(pq, variational_distance(&q, &p).unwrap());
            }

            #[test]
            fn pushforward_commutes_with_product(p in dist(2), a in 0.0f64..1.0, b in 0.0f64..1.0, n in 1usize..5) {
                let px = FiniteDistribution::with_tolerance(Alphabet::binary(), p, 1e-9).unwrap();
                let w = Channel::new(Alphabet::binary(), Alphabet::binary(), vec![vec![a, 1.0 - a], vec![1.0 - b, b]]).unwrap();
                let lhs = output_distribution(&px.power(n, 1 << 10).unwrap(), &w.power(n, 1 << 10).unwrap()).unwrap();
                let rhs = output_distribution(&px, &w).unwrap().power(n, 1 << 10).unwrap();
                for (l, r) in lhs.pmf().iter().zip(rhs.pmf()) {
                    prop_assert!((l - r).abs() < 1e-12);
                }
            }

            #[test]
            fn product_channel_rows_are_stochastic(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, n in 1usize..4) {
                let w = Channel::new(
                    Alphabet::binary(),
                    Alphabet::numbered(3).unwrap(),
                    vec![vec![a * 0.5, 0.5, 0.5 - a * 0.5], vec![b, (1.0 - b) * c, (1.0 - b) * (1.0 - c)]],
                ).unwrap();
                let wn = w.power(n, 1 << 12).unwrap();
                for x in 0..wn.rows() {
                    prop_assert!((compensated_sum(wn.row(x).iter().copied()) - 1.0).abs() <= 1e-9);
                }
            }
        }
    }
}
