//! Minimum mutual information over inputs that reproduce a target output law.
//!
//! For fixed `W`, `I(Q, W)` is concave in `Q`, so its minimum over the
//! polytope `{Q ≥ 0 : QW = P_Y}` sits at a vertex. Vertices are found by
//! support enumeration: every support `S` whose columns of the constraint
//! matrix are independent yields at most one basic solution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, for_each_composition};
use crate::probability::{output_distribution, Channel, FiniteDistribution};

/// Singular values at or below this count as zero when computing ranks.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Default tolerance on `‖QW − P_Y‖_∞`.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Negative coordinates above `-NEGATIVE_CLAMP` are rounded up to zero.
const NEGATIVE_CLAMP: f64 = 1e-12;

const DEDUP_GRID: f64 = 1e-9;
const TIE_TOLERANCE: f64 = 1e-12;

/// `I(Q; W) = Σ Q(a)W(b|a) ln(W(b|a)/(QW)(b))`, with `0 ln 0 = 0`.
pub fn mutual_information(q: &FiniteDistribution, w: &Channel) -> Result<f64> {
    let qw = output_distribution(q, w)?;
    let terms = q.pmf().iter().enumerate().filter(|(_, &p)| p > 0.0).flat_map(|(a, &p)| {
        let qw = &qw;
        w.row(a).iter().enumerate().filter(|(_, &wb)| wb > 0.0).map(move |(b, &wb)| p * wb * (wb / qw.prob(b)).ln())
    });
    Ok(compensated_sum(terms).max(0.0))
}

/// `D(W ‖ refY | P) = Σ_a P(a) Σ_b W(b|a) ln(W(b|a)/refY(b))`; `+∞` when
/// `refY` misses mass the channel produces.
pub fn conditional_divergence(w: &Channel, ref_y: &FiniteDistribution, p: &FiniteDistribution) -> Result<f64> {
    if p.alphabet() != w.input() || ref_y.alphabet() != w.output() {
        return Err(Error::domain("conditional divergence: alphabets disagree"));
    }
    let mut terms = Vec::new();
    for (a, &pa) in p.pmf().iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (b, &wb) in w.row(a).iter().enumerate() {
            if wb == 0.0 {
                continue;
            }
            let r = ref_y.prob(b);
            if r == 0.0 {
                return Ok(f64::INFINITY);
            }
            terms.push(pa * wb * (wb / r).ln());
        }
    }
    Ok(compensated_sum(terms))
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub q: FiniteDistribution,
    /// Indices with strictly positive mass.
    pub support: Vec<usize>,
    pub mutual_information: f64,
}

#[derive(Clone, Debug)]
pub struct PolytopeVertexSet {
    pub vertices: Vec<Vertex>,
    /// Rank of the stacked constraint system `[Wᵀ; 1ᵀ]`.
    pub rank: usize,
}

fn check_target(w: &Channel, py: &FiniteDistribution) -> Result<()> {
    if w.output() != py.alphabet() {
        return Err(Error::domain("target alphabet differs from the channel output"));
    }
    Ok(())
}

/// Constraint matrix with one row per output letter plus the normalization row.
fn constraint_system(w: &Channel, py: &FiniteDistribution) -> (DMatrix<f64>, DVector<f64>) {
    let (kx, ky) = (w.rows(), w.cols());
    let a = DMatrix::from_fn(ky + 1, kx, |b, x| if b < ky { w.get(x, b) } else { 1.0 });
    let rhs = DVector::from_fn(ky + 1, |b, _| if b < ky { py.prob(b) } else { 1.0 });
    (a, rhs)
}

fn rank(m: &DMatrix<f64>) -> usize {
    m.clone().svd(false, false).singular_values.iter().filter(|&&s| s > RANK_THRESHOLD).count()
}

fn for_each_subset<F: FnMut(&[usize])>(k: usize, size: usize, f: &mut F) {
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(&idx);
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < k - size + i {
                idx[i] += 1;
                for j in i + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn max_violation(q: &[f64], w: &Channel, py: &FiniteDistribution) -> f64 {
    (0..w.cols())
        .map(|b| (compensated_sum(q.iter().enumerate().map(|(a, &p)| p * w.get(a, b))) - py.prob(b)).abs())
        .fold(0.0, f64::max)
}

/// All basic feasible solutions of `{Q ≥ 0 : QW = P_Y}`.
pub fn feasible_polytope_vertices(w: &Channel, py: &FiniteDistribution, tol: f64) -> Result<PolytopeVertexSet> {
    check_target(w, py)?;
    let (a, rhs) = constraint_system(w, py);
    let kx = w.rows();
    let r = rank(&a);
    let mut seen: Vec<Vec<i64>> = Vec::new();
    let mut vertices = Vec::new();

    for size in 1..=r.min(kx) {
        for_each_subset(kx, size, &mut |support: &[usize]| {
            let cols = DMatrix::from_fn(a.nrows(), support.len(), |i, j| a[(i, support[j])]);
            let svd = cols.svd(true, true);
            if svd.singular_values.iter().filter(|&&s| s > RANK_THRESHOLD).count() < support.len() {
                return;
            }
            let Ok(sol) = svd.solve(&rhs, RANK_THRESHOLD) else { return };
            if sol.iter().any(|&v| v < -NEGATIVE_CLAMP) {
                return;
            }
            let mut q = vec![0.0; kx];
            for (j, &x) in support.iter().enumerate() {
                q[x] = sol[j].max(0.0);
            }
            let total: f64 = compensated_sum(q.iter().copied());
            if (total - 1.0).abs() > tol || max_violation(&q, w, py) > tol {
                return;
            }
            let key: Vec<i64> = q.iter().map(|&v| (v / DEDUP_GRID).round() as i64).collect();
            if seen.contains(&key) {
                return;
            }
            seen.push(key);
            let active: Vec<usize> = (0..kx).filter(|&x| q[x] > 0.0).collect();
            vertices.push((q, active));
        });
    }

    if vertices.is_empty() {
        return Err(Error::Infeasible("no input distribution reproduces the target output".into()));
    }
    let vertices = vertices
        .into_iter()
        .map(|(q, support)| {
            let q = FiniteDistribution::with_tolerance(w.input().clone(), q, tol.max(1e-12))?;
            let mi = mutual_information(&q, w)?;
            Ok(Vertex { q, support, mutual_information: mi })
        })
        .collect::<Result<_>>()?;
    Ok(PolytopeVertexSet { vertices, rank: r })
}

/// `min { I(Q, W) : QW = P_Y }`, attained at a vertex. Ties within 1e-12
/// go to the lexicographically smallest support.
pub fn min_mutual_information(w: &Channel, py: &FiniteDistribution, tol: f64) -> Result<(FiniteDistribution, f64)> {
    let set = feasible_polytope_vertices(w, py, tol)?;
    let min = set.vertices.iter().map(|v| v.mutual_information).fold(f64::INFINITY, f64::min);
    let best = set
        .vertices
        .iter()
        .filter(|v| v.mutual_information <= min + TIE_TOLERANCE)
        .min_by(|a, b| a.support.cmp(&b.support))
        .expect("vertex set is nonempty");
    Ok((best.q.clone(), best.mutual_information))
}

/// Outcome of the brute-force simplex grid search.
#[derive(Clone, Debug)]
pub struct GridOracle {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Grid points accepted as matching the target.
    pub accepted: usize,
    /// First-order estimate of how far `value` can sit from the true
    /// constrained minimum: the spread of partial derivatives of `I` over the
    /// accepted points times the ℓ₁ extent of the accepted cloud plus one
    /// grid cell.
    pub discretization_error: f64,
}

fn entropy(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&v| v > 0.0).map(|v| -v * v.ln()).sum()
}

/// Minimum of `I(Q, W) = H(QW) − Σ Q(a) H(W(·|a))` over simplex grid points
/// with spacing `step` whose output matches `P_Y` within `match_tol`.
/// Independent of the vertex method; intended for validation only.
pub fn grid_oracle_min_i(w: &Channel, py: &FiniteDistribution, step: f64, match_tol: f64) -> Result<GridOracle> {
    check_target(w, py)?;
    let kx = w.rows();
    if kx > 4 {
        return Err(Error::domain("grid oracle supports at most 4 input letters"));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::domain(format!("grid step {step} must lie in (0, 1]")));
    }
    let steps = (1.0 / step).round() as usize;
    let row_entropy: Vec<f64> = (0..kx).map(|a| entropy(w.row(a).iter().copied())).collect();
    let mut q = vec![0.0; kx];
    let mut qw = vec![0.0; w.cols()];
    let mut best = (f64::INFINITY, Vec::new());
    let mut accepted: Vec<Vec<f64>> = Vec::new();

    for_each_composition(steps, kx, |counts| {
        for (slot, &c) in q.iter_mut().zip(counts) {
            *slot = c as f64 / steps as f64;
        }
        for (b, out) in qw.iter_mut().enumerate() {
            *out = (0..kx).map(|a| q[a] * w.get(a, b)).sum();
        }
        if qw.iter().zip(py.pmf()).any(|(x, y)| (x - y).abs() > match_tol) {
            return;
        }
        let value = entropy(qw.iter().copied()) - q.iter().zip(&row_entropy).map(|(p, h)| p * h).sum::<f64>();
        accepted.push(q.clone());
        if value < best.0 {
            best = (value, q.clone());
        }
    });

    if accepted.is_empty() {
        return Err(Error::OracleInconclusive(format!("no grid point with step {step} matches the target within {match_tol}")));
    }

    // ∂I/∂Q(a) = D(W(·|a) ‖ QW) − 1; the constant drops out of the spread
    let mut spread: f64 = 0.0;
    for p in &accepted {
        let out: Vec<f64> = (0..w.cols()).map(|b| (0..kx).map(|a| p[a] * w.get(a, b)).sum()).collect();
        let grads: Vec<f64> = (0..kx)
            .map(|a| {
                w.row(a)
                    .iter()
                    .zip(&out)
                    .filter(|(&wb, _)| wb > 0.0)
                    .map(|(&wb, &o)| if o > 0.0 { wb * (wb / o).ln() } else { f64::INFINITY })
                    .sum::<f64>()
            })
            .collect();
        let hi = grads.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = grads.iter().copied().fold(f64::INFINITY, f64::min);
        spread = spread.max(hi - lo);
    }
    let mut extent: f64 = 0.0;
    for a in &accepted {
        for b in &accepted {
            extent = extent.max(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum());
        }
        if accepted.len() > 2000 {
            break;
        }
    }
    let reach = extent + kx as f64 * step;
    Ok(GridOracle {
        value: best.0,
        argmin: best.1,
        accepted: accepted.len(),
        discretization_error: 0.5 * spread * reach,
    })
}

#[derive(Clone, Debug)]
pub struct AlternatingResolvability {
    /// `max_j I*_j`.
    pub s: f64,
    /// `min_j I*_j`.
    pub s_star: f64,
    pub components: [(FiniteDistribution, f64); 2],
}

/// First-order rates of the parity-alternating memoryless model: the
/// minimum mutual information of each component over its own output-matching
/// inputs, combined by max (limsup rate) and min (liminf rate).
pub fn alternating_resolvability(odd: (&FiniteDistribution, &Channel), even: (&FiniteDistribution, &Channel), tol: f64) -> Result<AlternatingResolvability> {
    let solve = |(px, w): (&FiniteDistribution, &Channel)| -> Result<(FiniteDistribution, f64)> {
        let py = output_distribution(px, w)?;
        min_mutual_information(w, &py, tol)
    };
    let first = solve(odd)?;
    let second = solve(even)?;
    Ok(AlternatingResolvability {
        s: first.1.max(second.1),
        s_star: first.1.min(second.1),
        components: [first, second],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::Alphabet;

    const LN2: f64 = std::f64::consts::LN_2;

    fn h(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    fn three_input() -> Channel {
        Channel::new(Alphabet::numbered(3).unwrap(), Alphabet::binary(), vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn mutual_information_examples() {
        let b = Alphabet::binary();
        let u = FiniteDistribution::uniform(b.clone());
        assert!((mutual_information(&u, &Channel::identity(b.clone())).unwrap() - LN2).abs() < 1e-15);
        assert_eq!(mutual_information(&u, &Channel::bsc(0.5).unwrap()).unwrap(), 0.0);
        let point = FiniteDistribution::point_mass(b, 1).unwrap();
        assert_eq!(mutual_information(&point, &Channel::bsc(0.2).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn conditional_divergence_examples() {
        let b = Alphabet::binary();
        let p = FiniteDistribution::bernoulli(0.3).unwrap();
        let w = Channel::bsc(0.2).unwrap();
        let pw = output_distribution(&p, &w).unwrap();
        let d = conditional_divergence(&w, &pw, &p).unwrap();
        assert!((d - mutual_information(&p, &w).unwrap()).abs() < 1e-15);

        let r = FiniteDistribution::new(b.clone(), vec![0.4, 0.6]).unwrap();
        let flat = Channel::constant_rows(b.clone(), &r);
        assert_eq!(conditional_divergence(&flat, &r, &p).unwrap(), 0.0);

        let u = FiniteDistribution::uniform(b.clone());
        let d = conditional_divergence(&Channel::identity(b.clone()), &u, &u).unwrap();
        assert!((d - LN2).abs() < 1e-15);

        let point = FiniteDistribution::point_mass(b.clone(), 0).unwrap();
        assert_eq!(conditional_divergence(&Channel::identity(b), &point, &u).unwrap(), f64::INFINITY);
    }

    #[test]
    fn vertex_examples() {
        let b = Alphabet::binary();
        let py = FiniteDistribution::new(b.clone(), vec![0.3, 0.7]).unwrap();
        let set = feasible_polytope_vertices(&Channel::identity(b.clone()), &py, FEASIBILITY_TOLERANCE).unwrap();
        assert_eq!(set.vertices.len(), 1);
        assert!((set.vertices[0].q.prob(0) - 0.3).abs() < 1e-12);

        let u = FiniteDistribution::uniform(b.clone());
        let set = feasible_polytope_vertices(&three_input(), &u, FEASIBILITY_TOLERANCE).unwrap();
        let qs: Vec<Vec<f64>> = set.vertices.iter().map(|v| v.q.pmf().iter().map(|x| (x * 1e9).round() / 1e9).collect()).collect();
        assert!(qs.contains(&vec![0.5, 0.5, 0.0]), "{qs:?}");
        assert!(qs.contains(&vec![0.0, 0.0, 1.0]), "{qs:?}");
        assert_eq!(set.vertices.len(), 2);

        let set = feasible_polytope_vertices(&Channel::bsc(0.2).unwrap(), &u, FEASIBILITY_TOLERANCE).unwrap();
        assert_eq!(set.vertices.len(), 1);
        assert!((set.vertices[0].q.prob(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_target_is_reported() {
        let b = Alphabet::binary();
        let py = FiniteDistribution::new(b.clone(), vec![0.05, 0.95]).unwrap();
        // BSC(0.1) outputs always put at least 0.1 on each symbol
        let err = feasible_polytope_vertices(&Channel::bsc(0.1).unwrap(), &py, FEASIBILITY_TOLERANCE).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn minimum_examples() {
        let u = FiniteDistribution::uniform(Alphabet::binary());
        let (q, i) = min_mutual_information(&three_input(), &u, FEASIBILITY_TOLERANCE).unwrap();
        assert!(i.abs() < 1e-15);
        assert_eq!(q.pmf(), &[0.0, 0.0, 1.0]);

        let (_, i) = min_mutual_information(&Channel::bsc(0.11).unwrap(), &u, FEASIBILITY_TOLERANCE).unwrap();
        assert!((i - (LN2 - h(0.11))).abs() < 1e-12);
        assert!((i / LN2 - 0.500).abs() < 1e-3);

        let py = FiniteDistribution::new(Alphabet::binary(), vec![0.3, 0.7]).unwrap();
        let (_, i) = min_mutual_information(&Channel::identity(Alphabet::binary()), &py, FEASIBILITY_TOLERANCE).unwrap();
        assert!((i - h(0.3)).abs() < 1e-12);
        assert!((i / LN2 - 0.8813).abs() < 1e-4);
    }

    #[test]
    fn grid_oracle_cross_checks() {
        let u = FiniteDistribution::uniform(Alphabet::binary());
        let g = grid_oracle_min_i(&Channel::bsc(0.11).unwrap(), &u, 1e-4, 1e-5).unwrap();
        assert!((g.value - (LN2 - h(0.11))).abs() < 1e-9);

        let g = grid_oracle_min_i(&three_input(), &u, 1e-2, 1e-9).unwrap();
        assert!(g.value.abs() < 1e-12);

        let py = FiniteDistribution::new(Alphabet::binary(), vec![0.3, 0.7]).unwrap();
        let g = grid_oracle_min_i(&Channel::identity(Alphabet::binary()), &py, 1e-3, 1e-9).unwrap();
        assert!((g.value - h(0.3)).abs() < 1e-9);

        let far = FiniteDistribution::new(Alphabet::binary(), vec![0.05, 0.95]).unwrap();
        assert!(matches!(grid_oracle_min_i(&Channel::bsc(0.1).unwrap(), &far, 1e-2, 1e-6), Err(Error::OracleInconclusive(_))));
    }

    #[test]
    fn alternating_examples() {
        let b = Alphabet::binary();
        let u = FiniteDistribution::uniform(b.clone());
        let id = Channel::identity(b.clone());
        let flat = Channel::constant_rows(b.clone(), &FiniteDistribution::new(b.clone(), vec![0.3, 0.7]).unwrap());
        let r = alternating_resolvability((&u, &id), (&u, &flat), FEASIBILITY_TOLERANCE).unwrap();
        assert_eq!((r.s, r.s_star), (LN2, 0.0));
        let swapped = alternating_resolvability((&u, &flat), (&u, &id), FEASIBILITY_TOLERANCE).unwrap();
        assert_eq!((swapped.s, swapped.s_star), (r.s, r.s_star));
        let same = alternating_resolvability((&u, &id), (&u, &id), FEASIBILITY_TOLERANCE).unwrap();
        assert_eq!(same.s, same.s_star);
    }

    #[test]
    fn identity_channel_minimum_is_entropy() {
        let p = FiniteDistribution::new(Alphabet::numbered(4).unwrap(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let (_, i) = min_mutual_information(&Channel::identity(p.alphabet().clone()), &p, FEASIBILITY_TOLERANCE).unwrap();
        assert!((i - p.entropy()).abs() < 1e-12);
    }

    mod props {
        use super::super::*;
        use crate::probability::Alphabet;
        use proptest::prelude::*;

        fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            })
        }

        proptest! {
            #[test]
            fn divergence_against_true_output_is_mutual_information(p in simplex(3), r0 in simplex(3), r1 in simplex(3), r2 in simplex(3)) {
                let a = Alphabet::numbered(3).unwrap();
                let p = FiniteDistribution::with_tolerance(a.clone(), p, 1e-9).unwrap();
                let w = Channel::with_tolerance(a.clone(), a, vec![r0, r1, r2], 1e-9).unwrap();
                let pw = output_distribution(&p, &w).unwrap();
                let d = conditional_divergence(&w, &pw, &p).unwrap();
                prop_assert!((d - mutual_information(&p, &w).unwrap()).abs() < 1e-12);
            }

            #[test]
            fn optimizer_is_feasible(p in simplex(3), r0 in simplex(2), r1 in simplex(2), r2 in simplex(2)) {
                let a = Alphabet::numbered(3).unwrap();
                let p = FiniteDistribution::with_tolerance(a.clone(), p, 1e-9).unwrap();
                let w = Channel::with_tolerance(a, Alphabet::binary(), vec![r0, r1, r2], 1e-9).unwrap();
                let py = output_distribution(&p, &w).unwrap();
                let (q, i) = min_mutual_information(&w, &py, FEASIBILITY_TOLERANCE).unwrap();
                let qw = output_distribution(&q, &w).unwrap();
                for (x, y) in qw.pmf().iter().zip(py.pmf()) {
                    prop_assert!((x - y).abs() <= 1e-9);
                }
                prop_assert!(i <= mutual_information(&p, &w).unwrap() + 1e-12);
            }
        }
    }
}
