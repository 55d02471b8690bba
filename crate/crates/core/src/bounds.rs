//! Finite-length upper and lower bounds on the variational distance achieved
//! by resolvability codes, and their optimization over the threshold `c`.
//!
//! Thresholds `c` are per-letter (nats per symbol). The achievability bound
//! guarantees that *some* code of size `M` reaches the stated distance, so it
//! is compared against the exhaustive optimum, not a particular random code.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

const UNIFORM_GRID_POINTS: usize = 50;

/// Slack on `M ≤ e^{nc}` checked on the log scale, so a grid point computed
/// as `ln M / n` is accepted.
const SIDE_CONDITION_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Achievability,
    Converse,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Achievability => "achievability",
            BoundKind::Converse => "converse",
        }
    }
}

/// One bound evaluation. `raw` is the unclamped value; `value` is what the
/// bound asserts about the distance (clamped to `[0, 1]`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPoint {
    pub c: f64,
    pub m: u64,
    pub n: usize,
    pub value: f64,
    pub raw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCurve {
    pub kind: BoundKind,
    pub label: String,
    pub points: Vec<BoundPoint>,
}

fn check_m(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("code size M must be at least 1"));
    }
    Ok(())
}

/// `Pr{(1/n) log W/P_Z > c} + ½√(e^{nc}/M)`, clamped to at most 1.
pub fn achievability_bound(s: &Spectrum, m: u64, c: f64) -> Result<BoundPoint> {
    check_m(m)?;
    if c.is_nan() || c < 0.0 {
        return Err(Error::domain(format!("threshold c = {c} must be >= 0")));
    }
    let n = s.n();
    let tail = s.per_letter_tail(c, true)?;
    let penalty = 0.5 * ((n as f64 * c - (m as f64).ln()) / 2.0).exp();
    let raw = tail + penalty;
    Ok(BoundPoint { c, m, n, value: raw.min(1.0), raw })
}

/// `Pr{(1/n) log W/P_Z ≥ c} − M e^{−nc}` for a code-induced spectrum;
/// requires `M ≤ e^{nc}`. The reported value is `max(raw, 0)`.
pub fn converse_bound(s_code: &Spectrum, m: u64, c: f64) -> Result<BoundPoint> {
    check_m(m)?;
    let n = s_code.n();
    let ln_m = (m as f64).ln();
    if ln_m > n as f64 * c + SIDE_CONDITION_SLACK {
        return Err(Error::Precondition(format!("M = {m} exceeds e^(nc) with n = {n}, c = {c}")));
    }
    let tail = s_code.per_letter_tail(c, false)?;
    let raw = tail - (ln_m - n as f64 * c).exp();
    Ok(BoundPoint { c, m, n, value: raw.max(0.0), raw })
}

/// Default threshold grid: every finite atom (per-letter scale) plus 50
/// uniform points over `[min − 1, max + 1]`. Tails treat values within the
/// spectrum merge tolerance as equal, so the atom itself already covers both
/// one-sided limits at a jump.
pub fn default_c_grid(s: &Spectrum) -> Result<Vec<f64>> {
    let per_letter = s.to_per_letter()?;
    let finite = per_letter.finite_atoms();
    let mut grid = Vec::new();
    if finite.is_empty() {
        return Ok(grid);
    }
    let lo = finite[0].value - 1.0;
    let hi = finite[finite.len() - 1].value + 1.0;
    for i in 0..UNIFORM_GRID_POINTS {
        grid.push(lo + (hi - lo) * i as f64 / (UNIFORM_GRID_POINTS - 1) as f64);
    }
    grid.extend(atom_candidates(&per_letter));
    Ok(grid)
}

fn atom_candidates(per_letter: &Spectrum) -> Vec<f64> {
    per_letter.finite_atoms().iter().map(|a| a.value).collect()
}

/// Best bound over `c_grid` together with every spectrum atom: minimum for
/// achievability, maximum for converse. Converse candidates are restricted
/// to `c ≥ (1/n) ln M`, achievability candidates to `c ≥ 0`. Ties go to the
/// smaller `c`.
pub fn optimize_bound_over_c(s: &Spectrum, m: u64, kind: BoundKind, c_grid: &[f64]) -> Result<BoundPoint> {
    check_m(m)?;
    let per_letter = s.to_per_letter()?;
    let n = s.n() as f64;
    let floor = match kind {
        BoundKind::Achievability => 0.0,
        BoundKind::Converse => (m as f64).ln() / n,
    };
    let mut grid: Vec<f64> = c_grid.iter().copied().chain(atom_candidates(&per_letter)).filter(|c| c.is_finite()).collect();
    if kind == BoundKind::Converse {
        // the boundary point itself is admissible; keep it when it rounds low
        grid.retain(|&c| (m as f64).ln() <= n * c + SIDE_CONDITION_SLACK);
    } else {
        grid.retain(|&c| c >= floor);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::domain("no admissible threshold in the c-grid"));
    }

    let evaluated: Vec<BoundPoint> = grid
        .par_iter()
        .map(|&c| match kind {
            BoundKind::Achievability => achievability_bound(s, m, c),
            BoundKind::Converse => converse_bound(s, m, c),
        })
        .collect::<Result<_>>()?;

    let mut best = evaluated[0];
    for p in &evaluated[1..] {
        let better = match kind {
            BoundKind::Achievability => p.raw < best.raw,
            BoundKind::Converse => p.raw > best.raw,
        };
        if better {
            best = *p;
        }
    }
    Ok(best)
}

/// Code sizes `⌊e^{nR}⌋` (at least 1) for each rate in nats, deduplicated.
pub fn sizes_for_rates(rates: &[f64], n: usize) -> Vec<u64> {
    // the small guard keeps e^{n ln 2} = 15.999… from flooring to 15
    let mut out: Vec<u64> = rates.iter().map(|&r| (((n as f64 * r).exp() + 1e-9).floor() as u64).max(1)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Optimized bounds across code sizes. `spectrum_for` supplies the spectrum
/// evaluated at each size: the true input spectrum for achievability, the
/// chosen code's spectrum for converse.
pub fn bound_sweep<F>(label: &str, m_grid: &[u64], kind: BoundKind, c_grid: &[f64], mut spectrum_for: F) -> Result<SweepCurve>
where
    F: FnMut(u64) -> Result<Spectrum>,
{
    let mut sizes = m_grid.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut points = Vec::with_capacity(sizes.len());
    for m in sizes {
        let s = spectrum_for(m)?;
        points.push(optimize_bound_over_c(&s, m, kind, c_grid)?);
    }
    Ok(SweepCurve { kind, label: label.to_string(), points })
}
