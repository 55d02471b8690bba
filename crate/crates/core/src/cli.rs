//! Model files and the batch command-line front end.
//!
//! A model file is JSON:
//!
//! ```json
//! {
//!   "version": "resolv-model/1",
//!   "mode": "iid",
//!   "sources":  [{"alphabet": ["0", "1"], "pmf": [0.5, 0.5]}],
//!   "channels": [{"input": ["0", "1"], "output": ["0", "1"],
//!                 "matrix": [[0.9, 0.1], [0.1, 0.9]]}],
//!   "target":   {"alphabet": ["0", "1"], "pmf": [0.5, 0.5]}
//! }
//! ```
//!
//! `mode` is `iid` (one source and channel), `alternating` (two of each:
//! the first governs odd blocklengths, the second even ones), or `explicit`
//! (one source over whole blocks and one block channel, with `"n"` giving
//! the blocklength). `target` is optional and defaults to the output law of
//! the source; for memoryless modes it is a single-letter law extended
//! i.i.d. to blocks.
//!
//! Every command writes CSV with a header row. Information-valued columns
//! carry a `_nats` or `_bits` suffix according to `--units`; other numbers
//! are probabilities or distances. Floats are printed in scientific notation
//! with 12 significant digits.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::asymptotics::{component_spectra, convergence_sweep, DensityKind};
use crate::bounds::{achievability_bound, converse_bound, default_c_grid, optimize_bound_over_c, BoundKind, BoundPoint};
use crate::codes::{best_random_code, code_distance, code_info_spectrum, exhaustive_optimal_code, ResolvabilityCode, DEFAULT_SEARCH_BUDGET};
use crate::error::{Error, Result};
use crate::probability::{
    output_distribution, product_channel, product_distribution, Alphabet, Channel, FiniteDistribution, MemorylessModel, DEFAULT_ENUMERATION_BUDGET,
};
use crate::single_letter::{alternating_resolvability, feasible_polytope_vertices, min_mutual_information, FEASIBILITY_TOLERANCE};
use crate::spectrum::{info_density_spectrum, self_information_spectrum, spectrum_memoryless_exact, Spectrum, DEFAULT_ATOM_CAP};

pub const MODEL_VERSION: &str = "resolv-model/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    alphabet: Vec<String>,
    pmf: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    input: Vec<String>,
    output: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    version: String,
    mode: String,
    #[serde(default)]
    n: Option<usize>,
    sources: Vec<RawDistribution>,
    channels: Vec<RawChannel>,
    #[serde(default)]
    target: Option<RawDistribution>,
}

/// The shape of a validated model.
#[derive(Clone, Debug)]
pub enum ModelKind {
    Memoryless(MemorylessModel),
    /// A single blocklength with explicit block source and block channel.
    Explicit { n: usize, source: FiniteDistribution, channel: Channel },
}

/// A model file after every probability invariant has been checked.
#[derive(Clone, Debug)]
pub struct ModelFile {
    pub version: String,
    pub kind: ModelKind,
    pub target: Option<FiniteDistribution>,
}

/// Source, channel, and target materialized at one blocklength.
#[derive(Clone, Debug)]
pub struct Block {
    pub n: usize,
    pub source: FiniteDistribution,
    pub channel: Channel,
    pub target: FiniteDistribution,
    /// Output law of `source` through `channel`.
    pub source_output: FiniteDistribution,
}

fn context(what: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("{what}: {m}")),
        Error::Domain(m) => Error::Validation(format!("{what}: {m}")),
        other => other,
    }
}

fn build_distribution(raw: &RawDistribution, what: &str) -> Result<FiniteDistribution> {
    let alphabet = Alphabet::new(raw.alphabet.iter().cloned()).map_err(|e| context(what, e))?;
    FiniteDistribution::new(alphabet, raw.pmf.clone()).map_err(|e| context(what, e))
}

fn build_channel(raw: &RawChannel, what: &str) -> Result<Channel> {
    let input = Alphabet::new(raw.input.iter().cloned()).map_err(|e| context(what, e))?;
    let output = Alphabet::new(raw.output.iter().cloned()).map_err(|e| context(what, e))?;
    Channel::new(input, output, raw.matrix.clone()).map_err(|e| context(what, e))
}

/// Parses and validates model JSON.
pub fn parse_model(text: &str) -> Result<ModelFile> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    if raw.version != MODEL_VERSION {
        return Err(Error::validation(format!("unrecognized model version {:?}, expected {MODEL_VERSION:?}", raw.version)));
    }
    let sources = raw.sources.iter().enumerate().map(|(i, s)| build_distribution(s, &format!("source {i}"))).collect::<Result<Vec<_>>>()?;
    let channels = raw.channels.iter().enumerate().map(|(i, c)| build_channel(c, &format!("channel {i}"))).collect::<Result<Vec<_>>>()?;
    let target = raw.target.as_ref().map(|t| build_distribution(t, "target")).transpose()?;
    let count = |want: usize| -> Result<()> {
        if sources.len() != want || channels.len() != want {
            return Err(Error::validation(format!(
                "mode {:?} needs {want} source(s) and {want} channel(s), found {} and {}",
                raw.mode,
                sources.len(),
                channels.len()
            )));
        }
        Ok(())
    };
    let kind = match raw.mode.as_str() {
        "iid" => {
            count(1)?;
            let m = MemorylessModel::iid(sources[0].clone(), channels[0].clone()).map_err(|e| context("model", e))?;
            ModelKind::Memoryless(m)
        }
        "alternating" => {
            count(2)?;
            let m = MemorylessModel::alternating((sources[0].clone(), channels[0].clone()), (sources[1].clone(), channels[1].clone()))
                .map_err(|e| context("model", e))?;
            ModelKind::Memoryless(m)
        }
        "explicit" => {
            count(1)?;
            let n = raw.n.filter(|&n| n > 0).ok_or_else(|| Error::validation("explicit mode needs a positive \"n\""))?;
            if sources[0].alphabet() != channels[0].input() {
                return Err(Error::validation("source alphabet differs from the channel input alphabet"));
            }
            ModelKind::Explicit { n, source: sources[0].clone(), channel: channels[0].clone() }
        }
        other => return Err(Error::validation(format!("unknown mode {other:?}; use iid, alternating, or explicit"))),
    };
    let output = match &kind {
        ModelKind::Memoryless(m) => m.components()[0].1.output().clone(),
        ModelKind::Explicit { channel, .. } => channel.output().clone(),
    };
    if let Some(t) = &target {
        if *t.alphabet() != output {
            return Err(Error::validation("target alphabet differs from the channel output alphabet"));
        }
    }
    Ok(ModelFile { version: raw.version, kind, target })
}

pub fn parse_model_file(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

impl ModelFile {
    pub fn memoryless(&self) -> Result<&MemorylessModel> {
        match &self.kind {
            ModelKind::Memoryless(m) => Ok(m),
            ModelKind::Explicit { .. } => Err(Error::domain("this command needs an iid or alternating model")),
        }
    }

    /// Blocklength to use when none is given on the command line.
    pub fn default_n(&self) -> Option<usize> {
        match &self.kind {
            ModelKind::Explicit { n, .. } => Some(*n),
            ModelKind::Memoryless(_) => None,
        }
    }

    pub fn block(&self, n: usize, budget: usize) -> Result<Block> {
        match &self.kind {
            ModelKind::Memoryless(model) => {
                let spec = model.at(n)?;
                let source = product_distribution(&spec, budget)?;
                let channel = product_channel(&spec, budget)?;
                let (px, w) = spec.component();
                let letter_out = output_distribution(px, w)?;
                let source_output = letter_out.power(n, budget)?;
                let target = match &self.target {
                    Some(t) => t.power(n, budget)?,
                    None => source_output.clone(),
                };
                Ok(Block { n, source, channel, target, source_output })
            }
            ModelKind::Explicit { n: file_n, source, channel } => {
                if n != *file_n {
                    return Err(Error::domain(format!("explicit model has n = {file_n}, requested {n}")));
                }
                let source_output = output_distribution(source, channel)?;
                let target = self.target.clone().unwrap_or_else(|| source_output.clone());
                Ok(Block { n, source: source.clone(), channel: channel.clone(), target, source_output })
            }
        }
    }

    /// Unnormalized spectrum of the source-induced density at blocklength `n`.
    pub fn density_spectrum(&self, n: usize, quantity: Quantity, atom_cap: usize, budget: usize) -> Result<Spectrum> {
        match &self.kind {
            ModelKind::Memoryless(model) => {
                let letters = component_spectra(model, quantity.into())?;
                spectrum_memoryless_exact(&letters, n, model.mode(), atom_cap)
            }
            ModelKind::Explicit { .. } => {
                let b = self.block(n, budget)?;
                match quantity {
                    Quantity::Mi => info_density_spectrum(&b.source, &b.channel, &b.source_output, n, false),
                    Quantity::SelfInfo => self_information_spectrum(&b.source, n, false),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    fn suffix(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }

    fn show(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    fn read(self, value: f64) -> f64 {
        match self {
            Units::Nats => value,
            Units::Bits => value * std::f64::consts::LN_2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// Mutual-information density against the true output law.
    Mi,
    /// Self-information of the source.
    #[value(name = "self")]
    SelfInfo,
}

impl From<Quantity> for DensityKind {
    fn from(q: Quantity) -> Self {
        match q {
            Quantity::Mi => DensityKind::MutualInformation,
            Quantity::SelfInfo => DensityKind::SelfInformation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Achievability,
    Converse,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "resolv", version, about = "Exact channel-resolvability computations over finite alphabets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Model file (JSON).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Units for information-valued inputs and outputs.
    #[arg(long, global = true, value_enum, default_value_t = Units::Nats)]
    pub units: Units,
    /// Blocklength(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Code size(s), comma separated.
    #[arg(long = "M", global = true, value_delimiter = ',')]
    pub m: Vec<u64>,
    /// Quantile level δ.
    #[arg(long, global = true, default_value_t = 0.1)]
    pub delta: f64,
    /// First-order rate R (in --units).
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random codes drawn per size.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: u64,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Cap on enumerated outcomes and on codeword multisets searched.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between a code's output law and the target.
    /// Columns: n, M, rate, distance.
    Distance {
        /// Code file (JSON with n, M, seed, codewords).
        #[arg(long)]
        code: PathBuf,
    },
    /// Atoms of the block information spectrum.
    /// Columns: n, value, prob.
    Spectrum {
        /// Divide values by n.
        #[arg(long)]
        normalized: bool,
        #[arg(long, value_enum, default_value_t = Quantity::Mi)]
        quantity: Quantity,
    },
    /// Finite-length achievability and converse bounds across code sizes.
    /// Converse rows use the best of --trials random codes.
    /// Columns: n, M, rate, kind, c, value, raw.
    Bounds {
        /// Fixed thresholds (per letter, in --units); optimized over c when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        c: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Which::Both)]
        which: Which,
    },
    /// Exhaustive search for the best code of each size.
    /// Columns: n, M, rate, distance, codewords.
    CodeSearch,
    /// Best of --trials seeded random codes for each size.
    /// Columns: n, M, rate, seed, trial, distance, codewords.
    CodeRandom {
        /// Save the best code (single n and M only).
        #[arg(long)]
        code_out: Option<PathBuf>,
    },
    /// Minimum mutual information over inputs matching the target, with all vertices.
    /// Columns: row, support, I, q.
    Optimize {
        /// One-based model component.
        #[arg(long, default_value_t = 1)]
        component: usize,
    },
    /// Per-component minimum mutual information and the limsup/liminf rates.
    /// Columns: quantity, value, q.
    Alt,
    /// First- and second-order quantiles across blocklengths.
    /// Columns: n, component, first_order, second_order, mean_per_letter.
    SecondOrder {
        #[arg(long, value_enum, default_value_t = Quantity::Mi)]
        quantity: Quantity,
    },
}

/// Scientific notation with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0.00000000000e0".into()
    } else {
        format!("{x:.11e}")
    }
}

struct Table {
    text: String,
}

impl Table {
    fn new(header: &[String]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Table { text }
    }

    fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }
}

struct Context<'a> {
    common: &'a CommonArgs,
    model: Option<ModelFile>,
    budget: usize,
    search_budget: u128,
}

impl Context<'_> {
    fn model(&self) -> Result<&ModelFile> {
        self.model.as_ref().ok_or_else(|| Error::domain("--model is required for this command"))
    }

    fn u(&self, base: &str) -> String {
        format!("{base}_{}", self.common.units.suffix())
    }

    fn info(&self, nats: f64) -> String {
        fmt_num(self.common.units.show(nats))
    }

    fn blocklengths(&self) -> Result<Vec<usize>> {
        if !self.common.n.is_empty() {
            if self.common.n.contains(&0) {
                return Err(Error::domain("blocklengths must be positive"));
            }
            return Ok(self.common.n.clone());
        }
        self.model()?.default_n().map(|n| vec![n]).ok_or_else(|| Error::domain("--n is required for this command"))
    }

    fn sizes(&self) -> Result<Vec<u64>> {
        let mut m = if self.common.m.is_empty() { vec![1, 2, 4, 8] } else { self.common.m.clone() };
        if m.contains(&0) {
            return Err(Error::domain("code sizes must be positive"));
        }
        m.sort_unstable();
        m.dedup();
        Ok(m)
    }

    fn rate(&self, n: usize, m: u64) -> String {
        self.info((m as f64).ln() / n as f64)
    }
}

fn codeword_cell(code: &ResolvabilityCode) -> String {
    code.labels().join(" ")
}

fn run_distance(ctx: &Context, code_path: &Path) -> Result<Table> {
    let model = ctx.model()?;
    let n_hint = ctx.blocklengths().ok().and_then(|v| v.first().copied());
    let text = std::fs::read_to_string(code_path)?;
    let n = match n_hint {
        Some(n) => n,
        None => serde_json::from_str::<serde_json::Value>(&text)
            .ok()
            .and_then(|v| v.get("n").and_then(|x| x.as_u64()))
            .ok_or_else(|| Error::Parse("code file has no n".into()))? as usize,
    };
    let block = model.block(n, ctx.budget)?;
    let code = ResolvabilityCode::from_json(&text, block.channel.input())?;
    if code.n() != n {
        return Err(Error::validation(format!("code has n = {}, model block uses n = {n}", code.n())));
    }
    let d = code_distance(&code, &block.channel, &block.target)?;
    let mut t = Table::new(&["n".into(), "M".into(), ctx.u("rate"), "distance".into()]);
    t.row(&[n.to_string(), code.m().to_string(), ctx.rate(n, code.m() as u64), fmt_num(d)]);
    Ok(t)
}

fn run_spectrum(ctx: &Context, normalized: bool, quantity: Quantity) -> Result<Table> {
    let model = ctx.model()?;
    let mut t = Table::new(&["n".into(), ctx.u("value"), "prob".into()]);
    for n in ctx.blocklengths()? {
        let s = model.density_spectrum(n, quantity, DEFAULT_ATOM_CAP, ctx.budget)?;
        let s = if normalized { s.to_per_letter()? } else { s };
        for a in s.atoms() {
            t.row(&[n.to_string(), ctx.info(a.value), fmt_num(a.prob)]);
        }
    }
    Ok(t)
}

fn bound_row(ctx: &Context, kind: &str, p: &BoundPoint) -> Vec<String> {
    vec![p.n.to_string(), p.m.to_string(), ctx.rate(p.n, p.m), kind.into(), ctx.info(p.c), fmt_num(p.value), fmt_num(p.raw)]
}

fn run_bounds(ctx: &Context, fixed_c: &[f64], which: Which) -> Result<Table> {
    let model = ctx.model()?;
    let units = ctx.common.units;
    let fixed: Vec<f64> = fixed_c.iter().map(|&c| units.read(c)).collect();
    let mut t = Table::new(&["n".into(), "M".into(), ctx.u("rate"), "kind".into(), ctx.u("c"), "value".into(), "raw".into()]);
    for n in ctx.blocklengths()? {
        let truth = model.density_spectrum(n, Quantity::Mi, DEFAULT_ATOM_CAP, ctx.budget)?;
        let block = if which == Which::Achievability { None } else { Some(model.block(n, ctx.budget)?) };
        for m in ctx.sizes()? {
            if which != Which::Converse {
                if fixed.is_empty() {
                    let p = optimize_bound_over_c(&truth, m, BoundKind::Achievability, &default_c_grid(&truth)?)?;
                    t.row(&bound_row(ctx, "achievability", &p));
                } else {
                    for &c in fixed.iter().filter(|&&c| c >= 0.0) {
                        t.row(&bound_row(ctx, "achievability", &achievability_bound(&truth, m, c)?));
                    }
                }
            }
            if let Some(b) = &block {
                let search = best_random_code(&b.source, n, &b.channel, &b.target, m as usize, ctx.common.trials, ctx.common.seed)?;
                let s_code = code_info_spectrum(&search.code, &b.channel, &b.target)?;
                if fixed.is_empty() {
                    match optimize_bound_over_c(&s_code, m, BoundKind::Converse, &default_c_grid(&s_code)?) {
                        Ok(p) => t.row(&bound_row(ctx, "converse", &p)),
                        Err(Error::Domain(_)) => {}
                        Err(e) => return Err(e),
                    }
                } else {
                    for &c in &fixed {
                        match converse_bound(&s_code, m, c) {
                            Ok(p) => t.row(&bound_row(ctx, "converse", &p)),
                            Err(Error::Precondition(_)) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
                let d = fmt_num(search.distance);
                t.row(&[n.to_string(), m.to_string(), ctx.rate(n, m), "code_distance".into(), String::new(), d.clone(), d]);
            }
        }
    }
    Ok(t)
}

fn run_code_search(ctx: &Context) -> Result<Table> {
    let model = ctx.model()?;
    let mut t = Table::new(&["n".into(), "M".into(), ctx.u("rate"), "distance".into(), "codewords".into()]);
    for n in ctx.blocklengths()? {
        let block = model.block(n, ctx.budget)?;
        for m in ctx.sizes()? {
            let (code, d) = exhaustive_optimal_code(&block.channel, &block.target, m as usize, n, ctx.search_budget)?;
            t.row(&[n.to_string(), m.to_string(), ctx.rate(n, m), fmt_num(d), codeword_cell(&code)]);
        }
    }
    Ok(t)
}

fn run_code_random(ctx: &Context, code_out: Option<&Path>) -> Result<Table> {
    let model = ctx.model()?;
    let ns = ctx.blocklengths()?;
    let ms = ctx.sizes()?;
    if code_out.is_some() && (ns.len() != 1 || ms.len() != 1) {
        return Err(Error::domain("--code-out needs exactly one --n and one --M"));
    }
    let mut t = Table::new(&["n".into(), "M".into(), ctx.u("rate"), "seed".into(), "trial".into(), "distance".into(), "codewords".into()]);
    for &n in &ns {
        let block = model.block(n, ctx.budget)?;
        for &m in &ms {
            let r = best_random_code(&block.source, n, &block.channel, &block.target, m as usize, ctx.common.trials, ctx.common.seed)?;
            let seed = r.code.seed().map(|s| s.to_string()).unwrap_or_default();
            t.row(&[n.to_string(), m.to_string(), ctx.rate(n, m), seed, r.trial.to_string(), fmt_num(r.distance), codeword_cell(&r.code)]);
            if let Some(path) = code_out {
                std::fs::write(path, r.code.to_json() + "\n")?;
            }
        }
    }
    Ok(t)
}

fn q_cell(q: &FiniteDistribution) -> String {
    q.pmf().iter().map(|&p| fmt_num(p)).collect::<Vec<_>>().join(" ")
}

fn run_optimize(ctx: &Context, component: usize) -> Result<Table> {
    let model = ctx.model()?;
    let mem = model.memoryless()?;
    let (px, w) = mem
        .components()
        .get(component.wrapping_sub(1))
        .ok_or_else(|| Error::domain(format!("component {component} does not exist")))?;
    let py = match &model.target {
        Some(t) => t.clone(),
        None => output_distribution(px, w)?,
    };
    let set = feasible_polytope_vertices(w, &py, FEASIBILITY_TOLERANCE)?;
    let (q, i) = min_mutual_information(w, &py, FEASIBILITY_TOLERANCE)?;
    let mut t = Table::new(&["row".into(), "support".into(), ctx.u("I"), "q".into()]);
    let support = |q: &FiniteDistribution| {
        (0..q.len()).filter(|&a| q.prob(a) > 0.0).map(|a| q.alphabet().label(a)).collect::<Vec<_>>().join(" ")
    };
    for v in &set.vertices {
        t.row(&["vertex".into(), support(&v.q), ctx.info(v.mutual_information), q_cell(&v.q)]);
    }
    t.row(&["optimum".into(), support(&q), ctx.info(i), q_cell(&q)]);
    Ok(t)
}

fn run_alt(ctx: &Context) -> Result<Table> {
    let mem = ctx.model()?.memoryless()?;
    let comps = mem.components();
    let (odd, even) = (&comps[0], comps.get(1).unwrap_or(&comps[0]));
    let r = alternating_resolvability((&odd.0, &odd.1), (&even.0, &even.1), FEASIBILITY_TOLERANCE)?;
    let mut t = Table::new(&["quantity".into(), ctx.u("value"), "q".into()]);
    for (j, (q, i)) in r.components.iter().enumerate() {
        t.row(&[format!("I_star_{}", j + 1), ctx.info(*i), q_cell(q)]);
    }
    t.row(&["S".into(), ctx.info(r.s), String::new()]);
    t.row(&["S_star".into(), ctx.info(r.s_star), String::new()]);
    Ok(t)
}

fn run_second_order(ctx: &Context, quantity: Quantity) -> Result<Table> {
    let mem = ctx.model()?.memoryless()?;
    let rate = ctx.common.rate.map(|r| ctx.common.units.read(r));
    let mut ns = ctx.blocklengths()?;
    ns.sort_unstable();
    ns.dedup();
    let recs = convergence_sweep(mem, &ns, ctx.common.delta, rate, quantity.into(), DEFAULT_ATOM_CAP)?;
    let mut t = Table::new(&["n".into(), "component".into(), ctx.u("first_order"), ctx.u("second_order"), ctx.u("mean_per_letter")]);
    for r in recs {
        let second = r.second_order_quantile.map(|v| ctx.info(v)).unwrap_or_default();
        t.row(&[r.n.to_string(), (r.component + 1).to_string(), ctx.info(r.first_order_quantile), second, ctx.info(r.mean_per_letter)]);
    }
    Ok(t)
}

fn execute(cli: &Cli) -> Result<String> {
    let common = &cli.common;
    let model = common.model.as_deref().map(parse_model_file).transpose()?;
    let ctx = Context {
        common,
        model,
        budget: common.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET),
        search_budget: common.budget.map(|b| b as u128).unwrap_or(DEFAULT_SEARCH_BUDGET),
    };
    let table = match &cli.command {
        Command::Distance { code } => run_distance(&ctx, code)?,
        Command::Spectrum { normalized, quantity } => run_spectrum(&ctx, *normalized, *quantity)?,
        Command::Bounds { c, which } => run_bounds(&ctx, c, *which)?,
        Command::CodeSearch => run_code_search(&ctx)?,
        Command::CodeRandom { code_out } => run_code_random(&ctx, code_out.as_deref())?,
        Command::Optimize { component } => run_optimize(&ctx, *component)?,
        Command::Alt => run_alt(&ctx)?,
        Command::SecondOrder { quantity } => run_second_order(&ctx, *quantity)?,
    };
    Ok(table.text)
}

/// Runs a parsed command line, writing CSV to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let pool = match cli.common.threads {
        Some(0) => return Err(Error::domain("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| Error::resource(format!("thread pool: {e}")))?;
    let text = pool.install(|| execute(cli))?;
    match &cli.common.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}
