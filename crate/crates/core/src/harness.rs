//! Runs traces against one engine, verifying invariants along the way.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::acyclic_bf::{reverse_replay, AcyclicBf, BfStats, ReplayBound};
use crate::arboricity::{ArbConfig, ArbStats, Arboricity};
use crate::colouring::{ColourMode, ColourStats, Colouring};
use crate::error::{Error, Violation};
use crate::frac_orient::FracStats;
use crate::graph::{Graph, Params, Vertex};
use crate::oracles;
use crate::pseudo_split::SplitStats;
use crate::refinement::{Orienter, Refinement, RefinementStats};
use crate::trace::{Trace, TraceOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Orient,
    Arb,
    Bf,
    ColourForest,
    ColourPseudo,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Orient, Mode::Arb, Mode::Bf, Mode::ColourForest, Mode::ColourPseudo];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Orient => "orient",
            Mode::Arb => "arb",
            Mode::Bf => "bf",
            Mode::ColourForest => "colour-forest",
            Mode::ColourPseudo => "colour-pseudo",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown mode {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: Params,
    /// Verify after every `k`-th update; 0 only at checkpoints.
    pub verify_every: usize,
    pub paranoid: bool,
}

impl RunConfig {
    pub fn new(mode: Mode, params: Params) -> Self {
        Self { mode, params, verify_every: 0, paranoid: false }
    }
}

/// Cumulative work counters, monotone over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub reorientations: u64,
    /// Copies deleted and reinserted by validity repairs.
    pub repairs: u64,
    /// Pseudoforest slot moves.
    pub moves: u64,
    /// Surplus placements, inversions and switches.
    pub surplus_ops: u64,
}

#[derive(Clone, Debug)]
enum Engine {
    Orient(Orienter),
    Arb(Arboricity),
    Bf(AcyclicBf),
    Colour(Colouring),
}

/// A query answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Answer {
    pub op_index: usize,
    pub op: String,
    /// Out-degree, or colour code; `None` when the mode has no colouring.
    pub value: Option<u128>,
}

/// An observed quantity against its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoftBound {
    pub name: &'static str,
    pub observed: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EngineStats {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frac: Option<FracStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arboricity: Option<ArbStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bf: Option<BfStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colour: Option<ColourStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub n: u32,
    pub gamma: u32,
    pub epsilon: String,
    pub alpha_max: Option<u32>,
    pub ops: usize,
    pub insertions: u64,
    pub deletions: u64,
    pub checks: u64,
    pub violations: Vec<String>,
    pub answers: Vec<Answer>,
    pub counters: Counters,
    pub edges: usize,
    /// Largest out-degree seen at any check and at the end.
    pub max_out_degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forests: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colour_count: Option<u128>,
    pub soft_bounds: Vec<SoftBound>,
    pub stats: EngineStats,
    pub state_hash: String,
    pub elapsed_ms: f64,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One engine plus the bookkeeping of a run.
#[derive(Clone, Debug)]
pub struct Runner {
    config: RunConfig,
    engine: Engine,
    edges: BTreeSet<(Vertex, Vertex)>,
    insertions: u64,
    deletions: u64,
    max_out_degree: usize,
    checks: u64,
}

fn key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Runner {
    pub fn new(config: RunConfig) -> Result<Self, Error> {
        let params = config.params;
        let arb = |repair| ArbConfig { surplus_repair: repair, paranoid: config.paranoid };
        let engine = match config.mode {
            Mode::Orient => {
                let mut o = Orienter::new(params);
                o.refinement.set_audit(config.paranoid);
                Engine::Orient(o)
            }
            Mode::Arb => Engine::Arb(Arboricity::new(params, arb(true))),
            Mode::Bf => {
                let alpha = params.alpha_max().ok_or_else(|| Error::Usage("bf mode needs --alpha-max".into()))?;
                Engine::Bf(AcyclicBf::new(params.n_cap(), alpha))
            }
            Mode::ColourForest => {
                Engine::Colour(Colouring::new(params, ColourMode::ForestDecomposition, config.paranoid))
            }
            Mode::ColourPseudo => Engine::Colour(Colouring::new(params, ColourMode::Pseudoforest, config.paranoid)),
        };
        Ok(Self {
            config,
            engine,
            edges: BTreeSet::new(),
            insertions: 0,
            deletions: 0,
            max_out_degree: 0,
            checks: 0,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.edges.iter().copied().collect()
    }

    pub fn insertions(&self) -> u64 {
        self.insertions
    }

    pub fn deletions(&self) -> u64 {
        self.deletions
    }

    pub fn max_out_degree(&self) -> usize {
        self.max_out_degree
    }

    pub fn arboricity(&self) -> Option<&Arboricity> {
        match &self.engine {
            Engine::Arb(a) => Some(a),
            Engine::Colour(c) => Some(c.engine()),
            _ => None,
        }
    }

    pub fn bf(&self) -> Option<&AcyclicBf> {
        match &self.engine {
            Engine::Bf(b) => Some(b),
            _ => None,
        }
    }

    fn graph_parts(&mut self) -> Option<(&mut Graph, &Refinement)> {
        match &mut self.engine {
            Engine::Orient(o) => Some((&mut o.graph, &o.refinement)),
            Engine::Arb(_) | Engine::Colour(_) | Engine::Bf(_) => None,
        }
    }

    /// Applies one op; queries return an answer. Updates that break the
    /// simple-graph rules are errors.
    pub fn apply(&mut self, op_index: usize, op: TraceOp) -> Result<Option<Answer>, Error> {
        let answer = |value| Some(Answer { op_index, op: op.to_string(), value });
        match op {
            TraceOp::Add(u, v) => {
                match &mut self.engine {
                    Engine::Orient(o) => o.insert(u, v).map(drop)?,
                    Engine::Arb(a) => a.insert(u, v).map(drop)?,
                    Engine::Bf(b) => b.insert(u, v).map(drop)?,
                    Engine::Colour(c) => c.insert(u, v)?,
                }
                self.edges.insert(key(u, v));
                self.insertions += 1;
                Ok(None)
            }
            TraceOp::Del(u, v) => {
                match &mut self.engine {
                    Engine::Orient(o) => o.delete(u, v).map(drop)?,
                    Engine::Arb(a) => a.delete(u, v).map(drop)?,
                    Engine::Bf(b) => b.delete(u, v)?,
                    Engine::Colour(c) => c.delete(u, v)?,
                }
                self.edges.remove(&key(u, v));
                self.deletions += 1;
                Ok(None)
            }
            TraceOp::OutDeg(v) => {
                self.check_vertex(v)?;
                Ok(answer(Some(self.out_degree(v) as u128)))
            }
            TraceOp::Colour(v) => {
                self.check_vertex(v)?;
                let value = match &mut self.engine {
                    Engine::Colour(c) => Some(c.colour(v).value()),
                    _ => None,
                };
                Ok(answer(value))
            }
            TraceOp::Checkpoint => Ok(None),
        }
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), Error> {
        let n = self.config.params.n_cap();
        if v.0 >= n {
            return Err(crate::error::GraphError::VertexRange { v, n }.into());
        }
        Ok(())
    }

    pub fn out_degree(&mut self, v: Vertex) -> usize {
        match &mut self.engine {
            Engine::Orient(o) => o.out_degree(v),
            Engine::Arb(a) => a.out_degree(v),
            Engine::Bf(b) => b.out_degree(v),
            Engine::Colour(c) => c.engine_mut().out_degree(v),
        }
    }

    pub fn counters(&self) -> Counters {
        match &self.engine {
            Engine::Orient(o) => {
                Counters { reorientations: o.refinement.frac_stats().chain_flips, ..Counters::default() }
            }
            Engine::Arb(a) => arb_counters(a),
            Engine::Colour(c) => arb_counters(c.engine()),
            Engine::Bf(b) => Counters {
                reorientations: b.stats().reorientations,
                moves: b.split_stats().moves,
                ..Counters::default()
            },
        }
    }

    pub fn stats(&self) -> EngineStats {
        let arb = |a: &Arboricity| EngineStats {
            refinement: Some(a.refinement().stats()),
            frac: Some(a.refinement().frac_stats()),
            arboricity: Some(a.stats()),
            split: Some(a.split_stats()),
            ..EngineStats::default()
        };
        match &self.engine {
            Engine::Orient(o) => EngineStats {
                refinement: Some(o.refinement.stats()),
                frac: Some(o.refinement.frac_stats()),
                ..EngineStats::default()
            },
            Engine::Arb(a) => arb(a),
            Engine::Colour(c) => EngineStats { colour: Some(c.stats()), ..arb(c.engine()) },
            Engine::Bf(b) => EngineStats { bf: Some(b.stats()), split: Some(b.split_stats()), ..EngineStats::default() },
        }
    }

    /// Arboricity used for the out-degree bounds: the exact value while the
    /// graph is small enough, else the declared `alpha_max`.
    fn alpha_bound(&self) -> Option<u32> {
        let n = self.config.params.n_cap() as usize;
        if n <= oracles::ENUMERATION_CAP {
            let edges = self.edges();
            return oracles::exact_arboricity(n, &edges).ok().map(|a| a.max(1));
        }
        self.config.params.alpha_max()
    }

    fn current_max_out_degree(&mut self) -> usize {
        let n = self.config.params.n_cap();
        (0..n).map(|v| self.out_degree(Vertex(v))).max().unwrap_or(0)
    }

    /// Runs the full invariant suite of the mode.
    pub fn verify(&mut self, op_index: usize) -> Result<(), Violation> {
        self.checks += 1;
        let fail = |invariant: &'static str, detail: String| Violation { invariant, op_index, detail };
        let max_out = self.current_max_out_degree();
        self.max_out_degree = self.max_out_degree.max(max_out);
        let alpha = self.alpha_bound();
        let params = self.config.params;
        let edges = self.edges();
        let n = params.n_cap() as usize;

        if let Some((g, r)) = self.graph_parts() {
            r.check(g).map_err(|d| fail("refinement", d))?;
            if g.num_edges() != edges.len() {
                return Err(fail("edge set", format!("engine holds {} edges, trace {}", g.num_edges(), edges.len())));
            }
        }
        match &mut self.engine {
            Engine::Orient(_) => {}
            Engine::Arb(a) => check_decomposition(a, &edges, alpha, &params).map_err(|d| fail("decomposition", d))?,
            Engine::Colour(c) => {
                let checked = match c.mode() {
                    ColourMode::ForestDecomposition => check_decomposition(c.engine_mut(), &edges, alpha, &params),
                    ColourMode::Pseudoforest => c.engine_mut().check(),
                };
                checked.map_err(|d| fail("decomposition", d))?;
                check_colouring(c, &edges, params.alpha_max(), &params).map_err(|d| fail("colouring", d))?;
            }
            Engine::Bf(b) => {
                let arcs = b.arcs();
                if arcs.len() != edges.len() {
                    return Err(fail("edge set", format!("engine holds {} edges, trace {}", arcs.len(), edges.len())));
                }
                if !oracles::is_acyclic(n, &arcs) {
                    return Err(fail("acyclicity", "orientation has a directed cycle".into()));
                }
                if max_out > b.bound() {
                    return Err(fail("out-degree", format!("out-degree {max_out} exceeds d = {}", b.bound())));
                }
                b.check_split().map_err(|d| fail("pseudoforest split", d))?;
                for (i, part) in b.partitions().iter().enumerate() {
                    if !oracles::is_forest(part) {
                        return Err(fail("pseudoforest split", format!("part {i} has a cycle")));
                    }
                }
                return Ok(());
            }
        }
        if let Some(alpha) = alpha {
            let bound = params.scaled_alpha(alpha) as usize + 2;
            if max_out > bound {
                return Err(fail("out-degree", format!("out-degree {max_out} exceeds floor((1+eps)*{alpha})+2 = {bound}")));
            }
        }
        Ok(())
    }

    /// Hash of everything observable: edge set, orientation, decomposition
    /// and colours. Verification must leave it unchanged.
    pub fn state_hash(&mut self) -> u64 {
        let mut h = DefaultHasher::new();
        self.edges.hash(&mut h);
        let n = self.config.params.n_cap();
        match &mut self.engine {
            Engine::Orient(o) => {
                let es: Vec<_> = o.graph.edges().collect();
                for (e, _, _) in es {
                    o.graph.counts(e).hash(&mut h);
                }
            }
            Engine::Arb(a) => hash_arb(a, &mut h),
            Engine::Colour(c) => {
                hash_arb(c.engine(), &mut h);
                for v in 0..n {
                    c.colour(Vertex(v)).hash(&mut h);
                }
            }
            Engine::Bf(b) => {
                let mut arcs = b.arcs();
                arcs.sort();
                arcs.hash(&mut h);
            }
        }
        h.finish()
    }

    fn forests(&self) -> Option<usize> {
        self.arboricity().map(|a| a.forests().nonempty().len())
    }

    fn colour_count(&self) -> Option<u128> {
        match &self.engine {
            Engine::Colour(c) => Some(c.colour_count()),
            _ => None,
        }
    }

    /// Amortised bounds over the run so far.
    pub fn soft_bounds(&self, replay: Option<&ReplayBound>) -> Vec<SoftBound> {
        let gamma = f64::from(self.config.params.gamma());
        let (i, d) = (self.insertions as f64, self.deletions as f64);
        let dmax = self.max_out_degree.max(1) as f64;
        let c = self.counters();
        let bound = |name, observed: f64, bound: f64| SoftBound { name, observed, bound, holds: observed <= bound };
        let mut out = Vec::new();
        if self.arboricity().is_some() {
            out.push(bound("repair copies", c.repairs as f64, 4.0 * gamma * dmax * (dmax * i + d)));
            out.push(bound("pseudoforest moves", c.moves as f64, 8.0 * gamma * dmax.powi(3) * (i + d)));
        }
        if let (Some(b), Some(r)) = (self.bf(), replay) {
            let delta = b.bound() as u64 / 2;
            if let Some(w) = r.work_bound(delta, b.bound() as u64) {
                out.push(bound("bf reorientations", b.stats().reorientations as f64, w));
            }
        }
        out
    }
}

fn arb_counters(a: &Arboricity) -> Counters {
    let s = a.stats();
    Counters {
        reorientations: a.refinement().frac_stats().chain_flips,
        repairs: s.repair_copies,
        moves: a.split_stats().moves,
        surplus_ops: s.surplus_inserts + s.inversions + s.move1 + s.move2,
    }
}

fn hash_arb(a: &Arboricity, h: &mut DefaultHasher) {
    let d = a.forests();
    d.forests.hash(h);
    d.surplus.hash(h);
    d.h.hash(h);
    a.graph().loads().hash(h);
}

/// Every returned set a forest, their union the edge set, and the number
/// of sets within the bound.
fn check_decomposition(
    a: &mut Arboricity,
    edges: &[(Vertex, Vertex)],
    alpha: Option<u32>,
    params: &Params,
) -> Result<(), String> {
    a.check()?;
    let d = a.forests();
    let parts = d.nonempty();
    let mut union = HashSet::new();
    for (i, p) in parts.iter().enumerate() {
        if !oracles::is_forest(p) {
            return Err(format!("set {i} of the decomposition has a cycle"));
        }
        for &e in p.iter() {
            if !union.insert(e) {
                return Err(format!("edge {}-{} appears in two sets", e.0, e.1));
            }
        }
    }
    let want: HashSet<_> = edges.iter().copied().collect();
    if union != want {
        return Err(format!("decomposition covers {} edges, graph has {}", union.len(), want.len()));
    }
    if let Some(alpha) = alpha {
        let bound = params.scaled_alpha(alpha) as usize + 2;
        if parts.len() > bound {
            return Err(format!("{} forests exceed floor((1+eps)*{alpha})+2 = {bound}", parts.len()));
        }
    }
    Ok(())
}

/// Properness on every edge and the colour count within its mode's bound.
fn check_colouring(
    c: &mut Colouring,
    edges: &[(Vertex, Vertex)],
    alpha_max: Option<u32>,
    params: &Params,
) -> Result<(), String> {
    let n = params.n_cap();
    let codes: Vec<_> = (0..n).map(|v| c.colour(Vertex(v))).collect();
    let count = c.colour_count();
    let radix: u128 = c.radices().iter().map(|&r| u128::from(r)).product();
    if radix != count {
        return Err(format!("colour count {count} differs from the radix product {radix}"));
    }
    for (u, v) in edges {
        if codes[u.idx()] == codes[v.idx()] {
            return Err(format!("edge {u}-{v} joins two vertices of colour {}", codes[u.idx()].value()));
        }
    }
    if codes.iter().any(|code| code.value() >= count) {
        return Err("a colour code exceeds the colour count".into());
    }
    if let Some(alpha) = alpha_max {
        let k = params.scaled_alpha(alpha);
        let bound = match c.mode() {
            ColourMode::ForestDecomposition => 4u128 << k,
            ColourMode::Pseudoforest => 2 * 3u128.pow(k),
        };
        if count > bound {
            return Err(format!("{count} colours exceed the bound {bound}"));
        }
    }
    Ok(())
}

/// Runs a whole trace and reports. Invalid updates abort the run.
pub fn run(config: RunConfig, trace: &Trace) -> Result<RunReport, Error> {
    trace.validate(config.params.n_cap())?;
    let start = Instant::now();
    let mut runner = Runner::new(config)?;
    let mut answers = Vec::new();
    let mut violations = Vec::new();
    let mut updates = 0usize;
    for (i, &op) in trace.ops.iter().enumerate() {
        if let Some(a) = runner.apply(i, op)? {
            answers.push(a);
        }
        let due = match op {
            TraceOp::Checkpoint => true,
            _ if op.is_update() => {
                updates += 1;
                config.verify_every > 0 && updates % config.verify_every == 0
            }
            _ => false,
        };
        if due {
            if let Err(v) = runner.verify(i) {
                violations.push(v.to_string());
            }
        }
    }
    let end = runner.current_max_out_degree();
    runner.max_out_degree = runner.max_out_degree.max(end);
    let replay = match runner.bf() {
        Some(b) => Some(reverse_replay(config.params.n_cap(), b.bound() / 2, &trace.updates())?),
        None => None,
    };
    let soft_bounds = runner.soft_bounds(replay.as_ref());
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(RunReport {
        mode: config.mode,
        n: config.params.n_cap(),
        gamma: config.params.gamma(),
        epsilon: config.params.epsilon().to_string(),
        alpha_max: config.params.alpha_max(),
        ops: trace.ops.len(),
        insertions: runner.insertions,
        deletions: runner.deletions,
        checks: runner.checks,
        violations,
        answers,
        counters: runner.counters(),
        edges: runner.edges.len(),
        max_out_degree: runner.max_out_degree,
        forests: runner.forests(),
        colour_count: runner.colour_count(),
        soft_bounds,
        stats: runner.stats(),
        state_hash: format!("{:016x}", runner.state_hash()),
        elapsed_ms,
    })
}

pub const BENCH_HEADER: &str = "op_index,op,micros,reorientations,repairs,moves,surplus_ops";

/// Times every op and writes one CSV row per op with cumulative counters.
pub fn bench(config: RunConfig, trace: &Trace, out: &mut impl Write) -> Result<(), Error> {
    trace.validate(config.params.n_cap())?;
    let mut runner = Runner::new(config)?;
    writeln!(out, "{BENCH_HEADER}")?;
    for (i, &op) in trace.ops.iter().enumerate() {
        let start = Instant::now();
        runner.apply(i, op)?;
        let micros = start.elapsed().as_secs_f64() * 1e6;
        let c = runner.counters();
        writeln!(
            out,
            "{i},{},{micros:.3},{},{},{},{}",
            op.name(),
            c.reorientations,
            c.repairs,
            c.moves,
            c.surplus_ops
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Epsilon;
    use crate::trace::{generate, GenKind, GenSpec};

    fn params(n: u32) -> Params {
        Params::new(n, 8, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap().with_alpha_max(2)
    }

    #[test]
    fn every_mode_runs_a_random_trace_cleanly() {
        let trace = generate(&GenSpec::new(GenKind::Random, 10, 150, 5, 2).with_queries(0.2)).unwrap();
        for mode in Mode::ALL {
            let mut config = RunConfig::new(mode, params(10));
            config.verify_every = 1;
            config.paranoid = true;
            let report = run(config, &trace).unwrap();
            assert!(report.ok(), "{mode}: {:?}", report.violations);
            assert_eq!(report.checks, 150);
            assert!(report.soft_bounds.iter().all(|b| b.holds), "{mode}: {:?}", report.soft_bounds);
        }
    }

    #[test]
    fn verification_is_pure() {
        let trace = generate(&GenSpec::new(GenKind::Random, 9, 120, 8, 2).with_queries(0.3)).unwrap();
        for mode in Mode::ALL {
            let quiet = run(RunConfig::new(mode, params(9)), &trace).unwrap();
            let mut config = RunConfig::new(mode, params(9));
            config.verify_every = 1;
            let loud = run(config, &trace).unwrap();
            assert_eq!(quiet.state_hash, loud.state_hash, "{mode}");
            assert_eq!(quiet.answers, loud.answers, "{mode}");
        }
    }

    #[test]
    fn single_edge_out_degree() {
        let trace = Trace::parse("a 0 1\no 0\n").unwrap();
        let report = run(RunConfig::new(Mode::Orient, params(2)), &trace).unwrap();
        assert!(report.answers[0].value.unwrap() <= 3);
    }

    #[test]
    fn bf_needs_alpha_max() {
        let p = Params::new(4, 8, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap();
        assert!(matches!(Runner::new(RunConfig::new(Mode::Bf, p)), Err(Error::Usage(_))));
    }

    #[test]
    fn bench_of_empty_trace_is_header_only() {
        let mut out = Vec::new();
        bench(RunConfig::new(Mode::Arb, params(4)), &Trace::default(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{BENCH_HEADER}\n"));
    }

    #[test]
    fn bench_counters_are_monotone() {
        let trace = generate(&GenSpec::new(GenKind::Random, 10, 100, 2, 2)).unwrap();
        let mut out = Vec::new();
        bench(RunConfig::new(Mode::Arb, params(10)), &trace, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut prev = [0u64; 4];
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 7);
            for (k, c) in cols[3..].iter().enumerate() {
                let x: u64 = c.parse().unwrap();
                assert!(x >= prev[k]);
                prev[k] = x;
            }
        }
    }

    #[test]
    fn invalid_update_is_an_error() {
        let trace = Trace::parse("a 0 1\na 1 0\n").unwrap();
        assert!(run(RunConfig::new(Mode::Orient, params(2)), &trace).is_err());
    }
}
