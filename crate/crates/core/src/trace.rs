//! Trace text format and generators.
//!
//! One op per line: `a u v` adds, `d u v` deletes, `c v` asks for a colour,
//! `o v` for an out-degree and `k` marks a checkpoint. Blank lines and lines
//! starting with `#` are ignored.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acyclic_bf::Update;
use crate::error::{Error, TraceError};
use crate::graph::Vertex;
use crate::oracles;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraceOp {
    Add(Vertex, Vertex),
    Del(Vertex, Vertex),
    Colour(Vertex),
    OutDeg(Vertex),
    Checkpoint,
}

impl TraceOp {
    pub fn name(&self) -> &'static str {
        match self {
            TraceOp::Add(..) => "add",
            TraceOp::Del(..) => "del",
            TraceOp::Colour(_) => "colour",
            TraceOp::OutDeg(_) => "outdeg",
            TraceOp::Checkpoint => "checkpoint",
        }
    }

    pub fn is_update(&self) -> bool {
        matches!(self, TraceOp::Add(..) | TraceOp::Del(..))
    }

    fn max_vertex(&self) -> Option<Vertex> {
        match *self {
            TraceOp::Add(u, v) | TraceOp::Del(u, v) => Some(u.max(v)),
            TraceOp::Colour(v) | TraceOp::OutDeg(v) => Some(v),
            TraceOp::Checkpoint => None,
        }
    }
}

impl fmt::Display for TraceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceOp::Add(u, v) => write!(f, "a {u} {v}"),
            TraceOp::Del(u, v) => write!(f, "d {u} {v}"),
            TraceOp::Colour(v) => write!(f, "c {v}"),
            TraceOp::OutDeg(v) => write!(f, "o {v}"),
            TraceOp::Checkpoint => write!(f, "k"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub ops: Vec<TraceOp>,
}

impl Trace {
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut ops = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| TraceError { line: i + 1, msg };
            let mut words = line.split_whitespace();
            let tag = words.next().expect("non-empty line");
            let ids: Vec<u32> = words
                .map(|w| w.parse::<u32>().map_err(|_| err(format!("bad vertex id {w:?}"))))
                .collect::<Result<_, _>>()?;
            let arity = |k: usize| {
                if ids.len() == k {
                    Ok(())
                } else {
                    Err(err(format!("{tag:?} takes {k} vertex ids, got {}", ids.len())))
                }
            };
            let op = match tag {
                "a" | "d" => {
                    arity(2)?;
                    let (u, v) = (Vertex(ids[0]), Vertex(ids[1]));
                    if u == v {
                        return Err(err(format!("self-loop at {u}")));
                    }
                    if tag == "a" {
                        TraceOp::Add(u, v)
                    } else {
                        TraceOp::Del(u, v)
                    }
                }
                "c" => {
                    arity(1)?;
                    TraceOp::Colour(Vertex(ids[0]))
                }
                "o" => {
                    arity(1)?;
                    TraceOp::OutDeg(Vertex(ids[0]))
                }
                "k" => {
                    arity(0)?;
                    TraceOp::Checkpoint
                }
                other => return Err(err(format!("unknown op {other:?}"))),
            };
            ops.push(op);
        }
        Ok(Self { ops })
    }

    /// Smallest vertex count that fits every id.
    pub fn min_n(&self) -> u32 {
        self.ops.iter().filter_map(TraceOp::max_vertex).map(|v| v.0 + 1).max().unwrap_or(0)
    }

    /// Checks simple-graph rules: no duplicate add, no delete of an absent
    /// edge, ids below `n`. Errors count ops from 1, which matches lines of
    /// a printed trace.
    pub fn validate(&self, n: u32) -> Result<(), TraceError> {
        let mut present = HashSet::new();
        for (i, op) in self.ops.iter().enumerate() {
            let err = |msg: String| TraceError { line: i + 1, msg };
            if let Some(v) = op.max_vertex() {
                if v.0 >= n {
                    return Err(err(format!("vertex {v} out of range (n = {n})")));
                }
            }
            match *op {
                TraceOp::Add(u, v) if !present.insert(key(u, v)) => {
                    return Err(err(format!("edge {u}-{v} added twice")));
                }
                TraceOp::Del(u, v) if !present.remove(&key(u, v)) => {
                    return Err(err(format!("edge {u}-{v} deleted while absent")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn updates(&self) -> Vec<Update> {
        self.ops
            .iter()
            .filter_map(|op| match *op {
                TraceOp::Add(u, v) => Some(Update::Insert(u, v)),
                TraceOp::Del(u, v) => Some(Update::Delete(u, v)),
                _ => None,
            })
            .collect()
    }

    pub fn num_updates(&self) -> usize {
        self.ops.iter().filter(|op| op.is_update()).count()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

impl FromStr for Trace {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

fn key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenKind {
    /// Random updates whose graph keeps arboricity at most `alpha_max`.
    Random,
    /// Random updates whose graph is always a forest.
    ForestOnly,
    /// Random updates over the edges of a triangulated grid.
    PlanarLike,
    /// Two long paths joined and split again between alternating vertices.
    AdversarialPath,
}

impl GenKind {
    pub const ALL: [GenKind; 4] = [GenKind::Random, GenKind::ForestOnly, GenKind::PlanarLike, GenKind::AdversarialPath];

    pub fn name(self) -> &'static str {
        match self {
            GenKind::Random => "random",
            GenKind::ForestOnly => "forest-only",
            GenKind::PlanarLike => "planar-like",
            GenKind::AdversarialPath => "adversarial-path",
        }
    }
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown trace kind {s:?}")))
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: u32,
    /// Number of updates; queries come on top.
    pub steps: usize,
    pub seed: u64,
    pub alpha_max: u32,
    /// Probability of a query after each update.
    pub query_rate: f64,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: u32, steps: usize, seed: u64, alpha_max: u32) -> Self {
        Self { kind, n, steps, seed, alpha_max, query_rate: 0.0 }
    }

    pub fn with_queries(mut self, rate: f64) -> Self {
        self.query_rate = rate;
        self
    }
}

/// Generates a trace; identical specs give identical traces.
pub fn generate(spec: &GenSpec) -> Result<Trace, Error> {
    if spec.n < 2 {
        return Err(Error::Usage(format!("need at least 2 vertices, got {}", spec.n)));
    }
    if spec.alpha_max == 0 {
        return Err(Error::Usage("alpha_max must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let updates = match spec.kind {
        GenKind::Random if spec.n as usize <= oracles::ENUMERATION_CAP => {
            random_exact(&mut rng, spec.n, spec.steps, spec.alpha_max)?
        }
        GenKind::Random => random_certified(&mut rng, spec.n, spec.steps, spec.alpha_max, &all_pairs(spec.n)),
        GenKind::ForestOnly => random_certified(&mut rng, spec.n, spec.steps, 1, &all_pairs(spec.n)),
        GenKind::PlanarLike => {
            let mut candidates = grid_edges(spec.n);
            candidates.shuffle(&mut rng);
            random_certified(&mut rng, spec.n, spec.steps, 3, &candidates)
        }
        GenKind::AdversarialPath => adversarial_path(spec.n, spec.steps),
    };
    let mut ops = Vec::with_capacity(updates.len());
    for op in updates {
        ops.push(op);
        if spec.query_rate > 0.0 && rng.gen_bool(spec.query_rate) {
            let v = Vertex(rng.gen_range(0..spec.n));
            ops.push(if rng.gen_bool(0.5) { TraceOp::Colour(v) } else { TraceOp::OutDeg(v) });
        }
    }
    Ok(Trace { ops })
}

fn all_pairs(n: u32) -> Vec<(Vertex, Vertex)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (Vertex(a), Vertex(b)))).collect()
}

/// Edges of a grid of width `ceil(sqrt(n))` with one diagonal per cell;
/// planar, so arboricity at most 3.
fn grid_edges(n: u32) -> Vec<(Vertex, Vertex)> {
    let w = (f64::from(n).sqrt().ceil() as u32).max(1);
    let mut out = Vec::new();
    for x in 0..n {
        let c = x % w;
        let mut push = |y: u32| {
            if y < n {
                out.push((Vertex(x), Vertex(y)));
            }
        };
        if c + 1 < w {
            push(x + 1);
            push(x + w + 1);
        }
        push(x + w);
    }
    out
}

const DELETE_RATE: f64 = 0.3;
const INSERT_TRIES: usize = 32;

/// Random trace gated by the exact arboricity oracle.
fn random_exact(rng: &mut ChaCha8Rng, n: u32, steps: usize, alpha_max: u32) -> Result<Vec<TraceOp>, Error> {
    let mut present: Vec<(Vertex, Vertex)> = Vec::new();
    let mut ops = Vec::with_capacity(steps);
    while ops.len() < steps {
        if !present.is_empty() && rng.gen_bool(DELETE_RATE) {
            let (u, v) = present.swap_remove(rng.gen_range(0..present.len()));
            ops.push(TraceOp::Del(u, v));
            continue;
        }
        let mut added = false;
        for _ in 0..INSERT_TRIES {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let e = key(Vertex(a), Vertex(b));
            if a == b || present.contains(&e) {
                continue;
            }
            present.push(e);
            if oracles::exact_arboricity(n as usize, &present)? <= alpha_max {
                ops.push(TraceOp::Add(e.0, e.1));
                added = true;
                break;
            }
            present.pop();
        }
        if !added {
            if present.is_empty() {
                break;
            }
            let (u, v) = present.swap_remove(rng.gen_range(0..present.len()));
            ops.push(TraceOp::Del(u, v));
        }
    }
    Ok(ops)
}

/// `k` edge-disjoint forests covering the current graph; an insertion is
/// accepted only if some forest takes the edge, which certifies arboricity
/// at most `k`.
struct ForestCertificate {
    adj: Vec<Vec<Vec<Vertex>>>,
    owner: HashMap<(Vertex, Vertex), usize>,
    seen: Vec<bool>,
}

impl ForestCertificate {
    fn new(n: u32, k: u32) -> Self {
        Self { adj: vec![vec![Vec::new(); n as usize]; k as usize], owner: HashMap::new(), seen: vec![false; n as usize] }
    }

    fn connected(adj: &[Vec<Vertex>], seen: &mut [bool], u: Vertex, v: Vertex) -> bool {
        seen.fill(false);
        seen[u.idx()] = true;
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            if x == v {
                return true;
            }
            for &y in &adj[x.idx()] {
                if !std::mem::replace(&mut seen[y.idx()], true) {
                    stack.push(y);
                }
            }
        }
        false
    }

    fn try_insert(&mut self, u: Vertex, v: Vertex) -> bool {
        let seen = &mut self.seen;
        let Some(i) = self.adj.iter().position(|f| !Self::connected(f, seen, u, v)) else {
            return false;
        };
        self.adj[i][u.idx()].push(v);
        self.adj[i][v.idx()].push(u);
        self.owner.insert(key(u, v), i);
        true
    }

    fn remove(&mut self, u: Vertex, v: Vertex) {
        let i = self.owner.remove(&key(u, v)).expect("certified edge");
        self.adj[i][u.idx()].retain(|&w| w != v);
        self.adj[i][v.idx()].retain(|&w| w != u);
    }
}

fn random_certified(
    rng: &mut ChaCha8Rng,
    n: u32,
    steps: usize,
    alpha: u32,
    candidates: &[(Vertex, Vertex)],
) -> Vec<TraceOp> {
    let mut cert = ForestCertificate::new(n, alpha);
    let mut present: Vec<(Vertex, Vertex)> = Vec::new();
    let mut is_present: HashSet<(Vertex, Vertex)> = HashSet::new();
    let mut ops = Vec::with_capacity(steps);
    while ops.len() < steps {
        let delete = !present.is_empty() && rng.gen_bool(DELETE_RATE);
        let mut added = false;
        if !delete {
            for _ in 0..INSERT_TRIES {
                let (a, b) = candidates[rng.gen_range(0..candidates.len())];
                let e = key(a, b);
                if is_present.contains(&e) || !cert.try_insert(a, b) {
                    continue;
                }
                let (u, v) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                ops.push(TraceOp::Add(u, v));
                present.push(e);
                is_present.insert(e);
                added = true;
                break;
            }
        }
        if !added {
            if present.is_empty() {
                break;
            }
            let (u, v) = present.swap_remove(rng.gen_range(0..present.len()));
            is_present.remove(&(u, v));
            cert.remove(u, v);
            ops.push(TraceOp::Del(u, v));
        }
    }
    ops
}

/// Builds two paths on `k = n/2` vertices each, then repeatedly joins and
/// separates them, cycling the joining vertices through both ends and the
/// middle of each path.
fn adversarial_path(n: u32, steps: usize) -> Vec<TraceOp> {
    let k = n / 2;
    let mut ops = Vec::with_capacity(steps);
    for base in [0, k] {
        for x in base..base + k - 1 {
            ops.push(TraceOp::Add(Vertex(x), Vertex(x + 1)));
        }
    }
    let picks = [0, k - 1, k / 2];
    let mut round = 0usize;
    while ops.len() + 2 <= steps {
        let x1 = Vertex(picks[round % 3]);
        let x2 = Vertex(k + picks[(round / 3) % 3]);
        ops.push(TraceOp::Add(x1, x2));
        ops.push(TraceOp::Del(x1, x2));
        round += 1;
    }
    ops.truncate(steps);
    ops
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        let text = "# header\na 0 1\n\nd 1 0\nc 2\no 3\nk\n";
        let t = Trace::parse(text).unwrap();
        assert_eq!(t.ops.len(), 5);
        assert_eq!(Trace::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Trace::parse("a 0 1\nx 3\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(Trace::parse("a 0\n").unwrap_err().line, 1);
        assert_eq!(Trace::parse("a 2 2\n").unwrap_err().line, 1);
        assert_eq!(Trace::parse("o q\n").unwrap_err().line, 1);
    }

    #[test]
    fn validate_catches_duplicates() {
        let t = Trace::parse("a 0 1\na 1 0\n").unwrap();
        assert_eq!(t.validate(2).unwrap_err().line, 2);
        let t = Trace::parse("d 0 1\n").unwrap();
        assert!(t.validate(2).is_err());
        let t = Trace::parse("a 0 5\n").unwrap();
        assert!(t.validate(4).is_err());
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        for kind in GenKind::ALL {
            let spec = GenSpec::new(kind, 10, 120, 7, 2).with_queries(0.1);
            let a = generate(&spec).unwrap();
            let b = generate(&spec).unwrap();
            assert_eq!(a.to_string(), b.to_string(), "{kind}");
            a.validate(10).unwrap();
            assert_eq!(a.num_updates(), 120, "{kind}");
        }
    }

    fn replay_edges(t: &Trace, upto: usize) -> Vec<(Vertex, Vertex)> {
        let mut present = HashSet::new();
        for op in &t.ops[..upto] {
            match *op {
                TraceOp::Add(u, v) => {
                    present.insert(key(u, v));
                }
                TraceOp::Del(u, v) => {
                    present.remove(&key(u, v));
                }
                _ => {}
            }
        }
        present.into_iter().collect()
    }

    #[test]
    fn forest_only_stays_a_forest() {
        let t = generate(&GenSpec::new(GenKind::ForestOnly, 8, 200, 3, 1)).unwrap();
        for i in 0..=t.ops.len() {
            assert!(oracles::is_forest(&replay_edges(&t, i)));
        }
    }

    #[test]
    fn random_respects_alpha_max() {
        for (n, alpha) in [(8, 1), (10, 2), (40, 2)] {
            let t = generate(&GenSpec::new(GenKind::Random, n, 150, 11, alpha)).unwrap();
            for i in (0..=t.ops.len()).step_by(10) {
                let edges = replay_edges(&t, i);
                let sub: Vec<_> = edges.iter().copied().filter(|e| e.1 .0 < 12).collect();
                assert!(oracles::exact_arboricity(12.min(n as usize), &sub).unwrap() <= alpha);
            }
        }
    }

    #[test]
    fn adversarial_path_alternates() {
        let t = generate(&GenSpec::new(GenKind::AdversarialPath, 12, 30, 0, 1)).unwrap();
        assert_eq!(t.ops[..10].iter().filter(|op| matches!(op, TraceOp::Add(..))).count(), 10);
        assert_eq!(t.ops[10], TraceOp::Add(Vertex(0), Vertex(6)));
        assert_eq!(t.ops[11], TraceOp::Del(Vertex(0), Vertex(6)));
        assert_eq!(t.ops[12], TraceOp::Add(Vertex(5), Vertex(6)));
        t.validate(12).unwrap();
    }
}
