//! Shared dynamic simple-graph state: vertex registry, edge bundles and the
//! global parameters.
//!
//! Every edge `uv` stands for a bundle of `gamma` parallel copies, each
//! oriented one way or the other. A bundle's two counters are all the
//! fractional orientation needs, and a vertex's load is the number of copies
//! it is the tail of. All arithmetic is integral with implicit denominator
//! `gamma`.
//!
//! Bundles of edges that currently sit in a dynamic forest keep their counters
//! inside that forest, so that weight can be shifted along whole paths in one
//! operation. [`Graph`] owns those forests and routes every counter access to
//! wherever the counter lives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyn_forest::DynForest;
use crate::error::GraphError;

/// Dense vertex id in `[0, n_cap)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex(pub u32);

impl Vertex {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Stable id of a present edge. Ids are recycled after deletion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Index of a dynamic forest owned by a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ForestSlot(pub u16);

/// Exact non-negative rational `num/den`, used for the approximation slack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Epsilon {
    num: u32,
    den: u32,
}

impl Epsilon {
    pub fn new(num: u32, den: u32) -> Result<Self, GraphError> {
        if den == 0 || num == 0 {
            return Err(GraphError::Config(format!("epsilon {num}/{den} must be positive")));
        }
        if num > den {
            return Err(GraphError::Config(format!("epsilon {num}/{den} exceeds 1")));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// `floor((1 + eps) * alpha)`, computed exactly.
    pub fn scaled_floor(self, alpha: u32) -> u32 {
        let num = u64::from(alpha) * u64::from(self.den + self.num);
        (num / u64::from(self.den)) as u32
    }

    /// `log_{1+eps}(n)`.
    pub fn log_base(self, n: u32) -> f64 {
        f64::from(n.max(1)).ln() / (1.0 + self.as_f64()).ln()
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Epsilon {
    type Err = GraphError;

    /// Accepts `p/q`, an integer, or a terminating decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::Config(format!("cannot parse epsilon {s:?}"));
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse().map_err(|_| bad())?;
            let q = q.trim().parse().map_err(|_| bad())?;
            return Self::new(p, q);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 6 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10u32.pow(frac.len() as u32);
            let int: u32 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let frac: u32 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            return Self::new(int * den + frac, den);
        }
        Self::new(s.parse().map_err(|_| bad())?, 1)
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Global parameters. Fractions `delta` and `mu` are stored as numerators
/// over `gamma`; `eta` is fixed to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    n_cap: u32,
    epsilon: Epsilon,
    gamma: u32,
    delta_num: u32,
    mu_num: u32,
    alpha_max: Option<u32>,
}

impl Params {
    pub fn new(
        n_cap: u32,
        gamma: u32,
        delta_num: u32,
        mu_num: u32,
        epsilon: Epsilon,
    ) -> Result<Self, GraphError> {
        if n_cap == 0 {
            return Err(GraphError::Config("n_cap must be positive".into()));
        }
        if gamma < 2 {
            return Err(GraphError::Config(format!("gamma={gamma} must be at least 2")));
        }
        if delta_num < 2 || gamma <= delta_num {
            return Err(GraphError::Config(format!(
                "delta={delta_num}/{gamma} must satisfy 2 <= delta_num < gamma"
            )));
        }
        if mu_num == 0 || mu_num >= delta_num {
            return Err(GraphError::Config(format!(
                "mu={mu_num}/{gamma} must satisfy 0 < mu_num < delta_num={delta_num}"
            )));
        }
        Ok(Self { n_cap, epsilon, gamma, delta_num, mu_num, alpha_max: None })
    }

    /// The parameter recipe `eps' = eps/20`, `gamma = ceil(log2(n) / eps'^2)`,
    /// `delta = 2/gamma`, `mu = 1/gamma`, with `gamma` capped at `gamma_cap`
    /// because the uncapped value is in the thousands even for tiny `n`.
    pub fn recipe(n_cap: u32, epsilon: Epsilon, gamma_cap: u32) -> Result<Self, GraphError> {
        let eps_prime = epsilon.as_f64() / 20.0;
        let log_n = f64::from(n_cap.max(2)).log2();
        let ideal = (log_n / (eps_prime * eps_prime)).ceil();
        let gamma = if ideal > f64::from(gamma_cap) { gamma_cap } else { ideal as u32 };
        Self::new(n_cap, gamma.max(3), 2, 1, epsilon)
    }

    pub fn with_alpha_max(mut self, alpha_max: u32) -> Self {
        self.alpha_max = Some(alpha_max.max(1));
        self
    }

    pub fn n_cap(&self) -> u32 {
        self.n_cap
    }
    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }
    pub fn gamma(&self) -> u32 {
        self.gamma
    }
    pub fn delta_num(&self) -> u32 {
        self.delta_num
    }
    pub fn mu_num(&self) -> u32 {
        self.mu_num
    }
    pub fn alpha_max(&self) -> Option<u32> {
        self.alpha_max
    }
    pub fn eta_num(&self) -> u32 {
        1
    }

    /// True iff a bundle with `count` copies on one side must be in the
    /// refinement: `count` lies strictly inside `(delta*gamma, (1-delta)*gamma)`.
    pub fn strictly_inside(&self, count: u32) -> bool {
        count > self.delta_num && count < self.gamma - self.delta_num
    }

    /// True iff `count` lies in the closed band `[delta-mu, 1-delta+mu]`
    /// (scaled by gamma) that refinement edges must respect.
    pub fn within_band(&self, count: u32) -> bool {
        count + self.mu_num >= self.delta_num && count <= self.gamma - self.delta_num + self.mu_num
    }

    /// Amount shifted along a pseudoforest cycle to invert it: `(1-delta)*gamma`.
    pub fn inversion_shift(&self) -> u32 {
        self.gamma - self.delta_num
    }

    /// `floor((1+eps) * alpha)`.
    pub fn scaled_alpha(&self, alpha: u32) -> u32 {
        self.epsilon.scaled_floor(alpha)
    }

    /// Load ceiling `(1+eps)*alpha*gamma + log_{1+eps}(n)` for arboricity `alpha`.
    pub fn load_ceiling(&self, alpha: u32) -> f64 {
        (1.0 + self.epsilon.as_f64()) * f64::from(alpha) * f64::from(self.gamma)
            + self.epsilon.log_base(self.n_cap)
    }
}

/// The counters of one bundle, seen from the `(u, v)` orientation of a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeBundle {
    pub u: Vertex,
    pub v: Vertex,
    /// Copies oriented `u -> v`.
    pub count_u: u32,
    /// Copies oriented `v -> u`.
    pub count_v: u32,
}

/// Per-vertex state of the fractional orientation engine.
#[derive(Clone, Debug, Default)]
pub struct VertexState {
    /// Number of copies this vertex is the tail of.
    pub load: u32,
    /// Heads of copies out of this vertex, as last reconciled.
    pub out_nbrs: BTreeSet<Vertex>,
    /// Tails of copies into this vertex keyed by their load; the last entry
    /// is the heap maximum.
    pub in_nbrs: BTreeSet<(u32, Vertex)>,
}

/// Where a bundle's counters currently live.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    /// Stored directly; counts oriented from the lower and higher endpoint.
    Plain { lo: u32, hi: u32 },
    /// Held as an edge weight inside a dynamic forest.
    Forest(ForestSlot),
}

#[derive(Clone, Debug)]
struct EdgeRecord {
    lo: Vertex,
    hi: Vertex,
    loc: Location,
}

/// The shared graph: registry, bundles, loads and the dynamic forests that
/// hold some of the bundles.
#[derive(Clone, Debug)]
pub struct Graph {
    params: Params,
    edges: Vec<Option<EdgeRecord>>,
    free: Vec<EdgeId>,
    adj: Vec<BTreeMap<Vertex, EdgeId>>,
    vertices: Vec<VertexState>,
    forests: Vec<DynForest>,
    num_edges: usize,
}

impl Graph {
    pub fn new(params: Params) -> Self {
        let n = params.n_cap() as usize;
        Self {
            params,
            edges: Vec::new(),
            free: Vec::new(),
            adj: vec![BTreeMap::new(); n],
            vertices: vec![VertexState::default(); n],
            forests: Vec::new(),
            num_edges: 0,
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn n(&self) -> u32 {
        self.params.n_cap()
    }

    pub fn gamma(&self) -> u32 {
        self.params.gamma()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v.0 < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexRange { v, n: self.n() })
        }
    }

    fn check_pair(&self, u: Vertex, v: Vertex) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    pub fn edge(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        self.adj.get(u.idx())?.get(&v).copied()
    }

    pub fn require_edge(&self, u: Vertex, v: Vertex) -> Result<EdgeId, GraphError> {
        self.check_pair(u, v)?;
        self.edge(u, v).ok_or(GraphError::NotFound(u, v))
    }

    /// Endpoints of `e` as `(lower id, higher id)`.
    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        let r = self.rec(e);
        (r.lo, r.hi)
    }

    /// The endpoint of `e` other than `w`.
    pub fn other(&self, e: EdgeId, w: Vertex) -> Vertex {
        let (lo, hi) = self.endpoints(e);
        if w == lo {
            hi
        } else {
            lo
        }
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.get(e.idx()).is_some_and(Option::is_some)
    }

    fn rec(&self, e: EdgeId) -> &EdgeRecord {
        self.edges[e.idx()].as_ref().expect("stale edge id")
    }

    pub fn location(&self, e: EdgeId) -> Location {
        self.rec(e).loc
    }

    /// Incident edges of `v` keyed by neighbour.
    pub fn neighbours(&self, v: Vertex) -> &BTreeMap<Vertex, EdgeId> {
        &self.adj[v.idx()]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v.idx()].len()
    }

    /// All present edges as `(id, lo, hi)` in id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, Vertex, Vertex)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().map(|r| (EdgeId(i as u32), r.lo, r.hi)))
    }

    pub fn vertex(&self, v: Vertex) -> &VertexState {
        &self.vertices[v.idx()]
    }

    pub fn load(&self, v: Vertex) -> u32 {
        self.vertices[v.idx()].load
    }

    pub fn loads(&self) -> Vec<u32> {
        self.vertices.iter().map(|s| s.load).collect()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.n()).map(Vertex)
    }

    // ---- forests -------------------------------------------------------

    pub fn add_forest(&mut self) -> ForestSlot {
        let slot = ForestSlot(self.forests.len() as u16);
        self.forests.push(DynForest::new(self.n(), self.gamma()));
        slot
    }

    pub fn num_forests(&self) -> usize {
        self.forests.len()
    }

    pub fn forest(&self, slot: ForestSlot) -> &DynForest {
        &self.forests[slot.0 as usize]
    }

    pub fn forest_mut(&mut self, slot: ForestSlot) -> &mut DynForest {
        &mut self.forests[slot.0 as usize]
    }

    /// Moves the counters of plain edge `e` into forest `slot`, attaching
    /// `child`'s tree below the other endpoint.
    pub fn link_into(&mut self, e: EdgeId, slot: ForestSlot, child: Vertex) -> Result<(), GraphError> {
        let (lo, hi) = self.endpoints(e);
        let Location::Plain { lo: c_lo, hi: c_hi } = self.location(e) else {
            panic!("edge {lo}-{hi} already in a forest");
        };
        debug_assert_eq!(c_lo + c_hi, self.gamma(), "only full bundles enter forests");
        let (parent, w_child) = if child == lo { (hi, c_lo) } else { (lo, c_hi) };
        self.forests[slot.0 as usize].link(child, parent, w_child)?;
        self.edges[e.idx()].as_mut().unwrap().loc = Location::Forest(slot);
        Ok(())
    }

    /// Cuts `e` out of its forest and stores its counters plainly again.
    pub fn cut_from_forest(&mut self, e: EdgeId) -> Result<ForestSlot, GraphError> {
        let (lo, hi) = self.endpoints(e);
        let Location::Forest(slot) = self.location(e) else {
            return Err(GraphError::NotFound(lo, hi));
        };
        let f = &mut self.forests[slot.0 as usize];
        let c_lo = f.weight(lo, hi)?;
        f.cut(lo, hi)?;
        let gamma = self.gamma();
        self.edges[e.idx()].as_mut().unwrap().loc = Location::Plain { lo: c_lo, hi: gamma - c_lo };
        Ok(slot)
    }

    // ---- counters ------------------------------------------------------

    /// `(count_lo, count_hi)` of `e`.
    pub fn counts(&mut self, e: EdgeId) -> (u32, u32) {
        let r = self.rec(e);
        let (lo, hi) = (r.lo, r.hi);
        match r.loc {
            Location::Plain { lo, hi } => (lo, hi),
            Location::Forest(slot) => {
                let c = self.forests[slot.0 as usize].weight(lo, hi).expect("forest edge");
                (c, self.gamma() - c)
            }
        }
    }

    /// Copies of `e` oriented away from `tail`.
    pub fn count(&mut self, e: EdgeId, tail: Vertex) -> u32 {
        let (c_lo, c_hi) = self.counts(e);
        if tail == self.rec(e).lo {
            c_lo
        } else {
            c_hi
        }
    }

    /// Changes the copies oriented away from `tail` by `delta` without
    /// touching loads. Forest-held bundles must keep their total at gamma,
    /// so only plain bundles may grow or shrink.
    pub fn bump(&mut self, e: EdgeId, tail: Vertex, delta: i32) {
        let r = self.edges[e.idx()].as_mut().expect("stale edge id");
        let is_lo = tail == r.lo;
        match &mut r.loc {
            Location::Plain { lo, hi } => {
                let c = if is_lo { lo } else { hi };
                *c = c.checked_add_signed(delta).expect("bundle counter underflow");
                debug_assert!(*c <= self.params.gamma());
            }
            Location::Forest(_) => panic!("cannot resize a forest-held bundle"),
        }
    }

    /// Moves one copy of `e` from `tail -> head` to `head -> tail`.
    pub fn flip_copy(&mut self, e: EdgeId, tail: Vertex) {
        let r = self.rec(e);
        let head = if tail == r.lo { r.hi } else { r.lo };
        match r.loc {
            Location::Plain { .. } => {
                self.bump(e, tail, -1);
                self.bump(e, head, 1);
            }
            Location::Forest(slot) => {
                self.forests[slot.0 as usize]
                    .add_weight(tail, head, -1)
                    .expect("forest weight stays in range");
            }
        }
    }

    /// Counters of `uv` as seen from `u`, or `None` if absent.
    pub fn get_bundle(&mut self, u: Vertex, v: Vertex) -> Result<Option<EdgeBundle>, GraphError> {
        self.check_pair(u, v)?;
        let Some(e) = self.edge(u, v) else { return Ok(None) };
        Ok(Some(EdgeBundle { u, v, count_u: self.count(e, u), count_v: self.count(e, v) }))
    }

    /// Replaces the counters of a present bundle and shifts loads by the
    /// difference. Neighbour sets and heap keys of both endpoints are
    /// reconciled immediately.
    pub fn set_bundle(&mut self, u: Vertex, v: Vertex, count_u: u32, count_v: u32) -> Result<(), GraphError> {
        let e = self.require_edge(u, v)?;
        let gamma = self.gamma();
        if count_u + count_v != gamma {
            return Err(GraphError::Consistency { u, v, count_u, count_v, gamma });
        }
        let (old_u, old_v) = (self.count(e, u), self.count(e, v));
        match self.location(e) {
            Location::Plain { .. } => {
                self.bump(e, u, count_u as i32 - old_u as i32);
                self.bump(e, v, count_v as i32 - old_v as i32);
            }
            Location::Forest(slot) => {
                self.forests[slot.0 as usize].add_weight(u, v, i64::from(count_u) - i64::from(old_u))?;
            }
        }
        self.change_load(u, count_u as i64 - old_u as i64);
        self.change_load(v, count_v as i64 - old_v as i64);
        self.reconcile_status(e);
        Ok(())
    }

    // ---- registry ------------------------------------------------------

    /// Registers `uv` with an empty bundle.
    pub fn add_edge_slot(&mut self, u: Vertex, v: Vertex) -> Result<EdgeId, GraphError> {
        self.check_pair(u, v)?;
        if self.edge(u, v).is_some() {
            return Err(GraphError::Duplicate(u, v));
        }
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let rec = EdgeRecord { lo, hi, loc: Location::Plain { lo: 0, hi: 0 } };
        let e = match self.free.pop() {
            Some(e) => {
                self.edges[e.idx()] = Some(rec);
                e
            }
            None => {
                self.edges.push(Some(rec));
                EdgeId(self.edges.len() as u32 - 1)
            }
        };
        self.adj[u.idx()].insert(v, e);
        self.adj[v.idx()].insert(u, e);
        self.num_edges += 1;
        Ok(e)
    }

    /// Unregisters an edge whose bundle has been emptied.
    pub fn drop_edge_slot(&mut self, e: EdgeId) {
        let r = self.edges[e.idx()].take().expect("stale edge id");
        assert_eq!(r.loc, Location::Plain { lo: 0, hi: 0 }, "bundle must be empty before removal");
        self.adj[r.lo.idx()].remove(&r.hi);
        self.adj[r.hi.idx()].remove(&r.lo);
        self.free.push(e);
        self.num_edges -= 1;
    }

    // ---- neighbour status ----------------------------------------------

    /// Records whether `tail` currently has copies towards `head`, keeping
    /// `out_nbrs(tail)` and `in_nbrs(head)` in step.
    pub fn set_status(&mut self, tail: Vertex, head: Vertex, present: bool) {
        let key = (self.vertices[tail.idx()].load, tail);
        if present {
            if self.vertices[tail.idx()].out_nbrs.insert(head) {
                self.vertices[head.idx()].in_nbrs.insert(key);
            }
        } else if self.vertices[tail.idx()].out_nbrs.remove(&head) {
            self.vertices[head.idx()].in_nbrs.remove(&key);
        }
    }

    /// Re-reads both counters of `e` and fixes the status of both directions.
    pub fn reconcile_status(&mut self, e: EdgeId) {
        let (lo, hi) = self.endpoints(e);
        let (c_lo, c_hi) = self.counts(e);
        self.set_status(lo, hi, c_lo > 0);
        self.set_status(hi, lo, c_hi > 0);
    }

    /// Whether the recorded status of `e` disagrees with its counters.
    pub fn status_stale(&mut self, e: EdgeId) -> bool {
        let (lo, hi) = self.endpoints(e);
        let (c_lo, c_hi) = self.counts(e);
        self.vertices[lo.idx()].out_nbrs.contains(&hi) != (c_lo > 0)
            || self.vertices[hi.idx()].out_nbrs.contains(&lo) != (c_hi > 0)
    }

    /// Adds `delta` to `s(v)` and re-keys `v` in the in-heaps of its
    /// recorded out-neighbours.
    pub fn change_load(&mut self, v: Vertex, delta: i64) {
        if delta == 0 {
            return;
        }
        let old = self.vertices[v.idx()].load;
        let new = u32::try_from(i64::from(old) + delta).expect("load stays non-negative");
        self.vertices[v.idx()].load = new;
        let outs: Vec<Vertex> = self.vertices[v.idx()].out_nbrs.iter().copied().collect();
        for w in outs {
            let heap = &mut self.vertices[w.idx()].in_nbrs;
            heap.remove(&(old, v));
            heap.insert((new, v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: u32) -> Params {
        Params::new(8, gamma, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap()
    }

    #[test]
    fn fresh_graph_is_empty() {
        let g = Graph::new(params(8));
        assert_eq!(g.num_edges(), 0);
        assert!(g.loads().iter().all(|&s| s == 0));
    }

    #[test]
    fn gamma_one_is_rejected() {
        assert!(matches!(
            Params::new(8, 1, 2, 1, Epsilon::new(1, 2).unwrap()),
            Err(GraphError::Config(_))
        ));
    }

    #[test]
    fn recipe_params_are_admissible() {
        let eps = Epsilon::new(1, 2).unwrap();
        let p = Params::recipe(1000, eps, 16).unwrap();
        assert_eq!((p.gamma(), p.delta_num(), p.mu_num()), (16, 2, 1));
        let uncapped = Params::recipe(16, eps, u32::MAX).unwrap();
        assert_eq!(uncapped.gamma(), 6400);
    }

    #[test]
    fn epsilon_parsing() {
        assert_eq!("0.5".parse::<Epsilon>().unwrap(), Epsilon::new(1, 2).unwrap());
        assert_eq!("1".parse::<Epsilon>().unwrap(), Epsilon::new(1, 1).unwrap());
        assert_eq!("3/4".parse::<Epsilon>().unwrap(), Epsilon::new(3, 4).unwrap());
        assert!("1.5".parse::<Epsilon>().is_err());
        assert!("0".parse::<Epsilon>().is_err());
        assert_eq!(Epsilon::new(1, 2).unwrap().scaled_floor(3), 4);
        assert_eq!(Epsilon::new(1, 1).unwrap().scaled_floor(3), 6);
    }

    #[test]
    fn absent_bundle_and_self_loop() {
        let mut g = Graph::new(params(8));
        assert_eq!(g.get_bundle(Vertex(0), Vertex(1)).unwrap(), None);
        assert_eq!(g.get_bundle(Vertex(2), Vertex(2)), Err(GraphError::SelfLoop(Vertex(2))));
    }

    #[test]
    fn set_bundle_moves_loads() {
        let mut g = Graph::new(params(4));
        let (u, v) = (Vertex(1), Vertex(3));
        g.add_edge_slot(u, v).unwrap();
        g.set_bundle(u, v, 3, 1).unwrap();
        assert_eq!((g.load(u), g.load(v)), (3, 1));
        g.set_bundle(u, v, 4, 0).unwrap();
        assert_eq!(g.get_bundle(u, v).unwrap().map(|b| (b.count_u, b.count_v)), Some((4, 0)));
        assert_eq!(g.get_bundle(v, u).unwrap().map(|b| (b.count_u, b.count_v)), Some((0, 4)));
        assert_eq!((g.load(u), g.load(v)), (4, 0));
        assert!(matches!(g.set_bundle(u, v, 5, 0), Err(GraphError::Consistency { .. })));
        assert_eq!(g.load(u), 4);
    }

    #[test]
    fn duplicate_and_self_loop_leave_state_untouched() {
        let mut g = Graph::new(params(4));
        g.add_edge_slot(Vertex(0), Vertex(1)).unwrap();
        assert_eq!(g.add_edge_slot(Vertex(1), Vertex(0)), Err(GraphError::Duplicate(Vertex(1), Vertex(0))));
        assert_eq!(g.add_edge_slot(Vertex(2), Vertex(2)), Err(GraphError::SelfLoop(Vertex(2))));
        assert_eq!(g.num_edges(), 1);
    }
}
