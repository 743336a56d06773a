//! Arboricity decomposition on top of the refinement.
//!
//! Edges outside `H` are rounded and split into pseudoforests `P_i`. Each
//! `P_i` is kept as a dynamic forest `F_i` plus, per cyclic component, one
//! surplus edge held by the component's root: the root is the only vertex
//! whose out-edge is not a tree edge. The surplus graph `G[M]` of all surplus
//! edges is kept colourful (no two edges with the same label in one
//! component) and acyclic by switches that swap two adjacent surplus edges
//! between their pseudoforests.
//!
//! A switch needs both edges to leave their shared vertex, so a unicycle may
//! first have to be inverted. Inversion shifts `gamma - delta` copies around
//! the whole cycle, which flips the rounding of every cycle edge without
//! changing any load. Copies can become invalid in the process; candidates
//! are located through a per-edge flag (`|s(a) - s(b)| > 1`) kept clean on
//! heavy edges and cleaned on demand along light ones, then deleted and
//! reinserted.
//!
//! Cycle inversions change counters of edges without visiting their
//! endpoints. Neighbour recovery therefore reports, per vertex, its stored
//! and current pseudoforest out-edges, which covers every edge whose status
//! may have changed since the vertex was last accessed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::Error;
use crate::forest_orient::HeavyLight;
use crate::frac_orient::{NbrProvider, ReorientLog};
use crate::graph::{EdgeId, ForestSlot, Graph, Location, Params, Vertex};
use crate::oracles;
use crate::pseudo_split::{Move, PseudoSplit, SplitStats};
use crate::refinement::{recomputed_load, rounded_tail, Observer, Refinement};

/// Engine switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArbConfig {
    /// Keep `G[M]` colourful and acyclic. Off, the engine maintains only the
    /// pseudoforest partition.
    pub surplus_repair: bool,
    /// Cross-check flag searches and neighbour recovery against direct scans.
    pub paranoid: bool,
}

impl Default for ArbConfig {
    fn default() -> Self {
        Self { surplus_repair: true, paranoid: false }
    }
}

/// Where a split edge currently sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Place {
    /// Assigned a slot, waiting in `R` with this tail.
    Queued(Vertex),
    Forest(u16),
    Surplus(u16),
}

/// A surplus edge `tail -> head` of pseudoforest `label`; `tail` is the
/// root of its component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SurplusEdge {
    pub edge: EdgeId,
    pub tail: Vertex,
    pub head: Vertex,
    pub label: u16,
}

impl SurplusEdge {
    fn other(&self, v: Vertex) -> Vertex {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }

    fn touches(&self, v: Vertex) -> bool {
        self.tail == v || self.head == v
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ArbStats {
    /// Edges taken from `R` and put into a pseudoforest.
    pub placements: u64,
    pub surplus_inserts: u64,
    /// Surplus edges turned into tree edges after their cycle was cut.
    pub demotions: u64,
    pub inversions: u64,
    pub flagged_found: u64,
    /// Invalid edges repaired after inversions.
    pub repairs: u64,
    /// Copies deleted (and as many reinserted) by repairs.
    pub repair_copies: u64,
    pub move1: u64,
    pub move2: u64,
    pub aborted_switches: u64,
    pub rounding_ties: u64,
    pub max_surplus_component: u32,
    /// Stale statuses missing from a recovery list (paranoid mode).
    pub nbr_misses: u64,
    /// Flag searches disagreeing with a direct scan (paranoid mode).
    pub flag_mismatches: u64,
    /// Inversions after which a cycle vertex's copies no longer sum to its
    /// load (paranoid mode).
    pub load_mismatches: u64,
}

#[derive(Clone, Debug)]
struct Layer {
    slot: ForestSlot,
    hl: HeavyLight,
    surplus: BTreeMap<Vertex, SurplusEdge>,
}

fn refresh_flag(g: &mut Graph, slot: ForestSlot, a: Vertex, b: Vertex) {
    let bit = g.load(a).abs_diff(g.load(b)) > 1;
    g.forest_mut(slot).set_flag(a, b, bit).expect("heavy-light edge is a forest edge");
}

/// `v`'s out-edge in pseudoforest `i` as recorded by the structure.
fn structural_out_edge(g: &mut Graph, layers: &[Layer], v: Vertex, i: u16) -> Option<EdgeId> {
    let layer = layers.get(i as usize)?;
    if let Some((_, p)) = g.forest_mut(layer.slot).first_edge_on_root_path(v) {
        return g.edge(v, p);
    }
    layer.surplus.get(&v).map(|s| s.edge)
}

/// Everything but the graph and the refinement; doubles as the refinement's
/// observer.
#[derive(Clone, Debug)]
struct Parts {
    h: ForestSlot,
    layers: Vec<Layer>,
    place: HashMap<EdgeId, Place>,
    split: PseudoSplit,
    ready: VecDeque<EdgeId>,
    madj: Vec<BTreeMap<EdgeId, SurplusEdge>>,
    dirty: BTreeSet<Vertex>,
    paranoid: bool,
    stats: ArbStats,
}

impl Parts {
    fn in_h(&self, g: &Graph, e: EdgeId) -> bool {
        g.location(e) == Location::Forest(self.h)
    }

    fn ensure_layer(&mut self, g: &mut Graph, i: u16) {
        while self.layers.len() <= i as usize {
            let slot = g.add_forest();
            self.layers.push(Layer { slot, hl: HeavyLight::new(g.n()), surplus: BTreeMap::new() });
        }
    }

    fn add_surplus(&mut self, s: SurplusEdge) {
        self.layers[s.label as usize].surplus.insert(s.tail, s);
        self.madj[s.tail.idx()].insert(s.edge, s);
        self.madj[s.head.idx()].insert(s.edge, s);
        self.place.insert(s.edge, Place::Surplus(s.label));
        self.dirty.insert(s.tail);
        self.dirty.insert(s.head);
    }

    fn remove_surplus(&mut self, i: u16, root: Vertex) -> SurplusEdge {
        let s = self.layers[i as usize].surplus.remove(&root).expect("root holds a surplus edge");
        self.madj[s.tail.idx()].remove(&s.edge);
        self.madj[s.head.idx()].remove(&s.edge);
        s
    }

    /// Current out-edges of `v` by slot: structural where placed, stored
    /// otherwise (queued edges).
    fn current_out_edges(&self, g: &mut Graph, v: Vertex) -> Vec<Option<EdgeId>> {
        let stored = self.split.stored(v);
        (0..self.split.out_degree(v))
            .map(|i| structural_out_edge(g, &self.layers, v, i).or_else(|| stored.get(i as usize).copied().flatten()))
            .collect()
    }

    /// The tail of a split edge under the current structure.
    fn tail_of(&self, g: &mut Graph, e: EdgeId) -> Option<Vertex> {
        match *self.place.get(&e)? {
            Place::Queued(t) => Some(t),
            Place::Forest(i) => {
                let (a, b) = g.endpoints(e);
                let slot = self.layers[i as usize].slot;
                Some(if g.forest_mut(slot).first_edge_on_root_path(a) == Some((a, b)) { a } else { b })
            }
            Place::Surplus(i) => {
                let (a, _) = g.endpoints(e);
                let s = self.layers[i as usize].surplus.get(&a);
                Some(if s.is_some_and(|s| s.edge == e) { a } else { g.other(e, a) })
            }
        }
    }

    /// Takes a split edge out of its pseudoforest and forgets its place.
    /// Returns its tail. A surplus edge whose cycle is broken by the cut is
    /// turned into a tree edge on the spot.
    fn unplace(&mut self, g: &mut Graph, e: EdgeId) -> Result<Vertex, Error> {
        let tail = self.tail_of(g, e).expect("edge is placed");
        match self.place.remove(&e).expect("edge is placed") {
            Place::Queued(_) => {}
            Place::Surplus(i) => {
                self.remove_surplus(i, tail);
            }
            Place::Forest(i) => {
                let parent = g.other(e, tail);
                let slot = self.layers[i as usize].slot;
                g.cut_from_forest(e)?;
                self.layers[i as usize].hl.cut(tail, parent, &mut |a, b| refresh_flag(g, slot, a, b))?;
                let root = g.forest_mut(slot).find_root(parent);
                if let Some(&m) = self.layers[i as usize].surplus.get(&root) {
                    if !g.forest_mut(slot).connected(root, m.head) {
                        self.remove_surplus(i, root);
                        g.link_into(m.edge, slot, root)?;
                        self.layers[i as usize].hl.link(root, m.head, &mut |a, b| refresh_flag(g, slot, a, b))?;
                        self.place.insert(m.edge, Place::Forest(i));
                        self.stats.demotions += 1;
                    }
                }
            }
        }
        Ok(tail)
    }

    /// Puts `e` into pseudoforest `i` as an out-edge of `tail`, which must
    /// have no other out-edge there.
    fn place_edge(&mut self, g: &mut Graph, e: EdgeId, tail: Vertex, i: u16) -> Result<(), Error> {
        self.ensure_layer(g, i);
        let head = g.other(e, tail);
        let slot = self.layers[i as usize].slot;
        if structural_out_edge(g, &self.layers, tail, i).is_some() {
            return Err(Error::Internal(format!("vertex {tail} already has an out-edge in pseudoforest {i}")));
        }
        self.stats.placements += 1;
        if g.forest_mut(slot).connected(tail, head) {
            self.add_surplus(SurplusEdge { edge: e, tail, head, label: i });
            self.stats.surplus_inserts += 1;
        } else {
            g.link_into(e, slot, tail)?;
            self.layers[i as usize].hl.link(tail, head, &mut |a, b| refresh_flag(g, slot, a, b))?;
            self.place.insert(e, Place::Forest(i));
        }
        Ok(())
    }

    fn enqueue(&mut self, e: EdgeId, tail: Vertex) {
        self.place.insert(e, Place::Queued(tail));
        self.ready.push_back(e);
    }

    fn apply_moves(&mut self, g: &mut Graph, moves: Vec<Move>) -> Result<(), Error> {
        for m in moves {
            match (m.from, m.to) {
                (Some(_), None) | (None, None) => {}
                (None, Some(_)) => self.enqueue(m.edge, m.tail),
                (Some(_), Some(_)) => {
                    if self.place.contains_key(&m.edge) {
                        self.unplace(g, m.edge)?;
                    }
                    self.enqueue(m.edge, m.tail);
                }
            }
        }
        Ok(())
    }

    fn drop_from_split(&mut self, g: &mut Graph, e: EdgeId, tail: Vertex) -> Result<(), Error> {
        let layers = &self.layers;
        let moves = self.split.on_delete(e, tail, Some(&mut |v, i| structural_out_edge(g, layers, v, i)));
        self.apply_moves(g, moves)
    }

    /// Brings the split in line with the rounding of every listed edge.
    fn reconcile(&mut self, g: &mut Graph, edges: &[EdgeId]) -> Result<(), Error> {
        for &e in edges {
            if !g.contains(e) || self.in_h(g, e) {
                continue;
            }
            let (want, tie) = rounded_tail(g, e);
            if tie {
                self.stats.rounding_ties += 1;
            }
            match self.tail_of(g, e) {
                None => {
                    let m = self.split.on_insert(e, want);
                    self.apply_moves(g, vec![m])?;
                }
                Some(have) if have != want => {
                    self.unplace(g, e)?;
                    let layers = &self.layers;
                    let moves =
                        self.split.on_reorient(e, have, want, Some(&mut |v, i| structural_out_edge(g, layers, v, i)));
                    self.apply_moves(g, moves)?;
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Keeps heavy edges clean after the loads of `vs` changed.
    fn touch(&mut self, g: &mut Graph, vs: &[Vertex]) {
        for layer in &mut self.layers {
            let slot = layer.slot;
            for &v in vs {
                layer.hl.touch(v, &mut |a, b| refresh_flag(g, slot, a, b));
            }
        }
    }

    /// Places the next queued edge; false once `R` is empty.
    fn place_next(&mut self, g: &mut Graph) -> Result<bool, Error> {
        while let Some(e) = self.ready.pop_front() {
            if let Some(&Place::Queued(t)) = self.place.get(&e) {
                let i = self.split.slot_of(e).expect("queued edge has a slot");
                self.place_edge(g, e, t, i)?;
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The connected component of `v` in `G[M]`.
    fn component(&self, v: Vertex) -> (BTreeSet<Vertex>, Vec<SurplusEdge>) {
        let mut verts = BTreeSet::from([v]);
        let mut edges = BTreeSet::new();
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            for s in self.madj[x.idx()].values() {
                edges.insert(*s);
                let y = s.other(x);
                if verts.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        (verts, edges.into_iter().collect())
    }

    /// Shortest walk in `G[M]` from any of `sources` to any of `targets`, as
    /// the edges used in order.
    fn bfs_path(&self, sources: &[Vertex], targets: &[Vertex]) -> Option<Vec<(Vertex, SurplusEdge)>> {
        let mut prev: HashMap<Vertex, Option<(Vertex, SurplusEdge)>> = sources.iter().map(|&s| (s, None)).collect();
        let mut queue: VecDeque<Vertex> = sources.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            if targets.contains(&x) {
                let mut out = Vec::new();
                let mut cur = x;
                while let Some(Some((p, s))) = prev.get(&cur).copied() {
                    out.push((cur, s));
                    cur = p;
                }
                out.reverse();
                return Some(out);
            }
            for s in self.madj[x.idx()].values() {
                let y = s.other(x);
                if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(y) {
                    slot.insert(Some((x, *s)));
                    queue.push_back(y);
                }
            }
        }
        None
    }
}

impl NbrProvider for Parts {
    fn changed_edges(&mut self, g: &mut Graph, v: Vertex, out: &mut Vec<EdgeId>) {
        out.extend_from_slice(self.split.pending(v));
        out.extend(self.split.stored(v).iter().flatten());
        for i in 0..self.layers.len() as u16 {
            out.extend(structural_out_edge(g, &self.layers, v, i));
        }
        if self.paranoid {
            let listed: HashSet<EdgeId> = out.iter().copied().collect();
            let incident: Vec<EdgeId> = g.neighbours(v).values().copied().collect();
            for e in incident {
                if !listed.contains(&e) && g.status_stale(e) {
                    self.stats.nbr_misses += 1;
                }
            }
        }
    }

    fn accessed(&mut self, g: &mut Graph, v: Vertex) {
        let current = self.current_out_edges(g, v);
        self.split.refresh_stored(v, &current);
    }
}

impl Observer for Parts {
    fn before_enter_h(&mut self, g: &mut Graph, e: EdgeId) {
        if self.place.contains_key(&e) {
            let tail = self.unplace(g, e).expect("split edge leaves its pseudoforest");
            self.drop_from_split(g, e, tail).expect("split stays consistent");
        }
    }

    fn after_leave_h(&mut self, g: &mut Graph, e: EdgeId) {
        let (tail, tie) = rounded_tail(g, e);
        if tie {
            self.stats.rounding_ties += 1;
        }
        let m = self.split.on_insert(e, tail);
        self.apply_moves(g, vec![m]).expect("queueing never fails");
    }
}

/// The decomposition at one instant, as `(lo, hi)` edge lists.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// `F_0, F_1, ...`, empty ones included.
    pub forests: Vec<Vec<(Vertex, Vertex)>>,
    /// The surplus graph `G[M]`.
    pub surplus: Vec<(Vertex, Vertex)>,
    pub h: Vec<(Vertex, Vertex)>,
}

impl Decomposition {
    /// All non-empty parts.
    pub fn nonempty(&self) -> Vec<&[(Vertex, Vertex)]> {
        self.forests
            .iter()
            .map(Vec::as_slice)
            .chain([self.surplus.as_slice(), self.h.as_slice()])
            .filter(|p| !p.is_empty())
            .collect()
    }
}

/// One step found by [`Arboricity::surplus_step`].
enum Step {
    /// Swap `a` and `b`, which share `at`.
    Switch { a: SurplusEdge, b: SurplusEdge, at: Vertex },
    /// Final switch of a cycle break at `at`: `a` carries the label with no
    /// tree neighbour of `at` in the component, `b` is a cycle edge.
    Break { a: SurplusEdge, b: SurplusEdge, at: Vertex },
}

/// The arboricity decomposition engine.
#[derive(Clone, Debug)]
pub struct Arboricity {
    graph: Graph,
    refinement: Refinement,
    parts: Parts,
    config: ArbConfig,
}

impl Arboricity {
    pub fn new(params: Params, config: ArbConfig) -> Self {
        let mut graph = Graph::new(params);
        let mut refinement = Refinement::new(&mut graph);
        refinement.set_audit(config.paranoid);
        let n = graph.n();
        let parts = Parts {
            h: refinement.slot(),
            layers: Vec::new(),
            place: HashMap::new(),
            split: PseudoSplit::new(n, true),
            ready: VecDeque::new(),
            madj: vec![BTreeMap::new(); n as usize],
            dirty: BTreeSet::new(),
            paranoid: config.paranoid,
            stats: ArbStats::default(),
        };
        Self { graph, refinement, parts, config }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn refinement(&self) -> &Refinement {
        &self.refinement
    }

    pub fn config(&self) -> ArbConfig {
        self.config
    }

    pub fn stats(&self) -> ArbStats {
        self.parts.stats
    }

    pub fn split_stats(&self) -> SplitStats {
        self.parts.split.stats()
    }

    /// Number of pseudoforest slots currently used by some vertex.
    pub fn slots_in_use(&self) -> u16 {
        self.parts.split.slots_in_use()
    }

    pub fn num_layers(&self) -> usize {
        self.parts.layers.len()
    }

    pub fn surplus_edges(&self) -> Vec<SurplusEdge> {
        self.parts.layers.iter().flat_map(|l| l.surplus.values().copied()).collect()
    }

    /// Whether `v` holds the surplus edge of its component in `P_i`.
    pub fn is_surplus_root(&self, i: usize, v: Vertex) -> bool {
        self.parts.layers.get(i).is_some_and(|l| l.surplus.contains_key(&v))
    }

    /// Depth parity of `v` in `F_i`.
    pub fn forest_parity(&mut self, i: usize, v: Vertex) -> u8 {
        match self.parts.layers.get(i) {
            Some(l) => self.graph.forest_mut(l.slot).depth_parity(v),
            None => 0,
        }
    }

    /// Depth parity of `v` in `H`.
    pub fn h_parity(&mut self, v: Vertex) -> u8 {
        let h = self.refinement.slot();
        self.graph.forest_mut(h).depth_parity(v)
    }

    /// Depth parity of `v` in its `G[M]` component, rooted at the
    /// component's least vertex. Only meaningful while `G[M]` is a forest.
    pub fn surplus_parity(&self, v: Vertex) -> u8 {
        let (verts, _) = self.parts.component(v);
        let root = *verts.first().expect("component contains v");
        let mut parity = HashMap::from([(root, 0u8)]);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let px = parity[&x];
            for s in self.parts.madj[x.idx()].values() {
                let y = s.other(x);
                if let std::collections::hash_map::Entry::Vacant(slot) = parity.entry(y) {
                    slot.insert(px ^ 1);
                    queue.push_back(y);
                }
            }
        }
        parity[&v]
    }

    pub fn forests(&self) -> Decomposition {
        let forests = self
            .parts
            .layers
            .iter()
            .map(|l| {
                let mut es: Vec<_> = self.graph.forest(l.slot).edges().collect();
                es.sort();
                es
            })
            .collect();
        let mut surplus: Vec<_> = self
            .surplus_edges()
            .into_iter()
            .map(|s| if s.tail < s.head { (s.tail, s.head) } else { (s.head, s.tail) })
            .collect();
        surplus.sort();
        let mut h: Vec<_> = self.graph.forest(self.refinement.slot()).edges().collect();
        h.sort();
        Decomposition { forests, surplus, h }
    }

    pub fn out_degree(&mut self, v: Vertex) -> usize {
        self.refinement.rounded_out_degree(&mut self.graph, v)
    }

    pub fn insert(&mut self, u: Vertex, v: Vertex) -> Result<ReorientLog, Error> {
        let (_, log) = self.refinement.insert_edge(&mut self.graph, &mut self.parts, u, v)?;
        self.settle(&log)?;
        self.drain()?;
        Ok(log)
    }

    pub fn delete(&mut self, u: Vertex, v: Vertex) -> Result<ReorientLog, Error> {
        let e = self.graph.require_edge(u, v)?;
        if self.parts.place.contains_key(&e) {
            let tail = self.parts.unplace(&mut self.graph, e)?;
            self.parts.drop_from_split(&mut self.graph, e, tail)?;
        }
        let log = self.refinement.delete_edge(&mut self.graph, &mut self.parts, u, v)?;
        self.settle(&log)?;
        self.drain()?;
        Ok(log)
    }

    fn settle(&mut self, log: &ReorientLog) -> Result<(), Error> {
        self.parts.touch(&mut self.graph, log.load_changes());
        self.parts.reconcile(&mut self.graph, log.edges())
    }

    /// Empties `R`, restoring the surplus invariants after each placement.
    fn drain(&mut self) -> Result<(), Error> {
        let budget = 10_000 + 1_000 * self.graph.num_edges() as u64;
        let mut steps = 0u64;
        loop {
            steps += 1;
            if steps > budget {
                return Err(Error::Internal(format!("surplus repair did not settle within {budget} steps")));
            }
            if let Some(&v) = self.parts.dirty.iter().next() {
                if !self.config.surplus_repair {
                    self.parts.dirty.clear();
                    continue;
                }
                self.fix_component(v)?;
                continue;
            }
            if !self.parts.place_next(&mut self.graph)? {
                return Ok(());
            }
        }
    }

    /// Performs one repair step on `v`'s surplus component, or clears it
    /// from the dirty set when it is colourful and acyclic.
    fn fix_component(&mut self, v: Vertex) -> Result<(), Error> {
        let (verts, edges) = self.parts.component(v);
        self.parts.stats.max_surplus_component = self.parts.stats.max_surplus_component.max(edges.len() as u32);
        let Some(step) = self.surplus_step(&verts, &edges) else {
            for x in &verts {
                self.parts.dirty.remove(x);
            }
            return Ok(());
        };
        match step {
            Step::Switch { a, b, at } => {
                self.parts.stats.move1 += 1;
                self.switch(a, b, at)?;
            }
            Step::Break { a, b, at } => {
                self.parts.stats.move2 += 1;
                if self.switch(a, b, at)? {
                    self.reroute_cycle(b.edge, at)?;
                }
            }
        }
        self.parts.dirty.extend(verts);
        Ok(())
    }

    /// Finds the next switch for a component, or `None` if it is colourful
    /// and acyclic.
    fn surplus_step(&mut self, verts: &BTreeSet<Vertex>, edges: &[SurplusEdge]) -> Option<Step> {
        if let Some(step) = self.colour_step(edges) {
            return Some(step);
        }
        if edges.len() < verts.len() {
            return None;
        }
        self.cycle_step(verts, edges)
    }

    /// Two edges with the same label: switch the last two edges of a
    /// shortest path joining them, moving the label towards the other end.
    fn colour_step(&self, edges: &[SurplusEdge]) -> Option<Step> {
        let mut by_label: BTreeMap<u16, Vec<SurplusEdge>> = BTreeMap::new();
        for s in edges {
            by_label.entry(s.label).or_default().push(*s);
        }
        let mut best: Option<(SurplusEdge, Vec<(Vertex, SurplusEdge)>)> = None;
        for group in by_label.values().filter(|g| g.len() > 1) {
            for (x, first) in group.iter().enumerate() {
                for last in &group[x + 1..] {
                    let path = self
                        .parts
                        .bfs_path(&[first.tail, first.head], &[last.tail, last.head])
                        .expect("same component");
                    if best.as_ref().is_none_or(|b| path.len() < b.1.len()) {
                        best = Some((*last, path));
                    }
                }
            }
        }
        let (last, path) = best?;
        let &(at, before) = path.last().expect("same-label edges never share a vertex");
        Some(Step::Switch { a: before, b: last, at })
    }

    /// A colourful component with a cycle: pick the least vertex `v` on a
    /// cycle and a label `i` present in the component such that no tree
    /// edge of `F_i` joins `v` to the component. Walk the `M_i` edge to `v`,
    /// then switch it with a cycle edge at `v`.
    fn cycle_step(&mut self, verts: &BTreeSet<Vertex>, edges: &[SurplusEdge]) -> Option<Step> {
        let cycle = find_cycle(edges)?;
        let v = cycle.iter().flat_map(|s| [s.tail, s.head]).min()?;
        let labels: BTreeSet<u16> = edges.iter().map(|s| s.label).collect();
        let i = labels.into_iter().find(|&i| {
            let slot = self.parts.layers[i as usize].slot;
            verts.iter().all(|&x| x == v || !self.graph.forest(slot).has_edge(v, x))
        })?;
        let m = *edges.iter().find(|s| s.label == i)?;
        if m.touches(v) {
            let c = *cycle.iter().find(|s| s.touches(v) && s.edge != m.edge && s.label != i)?;
            return Some(Step::Break { a: m, b: c, at: v });
        }
        let path = self.parts.bfs_path(&[v], &[m.tail, m.head])?;
        let &(at, next) = path.last()?;
        Some(Step::Switch { a: next, b: m, at })
    }

    /// Swaps surplus edges `a` and `b` sharing `at` between their
    /// pseudoforests, inverting cycles first so that both leave `at`.
    /// Returns false if an inversion needed repairs, in which case nothing
    /// was swapped.
    fn switch(&mut self, a: SurplusEdge, b: SurplusEdge, at: Vertex) -> Result<bool, Error> {
        for s in [a, b] {
            if s.tail != at && self.invert(s.label, s.tail)? {
                self.parts.stats.aborted_switches += 1;
                return Ok(false);
            }
        }
        let p = &mut self.parts;
        p.remove_surplus(a.label, at);
        p.remove_surplus(b.label, at);
        p.place.remove(&a.edge);
        p.place.remove(&b.edge);
        p.split.swap_slots(at, a.edge, b.edge);
        p.place_edge(&mut self.graph, b.edge, at, a.label)?;
        p.place_edge(&mut self.graph, a.edge, at, b.label)?;
        Ok(true)
    }

    /// After the final switch of a cycle break, edge `c` sits in the
    /// pseudoforest whose tree has no edge from `v` into the component. If
    /// it closed a cycle there, the tree edge `z -> v` on that cycle takes
    /// over as the surplus edge and `c` becomes a tree edge.
    fn reroute_cycle(&mut self, c: EdgeId, v: Vertex) -> Result<(), Error> {
        let Some(&Place::Surplus(i)) = self.parts.place.get(&c) else { return Ok(()) };
        let g = &mut self.graph;
        let p = &mut self.parts;
        let layer = i as usize;
        let slot = p.layers[layer].slot;
        let s = p.remove_surplus(i, v);
        let y = s.head;
        let f = g.forest_mut(slot);
        f.set_root(y);
        let (_, z) = f.first_edge_on_root_path(v).expect("v lies below y");
        f.set_root(v);
        let zv = g.edge(z, v).expect("tree edge is a graph edge");
        g.cut_from_forest(zv)?;
        p.layers[layer].hl.cut(z, v, &mut |a, b| refresh_flag(g, slot, a, b))?;
        g.link_into(c, slot, v)?;
        p.layers[layer].hl.link(v, y, &mut |a, b| refresh_flag(g, slot, a, b))?;
        p.place.insert(c, Place::Forest(i));
        p.add_surplus(SurplusEdge { edge: zv, tail: z, head: v, label: i });
        Ok(())
    }

    /// Inverts the unicycle of `P_i` whose surplus edge is held by `root`,
    /// then repairs copies the inversion made invalid. Returns whether any
    /// repair happened.
    fn invert(&mut self, i: u16, root: Vertex) -> Result<bool, Error> {
        let g = &mut self.graph;
        let p = &mut self.parts;
        let layer = i as usize;
        let slot = p.layers[layer].slot;
        let m = p.layers[layer].surplus[&root];
        let y = m.head;
        p.stats.inversions += 1;

        p.layers[layer].hl.clean_path(y, root, &mut |a, b| refresh_flag(g, slot, a, b));
        let mut flagged = Vec::new();
        while let Some((a, b)) = g.forest_mut(slot).find_flagged_edge_on_path(y, root)? {
            g.forest_mut(slot).set_flag(a, b, false)?;
            flagged.push((a, b));
        }
        p.stats.flagged_found += flagged.len() as u64;
        let mut cycle = Vec::new();
        if p.paranoid {
            let path = g.forest_mut(slot).path_edges(y, root)?;
            cycle = path.iter().map(|e| e.near).chain([root]).collect();
            let mut direct: Vec<_> = path
                .iter()
                .filter(|e| g.load(e.near).abs_diff(g.load(e.far)) > 1)
                .map(|e| key(e.near, e.far))
                .collect();
            let mut found: Vec<_> = flagged.iter().map(|&(a, b)| key(a, b)).collect();
            direct.sort();
            found.sort();
            if direct != found {
                p.stats.flag_mismatches += 1;
            }
        }

        let shift = g.params().inversion_shift();
        g.forest_mut(slot).add_weight(y, root, -i64::from(shift))?;
        g.bump(m.edge, root, -(shift as i32));
        g.bump(m.edge, y, shift as i32);
        g.reconcile_status(m.edge);
        if cycle.iter().any(|&x| recomputed_load(g, x) != g.load(x)) {
            p.stats.load_mismatches += 1;
        }
        g.forest_mut(slot).set_root(y);
        p.remove_surplus(i, root);
        p.add_surplus(SurplusEdge { edge: m.edge, tail: y, head: root, label: i });

        let mut invalid = Vec::new();
        for (a, b) in flagged {
            let (t, h) = if g.forest_mut(slot).first_edge_on_root_path(a) == Some((a, b)) { (a, b) } else { (b, a) };
            if g.load(t) > g.load(h) + 1 {
                invalid.push(g.edge(t, h).expect("tree edge is a graph edge"));
            } else {
                g.forest_mut(slot).set_flag(a, b, true)?;
            }
        }
        if g.load(y) > g.load(root) + 1 {
            invalid.push(m.edge);
        }
        if invalid.is_empty() {
            return Ok(false);
        }
        self.repair(&invalid)?;
        Ok(true)
    }

    /// Pulls invalid edges out of their pseudoforests, then deletes and
    /// reinserts their invalid copies.
    fn repair(&mut self, invalid: &[EdgeId]) -> Result<(), Error> {
        let mut tails = Vec::with_capacity(invalid.len());
        for &e in invalid {
            self.parts.stats.repairs += 1;
            let tail = self.parts.unplace(&mut self.graph, e)?;
            self.parts.drop_from_split(&mut self.graph, e, tail)?;
            tails.push((e, tail));
        }
        for (e, tail) in tails {
            if !self.graph.contains(e) {
                continue;
            }
            let head = self.graph.other(e, tail);
            let k = self.graph.count(e, tail);
            if k == 0 || self.graph.load(tail) <= self.graph.load(head) + 1 {
                self.parts.reconcile(&mut self.graph, &[e])?;
                continue;
            }
            self.parts.stats.repair_copies += u64::from(k);
            let log = self.refinement.reinsert_copies(&mut self.graph, &mut self.parts, e, tail, k)?;
            self.settle(&log)?;
        }
        Ok(())
    }

    /// Full invariant suite. Read-only apart from lazy status and splay
    /// bookkeeping.
    pub fn check(&mut self) -> Result<(), String> {
        self.refinement.check(&mut self.graph)?;
        let g = &mut self.graph;
        let p = &self.parts;
        if !p.ready.iter().all(|e| !matches!(p.place.get(e), Some(Place::Queued(_)))) {
            return Err("queue R not drained".into());
        }
        let edges: Vec<(EdgeId, Vertex, Vertex)> = g.edges().collect();
        let mut arcs: HashMap<(Vertex, u16), EdgeId> = HashMap::new();
        for &(e, lo, hi) in &edges {
            if p.in_h(g, e) {
                if p.place.contains_key(&e) {
                    return Err(format!("H edge {lo}-{hi} is also in a pseudoforest"));
                }
                continue;
            }
            let Some(tail) = p.tail_of(g, e) else {
                return Err(format!("edge {lo}-{hi} is in no pseudoforest"));
            };
            let (want, _) = rounded_tail(g, e);
            if tail != want {
                return Err(format!("edge {lo}-{hi} placed with tail {tail}, rounds to {want}"));
            }
            let slot = p.split.slot_of(e).ok_or_else(|| format!("edge {lo}-{hi} has no slot"))?;
            let here = match p.place[&e] {
                Place::Forest(i) | Place::Surplus(i) => i,
                Place::Queued(_) => return Err(format!("edge {lo}-{hi} still queued")),
            };
            if here != slot {
                return Err(format!("edge {lo}-{hi} sits in P_{here} but has slot {slot}"));
            }
            if let Some(other) = arcs.insert((tail, slot), e) {
                return Err(format!("vertex {tail} has out-edges {} and {} in P_{slot}", other.0, e.0));
            }
        }
        let tails: HashMap<EdgeId, Vertex> = arcs.iter().map(|(&(t, _), &e)| (e, t)).collect();
        p.split.check(|e| tails[&e])?;

        for (i, layer) in p.layers.iter().enumerate() {
            let f_edges: Vec<_> = g.forest(layer.slot).edges().collect();
            if !oracles::is_forest(&f_edges) {
                return Err(format!("F_{i} has a cycle"));
            }
            if f_edges.len() != layer.hl.num_edges() {
                return Err(format!("heavy-light mirror of F_{i} has {} edges", layer.hl.num_edges()));
            }
            layer.hl.check().map_err(|m| format!("heavy-light of F_{i}: {m}"))?;
            for (&r, s) in &layer.surplus {
                let f = g.forest_mut(layer.slot);
                if f.find_root(r) != r {
                    return Err(format!("surplus edge of P_{i} held by non-root {r}"));
                }
                if !f.connected(r, s.head) {
                    return Err(format!("surplus edge {r}-{} of P_{i} closes no cycle", s.head));
                }
            }
        }

        let surplus: Vec<_> = p.layers.iter().flat_map(|l| l.surplus.values().map(|s| (s.tail, s.head))).collect();
        if self.config.surplus_repair {
            if !oracles::is_forest(&surplus) {
                return Err("surplus graph has a cycle".into());
            }
            for v in g.vertices() {
                let (_, comp) = p.component(v);
                let labels: BTreeSet<u16> = comp.iter().map(|s| s.label).collect();
                if labels.len() != comp.len() {
                    return Err(format!("surplus component of {v} is not colourful"));
                }
            }
        }

        Ok(())
    }
}

fn key(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Some cycle of an undirected edge list, as its edges.
fn find_cycle(edges: &[SurplusEdge]) -> Option<Vec<SurplusEdge>> {
    let mut adj: BTreeMap<Vertex, Vec<SurplusEdge>> = BTreeMap::new();
    for s in edges {
        adj.entry(s.tail).or_default().push(*s);
        adj.entry(s.head).or_default().push(*s);
    }
    let mut parent: HashMap<Vertex, Option<SurplusEdge>> = HashMap::new();
    let mut depth: HashMap<Vertex, usize> = HashMap::new();
    for &start in adj.keys() {
        if parent.contains_key(&start) {
            continue;
        }
        parent.insert(start, None);
        depth.insert(start, 0);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for s in &adj[&x] {
                if parent[&x].is_some_and(|p| p.edge == s.edge) {
                    continue;
                }
                let y = s.other(x);
                if let Some(&dy) = depth.get(&y) {
                    // Back edge: walk both ends up to their meeting point.
                    let mut cycle = vec![*s];
                    let (mut a, mut b) = (x, y);
                    let (mut da, mut db) = (depth[&x], dy);
                    while a != b {
                        if da >= db {
                            let e = parent[&a].expect("not the root");
                            cycle.push(e);
                            a = e.other(a);
                            da -= 1;
                        } else {
                            let e = parent[&b].expect("not the root");
                            cycle.push(e);
                            b = e.other(b);
                            db -= 1;
                        }
                    }
                    return Some(cycle);
                }
                parent.insert(y, Some(*s));
                depth.insert(y, depth[&x] + 1);
                stack.push(y);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Epsilon;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engine(n: u32, gamma: u32, config: ArbConfig) -> Arboricity {
        Arboricity::new(Params::new(n, gamma, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap(), config)
    }

    fn v(x: u32) -> Vertex {
        Vertex(x)
    }

    #[test]
    fn first_edge_is_a_tree_edge() {
        let mut a = engine(4, 8, ArbConfig::default());
        a.insert(v(0), v(1)).unwrap();
        a.check().unwrap();
        let d = a.forests();
        assert_eq!(d.nonempty(), vec![&[(v(0), v(1))][..]]);
        assert!(d.surplus.is_empty());
    }

    #[test]
    fn triangle_closes_a_cycle() {
        let mut a = engine(3, 8, ArbConfig::default());
        for (x, y) in [(0, 1), (1, 2), (0, 2)] {
            a.insert(v(x), v(y)).unwrap();
            a.check().unwrap();
        }
        let d = a.forests();
        let total: usize = d.nonempty().iter().map(|p| p.len()).sum();
        assert_eq!(total, 3);
    }

    fn random_trace(seed: u64, n: u32, ops: usize, gamma: u32, config: ArbConfig) -> Arboricity {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = engine(n, gamma, config);
        let mut present: Vec<(u32, u32)> = Vec::new();
        for _ in 0..ops {
            if !present.is_empty() && rng.gen_bool(0.3) {
                let (x, y) = present.swap_remove(rng.gen_range(0..present.len()));
                a.delete(v(x), v(y)).unwrap();
            } else {
                let x = rng.gen_range(0..n);
                let y = rng.gen_range(0..n);
                if x == y || present.contains(&(x.min(y), x.max(y))) {
                    continue;
                }
                present.push((x.min(y), x.max(y)));
                a.insert(v(x), v(y)).unwrap();
            }
            a.check().unwrap();
        }
        a
    }

    #[test]
    fn random_traces_keep_invariants() {
        for seed in 0..12 {
            random_trace(seed, 9, 80, 8, ArbConfig { surplus_repair: true, paranoid: true });
        }
    }

    #[test]
    fn dense_traces_keep_invariants() {
        for seed in 0..4 {
            let a = random_trace(100 + seed, 7, 150, 6, ArbConfig { surplus_repair: true, paranoid: true });
            assert_eq!(a.stats().flag_mismatches, 0);
            assert_eq!(a.stats().nbr_misses, 0);
        }
    }

    #[test]
    fn without_repair_pseudoforests_still_hold() {
        for seed in 0..6 {
            random_trace(200 + seed, 8, 100, 8, ArbConfig { surplus_repair: false, paranoid: false });
        }
    }

    #[test]
    fn inversion_keeps_loads() {
        let mut a = engine(3, 8, ArbConfig::default());
        for (x, y) in [(0, 1), (1, 2), (0, 2)] {
            a.insert(v(x), v(y)).unwrap();
        }
        let before = a.graph().loads();
        let Some(m) = a.surplus_edges().first().copied() else { return };
        a.invert(m.label, m.tail).unwrap();
        assert_eq!(a.graph().loads(), before);
        assert!(a.is_surplus_root(m.label as usize, m.head));
        a.check().unwrap();
    }
}
