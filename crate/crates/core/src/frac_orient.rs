//! Fractional orientation engine on the copy graph.
//!
//! Every edge is a bundle of `gamma` copies. Inserting a copy orients it
//! towards the endpoint of higher load and then absorbs the load increase by
//! reorienting a maximal chain of tight out-copies; deleting a copy pulls a
//! maximal chain of tight in-copies instead. Either way exactly one vertex's
//! load changes, at the far end of the chain, and no valid copy becomes
//! invalid.
//!
//! Neighbour sets are reconciled lazily: before a vertex is inspected, an
//! [`NbrProvider`] names the incident edges whose status may have changed
//! since that vertex was last accessed.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::GraphError;
use crate::graph::{EdgeId, Graph, Vertex};

/// Names the edges at a vertex whose in/out status may be stale.
pub trait NbrProvider {
    fn changed_edges(&mut self, g: &mut Graph, v: Vertex, out: &mut Vec<EdgeId>);

    /// Called once `v`'s neighbour sets have been reconciled.
    fn accessed(&mut self, _g: &mut Graph, _v: Vertex) {}
}

/// Provider for graphs whose statuses are never changed behind the engine's
/// back, as in the standalone refinement.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoChanges;

impl NbrProvider for NoChanges {
    fn changed_edges(&mut self, _g: &mut Graph, _v: Vertex, _out: &mut Vec<EdgeId>) {}
}

/// Edges whose counters changed during a batch of copy operations, in first
/// touch order without duplicates, plus the vertices whose load changed.
#[derive(Clone, Debug, Default)]
pub struct ReorientLog {
    edges: Vec<EdgeId>,
    seen: HashSet<EdgeId>,
    load_changes: Vec<Vertex>,
}

impl ReorientLog {
    pub fn push(&mut self, e: EdgeId) {
        if self.seen.insert(e) {
            self.edges.push(e);
        }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn load_changes(&self) -> &[Vertex] {
        &self.load_changes
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn extend(&mut self, other: ReorientLog) {
        for e in other.edges {
            self.push(e);
        }
        self.load_changes.extend(other.load_changes);
    }
}

/// Counters kept across the lifetime of an engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FracStats {
    pub copy_inserts: u64,
    pub copy_deletes: u64,
    /// Single-copy reorientations along tight chains.
    pub chain_flips: u64,
    pub longest_chain: u32,
    /// Most bundles changed by a single copy operation.
    pub widest_log: u32,
    /// Largest `|L|` returned by the provider.
    pub widest_nbr_list: u32,
}

/// The copy insertion/deletion engine. State lives in the [`Graph`]; this
/// struct only carries scratch space and counters.
#[derive(Clone, Debug, Default)]
pub struct FracOrient {
    stats: FracStats,
    scratch: Vec<EdgeId>,
}

impl FracOrient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> FracStats {
        self.stats
    }

    /// Reconciles `v`'s neighbour sets with the edges the provider lists.
    pub fn update_nbrs(&mut self, g: &mut Graph, p: &mut dyn NbrProvider, v: Vertex) {
        self.scratch.clear();
        p.changed_edges(g, v, &mut self.scratch);
        self.stats.widest_nbr_list = self.stats.widest_nbr_list.max(self.scratch.len() as u32);
        for &e in &self.scratch {
            if g.contains(e) {
                g.reconcile_status(e);
            }
        }
        p.accessed(g, v);
    }

    /// First out-neighbour `w` (in id order) with `s(w) <= s(v) - 1`.
    pub fn tight_out_nbr(g: &Graph, v: Vertex) -> Option<Vertex> {
        let s = g.load(v);
        g.vertex(v).out_nbrs.iter().copied().find(|&w| g.load(w) < s)
    }

    /// The in-neighbour of largest load, if `s(v) <= s(w) - 1`.
    pub fn tight_in_nbr(g: &Graph, v: Vertex) -> Option<Vertex> {
        let &(key, w) = g.vertex(v).in_nbrs.last()?;
        debug_assert_eq!(key, g.load(w), "in-heap key of {w} at {v} is stale");
        (g.load(v) < key).then_some(w)
    }

    /// Adds one copy of the plain bundle `e = uv`, oriented away from the
    /// endpoint of smaller load (`u` on ties), and reorients a maximal tight
    /// chain from there.
    pub fn insert_copy(&mut self, g: &mut Graph, p: &mut dyn NbrProvider, e: EdgeId, u: Vertex, log: &mut ReorientLog) {
        let v = g.other(e, u);
        let tail = if g.load(u) <= g.load(v) { u } else { v };
        g.bump(e, tail, 1);
        g.reconcile_status(e);
        let before = log.len();
        log.push(e);
        self.stats.copy_inserts += 1;

        let mut w = tail;
        self.update_nbrs(g, p, w);
        let mut chain = 0;
        while let Some(next) = Self::tight_out_nbr(g, w) {
            let f = g.edge(w, next).expect("out-neighbour is adjacent");
            g.flip_copy(f, w);
            g.reconcile_status(f);
            log.push(f);
            w = next;
            self.update_nbrs(g, p, w);
            chain += 1;
        }
        g.change_load(w, 1);
        log.load_changes.push(w);
        self.note_chain(chain, log.len() - before);
    }

    /// Removes one copy oriented `tail -> other` from `e` and pulls a
    /// maximal tight chain into `tail`.
    pub fn delete_copy(&mut self, g: &mut Graph, p: &mut dyn NbrProvider, e: EdgeId, tail: Vertex, log: &mut ReorientLog) {
        g.bump(e, tail, -1);
        g.reconcile_status(e);
        let before = log.len();
        log.push(e);
        self.stats.copy_deletes += 1;

        let mut w = tail;
        self.update_nbrs(g, p, w);
        let mut chain = 0;
        while let Some(prev) = Self::tight_in_nbr(g, w) {
            let f = g.edge(prev, w).expect("in-neighbour is adjacent");
            g.flip_copy(f, prev);
            g.reconcile_status(f);
            log.push(f);
            w = prev;
            self.update_nbrs(g, p, w);
            chain += 1;
        }
        g.change_load(w, -1);
        log.load_changes.push(w);
        self.note_chain(chain, log.len() - before);
    }

    fn note_chain(&mut self, chain: u32, logged: usize) {
        self.stats.chain_flips += u64::from(chain);
        self.stats.longest_chain = self.stats.longest_chain.max(chain);
        self.stats.widest_log = self.stats.widest_log.max(logged as u32);
    }

    /// Registers `uv` and inserts its `gamma` copies one at a time.
    pub fn gamma_insert(
        &mut self,
        g: &mut Graph,
        p: &mut dyn NbrProvider,
        u: Vertex,
        v: Vertex,
    ) -> Result<(EdgeId, ReorientLog), GraphError> {
        let e = g.add_edge_slot(u, v)?;
        let mut log = ReorientLog::default();
        for _ in 0..g.gamma() {
            self.insert_copy(g, p, e, u, &mut log);
        }
        Ok((e, log))
    }

    /// Deletes all copies of the plain bundle `uv` and unregisters it. Each
    /// copy is taken from `u`'s side while it has any, then from `v`'s.
    pub fn gamma_delete(&mut self, g: &mut Graph, p: &mut dyn NbrProvider, u: Vertex, v: Vertex) -> Result<ReorientLog, GraphError> {
        let e = g.require_edge(u, v)?;
        let mut log = ReorientLog::default();
        for _ in 0..g.gamma() {
            let tail = if g.count(e, u) > 0 { u } else { v };
            self.delete_copy(g, p, e, tail, &mut log);
        }
        g.drop_edge_slot(e);
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Epsilon, Params};

    fn graph(n: u32, gamma: u32) -> Graph {
        Graph::new(Params::new(n, gamma, 2, 1, Epsilon::new(1, 1).unwrap()).unwrap())
    }

    fn bundle(g: &mut Graph, u: u32, v: u32) -> (u32, u32) {
        let b = g.get_bundle(Vertex(u), Vertex(v)).unwrap().unwrap();
        (b.count_u, b.count_v)
    }

    #[test]
    fn single_copy_goes_to_first_endpoint_on_tie() {
        let mut g = graph(2, 4);
        let mut f = FracOrient::new();
        let e = g.add_edge_slot(Vertex(0), Vertex(1)).unwrap();
        let mut log = ReorientLog::default();
        f.insert_copy(&mut g, &mut NoChanges, e, Vertex(0), &mut log);
        assert_eq!(bundle(&mut g, 0, 1), (1, 0));
        assert_eq!(g.loads(), vec![1, 0]);
        assert_eq!(log.edges(), &[e]);
    }

    #[test]
    fn gamma_four_splits_evenly() {
        let mut g = graph(2, 4);
        let mut f = FracOrient::new();
        f.gamma_insert(&mut g, &mut NoChanges, Vertex(0), Vertex(1)).unwrap();
        assert_eq!(bundle(&mut g, 0, 1), (2, 2));
        assert_eq!(g.loads(), vec![2, 2]);
        f.gamma_delete(&mut g, &mut NoChanges, Vertex(0), Vertex(1)).unwrap();
        assert_eq!(g.num_edges(), 0);
        assert_eq!(g.loads(), vec![0, 0]);
    }

    #[test]
    fn insertion_flips_tight_chain() {
        // c -> d is tight (loads 4 and 0); e has load 4.
        let (c, d, e, x) = (Vertex(0), Vertex(1), Vertex(2), Vertex(3));
        let mut g = graph(4, 4);
        for (a, b) in [(c, d), (e, x)] {
            g.add_edge_slot(a, b).unwrap();
            g.set_bundle(a, b, 4, 0).unwrap();
        }
        let ce = g.add_edge_slot(c, e).unwrap();
        let mut f = FracOrient::new();
        let mut log = ReorientLog::default();
        f.insert_copy(&mut g, &mut NoChanges, ce, c, &mut log);
        assert_eq!(bundle(&mut g, 0, 2), (1, 0));
        assert_eq!(bundle(&mut g, 0, 1), (3, 1));
        assert_eq!(g.loads(), vec![4, 1, 4, 0]);
        assert_eq!(log.load_changes(), &[d]);
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn deletion_pulls_tight_chain() {
        let (a, b, c) = (Vertex(0), Vertex(1), Vertex(2));
        let mut g = graph(3, 4);
        g.add_edge_slot(a, b).unwrap();
        g.set_bundle(a, b, 4, 0).unwrap();
        let bc = g.add_edge_slot(b, c).unwrap();
        g.set_bundle(b, c, 4, 0).unwrap();
        assert_eq!(g.loads(), vec![4, 4, 0]);
        let mut f = FracOrient::new();
        let mut log = ReorientLog::default();
        // s(b) equals s(a): no tight in-neighbour, b itself decrements.
        f.delete_copy(&mut g, &mut NoChanges, bc, b, &mut log);
        assert_eq!(g.loads(), vec![4, 3, 0]);
        // Now s(b) <= s(a) - 1: the next deletion pulls one of a's copies.
        f.delete_copy(&mut g, &mut NoChanges, bc, b, &mut log);
        assert_eq!(bundle(&mut g, 0, 1), (3, 1));
        assert_eq!(g.loads(), vec![3, 3, 0]);
        assert_eq!(log.load_changes(), &[b, a]);
    }

    #[test]
    fn tight_neighbour_queries() {
        let (a, b, c) = (Vertex(0), Vertex(1), Vertex(2));
        let mut g = graph(3, 4);
        g.add_edge_slot(a, b).unwrap();
        g.set_bundle(a, b, 2, 2).unwrap();
        assert_eq!(FracOrient::tight_out_nbr(&g, a), None);
        assert_eq!(FracOrient::tight_in_nbr(&g, a), None);
        g.add_edge_slot(b, c).unwrap();
        g.set_bundle(b, c, 4, 0).unwrap();
        // s(b) = 6 against s(a) = 2: b -> a is tight, a -> b is not.
        assert_eq!(FracOrient::tight_out_nbr(&g, b), Some(a));
        assert_eq!(FracOrient::tight_out_nbr(&g, a), None);
        assert_eq!(FracOrient::tight_in_nbr(&g, a), Some(b));
        assert_eq!(FracOrient::tight_in_nbr(&g, c), Some(b));
        assert_eq!(FracOrient::tight_in_nbr(&g, b), None);
    }

    #[test]
    fn triangle_loads_stay_small() {
        let mut g = graph(3, 4);
        let mut f = FracOrient::new();
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            f.gamma_insert(&mut g, &mut NoChanges, Vertex(u), Vertex(v)).unwrap();
        }
        assert_eq!(g.loads(), vec![4, 4, 4]);
    }
}
