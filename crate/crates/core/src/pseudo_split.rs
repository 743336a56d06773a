//! Splits a bounded out-degree orientation into out-degree-1 parts.
//!
//! Every vertex keeps its out-edges in the slots `0..d(v)`, one edge per
//! slot; slot `i` stands for pseudoforest `P_i`. A new out-edge takes slot
//! `d(v)`, and a removed one leaves a hole that the edge in the last slot
//! fills. Since every vertex has at most one out-edge per slot, each `P_i`
//! is a pseudoforest.
//!
//! The slot of an edge never changes when the orientation of a whole cycle of
//! `P_i` is inverted, but which edge is `v`'s out-edge in `P_i` does. Callers
//! that invert cycles therefore pass a resolver that recovers `v`'s current
//! out-edge in a slot; the stored per-vertex table is only a lazy cache.

use std::collections::HashMap;

use serde::Serialize;

use crate::graph::{EdgeId, Vertex};

/// One change of slot assignment. Removals have `to == None`, insertions
/// `from == None`; a compaction move has both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub edge: EdgeId,
    pub tail: Vertex,
    pub from: Option<u16>,
    pub to: Option<u16>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SplitStats {
    pub events: u64,
    pub moves: u64,
    pub max_moves_per_event: u32,
}

/// Resolves the current out-edge of a vertex in a slot; `None` falls back to
/// the stored table.
pub type Resolver<'a> = &'a mut dyn FnMut(Vertex, u16) -> Option<EdgeId>;

#[derive(Clone, Debug)]
pub struct PseudoSplit {
    slot: HashMap<EdgeId, u16>,
    degree: Vec<u16>,
    stored: Vec<Vec<Option<EdgeId>>>,
    pending: Option<Vec<Vec<EdgeId>>>,
    stats: SplitStats,
}

impl PseudoSplit {
    /// A table for `n` vertices. With `track_pending`, every edge evicted from
    /// the stored table is remembered until [`PseudoSplit::refresh_stored`].
    pub fn new(n: u32, track_pending: bool) -> Self {
        let n = n as usize;
        Self {
            slot: HashMap::new(),
            degree: vec![0; n],
            stored: vec![Vec::new(); n],
            pending: track_pending.then(|| vec![Vec::new(); n]),
            stats: SplitStats::default(),
        }
    }

    pub fn stats(&self) -> SplitStats {
        self.stats
    }

    pub fn slot_of(&self, e: EdgeId) -> Option<u16> {
        self.slot.get(&e).copied()
    }

    pub fn out_degree(&self, v: Vertex) -> u16 {
        self.degree[v.idx()]
    }

    /// Largest out-degree, i.e. the number of slots in use.
    pub fn slots_in_use(&self) -> u16 {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.slot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot.is_empty()
    }

    /// Edges with their slots, in no particular order.
    pub fn assignments(&self) -> impl Iterator<Item = (EdgeId, u16)> + '_ {
        self.slot.iter().map(|(&e, &s)| (e, s))
    }

    /// The stored (possibly stale) out-edges of `v`, by slot.
    pub fn stored(&self, v: Vertex) -> &[Option<EdgeId>] {
        &self.stored[v.idx()]
    }

    pub fn pending(&self, v: Vertex) -> &[EdgeId] {
        self.pending.as_ref().map_or(&[], |p| &p[v.idx()])
    }

    fn store(&mut self, v: Vertex, i: u16, e: Option<EdgeId>) {
        let row = &mut self.stored[v.idx()];
        if row.len() <= i as usize {
            row.resize(i as usize + 1, None);
        }
        let old = std::mem::replace(&mut row[i as usize], e);
        if let (Some(p), Some(old)) = (self.pending.as_mut(), old) {
            if Some(old) != e {
                p[v.idx()].push(old);
            }
        }
    }

    /// Replaces `v`'s stored table with its current out-edges and forgets
    /// the pending evictions.
    pub fn refresh_stored(&mut self, v: Vertex, current: &[Option<EdgeId>]) {
        self.stored[v.idx()] = current.to_vec();
        if let Some(p) = self.pending.as_mut() {
            p[v.idx()].clear();
        }
    }

    fn note(&mut self, moves: usize) {
        self.stats.events += 1;
        self.stats.moves += moves as u64;
        self.stats.max_moves_per_event = self.stats.max_moves_per_event.max(moves as u32);
    }

    fn insert(&mut self, e: EdgeId, tail: Vertex) -> Move {
        let i = self.degree[tail.idx()];
        self.degree[tail.idx()] += 1;
        self.slot.insert(e, i);
        self.store(tail, i, Some(e));
        Move { edge: e, tail, from: None, to: Some(i) }
    }

    fn remove(&mut self, e: EdgeId, tail: Vertex, resolve: Option<Resolver<'_>>, out: &mut Vec<Move>) {
        let i = self.slot.remove(&e).expect("edge has a slot");
        out.push(Move { edge: e, tail, from: Some(i), to: None });
        let last = self.degree[tail.idx()] - 1;
        if i != last {
            let f = resolve
                .and_then(|r| r(tail, last))
                .or_else(|| self.stored[tail.idx()].get(last as usize).copied().flatten())
                .expect("prefix slot is occupied");
            self.slot.insert(f, i);
            self.store(tail, i, Some(f));
            out.push(Move { edge: f, tail, from: Some(last), to: Some(i) });
        } else {
            self.store(tail, i, None);
        }
        self.store(tail, last, None);
        self.stored[tail.idx()].truncate(last as usize);
        self.degree[tail.idx()] = last;
    }

    /// `tail -> head` appears: it takes slot `d(tail)`.
    pub fn on_insert(&mut self, e: EdgeId, tail: Vertex) -> Move {
        let m = self.insert(e, tail);
        self.note(1);
        m
    }

    /// `e` stops being an out-edge of `tail`; the last slot fills the hole.
    pub fn on_delete(&mut self, e: EdgeId, tail: Vertex, resolve: Option<Resolver<'_>>) -> Vec<Move> {
        let mut out = Vec::with_capacity(2);
        self.remove(e, tail, resolve, &mut out);
        self.note(out.len());
        out
    }

    /// `e` flips from `old_tail` to `new_tail`. Removals precede the
    /// insertion in the returned log.
    pub fn on_reorient(&mut self, e: EdgeId, old_tail: Vertex, new_tail: Vertex, resolve: Option<Resolver<'_>>) -> Vec<Move> {
        let mut out = Vec::with_capacity(3);
        self.remove(e, old_tail, resolve, &mut out);
        out.push(self.insert(e, new_tail));
        self.note(out.len());
        out
    }

    /// Exchanges the slots of two out-edges of `v`.
    pub fn swap_slots(&mut self, v: Vertex, a: EdgeId, b: EdgeId) {
        let sa = self.slot[&a];
        let sb = self.slot[&b];
        self.slot.insert(a, sb);
        self.slot.insert(b, sa);
        self.store(v, sa, Some(b));
        self.store(v, sb, Some(a));
        self.note(2);
    }

    /// Checks the prefix invariant against the true tails.
    pub fn check(&self, tail_of: impl Fn(EdgeId) -> Vertex) -> Result<(), String> {
        let mut seen: HashMap<(Vertex, u16), EdgeId> = HashMap::new();
        let mut count = vec![0u16; self.degree.len()];
        for (&e, &s) in &self.slot {
            let t = tail_of(e);
            if let Some(other) = seen.insert((t, s), e) {
                return Err(format!("vertex {t} has edges {} and {} in slot {s}", other.0, e.0));
            }
            count[t.idx()] += 1;
            if s >= self.degree[t.idx()] {
                return Err(format!("edge {} sits in slot {s} beyond d({t}) = {}", e.0, self.degree[t.idx()]));
            }
        }
        for (v, (&c, &d)) in count.iter().zip(&self.degree).enumerate() {
            if c != d {
                return Err(format!("vertex {v} records degree {d} but owns {c} edges"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const U: Vertex = Vertex(0);
    const V: Vertex = Vertex(1);

    #[test]
    fn first_edge_takes_slot_zero() {
        let mut p = PseudoSplit::new(2, false);
        let m = p.on_insert(EdgeId(7), U);
        assert_eq!(m.to, Some(0));
        assert_eq!(p.slot_of(EdgeId(7)), Some(0));
    }

    #[test]
    fn reorient_from_middle_slot_compacts() {
        let mut p = PseudoSplit::new(2, false);
        for e in 0..3 {
            p.on_insert(EdgeId(e), U);
        }
        p.on_insert(EdgeId(9), V);
        let moves = p.on_reorient(EdgeId(1), U, V, None);
        assert_eq!(
            moves,
            vec![
                Move { edge: EdgeId(1), tail: U, from: Some(1), to: None },
                Move { edge: EdgeId(2), tail: U, from: Some(2), to: Some(1) },
                Move { edge: EdgeId(1), tail: V, from: None, to: Some(1) },
            ]
        );
        assert_eq!(p.out_degree(U), 2);
        assert_eq!(p.slot_of(EdgeId(2)), Some(1));
        let tails = |e: EdgeId| if e.0 == 1 || e.0 == 9 { V } else { U };
        p.check(tails).unwrap();
    }

    #[test]
    fn only_edge_reoriented_empties_table() {
        let mut p = PseudoSplit::new(2, false);
        p.on_insert(EdgeId(0), U);
        let moves = p.on_reorient(EdgeId(0), U, V, None);
        assert_eq!(moves.len(), 2);
        assert_eq!(p.out_degree(U), 0);
        assert_eq!(p.slot_of(EdgeId(0)), Some(0));
    }

    #[test]
    fn delete_from_middle_is_one_compaction() {
        let mut p = PseudoSplit::new(2, true);
        for e in 0..3 {
            p.on_insert(EdgeId(e), U);
        }
        let moves = p.on_delete(EdgeId(0), U, None);
        assert_eq!(moves.len(), 2);
        assert_eq!(p.slot_of(EdgeId(2)), Some(0));
        assert_eq!(p.stored(U), &[Some(EdgeId(2)), Some(EdgeId(1))]);
        assert!(p.pending(U).contains(&EdgeId(0)));
    }

    #[test]
    fn resolver_overrides_stale_cache() {
        let mut p = PseudoSplit::new(2, false);
        p.on_insert(EdgeId(0), U);
        p.on_insert(EdgeId(1), U);
        // Pretend an inversion made edge 5 U's out-edge in slot 1.
        let moves = p.on_delete(EdgeId(0), U, Some(&mut |_, s| {
            assert_eq!(s, 1);
            Some(EdgeId(5))
        }));
        assert_eq!(moves[1].edge, EdgeId(5));
        assert_eq!(p.slot_of(EdgeId(5)), Some(0));
    }
}
