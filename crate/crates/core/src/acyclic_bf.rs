//! Acyclic bounded out-degree orientation by sink flips.
//!
//! Every insertion turns its first endpoint into a sink; any vertex pushed
//! above `d` out-edges is turned into a sink in turn. A vertex's out-edges
//! always point at vertices that became sinks later, so the orientation stays
//! acyclic. With `d = 2(alpha_max + 1)` the cascade terminates on arboricity
//! `alpha_max` preserving sequences.
//!
//! [`reverse_replay`] computes the reorientation count `r` of an offline
//! `delta`-orientation scheme for a trace, which bounds the total work.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, GraphError};
use crate::graph::{EdgeId, Vertex};
use crate::pseudo_split::{PseudoSplit, SplitStats};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BfStats {
    pub inserts: u64,
    pub deletes: u64,
    /// Vertices turned into sinks, the inserted endpoint included.
    pub sink_flips: u64,
    pub reorientations: u64,
    pub max_cascade: u32,
}

#[derive(Clone, Debug)]
pub struct AcyclicBf {
    d: usize,
    out: Vec<Vec<(Vertex, EdgeId)>>,
    ids: HashMap<(Vertex, Vertex), EdgeId>,
    free: Vec<EdgeId>,
    next: u32,
    split: PseudoSplit,
    stats: BfStats,
}

fn key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl AcyclicBf {
    /// Engine for `n` vertices and out-degree bound `d = 2(alpha_max + 1)`.
    pub fn new(n: u32, alpha_max: u32) -> Self {
        Self::with_bound(n, 2 * (alpha_max as usize + 1))
    }

    pub fn with_bound(n: u32, d: usize) -> Self {
        Self {
            d,
            out: vec![Vec::new(); n as usize],
            ids: HashMap::new(),
            free: Vec::new(),
            next: 0,
            split: PseudoSplit::new(n, false),
            stats: BfStats::default(),
        }
    }

    pub fn bound(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.out.len() as u32
    }

    pub fn stats(&self) -> BfStats {
        self.stats
    }

    pub fn split_stats(&self) -> SplitStats {
        self.split.stats()
    }

    pub fn num_edges(&self) -> usize {
        self.ids.len()
    }

    pub fn out_edges(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.out[v.idx()].iter().map(|&(w, _)| w)
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out[v.idx()].len()
    }

    /// Every edge as `(tail, head)`.
    pub fn arcs(&self) -> Vec<(Vertex, Vertex)> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(t, outs)| outs.iter().map(move |&(h, _)| (Vertex(t as u32), h)))
            .collect()
    }

    fn check_pair(&self, u: Vertex, v: Vertex) -> Result<(), GraphError> {
        let n = self.n();
        for x in [u, v] {
            if x.0 >= n {
                return Err(GraphError::VertexRange { v: x, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    /// Inserts `uv` and turns `u` into a sink. Returns the number of edge
    /// reorientations.
    pub fn insert(&mut self, u: Vertex, v: Vertex) -> Result<u64, Error> {
        self.check_pair(u, v)?;
        if self.ids.contains_key(&key(u, v)) {
            return Err(GraphError::Duplicate(u, v).into());
        }
        let e = self.free.pop().unwrap_or_else(|| {
            self.next += 1;
            EdgeId(self.next - 1)
        });
        self.ids.insert(key(u, v), e);
        self.out[u.idx()].push((v, e));
        self.split.on_insert(e, u);
        self.stats.inserts += 1;

        let before = self.stats.reorientations;
        let mut stack = vec![u];
        let mut cascade = 0u32;
        let mut first = true;
        while let Some(x) = stack.pop() {
            if !first && self.out[x.idx()].len() <= self.d {
                continue;
            }
            first = false;
            cascade += 1;
            for (w, f) in std::mem::take(&mut self.out[x.idx()]) {
                self.out[w.idx()].push((x, f));
                self.split.on_reorient(f, x, w, None);
                self.stats.reorientations += 1;
                if self.out[w.idx()].len() > self.d {
                    stack.push(w);
                }
            }
        }
        self.stats.sink_flips += u64::from(cascade);
        self.stats.max_cascade = self.stats.max_cascade.max(cascade);
        Ok(self.stats.reorientations - before)
    }

    pub fn delete(&mut self, u: Vertex, v: Vertex) -> Result<(), Error> {
        self.check_pair(u, v)?;
        let e = self.ids.remove(&key(u, v)).ok_or(GraphError::NotFound(u, v))?;
        for (t, h) in [(u, v), (v, u)] {
            let list = &mut self.out[t.idx()];
            if let Some(pos) = list.iter().position(|&(w, _)| w == h) {
                list.swap_remove(pos);
                self.split.on_delete(e, t, None);
                self.free.push(e);
                self.stats.deletes += 1;
                return Ok(());
            }
        }
        Err(Error::Internal(format!("edge {u}-{v} missing from both out-lists")))
    }

    /// Edges of the pseudoforest split, grouped by part.
    pub fn partitions(&self) -> Vec<Vec<(Vertex, Vertex)>> {
        let mut parts: Vec<Vec<(Vertex, Vertex)>> = Vec::new();
        for (t, outs) in self.out.iter().enumerate() {
            for &(h, e) in outs {
                let i = self.split.slot_of(e).expect("every edge has a slot") as usize;
                if parts.len() <= i {
                    parts.resize(i + 1, Vec::new());
                }
                parts[i].push((Vertex(t as u32), h));
            }
        }
        parts
    }

    /// Slot table consistency against the out-lists.
    pub fn check_split(&self) -> Result<(), String> {
        let mut tail = HashMap::new();
        for (t, outs) in self.out.iter().enumerate() {
            for &(_, e) in outs {
                tail.insert(e, Vertex(t as u32));
            }
        }
        self.split.check(|e| tail[&e])
    }
}

/// Outcome of the offline scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReplayBound {
    /// Reorientations made by the offline scheme.
    pub r: u64,
    pub insertions: u64,
    pub deletions: u64,
    /// Longest augmenting path used.
    pub longest_path: u32,
}

impl ReplayBound {
    /// `(delta * i + r) * (d + 1) / (d + 1 - 2 delta)`, or `None` when
    /// `d + 1 <= 2 delta`.
    pub fn work_bound(&self, delta: u64, d: u64) -> Option<f64> {
        let slack = (d + 1).checked_sub(2 * delta).filter(|&s| s > 0)?;
        Some((delta * self.insertions + self.r) as f64 * (d + 1) as f64 / slack as f64)
    }
}

/// An update of a trace, for the offline scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Update {
    Insert(Vertex, Vertex),
    Delete(Vertex, Vertex),
}

/// Offline `delta`-orientation scheme run on the trace backwards.
///
/// Played in reverse, a deletion adds an edge. It is oriented away from its
/// first endpoint. If that vertex now has more than `delta` out-edges, the
/// shortest out-path to a vertex with fewer than `delta` is reversed, and
/// each edge on it counts towards `r`. The final graph of the trace gets its
/// initial orientation the same way, uncounted, since only changes between
/// consecutive orientations matter.
pub fn reverse_replay(n: u32, delta: usize, trace: &[Update]) -> Result<ReplayBound, Error> {
    let mut present: HashMap<(Vertex, Vertex), ()> = HashMap::new();
    for u in trace {
        match *u {
            Update::Insert(a, b) => {
                present.insert(key(a, b), ());
            }
            Update::Delete(a, b) => {
                present.remove(&key(a, b));
            }
        }
    }
    let mut scheme = Scheme { out: vec![Vec::new(); n as usize], delta };
    let mut finals: Vec<_> = present.into_keys().collect();
    finals.sort();
    for (a, b) in finals {
        scheme.add(a, b)?;
    }
    let mut bound = ReplayBound::default();
    for u in trace.iter().rev() {
        match *u {
            Update::Insert(a, b) => {
                bound.insertions += 1;
                scheme.remove(a, b);
            }
            Update::Delete(a, b) => {
                bound.deletions += 1;
                let len = scheme.add(a, b)?;
                bound.r += u64::from(len);
                bound.longest_path = bound.longest_path.max(len);
            }
        }
    }
    Ok(bound)
}

struct Scheme {
    out: Vec<Vec<Vertex>>,
    delta: usize,
}

impl Scheme {
    fn remove(&mut self, a: Vertex, b: Vertex) {
        for (t, h) in [(a, b), (b, a)] {
            if let Some(p) = self.out[t.idx()].iter().position(|&w| w == h) {
                self.out[t.idx()].swap_remove(p);
                return;
            }
        }
    }

    /// Adds `a -> b` and restores the bound; returns the edges reversed.
    fn add(&mut self, a: Vertex, b: Vertex) -> Result<u32, Error> {
        self.out[a.idx()].push(b);
        if self.out[a.idx()].len() <= self.delta {
            return Ok(0);
        }
        let mut prev: HashMap<Vertex, Vertex> = HashMap::from([(a, a)]);
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            if x != a && self.out[x.idx()].len() < self.delta {
                let mut len = 0;
                let mut cur = x;
                while cur != a {
                    let p = prev[&cur];
                    self.remove(p, cur);
                    self.out[cur.idx()].push(p);
                    cur = p;
                    len += 1;
                }
                return Ok(len);
            }
            for &y in &self.out[x.idx()] {
                prev.entry(y).or_insert_with(|| {
                    queue.push_back(y);
                    x
                });
            }
        }
        Err(Error::Internal(format!(
            "no out-path from {a} to a vertex of out-degree below {}; arboricity exceeds it",
            self.delta
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;

    fn v(x: u32) -> Vertex {
        Vertex(x)
    }

    #[test]
    fn inserted_endpoint_becomes_sink() {
        let mut bf = AcyclicBf::new(2, 1);
        bf.insert(v(0), v(1)).unwrap();
        assert_eq!(bf.out_degree(v(0)), 0);
        assert_eq!(bf.out_edges(v(1)).collect::<Vec<_>>(), vec![v(0)]);
    }

    #[test]
    fn triangle_needs_no_cascade() {
        let mut bf = AcyclicBf::with_bound(3, 4);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            bf.insert(v(a), v(b)).unwrap();
            assert!(oracles::is_acyclic(3, &bf.arcs()));
            assert_eq!(bf.stats().max_cascade, 1);
        }
    }

    #[test]
    fn delete_only_edge_empties() {
        let mut bf = AcyclicBf::new(2, 1);
        bf.insert(v(0), v(1)).unwrap();
        bf.delete(v(1), v(0)).unwrap();
        assert_eq!(bf.num_edges(), 0);
        assert!(bf.arcs().is_empty());
        assert!(bf.delete(v(0), v(1)).is_err());
    }

    #[test]
    fn duplicate_rejected_without_change() {
        let mut bf = AcyclicBf::new(3, 1);
        bf.insert(v(0), v(1)).unwrap();
        let before = bf.arcs();
        assert!(bf.insert(v(1), v(0)).is_err());
        assert_eq!(bf.arcs(), before);
    }

    /// Unmodified insertion: flip only on overflow.
    fn original_insert(out: &mut [Vec<Vertex>], d: usize, u: Vertex, w: Vertex) {
        out[u.idx()].push(w);
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            if out[x.idx()].len() <= d {
                continue;
            }
            for y in std::mem::take(&mut out[x.idx()]) {
                out[y.idx()].push(x);
                stack.push(y);
            }
        }
    }

    #[test]
    fn original_rule_can_close_a_cycle() {
        let mut out = vec![Vec::new(); 3];
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            original_insert(&mut out, 4, v(a), v(b));
        }
        let arcs: Vec<_> =
            out.iter().enumerate().flat_map(|(t, o)| o.iter().map(move |&h| (Vertex(t as u32), h))).collect();
        assert!(!oracles::is_acyclic(3, &arcs));

        let mut bf = AcyclicBf::with_bound(3, 4);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            bf.insert(v(a), v(b)).unwrap();
        }
        assert!(oracles::is_acyclic(3, &bf.arcs()));
    }

    #[test]
    fn replay_charges_only_deletions() {
        let trace: Vec<Update> = [(0, 1), (0, 2), (0, 3)].map(|(a, b)| Update::Insert(v(a), v(b))).to_vec();
        let r = reverse_replay(4, 1, &trace).unwrap();
        assert_eq!(r.r, 0);
        assert_eq!(r.insertions, 3);

        let mut t = trace.clone();
        t.push(Update::Delete(v(0), v(3)));
        t.push(Update::Insert(v(0), v(3)));
        let r = reverse_replay(4, 1, &t).unwrap();
        assert_eq!(r.deletions, 1);
    }

    #[test]
    fn work_bound_formula() {
        let b = ReplayBound { r: 4, insertions: 10, deletions: 2, longest_path: 1 };
        // delta = 2, d = 4: (20 + 4) * 5 / 1.
        assert_eq!(b.work_bound(2, 4), Some(120.0));
        assert_eq!(b.work_bound(3, 4), None);
    }
}
