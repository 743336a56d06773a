//! Explicit out-degree-2 orientation of a dynamic forest by heavy-light
//! decomposition, plus per-edge clean/dirty bookkeeping for a caller-defined
//! edge bit.
//!
//! Each tree is explicitly rooted. A child edge is heavy (solid) when the
//! child's subtree holds more than half of the parent's. Solid edges keep
//! whatever direction they were given; every light (dashed) edge points from
//! child to parent. A vertex therefore has at most two out-edges: its parent
//! edge and, possibly, the edge to its heavy child.
//!
//! The clean bit of an edge is derived from timestamps: an edge is clean when
//! it was refreshed after the last [`HeavyLight::touch`] of both endpoints.
//! Heavy edges are refreshed eagerly, light edges only by
//! [`HeavyLight::clean_path`].

use std::collections::{BTreeSet, HashMap};

use crate::error::ForestError;
use crate::graph::Vertex;

#[derive(Clone, Copy, Debug)]
struct EdgeState {
    tail: Vertex,
    refreshed: u64,
}

fn key(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Heavy-light decomposition over a dynamic forest on vertices `0..n`.
#[derive(Clone, Debug)]
pub struct HeavyLight {
    parent: Vec<Option<Vertex>>,
    size: Vec<u32>,
    children: Vec<BTreeSet<(u32, Vertex)>>,
    heavy: Vec<Option<Vertex>>,
    edges: HashMap<(Vertex, Vertex), EdgeState>,
    touched: Vec<u64>,
    clock: u64,
}

impl HeavyLight {
    pub fn new(n: u32) -> Self {
        let n = n as usize;
        Self {
            parent: vec![None; n],
            size: vec![1; n],
            children: vec![BTreeSet::new(); n],
            heavy: vec![None; n],
            edges: HashMap::new(),
            touched: vec![0; n],
            clock: 1,
        }
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v.idx()]
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.edges.contains_key(&key(a, b))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn root(&self, mut v: Vertex) -> Vertex {
        while let Some(p) = self.parent[v.idx()] {
            v = p;
        }
        v
    }

    pub fn depth(&self, mut v: Vertex) -> u32 {
        let mut d = 0;
        while let Some(p) = self.parent[v.idx()] {
            v = p;
            d += 1;
        }
        d
    }

    /// Whether the tree edge `ab` is heavy.
    pub fn is_heavy(&self, a: Vertex, b: Vertex) -> bool {
        self.heavy[b.idx()] == Some(a) && self.parent[a.idx()] == Some(b)
            || self.heavy[a.idx()] == Some(b) && self.parent[b.idx()] == Some(a)
    }

    /// Stored tail of edge `ab`.
    pub fn tail(&self, a: Vertex, b: Vertex) -> Option<Vertex> {
        self.edges.get(&key(a, b)).map(|s| s.tail)
    }

    /// Out-edges of `v` under the stored directions, as `(v, head)`.
    pub fn explicit_out_edges(&self, v: Vertex) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(2);
        for w in [self.parent[v.idx()], self.heavy[v.idx()]].into_iter().flatten() {
            if self.tail(v, w) == Some(v) {
                out.push((v, w));
            }
        }
        out
    }

    /// Whether edge `ab` was refreshed after the last touch of both ends.
    pub fn is_clean(&self, a: Vertex, b: Vertex) -> bool {
        self.edges
            .get(&key(a, b))
            .is_some_and(|s| s.refreshed >= self.touched[a.idx()].max(self.touched[b.idx()]))
    }

    fn refresh(&mut self, a: Vertex, b: Vertex, refresher: &mut dyn FnMut(Vertex, Vertex)) {
        let clock = self.clock;
        if let Some(s) = self.edges.get_mut(&key(a, b)) {
            s.refreshed = clock;
            refresher(a, b);
        }
    }

    /// Marks every edge at `v` dirty, then refreshes the heavy ones so that
    /// heavy edges stay clean.
    pub fn touch(&mut self, v: Vertex, refresher: &mut dyn FnMut(Vertex, Vertex)) {
        self.clock += 1;
        self.touched[v.idx()] = self.clock;
        if let Some(p) = self.parent[v.idx()] {
            if self.heavy[p.idx()] == Some(v) {
                self.refresh(v, p, refresher);
            }
        }
        if let Some(h) = self.heavy[v.idx()] {
            self.refresh(v, h, refresher);
        }
    }

    fn set_size(&mut self, v: Vertex, new: u32) {
        let old = self.size[v.idx()];
        if old == new {
            return;
        }
        if let Some(p) = self.parent[v.idx()] {
            self.children[p.idx()].remove(&(old, v));
            self.children[p.idx()].insert((new, v));
        }
        self.size[v.idx()] = new;
    }

    /// Recomputes the heavy child of `x`, redirecting a demoted edge to
    /// point upwards and refreshing a promoted one.
    fn fix_heavy(&mut self, x: Vertex, refresher: &mut dyn FnMut(Vertex, Vertex)) {
        let best = self.children[x.idx()]
            .last()
            .filter(|&&(s, _)| 2 * s > self.size[x.idx()])
            .map(|&(_, c)| c);
        let old = self.heavy[x.idx()];
        if old == best {
            return;
        }
        self.heavy[x.idx()] = best;
        if let Some(c) = old {
            if self.parent[c.idx()] == Some(x) {
                if let Some(s) = self.edges.get_mut(&key(c, x)) {
                    s.tail = c;
                }
            }
        }
        if let Some(c) = best {
            self.refresh(c, x, refresher);
        }
    }

    /// Makes `u` the root of its tree.
    fn reroot(&mut self, u: Vertex, refresher: &mut dyn FnMut(Vertex, Vertex)) {
        let mut path = vec![u];
        while let Some(p) = self.parent[path.last().unwrap().idx()] {
            path.push(p);
        }
        if path.len() == 1 {
            return;
        }
        let total = self.size[path.last().unwrap().idx()];
        let old_sizes: Vec<u32> = path.iter().map(|x| self.size[x.idx()]).collect();
        for w in path.windows(2) {
            let (c, p) = (w[0], w[1]);
            self.children[p.idx()].remove(&(self.size[c.idx()], c));
            self.parent[c.idx()] = None;
        }
        for (i, &x) in path.iter().enumerate() {
            self.size[x.idx()] = if i == 0 { total } else { total - old_sizes[i - 1] };
        }
        for w in path.windows(2) {
            let (new_parent, new_child) = (w[0], w[1]);
            self.parent[new_child.idx()] = Some(new_parent);
            self.children[new_parent.idx()].insert((self.size[new_child.idx()], new_child));
        }
        for &x in &path {
            self.fix_heavy(x, refresher);
        }
        for w in path.windows(2) {
            let (p, c) = (w[0], w[1]);
            if self.heavy[p.idx()] != Some(c) {
                self.edges.get_mut(&key(p, c)).expect("path edge").tail = c;
            }
        }
    }

    /// Adds edge `uv`. `u`'s tree is rerooted at `u` and hung below `v`.
    pub fn link(&mut self, u: Vertex, v: Vertex, refresher: &mut dyn FnMut(Vertex, Vertex)) -> Result<(), ForestError> {
        if u == v || self.root(u) == self.root(v) {
            return Err(ForestError::Cycle(u, v));
        }
        self.reroot(u, refresher);
        let s = self.size[u.idx()];
        self.parent[u.idx()] = Some(v);
        self.children[v.idx()].insert((s, u));
        self.edges.insert(key(u, v), EdgeState { tail: u, refreshed: 0 });
        self.refresh(u, v, refresher);
        let mut y = Some(v);
        while let Some(x) = y {
            let new = self.size[x.idx()] + s;
            self.set_size(x, new);
            y = self.parent[x.idx()];
        }
        let mut y = Some(v);
        while let Some(x) = y {
            self.fix_heavy(x, refresher);
            y = self.parent[x.idx()];
        }
        Ok(())
    }

    /// Removes edge `uv`; the child side becomes its own tree.
    pub fn cut(&mut self, u: Vertex, v: Vertex, refresher: &mut dyn FnMut(Vertex, Vertex)) -> Result<(), ForestError> {
        if self.edges.remove(&key(u, v)).is_none() {
            return Err(ForestError::NotFound(u, v));
        }
        let (c, p) = if self.parent[u.idx()] == Some(v) { (u, v) } else { (v, u) };
        let s = self.size[c.idx()];
        self.children[p.idx()].remove(&(s, c));
        self.parent[c.idx()] = None;
        if self.heavy[p.idx()] == Some(c) {
            self.heavy[p.idx()] = None;
        }
        let mut y = Some(p);
        while let Some(x) = y {
            let new = self.size[x.idx()] - s;
            self.set_size(x, new);
            y = self.parent[x.idx()];
        }
        let mut y = Some(p);
        while let Some(x) = y {
            self.fix_heavy(x, refresher);
            y = self.parent[x.idx()];
        }
        Ok(())
    }

    /// Light edges on the tree path between `u` and `v`, as `(child, parent)`.
    pub fn light_edges_between(&self, u: Vertex, v: Vertex) -> Vec<(Vertex, Vertex)> {
        let (mut a, mut b) = (u, v);
        let (mut da, mut db) = (self.depth(a), self.depth(b));
        let mut out = Vec::new();
        let step = |x: &mut Vertex, d: &mut u32, out: &mut Vec<(Vertex, Vertex)>| {
            let p = self.parent[x.idx()].expect("not above the root");
            if self.heavy[p.idx()] != Some(*x) {
                out.push((*x, p));
            }
            *x = p;
            *d -= 1;
        };
        while da > db {
            step(&mut a, &mut da, &mut out);
        }
        while db > da {
            step(&mut b, &mut db, &mut out);
        }
        while a != b {
            step(&mut a, &mut da, &mut out);
            step(&mut b, &mut db, &mut out);
        }
        out
    }

    /// Refreshes every dirty light edge on the `u..v` path. Afterwards every
    /// edge of the path is clean.
    pub fn clean_path(&mut self, u: Vertex, v: Vertex, refresher: &mut dyn FnMut(Vertex, Vertex)) -> usize {
        let mut n = 0;
        for (c, p) in self.light_edges_between(u, v) {
            if !self.is_clean(c, p) {
                self.refresh(c, p, refresher);
                n += 1;
            }
        }
        n
    }

    /// Full structural self-check: sizes, heavy children, directions,
    /// out-degrees and clean heavy edges.
    pub fn check(&self) -> Result<(), String> {
        let n = self.parent.len();
        let mut size = vec![1u32; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| std::cmp::Reverse(self.depth(Vertex(x as u32))));
        for &x in &order {
            if let Some(p) = self.parent[x] {
                size[p.idx()] += size[x];
            }
        }
        for x in 0..n {
            let v = Vertex(x as u32);
            if size[x] != self.size[x] {
                return Err(format!("size of {v} is {} but subtree has {}", self.size[x], size[x]));
            }
            if let Some(p) = self.parent[x] {
                if !self.edges.contains_key(&key(v, p)) {
                    return Err(format!("parent edge {v}-{p} missing"));
                }
                let heavy = 2 * size[x] > size[p.idx()];
                if heavy != (self.heavy[p.idx()] == Some(v)) {
                    return Err(format!("edge {v}-{p} heavy flag is stale"));
                }
                if !heavy && self.tail(v, p) != Some(v) {
                    return Err(format!("light edge {v}-{p} does not point to the parent"));
                }
                if heavy && !self.is_clean(v, p) {
                    return Err(format!("heavy edge {v}-{p} is dirty"));
                }
            }
            let outs = self.edges.iter().filter(|(k, s)| (k.0 == v || k.1 == v) && s.tail == v).count();
            if outs > 2 {
                return Err(format!("vertex {v} has out-degree {outs}"));
            }
        }
        let tree_edges = self.parent.iter().flatten().count();
        if tree_edges != self.edges.len() {
            return Err(format!("{} stored edges but {tree_edges} parent links", self.edges.len()));
        }
        Ok(())
    }
}
