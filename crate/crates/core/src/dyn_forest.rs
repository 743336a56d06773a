//! Weighted dynamic forest: link, cut, rerooting and path aggregates with lazy
//! path addition.
//!
//! The forest is a link-cut tree in which every edge is its own node sitting
//! between its endpoints. An edge node stores the weight of the endpoint that
//! precedes it along its preferred path, i.e. the endpoint nearer the root.
//! Reversing a path therefore maps a weight `x` to `gamma - x` and swaps the
//! roles of the min and max aggregates, while a pending addition changes sign.
//! The represented root of every tree is meaningful to callers (see
//! [`DynForest::find_root`]); path queries reroot temporarily and restore it.

use std::collections::HashMap;

use crate::error::ForestError;
use crate::graph::Vertex;

const NIL: u32 = u32::MAX;

/// Which aggregate [`DynForest::find_extreme_edge`] should locate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

/// A located path edge `(near, far)` where `near` is the endpoint closer to
/// the query's start, with `weight = X_e^near`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathEdge {
    pub near: Vertex,
    pub far: Vertex,
    pub weight: u32,
}

#[derive(Clone, Copy, Debug)]
struct Agg {
    min: i64,
    min_l: u32,
    min_r: u32,
    max: i64,
    max_l: u32,
    max_r: u32,
    edges: u32,
    flagged: bool,
}

impl Agg {
    const EMPTY: Agg = Agg {
        min: i64::MAX,
        min_l: NIL,
        min_r: NIL,
        max: i64::MIN,
        max_l: NIL,
        max_r: NIL,
        edges: 0,
        flagged: false,
    };

    fn single(id: u32, val: i64, flag: bool) -> Agg {
        Agg { min: val, min_l: id, min_r: id, max: val, max_l: id, max_r: id, edges: 1, flagged: flag }
    }

    /// `a` lies left of `b`.
    fn join(a: Agg, b: Agg) -> Agg {
        if a.edges == 0 {
            return b;
        }
        if b.edges == 0 {
            return a;
        }
        let (min, min_l, min_r) = match a.min.cmp(&b.min) {
            std::cmp::Ordering::Less => (a.min, a.min_l, a.min_r),
            std::cmp::Ordering::Greater => (b.min, b.min_l, b.min_r),
            std::cmp::Ordering::Equal => (a.min, a.min_l, b.min_r),
        };
        let (max, max_l, max_r) = match a.max.cmp(&b.max) {
            std::cmp::Ordering::Greater => (a.max, a.max_l, a.max_r),
            std::cmp::Ordering::Less => (b.max, b.max_l, b.max_r),
            std::cmp::Ordering::Equal => (a.max, a.max_l, b.max_r),
        };
        Agg { min, min_l, min_r, max, max_l, max_r, edges: a.edges + b.edges, flagged: a.flagged || b.flagged }
    }
}

#[derive(Clone, Debug)]
struct Node {
    ch: [u32; 2],
    parent: u32,
    rev: bool,
    add: i64,
    is_edge: bool,
    val: i64,
    flag: bool,
    ends: (Vertex, Vertex),
    agg: Agg,
}

impl Node {
    fn vertex() -> Node {
        Node {
            ch: [NIL, NIL],
            parent: NIL,
            rev: false,
            add: 0,
            is_edge: false,
            val: 0,
            flag: false,
            ends: (Vertex(0), Vertex(0)),
            agg: Agg::EMPTY,
        }
    }
}

/// A forest over vertices `0..n` whose edges carry a weight pair
/// `(X_e^a, X_e^b)` with `X_e^a + X_e^b = gamma`, plus one auxiliary flag bit.
#[derive(Clone, Debug)]
pub struct DynForest {
    gamma: u32,
    n: u32,
    nodes: Vec<Node>,
    free: Vec<u32>,
    edge_node: HashMap<(Vertex, Vertex), u32>,
}

fn key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl DynForest {
    pub fn new(n: u32, gamma: u32) -> Self {
        Self { gamma, n, nodes: vec![Node::vertex(); n as usize], free: Vec::new(), edge_node: HashMap::new() }
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn num_vertices(&self) -> u32 {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edge_node.len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_node.contains_key(&key(u, v))
    }

    /// All edges as `(lo, hi)` pairs, unordered.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edge_node.keys().copied()
    }

    // ---- splay machinery -------------------------------------------------

    fn is_aux_root(&self, x: u32) -> bool {
        let p = self.nodes[x as usize].parent;
        p == NIL || (self.nodes[p as usize].ch[0] != x && self.nodes[p as usize].ch[1] != x)
    }

    fn apply_rev(&mut self, x: u32) {
        if x == NIL {
            return;
        }
        let g = i64::from(self.gamma);
        let nd = &mut self.nodes[x as usize];
        nd.ch.swap(0, 1);
        nd.rev = !nd.rev;
        nd.add = -nd.add;
        if nd.is_edge {
            nd.val = g - nd.val;
        }
        let a = nd.agg;
        if a.edges > 0 {
            nd.agg.min = g - a.max;
            nd.agg.min_l = a.max_r;
            nd.agg.min_r = a.max_l;
            nd.agg.max = g - a.min;
            nd.agg.max_l = a.min_r;
            nd.agg.max_r = a.min_l;
        }
    }

    fn apply_add(&mut self, x: u32, d: i64) {
        if x == NIL || d == 0 {
            return;
        }
        let nd = &mut self.nodes[x as usize];
        nd.add += d;
        if nd.is_edge {
            nd.val += d;
        }
        if nd.agg.edges > 0 {
            nd.agg.min += d;
            nd.agg.max += d;
        }
    }

    fn push(&mut self, x: u32) {
        let nd = &self.nodes[x as usize];
        let [l, r] = nd.ch;
        if nd.rev {
            self.apply_rev(l);
            self.apply_rev(r);
            self.nodes[x as usize].rev = false;
        }
        let d = self.nodes[x as usize].add;
        if d != 0 {
            self.apply_add(l, d);
            self.apply_add(r, d);
            self.nodes[x as usize].add = 0;
        }
    }

    fn agg(&self, x: u32) -> Agg {
        if x == NIL {
            Agg::EMPTY
        } else {
            self.nodes[x as usize].agg
        }
    }

    fn pull(&mut self, x: u32) {
        let nd = &self.nodes[x as usize];
        let own = if nd.is_edge { Agg::single(x, nd.val, nd.flag) } else { Agg::EMPTY };
        let a = Agg::join(Agg::join(self.agg(nd.ch[0]), own), self.agg(nd.ch[1]));
        self.nodes[x as usize].agg = a;
    }

    fn rotate(&mut self, x: u32) {
        let p = self.nodes[x as usize].parent;
        let g = self.nodes[p as usize].parent;
        let dir = usize::from(self.nodes[p as usize].ch[1] == x);
        let b = self.nodes[x as usize].ch[1 - dir];
        if !self.is_aux_root(p) {
            let gd = usize::from(self.nodes[g as usize].ch[1] == p);
            self.nodes[g as usize].ch[gd] = x;
        }
        self.nodes[x as usize].parent = g;
        self.nodes[x as usize].ch[1 - dir] = p;
        self.nodes[p as usize].parent = x;
        self.nodes[p as usize].ch[dir] = b;
        if b != NIL {
            self.nodes[b as usize].parent = p;
        }
        self.pull(p);
        self.pull(x);
    }

    fn splay(&mut self, x: u32) {
        let mut stack = vec![x];
        let mut y = x;
        while !self.is_aux_root(y) {
            y = self.nodes[y as usize].parent;
            stack.push(y);
        }
        while let Some(z) = stack.pop() {
            self.push(z);
        }
        while !self.is_aux_root(x) {
            let p = self.nodes[x as usize].parent;
            if !self.is_aux_root(p) {
                let g = self.nodes[p as usize].parent;
                let zigzig = (self.nodes[g as usize].ch[0] == p) == (self.nodes[p as usize].ch[0] == x);
                if zigzig {
                    self.rotate(p);
                } else {
                    self.rotate(x);
                }
            }
            self.rotate(x);
        }
    }

    /// Makes the root-to-`x` path preferred and splays `x` to the top of it.
    fn access(&mut self, x: u32) {
        let mut last = NIL;
        let mut y = x;
        while y != NIL {
            self.splay(y);
            self.nodes[y as usize].ch[1] = last;
            self.pull(y);
            last = y;
            y = self.nodes[y as usize].parent;
        }
        self.splay(x);
    }

    fn evert(&mut self, x: u32) {
        self.access(x);
        self.apply_rev(x);
    }

    fn root_node(&mut self, x: u32) -> u32 {
        self.access(x);
        let mut y = x;
        loop {
            self.push(y);
            let l = self.nodes[y as usize].ch[0];
            if l == NIL {
                break;
            }
            y = l;
        }
        self.splay(y);
        y
    }

    fn check(&self, v: Vertex) {
        assert!(v.0 < self.n, "vertex {v} out of range");
    }

    fn node_of(&self, u: Vertex, v: Vertex) -> Result<u32, ForestError> {
        self.edge_node.get(&key(u, v)).copied().ok_or(ForestError::NotFound(u, v))
    }

    /// Endpoint of edge node `e` that precedes it in the current in-order,
    /// i.e. the one nearer the start of the path `e` was reached through.
    /// `e` must be inside the aux tree currently being inspected.
    fn preceding_endpoint(&mut self, e: u32) -> Vertex {
        self.splay(e);
        let mut y = self.nodes[e as usize].ch[0];
        debug_assert!(y != NIL, "edge node always has a preceding vertex");
        loop {
            self.push(y);
            let r = self.nodes[y as usize].ch[1];
            if r == NIL {
                break;
            }
            y = r;
        }
        self.splay(y);
        Vertex(y)
    }

    /// Runs `f` with the tree rerooted at `u` and the `u..v` path exposed as
    /// the aux tree of `v`, then restores the original root.
    fn with_path<T>(&mut self, u: Vertex, v: Vertex, f: impl FnOnce(&mut Self) -> T) -> Result<T, ForestError> {
        self.check(u);
        self.check(v);
        let ru = self.root_node(u.0);
        let rv = self.root_node(v.0);
        if ru != rv {
            return Err(ForestError::NotConnected(u, v));
        }
        self.evert(u.0);
        self.access(v.0);
        let out = f(self);
        self.evert(ru);
        Ok(out)
    }

    // ---- public operations ---------------------------------------------

    /// Adds edge `uv` with `X_uv^u = weight_u`. The resulting tree keeps the
    /// root of `v`'s tree.
    pub fn link(&mut self, u: Vertex, v: Vertex, weight_u: u32) -> Result<(), ForestError> {
        self.check(u);
        self.check(v);
        if weight_u > self.gamma {
            return Err(ForestError::WeightRange { weight: i64::from(weight_u), gamma: self.gamma });
        }
        if u == v || self.root_node(u.0) == self.root_node(v.0) {
            return Err(ForestError::Cycle(u, v));
        }
        let e = match self.free.pop() {
            Some(e) => e,
            None => {
                self.nodes.push(Node::vertex());
                self.nodes.len() as u32 - 1
            }
        };
        // After linking, v is the parent of e, so e stores X^v.
        let val = i64::from(self.gamma - weight_u);
        self.nodes[e as usize] = Node {
            ch: [NIL, NIL],
            parent: v.0,
            rev: false,
            add: 0,
            is_edge: true,
            val,
            flag: false,
            ends: key(u, v),
            agg: Agg::single(e, val, false),
        };
        self.evert(u.0);
        self.nodes[u.0 as usize].parent = e;
        self.edge_node.insert(key(u, v), e);
        Ok(())
    }

    /// Removes edge `uv`. The endpoint farther from the root becomes the root
    /// of its part; the other part keeps the old root.
    pub fn cut(&mut self, u: Vertex, v: Vertex) -> Result<(), ForestError> {
        let e = self.node_of(u, v)?;
        self.access(u.0);
        let du = self.nodes[u.0 as usize].agg.edges;
        self.access(v.0);
        let dv = self.nodes[v.0 as usize].agg.edges;
        let child = if du > dv { u } else { v };
        self.access(child.0);
        let l = self.nodes[child.0 as usize].ch[0];
        self.nodes[l as usize].parent = NIL;
        self.nodes[child.0 as usize].ch[0] = NIL;
        self.pull(child.0);
        self.access(e);
        let l = self.nodes[e as usize].ch[0];
        if l != NIL {
            self.nodes[l as usize].parent = NIL;
        }
        self.nodes[e as usize] = Node::vertex();
        self.edge_node.remove(&key(u, v));
        self.free.push(e);
        Ok(())
    }

    pub fn connected(&mut self, u: Vertex, v: Vertex) -> bool {
        self.check(u);
        self.check(v);
        u == v || self.root_node(u.0) == self.root_node(v.0)
    }

    /// For every edge `wz` on the `u..v` path with `w` nearer `u`, adds `x`
    /// to `X_wz^w` and subtracts it from `X_wz^z`.
    pub fn add_weight(&mut self, u: Vertex, v: Vertex, x: i64) -> Result<(), ForestError> {
        let gamma = self.gamma;
        self.with_path(u, v, |f| {
            let a = f.nodes[v.0 as usize].agg;
            if a.edges == 0 || x == 0 {
                return Ok(());
            }
            if a.min + x < 0 {
                return Err(ForestError::WeightRange { weight: a.min + x, gamma });
            }
            if a.max + x > i64::from(gamma) {
                return Err(ForestError::WeightRange { weight: a.max + x, gamma });
            }
            f.apply_add(v.0, x);
            Ok(())
        })?
    }

    fn path_agg(&mut self, u: Vertex, v: Vertex) -> Result<Agg, ForestError> {
        self.with_path(u, v, |f| f.nodes[v.0 as usize].agg)
    }

    /// Minimum of `X_wz^w` over path edges `wz` with `w` nearer `u`.
    /// `None` when `u == v`.
    pub fn min_weight(&mut self, u: Vertex, v: Vertex) -> Result<Option<u32>, ForestError> {
        let a = self.path_agg(u, v)?;
        Ok((a.edges > 0).then_some(a.min as u32))
    }

    /// Maximum of `X_wz^w` over path edges `wz` with `w` nearer `u`.
    pub fn max_weight(&mut self, u: Vertex, v: Vertex) -> Result<Option<u32>, ForestError> {
        let a = self.path_agg(u, v)?;
        Ok((a.edges > 0).then_some(a.max as u32))
    }

    /// Locates an edge attaining the path minimum or maximum; ties resolve to
    /// the edge closest to `u`.
    pub fn find_extreme_edge(&mut self, u: Vertex, v: Vertex, which: Extreme) -> Result<Option<PathEdge>, ForestError> {
        self.with_path(u, v, |f| {
            let a = f.nodes[v.0 as usize].agg;
            if a.edges == 0 {
                return None;
            }
            let (e, w) = match which {
                Extreme::Min => (a.min_l, a.min),
                Extreme::Max => (a.max_l, a.max),
            };
            let near = f.preceding_endpoint(e);
            let (a0, b0) = f.nodes[e as usize].ends;
            let far = if near == a0 { b0 } else { a0 };
            Some(PathEdge { near, far, weight: w as u32 })
        })
    }

    /// `X_uv^u` of the forest edge `uv`.
    pub fn weight(&mut self, u: Vertex, v: Vertex) -> Result<u32, ForestError> {
        self.node_of(u, v)?;
        Ok(self.min_weight(u, v)?.expect("one-edge path"))
    }

    /// Number of edges on the `u..v` path.
    pub fn path_len(&mut self, u: Vertex, v: Vertex) -> Result<u32, ForestError> {
        Ok(self.path_agg(u, v)?.edges)
    }

    /// The edges of the `u..v` path in order from `u`, with weights seen
    /// from the endpoint nearer `u`. Linear in the path length.
    pub fn path_edges(&mut self, u: Vertex, v: Vertex) -> Result<Vec<PathEdge>, ForestError> {
        self.with_path(u, v, |f| {
            let mut order = Vec::new();
            f.collect_inorder(v.0, &mut order);
            let mut out = Vec::new();
            for (i, &x) in order.iter().enumerate() {
                let nd = &f.nodes[x as usize];
                if nd.is_edge {
                    out.push(PathEdge {
                        near: Vertex(order[i - 1]),
                        far: Vertex(order[i + 1]),
                        weight: nd.val as u32,
                    });
                }
            }
            out
        })
    }

    fn collect_inorder(&mut self, x: u32, out: &mut Vec<u32>) {
        if x == NIL {
            return;
        }
        self.push(x);
        let [l, r] = self.nodes[x as usize].ch;
        self.collect_inorder(l, out);
        out.push(x);
        self.collect_inorder(r, out);
    }

    /// Root of `v`'s tree.
    pub fn find_root(&mut self, v: Vertex) -> Vertex {
        self.check(v);
        Vertex(self.root_node(v.0))
    }

    /// Reroots `r`'s tree at `r`.
    pub fn set_root(&mut self, r: Vertex) {
        self.check(r);
        self.evert(r.0);
    }

    /// The edge `(v, parent)` leaving `v` towards the root, if `v` is not the root.
    pub fn first_edge_on_root_path(&mut self, v: Vertex) -> Option<(Vertex, Vertex)> {
        self.check(v);
        self.access(v.0);
        if self.nodes[v.0 as usize].ch[0] == NIL {
            return None;
        }
        let mut y = self.nodes[v.0 as usize].ch[0];
        loop {
            self.push(y);
            let r = self.nodes[y as usize].ch[1];
            if r == NIL {
                break;
            }
            y = r;
        }
        self.splay(y);
        let (a, b) = self.nodes[y as usize].ends;
        Some((v, if a == v { b } else { a }))
    }

    /// Distance from `v` to its root, modulo 2.
    pub fn depth_parity(&mut self, v: Vertex) -> u8 {
        self.depth(v) as u8 & 1
    }

    /// Distance from `v` to its root.
    pub fn depth(&mut self, v: Vertex) -> u32 {
        self.check(v);
        self.access(v.0);
        self.nodes[v.0 as usize].agg.edges
    }

    pub fn flag(&self, u: Vertex, v: Vertex) -> Result<bool, ForestError> {
        Ok(self.nodes[self.node_of(u, v)? as usize].flag)
    }

    /// Sets the auxiliary bit of edge `uv`.
    pub fn set_flag(&mut self, u: Vertex, v: Vertex, bit: bool) -> Result<(), ForestError> {
        let e = self.node_of(u, v)?;
        if self.nodes[e as usize].flag == bit {
            return Ok(());
        }
        self.splay(e);
        self.nodes[e as usize].flag = bit;
        self.pull(e);
        Ok(())
    }

    /// Some edge on the `u..v` path whose auxiliary bit is set.
    pub fn find_flagged_edge_on_path(&mut self, u: Vertex, v: Vertex) -> Result<Option<(Vertex, Vertex)>, ForestError> {
        self.with_path(u, v, |f| {
            if !f.nodes[v.0 as usize].agg.flagged {
                return None;
            }
            let mut x = v.0;
            loop {
                f.push(x);
                let [l, r] = f.nodes[x as usize].ch;
                if l != NIL && f.nodes[l as usize].agg.flagged {
                    x = l;
                } else if f.nodes[x as usize].is_edge && f.nodes[x as usize].flag {
                    break;
                } else {
                    x = r;
                }
            }
            f.splay(x);
            Some(f.nodes[x as usize].ends)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Vertex = Vertex(0);
    const B: Vertex = Vertex(1);
    const C: Vertex = Vertex(2);
    const D: Vertex = Vertex(3);

    #[test]
    fn single_edge_aggregates() {
        let mut f = DynForest::new(4, 8);
        f.link(A, B, 3).unwrap();
        assert_eq!(f.min_weight(A, B).unwrap(), Some(3));
        assert_eq!(f.max_weight(A, B).unwrap(), Some(3));
        assert_eq!(f.min_weight(B, A).unwrap(), Some(5));
        assert_eq!(f.link(A, B, 3), Err(ForestError::Cycle(A, B)));
        let w = f.find_extreme_edge(A, B, Extreme::Min).unwrap().unwrap();
        assert_eq!(w, PathEdge { near: A, far: B, weight: 3 });
    }

    #[test]
    fn full_weight_edge() {
        let mut f = DynForest::new(2, 8);
        f.link(A, B, 8).unwrap();
        assert_eq!(f.min_weight(A, B).unwrap(), Some(8));
        assert_eq!(f.weight(B, A).unwrap(), 0);
    }

    #[test]
    fn two_edge_path_add_weight() {
        let mut f = DynForest::new(3, 8);
        f.link(A, B, 3).unwrap();
        f.link(B, C, 5).unwrap();
        assert_eq!(f.find_extreme_edge(A, C, Extreme::Min).unwrap().unwrap().near, A);
        f.add_weight(A, C, 2).unwrap();
        assert_eq!(f.min_weight(A, C).unwrap(), Some(5));
        assert_eq!(f.max_weight(A, C).unwrap(), Some(7));
        let w = f.find_extreme_edge(A, C, Extreme::Min).unwrap().unwrap();
        assert_eq!((w.near, w.far, w.weight), (A, B, 5));
        f.add_weight(A, C, 0).unwrap();
        assert_eq!(f.min_weight(A, C).unwrap(), Some(5));
    }

    #[test]
    fn add_weight_is_direction_sensitive() {
        let mut f = DynForest::new(3, 8);
        f.link(A, B, 3).unwrap();
        f.link(B, C, 5).unwrap();
        f.add_weight(C, A, 2).unwrap();
        assert_eq!(f.weight(A, B).unwrap(), 1);
        assert_eq!(f.weight(B, C).unwrap(), 3);
        assert!(matches!(f.add_weight(C, A, 2), Err(ForestError::WeightRange { .. })));
        assert_eq!(f.weight(A, B).unwrap(), 1);
    }

    #[test]
    fn roots_and_parity() {
        let mut f = DynForest::new(4, 8);
        assert_eq!(f.find_root(D), D);
        assert_eq!(f.first_edge_on_root_path(D), None);
        assert_eq!(f.depth_parity(D), 0);
        // Path a-b-c rooted at c: link a under b, then b under c.
        f.link(B, C, 4).unwrap();
        f.link(A, B, 4).unwrap();
        assert_eq!(f.find_root(A), C);
        assert_eq!(f.first_edge_on_root_path(A), Some((A, B)));
        assert_eq!((f.depth_parity(A), f.depth_parity(B), f.depth_parity(C)), (0, 1, 0));
        f.set_root(A);
        assert_eq!(f.depth_parity(C), 0);
        assert_eq!(f.first_edge_on_root_path(C), Some((C, B)));
    }

    #[test]
    fn cut_roots_child_side() {
        let mut f = DynForest::new(3, 8);
        f.link(B, C, 4).unwrap();
        f.link(A, B, 4).unwrap();
        f.cut(B, C).unwrap();
        assert_eq!(f.find_root(A), B);
        assert_eq!(f.find_root(C), C);
        assert!(!f.connected(A, C));
        assert_eq!(f.cut(B, C), Err(ForestError::NotFound(B, C)));
        f.cut(A, B).unwrap();
        assert_eq!((f.find_root(A), f.find_root(B)), (A, B));
    }

    #[test]
    fn flagged_edges_enumerate() {
        let mut f = DynForest::new(4, 8);
        f.link(A, B, 4).unwrap();
        f.link(B, C, 4).unwrap();
        f.link(C, D, 4).unwrap();
        assert_eq!(f.find_flagged_edge_on_path(A, D).unwrap(), None);
        f.set_flag(B, C, true).unwrap();
        assert_eq!(f.find_flagged_edge_on_path(A, D).unwrap(), Some((B, C)));
        f.set_flag(A, B, true).unwrap();
        let mut seen = Vec::new();
        while let Some((x, y)) = f.find_flagged_edge_on_path(D, A).unwrap() {
            seen.push((x, y));
            f.set_flag(x, y, false).unwrap();
        }
        seen.sort();
        assert_eq!(seen, vec![(A, B), (B, C)]);
    }
}
