//! Brute-force ground truth for tests and the verification suite.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::OracleError;
use crate::graph::{EdgeId, Graph, Vertex};

/// Largest vertex count the subset enumerations accept.
pub const ENUMERATION_CAP: usize = 12;

fn masks(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Vec<u32>, OracleError> {
    if n > ENUMERATION_CAP {
        return Err(OracleError::TooLarge { n, cap: ENUMERATION_CAP });
    }
    Ok(edges.iter().map(|&(a, b)| (1u32 << a.0) | (1u32 << b.0)).collect())
}

fn subsets(n: usize, edges: &[(Vertex, Vertex)]) -> Result<impl Iterator<Item = (u32, u32)>, OracleError> {
    let em = masks(n, edges)?;
    Ok((1u32..(1u32 << n)).map(move |s| {
        let e = em.iter().filter(|&&m| m & s == m).count() as u32;
        (s.count_ones(), e)
    }))
}

/// Nash-Williams arboricity: the maximum over vertex subsets `J` with at
/// least two vertices of `ceil(|E(J)| / (|J| - 1))`.
pub fn exact_arboricity(n: usize, edges: &[(Vertex, Vertex)]) -> Result<u32, OracleError> {
    Ok(subsets(n, edges)?
        .filter(|&(k, _)| k >= 2)
        .map(|(k, e)| e.div_ceil(k - 1))
        .max()
        .unwrap_or(0))
}

/// Maximum subgraph density `|E(J)| / |J|` as a reduced fraction.
pub fn exact_max_density(n: usize, edges: &[(Vertex, Vertex)]) -> Result<(u32, u32), OracleError> {
    let best = subsets(n, edges)?.fold((0u32, 1u32), |best, (k, e)| {
        if u64::from(e) * u64::from(best.1) > u64::from(best.0) * u64::from(k) {
            (e, k)
        } else {
            best
        }
    });
    let g = gcd(best.0, best.1);
    Ok((best.0 / g, best.1 / g))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

struct Dsu(HashMap<Vertex, Vertex>);

impl Dsu {
    fn find(&mut self, v: Vertex) -> Vertex {
        let p = *self.0.entry(v).or_insert(v);
        if p == v {
            return v;
        }
        let r = self.find(p);
        self.0.insert(v, r);
        r
    }

    /// Joins the classes of `a` and `b`; false if they already coincided.
    fn union(&mut self, a: Vertex, b: Vertex) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0.insert(ra, rb);
        true
    }
}

/// True iff the undirected edge list has no cycle (parallel edges and
/// self-loops count as cycles).
pub fn is_forest(edges: &[(Vertex, Vertex)]) -> bool {
    let mut d = Dsu(HashMap::new());
    edges.iter().all(|&(a, b)| a != b && d.union(a, b))
}

/// True iff every connected component has at most as many edges as vertices.
pub fn is_pseudoforest(edges: &[(Vertex, Vertex)]) -> bool {
    let mut d = Dsu(HashMap::new());
    for &(a, b) in edges {
        d.union(a, b);
    }
    let mut seen = HashSet::new();
    let mut tally: HashMap<Vertex, (usize, usize)> = HashMap::new();
    for &(a, b) in edges {
        for v in [a, b] {
            if seen.insert(v) {
                tally.entry(d.find(v)).or_default().0 += 1;
            }
        }
        tally.entry(d.find(a)).or_default().1 += 1;
    }
    tally.values().all(|&(nv, ne)| ne <= nv)
}

/// True iff the arcs `(tail, head)` on vertices `0..n` form a DAG.
pub fn is_acyclic(n: usize, arcs: &[(Vertex, Vertex)]) -> bool {
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(t, h) in arcs {
        out[t.idx()].push(h);
        indeg[h.idx()] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for h in &out[v] {
            indeg[h.idx()] -= 1;
            if indeg[h.idx()] == 0 {
                queue.push_back(h.idx());
            }
        }
    }
    seen == n
}

/// True iff no edge joins two vertices of the same colour.
pub fn is_proper(colours: &[u64], edges: &[(Vertex, Vertex)]) -> bool {
    edges.iter().all(|&(a, b)| colours[a.idx()] != colours[b.idx()])
}

/// Copies violating 1-validity: `(edge, tail)` with copies `tail -> head`
/// while `s(tail) - s(head) > 1`.
pub fn eta_violations(g: &mut Graph) -> Vec<(EdgeId, Vertex)> {
    let edges: Vec<(EdgeId, Vertex, Vertex)> = g.edges().collect();
    let mut out = Vec::new();
    for (e, lo, hi) in edges {
        for (t, h) in [(lo, hi), (hi, lo)] {
            if g.count(e, t) > 0 && g.load(t) > g.load(h) + 1 {
                out.push((e, t));
            }
        }
    }
    out
}

/// A rooted forest with per-edge weights kept in plain parent arrays,
/// mirroring the semantics of [`crate::dyn_forest::DynForest`] naively.
#[derive(Clone, Debug)]
pub struct NaiveForest {
    parent: Vec<Option<Vertex>>,
    /// `X^lo` of edge `(lo, hi)`.
    weight: HashMap<(Vertex, Vertex), u32>,
    gamma: u32,
}

fn key(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl NaiveForest {
    pub fn new(n: u32, gamma: u32) -> Self {
        Self { parent: vec![None; n as usize], weight: HashMap::new(), gamma }
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.weight.contains_key(&key(a, b))
    }

    pub fn find_root(&self, mut v: Vertex) -> Vertex {
        while let Some(p) = self.parent[v.idx()] {
            v = p;
        }
        v
    }

    pub fn connected(&self, a: Vertex, b: Vertex) -> bool {
        self.find_root(a) == self.find_root(b)
    }

    pub fn set_root(&mut self, r: Vertex) {
        let mut prev = None;
        let mut cur = Some(r);
        while let Some(x) = cur {
            let next = self.parent[x.idx()];
            self.parent[x.idx()] = prev;
            prev = Some(x);
            cur = next;
        }
    }

    /// `X^a` of edge `ab`.
    pub fn weight(&self, a: Vertex, b: Vertex) -> Option<u32> {
        let w = *self.weight.get(&key(a, b))?;
        Some(if a < b { w } else { self.gamma - w })
    }

    pub fn link(&mut self, u: Vertex, v: Vertex, weight_u: u32) -> bool {
        if u == v || self.connected(u, v) {
            return false;
        }
        self.set_root(u);
        self.parent[u.idx()] = Some(v);
        let w = if u < v { weight_u } else { self.gamma - weight_u };
        self.weight.insert(key(u, v), w);
        true
    }

    pub fn cut(&mut self, u: Vertex, v: Vertex) -> bool {
        if self.weight.remove(&key(u, v)).is_none() {
            return false;
        }
        if self.parent[u.idx()] == Some(v) {
            self.parent[u.idx()] = None;
        } else {
            self.parent[v.idx()] = None;
        }
        true
    }

    fn root_path(&self, mut v: Vertex) -> Vec<Vertex> {
        let mut out = vec![v];
        while let Some(p) = self.parent[v.idx()] {
            out.push(p);
            v = p;
        }
        out
    }

    /// Vertices of the `u..v` path, or `None` if disconnected.
    pub fn path(&self, u: Vertex, v: Vertex) -> Option<Vec<Vertex>> {
        let pu = self.root_path(u);
        let pv = self.root_path(v);
        if pu.last() != pv.last() {
            return None;
        }
        let (mut i, mut j) = (pu.len(), pv.len());
        while i > 0 && j > 0 && pu[i - 1] == pv[j - 1] {
            i -= 1;
            j -= 1;
        }
        let mut out: Vec<Vertex> = pu[..=i].to_vec();
        out.extend(pv[..j].iter().rev());
        Some(out)
    }

    /// Path edges as `(near, far, X^near)` in order from `u`.
    pub fn path_weights(&self, u: Vertex, v: Vertex) -> Option<Vec<(Vertex, Vertex, u32)>> {
        let p = self.path(u, v)?;
        Some(p.windows(2).map(|w| (w[0], w[1], self.weight(w[0], w[1]).unwrap())).collect())
    }

    /// Adds `x` to `X^near` of every path edge; false if a weight would
    /// leave `[0, gamma]`, in which case nothing changes.
    pub fn add_weight(&mut self, u: Vertex, v: Vertex, x: i64) -> bool {
        let Some(p) = self.path_weights(u, v) else { return false };
        if p.iter().any(|&(_, _, w)| !(0..=i64::from(self.gamma)).contains(&(i64::from(w) + x))) {
            return false;
        }
        for (a, b, w) in p {
            let nw = (i64::from(w) + x) as u32;
            let stored = if a < b { nw } else { self.gamma - nw };
            self.weight.insert(key(a, b), stored);
        }
        true
    }

    pub fn depth(&self, v: Vertex) -> u32 {
        self.root_path(v).len() as u32 - 1
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v.idx()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: u32) -> Vec<(Vertex, Vertex)> {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((Vertex(a), Vertex(b)));
            }
        }
        e
    }

    #[test]
    fn complete_graph_arboricity() {
        assert_eq!(exact_arboricity(4, &k(4)).unwrap(), 2);
        assert_eq!(exact_arboricity(5, &k(5)).unwrap(), 3);
        assert_eq!(exact_arboricity(3, &[]).unwrap(), 0);
    }

    #[test]
    fn tree_arboricity_and_density() {
        let path: Vec<_> = (0..5).map(|i| (Vertex(i), Vertex(i + 1))).collect();
        assert_eq!(exact_arboricity(6, &path).unwrap(), 1);
        assert_eq!(exact_max_density(6, &path).unwrap(), (5, 6));
        assert_eq!(exact_max_density(4, &k(4)).unwrap(), (3, 2));
        assert_eq!(exact_max_density(4, &[]).unwrap(), (0, 1));
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(exact_arboricity(13, &[]), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn structural_checkers() {
        let tri = k(3);
        assert!(!is_forest(&tri));
        assert!(is_forest(&tri[..2]));
        assert!(is_pseudoforest(&tri));
        assert!(!is_pseudoforest(&k(4)));
        assert!(is_forest(&[]));
        let cyc = [(Vertex(0), Vertex(1)), (Vertex(1), Vertex(2)), (Vertex(2), Vertex(0))];
        assert!(!is_acyclic(3, &cyc));
        assert!(is_acyclic(3, &cyc[..2]));
        assert!(is_proper(&[0, 1, 0], &cyc[..2]));
        assert!(!is_proper(&[0, 1, 0], &cyc));
    }

    #[test]
    fn naive_forest_paths() {
        let mut f = NaiveForest::new(4, 8);
        assert!(f.link(Vertex(0), Vertex(1), 3));
        assert!(f.link(Vertex(2), Vertex(1), 5));
        assert!(!f.link(Vertex(0), Vertex(2), 1));
        assert_eq!(f.find_root(Vertex(0)), Vertex(1));
        assert_eq!(f.path(Vertex(0), Vertex(2)).unwrap(), vec![Vertex(0), Vertex(1), Vertex(2)]);
        assert!(f.add_weight(Vertex(0), Vertex(2), 2));
        assert_eq!(f.weight(Vertex(0), Vertex(1)), Some(5));
        assert_eq!(f.weight(Vertex(1), Vertex(2)), Some(5));
        assert!(!f.add_weight(Vertex(0), Vertex(2), 4));
        assert!(f.cut(Vertex(1), Vertex(2)));
        assert_eq!(f.find_root(Vertex(2)), Vertex(2));
    }
}
