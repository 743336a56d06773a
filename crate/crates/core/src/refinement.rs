//! The refinement forest `H` and the rounded orientation built on it.
//!
//! `H` holds the edges whose bundles are split nearly evenly. Their counters
//! live inside a dynamic forest so that a whole cycle can be shifted at once:
//! when a new edge would close a cycle in `H`, weight is pushed around the
//! cycle (leaving every load unchanged) until some cycle edge reaches the
//! boundary of the allowed band, and that edge leaves `H`.
//!
//! Every edge outside `H` is rounded towards the endpoint with fewer copies.
//! Edges of `H` take the explicit directions of a heavy-light decomposition
//! of `H`, which adds at most two out-edges per vertex.

use serde::Serialize;

use crate::dyn_forest::Extreme;
use crate::error::GraphError;
use crate::forest_orient::HeavyLight;
use crate::frac_orient::{FracOrient, FracStats, NbrProvider, NoChanges, ReorientLog};
use crate::graph::{EdgeId, ForestSlot, Graph, Location, Vertex};

/// Hooks into membership changes of `H`, on top of neighbour recovery.
pub trait Observer: NbrProvider {
    /// `e` is about to be linked into `H` or have its counters shifted as a
    /// closing edge; its counters must be plain. May be called twice.
    fn before_enter_h(&mut self, _g: &mut Graph, _e: EdgeId) {}
    /// `e` has just left `H`, or was shifted without entering it, and is
    /// stored plainly again.
    fn after_leave_h(&mut self, _g: &mut Graph, _e: EdgeId) {}
}

impl Observer for NoChanges {}

/// Pop order for the two work stacks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DrainOrder {
    #[default]
    Lifo,
    Fifo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RefinementStats {
    pub links: u64,
    /// Cycles broken by removing an edge already at or below the band.
    pub plain_removals: u64,
    /// Cycles broken by shifting weight around them first.
    pub shifts: u64,
    /// Edges expelled from `H` because their split left the open interval.
    pub expelled: u64,
    pub q_max: u32,
    pub s_max: u32,
    /// Rounding ties between equal counters outside `H`.
    pub rounding_ties: u64,
    /// Cycle shifts after which some cycle vertex's recomputed load changed.
    pub load_mismatches: u64,
}

/// Which of the four cycle terms attained the minimum count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Minimizer {
    PathForward,
    PathBackward,
    ClosingForward,
    ClosingBackward,
}

/// The refinement engine over a shared [`Graph`].
#[derive(Clone, Debug)]
pub struct Refinement {
    h: ForestSlot,
    hl: HeavyLight,
    frac: FracOrient,
    order: DrainOrder,
    audit: bool,
    stats: RefinementStats,
}

impl Refinement {
    /// Allocates `H` as a new forest slot of `g`.
    pub fn new(g: &mut Graph) -> Self {
        let h = g.add_forest();
        Self {
            h,
            hl: HeavyLight::new(g.n()),
            frac: FracOrient::new(),
            order: DrainOrder::Lifo,
            audit: false,
            stats: RefinementStats::default(),
        }
    }

    pub fn with_order(mut self, order: DrainOrder) -> Self {
        self.order = order;
        self
    }

    /// Recomputes cycle loads around every weight shift.
    pub fn set_audit(&mut self, on: bool) {
        self.audit = on;
    }

    pub fn slot(&self) -> ForestSlot {
        self.h
    }

    pub fn stats(&self) -> RefinementStats {
        self.stats
    }

    pub fn frac_stats(&self) -> FracStats {
        self.frac.stats()
    }

    pub fn frac_mut(&mut self) -> &mut FracOrient {
        &mut self.frac
    }

    pub fn heavy_light(&self) -> &HeavyLight {
        &self.hl
    }

    pub fn in_h(&self, g: &Graph, e: EdgeId) -> bool {
        g.location(e) == Location::Forest(self.h)
    }

    /// Edges of `H` as `(lo, hi)` pairs.
    pub fn h_edges<'a>(&'a self, g: &'a Graph) -> impl Iterator<Item = (EdgeId, Vertex, Vertex)> + 'a {
        g.edges().filter(move |&(e, _, _)| self.in_h(g, e))
    }

    /// Inserts `uv` with all its copies and restores the refinement.
    pub fn insert_edge<O: Observer>(&mut self, g: &mut Graph, obs: &mut O, u: Vertex, v: Vertex) -> Result<(EdgeId, ReorientLog), GraphError> {
        let (e, log) = self.frac.gamma_insert(g, obs, u, v)?;
        self.phase_two(g, obs, log.edges())?;
        Ok((e, log))
    }

    /// Deletes `uv`. The caller must already have taken it out of any
    /// structure other than `H`.
    pub fn delete_edge<O: Observer>(&mut self, g: &mut Graph, obs: &mut O, u: Vertex, v: Vertex) -> Result<ReorientLog, GraphError> {
        let e = g.require_edge(u, v)?;
        if self.in_h(g, e) {
            self.leave_h(g, e)?;
        }
        let log = self.frac.gamma_delete(g, obs, u, v)?;
        self.phase_two(g, obs, log.edges())?;
        Ok(log)
    }

    /// Deletes `k` copies oriented away from `tail` on edge `e` and
    /// reinserts `k` copies, then restores the refinement.
    pub fn reinsert_copies<O: Observer>(
        &mut self,
        g: &mut Graph,
        obs: &mut O,
        e: EdgeId,
        tail: Vertex,
        k: u32,
    ) -> Result<ReorientLog, GraphError> {
        if self.in_h(g, e) {
            self.leave_h(g, e)?;
            obs.after_leave_h(g, e);
        }
        let mut log = ReorientLog::default();
        for _ in 0..k {
            self.frac.delete_copy(g, obs, e, tail, &mut log);
        }
        for _ in 0..k {
            self.frac.insert_copy(g, obs, e, tail, &mut log);
        }
        self.phase_two(g, obs, log.edges())?;
        Ok(log)
    }

    fn pop(&self, stack: &mut Vec<EdgeId>, head: &mut usize) -> Option<EdgeId> {
        match self.order {
            DrainOrder::Lifo => stack.pop(),
            DrainOrder::Fifo => {
                let e = stack.get(*head).copied();
                *head += 1;
                e
            }
        }
    }

    /// Sorts changed edges into or out of `H`, then inserts the new members
    /// one at a time, breaking cycles.
    pub fn phase_two<O: Observer>(&mut self, g: &mut Graph, obs: &mut O, changed: &[EdgeId]) -> Result<(), GraphError> {
        let mut q = changed.to_vec();
        self.stats.q_max = self.stats.q_max.max(q.len() as u32);
        let mut s = Vec::new();
        let (mut qh, mut sh) = (0, 0);
        while let Some(f) = self.pop(&mut q, &mut qh) {
            if !g.contains(f) {
                continue;
            }
            let (c_lo, _) = g.counts(f);
            let inside = g.params().strictly_inside(c_lo);
            match (self.in_h(g, f), inside) {
                (true, false) => {
                    self.leave_h(g, f)?;
                    self.stats.expelled += 1;
                    obs.after_leave_h(g, f);
                }
                (false, true) => s.push(f),
                _ => {}
            }
        }
        self.stats.s_max = self.stats.s_max.max(s.len() as u32);
        while let Some(f) = self.pop(&mut s, &mut sh) {
            if !g.contains(f) || self.in_h(g, f) {
                continue;
            }
            let (c_lo, _) = g.counts(f);
            if !g.params().strictly_inside(c_lo) {
                continue;
            }
            self.handle_s_edge(g, obs, f)?;
        }
        Ok(())
    }

    fn enter_h<O: Observer>(&mut self, g: &mut Graph, obs: &mut O, e: EdgeId) -> Result<(), GraphError> {
        obs.before_enter_h(g, e);
        let (lo, hi) = g.endpoints(e);
        g.link_into(e, self.h, lo)?;
        self.hl.link(lo, hi, &mut |_, _| {})?;
        self.stats.links += 1;
        Ok(())
    }

    fn leave_h(&mut self, g: &mut Graph, e: EdgeId) -> Result<(), GraphError> {
        let (lo, hi) = g.endpoints(e);
        g.cut_from_forest(e)?;
        self.hl.cut(lo, hi, &mut |_, _| {})?;
        Ok(())
    }

    /// Inserts `e = uv` into `H`, first breaking the cycle it would close.
    pub fn handle_s_edge<O: Observer>(&mut self, g: &mut Graph, obs: &mut O, e: EdgeId) -> Result<(), GraphError> {
        let (u, v) = g.endpoints(e);
        if !g.forest_mut(self.h).connected(u, v) {
            return self.enter_h(g, obs, e);
        }
        obs.before_enter_h(g, e);
        // The cycle runs u -> (H path) -> v -> u. Forward counts are the
        // copies oriented along that direction.
        let gamma = g.gamma();
        let delta = g.params().delta_num();
        let mu = g.params().mu_num();
        let (x_u, x_v) = (g.count(e, u), g.count(e, v));
        let h = g.forest_mut(self.h);
        let fwd_min = h.find_extreme_edge(u, v, Extreme::Min)?.expect("u != v");
        let fwd_max = h.find_extreme_edge(u, v, Extreme::Max)?.expect("u != v");
        let candidates = [
            (fwd_min.weight, Minimizer::PathForward),
            (gamma - fwd_max.weight, Minimizer::PathBackward),
            (x_v, Minimizer::ClosingForward),
            (x_u, Minimizer::ClosingBackward),
        ];
        let (c_min, which) = candidates
            .into_iter()
            .reduce(|best, c| if c.0 < best.0 { c } else { best })
            .expect("four candidates");

        let cycle_vertices = if self.audit { self.cycle_loads(g, u, v) } else { Vec::new() };

        if c_min > delta {
            let shift = c_min - delta + mu;
            // Subtract from forward counts when a forward count was the
            // minimum, add otherwise.
            let sign: i64 = match which {
                Minimizer::PathForward | Minimizer::ClosingForward => -1,
                Minimizer::PathBackward | Minimizer::ClosingBackward => 1,
            };
            let d = sign * i64::from(shift);
            g.forest_mut(self.h).add_weight(u, v, d)?;
            // Closing copies v -> u are forward.
            g.bump(e, v, d as i32);
            g.bump(e, u, -d as i32);
            g.reconcile_status(e);
            self.stats.shifts += 1;
        } else {
            self.stats.plain_removals += 1;
        }

        let removed = match which {
            Minimizer::PathForward => Some(fwd_min),
            Minimizer::PathBackward => Some(fwd_max),
            Minimizer::ClosingForward | Minimizer::ClosingBackward => None,
        };
        if let Some(edge) = removed {
            let f = g.edge(edge.near, edge.far).expect("H edge is a graph edge");
            self.leave_h(g, f)?;
            g.reconcile_status(f);
            obs.after_leave_h(g, f);
            self.enter_h(g, obs, e)?;
        } else {
            obs.after_leave_h(g, e);
        }

        if self.audit {
            let after = self.cycle_loads_of(g, &cycle_vertices);
            if cycle_vertices.iter().zip(&after).any(|(a, b)| a.1 != b.1) {
                self.stats.load_mismatches += 1;
            }
        }
        Ok(())
    }

    fn cycle_loads(&self, g: &mut Graph, u: Vertex, v: Vertex) -> Vec<(Vertex, u32)> {
        let path = g.forest_mut(self.h).path_edges(u, v).unwrap_or_default();
        let mut vs: Vec<Vertex> = path.iter().map(|p| p.near).collect();
        vs.push(v);
        self.cycle_loads_of(g, &vs.into_iter().map(|x| (x, 0)).collect::<Vec<_>>())
    }

    fn cycle_loads_of(&self, g: &mut Graph, vs: &[(Vertex, u32)]) -> Vec<(Vertex, u32)> {
        vs.iter().map(|&(x, _)| (x, recomputed_load(g, x))).collect()
    }

    /// The rounded tail of a non-`H` edge, counting ties.
    pub fn rounded_tail(&mut self, g: &mut Graph, e: EdgeId) -> Vertex {
        let (tail, tie) = rounded_tail(g, e);
        if tie {
            self.stats.rounding_ties += 1;
        }
        tail
    }

    /// Out-edges of `v` in the rounded orientation, as heads.
    pub fn rounded_out_edges(&mut self, g: &mut Graph, v: Vertex) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self.hl.explicit_out_edges(v).into_iter().map(|(_, w)| w).collect();
        let nbrs: Vec<(Vertex, EdgeId)> = g.neighbours(v).iter().map(|(&w, &e)| (w, e)).collect();
        for (w, e) in nbrs {
            if !self.in_h(g, e) && self.rounded_tail(g, e) == v {
                out.push(w);
            }
        }
        out
    }

    pub fn rounded_out_degree(&mut self, g: &mut Graph, v: Vertex) -> usize {
        self.rounded_out_edges(g, v).len()
    }

    /// Full scan of loads, validity and the refinement conditions: `H` is a
    /// forest, every edge split strictly inside the open interval is in `H`,
    /// and every edge of `H` lies in the closed band.
    pub fn check(&self, g: &mut Graph) -> Result<(), String> {
        let edges: Vec<(EdgeId, Vertex, Vertex)> = g.edges().collect();
        let counts: Vec<(u32, u32)> = edges.iter().map(|&(e, _, _)| g.counts(e)).collect();
        let mut loads = vec![0u32; g.n() as usize];
        for (&(_, lo, hi), &(c_lo, c_hi)) in edges.iter().zip(&counts) {
            loads[lo.idx()] += c_lo;
            loads[hi.idx()] += c_hi;
        }
        for v in g.vertices() {
            if loads[v.idx()] != g.load(v) {
                return Err(format!("load of {v} is {} but its copies sum to {}", g.load(v), loads[v.idx()]));
            }
        }
        let total: u64 = loads.iter().map(|&s| u64::from(s)).sum();
        let expected = u64::from(g.gamma()) * g.num_edges() as u64;
        if total != expected {
            return Err(format!("loads sum to {total}, expected gamma * m = {expected}"));
        }
        let params = *g.params();
        for (&(e, lo, hi), &(c_lo, c_hi)) in edges.iter().zip(&counts) {
            for (t, h, c) in [(lo, hi, c_lo), (hi, lo, c_hi)] {
                if c > 0 && loads[t.idx()] > loads[h.idx()] + 1 {
                    return Err(format!("copies {t}->{h} are not 1-valid: loads {} and {}", loads[t.idx()], loads[h.idx()]));
                }
            }
            if self.in_h(g, e) {
                if !params.within_band(c_lo) {
                    return Err(format!("H edge {lo}-{hi} has count {c_lo} outside the band"));
                }
            } else if params.strictly_inside(c_lo) {
                return Err(format!("edge {lo}-{hi} with count {c_lo} belongs in H"));
            }
        }
        let h: Vec<_> = g.forest(self.h).edges().collect();
        if !crate::oracles::is_forest(&h) {
            return Err("H has a cycle".into());
        }
        self.hl.check().map_err(|m| format!("heavy-light of H: {m}"))
    }
}

/// The rounded tail of a non-`H` edge: the endpoint holding more copies,
/// or the lower id on a tie (reported as the second component).
pub fn rounded_tail(g: &mut Graph, e: EdgeId) -> (Vertex, bool) {
    let (lo, hi) = g.endpoints(e);
    let (c_lo, c_hi) = g.counts(e);
    (if c_lo >= c_hi { lo } else { hi }, c_lo == c_hi)
}

/// `s(v)` recomputed from the counters of every incident bundle.
pub fn recomputed_load(g: &mut Graph, v: Vertex) -> u32 {
    let es: Vec<EdgeId> = g.neighbours(v).values().copied().collect();
    es.into_iter().map(|e| g.count(e, v)).sum()
}

/// A refinement over its own graph, without pseudoforests: the standalone
/// low out-degree orientation.
#[derive(Clone, Debug)]
pub struct Orienter {
    pub graph: Graph,
    pub refinement: Refinement,
}

impl Orienter {
    pub fn new(params: crate::graph::Params) -> Self {
        let mut graph = Graph::new(params);
        let refinement = Refinement::new(&mut graph);
        Self { graph, refinement }
    }

    pub fn insert(&mut self, u: Vertex, v: Vertex) -> Result<ReorientLog, GraphError> {
        Ok(self.refinement.insert_edge(&mut self.graph, &mut NoChanges, u, v)?.1)
    }

    pub fn delete(&mut self, u: Vertex, v: Vertex) -> Result<ReorientLog, GraphError> {
        self.refinement.delete_edge(&mut self.graph, &mut NoChanges, u, v)
    }

    pub fn out_degree(&mut self, v: Vertex) -> usize {
        self.refinement.rounded_out_degree(&mut self.graph, v)
    }

    pub fn out_edges(&mut self, v: Vertex) -> Vec<Vertex> {
        self.refinement.rounded_out_edges(&mut self.graph, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Epsilon, Params};

    fn orienter(n: u32, gamma: u32) -> Orienter {
        Orienter::new(Params::new(n, gamma, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap())
    }

    #[test]
    fn single_edge_enters_h() {
        let mut o = orienter(2, 8);
        o.insert(Vertex(0), Vertex(1)).unwrap();
        let e = o.graph.edge(Vertex(0), Vertex(1)).unwrap();
        assert!(o.refinement.in_h(&o.graph, e));
        assert_eq!(o.graph.counts(e), (4, 4));
        o.delete(Vertex(0), Vertex(1)).unwrap();
        assert_eq!(o.graph.num_edges(), 0);
        assert_eq!(o.refinement.h_edges(&o.graph).count(), 0);
    }

    #[test]
    fn triangle_keeps_h_acyclic() {
        let mut o = orienter(3, 8);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            o.insert(Vertex(u), Vertex(v)).unwrap();
        }
        assert!(o.refinement.h_edges(&o.graph).count() <= 2);
        assert!(o.refinement.stats().shifts + o.refinement.stats().plain_removals >= 1);
        for v in 0..3 {
            assert!(o.out_degree(Vertex(v)) <= 2);
        }
    }

    #[test]
    fn square_with_even_split_expels_one_edge() {
        // Four H edges around a square, each split 4/4. Closing the square
        // gives a minimum count of 4 > delta = 2, so weight 4 - 2 + 1 = 3 is
        // shifted and the minimizer ends at delta - mu = 1.
        let mut g = Graph::new(Params::new(4, 8, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap());
        let mut r = Refinement::new(&mut g);
        r.set_audit(true);
        let mut ids = Vec::new();
        for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            let e = g.add_edge_slot(Vertex(a), Vertex(b)).unwrap();
            g.set_bundle(Vertex(a), Vertex(b), 4, 4).unwrap();
            ids.push(e);
        }
        for &e in &ids[..3] {
            r.handle_s_edge(&mut g, &mut NoChanges, e).unwrap();
        }
        let loads = g.loads();
        r.handle_s_edge(&mut g, &mut NoChanges, ids[3]).unwrap();
        assert_eq!(g.loads(), loads);
        assert_eq!(r.stats().shifts, 1);
        assert_eq!(r.stats().load_mismatches, 0);
        // Forward along 0 -> 1 -> 2 -> 3 -> 0; the first path edge is the
        // minimizer and loses 3 forward copies.
        assert_eq!(g.counts(ids[0]), (1, 7));
        assert!(!r.in_h(&g, ids[0]));
        assert!(r.in_h(&g, ids[3]));
        assert_eq!(g.counts(ids[1]), (1, 7));
        assert_eq!(g.counts(ids[3]), (7, 1));
    }

    #[test]
    fn low_cycle_edge_is_dropped_without_shift() {
        let mut g = Graph::new(Params::new(3, 8, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap());
        let mut r = Refinement::new(&mut g);
        let mut ids = Vec::new();
        for ((a, b), (ca, cb)) in [((0, 1), (2, 6)), ((1, 2), (4, 4)), ((0, 2), (4, 4))] {
            let e = g.add_edge_slot(Vertex(a), Vertex(b)).unwrap();
            g.set_bundle(Vertex(a), Vertex(b), ca, cb).unwrap();
            ids.push(e);
        }
        g.link_into(ids[0], r.slot(), Vertex(0)).unwrap();
        r.hl.link(Vertex(0), Vertex(1), &mut |_, _| {}).unwrap();
        r.handle_s_edge(&mut g, &mut NoChanges, ids[1]).unwrap();
        r.handle_s_edge(&mut g, &mut NoChanges, ids[2]).unwrap();
        assert_eq!(r.stats().plain_removals, 1);
        assert!(!r.in_h(&g, ids[0]));
        assert_eq!(g.counts(ids[0]), (2, 6));
    }

    #[test]
    fn rounding_points_away_from_heavier_side() {
        let mut g = Graph::new(Params::new(2, 8, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap());
        let mut r = Refinement::new(&mut g);
        g.add_edge_slot(Vertex(0), Vertex(1)).unwrap();
        g.set_bundle(Vertex(0), Vertex(1), 7, 1).unwrap();
        assert_eq!(r.rounded_out_edges(&mut g, Vertex(0)), vec![Vertex(1)]);
        assert!(r.rounded_out_edges(&mut g, Vertex(1)).is_empty());
    }
}
