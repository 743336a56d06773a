//! Implicit proper colourings read off the arboricity engine.
//!
//! Nothing is stored per vertex. A query combines one digit per factor of
//! the decomposition into a mixed-radix code:
//!
//! - forest mode: the depth parity of `v` in every `F_i`, in `G[M]` and in
//!   `H`, for `2^(k+2)` colours;
//! - pseudoforest mode: per `P_i`, `2` if `v` holds the surplus edge of its
//!   component and its depth parity in `F_i` otherwise, then the parity in
//!   `H`, for `2 * 3^k` colours.
//!
//! Here `k` is the number of pseudoforest slots in use. Digits are ordered
//! by partition index, `H` last, least significant first.

use serde::Serialize;

use crate::arboricity::{ArbConfig, ArbStats, Arboricity};
use crate::error::Error;
use crate::graph::{Params, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColourMode {
    /// Parity colouring of every forest of the decomposition.
    ForestDecomposition,
    /// Three colours per pseudoforest, two for `H`.
    Pseudoforest,
}

/// A colour as mixed-radix digits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ColourCode {
    pub digits: Vec<u8>,
    pub radices: Vec<u8>,
}

impl ColourCode {
    /// `sum digit_k * prod_{j < k} radix_j`.
    pub fn value(&self) -> u128 {
        self.digits
            .iter()
            .zip(&self.radices)
            .rev()
            .fold(0u128, |acc, (&d, &r)| acc * u128::from(r) + u128::from(d))
    }

    /// Inverse of [`ColourCode::value`] for the given radices.
    pub fn decode(mut value: u128, radices: &[u8]) -> Self {
        let digits = radices
            .iter()
            .map(|&r| {
                let d = (value % u128::from(r)) as u8;
                value /= u128::from(r);
                d
            })
            .collect();
        Self { digits, radices: radices.to_vec() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ColourStats {
    pub queries: u64,
    /// Forest and surplus lookups made by queries.
    pub factor_lookups: u64,
}

#[derive(Clone, Debug)]
pub struct Colouring {
    engine: Arboricity,
    mode: ColourMode,
    stats: ColourStats,
}

impl Colouring {
    /// The forest mode needs a colourful acyclic `G[M]`; the pseudoforest
    /// mode runs the engine without surplus repair.
    pub fn new(params: Params, mode: ColourMode, paranoid: bool) -> Self {
        let config = ArbConfig { surplus_repair: mode == ColourMode::ForestDecomposition, paranoid };
        Self { engine: Arboricity::new(params, config), mode, stats: ColourStats::default() }
    }

    pub fn mode(&self) -> ColourMode {
        self.mode
    }

    pub fn engine(&self) -> &Arboricity {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Arboricity {
        &mut self.engine
    }

    pub fn stats(&self) -> ColourStats {
        self.stats
    }

    pub fn arb_stats(&self) -> ArbStats {
        self.engine.stats()
    }

    pub fn insert(&mut self, u: Vertex, v: Vertex) -> Result<(), Error> {
        self.engine.insert(u, v).map(|_| ())
    }

    pub fn delete(&mut self, u: Vertex, v: Vertex) -> Result<(), Error> {
        self.engine.delete(u, v).map(|_| ())
    }

    /// Radix of each digit, least significant first.
    pub fn radices(&self) -> Vec<u8> {
        let k = self.engine.slots_in_use() as usize;
        match self.mode {
            ColourMode::ForestDecomposition => vec![2; k + 2],
            ColourMode::Pseudoforest => {
                let mut r = vec![3; k];
                r.push(2);
                r
            }
        }
    }

    pub fn colour_count(&self) -> u128 {
        self.radices().iter().map(|&r| u128::from(r)).product()
    }

    pub fn colour(&mut self, v: Vertex) -> ColourCode {
        let radices = self.radices();
        let k = self.engine.slots_in_use() as usize;
        self.stats.queries += 1;
        let mut digits = Vec::with_capacity(radices.len());
        for i in 0..k {
            let d = match self.mode {
                ColourMode::Pseudoforest if self.engine.is_surplus_root(i, v) => 2,
                _ => self.engine.forest_parity(i, v),
            };
            digits.push(d);
        }
        if self.mode == ColourMode::ForestDecomposition {
            digits.push(self.engine.surplus_parity(v));
        }
        digits.push(self.engine.h_parity(v));
        self.stats.factor_lookups += digits.len() as u64;
        ColourCode { digits, radices }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Epsilon;
    use crate::oracles;

    fn params(n: u32) -> Params {
        Params::new(n, 8, 2, 1, Epsilon::new(1, 2).unwrap()).unwrap()
    }

    fn v(x: u32) -> Vertex {
        Vertex(x)
    }

    #[test]
    fn empty_graph_has_one_colour_per_factor_base() {
        let c = Colouring::new(params(3), ColourMode::Pseudoforest, false);
        assert_eq!(c.colour_count(), 2);
        let c = Colouring::new(params(3), ColourMode::ForestDecomposition, false);
        assert_eq!(c.colour_count(), 4);
    }

    #[test]
    fn isolated_vertex_is_colour_zero() {
        let mut c = Colouring::new(params(3), ColourMode::ForestDecomposition, false);
        c.insert(v(0), v(1)).unwrap();
        assert_eq!(c.colour(v(2)).value(), 0);
    }

    #[test]
    fn codes_round_trip() {
        let code = ColourCode { digits: vec![2, 0, 1, 1], radices: vec![3, 3, 2, 2] };
        let back = ColourCode::decode(code.value(), &code.radices);
        assert_eq!(back, code);
    }

    #[test]
    fn triangle_and_k4_are_properly_coloured() {
        for mode in [ColourMode::ForestDecomposition, ColourMode::Pseudoforest] {
            let mut c = Colouring::new(params(4), mode, true);
            let edges = [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)];
            for (i, &(a, b)) in edges.iter().enumerate() {
                c.insert(v(a), v(b)).unwrap();
                let colours: Vec<u64> = (0..4).map(|x| c.colour(v(x)).value() as u64).collect();
                let present: Vec<_> = edges[..=i].iter().map(|&(a, b)| (v(a), v(b))).collect();
                assert!(oracles::is_proper(&colours, &present), "{mode:?} after {i}: {colours:?}");
                assert!(colours.iter().all(|&x| u128::from(x) < c.colour_count()));
            }
        }
    }

    #[test]
    fn repeated_queries_agree() {
        let mut c = Colouring::new(params(4), ColourMode::Pseudoforest, false);
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            c.insert(v(a), v(b)).unwrap();
        }
        let first: Vec<_> = (0..4).map(|x| c.colour(v(x))).collect();
        let again: Vec<_> = (0..4).map(|x| c.colour(v(x))).collect();
        assert_eq!(first, again);
    }
}
