//! Shared drivers for the integration targets.

use dynorient::dyn_forest::DynForest;
use dynorient::graph::Vertex;
use dynorient::oracles::NaiveForest;
use rand::seq::SliceRandom;
use rand::Rng;

/// Runs `ops` random forest operations on both implementations and returns
/// the first disagreement.
pub fn forest_mirror(rng: &mut impl Rng, n: u32, gamma: u32, ops: usize) -> Result<(), String> {
    let mut fast = DynForest::new(n, gamma);
    let mut slow = NaiveForest::new(n, gamma);
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for step in 0..ops {
        let a = Vertex(rng.gen_range(0..n));
        let b = Vertex(rng.gen_range(0..n));
        let fail = |what: &str| Err(format!("step {step}: {what} disagrees on {a}-{b}"));
        match rng.gen_range(0..10) {
            0..=2 => {
                let w = rng.gen_range(0..=gamma);
                let linked = fast.link(a, b, w).is_ok();
                if linked != slow.link(a, b, w) {
                    return fail("link");
                }
                if linked {
                    edges.push((a, b));
                }
            }
            3 => {
                if let Some(&(u, v)) = edges.choose(rng) {
                    edges.retain(|&e| e != (u, v));
                    if fast.cut(u, v).is_err() || !slow.cut(u, v) {
                        return fail("cut");
                    }
                }
            }
            4 => {
                let x = rng.gen_range(-(gamma as i64)..=gamma as i64);
                if a != b && fast.add_weight(a, b, x).is_ok() != slow.add_weight(a, b, x) {
                    return fail("add_weight");
                }
            }
            5 => {
                let path = slow.path_weights(a, b);
                let min = fast.min_weight(a, b).ok().flatten();
                let max = fast.max_weight(a, b).ok().flatten();
                let want_min = path.as_ref().and_then(|p| p.iter().map(|t| t.2).min());
                let want_max = path.as_ref().and_then(|p| p.iter().map(|t| t.2).max());
                if min != want_min || max != want_max {
                    return fail("min/max");
                }
                if let Some(p) = path {
                    if fast.path_len(a, b).ok() != Some(p.len() as u32) {
                        return fail("path length");
                    }
                }
            }
            6 => {
                if fast.depth_parity(a) != (slow.depth(a) % 2) as u8 || fast.find_root(a) != slow.find_root(a) {
                    return fail("parity/root");
                }
            }
            7 => {
                fast.set_root(a);
                slow.set_root(a);
            }
            _ => {
                if fast.connected(a, b) != slow.connected(a, b) {
                    return fail("connected");
                }
            }
        }
    }
    Ok(())
}
