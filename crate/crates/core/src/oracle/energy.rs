//! The energy `E_phi E_e~ [P_e[G(e) = c | e ~_{dG/phi} e~]^2]`, exactly.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{enumerate_maps, ColorId, ColoredGraph};
use crate::regularize::regularize;

use super::{q, LemmaCheckResult};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EnergyKey {
    pub i: usize,
    pub j: usize,
    pub color: ColorId,
}

/// Energy of every occurring edge color of every pair with `m` samples per
/// part, enumerating all of `Phi(m)`.
pub fn energy(g: &ColoredGraph, m: usize, work_cap: u64) -> Result<BTreeMap<EnergyKey, BigRational>> {
    let maps = enumerate_maps(g.part_sizes(), &vec![m; g.r()], work_cap)?;
    let count = maps.remaining();
    let mut acc: BTreeMap<EnergyKey, BigRational> = BTreeMap::new();
    for pc in g.pairs() {
        for c in &pc.matrix {
            acc.entry(EnergyKey { i: pc.i, j: pc.j, color: *c }).or_insert_with(BigRational::zero);
        }
    }
    for phi in maps {
        let gg = regularize(g, &phi)?;
        for pc in g.pairs() {
            let nj = g.part_size(pc.j);
            let mut buckets: HashMap<(ColorId, ColorId), Vec<u64>> = HashMap::new();
            for (pos, c) in pc.matrix.iter().enumerate() {
                let key = (gg.vertex_color(pc.i, pos / nj), gg.vertex_color(pc.j, pos % nj));
                buckets.entry(key).or_insert_with(|| vec![0; pc.palette])[c.index()] += 1;
            }
            // sum over buckets of |B| (n_c / |B|)^2 = n_c^2 / |B|
            for counts in buckets.values() {
                let size: u64 = counts.iter().sum();
                for (c, &n) in counts.iter().enumerate() {
                    if n > 0 {
                        let key = EnergyKey { i: pc.i, j: pc.j, color: ColorId(c as u32) };
                        *acc.get_mut(&key).expect("occurring color") += q(n * n, size);
                    }
                }
            }
        }
    }
    for (key, v) in acc.iter_mut() {
        let edges = g.edge_count(key.i, key.j) as u128;
        *v = &*v / BigRational::from_integer((edges * count as u128).into());
    }
    Ok(acc)
}

/// Checks, for one graph and a schedule of sample counts, that the energy
/// of every color lies in `[0, 1]`, never decreases along the schedule, and
/// that its increments sum to at most 1.
pub fn check_energy(g: &ColoredGraph, schedule: &[usize], work_cap: u64) -> Result<Vec<LemmaCheckResult>> {
    let levels = schedule.iter().map(|&m| energy(g, m, work_cap)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let one = q(1, 1);
    for key in levels[0].keys() {
        let values: Vec<&BigRational> = levels.iter().map(|l| &l[key]).collect();
        let id = serde_json::json!({ "i": key.i, "j": key.j, "color": key.color });
        out.push(LemmaCheckResult::new(
            "energy_bounds",
            serde_json::json!({ "color": id, "m": schedule[0] }),
            BigRational::zero(),
            values[0].clone(),
        ));
        for w in 0..values.len() - 1 {
            out.push(LemmaCheckResult::new(
                "energy_monotone",
                serde_json::json!({ "color": id, "from_m": schedule[w], "to_m": schedule[w + 1] }),
                values[w].clone(),
                values[w + 1].clone(),
            ));
        }
        let last = values[values.len() - 1];
        out.push(LemmaCheckResult::new(
            "energy_telescoping",
            serde_json::json!({ "color": id, "schedule": schedule }),
            last - values[0],
            one.clone() - values[0],
        ));
        out.push(LemmaCheckResult::new(
            "energy_bounds",
            serde_json::json!({ "color": id, "m": schedule[schedule.len() - 1] }),
            last.clone(),
            one.clone(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};
    use crate::graph::fixtures::*;

    #[test]
    fn monochromatic_energy_is_one() {
        let g = ColoredGraph::new(mono_raw(&[3, 2])).unwrap();
        for m in 0..3 {
            let e = energy(&g, m, 1 << 16).unwrap();
            assert!(e.values().all(|v| *v == q(1, 1)));
        }
    }

    #[test]
    fn four_vertex_energy_at_zero() {
        // no refinement: black 3/4 -> 9/16, white 1/4 -> 1/16
        let e = energy(&four_vertex(), 0, 10).unwrap();
        let vals: Vec<_> = e.values().cloned().collect();
        assert_eq!(vals, vec![q(9, 16), q(1, 16)]);
    }

    #[test]
    fn half_graph_energy_increases() {
        let g = generate(&GeneratorSpec::half_graph(6)).unwrap();
        let rs = check_energy(&g, &[0, 1, 2], 1 << 20).unwrap();
        assert!(rs.iter().all(|r| r.holds));
        let e0 = energy(&g, 0, 10).unwrap();
        let e1 = energy(&g, 1, 100).unwrap();
        let k = EnergyKey { i: 0, j: 1, color: BLACK };
        assert!(e1[&k] > e0[&k], "one sample already splits the half-graph");
    }
}
