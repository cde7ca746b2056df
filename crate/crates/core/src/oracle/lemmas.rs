//! Exact checkers for the counting lemma, the mean-square lemma and the
//! refinement form of Cauchy-Schwarz.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{check_work, enumerate_maps, ColorId, ColoredGraph, Complex, Slot, TemplateEdge};
use crate::regularize::regularize;

use super::{exact_density, q, LemmaCheckResult};

/// Color-compatible placements of the visible vertices of `s`, as
/// `(vertices, edges)` where `edges[k]` is the indicator that visible edge
/// `k` matches.
fn conditioned_placements(g: &ColoredGraph, s: &Complex, work_cap: u64) -> Result<(Vec<Slot>, Vec<Vec<bool>>)> {
    let vis = s.visible_vertices();
    let edges = s.visible_edges();
    let cand: Vec<Vec<usize>> = vis
        .iter()
        .map(|(v, c)| (0..g.part_size(v.part)).filter(|&x| g.vertex_color(v.part, x) == *c).collect())
        .collect();
    if cand.iter().any(Vec::is_empty) {
        return Err(Error::ZeroProbability("a visible vertex color does not occur".into()));
    }
    let total = cand.iter().try_fold(1u128, |a, c| a.checked_mul(c.len() as u128));
    check_work(total, work_cap)?;
    let slots: Vec<Slot> = vis.iter().map(|(v, _)| *v).collect();
    let pos = |slot: Slot| slots.iter().position(|&x| x == slot).expect("closure");
    let mut rows = Vec::new();
    let mut idx = vec![0usize; cand.len()];
    loop {
        let placed: Vec<usize> = idx.iter().zip(&cand).map(|(&k, c)| c[k]).collect();
        rows.push(
            edges
                .iter()
                .map(|e| {
                    let (a, b) = (placed[pos(e.a)], placed[pos(e.b)]);
                    g.edge_color(e.a.part, a, e.b.part, b) == e.color
                })
                .collect(),
        );
        // odometer
        let mut k = idx.len();
        loop {
            if k == 0 {
                return Ok((slots, rows));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < cand[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn edge_density(g: &ColoredGraph, s: &Complex, e: &TemplateEdge) -> BigRational {
    let (ca, cb) = (s.vertex(e.a).expect("closure"), s.vertex(e.b).expect("closure"));
    let (mut hit, mut support) = (0u64, 0u64);
    for u in 0..g.part_size(e.a.part) {
        if g.vertex_color(e.a.part, u) != ca {
            continue;
        }
        for v in 0..g.part_size(e.b.part) {
            if g.vertex_color(e.b.part, v) != cb {
                continue;
            }
            support += 1;
            if g.edge_color(e.a.part, u, e.b.part, v) == e.color {
                hit += 1;
            }
        }
    }
    q(hit, support)
}

/// `|P[edges | vertices] - prod d|` against
/// `|V_2| max_D |E[prod_{e in D} (1[e] - d_e) | vertices]|`.
pub fn check_counting_lemma(g: &ColoredGraph, s: &Complex, work_cap: u64) -> Result<LemmaCheckResult> {
    crate::graph::validate_complex(s, g)?;
    let edges = s.visible_edges();
    if edges.len() > 20 {
        return Err(Error::WorkCapExceeded { needed: format!("2^{} edge subsets", edges.len()), cap: 1 << 20 });
    }
    let (_, rows) = conditioned_placements(g, s, work_cap)?;
    let n = BigRational::from_integer(rows.len().into());
    let d: Vec<BigRational> = edges.iter().map(|e| edge_density(g, s, e)).collect();
    let all = rows.iter().filter(|r| r.iter().all(|&x| x)).count();
    let prod_d = d.iter().fold(BigRational::one(), |a, x| a * x);
    let lhs = (q(all as u64, rows.len() as u64) - prod_d).abs();
    let mut worst = BigRational::zero();
    for mask in 1u32..(1 << edges.len()) {
        let mut sum = BigRational::zero();
        for row in &rows {
            let mut term = BigRational::one();
            for (k, dk) in d.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    let ind = if row[k] { BigRational::one() } else { BigRational::zero() };
                    term *= ind - dk;
                }
            }
            sum += term;
        }
        let v = (sum / &n).abs();
        if v > worst {
            worst = v;
        }
    }
    let rhs = BigRational::from_integer(edges.len().into()) * worst;
    Ok(LemmaCheckResult::new("counting", serde_json::Value::Null, lhs, rhs))
}

/// Mean square of the class means of `x` under a partition given by class
/// labels; every point has weight `1 / len`.
fn mean_square(x: &[BigRational], classes: &[usize]) -> BigRational {
    let mut sums: HashMap<usize, (BigRational, u64)> = HashMap::new();
    for (v, &c) in x.iter().zip(classes) {
        let e = sums.entry(c).or_insert_with(|| (BigRational::zero(), 0));
        e.0 += v;
        e.1 += 1;
    }
    // E_w0 (mean of class(w0))^2 = sum_classes |B| (S_B / |B|)^2 / n
    let total: BigRational = sums.values().map(|(s, n)| s * s / BigRational::from_integer((*n).into())).sum();
    total / BigRational::from_integer(x.len().into())
}

/// Refinement Cauchy-Schwarz: the mean square of conditional means does
/// not decrease when the partition is refined. `lhs` is the coarse value,
/// `rhs` the fine one.
pub fn check_cauchy_refinement(
    space_size: usize,
    x: &[BigRational],
    coarse: &[usize],
    fine: &[usize],
) -> Result<LemmaCheckResult> {
    if x.len() != space_size || coarse.len() != space_size || fine.len() != space_size {
        return Err(Error::validation("X and both partitions must cover the space"));
    }
    if space_size == 0 {
        return Err(Error::validation("empty probability space"));
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (&f, &c) in fine.iter().zip(coarse) {
        if *owner.entry(f).or_insert(c) != c {
            return Err(Error::validation(format!("fine class {f} meets two coarse classes")));
        }
    }
    let lhs = mean_square(x, coarse);
    let rhs = mean_square(x, fine);
    Ok(LemmaCheckResult::new("cauchy", serde_json::Value::Null, lhs, rhs))
}

/// Functions `F_e` from edge colors to `[-1, 1]`, one per visible edge of
/// the complex (in `visible_edges` order).
pub type EdgeFunctions = Vec<Vec<BigRational>>;

fn f_value(f: &[BigRational], c: ColorId) -> BigRational {
    f.get(c.index()).cloned().unwrap_or_else(BigRational::zero)
}

/// Expected square of the `~_{dG/phi'}` class mean of `x(e)` over
/// `phi' in Phi(m h)` and `e*` uniform in `Omega_I` (or uniform in `frame`
/// when it is given), exactly.
fn refined_mean_square(
    g: &ColoredGraph,
    (i, j): (usize, usize),
    x: &dyn Fn(usize, usize) -> BigRational,
    per_part: usize,
    frame: Option<(ColorId, ColorId)>,
    work_cap: u64,
) -> Result<BigRational> {
    let maps = enumerate_maps(g.part_sizes(), &vec![per_part; g.r()], work_cap)?;
    let count = maps.remaining();
    let mut acc = BigRational::zero();
    let mut support = 0u64;
    for phi in maps {
        let gg = regularize(g, &phi)?;
        let mut buckets: HashMap<(ColorId, ColorId), (BigRational, u64, bool)> = HashMap::new();
        support = 0;
        for u in 0..g.part_size(i) {
            for v in 0..g.part_size(j) {
                let key = (gg.vertex_color(i, u), gg.vertex_color(j, v));
                let in_frame = frame.is_none_or(|f| (g.vertex_color(i, u), g.vertex_color(j, v)) == f);
                if in_frame {
                    support += 1;
                }
                let b = buckets.entry(key).or_insert_with(|| (BigRational::zero(), 0, in_frame));
                b.0 += x(u, v);
                b.1 += 1;
            }
        }
        for (sum, n, in_frame) in buckets.values() {
            if *in_frame {
                acc += sum * sum / BigRational::from_integer((*n).into());
            }
        }
    }
    if support == 0 {
        return Err(Error::ZeroSupport("conditioning frame never occurs".into()));
    }
    Ok(acc / BigRational::from_integer((count as u128 * support as u128).into()))
}

/// Checks the mean-square inequality at every visible edge `e0` of `s`,
/// and its conditional corollary where `1/m <= prod_{v not in e0} d(v)`.
pub fn check_mean_square_lemma(
    g: &ColoredGraph,
    s: &Complex,
    m: usize,
    f: &EdgeFunctions,
    work_cap: u64,
) -> Result<Vec<LemmaCheckResult>> {
    crate::graph::validate_complex(s, g)?;
    if m == 0 {
        return Err(Error::validation("m must be positive"));
    }
    let edges = s.visible_edges();
    if f.len() != edges.len() {
        return Err(Error::validation(format!("{} functions for {} visible edges", f.len(), edges.len())));
    }
    let one = BigRational::one();
    for fe in f {
        if fe.iter().any(|v| v.abs() > one) {
            return Err(Error::validation("F values must lie in [-1, 1]"));
        }
    }
    let h = s.h();
    let vertices = s.visible_vertices();

    // E_phi [prod F * prod vertex indicators], naive over all of Phi(h)
    let maps = enumerate_maps(g.part_sizes(), &vec![h; g.r()], work_cap)?;
    let total = maps.remaining();
    let mut sum = BigRational::zero();
    for phi in maps {
        if vertices.iter().any(|(v, c)| g.vertex_color(v.part, phi.get(*v)) != *c) {
            continue;
        }
        let mut term = BigRational::one();
        for (e, fe) in edges.iter().zip(f) {
            term *= f_value(fe, g.edge_color(e.a.part, phi.get(e.a), e.b.part, phi.get(e.b)));
        }
        sum += term;
    }
    let mean = sum / BigRational::from_integer(total.into());
    let lhs = &mean * &mean;

    let vdens: Vec<BigRational> = vertices.iter().map(|(v, c)| exact_density(g, v.part, *c)).collect();
    let p1 = vdens.iter().fold(BigRational::one(), |a, x| a * x);
    let inv_m = q(1, m as u64);

    let mut out = Vec::new();
    for (k, e0) in edges.iter().enumerate() {
        let (i, j) = (e0.a.part, e0.b.part);
        let frame = (s.vertex(e0.a).expect("closure"), s.vertex(e0.b).expect("closure"));
        let fe = &f[k];
        let p2 = vertices
            .iter()
            .zip(&vdens)
            .filter(|((v, _), _)| *v != e0.a && *v != e0.b)
            .fold(BigRational::one(), |a, (_, x)| a * x);
        let x = |u: usize, v: usize| {
            if (g.vertex_color(i, u), g.vertex_color(j, v)) == frame {
                f_value(fe, g.edge_color(i, u, j, v))
            } else {
                BigRational::zero()
            }
        };
        let first = refined_mean_square(g, (i, j), &x, m * h, None, work_cap)?;
        let rhs = first * &p1 * (&p2 + &inv_m);
        let descriptor = serde_json::json!({ "form": "unconditional", "e0": k, "m": m });
        out.push(LemmaCheckResult::new("meansquare", descriptor, lhs.clone(), rhs));

        if inv_m <= p2 && !p1.is_zero() {
            let cond = &mean / &p1;
            let lhs_c = &cond * &cond;
            let y = |u: usize, v: usize| f_value(fe, g.edge_color(i, u, j, v));
            let rhs_c = BigRational::from_integer(2.into())
                * refined_mean_square(g, (i, j), &y, m * h, Some(frame), work_cap)?;
            let descriptor = serde_json::json!({ "form": "conditional", "e0": k, "m": m });
            out.push(LemmaCheckResult::new("meansquare", descriptor, lhs_c, rhs_c));
        }
    }
    Ok(out)
}
