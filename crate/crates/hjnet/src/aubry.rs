//! The distinguished vertex set where the solution equals the fixed point of
//! some circuit based there, with witness circuits, the rotation/partial-path
//! identities these witnesses satisfy, and the exact representation of the
//! solution from the set.

use std::collections::BTreeMap;

use crate::dfe::{path_fixed_point, rho_path, DiscreteError};
use crate::edge_map::EdgeMapTable;
use crate::graph::{OrientedGraph, Path, VertexId};

/// Membership report: vertices whose solution value is attained by a circuit
/// fixed point, with the witnessing circuits and per-vertex margins.
#[derive(Debug, Clone)]
pub struct AubryReport {
    pub members: Vec<VertexId>,
    pub witnesses: BTreeMap<VertexId, Path>,
    /// min over circuits of |U(y) - beta| for every vertex, members or not
    pub margins: BTreeMap<VertexId, f64>,
    pub epsilon: f64,
}

impl AubryReport {
    pub fn contains(&self, x: VertexId) -> bool {
        self.members.contains(&x)
    }
}

/// Detects membership: y belongs iff some circuit based at y has its fixed
/// point within eps * max(1, |U(y)|) of U(y). U must solve the discrete
/// equation to a tolerance well below eps.
pub fn detect_aubry(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    u: &[f64],
    eps: f64,
    beta_tol: f64,
    cap: usize,
) -> Result<AubryReport, DiscreteError> {
    let mut members = Vec::new();
    let mut witnesses = BTreeMap::new();
    let mut margins = BTreeMap::new();
    for y in graph.vertices() {
        let mut margin = f64::INFINITY;
        let mut witness: Option<Path> = None;
        for c in graph.enumerate_circuits(y, cap)? {
            let beta = path_fixed_point(table, &c, beta_tol)?;
            let gap = (u[y.0] - beta).abs();
            if gap < margin {
                margin = gap;
                witness = Some(c);
            }
        }
        margins.insert(y, margin);
        if margin <= eps * u[y.0].abs().max(1.0) {
            members.push(y);
            if let Some(w) = witness {
                witnesses.insert(y, w);
            }
        }
    }
    if members.is_empty() {
        return Err(DiscreteError::EmptyAubry(eps));
    }
    Ok(AubryReport {
        members,
        witnesses,
        margins,
        epsilon: eps,
    })
}

/// Outcome of the witness-circuit identity checks.
#[derive(Debug, Clone)]
pub struct SpringCheck {
    pub ok: bool,
    /// (rotation index j, base index k) of the first violated identity
    pub violation: Option<(usize, usize)>,
    pub worst_gap: f64,
}

/// Verifies, for a cycle xi based at y with U(y) = beta(xi):
/// every rotation's fixed point equals U at its base, and U along the cycle
/// is propagated by the partial-path maps from any earlier base.
pub fn verify_spring(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    u: &[f64],
    cycle: &Path,
    tol: f64,
    beta_tol: f64,
) -> Result<SpringCheck, DiscreteError> {
    let m = cycle.len();
    let mut worst = 0.0f64;
    let mut violation = None;
    for j in 0..m {
        let rotated = graph.rotate_cycle(cycle, j);
        let base = graph.origin_of(&rotated);
        let beta = path_fixed_point(table, &rotated, beta_tol)?;
        let gap = (u[base.0] - beta).abs();
        worst = worst.max(gap);
        if gap > tol && violation.is_none() {
            violation = Some((j, j));
        }
    }
    // partial propagation: U(o(e_j)) = rho(U(o(e_k)), (e_k..e_{j-1}))
    for k in 0..m {
        for j in (k + 1)..m {
            let part = Path {
                edges: cycle.edges[k..j].to_vec(),
            };
            let from = graph.origin(cycle.edges[k]);
            let to = graph.origin(cycle.edges[j]);
            let v = rho_path(table, &part, u[from.0])?;
            let gap = (u[to.0] - v).abs();
            worst = worst.max(gap);
            if gap > tol && violation.is_none() {
                violation = Some((j, k));
            }
        }
    }
    Ok(SpringCheck {
        ok: violation.is_none(),
        violation,
        worst_gap: worst,
    })
}

/// Exact representation from the member set: min over members y and simple
/// paths from y to x of rho(U(y), path), with the empty path contributing
/// U(x) when x is a member. Also checks the along-path propagation identity
/// on the argmin path.
pub struct RepresentationValue {
    pub value: f64,
    pub argmin_member: VertexId,
    pub argmin_path: Option<Path>,
    /// max gap in U(o(e_j)) = rho(U(y), (e_1..e_{j-1})) along the argmin path
    pub propagation_gap: f64,
}

pub fn aubry_representation(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    u: &[f64],
    report: &AubryReport,
    x: VertexId,
    cap: usize,
) -> Result<RepresentationValue, DiscreteError> {
    let mut best = f64::INFINITY;
    let mut argmin_member = x;
    let mut argmin_path: Option<Path> = None;
    if report.contains(x) {
        best = u[x.0];
    }
    for path in graph.enumerate_simple_paths(x, cap)? {
        let y = graph.origin_of(&path);
        if !report.contains(y) {
            continue;
        }
        let v = rho_path(table, &path, u[y.0])?;
        if v < best {
            best = v;
            argmin_member = y;
            argmin_path = Some(path);
        }
    }
    let mut propagation_gap = 0.0f64;
    if let Some(path) = &argmin_path {
        let y = graph.origin_of(path);
        for j in 1..path.len() {
            let part = Path {
                edges: path.edges[..j].to_vec(),
            };
            let v = rho_path(table, &part, u[y.0])?;
            let at = graph.origin(path.edges[j]);
            propagation_gap = propagation_gap.max((u[at.0] - v).abs());
        }
    }
    Ok(RepresentationValue {
        value: best,
        argmin_member,
        argmin_path,
        propagation_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfe::{solve_dfe, DfeOptions};
    use crate::edge_map::EdgeMapTable;
    use crate::graph::GraphBuilder;

    fn asym_pair() -> (OrientedGraph, EdgeMapTable) {
        let mut b = GraphBuilder::new();
        b.add_vertex("x").unwrap();
        b.add_vertex("y").unwrap();
        b.add_arc("e", "x", "y").unwrap();
        let g = b.build().unwrap();
        let t = EdgeMapTable::affine(&g, &[(0.5, 1.0), (0.5, 0.25)]).unwrap();
        (g, t)
    }

    // three-cycle with slack reverse maps plus a pendant vertex
    fn ring_with_pendant() -> (OrientedGraph, EdgeMapTable) {
        let mut b = GraphBuilder::new();
        for v in ["v0", "v1", "v2", "z"] {
            b.add_vertex(v).unwrap();
        }
        b.add_arc("e1", "v0", "v1").unwrap();
        b.add_arc("e2", "v1", "v2").unwrap();
        b.add_arc("e3", "v2", "v0").unwrap();
        b.add_arc("ep", "v0", "z").unwrap();
        let g = b.build().unwrap();
        let mut params = vec![(0.0, 0.0); g.edge_count()];
        for (name, p) in [
            ("e1", (0.5, 0.3)),
            ("-e1", (0.5, 10.0)),
            ("e2", (0.5, 0.6)),
            ("-e2", (0.5, 10.0)),
            ("e3", (0.5, 0.2)),
            ("-e3", (0.5, 10.0)),
            ("ep", (0.5, 5.0)),
            ("-ep", (0.5, 10.0)),
        ] {
            params[g.edge_by_name(name).unwrap().0] = p;
        }
        let t = EdgeMapTable::affine(&g, &params).unwrap();
        (g, t)
    }

    #[test]
    fn two_vertex_members_and_witnesses() {
        let (g, t) = asym_pair();
        let sol = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
        let rep = detect_aubry(&t, &g, &sol.values, 1e-6, 1e-10, 1000).unwrap();
        let x = g.vertex_by_name("x").unwrap();
        let y = g.vertex_by_name("y").unwrap();
        assert!(rep.contains(x) && rep.contains(y));
        assert_eq!(rep.members.len(), 2);
        // witnesses are circuits based at their vertices
        for (v, w) in &rep.witnesses {
            assert_eq!(g.origin_of(w), *v);
            assert!(g.is_cycle(w) && g.is_simple(w));
        }
        // spring identities hold for both rotations
        let wx = rep.witnesses.get(&x).unwrap();
        let check = verify_spring(&t, &g, &sol.values, wx, 1e-8, 1e-10).unwrap();
        assert!(check.ok, "spring violated: {:?}", check.violation);
        // perturbing U breaks the partial-path identity
        let mut bad = sol.values.clone();
        bad[y.0] += 0.1;
        let check = verify_spring(&t, &g, &bad, wx, 1e-8, 1e-10).unwrap();
        assert!(!check.ok);
    }

    #[test]
    fn ring_members_pendant_excluded() {
        let (g, t) = ring_with_pendant();
        let sol = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
        let rep = detect_aubry(&t, &g, &sol.values, 1e-6, 1e-10, 10_000).unwrap();
        for v in ["v0", "v1", "v2"] {
            assert!(rep.contains(g.vertex_by_name(v).unwrap()), "{v} missing");
        }
        let z = g.vertex_by_name("z").unwrap();
        assert!(!rep.contains(z));
        // every ring witness passes the identity checks
        for v in ["v0", "v1", "v2"] {
            let id = g.vertex_by_name(v).unwrap();
            let w = rep.witnesses.get(&id).unwrap();
            assert!(
                verify_spring(&t, &g, &sol.values, w, 1e-8, 1e-10)
                    .unwrap()
                    .ok
            );
        }
    }

    #[test]
    fn representation_matches_solution() {
        for (g, t) in [asym_pair(), ring_with_pendant()] {
            let sol = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
            let rep = detect_aubry(&t, &g, &sol.values, 1e-6, 1e-10, 10_000).unwrap();
            for x in g.vertices() {
                let r = aubry_representation(&t, &g, &sol.values, &rep, x, 10_000).unwrap();
                assert!(
                    (r.value - sol.value(x)).abs() <= 1e-5,
                    "representation off at {}: {} vs {}",
                    g.vertex_name(x),
                    r.value,
                    sol.value(x)
                );
                assert!(r.propagation_gap <= 1e-5);
            }
        }
    }

    #[test]
    fn membership_monotone_in_epsilon() {
        let (g, t) = ring_with_pendant();
        let sol = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
        let tight = detect_aubry(&t, &g, &sol.values, 1e-6, 1e-10, 10_000).unwrap();
        let loose = detect_aubry(&t, &g, &sol.values, 1e-2, 1e-10, 10_000).unwrap();
        for m in &tight.members {
            assert!(loose.contains(*m));
        }
    }
}
