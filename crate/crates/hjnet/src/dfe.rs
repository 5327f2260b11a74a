//! The discrete functional equation on the graph:
//!
//!   U(x) = min over edges e ending at x of rho(U(o(e)), e),
//!
//! solved by monotone value iteration from a constant supersolution, plus
//! the path functional rho(alpha, xi), cycle fixed points beta(xi), and the
//! enumeration-based representation oracles.

pub use crate::edge_map::DiscreteError;
use crate::edge_map::EdgeMapTable;
use crate::graph::{EdgeId, OrientedGraph, Path, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    /// In-place updates, vertices in id order.
    GaussSeidel,
    /// Simultaneous updates; keeps the iterates nonincreasing step by step.
    Jacobi,
}

#[derive(Debug, Clone)]
pub struct DfeOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub sweep: SweepOrder,
    /// Starting constant; defaults to max over edges of the saturation value,
    /// which makes the initial profile a supersolution.
    pub init: Option<f64>,
    /// Bulk iteration runs on memoized edge maps until the step change drops
    /// below this, then the loop polishes with exact maps; irrelevant for
    /// synthetic backends.
    pub fast_phase_tol: f64,
}

impl Default for DfeOptions {
    fn default() -> Self {
        DfeOptions {
            tol: 1e-10,
            max_iterations: 10_000_000,
            sweep: SweepOrder::GaussSeidel,
            init: None,
            fast_phase_tol: 1e-6,
        }
    }
}

/// Vertex solution of the discrete functional equation.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl DiscreteSolution {
    pub fn value(&self, x: VertexId) -> f64 {
        self.values[x.0]
    }
}

/// Fold of the edge maps along a path.
pub fn rho_path(table: &EdgeMapTable, path: &Path, alpha: f64) -> Result<f64, DiscreteError> {
    let mut v = alpha;
    for &e in &path.edges {
        v = table.rho(v, e)?;
    }
    Ok(v)
}

/// The unique alpha with rho(alpha, path) = alpha, by bisection of the
/// strictly decreasing gap alpha -> rho(alpha, path) - alpha. Defined for
/// every path; the bracket is [c*, max saturation over the path's edges + 1].
pub fn path_fixed_point(table: &EdgeMapTable, path: &Path, tol: f64) -> Result<f64, DiscreteError> {
    // a small pad absorbs scheme error when the fixed point sits at an end
    let lo0 = table.lower_bound() - 1e-3;
    let hi0 = path
        .edges
        .iter()
        .map(|&e| table.map(e).upper_start())
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;
    let gap = |a: f64| -> Result<f64, DiscreteError> { Ok(rho_path(table, path, a)? - a) };
    let (mut lo, mut hi) = (lo0, hi0);
    if gap(lo)? < 0.0 || gap(hi)? > 0.0 {
        return Err(DiscreteError::BracketFailure { lo: lo0, hi: hi0 });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fixed point of a cycle (validates that the path closes up).
pub fn beta_cycle(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    cycle: &Path,
    tol: f64,
) -> Result<f64, DiscreteError> {
    if !graph.is_cycle(cycle) {
        return Err(DiscreteError::InvalidBackend(
            "beta is defined for cycles only".into(),
        ));
    }
    path_fixed_point(table, cycle, tol)
}

fn apply_operator(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    u: &[f64],
    x: VertexId,
    fast: bool,
) -> Result<f64, DiscreteError> {
    let mut best = f64::INFINITY;
    for &e in graph.incoming(x) {
        let a = u[graph.origin(e).0];
        let v = if fast {
            table.rho_fast(a, e)?
        } else {
            table.rho(a, e)?
        };
        best = best.min(v);
    }
    Ok(best)
}

/// Sup-norm gap between U and its image under the DFE operator.
fn dfe_residual(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    u: &[f64],
    fast: bool,
) -> Result<f64, DiscreteError> {
    let mut worst = 0.0f64;
    for x in graph.vertices() {
        let t = apply_operator(table, graph, u, x, fast)?;
        worst = worst.max((u[x.0] - t).abs());
    }
    Ok(worst)
}

/// Monotone value iteration for the discrete functional equation. Starting
/// from a constant supersolution the iterates decrease toward the unique
/// solution; the loop stops when both the step change and the residual drop
/// below tolerance.
pub fn solve_dfe(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    opts: &DfeOptions,
) -> Result<DiscreteSolution, DiscreteError> {
    let start = opts.init.unwrap_or_else(|| table.upper_start_all());
    let mut u = vec![start; graph.vertex_count()];
    let mut fast = true;
    let mut iterations = 0usize;
    loop {
        let mut change = 0.0f64;
        match opts.sweep {
            SweepOrder::GaussSeidel => {
                for x in graph.vertices() {
                    let v = apply_operator(table, graph, &u, x, fast)?;
                    change = change.max((u[x.0] - v).abs());
                    u[x.0] = v;
                }
            }
            SweepOrder::Jacobi => {
                let mut next = u.clone();
                for x in graph.vertices() {
                    let v = apply_operator(table, graph, &u, x, fast)?;
                    change = change.max((u[x.0] - v).abs());
                    next[x.0] = v;
                }
                u = next;
            }
        }
        iterations += 1;
        let gate = if fast {
            opts.fast_phase_tol.max(opts.tol)
        } else {
            opts.tol
        };
        if change < gate {
            if fast {
                // switch to exact maps and keep iterating
                fast = false;
                continue;
            }
            let residual = dfe_residual(table, graph, &u, false)?;
            if residual < opts.tol {
                return Ok(DiscreteSolution {
                    values: u,
                    iterations,
                    residual,
                });
            }
        }
        if iterations >= opts.max_iterations {
            let residual = dfe_residual(table, graph, &u, false)?;
            return Err(DiscreteError::NoConvergence {
                residual,
                iterations,
                partial: u,
            });
        }
    }
}

/// W(x) <= min over incoming of rho(W(o(e)), e) + slack at every vertex.
pub fn check_subsolution(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    w: &[f64],
    slack: f64,
) -> Result<bool, DiscreteError> {
    for x in graph.vertices() {
        if w[x.0] > apply_operator(table, graph, w, x, false)? + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn check_supersolution(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    w: &[f64],
    slack: f64,
) -> Result<bool, DiscreteError> {
    for x in graph.vertices() {
        if w[x.0] < apply_operator(table, graph, w, x, false)? - slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Min over circuits based at x of their fixed points; +infinity when no
/// circuit exists (impossible on connected graphs with nonempty in-stars).
/// An upper bound for the infimum over all cycles.
pub fn circuit_f(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    x: VertexId,
    beta_tol: f64,
    cap: usize,
) -> Result<f64, DiscreteError> {
    let mut best = f64::INFINITY;
    for c in graph.enumerate_circuits(x, cap)? {
        best = best.min(path_fixed_point(table, &c, beta_tol)?);
    }
    Ok(best)
}

/// Enumeration oracle: min over simple paths ending at x (plus the empty
/// path) of rho(circuit_f(origin), path). An upper bound for the solution;
/// exact whenever circuit_f matches the cycle infimum.
pub fn representation_u(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    x: VertexId,
    beta_tol: f64,
    cap: usize,
) -> Result<f64, DiscreteError> {
    let mut f_cache: Vec<Option<f64>> = vec![None; graph.vertex_count()];
    let mut f_at = |table: &EdgeMapTable, v: VertexId| -> Result<f64, DiscreteError> {
        if let Some(val) = f_cache[v.0] {
            return Ok(val);
        }
        let val = circuit_f(table, graph, v, beta_tol, cap)?;
        f_cache[v.0] = Some(val);
        Ok(val)
    };
    let mut best = f_at(table, x)?;
    for path in graph.enumerate_simple_paths(x, cap)? {
        let origin = graph.origin_of(&path);
        let base = f_at(table, origin)?;
        if base.is_finite() {
            best = best.min(rho_path(table, &path, base)?);
        }
    }
    Ok(best)
}

/// Loops whose removal cannot change the solution: U at the base vertex
/// sits strictly below the loop's fixed point. Diagnostic only.
pub fn removable_loops(
    table: &EdgeMapTable,
    graph: &OrientedGraph,
    u: &[f64],
    eps: f64,
    beta_tol: f64,
) -> Result<Vec<EdgeId>, DiscreteError> {
    let mut out = Vec::new();
    for e in graph.canonical_edges() {
        if graph.is_loop(e) {
            let beta = path_fixed_point(table, &Path::single(e), beta_tol)?;
            if u[graph.origin(e).0] < beta - eps {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// Seeded random (graph, affine table) instances for property tests and the
/// self-test command.
pub mod synthetic {
    use super::*;
    use crate::graph::GraphBuilder;
    use rand::Rng;

    pub fn random_instance(
        rng: &mut impl Rng,
        max_vertices: usize,
        max_extra_pairs: usize,
    ) -> (OrientedGraph, EdgeMapTable) {
        let nv = rng.gen_range(1..=max_vertices);
        let mut b = GraphBuilder::new();
        for i in 0..nv {
            b.add_vertex(&format!("v{i}")).unwrap();
        }
        let mut arcs = 0usize;
        // spanning path keeps the graph connected
        for i in 1..nv {
            b.add_arc(
                &format!("a{arcs}"),
                &format!("v{}", i - 1),
                &format!("v{i}"),
            )
            .unwrap();
            arcs += 1;
        }
        let extra = if nv == 1 {
            rng.gen_range(1..=max_extra_pairs.max(1))
        } else {
            rng.gen_range(0..=max_extra_pairs)
        };
        for _ in 0..extra {
            let from = rng.gen_range(0..nv);
            let to = rng.gen_range(0..nv);
            b.add_arc(&format!("a{arcs}"), &format!("v{from}"), &format!("v{to}"))
                .unwrap();
            arcs += 1;
        }
        let g = b.build().unwrap();
        let params: Vec<(f64, f64)> = (0..g.edge_count())
            .map(|_| (rng.gen_range(0.05..0.95), rng.gen_range(-2.0..2.0)))
            .collect();
        let t = EdgeMapTable::affine(&g, &params).unwrap();
        (g, t)
    }

    /// A random exact subsolution: pointwise max of shifted-down copies of
    /// the solution and constants below c* (both subsolutions, and the max
    /// of subsolutions is one), optionally pushed through the operator,
    /// which maps subsolutions to subsolutions.
    pub fn random_subsolution(
        rng: &mut impl Rng,
        table: &EdgeMapTable,
        graph: &OrientedGraph,
        u: &[f64],
    ) -> Vec<f64> {
        let shift = rng.gen_range(0.0..3.0);
        let c = table.lower_bound() - rng.gen_range(0.0..2.0);
        let mut w: Vec<f64> = u.iter().map(|v| (v - shift).max(c)).collect();
        for _ in 0..rng.gen_range(0..3usize) {
            let prev = w.clone();
            for x in graph.vertices() {
                w[x.0] = apply_operator(table, graph, &prev, x, false).unwrap();
            }
        }
        w
    }

    /// A random supersolution: lift the solution by a constant.
    pub fn random_supersolution(rng: &mut impl Rng, u: &[f64]) -> Vec<f64> {
        let lift = rng.gen_range(0.0..3.0);
        u.iter().map(|v| v + lift).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::ArcDiscretization;
    use crate::edge_map::EdgeMapTable;
    use crate::graph::GraphBuilder;
    use crate::hamiltonian::{HamiltonianSpec, Potential};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair_graph() -> OrientedGraph {
        let mut b = GraphBuilder::new();
        b.add_vertex("x").unwrap();
        b.add_vertex("y").unwrap();
        b.add_arc("e", "x", "y").unwrap();
        b.build().unwrap()
    }

    fn affine_pair(fwd: (f64, f64), bwd: (f64, f64)) -> (OrientedGraph, EdgeMapTable) {
        let g = pair_graph();
        let t = EdgeMapTable::affine(&g, &[fwd, bwd]).unwrap();
        (g, t)
    }

    #[test]
    fn rho_path_composition() {
        let (g, t) = affine_pair((0.5, 1.0), (0.5, 1.0));
        let e = g.edge_by_name("e").unwrap();
        let back_forth = g.path(vec![e, e.reverse()]).unwrap();
        assert_eq!(rho_path(&t, &back_forth, 0.0).unwrap(), 1.5);
        assert_eq!(
            rho_path(&t, &Path::single(e), 0.7).unwrap(),
            t.rho(0.7, e).unwrap()
        );
        // concatenation formula holds exactly
        let p = Path::single(e);
        let q = Path::single(e.reverse());
        let joined = g.concat(&p, &q).unwrap();
        let via = rho_path(&t, &q, rho_path(&t, &p, 0.3).unwrap()).unwrap();
        assert_eq!(rho_path(&t, &joined, 0.3).unwrap(), via);
    }

    #[test]
    fn beta_affine_and_numeric() {
        let (g, t) = affine_pair((0.5, 1.0), (0.5, 1.0));
        let e = g.edge_by_name("e").unwrap();
        let cyc = g.path(vec![e, e.reverse()]).unwrap();
        let beta = beta_cycle(&t, &g, &cyc, 1e-9).unwrap();
        assert!((beta - 2.0).abs() < 1e-9);
        assert!(beta_cycle(&t, &g, &Path::single(e), 1e-9).is_err());

        let spec = HamiltonianSpec::eikonal_power(1.0, Potential::constant(1.0)).unwrap();
        let disc = ArcDiscretization::with_n(800);
        let tn = EdgeMapTable::numeric(&g, &[spec], 1.0, &disc).unwrap();
        let beta = beta_cycle(&tn, &g, &cyc, 1e-9).unwrap();
        assert!((beta - 1.0).abs() < 1e-2);
        // the back-and-forth fixed point is the saturation threshold
        let au = tn.map(e).alpha_under().unwrap();
        assert!((beta - au).abs() < 1e-6);
    }

    #[test]
    fn dfe_hand_solved_instances() {
        let (g, t) = affine_pair((0.5, 1.0), (0.5, 1.0));
        let sol = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
        assert!((sol.values[0] - 2.0).abs() < 1e-9);
        assert!((sol.values[1] - 2.0).abs() < 1e-9);

        let (g, t) = affine_pair((0.5, 1.0), (0.5, 0.25));
        let sol = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
        let x = g.vertex_by_name("x").unwrap();
        let y = g.vertex_by_name("y").unwrap();
        assert!((sol.value(x) - 1.0).abs() < 1e-9);
        assert!((sol.value(y) - 1.5).abs() < 1e-9);
        assert!(sol.residual < 1e-10);

        let spec = HamiltonianSpec::eikonal_power(1.0, Potential::constant(1.0)).unwrap();
        let tn = EdgeMapTable::numeric(&g, &[spec], 1.0, &ArcDiscretization::with_n(800)).unwrap();
        let sol = solve_dfe(&tn, &g, &DfeOptions::default()).unwrap();
        assert!((sol.value(x) - 1.0).abs() < 1e-2);
        assert!((sol.value(y) - 1.0).abs() < 1e-2);
        // solution values never exceed the incoming saturation values
        for v in g.vertices() {
            let bound = g
                .incoming(v)
                .iter()
                .map(|&e| tn.map(e).alpha_over().unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(sol.value(v) <= bound + 1e-10);
        }
    }

    #[test]
    fn solution_passes_both_checks_and_bounds() {
        let (g, t) = affine_pair((0.5, 1.0), (0.5, 0.25));
        let sol = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
        assert!(check_subsolution(&t, &g, &sol.values, 1e-9).unwrap());
        assert!(check_supersolution(&t, &g, &sol.values, 1e-9).unwrap());
        // the global lower constant is a subsolution, the start constant a
        // supersolution
        let c = vec![t.lower_bound(); 2];
        assert!(check_subsolution(&t, &g, &c, 1e-12).unwrap());
        let top = vec![t.upper_start_all(); 2];
        assert!(check_supersolution(&t, &g, &top, 1e-12).unwrap());
    }

    #[test]
    fn circuit_f_and_representation() {
        let (g, t) = affine_pair((0.5, 1.0), (0.5, 0.25));
        let x = g.vertex_by_name("x").unwrap();
        let y = g.vertex_by_name("y").unwrap();
        let fx = circuit_f(&t, &g, x, 1e-10, 1000).unwrap();
        assert!((fx - 1.0).abs() < 1e-9);
        let rx = representation_u(&t, &g, x, 1e-10, 1000).unwrap();
        let ry = representation_u(&t, &g, y, 1e-10, 1000).unwrap();
        assert!((rx - 1.0).abs() < 1e-9);
        assert!((ry - 1.5).abs() < 1e-9);

        // loop pair: circuits at the base are the two loop orientations only
        let mut b = GraphBuilder::new();
        b.add_vertex("x").unwrap();
        b.add_arc("l", "x", "x").unwrap();
        let g = b.build().unwrap();
        let t = EdgeMapTable::affine(&g, &[(0.5, 1.0), (0.5, 2.0)]).unwrap();
        let x = g.vertex_by_name("x").unwrap();
        let f = circuit_f(&t, &g, x, 1e-10, 1000).unwrap();
        assert!((f - 2.0).abs() < 1e-9);
    }

    #[test]
    fn uniqueness_from_two_initializations() {
        let (g, t) = affine_pair((0.7, 0.3), (0.4, 1.1));
        let a = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
        let c = t.upper_start_all() + 100.0;
        let b = solve_dfe(
            &t,
            &g,
            &DfeOptions {
                init: Some(c),
                ..Default::default()
            },
        )
        .unwrap();
        for (v, w) in a.values.iter().zip(&b.values) {
            assert!((v - w).abs() < 1e-9);
        }
    }

    #[test]
    fn jacobi_iterates_are_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (g, t) = synthetic::random_instance(&mut rng, 5, 4);
            let start = t.upper_start_all();
            let mut u = vec![start; g.vertex_count()];
            for _ in 0..30 {
                let mut next = u.clone();
                for x in g.vertices() {
                    next[x.0] = apply_operator(&t, &g, &u, x, false).unwrap();
                }
                for (a, b) in u.iter().zip(&next) {
                    assert!(b <= &(a + 1e-12), "Jacobi iterate increased");
                }
                u = next;
            }
        }
    }

    #[test]
    fn comparison_principle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..60 {
            let (g, t) = synthetic::random_instance(&mut rng, 6, 5);
            let sol = solve_dfe(&t, &g, &DfeOptions::default()).unwrap();
            let w = synthetic::random_subsolution(&mut rng, &t, &g, &sol.values);
            let z = synthetic::random_supersolution(&mut rng, &sol.values);
            assert!(check_subsolution(&t, &g, &w, 1e-9).unwrap());
            assert!(check_supersolution(&t, &g, &z, 1e-9).unwrap());
            for (a, b) in w.iter().zip(&z) {
                assert!(a <= &(b + 1e-9), "comparison violated");
            }
            // the enumeration oracle upper-bounds the solution
            for x in g.vertices() {
                let r = representation_u(&t, &g, x, 1e-10, 100_000).unwrap();
                assert!(r >= sol.value(x) - 1e-8);
                let f = circuit_f(&t, &g, x, 1e-10, 100_000).unwrap();
                assert!(sol.value(x) <= f + 1e-8);
            }
        }
    }

    #[test]
    fn path_monotonicity_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..15 {
            let (g, t) = synthetic::random_instance(&mut rng, 5, 4);
            // random forward walk of length <= 5
            let start = VertexId(rng.gen_range(0..g.vertex_count()));
            let mut edges = Vec::new();
            let mut at = start;
            for _ in 0..rng.gen_range(1..=5usize) {
                let out: Vec<EdgeId> = g.edges().filter(|&e| g.origin(e) == at).collect();
                let e = out[rng.gen_range(0..out.len())];
                edges.push(e);
                at = g.terminal(e);
            }
            let path = g.path(edges).unwrap();
            let mut prev: Option<(f64, f64)> = None;
            for k in 0..12 {
                let a = -3.0 + 0.5 * k as f64;
                let r = rho_path(&t, &path, a).unwrap();
                if let Some((pa, pr)) = prev {
                    assert!(r >= pr - 1e-12, "rho along path not nondecreasing");
                    let gap_now = r - a;
                    let gap_prev = pr - pa;
                    assert!(gap_now < gap_prev - 1e-12, "gap not strictly decreasing");
                }
                prev = Some((a, r));
            }
        }
    }
}
