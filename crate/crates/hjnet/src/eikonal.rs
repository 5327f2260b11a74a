//! The vanishing-discount layer: per-edge weights sigma(e) (the value at 1 of
//! the maximal subsolution of H = a vanishing at 0), the graph critical value
//! (smallest admissible level with no negative circuit), the eikonal
//! distinguished set (zero circuits), path-additive shortest-path solutions
//! of the limit equation, and the lambda-sweep harness that tracks the
//! discounted layer against these limit objects.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::arc::ArcDiscretization;
use crate::aubry::{detect_aubry, AubryReport};
use crate::dfe::{solve_dfe, DfeOptions, DiscreteError, DiscreteSolution};
use crate::edge_map::EdgeMapTable;
use crate::graph::{OrientedGraph, Path, VertexId};
use crate::hamiltonian::HamiltonianSpec;

/// sigma(e) = integral over [0,1] of the upper sublevel root of H(s,.) = a,
/// by composite Simpson quadrature. Requires the eikonal-admissible families
/// with a level-independent in-p minimum.
pub fn sigma_edge(spec: &HamiltonianSpec, a: f64, quad_nodes: usize) -> Result<f64, DiscreteError> {
    spec.eikonal_eligible()?;
    spec.h4_check()?;
    let m = if quad_nodes % 2 == 1 {
        quad_nodes
    } else {
        quad_nodes + 1
    }
    .max(3);
    let h = 1.0 / (m - 1) as f64;
    let mut acc = 0.0f64;
    for k in 0..m {
        let s = k as f64 * h;
        let w = if k == 0 || k == m - 1 {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * spec.upper_root(s, a)?;
    }
    Ok(acc * h / 3.0)
}

/// Quadrature of the lower root, the mirror quantity entering reversal
/// identities; exposed for cross-checks.
pub fn lower_root_integral(
    spec: &HamiltonianSpec,
    a: f64,
    quad_nodes: usize,
) -> Result<f64, DiscreteError> {
    spec.eikonal_eligible()?;
    let m = if quad_nodes % 2 == 1 {
        quad_nodes
    } else {
        quad_nodes + 1
    }
    .max(3);
    let h = 1.0 / (m - 1) as f64;
    let mut acc = 0.0f64;
    for k in 0..m {
        let s = k as f64 * h;
        let w = if k == 0 || k == m - 1 {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * spec.lower_root(s, a)?;
    }
    Ok(acc * h / 3.0)
}

pub fn sigma_path(sigma: &[f64], path: &Path) -> f64 {
    path.edges.iter().map(|e| sigma[e.0]).sum()
}

/// Bellman-Ford negative-circuit probe: all-zero initialization (virtual
/// source), |V| relaxation rounds, then one detection round.
fn has_negative_circuit(graph: &OrientedGraph, weights: &[f64], tol: f64) -> bool {
    let nv = graph.vertex_count();
    let mut dist = vec![0.0f64; nv];
    for _ in 0..nv {
        let mut changed = false;
        for e in graph.edges() {
            let cand = dist[graph.origin(e).0] + weights[e.0];
            if cand < dist[graph.terminal(e).0] - tol {
                dist[graph.terminal(e).0] = cand;
                changed = true;
            }
        }
        if !changed {
            return false;
        }
    }
    for e in graph.edges() {
        if dist[graph.origin(e).0] + weights[e.0] < dist[graph.terminal(e).0] - tol {
            return true;
        }
    }
    false
}

fn oriented_specs(specs: &[HamiltonianSpec]) -> Vec<HamiltonianSpec> {
    specs
        .iter()
        .flat_map(|s| [s.clone(), s.reverse()])
        .collect()
}

fn sigma_all(
    oriented: &[HamiltonianSpec],
    a: f64,
    quad_nodes: usize,
) -> Result<Vec<f64>, DiscreteError> {
    oriented
        .par_iter()
        .map(|s| sigma_edge(s, a, quad_nodes))
        .collect()
}

/// Smallest level a >= max over arcs of (max_s min_p H) at which no circuit
/// carries negative total weight; the existence barrier can bind before the
/// circuit constraint, which is why this is a bisection over sigma rather
/// than a cycle-mean formula.
pub fn critical_value(
    graph: &OrientedGraph,
    specs: &[HamiltonianSpec],
    quad_nodes: usize,
    tol: f64,
) -> Result<f64, DiscreteError> {
    let oriented = oriented_specs(specs);
    let mut a_min = f64::NEG_INFINITY;
    for s in &oriented {
        a_min = a_min.max(s.a_gamma()?);
    }
    let admissible = |a: f64| -> Result<bool, DiscreteError> {
        let w = sigma_all(&oriented, a, quad_nodes)?;
        Ok(!has_negative_circuit(graph, &w, 1e-12))
    };
    if admissible(a_min)? {
        return Ok(a_min);
    }
    let mut step = 1.0f64;
    let mut hi = a_min + step;
    while !admissible(hi)? {
        step *= 2.0;
        hi += step;
        if step > 1e12 {
            return Err(DiscreteError::InvalidBackend(
                "no admissible level found below cap".into(),
            ));
        }
    }
    let mut lo = a_min;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if admissible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Vertices carrying a circuit of (near) zero total weight, with witnesses.
pub fn eikonal_aubry(
    graph: &OrientedGraph,
    sigma: &[f64],
    tol: f64,
    cap: usize,
) -> Result<(Vec<VertexId>, BTreeMap<VertexId, Path>), DiscreteError> {
    let mut members = Vec::new();
    let mut witnesses = BTreeMap::new();
    for y in graph.vertices() {
        let mut best: Option<(f64, Path)> = None;
        for c in graph.enumerate_circuits(y, cap)? {
            let w = sigma_path(sigma, &c).abs();
            if best.as_ref().is_none_or(|(b, _)| w < *b) {
                best = Some((w, c));
            }
        }
        if let Some((w, c)) = best {
            if w <= tol {
                members.push(y);
                witnesses.insert(y, c);
            }
        }
    }
    Ok((members, witnesses))
}

/// Multi-source shortest-path solution of the limit equation:
/// V(x) = min over members y and paths from y to x of trace(y) + sigma(path).
/// The trace must satisfy trace(y') - trace(y) <= sigma of every path between
/// members (checked with the given slack).
pub fn solve_eikonal_dfe(
    graph: &OrientedGraph,
    sigma: &[f64],
    trace: &BTreeMap<VertexId, f64>,
    slack: f64,
) -> Result<Vec<f64>, DiscreteError> {
    if trace.is_empty() {
        return Err(DiscreteError::TraceIncompatible("empty trace".into()));
    }
    let nv = graph.vertex_count();
    // pairwise compatibility via single-source relaxations from each member
    for (&y, &ty) in trace {
        let mut dist = vec![f64::INFINITY; nv];
        dist[y.0] = 0.0;
        for _ in 0..nv {
            for e in graph.edges() {
                let d = dist[graph.origin(e).0] + sigma[e.0];
                if d < dist[graph.terminal(e).0] {
                    dist[graph.terminal(e).0] = d;
                }
            }
        }
        for (&z, &tz) in trace {
            if tz - ty > dist[z.0] + slack {
                return Err(DiscreteError::TraceIncompatible(format!(
                    "trace({}) - trace({}) = {} exceeds path weight {}",
                    graph.vertex_name(z),
                    graph.vertex_name(y),
                    tz - ty,
                    dist[z.0]
                )));
            }
        }
    }
    let mut v = vec![f64::INFINITY; nv];
    for (&y, &ty) in trace {
        v[y.0] = ty;
    }
    for _ in 0..nv {
        for e in graph.edges() {
            let d = v[graph.origin(e).0] + sigma[e.0];
            if d < v[graph.terminal(e).0] {
                v[graph.terminal(e).0] = d;
            }
        }
    }
    Ok(v)
}

/// Per-edge, per-level data of the limit layer.
#[derive(Debug, Clone)]
pub struct EikonalData {
    pub critical_value: f64,
    /// per oriented edge, at the critical level (post-normalization level 0)
    pub sigma: Vec<f64>,
    pub aubry: Vec<VertexId>,
    pub witnesses: BTreeMap<VertexId, Path>,
}

/// Critical level, weights and distinguished set in one pass.
pub fn eikonal_data(
    graph: &OrientedGraph,
    specs: &[HamiltonianSpec],
    quad_nodes: usize,
    critical_tol: f64,
    zero_tol: f64,
    cap: usize,
) -> Result<EikonalData, DiscreteError> {
    let a = critical_value(graph, specs, quad_nodes, critical_tol)?;
    let oriented = oriented_specs(specs);
    let sigma = sigma_all(&oriented, a, quad_nodes)?;
    let (aubry, witnesses) = eikonal_aubry(graph, &sigma, zero_tol, cap)?;
    Ok(EikonalData {
        critical_value: a,
        sigma,
        aubry,
        witnesses,
    })
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub disc: ArcDiscretization,
    pub quad_nodes: usize,
    pub eps_aubry: f64,
    pub beta_tol: f64,
    pub dfe: DfeOptions,
    pub path_cap: usize,
    /// Levels sigma is computed at: None runs critical_value and shifts the
    /// potentials so the critical value is 0; Some(a) asserts a as critical
    /// (Some(0.0) for a pre-normalized network).
    pub critical_override: Option<f64>,
    /// Probe for the per-edge convergence gap; default is the global
    /// subsolution constant of the shifted network at each lambda.
    pub probe: Option<f64>,
    pub critical_tol: f64,
    pub zero_tol: f64,
    /// Trace-compatibility slack for the limit candidate.
    pub trace_slack: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            disc: ArcDiscretization::default(),
            quad_nodes: 1001,
            eps_aubry: 1e-6,
            beta_tol: 1e-9,
            dfe: DfeOptions::default(),
            path_cap: 1_000_000,
            critical_override: None,
            probe: None,
            critical_tol: 1e-8,
            zero_tol: 1e-7,
            trace_slack: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LambdaReport {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub dfe_iterations: usize,
    pub dfe_residual: f64,
    pub aubry: Vec<VertexId>,
    /// per oriented edge |rho(probe, e) - probe - sigma(e)|; None where the
    /// probe fails the admissibility condition probe <= alpha_under(e)
    pub verano_gaps: Vec<Option<f64>>,
    pub inclusion: bool,
    pub lambda_sup_u: f64,
    /// filled once the limit candidate exists
    pub gap_to_limit: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// critical value of the input network (0 when overridden as normalized)
    pub critical_value: f64,
    pub sigma: Vec<f64>,
    pub eikonal_aubry: Vec<VertexId>,
    pub per_lambda: Vec<LambdaReport>,
    /// largest listed lambda such that inclusion holds for it and every
    /// smaller listed lambda
    pub inclusion_threshold: Option<f64>,
    pub limit_set: Vec<VertexId>,
    pub limit_candidate: Vec<f64>,
    /// max over edges of V(t(e)) - V(o(e)) - sigma(e)
    pub sottosuolo_violation: f64,
    pub probe: f64,
}

/// Runs the discounted layer across a descending list of discount factors on
/// the normalized network and reports the distance to the limit objects:
/// per-edge map gaps against sigma, inclusion of the discounted
/// distinguished sets in the eikonal one, the scaled sup of the solutions,
/// and the shortest-path limit candidate built from the smallest lambda.
pub fn lambda_sweep(
    graph: &OrientedGraph,
    specs: &[HamiltonianSpec],
    lambdas: &[f64],
    cfg: &SweepConfig,
) -> Result<SweepReport, DiscreteError> {
    for s in specs {
        s.eikonal_eligible()?;
        s.h4_check()?;
    }
    if lambdas.is_empty() {
        return Err(DiscreteError::InvalidBackend("empty lambda list".into()));
    }
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let a_star = match cfg.critical_override {
        Some(a) => a,
        None => critical_value(graph, specs, cfg.quad_nodes, cfg.critical_tol)?,
    };
    let shifted: Vec<HamiltonianSpec> = specs.iter().map(|s| s.shift_level(a_star)).collect();
    let oriented = oriented_specs(&shifted);
    let sigma = sigma_all(&oriented, 0.0, cfg.quad_nodes)?;
    let (aubry, _witness) = eikonal_aubry(graph, &sigma, cfg.zero_tol, cfg.path_cap)?;

    let mut per_lambda: Vec<LambdaReport> = lambdas
        .par_iter()
        .map(|&lambda| -> Result<LambdaReport, DiscreteError> {
            let table = EdgeMapTable::numeric(graph, &shifted, lambda, &cfg.disc)?;
            let sol: DiscreteSolution = solve_dfe(&table, graph, &cfg.dfe)?;
            let rep: AubryReport = detect_aubry(
                &table,
                graph,
                &sol.values,
                cfg.eps_aubry,
                cfg.beta_tol,
                cfg.path_cap,
            )?;
            let probe = cfg.probe.unwrap_or_else(|| table.lower_bound());
            let mut gaps = Vec::with_capacity(graph.edge_count());
            for e in graph.edges() {
                let au = table.map(e).alpha_under().unwrap_or(f64::INFINITY);
                if probe <= au + 1e-9 {
                    let r = table.rho(probe, e)?;
                    gaps.push(Some((r - probe - sigma[e.0]).abs()));
                } else {
                    gaps.push(None);
                }
            }
            let inclusion = rep.members.iter().all(|m| aubry.contains(m));
            let sup_u = sol.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(LambdaReport {
                lambda,
                u: sol.values,
                dfe_iterations: sol.iterations,
                dfe_residual: sol.residual,
                aubry: rep.members,
                verano_gaps: gaps,
                inclusion,
                lambda_sup_u: lambda * sup_u,
                gap_to_limit: f64::NAN,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let inclusion_threshold = {
        let mut best = None;
        for r in per_lambda.iter().rev() {
            if r.inclusion {
                best = Some(r.lambda);
            } else {
                break;
            }
        }
        best
    };

    // limit candidate from the smallest lambda
    let last = per_lambda.last().expect("nonempty");
    let limit_set = last.aubry.clone();
    let trace: BTreeMap<VertexId, f64> = limit_set.iter().map(|&y| (y, last.u[y.0])).collect();
    let limit_candidate = solve_eikonal_dfe(graph, &sigma, &trace, cfg.trace_slack)?;
    let mut sotto = f64::NEG_INFINITY;
    for e in graph.edges() {
        sotto = sotto.max(
            limit_candidate[graph.terminal(e).0] - limit_candidate[graph.origin(e).0] - sigma[e.0],
        );
    }
    let probe_used = cfg.probe.unwrap_or(f64::NAN);
    for r in per_lambda.iter_mut() {
        r.gap_to_limit =
            r.u.iter()
                .zip(&limit_candidate)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
    }

    Ok(SweepReport {
        critical_value: a_star,
        sigma,
        eikonal_aubry: aubry,
        per_lambda,
        inclusion_threshold,
        limit_set,
        limit_candidate,
        sottosuolo_violation: sotto,
        probe: probe_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::hamiltonian::Potential;

    fn abs_minus(c: f64) -> HamiltonianSpec {
        HamiltonianSpec::eikonal_power(1.0, Potential::constant(c)).unwrap()
    }

    fn pair_graph() -> OrientedGraph {
        let mut b = GraphBuilder::new();
        b.add_vertex("x").unwrap();
        b.add_vertex("y").unwrap();
        b.add_arc("e", "x", "y").unwrap();
        b.build().unwrap()
    }

    #[test]
    fn sigma_closed_forms() {
        let spec = abs_minus(1.0);
        assert!((sigma_edge(&spec, 0.0, 1001).unwrap() - 1.0).abs() < 1e-10);
        assert!((sigma_edge(&spec, -0.5, 1001).unwrap() - 0.5).abs() < 1e-10);

        let tilted =
            HamiltonianSpec::tilted_quadratic(Potential::constant(1.0), Potential::constant(0.0));
        assert!((sigma_edge(&tilted, 0.5, 1001).unwrap() - 2.0).abs() < 1e-8);
        assert!((sigma_edge(&tilted.reverse(), 0.5, 1001).unwrap() - 0.0).abs() < 1e-8);
        // reversal consistency: sigma of the reverse equals minus the lower
        // root integral of the forward spec
        let li = lower_root_integral(&tilted, 0.5, 1001).unwrap();
        assert!((sigma_edge(&tilted.reverse(), 0.5, 1001).unwrap() + li).abs() < 1e-8);
    }

    #[test]
    fn critical_value_barrier_binds() {
        let g = pair_graph();
        let a = critical_value(&g, &[abs_minus(1.0)], 1001, 1e-8).unwrap();
        assert!((a + 1.0).abs() < 1e-6);
        let oriented = oriented_specs(&[abs_minus(1.0)]);
        let sigma = sigma_all(&oriented, a, 1001).unwrap();
        let (members, wit) = eikonal_aubry(&g, &sigma, 1e-7, 1000).unwrap();
        assert_eq!(members.len(), 2);
        for (_, c) in wit {
            assert!((sigma_path(&sigma, &c)).abs() < 1e-7);
        }
    }

    #[test]
    fn parallel_pairs_critical_and_aubry() {
        let mut b = GraphBuilder::new();
        b.add_vertex("x").unwrap();
        b.add_vertex("y").unwrap();
        b.add_arc("e2", "x", "y").unwrap();
        b.add_arc("e3", "x", "y").unwrap();
        let g = b.build().unwrap();
        let specs = vec![abs_minus(2.0), abs_minus(3.0)];
        let a = critical_value(&g, &specs, 1001, 1e-8).unwrap();
        assert!((a + 2.0).abs() < 1e-6);
        let sigma = sigma_all(&oriented_specs(&specs), a, 1001).unwrap();
        let e2 = g.edge_by_name("e2").unwrap();
        let e3 = g.edge_by_name("e3").unwrap();
        assert!(sigma[e2.0].abs() < 1e-7);
        assert!((sigma[e3.0] - 1.0).abs() < 1e-6);
        let (members, _) = eikonal_aubry(&g, &sigma, 1e-7, 1000).unwrap();
        assert_eq!(members.len(), 2);
        // the existence barrier binds here: below it the roots vanish
        assert!(sigma_all(&oriented_specs(&specs), a - 0.01, 1001).is_err());
    }

    #[test]
    fn circuit_constraint_binds_above_barrier() {
        // opposite drifts: H_A = (p-1)^2/2, H_B = (p+1)^2/2 on parallel arcs.
        // Roots exist for every a >= 0 but the mixed circuit (eB, -eA) has
        // weight 2 sqrt(2a) - 2, so the critical level is 1/2.
        let mut b = GraphBuilder::new();
        b.add_vertex("x").unwrap();
        b.add_vertex("y").unwrap();
        b.add_arc("ea", "x", "y").unwrap();
        b.add_arc("eb", "x", "y").unwrap();
        let g = b.build().unwrap();
        let specs = vec![
            HamiltonianSpec::tilted_quadratic(Potential::constant(1.0), Potential::constant(0.0)),
            HamiltonianSpec::tilted_quadratic(Potential::constant(-1.0), Potential::constant(0.0)),
        ];
        let a = critical_value(&g, &specs, 1001, 1e-8).unwrap();
        assert!((a - 0.5).abs() < 1e-6, "critical {a}");
        // slightly below: roots still exist and a negative circuit shows up
        let sigma_low = sigma_all(&oriented_specs(&specs), a - 0.01, 1001).unwrap();
        assert!(has_negative_circuit(&g, &sigma_low, 1e-12));
        let sigma = sigma_all(&oriented_specs(&specs), a, 1001).unwrap();
        assert!(!has_negative_circuit(&g, &sigma, 1e-12));
        let (members, _) = eikonal_aubry(&g, &sigma, 1e-6, 1000).unwrap();
        assert_eq!(members.len(), 2);
    }

    #[test]
    fn negative_circuit_detection_at_level_edges() {
        let g = pair_graph();
        let spec = abs_minus(1.0);
        let oriented = oriented_specs(&[spec.clone()]);
        let sigma = sigma_all(&oriented, -1.0 + 1e-9, 1001).unwrap();
        assert!(!has_negative_circuit(&g, &sigma, 1e-12));
        // below the barrier the roots cease to exist
        assert!(sigma_all(&oriented, -1.01, 1001).is_err());
    }

    #[test]
    fn eikonal_dfe_and_trace_validation() {
        // loop with a hand-set zero weight
        let mut b = GraphBuilder::new();
        b.add_vertex("x").unwrap();
        b.add_arc("l", "x", "x").unwrap();
        let g = b.build().unwrap();
        let sigma = vec![0.0, 0.5];
        let (members, _) = eikonal_aubry(&g, &sigma, 1e-9, 100).unwrap();
        assert_eq!(members, vec![g.vertex_by_name("x").unwrap()]);

        // two parallel pairs, c = 2 and c = 3 shifted to critical: weights
        // 0 and 1 per orientation
        let mut b = GraphBuilder::new();
        b.add_vertex("x").unwrap();
        b.add_vertex("y").unwrap();
        b.add_arc("e2", "x", "y").unwrap();
        b.add_arc("e3", "x", "y").unwrap();
        let g = b.build().unwrap();
        let sigma = vec![0.0, 0.0, 1.0, 1.0];
        let x = g.vertex_by_name("x").unwrap();
        let y = g.vertex_by_name("y").unwrap();
        let trace: BTreeMap<VertexId, f64> = [(x, 0.0), (y, 0.0)].into();
        let v = solve_eikonal_dfe(&g, &sigma, &trace, 1e-9).unwrap();
        assert!(v[x.0].abs() < 1e-12 && v[y.0].abs() < 1e-12);

        let bad: BTreeMap<VertexId, f64> = [(x, 0.0), (y, 0.5)].into();
        assert!(matches!(
            solve_eikonal_dfe(&g, &sigma, &bad, 1e-9),
            Err(DiscreteError::TraceIncompatible(_))
        ));
    }

    #[test]
    fn sweep_normalized_single_edge_gaps() {
        // pre-normalized reading: sigma at level 0 with the raw Hamiltonian
        let g = pair_graph();
        let lambdas = [0.4, 0.2, 0.1, 0.05];
        let cfg = SweepConfig {
            disc: ArcDiscretization::with_n(2000),
            critical_override: Some(0.0),
            probe: Some(0.0),
            ..Default::default()
        };
        let rep = lambda_sweep(&g, &[abs_minus(1.0)], &lambdas, &cfg).unwrap();
        assert!((rep.sigma[0] - 1.0).abs() < 1e-9);
        let expected = [0.1758, 0.0935, 0.04837, 0.02459];
        for (r, want) in rep.per_lambda.iter().zip(expected) {
            let gap = r.verano_gaps[0].unwrap();
            assert!((gap - want).abs() < 1e-2, "lambda {}: {gap}", r.lambda);
        }
        // gaps roughly halve with lambda
        for w in rep.per_lambda.windows(2) {
            let ratio = w[0].verano_gaps[0].unwrap() / w[1].verano_gaps[0].unwrap();
            assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn sweep_auto_normalization_single_edge() {
        let g = pair_graph();
        let cfg = SweepConfig {
            disc: ArcDiscretization::with_n(1000),
            ..Default::default()
        };
        let rep = lambda_sweep(&g, &[abs_minus(1.0)], &[0.4, 0.2], &cfg).unwrap();
        assert!((rep.critical_value + 1.0).abs() < 1e-6);
        // after the shift both orientations carry zero weight and both
        // vertices are in every distinguished set
        assert!(rep.sigma.iter().all(|s| s.abs() < 1e-6));
        assert_eq!(rep.eikonal_aubry.len(), 2);
        for r in &rep.per_lambda {
            assert_eq!(r.aubry.len(), 2);
            assert!(r.inclusion);
            assert!(r.lambda_sup_u < 1e-6);
        }
        assert_eq!(rep.inclusion_threshold, Some(0.4));
        assert!(rep.sottosuolo_violation < 1e-9);
    }
}
