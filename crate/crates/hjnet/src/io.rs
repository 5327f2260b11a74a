//! Network file format (JSON), validation, and result emitters.
//!
//! One file format serves the discounted and eikonal commands; the discount
//! factor lives in the solver block, not in the Hamiltonians. Edge
//! declarations carry the canonical orientation; the reverse orientation is
//! synthesized through the compatibility rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arc::ArcDiscretization;
use crate::aubry::AubryReport;
use crate::dfe::DiscreteSolution;
use crate::eikonal::{EikonalData, SweepReport};
use crate::extension::ArcExtension;
use crate::graph::{GraphBuilder, OrientedGraph};
use crate::hamiltonian::{HamiltonianSpec, Potential, TabulatedGrid};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("invalid network: {0}")]
    GraphInvalid(String),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::SchemaError(format!("{e} (line {}, column {})", e.line(), e.column()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VertexDecl {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PotentialDecl {
    Constant { constant: f64 },
    Samples { samples: Vec<f64> },
}

impl PotentialDecl {
    fn build(&self) -> Result<Potential, IoError> {
        match self {
            PotentialDecl::Constant { constant } => Ok(Potential::constant(*constant)),
            PotentialDecl::Samples { samples } => Potential::from_samples(samples.clone())
                .map_err(|e| IoError::SchemaError(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianDecl {
    /// H = |p|^exponent - potential(s)
    EikonalPower {
        exponent: f64,
        potential: PotentialDecl,
    },
    /// H = (p - drift(s))^2 / 2 - potential(s)
    TiltedQuadratic {
        drift: PotentialDecl,
        potential: PotentialDecl,
    },
    /// bilinear table on [0,1] x [-p_max, p_max]
    Tabulated {
        p_max: f64,
        values: Vec<Vec<f64>>,
        coercive_slope: f64,
        #[serde(default)]
        quasiconvex: bool,
    },
}

impl HamiltonianDecl {
    pub fn build(&self) -> Result<HamiltonianSpec, IoError> {
        match self {
            HamiltonianDecl::EikonalPower {
                exponent,
                potential,
            } => HamiltonianSpec::eikonal_power(*exponent, potential.build()?)
                .map_err(|e| IoError::SchemaError(e.to_string())),
            HamiltonianDecl::TiltedQuadratic { drift, potential } => Ok(
                HamiltonianSpec::tilted_quadratic(drift.build()?, potential.build()?),
            ),
            HamiltonianDecl::Tabulated {
                p_max,
                values,
                coercive_slope,
                quasiconvex,
            } => HamiltonianSpec::tabulated(TabulatedGrid {
                p_max: *p_max,
                values: values.clone(),
                coercive_slope: *coercive_slope,
                quasiconvex: *quasiconvex,
            })
            .map_err(|e| IoError::SchemaError(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdgeDecl {
    pub id: String,
    pub from: String,
    pub to: String,
    pub hamiltonian: HamiltonianDecl,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CapsConfig {
    pub max_paths: usize,
    pub max_sweeps: usize,
    pub max_dfe_iterations: usize,
}

impl Default for CapsConfig {
    fn default() -> Self {
        CapsConfig {
            max_paths: 1_000_000,
            max_sweeps: 1_000_000,
            max_dfe_iterations: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub lambda: f64,
    pub grid_n: usize,
    pub tol: f64,
    pub eps_aubry: f64,
    pub quad_nodes: usize,
    pub caps: CapsConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 1.0,
            grid_n: 2000,
            tol: 1e-10,
            eps_aubry: 1e-6,
            quad_nodes: 1001,
            caps: CapsConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn discretization(&self) -> ArcDiscretization {
        ArcDiscretization {
            n: self.grid_n,
            tol: self.tol,
            max_sweeps: self.caps.max_sweeps,
        }
    }
}

/// The on-disk network description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub vertices: Vec<VertexDecl>,
    pub edges: Vec<EdgeDecl>,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// A validated network: the oriented graph plus one Hamiltonian per
/// canonical arc (reverses synthesized on demand).
pub struct Network {
    pub graph: OrientedGraph,
    pub specs: Vec<HamiltonianSpec>,
    pub solver: SolverConfig,
    pub coords: BTreeMap<String, Vec<f64>>,
}

/// Parses and validates a JSON network file.
pub fn parse(bytes: &[u8]) -> Result<NetworkFile, IoError> {
    let file: NetworkFile = serde_json::from_slice(bytes)?;
    validate(&file)?;
    Ok(file)
}

fn validate(file: &NetworkFile) -> Result<(), IoError> {
    let mut seen = std::collections::HashSet::new();
    for v in &file.vertices {
        if !seen.insert(&v.id) {
            return Err(IoError::SchemaError(format!(
                "duplicate vertex id {:?}",
                v.id
            )));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for e in &file.edges {
        if !seen.insert(&e.id) {
            return Err(IoError::SchemaError(format!(
                "duplicate edge id {:?}",
                e.id
            )));
        }
    }
    Ok(())
}

/// Serializes a network file back to JSON; parse(emit(f)) reproduces f.
pub fn emit(file: &NetworkFile) -> String {
    serde_json::to_string_pretty(file).expect("network files serialize")
}

impl NetworkFile {
    pub fn build(&self) -> Result<Network, IoError> {
        let mut b = GraphBuilder::new();
        for v in &self.vertices {
            b.add_vertex(&v.id)
                .map_err(|e| IoError::SchemaError(e.to_string()))?;
        }
        let mut specs = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            b.add_arc(&e.id, &e.from, &e.to)
                .map_err(|err| IoError::GraphInvalid(err.to_string()))?;
            specs.push(e.hamiltonian.build()?);
        }
        let graph = b
            .build()
            .map_err(|e| IoError::GraphInvalid(e.to_string()))?;
        let coords = self
            .vertices
            .iter()
            .filter_map(|v| v.coords.clone().map(|c| (v.id.clone(), c)))
            .collect();
        Ok(Network {
            graph,
            specs,
            solver: self.solver.clone(),
            coords,
        })
    }
}

/// 12 significant digits, the emitter convention for CSV output.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

pub fn solution_to_json(
    graph: &OrientedGraph,
    sol: &DiscreteSolution,
    lambda: f64,
) -> serde_json::Value {
    let values: BTreeMap<String, f64> = graph
        .vertices()
        .map(|x| (graph.vertex_name(x).to_owned(), sol.value(x)))
        .collect();
    serde_json::json!({
        "lambda": lambda,
        "vertices": values,
        "iterations": sol.iterations,
        "residual": sol.residual,
    })
}

pub fn aubry_to_json(graph: &OrientedGraph, rep: &AubryReport) -> serde_json::Value {
    let members: Vec<String> = rep
        .members
        .iter()
        .map(|&x| graph.vertex_name(x).to_owned())
        .collect();
    let witnesses: BTreeMap<String, Vec<String>> = rep
        .witnesses
        .iter()
        .map(|(x, p)| (graph.vertex_name(*x).to_owned(), graph.path_names(p)))
        .collect();
    let margins: BTreeMap<String, f64> = rep
        .margins
        .iter()
        .map(|(x, m)| (graph.vertex_name(*x).to_owned(), *m))
        .collect();
    serde_json::json!({
        "members": members,
        "witnesses": witnesses,
        "margins": margins,
        "epsilon": rep.epsilon,
    })
}

pub fn eikonal_to_json(graph: &OrientedGraph, data: &EikonalData) -> serde_json::Value {
    let sigma: BTreeMap<String, f64> = graph
        .edges()
        .map(|e| (graph.edge_name(e).to_owned(), data.sigma[e.0]))
        .collect();
    let aubry: Vec<String> = data
        .aubry
        .iter()
        .map(|&x| graph.vertex_name(x).to_owned())
        .collect();
    let witnesses: BTreeMap<String, Vec<String>> = data
        .witnesses
        .iter()
        .map(|(x, p)| (graph.vertex_name(*x).to_owned(), graph.path_names(p)))
        .collect();
    serde_json::json!({
        "critical_value": data.critical_value,
        "sigma": sigma,
        "aubry": aubry,
        "witnesses": witnesses,
    })
}

pub fn sweep_to_json(graph: &OrientedGraph, rep: &SweepReport) -> serde_json::Value {
    let sigma: BTreeMap<String, f64> = graph
        .edges()
        .map(|e| (graph.edge_name(e).to_owned(), rep.sigma[e.0]))
        .collect();
    let name = |x: &crate::graph::VertexId| graph.vertex_name(*x).to_owned();
    let per_lambda: Vec<serde_json::Value> = rep
        .per_lambda
        .iter()
        .map(|r| {
            let u: BTreeMap<String, f64> = graph
                .vertices()
                .map(|x| (graph.vertex_name(x).to_owned(), r.u[x.0]))
                .collect();
            let gaps: BTreeMap<String, Option<f64>> = graph
                .edges()
                .map(|e| (graph.edge_name(e).to_owned(), r.verano_gaps[e.0]))
                .collect();
            serde_json::json!({
                "lambda": r.lambda,
                "u": u,
                "aubry": r.aubry.iter().map(name).collect::<Vec<_>>(),
                "edge_gaps": gaps,
                "inclusion_in_eikonal_aubry": r.inclusion,
                "lambda_sup_u": r.lambda_sup_u,
                "gap_to_limit_candidate": r.gap_to_limit,
                "dfe_iterations": r.dfe_iterations,
                "dfe_residual": r.dfe_residual,
            })
        })
        .collect();
    let limit: BTreeMap<String, f64> = graph
        .vertices()
        .map(|x| (graph.vertex_name(x).to_owned(), rep.limit_candidate[x.0]))
        .collect();
    serde_json::json!({
        "critical_value": rep.critical_value,
        "sigma": sigma,
        "eikonal_aubry": rep.eikonal_aubry.iter().map(name).collect::<Vec<_>>(),
        "per_lambda": per_lambda,
        "inclusion_threshold": rep.inclusion_threshold,
        "limit_set": rep.limit_set.iter().map(name).collect::<Vec<_>>(),
        "limit_candidate": limit,
        "sottosuolo_violation": rep.sottosuolo_violation,
    })
}

/// CSV rows (edge_id, s, u) for every extended arc.
pub fn arcs_to_csv(graph: &OrientedGraph, arcs: &[ArcExtension]) -> String {
    let mut out = String::from("edge_id,s,u\n");
    for a in arcs {
        let name = graph.edge_name(a.edge);
        let n = a.profile.n();
        for (i, v) in a.profile.values.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                name,
                fmt_sig(i as f64 / n as f64),
                fmt_sig(*v)
            ));
        }
    }
    out
}

/// Plot-ready CSV: one row per (lambda, vertex).
pub fn sweep_to_csv(graph: &OrientedGraph, rep: &SweepReport) -> String {
    let mut out = String::from("lambda,vertex,u,in_aubry,gap_to_limit\n");
    for r in &rep.per_lambda {
        for x in graph.vertices() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_sig(r.lambda),
                graph.vertex_name(x),
                fmt_sig(r.u[x.0]),
                r.aubry.contains(&x),
                fmt_sig((r.u[x.0] - rep.limit_candidate[x.0]).abs()),
            ));
        }
    }
    out
}

/// CSV rows (s, u) for a single profile.
pub fn profile_to_csv(profile: &crate::arc::ArcProfile) -> String {
    let mut out = String::from("s,u\n");
    let n = profile.n();
    for (i, v) in profile.values.iter().enumerate() {
        out.push_str(&format!(
            "{},{}\n",
            fmt_sig(i as f64 / n as f64),
            fmt_sig(*v)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_file() -> &'static str {
        r#"{
            "vertices": [{"id": "x"}, {"id": "y", "coords": [1.0, 0.0]}],
            "edges": [
                {"id": "e", "from": "x", "to": "y",
                 "hamiltonian": {"family": "eikonal_power", "exponent": 1.0,
                                 "potential": {"constant": 1.0}}}
            ],
            "solver": {"lambda": 1.0}
        }"#
    }

    #[test]
    fn parses_and_builds_minimal_network() {
        let file = parse(minimal_file().as_bytes()).unwrap();
        let net = file.build().unwrap();
        assert_eq!(net.graph.vertex_count(), 2);
        assert_eq!(net.graph.edge_count(), 2);
        assert_eq!(net.solver.lambda, 1.0);
        assert_eq!(net.solver.grid_n, 2000);
        assert_eq!(net.coords.get("y"), Some(&vec![1.0, 0.0]));
    }

    #[test]
    fn rejects_bad_files() {
        let dup = r#"{"vertices": [{"id": "x"}], "edges": [
            {"id": "e", "from": "x", "to": "x",
             "hamiltonian": {"family": "eikonal_power", "exponent": 1.0, "potential": {"constant": 1.0}}},
            {"id": "e", "from": "x", "to": "x",
             "hamiltonian": {"family": "eikonal_power", "exponent": 1.0, "potential": {"constant": 1.0}}}
        ]}"#;
        assert!(matches!(
            parse(dup.as_bytes()),
            Err(IoError::SchemaError(_))
        ));

        let unknown_vertex = r#"{"vertices": [{"id": "x"}], "edges": [
            {"id": "e", "from": "x", "to": "nowhere",
             "hamiltonian": {"family": "eikonal_power", "exponent": 1.0, "potential": {"constant": 1.0}}}
        ]}"#;
        let f = parse(unknown_vertex.as_bytes()).unwrap();
        assert!(matches!(f.build(), Err(IoError::GraphInvalid(_))));

        assert!(parse(b"{not json").is_err());
    }

    #[test]
    fn round_trip_preserves_content() {
        let file = parse(minimal_file().as_bytes()).unwrap();
        let again = parse(emit(&file).as_bytes()).unwrap();
        assert_eq!(file, again);
    }

    #[test]
    fn significant_digit_format() {
        assert_eq!(fmt_sig(1.0), "1.00000000000e0");
        assert!(fmt_sig(0.6321205588285577).starts_with("6.3212055882"));
    }
}
