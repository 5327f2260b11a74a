//! Discounted Hamilton-Jacobi equations on networks of arbitrary geometry.
//!
//! The library couples two layers:
//!
//! * a 1D viscosity-solution solver for `lambda w + H(s, w') = 0` on a
//!   parameterized arc, with state-constraint and weak Dirichlet boundary
//!   conditions, producing monotone edge maps `alpha -> rho(alpha, e)`;
//! * a discrete fixed-point engine on the underlying oriented graph that
//!   computes the unique vertex solution of
//!   `U(x) = min over edges e ending at x of rho(U(o(e)), e)`,
//!   its Aubry-type set of distinguished vertices together with witness
//!   circuits, and the eikonal (`lambda -> 0`) limit structure: per-edge
//!   weights sigma, graph critical value and eikonal Aubry set.
//!
//! Edge maps are generic over backends: numeric (driven by the arc solver),
//! affine and tabulated (synthetic, for oracles and property tests).

pub mod arc;
pub mod aubry;
pub mod dfe;
pub mod edge_map;
pub mod eikonal;
pub mod extension;
pub mod graph;
pub mod hamiltonian;
pub mod io;

pub use arc::{ArcDiscretization, ArcProfile, BoundaryCondition, SolverError};
pub use aubry::AubryReport;
pub use dfe::{DfeOptions, DiscreteError, DiscreteSolution, SweepOrder};
pub use edge_map::{EdgeMap, EdgeMapTable};
pub use eikonal::{EikonalData, SweepConfig, SweepReport};
pub use graph::{EdgeId, GraphBuilder, GraphError, OrientedGraph, Path, VertexId};
pub use hamiltonian::{HamiltonianError, HamiltonianSpec, Potential, TabulatedGrid};
pub use io::{IoError, Network, NetworkFile};
