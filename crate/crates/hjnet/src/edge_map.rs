//! Edge maps alpha -> rho(alpha, e) and their per-graph tables.
//!
//! The discrete layer only sees two axioms: rho is nondecreasing and
//! rho(alpha) - alpha is strictly decreasing. Three backends provide them:
//!
//! * numeric: rho(alpha) is the right endpoint of the capped maximal
//!   subsolution computed by the arc solver, with exact saturation
//!   rho = alpha_over for alpha >= alpha_under;
//! * affine: rho = a alpha + b with 0 < a < 1 (synthetic, exact);
//! * tabulated: monotone samples with piecewise-linear interpolation,
//!   segment slopes in [0, 1).
//!
//! Numeric maps memoize a 1e-2 alpha-grid with linear interpolation for bulk
//! iteration and keep a small pool of converged profiles as warm starts for
//! exact re-solves.

use std::collections::BTreeMap;
use std::sync::Mutex;

use thiserror::Error;

use crate::arc::{solve_arc, ArcDiscretization, ArcProfile, BoundaryCondition, SolverError};
use crate::graph::{EdgeId, GraphError, OrientedGraph};
use crate::hamiltonian::HamiltonianSpec;

#[derive(Debug, Error)]
pub enum DiscreteError {
    #[error("invalid edge map: {0}")]
    InvalidBackend(String),
    #[error("fixed-point bracket failed on [{lo}, {hi}]: backend violates the edge-map axioms")]
    BracketFailure { lo: f64, hi: f64 },
    #[error(
        "value iteration did not converge: residual {residual:e} after {iterations} iterations"
    )]
    NoConvergence {
        residual: f64,
        iterations: usize,
        partial: Vec<f64>,
    },
    #[error("no vertex qualifies as Aubry at tolerance {0:e}; tolerance is below numerical noise")]
    EmptyAubry(f64),
    #[error("trace incompatible with edge weights: {0}")]
    TraceIncompatible(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Hamiltonian(#[from] crate::hamiltonian::HamiltonianError),
}

const MEMO_STEP: f64 = 1e-2;
const WARM_POOL: usize = 6;

struct MemoState {
    grid: BTreeMap<i64, f64>,
    profiles: Vec<(f64, Vec<f64>)>,
}

/// Numeric backend: one oriented edge, one Hamiltonian.
pub struct NumericEdgeMap {
    spec: HamiltonianSpec,
    lambda: f64,
    disc: ArcDiscretization,
    alpha_under: f64,
    alpha_over: f64,
    umax: Vec<f64>,
    /// grid memoization floor: exact re-solves below this
    memo_floor: f64,
    memo: Mutex<MemoState>,
}

impl NumericEdgeMap {
    pub fn build(
        spec: HamiltonianSpec,
        lambda: f64,
        disc: &ArcDiscretization,
        memo_floor: f64,
    ) -> Result<NumericEdgeMap, SolverError> {
        let umax = solve_arc(
            &spec,
            lambda,
            BoundaryCondition::StateConstraint,
            BoundaryCondition::StateConstraint,
            disc,
            None,
        )?;
        Ok(NumericEdgeMap {
            lambda,
            disc: disc.clone(),
            alpha_under: umax.left(),
            alpha_over: umax.right(),
            umax: umax.values,
            memo_floor,
            memo: Mutex::new(MemoState {
                grid: BTreeMap::new(),
                profiles: Vec::new(),
            }),
            spec,
        })
    }

    pub fn alpha_under(&self) -> f64 {
        self.alpha_under
    }

    pub fn alpha_over(&self) -> f64 {
        self.alpha_over
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    fn solve_at(&self, alpha: f64) -> Result<ArcProfile, SolverError> {
        let warm: Option<Vec<f64>> = {
            let memo = self.memo.lock().unwrap();
            memo.profiles
                .iter()
                .min_by(|a, b| {
                    (a.0 - alpha)
                        .abs()
                        .partial_cmp(&(b.0 - alpha).abs())
                        .unwrap()
                })
                .map(|(_, p)| p.clone())
                .or_else(|| Some(self.umax.clone()))
        };
        let prof = solve_arc(
            &self.spec,
            self.lambda,
            BoundaryCondition::DirichletLeq(alpha),
            BoundaryCondition::StateConstraint,
            &self.disc,
            warm.as_deref(),
        )?;
        let mut memo = self.memo.lock().unwrap();
        if memo.profiles.len() >= WARM_POOL {
            // drop the entry farthest from the new alpha
            if let Some(idx) = memo
                .profiles
                .iter()
                .enumerate()
                .max_by(|a, b| {
                    (a.1 .0 - alpha)
                        .abs()
                        .partial_cmp(&(b.1 .0 - alpha).abs())
                        .unwrap()
                })
                .map(|(i, _)| i)
            {
                memo.profiles.swap_remove(idx);
            }
        }
        memo.profiles.push((alpha, prof.values.clone()));
        Ok(prof)
    }

    /// Exact edge map with saturation.
    pub fn rho(&self, alpha: f64) -> Result<f64, SolverError> {
        if alpha >= self.alpha_under {
            return Ok(self.alpha_over);
        }
        Ok(self.solve_at(alpha)?.right())
    }

    /// The full capped profile (exact path).
    pub fn profile(&self, alpha: f64) -> Result<ArcProfile, SolverError> {
        self.solve_at(alpha)
    }

    fn grid_value(&self, k: i64) -> Result<f64, SolverError> {
        if let Some(v) = self.memo.lock().unwrap().grid.get(&k) {
            return Ok(*v);
        }
        let alpha = self.alpha_under - k as f64 * MEMO_STEP;
        let v = if k == 0 {
            self.alpha_over
        } else {
            self.solve_at(alpha)?.right()
        };
        self.memo.lock().unwrap().grid.insert(k, v);
        Ok(v)
    }

    /// Memoized edge map: linear interpolation on the alpha grid anchored at
    /// the saturation threshold; exact re-solve below the floor.
    pub fn rho_fast(&self, alpha: f64) -> Result<f64, SolverError> {
        if alpha >= self.alpha_under {
            return Ok(self.alpha_over);
        }
        if alpha < self.memo_floor {
            return self.rho(alpha);
        }
        let t = (self.alpha_under - alpha) / MEMO_STEP;
        let k = t.floor() as i64;
        let frac = t - k as f64;
        let lo = self.grid_value(k + 1)?;
        let hi = self.grid_value(k)?;
        Ok(hi * (1.0 - frac) + lo * frac)
    }
}

/// Monotone sample table: strictly increasing alphas, nondecreasing values,
/// per-segment slopes in [0, 1); end slopes extend the table.
#[derive(Debug, Clone)]
pub struct MonotoneTable {
    alphas: Vec<f64>,
    values: Vec<f64>,
}

impl MonotoneTable {
    pub fn new(alphas: Vec<f64>, values: Vec<f64>) -> Result<MonotoneTable, DiscreteError> {
        if alphas.len() != values.len() || alphas.len() < 2 {
            return Err(DiscreteError::InvalidBackend(
                "tabulated map needs at least 2 aligned samples".into(),
            ));
        }
        for w in alphas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(DiscreteError::InvalidBackend(
                    "tabulated map alphas must be strictly increasing".into(),
                ));
            }
        }
        for i in 0..alphas.len() - 1 {
            let slope = (values[i + 1] - values[i]) / (alphas[i + 1] - alphas[i]);
            if !(0.0..1.0).contains(&slope) {
                return Err(DiscreteError::InvalidBackend(format!(
                    "tabulated map segment {i} has slope {slope}; need [0,1) for monotonicity and strict gap decrease"
                )));
            }
        }
        Ok(MonotoneTable { alphas, values })
    }

    fn eval(&self, alpha: f64) -> f64 {
        let n = self.alphas.len();
        if alpha <= self.alphas[0] {
            let s = (self.values[1] - self.values[0]) / (self.alphas[1] - self.alphas[0]);
            return self.values[0] + s * (alpha - self.alphas[0]);
        }
        if alpha >= self.alphas[n - 1] {
            let s = (self.values[n - 1] - self.values[n - 2])
                / (self.alphas[n - 1] - self.alphas[n - 2]);
            return self.values[n - 1] + s * (alpha - self.alphas[n - 1]);
        }
        let k = self.alphas.partition_point(|a| *a <= alpha) - 1;
        let f = (alpha - self.alphas[k]) / (self.alphas[k + 1] - self.alphas[k]);
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }

    fn fixed_point(&self) -> f64 {
        // eval(a) - a is strictly decreasing, so the bracket expansion below
        // terminates and bisection converges
        let mut lo = self.alphas[0];
        let mut hi = *self.alphas.last().unwrap();
        while self.eval(lo) - lo < 0.0 {
            lo -= 2.0 * (hi - lo).abs().max(1.0);
        }
        while self.eval(hi) - hi > 0.0 {
            hi += 2.0 * (hi - lo).abs().max(1.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) - mid >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// One oriented edge's map, any backend.
pub enum EdgeMap {
    Numeric(NumericEdgeMap),
    Affine { slope: f64, offset: f64 },
    Tabulated(MonotoneTable),
}

impl EdgeMap {
    pub fn affine(slope: f64, offset: f64) -> Result<EdgeMap, DiscreteError> {
        if !(slope > 0.0 && slope < 1.0) {
            return Err(DiscreteError::InvalidBackend(format!(
                "affine edge map slope must lie in (0,1), got {slope}"
            )));
        }
        Ok(EdgeMap::Affine { slope, offset })
    }

    pub fn rho(&self, alpha: f64) -> Result<f64, DiscreteError> {
        match self {
            EdgeMap::Numeric(m) => Ok(m.rho(alpha)?),
            EdgeMap::Affine { slope, offset } => Ok(slope * alpha + offset),
            EdgeMap::Tabulated(t) => Ok(t.eval(alpha)),
        }
    }

    pub fn rho_fast(&self, alpha: f64) -> Result<f64, DiscreteError> {
        match self {
            EdgeMap::Numeric(m) => Ok(m.rho_fast(alpha)?),
            _ => self.rho(alpha),
        }
    }

    /// A value C with rho(C) <= C: the saturation endpoint for numeric maps,
    /// the fixed point otherwise.
    pub fn upper_start(&self) -> f64 {
        match self {
            EdgeMap::Numeric(m) => m.alpha_over(),
            EdgeMap::Affine { slope, offset } => offset / (1.0 - slope),
            EdgeMap::Tabulated(t) => t.fixed_point(),
        }
    }

    /// Saturation threshold (numeric backend only).
    pub fn alpha_under(&self) -> Option<f64> {
        match self {
            EdgeMap::Numeric(m) => Some(m.alpha_under()),
            _ => None,
        }
    }

    pub fn alpha_over(&self) -> Option<f64> {
        match self {
            EdgeMap::Numeric(m) => Some(m.alpha_over()),
            _ => None,
        }
    }

    pub fn as_numeric(&self) -> Option<&NumericEdgeMap> {
        match self {
            EdgeMap::Numeric(m) => Some(m),
            _ => None,
        }
    }
}

/// Per oriented edge maps for a whole graph, plus the global lower bound
/// c* with rho(c*, xi) >= c* along every path.
pub struct EdgeMapTable {
    maps: Vec<EdgeMap>,
    lower: f64,
    lambda: Option<f64>,
}

impl EdgeMapTable {
    /// Numeric backend: one spec per canonical arc, reverses synthesized via
    /// the compatibility rule. Maps for the two orientations are built from
    /// independent solves.
    pub fn numeric(
        graph: &OrientedGraph,
        specs: &[HamiltonianSpec],
        lambda: f64,
        disc: &ArcDiscretization,
    ) -> Result<EdgeMapTable, DiscreteError> {
        assert_eq!(
            specs.len() * 2,
            graph.edge_count(),
            "one spec per canonical arc"
        );
        if !(lambda > 0.0) {
            return Err(DiscreteError::InvalidBackend(
                "discounted edge maps need lambda > 0".into(),
            ));
        }
        let mut worst = f64::NEG_INFINITY;
        for spec in specs {
            worst = worst.max(spec.max_h_at_zero());
            worst = worst.max(spec.reverse().max_h_at_zero());
        }
        let lower = -worst / lambda;
        use rayon::prelude::*;
        let oriented: Vec<HamiltonianSpec> = specs
            .iter()
            .flat_map(|s| [s.clone(), s.reverse()])
            .collect();
        let maps = oriented
            .into_par_iter()
            .map(|spec| {
                NumericEdgeMap::build(spec, lambda, disc, lower - 1.0).map(EdgeMap::Numeric)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EdgeMapTable {
            maps,
            lower,
            lambda: Some(lambda),
        })
    }

    /// Synthetic affine backend: (slope, offset) per oriented edge.
    pub fn affine(
        graph: &OrientedGraph,
        params: &[(f64, f64)],
    ) -> Result<EdgeMapTable, DiscreteError> {
        assert_eq!(params.len(), graph.edge_count());
        let maps = params
            .iter()
            .map(|(a, b)| EdgeMap::affine(*a, *b))
            .collect::<Result<Vec<_>, _>>()?;
        let lower = maps
            .iter()
            .map(|m| m.upper_start())
            .fold(f64::INFINITY, f64::min)
            - 1.0;
        Ok(EdgeMapTable {
            maps,
            lower,
            lambda: None,
        })
    }

    pub fn from_maps(maps: Vec<EdgeMap>, graph: &OrientedGraph) -> EdgeMapTable {
        assert_eq!(maps.len(), graph.edge_count());
        let lower = maps
            .iter()
            .map(|m| m.upper_start())
            .fold(f64::INFINITY, f64::min)
            - 1.0;
        EdgeMapTable {
            maps,
            lower,
            lambda: None,
        }
    }

    pub fn map(&self, e: EdgeId) -> &EdgeMap {
        &self.maps[e.0]
    }

    pub fn rho(&self, alpha: f64, e: EdgeId) -> Result<f64, DiscreteError> {
        self.maps[e.0].rho(alpha)
    }

    pub fn rho_fast(&self, alpha: f64, e: EdgeId) -> Result<f64, DiscreteError> {
        self.maps[e.0].rho_fast(alpha)
    }

    /// Global constant with rho(c*, xi) >= c* for every path.
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn upper_start_all(&self) -> f64 {
        self.maps
            .iter()
            .map(|m| m.upper_start())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
