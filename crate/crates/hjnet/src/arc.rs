//! 1D solver for the discounted equation `lambda w + H(s, w') = 0` on (0,1).
//!
//! The scheme is pseudo-time relaxation of the Lax-Friedrichs numerical
//! Hamiltonian
//!
//!   Hhat(s, p-, p+) = H(s, (p- + p+)/2) - (theta/2)(p+ - p-),
//!
//! with theta a per-arc bound on |dH/dp| over the working slope range and
//! time step at the monotonicity (CFL) limit dtau (theta/h + lambda) = 1,
//! at which the interior update is the exact nodal solve. Updates run as
//! alternating in-place sweeps; the steady state does not depend on the
//! schedule.
//!
//! Boundary menu:
//! * state constraint: no data, one-sided difference only, with the
//!   monotone envelope flux (min of H over slopes beyond the argument, taken
//!   from the interior side). On the branch carried by the maximal
//!   subsolution the envelope equals H; its flat branch anchors resting
//!   (degenerate) ends at the pointwise subsolution bound -min_p H / lambda.
//!   The resulting scalar equation is strictly increasing in the boundary
//!   value: one root, solved exactly per visit.
//! * weak Dirichlet: the node is clamped to min(data, state-constraint
//!   value), realizing "maximal subsolution taking a value <= data" rather
//!   than a hard (possibly incompatible) condition.
//!
//! Every nodal map is monotone in its neighbors and contracts constants by
//! 1 - lambda dtau, so each sweep contracts the sup norm: the discrete fixed
//! point is unique and reached from any start. A residual-gated Aitken step
//! accelerates the slow nearly-geometric plateau modes.

use thiserror::Error;

use crate::hamiltonian::{HamiltonianError, HamiltonianSpec};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("scheme did not converge: residual {residual:e} after {sweeps} sweeps")]
    NoConvergence { residual: f64, sweeps: usize },
    #[error("two-point data not solvable: {0}")]
    ForkConditionViolated(String),
    #[error("semi-Lagrangian oracle requires a convex family")]
    ConvexityRequired,
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// Grid and iteration controls for one arc solve.
#[derive(Debug, Clone)]
pub struct ArcDiscretization {
    /// Interval count; the grid has n+1 nodes.
    pub n: usize,
    /// Sup-norm residual target for the steady state.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for ArcDiscretization {
    fn default() -> Self {
        ArcDiscretization {
            n: 2000,
            tol: 1e-10,
            max_sweeps: 1_000_000,
        }
    }
}

impl ArcDiscretization {
    pub fn with_n(n: usize) -> Self {
        ArcDiscretization {
            n,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    StateConstraint,
    DirichletLeq(f64),
    DirichletExact(f64),
}

impl BoundaryCondition {
    fn data(&self) -> Option<f64> {
        match self {
            BoundaryCondition::StateConstraint => None,
            BoundaryCondition::DirichletLeq(a) | BoundaryCondition::DirichletExact(a) => Some(*a),
        }
    }
}

/// Converged grid function with its boundary tags and final residual.
#[derive(Debug, Clone)]
pub struct ArcProfile {
    pub values: Vec<f64>,
    pub lambda: f64,
    pub bc0: BoundaryCondition,
    pub bc1: BoundaryCondition,
    pub residual: f64,
    pub sweeps: usize,
}

impl ArcProfile {
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn left(&self) -> f64 {
        self.values[0]
    }

    pub fn right(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn value_at(&self, s: f64) -> f64 {
        let n = self.n();
        let t = s.clamp(0.0, 1.0) * n as f64;
        let k = (t.floor() as usize).min(n - 1);
        let f = t - k as f64;
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }

    /// Max discrete slope magnitude, for Lipschitz-bound checks.
    pub fn max_slope(&self) -> f64 {
        let h = 1.0 / self.n() as f64;
        self.values
            .windows(2)
            .map(|w| ((w[1] - w[0]) / h).abs())
            .fold(0.0, f64::max)
    }
}

// Per-node Hamiltonian evaluation with potentials pre-sampled on the grid.
enum FastEval<'a> {
    Pow1 {
        f: Vec<f64>,
    },
    Pow {
        m: f64,
        f: Vec<f64>,
    },
    Quad {
        b: Vec<f64>,
        f: Vec<f64>,
    },
    Generic {
        spec: &'a HamiltonianSpec,
        s: Vec<f64>,
    },
}

impl<'a> FastEval<'a> {
    // Indices 0..=n are grid nodes; n+1 and n+2 are the half-cell points
    // h/2 and 1-h/2 where the one-sided boundary differences are centered.
    fn new(spec: &'a HamiltonianSpec, n: usize) -> FastEval<'a> {
        let grid = |pot: &crate::hamiltonian::Potential| -> Vec<f64> {
            let h = 1.0 / n as f64;
            (0..=n)
                .map(|i| pot.eval(i as f64 / n as f64))
                .chain([pot.eval(0.5 * h), pot.eval(1.0 - 0.5 * h)])
                .collect()
        };
        match spec {
            HamiltonianSpec::EikonalPower {
                exponent,
                potential,
            } if *exponent == 1.0 => FastEval::Pow1 { f: grid(potential) },
            HamiltonianSpec::EikonalPower {
                exponent,
                potential,
            } => FastEval::Pow {
                m: *exponent,
                f: grid(potential),
            },
            HamiltonianSpec::TiltedQuadratic { drift, potential } => FastEval::Quad {
                b: grid(drift),
                f: grid(potential),
            },
            HamiltonianSpec::Tabulated(_) => {
                let h = 1.0 / n as f64;
                FastEval::Generic {
                    spec,
                    s: (0..=n)
                        .map(|i| i as f64 / n as f64)
                        .chain([0.5 * h, 1.0 - 0.5 * h])
                        .collect(),
                }
            }
        }
    }

    #[inline]
    fn h(&self, i: usize, p: f64) -> f64 {
        match self {
            FastEval::Pow1 { f } => p.abs() - f[i],
            FastEval::Pow { m, f } => p.abs().powf(*m) - f[i],
            FastEval::Quad { b, f } => {
                let d = p - b[i];
                0.5 * d * d - f[i]
            }
            FastEval::Generic { spec, s } => spec.eval(s[i], p),
        }
    }
}

// Monotone one-sided boundary Hamiltonians: at the left end the envelope
// min over q <= p of H(s,q), at the right end min over q >= p. On the branch
// carried by the maximal subsolution the envelope agrees with H; on the
// other branch it freezes at the in-p minimum, which anchors resting
// (degenerate) ends at the value -min_p H / lambda. Left envelopes are
// nonincreasing in p and right envelopes nondecreasing, so the boundary
// equation lambda v + env((inner - v)/h) = 0 is strictly increasing in v:
// one root, monotone in the neighbor value.
enum BoundaryEnvelope {
    // H(clamp(p)) with the argmin as one-sided clamp; exact for quasiconvex
    // analytic families
    Analytic {
        at_left: bool,
        argmin: f64,
    },
    // sampled running envelope on a uniform p-grid with flat tails
    Sampled {
        p_lo: f64,
        dp: f64,
        values: Vec<f64>,
    },
}

impl BoundaryEnvelope {
    fn build(spec: &HamiltonianSpec, s: f64, at_left: bool, p_clip: f64) -> BoundaryEnvelope {
        match spec {
            HamiltonianSpec::EikonalPower { .. } => BoundaryEnvelope::Analytic {
                at_left,
                argmin: 0.0,
            },
            HamiltonianSpec::TiltedQuadratic { drift, .. } => BoundaryEnvelope::Analytic {
                at_left,
                argmin: drift.eval(s),
            },
            HamiltonianSpec::Tabulated(_) => {
                let m = 4096usize;
                let p_lo = -p_clip - 1.0;
                let dp = (2.0 * (p_clip + 1.0)) / m as f64;
                let raw: Vec<f64> = (0..=m)
                    .map(|k| spec.eval(s, p_lo + k as f64 * dp))
                    .collect();
                let mut values = raw.clone();
                if at_left {
                    // running min from the left: env(p) = min over q <= p
                    for k in 1..=m {
                        values[k] = values[k].min(values[k - 1]);
                    }
                } else {
                    for k in (0..m).rev() {
                        values[k] = values[k].min(values[k + 1]);
                    }
                }
                BoundaryEnvelope::Sampled { p_lo, dp, values }
            }
        }
    }

    fn clamp_arg(&self, p: f64) -> f64 {
        match self {
            BoundaryEnvelope::Analytic { at_left, argmin } => {
                if *at_left {
                    p.min(*argmin)
                } else {
                    p.max(*argmin)
                }
            }
            BoundaryEnvelope::Sampled { .. } => p,
        }
    }
}

struct Scheme<'a> {
    eval: FastEval<'a>,
    env0: BoundaryEnvelope,
    env1: BoundaryEnvelope,
    lambda: f64,
    h: f64,
    theta: f64,
    dtau: f64,
    // slope safeguard: updates evaluate H at slopes clamped to this range so
    // out-of-range transients cannot blow up; the accepted steady state is
    // checked with unclamped interior residuals, so the fixed point is
    // unaffected
    p_clip: f64,
    bc0: BoundaryCondition,
    bc1: BoundaryCondition,
    n: usize,
}

impl<'a> Scheme<'a> {
    // One-sided envelope operator at a boundary node.
    fn boundary_g(&self, at_left: bool, v: f64, inner: f64) -> f64 {
        let (sign, env, idx) = if at_left {
            (1.0, &self.env0, self.n + 1)
        } else {
            (-1.0, &self.env1, self.n + 2)
        };
        let p = (sign * (inner - v) / self.h).clamp(-self.p_clip, self.p_clip);
        let hval = match env {
            BoundaryEnvelope::Analytic { .. } => self.eval.h(idx, env.clamp_arg(p)),
            BoundaryEnvelope::Sampled { p_lo, dp, values } => {
                let t = ((p - p_lo) / dp).clamp(0.0, (values.len() - 1) as f64);
                let k = (t.floor() as usize).min(values.len() - 2);
                let f = t - k as f64;
                values[k] * (1.0 - f) + values[k + 1] * f
            }
        };
        self.lambda * v + hval
    }

    // Unique root of the increasing map v -> lambda v + env((inner - v)/h).
    fn boundary_value(&self, at_left: bool, inner: f64) -> f64 {
        let g = |v: f64| self.boundary_g(at_left, v, inner);
        // expand a bracket around the neighbor value, then bisect
        let mut step = self.h * (self.p_clip + 1.0) + 1.0;
        let mut lo = inner - step;
        while g(lo) > 0.0 {
            step *= 2.0;
            lo -= step;
            if step > 1e12 {
                return inner;
            }
        }
        let mut hi = inner + step;
        let mut step_up = step;
        while g(hi) < 0.0 {
            step_up *= 2.0;
            hi += step_up;
            if step_up > 1e12 {
                return inner;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[inline]
    fn interior_value(&self, i: usize, left: f64, right: f64) -> f64 {
        let pbar = ((right - left) / (2.0 * self.h)).clamp(-self.p_clip, self.p_clip);
        let couple = self.theta / (2.0 * self.h) * (right + left);
        (couple - self.eval.h(i, pbar)) / (self.lambda + self.theta / self.h)
    }

    fn apply_bc(&self, bc: BoundaryCondition, z: f64) -> f64 {
        match bc.data() {
            None => z,
            Some(a) => a.min(z),
        }
    }

    fn update_boundary(&self, u: &mut [f64], at_left: bool) {
        let n = self.n;
        if at_left {
            let z = self.boundary_value(true, u[1]);
            u[0] = self.apply_bc(self.bc0, z);
        } else {
            let z = self.boundary_value(false, u[n - 1]);
            u[n] = self.apply_bc(self.bc1, z);
        }
    }

    // One in-place Gauss-Seidel pass. Every nodal map is monotone in its
    // neighbors and contracts constants by 1 - lambda dtau, so the sweep is
    // a sup-norm contraction regardless of direction; alternating directions
    // only speeds up transport.
    fn sweep(&self, u: &mut [f64], forward: bool) {
        let n = self.n;
        if forward {
            self.update_boundary(u, true);
            for i in 1..n {
                u[i] = self.interior_value(i, u[i - 1], u[i + 1]);
            }
            self.update_boundary(u, false);
        } else {
            self.update_boundary(u, false);
            for i in (1..n).rev() {
                u[i] = self.interior_value(i, u[i - 1], u[i + 1]);
            }
            self.update_boundary(u, true);
        }
    }

    // Equation-scale residual. Interior nodes measure the scheme equation
    // with unclamped slopes; boundary nodes measure the closure equation
    // (envelope root, then the Dirichlet clamp where present).
    fn residual(&self, u: &[f64]) -> f64 {
        let n = self.n;
        let mut sup = 0.0f64;
        for i in 1..n {
            let pm = (u[i] - u[i - 1]) / self.h;
            let pp = (u[i + 1] - u[i]) / self.h;
            let hhat = self.eval.h(i, 0.5 * (pm + pp)) - 0.5 * self.theta * (pp - pm);
            sup = sup.max((self.lambda * u[i] + hhat).abs());
        }
        for (at_left, bc) in [(true, self.bc0), (false, self.bc1)] {
            let (cur, inner) = if at_left {
                (u[0], u[1])
            } else {
                (u[n], u[n - 1])
            };
            let r = match bc.data() {
                None => self.boundary_g(at_left, cur, inner).abs(),
                Some(a) => {
                    let g = self.boundary_g(at_left, cur, inner);
                    if cur >= a {
                        // clamp active: the value must sit at the data and
                        // the envelope root must lie at or above it (g <= 0)
                        ((cur - a).abs() / self.dtau).max(g.max(0.0))
                    } else {
                        g.abs()
                    }
                }
            };
            sup = sup.max(r);
        }
        sup
    }
}

fn working_radius(
    spec: &HamiltonianSpec,
    lambda: f64,
    data: &[f64],
) -> Result<(f64, f64, f64), SolverError> {
    let upper = -spec.global_min() / lambda;
    let mut vmax = upper.abs();
    for &d in data {
        vmax = vmax.max(d.abs());
    }
    let level = lambda * vmax + 1.0;
    let radius = spec.coercivity_radius(level)?;
    let theta = spec.slope_bound(radius).max(1e-8);
    Ok((upper, radius, theta))
}

/// Core relaxation loop shared by all boundary menus. `warm` seeds the
/// iteration; otherwise the constant upper bound -min H / lambda is used,
/// which dominates every subsolution.
pub fn solve_arc(
    spec: &HamiltonianSpec,
    lambda: f64,
    bc0: BoundaryCondition,
    bc1: BoundaryCondition,
    disc: &ArcDiscretization,
    warm: Option<&[f64]>,
) -> Result<ArcProfile, SolverError> {
    assert!(lambda > 0.0, "discount factor must be positive");
    let n = disc.n.max(4);
    let mut data = Vec::new();
    data.extend(bc0.data());
    data.extend(bc1.data());
    let (upper, radius, theta) = working_radius(spec, lambda, &data)?;

    let h = 1.0 / n as f64;
    let p_clip = radius + 1.0;
    let scheme = Scheme {
        eval: FastEval::new(spec, n),
        env0: BoundaryEnvelope::build(spec, 0.5 * h, true, p_clip),
        env1: BoundaryEnvelope::build(spec, 1.0 - 0.5 * h, false, p_clip),
        lambda,
        h,
        theta,
        dtau: 1.0 / (lambda + theta / h),
        p_clip,
        bc0,
        bc1,
        n,
    };

    let mut u = match warm {
        Some(w) if w.len() == n + 1 => w.to_vec(),
        Some(w) => {
            // resample a warm profile from a different grid
            let prof = ArcProfile {
                values: w.to_vec(),
                lambda,
                bc0,
                bc1,
                residual: f64::NAN,
                sweeps: 0,
            };
            (0..=n)
                .map(|i| prof.value_at(i as f64 / n as f64))
                .collect()
        }
        None => {
            // constant upper bound, cut down near Dirichlet data by Lipschitz
            // cones to keep the initial slopes inside the working range
            (0..=n)
                .map(|i| {
                    let s = i as f64 / n as f64;
                    let mut v = upper;
                    if let Some(a) = bc0.data() {
                        v = v.min(a + radius * s);
                    }
                    if let Some(b) = bc1.data() {
                        v = v.min(b + radius * (1.0 - s));
                    }
                    v
                })
                .collect()
        }
    };

    let guard = 1e14_f64.max(1e6 * (upper.abs() + 1.0));
    let mut sweeps = 0usize;
    let mut forward = true;
    // Aitken state for the slow nearly-geometric modes (flat plateaus decay
    // at 1 - O(lambda h / theta) per sweep): every SNAP sweeps estimate the
    // contraction ratio of the dominant mode and jump to its limit; the jump
    // is accepted only when it lowers the residual, so it cannot move the
    // fixed point.
    const SNAP: usize = 64;
    let mut snap_prev: Option<(Vec<f64>, f64)> = None;
    let trace = std::env::var("HJ_TRACE").is_ok();
    loop {
        let res = scheme.residual(&u);
        if trace && sweeps.is_multiple_of(200) {
            eprintln!("sweep {sweeps}: res={res:e} u0={} un={}", u[0], u[n]);
        }
        if res < disc.tol {
            return Ok(ArcProfile {
                values: u,
                lambda,
                bc0,
                bc1,
                residual: res,
                sweeps,
            });
        }
        if sweeps >= disc.max_sweeps || u.iter().any(|v| !v.is_finite() || v.abs() > guard) {
            return Err(SolverError::NoConvergence {
                residual: res,
                sweeps,
            });
        }
        if sweeps.is_multiple_of(SNAP) && sweeps > 0 {
            let delta: Vec<f64> = match &snap_prev {
                Some((prev, _)) => u.iter().zip(prev).map(|(a, b)| a - b).collect(),
                None => Vec::new(),
            };
            let dsup = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if let Some((_, prev_dsup)) = snap_prev {
                if prev_dsup.is_finite() && prev_dsup > 0.0 && dsup > 0.0 {
                    let ratio = dsup / prev_dsup;
                    if (0.3..1.0).contains(&ratio) {
                        let f = ratio / (1.0 - ratio);
                        let mut cand: Vec<f64> =
                            u.iter().zip(&delta).map(|(a, d)| a + f * d).collect();
                        // smooth the amplified rough components before judging
                        scheme.sweep(&mut cand, forward);
                        scheme.sweep(&mut cand, !forward);
                        if scheme.residual(&cand) < res {
                            u = cand;
                            sweeps += 2;
                            snap_prev = None;
                            continue;
                        }
                    }
                }
            }
            snap_prev = Some((u.clone(), dsup));
        }
        scheme.sweep(&mut u, forward);
        forward = !forward;
        sweeps += 1;
    }
}

/// Maximal subsolution with state constraints at both endpoints.
pub fn solve_umax(
    spec: &HamiltonianSpec,
    lambda: f64,
    disc: &ArcDiscretization,
) -> Result<ArcProfile, SolverError> {
    solve_arc(
        spec,
        lambda,
        BoundaryCondition::StateConstraint,
        BoundaryCondition::StateConstraint,
        disc,
        None,
    )
}

/// Maximal subsolution taking a value <= alpha at s=0, state constraint at
/// s=1. Its left trace is min(alpha, solve_umax(..).left()).
pub fn solve_ualpha(
    spec: &HamiltonianSpec,
    lambda: f64,
    alpha: f64,
    disc: &ArcDiscretization,
) -> Result<ArcProfile, SolverError> {
    solve_arc(
        spec,
        lambda,
        BoundaryCondition::DirichletLeq(alpha),
        BoundaryCondition::StateConstraint,
        disc,
        None,
    )
}

/// rho(alpha, e) = value at s=1 of the alpha-capped maximal subsolution.
pub fn rho_edge(
    spec: &HamiltonianSpec,
    lambda: f64,
    alpha: f64,
    disc: &ArcDiscretization,
) -> Result<f64, SolverError> {
    Ok(solve_ualpha(spec, lambda, alpha, disc)?.right())
}

/// Left endpoint of the state-constrained solution, the saturation threshold
/// of the edge map.
pub fn alpha_under(
    spec: &HamiltonianSpec,
    lambda: f64,
    disc: &ArcDiscretization,
) -> Result<f64, SolverError> {
    Ok(solve_umax(spec, lambda, disc)?.left())
}

/// Right endpoint of the state-constrained solution, the saturation value of
/// the edge map.
pub fn alpha_over(
    spec: &HamiltonianSpec,
    lambda: f64,
    disc: &ArcDiscretization,
) -> Result<f64, SolverError> {
    Ok(solve_umax(spec, lambda, disc)?.right())
}

pub(crate) const FORK_SLACK: f64 = 1e-6;

/// Two-point problem u(0)=alpha, u(1)=beta. Solvable exactly when
/// alpha <= rho(beta, -e) and beta <= rho(alpha, e); both are checked
/// numerically with slack before solving.
pub fn solve_dirichlet_pair(
    spec: &HamiltonianSpec,
    lambda: f64,
    alpha: f64,
    beta: f64,
    disc: &ArcDiscretization,
) -> Result<ArcProfile, SolverError> {
    let rho_fwd = rho_edge(spec, lambda, alpha, disc)?;
    if beta > rho_fwd + FORK_SLACK {
        return Err(SolverError::ForkConditionViolated(format!(
            "beta {beta} exceeds rho(alpha) {rho_fwd}"
        )));
    }
    let rho_bwd = rho_edge(&spec.reverse(), lambda, beta, disc)?;
    if alpha > rho_bwd + FORK_SLACK {
        return Err(SolverError::ForkConditionViolated(format!(
            "alpha {alpha} exceeds reverse rho(beta) {rho_bwd}"
        )));
    }
    let mut prof = solve_arc(
        spec,
        lambda,
        BoundaryCondition::DirichletLeq(alpha),
        BoundaryCondition::DirichletLeq(beta),
        disc,
        None,
    )?;
    prof.bc0 = BoundaryCondition::DirichletExact(alpha);
    prof.bc1 = BoundaryCondition::DirichletExact(beta);
    Ok(prof)
}

/// Independent oracle for rho on convex families: discounted semi-Lagrangian
/// dynamic programming for
///
///   u(s) = inf over curves in [0,1] of  integral e^{-lambda t} L(xi, -xi') dt
///          (+ e^{-lambda T} alpha on exit through s=0),
///
/// with L the convex conjugate of H in p. Exit through s=1 is disallowed
/// (state constraint). Returns the oracle value at s=1.
pub fn sl_oracle_rho(
    spec: &HamiltonianSpec,
    lambda: f64,
    alpha: f64,
    steps: usize,
) -> Result<f64, SolverError> {
    match spec {
        HamiltonianSpec::EikonalPower { .. } | HamiltonianSpec::TiltedQuadratic { .. } => {}
        HamiltonianSpec::Tabulated(_) => return Err(SolverError::ConvexityRequired),
    }
    let (upper, radius, theta) = working_radius(spec, lambda, &[alpha])?;
    let q_max = theta + 0.5;
    let p_range = radius + 2.0;

    let ns = 1600usize;
    let ds = 1.0 / ns as f64;
    let dt = 1.0 / steps.max(10) as f64;
    let nq = 640usize;

    // Lagrangian table L(s_i, q_j) = max_p (q p - H(s_i, p)); concave in p
    // for convex H, so golden-section maximization applies.
    let qs: Vec<f64> = (0..=nq)
        .map(|j| -q_max + 2.0 * q_max * j as f64 / nq as f64)
        .collect();
    let mut lag = vec![vec![0.0f64; nq + 1]; ns + 1];
    for (i, row) in lag.iter_mut().enumerate() {
        let s = i as f64 * ds;
        for (j, cell) in row.iter_mut().enumerate() {
            let q = qs[j];
            let (_, neg) = golden_max(|p| q * p - spec.eval(s, p), -p_range, p_range);
            *cell = neg;
        }
    }

    let disc_step = (-lambda * dt).exp();
    let run_step = (1.0 - disc_step) / lambda;

    let mut u = vec![alpha.min(upper); ns + 1];
    let interp = |u: &[f64], s: f64| -> f64 {
        let t = (s / ds).clamp(0.0, ns as f64);
        let k = (t.floor() as usize).min(ns - 1);
        let f = t - k as f64;
        u[k] * (1.0 - f) + u[k + 1] * f
    };

    let max_iters = ((40.0 / (lambda * dt)) as usize).max(200);
    let mut forward = true;
    for _ in 0..max_iters {
        let mut change = 0.0f64;
        let order: Box<dyn Iterator<Item = usize>> = if forward {
            Box::new(0..=ns)
        } else {
            Box::new((0..=ns).rev())
        };
        for i in order {
            let s = i as f64 * ds;
            let mut best = f64::INFINITY;
            for (j, &q) in qs.iter().enumerate() {
                let target = s - q * dt;
                if target > 1.0 + 1e-12 {
                    continue;
                }
                let val = if target < 0.0 {
                    // exits through s=0 after time tau < dt
                    let tau = s / q;
                    let d = (-lambda * tau).exp();
                    lag[i][j] * (1.0 - d) / lambda + d * alpha
                } else {
                    lag[i][j] * run_step + disc_step * interp(&u, target)
                };
                best = best.min(val);
            }
            change = change.max((best - u[i]).abs());
            u[i] = best;
        }
        forward = !forward;
        if change < 1e-12 * (1.0 + upper.abs()) {
            break;
        }
    }
    Ok(u[ns])
}

/// Golden-section maximization; returns (argmax, value).
fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (x, v) = crate::hamiltonian::golden_min(|p| -f(p), a, b, 1e-10);
    (x, -v)
}
