//! Parametric Hamiltonian families on [0,1] x R.
//!
//! All families are continuous in (s,p) and coercive in p. Potentials and
//! drifts are uniform samples on [0,1] with linear interpolation, which keeps
//! continuity automatic and the file format flat. Orientation reversal obeys
//! the compatibility rule R(s,p) = H(1-s,-p) and is a symbolic rewrite per
//! family, so reverse(reverse(spec)) == spec exactly.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error("not coercive below radius cap {0:e}")]
    NotCoercive(f64),
    #[error("operation requires a quasiconvex family")]
    QuasiconvexityRequired,
    #[error("level {level} below minimum {min} of H(s,.) at s={s}")]
    LevelBelowMin { level: f64, min: f64, s: f64 },
    #[error("min_p H(s,p) varies by {spread:e} over s; must be constant")]
    H4Violated { spread: f64 },
    #[error("family not admissible in the eikonal layer")]
    NotEikonalEligible,
    #[error("invalid spec: {0}")]
    Invalid(String),
}

const COERCIVITY_CAP: f64 = 1e8;
const ROOT_TOL: f64 = 1e-12;

/// Scalar function of s in [0,1]: uniform samples, linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    samples: Vec<f64>,
}

impl Potential {
    pub fn constant(c: f64) -> Potential {
        Potential {
            samples: vec![c, c],
        }
    }

    pub fn from_samples(samples: Vec<f64>) -> Result<Potential, HamiltonianError> {
        if samples.len() < 2 {
            return Err(HamiltonianError::Invalid(
                "potential needs at least 2 samples".into(),
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(HamiltonianError::Invalid(
                "potential has non-finite sample".into(),
            ));
        }
        Ok(Potential { samples })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Potential {
        let samples = (0..n.max(2))
            .map(|k| f(k as f64 / (n.max(2) - 1) as f64))
            .collect();
        Potential { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.samples.len() - 1;
        let t = (s.clamp(0.0, 1.0)) * n as f64;
        let k = (t.floor() as usize).min(n - 1);
        let frac = t - k as f64;
        self.samples[k] * (1.0 - frac) + self.samples[k + 1] * frac
    }

    /// Samples of s -> f(1-s): the sample array reversed (exact).
    pub fn reversed(&self) -> Potential {
        let mut samples = self.samples.clone();
        samples.reverse();
        Potential { samples }
    }

    pub fn negated(&self) -> Potential {
        Potential {
            samples: self.samples.iter().map(|v| -v).collect(),
        }
    }

    pub fn shifted(&self, da: f64) -> Potential {
        Potential {
            samples: self.samples.iter().map(|v| v + da).collect(),
        }
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sample abscissas, the breakpoints of the interpolant.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.samples.len() - 1;
        (0..=n).map(move |k| k as f64 / n as f64)
    }
}

/// Tabulated Hamiltonian: bilinear interpolation on a uniform grid over
/// [0,1] x [-p_max, p_max], linear extrapolation with `coercive_slope` in |p|
/// beyond the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedGrid {
    pub p_max: f64,
    /// values[i][j] = H(s_i, p_j), rows over s, columns over p.
    pub values: Vec<Vec<f64>>,
    pub coercive_slope: f64,
    /// Caller-declared quasiconvexity in p (enables root/min queries).
    pub quasiconvex: bool,
}

impl TabulatedGrid {
    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if self.p_max <= 0.0 || !self.p_max.is_finite() {
            return Err(HamiltonianError::Invalid(
                "tabulated: p_max must be positive".into(),
            ));
        }
        if self.coercive_slope <= 0.0 {
            return Err(HamiltonianError::Invalid(
                "tabulated: coercive_slope must be positive".into(),
            ));
        }
        if self.values.len() < 2 || self.values.iter().any(|r| r.len() < 2) {
            return Err(HamiltonianError::Invalid(
                "tabulated: need at least a 2x2 grid".into(),
            ));
        }
        let cols = self.values[0].len();
        if self.values.iter().any(|r| r.len() != cols) {
            return Err(HamiltonianError::Invalid("tabulated: ragged grid".into()));
        }
        Ok(())
    }

    fn eval(&self, s: f64, p: f64) -> f64 {
        if p.abs() > self.p_max {
            let edge = self.eval(s, p.signum() * self.p_max);
            return edge + self.coercive_slope * (p.abs() - self.p_max);
        }
        let rows = self.values.len() - 1;
        let cols = self.values[0].len() - 1;
        let ts = s.clamp(0.0, 1.0) * rows as f64;
        let i = (ts.floor() as usize).min(rows - 1);
        let fs = ts - i as f64;
        let tp = (p + self.p_max) / (2.0 * self.p_max) * cols as f64;
        let j = (tp.floor() as usize).min(cols - 1);
        let fp = (tp - j as f64).clamp(0.0, 1.0);
        let a = self.values[i][j] * (1.0 - fp) + self.values[i][j + 1] * fp;
        let b = self.values[i + 1][j] * (1.0 - fp) + self.values[i + 1][j + 1] * fp;
        a * (1.0 - fs) + b * fs
    }

    fn reversed(&self) -> TabulatedGrid {
        // the p-grid is symmetric about 0, so flipping both axes realizes
        // (s,p) -> (1-s,-p) exactly on grid nodes
        let values: Vec<Vec<f64>> = self
            .values
            .iter()
            .rev()
            .map(|row| row.iter().rev().copied().collect())
            .collect();
        TabulatedGrid {
            p_max: self.p_max,
            values,
            coercive_slope: self.coercive_slope,
            quasiconvex: self.quasiconvex,
        }
    }
}

/// A coercive continuous Hamiltonian attached to one arc orientation.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    /// H(s,p) = |p|^m - f(s), m >= 1.
    EikonalPower {
        exponent: f64,
        potential: Potential,
    },
    /// H(s,p) = (p - b(s))^2 / 2 - f(s).
    TiltedQuadratic {
        drift: Potential,
        potential: Potential,
    },
    Tabulated(TabulatedGrid),
}

impl HamiltonianSpec {
    pub fn eikonal_power(exponent: f64, potential: Potential) -> Result<Self, HamiltonianError> {
        if !(exponent >= 1.0) {
            return Err(HamiltonianError::Invalid(format!(
                "eikonal_power exponent must be >= 1, got {exponent}"
            )));
        }
        Ok(HamiltonianSpec::EikonalPower {
            exponent,
            potential,
        })
    }

    pub fn tilted_quadratic(drift: Potential, potential: Potential) -> Self {
        HamiltonianSpec::TiltedQuadratic { drift, potential }
    }

    pub fn tabulated(grid: TabulatedGrid) -> Result<Self, HamiltonianError> {
        grid.validate()?;
        Ok(HamiltonianSpec::Tabulated(grid))
    }

    pub fn eval(&self, s: f64, p: f64) -> f64 {
        match self {
            HamiltonianSpec::EikonalPower {
                exponent,
                potential,
            } => p.abs().powf(*exponent) - potential.eval(s),
            HamiltonianSpec::TiltedQuadratic { drift, potential } => {
                let d = p - drift.eval(s);
                0.5 * d * d - potential.eval(s)
            }
            HamiltonianSpec::Tabulated(grid) => grid.eval(s, p),
        }
    }

    /// The Hamiltonian of the reversed orientation: R(s,p) = H(1-s,-p),
    /// rewritten family-wise so that reverse is an exact involution.
    pub fn reverse(&self) -> HamiltonianSpec {
        match self {
            HamiltonianSpec::EikonalPower {
                exponent,
                potential,
            } => HamiltonianSpec::EikonalPower {
                exponent: *exponent,
                potential: potential.reversed(),
            },
            HamiltonianSpec::TiltedQuadratic { drift, potential } => {
                HamiltonianSpec::TiltedQuadratic {
                    drift: drift.reversed().negated(),
                    potential: potential.reversed(),
                }
            }
            HamiltonianSpec::Tabulated(grid) => HamiltonianSpec::Tabulated(grid.reversed()),
        }
    }

    /// The spec of H - a (level shift absorbed into the potential).
    pub fn shift_level(&self, a: f64) -> HamiltonianSpec {
        match self {
            HamiltonianSpec::EikonalPower {
                exponent,
                potential,
            } => HamiltonianSpec::EikonalPower {
                exponent: *exponent,
                potential: potential.shifted(a),
            },
            HamiltonianSpec::TiltedQuadratic { drift, potential } => {
                HamiltonianSpec::TiltedQuadratic {
                    drift: drift.clone(),
                    potential: potential.shifted(a),
                }
            }
            HamiltonianSpec::Tabulated(grid) => {
                let mut g = grid.clone();
                for row in &mut g.values {
                    for v in row.iter_mut() {
                        *v -= a;
                    }
                }
                HamiltonianSpec::Tabulated(g)
            }
        }
    }

    /// Quasiconvexity in p with strict sublevel interiors; analytic for the
    /// closed-form families, declared by the caller for tabulated data.
    pub fn quasiconvex_eligible(&self) -> bool {
        match self {
            HamiltonianSpec::Tabulated(grid) => grid.quasiconvex,
            _ => true,
        }
    }

    /// Eikonal-layer admission: tabulated data is excluded because its
    /// sublevel-interior condition cannot be checked robustly.
    pub fn eikonal_eligible(&self) -> Result<(), HamiltonianError> {
        match self {
            HamiltonianSpec::Tabulated(_) => Err(HamiltonianError::NotEikonalEligible),
            _ => Ok(()),
        }
    }

    /// Checks that s -> min_p H(s,p) is constant within 1e-9 on a 1001-point
    /// sample (plus potential breakpoints).
    pub fn h4_check(&self) -> Result<f64, HamiltonianError> {
        self.eikonal_eligible()?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in self.s_probe_points() {
            let (_, v) = self.min_in_p(s)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let spread = hi - lo;
        if spread > 1e-9 {
            return Err(HamiltonianError::H4Violated { spread });
        }
        Ok(lo)
    }

    /// max_s min_p H(s,p), the per-arc floor for level-set queries.
    pub fn a_gamma(&self) -> Result<f64, HamiltonianError> {
        let mut best = f64::NEG_INFINITY;
        for s in self.s_probe_points() {
            let (_, v) = self.min_in_p(s)?;
            best = best.max(v);
        }
        Ok(best)
    }

    // 1001-point uniform grid united with the breakpoints of the family's
    // potentials; exact for piecewise-linear data.
    fn s_probe_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
        match self {
            HamiltonianSpec::EikonalPower { potential, .. } => pts.extend(potential.breakpoints()),
            HamiltonianSpec::TiltedQuadratic { drift, potential } => {
                pts.extend(drift.breakpoints());
                pts.extend(potential.breakpoints());
            }
            HamiltonianSpec::Tabulated(grid) => {
                let rows = grid.values.len() - 1;
                pts.extend((0..=rows).map(|i| i as f64 / rows as f64));
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    /// Exact bound on where the minimizer of H(s,.) can sit.
    fn argmin_bound(&self) -> f64 {
        match self {
            HamiltonianSpec::EikonalPower { .. } => 0.0,
            HamiltonianSpec::TiltedQuadratic { drift, .. } => {
                drift.max().abs().max(drift.min().abs())
            }
            HamiltonianSpec::Tabulated(grid) => grid.p_max,
        }
    }

    /// min over s of H(s, p) at a fixed p, exact for the analytic families
    /// (piecewise linear / per-segment quadratic in s).
    fn min_over_s_at(&self, p: f64) -> f64 {
        match self {
            HamiltonianSpec::EikonalPower {
                exponent,
                potential,
            } => p.abs().powf(*exponent) - potential.max(),
            HamiltonianSpec::TiltedQuadratic { drift, potential } => {
                let n = drift.samples().len() - 1;
                let mut best = f64::INFINITY;
                for k in 0..n {
                    let (b0, b1) = (drift.samples()[k], drift.samples()[k + 1]);
                    let s0 = k as f64 / n as f64;
                    let s1 = (k + 1) as f64 / n as f64;
                    // minimize 0.5 (p - b(s))^2 - f(s) on the segment; the
                    // quadratic part can dip inside, so check the stationary
                    // point of the full segment restriction numerically-exactly
                    let g = |s: f64| self.eval(s, p);
                    best = best.min(g(s0)).min(g(s1));
                    // stationary point of 0.5(p-b)^2 - f with b,f affine in t
                    let db = b1 - b0;
                    if db.abs() > 0.0 {
                        let f0 = potential.eval(s0);
                        let f1 = potential.eval(s1);
                        // d/dt [0.5 (p - b0 - db t)^2 - f0 - (f1-f0) t] = 0
                        let t = ((p - b0) * db - (f1 - f0)) / (db * db);
                        if t > 0.0 && t < 1.0 {
                            best = best.min(g(s0 + t * (s1 - s0)));
                        }
                    }
                }
                best
            }
            HamiltonianSpec::Tabulated(grid) => {
                let rows = grid.values.len() - 1;
                (0..=rows)
                    .map(|i| grid.eval(i as f64 / rows as f64, p))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Lower bound on min_p H(s, p); exact for the analytic families, a
    /// conservative row-minimum bound for tabulated data.
    pub fn min_in_p_bound(&self, s: f64) -> f64 {
        match self {
            HamiltonianSpec::EikonalPower { potential, .. } => -potential.eval(s),
            HamiltonianSpec::TiltedQuadratic { potential, .. } => -potential.eval(s),
            HamiltonianSpec::Tabulated(grid) => {
                let rows = grid.values.len() - 1;
                let t = s.clamp(0.0, 1.0) * rows as f64;
                let i = (t.floor() as usize).min(rows - 1);
                let row_min = |r: &Vec<f64>| r.iter().copied().fold(f64::INFINITY, f64::min);
                row_min(&grid.values[i]).min(row_min(&grid.values[i + 1]))
            }
        }
    }

    /// max over s of H(s, 0); enters the global subsolution constant.
    pub fn max_h_at_zero(&self) -> f64 {
        match self {
            HamiltonianSpec::EikonalPower { potential, .. } => -potential.min(),
            HamiltonianSpec::TiltedQuadratic { .. } => {
                // 0.5 b(s)^2 - f(s) is convex per segment: max at breakpoints
                let mut best = f64::NEG_INFINITY;
                for s in self.s_probe_points() {
                    best = best.max(self.eval(s, 0.0));
                }
                best
            }
            HamiltonianSpec::Tabulated(grid) => {
                let rows = grid.values.len() - 1;
                (0..=rows)
                    .map(|i| grid.eval(i as f64 / rows as f64, 0.0))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// min over [0,1] x R of H, attained on a compact set by coercivity.
    pub fn global_min(&self) -> f64 {
        match self {
            HamiltonianSpec::EikonalPower { potential, .. } => -potential.max(),
            HamiltonianSpec::TiltedQuadratic { potential, .. } => -potential.max(),
            HamiltonianSpec::Tabulated(grid) => grid
                .values
                .iter()
                .flatten()
                .copied()
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Smallest power-of-two-scaled radius P (doubling search from 1) with
    /// H(s,p) > level for every s and |p| >= P.
    pub fn coercivity_radius(&self, level: f64) -> Result<f64, HamiltonianError> {
        let floor = self.argmin_bound();
        let mut p = 1.0f64;
        while p <= COERCIVITY_CAP {
            if p > floor && self.min_over_s_at(p) > level && self.min_over_s_at(-p) > level {
                return Ok(p);
            }
            p *= 2.0;
        }
        Err(HamiltonianError::NotCoercive(COERCIVITY_CAP))
    }

    /// Upper bound on |dH/dp| over [0,1] x [-radius, radius]; exact for the
    /// analytic families, sampled finite differences for tabulated data.
    pub fn slope_bound(&self, radius: f64) -> f64 {
        match self {
            HamiltonianSpec::EikonalPower { exponent, .. } => {
                if *exponent == 1.0 {
                    1.0
                } else {
                    exponent * radius.abs().powf(exponent - 1.0)
                }
            }
            HamiltonianSpec::TiltedQuadratic { drift, .. } => {
                radius + drift.max().abs().max(drift.min().abs())
            }
            HamiltonianSpec::Tabulated(grid) => {
                let rows = grid.values.len();
                let mut best: f64 = grid.coercive_slope;
                let np = 512;
                for i in 0..rows {
                    let s = i as f64 / (rows - 1) as f64;
                    for j in 0..=np {
                        let p = -radius + 2.0 * radius * j as f64 / np as f64;
                        let dp = 1e-6 * radius.max(1.0);
                        let d = (grid.eval(s, p + dp) - grid.eval(s, p - dp)) / (2.0 * dp);
                        best = best.max(d.abs());
                    }
                }
                best * 1.05
            }
        }
    }

    /// Global minimum of H(s,.) by golden-section search (quasiconvex only).
    pub fn min_in_p(&self, s: f64) -> Result<(f64, f64), HamiltonianError> {
        if !self.quasiconvex_eligible() {
            return Err(HamiltonianError::QuasiconvexityRequired);
        }
        let level = self.eval(s, 0.0) + 1.0;
        let radius = self.coercivity_radius(level)?;
        Ok(golden_min(|p| self.eval(s, p), -radius, radius, ROOT_TOL))
    }

    /// max{p : H(s,p) <= a}, by bisection on [argmin, +coercivity radius].
    pub fn upper_root(&self, s: f64, a: f64) -> Result<f64, HamiltonianError> {
        let (pmin, vmin) = self.min_in_p(s)?;
        if a < vmin - 1e-11 {
            return Err(HamiltonianError::LevelBelowMin {
                level: a,
                min: vmin,
                s,
            });
        }
        let a_eff = a.max(vmin);
        let hi = self.coercivity_radius(a_eff)?;
        Ok(bisect_root(
            |p| self.eval(s, p),
            pmin,
            hi.max(pmin + 1.0),
            a_eff,
        ))
    }

    /// min{p : H(s,p) <= a}.
    pub fn lower_root(&self, s: f64, a: f64) -> Result<f64, HamiltonianError> {
        let (pmin, vmin) = self.min_in_p(s)?;
        if a < vmin - 1e-11 {
            return Err(HamiltonianError::LevelBelowMin {
                level: a,
                min: vmin,
                s,
            });
        }
        let a_eff = a.max(vmin);
        let hi = self.coercivity_radius(a_eff)?;
        Ok(-bisect_root(
            |p| self.eval(s, -p),
            -pmin,
            hi.max(-pmin + 1.0),
            a_eff,
        ))
    }
}

/// Golden-section minimization of a quasiconvex function; returns (argmin, value).
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x).min(fc).min(fd))
}

/// Largest p in [lo,hi] with f(p) <= a, assuming f(lo) <= a < f(hi).
fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, a: f64) -> f64 {
    if f(hi) <= a {
        return hi;
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
