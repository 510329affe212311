//! Piecewise-linear minimal-surface solver: damped Newton on the discrete area
//! functional, boundary ramping for ±∞ data, the Scherk closed form and barrier checks.

use crate::flatgeom::{MultiDomain, SectorDomain, StripDomain};
use crate::geom::{hat_gradients, Vec2};
use crate::jscheck::{check_solvability, ArcData, BoundaryData, JsError, SolvabilityVerdict, Status};
use crate::sparse::{LinearSolveError, SpdSolver, SymmetricAssembly};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when the Euclidean norm of the energy gradient drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 200,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub energy: f64,
    pub residual: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSolution {
    pub u: Vec<f64>,
    /// Per-triangle gradient (p, q).
    pub grad: Vec<Vec2>,
    /// Per-triangle W = √(1+p²+q²).
    pub w: Vec<f64>,
    pub ramp_level: Option<f64>,
    pub residual: f64,
    pub energy: f64,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolveError {
    #[error("Newton did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        last: Box<DiscreteSolution>,
    },
    #[error("boundary value missing or not finite at vertex {0}")]
    BadBoundaryValue(usize),
    #[error("configuration is not solvable ({:?})", .0.status)]
    UnsolvableConfiguration(Box<SolvabilityVerdict>),
    #[error("point ({0}, {1}) is outside the Scherk domain")]
    OutOfDomain(f64, f64),
    #[error("ramp schedule must have at least 3 strictly increasing positive levels")]
    BadRamp,
    #[error("anchor vertex {0} is out of range")]
    BadAnchor(usize),
    #[error(transparent)]
    Boundary(#[from] JsError),
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
}

/// Increasing ramp levels substituted for ±∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    levels: Vec<f64>,
}

impl RampSchedule {
    pub fn new(levels: Vec<f64>) -> Result<Self, SolveError> {
        if levels.len() < 3 || levels[0] <= 0.0 || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SolveError::BadRamp);
        }
        Ok(RampSchedule { levels })
    }

    /// `M_n = base · 2ⁿ` for `n = 1..=count`.
    pub fn geometric(base: f64, count: usize) -> Result<Self, SolveError> {
        RampSchedule::new((1..=count).map(|n| base * 2f64.powi(n as i32)).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn top(&self) -> f64 {
        *self.levels.last().unwrap()
    }
}

/// Per-triangle areas and hat-function gradients.
#[derive(Debug, Clone)]
pub struct P1Geometry {
    pub area: Vec<f64>,
    pub grads: Vec<[Vec2; 3]>,
}

impl P1Geometry {
    pub fn new(dom: &MultiDomain) -> Self {
        let m = &dom.mesh;
        let mut area = Vec::with_capacity(m.n_triangles());
        let mut grads = Vec::with_capacity(m.n_triangles());
        for t in 0..m.n_triangles() {
            let [a, b, c] = m.corners(t);
            area.push(m.area(t));
            grads.push(hat_gradients(a, b, c));
        }
        P1Geometry { area, grads }
    }

    pub fn gradient(&self, tri: &[usize; 3], t: usize, u: &[f64]) -> Vec2 {
        let g = &self.grads[t];
        g[0] * u[tri[0]] + g[1] * u[tri[1]] + g[2] * u[tri[2]]
    }
}

impl DiscreteSolution {
    /// Fill gradients and W from vertex values.
    pub fn from_values(dom: &MultiDomain, u: Vec<f64>) -> Self {
        let geo = P1Geometry::new(dom);
        Self::from_values_with(dom, &geo, u)
    }

    fn from_values_with(dom: &MultiDomain, geo: &P1Geometry, u: Vec<f64>) -> Self {
        let m = &dom.mesh;
        let grad: Vec<Vec2> = (0..m.n_triangles()).map(|t| geo.gradient(&m.triangles[t], t, &u)).collect();
        let w: Vec<f64> = grad.iter().map(|g| (1.0 + g.norm2()).sqrt()).collect();
        let energy = w.iter().zip(&geo.area).map(|(w, a)| w * a).sum();
        DiscreteSolution {
            u,
            grad,
            w,
            ramp_level: None,
            residual: 0.0,
            energy,
            iterations: 0,
            trace: Vec::new(),
        }
    }

    /// Same surface shifted vertically.
    pub fn shifted(&self, c: f64) -> Self {
        let mut s = self.clone();
        for x in &mut s.u {
            *x += c;
        }
        s
    }

    pub fn max_w(&self) -> f64 {
        self.w.iter().copied().fold(1.0, f64::max)
    }
}

struct Problem<'a> {
    dom: &'a MultiDomain,
    geo: P1Geometry,
    /// Dof index per vertex, `usize::MAX` on the boundary.
    dof: Vec<usize>,
    free: Vec<usize>,
}

impl<'a> Problem<'a> {
    fn new(dom: &'a MultiDomain) -> Self {
        let mut dof = vec![usize::MAX; dom.n_vertices()];
        let mut free = Vec::new();
        for v in 0..dom.n_vertices() {
            if !dom.is_boundary(v) {
                dof[v] = free.len();
                free.push(v);
            }
        }
        Problem {
            dom,
            geo: P1Geometry::new(dom),
            dof,
            free,
        }
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let m = &self.dom.mesh;
        (0..m.n_triangles())
            .map(|t| {
                let g = self.geo.gradient(&m.triangles[t], t, u);
                self.geo.area[t] * (1.0 + g.norm2()).sqrt()
            })
            .sum()
    }

    /// Gradient of the energy with respect to the free values.
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let m = &self.dom.mesh;
        let mut r = vec![0.0; self.free.len()];
        for (t, tri) in m.triangles.iter().enumerate() {
            let g = self.geo.gradient(tri, t, u);
            let w = (1.0 + g.norm2()).sqrt();
            let a = self.geo.area[t];
            for k in 0..3 {
                let d = self.dof[tri[k]];
                if d != usize::MAX {
                    r[d] += a * g.dot(self.geo.grads[t][k]) / w;
                }
            }
        }
        r
    }

    fn hessian(&self, u: &[f64]) -> SymmetricAssembly {
        let m = &self.dom.mesh;
        let mut h = SymmetricAssembly::with_capacity(self.free.len(), 6 * m.n_triangles());
        for (t, tri) in m.triangles.iter().enumerate() {
            let g = self.geo.gradient(tri, t, u);
            let w2 = 1.0 + g.norm2();
            let w = w2.sqrt();
            let w3 = w2 * w;
            let a = self.geo.area[t];
            let gr = &self.geo.grads[t];
            for i in 0..3 {
                let di = self.dof[tri[i]];
                if di == usize::MAX {
                    continue;
                }
                for j in 0..=i {
                    let dj = self.dof[tri[j]];
                    if dj == usize::MAX {
                        continue;
                    }
                    let v = a * (gr[i].dot(gr[j]) / w - gr[i].dot(g) * gr[j].dot(g) / w3);
                    h.add(di, dj, v);
                }
            }
        }
        h
    }

    /// P1 stiffness (Laplace) solve for the interior given boundary values in `u`.
    fn harmonic_extension(&self, u: &mut [f64], solver: &mut SpdSolver) -> Result<(), SolveError> {
        let m = &self.dom.mesh;
        let mut k = SymmetricAssembly::with_capacity(self.free.len(), 6 * m.n_triangles());
        let mut rhs = vec![0.0; self.free.len()];
        for (t, tri) in m.triangles.iter().enumerate() {
            let a = self.geo.area[t];
            let gr = &self.geo.grads[t];
            for i in 0..3 {
                let di = self.dof[tri[i]];
                if di == usize::MAX {
                    continue;
                }
                for j in 0..3 {
                    let v = a * gr[i].dot(gr[j]);
                    let dj = self.dof[tri[j]];
                    if dj == usize::MAX {
                        rhs[di] -= v * u[tri[j]];
                    } else if j <= i {
                        k.add(di, dj, v);
                    }
                }
            }
        }
        let x = solver.solve(&k, &rhs)?;
        for (d, &v) in self.free.iter().enumerate() {
            u[v] = x[d];
        }
        Ok(())
    }

    fn newton(&self, mut u: Vec<f64>, cfg: &SolverConfig) -> Result<DiscreteSolution, SolveError> {
        let mut solver = SpdSolver::new();
        let mut trace = Vec::new();
        let mut energy = self.energy(&u);
        let mut r = self.residual(&u);
        let mut res = norm(&r);
        let mut iterations = 0;
        let mut converged_at: Option<usize> = None;
        loop {
            trace.push(IterationRecord {
                energy,
                residual: res,
                step: 0.0,
            });
            if res <= cfg.tol && converged_at.is_none() {
                converged_at = Some(iterations);
            }
            // one polishing step past the tolerance, kept only if it helps
            if converged_at.is_some_and(|c| iterations > c) || self.free.is_empty() {
                break;
            }
            if iterations >= cfg.max_iter {
                let mut last = DiscreteSolution::from_values_with(self.dom, &self.geo, u);
                last.residual = res;
                last.iterations = iterations;
                last.trace = trace;
                return Err(SolveError::NonConvergence {
                    residual: res,
                    iterations,
                    last: Box::new(last),
                });
            }
            let h = self.hessian(&u);
            let neg: Vec<f64> = r.iter().map(|x| -x).collect();
            let d = solver.solve(&h, &neg)?;
            let slope: f64 = r.iter().zip(&d).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            let mut accepted = None;
            let roundoff = slope.abs() <= 1e-13 * energy.abs().max(1.0);
            for _ in 0..60 {
                let trial = self.step(&u, &d, t);
                let e = self.energy(&trial);
                if !roundoff && e <= energy + cfg.armijo * t * slope {
                    accepted = Some((trial, e));
                    break;
                }
                if roundoff {
                    let rt = self.residual(&trial);
                    if norm(&rt) < res {
                        accepted = Some((trial, e));
                    }
                    break;
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, e)) => {
                    u = trial;
                    energy = e;
                    r = self.residual(&u);
                    res = norm(&r);
                    iterations += 1;
                    trace.last_mut().unwrap().step = t;
                }
                None => {
                    if res <= cfg.tol {
                        break;
                    }
                    let mut last = DiscreteSolution::from_values_with(self.dom, &self.geo, u);
                    last.residual = res;
                    last.iterations = iterations;
                    last.trace = trace;
                    return Err(SolveError::NonConvergence {
                        residual: res,
                        iterations,
                        last: Box::new(last),
                    });
                }
            }
        }
        let mut sol = DiscreteSolution::from_values_with(self.dom, &self.geo, u);
        sol.residual = res;
        sol.iterations = iterations;
        sol.trace = trace;
        Ok(sol)
    }

    fn step(&self, u: &[f64], d: &[f64], t: f64) -> Vec<f64> {
        let mut out = u.to_vec();
        for (k, &v) in self.free.iter().enumerate() {
            out[v] += t * d[k];
        }
        out
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solve the Dirichlet problem with finite data. `values` is indexed by vertex; only
/// boundary entries are read.
pub fn solve_dirichlet(dom: &MultiDomain, values: &[f64], cfg: &SolverConfig) -> Result<DiscreteSolution, SolveError> {
    solve_dirichlet_from(dom, values, None, cfg)
}

/// As [`solve_dirichlet`], starting Newton from `initial` interior values when given
/// (otherwise from the harmonic extension).
pub fn solve_dirichlet_from(
    dom: &MultiDomain,
    values: &[f64],
    initial: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<DiscreteSolution, SolveError> {
    let p = Problem::new(dom);
    let mut u = vec![0.0; dom.n_vertices()];
    for v in 0..dom.n_vertices() {
        if dom.is_boundary(v) {
            let x = *values.get(v).ok_or(SolveError::BadBoundaryValue(v))?;
            if !x.is_finite() {
                return Err(SolveError::BadBoundaryValue(v));
            }
            u[v] = x;
        }
    }
    match initial {
        Some(init) => {
            for &v in &p.free {
                u[v] = init[v];
            }
        }
        None => p.harmonic_extension(&mut u, &mut SpdSolver::new())?,
    }
    p.newton(u, cfg)
}

/// Per-vertex boundary values for ramp level `m`. Vertices where a +∞ arc meets a −∞ arc
/// get 0; a corner shared with a finite arc takes the finite value.
pub fn ramp_values(dom: &MultiDomain, data: &BoundaryData, m: f64) -> Vec<f64> {
    let mut u = vec![0.0; dom.n_vertices()];
    for &v in &dom.boundary {
        let mut finite = None;
        let (mut plus, mut minus) = (false, false);
        for &ai in dom.arcs_at(v) {
            match &data.arcs[ai] {
                ArcData::Finite(vals) => {
                    let k = dom.arcs[ai].vertices.iter().position(|&x| x == v).unwrap();
                    finite.get_or_insert(vals[k]);
                }
                ArcData::PlusInf => plus = true,
                ArcData::MinusInf => minus = true,
            }
        }
        u[v] = match (finite, plus, minus) {
            (Some(f), _, _) => f,
            (None, true, true) => 0.0,
            (None, true, false) => m,
            (None, false, true) => -m,
            (None, false, false) => 0.0,
        };
    }
    u
}

/// Ramped solves without the solvability gate (for divergence experiments). Solutions are
/// normalized to `u(anchor) = 0` when the data has no finite arc.
pub fn solve_ramped(
    dom: &MultiDomain,
    data: &BoundaryData,
    levels: &[f64],
    anchor: Option<usize>,
    cfg: &SolverConfig,
) -> Result<Vec<DiscreteSolution>, SolveError> {
    data.validate(dom)?;
    let anchor = anchor.unwrap_or_else(|| dom.central_vertex());
    if anchor >= dom.n_vertices() {
        return Err(SolveError::BadAnchor(anchor));
    }
    let normalize = !data.has_finite();
    let mut out = Vec::with_capacity(levels.len());
    let mut prev: Option<Vec<f64>> = None;
    for &m in levels {
        let vals = ramp_values(dom, data, m);
        let sol = match &prev {
            Some(p) => solve_dirichlet_from(dom, &vals, Some(p), cfg),
            None => solve_with_continuation(dom, &vals, cfg),
        }?;
        prev = Some(sol.u.clone());
        let mut sol = if normalize { sol.shifted(-sol.u[anchor]) } else { sol };
        sol.ramp_level = Some(m);
        out.push(sol);
    }
    Ok(out)
}

/// Solve from the harmonic guess, falling back to a homotopy in the boundary data when
/// Newton stalls on steep data.
fn solve_with_continuation(dom: &MultiDomain, vals: &[f64], cfg: &SolverConfig) -> Result<DiscreteSolution, SolveError> {
    match solve_dirichlet(dom, vals, cfg) {
        Ok(s) => Ok(s),
        Err(SolveError::NonConvergence { .. }) => {
            let mut cur: Option<Vec<f64>> = None;
            let steps = 8;
            let mut last = None;
            for k in 1..=steps {
                let s = k as f64 / steps as f64;
                let scaled: Vec<f64> = vals.iter().map(|v| v * s).collect();
                let sol = solve_dirichlet_from(dom, &scaled, cur.as_deref(), cfg)?;
                cur = Some(sol.u.clone());
                last = Some(sol);
            }
            Ok(last.unwrap())
        }
        Err(e) => Err(e),
    }
}

/// Gate on the solvability verdict, then ramp.
pub fn solve_infinite(
    dom: &MultiDomain,
    data: &BoundaryData,
    ramp: &RampSchedule,
    anchor: Option<usize>,
    cfg: &SolverConfig,
) -> Result<Vec<DiscreteSolution>, SolveError> {
    let verdict = check_solvability(dom, data)?;
    if verdict.status == Status::Unsolvable {
        return Err(SolveError::UnsolvableConfiguration(Box::new(verdict)));
    }
    solve_ramped(dom, data, ramp.levels(), anchor, cfg)
}

/// −ln cos x + ln cos y on |x|, |y| < π/2.
pub fn scherk_exact(x: f64, y: f64) -> Result<f64, SolveError> {
    let (cx, cy) = (x.cos(), y.cos());
    if cx <= 0.0 || cy <= 0.0 || x.abs() >= std::f64::consts::FRAC_PI_2 || y.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(SolveError::OutOfDomain(x, y));
    }
    Ok(-cx.ln() + cy.ln())
}

/// Quadratic least-squares fit over the 2-ring of `v`: returns (r, s, t) = (u_xx, u_xy, u_yy).
pub fn second_derivatives(dom: &MultiDomain, sol: &DiscreteSolution, v: usize) -> Option<[f64; 3]> {
    let mut ring: Vec<usize> = vec![v];
    for _ in 0..2 {
        let cur = ring.clone();
        for &x in &cur {
            for &y in &dom.topo.vertex_neighbors[x] {
                if !ring.contains(&y) {
                    ring.push(y);
                }
            }
        }
    }
    if ring.len() < 6 {
        return None;
    }
    let p0 = dom.position(v);
    // unknowns: c, ux, uy, r, s, t with u ≈ c + ux dx + uy dy + r dx²/2 + s dx dy + t dy²/2
    let mut ata = [[0.0f64; 6]; 6];
    let mut atb = [0.0f64; 6];
    for &x in &ring {
        let d = dom.position(x) - p0;
        let row = [1.0, d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y];
        for i in 0..6 {
            for j in 0..6 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * sol.u[x];
        }
    }
    let sol6 = solve_dense6(ata, atb)?;
    Some([sol6[3], sol6[4], sol6[5]])
}

fn solve_dense6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    for c in 0..6 {
        let piv = (c..6).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in (c + 1)..6 {
            let f = a[r][c] / a[c][c];
            for k in c..6 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 6];
    for c in (0..6).rev() {
        let s: f64 = ((c + 1)..6).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBoundsLevel {
    pub m: f64,
    /// sup of u on Ω_α^{β₂}(R/4).
    pub sup_upper: f64,
    /// inf of u on Ω_{β₁}^α(R/4).
    pub inf_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBoundsReport {
    pub alpha: f64,
    pub levels: Vec<SectorBoundsLevel>,
    pub finite: bool,
    /// Relative change of each bound across the top two levels.
    pub sup_change: f64,
    pub inf_change: f64,
    pub stable: bool,
}

/// Relative change `|a−b| / max(|a|, |b|, 1)`.
pub fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Empirical bounds of the sector solutions near the apex, per ramp level.
pub fn sector_bounds_check(sols: &[DiscreteSolution], sector: &SectorDomain, alpha: f64) -> SectorBoundsReport {
    let rmax = sector.radius / 4.0;
    let mut levels = Vec::new();
    for s in sols {
        let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
        for (v, &(r, th)) in sector.polar.iter().enumerate() {
            if r > rmax + 1e-12 {
                continue;
            }
            if v == 0 || th >= alpha - 1e-12 {
                sup = sup.max(s.u[v]);
            }
            if v == 0 || th <= alpha + 1e-12 {
                inf = inf.min(s.u[v]);
            }
        }
        levels.push(SectorBoundsLevel {
            m: s.ramp_level.unwrap_or(f64::NAN),
            sup_upper: sup,
            inf_lower: inf,
        });
    }
    let finite = levels.iter().all(|l| l.sup_upper.is_finite() && l.inf_lower.is_finite());
    let (sup_change, inf_change) = match levels.len() {
        n if n >= 2 => (
            relative_change(levels[n - 1].sup_upper, levels[n - 2].sup_upper),
            relative_change(levels[n - 1].inf_lower, levels[n - 2].inf_lower),
        ),
        _ => (f64::NAN, f64::NAN),
    };
    SectorBoundsReport {
        alpha,
        levels,
        finite,
        sup_change,
        inf_change,
        stable: finite && sup_change <= 0.05 && inf_change <= 0.05,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripSample {
    pub triangle: usize,
    pub x: f64,
    pub p_over_w: f64,
    pub q_over_w: f64,
    pub p_bound: f64,
    pub q_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub eps_h: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub checked: usize,
    pub violations: usize,
    /// Sample with the smallest margin to either bound.
    pub worst: Option<StripSample>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("strip estimate violated on {} triangles", .0.violations)]
pub struct EstimateViolated(pub StripReport);

/// Check |p|/W ≤ √2·a/x + ε_h and |q|/W ≥ 1 − a²/x² − ε_h on centroids with
/// `x_min ≤ x ≤ x_max`, where x runs along the strip and q is the derivative across it.
pub fn strip_gradient_check(
    sol: &DiscreteSolution,
    strip: &StripDomain,
    x_min: f64,
    x_max: f64,
    h: f64,
) -> Result<StripReport, EstimateViolated> {
    let a = strip.a;
    let eps_h = 10.0 * h;
    let m = &strip.domain.mesh;
    let mut checked = 0;
    let mut violations = 0;
    let mut worst: Option<(f64, StripSample)> = None;
    for t in 0..m.n_triangles() {
        let c = m.centroid(t);
        let x = c.x;
        if x < x_min || x > x_max {
            continue;
        }
        checked += 1;
        let g = sol.grad[t];
        let w = sol.w[t];
        let (pw, qw) = (g.x.abs() / w, g.y.abs() / w);
        let pb = 2f64.sqrt() * a / x + eps_h;
        let qb = 1.0 - a * a / (x * x) - eps_h;
        let margin = (pb - pw).min(qw - qb);
        if margin < 0.0 {
            violations += 1;
        }
        let sample = StripSample {
            triangle: t,
            x,
            p_over_w: pw,
            q_over_w: qw,
            p_bound: pb,
            q_bound: qb,
        };
        if worst.as_ref().is_none_or(|(m0, _)| margin < *m0) {
            worst = Some((margin, sample));
        }
    }
    let report = StripReport {
        eps_h,
        x_min,
        x_max,
        checked,
        violations,
        worst: worst.map(|w| w.1),
    };
    if violations > 0 {
        Err(EstimateViolated(report))
    } else {
        Ok(report)
    }
}

/// Boundary data for the strip check: +∞ on the s = 0 side, −∞ on the s = a side, 0 on
/// the base and on the far cap.
pub fn strip_boundary_data(strip: &StripDomain) -> BoundaryData {
    use crate::jscheck::Label;
    BoundaryData::by_tag(
        &strip.domain,
        |t| match t {
            "bottom" => Some(Label::A),
            "top" => Some(Label::B),
            _ => None,
        },
        0.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatgeom::MultiDomain;

    fn square(n: usize) -> MultiDomain {
        MultiDomain::rectangle(Vec2::new(-1.0, -1.0), 2.0, 2.0, n, n).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let d = square(6);
        let s = solve_dirichlet(&d, &vec![0.0; d.n_vertices()], &SolverConfig::default()).unwrap();
        assert!(s.u.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn affine_data_is_reproduced() {
        let d = square(8);
        let f = |p: Vec2| 0.7 * p.x - 1.3 * p.y + 0.2;
        let vals: Vec<f64> = d.mesh.positions.iter().map(|p| f(*p)).collect();
        let s = solve_dirichlet(&d, &vals, &SolverConfig::default()).unwrap();
        for v in 0..d.n_vertices() {
            assert!((s.u[v] - vals[v]).abs() < 1e-10);
        }
        assert!(s.residual <= 1e-10);
    }

    #[test]
    fn scherk_closed_form() {
        assert_eq!(scherk_exact(0.0, 0.0).unwrap(), 0.0);
        assert!(scherk_exact(0.4, 0.4).unwrap().abs() < 1e-15);
        assert!((scherk_exact(std::f64::consts::PI / 3.0, 0.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(scherk_exact(2.0, 0.0).is_err());
    }

    #[test]
    fn energy_trace_decreases() {
        let d = square(10);
        let vals: Vec<f64> = d.mesh.positions.iter().map(|p| (3.0 * p.x).sin() * 2.0 + p.y * p.y).collect();
        let s = solve_dirichlet(&d, &vals, &SolverConfig::default()).unwrap();
        for w in s.trace.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-12 * w[0].energy);
        }
    }

    #[test]
    fn second_derivatives_of_quadratic() {
        let d = square(8);
        let u: Vec<f64> = d.mesh.positions.iter().map(|p| 1.5 * p.x * p.x - p.x * p.y + 0.25 * p.y * p.y).collect();
        let s = DiscreteSolution::from_values(&d, u);
        let v = d.central_vertex();
        let [r, sxy, t] = second_derivatives(&d, &s, v).unwrap();
        assert!((r - 3.0).abs() < 1e-9 && (sxy + 1.0).abs() < 1e-9 && (t - 0.5).abs() < 1e-9);
    }

    #[test]
    fn ramp_rejects_short_schedules() {
        assert!(RampSchedule::new(vec![1.0, 2.0]).is_err());
        assert!(RampSchedule::new(vec![1.0, 3.0, 2.0]).is_err());
        assert!(RampSchedule::new(vec![4.0, 6.0, 8.0]).is_ok());
    }
}
