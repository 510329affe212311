//! Minimal r-noids from flux polygons: exhaustion solves on Ω_k, conjugation, reflection
//! and the checks that go with them.

use crate::conjfield::{conformal_map, conjugate_form, conjugate_surface, flux_along, reflect_union, ConjError, ConjugateField};
use crate::divscan::{detect_divergence_lines, DivScanError, ScanOptions};
use crate::flatgeom::{build_exhaustion_domain, find_embedded_disk, ExhaustionDomain, FlatGeomError, FluxPolygon, PolygonalDisk};
use crate::geom::{Vec2, Vec3};
use crate::jscheck::{check_solvability, ArcData, BoundaryData, Status};
use crate::mesh::TopologyError;
use crate::msesolve::{solve_ramped, DiscreteSolution, SolveError, SolverConfig};
use crate::surface::Surface;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum RnoidError {
    #[error(transparent)]
    Geometry(#[from] FlatGeomError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Conjugate(#[from] ConjError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("exhaustion level k = {k} is {status:?}")]
    SolvabilityFailure { k: f64, status: Status },
    #[error("{lines} divergence line(s) at exhaustion level k = {k}")]
    DivergenceDetected { k: f64, lines: usize },
    #[error("end flux off by {worst:.4}, allowed {bound:.4}")]
    FluxMismatch { worst: f64, bound: f64, result: Box<RnoidResult> },
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
}

/// Truncation lengths with ramp magnitude M(k) = k + m0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExhaustionSchedule {
    pub k: Vec<f64>,
    pub m0: f64,
    pub h: f64,
    /// Disk vertex P₀ where every level is normalized to 0; the disk centre if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<usize>,
}

impl ExhaustionSchedule {
    pub fn new(k: Vec<f64>, m0: f64, h: f64) -> Result<Self, RnoidError> {
        let s = ExhaustionSchedule { k, m0, h, anchor: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_anchor(mut self, anchor: usize) -> Self {
        self.anchor = Some(anchor);
        self
    }

    pub fn validate(&self) -> Result<(), RnoidError> {
        let bad = |m: &str| Err(RnoidError::BadSchedule(m.to_string()));
        if self.k.len() < 3 {
            return bad("at least three truncation lengths are needed");
        }
        if !self.k.iter().all(|k| k.is_finite() && *k > 0.0) {
            return bad("truncation lengths must be positive");
        }
        if self.k.windows(2).any(|w| w[1] <= w[0]) {
            return bad("truncation lengths must increase");
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad("mesh size must be positive");
        }
        if !self.m0.is_finite() || self.ramp(self.k[0]) <= 0.0 {
            return bad("ramp magnitude must be positive");
        }
        Ok(())
    }

    pub fn ramp(&self, k: f64) -> f64 {
        k + self.m0
    }
}

/// Continuation levels used inside one exhaustion level.
fn inner_levels(m: f64) -> [f64; 3] {
    [0.25 * m, 0.5 * m, m]
}

/// +∞ on [P_i, Q_i], −∞ on [Q_i, P_{i+1}].
pub fn exhaustion_data(ex: &ExhaustionDomain) -> BoundaryData {
    let mut arcs = vec![ArcData::PlusInf; ex.domain.arcs.len()];
    for &a in &ex.minus_arcs {
        arcs[a] = ArcData::MinusInf;
    }
    BoundaryData::new(arcs)
}

#[derive(Debug, Clone)]
pub struct ExhaustionLevel {
    pub k: f64,
    pub m: f64,
    pub domain: ExhaustionDomain,
    /// Continuation solves at M/4, M/2 and M; the last is the level's solution.
    pub ramp: Vec<DiscreteSolution>,
}

impl ExhaustionLevel {
    pub fn solution(&self) -> &DiscreteSolution {
        self.ramp.last().unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct ExhaustionRun {
    pub disk: PolygonalDisk,
    pub anchor: usize,
    pub levels: Vec<ExhaustionLevel>,
    /// max over the disk of |u_{k_j} − u_{k_{j−1}}|, for j ≥ 1.
    pub successive_diff: Vec<f64>,
}

/// Saved state of one exhaustion level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCheckpoint {
    pub k: f64,
    pub m: f64,
    pub h: f64,
    pub anchor: usize,
    pub n_vertices: usize,
    pub ramp: Vec<DiscreteSolution>,
}

fn checkpoint_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("level_{i:02}.json"))
}

fn load_checkpoint(path: &Path) -> Result<Option<LevelCheckpoint>, RnoidError> {
    if !path.exists() {
        return Ok(None);
    }
    let err = |reason: String| RnoidError::Checkpoint {
        path: path.to_path_buf(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    serde_json::from_str(&text).map(Some).map_err(|e| err(e.to_string()))
}

fn save_checkpoint(path: &Path, c: &LevelCheckpoint) -> Result<(), RnoidError> {
    let err = |reason: String| RnoidError::Checkpoint {
        path: path.to_path_buf(),
        reason,
    };
    let text = serde_json::to_string(c).map_err(|e| err(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| err(e.to_string()))
}

pub fn exhaustion_solve(disk: &PolygonalDisk, sched: &ExhaustionSchedule) -> Result<ExhaustionRun, RnoidError> {
    exhaustion_solve_in(disk, sched, None)
}

/// Like [`exhaustion_solve`], reading and writing per-level checkpoints in `dir`.
pub fn exhaustion_solve_in(
    disk: &PolygonalDisk,
    sched: &ExhaustionSchedule,
    dir: Option<&Path>,
) -> Result<ExhaustionRun, RnoidError> {
    sched.validate()?;
    let anchor = sched.anchor.unwrap_or_else(|| disk.domain.central_vertex());
    if anchor >= disk.domain.n_vertices() {
        return Err(RnoidError::BadSchedule(format!("anchor {anchor} is not a disk vertex")));
    }
    let cfg = SolverConfig::default();
    let mut levels = Vec::with_capacity(sched.k.len());
    for (i, &k) in sched.k.iter().enumerate() {
        let domain = build_exhaustion_domain(disk, k)?;
        let m = sched.ramp(k);
        let dom = &domain.domain;
        let data = exhaustion_data(&domain);
        let verdict = check_solvability(dom, &data).map_err(SolveError::from)?;
        if verdict.status == Status::Unsolvable {
            return Err(RnoidError::SolvabilityFailure { k, status: verdict.status });
        }
        let cached = match dir {
            Some(d) => load_checkpoint(&checkpoint_path(d, i))?.filter(|c| {
                c.k == k && c.m == m && c.h == sched.h && c.anchor == anchor && c.n_vertices == dom.n_vertices()
            }),
            None => None,
        };
        let ramp = match cached {
            Some(c) => c.ramp,
            None => {
                let ramp = solve_ramped(dom, &data, &inner_levels(m), Some(anchor), &cfg)?;
                if let Some(d) = dir {
                    let c = LevelCheckpoint {
                        k,
                        m,
                        h: sched.h,
                        anchor,
                        n_vertices: dom.n_vertices(),
                        ramp,
                    };
                    save_checkpoint(&checkpoint_path(d, i), &c)?;
                    c.ramp
                } else {
                    ramp
                }
            }
        };
        // the ±∞ arcs are ramped everywhere; their layers widen where strip cells stretch
        let opts = ScanOptions {
            exclusion_distance: 6.0 * sched.h,
            ..ScanOptions::excluding((0..dom.arcs.len()).collect())
        };
        match detect_divergence_lines(dom, &ramp, &opts) {
            Ok(rep) => return Err(RnoidError::DivergenceDetected { k, lines: rep.lines.len() }),
            Err(DivScanError::NoDivergence) => {}
            Err(e) => return Err(RnoidError::BadSchedule(e.to_string())),
        }
        log::info!("exhaustion level k={k} M={m}: {} vertices", dom.n_vertices());
        levels.push(ExhaustionLevel { k, m, domain, ramp });
    }
    let nd = disk.domain.n_vertices();
    let successive_diff = levels
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].solution(), w[1].solution());
            (0..nd).map(|v| (a.u[v] - b.u[v]).abs()).fold(0.0, f64::max)
        })
        .collect();
    Ok(ExhaustionRun {
        disk: disk.clone(),
        anchor,
        levels,
        successive_diff,
    })
}

/// |∫ dΨ| along each disk edge chain P_i → P_{i+1}.
pub fn corner_fluxes(ex: &ExhaustionDomain, field: &ConjugateField) -> Result<Vec<f64>, RnoidError> {
    ex.disk
        .chains
        .iter()
        .map(|c| Ok(flux_along(field, &ex.domain, c)?.abs()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexBehaviour {
    pub corner: usize,
    pub vertex: usize,
    /// min Ψ − Ψ(P) over the two-ring of P.
    pub min_psi_near: f64,
    /// max |Ψ(Q) − Ψ(P) − |PQ|| over ray vertices Q within `ray_radius` of P.
    pub ray_error: f64,
    pub ray_radius: f64,
    /// Distance from P to the level sets {u = M/2} and {u = −M/2}, per continuation level.
    pub level_set_distance: Vec<[f64; 2]>,
    pub approaching: bool,
}

/// Distance from `p` to the level set {u = c} over edges not touching `skip`.
fn level_set_distance(ex: &ExhaustionDomain, sol: &DiscreteSolution, c: f64, skip: usize) -> f64 {
    let dom = &ex.domain;
    let p = dom.position(skip);
    let mut best = f64::INFINITY;
    for e in &dom.topo.edges {
        if e[0] == skip || e[1] == skip {
            continue;
        }
        let (ua, ub) = (sol.u[e[0]] - c, sol.u[e[1]] - c);
        if ua * ub > 0.0 || ua == ub {
            continue;
        }
        let t = ua / (ua - ub);
        let x = dom.position(e[0]) + (dom.position(e[1]) - dom.position(e[0])) * t;
        best = best.min(x.dist(p));
    }
    best
}

/// Behaviour of a level near the corner P_i, where a +∞ and a −∞ ray meet.
pub fn verify_vertex_behaviour(level: &ExhaustionLevel, field: &ConjugateField, corner: usize) -> VertexBehaviour {
    let ex = &level.domain;
    let dom = &ex.domain;
    let p = ex.disk.corners[corner];
    let pp = dom.position(p);
    let hops = dom.topo.hop_distance([p]);
    let min_psi_near = (0..dom.n_vertices())
        .filter(|&v| hops[v] <= 2)
        .map(|v| field.psi[v] - field.psi[p])
        .fold(f64::INFINITY, f64::min);
    let r = ex.disk.r();
    let ray_radius = 0.5 * ex.disk.edge_vector(corner).norm().min(ex.disk.edge_vector((corner + r - 1) % r).norm());
    let rays = [ex.plus_arcs[corner], ex.minus_arcs[(corner + r - 1) % r]];
    let mut ray_error: f64 = 0.0;
    for a in rays {
        for &q in &dom.arcs[a].vertices {
            let d = dom.position(q).dist(pp);
            if q != p && d <= ray_radius {
                ray_error = ray_error.max((field.psi[q] - field.psi[p] - d).abs());
            }
        }
    }
    let level_set_distance: Vec<[f64; 2]> = level
        .ramp
        .iter()
        .map(|s| {
            let m = s.ramp_level.unwrap_or(level.m);
            [level_set_distance(ex, s, 0.5 * m, p), level_set_distance(ex, s, -0.5 * m, p)]
        })
        .collect();
    let n = level_set_distance.len();
    let approaching = n >= 2 && (0..2).all(|j| level_set_distance[n - 1][j] <= level_set_distance[n - 2][j]);
    VertexBehaviour {
        corner,
        vertex: p,
        min_psi_near,
        ray_error,
        ray_radius,
        level_set_distance,
        approaching,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub eps: f64,
    /// Triangles with every vertex at height above `eps` in absolute value.
    pub checked: usize,
    pub satisfied: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnoidResult {
    pub r: usize,
    pub h: f64,
    pub k: Vec<f64>,
    pub m: Vec<f64>,
    pub successive_diff: Vec<f64>,
    /// Σ = M* ∪ S(M*), oriented so that N₃ ≥ 0 on the upper half.
    pub sigma: Surface,
    /// Upper-half vertex count; upper vertex v is also vertex v of the last Ω_k.
    pub n_upper: usize,
    pub mirror: Vec<usize>,
    /// Strip index and distance from the disk for upper vertices in a strip.
    pub strip_x: Vec<Option<(usize, f64)>>,
    /// Measured end fluxes in the frame of the flux polygon.
    pub fluxes: Vec<Vec2>,
    pub targets: Vec<Vec2>,
    /// max |f_i − 2v_i| / max |2v_i|.
    pub flux_error: f64,
    /// |Σ f_i| / max |2v_i|.
    pub flux_balance: f64,
    pub psi_corners: Vec<f64>,
    pub psi_interior_min: f64,
    /// |∫ dΨ| along each disk edge, per level.
    pub corner_fluxes: Vec<Vec<f64>>,
    /// max |x₃*| over the curves glued by the reflection.
    pub planarity: f64,
    pub planarity_tol: f64,
    pub strong_symmetry: SymmetryCheck,
    pub capped_euler: i64,
    pub ends: usize,
    /// Σ of angle defects over Σ.
    pub total_curvature: f64,
    pub vertex_behaviour: Vec<VertexBehaviour>,
}

impl RnoidResult {
    pub fn corner_flux_max(&self) -> f64 {
        self.corner_fluxes.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn psi_corner_spread(&self) -> f64 {
        let lo = self.psi_corners.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.psi_corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }
}

/// Unit conormal of triangle `t` along edge (a, b), pointing into the triangle, times |ab|.
fn inward_conormal(s: &Surface, t: usize, a: usize, b: usize) -> Vec3 {
    let tri = s.triangles[t];
    let c = *tri.iter().find(|&&v| v != a && v != b).unwrap();
    let (pa, pb, pc) = (s.positions[a], s.positions[b], s.positions[c]);
    let e = pb - pa;
    let w = pc - pa;
    let perp = w - e * (w.dot(e) / e.dot(e));
    perp.normalized() * e.norm()
}

/// Conormal flux through the image of disk chain i, doubled by the reflection (the mirror
/// half adds the same horizontal part and cancels the vertical one). The conormal points
/// back toward the disk; with x* = (η − y, x − ξ, Ψ) that orientation reproduces the
/// polygon edges rather than their negatives.
pub fn end_flux(ex: &ExhaustionDomain, upper: &Surface, i: usize) -> Vec3 {
    let dom = &ex.domain;
    let nd = ex.disk.domain.n_triangles();
    let mut f = Vec3::ZERO;
    for w in ex.disk.chains[i].windows(2) {
        let (a, b) = (w[0], w[1]);
        let e = dom.topo.edge_index[&(a.min(b), a.max(b))];
        let sides: Vec<usize> = dom.topo.edge_tris[e].iter().copied().filter(|&t| t != usize::MAX).collect();
        let mut acc = Vec3::ZERO;
        for &t in &sides {
            let c = inward_conormal(upper, t, a, b);
            acc += if t >= nd { -c } else { c };
        }
        f += acc * (1.0 / sides.len() as f64);
    }
    Vec3::new(2.0 * f.x, 2.0 * f.y, 0.0)
}

/// Full pipeline from a flux polygon.
pub fn build_rnoid(fluxes: &FluxPolygon, sched: &ExhaustionSchedule) -> Result<RnoidResult, RnoidError> {
    build_rnoid_in(fluxes, sched, None)
}

pub fn build_rnoid_in(fluxes: &FluxPolygon, sched: &ExhaustionSchedule, dir: Option<&Path>) -> Result<RnoidResult, RnoidError> {
    sched.validate()?;
    let disk = find_embedded_disk(fluxes, sched.h)?;
    let run = exhaustion_solve_in(&disk, sched, dir)?;
    rnoid_from_run(&run)
}

/// Conjugate, reflect and measure the last level of an exhaustion run.
pub fn rnoid_from_run(run: &ExhaustionRun) -> Result<RnoidResult, RnoidError> {
    let disk = &run.disk;
    let r = disk.r();
    let h = disk.domain.h();
    let mut per_level = Vec::with_capacity(run.levels.len());
    for lvl in &run.levels {
        let f = conjugate_form(&lvl.domain.domain, lvl.solution(), Some(disk.corners[0]))?;
        per_level.push(corner_fluxes(&lvl.domain, &f)?);
    }
    let last = run.levels.last().unwrap();
    let ex = &last.domain;
    let dom = &ex.domain;
    let sol = last.solution();
    let field = conjugate_form(dom, sol, Some(disk.corners[0]))?;
    let cmesh = conformal_map(dom, sol)?;
    let cs = conjugate_surface(dom, sol, &field, &cmesh)?;
    let tags: Vec<String> = disk
        .corners
        .iter()
        .map(|c| {
            let i = dom.domain_vertices.iter().position(|d| d == c).expect("corner is a domain vertex");
            format!("corner{i}")
        })
        .collect();
    let tag_refs: Vec<&str> = tags.iter().map(String::as_str).collect();
    let planarity = cs.max_height(&tag_refs)?;
    let planarity_tol = 5.0 * h * disk.domain.diameter();
    let mut refl = reflect_union(&cs, &tag_refs, planarity_tol)?;
    let n_upper = refl.n_upper;
    let upper_tris = dom.n_triangles();
    // orientation: N₃ ≥ 0 on most upper triangles (steep sliders near corners vote too
    // loudly when weighted by area)
    let up_votes: i64 = (0..upper_tris)
        .map(|t| match refl.surface.area_vector(t).z {
            z if z > 0.0 => 1,
            z if z < 0.0 => -1,
            _ => 0,
        })
        .sum();
    if up_votes < 0 {
        for t in refl.surface.triangles.iter_mut() {
            t.swap(1, 2);
        }
    }
    let sigma = refl.surface;
    let eps = h;
    let (mut checked, mut satisfied) = (0, 0);
    for t in 0..sigma.n_triangles() {
        let zs = sigma.triangles[t].map(|v| sigma.positions[v].z);
        let upper = zs.iter().all(|z| *z > eps);
        let lower = zs.iter().all(|z| *z < -eps);
        if !(upper || lower) {
            continue;
        }
        checked += 1;
        let n3 = sigma.normal(t).z;
        if (upper && n3 >= -eps) || (lower && n3 <= eps) {
            satisfied += 1;
        }
    }
    let strong_symmetry = SymmetryCheck {
        eps,
        checked,
        satisfied,
        fraction: if checked == 0 { 1.0 } else { satisfied as f64 / checked as f64 },
    };
    let lin = disk.placement.linear;
    // placement maps polygon vectors to developed ones, so its transpose maps back
    let to_poly = |v: Vec3| Vec2::new(lin[0][0] * v.x + lin[1][0] * v.y, lin[0][1] * v.x + lin[1][1] * v.y);
    let measured: Vec<Vec2> = (0..r).map(|i| to_poly(end_flux(ex, &cs.surface, i))).collect();
    let targets: Vec<Vec2> = disk.fluxes.vectors.iter().map(|v| *v * 2.0).collect();
    let scale = targets.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let flux_error = measured.iter().zip(&targets).map(|(f, t)| f.dist(*t)).fold(0.0, f64::max) / scale;
    let flux_balance = measured.iter().fold(Vec2::ZERO, |a, f| a + *f).norm() / scale;
    let psi_corners = disk.corners.iter().map(|&c| field.psi[c]).collect();
    let psi_interior_min = dom.interior_vertices().map(|v| field.psi[v]).fold(f64::INFINITY, f64::min);
    let topo = sigma.topology()?;
    let capped_euler = sigma.euler_characteristic() + topo.boundary_loops.len() as i64;
    let total_curvature = sigma.angle_defects(&topo).iter().sum();
    let strip_x = ex.strip_coords.iter().map(|c| c.map(|c| (c.strip, c.x))).collect();
    let vertex_behaviour = (0..r).map(|i| verify_vertex_behaviour(last, &field, i)).collect();
    let result = RnoidResult {
        r,
        h,
        k: run.levels.iter().map(|l| l.k).collect(),
        m: run.levels.iter().map(|l| l.m).collect(),
        successive_diff: run.successive_diff.clone(),
        sigma,
        n_upper,
        mirror: refl.mirror,
        strip_x,
        fluxes: measured,
        targets,
        flux_error,
        flux_balance,
        psi_corners,
        psi_interior_min,
        corner_fluxes: per_level,
        planarity,
        planarity_tol,
        strong_symmetry,
        capped_euler,
        ends: topo.boundary_loops.len(),
        total_curvature,
        vertex_behaviour,
    };
    if flux_error > 0.1 {
        return Err(RnoidError::FluxMismatch {
            worst: flux_error * scale,
            bound: 0.1 * scale,
            result: Box::new(result),
        });
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBand {
    pub x0: f64,
    /// ∫|K| over strip vertices with x0 ≤ x ≤ window end, both halves of Σ.
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    /// −Σ angle defects: ∫|K| for a minimal surface, where K ≤ 0.
    pub total_abs: f64,
    /// Σ |angle defect|, which also counts sign noise.
    pub total_unsigned: f64,
    pub disk_abs: f64,
    pub tails: Vec<TailBand>,
    /// Strips are cut at k − 3a, leaving out the zone where the truncated tip Q_i bends Σ.
    pub window_end: f64,
    /// tail(2x₀)/tail(x₀) for consecutive bands.
    pub tail_ratios: Vec<f64>,
    /// ∫|K| / 4π.
    pub degree_estimate: f64,
    /// Most frequent |signed preimage count| over `regular_values`.
    pub degree_oracle: usize,
    pub regular_values: Vec<Vec3>,
    pub preimage_counts: Vec<i64>,
}

/// Largest angle between vertex normals of a triangle counted by the degree oracle.
pub const RESOLVED_SPREAD_DEG: f64 = 45.0;

/// Gauss-map sample directions: `n` golden-angle points on the band 0.2 ≤ |N₃| ≤ 0.9,
/// alternating hemispheres, clear of the poles (the end normals) and the equator.
pub fn regular_values(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            let z = (0.2 + 0.7 * t) * if i % 2 == 0 { 1.0 } else { -1.0 };
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64 + 0.37;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Signed count of triangles whose spherical triangle of vertex normals contains `n`: each
/// hit counts ±1 by the orientation of the normals, so folds cancel in pairs. Triangles whose
/// vertex normals differ by more than `max_spread` radians do not resolve the Gauss map and
/// are skipped.
pub fn gauss_preimages(s: &Surface, n: Vec3, max_spread: f64) -> i64 {
    let normals = s.vertex_normals();
    let cos_lim = max_spread.cos();
    s.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|v| normals[v]);
            if a.dot(b) < cos_lim || b.dot(c) < cos_lim || c.dot(a) < cos_lim {
                return 0;
            }
            if a.dot(n) <= 0.0 || b.dot(n) <= 0.0 || c.dot(n) <= 0.0 {
                return 0;
            }
            let s1 = a.cross(b).dot(n);
            let s2 = b.cross(c).dot(n);
            let s3 = c.cross(a).dot(n);
            if s1 > 0.0 && s2 > 0.0 && s3 > 0.0 {
                1
            } else if s1 < 0.0 && s2 < 0.0 && s3 < 0.0 {
                -1
            } else {
                0
            }
        })
        .sum()
}

/// Curvature split into disk and strip tails beyond x₀ ∈ {2a, 4a, 8a}, where `a` is the strip
/// width.
pub fn total_curvature_report(result: &RnoidResult, a: f64) -> Result<CurvatureReport, RnoidError> {
    let k = result.k.last().copied().unwrap_or(0.0);
    let window_end = k - 3.0 * a;
    let s = &result.sigma;
    let topo = s.topology()?;
    let defects = s.angle_defects(&topo);
    // per Σ vertex: the upper vertex it came from
    let mut source = vec![0; s.n_vertices()];
    for (v, &m) in result.mirror.iter().enumerate() {
        source[v] = v;
        source[m] = v;
    }
    let total_abs: f64 = -defects.iter().sum::<f64>();
    let total_unsigned: f64 = defects.iter().map(|d| d.abs()).sum();
    let mut disk_abs = 0.0;
    let bands = [2.0 * a, 4.0 * a, 8.0 * a];
    let mut tails = bands.map(|x0| TailBand { x0, tail: 0.0 });
    for (v, d) in defects.iter().enumerate() {
        match result.strip_x[source[v]] {
            Some((_, x)) if x > 0.0 => {
                for b in tails.iter_mut() {
                    if x >= b.x0 && x <= window_end {
                        b.tail += d.abs();
                    }
                }
            }
            _ => disk_abs += d.abs(),
        }
    }
    let tail_ratios = tails
        .windows(2)
        .map(|w| if w[0].tail > 0.0 { w[1].tail / w[0].tail } else { 0.0 })
        .collect();
    let regular_values = regular_values(40);
    let preimage_counts: Vec<i64> = regular_values
        .iter()
        .map(|&n| gauss_preimages(s, n, RESOLVED_SPREAD_DEG.to_radians()))
        .collect();
    let mut freq = std::collections::BTreeMap::new();
    for c in &preimage_counts {
        *freq.entry(c.unsigned_abs()).or_insert(0usize) += 1;
    }
    // ties go to the larger count: truncation only ever removes preimages
    let degree_oracle = freq.iter().max_by_key(|(c, f)| (**f, **c)).map_or(0, |(c, _)| *c as usize);
    Ok(CurvatureReport {
        total_abs,
        total_unsigned,
        disk_abs,
        tails: tails.to_vec(),
        window_end,
        tail_ratios,
        degree_estimate: total_abs / (4.0 * PI),
        degree_oracle,
        regular_values,
        preimage_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub anchors: [usize; 2],
    /// max over the disk of |(u − u′) − mean(u − u′)|.
    pub deviation: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Solve twice with different anchors and compare on the disk, up to a constant.
pub fn uniqueness_check(disk: &PolygonalDisk, sched: &ExhaustionSchedule, anchor2: usize) -> Result<UniquenessReport, RnoidError> {
    let a = exhaustion_solve(disk, sched)?;
    let b = exhaustion_solve(disk, &sched.clone().with_anchor(anchor2))?;
    let (ua, ub) = (&a.levels.last().unwrap().solution().u, &b.levels.last().unwrap().solution().u);
    let nd = disk.domain.n_vertices();
    let diff: Vec<f64> = (0..nd).map(|v| ua[v] - ub[v]).collect();
    let mean = diff.iter().sum::<f64>() / nd as f64;
    let deviation = diff.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max);
    let bound = 3.0 * (SolverConfig::default().tol + sched.h);
    Ok(UniquenessReport {
        anchors: [a.anchor, b.anchor],
        deviation,
        bound,
        ok: deviation <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_are_validated() {
        assert!(ExhaustionSchedule::new(vec![2.0, 4.0], 4.0, 0.1).is_err());
        assert!(ExhaustionSchedule::new(vec![2.0, 4.0, 3.0], 4.0, 0.1).is_err());
        assert!(ExhaustionSchedule::new(vec![2.0, 4.0, 8.0], -3.0, 0.1).is_err());
        let s = ExhaustionSchedule::new(vec![2.0, 4.0, 8.0], 4.0, 0.1).unwrap();
        assert_eq!(s.ramp(4.0), 8.0);
    }

    #[test]
    fn degenerate_polygon_is_rejected() {
        let p = FluxPolygon {
            vectors: vec![Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)],
        };
        let s = ExhaustionSchedule::new(vec![2.0, 4.0, 8.0], 4.0, 0.1).unwrap();
        assert!(matches!(build_rnoid(&p, &s), Err(RnoidError::Geometry(FlatGeomError::DegeneratePolygon(_)))));
    }

    #[test]
    fn preimages_on_an_octahedron() {
        let p = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ];
        let t = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        let s = Surface::new(p, t);
        assert_eq!(gauss_preimages(&s, Vec3::new(0.3, 0.2, 0.9).normalized(), PI).abs(), 1);
    }
}
