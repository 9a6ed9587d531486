//! Scale-normalized parabolic regularity quantities: parabolic distances,
//! the partial third-order parabolic norm of a pair (metric, space-time
//! potential), its behavior under parabolic scalings, the normalized
//! K-quantity found by bisection over scales, its region supremum, and the
//! observational regularity probe over flow ensembles.
//!
//! The norm machinery assumes a constant base metric; the background metric
//! fixing the unit parabolic ball is the flat product metric of the chart.

use crate::density;
use crate::diff;
use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::flow::Trajectory;
use crate::grid::Grid;
use crate::metric::MetricData;
use crate::smat::{SMat, MAX_DIM};

#[derive(Debug, Clone, Copy)]
pub struct SpaceTimePoint {
    pub x: [f64; MAX_DIM],
    pub t: f64,
}

/// Space-time region `U × [t_lo, t_hi)` with `U` a sub-box of the chart.
#[derive(Debug, Clone, Copy)]
pub struct Region {
    pub lo: [f64; MAX_DIM],
    pub hi: [f64; MAX_DIM],
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Region {
    pub fn contains(&self, q: &SpaceTimePoint, n: usize) -> bool {
        (0..n).all(|a| q.x[a] >= self.lo[a] - 1e-12 && q.x[a] <= self.hi[a] + 1e-12)
            && q.t >= self.t_lo - 1e-12
            && q.t < self.t_hi + 1e-12
    }

    /// Image under the parabolic time scaling `t ↦ κ(t − t0)`.
    pub fn scale_time(&self, kappa: f64, t0: f64) -> Region {
        Region {
            lo: self.lo,
            hi: self.hi,
            t_lo: kappa * (self.t_lo - t0),
            t_hi: kappa * (self.t_hi - t0),
        }
    }
}

/// Parabolic distance `max(d_g, sqrt|Δt|)` for a constant metric; straight
/// x-displacements have Riemannian length `sqrt(2 Δxᵀ g Δx)`.
pub fn parabolic_dist(q1: &SpaceTimePoint, q2: &SpaceTimePoint, g: &SMat) -> f64 {
    let mut dx = [0.0; MAX_DIM];
    for a in 0..g.dim {
        dx[a] = q1.x[a] - q2.x[a];
    }
    let spatial = (2.0 * g.quad_form(&dx)).sqrt();
    spatial.max((q1.t - q2.t).abs().sqrt())
}

/// Parabolic distance from `q` to the boundary of the region: the minimum of
/// the metric distance to the spatial complement and the square roots of the
/// two time gaps.
pub fn boundary_dist(q: &SpaceTimePoint, region: &Region, g: &SMat) -> Result<f64> {
    let n = g.dim;
    if !region.contains(q, n) {
        return Err(CoreError::Invalid("point outside the region".into()));
    }
    let ginv = g.inverse()?;
    let mut spatial = f64::INFINITY;
    for a in 0..n {
        // exact metric distance to the face planes {x_a = lo}, {x_a = hi}
        let scale = (2.0 / ginv.a[a][a]).sqrt();
        spatial = spatial.min(scale * (q.x[a] - region.lo[a]).abs());
        spatial = spatial.min(scale * (region.hi[a] - q.x[a]).abs());
    }
    Ok(spatial
        .min((region.t_hi - q.t).max(0.0).sqrt())
        .min((q.t - region.t_lo).max(0.0).sqrt()))
}

/// A pair (constant metric, space-time scalar field) sampled on the grid at
/// uniformly spaced times.
#[derive(Debug, Clone)]
pub struct STPair {
    pub grid: Grid,
    pub g: SMat,
    pub times: Vec<f64>,
    pub fields: Vec<ScalarField>,
}

impl STPair {
    pub fn from_trajectory(traj: &Trajectory) -> Result<STPair> {
        let g = match &traj.metric.data {
            MetricData::Constant(m) => *m,
            MetricData::Varying(_) => {
                return Err(CoreError::Invalid(
                    "norm machinery requires a constant metric".into(),
                ))
            }
        };
        Ok(STPair {
            grid: traj.grid.clone(),
            g,
            times: traj.times.clone(),
            fields: traj.phis.clone(),
        })
    }

    /// Parabolic scaling `D_λ^{t0}`: metric `λ g`, field `λ f(t0 + t/λ)` on
    /// the stretched time axis (materialized on the shared samples).
    pub fn scale(&self, lambda: f64, t0: f64) -> STPair {
        STPair {
            grid: self.grid.clone(),
            g: self.g.scale(lambda),
            times: self.times.iter().map(|t| lambda * (t - t0)).collect(),
            fields: self.fields.iter().map(|f| f.scale(lambda)).collect(),
        }
    }

    fn uniform_dt(&self) -> Result<f64> {
        if self.times.len() < 3 {
            return Err(CoreError::TooFewSnapshots {
                need: 3,
                have: self.times.len(),
            });
        }
        let dt = self.times[1] - self.times[0];
        for w in self.times.windows(2) {
            let d = w[1] - w[0];
            if ((d - dt) / dt).abs() > 1e-9 {
                return Err(CoreError::NonuniformSampling { dt0: dt, dt1: d });
            }
        }
        Ok(dt)
    }
}

#[inline]
fn t3_index(j: usize, k: usize, l: usize) -> usize {
    (j * MAX_DIM + k) * MAX_DIM + l
}

/// Precomputed derivative tables of a pair: per time sample, the measured
/// `∂t f`, `∂t ∇f` components and the third-derivative cube (half-derivative
/// convention throughout). Independent of the probe point.
pub struct DerivTables {
    pub dtf: Vec<ScalarField>,
    /// `[time][node] -> n components`.
    pub dt_grad: Vec<Vec<[f64; MAX_DIM]>>,
    /// `[time][node] -> 27 cube entries` (symmetric, only `n³` used).
    pub third: Vec<Vec<[f64; 27]>>,
}

fn time_derivative(fields: &[ScalarField], dt: f64) -> Vec<ScalarField> {
    let m = fields.len();
    (0..m)
        .map(|k| {
            let data: Vec<f64> = (0..fields[0].len())
                .map(|i| {
                    if k == 0 {
                        (-3.0 * fields[0].data[i] + 4.0 * fields[1].data[i] - fields[2].data[i])
                            / (2.0 * dt)
                    } else if k + 1 == m {
                        (3.0 * fields[m - 1].data[i] - 4.0 * fields[m - 2].data[i]
                            + fields[m - 3].data[i])
                            / (2.0 * dt)
                    } else {
                        (fields[k + 1].data[i] - fields[k - 1].data[i]) / (2.0 * dt)
                    }
                })
                .collect();
            ScalarField { data }
        })
        .collect()
}

pub fn build_tables(pair: &STPair) -> Result<DerivTables> {
    let dt = pair.uniform_dt()?;
    let grid = &pair.grid;
    let n = grid.n;
    let dtf = time_derivative(&pair.fields, dt);

    // half-gradients per time, then their time derivative
    let mut grads: Vec<Vec<ScalarField>> = Vec::new();
    for f in &pair.fields {
        let mut per_axis = Vec::new();
        for a in 0..n {
            per_axis.push(diff::d1(grid, f, a)?.scale(0.5));
        }
        grads.push(per_axis);
    }
    let mut dt_grad = Vec::new();
    for a in 0..n {
        let series: Vec<ScalarField> = grads.iter().map(|g| g[a].clone()).collect();
        dt_grad.push(time_derivative(&series, dt));
    }
    let dt_grad: Vec<Vec<[f64; MAX_DIM]>> = (0..pair.times.len())
        .map(|m| {
            (0..grid.num_nodes())
                .map(|i| {
                    let mut v = [0.0; MAX_DIM];
                    for a in 0..n {
                        v[a] = dt_grad[a][m].data[i];
                    }
                    v
                })
                .collect()
        })
        .collect();

    let mut third = Vec::new();
    for f in &pair.fields {
        let mut cube = vec![[0.0f64; 27]; grid.num_nodes()];
        for j in 0..n {
            for k in j..n {
                for l in k..n {
                    let d = diff::d3(grid, f, [j, k, l])?;
                    for node in 0..grid.num_nodes() {
                        let v = 0.125 * d.data[node];
                        // symmetrize over all index orders
                        let perms = [
                            (j, k, l),
                            (j, l, k),
                            (k, j, l),
                            (k, l, j),
                            (l, j, k),
                            (l, k, j),
                        ];
                        for (a, b, c) in perms {
                            cube[node][t3_index(a, b, c)] = v;
                        }
                    }
                }
            }
        }
        third.push(cube);
    }
    Ok(DerivTables {
        dtf,
        dt_grad,
        third,
    })
}

struct NormPoint {
    x: [f64; MAX_DIM],
    dt_abs: f64,
    dtf: f64,
    s: [f64; MAX_DIM],
    t3: [f64; 27],
    s_norm: f64,
    t3_norm: f64,
}

fn covector_norm(ginv: &SMat, v: &[f64; MAX_DIM]) -> f64 {
    ginv.quad_form(v).max(0.0).sqrt()
}

fn cube_norm(ginv: &SMat, n: usize, t: &[f64; 27]) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        for jp in 0..n {
            for k in 0..n {
                for kp in 0..n {
                    for l in 0..n {
                        for lp in 0..n {
                            s += ginv.a[j][jp]
                                * ginv.a[k][kp]
                                * ginv.a[l][lp]
                                * t[t3_index(j, k, l)]
                                * t[t3_index(jp, kp, lp)];
                        }
                    }
                }
            }
        }
    }
    s.max(0.0).sqrt()
}

/// Norm evaluator for one probe point: carries the sample points of
/// `B(Q) ∩ V` grouped by time radius, with cumulative pair suprema so a
/// whole bisection costs one pass over pairs.
pub struct NormEvaluator {
    alpha: f64,
    /// Points sorted by increasing `|t − t0|`.
    pts: Vec<NormPoint>,
    /// Distinct time radii and, per radius, the index one past its last
    /// point plus the cumulative Hölder suprema up to that radius.
    radii: Vec<(f64, usize, f64, f64)>,
}

impl NormEvaluator {
    pub fn build(
        pair: &STPair,
        tables: &DerivTables,
        q: &SpaceTimePoint,
        alpha: f64,
        region: &Region,
    ) -> Result<NormEvaluator> {
        let grid = &pair.grid;
        let n = grid.n;
        let ginv = pair.g.inverse()?;
        // spatial candidates: inside the unit background ball and the region
        let mut nodes = Vec::new();
        for node in 0..grid.num_nodes() {
            let x = grid.coords(node);
            let mut d2 = 0.0;
            let mut inside = true;
            for a in 0..n {
                d2 += (x[a] - q.x[a]) * (x[a] - q.x[a]);
                if x[a] < region.lo[a] - 1e-12 || x[a] > region.hi[a] + 1e-12 {
                    inside = false;
                }
            }
            if inside && 2.0 * d2 < 1.0 {
                nodes.push(node);
            }
        }
        let mut pts = Vec::new();
        for (m, &t) in pair.times.iter().enumerate() {
            if t < region.t_lo - 1e-12 || t >= region.t_hi - 1e-12 {
                continue;
            }
            let dt_abs = (t - q.t).abs();
            if dt_abs >= 1.0 {
                continue; // never inside any unit ball for λ ≥ 1
            }
            for &node in &nodes {
                let s = tables.dt_grad[m][node];
                let t3 = tables.third[m][node];
                pts.push(NormPoint {
                    x: grid.coords(node),
                    dt_abs,
                    dtf: tables.dtf[m].data[node].abs(),
                    s_norm: covector_norm(&ginv, &s),
                    t3_norm: cube_norm(&ginv, n, &t3),
                    s,
                    t3,
                });
            }
        }
        if pts.is_empty() {
            return Err(CoreError::EmptyProbeSet(
                "no samples inside the probe ball".into(),
            ));
        }
        pts.sort_by(|a, b| a.dt_abs.partial_cmp(&b.dt_abs).unwrap());

        // cumulative pair suprema by time radius
        let mut radii: Vec<(f64, usize, f64, f64)> = Vec::new();
        let mut sup_s = 0.0f64;
        let mut sup_t = 0.0f64;
        let mut start = 0usize;
        while start < pts.len() {
            let rho = pts[start].dt_abs;
            let mut end = start;
            while end < pts.len() && pts[end].dt_abs <= rho + 1e-15 {
                end += 1;
            }
            // pairs between the new shell and everything active (incl. itself)
            for i in start..end {
                for jp in 0..end {
                    if jp >= i {
                        break;
                    }
                    let (a, b) = (&pts[i], &pts[jp]);
                    let mut dx = [0.0; MAX_DIM];
                    for ax in 0..n {
                        dx[ax] = a.x[ax] - b.x[ax];
                    }
                    let dist = (2.0 * pair.g.quad_form(&dx))
                        .sqrt()
                        .max((a.dt_abs - b.dt_abs).abs().sqrt());
                    if dist <= 0.0 {
                        continue;
                    }
                    let da = dist.powf(alpha);
                    let mut ds = [0.0; MAX_DIM];
                    for ax in 0..n {
                        ds[ax] = a.s[ax] - b.s[ax];
                    }
                    sup_s = sup_s.max(covector_norm(&ginv, &ds) / da);
                    let mut dt3 = [0.0; 27];
                    for c in 0..27 {
                        dt3[c] = a.t3[c] - b.t3[c];
                    }
                    sup_t = sup_t.max(cube_norm(&ginv, n, &dt3) / da);
                }
            }
            radii.push((rho, end, sup_s, sup_t));
            start = end;
        }
        Ok(NormEvaluator { alpha, pts, radii })
    }

    /// `|D_λ(g,f)|` at the probe: pointwise and Hölder groups with their
    /// exact scale factors, over the time window `|t − t0| < 1/λ`.
    pub fn norm(&self, lambda: f64) -> f64 {
        let window = 1.0 / lambda;
        let c_pt = lambda.powf(-0.5);
        let c_hold = lambda.powf(-(1.0 + self.alpha) / 2.0);
        let mut pointwise = 0.0f64;
        let mut active = 0usize;
        for (rho, end, _, _) in &self.radii {
            if *rho < window {
                active = *end;
            } else {
                break;
            }
        }
        for p in &self.pts[..active] {
            pointwise = pointwise.max(p.dtf + c_pt * (p.s_norm + p.t3_norm));
        }
        let mut hold = 0.0f64;
        for (rho, _, ss, st) in &self.radii {
            if *rho < window {
                hold = c_hold * (ss + st);
            } else {
                break;
            }
        }
        pointwise + hold
    }

    /// Raw size of the derivative data (used for the exact-zero shortcut).
    pub fn raw_scale(&self) -> f64 {
        let mut m = 0.0f64;
        for p in &self.pts {
            m = m.max(p.dtf + p.s_norm + p.t3_norm);
        }
        if let Some((_, _, ss, st)) = self.radii.last() {
            m = m.max(*ss + *st);
        }
        m
    }
}

/// Partial parabolic norm `|(g,f)|_{3,α}(Q)` (the λ = 1 evaluation).
pub fn partial_c3a_norm(
    pair: &STPair,
    tables: &DerivTables,
    q: &SpaceTimePoint,
    alpha: f64,
    region: &Region,
) -> Result<f64> {
    Ok(NormEvaluator::build(pair, tables, q, alpha, region)?.norm(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum K3aOutcome {
    /// The derivative data vanishes (to the stencil roundoff floor).
    Zero,
    /// Bisected crossing value.
    Value(f64),
    /// Every scale in the search range is admissible; the value is the range
    /// floor, an upper bound for the true infimum.
    RangeFloor(f64),
    /// No scale in the search range brings the norm below one.
    Unbounded,
}

impl K3aOutcome {
    pub fn as_f64(&self) -> f64 {
        match self {
            K3aOutcome::Zero => 0.0,
            K3aOutcome::Value(v) | K3aOutcome::RangeFloor(v) => *v,
            K3aOutcome::Unbounded => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct K3aResult {
    pub outcome: K3aOutcome,
    /// False when the coarse scan saw more than one admissibility crossing
    /// (the infimum set need not be an interval; we bracket the largest
    /// crossing and report the ambiguity).
    pub bracket_monotone: bool,
}

/// Roundoff floor below which the derivative data counts as exactly zero
/// (third-difference noise of smooth fields sits orders of magnitude lower).
const ZERO_FLOOR: f64 = 1e-9;

const LOG2_RANGE: i32 = 40;

/// Normalized regularity quantity
/// `K(Q) = inf { sqrt(λ) : |D_λ(g,f)|(Q) ≤ 1 }` by a coarse log scan plus 60
/// bisection steps on the largest crossing.
pub fn k3a(
    pair: &STPair,
    tables: &DerivTables,
    q: &SpaceTimePoint,
    alpha: f64,
    region: &Region,
) -> Result<K3aResult> {
    let ev = NormEvaluator::build(pair, tables, q, alpha, region)?;
    if ev.raw_scale() <= ZERO_FLOOR {
        return Ok(K3aResult {
            outcome: K3aOutcome::Zero,
            bracket_monotone: true,
        });
    }
    let admissible: Vec<bool> = (-LOG2_RANGE..=LOG2_RANGE)
        .map(|k| ev.norm(2.0f64.powi(k)) <= 1.0)
        .collect();
    let crossings = admissible.windows(2).filter(|w| w[0] != w[1]).count();
    let monotone = crossings <= 1;
    if admissible.iter().all(|&a| a) {
        return Ok(K3aResult {
            outcome: K3aOutcome::RangeFloor(2.0f64.powi(-LOG2_RANGE).sqrt()),
            bracket_monotone: monotone,
        });
    }
    if admissible.iter().all(|&a| !a) {
        return Ok(K3aResult {
            outcome: K3aOutcome::Unbounded,
            bracket_monotone: monotone,
        });
    }
    // largest inadmissible scale followed by an admissible one
    let mut k_cross = None;
    for (i, w) in admissible.windows(2).enumerate() {
        if !w[0] && w[1] {
            k_cross = Some(-LOG2_RANGE + i as i32);
        }
    }
    let Some(kc) = k_cross else {
        // only admissible → inadmissible transitions: everything above the
        // top admissible scale fails; report unbounded tail honestly
        return Ok(K3aResult {
            outcome: K3aOutcome::Unbounded,
            bracket_monotone: false,
        });
    };
    let mut lo = kc as f64; // norm > 1
    let mut hi = (kc + 1) as f64; // norm <= 1
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ev.norm(2.0f64.powf(mid)) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(K3aResult {
        outcome: K3aOutcome::Value(2.0f64.powf(hi).sqrt()),
        bracket_monotone: monotone,
    })
}

#[derive(Debug, Clone)]
pub struct KnormRow {
    pub qx: [f64; MAX_DIM],
    pub qt: f64,
    pub k: f64,
    pub dist: f64,
    pub product: f64,
}

pub fn knorm_rows_to_csv(n: usize, rows: &[KnormRow]) -> String {
    let mut s = String::from("Qx,Qt,K,dist,product\n");
    for r in rows {
        let xs: Vec<String> = (0..n).map(|a| format!("{}", r.qx[a])).collect();
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            xs.join(";"),
            r.qt,
            r.k,
            r.dist,
            r.product
        ));
    }
    s
}

/// Region supremum `sup_Q dist(Q, ∂V) · K(Q)` over a deterministic probe
/// lattice (every `stride_x`-th node, every `stride_t`-th sample).
pub fn k3a_v(
    pair: &STPair,
    tables: &DerivTables,
    region: &Region,
    alpha: f64,
    stride_x: usize,
    stride_t: usize,
) -> Result<(f64, Vec<KnormRow>)> {
    let grid = &pair.grid;
    let n = grid.n;
    let mut rows = Vec::new();
    let mut sup = 0.0f64;
    let mut any = false;
    for (m, &t) in pair.times.iter().enumerate() {
        if m % stride_t != 0 || t < region.t_lo || t >= region.t_hi {
            continue;
        }
        for node in (0..grid.num_nodes()).step_by(stride_x) {
            let x = grid.coords(node);
            let q = SpaceTimePoint { x, t };
            if !region.contains(&q, n) {
                continue;
            }
            let dist = boundary_dist(&q, region, &pair.g)?;
            if dist <= 0.0 {
                continue;
            }
            let res = k3a(pair, tables, &q, alpha, region)?;
            let k = res.outcome.as_f64();
            let product = dist * k;
            sup = sup.max(product);
            any = true;
            rows.push(KnormRow {
                qx: x,
                qt: t,
                k,
                dist,
                product,
            });
        }
    }
    if !any {
        return Err(CoreError::EmptyProbeSet("empty probe lattice".into()));
    }
    Ok((sup, rows))
}

#[derive(Debug, Clone)]
pub struct EpsRow {
    pub seed: u64,
    pub sup_density_excess: f64,
    pub sup_f: f64,
    pub k3a_v: f64,
    pub dist_used: f64,
}

pub fn eps_rows_to_csv(rows: &[EpsRow]) -> String {
    let mut s = String::from("seed,sup_density_excess,supF,K3aV,dist_used\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.seed, r.sup_density_excess, r.sup_f, r.k3a_v, r.dist_used
        ));
    }
    s
}

/// Observational scatter over an ensemble of flows sharing grid and metric:
/// per member, the density excess over admissible probes, the curvature
/// bound, and the region K-quantity. No monotone relation is asserted.
pub fn eps_probe(
    members: &[(u64, &Trajectory)],
    alpha: f64,
    taus: &[f64],
    stride_x: usize,
    stride_t: usize,
) -> Result<Vec<EpsRow>> {
    let mut rows = Vec::new();
    for &(seed, traj) in members {
        let pair = STPair::from_trajectory(traj)?;
        let grid = &pair.grid;
        let n = grid.n;
        let region = Region {
            lo: [-grid.r, -grid.r, -grid.r],
            hi: [grid.r, grid.r, grid.r],
            t_lo: traj.times[0],
            t_hi: *traj.times.last().unwrap(),
        };

        // curvature bound in the metric gauge
        let mut sup_f = 0.0f64;
        for phi in &traj.phis {
            let pack = crate::curvature::build_pack(grid, &traj.metric, phi)?;
            for l in &pack.lambdas {
                for a in 0..n {
                    sup_f = sup_f.max(l[a].abs());
                }
            }
        }

        // density excess at a centered probe over admissible backward times
        let mid = traj.times[traj.times.len() / 2];
        let qx = [0.0; MAX_DIM];
        let qprobe = SpaceTimePoint { x: qx, t: mid };
        let dist = boundary_dist(&qprobe, &region, &pair.g)?;
        let mut excess = 0.0f64;
        for &tau in taus {
            if tau >= dist * dist || mid - tau < region.t_lo {
                continue;
            }
            let v = density::density_bar(
                traj,
                &qx,
                mid,
                mid - tau,
                density::CutoffKind::BoxScaled,
                false,
            )?;
            excess = excess.max(v - 1.0);
        }
        let excess = excess.max(0.0);

        let tables = build_tables(&pair)?;
        let (kv, _) = k3a_v(&pair, &tables, &region, alpha, stride_x, stride_t)?;
        if !(excess.is_finite() && sup_f.is_finite() && kv.is_finite()) {
            return Err(CoreError::NonFinite {
                context: "eps probe row",
                node: 0,
            });
        }
        rows.push(EpsRow {
            seed,
            sup_density_excess: excess,
            sup_f,
            k3a_v: kv,
            dist_used: dist,
        });
    }
    Ok(rows)
}

/// Seeded pair for the scaling-inequality suite: constant SPD metric plus a
/// smooth space-time field `trig(x) · (c0 + c1 t + c2 t²)` on a short
/// uniformly sampled window centered at zero.
pub fn seeded_pair(n: usize, nodes_per_axis: usize, seed: u64) -> Result<STPair> {
    use rand::{Rng, SeedableRng};
    let grid = Grid::new(crate::grid::GridConfig {
        n,
        r: 1.0,
        r_prime: 1.0,
        nodes_per_axis,
        bc: crate::grid::BoundaryMode::OneSided,
    })?;
    let g = crate::catalog::random_spd(n, seed);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(101));
    let c0: f64 = rng.gen_range(-0.5..0.5);
    let c1: f64 = rng.gen_range(-0.5..0.5);
    let c2: f64 = rng.gen_range(-0.5..0.5);
    let spatial = crate::catalog::seeded_trig_potential(&grid, 0.4, seed.wrapping_add(7));
    let m = 21usize;
    let dt = 0.02;
    let t0 = -(m as f64 - 1.0) / 2.0 * dt;
    let times: Vec<f64> = (0..m).map(|i| t0 + i as f64 * dt).collect();
    let fields = times
        .iter()
        .map(|&t| spatial.map(|v| v * (c0 + c1 * t + c2 * t * t)))
        .collect();
    Ok(STPair {
        grid,
        g,
        times,
        fields,
    })
}

/// Full-box region of a pair, closed on the right by one sample spacing.
pub fn region_of_pair(pair: &STPair) -> Region {
    Region {
        lo: [-pair.grid.r, -pair.grid.r, -pair.grid.r],
        hi: [pair.grid.r, pair.grid.r, pair.grid.r],
        t_lo: pair.times[0],
        t_hi: *pair.times.last().unwrap() + (pair.times[1] - pair.times[0]),
    }
}
