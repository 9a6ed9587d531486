//! Explicit time integration of the potential flow `∂t φ = θ − θ̂`, with a
//! stability bound from the induced metric, trajectory recording, flow
//! diagnostics and the parabolic scaling operator on trajectories.

use crate::curvature::{self, CurvaturePack};
use crate::diff;
use crate::error::{CoreError, Result};
use crate::field::{MatField, ScalarField};
use crate::grid::Grid;
use crate::metric::{christoffel, MetricField};
use crate::quad;
use crate::smat::MAX_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    Rk2,
}

#[derive(Debug, Clone)]
pub struct FlowParams {
    pub theta_hat: f64,
    pub cfl: f64,
    pub t_end: f64,
    /// Record a snapshot every `cadence` steps (and always the final one).
    pub cadence: usize,
    /// Abort when `max |F|` exceeds this bound.
    pub max_f_guard: f64,
    /// Abort when `‖φ‖∞` exceeds this bound.
    pub sup_guard: f64,
    pub scheme: Scheme,
    /// Fixed step override; when `None` the stability bound decides.
    pub dt: Option<f64>,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            theta_hat: 0.0,
            cfl: 0.4,
            t_end: 0.01,
            cadence: 10,
            max_f_guard: 1e3,
            sup_guard: 1e6,
            scheme: Scheme::Euler,
            dt: None,
        }
    }
}

/// One state of the flow.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub phi: ScalarField,
    pub t: f64,
}

/// Recorded trajectory: snapshots of the potential at increasing times over a
/// fixed grid and metric.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub metric: MetricField,
    pub times: Vec<f64>,
    pub phis: Vec<ScalarField>,
    pub theta_hat: f64,
}

impl Trajectory {
    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.span();
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return Err(CoreError::TimeOutsideSpan { t, lo, hi });
        }
        Ok(())
    }

    /// Potential at time `t`, linearly interpolated between snapshots.
    pub fn phi_at(&self, t: f64) -> Result<ScalarField> {
        self.check_time(t)?;
        let k = match self.times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => return Ok(self.phis[i].clone()),
            Err(i) => i,
        };
        if k == 0 {
            return Ok(self.phis[0].clone());
        }
        if k >= self.times.len() {
            return Ok(self.phis.last().unwrap().clone());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Ok(ScalarField {
            data: self.phis[k - 1]
                .data
                .iter()
                .zip(&self.phis[k].data)
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        })
    }

    /// Index of the snapshot closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, &s) in self.times.iter().enumerate() {
            let d = (s - t).abs();
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }

    /// `u(t) = φ(t) − φ(t₀)`; the normalized potential vanishes identically
    /// at the initial time.
    pub fn u_at(&self, t: f64) -> Result<ScalarField> {
        Ok(self.phi_at(t)?.sub(&self.phis[0]))
    }
}

/// History row recorded at snapshot cadence.
#[derive(Debug, Clone)]
pub struct HistoryRow {
    pub t: f64,
    pub volume: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub max_f: f64,
    pub dt: f64,
}

pub fn history_to_csv(rows: &[HistoryRow]) -> String {
    let mut s = String::from("t,V,theta_min,theta_max,maxF,dt\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t, r.volume, r.theta_min, r.theta_max, r.max_f, r.dt
        ));
    }
    s
}

/// Largest stable explicit step for the linearization `∂t u̇ = Δ_η u̇`:
/// `dt = cfl · h² / (n · max ρ((1/4) η^{-1}))`.
pub fn stable_dt(grid: &Grid, eta: &MatField, cfl: f64) -> f64 {
    let mut rho_max = 0.0f64;
    for m in &eta.data {
        let etainv = m.inverse().expect("eta SPD");
        rho_max = rho_max.max(0.25 * etainv.max_abs_eigenvalue());
    }
    cfl * grid.h * grid.h / (grid.n as f64 * rho_max)
}

fn max_abs_f(pack: &CurvaturePack, n: usize) -> f64 {
    let mut m = 0.0f64;
    for l in &pack.lambdas {
        for i in 0..n {
            m = m.max(l[i].abs());
        }
    }
    // |F| measured through the eigenvalues of g^{-1} F, the scale-invariant
    // gauge of the curvature bound
    m
}

/// One explicit step of `∂t φ = θ(φ) − θ̂`; returns the new state and the
/// curvature pack of the *input* state.
pub fn step(
    grid: &Grid,
    metric: &MetricField,
    state: &FlowState,
    dt: f64,
    theta_hat: f64,
    scheme: Scheme,
) -> Result<(FlowState, CurvaturePack)> {
    let pack = curvature::build_pack(grid, metric, &state.phi)?;
    pack.theta.check_finite("angle")?;
    let phi_next = match scheme {
        Scheme::Euler => ScalarField {
            data: state
                .phi
                .data
                .iter()
                .zip(&pack.theta.data)
                .map(|(p, th)| p + dt * (th - theta_hat))
                .collect(),
        },
        Scheme::Rk2 => {
            // Heun: full Euler predictor, then average the slopes
            let mid = ScalarField {
                data: state
                    .phi
                    .data
                    .iter()
                    .zip(&pack.theta.data)
                    .map(|(p, th)| p + dt * (th - theta_hat))
                    .collect(),
            };
            let pack_mid = curvature::build_pack(grid, metric, &mid)?;
            ScalarField {
                data: state
                    .phi
                    .data
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        p + 0.5
                            * dt
                            * ((pack.theta.data[i] - theta_hat)
                                + (pack_mid.theta.data[i] - theta_hat))
                    })
                    .collect(),
            }
        }
    };
    Ok((
        FlowState {
            phi: phi_next,
            t: state.t + dt,
        },
        pack,
    ))
}

/// Integrates the flow and records snapshots and history at cadence.
pub fn run(
    grid: &Grid,
    metric: &MetricField,
    phi0: ScalarField,
    params: &FlowParams,
) -> Result<(Trajectory, Vec<HistoryRow>)> {
    metric.validate(grid)?;
    phi0.check_shape(grid, "initial potential")?;
    phi0.check_finite("initial potential")?;
    if params.t_end <= 0.0 {
        return Err(CoreError::Invalid("t_end must be positive".into()));
    }
    let pack0 = curvature::build_pack(grid, metric, &phi0)?;
    let dt = match params.dt {
        Some(dt) => dt,
        None => stable_dt(grid, &pack0.eta, params.cfl),
    };
    let steps = (params.t_end / dt).ceil() as usize;
    let mut state = FlowState { phi: phi0, t: 0.0 };
    let mut times = Vec::new();
    let mut phis = Vec::new();
    let mut history = Vec::new();

    let record = |state: &FlowState,
                  pack: &CurvaturePack,
                  times: &mut Vec<f64>,
                  phis: &mut Vec<ScalarField>,
                  history: &mut Vec<HistoryRow>|
     -> Result<()> {
        let (tmin, tmax) = pack.theta.min_max();
        let v = curvature::volume_functional(grid, metric, &pack.abs_zeta)?;
        history.push(HistoryRow {
            t: state.t,
            volume: v,
            theta_min: tmin,
            theta_max: tmax,
            max_f: max_abs_f(pack, grid.n),
            dt,
        });
        times.push(state.t);
        phis.push(state.phi.clone());
        Ok(())
    };

    record(&state, &pack0, &mut times, &mut phis, &mut history)?;
    for s in 1..=steps {
        let t_last = state.t;
        let (next, pack_prev) = step(grid, metric, &state, dt, params.theta_hat, params.scheme)?;
        let guard_f = max_abs_f(&pack_prev, grid.n);
        if guard_f > params.max_f_guard {
            return Err(CoreError::Unstable {
                t: next.t,
                t_last,
                reason: format!(
                    "max|F| = {guard_f:.3e} exceeded guard {}",
                    params.max_f_guard
                ),
            });
        }
        if next.phi.max_abs() > params.sup_guard {
            return Err(CoreError::Unstable {
                t: next.t,
                t_last,
                reason: "sup |φ| exceeded growth bound".into(),
            });
        }
        state = next;
        if s % params.cadence == 0 || s == steps {
            let pack = curvature::build_pack(grid, metric, &state.phi)?;
            record(&state, &pack, &mut times, &mut phis, &mut history)?;
        }
    }

    Ok((
        Trajectory {
            grid: grid.clone(),
            metric: metric.clone(),
            times,
            phis,
            theta_hat: params.theta_hat,
        },
        history,
    ))
}

/// Per-time diagnostic residuals of a recorded trajectory:
/// the first-variation balance of the volume, the heat-equation residual of
/// the angle, and the gradient consistency of the measured `∂t φ`.
#[derive(Debug, Clone)]
pub struct DiagRow {
    pub t: f64,
    pub dv_dt: f64,
    pub first_variation_rhs: f64,
    pub rel_err_first_variation: f64,
    pub residual_heat: f64,
    pub residual_gradient: f64,
}

pub fn diagnostics_to_csv(rows: &[DiagRow]) -> String {
    let mut s =
        String::from("t,dV_dt,first_variation_rhs,rel_err,heat_residual,gradient_residual\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t,
            r.dv_dt,
            r.first_variation_rhs,
            r.rel_err_first_variation,
            r.residual_heat,
            r.residual_gradient
        ));
    }
    s
}

pub fn flow_diagnostics(traj: &Trajectory) -> Result<Vec<DiagRow>> {
    let m = traj.times.len();
    if m < 3 {
        return Err(CoreError::TooFewSnapshots { need: 3, have: m });
    }
    let grid = &traj.grid;
    let metric = &traj.metric;
    let mut rows = Vec::new();
    for k in 1..m - 1 {
        let dt_m = traj.times[k] - traj.times[k - 1];
        let dt_p = traj.times[k + 1] - traj.times[k];
        if ((dt_p - dt_m) / dt_m).abs() > 1e-9 {
            // off-cadence tail snapshot; central differencing needs equal gaps
            continue;
        }
        let pack_prev = curvature::build_pack(grid, metric, &traj.phis[k - 1])?;
        let pack = curvature::build_pack(grid, metric, &traj.phis[k])?;
        let pack_next = curvature::build_pack(grid, metric, &traj.phis[k + 1])?;

        // (a) volume first variation: dV/dt against
        //     -Vol(B(r')) ∫ (1/4) ∇u̇ᵀ η^{-1} ∇θ |ζ| det g dx with u̇ = θ - θ̂
        let v_prev = curvature::volume_functional(grid, metric, &pack_prev.abs_zeta)?;
        let v_next = curvature::volume_functional(grid, metric, &pack_next.abs_zeta)?;
        let dv_dt = (v_next - v_prev) / (dt_m + dt_p);
        let grad_theta = diff::gradient(grid, &pack.theta)?;
        let integrand = ScalarField {
            data: (0..grid.num_nodes())
                .map(|i| {
                    let etainv = pack.eta.at(i).inverse().expect("eta SPD");
                    let mut gt = [0.0; MAX_DIM];
                    gt[..grid.n].copy_from_slice(&grad_theta[i][..grid.n]);
                    // u̇ = θ - θ̂ has the same gradient as θ
                    0.25 * etainv.quad_form(&gt) * pack.abs_zeta.data[i] * metric.at(i).det()
                })
                .collect(),
        };
        let first_var_rhs =
            -quad::ball_volume(grid.n, grid.r_prime) * quad::integrate_x(grid, &integrand, None)?;
        let denom = dv_dt.abs().max(first_var_rhs.abs()).max(1e-300);
        let rel_err = (dv_dt - first_var_rhs).abs() / denom;

        // (b) heat-equation residual of the angle: max |∂t θ - Δ_η θ|
        let dtheta_dt = ScalarField {
            data: pack_next
                .theta
                .data
                .iter()
                .zip(&pack_prev.theta.data)
                .map(|(a, b)| (a - b) / (dt_m + dt_p))
                .collect(),
        };
        let lap = curvature::laplacian_eta(grid, &pack.theta, &pack.eta)?;
        let mut res_heat = 0.0f64;
        for i in 0..grid.num_nodes() {
            if grid.is_interior(i, 2) {
                res_heat = res_heat.max((dtheta_dt.data[i] - lap.data[i]).abs());
            }
        }

        // (c) gradient consistency: max |(1/2) ∂x(u̇_fd) - H| with u̇_fd the
        //     measured time derivative of φ
        let u_dot = ScalarField {
            data: traj.phis[k + 1]
                .data
                .iter()
                .zip(&traj.phis[k - 1].data)
                .map(|(a, b)| (a - b) / (dt_m + dt_p))
                .collect(),
        };
        let grad_udot = diff::gradient(grid, &u_dot)?;
        let h = curvature::mean_curvature_oneform(grid, &pack.theta)?;
        let mut res_grad = 0.0f64;
        for i in 0..grid.num_nodes() {
            if grid.is_interior(i, 2) {
                for a in 0..grid.n {
                    res_grad = res_grad.max((0.5 * grad_udot[i][a] - h.at(i)[a]).abs());
                }
            }
        }

        rows.push(DiagRow {
            t: traj.times[k],
            dv_dt,
            first_variation_rhs: first_var_rhs,
            rel_err_first_variation: rel_err,
            residual_heat: res_heat,
            residual_gradient: res_grad,
        });
    }
    if rows.is_empty() {
        return Err(CoreError::TooFewSnapshots {
            need: 3,
            have: traj.times.len(),
        });
    }
    Ok(rows)
}

/// Parabolic scaling of a trajectory: metric `k g`, potential
/// `φ_s = k φ(T' + s/k)` on the shifted/stretched time axis. Snapshot times
/// are mapped exactly, so for power-of-two `k` shared samples are
/// bit-identical up to the exact scalar multiplications.
pub fn scale_flow(traj: &Trajectory, k: u32, t_prime: f64) -> Result<Trajectory> {
    if k < 1 {
        return Err(CoreError::Invalid("scaling index k must be >= 1".into()));
    }
    traj.check_time(t_prime)?;
    let kf = k as f64;
    Ok(Trajectory {
        grid: traj.grid.clone(),
        metric: traj.metric.scale(kf),
        times: traj.times.iter().map(|t| kf * (t - t_prime)).collect(),
        phis: traj.phis.iter().map(|p| p.scale(kf)).collect(),
        theta_hat: traj.theta_hat,
    })
}

/// Squared norm of the covariant curvature derivative,
/// `|∇F|² = Σ g^{ii'} g^{jj'} g^{kk'} ∇_i F_{jk} ∇_{i'} F_{j'k'}` with
/// `∇_i F_{jk} = (1/2) ∂F_{jk}/∂x^i − Γ^m_{ij} F_{mk}`.
pub fn grad_f_norm_sq(grid: &Grid, metric: &MetricField, f: &MatField) -> Result<ScalarField> {
    let n = grid.n;
    let gam = christoffel(grid, metric)?;
    // plain half-derivatives of each component
    let mut dcomp: Vec<Vec<Vec<f64>>> = Vec::new(); // [axis][pair] -> field
    let mut pair_pos = [[0usize; MAX_DIM]; MAX_DIM];
    {
        let mut cnt = 0;
        for j in 0..n {
            for l in j..n {
                pair_pos[j][l] = cnt;
                pair_pos[l][j] = cnt;
                cnt += 1;
            }
        }
    }
    for i in 0..n {
        let mut per_pair = Vec::new();
        for j in 0..n {
            for l in j..n {
                let comp = f.component(j, l);
                let d = diff::d1(grid, &comp, i)?;
                per_pair.push(d.data.iter().map(|v| 0.5 * v).collect::<Vec<f64>>());
            }
        }
        dcomp.push(per_pair);
    }
    let data = (0..grid.num_nodes())
        .map(|node| {
            let ginv = metric.at(node).inverse().expect("g SPD");
            // covariant tensor ∇_i F_{jk}
            let mut t = [[[0.0f64; MAX_DIM]; MAX_DIM]; MAX_DIM];
            for i in 0..n {
                for j in 0..n {
                    for kk in 0..n {
                        let mut v = dcomp[i][pair_pos[j][kk]][node];
                        if !gam.is_zero() {
                            for m_ in 0..n {
                                v -= gam.at(node, m_).a[i][j] * f.at(node).a[m_][kk];
                            }
                        }
                        t[i][j][kk] = v;
                    }
                }
            }
            let mut s = 0.0;
            for i in 0..n {
                for ip in 0..n {
                    for j in 0..n {
                        for jp in 0..n {
                            for kk in 0..n {
                                for kp in 0..n {
                                    s += ginv.a[i][ip]
                                        * ginv.a[j][jp]
                                        * ginv.a[kk][kp]
                                        * t[i][j][kk]
                                        * t[ip][jp][kp];
                                }
                            }
                        }
                    }
                }
            }
            s
        })
        .collect();
    Ok(ScalarField { data })
}
