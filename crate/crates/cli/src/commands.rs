//! Command implementations: each maps one subcommand to its module entry
//! points and emits the documented artifacts.

use crate::config::{ScenarioConfig, ThetaHatMode};
use crate::outputs::OutputSink;
use lbmcf_core::catalog::PotentialExpr;
use lbmcf_core::density;
use lbmcf_core::flow::{self, FlowParams, Trajectory};
use lbmcf_core::frames::{self, Ch4Inputs};
use lbmcf_core::knorm;
use lbmcf_core::shrinker;
use lbmcf_core::smat::MAX_DIM;
use lbmcf_core::snapshot;
use lbmcf_core::{curvature, CoreError, Grid, GridConfig, MetricField, ScalarField};

pub enum CmdError {
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) | CoreError::ResolutionTooSmall(_) | CoreError::InvalidGrid(_) => {
                CmdError::Validation(e.to_string())
            }
            other => CmdError::Numerical(other.to_string()),
        }
    }
}

impl From<anyhow::Error> for CmdError {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<CoreError>() {
            Ok(core) => core.into(),
            Err(e) => CmdError::Numerical(e.to_string()),
        }
    }
}

pub struct RunContext<'a> {
    pub cfg: &'a ScenarioConfig,
    pub sink: &'a mut OutputSink,
    pub strict_findings: &'a mut Vec<String>,
    pub seed: u64,
}

fn resolve_theta_hat(
    cfg: &ScenarioConfig,
    grid: &Grid,
    metric: &MetricField,
    phi0: &ScalarField,
) -> Result<f64, CmdError> {
    match cfg.theta_hat {
        ThetaHatMode::Fixed(v) => Ok(v),
        ThetaHatMode::Average => {
            let pack = curvature::build_pack(grid, metric, phi0)?;
            Ok(curvature::average_angle(grid, metric, &pack)?)
        }
    }
}

fn run_configured_flow(
    cfg: &ScenarioConfig,
) -> Result<(Trajectory, Vec<flow::HistoryRow>), CmdError> {
    let grid = cfg.build_grid()?;
    let metric = cfg.build_metric(&grid)?;
    let phi0 = cfg.build_initial(&grid)?;
    let theta_hat = resolve_theta_hat(cfg, &grid, &metric, &phi0)?;
    let params = FlowParams {
        theta_hat,
        ..cfg.flow.clone()
    };
    Ok(flow::run(&grid, &metric, phi0, &params)?)
}

pub fn cmd_run_flow(ctx: &mut RunContext) -> Result<(), CmdError> {
    let (traj, history) = run_configured_flow(ctx.cfg)?;
    ctx.sink
        .write("history.csv", &flow::history_to_csv(&history))
        .map_err(CmdError::from)?;
    for w in history.windows(2) {
        if w[1].volume > w[0].volume + 1e-8 {
            ctx.strict_findings.push(format!(
                "volume increased between t={} and t={}",
                w[0].t, w[1].t
            ));
        }
    }
    for (i, phi) in traj.phis.iter().enumerate() {
        let text = snapshot::write_snapshot(&traj.grid, phi, traj.times[i])?;
        ctx.sink
            .write(&format!("phi_{i:05}.snap"), &text)
            .map_err(CmdError::from)?;
    }
    if traj.times.len() >= 3 {
        if let Ok(rows) = flow::flow_diagnostics(&traj) {
            ctx.sink
                .write("diagnostics.csv", &flow::diagnostics_to_csv(&rows))
                .map_err(CmdError::from)?;
        }
    }
    // pointwise curvature data of the final state, one snapshot per field
    let pack = curvature::build_pack(&traj.grid, &traj.metric, traj.phis.last().unwrap())?;
    for (name, text) in curvature::dump_pack(&traj.grid, &pack, *traj.times.last().unwrap())? {
        ctx.sink.write(&name, &text).map_err(CmdError::from)?;
    }
    Ok(())
}

pub fn cmd_check_identities(ctx: &mut RunContext) -> Result<(), CmdError> {
    let cfg = ctx.cfg;
    let coarse_grid = cfg.build_grid()?;
    let fine_nodes = match coarse_grid.bc {
        lbmcf_core::BoundaryMode::OneSided => 2 * coarse_grid.nodes_per_axis - 1,
        lbmcf_core::BoundaryMode::Periodic => 2 * coarse_grid.nodes_per_axis,
    };
    let fine_grid = Grid::new(GridConfig {
        nodes_per_axis: fine_nodes,
        ..cfg.grid
    })?;
    let alpha = -1.0 / (4.0 * 0.1);
    let mut rows = Vec::new();
    for grid in [&coarse_grid, &fine_grid] {
        let metric = cfg.build_metric(grid)?;
        let phi = cfg.build_initial(grid)?;
        let inputs = Ch4Inputs {
            grid,
            metric: &metric,
            phi: &phi,
            x0: [0.0; MAX_DIM],
            section_seed: ctx.seed,
            alpha,
        };
        rows.extend(frames::identity_suite(&inputs)?);
    }
    // measured order between the two resolutions per pointwise test
    let half = rows.len() / 2;
    for i in 0..half {
        if rows[i].test_id != "integral" && rows[half + i].residual > 0.0 {
            rows[half + i].measured_order =
                Some((rows[i].residual / rows[half + i].residual).log2());
        }
    }
    ctx.sink
        .write("identities.csv", &frames::ch4_rows_to_csv(&rows))
        .map_err(CmdError::from)?;
    Ok(())
}

pub fn cmd_density(ctx: &mut RunContext) -> Result<(), CmdError> {
    let Some(block) = &ctx.cfg.density else {
        return Err(CmdError::Usage(
            "density command needs a [density] block".into(),
        ));
    };
    let (traj, _) = run_configured_flow(ctx.cfg)?;
    if density::probe_center_warning(&traj.grid, &block.x0) {
        ctx.strict_findings
            .push("density probe center outside the quarter box".into());
        eprintln!("warning: density probe center outside the quarter box");
    }
    let rep = density::monotonicity_residual(&traj, &block.x0, block.t_prime, block.cutoff)?;
    for r in &rep.rows {
        if !r.monotone_ok {
            ctx.strict_findings
                .push(format!("density monotonicity violated at t={}", r.t));
        }
    }
    ctx.sink
        .write("density.csv", &density::monotonicity_to_csv(&rep))
        .map_err(CmdError::from)?;
    Ok(())
}

pub fn cmd_shrinker_check(ctx: &mut RunContext) -> Result<(), CmdError> {
    let Some(block) = &ctx.cfg.shrinker else {
        return Err(CmdError::Usage(
            "shrinker-check command needs a [shrinker] block".into(),
        ));
    };
    let (mut traj, _) = run_configured_flow(ctx.cfg)?;
    // shift the recorded window into negative time for the family check
    for t in &mut traj.times {
        *t += block.time_shift;
    }
    if traj.times.iter().any(|&t| t >= 0.0) {
        return Err(CmdError::Validation(
            "time_shift must move every snapshot to negative time".into(),
        ));
    }
    let rep = shrinker::self_similar_family_check(&traj)?;
    let fit = if rep.max_vector_residual < 1e-6 {
        let probe = shrinker::liouville_probe(
            &traj.grid,
            traj.phis.last().unwrap(),
            rep.max_vector_residual,
        )?;
        Some(probe.fit_residual)
    } else {
        None
    };
    ctx.sink
        .write("shrinker.csv", &shrinker::family_to_csv(&rep, fit))
        .map_err(CmdError::from)?;
    Ok(())
}

pub fn cmd_knorm(ctx: &mut RunContext) -> Result<(), CmdError> {
    let Some(block) = &ctx.cfg.knorm else {
        return Err(CmdError::Usage(
            "knorm command needs a [knorm] block".into(),
        ));
    };
    let (traj, _) = run_configured_flow(ctx.cfg)?;
    let pair = knorm::STPair::from_trajectory(&traj)?;
    let tables = knorm::build_tables(&pair)?;
    let region = knorm::region_of_pair(&pair);
    let (_, rows) = knorm::k3a_v(
        &pair,
        &tables,
        &region,
        block.alpha,
        block.stride_x,
        block.stride_t,
    )?;
    ctx.sink
        .write("knorm.csv", &knorm::knorm_rows_to_csv(traj.grid.n, &rows))
        .map_err(CmdError::from)?;
    Ok(())
}

pub fn cmd_eps_probe(ctx: &mut RunContext) -> Result<(), CmdError> {
    let Some(block) = ctx.cfg.ensemble.clone() else {
        return Err(CmdError::Usage(
            "eps-probe command needs an [ensemble] block".into(),
        ));
    };
    let knorm_block = ctx.cfg.knorm.clone().ok_or_else(|| {
        CmdError::Usage("eps-probe command needs a [knorm] block for the norm probes".into())
    })?;
    let grid = ctx.cfg.build_grid()?;
    let metric = ctx.cfg.build_metric(&grid)?;
    let mut trajs = Vec::new();
    let mut seeds = Vec::new();
    for i in 0..block.count {
        let seed = ctx.seed.wrapping_add(i as u64);
        // member 0 is the flat reference; the rest are seeded bumps
        let phi0 = if i == 0 {
            ScalarField::zeros(&grid)
        } else {
            let amp = block.amp * (1.0 + 0.3 * ((seed % 7) as f64 / 7.0));
            PotentialExpr::QuarticBump {
                a: amp,
                w: block.width,
            }
            .sample(&grid)?
        };
        let theta_hat = resolve_theta_hat(ctx.cfg, &grid, &metric, &phi0)?;
        let params = FlowParams {
            theta_hat,
            ..ctx.cfg.flow.clone()
        };
        let (traj, _) = flow::run(&grid, &metric, phi0, &params)?;
        trajs.push(traj);
        seeds.push(seed);
    }
    let members: Vec<(u64, &Trajectory)> = seeds.iter().copied().zip(trajs.iter()).collect();
    let rows = knorm::eps_probe(
        &members,
        knorm_block.alpha,
        &block.taus,
        knorm_block.stride_x,
        knorm_block.stride_t,
    )?;
    ctx.sink
        .write("eps_probe.csv", &knorm::eps_rows_to_csv(&rows))
        .map_err(CmdError::from)?;
    Ok(())
}

pub fn cmd_all(ctx: &mut RunContext) -> Result<(), CmdError> {
    cmd_run_flow(ctx)?;
    cmd_check_identities(ctx)?;
    if ctx.cfg.density.is_some() {
        cmd_density(ctx)?;
    }
    if ctx.cfg.shrinker.is_some() {
        cmd_shrinker_check(ctx)?;
    }
    if ctx.cfg.knorm.is_some() {
        cmd_knorm(ctx)?;
    }
    if ctx.cfg.ensemble.is_some() && ctx.cfg.knorm.is_some() {
        cmd_eps_probe(ctx)?;
    }
    Ok(())
}
