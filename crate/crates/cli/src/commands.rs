//! One function per subcommand. Each returns the bytes to emit; rows are
//! computed in parallel and serialized in grid order.

use otto_core::analytic::{self, AnalyticCycleInput, AnalyticCycleOutput, Efficiency};
use otto_core::dynamics::{linear_grid, run_finite_time_cycle, sweep_tau, StrokeDuration};
use otto_core::verify::{run_verify, Fault, OracleLevel, VerifyConfig};
use otto_core::EngineParams;
use rayon::prelude::*;

use crate::args::{CycleArgs, FaultArg, Fig1Args, Fig2Args, Fig3Args, Physics, RGrid, VerifyArgs};
use crate::error::CliError;
use crate::output::{list, metadata, num, Provenance, Table};

/// Output of a command, plus the error to report once it has been written.
pub struct Emitted {
    pub bytes: Vec<u8>,
    pub deferred: Option<CliError>,
}

impl From<Vec<u8>> for Emitted {
    fn from(bytes: Vec<u8>) -> Self {
        Emitted { bytes, deferred: None }
    }
}

fn base_params(physics: &Physics, r: f64) -> Result<EngineParams, CliError> {
    Ok(EngineParams::new(physics.omega, r, physics.beta_h, physics.beta_c)?)
}

/// Efficiency as written to the CSV: its value for an engine, zero for a
/// cycle that exchanges heat but no work, NaN otherwise.
fn eta_entry(efficiency: Efficiency, idle: bool) -> f64 {
    match efficiency {
        Efficiency::Engine(eta) => eta,
        Efficiency::NotAnEngine if idle => 0.0,
        Efficiency::NotAnEngine => f64::NAN,
    }
}

fn analytic_eta(out: &AnalyticCycleOutput) -> f64 {
    eta_entry(out.efficiency, out.w_net == 0.0 && out.q_h > 0.0)
}

fn flag(efficiency: Efficiency) -> &'static str {
    if efficiency.is_engine() {
        "1"
    } else {
        "0"
    }
}

fn check_range(name: &str, min: f64, max: f64, steps: usize) -> Result<(), CliError> {
    if !min.is_finite() || !max.is_finite() {
        return Err(CliError::Grid(format!("{name} bounds must be finite")));
    }
    if min > max {
        return Err(CliError::Grid(format!("{name} bounds out of order: {min} > {max}")));
    }
    if steps == 0 {
        return Err(CliError::Grid(format!("{name} grid is empty")));
    }
    Ok(())
}

/// The squeezing grid, with the Carnot point `r_max` inserted when it lies
/// inside the range so the curve reaches it exactly.
fn r_values(grid: &RGrid, physics: &Physics) -> Result<(Vec<f64>, Provenance), CliError> {
    if let Some(rs) = &grid.r {
        if rs.is_empty() {
            return Err(CliError::Grid("r list is empty".into()));
        }
        for &r in rs {
            base_params(physics, r)?;
        }
        return Ok((rs.clone(), vec![("r", list(rs))]));
    }
    check_range("r", grid.r_min, grid.r_max, grid.r_steps)?;
    let mut rs = linear_grid(grid.r_min, grid.r_max, grid.r_steps);
    for &r in &rs {
        base_params(physics, r)?;
    }
    let rm = analytic::r_max(&base_params(physics, 0.0)?);
    if rm >= grid.r_min && rm <= grid.r_max && !rs.contains(&rm) {
        let at = rs.partition_point(|&r| r < rm);
        rs.insert(at, rm);
    }
    let fields = vec![
        ("r_min", num(grid.r_min)),
        ("r_max", num(grid.r_max)),
        ("r_steps", grid.r_steps.to_string()),
    ];
    Ok((rs, fields))
}

pub fn fig1(args: &Fig1Args) -> Result<Emitted, CliError> {
    let (rs, grid_fields) = r_values(&args.grid, &args.physics)?;
    let mut fields = args.physics.provenance();
    fields.extend(grid_fields);
    let mut table = Table::new("fig1", &fields, &["r", "eta_qs", "eta_carnot", "engine_flag"])?;
    for &r in &rs {
        let params = base_params(&args.physics, r)?;
        let out = analytic::stroke_energetics(&AnalyticCycleInput::quasistatic(params));
        table.row([
            num(r),
            num(analytic_eta(&out)),
            num(out.eta_carnot),
            flag(out.efficiency).into(),
        ])?;
    }
    Ok(table.into_bytes()?.into())
}

pub fn fig3(args: &Fig3Args) -> Result<Emitted, CliError> {
    let (rs, grid_fields) = r_values(&args.grid, &args.physics)?;
    check_range("qstar", 1.0, args.qstar_max, args.qstar_steps)?;
    let qs = linear_grid(1.0, args.qstar_max, args.qstar_steps);
    let mut fields = args.physics.provenance();
    fields.extend(grid_fields);
    fields.push(("qstar_max", num(args.qstar_max)));
    fields.push(("qstar_steps", args.qstar_steps.to_string()));

    let cells: Vec<(f64, f64)> = rs.iter().flat_map(|&r| qs.iter().map(move |&q| (r, q))).collect();
    let rows = cells
        .par_iter()
        .map(|&(r, q)| {
            let input = AnalyticCycleInput::new(base_params(&args.physics, r)?, q)?;
            Ok(analytic::stroke_energetics(&input))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new("fig3", &fields, &["r", "q_star", "eta", "engine_flag"])?;
    for (&(r, q), out) in cells.iter().zip(&rows) {
        table.row([num(r), num(q), num(analytic_eta(out)), flag(out.efficiency).into()])?;
    }
    Ok(table.into_bytes()?.into())
}

pub fn fig2(args: &Fig2Args) -> Result<Emitted, CliError> {
    if args.r.is_empty() {
        return Err(CliError::Grid("r list is empty".into()));
    }
    check_range("tau", args.tau_min, args.tau_max, args.tau_steps)?;
    if args.tau_min <= 0.0 {
        return Err(CliError::Grid(format!(
            "tau_min must be positive, got {}",
            args.tau_min
        )));
    }
    let config = args.solver.integrator();
    config.validate()?;
    let params = args
        .r
        .iter()
        .map(|&r| base_params(&args.physics, r))
        .collect::<Result<Vec<_>, _>>()?;
    let taus = linear_grid(args.tau_min, args.tau_max, args.tau_steps);

    let mut fields = args.physics.provenance();
    fields.extend(args.solver.provenance());
    fields.push(("r", list(&args.r)));
    fields.push(("tau_min", num(args.tau_min)));
    fields.push(("tau_max", num(args.tau_max)));
    fields.push(("tau_steps", args.tau_steps.to_string()));
    let mut table = Table::new(
        "fig2",
        &fields,
        &[
            "r",
            "tau_periods",
            "eta",
            "sigma_total",
            "q_star_comp",
            "q_star_exp",
            "eta_qs_reference",
        ],
    )?;

    let mut failed = 0;
    for p in &params {
        let eta_qs = 1.0 - p.squeezed_frequency() / p.omega;
        for (row, &tau) in sweep_tau(p, &taus, &config).into_iter().zip(&taus) {
            match row {
                Ok(point) => table.row([
                    num(p.r),
                    num(tau),
                    num(eta_entry(point.efficiency, p.r == 0.0)),
                    num(point.sigma_total),
                    num(point.q_star_comp),
                    num(point.q_star_exp),
                    num(point.eta_qs),
                ])?,
                Err(e) => {
                    eprintln!("warning: r = {}, tau = {tau}: {e}", p.r);
                    failed += 1;
                    let nan = num(f64::NAN);
                    table.row([
                        num(p.r),
                        num(tau),
                        nan.clone(),
                        nan.clone(),
                        nan.clone(),
                        nan,
                        num(eta_qs),
                    ])?
                }
            }
        }
    }
    let deferred = (failed > 0).then(|| CliError::RowsFailed {
        failed,
        total: params.len() * taus.len(),
    });
    Ok(Emitted {
        bytes: table.into_bytes()?,
        deferred,
    })
}

pub fn cycle(args: &CycleArgs) -> Result<Emitted, CliError> {
    let params = base_params(&args.physics, args.r)?;
    let config = args.solver.integrator();
    let report = run_finite_time_cycle(&params, args.tau.0, &config)?;
    let summary = report.summary();
    let (w_comp, w_exp) = summary.works();
    let (q_c, q_h) = summary.heats();
    let tau = match args.tau.0 {
        StrokeDuration::Sudden => 0.0,
        StrokeDuration::Periods(p) => p,
    };

    let mut fields = args.physics.provenance();
    fields.extend(args.solver.provenance());
    fields.push(("r", num(args.r)));
    fields.push(("tau", args.tau.to_string()));
    let mut table = Table::new("cycle", &fields, &["quantity", "value"])?;
    let rows = [
        ("r", num(args.r)),
        ("tau_periods", num(tau)),
        ("omega", num(params.omega)),
        ("big_omega", num(params.squeezed_frequency())),
        ("chi", num(params.chi())),
        ("e1", num(summary.energies[0])),
        ("e2", num(summary.energies[1])),
        ("e3", num(summary.energies[2])),
        ("e4", num(summary.energies[3])),
        ("w_comp", num(w_comp)),
        ("q_c", num(q_c)),
        ("w_exp", num(w_exp)),
        ("q_h", num(q_h)),
        ("w_net", num(report.w_net)),
        ("q_abs", num(report.q_abs)),
        (
            "eta",
            num(eta_entry(report.efficiency, report.w_net == 0.0 && q_h > 0.0)),
        ),
        ("engine_flag", flag(report.efficiency).to_string()),
        ("eta_qs", num(report.eta_qs)),
        ("eta_carnot", num(report.eta_carnot)),
        ("q_star_comp", num(summary.q_star_compression)),
        ("q_star_exp", num(summary.q_star_expansion)),
        ("sigma_comp", num(summary.sigma_compression)),
        ("sigma_exp", num(summary.sigma_expansion)),
        ("sigma_total", num(report.sigma_total())),
        ("first_law_residual", num(report.first_law_residual())),
    ];
    for (name, value) in rows {
        table.row([name.to_string(), value])?;
    }
    Ok(table.into_bytes()?.into())
}

pub fn verify(args: &VerifyArgs) -> Result<Emitted, CliError> {
    let config = VerifyConfig {
        seed: args.seed,
        oracle: if args.oracle {
            OracleLevel::Full
        } else {
            OracleLevel::Light
        },
        integrator: args.solver.integrator(),
        fault: match args.inject_fault {
            None => Fault::None,
            Some(FaultArg::FlipWComp) => Fault::FlipCompressionWork,
        },
        ..VerifyConfig::default()
    };
    config.integrator.validate()?;
    let mut fields = args.solver.provenance();
    fields.push(("seed", args.seed.to_string()));
    fields.push(("oracle", if args.oracle { "full" } else { "light" }.to_string()));
    if let Some(FaultArg::FlipWComp) = args.inject_fault {
        fields.push(("inject_fault", "flip-w-comp".to_string()));
    }

    let report = run_verify(&config)?;
    let mut text = metadata("verify", &fields);
    for check in &report.checks {
        text.push_str(&format!("{check}\n"));
    }
    let passed = report.passed();
    text.push_str(if passed {
        "all checks passed\n"
    } else {
        "verification FAILED\n"
    });
    Ok(Emitted {
        bytes: text.into_bytes(),
        deferred: (!passed).then_some(CliError::VerifyFailed),
    })
}
