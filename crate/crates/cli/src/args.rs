//! Command-line interface definition.

use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use otto_core::dynamics::{IntegratorConfig, StrokeDuration};
use otto_core::verify::DEFAULT_SEED;

use crate::output::{num, Provenance};

#[derive(Parser, Debug)]
#[command(
    name = "otto",
    version,
    about = "Finite-time Otto engine with a parametrically pumped oscillator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quasi-static efficiency against the squeezing parameter r.
    Fig1(Fig1Args),
    /// Finite-time efficiency and entropy production against stroke duration.
    Fig2(Fig2Args),
    /// Closed-form efficiency over the (r, Q*) plane.
    Fig3(Fig3Args),
    /// A single finite-time cycle.
    Cycle(CycleArgs),
    /// Theorem sweep, first-law checks and backend cross-checks.
    Verify(VerifyArgs),
}

/// Engine parameters.
#[derive(Args, Debug, Clone)]
pub struct Physics {
    /// Bare oscillator frequency ω.
    #[arg(long, default_value_t = 2.0 * PI)]
    pub omega: f64,
    /// Inverse temperature of the hot reservoir.
    #[arg(long, default_value_t = 0.1)]
    pub beta_h: f64,
    /// Inverse temperature of the cold reservoir.
    #[arg(long, default_value_t = 1.0)]
    pub beta_c: f64,
}

impl Physics {
    pub fn provenance(&self) -> Provenance {
        vec![
            ("omega", num(self.omega)),
            ("beta_h", num(self.beta_h)),
            ("beta_c", num(self.beta_c)),
        ]
    }
}

/// Integrator settings.
#[derive(Args, Debug, Clone)]
pub struct Solver {
    /// Integrator step in oscillator periods (first step for the adaptive method).
    #[arg(long, default_value_t = 2e-3)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Magnus4)]
    pub method: MethodArg,
    /// Error tolerance of the adaptive method.
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
}

impl Solver {
    pub fn integrator(&self) -> IntegratorConfig {
        match self.method {
            MethodArg::Magnus4 => IntegratorConfig::magnus(self.step),
            MethodArg::Adaptive => IntegratorConfig {
                step: self.step,
                ..IntegratorConfig::adaptive(self.tolerance)
            },
        }
    }

    pub fn provenance(&self) -> Provenance {
        let mut out = vec![("method", self.method.to_string()), ("step", num(self.step))];
        if self.method == MethodArg::Adaptive {
            out.push(("tolerance", num(self.tolerance)));
        }
        out
    }
}

/// Where output goes and how many threads compute it. Neither changes the
/// data, so neither is recorded in the CSV header.
#[derive(Args, Debug, Clone)]
pub struct Run {
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<NonZeroUsize>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Magnus4,
    Adaptive,
}

impl fmt::Display for MethodArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodArg::Magnus4 => "magnus4",
            MethodArg::Adaptive => "adaptive",
        })
    }
}

/// Squeezing grid. An explicit `--r` list replaces it.
#[derive(Args, Debug, Clone)]
pub struct RGrid {
    /// Explicit squeezing values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 201)]
    pub r_steps: usize,
}

#[derive(Args, Debug)]
pub struct Fig1Args {
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub run: Run,
    #[command(flatten)]
    pub grid: RGrid,
}

#[derive(Args, Debug)]
pub struct Fig2Args {
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub run: Run,
    /// Squeezing parameters, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.8,1.2")]
    pub r: Vec<f64>,
    /// Shortest stroke duration in periods.
    #[arg(long, default_value_t = 0.02)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 500)]
    pub tau_steps: usize,
}

#[derive(Args, Debug)]
pub struct Fig3Args {
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub run: Run,
    #[command(flatten)]
    pub grid: RGrid,
    /// Largest Husimi parameter; the grid starts at 1.
    #[arg(long, default_value_t = 3.0)]
    pub qstar_max: f64,
    #[arg(long, default_value_t = 201)]
    pub qstar_steps: usize,
}

#[derive(Args, Debug)]
pub struct CycleArgs {
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub run: Run,
    #[arg(long, default_value_t = 0.4)]
    pub r: f64,
    /// Stroke duration in periods, or `sudden`.
    #[arg(long, default_value = "1")]
    pub tau: TauArg,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub solver: Solver,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<NonZeroUsize>,
    /// Seed of the randomized sweeps.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Run the full Fock-space cross-check (three r values, ten durations).
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultArg {
    FlipWComp,
}

/// A stroke duration on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauArg(pub StrokeDuration);

impl FromStr for TauArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("sudden") {
            return Ok(TauArg(StrokeDuration::Sudden));
        }
        match s.parse::<f64>() {
            Ok(p) if p > 0.0 && p.is_finite() => Ok(TauArg(StrokeDuration::Periods(p))),
            _ => Err(format!("expected a positive number of periods or `sudden`, got `{s}`")),
        }
    }
}

impl fmt::Display for TauArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            StrokeDuration::Sudden => f.write_str("sudden"),
            StrokeDuration::Periods(p) => write!(f, "{p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_tau() {
        assert_eq!("sudden".parse::<TauArg>().unwrap().0, StrokeDuration::Sudden);
        assert_eq!("2.5".parse::<TauArg>().unwrap().0, StrokeDuration::Periods(2.5));
        assert!("-1".parse::<TauArg>().is_err());
        assert!("fast".parse::<TauArg>().is_err());
    }

    #[test]
    fn fig2_defaults() {
        let cli = Cli::try_parse_from(["otto", "fig2"]).unwrap();
        let Command::Fig2(args) = cli.command else { panic!() };
        assert_eq!(args.r, vec![0.4, 0.8, 1.2]);
        assert_eq!((args.tau_min, args.tau_max, args.tau_steps), (0.02, 10.0, 500));
        assert_eq!(args.physics.beta_h, 0.1);
        assert_eq!(args.solver.step, 2e-3);
    }
}
