use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ibvp_cli::diag::diag_operators;
use ibvp_cli::run::run;
use ibvp_cli::sweep::{sweep_convergence, sweep_tdot};
use ibvp_cli::{CliError, Config};
use ibvp_core::SbpOrder;

#[derive(Parser)]
#[command(name = "noether-ibvp", version, about = "Variational wave propagation with a dynamical time map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Sbp121,
    Sbp242,
}

impl From<Order> for SbpOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::Sbp121 => SbpOrder::Sbp121,
            Order::Sbp242 => SbpOrder::Sbp242,
        }
    }
}

#[derive(Args)]
struct Common {
    /// TOML configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root directory for artifacts.
    #[arg(long, env = "NOETHER_IBVP_OUT", default_value = "runs")]
    out: PathBuf,
    /// Overrides `solver.tolerance`.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Overrides `grid.order`.
    #[arg(long, value_enum)]
    order: Option<Order>,
}

impl Common {
    fn load(&self) -> Result<Config, CliError> {
        let mut c = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(t) = self.tolerance {
            c.solver.tolerance = t;
        }
        if let Some(o) = self.order {
            c.grid.order = o.into();
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write its artifacts.
    Run {
        #[command(flatten)]
        common: Common,
        /// Recompute even if a finished run with the same configuration exists.
        #[arg(long)]
        force: bool,
    },
    /// Error norms and fitted rates over the configured grids.
    SweepConvergence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Initial charge and drift over the configured clock rates.
    SweepTdot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Dump operator matrices and their spectra.
    DiagOperators {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        n_tau: usize,
        #[arg(long, default_value_t = 24)]
        n_sigma: usize,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common, force } => {
            let c = common.load()?;
            let r = run(&c, &common.out, force)?;
            let tag = if r.cached { " (cached)" } else { "" };
            println!("{}{tag}", r.dir.display());
            println!(
                "iterations {}  residual {:.3e}  drift {:.3e}  final time {:.6}",
                r.report.iterations, r.report.final_residual, r.report.drift, r.report.final_time
            );
        }
        Command::SweepConvergence { common, jobs } => {
            let c = common.load()?;
            let (dir, s) = sweep_convergence(&c, &common.out, jobs)?;
            println!("{}", dir.display());
            for (name, f) in [("eps_t", s.fit_t), ("eps_phi", s.fit_phi), ("eps_phi_mol", s.fit_phi_mol)] {
                match f {
                    Some(f) => println!("{name:<12} beta {:.3}", f.beta),
                    None => println!("{name:<12} no fit"),
                }
            }
            println!("eps_phi_we decreasing: {}", s.eps_phi_we_decreasing);
        }
        Command::SweepTdot { common, jobs } => {
            let c = common.load()?;
            let (dir, s) = sweep_tdot(&c, &common.out, jobs)?;
            println!("{}", dir.display());
            for r in &s.rows {
                println!("t_dot {:<6} n_tau {:<4} Q0 {:.6}  drift {:.3e}", r.t_dot_ic, r.n_tau, r.q0, r.drift);
            }
        }
        Command::DiagOperators { common, n_tau, n_sigma } => {
            let c = common.load()?;
            let order = common.order.map(SbpOrder::from).unwrap_or(SbpOrder::Sbp121);
            let (dir, s) = diag_operators(&c, order, n_tau, n_sigma, &common.out)?;
            println!("{}", dir.display());
            for (name, sp) in &s.spectra {
                println!("{name:<16} zero modes {:<4} rho {:.4e}", sp.zero_modes, sp.spectral_radius);
            }
            for (name, v) in &s.min_singular {
                println!("{name:<16} min singular value {v:.4e}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
