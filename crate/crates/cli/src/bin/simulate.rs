use clap::Parser;
use qbath_cli::config::{self, Overrides, Preset, RunSpec, SweepAxis};
use qbath_cli::{runner, CliError};
use std::path::PathBuf;

/// Integrate the two-qubit common-bath model and write CSV time series.
#[derive(Parser)]
#[command(name = "simulate", version)]
#[command(group(
    clap::ArgGroup::new("source")
        .required(true)
        .args(["preset", "config"]),
))]
struct Cli {
    /// Bundled experiment driver: fig1, fig2, fig3, fig4, or fig5
    #[arg(long)]
    preset: Option<String>,

    /// TOML run description
    #[arg(long)]
    config: Option<PathBuf>,

    /// Propagator: exact, approx, lindblad, qsd, or pseudomode
    #[arg(long)]
    method: Option<String>,

    /// Trajectory count for the qsd method
    #[arg(long)]
    traj: Option<usize>,

    /// Ensemble random seed
    #[arg(long)]
    seed: Option<u64>,

    /// Simulated time span
    #[arg(long = "t-final")]
    t_final: Option<f64>,

    /// Output sampling interval (default t_final / 400)
    #[arg(long = "dt-out")]
    dt_out: Option<f64>,

    /// Output directory; overrides SIMULATE_OUT_DIR, defaults to "."
    #[arg(long)]
    out: Option<PathBuf>,

    /// Parameter to sweep (omega_a, omega_b, omega, j_xy, j_z, kappa_a,
    /// kappa_b, kappa, gamma)
    #[arg(long, requires = "values")]
    sweep: Option<String>,

    /// Comma-separated sweep values
    #[arg(long, requires = "sweep")]
    values: Option<String>,
}

fn build_specs(cli: &Cli) -> Result<Vec<RunSpec>, CliError> {
    let ov = Overrides {
        method: cli.method.as_deref().map(str::parse).transpose()?,
        n_traj: cli.traj,
        seed: cli.seed,
        t_final: cli.t_final,
        dt_out: cli.dt_out,
    };
    let mut specs = if let Some(name) = &cli.preset {
        name.parse::<Preset>()?.runs(&ov)?
    } else {
        let path = cli.config.as_ref().expect("clap enforces the source group");
        let cfg = config::load_config(path)?;
        vec![config::resolve_file(&cfg, path, &ov)?]
    };
    if let Some(axis) = &cli.sweep {
        let axis: SweepAxis = axis.parse()?;
        let values = config::parse_sweep_values(cli.values.as_deref().unwrap_or(""))?;
        specs = config::sweep_runs(&specs, axis, &values);
    }
    Ok(specs)
}

fn run(cli: &Cli) -> i32 {
    let specs = match build_specs(cli) {
        Ok(specs) => specs,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    if specs.is_empty() {
        println!("nothing to run");
        return 0;
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("SIMULATE_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let results = runner::execute_all(&specs, &out_dir);
    for (spec, res) in specs.iter().zip(&results) {
        match res {
            Ok(done) => println!("{}: wrote {}", done.label, done.csv_path.display()),
            Err(e) => eprintln!("{}: {e}", spec.label),
        }
    }
    runner::aggregate_exit_code(&results)
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
