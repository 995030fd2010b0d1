use clap::{Args, Parser, Subcommand};
use nalgebra::Matrix2;
use sealimb::config::{parse_config, parse_grid, RunConfig};
use sealimb::error::Error;
use sealimb::lyapunov;
use sealimb::plot::emit_plot;
use sealimb::sim::{
    self, metrics, run_closed_loop, run_ideal_mrac, sweep_to_csv, Metrics, SimMode, SimRun,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Series-elastic lower-limb simulation: adaptive cascade control runs,
/// gain sweeps and self-checks.
#[derive(Parser)]
#[command(name = "sealimb", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (TOML; an empty file selects the built-in setup)
    config: PathBuf,
    /// Output directory (overrides [output].dir)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full-cascade closed-loop run; writes trace, metrics, effective config
    /// and plots
    Simulate(RunArgs),
    /// Ideal-mode run (adaptive torque applied directly) with Lyapunov
    /// diagnostics on
    Ideal(RunArgs),
    /// One closed-loop run per grid point; writes a metrics table
    Sweep {
        config: PathBuf,
        /// Grid file listing per-constant value lists
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run cells sequentially instead of in parallel
        #[arg(long)]
        serial: bool,
    },
    /// Solve the 2x2 algebraic Lyapunov equation and print P with its
    /// residual
    Lyapunov {
        /// Reference matrix entries a11,a12,a21,a22
        #[arg(long, allow_hyphen_values = true, value_parser = parse_mat2)]
        am: Mat2Arg,
        /// Weight matrix entries q11,q12,q21,q22 (identity when omitted)
        #[arg(long, allow_hyphen_values = true, value_parser = parse_mat2)]
        q: Option<Mat2Arg>,
    },
    /// Run the built-in invariant suite; exits nonzero on any failure
    Validate,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Clone, Debug)]
struct Mat2Arg([f64; 4]);

fn parse_mat2(s: &str) -> Result<Mat2Arg, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected 4 comma-separated entries, got {}", parts.len()));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part
            .parse()
            .map_err(|e| format!("bad entry `{part}`: {e}"))?;
    }
    Ok(Mat2Arg(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => run_command(&args, SimMode::FullCascade),
        Command::Ideal(args) => run_command(&args, SimMode::IdealMrac),
        Command::Sweep {
            config,
            grid,
            out,
            serial,
        } => sweep_command(&config, &grid, out.as_deref(), serial),
        Command::Lyapunov { am, q } => lyapunov_command(&am.0, q.map(|m| m.0)),
        Command::Validate => validate_command(),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, ExitCode> {
    match parse_config(path) {
        Ok(rc) => {
            for w in &rc.warnings {
                eprintln!("warning: {w}");
            }
            Ok(rc)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(EXIT_USAGE))
        }
    }
}

fn write_outputs(
    rc: &RunConfig,
    run: &SimRun,
    m: Option<&Metrics>,
    out_dir: &Path,
    ideal_mode: bool,
) -> Result<(), Error> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("effective_config.toml"), rc.effective_toml())?;
    run.trace.write_csv(&out_dir.join("trace.csv"))?;
    if let Some(m) = m {
        let csv = format!(
            "peak_e1_post,rms_e1_post,peak_z1_overall,peak_z1_post,peak_e2_post,settled\n\
             {},{},{},{},{},{}\n",
            m.peak_e1_post,
            m.rms_e1_post,
            m.peak_z1_overall,
            m.peak_z1_post,
            m.peak_e2_post,
            m.settled
        );
        std::fs::write(out_dir.join("metrics.csv"), csv)?;
    }
    if rc.output.plots && !run.trace.rows.is_empty() {
        let t = &run.trace;
        emit_plot(t, &["r", "x1", "xm1"], &out_dir.join("tracking.svg"), "angle tracking")?;
        emit_plot(t, &["e1", "e2"], &out_dir.join("errors.svg"), "tracking errors")?;
        emit_plot(t, &["z1"], &out_dir.join("torque.svg"), "actuator torque")?;
        emit_plot(
            t,
            &["kx1", "kx2", "kr", "theta1", "theta2"],
            &out_dir.join("gains.svg"),
            "adaptive gains",
        )?;
        if ideal_mode {
            emit_plot(t, &["v_clf"], &out_dir.join("clf.svg"), "Lyapunov function")?;
        }
    }
    Ok(())
}

fn run_command(args: &RunArgs, mode: SimMode) -> ExitCode {
    let mut rc = match load_config(&args.config) {
        Ok(rc) => rc,
        Err(code) => return code,
    };
    rc.scenario.sim.mode = mode;
    let ideal_mode = mode == SimMode::IdealMrac;
    if ideal_mode {
        rc.scenario.sim.record_clf = true;
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&rc.output.dir));

    let run = match if ideal_mode {
        run_ideal_mrac(&rc.scenario)
    } else {
        run_closed_loop(&rc.scenario)
    } {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let m = metrics(&run.trace, rc.scenario.sim.transient_cutoff).ok();
    if let Err(e) = write_outputs(&rc, &run, m.as_ref(), &out_dir, ideal_mode) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }

    match &run.fault {
        Some(fault) => {
            eprintln!(
                "run aborted at t = {:.4} s: {} (partial trace written to {})",
                fault.t,
                fault.message,
                out_dir.join("trace.csv").display()
            );
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        None => {
            if let Some(m) = &m {
                println!(
                    "done: {} rows; post-{}s peak |e1| = {:.5} rad, peak |z1| = {:.3} N*m \
                     (outputs in {})",
                    run.trace.rows.len(),
                    rc.scenario.sim.transient_cutoff,
                    m.peak_e1_post,
                    m.peak_z1_overall,
                    out_dir.display()
                );
            }
            ExitCode::SUCCESS
        }
    }
}

fn sweep_command(config: &Path, grid_path: &Path, out: Option<&Path>, serial: bool) -> ExitCode {
    let rc = match load_config(config) {
        Ok(rc) => rc,
        Err(code) => return code,
    };
    let grid = match parse_grid(grid_path, &rc.scenario.adaptation) {
        Ok(grid) => grid,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let rows = sim::run_sweep(&rc.scenario, &grid, !serial);
    let out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&rc.output.dir));
    if let Err(e) = std::fs::create_dir_all(&out_dir)
        .map_err(Error::from)
        .and_then(|()| {
            std::fs::write(out_dir.join("sweep.csv"), sweep_to_csv(&rows)).map_err(Error::from)
        })
    {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let failures = rows.iter().filter(|r| r.fault.is_some()).count();
    println!(
        "swept {} cells ({failures} failed); table written to {}",
        rows.len(),
        out_dir.join("sweep.csv").display()
    );
    ExitCode::SUCCESS
}

fn lyapunov_command(am: &[f64; 4], q: Option<[f64; 4]>) -> ExitCode {
    let a = Matrix2::new(am[0], am[1], am[2], am[3]);
    let q = q
        .map(|v| Matrix2::new(v[0], v[1], v[2], v[3]))
        .unwrap_or_else(Matrix2::identity);
    match lyapunov::solve_lyapunov(&a, &q) {
        Ok(p) => {
            println!("P = [[{}, {}], [{}, {}]]", p[(0, 0)], p[(0, 1)], p[(1, 0)], p[(1, 1)]);
            println!("residual max|PA + A'P + Q| = {:e}", lyapunov::residual(&a, &q, &p));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn validate_command() -> ExitCode {
    let results = sealimb::checks::run_all();
    let mut all_ok = true;
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_ok &= r.passed;
    }
    if all_ok {
        println!("all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
