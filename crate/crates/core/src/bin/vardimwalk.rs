use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vardimwalk::harness::{run, Experiment, ExperimentConfig};
use vardimwalk::Error;

/// Run one named experiment and print or write its report.
///
/// Exit status: 0 when every verdict passes, 1 when some fail, 2 on errors.
#[derive(Parser, Debug)]
#[command(name = "vardimwalk", version)]
struct Cli {
    /// build, balance, measures, geometry, generator, occupation,
    /// tightness, resurrection, variance or reversal
    experiment: String,
    /// Key-value file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scale `k` or a range `a..b`.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    rod_length: Option<String>,
    #[arg(long)]
    paths: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    /// Comma-separated window lengths.
    #[arg(long)]
    theta: Option<String>,
    /// Comma-separated levels.
    #[arg(long)]
    delta: Option<String>,
    /// Comma-separated observation times.
    #[arg(long)]
    times: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let exp: Experiment = cli.experiment.parse()?;
    let mut c = ExperimentConfig::defaults(exp);
    if let Some(path) = &cli.config {
        c.apply_file(path)?;
        c.experiment = exp;
    }
    let flags = [
        ("k", &cli.k),
        ("epsilon", &cli.epsilon),
        ("radius", &cli.radius),
        ("rod-length", &cli.rod_length),
        ("paths", &cli.paths),
        ("t-max", &cli.t_max),
        ("theta", &cli.theta),
        ("delta", &cli.delta),
        ("times", &cli.times),
        ("seed", &cli.seed),
        ("out", &cli.out),
        ("format", &cli.format),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            c.set(key, v)?;
        }
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure(&cli).and_then(|c| {
        let report = run(&c)?;
        if c.out.is_none() {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            report.write(c.format, &mut out)?;
            out.flush()?;
        }
        Ok(report)
    });
    match result {
        Ok(report) => {
            for m in report.metrics.iter().filter(|m| !m.passed()) {
                eprintln!("FAIL {} = {} ({})", m.name, m.value, m.tolerance);
            }
            for s in report.wall_clock.stages.iter().filter(|s| !s.within_budget()) {
                eprintln!("OVER BUDGET {} took {:.3}s", s.stage, s.seconds);
            }
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
