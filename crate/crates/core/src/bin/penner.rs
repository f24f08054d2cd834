use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use penner::io::commands::{error_json, exit_code, run, Command};
use penner::io::config::RunConfig;
use penner::Result;

#[derive(Parser)]
#[command(
    name = "penner",
    version,
    about = "Cone metric optimization in Penner coordinates"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize a distortion energy subject to the cone angles.
    Optimize(RunArgs),
    /// Conformal map to the cone angles.
    Project(RunArgs),
    /// Conformal projection of a weighted sum of metrics.
    Interpolate(RunArgs),
    /// Stretch and scale statistics of a metric file.
    Stats(RunArgs),
    /// Evaluate the surface map at random points.
    MapSample(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file; repeat to run a batch.
    #[arg(short, long)]
    config: Vec<PathBuf>,
    /// Override a config key, as key=value.
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    cones: Option<String>,
    #[arg(short, long)]
    output: Option<String>,
    #[arg(long)]
    energy: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Threads for batch runs.
    #[arg(short, long, default_value_t = 1)]
    jobs: usize,
}

impl RunArgs {
    fn overrides(&self) -> Vec<String> {
        let named = [
            ("input", &self.input),
            ("cones", &self.cones),
            ("output", &self.output),
            ("energy", &self.energy),
            ("lambda", &self.lambda),
        ];
        let mut out: Vec<String> = named
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}={v}")))
            .collect();
        out.extend(self.set.iter().cloned());
        out
    }

    fn configs(&self) -> Result<Vec<RunConfig>> {
        let mut base = self
            .config
            .iter()
            .map(|p| RunConfig::read(p))
            .collect::<Result<Vec<_>>>()?;
        if base.is_empty() {
            base.push(RunConfig::default());
        }
        for c in &mut base {
            for o in self.overrides() {
                c.apply_override(&o)?;
            }
        }
        Ok(base)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Cmd::Optimize(a) => (Command::Optimize, a),
        Cmd::Project(a) => (Command::Project, a),
        Cmd::Interpolate(a) => (Command::Interpolate, a),
        Cmd::Stats(a) => (Command::Stats, a),
        Cmd::MapSample(a) => (Command::MapSample, a),
    };
    let configs = match args.configs() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            return ExitCode::from(exit_code(&Err(e)) as u8);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": "Io", "message": e.to_string() })
            );
            return ExitCode::from(1);
        }
    };
    let results: Vec<_> = pool.install(|| configs.par_iter().map(|c| run(cmd, c)).collect());
    let mut code = 0;
    for r in &results {
        match r {
            Ok(o) => {
                for p in &o.written {
                    println!("{}", p.display());
                }
            }
            Err(e) => eprintln!("{}", error_json(e)),
        }
        // precedence: I/O failure, then invalid input, then non-convergence
        code = match (code, exit_code(r)) {
            (1, _) | (_, 1) => 1,
            (2, _) | (_, 2) => 2,
            (a, b) => a.max(b),
        };
    }
    ExitCode::from(code as u8)
}
