//! Command-line front end: instance generation, solving, rate inspection,
//! and oracle-backed verification.
//!
//! Exit codes: 0 on success (all verification inequalities hold), 1 when a
//! verification inequality fails, 2 on usage or input errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use precsched::flow::{build_network, max_flow, to_dot};
use precsched::gen::{generate, random_instance, GenConfig};
use precsched::oracle::{verify, VerificationReport, VerifyMode, DEFAULT_ORACLE_CAP};
use precsched::parallel_machine::{rates_parallel_detailed, solve_parallel};
use precsched::single_machine::solve_single;
use precsched::{parse_rat, rat, Instance, MachineSchedule, Rat, VirtualSchedule};

#[derive(Parser)]
#[command(
    name = "precsched",
    about = "Precedence-constrained scheduling to minimize total weighted completion time"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Single,
    Parallel,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance (deterministic in the seed).
    Gen {
        /// Number of jobs.
        #[arg(long)]
        jobs: usize,
        /// Edge probability, an exact rational in [0, 1] such as "1/2".
        #[arg(long, default_value = "1/2")]
        density: String,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Processing times are uniform integers in [0, max-p].
        #[arg(long, default_value_t = 20)]
        max_p: u64,
        /// Weights are uniform integers in [1, max-w].
        #[arg(long, default_value_t = 9)]
        max_w: u64,
        /// Machine count written into the instance.
        #[arg(long, default_value_t = 1)]
        machines: usize,
        /// Output path (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve an instance and emit the schedule JSON.
    Solve {
        /// Instance JSON file.
        #[arg(long)]
        input: PathBuf,
        /// single: round-robin + list scheduling (machines must be 1);
        /// parallel: flow rates + wrap-around.
        #[arg(long, value_enum)]
        mode: Mode,
        /// Output path for the schedule JSON (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the virtual schedule JSON to this path.
        #[arg(long)]
        emit_virtual: Option<PathBuf>,
        /// Also write a DOT dump of the time-zero flow network (parallel
        /// mode only).
        #[arg(long)]
        emit_dot: Option<PathBuf>,
        /// Also write the schedule as a Gantt CSV (decimal, for plotting).
        #[arg(long)]
        emit_gantt: Option<PathBuf>,
    },
    /// Check the approximation guarantees against the brute-force oracle,
    /// on one instance or on a seeded sweep of generated instances.
    Verify {
        /// Instance JSON file; omit to run a sweep instead.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of sweep instances to generate and verify.
        #[arg(long)]
        count: Option<usize>,
        /// Base seed of the sweep; instance i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum job count of sweep instances.
        #[arg(long, default_value_t = 8)]
        max_jobs: usize,
        /// Machine count of sweep instances.
        #[arg(long, default_value_t = 1)]
        machines: usize,
        /// Job-count cap for the brute-force oracle.
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: usize,
        /// Force the solver mode; defaults to single when machines = 1.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Output path for the report JSON (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen {
            jobs,
            density,
            seed,
            max_p,
            max_w,
            machines,
            output,
        } => {
            if jobs == 0 {
                bail!("--jobs must be positive");
            }
            let density = parse_density(&density)?;
            let cfg = GenConfig {
                jobs,
                density,
                max_p,
                max_w,
                seed,
            };
            let inst = generate(&cfg, machines).context("generating instance")?;
            write_out(output.as_deref(), &inst.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            input,
            mode,
            output,
            emit_virtual,
            emit_dot,
            emit_gantt,
        } => {
            let inst = read_instance(&input)?;
            if emit_dot.is_some() && mode == Mode::Single {
                bail!("--emit-dot requires --mode parallel");
            }
            let (vs, schedule): (VirtualSchedule, MachineSchedule) = match mode {
                Mode::Single => solve_single(&inst).context("solving")?,
                Mode::Parallel => {
                    let (vs, schedule, _) = solve_parallel(&inst).context("solving")?;
                    (vs, schedule)
                }
            };
            if let Some(path) = emit_virtual {
                fs::write(&path, vs.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = emit_dot {
                let dot = network_dot(&inst)?;
                fs::write(&path, dot).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = emit_gantt {
                fs::write(&path, schedule.to_gantt_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            write_out(output.as_deref(), &schedule.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            input,
            count,
            seed,
            max_jobs,
            machines,
            oracle_cap,
            mode,
            output,
        } => {
            let mut failures = 0usize;
            let mut reports: Vec<(String, VerificationReport)> = Vec::new();
            match (&input, count) {
                (Some(path), None) => {
                    let inst = read_instance(path)?;
                    let mode = verify_mode(mode, inst.machines());
                    let report = verify(&inst, mode, oracle_cap).context("verifying")?;
                    if !report.all_hold() {
                        failures += 1;
                    }
                    reports.push((path.display().to_string(), report));
                }
                (None, Some(count)) => {
                    for i in 0..count {
                        let inst_seed = seed.wrapping_add(i as u64);
                        let inst = random_instance(inst_seed, max_jobs, machines);
                        let mode = verify_mode(mode, inst.machines());
                        let report = verify(&inst, mode, oracle_cap)
                            .with_context(|| format!("verifying sweep instance {i}"))?;
                        if !report.all_hold() {
                            failures += 1;
                            reports.push((format!("seed {inst_seed}"), report));
                        }
                    }
                }
                _ => bail!("pass exactly one of --input or --count"),
            }

            let mut out = String::new();
            out.push_str(&format!(
                "{{\"checked\":{},\"violations\":{},\"reports\":[",
                if input.is_some() { 1 } else { count.unwrap_or(0) },
                failures
            ));
            for (i, (name, report)) in reports.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format!(
                    "{{\"instance\":{},\"report\":{}}}",
                    serde_json_string(name),
                    report.to_json().trim_end()
                ));
            }
            out.push_str("]}\n");
            write_out(output.as_deref(), &out)?;
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn verify_mode(flag: Option<Mode>, machines: usize) -> VerifyMode {
    match flag {
        Some(Mode::Single) => VerifyMode::Single,
        Some(Mode::Parallel) => VerifyMode::Parallel,
        None if machines == 1 => VerifyMode::Single,
        None => VerifyMode::Parallel,
    }
}

fn parse_density(text: &str) -> Result<Rat> {
    let density = parse_rat(text).context("parsing --density")?;
    if density < rat(0) || density > rat(1) {
        bail!("--density must lie in [0, 1]");
    }
    Ok(density)
}

fn read_instance(path: &PathBuf) -> Result<Instance> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::from_json(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// DOT dump of the network for the full job set at time zero, showing the
/// canonical flow the solver prices rates from. When no pricing happens
/// (at most m available jobs, or zero total weight) the dump falls back to
/// a plain max flow at the all-sink saturation point.
fn network_dot(inst: &Instance) -> Result<String> {
    let unfinished: BTreeSet<usize> = (0..inst.job_count()).collect();
    if unfinished.is_empty() {
        bail!("instance has no jobs");
    }
    let net = build_network(inst, &unfinished);
    let detailed = rates_parallel_detailed(inst, &unfinished);
    if let Some(pricing) = detailed.pricing {
        return Ok(to_dot(&net, &pricing.lambda, Some(&pricing.flow)));
    }
    let total = net.total_weight();
    if total == rat(0) {
        return Ok(to_dot(&net, &rat(0), None));
    }
    let lambda = rat(inst.machines() as i64) / total;
    let (flow, _) = max_flow(&net, &lambda);
    Ok(to_dot(&net, &lambda, Some(&flow)))
}

fn write_out(path: Option<&std::path::Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn serde_json_string(s: &str) -> String {
    let escaped = s
        .replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n");
    format!("\"{escaped}\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_defaults_follow_machine_count() {
        assert_eq!(verify_mode(None, 1), VerifyMode::Single);
        assert_eq!(verify_mode(None, 3), VerifyMode::Parallel);
        assert_eq!(verify_mode(Some(Mode::Parallel), 1), VerifyMode::Parallel);
    }

    #[test]
    fn density_parsing() {
        assert!(parse_density("1/2").is_ok());
        assert!(parse_density("2").is_err());
        assert!(parse_density("-1/2").is_err());
    }
}
