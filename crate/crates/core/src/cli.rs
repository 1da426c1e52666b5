//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a negative answer (infeasible, budget
//! exhausted, invalid solution, failed demo), 2 usage, parse or IO errors.

use std::error::Error;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::constraints::{achieved_margin, compile_system, Dataset, HiddenAssignment};
use crate::eval::{noise_sweep, xor_trio};
use crate::feasibility::{solve, verify_system, EnumerationOrder, SolverConfig, Status};
use crate::formats::{
    params_from_solution, parse_dataset, parse_topology, witness_from_solution, SolutionFile,
    SystemDump,
};
use crate::model::{Pattern, Topology, UpdateSchedule};
use crate::posterior::{build_posterior, sample_patterns, SamplerConfig, TailMode};
use crate::rational::{format_rational, parse_rational, Rational};

type CliResult = Result<i32, Box<dyn Error>>;

#[derive(Debug, Parser)]
#[command(name = "bmfeas", version, about = "Exact feasibility training for deterministic Boltzmann machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the linear constraint system for one hidden assignment as JSON.
    Compile {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Row-major hidden bits, one per (sample, hidden unit).
        #[arg(long, default_value = "")]
        hidden: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Search hidden assignments for a strictly feasible parameter vector.
    Solve {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Bound on every |parameter|.
        #[arg(long = "box", default_value = "16", value_parser = rational_arg)]
        box_bound: Rational,
        #[arg(long, default_value = "1/1000", value_parser = rational_arg)]
        min_margin: Rational,
        #[arg(long, default_value = "1", value_parser = rational_arg)]
        margin_cap: Rational,
        #[arg(long)]
        max_leaves: Option<u64>,
        #[arg(long, value_enum, default_value_t = OrderArg::Lex)]
        order: OrderArg,
        /// Reserved for randomized orders; the current search is deterministic.
        #[arg(long, env = "BMFEAS_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a solution file exactly against the data.
    Verify {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Required margin; defaults to the one recorded in the solution.
        #[arg(long, value_parser = rational_arg)]
        margin: Option<Rational>,
    },
    /// Draw visible patterns from the posterior around a solution.
    Sample {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 1500)]
        size: usize,
        #[arg(long, env = "BMFEAS_SEED", default_value_t = 0)]
        seed: u64,
        /// Also print hidden bits and the convergence flag.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fraction of samples landing in the data, for several noise levels.
    Sweep {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5, 2.0])]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 1500)]
        size: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3])]
        seeds: Vec<u64>,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve XOR on the three built-in architectures.
    XorDemo,
}

#[derive(Debug, clap::Args)]
struct SamplerArgs {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value = "1", value_parser = rational_arg)]
    scale_c: Rational,
    #[arg(long, default_value_t = 10)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = TailArg::Centered)]
    tail_mode: TailArg,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Sequential)]
    schedule: ScheduleArg,
}

impl SamplerArgs {
    fn config(&self, size: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            epsilon: self.epsilon,
            scale_c: self.scale_c.clone(),
            size,
            seed,
            max_iter: self.max_iter,
            tail_mode: match self.tail_mode {
                TailArg::Literal => TailMode::Literal,
                TailArg::Centered => TailMode::Centered,
            },
            schedule: match self.schedule {
                ScheduleArg::Sequential => UpdateSchedule::Sequential,
                ScheduleArg::Synchronous => UpdateSchedule::Synchronous,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    Lex,
    Reverse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TailArg {
    Literal,
    Centered,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Sequential,
    Synchronous,
}

fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String, Box<dyn Error>> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_topology(path: &Path) -> Result<Topology, Box<dyn Error>> {
    parse_topology(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_dataset(path: &Path) -> Result<Dataset, Box<dyn Error>> {
    parse_dataset(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_solution(path: &Path) -> Result<SolutionFile, Box<dyn Error>> {
    serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()).into()),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                2
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match command {
        Command::Compile {
            topology,
            data,
            hidden,
            output,
        } => {
            let topo = load_topology(&topology)?;
            let data = load_dataset(&data)?;
            let hidden = HiddenAssignment::from_bit_string(&hidden, data.num_samples(), topo.num_hidden())?;
            let sys = compile_system(&topo, &data, &hidden)?;
            let json = serde_json::to_string_pretty(&SystemDump::from_system(&sys))? + "\n";
            emit(&json, output.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Solve {
            topology,
            data,
            box_bound,
            min_margin,
            margin_cap,
            max_leaves,
            order,
            seed: _,
            output,
        } => {
            let topo = load_topology(&topology)?;
            let data = load_dataset(&data)?;
            let cfg = SolverConfig {
                box_bound,
                min_margin,
                margin_cap,
                order: match order {
                    OrderArg::Lex => EnumerationOrder::Lexicographic,
                    OrderArg::Reverse => EnumerationOrder::ReverseLexicographic,
                },
                max_leaves,
            };
            let result = solve(&topo, &data, &cfg)?;
            let json = serde_json::to_string_pretty(&SolutionFile::from_result(&result))? + "\n";
            emit(&json, output.as_deref(), stdout)?;
            if output.is_some() {
                writeln!(stdout, "{}", result.status.as_str())?;
            }
            Ok(if result.status == Status::Feasible { 0 } else { 1 })
        }
        Command::Verify {
            topology,
            data,
            solution,
            margin,
        } => {
            let topo = load_topology(&topology)?;
            let data = load_dataset(&data)?;
            let file = load_solution(&solution)?;
            let witness = witness_from_solution(&file, &topo, &data)?;
            let required = margin.unwrap_or_else(|| witness.margin.clone());
            let sys = compile_system(&topo, &data, &witness.hidden)?;
            let valid = verify_system(&sys, &witness.params, &required);
            let achieved = achieved_margin(&sys, &witness.params)?;
            writeln!(stdout, "{}", if valid { "valid" } else { "invalid" })?;
            writeln!(stdout, "required margin {}", format_rational(&required))?;
            match achieved {
                Some(m) => writeln!(stdout, "achieved margin {}", format_rational(&m))?,
                None => writeln!(stdout, "achieved margin unbounded (no constraints)")?,
            }
            Ok(if valid { 0 } else { 1 })
        }
        Command::Sample {
            topology,
            solution,
            sampler,
            size,
            seed,
            full,
            output,
        } => {
            let topo = load_topology(&topology)?;
            let params = params_from_solution(&load_solution(&solution)?, &topo)?;
            let cfg = sampler.config(size, seed);
            let spec = build_posterior(&params, &cfg)?;
            let batch = sample_patterns(&spec, &topo, &cfg)?;
            let mut text = String::new();
            for ((visible, full_pattern), converged) in batch
                .visible_patterns
                .iter()
                .zip(&batch.full_patterns)
                .zip(&batch.converged_flags)
            {
                if full {
                    let hidden = Pattern::new(full_pattern.bits()[topo.num_visible()..].to_vec());
                    text.push_str(&format!("{visible} | {hidden} | {}\n", u8::from(*converged)));
                } else {
                    text.push_str(&format!("{visible}\n"));
                }
            }
            emit(&text, output.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Sweep {
            topology,
            data,
            solution,
            sampler,
            epsilons,
            size,
            seeds,
            report,
        } => {
            let topo = load_topology(&topology)?;
            let data = load_dataset(&data)?;
            let params = params_from_solution(&load_solution(&solution)?, &topo)?;
            let base = sampler.config(size, 0);
            let sweep = noise_sweep(&params, &topo, &data, &epsilons, size, &seeds, &base)?;
            write!(stdout, "{}", sweep.to_table())?;
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&sweep)? + "\n";
                fs::write(&path, json).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(0)
        }
        Command::XorDemo => {
            let report = xor_trio()?;
            write!(stdout, "{report}")?;
            if report.passed() {
                writeln!(stdout, "all three cases as expected")?;
                Ok(0)
            } else {
                writeln!(stderr, "xor demo: unexpected outcome")?;
                Ok(1)
            }
        }
    }
}
