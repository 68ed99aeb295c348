use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use ispnav::{bench, field_dump, scenario, trace, SEED_ENV};
use ispnav_core::{AgentMode, Scenario, Simulation};

#[derive(Parser)]
#[command(name = "ispnav", version, about = "Image-space potential field navigation: runner, field dumper, benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// Seed for sensing noise / random objects. Overrides the scenario's seed.
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV trace.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Trace file; `-` or absent writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for field dumps of controlled agents.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        dump_every: u64,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Time safe-control computation on fields with varying object counts.
    Bench {
        #[arg(long, default_value_t = 640)]
        width: usize,
        #[arg(long, default_value_t = 480)]
        height: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        objects: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Write the field one agent senses at a given step, without acting on it.
    DumpField {
        #[arg(long)]
        scenario: PathBuf,
        /// Steps simulated before sensing.
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Observing agent id; defaults to the first controlled agent.
        #[arg(long)]
        agent: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => {
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path, seed: Option<u64>) -> anyhow::Result<Scenario> {
    let mut s = scenario::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = seed {
        s.config.seed = seed;
    }
    Ok(s)
}

/// Returns whether the run ended in a collision.
fn cmd_run(
    scenario_path: &Path,
    out: Option<&Path>,
    dump_dir: Option<&Path>,
    dump_every: u64,
    seed: Option<u64>,
) -> anyhow::Result<bool> {
    let s = load(scenario_path, seed)?;
    if let Some(dir) = dump_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut out = output(out)?;
    trace::write_header(&mut out)?;
    let mut sim = Simulation::new(&s)?;
    loop {
        let step = sim.step_index();
        let Some(records) = sim.step()? else { break };
        trace::write_records(&mut out, &records)?;
        if let Some(dir) = dump_dir.filter(|_| (step as u64).is_multiple_of(dump_every)) {
            for (i, a) in s.agents.iter().enumerate() {
                if a.mode == AgentMode::Controlled {
                    let path = dir.join(format!("field_{step}_{}.txt", a.initial.id));
                    std::fs::write(&path, field_dump::dump(sim.field(i)))
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            }
        }
    }
    out.flush()?;
    Ok(sim.collided())
}

fn cmd_bench(cfg: &bench::BenchConfig, out: Option<&Path>) -> anyhow::Result<()> {
    let rows = bench::run_bench(cfg)?;
    let mut out = output(out)?;
    writeln!(out, "{}", bench::HEADER)?;
    for r in &rows {
        writeln!(out, "{}", r.csv())?;
        eprintln!("compose N={}: {} ns", r.objects, r.compose.as_nanos());
    }
    out.flush()?;
    Ok(())
}

fn cmd_dump_field(
    scenario_path: &Path,
    step: usize,
    agent: Option<u32>,
    out: Option<&Path>,
    seed: Option<u64>,
) -> anyhow::Result<()> {
    let s = load(scenario_path, seed)?;
    let index = match agent {
        Some(id) => s
            .agents
            .iter()
            .position(|a| a.initial.id == id)
            .with_context(|| format!("no agent with id {id}"))?,
        None => s.agents.iter().position(|a| a.mode == AgentMode::Controlled).unwrap_or(0),
    };
    let mut sim = Simulation::new(&s)?;
    while sim.step_index() < step {
        if sim.step()?.is_none() {
            bail!("run ended at step {} before reaching step {step}", sim.step_index());
        }
    }
    sim.sense_all()?;
    let mut out = output(out)?;
    out.write_all(field_dump::dump(sim.field(index)).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            dump_dir,
            dump_every,
            seed,
        } => cmd_run(&scenario, out.as_deref(), dump_dir.as_deref(), dump_every, seed.seed),
        Command::Bench {
            width,
            height,
            objects,
            reps,
            out,
            seed,
        } => cmd_bench(
            &bench::BenchConfig {
                width,
                height,
                object_counts: objects,
                repetitions: reps,
                seed: seed.seed.unwrap_or(0),
            },
            out.as_deref(),
        )
        .map(|()| false),
        Command::DumpField {
            scenario,
            step,
            agent,
            out,
            seed,
        } => cmd_dump_field(&scenario, step, agent, out.as_deref(), seed.seed).map(|()| false),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
