//! Command-line entry point.
//!
//! Thin argument handling over the library: `run` simulates from config
//! files, `capacity` compares two machine configs analytically, `validate`
//! lints inputs, and `dump-tables` prints the multicast tables. Exit codes:
//! 0 success, 1 bad input or usage, 2 internal invariant violation.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::load_system_config;
use crate::error::{Error, Result};
use crate::fabric::{build_routing_tables, dump_tables};
use crate::network::load_network;
use crate::place::{place_and_build, Geometry};
use crate::report::{emit_report, write_atomic};
use crate::sim::{capacity_ratio, run_simulation, ReferenceWorkload, SimOptions};

#[derive(Parser)]
#[command(
    name = "spikemesh",
    version,
    about = "Deterministic many-core spiking neural network machine simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a network and write reports.
    Run {
        /// System (machine) config JSON.
        #[arg(long)]
        system: String,
        /// Network description JSON.
        #[arg(long)]
        network: String,
        /// Timesteps to simulate.
        #[arg(long)]
        steps: u64,
        /// Report JSON output path.
        #[arg(long)]
        out: String,
        /// Optional per-timestep CSV output path.
        #[arg(long)]
        csv: Option<String>,
        /// Optional spike raster CSV output path.
        #[arg(long)]
        raster: Option<String>,
        /// Phase-A worker threads; results are identical for any count.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config trace cap.
        #[arg(long = "trace-cap")]
        trace_cap: Option<usize>,
    },
    /// Compare two machine configs: core count, per-core throughput, and
    /// modeled capacity ratios.
    Capacity {
        /// Baseline system config.
        system_a: String,
        /// Comparison system config.
        system_b: String,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<String>,
        /// Reference workload: synaptic events per timestep.
        #[arg(long, default_value_t = 1000)]
        events: u64,
        /// Reference workload: neurons per core.
        #[arg(long, default_value_t = 100)]
        neurons: u64,
    },
    /// Parse and validate inputs without running.
    Validate {
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        network: Option<String>,
    },
    /// Build and print the multicast routing tables.
    DumpTables {
        #[arg(long)]
        system: String,
        #[arg(long)]
        network: String,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
}

/// Parse argv and execute; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            system,
            network,
            steps,
            out,
            csv,
            raster,
            workers,
            seed,
            trace_cap,
        } => {
            let sys = load_system_config(&system)?;
            let net = load_network(&network)?;
            let options = SimOptions {
                workers: workers.max(1),
                record_series: csv.is_some(),
                record_raster: raster.is_some(),
                trace_cap,
                seed_override: seed,
                ..Default::default()
            };
            let report = run_simulation(&sys, &net, steps, options)?;
            emit_report(&report, &out, csv.as_deref(), raster.as_deref())?;
            eprintln!(
                "ran {} timesteps: {} spikes, {} total",
                report.timesteps,
                report.totals.counters.spikes_emitted,
                format_args!("{} J", report.totals.total.joules)
            );
            Ok(())
        }
        Command::Capacity {
            system_a,
            system_b,
            out,
            events,
            neurons,
        } => {
            let a = load_system_config(&system_a)?;
            let b = load_system_config(&system_b)?;
            let report = capacity_ratio(
                &a,
                &b,
                ReferenceWorkload {
                    synaptic_events: events,
                    neurons,
                },
            );
            let mut json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Internal(format!("capacity report: {e}")))?;
            json.push('\n');
            match out {
                Some(path) => write_atomic(&path, &json)?,
                None => print!("{json}"),
            }
            eprintln!(
                "capacity: cores x{}, per-core throughput x{}, modeled capacity x{}",
                report.core_ratio, report.per_core_throughput_ratio, report.capacity_ratio
            );
            Ok(())
        }
        Command::Validate { system, network } => {
            if system.is_none() && network.is_none() {
                return Err(Error::Validation(
                    "validate needs --system and/or --network".into(),
                ));
            }
            let sys = system.as_deref().map(load_system_config).transpose()?;
            let net = network.as_deref().map(load_network).transpose()?;
            if let (Some(sys), Some(net)) = (&sys, &net) {
                let built = place_and_build(net, sys)?;
                build_routing_tables(
                    &built.placement,
                    &built.keyspace,
                    &built.synapses,
                    &Geometry::of(sys),
                    sys.fabric.table_capacity,
                )?;
                eprintln!(
                    "ok: {} neurons on {} cores, {} synapses",
                    net.total_neurons(),
                    built.placement.cores.len(),
                    built.synapses.total_entries()
                );
            } else {
                eprintln!("ok");
            }
            Ok(())
        }
        Command::DumpTables {
            system,
            network,
            out,
        } => {
            let sys = load_system_config(&system)?;
            let net = load_network(&network)?;
            let built = place_and_build(&net, &sys)?;
            let geom = Geometry::of(&sys);
            let tables = build_routing_tables(
                &built.placement,
                &built.keyspace,
                &built.synapses,
                &geom,
                sys.fabric.table_capacity,
            )?;
            let text = dump_tables(&tables, &geom);
            match out {
                Some(path) => write_atomic(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}
