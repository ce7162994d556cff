use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use coexsim::engine::{run_campaign, write_drop_csv, CampaignContext};
use coexsim::mcs::{build_mcs_table, write_mcs_csv};
use coexsim::propagation::write_coupling_csv;
use coexsim::report::{aggregate_json, write_atomic, write_campaign_csv, write_wall_sweep_csv};
use coexsim::scenario::{ConfigFile, Figure};

/// Macro eMBB / factory URLLC TDD co-existence simulator.
#[derive(Debug, Parser)]
#[command(name = "coexsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Scenario file (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Run the axis sweep of a figure: 4a, 4b, 5a, 5b, 6 or 7.
    #[arg(long, global = true)]
    figure: Option<Figure>,

    /// Override the number of drops per cell.
    #[arg(long, global = true)]
    drops: Option<usize>,

    /// Override the campaign seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for drops (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    parallelism: usize,

    /// Write the link table of every drop.
    #[arg(long, global = true)]
    dump_couplings: bool,

    /// Check the configuration and exit.
    #[arg(long, global = true)]
    validate: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every cell of the experiment (default).
    Run,
    /// Check the configuration and print the resolved scenario.
    Validate,
    /// Print the URLLC MCS table with its SINR thresholds.
    McsTable,
}

fn load(cli: &Cli) -> Result<ConfigFile> {
    let mut cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(d) = cli.drops {
        cfg.scenario.drops = d;
    }
    if let Some(s) = cli.seed {
        cfg.scenario.seed = s;
    }
    cfg.scenario.validate()?;
    Ok(cfg)
}

fn validate(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    let cells = cfg.scenarios(cli.figure)?;
    let s = &cfg.scenario;
    println!("valid");
    println!("cells: {}", cells.len());
    println!("macro pattern: {}", s.macro_pattern());
    println!("factory pattern: {}", s.factory_pattern());
    print!("{}", toml::to_string_pretty(s).context("rendering the resolved scenario")?);
    Ok(())
}

fn mcs_table(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    let table = build_mcs_table(&cfg.scenario.mcs_config())?;
    write_mcs_csv(std::io::stdout().lock(), &table)?;
    Ok(())
}

fn dump_couplings(dir: &Path, cell: &str, scenario: &coexsim::scenario::Scenario) -> Result<()> {
    let ctx = CampaignContext::new(scenario)?;
    for i in 0..scenario.drops {
        let model = ctx.drop_model(i)?;
        let mut buf = Vec::new();
        write_coupling_csv(&mut buf, model.coupling_rows())?;
        write_atomic(&dir.join(format!("{cell}_couplings_drop{i}.csv")), &buf)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load(cli)?;
    let cells = cfg.scenarios(cli.figure)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let mut rows = Vec::with_capacity(cells.len());
    let mut stalled = Vec::new();
    for s in &cells {
        let name = s.cell_name();
        let out = run_campaign(s, cli.parallelism).with_context(|| format!("cell {name}"))?;
        let a = &out.aggregate;
        println!(
            "{name}: availability DL {:.2}% UL {:.2}%, throughput DL {:.2} UL {:.2} Mbps{}",
            a.availability_dl_pct.mean,
            a.availability_ul_pct.mean,
            a.throughput_dl_mbps.mean,
            a.throughput_ul_mbps.mean,
            if a.converged { "" } else { " (not converged)" }
        );
        if !a.converged {
            stalled.push(name.clone());
        }
        write_atomic(&cli.out.join(format!("{name}.json")), aggregate_json(a).as_bytes())?;
        let mut buf = Vec::new();
        write_drop_csv(&mut buf, &out.drops)?;
        write_atomic(&cli.out.join(format!("{name}_drops.csv")), &buf)?;
        if cli.dump_couplings {
            dump_couplings(&cli.out, &name, s)?;
        }
        rows.push(out.aggregate);
    }
    let mut buf = Vec::new();
    write_campaign_csv(&mut buf, &rows)?;
    write_atomic(&cli.out.join("campaign.csv"), &buf)?;
    if cli.figure == Some(Figure::F6) {
        let mut buf = Vec::new();
        write_wall_sweep_csv(&mut buf, &rows)?;
        write_atomic(&cli.out.join("figure6.csv"), &buf)?;
    }
    if !stalled.is_empty() {
        eprintln!("load iteration did not converge in: {}", stalled.join(", "));
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match (&cli.command, cli.validate) {
        (Some(Command::Validate), _) | (None | Some(Command::Run), true) => validate(&cli).map(|_| true),
        (Some(Command::McsTable), _) => mcs_table(&cli).map(|_| true),
        (None | Some(Command::Run), false) => run(&cli),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
