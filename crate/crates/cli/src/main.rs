//! `netblock`: simulate networks, dump partitions, run diagnostics and the
//! LLN/CLT experiments.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use netblock::blocking::{bandwidths, partition, BlockPartition};
use netblock::harness::diagnose::{
    covariance_report, dispersion_report, maximal_report, summability_report, DiagnoseReport,
};
use netblock::harness::emit::{emit, format_float};
use netblock::harness::experiment::{lln_median_ratio, mu_oracle, mu_reps};
use netblock::harness::{run_clt, run_lln, ConfigError, ExperimentConfig, ExperimentSummary};
use netblock::mixingale::independence_radius;
use netblock::sim::{ModelKind, StatKind};
use netblock::Error;

#[derive(Parser, Debug)]
#[command(name = "netblock", version, about = "Network-dependence simulation and blocked inference")]
struct Cli {
    /// Worker threads for replications (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one network and print the node statistics.
    Simulate(Common),
    /// Print the blocking partition of one simulated network.
    Blocks(Common),
    /// Mixingale, summability and dispersion reports.
    Diagnose(Common),
    /// Law of large numbers experiment.
    Lln(Common),
    /// Studentized CLT experiment.
    Clt(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample size; repeat to give a grid.
    #[arg(long = "n")]
    n: Vec<usize>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    #[arg(long, value_parser = parse_stat)]
    stat: Option<StatKind>,
    /// Simulate margins and read the interior (default).
    #[arg(long, conflicts_with = "sample_based")]
    padded: bool,
    /// Statistics computed on the observed sample only.
    #[arg(long)]
    sample_based: bool,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    serde_plain(s)
}

fn parse_stat(s: &str) -> Result<StatKind, String> {
    serde_plain(s)
}

fn serde_plain<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

enum Failure {
    Fail,
    Config(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if !self.n.is_empty() {
            cfg.n_grid = self.n.clone();
        }
        if let Some(r) = self.reps {
            cfg.reps = r;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(m) = self.model {
            cfg.model = m;
        }
        if let Some(s) = self.stat {
            cfg.stat = s;
        }
        if self.padded {
            cfg.padded = true;
        }
        if self.sample_based {
            cfg.padded = false;
        }
        cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Blocks(c) => blocks(c),
        Command::Diagnose(c) => diagnose(c),
        Command::Lln(c) => experiment(c, false),
        Command::Clt(c) => experiment(c, true),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Fail) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn single_n(cfg: &ExperimentConfig) -> usize {
    cfg.n_grid[0]
}

fn simulate(c: &Common) -> Result<(), Failure> {
    let cfg = c.resolve()?;
    let spec = cfg.model_spec()?;
    let n = single_n(&cfg);
    let real = spec.simulate(cfg.seed, 0, n, cfg.padded)?;
    let mu = mu_oracle(&spec, n, mu_reps(1), cfg.seed, cfg.padded, cfg.mu_mode)?;
    let window = real.offset..real.offset + n;
    let links = window
        .clone()
        .map(|i| real.network.out_neighbors(i).iter().filter(|j| window.contains(j)).count())
        .sum::<usize>();
    println!(
        "# model={:?} stat={:?} n={n} padding={} links_in_window={links}",
        spec.kind, spec.stat, real.offset
    );
    println!("i,v,mu");
    for (i, (v, m)) in real.v.iter().zip(&mu.mu).enumerate() {
        println!("{},{},{}", i + 1, format_float(*v), format_float(*m));
    }
    Ok(())
}

fn list(xs: &[usize]) -> String {
    let items: Vec<String> = xs.iter().map(|x| (x + 1).to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn level(radius: Option<f64>, g: f64) -> String {
    match radius {
        Some(k) => format!("{k:.6}"),
        None => format!("g>={g:.6e}"),
    }
}

fn print_partition(p: &BlockPartition<f64>) {
    for (idx, b) in p.blocks.iter().enumerate() {
        let (k, h) = match &b.cutoff {
            Some(cut) => (level(cut.radius_k, cut.g_k), level(cut.radius_h, cut.g_h)),
            None => ("-".into(), "-".into()),
        };
        println!(
            "q_{}: J={} T={} k={k}, h={h}   # center {}",
            idx + 1,
            list(&b.kept),
            list(&b.buffer),
            b.center + 1
        );
    }
}

fn blocks(c: &Common) -> Result<(), Failure> {
    let cfg = c.resolve()?;
    let spec = cfg.model_spec()?;
    let n = single_n(&cfg);
    let bw = bandwidths(n, cfg.c_j, cfg.c_t, cfg.epsilon)?;
    let real = spec.simulate(cfg.seed, 0, n, cfg.padded)?;
    let p = partition::<f64, _>(&real.proximity()?, bw)?;
    println!(
        "# n={n} L={:.4} R={:.4} blocks={} tie_breaks={}",
        bw.l,
        bw.r,
        p.num_blocks(),
        p.tie_breaks
    );
    print_partition(&p);
    Ok(())
}

fn diagnose(c: &Common) -> Result<(), Failure> {
    let cfg = c.resolve()?;
    let spec = cfg.model_spec()?;
    let n = single_n(&cfg);
    let reps = cfg.reps;
    let mut report = DiagnoseReport::default();
    let grid = [n.max(2) / 2, n.max(2)];
    report.extend(dispersion_report(&spec, 1.0, &grid, reps.min(200), cfg.seed)?);
    if spec.stat == StatKind::Degree && (spec.kind == ModelKind::Distance || independence_radius(&spec).is_some()) {
        report.extend(summability_report(&spec, &grid, reps, cfg.seed)?);
        report.extend(covariance_report(&spec, n.min(64), reps.max(2), cfg.seed)?);
        report.extend(maximal_report(&spec, 0, n, reps.max(2), cfg.seed)?);
    } else {
        report
            .notes
            .push("no closed-form mixingale bound for this model/statistic; bound checks skipped".into());
    }
    print!("{}", report.to_table());
    if report.pass() {
        Ok(())
    } else {
        Err(Failure::Fail)
    }
}

fn print_summary(s: &ExperimentSummary) {
    for row in &s.sizes {
        let mut line = format!(
            "n={} mu_bar={:.6} mean|S/n|={:.4e} median|S/n|={:.4e} var(S/sqrt n)={:.4e}",
            row.n, row.mu_bar, row.mean_abs_avg, row.median_abs_avg, row.var_scaled_sum
        );
        if let Some(c) = &row.clt {
            line.push_str(&format!(
                " KS={:.4} coverage={:.4} mean_eta2={:.4e} eta_ratio={:.3} blocks={:.1} ties={:.2} degenerate={}",
                c.ks, c.coverage, c.mean_eta_hat_sq, c.eta_ratio, c.mean_blocks, c.mean_tie_breaks, c.degenerate
            ));
        }
        println!("{line}");
    }
    if let Some(r) = lln_median_ratio(s) {
        println!("median ratio last/first = {r:.4}");
    }
    for (name, ok) in &s.checks {
        println!("{}: {name}", if *ok { "PASS" } else { "FAIL" });
    }
    for (name, ok) in &s.trends {
        println!("trend {name}: {ok}");
    }
}

fn experiment(c: &Common, clt: bool) -> Result<(), Failure> {
    let cfg = c.resolve()?;
    let start = Instant::now();
    let summary = if clt { run_clt(&cfg)? } else { run_lln(&cfg)? };
    let elapsed = start.elapsed();
    let (csv, json) = emit(&summary, &cfg.out_dir).map_err(|e| Failure::Io(e.to_string()))?;
    print_summary(&summary);
    println!("wrote {} and {}", csv.display(), json.display());
    eprintln!("wall time {:.2}s", elapsed.as_secs_f64());
    if summary.pass {
        println!("overall: PASS");
        Ok(())
    } else {
        println!("overall: FAIL");
        Err(Failure::Fail)
    }
}
