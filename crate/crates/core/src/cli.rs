//! Command-line interface: simulation, fitting, diagnostics, recovery
//! scoring, predictive checking, and model ranking.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for configuration or
//! data errors, 3 for a numerical abort inside the sampler.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::eval;
use crate::io;
use crate::rng::RngStream;
use crate::runner::run_chains;
use crate::sampler::ChainOutput;
use crate::sim;

#[derive(Parser)]
#[command(
    name = "rlcm",
    version,
    about = "Exploratory restricted latent class models for ordinal responses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a generating truth and simulate replicate datasets from it
    Simulate(SimulateArgs),
    /// Fit the model to a response matrix by Markov chain Monte Carlo
    Fit(FitArgs),
    /// Convergence diagnostics over every recorded parameter of a chain
    Geweke(GewekeArgs),
    /// Score fitted chains against the truth that generated their data
    Recover(RecoverArgs),
    /// Posterior predictive check of one fitted chain
    Ppc(PpcArgs),
    /// Rank fitted candidates by their predictive comparison scores
    Select(SelectArgs),
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit(args),
        Command::Geweke(args) => geweke(args),
        Command::Recover(args) => recover(args),
        Command::Ppc(args) => ppc(args),
        Command::Select(args) => select(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Respondents per replicate
    #[arg(long)]
    n: usize,
    /// Items (each gets three ordinal response levels)
    #[arg(long)]
    j: usize,
    /// Attributes
    #[arg(long)]
    k: usize,
    /// Levels per attribute
    #[arg(long)]
    l: usize,
    /// Equicorrelation of the latent attribute scores
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Highest interaction order in the design expansion
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Independent datasets drawn from the one truth
    #[arg(long, default_value_t = 1)]
    replications: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

/// What `simulate` wrote and how to regenerate it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimManifest {
    pub schema_version: u32,
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub rho: f64,
    pub order: usize,
    pub replications: usize,
    pub seed: u64,
}

fn rep_dir_name(rep: usize) -> String {
    format!("rep_{rep:02}")
}

pub fn chain_dir_name(chain: usize) -> String {
    format!("chain_{chain:02}")
}

fn simulate(args: SimulateArgs) -> Result<()> {
    if args.replications == 0 {
        return Err(Error::Usage("at least one replication is required".into()));
    }
    let sc = sim::Scenario::new(args.n, args.j, args.k, args.l, args.rho);
    let mut truth_rng = RngStream::new(args.seed, 0);
    let truth = sim::gen_truth(&sc, args.order, &mut truth_rng)?;
    std::fs::create_dir_all(&args.out)?;
    io::write_truth_json(args.out.join("truth.json").as_path(), &truth)?;
    let manifest = SimManifest {
        schema_version: io::SCHEMA_VERSION,
        n: args.n,
        j: args.j,
        k: args.k,
        l: args.l,
        rho: args.rho,
        order: args.order,
        replications: args.replications,
        seed: args.seed,
    };
    io::write_json(args.out.join("manifest.json").as_path(), &manifest)?;
    for rep in 0..args.replications {
        let mut rng = RngStream::new(args.seed, 1 + rep as u64);
        let data = sim::gen_dataset(&sc, args.order, &truth, &mut rng)?;
        let dir = args.out.join(rep_dir_name(rep));
        std::fs::create_dir_all(&dir)?;
        io::write_level_csv(dir.join("y.csv").as_path(), &data.y, &io::item_labels(args.j))?;
        io::write_numeric_csv(
            dir.join("x.csv").as_path(),
            &data.x,
            &io::covariate_labels(sim::Scenario::D),
        )?;
        io::write_level_csv(
            dir.join("alpha.csv").as_path(),
            &data.alpha,
            &io::attribute_labels(args.k),
        )?;
        println!("simulate: wrote {}", dir.display());
    }
    println!(
        "simulate: truth and {} replicate(s) under {}",
        args.replications,
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct FitArgs {
    /// Response CSV: header of item names, one row per respondent
    #[arg(long)]
    data: PathBuf,
    /// Covariate CSV including the intercept column
    #[arg(long)]
    covariates: PathBuf,
    /// Output directory; each chain becomes a chain_NN subdirectory
    #[arg(long)]
    out: PathBuf,
    /// JSON run configuration; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Attributes (required unless --config provides it)
    #[arg(long)]
    k: Option<usize>,
    /// Levels per attribute (required unless --config provides it)
    #[arg(long)]
    l: Option<usize>,
    /// Highest interaction order in the design expansion
    #[arg(long)]
    order: Option<usize>,
    /// Total iterations including burn-in
    #[arg(long)]
    chain_length: Option<usize>,
    /// Burn-in iterations
    #[arg(long)]
    burnin: Option<usize>,
    /// Independent chains, one substream each
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel chains (default: all cores)
    #[arg(long, env = "RLCM_THREADS")]
    threads: Option<usize>,
    /// Check sampler invariants every iteration (slow; for validation)
    #[arg(long)]
    check_invariants: bool,
    /// Record the log joint density of each kept draw
    #[arg(long)]
    record_log_joint: bool,
}

const DEFAULT_CHAIN_LENGTH: usize = 6000;
const DEFAULT_BURNIN: usize = 2000;

/// Merges the optional config file, the command line, and the data shape
/// into one validated configuration. Respondent count always comes from
/// the data; level counts come from the file when given there (they may
/// exceed the observed maxima, never undercut them) and are inferred
/// otherwise.
fn resolve_fit_config(
    args: &FitArgs,
    y: &DMatrix<u8>,
    x: &DMatrix<f64>,
) -> Result<ModelConfig> {
    let inferred = io::infer_levels(y);
    let mut cfg = match &args.config {
        Some(path) => {
            let mut model = io::read_run_config(path)?.model;
            model.n = y.nrows();
            if model.m.is_empty() {
                model.m = inferred.clone();
            } else {
                if model.m.len() != y.ncols() {
                    return Err(Error::Config(format!(
                        "config lists {} items, data has {}",
                        model.m.len(),
                        y.ncols()
                    )));
                }
                for (j, (&have, &need)) in model.m.iter().zip(&inferred).enumerate() {
                    if have < need {
                        return Err(Error::Data {
                            message: format!(
                                "item {} observes level {} but the config allows only {have}",
                                j + 1,
                                need - 1
                            ),
                            line: None,
                        });
                    }
                }
            }
            if model.d != x.ncols() {
                return Err(Error::Config(format!(
                    "config expects {} covariate columns, data has {}",
                    model.d,
                    x.ncols()
                )));
            }
            model
        }
        None => {
            let (Some(k), Some(l)) = (args.k, args.l) else {
                return Err(Error::Usage(
                    "--k and --l are required when no --config file is given".into(),
                ));
            };
            let mut model = ModelConfig::new(y.nrows(), inferred, k, l, x.ncols(), 2.min(k));
            model.chain_length = DEFAULT_CHAIN_LENGTH;
            model.burnin = DEFAULT_BURNIN;
            model
        }
    };
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(l) = args.l {
        cfg.l = l;
    }
    if let Some(order) = args.order {
        cfg.order = order;
    }
    if let Some(len) = args.chain_length {
        cfg.chain_length = len;
    }
    if let Some(burnin) = args.burnin {
        cfg.burnin = burnin;
    }
    cfg.check_invariants |= args.check_invariants;
    cfg.record_log_joint |= args.record_log_joint;
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        // A second initialization in the same process keeps the first
        // pool; that is fine for our purposes.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

/// What `fit` wrote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub chains: usize,
    pub data: String,
    pub covariates: String,
}

fn fit(args: FitArgs) -> Result<()> {
    configure_threads(args.threads);
    let (y, item_names) = io::read_level_csv(&args.data)?;
    let (x, covariate_names) = io::read_numeric_csv(&args.covariates)?;
    if x.nrows() != y.nrows() {
        return Err(Error::Config(format!(
            "data has {} rows, covariates have {}",
            y.nrows(),
            x.nrows()
        )));
    }
    let cfg = resolve_fit_config(&args, &y, &x)?;
    let fits = run_chains(
        &cfg,
        &y,
        &x,
        Some(&item_names),
        Some(&covariate_names),
        args.seed,
        args.chains,
    )?;
    std::fs::create_dir_all(&args.out)?;
    let manifest = FitManifest {
        schema_version: io::SCHEMA_VERSION,
        seed: args.seed,
        chains: args.chains,
        data: args.data.display().to_string(),
        covariates: args.covariates.display().to_string(),
    };
    io::write_json(args.out.join("fit.json").as_path(), &manifest)?;
    for (c, outcome) in fits.iter().enumerate() {
        let dir = args.out.join(chain_dir_name(c));
        io::write_chain_dir(&dir, &outcome.output, &outcome.init_warnings)?;
        for w in &outcome.init_warnings {
            println!("fit: chain {c}: init warning: {w}");
        }
        let acc: Vec<f64> = outcome
            .output
            .kappa_acceptance
            .iter()
            .copied()
            .filter(|a| a.is_finite())
            .collect();
        let acc_line = if acc.is_empty() {
            "no tracked cutpoint moves".to_string()
        } else {
            let lo = acc.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = acc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            format!("cutpoint acceptance {lo:.2}..{hi:.2}")
        };
        println!(
            "fit: chain {c}: {} draws recorded, {acc_line}, wrote {}",
            outcome.output.draws(),
            dir.display()
        );
    }
    Ok(())
}

#[derive(Args)]
struct GewekeArgs {
    /// Fitted chain directory (one chain_NN directory)
    #[arg(long)]
    chain: PathBuf,
    /// CSV report destination
    #[arg(long)]
    out: Option<PathBuf>,
}

fn geweke(args: GewekeArgs) -> Result<()> {
    let (out, _) = io::read_chain_dir(&args.chain)?;
    let mut names = Vec::new();
    let mut results = Vec::new();
    let blocks = [
        &out.beta, &out.delta, &out.kappa, &out.lambda, &out.r, &out.gamma, &out.omega,
    ];
    for block in blocks {
        for (c, name) in block.names().iter().enumerate() {
            names.push(name.clone());
            results.push(eval::geweke_z(&block.col_vec(c)));
        }
    }
    if !out.log_joint.is_empty() {
        names.push("log_joint".to_string());
        results.push(eval::geweke_z(&out.log_joint));
    }
    let degenerate = results.iter().filter(|r| r.degenerate).count();
    let flagged: Vec<(f64, &String)> = results
        .iter()
        .zip(&names)
        .filter(|(r, _)| !r.degenerate && r.z.abs() > 1.96)
        .map(|(r, n)| (r.z, n))
        .collect();
    println!(
        "geweke: {} parameters, {} flagged at |z| > 1.96, {} degenerate",
        names.len(),
        flagged.len(),
        degenerate
    );
    let mut worst: Vec<(f64, &String)> = results
        .iter()
        .zip(&names)
        .filter(|(r, _)| !r.degenerate)
        .map(|(r, n)| (r.z, n))
        .collect();
    worst.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
    for (z, name) in worst.iter().take(5) {
        println!("geweke: {name}: z = {z:.3}");
    }
    if let Some(path) = &args.out {
        io::write_geweke_csv(path, &names, &results)?;
        println!("geweke: wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct RecoverArgs {
    /// Generating parameters (truth.json from `simulate`)
    #[arg(long)]
    truth: PathBuf,
    /// Fitted chain directory; repeat once per replicate
    #[arg(long = "fit", required = true)]
    fits: Vec<PathBuf>,
    /// True profile CSV for the matching replicate; repeat alongside --fit
    #[arg(long = "alpha", required = true)]
    alphas: Vec<PathBuf>,
    /// JSON report destination
    #[arg(long)]
    out: Option<PathBuf>,
}

fn recover(args: RecoverArgs) -> Result<()> {
    if args.fits.len() != args.alphas.len() {
        return Err(Error::Usage(format!(
            "{} --fit directories but {} --alpha files; they pair up one to one",
            args.fits.len(),
            args.alphas.len()
        )));
    }
    let truth = io::read_truth_json(&args.truth)?;
    let mut outputs: Vec<ChainOutput> = Vec::with_capacity(args.fits.len());
    let mut alphas: Vec<DMatrix<u8>> = Vec::with_capacity(args.alphas.len());
    for (fit_dir, alpha_path) in args.fits.iter().zip(&args.alphas) {
        outputs.push(io::read_chain_dir(fit_dir)?.0);
        alphas.push(io::read_level_csv(alpha_path)?.0);
    }
    let pairs: Vec<(&ChainOutput, &DMatrix<u8>)> =
        outputs.iter().zip(alphas.iter()).collect();
    let report = eval::recovery_report(&truth, &pairs)?;
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    println!(
        "recover: {} replicate(s), modal profile agreement {:.3}",
        report.reps, report.alignment_agreement
    );
    println!(
        "recover: mae eta {:.4}, beta {:.4}, lambda {:.4}, r {}, gamma {}",
        report.mae_eta,
        report.mae_beta,
        report.mae_lambda,
        fmt(report.mae_r),
        fmt(report.mae_gamma)
    );
    println!(
        "recover: inclusion accuracy {} (active {}, null {})",
        fmt(report.delta_accuracy),
        fmt(report.delta_accuracy_active),
        fmt(report.delta_accuracy_null)
    );
    if let Some(path) = &args.out {
        io::write_json(path, &report)?;
        println!("recover: wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct PpcArgs {
    /// Fitted chain directory
    #[arg(long)]
    fit: PathBuf,
    /// Observed response CSV the chain was fitted to
    #[arg(long)]
    data: PathBuf,
    /// Covariate CSV for the predictive replicates
    #[arg(long)]
    covariates: PathBuf,
    /// Replicate datasets to draw from the recorded chain
    #[arg(long, default_value_t = 200)]
    draws: usize,
    /// Replicate pairs for the reference discrepancy sample
    #[arg(long, default_value_t = 2500)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report destination
    #[arg(long)]
    out: Option<PathBuf>,
}

fn ppc(args: PpcArgs) -> Result<()> {
    let (chain, _) = io::read_chain_dir(&args.fit)?;
    let (y, _) = io::read_level_csv(&args.data)?;
    let (x, _) = io::read_numeric_csv(&args.covariates)?;
    let cfg = &chain.config;
    if y.nrows() != cfg.n || y.ncols() != cfg.j() {
        return Err(Error::Config(format!(
            "data is {}x{}, the fit used {}x{}",
            y.nrows(),
            y.ncols(),
            cfg.n,
            cfg.j()
        )));
    }
    if x.nrows() != cfg.n {
        return Err(Error::Config(format!(
            "covariates have {} rows, the fit used {}",
            x.nrows(),
            cfg.n
        )));
    }
    for j in 0..cfg.j() {
        for i in 0..cfg.n {
            if y[(i, j)] as usize >= cfg.m[j] {
                return Err(Error::data(format!(
                    "response ({i}, {j}) = {} exceeds the fitted level count {}",
                    y[(i, j)],
                    cfg.m[j]
                )));
            }
        }
    }
    let observed = eval::pairwise_count_statistic(&y, &cfg.m);
    let mut rng = RngStream::new(args.seed, 0);
    let (reps, warnings) = eval::posterior_predictive_draws(&chain, &x, args.draws, &mut rng)?;
    for w in &warnings {
        println!("ppc: warning: {w}");
    }
    let rep_stats: Vec<Vec<f64>> = reps
        .iter()
        .map(|r| eval::pairwise_count_statistic(r, &cfg.m))
        .collect();
    let (obs_rep, rep_rep) = eval::ppc_distance_samples(&observed, &rep_stats, args.pairs, &mut rng)?;
    let mw = eval::mann_whitney_u(&obs_rep, &rep_rep);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let report = io::PpcReport {
        schema_version: io::SCHEMA_VERSION,
        replicates: reps.len(),
        pairs: args.pairs,
        u: mw.u,
        z: mw.z,
        mean_observed_discrepancy: mean(&obs_rep),
        mean_replicate_discrepancy: mean(&rep_rep),
        warnings,
    };
    println!(
        "ppc: {} replicates, U = {:.1}, z = {:.3} (observed vs replicate discrepancy {:.1} vs {:.1})",
        report.replicates,
        report.u,
        report.z,
        report.mean_observed_discrepancy,
        report.mean_replicate_discrepancy
    );
    if let Some(path) = &args.out {
        io::write_json(path, &report)?;
        println!("ppc: wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct SelectArgs {
    /// Fitted chain directory; repeat once per candidate
    #[arg(long = "fit", required = true)]
    fits: Vec<PathBuf>,
    /// Predictive report (from `ppc --out`) for the matching candidate
    #[arg(long = "ppc", required = true)]
    ppcs: Vec<PathBuf>,
    /// CSV table destination
    #[arg(long)]
    out: Option<PathBuf>,
}

fn candidate_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn select(args: SelectArgs) -> Result<()> {
    if args.fits.len() != args.ppcs.len() {
        return Err(Error::Usage(format!(
            "{} --fit directories but {} --ppc reports; they pair up one to one",
            args.fits.len(),
            args.ppcs.len()
        )));
    }
    let mut rows = Vec::with_capacity(args.fits.len());
    for (fit_dir, ppc_path) in args.fits.iter().zip(&args.ppcs) {
        let (chain, _) = io::read_chain_dir(fit_dir)?;
        let report: io::PpcReport = io::read_json(ppc_path)?;
        let mw = eval::MannWhitney {
            u: report.u,
            z: report.z,
        };
        rows.push(eval::comparison_row(candidate_label(fit_dir), &chain, mw));
    }
    let ranked = eval::select_model(rows);
    println!(
        "{:<20} {:>2} {:>2} {:>7} {:>12} {:>11} {:>10} {:>8} {:>9}",
        "candidate", "k", "l", "classes", "measurement", "structural", "u", "z", "sparsity"
    );
    for row in &ranked {
        println!(
            "{:<20} {:>2} {:>2} {:>7} {:>12} {:>11} {:>10.1} {:>8.3} {:>9.3}",
            row.label,
            row.k,
            row.l,
            row.classes,
            row.measurement_params,
            row.structural_params,
            row.u,
            row.z,
            row.beta_sparsity
        );
    }
    println!("select: best candidate by predictive score: {}", ranked[0].label);
    if let Some(path) = &args.out {
        io::write_comparison_csv(path, &ranked)?;
        println!("select: wrote {}", path.display());
    }
    Ok(())
}
