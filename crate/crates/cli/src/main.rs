//! `faildiag`: simulate grasp campaigns, diagnose and correct failures, and
//! run the sensitivity and retraining experiments. All tables are CSV.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use faildiag_core::config::Config;
use faildiag_core::harness::{
    diagnose_failures, evaluate_model, failure_cases, output, retrained_model,
    run_correction_experiment, run_sensitivity_sweep, streams, Setup, SweepParam,
};
use faildiag_core::{
    build_corrected_dataset, CorrectedDataset, ExecutionModel, Experience, RngHandle,
};

#[derive(Parser)]
#[command(
    name = "faildiag",
    version,
    about = "Diagnose and correct failed parameterised grasps"
)]
struct Cli {
    /// Configuration file (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Also write plot tables (means with one-sigma bands) for sweeps.
    #[arg(long, global = true)]
    emit_plot_data: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the random grasp campaign and write campaign.csv.
    Simulate,
    /// Diagnose the campaign failures (or one of them) and write diagnoses.csv.
    Diagnose {
        #[command(flatten)]
        input: CampaignArg,
        /// Campaign row of a single failure to diagnose.
        #[arg(long)]
        failure: Option<usize>,
    },
    /// Correct every failure and write corrections.csv.
    Correct {
        #[command(flatten)]
        input: CampaignArg,
        /// Gamma shape, overrides the configuration.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Sensitivity sweep of one diagnosis parameter.
    Sweep {
        #[command(flatten)]
        input: CampaignArg,
        #[arg(long, value_enum)]
        param: SweepArg,
        /// Use the 100-point anchor and expansion grids.
        #[arg(long)]
        full_grid: bool,
        /// Add the wall-clock column (not reproducible).
        #[arg(long)]
        runtime: bool,
    },
    /// Retrain the success model on failed + corrected experiences and write model.toml.
    Retrain {
        #[command(flatten)]
        input: CampaignArg,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Evaluate a saved model, or run the retraining experiment over all configured shapes.
    Eval {
        #[command(flatten)]
        input: CampaignArg,
        /// Model written by `retrain`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Trials per evaluation, overrides the configuration.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(clap::Args)]
struct CampaignArg {
    /// Campaign CSV written by `simulate`; regenerated from the seed when omitted.
    #[arg(long)]
    campaign: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Anchor,
    R,
    Kmax,
}

impl SweepArg {
    fn param(self) -> SweepParam {
        match self {
            SweepArg::Anchor => SweepParam::AnchorRatio,
            SweepArg::R => SweepParam::ExpansionRatio,
            SweepArg::Kmax => SweepParam::SamplesPerRegion,
        }
    }

    fn stem(self) -> &'static str {
        match self {
            SweepArg::Anchor => "anchor",
            SweepArg::R => "r",
            SweepArg::Kmax => "kmax",
        }
    }
}

struct Run {
    setup: Setup,
    master: RngHandle,
    out: PathBuf,
}

impl Run {
    fn write(&self, name: &str, text: &str) -> Result<()> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn campaign(&self, arg: &CampaignArg) -> Result<Vec<Experience>> {
        match &arg.campaign {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(output::read_campaign_csv(&self.setup.space, &text)?)
            }
            None => Ok(self.setup.campaign(&self.master)?),
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<Config> {
    let mut config = match path {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let config = load_config(cli.config.as_deref(), cli.seed)?;
    let setup = Setup::new(config)?;
    let ctx = Run {
        master: setup.master_rng(setup.config.seed),
        setup,
        out: cli.out.clone(),
    };
    let mode = ctx.setup.mode();

    match &cli.command {
        Command::Simulate => {
            let campaign = ctx.campaign(&CampaignArg { campaign: None })?;
            let failures = campaign.iter().filter(|e| !e.is_success()).count();
            println!("{} executions, {failures} failures", campaign.len());
            ctx.write(
                "campaign.csv",
                &output::campaign_csv(&ctx.setup.space, &campaign)?,
            )?;
        }
        Command::Diagnose { input, failure } => {
            let campaign = ctx.campaign(input)?;
            let mut cases = failure_cases(&campaign)?;
            if let Some(id) = failure {
                cases.retain(|c| c.id == *id);
                if cases.is_empty() {
                    bail!("campaign row {id} is not a failure");
                }
            }
            let model = ctx.setup.reference_model(&campaign, &ctx.master)?;
            let cfg = ctx.setup.diagnosis_config(&campaign)?;
            let records = diagnose_failures(
                &model,
                mode,
                &cases,
                &cfg,
                &ctx.master.fork(streams::DIAGNOSIS),
            )?;
            let (tp, fp, truth) = records.iter().fold((0, 0, 0), |(tp, fp, t), r| {
                (
                    tp + r.score.true_positives,
                    fp + r.score.false_positives,
                    t + r.case.truth.len(),
                )
            });
            println!(
                "{} failures: {tp}/{truth} causes recovered, {fp} false positives",
                records.len()
            );
            ctx.write(
                "diagnoses.csv",
                &output::diagnoses_csv(&ctx.setup.space, &records)?,
            )?;
        }
        Command::Correct { input, kappa } => {
            let campaign = ctx.campaign(input)?;
            let (_, dataset, ids) = correct(&ctx, &campaign, *kappa)?;
            println!(
                "{} corrected, {} skipped",
                dataset.corrected.len(),
                dataset.skipped
            );
            ctx.write(
                "corrections.csv",
                &output::corrections_csv(&ctx.setup.space, &dataset, Some(&ids))?,
            )?;
        }
        Command::Sweep {
            input,
            param,
            full_grid,
            runtime,
        } => {
            let campaign = ctx.campaign(input)?;
            let cases = failure_cases(&campaign)?;
            let model = ctx.setup.reference_model(&campaign, &ctx.master)?;
            let spec = ctx.setup.sweep_spec(param.param(), &campaign, *full_grid)?;
            let report = run_sensitivity_sweep(
                &spec,
                &cases,
                &model,
                mode,
                &ctx.master.fork(streams::SWEEP),
            )?;
            println!(
                "{} values x {} repetitions over {} failures ({} ground-truth relations)",
                spec.values.len(),
                spec.repetitions,
                cases.len(),
                report.truth_total
            );
            ctx.write(
                &format!("sweep_{}.csv", param.stem()),
                &output::sweep_csv(&report, *runtime)?,
            )?;
            ctx.write(
                &format!("sweep_{}_raw.csv", param.stem()),
                &output::sweep_raw_csv(&report)?,
            )?;
            if cli.emit_plot_data {
                ctx.write(
                    &format!("plot_{}.csv", param.stem()),
                    &output::plot_csv(&report)?,
                )?;
            }
        }
        Command::Retrain { input, kappa } => {
            let campaign = ctx.campaign(input)?;
            let (reference, dataset, ids) = correct(&ctx, &campaign, *kappa)?;
            if dataset.corrected.is_empty() {
                bail!("no failure could be corrected; nothing to retrain on");
            }
            let model = retrained_model(&reference, &dataset)?;
            println!(
                "retrained on {} failed + {} corrected experiences",
                dataset.sources.len(),
                dataset.corrected.len()
            );
            ctx.write(
                "corrections.csv",
                &output::corrections_csv(&ctx.setup.space, &dataset, Some(&ids))?,
            )?;
            ctx.write("model.toml", &model.to_toml())?;
        }
        Command::Eval {
            input,
            model,
            trials,
        } => {
            let trials = trials.unwrap_or(ctx.setup.config.correction.trials);
            match model {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let model = ExecutionModel::from_toml(&text)?;
                    let report = evaluate_model(
                        &model,
                        ctx.setup.scene(),
                        mode,
                        trials,
                        ctx.setup.config.correction.max_sampling_iterations,
                        &ctx.master.fork(streams::EVALUATION),
                    )?;
                    println!("{}/{} successful grasps", report.successes(), trials);
                    ctx.write("eval.csv", &output::eval_csv(&model.space, &report)?)?;
                }
                None => {
                    let campaign = ctx.campaign(input)?;
                    let kappas = ctx.setup.config.correction.kappas.clone();
                    let reports = run_correction_experiment(
                        &ctx.setup,
                        &campaign,
                        &kappas,
                        trials,
                        &ctx.master,
                    )?;
                    for r in &reports {
                        match r.successes() {
                            Some(s) => println!(
                                "kappa {}: {} corrected, {s}/{trials} successful grasps",
                                r.kappa,
                                r.corrected()
                            ),
                            None => println!(
                                "kappa {}: no corrected experience, not evaluable",
                                r.kappa
                            ),
                        }
                        if let Some(e) = &r.eval {
                            ctx.write(
                                &format!("eval_kappa_{}.csv", r.kappa),
                                &output::eval_csv(&ctx.setup.space, e)?,
                            )?;
                        }
                    }
                    ctx.write("experiment.csv", &output::experiment_csv(&reports)?)?;
                }
            }
        }
    }
    Ok(())
}

/// Corrects the campaign's failures with the reference model; returns the
/// campaign row of every failure alongside.
fn correct(
    ctx: &Run,
    campaign: &[Experience],
    kappa: Option<f64>,
) -> Result<(ExecutionModel, CorrectedDataset, Vec<usize>)> {
    let reference = ctx.setup.reference_model(campaign, &ctx.master)?;
    let cfg = ctx
        .setup
        .correction_config(campaign, kappa.unwrap_or(ctx.setup.config.correction.kappa))?;
    let (ids, failures): (Vec<usize>, Vec<Experience>) = campaign
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_success())
        .map(|(i, e)| (i, e.clone()))
        .unzip();
    let dataset = build_corrected_dataset(
        &reference,
        ctx.setup.mode(),
        &failures,
        &cfg,
        &mut ctx.master.fork(streams::CORRECTION),
    )?;
    Ok((reference, dataset, ids))
}
