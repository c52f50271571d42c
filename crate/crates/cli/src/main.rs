//! `elite`: command-line front end for the elite-customer pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use elite_core::behavior::{load_purchases, load_returns, DEFAULT_GAP_DAYS, DEFAULT_WINDOW_DAYS};
use elite_core::classifier::{
    count_vacuously_compliant, load_decisions, write_decisions, Boundary, DEFAULT_TAU,
};
use elite_core::evaluation::{
    build_features, format_metric, load_ground_truth, load_serves, outcomes_from_decisions,
    predict, train_logistic, write_report_csv, LabeledOutcome, MethodReport, TrainConfig,
    FEATURE_NAMES,
};
use elite_core::game::{find_pure_nash, return_game, PlayerId};
use elite_core::repeated::{
    analytic_payoff, finite_horizon_payoff, game_threshold, grim_trigger, grim_trigger_threshold,
    simulate_payoff, DEFAULT_MAX_K,
};
use elite_core::synth::{generate, PopulationSpec};
use elite_core::{
    classify_population, deviate_at, forgiving_strategy, ActionProfile, ClassifierConfig, Error,
    EstimatorConfig, FeatureVector, LogisticModel, Reason, StrategicGame, StrategyAutomaton,
};

#[derive(Parser)]
#[command(
    name = "elite",
    version,
    about = "Game-theoretic elite-customer identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the pure-strategy Nash equilibria of a game.
    Equilibria {
        #[command(flatten)]
        game: GameArgs,
    },
    /// Grim-trigger continuation threshold, from a game or from scalars.
    Threshold(ThresholdArgs),
    /// Generate a synthetic population from a spec file.
    Synth {
        /// Population spec file.
        #[arg(long)]
        spec: PathBuf,
        /// Seed for all random draws.
        #[arg(long)]
        seed: u64,
        /// Output directory for purchases.csv, returns.csv, serves.csv and ground_truth.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate each customer's repetition probability.
    Estimate {
        /// purchases.csv
        #[arg(long)]
        purchases: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        /// Write `customer_id,delta_hat` rows here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify customers as elite or not.
    Classify(ClassifyArgs),
    /// Train the logistic-regression baseline.
    TrainBaseline(TrainArgs),
    /// Score decisions (and optionally the baseline) against ground truth.
    Evaluate(EvaluateArgs),
    /// Play two strategies against each other in the repeated game.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GameArgs {
    /// Game spec file; the built-in return-processing game when omitted.
    #[arg(long)]
    game: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Cooperative profile as comma-separated action names (default: first action of each player).
    #[arg(long)]
    coop: Option<String>,
    /// Punishment profile as comma-separated action names (default: the unique pure equilibrium).
    #[arg(long)]
    punish: Option<String>,
}

#[derive(Args)]
struct WindowArgs {
    /// Reference date (YYYY-MM-DD) closing the estimation window.
    #[arg(long)]
    reference_date: NaiveDate,
    /// Window length in days.
    #[arg(long, default_value_t = DEFAULT_WINDOW_DAYS)]
    window_days: u32,
    /// Largest purchase gap, in days, counted as a repetition.
    #[arg(long, default_value_t = DEFAULT_GAP_DAYS)]
    gap_days: u32,
}

impl WindowArgs {
    fn config(&self) -> Result<EstimatorConfig> {
        Ok(EstimatorConfig::new(
            self.reference_date,
            self.window_days,
            self.gap_days,
        )?)
    }
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    profiles: ProfileArgs,
    /// Cooperative stage payoff.
    #[arg(long, requires_all = ["d", "p"], conflicts_with = "game")]
    c: Option<f64>,
    /// Best deviation payoff against cooperation.
    #[arg(long, requires_all = ["c", "p"])]
    d: Option<f64>,
    /// Punishment stage payoff.
    #[arg(long, requires_all = ["c", "d"])]
    p: Option<f64>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// purchases.csv
    #[arg(long)]
    purchases: PathBuf,
    /// returns.csv
    #[arg(long)]
    returns: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
    /// Threshold on the repetition estimate.
    #[arg(long, conflicts_with = "game")]
    tau: Option<f64>,
    /// Take the threshold from this game's grim-trigger threshold.
    #[arg(long)]
    game: Option<PathBuf>,
    #[command(flatten)]
    profiles: ProfileArgs,
    /// `strict` (estimate equal to tau passes) or `inclusive` (it fails).
    #[arg(long, default_value = "strict")]
    boundary: Boundary,
    /// Write decisions.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FeatureArgs {
    /// purchases.csv
    #[arg(long)]
    purchases: Option<PathBuf>,
    /// returns.csv
    #[arg(long)]
    returns: Option<PathBuf>,
    /// serves.csv with per-customer nserves counts.
    #[arg(long)]
    serves: Option<PathBuf>,
    /// Reference date (YYYY-MM-DD) closing the estimation window.
    #[arg(long)]
    reference_date: Option<NaiveDate>,
    /// Window length in days.
    #[arg(long, default_value_t = DEFAULT_WINDOW_DAYS)]
    window_days: u32,
    /// Largest purchase gap, in days, counted as a repetition.
    #[arg(long, default_value_t = DEFAULT_GAP_DAYS)]
    gap_days: u32,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    features: FeatureArgs,
    /// ground_truth.csv providing the labels.
    #[arg(long)]
    ground_truth: PathBuf,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    /// Write the model as JSON here.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// decisions.csv from `classify`.
    #[arg(long)]
    decisions: PathBuf,
    /// ground_truth.csv
    #[arg(long)]
    ground_truth: PathBuf,
    /// Baseline model from `train-baseline`; needs the feature inputs.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    features: FeatureArgs,
    /// Probability threshold for the baseline.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Write the report CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    profiles: ProfileArgs,
    /// First player's strategy: grim, forgiving, always:<action> or deviate:<k>:<action>.
    #[arg(long, default_value = "grim")]
    first: String,
    /// Second player's strategy, same forms as --first.
    #[arg(long, default_value = "grim")]
    second: String,
    /// Continuation probability.
    #[arg(long)]
    delta: f64,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Number of stages; required when delta = 1.
    #[arg(long)]
    horizon: Option<usize>,
}

fn load_game(args: &GameArgs) -> Result<StrategicGame> {
    match &args.game {
        None => Ok(return_game()),
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            StrategicGame::parse(&text).with_context(|| format!("in {}", path.display()))
        }
    }
}

fn parse_profile(game: &StrategicGame, text: &str) -> Result<ActionProfile> {
    let names: Vec<&str> = text.split(',').map(str::trim).collect();
    Ok(game.profile_from_names(&names)?)
}

fn profiles(game: &StrategicGame, args: &ProfileArgs) -> Result<(ActionProfile, ActionProfile)> {
    let coop = match &args.coop {
        Some(t) => parse_profile(game, t)?,
        None => ActionProfile::new(vec![0; game.num_players()]),
    };
    let punish = match &args.punish {
        Some(t) => parse_profile(game, t)?,
        None => {
            let eq = find_pure_nash(game);
            let [only] = eq.as_slice() else {
                bail!(
                    "game has {} pure equilibria; pass --punish to choose the punishment profile",
                    eq.len()
                );
            };
            only.clone()
        }
    };
    Ok((coop, punish))
}

fn write_out(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_equilibria(args: &GameArgs) -> Result<()> {
    let game = load_game(args)?;
    let eq = find_pure_nash(&game);
    if eq.is_empty() {
        println!("pure equilibria: none");
        return Ok(());
    }
    println!("pure equilibria: {}", eq.len());
    for profile in &eq {
        let payoffs: Vec<String> = game
            .player_names()
            .iter()
            .zip(game.payoff(profile))
            .map(|(name, u)| format!("{name}={u}"))
            .collect();
        println!(
            "{} payoffs {}",
            game.describe_profile(profile),
            payoffs.join(", ")
        );
    }
    Ok(())
}

fn cmd_threshold(args: &ThresholdArgs) -> Result<()> {
    if let (Some(c), Some(d), Some(p)) = (args.c, args.d, args.p) {
        let t = grim_trigger_threshold(c, d, p)?;
        println!("c = {c}, d = {d}, p = {p}");
        println!("delta* = {t}");
        return Ok(());
    }
    let game = load_game(&args.game)?;
    let (coop, punish) = profiles(&game, &args.profiles)?;
    let report = game_threshold(&game, &coop, &punish)?;
    println!(
        "cooperate {} punish {}",
        game.describe_profile(&coop),
        game.describe_profile(&punish)
    );
    for (i, (params, t)) in report.params.iter().zip(&report.per_player).enumerate() {
        let t = t.map_or("none (no temptation)".to_owned(), |t| t.to_string());
        println!(
            "{}: c = {}, d = {}, p = {}, threshold {t}",
            game.player_name(PlayerId(i)),
            params.coop,
            params.temptation,
            params.punishment
        );
    }
    println!("delta* = {}", report.delta_star);
    Ok(())
}

fn cmd_synth(spec: &Path, seed: u64, out: &Path) -> Result<()> {
    let text = fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
    let spec =
        PopulationSpec::parse(&text, seed).with_context(|| format!("in {}", spec.display()))?;
    let population = generate(&spec)?;
    let files = population.to_files();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_out(&out.join("purchases.csv"), &files.purchases)?;
    write_out(&out.join("returns.csv"), &files.returns)?;
    write_out(&out.join("serves.csv"), &files.serves)?;
    write_out(&out.join("ground_truth.csv"), &files.ground_truth)?;
    for (s, seg) in spec.segments.iter().enumerate() {
        let members = population.customers.iter().filter(|c| c.segment == s);
        let (purchases, returns) = members.fold((0, 0), |(p, r), c| {
            (p + c.purchases.len(), r + c.returns.len())
        });
        println!(
            "{}: {} customers, {purchases} purchases, {returns} returns",
            seg.name, seg.count
        );
    }
    println!("wrote 4 files to {}", out.display());
    Ok(())
}

fn cmd_estimate(purchases: &Path, window: &WindowArgs, out: Option<&Path>) -> Result<()> {
    let config = window.config()?;
    let histories = load_purchases(purchases)?;
    let estimates: Vec<(String, f64)> = histories
        .iter()
        .map(|h| {
            (
                h.customer_id.clone(),
                elite_core::estimate_delta(h, &config),
            )
        })
        .collect();
    let mean = if estimates.is_empty() {
        0.0
    } else {
        estimates.iter().map(|(_, d)| d).sum::<f64>() / estimates.len() as f64
    };
    println!("customers: {}", estimates.len());
    println!("mean delta_hat: {mean:.6}");
    if let Some(path) = out {
        let mut csv = String::from("customer_id,delta_hat\n");
        for (id, d) in &estimates {
            csv += &format!("{id},{d:.6}\n");
        }
        write_out(path, &csv)?;
    }
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> Result<()> {
    let estimator = args.window.config()?;
    let config = match &args.game {
        Some(path) => {
            let game = load_game(&GameArgs {
                game: Some(path.clone()),
            })?;
            let (coop, punish) = profiles(&game, &args.profiles)?;
            ClassifierConfig::from_game(&game, &coop, &punish, estimator)?
        }
        None => ClassifierConfig::new(args.tau.unwrap_or(DEFAULT_TAU), estimator)?,
    }
    .with_boundary(args.boundary);
    let purchases = load_purchases(&args.purchases)?;
    let returns = load_returns(&args.returns)?;
    let decisions = classify_population(&purchases, &returns, &config);
    for d in &decisions {
        d.check(config.tau)?;
    }

    let mut counts: BTreeMap<Reason, usize> = BTreeMap::new();
    for d in &decisions {
        *counts.entry(d.reason).or_default() += 1;
    }
    println!("tau: {}", config.tau);
    println!("customers: {}", decisions.len());
    for reason in [Reason::Elite, Reason::LowDelta, Reason::ComplianceFailure] {
        println!("{reason}: {}", counts.get(&reason).copied().unwrap_or(0));
    }
    println!(
        "vacuously compliant (no returns in window): {}",
        count_vacuously_compliant(&decisions, &returns, &estimator)
    );
    if let Some(path) = &args.out {
        write_out(path, &write_decisions(&decisions))?;
    }
    Ok(())
}

/// Feature vectors for `ids`; customers absent from every input get the
/// all-default vector.
fn features_for(
    args: &FeatureArgs,
    ids: impl Iterator<Item = String>,
) -> Result<Vec<FeatureVector>> {
    let (Some(purchases), Some(returns), Some(reference_date)) =
        (&args.purchases, &args.returns, args.reference_date)
    else {
        bail!("--purchases, --returns and --reference-date are required for baseline features");
    };
    let config = EstimatorConfig::new(reference_date, args.window_days, args.gap_days)?;
    let serves = match &args.serves {
        Some(path) => load_serves(path)?,
        None => BTreeMap::new(),
    };
    let table = build_features(
        &load_purchases(purchases)?,
        &load_returns(returns)?,
        &config,
        &serves,
    );
    Ok(ids
        .map(|id| {
            table.get(&id).copied().unwrap_or(FeatureVector {
                q2_failures: 0,
                q1_successes: 0,
                nserves: 0,
                delta_hat: 0.0,
                last_status: true,
            })
        })
        .collect())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let truth = load_ground_truth(&args.ground_truth)?;
    let features = features_for(&args.features, truth.keys().cloned())?;
    let labels: Vec<bool> = truth.values().copied().collect();
    let config = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.learning_rate,
    };
    let model = train_logistic(&features, &labels, &config)?;
    println!("customers: {}", labels.len());
    println!(
        "loss: {:.6} -> {:.6}",
        model.loss_history[0],
        model.final_loss()
    );
    for (name, w) in FEATURE_NAMES.iter().zip(model.weights) {
        println!("weight {name}: {w:.6}");
    }
    println!("bias: {:.6}", model.bias);
    let json = serde_json::to_string_pretty(&model)?;
    write_out(&args.out, &(json + "\n"))
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let truth = load_ground_truth(&args.ground_truth)?;
    let decisions = load_decisions(&args.decisions)?;
    let mut reports = vec![MethodReport {
        method: "game".into(),
        matrix: elite_core::confusion(&outcomes_from_decisions(&decisions, &truth)),
    }];
    let decided: BTreeSet<&str> = decisions.iter().map(|d| d.customer_id.as_str()).collect();
    let undecided = truth
        .keys()
        .filter(|id| !decided.contains(id.as_str()))
        .count();
    if undecided > 0 {
        println!("customers without a decision (scored not elite): {undecided}");
    }
    if let Some(path) = &args.model {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let model: LogisticModel = serde_json::from_str(&text)
            .with_context(|| format!("parsing model {}", path.display()))?;
        let features = features_for(&args.features, truth.keys().cloned())?;
        let outcomes: Vec<LabeledOutcome> = truth
            .iter()
            .zip(&features)
            .map(|((id, &complied), fv)| LabeledOutcome {
                customer_id: id.clone(),
                predicted_elite: predict(&model, fv, args.threshold),
                complied,
            })
            .collect();
        reports.push(MethodReport {
            method: "logistic".into(),
            matrix: elite_core::confusion(&outcomes),
        });
    }
    for r in &reports {
        let m = &r.matrix;
        println!(
            "{}: tp={} fp={} fn={} tn={} precision={} recall={}",
            r.method,
            m.true_pos,
            m.false_pos,
            m.false_neg,
            m.true_neg,
            format_metric(m.precision()),
            format_metric(m.recall())
        );
    }
    if let Some(path) = &args.out {
        write_out(path, &write_report_csv(&reports))?;
    }
    Ok(())
}

fn strategy(
    game: &StrategicGame,
    spec: &str,
    player: usize,
    grim: &StrategyAutomaton,
    forgiving: &StrategyAutomaton,
) -> Result<StrategyAutomaton> {
    let action = |name: &str| {
        game.action_index(PlayerId(player), name).with_context(|| {
            format!(
                "unknown action `{name}` for {}",
                game.player_name(PlayerId(player))
            )
        })
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["grim"] => Ok(grim.clone()),
        ["forgiving"] => Ok(forgiving.clone()),
        ["always", a] => Ok(StrategyAutomaton::always(game, PlayerId(player), action(a)?)?),
        ["deviate", k, a] => {
            let k: usize = k.parse().with_context(|| format!("invalid deviation stage `{k}`"))?;
            Ok(deviate_at(k, grim, action(a)?)?)
        }
        _ => bail!("unknown strategy `{spec}` (expected grim, forgiving, always:<action> or deviate:<k>:<action>)"),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let game = load_game(&args.game)?;
    let (coop, punish) = profiles(&game, &args.profiles)?;
    let (grim_a, grim_b) = grim_trigger(&game, &coop, &punish)?;
    let (forg_a, forg_b) = forgiving_strategy(&game, &coop, &punish)?;
    let a = strategy(&game, &args.first, 0, &grim_a, &forg_a)?;
    let b = strategy(&game, &args.second, 1, &grim_b, &forg_b)?;
    let names = game.player_names();

    if args.delta == 1.0 {
        let Some(horizon) = args.horizon else {
            bail!("delta = 1 has no finite discounted payoff; pass --horizon");
        };
        let v = finite_horizon_payoff(&game, &a, &b, 1.0, horizon)?;
        println!(
            "horizon {horizon} total: {}={}, {}={}",
            names[0], v.per_player[0], names[1], v.per_player[1]
        );
        return Ok(());
    }
    let exact = analytic_payoff(&game, &a, &b, args.delta)?;
    let est = simulate_payoff(&game, &a, &b, args.delta, args.trials, args.seed)?;
    println!("delta = {}", args.delta);
    for (p, name) in names.iter().enumerate() {
        println!(
            "{name}: analytic {:.6}, monte carlo {:.6} (stderr {:.6}, {} trials)",
            exact.per_player[p], est.mean.per_player[p], est.stderr[p], est.trials
        );
    }
    if let Some(horizon) = args.horizon {
        let v = finite_horizon_payoff(&game, &a, &b, args.delta, horizon)?;
        println!(
            "first {horizon} stages: {}={:.6}, {}={:.6}",
            names[0], v.per_player[0], names[1], v.per_player[1]
        );
    }
    if args.first == "grim" && args.second == "grim" {
        let scan = elite_core::check_equilibrium(&game, &coop, &punish, args.delta, DEFAULT_MAX_K)?;
        println!(
            "grim trigger equilibrium: {}",
            if scan.is_equilibrium { "yes" } else { "no" }
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Equilibria { game } => cmd_equilibria(&game),
        Command::Threshold(args) => cmd_threshold(&args),
        Command::Synth { spec, seed, out } => cmd_synth(&spec, seed, &out),
        Command::Estimate {
            purchases,
            window,
            out,
        } => cmd_estimate(&purchases, &window, out.as_deref()),
        Command::Classify(args) => cmd_classify(&args),
        Command::TrainBaseline(args) => cmd_train(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    }
}

/// The error chain joined with `: `, skipping causes already spelled out by
/// the message before them.
fn one_line(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if out.ends_with(&text) {
            continue;
        }
        if !out.is_empty() {
            out += ": ";
        }
        out += &text;
    }
    out
}

/// 2 for internal invariant violations, 1 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    let invariant = e
        .chain()
        .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::Invariant(_))));
    if invariant {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
