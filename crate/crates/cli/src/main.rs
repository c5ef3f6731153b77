//! Command-line front end: scenario ingestion, game solvers, consistency
//! checks, feasibility queries, parameter sweeps, and seeded simulation.
//!
//! Exit codes: 0 success (or a consistent verdict), 1 inconsistent verdict,
//! 2 input error (unreadable or malformed scenario/profile/value), 3 usage
//! error (bad flags or flag combinations). Nothing else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use newcomb_core::net::{NetProfile, NodeCpd, StrategyProfile};
use newcomb_core::newcomb::{
    simulate, solve_combined_constrained, solve_fearful, solve_realist, solve_variant_choose_game,
    GameKind, Scenario, SimNet, CHOICE_VAR, PREDICTION_VAR,
};
use newcomb_core::{
    check_profile, feasible_g_independent, feasible_g_independent_oracle, parse_rational,
    parse_rational_allow_decimal, rational_to_f64, rational_to_string, Cpd, Dist, ExtendedGame,
    OutcomeSpace, Prob, Rational,
};

const OUTPUT_DIR_ENV: &str = "NEWCOMB_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "newcomb",
    version,
    about = "Exact Bayes net game analysis of the two-box prediction scenario"
)]
struct Cli {
    /// Scenario JSON path, or "canonical" for the built-in instance
    #[arg(long, global = true, default_value = "canonical")]
    scenario: String,

    /// Arithmetic mode: exact keeps every comparison rational; float adds a
    /// display tolerance for verdicts
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,

    /// Display tolerance, used only in float mode
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,

    /// Output format; sweep emits csv, every other command emits json
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the report to this file instead of stdout; a relative path is
    /// joined onto $NEWCOMB_OUTPUT_DIR when that variable is set
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GameArg {
    Fearful,
    Realist,
    Combined,
    Variant,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NetArg {
    Fearful,
    Realist,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepTarget {
    Alpha,
    #[value(name = "pgB")]
    PgB,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one of the games and print the recommendation
    Solve {
        #[arg(long, value_enum)]
        game: GameArg,
        /// Predictor accuracy (fearful/combined), e.g. 3/4
        #[arg(long)]
        alpha: Option<String>,
        /// Prediction marginal (realist/variant) as comma-separated masses,
        /// e.g. 1/2,1/2
        #[arg(long)]
        pg: Option<String>,
    },
    /// Check whether two net strategy profiles induce one coherent joint
    Consistency {
        /// Choice-first net profile JSON
        #[arg(long)]
        fearful: Option<PathBuf>,
        /// Prediction-first net profile JSON
        #[arg(long)]
        realist: Option<PathBuf>,
        /// Inline choice marginal for the choice-first net (default uniform)
        #[arg(long)]
        py: Option<String>,
        /// Inline predictor accuracy for the choice-first net
        #[arg(long)]
        alpha: Option<String>,
        /// Inline prediction marginal for the prediction-first net
        #[arg(long)]
        pg: Option<String>,
        /// Inline prediction-independent choice conditional (default uniform)
        #[arg(long)]
        h: Option<String>,
    },
    /// Feasible set of prediction-independent choice conditionals
    Feasible {
        #[arg(long)]
        alpha: Option<String>,
        /// Also run the brute-force grid oracle and report agreement
        #[arg(long)]
        grid: Option<u32>,
    },
    /// Parameter sweep over alpha or pg(B); emits CSV
    Sweep {
        #[arg(long, value_enum)]
        target: SweepTarget,
        #[arg(long, default_value_t = 100)]
        grid: u32,
    },
    /// Draw seeded samples from a net and report empirical statistics
    Simulate {
        #[arg(long, value_enum)]
        net: NetArg,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        seed: u64,
        /// Predictor accuracy (fearful net)
        #[arg(long)]
        alpha: Option<String>,
        /// Choice marginal (fearful net, default uniform)
        #[arg(long)]
        py: Option<String>,
        /// Prediction marginal (realist net)
        #[arg(long)]
        pg: Option<String>,
        /// Prediction-independent choice conditional (realist net, default
        /// the point mass on the first choice label)
        #[arg(long)]
        h: Option<String>,
    },
    /// Reverse the scenario timeline, then run the wrapped invocation
    /// (a complete command line, e.g. `reverse solve --game fearful`)
    Reverse {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        rest: Vec<String>,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli, 0) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Parse one exact rational, honoring the arithmetic mode: exact mode
/// rejects decimal literals (they would silently launder precision claims),
/// float mode converts finite decimals losslessly.
fn parse_rat(s: &str, mode: Mode) -> Result<Rational, CliError> {
    match mode {
        Mode::Exact => parse_rational(s).map_err(|_| {
            if s.contains('.') {
                CliError::input(format!(
                    "decimal input `{s}` is rejected in exact mode; write an exact rational like 3/4 (or use --mode float)"
                ))
            } else {
                CliError::input(format!("cannot parse `{s}` as an exact rational"))
            }
        }),
        Mode::Float => parse_rational_allow_decimal(s)
            .map_err(|_| CliError::input(format!("cannot parse `{s}` as a rational"))),
    }
}

fn parse_prob(s: &str, mode: Mode) -> Result<Prob, CliError> {
    Prob::new(parse_rat(s, mode)?).map_err(|e| CliError::input(format!("`{s}`: {e}")))
}

/// Parse comma-separated masses into a distribution over `space`.
fn parse_dist(s: &str, space: &OutcomeSpace, mode: Mode) -> Result<Dist, CliError> {
    let weights = s
        .split(',')
        .map(|part| parse_rat(part, mode))
        .collect::<Result<Vec<_>, _>>()?;
    Dist::from_weights(space.clone(), &weights).map_err(|e| CliError::input(format!("`{s}`: {e}")))
}

fn load_scenario(source: &str) -> Result<Scenario, CliError> {
    if source == "canonical" {
        return Ok(Scenario::canonical());
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| CliError::input(format!("cannot read scenario `{source}`: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed scenario `{source}`: {e}")))
}

fn resolve_out_path(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                return Path::new(&dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let path = resolve_out_path(path);
            std::fs::write(&path, content)
                .map_err(|e| CliError::input(format!("cannot write `{}`: {e}", path.display())))
        }
    }
}

fn to_json_doc<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Global flags shared by every command.
struct Ctx {
    mode: Mode,
    tolerance: f64,
    out: Option<PathBuf>,
}

fn run(cli: Cli, reversals: usize) -> Result<u8, CliError> {
    if cli.mode == Mode::Float && (cli.tolerance.is_nan() || cli.tolerance <= 0.0) {
        return Err(CliError::usage("float mode needs --tolerance > 0"));
    }

    // `reverse` wraps a complete invocation: reparse the trailing args and
    // rerun with one more timeline flip. Globals belong to the wrapped
    // command line, so reject them on the wrapper itself.
    if let Command::Reverse { rest } = &cli.command {
        if cli.scenario != "canonical"
            || cli.mode != Mode::Exact
            || cli.tolerance != 1e-9
            || cli.format.is_some()
            || cli.out.is_some()
        {
            return Err(CliError::usage(
                "place global flags after `reverse`, inside the wrapped invocation",
            ));
        }
        let argv = std::iter::once("newcomb".to_string()).chain(rest.iter().cloned());
        let inner = match Cli::try_parse_from(argv) {
            Ok(inner) => inner,
            Err(e) => {
                use clap::error::ErrorKind;
                let _ = e.print();
                return Ok(match e.kind() {
                    ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                    _ => 3,
                });
            }
        };
        return run(inner, reversals + 1);
    }

    let is_sweep = matches!(cli.command, Command::Sweep { .. });
    match cli.format {
        Some(Format::Csv) if !is_sweep => {
            return Err(CliError::usage("--format csv is only available for sweep"))
        }
        Some(Format::Json) if is_sweep => {
            return Err(CliError::usage(
                "sweep emits csv; --format json is not available",
            ))
        }
        _ => {}
    }

    let mut scenario = load_scenario(&cli.scenario)?;
    for _ in 0..reversals {
        scenario = scenario.time_reverse();
    }

    let ctx = Ctx {
        mode: cli.mode,
        tolerance: cli.tolerance,
        out: cli.out,
    };
    match cli.command {
        Command::Solve { game, alpha, pg } => cmd_solve(&ctx, &scenario, game, alpha, pg),
        Command::Consistency {
            fearful,
            realist,
            py,
            alpha,
            pg,
            h,
        } => cmd_consistency(&ctx, &scenario, fearful, realist, py, alpha, pg, h),
        Command::Feasible { alpha, grid } => cmd_feasible(&ctx, &scenario, alpha, grid),
        Command::Sweep { target, grid } => cmd_sweep(&ctx, &scenario, target, grid),
        Command::Simulate {
            net,
            n,
            seed,
            alpha,
            py,
            pg,
            h,
        } => cmd_simulate(&ctx, &scenario, net, n, seed, alpha, py, pg, h),
        Command::Reverse { .. } => unreachable!("handled above"),
    }
}

fn cmd_solve(
    ctx: &Ctx,
    scenario: &Scenario,
    game: GameArg,
    alpha: Option<String>,
    pg: Option<String>,
) -> Result<u8, CliError> {
    match game {
        GameArg::Fearful | GameArg::Combined => {
            if pg.is_some() {
                return Err(CliError::usage(
                    "--pg applies to the realist and variant games",
                ));
            }
        }
        GameArg::Realist | GameArg::Variant => {
            if alpha.is_some() {
                return Err(CliError::usage(
                    "--alpha applies to the fearful and combined games",
                ));
            }
        }
    }
    let doc = match game {
        GameArg::Fearful => {
            let alpha = match alpha {
                Some(s) => parse_prob(&s, ctx.mode)?,
                None => scenario.alpha().clone(),
            };
            let rec =
                solve_fearful(scenario, &alpha).map_err(|e| CliError::input(e.to_string()))?;
            to_json_doc(&rec)
        }
        GameArg::Realist => {
            let pg = match pg {
                Some(s) => parse_dist(&s, scenario.prediction_space(), ctx.mode)?,
                None => scenario.pg().clone(),
            };
            let rec = solve_realist(scenario, &pg).map_err(|e| CliError::input(e.to_string()))?;
            to_json_doc(&rec)
        }
        GameArg::Combined => {
            let scenario = match alpha {
                Some(s) => with_alpha(scenario, parse_prob(&s, ctx.mode)?)?,
                None => scenario.clone(),
            };
            let rec = solve_combined_constrained(&scenario)
                .map_err(|e| CliError::input(e.to_string()))?;
            to_json_doc(&rec)
        }
        GameArg::Variant => {
            let pg = match pg {
                Some(s) => parse_dist(&s, scenario.prediction_space(), ctx.mode)?,
                None => scenario.pg().clone(),
            };
            let outcome = solve_variant_choose_game(scenario, &pg)
                .map_err(|e| CliError::input(e.to_string()))?;
            to_json_doc(&outcome)
        }
    };
    emit(&ctx.out, &doc)?;
    Ok(0)
}

fn with_alpha(scenario: &Scenario, alpha: Prob) -> Result<Scenario, CliError> {
    Scenario::new(
        scenario.choice_space().clone(),
        scenario.prediction_space().clone(),
        scenario.payoff().values().to_vec(),
        alpha,
        scenario.pg().clone(),
        scenario.timeline().to_vec(),
    )
    .map_err(|e| CliError::input(e.to_string()))
}

fn load_net_profile(path: &Path) -> Result<NetProfile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read profile `{}`: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed profile `{}`: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_consistency(
    ctx: &Ctx,
    scenario: &Scenario,
    fearful: Option<PathBuf>,
    realist: Option<PathBuf>,
    py: Option<String>,
    alpha: Option<String>,
    pg: Option<String>,
    h: Option<String>,
) -> Result<u8, CliError> {
    let from_files = fearful.is_some() || realist.is_some();
    if from_files {
        if fearful.is_none() || realist.is_none() {
            return Err(CliError::usage(
                "file mode needs both --fearful and --realist profiles",
            ));
        }
        if py.is_some() || alpha.is_some() || pg.is_some() || h.is_some() {
            return Err(CliError::usage(
                "inline distribution flags cannot be combined with profile files",
            ));
        }
    }

    let (nets, profiles) = if from_files {
        let a = load_net_profile(&fearful.unwrap())?;
        let b = load_net_profile(&realist.unwrap())?;
        (vec![a.net, b.net], vec![a.profile, b.profile])
    } else {
        let py = match py {
            Some(s) => parse_dist(&s, scenario.choice_space(), ctx.mode)?,
            None => Dist::uniform(scenario.choice_space().clone()),
        };
        let alpha = match alpha {
            Some(s) => parse_prob(&s, ctx.mode)?,
            None => scenario.alpha().clone(),
        };
        let pg = match pg {
            Some(s) => parse_dist(&s, scenario.prediction_space(), ctx.mode)?,
            None => scenario.pg().clone(),
        };
        let h = match h {
            Some(s) => parse_dist(&s, scenario.choice_space(), ctx.mode)?,
            None => Dist::uniform(scenario.choice_space().clone()),
        };
        let w = Cpd::alpha_accurate(&alpha, scenario.choice_space())
            .map_err(|e| CliError::input(e.to_string()))?;
        let fearful_profile = StrategyProfile::new()
            .with(CHOICE_VAR, NodeCpd::prior(py))
            .with(PREDICTION_VAR, NodeCpd::from_cpd(&w));
        let realist_profile = StrategyProfile::new()
            .with(PREDICTION_VAR, NodeCpd::prior(pg))
            .with(
                CHOICE_VAR,
                NodeCpd::tied(vec![scenario.prediction_space().clone()], h),
            );
        (
            vec![scenario.fearful_net(), scenario.realist_net()],
            vec![fearful_profile, realist_profile],
        )
    };

    let xgame = ExtendedGame::new(nets).map_err(|e| CliError::input(e.to_string()))?;
    let report = check_profile(&xgame, &profiles).map_err(|e| CliError::input(e.to_string()))?;

    let (verdict, doc) = match ctx.mode {
        Mode::Exact => (report.consistent, to_json_doc(&report)),
        Mode::Float => {
            let disc = rational_to_f64(&report.discrepancy);
            let consistent = disc <= ctx.tolerance;
            let doc = to_json_doc(&json!({
                "mode": "float",
                "tolerance": ctx.tolerance,
                "discrepancy_decimal": disc,
                "consistent": consistent,
                "report": serde_json::to_value(&report).expect("report serializes"),
            }));
            (consistent, doc)
        }
    };
    emit(&ctx.out, &doc)?;
    Ok(if verdict { 0 } else { 1 })
}

fn cmd_feasible(
    ctx: &Ctx,
    scenario: &Scenario,
    alpha: Option<String>,
    grid: Option<u32>,
) -> Result<u8, CliError> {
    let alpha = match alpha {
        Some(s) => parse_prob(&s, ctx.mode)?,
        None => scenario.alpha().clone(),
    };
    if let Some(g) = grid {
        if g < 2 {
            return Err(CliError::usage("--grid must be at least 2"));
        }
    }
    let space = scenario.choice_space();
    let analytic =
        feasible_g_independent(&alpha, space).map_err(|e| CliError::input(e.to_string()))?;
    let mut doc = json!({
        "alpha": alpha.to_string(),
        "analytic": serde_json::to_value(&analytic).expect("feasible set serializes"),
    });
    if let Some(g) = grid {
        let oracle = feasible_g_independent_oracle(&alpha, g, space)
            .map_err(|e| CliError::input(e.to_string()))?;
        let restricted = analytic
            .restrict_to_grid(g, space)
            .map_err(|e| CliError::input(e.to_string()))?;
        let agree = match &oracle {
            newcomb_core::FeasibleSet::Finite { members } => {
                members.len() == restricted.len() && members.iter().all(|m| restricted.contains(m))
            }
            newcomb_core::FeasibleSet::All => false,
        };
        doc["grid"] = json!(g);
        doc["oracle"] = serde_json::to_value(&oracle).expect("feasible set serializes");
        doc["agree"] = json!(agree);
    }
    emit(&ctx.out, &to_json_doc(&doc))?;
    Ok(0)
}

fn csv_cell(r: &Rational) -> String {
    format!("{},{}", rational_to_string(r), rational_to_f64(r))
}

fn cmd_sweep(
    ctx: &Ctx,
    scenario: &Scenario,
    target: SweepTarget,
    grid: u32,
) -> Result<u8, CliError> {
    if grid < 2 {
        return Err(CliError::usage("--grid must be at least 2"));
    }
    let mode = match ctx.mode {
        Mode::Exact => "exact",
        Mode::Float => "float",
    };
    let target_name = match target {
        SweepTarget::Alpha => "alpha",
        SweepTarget::PgB => "pgB",
    };
    let mut out = String::new();
    out.push_str(&format!(
        "# newcomb {} mode={} target={} grid={}\n",
        env!("CARGO_PKG_VERSION"),
        mode,
        target_name,
        grid
    ));
    out.push_str(
        "param,param_decimal,feasible_kind,fearful_value,fearful_value_decimal,realist_value,realist_value_decimal,branch\n",
    );

    for k in 0..=grid {
        let param = Prob::ratio(i64::from(k), i64::from(grid)).expect("grid point in [0,1]");
        let row = match target {
            SweepTarget::Alpha => {
                let feasible = feasible_g_independent(&param, scenario.choice_space())
                    .map_err(|e| CliError::input(e.to_string()))?;
                let fearful =
                    solve_fearful(scenario, &param).map_err(|e| CliError::input(e.to_string()))?;
                let realist = solve_realist(scenario, scenario.pg())
                    .map_err(|e| CliError::input(e.to_string()))?;
                let branch = match fearful.expected_value.cmp(&realist.expected_value) {
                    std::cmp::Ordering::Greater => "FEARFUL",
                    std::cmp::Ordering::Less => "REALIST",
                    std::cmp::Ordering::Equal => "TIE",
                };
                format!(
                    "{},{},{},{},{}\n",
                    csv_cell(param.as_ratio()),
                    feasible.kind_label(),
                    csv_cell(&fearful.expected_value),
                    csv_cell(&realist.expected_value),
                    branch
                )
            }
            SweepTarget::PgB => {
                let pg = Dist::new(
                    scenario.prediction_space().clone(),
                    vec![param.complement(), param.clone()],
                )
                .expect("complement masses sum to 1");
                let feasible = feasible_g_independent(scenario.alpha(), scenario.choice_space())
                    .map_err(|e| CliError::input(e.to_string()))?;
                let outcome = solve_variant_choose_game(scenario, &pg)
                    .map_err(|e| CliError::input(e.to_string()))?;
                let branch = if outcome.branch_tie {
                    "TIE"
                } else {
                    match outcome.chosen_branch {
                        GameKind::Fearful => "FEARFUL",
                        GameKind::Realist => "REALIST",
                        _ => unreachable!("variant picks one of the two branches"),
                    }
                };
                format!(
                    "{},{},{},{},{}\n",
                    csv_cell(param.as_ratio()),
                    feasible.kind_label(),
                    csv_cell(&outcome.fearful_value),
                    csv_cell(&outcome.realist_value),
                    branch
                )
            }
        };
        out.push_str(&row);
    }
    emit(&ctx.out, &out)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    ctx: &Ctx,
    scenario: &Scenario,
    net: NetArg,
    n: i64,
    seed: u64,
    alpha: Option<String>,
    py: Option<String>,
    pg: Option<String>,
    h: Option<String>,
) -> Result<u8, CliError> {
    if n <= 0 {
        return Err(CliError::usage("--n must be positive"));
    }
    let profile = match net {
        NetArg::Fearful => {
            if pg.is_some() || h.is_some() {
                return Err(CliError::usage("--pg/--h apply to the realist net"));
            }
            let alpha = match alpha {
                Some(s) => parse_prob(&s, ctx.mode)?,
                None => scenario.alpha().clone(),
            };
            let py = match py {
                Some(s) => parse_dist(&s, scenario.choice_space(), ctx.mode)?,
                None => Dist::uniform(scenario.choice_space().clone()),
            };
            let w = Cpd::alpha_accurate(&alpha, scenario.choice_space())
                .map_err(|e| CliError::input(e.to_string()))?;
            StrategyProfile::new()
                .with(CHOICE_VAR, NodeCpd::prior(py))
                .with(PREDICTION_VAR, NodeCpd::from_cpd(&w))
        }
        NetArg::Realist => {
            if alpha.is_some() || py.is_some() {
                return Err(CliError::usage("--alpha/--py apply to the fearful net"));
            }
            let pg = match pg {
                Some(s) => parse_dist(&s, scenario.prediction_space(), ctx.mode)?,
                None => scenario.pg().clone(),
            };
            let h = match h {
                Some(s) => parse_dist(&s, scenario.choice_space(), ctx.mode)?,
                None => Dist::delta(
                    scenario.choice_space().clone(),
                    scenario.choice_space().label(0),
                )
                .expect("first label always exists"),
            };
            StrategyProfile::new()
                .with(PREDICTION_VAR, NodeCpd::prior(pg))
                .with(
                    CHOICE_VAR,
                    NodeCpd::tied(vec![scenario.prediction_space().clone()], h),
                )
        }
    };
    let sim_net = match net {
        NetArg::Fearful => SimNet::Fearful,
        NetArg::Realist => SimNet::Realist,
    };
    let stats = simulate(scenario, sim_net, &profile, n as u64, seed)
        .map_err(|e| CliError::input(e.to_string()))?;
    emit(&ctx.out, &to_json_doc(&stats))?;
    Ok(0)
}
