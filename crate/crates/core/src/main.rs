//! Command line interface: experiment sweeps and reports, task and
//! model inspection, prior computation, the sequential-reward
//! simulation, and the bundled-fixture exactness suite.
//!
//! Exit codes: 0 on success, 1 on usage or runtime errors, 2 when
//! `fixtures verify` finds a mismatch.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use intension::harness::{
    parse_csv, render_csv, render_markdown, run_experiment, ExperimentConfig,
    ReportFormat,
};
use intension::lang::{LanguageUniverse, StateSpace, Statement, Vocabulary, VocabularyRecipe};
use intension::prior::{mutual_exclusion_audit, prior, remark6_simulate, Proxy};
use intension::search::{
    build_search_problem, search_mdl, search_weakest, SearchConfig, WeaknessTier,
};
use intension::task::{Task, World};
use intension::taskgen::{
    arithmetic_parent, load_fixtures, parse_sections, render_task, Operation, ARITHMETIC_BITS,
};
use intension::{Error, Result};

#[derive(Parser)]
#[command(name = "intension", version, about = "Task inference over finite implementable languages", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run sweeps and render their reports.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
    /// Inspect tasks in the line-oriented text format.
    Task {
        #[command(subcommand)]
        command: TaskCommand,
    },
    /// Run model search on a task.
    Model {
        #[command(subcommand)]
        command: ModelCommand,
    },
    /// Compute the weakness prior over an enumerated universe.
    Prior {
        #[command(subcommand)]
        command: PriorCommand,
    },
    /// Sequential-reward simulation.
    Remark6 {
        #[command(subcommand)]
        command: Remark6Command,
    },
    /// Bundled-fixture exactness suite.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run the generalisation-rate sweep.
    Run {
        /// TOML config file; omitted means the built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed override (beats the config file and the
        /// INTENSION_SEED environment variable).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for report.csv, report.md, and the
        /// resolved config echo; omitted means CSV on stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render a stored report.
    Report {
        /// Directory holding a report.csv written by `experiment run`.
        dir: PathBuf,
        #[arg(long)]
        format: ReportFormat,
    },
}

#[derive(Subcommand)]
enum TaskCommand {
    /// Print a task in the sectioned text format.
    Show {
        #[command(flatten)]
        source: TaskSource,
    },
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Print the hitting-set reduction and both search outcomes.
    Search {
        #[command(flatten)]
        source: TaskSource,
        /// Weakness tier: exact, closed, or state. Exact needs a
        /// fixture task (the universe must be enumerated).
        #[arg(long, default_value = "closed")]
        tier: String,
        /// Seed for the uniform choice among tied models.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum PriorCommand {
    /// Evaluate the prior of one statement, audit a mutual-exclusion
    /// set, or dump the whole universe as CSV.
    Compute {
        /// Universe: `worked` (the 4-bit example) or `counter`.
        #[arg(long, default_value = "worked")]
        universe: String,
        /// Statement as space-separated program labels; empty means
        /// the empty statement.
        #[arg(long, default_value = "")]
        statement: String,
        /// Also build a maximal mutually exclusive set around the
        /// statement and report the prior sum.
        #[arg(long)]
        audit: bool,
        /// Print `statement,weakness,prior` CSV for every statement
        /// of the universe instead.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Subcommand)]
enum Remark6Command {
    /// Grow an ostensive definition one decision per step and track
    /// when the chosen model first generalises.
    Simulate {
        #[arg(long, default_value = "add")]
        operation: Operation,
        /// Which bit is withheld from parent situations.
        #[arg(long, default_value_t = 5)]
        deleted_bit: u32,
        #[arg(long, default_value = "equations")]
        preset: String,
        #[arg(long, default_value = "weakness")]
        proxy: Proxy,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Steps to simulate, at most the parent's decision count.
        #[arg(long, default_value_t = 16)]
        horizon: usize,
        /// Write the CSV trace here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Check every bundled fixture against fresh searches; exit 2 on
    /// any mismatch.
    Verify,
}

/// Where a task comes from: a bundled fixture, a generated arithmetic
/// parent, or a sectioned text file.
#[derive(Args)]
struct TaskSource {
    /// Bundled task: t1, t2, or counter.
    #[arg(long, conflicts_with_all = ["operation", "file"])]
    fixture: Option<String>,
    /// Generate an arithmetic parent for this operation instead.
    #[arg(long)]
    operation: Option<Operation>,
    /// Which bit is withheld from the generated parent's situations.
    #[arg(long, default_value_t = 5, requires = "operation")]
    deleted_bit: u32,
    /// Vocabulary preset for the generated parent.
    #[arg(long, default_value = "literals+eq", requires = "operation")]
    preset: String,
    /// Read a task file: `[labels]`, optional `[language]`,
    /// `[situations]`, `[decisions]`. Without `[language]` the
    /// decisions are taken as the closed world.
    #[arg(long, conflicts_with = "operation")]
    file: Option<PathBuf>,
}

/// A resolved task plus the universe backing the exact tier, when one
/// is available.
struct ResolvedTask {
    name: String,
    task: Task,
    universe: Option<Arc<LanguageUniverse>>,
}

fn load_task_file(path: &Path) -> Result<Task> {
    let text = std::fs::read_to_string(path)?;
    let sections = parse_sections(&text)?;
    let get = |name: &str| -> Result<&Vec<String>> {
        sections
            .get(name)
            .ok_or_else(|| Error::Parse(format!("missing section `[{name}]`")))
    };
    let labels_lines = get("labels")?;
    if labels_lines.len() != 1 {
        return Err(Error::Parse("`[labels]` must hold one line".into()));
    }
    let labels: Vec<String> = labels_lines[0]
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let parse_lines = |lines: &[String]| -> Result<Vec<Statement>> {
        lines
            .iter()
            .map(|line| {
                let mut s = Statement::EMPTY;
                for token in line.split_whitespace() {
                    let id = labels
                        .iter()
                        .position(|l| l == token)
                        .ok_or_else(|| Error::UnknownLabel(token.to_string()))?;
                    s = s.with(id);
                }
                Ok(s)
            })
            .collect()
    };
    let situations = parse_lines(get("situations")?)?;
    let decisions = parse_lines(get("decisions")?)?;
    let complete = match sections.get("language") {
        Some(lines) => parse_lines(lines)?,
        None => decisions.clone(),
    };
    let universe = LanguageUniverse::explicit(labels, complete);
    Task::new(World::Explicit(universe), situations, decisions, false)
}

fn resolve_task(source: &TaskSource) -> Result<ResolvedTask> {
    if let Some(path) = &source.file {
        return Ok(ResolvedTask {
            name: path.display().to_string(),
            task: load_task_file(path)?,
            universe: None,
        });
    }
    if let Some(op) = source.operation {
        let vocab = Vocabulary::build(
            &VocabularyRecipe::preset(&source.preset)?,
            StateSpace::new(ARITHMETIC_BITS)?,
        )?;
        return Ok(ResolvedTask {
            name: format!(
                "{op} parent, deleted bit {}, preset {}",
                source.deleted_bit, source.preset
            ),
            task: arithmetic_parent(&vocab, op, source.deleted_bit)?,
            universe: None,
        });
    }
    let fx = load_fixtures()?;
    let name = source.fixture.as_deref().unwrap_or("t2");
    let (task, universe) = match name {
        "t1" => (fx.t1, fx.worked_universe),
        "t2" => (fx.t2, fx.worked_universe),
        "counter" => (fx.counter_task, fx.counter_universe),
        other => {
            return Err(Error::Parse(format!(
                "unknown fixture `{other}` (expected t1, t2, or counter)"
            )))
        }
    };
    Ok(ResolvedTask {
        name: format!("fixture {name}"),
        task,
        universe: Some(universe),
    })
}

fn statement_text(world: &World, m: &Statement) -> String {
    if m.is_empty() {
        return "(empty)".into();
    }
    let mut labels: Vec<String> = m.ids().map(|id| world.label_of(id)).collect();
    labels.sort();
    labels.join(" ")
}

fn universe_statement_text(u: &LanguageUniverse, m: &Statement) -> String {
    if m.is_empty() {
        return "(empty)".into();
    }
    let mut labels: Vec<String> = m.ids().map(|id| u.label_of(id).to_string()).collect();
    labels.sort();
    labels.join(" ")
}

fn cmd_experiment_run(
    config: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_env()?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = run_experiment(&cfg)?;
    let csv = render_csv(&report.rows)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("report.csv"), &csv)?;
            std::fs::write(dir.join("report.md"), render_markdown(&report.rows))?;
            std::fs::write(dir.join("config.toml"), report.config.to_toml_string())?;
            println!("wrote {}", dir.join("report.csv").display());
            println!("wrote {}", dir.join("report.md").display());
            println!("wrote {}", dir.join("config.toml").display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_experiment_report(dir: &Path, format: ReportFormat) -> Result<()> {
    let rows = parse_csv(&std::fs::read_to_string(dir.join("report.csv"))?)?;
    match format {
        ReportFormat::Csv => print!("{}", render_csv(&rows)?),
        ReportFormat::Markdown => print!("{}", render_markdown(&rows)),
    }
    Ok(())
}

fn parse_tier(name: &str) -> Result<WeaknessTier> {
    match name {
        "exact" => Ok(WeaknessTier::Exact),
        "closed" => Ok(WeaknessTier::Closed),
        "state" => Ok(WeaknessTier::State),
        other => Err(Error::Parse(format!("unknown weakness tier `{other}`"))),
    }
}

fn cmd_model_search(source: &TaskSource, tier: &str, seed: u64) -> Result<()> {
    let resolved = resolve_task(source)?;
    let tier = parse_tier(tier)?;
    let mut config = SearchConfig {
        tier,
        ..SearchConfig::default()
    };
    if tier == WeaknessTier::Exact {
        config.universe = resolved.universe.clone();
    }
    let world = resolved.task.world();
    let problem = build_search_problem(&resolved.task)?;
    println!("task: {}", resolved.name);
    println!("core: {}", statement_text(world, &problem.core));
    println!("discriminators:");
    for d in &problem.discriminators {
        println!("  {}", statement_text(world, d));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for (title, outcome) in [
        (
            "weakest (argmax weakness)",
            search_weakest(&resolved.task, &config, &mut rng)?,
        ),
        (
            "mdl (argmin model size)",
            search_mdl(&resolved.task, &config, &mut rng)?,
        ),
    ] {
        println!("{title}:");
        println!("  score: {}", outcome.score_text());
        println!("  tier: {}", outcome.tier);
        println!("  models:");
        for m in &outcome.models {
            println!("    {}", statement_text(world, m));
        }
        println!("  chosen: {}", statement_text(world, &outcome.chosen));
    }
    Ok(())
}

fn rational_text(r: &BigRational) -> String {
    format!("{r} ({:.6e})", r.to_f64().unwrap_or(f64::NAN))
}

fn cmd_prior_compute(universe: &str, statement: &str, audit: bool, csv: bool) -> Result<()> {
    let fx = load_fixtures()?;
    let u = match universe {
        "worked" => fx.worked_universe,
        "counter" => fx.counter_universe,
        other => {
            return Err(Error::Parse(format!(
                "unknown universe `{other}` (expected worked or counter)"
            )))
        }
    };
    if csv {
        println!("statement,weakness,prior");
        for s in u.statements() {
            println!(
                "{},{},{}",
                universe_statement_text(&u, s),
                u.weakness_exact(s)?,
                prior(s, &u)?
            );
        }
        return Ok(());
    }
    let x = u.parse_statement(statement)?;
    println!("universe size: {}", u.len());
    println!("weakness: {}", u.weakness_exact(&x)?);
    println!("prior: {}", rational_text(&prior(&x, &u)?));
    if audit {
        let report = mutual_exclusion_audit(&x, &u)?;
        println!("mutually exclusive set ({} members):", report.members.len());
        for m in &report.members {
            println!("  {}", universe_statement_text(&u, m));
        }
        println!("prior sum: {}", rational_text(&report.sum));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_remark6_simulate(
    operation: Operation,
    deleted_bit: u32,
    preset: &str,
    proxy: Proxy,
    seed: u64,
    horizon: usize,
    out: Option<&Path>,
) -> Result<()> {
    let vocab = Vocabulary::build(
        &VocabularyRecipe::preset(preset)?,
        StateSpace::new(ARITHMETIC_BITS)?,
    )?;
    let parent = arithmetic_parent(&vocab, operation, deleted_bit)?;
    let trace = remark6_simulate(&parent, proxy, &SearchConfig::default(), seed, horizon)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "chosen", "score", "generalised"])
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    for step in &trace.steps {
        w.write_record([
            step.t.to_string(),
            statement_text(parent.world(), &step.chosen),
            intension::search::score_text(step.tier, step.score),
            step.generalised.to_string(),
        ])
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    }
    let csv_text = String::from_utf8(
        w.into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?,
    )
    .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    match out {
        Some(path) => {
            std::fs::write(path, &csv_text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv_text}"),
    }
    match trace.generalisation_step {
        Some(g) => println!("# generalised at t = {g}, reward {}", trace.reward),
        None => println!("# never generalised, reward 0"),
    }
    Ok(())
}

fn cmd_fixtures_verify() -> Result<bool> {
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("{}: {name}", if pass { "ok" } else { "FAIL" });
        ok &= pass;
    };
    let fx = load_fixtures()?;
    check("worked universe holds 16 complete statements", fx.worked_universe.len() == 16);
    let valid = fx
        .t1_models
        .iter()
        .all(|m| fx.t1.is_valid_model(m).unwrap_or(false));
    check("every listed t1 model is valid", valid);

    let config = SearchConfig::exact(fx.worked_universe.clone());
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let weakest = search_weakest(&fx.t2, &config, &mut rng)?;
    check(
        "t2 weakest model attains weakness 4",
        weakest.models.contains(&fx.t2_weakest) && weakest.score == 4,
    );
    check(
        "t2 weakest extension matches",
        fx.worked_universe.extension(&fx.t2_weakest)? == fx.t2_z_weakest,
    );
    check(
        "t2 extensional model has weakness 2",
        fx.worked_universe.weakness_exact(&fx.t2_extensional)? == 2
            && fx.t2.is_valid_model(&fx.t2_extensional)?,
    );
    check(
        "t2 extensional extension matches",
        fx.worked_universe.extension(&fx.t2_extensional)? == fx.t2_z_extensional,
    );
    let p = prior(&fx.t2_weakest, &fx.worked_universe)?;
    check(
        "t2 weakest prior is 2^-12",
        p == BigRational::new(1.into(), 4096.into()),
    );

    let cconfig = SearchConfig::exact(fx.counter_universe.clone());
    let weakest = search_weakest(&fx.counter_task, &cconfig, &mut rng)?;
    let mdl = search_mdl(&fx.counter_task, &cconfig, &mut rng)?;
    check(
        "counterexample weakest model matches at weakness 4",
        weakest.models == vec![fx.counter_weakest] && weakest.score == 4,
    );
    check(
        "counterexample mdl model matches at size 1",
        mdl.models == vec![fx.counter_mdl] && mdl.score == 1,
    );
    check(
        "counterexample mdl model has weakness 2",
        fx.counter_universe.weakness_exact(&fx.counter_mdl)? == 2,
    );
    Ok(ok)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Experiment { command } => match command {
            ExperimentCommand::Run { config, seed, out } => {
                cmd_experiment_run(config.as_deref(), seed, out.as_deref())?
            }
            ExperimentCommand::Report { dir, format } => cmd_experiment_report(&dir, format)?,
        },
        Command::Task { command } => match command {
            TaskCommand::Show { source } => {
                let resolved = resolve_task(&source)?;
                print!("{}", render_task(&resolved.task));
            }
        },
        Command::Model { command } => match command {
            ModelCommand::Search { source, tier, seed } => {
                cmd_model_search(&source, &tier, seed)?
            }
        },
        Command::Prior { command } => match command {
            PriorCommand::Compute {
                universe,
                statement,
                audit,
                csv,
            } => cmd_prior_compute(&universe, &statement, audit, csv)?,
        },
        Command::Remark6 { command } => match command {
            Remark6Command::Simulate {
                operation,
                deleted_bit,
                preset,
                proxy,
                seed,
                horizon,
                out,
            } => cmd_remark6_simulate(
                operation,
                deleted_bit,
                &preset,
                proxy,
                seed,
                horizon,
                out.as_deref(),
            )?,
        },
        Command::Fixtures { command } => match command {
            FixturesCommand::Verify => {
                if !cmd_fixtures_verify()? {
                    return Ok(ExitCode::from(2));
                }
            }
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
