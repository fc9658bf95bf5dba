//! Command-line frontend for the tempotopic pipeline.

pub mod artifacts;
pub mod chart;
mod commands;
pub mod config;

use std::ffi::OsString;
use std::fmt;

use clap::error::ErrorKind;
use clap::{value_parser, Arg, ArgAction, ArgMatches, ColorChoice, Command};

pub use chart::{render_bar_chart, render_line_chart, ChartError, ChartOptions, Series};
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or arguments.
    Usage(String),
    /// Input data or upstream artifacts are missing or unusable.
    Data(String),
}

impl CliError {
    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<tempotopic::Error> for CliError {
    fn from(e: tempotopic::Error) -> Self {
        match e {
            tempotopic::Error::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ChartError> for CliError {
    fn from(e: ChartError) -> Self {
        CliError::Data(format!("chart: {e}"))
    }
}

const OVERRIDES: &str = "Config overrides";

fn subcommands() -> Vec<Command> {
    let list = |name: &'static str, help: &'static str| Arg::new(name).long(name).value_name("A,B,..").help(help);
    vec![
        Command::new("ingest").about("Read the raw question/answer file into corpus.json"),
        Command::new("prep").about("Normalize, filter and phrase the corpus into prepared.json"),
        Command::new("train-lda").about("Train a static topic model"),
        Command::new("sweep").about("Score mean NPMI over a range of topic counts"),
        Command::new("train-dtm").about("Train a chained-prior dynamic topic model over time slices"),
        Command::new("metrics").about("Coherence, diversity and quality of a trained model"),
        Command::new("embed").about("Train skip-gram word embeddings"),
        Command::new("expand")
            .about("Expand seed keywords with their nearest embedding neighbours")
            .arg(list("seeds", "Seed words").required(true))
            .arg(
                Arg::new("k")
                    .long("k")
                    .value_parser(value_parser!(usize))
                    .default_value("10")
                    .help("Neighbours per seed"),
            )
            .arg(list("exclude", "Words never added")),
        Command::new("stats")
            .about("Descriptive statistics over the corpus")
            .arg(
                Arg::new("kind")
                    .long("kind")
                    .required(true)
                    .value_parser(["distribution", "shares", "participation", "themes", "sittings"]),
            )
            .arg(
                Arg::new("by")
                    .long("by")
                    .value_parser(["ministry", "term", "year", "gender", "category"])
                    .help("Grouping key (distribution: any; shares: gender|category; themes: term|year)"),
            )
            .arg(
                Arg::new("top")
                    .long("top")
                    .value_parser(value_parser!(usize))
                    .help("Keep the largest N groups and merge the rest into `other`"),
            )
            .arg(Arg::new("seats").long("seats").value_name("FILE").help("CSV term,ruling_seats,opposition_seats"))
            .arg(Arg::new("sittings").long("sittings").value_name("FILE").help("CSV year,sittings"))
            .arg(list("keywords", "Theme keywords"))
            .arg(
                Arg::new("keywords-file")
                    .long("keywords-file")
                    .value_name("FILE")
                    .help("Theme keywords, one per line (e.g. the output of `expand`)"),
            ),
        Command::new("trajectory")
            .about("Topic and word trajectories of a dynamic model, as CSV and SVG")
            .arg(list("topics", "Topics to plot (default: the first five)"))
            .arg(
                Arg::new("topic")
                    .long("topic")
                    .value_parser(value_parser!(usize))
                    .help("Topic for word trajectories and candidates"),
            )
            .arg(list("words", "Words to trace within --topic"))
            .arg(
                Arg::new("candidates")
                    .long("candidates")
                    .value_parser(value_parser!(usize))
                    .help("List N low-probability, high-variance words of --topic"),
            ),
        Command::new("topdocs")
            .about("Documents of one slice ranked by their share of a topic")
            .arg(Arg::new("topic").long("topic").required(true).value_parser(value_parser!(usize)))
            .arg(Arg::new("slice").long("slice").required(true).value_name("LABEL").help("Slice label, e.g. 2007"))
            .arg(Arg::new("n").long("n").value_parser(value_parser!(usize)).default_value("10"))
            .arg(Arg::new("word").long("word").help("Only documents containing this word")),
    ]
}

fn with_overrides(mut cmd: Command, keys: &[(String, serde_json::Value)]) -> Command {
    cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("JSON run configuration; flags override it"),
    );
    for (key, default) in keys {
        let mut arg = Arg::new(key.clone())
            .long(key.clone())
            .value_name("VALUE")
            .action(ArgAction::Set)
            .help(format!("[default: {default}]"))
            .help_heading(OVERRIDES);
        if key == "prep.ministry" {
            arg = arg.visible_alias("ministry");
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

pub fn command() -> Command {
    let keys = config::override_keys();
    let color = if std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty()) {
        ColorChoice::Never
    } else {
        ColorChoice::Auto
    };
    let mut root = Command::new("tempotopic")
        .about("Topic evolution analysis for parliamentary question corpora")
        .version(env!("CARGO_PKG_VERSION"))
        .color(color)
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("workers")
                .long("workers")
                .global(true)
                .value_parser(value_parser!(usize))
                .help("Worker threads (default: all cores)"),
        );
    for sub in subcommands() {
        root = root.subcommand(with_overrides(sub, &keys));
    }
    root
}

fn overrides(m: &ArgMatches) -> Vec<(String, String)> {
    config::override_keys()
        .into_iter()
        .filter_map(|(k, _)| m.get_one::<String>(&k).map(|v| (k, v.clone())))
        .collect()
}

/// Parses arguments, runs one subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let workers = matches.get_one::<usize>("workers").copied().unwrap_or(0);
    let result = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| dispatch(&matches)),
        Err(e) => Err(CliError::Usage(format!("cannot start {workers} workers: {e}"))),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(matches: &ArgMatches) -> Result<(), CliError> {
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let file = sub.get_one::<String>("config").map(std::path::PathBuf::from);
    let config = config::load(file.as_deref(), &overrides(sub))?;
    let written = commands::run(name, sub, &config)?;
    for a in written {
        eprintln!("wrote {}", config.output_dir.join(&a.path).display());
    }
    Ok(())
}
