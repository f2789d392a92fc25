//! `gacrf` command-line front end.
//!
//! [`dispatch`] parses the argument vector, runs one subcommand and maps
//! the outcome onto the exit-code contract: 0 on success, 1 on data or
//! domain errors, 2 on usage errors.

pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use gacrf_core::corpus::{load_model, read_column_file, read_raw, save_model, write_column_file, Corpus};
use gacrf_core::crf::{tag_sentence, train_with_report};
use gacrf_core::evaluation::{score, EvalReport, Mode};
use gacrf_core::features::{build_frequency_table, encode_sentence, FeatureContext, Gazetteer};
use gacrf_core::ga::{initialize_population, read_history_csv, run_ga_from, write_history_csv};
use gacrf_core::stemmer::AffixLexicon;
use gacrf_core::template::{chromosome_to_template, GeneCatalogue, Template};

pub use config::{load_run_config, parse_run_config, RunConfig};

const DEFAULT_PREFIXES: &str = include_str!("../../../data/prefixes_list.txt");
const DEFAULT_SUFFIXES: &str = include_str!("../../../data/suffixes_list.txt");
const DEFAULT_SALUTATIONS: &str = include_str!("../../../data/salutations.txt");
const DEFAULT_FOLLOWUPS: &str = include_str!("../../../data/followups.txt");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}: {key}: {message}")]
    Config { line: usize, key: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] gacrf_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gacrf", version, about = "Multiword-expression tagging with GA-selected CRF features")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Options {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Prefix list, one per line (defaults to the bundled list).
    #[arg(long, global = true, value_name = "FILE")]
    prefixes: Option<PathBuf>,
    /// Suffix list, one per line (defaults to the bundled list).
    #[arg(long, global = true, value_name = "FILE")]
    suffixes: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    gazetteer_salutations: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    gazetteer_followups: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    template: Option<PathBuf>,
    /// Template whose macros form the gene catalogue for `ga-search`.
    #[arg(long, global = true, value_name = "FILE")]
    catalogue: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    model: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// History CSV written by `ga-search`.
    #[arg(long, global = true, value_name = "FILE")]
    history: Option<PathBuf>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    generations: Option<usize>,
    #[arg(long, global = true)]
    population: Option<usize>,
    #[arg(long, global = true, value_parser = parse_mode, value_name = "span|token")]
    mode: Option<Mode>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: gacrf_core::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stem words read one per line; prints word, stem, prefixes, suffixes and counts.
    Stem {
        /// Word list; stdin when omitted or `-`.
        input: Option<PathBuf>,
    },
    /// Turn `word<TAB>pos[<TAB>label]` lines into a 23-column token file.
    Encode { input: PathBuf },
    /// Train a CRF on a labeled column file with `--template`, writing `--model`.
    Train { input: PathBuf },
    /// Label a column file with `--model`.
    Tag { input: PathBuf },
    /// Score predicted against gold column files.
    Eval { gold: PathBuf, predicted: PathBuf },
    /// Search feature subsets; writes the best template to `--out` and the history CSV.
    GaSearch { input: PathBuf },
    /// Summarize a history CSV.
    Report {
        /// History file; falls back to `--history`.
        history: Option<PathBuf>,
    },
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve(opts: Options) -> CliResult<RunConfig> {
    let mut c = match &opts.config {
        Some(path) => load_run_config(path)?,
        None => RunConfig::default(),
    };
    macro_rules! over {
        ($($field:ident),*) => { $( if opts.$field.is_some() { c.$field = opts.$field; } )* };
    }
    over!(prefixes, suffixes, gazetteer_salutations, gazetteer_followups, template, catalogue, model, out, history);
    if let Some(seed) = opts.seed {
        c.ga.seed = seed;
    }
    if let Some(folds) = opts.folds {
        c.ga.folds = folds;
    }
    if let Some(g) = opts.generations {
        c.ga.max_generations = g;
    }
    if let Some(p) = opts.population {
        c.ga.population_size = p;
    }
    if let Some(m) = opts.mode {
        c.mode = m;
    }
    Ok(c)
}

fn run(cli: Cli) -> CliResult {
    let config = resolve(cli.opts)?;
    match cli.command {
        Command::Stem { input } => cmd_stem(&config, input.as_deref()),
        Command::Encode { input } => cmd_encode(&config, &input),
        Command::Train { input } => cmd_train(&config, &input),
        Command::Tag { input } => cmd_tag(&config, &input),
        Command::Eval { gold, predicted } => cmd_eval(&config, &gold, &predicted),
        Command::GaSearch { input } => cmd_ga_search(&config, &input),
        Command::Report { history } => {
            let path = history
                .or_else(|| config.history.clone())
                .ok_or_else(|| CliError::Usage("report needs a history file".into()))?;
            cmd_report(&path)
        }
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str, command: &str) -> CliResult<&'a Path> {
    path.as_deref()
        .ok_or_else(|| CliError::Usage(format!("{command} needs --{flag}")))
}

/// Write through a temp file in the destination directory, then rename.
pub fn write_atomic<F>(path: &Path, body: F) -> CliResult
where
    F: FnOnce(&mut dyn Write) -> CliResult,
{
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush().map_err(io_err)?;
    }
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn emit<F>(out: Option<&Path>, body: F) -> CliResult
where
    F: FnOnce(&mut dyn Write) -> CliResult,
{
    match out {
        Some(path) => write_atomic(path, body),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush().map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io { path: "<output>".into(), source }
}

fn lexicon(config: &RunConfig) -> CliResult<AffixLexicon> {
    let prefixes = match &config.prefixes {
        Some(p) => read_text(p)?,
        None => DEFAULT_PREFIXES.to_string(),
    };
    let suffixes = match &config.suffixes {
        Some(p) => read_text(p)?,
        None => DEFAULT_SUFFIXES.to_string(),
    };
    Ok(AffixLexicon::load(prefixes.as_bytes(), suffixes.as_bytes())?)
}

fn gazetteer(config: &RunConfig) -> CliResult<Gazetteer> {
    let salutations = match &config.gazetteer_salutations {
        Some(p) => read_text(p)?,
        None => DEFAULT_SALUTATIONS.to_string(),
    };
    let followups = match &config.gazetteer_followups {
        Some(p) => read_text(p)?,
        None => DEFAULT_FOLLOWUPS.to_string(),
    };
    Ok(Gazetteer::load(salutations.as_bytes(), followups.as_bytes())?)
}

fn join_or_zero(parts: &[String]) -> String {
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(",")
    }
}

fn cmd_stem(config: &RunConfig, input: Option<&Path>) -> CliResult {
    let lex = lexicon(config)?;
    let source: Box<dyn BufRead> = match input {
        Some(p) if p != Path::new("-") => Box::new(open(p)?),
        _ => Box::new(BufReader::new(io::stdin())),
    };
    let mut words = Vec::new();
    for line in source.lines() {
        let line = line.map_err(|source| CliError::Io { path: input.unwrap_or(Path::new("<stdin>")).to_path_buf(), source })?;
        let word = line.trim();
        if !word.is_empty() {
            words.push(word.to_string());
        }
    }
    emit(config.out.as_deref(), |w| {
        for word in &words {
            let r = lex.stem(word, config.min_stem);
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.original,
                r.stem,
                join_or_zero(&r.stripped_prefixes),
                join_or_zero(&r.stripped_suffixes),
                r.prefix_count,
                r.suffix_count
            )
            .map_err(stdout_err)?;
        }
        Ok(())
    })
}

fn cmd_encode(config: &RunConfig, input: &Path) -> CliResult {
    let raw = read_raw(open(input)?)?;
    let lex = lexicon(config)?;
    let gaz = gazetteer(config)?;
    let freq = build_frequency_table(raw.iter().flatten().map(|t| t.word.as_str()));
    let ctx = FeatureContext { lexicon: &lex, gazetteer: &gaz, frequencies: &freq, min_stem: config.min_stem };
    let sentences = raw
        .iter()
        .map(|s| encode_sentence(s, &ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let corpus = Corpus::new(sentences);
    emit(config.out.as_deref(), |w| Ok(write_column_file(&corpus, w, true)?))
}

fn cmd_train(config: &RunConfig, input: &Path) -> CliResult {
    let template_path = require(&config.template, "template", "train")?;
    let model_path = require(&config.model, "model", "train")?;
    let template = Template::parse(&read_text(template_path)?)?;
    let corpus = read_column_file(open(input)?, true)?;
    let (model, report) = train_with_report(&corpus.sentences, &template, &config.train)?;
    write_atomic(model_path, |w| Ok(save_model(&model, w)?))?;
    eprintln!(
        "trained {} features on {} sentences: {} iterations, {}, gradient norm {:.3e}",
        model.features().len(),
        corpus.len(),
        report.iterations,
        if report.converged { "converged" } else { "iteration limit reached" },
        report.final_gradient_norm
    );
    Ok(())
}

fn cmd_tag(config: &RunConfig, input: &Path) -> CliResult {
    let model_path = require(&config.model, "model", "tag")?;
    let model = load_model(open(model_path)?)?;
    let mut corpus = read_column_file(open(input)?, false)?;
    for sentence in &mut corpus.sentences {
        let tags = tag_sentence(&model, sentence)?;
        for (row, tag) in sentence.iter_mut().zip(tags) {
            row.label = tag;
        }
    }
    emit(config.out.as_deref(), |w| Ok(write_column_file(&corpus, w, true)?))
}

fn cmd_eval(config: &RunConfig, gold: &Path, predicted: &Path) -> CliResult {
    let g = read_column_file(open(gold)?, true)?;
    let p = read_column_file(open(predicted)?, true)?;
    let report: EvalReport = score(&g.labels(), &p.labels(), config.mode)?;
    print!("{}", report.to_table());
    if let Some(out) = &config.out {
        write_atomic(out, |w| {
            writeln!(w, "{}\n{}", EvalReport::CSV_HEADER, report.csv_row()).map_err(stdout_err)
        })?;
    }
    Ok(())
}

fn default_history_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".history.csv");
    out.with_file_name(name)
}

fn cmd_ga_search(config: &RunConfig, input: &Path) -> CliResult {
    let out = require(&config.out, "out", "ga-search")?;
    let history_path = config.history.clone().unwrap_or_else(|| default_history_path(out));
    let catalogue = match &config.catalogue {
        Some(p) => GeneCatalogue::from_template(&Template::parse(&read_text(p)?)?)?,
        None => GeneCatalogue::default(),
    };
    let corpus = read_column_file(open(input)?, true)?;
    let initial = initialize_population(&config.ga, catalogue.len());
    let outcome = run_ga_from(&corpus.sentences, &catalogue, &config.ga, &config.train, initial, |r| {
        eprintln!(
            "generation {:>3}  best {:6.2}  mean {:6.2}",
            r.generation, r.best_fitness, r.mean_fitness
        );
    })?;
    let best = chromosome_to_template(&outcome.best.bits, &catalogue)?;
    write_atomic(out, |w| write!(w, "{best}").map_err(stdout_err))?;
    write_atomic(&history_path, |w| Ok(write_history_csv(&outcome.history, w)?))?;
    let names: Vec<&str> = catalogue
        .genes()
        .iter()
        .filter(|g| outcome.best.bits[g.index])
        .map(|g| g.name.as_str())
        .collect();
    println!("best fitness {:.2} with {} genes: {}", outcome.best.fitness.unwrap_or(0.0), names.len(), names.join(" "));
    println!("{} distinct chromosomes evaluated", outcome.evaluations);
    Ok(())
}

fn cmd_report(path: &Path) -> CliResult {
    let history = read_history_csv(open(path)?)?;
    let (Some(first), Some(last)) = (history.first(), history.last()) else {
        return Err(gacrf_core::Error::Input(format!("{} has no generations", path.display())).into());
    };
    let min = history.iter().map(|r| r.best_fitness).fold(f64::INFINITY, f64::min);
    let max = history.iter().map(|r| r.best_fitness).fold(f64::NEG_INFINITY, f64::max);
    let reached = history.iter().find(|r| r.best_fitness == max).unwrap_or(first);
    println!("generations        {}", history.len());
    println!("min best fitness   {min:.2}");
    println!("max best fitness   {max:.2}");
    println!("final best fitness {:.2}", last.best_fitness);
    println!("max first reached  generation {}", reached.generation);
    println!("best bits          {}", gacrf_core::ga::bits_to_string(&reached.best_bits));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_unknown_subcommand() {
        assert_eq!(dispatch(["gacrf", "--help"]), 0);
        assert_eq!(dispatch(["gacrf", "--version"]), 0);
        assert_eq!(dispatch(["gacrf", "frobnicate"]), 2);
        assert_eq!(dispatch(["gacrf"]), 2);
        assert_eq!(dispatch(["gacrf", "eval", "a", "b", "--mode", "both"]), 2);
    }

    #[test]
    fn missing_input_is_a_data_error() {
        assert_eq!(dispatch(["gacrf", "encode", "/nonexistent/raw.tsv"]), 1);
        assert_eq!(dispatch(["gacrf", "report", "/nonexistent/history.csv"]), 1);
    }

    #[test]
    fn missing_required_flag_is_usage() {
        assert_eq!(dispatch(["gacrf", "train", "x.tsv"]), 2);
        assert_eq!(dispatch(["gacrf", "report"]), 2);
    }

    #[test]
    fn bundled_resources_load() {
        let lex = lexicon(&RunConfig::default()).unwrap();
        assert_eq!(lex.prefixes().len(), 10);
        assert_eq!(lex.suffixes().len(), 53);
        let gaz = gazetteer(&RunConfig::default()).unwrap();
        assert!(gaz.salutations.contains("Mr.") && gaz.followups.contains("Leikai"));
    }

    #[test]
    fn history_path_default() {
        assert_eq!(default_history_path(Path::new("out/best.tpl")), PathBuf::from("out/best.tpl.history.csv"));
    }
}
