//! Command-line front end: argument grammar, path resolution and the
//! subcommand drivers behind the `emtk` binary.

mod commands;
mod paths;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};
use emtk_core::corpus::{Delimiter, EmotionLabel};
use emtk_core::features::FeatureMode;

pub use paths::{resolve_shared_path, Workspace, WORKSPACE_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\nnote: default models are trained at startup on the packaged sample gold corpus (124 documents), not on a full gold standard"
);

#[derive(Debug, Parser)]
#[command(name = "emtk", version, long_version = LONG_VERSION, about = "Polarity and emotion classification for technical text")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the polarity of every document in a CSV file.
    Polarity(PolarityArgs),
    /// Train a polarity model from a labeled CSV file.
    PolarityTrain(PolarityTrainArgs),
    /// Train or apply per-emotion classifiers.
    Emotions {
        #[command(subcommand)]
        command: EmotionsCommand,
    },
    /// Time sequential and parallel classification runs.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum EmotionsCommand {
    /// Train the eight solver variants under both sampling regimes.
    Train(EmotionsTrainArgs),
    /// Predict YES/NO for one emotion.
    Classify(EmotionsClassifyArgs),
}

fn mode_parser() -> impl TypedValueParser<Value = FeatureMode> {
    PossibleValuesParser::new(["A", "S", "L", "K"]).map(|s| s.parse::<FeatureMode>().expect("restricted by parser"))
}

fn delimiter_parser() -> impl TypedValueParser<Value = Delimiter> {
    PossibleValuesParser::new(["c", "sc"]).map(|s| s.parse::<Delimiter>().expect("restricted by parser"))
}

fn emotion_parser() -> impl TypedValueParser<Value = EmotionLabel> {
    PossibleValuesParser::new(EmotionLabel::ALL.map(EmotionLabel::as_str))
        .map(|s| s.parse::<EmotionLabel>().expect("restricted by parser"))
}

/// Feature and model options shared by the polarity commands.
#[derive(Debug, Args)]
pub struct PolarityFeatures {
    /// Feature family: A (all), S (semantic), L (lexicon), K (keywords).
    #[arg(short = 'F', value_parser = mode_parser())]
    pub mode: FeatureMode,
    /// Word-space dimension.
    #[arg(long = "vd", default_value_t = 600)]
    pub vector_dim: usize,
    /// Word-space file; a space built from the training data is used otherwise.
    #[arg(short = 'W')]
    pub wordspace: Option<PathBuf>,
    /// Unigram allow-list, one entry per line.
    #[arg(long = "ul")]
    pub unigram_list: Option<PathBuf>,
    /// Bigram allow-list, one entry per line.
    #[arg(long = "bl")]
    pub bigram_list: Option<PathBuf>,
    /// Input delimiter; detected from the first line when omitted.
    #[arg(short = 'd', value_parser = delimiter_parser())]
    pub delimiter: Option<Delimiter>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PolarityArgs {
    #[arg(short = 'i')]
    pub input: PathBuf,
    /// Output CSV with one `id,predicted` row per input row.
    #[arg(long = "oc")]
    pub output: PathBuf,
    /// Input has a gold label column; also write a performance report.
    #[arg(short = 'L')]
    pub labeled: bool,
    /// Model directory written by `polarity-train`.
    #[arg(short = 'm')]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub features: PolarityFeatures,
    /// Worker threads (default: number of cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PolarityTrainArgs {
    /// Labeled `id;label;text` corpus with positive/negative/neutral labels.
    #[arg(short = 'i')]
    pub input: PathBuf,
    /// Directory to write the model into.
    #[arg(short = 'm')]
    pub model: PathBuf,
    /// Add politeness and mood features.
    #[arg(short = 'p')]
    pub politeness: bool,
    #[command(flatten)]
    pub features: PolarityFeatures,
}

#[derive(Debug, Args)]
pub struct EmotionsTrainArgs {
    /// Labeled `id;label;text` corpus with YES/NO labels.
    #[arg(short = 'i')]
    pub input: PathBuf,
    /// Add politeness, mood and modality features.
    #[arg(short = 'p')]
    pub politeness: bool,
    /// Delimiter: c (comma) or sc (semicolon).
    #[arg(short = 'd', value_parser = delimiter_parser())]
    pub delimiter: Delimiter,
    /// Accepted for compatibility; has no effect.
    #[arg(short = 'g')]
    pub legacy_g: bool,
    #[arg(short = 'e', value_parser = emotion_parser())]
    pub emotion: EmotionLabel,
    /// Directory for the training tree (default: the input's directory).
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EmotionsClassifyArgs {
    #[arg(short = 'i')]
    pub input: PathBuf,
    #[arg(short = 'p')]
    pub politeness: bool,
    #[arg(short = 'd', value_parser = delimiter_parser())]
    pub delimiter: Delimiter,
    #[arg(short = 'e', value_parser = emotion_parser())]
    pub emotion: EmotionLabel,
    /// Model file from a training run; needs -f and -o.
    #[arg(short = 'm', requires_all = ["idfs", "ngrams"])]
    pub model: Option<PathBuf>,
    /// The idfs/ directory of the training run.
    #[arg(short = 'f', requires = "model")]
    pub idfs: Option<PathBuf>,
    /// The n-grams/ directory of the training run.
    #[arg(short = 'o', requires = "model")]
    pub ngrams: Option<PathBuf>,
    /// Input has a gold label column; also write a performance report.
    #[arg(short = 'l')]
    pub labeled: bool,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchTask {
    Polarity,
    Emotions,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("corpus").required(true).args(["input", "synthetic"])))]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub task: BenchTask,
    /// Corpus to classify (`id;text`, or `id;label;text` with -L).
    #[arg(short = 'i')]
    pub input: Option<PathBuf>,
    /// Generate a synthetic corpus of this many documents instead.
    #[arg(long)]
    pub synthetic: Option<usize>,
    #[arg(short = 'L')]
    pub labeled: bool,
    /// Comma-separated worker counts.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub workers: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long = "batch-size", default_value_t = emtk_core::pipeline::DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    /// Feature family for the polarity task.
    #[arg(short = 'F', value_parser = mode_parser(), default_value = "A")]
    pub mode: FeatureMode,
    #[arg(long = "vd", default_value_t = 600)]
    pub vector_dim: usize,
    /// Emotion for the emotions task.
    #[arg(short = 'e', value_parser = emotion_parser(), default_value = "love")]
    pub emotion: EmotionLabel,
    /// Where to write the CSV report.
    #[arg(long, default_value = "bench.csv")]
    pub csv: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Rewrites the multi-letter single-dash flags (`-oc`, `-vd`, `-ul`, `-bl`)
/// into their long forms so the parser accepts the documented spelling.
pub fn normalize_args<I, T>(args: I) -> Vec<OsString>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    const LONG: [&str; 4] = ["oc", "vd", "ul", "bl"];
    args.into_iter()
        .map(|a| {
            let a: OsString = a.into();
            let Some(s) = a.to_str() else { return a };
            if let Some(rest) = s.strip_prefix('-').filter(|r| !r.starts_with('-')) {
                let (name, value) = match rest.split_once('=') {
                    Some((n, v)) => (n, Some(v)),
                    None => (rest, None),
                };
                if LONG.contains(&name) {
                    return match value {
                        Some(v) => format!("--{name}={v}").into(),
                        None => format!("--{name}").into(),
                    };
                }
            }
            a
        })
        .collect()
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match Cli::try_parse_from(normalize_args(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn grammar_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn single_dash_long_flags() {
        let args = normalize_args(["emtk", "-oc", "out.csv", "-vd=300", "-i", "-ul", "--oc"]);
        assert_eq!(args, ["emtk", "--oc", "out.csv", "--vd=300", "-i", "--ul", "--oc"].map(OsString::from));
    }

    #[test]
    fn polarity_usage_line_parses() {
        let cli = Cli::try_parse_from(normalize_args([
            "emtk", "polarity", "-F", "A", "-i", "in.csv", "-oc", "out.csv", "-vd", "600", "-W", "dsm.bin", "-L",
            "-ul", "u.txt", "-bl", "b.txt",
        ]))
        .unwrap();
        let Command::Polarity(a) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(a.features.mode, FeatureMode::All);
        assert_eq!(a.features.vector_dim, 600);
        assert!(a.labeled);
        assert_eq!(a.features.bigram_list, Some(PathBuf::from("b.txt")));
    }

    #[test]
    fn emotions_usage_lines_parse() {
        let cli =
            Cli::try_parse_from(["emtk", "emotions", "train", "-i", "f.csv", "-p", "-d", "sc", "-g", "-e", "joy"])
                .unwrap();
        let Command::Emotions { command: EmotionsCommand::Train(a) } = cli.command else { panic!() };
        assert_eq!(
            (a.emotion, a.delimiter, a.politeness, a.legacy_g),
            (EmotionLabel::Joy, Delimiter::Semicolon, true, true)
        );

        let ok = Cli::try_parse_from([
            "emtk", "emotions", "classify", "-i", "f.csv", "-d", "c", "-e", "anger", "-m", "m.model", "-f", "idfs",
            "-o", "n-grams", "-l",
        ]);
        assert!(ok.is_ok());
    }

    #[test]
    fn usage_errors() {
        let missing_trio =
            Cli::try_parse_from(["emtk", "emotions", "classify", "-i", "f.csv", "-d", "c", "-e", "joy", "-m", "x"]);
        assert!(missing_trio.is_err());
        let bad_emotion = Cli::try_parse_from(["emtk", "emotions", "train", "-i", "f.csv", "-d", "sc", "-e", "hate"]);
        let msg = bad_emotion.unwrap_err().to_string();
        assert!(msg.contains("love") && msg.contains("sadness"), "{msg}");
        assert!(Cli::try_parse_from(["emtk", "bench", "--synthetic", "10"]).is_err());
        assert!(Cli::try_parse_from(["emtk", "bench", "--task", "polarity"]).is_err());
    }

    #[test]
    fn version_mentions_default_models() {
        assert!(LONG_VERSION.contains(emtk_core::resources::DEFAULT_MODEL_NOTE));
    }
}
