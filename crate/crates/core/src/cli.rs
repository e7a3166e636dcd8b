//! The `hsdetect` command-line front end.
//!
//! Settings come from an optional TOML config file (`--config`), overridden by
//! command-line flags. Relative paths in the config file are resolved against
//! the file's own directory. Each command writes its export files into the
//! output directory and prints a short summary on stdout.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::clustering::{self, KMeansParams};
use crate::corpus::{load_corpus, Corpus, CorpusFormat, Label};
use crate::cues::{scan_handle, scan_profile, CueHit, CueLexicon};
use crate::error::{Error, ErrorKind, Result};
use crate::eval;
use crate::features::{vectorize, vectorize_text, Family, FeatureConfig, Weighting};
use crate::lexstats::{self, PairOptions, PosLexicon, TargetLexicon};
use crate::perceptron::{self, DEFAULT_EPOCHS};
use crate::sentiment::{self, ReferenceGroups, SentimentLexicon};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_COMPUTATION: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Config => EXIT_CONFIG,
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Computation => EXIT_COMPUTATION,
    }
}

#[derive(Debug, Parser)]
#[command(name = "hsdetect", version, about = "Hate-speech corpus analysis and detection toolkit")]
pub struct Cli {
    /// TOML config file; command-line flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a corpus, writing it back as JSON lines.
    Ingest {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Train an averaged perceptron on a labeled corpus.
    Train {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        training: TrainArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Where to write the model [default: <out>/model.json].
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Label a single text or every document of a corpus with a trained model.
    Predict {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Text to classify; prints label and score.
        #[arg(long, conflicts_with = "corpus")]
        text: Option<String>,
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Stratified k-fold cross-validation.
    Crossval {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        training: TrainArgs,
        #[command(flatten)]
        folds: FoldArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cross-validate the six cumulative feature configurations over shared folds.
    Ablate {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        training: TrainArgs,
        #[command(flatten)]
        folds: FoldArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Chi-square vocabulary bias table.
    Bias {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        bias: BiasArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Biased adjective-noun pairs.
    Pairs {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        bias: BiasArgs,
        /// JSON {"adjectives": [...], "nouns": [...]} overriding the heuristics.
        #[arg(long)]
        pos_lexicon: Option<PathBuf>,
        /// JSON {"race": [...], "gender": [...], "religion": [...], "ideology": [...]}.
        #[arg(long)]
        targets: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spherical k-means over context vectors of the most hate-biased words.
    Cluster {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        bias: BiasArgs,
        /// Number of clusters.
        #[arg(long)]
        clusters: Option<usize>,
        /// How many of the most biased words to cluster.
        #[arg(long)]
        top_words: Option<usize>,
        /// Context window on each side.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Words listed per cluster in the summary.
        #[arg(long)]
        summary_top: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Neighbour counts around a target word.
    Wordtree {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        window: Option<usize>,
        /// Only use documents with this label (hate, safe, unlabeled).
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-label polarity distribution.
    Sentiment {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        lexicon: LexiconArgs,
        /// Polarity magnitude a document must exceed to count as negative/positive.
        #[arg(long, allow_negative_numbers = true)]
        neg_threshold: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Reference counts for keyword groups (regions, gender terms).
    Refs {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        lexicon: LexiconArgs,
        /// JSON object of group name to keyword list.
        #[arg(long)]
        groups: Option<PathBuf>,
        /// Only use documents with this label (hate, safe, unlabeled).
        #[arg(long)]
        label: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Screen usernames and profile texts for cipher, prefix, emoji and keyword cues.
    Cues {
        /// Single username to scan.
        #[arg(long)]
        handle: Option<String>,
        /// Single profile description to scan.
        #[arg(long)]
        profile: Option<String>,
        /// Cue lexicon JSON [default: built-in].
        #[arg(long)]
        cue_lexicon: Option<PathBuf>,
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct CorpusArgs {
    /// Corpus file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Corpus format: tsv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct FeatureArgs {
    /// Comma-separated feature families: ch3,ch2,ch1,w1,w2.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Keep @mentions as features.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub mentions: Option<bool>,
    /// count or binary.
    #[arg(long)]
    pub weighting: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct FoldArgs {
    /// Number of cross-validation folds.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct BiasArgs {
    /// Significance level for the chi-square test.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Minimum total occurrences for a word to be reported.
    #[arg(long)]
    pub min_count: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct LexiconArgs {
    /// SentiWS-format positive word list.
    #[arg(long)]
    pub lexicon_positive: Option<PathBuf>,
    /// SentiWS-format negative word list.
    #[arg(long)]
    pub lexicon_negative: Option<PathBuf>,
}

/// Settings read from the config file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub format: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub k: Option<usize>,
    pub features: Option<Vec<String>>,
    pub include_mentions: Option<bool>,
    pub weighting: Option<String>,
    pub alpha: Option<f64>,
    pub min_count: Option<u64>,
    pub window: Option<usize>,
    pub clusters: Option<usize>,
    pub top_words: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub summary_top: Option<usize>,
    pub target: Option<String>,
    pub label: Option<String>,
    pub neg_threshold: Option<f64>,
    pub lexicon_positive: Option<PathBuf>,
    pub lexicon_negative: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub cue_lexicon: Option<PathBuf>,
    pub pos_lexicon: Option<PathBuf>,
    pub targets: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.corpus,
            &mut cfg.out_dir,
            &mut cfg.model,
            &mut cfg.lexicon_positive,
            &mut cfg.lexicon_negative,
            &mut cfg.groups,
            &mut cfg.cue_lexicon,
            &mut cfg.pos_lexicon,
            &mut cfg.targets,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

fn pick<T: Clone>(flag: Option<T>, config: &Option<T>) -> Option<T> {
    flag.or_else(|| config.clone())
}

fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| {
        Error::Config(format!(
            "missing `{name}`: pass --{} or set `{name}` in the config file",
            name.replace('_', "-")
        ))
    })
}

fn parse_label(s: &str) -> Result<Label> {
    s.parse().map_err(|e: Error| Error::Config(e.to_string()))
}

struct Context {
    cfg: RunConfig,
}

impl Context {
    fn corpus(&self, args: &CorpusArgs) -> Result<Corpus> {
        let path = require(pick(args.corpus.clone(), &self.cfg.corpus), "corpus")?;
        let format = match pick(args.format.clone(), &self.cfg.format) {
            Some(f) => f.parse::<CorpusFormat>()?,
            None if path.extension().is_some_and(|e| e == "jsonl") => CorpusFormat::Jsonl,
            None => CorpusFormat::Tsv,
        };
        load_corpus(&path, format)
    }

    /// Evaluation needs gold labels, so unlabeled documents are set aside.
    fn labeled_corpus(&self, args: &CorpusArgs) -> Result<Corpus> {
        let corpus = self.corpus(args)?;
        let skipped = corpus.count_label(Label::Unlabeled);
        if skipped > 0 {
            log::info!("skipping {skipped} unlabeled documents");
        }
        Corpus::new(corpus.iter().filter(|d| d.label.is_labeled()).cloned().collect())
    }

    fn out_dir(&self, args: &OutArgs) -> Result<PathBuf> {
        let dir = pick(args.out.clone(), &self.cfg.out_dir).unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }

    fn features(&self, args: &FeatureArgs) -> Result<FeatureConfig> {
        let families = match pick(args.features.clone(), &self.cfg.features) {
            Some(names) => names
                .iter()
                .filter(|n| !n.trim().is_empty())
                .map(|n| Family::parse(n))
                .collect::<Result<Vec<_>>>()?,
            None => Family::ALL.to_vec(),
        };
        let weighting = match pick(args.weighting.clone(), &self.cfg.weighting).as_deref() {
            None | Some("count") => Weighting::Count,
            Some("binary") => Weighting::Binary,
            Some(other) => return Err(Error::Config(format!("unknown weighting `{other}`"))),
        };
        let mentions = pick(args.mentions, &self.cfg.include_mentions).unwrap_or(false);
        FeatureConfig::new(&families, mentions, weighting)
    }

    fn epochs(&self, args: &TrainArgs) -> usize {
        pick(args.epochs, &self.cfg.epochs).unwrap_or(DEFAULT_EPOCHS)
    }

    fn seed(&self, flag: Option<u64>) -> u64 {
        pick(flag, &self.cfg.seed).unwrap_or(0)
    }

    fn k(&self, args: &FoldArgs) -> usize {
        pick(args.k, &self.cfg.k).unwrap_or(10)
    }

    fn alpha(&self, args: &BiasArgs) -> f64 {
        pick(args.alpha, &self.cfg.alpha).unwrap_or(lexstats::DEFAULT_ALPHA)
    }

    fn min_count(&self, args: &BiasArgs) -> u64 {
        pick(args.min_count, &self.cfg.min_count).unwrap_or(lexstats::DEFAULT_MIN_COUNT)
    }

    fn lexicon(&self, args: &LexiconArgs) -> Result<SentimentLexicon> {
        let pos = require(
            pick(args.lexicon_positive.clone(), &self.cfg.lexicon_positive),
            "lexicon_positive",
        )?;
        let neg = require(
            pick(args.lexicon_negative.clone(), &self.cfg.lexicon_negative),
            "lexicon_negative",
        )?;
        sentiment::load_lexicon(pos, neg)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut text = contents.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output")
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Runs a parsed command line,
/// writing the human-readable summary to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = Context { cfg };
    let say = |stdout: &mut dyn std::io::Write, line: String| {
        writeln!(stdout, "{line}").map_err(|e| Error::io("<stdout>", e))
    };

    match cli.command {
        Command::Ingest { input, out } => {
            let corpus = ctx.corpus(&input)?;
            let dir = ctx.out_dir(&out)?;
            let mut buf = Vec::new();
            corpus.write_jsonl(&mut buf).map_err(|e| Error::io(&dir, e))?;
            write_file(&dir, "corpus.jsonl", &String::from_utf8(buf).expect("utf-8 json"))?;
            let counts: BTreeMap<&str, usize> = [Label::Hate, Label::Safe, Label::Unlabeled]
                .into_iter()
                .map(|l| (l.as_str(), corpus.count_label(l)))
                .collect();
            let tokens: usize = corpus.iter().map(|d| d.tokens().len()).sum();
            #[derive(Serialize)]
            struct Summary<'a> {
                documents: usize,
                labels: BTreeMap<&'a str, usize>,
                tokens: usize,
            }
            write_file(
                &dir,
                "ingest.json",
                &to_json(&Summary {
                    documents: corpus.len(),
                    labels: counts.clone(),
                    tokens,
                }),
            )?;
            say(
                stdout,
                format!(
                    "{} documents ({} hate, {} safe, {} unlabeled), {} tokens",
                    corpus.len(),
                    counts["hate"],
                    counts["safe"],
                    counts["unlabeled"],
                    tokens
                ),
            )?;
        }

        Command::Train {
            input,
            features,
            training,
            out,
            model,
        } => {
            let corpus = ctx.corpus(&input)?;
            let config = ctx.features(&features)?;
            let labeled: Vec<_> = corpus.iter().filter(|d| d.label.is_labeled()).collect();
            let xs: Vec<_> = labeled.iter().map(|d| vectorize(d, &config)).collect();
            let ys: Vec<_> = labeled.iter().map(|d| d.label).collect();
            let m = perceptron::train(&xs, &ys, ctx.epochs(&training), ctx.seed(training.seed), config)?;
            let path = match pick(model, &ctx.cfg.model) {
                Some(p) => p,
                None => ctx.out_dir(&out)?.join("model.json"),
            };
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            perceptron::save_model(&m, &path)?;
            say(
                stdout,
                format!(
                    "trained on {} documents ({}), {} features, {} updates -> {}",
                    xs.len(),
                    config,
                    m.averaged_weights().len(),
                    m.update_count(),
                    path.display()
                ),
            )?;
        }

        Command::Predict {
            model,
            text,
            input,
            out,
        } => {
            let path = require(pick(model, &ctx.cfg.model), "model")?;
            let m = perceptron::load_model(&path)?;
            if let Some(text) = text {
                let p = m.predict(&vectorize_text(&text, m.feature_config()));
                say(stdout, format!("{}\t{}", p.label, p.score))?;
            } else {
                let corpus = ctx.corpus(&input)?;
                let dir = ctx.out_dir(&out)?;
                let mut tsv = String::from("id\tgold\tpredicted\tscore\n");
                for doc in &corpus {
                    let p = m.predict(&vectorize(doc, m.feature_config()));
                    tsv.push_str(&format!("{}\t{}\t{}\t{}\n", doc.id, doc.label, p.label, p.score));
                }
                write_file(&dir, "predictions.tsv", &tsv)?;
                let fraction = eval::evaluate_domain(&m, &corpus)?;
                say(
                    stdout,
                    format!(
                        "{} documents, {:.2}% predicted hate",
                        corpus.len(),
                        100.0 * fraction
                    ),
                )?;
            }
        }

        Command::Crossval {
            input,
            features,
            training,
            folds,
            out,
        } => {
            let corpus = ctx.labeled_corpus(&input)?;
            let config = ctx.features(&features)?;
            let report = eval::cross_validate(
                &corpus,
                &config,
                ctx.k(&folds),
                ctx.epochs(&training),
                ctx.seed(training.seed),
            )?;
            let dir = ctx.out_dir(&out)?;
            write_file(&dir, "crossval.json", &report.to_json())?;
            write_file(&dir, "crossval.tsv", &report.to_tsv())?;
            say(stdout, report.summary())?;
        }

        Command::Ablate {
            input,
            training,
            folds,
            out,
        } => {
            let corpus = ctx.labeled_corpus(&input)?;
            let table = eval::ablation(
                &corpus,
                &FeatureConfig::ablation_rows(),
                ctx.k(&folds),
                ctx.epochs(&training),
                ctx.seed(training.seed),
            )?;
            let dir = ctx.out_dir(&out)?;
            let tsv = table.to_tsv();
            write_file(&dir, "ablation.tsv", &tsv)?;
            write_file(&dir, "ablation.json", &table.to_json())?;
            write!(stdout, "{tsv}").map_err(|e| Error::io("<stdout>", e))?;
        }

        Command::Bias { input, bias, out } => {
            let corpus = ctx.corpus(&input)?;
            let entries = lexstats::biased_words(&corpus, ctx.alpha(&bias), ctx.min_count(&bias))?;
            let dir = ctx.out_dir(&out)?;
            write_file(&dir, "bias.tsv", &lexstats::bias_table_tsv(&entries))?;
            write_file(&dir, "bias.json", &to_json(&entries))?;
            let significant = entries.iter().filter(|e| e.is_significantly_hate_biased()).count();
            say(
                stdout,
                format!(
                    "{} words reported, {} significantly hate-biased",
                    entries.len(),
                    significant
                ),
            )?;
        }

        Command::Pairs {
            input,
            bias,
            pos_lexicon,
            targets,
            out,
        } => {
            let corpus = ctx.corpus(&input)?;
            let entries = lexstats::biased_words(&corpus, ctx.alpha(&bias), ctx.min_count(&bias))?;
            let mut options = PairOptions::default();
            if let Some(p) = pick(pos_lexicon, &ctx.cfg.pos_lexicon) {
                options.pos = read_json::<PosLexicon>(&p)?.normalized();
            }
            if let Some(p) = pick(targets, &ctx.cfg.targets) {
                let raw: TargetLexicon = read_json(&p)?;
                options.targets = raw
                    .into_iter()
                    .map(|(t, kws)| (t, kws.iter().map(|k| crate::corpus::fold_case(k)).collect()))
                    .collect();
            }
            let pairs = lexstats::mine_pairs_with(&corpus, &entries, &options);
            let dir = ctx.out_dir(&out)?;
            write_file(&dir, "pairs.tsv", &lexstats::pair_table_tsv(&pairs))?;
            write_file(&dir, "pairs.json", &to_json(&pairs))?;
            say(stdout, format!("{} biased adjective-noun pairs", pairs.len()))?;
        }

        Command::Cluster {
            input,
            bias,
            clusters,
            top_words,
            window,
            seed,
            max_iter,
            tol,
            summary_top,
            out,
        } => {
            let corpus = ctx.corpus(&input)?;
            let entries = lexstats::biased_words(&corpus, ctx.alpha(&bias), ctx.min_count(&bias))?;
            let n = pick(top_words, &ctx.cfg.top_words).unwrap_or(clustering::DEFAULT_TOP_WORDS);
            let words = clustering::top_biased_words(&entries, n);
            if words.is_empty() {
                return Err(Error::Computation(
                    "no significantly hate-biased words to cluster".into(),
                ));
            }
            let window = pick(window, &ctx.cfg.window).unwrap_or(clustering::DEFAULT_WINDOW);
            let set = clustering::context_vectors(&corpus, &words, window)?;
            let params = KMeansParams {
                k: pick(clusters, &ctx.cfg.clusters).unwrap_or(clustering::DEFAULT_CLUSTERS),
                seed: ctx.seed(seed),
                max_iter: pick(max_iter, &ctx.cfg.max_iter).unwrap_or(clustering::DEFAULT_MAX_ITER),
                tol: pick(tol, &ctx.cfg.tol).unwrap_or(clustering::DEFAULT_TOL),
            };
            let model = clustering::spherical_kmeans(&set.vectors, params)?;
            let freq = lexstats::corpus_frequencies(&corpus);
            let top = pick(summary_top, &ctx.cfg.summary_top).unwrap_or(10);
            let summary = clustering::cluster_summary(&model, &freq, top);
            let dir = ctx.out_dir(&out)?;
            write_file(&dir, "clusters.json", &clustering::summary_json(model.k, &summary))?;
            say(
                stdout,
                format!(
                    "{} words in {} clusters (objective {:.4}, {} iterations, {} words without context)",
                    model.assignment.len(),
                    model.k,
                    model.objective,
                    model.iterations,
                    set.dropped.len()
                ),
            )?;
            for (i, words) in summary.iter().enumerate() {
                let list: Vec<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
                say(stdout, format!("  cluster {i}: {}", list.join(", ")))?;
            }
        }

        Command::Wordtree {
            input,
            target,
            window,
            label,
            out,
        } => {
            let mut corpus = ctx.corpus(&input)?;
            if let Some(l) = pick(label, &ctx.cfg.label) {
                corpus = corpus.with_label(parse_label(&l)?);
            }
            let target = require(pick(target, &ctx.cfg.target), "target")?;
            let window = pick(window, &ctx.cfg.window).unwrap_or(clustering::DEFAULT_WINDOW);
            let tree = lexstats::word_tree(&corpus, &target, window)?;
            let dir = ctx.out_dir(&out)?;
            write_file(&dir, "wordtree.json", &tree.to_json())?;
            say(
                stdout,
                format!(
                    "`{}`: {} occurrences, {} distinct words before, {} after",
                    tree.target,
                    tree.occurrences,
                    tree.before.len(),
                    tree.after.len()
                ),
            )?;
        }

        Command::Sentiment {
            input,
            lexicon,
            neg_threshold,
            out,
        } => {
            let corpus = ctx.corpus(&input)?;
            let lex = ctx.lexicon(&lexicon)?;
            let t = pick(neg_threshold, &ctx.cfg.neg_threshold).unwrap_or(0.0);
            let dist = sentiment::polarity_distribution(&corpus, &lex, t);
            let dir = ctx.out_dir(&out)?;
            let tsv = sentiment::distribution_tsv(&dist);
            write_file(&dir, "sentiment.tsv", &tsv)?;
            let json: BTreeMap<&str, _> = dist.iter().map(|(l, s)| (l.as_str(), s)).collect();
            write_file(&dir, "sentiment.json", &to_json(&json))?;
            write!(stdout, "{tsv}").map_err(|e| Error::io("<stdout>", e))?;
        }

        Command::Refs {
            input,
            lexicon,
            groups,
            label,
            out,
        } => {
            let mut corpus = ctx.corpus(&input)?;
            if let Some(l) = pick(label, &ctx.cfg.label) {
                corpus = corpus.with_label(parse_label(&l)?);
            }
            let lex = ctx.lexicon(&lexicon)?;
            let groups = ReferenceGroups::load(require(pick(groups, &ctx.cfg.groups), "groups")?)?;
            let counts = sentiment::count_references(&corpus, &groups, &lex);
            let dir = ctx.out_dir(&out)?;
            let tsv = sentiment::references_tsv(&counts);
            write_file(&dir, "refs.tsv", &tsv)?;
            write_file(&dir, "refs.json", &to_json(&counts))?;
            write!(stdout, "{tsv}").map_err(|e| Error::io("<stdout>", e))?;
        }

        Command::Cues {
            handle,
            profile,
            cue_lexicon,
            input,
            out,
        } => {
            let lex = match pick(cue_lexicon, &ctx.cfg.cue_lexicon) {
                Some(p) => CueLexicon::load(p)?,
                None => CueLexicon::builtin(),
            };
            if handle.is_some() || profile.is_some() {
                #[derive(Serialize)]
                struct Single {
                    #[serde(skip_serializing_if = "Option::is_none")]
                    handle: Option<Vec<CueHit>>,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    profile: Option<Vec<CueHit>>,
                }
                let result = Single {
                    handle: handle.map(|h| scan_handle(&h, &lex)),
                    profile: profile.map(|p| scan_profile(&p, &lex)),
                };
                say(stdout, to_json(&result))?;
            } else {
                let corpus = ctx.corpus(&input)?;
                let mut by_handle: BTreeMap<&str, usize> = BTreeMap::new();
                for doc in &corpus {
                    if let Some(h) = doc.author_handle.as_deref() {
                        *by_handle.entry(h).or_insert(0) += 1;
                    }
                }
                let mut tsv = String::from("handle\tdocuments\tcategory\tmatched\texpansion_or_keyword\n");
                let mut flagged = 0;
                for (h, docs) in &by_handle {
                    let hits = scan_handle(h, &lex);
                    if !hits.is_empty() {
                        flagged += 1;
                    }
                    for hit in hits {
                        let cat = serde_json::to_value(hit.category).expect("enum serializes");
                        tsv.push_str(&format!(
                            "{h}\t{docs}\t{}\t{}\t{}\n",
                            cat.as_str().unwrap_or_default(),
                            hit.matched,
                            hit.expansion_or_keyword
                        ));
                    }
                }
                let dir = ctx.out_dir(&out)?;
                write_file(&dir, "cues.tsv", &tsv)?;
                say(
                    stdout,
                    format!("{flagged} of {} author handles carry cues", by_handle.len()),
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(RunConfig::parse("seed = 3\nk = 10\n").is_ok());
        let err = RunConfig::parse("sed = 3\n").unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
    }

    #[test]
    fn flags_override_config() {
        let ctx = Context {
            cfg: RunConfig {
                k: Some(4),
                epochs: Some(9),
                features: Some(vec!["w1".into()]),
                ..Default::default()
            },
        };
        assert_eq!(ctx.k(&FoldArgs { k: None }), 4);
        assert_eq!(ctx.k(&FoldArgs { k: Some(7) }), 7);
        assert_eq!(ctx.epochs(&TrainArgs::default()), 9);
        let f = ctx.features(&FeatureArgs::default()).unwrap();
        assert_eq!(f.to_string(), "W1");
        let f = ctx
            .features(&FeatureArgs {
                features: Some(vec!["ch3".into(), "ch2".into()]),
                mentions: Some(true),
                weighting: Some("binary".into()),
            })
            .unwrap();
        assert_eq!(f.to_string(), "CH3+CH2+@ (binary)");
        assert!(ctx
            .features(&FeatureArgs {
                features: Some(vec!["ch4".into()]),
                ..Default::default()
            })
            .is_err());
    }

    #[test]
    fn missing_inputs_are_config_errors() {
        let ctx = Context {
            cfg: RunConfig::default(),
        };
        let err = ctx.corpus(&CorpusArgs::default()).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
        let err = ctx
            .corpus(&CorpusArgs {
                corpus: Some("/nonexistent/corpus.tsv".into()),
                format: None,
            })
            .unwrap_err();
        assert_eq!(exit_code(&err), EXIT_INPUT);
    }
}
