use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oracle_lab::eval::{arity_breakdown, prf, Report};
use oracle_lab::model::{parse, train_with_stats, ExplorationPolicy, Model, Oracle, TrainOptions};
use oracle_lab::oracle::{loss, GoldReference};
use oracle_lab::transition::{Configuration, Strategy, DEFAULT_NT_CAP};
use oracle_lab::tree::{gold_sequence, max_nt_run, parse_bracketed, parse_corpus, serialize, ConstituentTree, Label};
use oracle_lab::verify::{exhaustive_sweep, sample_corpus, sweep, Ablation, SearchBounds, WalkPolicy};

/// Dynamic-oracle experiments for top-down and in-order transition parsers.
#[derive(Parser, Debug)]
#[command(name = "oracle-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the gold transition sequence of every tree with per-step loss.
    OracleTrace {
        /// Corpus file, one bracketed tree per line.
        file: PathBuf,
        #[command(flatten)]
        strategy: StrategyArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the oracle with brute-force search; exits 1 on any mismatch.
    Check {
        /// Corpus file; omit to use --generate or exhaustive enumeration.
        file: Option<PathBuf>,
        /// Number of random trees to generate instead of reading a file.
        #[arg(long)]
        generate: Option<usize>,
        #[command(flatten)]
        strategy: StrategyArg,
        #[arg(long, value_enum, default_value_t = PolicyArg::RandomWalk)]
        policy: PolicyArg,
        /// Random walks per tree for --policy random-walk.
        #[arg(long, default_value_t = 5)]
        walks: usize,
        #[arg(long, default_value_t = 6)]
        max_tokens: usize,
        #[arg(long, default_value_t = 3)]
        max_consecutive_nt: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model; --explore-p 0 trains on gold sequences only.
    Train {
        corpus: PathBuf,
        #[command(flatten)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0.0)]
        explore_p: f64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_NT_CAP)]
        max_consecutive_nt: usize,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse sentences (one per line; bracketed trees contribute their words).
    Parse {
        model: PathBuf,
        input: PathBuf,
        #[command(flatten)]
        strategy: StrategyArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predicted trees against gold: overall and per arity.
    Eval {
        gold: PathBuf,
        /// One or more prediction files, each scored separately.
        #[arg(required = true)]
        pred: Vec<PathBuf>,
        #[arg(long)]
        tsv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic corpus.
    Gen {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        max_tokens: usize,
        /// Comma-separated label alphabet.
        #[arg(long, default_value = "S,NP,VP,PP")]
        labels: String,
        #[arg(long, default_value_t = DEFAULT_NT_CAP)]
        max_consecutive_nt: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct StrategyArg {
    /// Transition system.
    #[arg(long, value_parser = clap::value_parser!(StrategyName))]
    strategy: StrategyName,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyName {
    TopDown,
    InOrder,
}

impl StrategyArg {
    fn get(&self) -> Strategy {
        match self.strategy {
            StrategyName::TopDown => Strategy::TopDown,
            StrategyName::InOrder => Strategy::InOrder,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    GoldPrefix,
    RandomWalk,
    Exhaustive,
}

/// Failure categories mapped onto exit codes.
enum Failure {
    Mismatch(String),
    Input(String),
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;

/// Independent seeds for the corpus, exploration and shuffling streams.
fn substream(seed: u64, name: &str) -> u64 {
    // FNV-1a over the name, mixed into the seed
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    (seed ^ h).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(29)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_corpus(path: &Path) -> Result<Vec<ConstituentTree>, Failure> {
    parse_corpus(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string()))
        }
    }
}

fn reject_over_cap(corpus: &[ConstituentTree], strategy: Strategy, cap: usize, path: &Path) -> Result<(), Failure> {
    for (k, t) in corpus.iter().enumerate() {
        let needed = max_nt_run(t, strategy);
        if needed > cap {
            return Err(Failure::Input(format!(
                "{}: tree {} needs {needed} consecutive non-terminals, cap is {cap}",
                path.display(),
                k + 1
            )));
        }
    }
    Ok(())
}

fn oracle_trace(file: &Path, strategy: Strategy) -> Result<String, Failure> {
    let corpus = read_corpus(file)?;
    reject_over_cap(&corpus, strategy, DEFAULT_NT_CAP, file)?;
    let mut out = String::new();
    for (k, tree) in corpus.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        out.push_str("step\ttransition\tstack\ti\tloss\tU\tfc\tfa\tooo\n");
        let gold = GoldReference::new(tree, strategy);
        let mut c = Configuration::initial(tree.len(), strategy).map_err(|e| Failure::Input(e.to_string()))?;
        for (step, t) in gold_sequence(tree, strategy).iter().enumerate() {
            c = c.apply(t).map_err(|e| Failure::Input(format!("tree {}: {e}", k + 1)))?;
            let l = loss(&c, &gold).map_err(|e| Failure::Input(e.to_string()))?;
            out.push_str(&format!(
                "{}\t{t}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                step + 1,
                c.stack_summary(),
                c.i(),
                l.total,
                l.unreachable,
                l.false_constituents,
                l.false_open_nts,
                l.out_of_order
            ));
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn check(
    file: Option<&Path>,
    generate: Option<usize>,
    strategy: Strategy,
    policy: PolicyArg,
    walks: usize,
    max_tokens: usize,
    cap: usize,
    seed: u64,
) -> Result<String, Failure> {
    if cap == 0 || max_tokens == 0 {
        return Err(Failure::Input("--max-tokens and --max-consecutive-nt must be positive".into()));
    }
    let walk = match policy {
        PolicyArg::GoldPrefix => WalkPolicy::GoldPrefix,
        PolicyArg::RandomWalk => WalkPolicy::RandomWalk { walks },
        PolicyArg::Exhaustive => WalkPolicy::Exhaustive,
    };
    let labels: Vec<Label> = ["A", "B", "C"].iter().map(|s| Label::new(s)).collect();
    let report = match (file, generate) {
        (Some(_), Some(_)) => return Err(Failure::Input("give either a corpus file or --generate, not both".into())),
        (Some(path), None) => {
            let corpus = read_corpus(path)?;
            if let Some((k, t)) = corpus.iter().enumerate().find(|(_, t)| t.len() > max_tokens) {
                return Err(Failure::Input(format!(
                    "{}: tree {} has {} tokens, --max-tokens is {max_tokens}",
                    path.display(),
                    k + 1,
                    t.len()
                )));
            }
            reject_over_cap(&corpus, strategy, cap, path)?;
            let mut alphabet: Vec<Label> = corpus.iter().flat_map(|t| t.labels()).collect();
            alphabet.sort();
            alphabet.dedup();
            sweep(&corpus, strategy, &SearchBounds::new(max_tokens, cap, alphabet), walk, substream(seed, "walks"))
        }
        (None, Some(count)) => {
            let corpus = sample_corpus(count, max_tokens, cap, &labels, substream(seed, "corpus"));
            if corpus.len() < count {
                return Err(Failure::Input(format!("could not draw {count} trees within the cap {cap}")));
            }
            sweep(&corpus, strategy, &SearchBounds::new(max_tokens, cap, labels), walk, substream(seed, "walks"))
        }
        (None, None) => match policy {
            PolicyArg::Exhaustive if max_tokens <= 3 => exhaustive_sweep(strategy, max_tokens, cap, Ablation::None),
            PolicyArg::Exhaustive => {
                return Err(Failure::Input("exhaustive enumeration supports --max-tokens up to 3".into()))
            }
            _ => return Err(Failure::Input("give a corpus file or --generate N".into())),
        },
    };
    let text = format!("strategy\t{strategy}\n{report}\n");
    if report.passed() {
        Ok(text)
    } else {
        Err(Failure::Mismatch(text))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::OracleTrace { file, strategy, out } => write_out(&out, &oracle_trace(&file, strategy.get())?),
        Command::Check { file, generate, strategy, policy, walks, max_tokens, max_consecutive_nt, seed, out } => {
            let result =
                check(file.as_deref(), generate, strategy.get(), policy, walks, max_tokens, max_consecutive_nt, seed);
            match result {
                Ok(text) => write_out(&out, &text),
                Err(Failure::Mismatch(text)) => {
                    write_out(&out, &text)?;
                    Err(Failure::Mismatch("oracle and brute force disagree".into()))
                }
                Err(e) => Err(e),
            }
        }
        Command::Train { corpus, strategy, explore_p, epochs, seed, max_consecutive_nt, out } => {
            let trees = read_corpus(&corpus)?;
            let policy = ExplorationPolicy::new(explore_p, substream(seed, "exploration"))
                .map_err(|e| Failure::Input(e.to_string()))?;
            let oracle = if explore_p == 0.0 { Oracle::Static } else { Oracle::Dynamic };
            let mut opts = TrainOptions::new(oracle, policy, epochs, substream(seed, "shuffle"));
            opts.nt_cap = max_consecutive_nt;
            let (model, stats) = train_with_stats(&trees, strategy.get(), &opts)
                .map_err(|e| Failure::Input(format!("{}: {e}", corpus.display())))?;
            eprintln!(
                "trained {} trees x {epochs} epochs: {} steps, {} updates, {} explored",
                trees.len(),
                stats.steps,
                stats.updates,
                stats.explored
            );
            write_out(&Some(out), &model.to_text())
        }
        Command::Parse { model, input, strategy, out } => {
            let m = Model::from_text(&read(&model)?).map_err(|e| Failure::Input(format!("{}: {e}", model.display())))?;
            if m.strategy() != strategy.get() {
                return Err(Failure::Input(format!(
                    "{} was trained for {}, not {}",
                    model.display(),
                    m.strategy(),
                    strategy.get()
                )));
            }
            let mut text = String::new();
            for (no, line) in read(&input)?.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let tokens: Vec<String> = if line.starts_with('(') {
                    parse_bracketed(line)
                        .map_err(|e| Failure::Input(format!("{}:{}: {e}", input.display(), no + 1)))?
                        .tokens()
                        .to_vec()
                } else {
                    line.split_whitespace().map(str::to_string).collect()
                };
                let parsed = parse(&m, &tokens).map_err(|e| Failure::Input(e.to_string()))?;
                if parsed.fell_back {
                    eprintln!("{}:{}: step cap reached, partial analysis wrapped under the root", input.display(), no + 1);
                }
                text.push_str(&serialize(&parsed.tree));
                text.push('\n');
            }
            write_out(&out, &text)
        }
        Command::Eval { gold, pred, tsv, out } => {
            let g = read_corpus(&gold)?;
            let mut text = String::new();
            for p in &pred {
                let ps = read_corpus(p)?;
                let overall = prf(&g, &ps).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
                let arity = arity_breakdown(&g, &ps).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
                if pred.len() > 1 {
                    text.push_str(&format!("{}{}\n", if tsv { "# " } else { "== " }, p.display()));
                }
                text.push_str(&Report { overall: &overall, arity: &arity, tsv }.to_string());
            }
            write_out(&out, &text)
        }
        Command::Gen { count, max_tokens, labels, max_consecutive_nt, seed, out } => {
            let alphabet: Vec<Label> =
                labels.split(',').map(str::trim).filter(|s| !s.is_empty()).map(Label::new).collect();
            if alphabet.is_empty() || max_tokens == 0 {
                return Err(Failure::Input("need at least one label and a positive --max-tokens".into()));
            }
            let corpus = sample_corpus(count, max_tokens, max_consecutive_nt, &alphabet, substream(seed, "corpus"));
            if corpus.len() < count {
                return Err(Failure::Input(format!("could not draw {count} trees within the cap {max_consecutive_nt}")));
            }
            let text: String = corpus.iter().map(|t| serialize(t) + "\n").collect();
            write_out(&out, &text)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
