//! Linear transition classifier: sparse symbolic features, an averaged
//! perceptron, static and dynamic-oracle training with error exploration,
//! and greedy decoding.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::oracle::{loss, optimal_transitions, GoldReference, OracleError};
use crate::transition::{Configuration, StackElement, Strategy, Transition, DEFAULT_NT_CAP};
use crate::tree::{gold_sequence, max_nt_run, ConstituentTree, Label, Node};

const MODEL_HEADER: &str = "oracle-lab-model v1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("tree {index}: gold derivation needs {needed} consecutive non-terminals, cap is {cap}")]
    OverCap { index: usize, needed: usize, cap: usize },
    #[error("exploration probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Sparse feature counts, ordered for determinism.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVector(BTreeMap<String, u32>);

impl FeatureVector {
    fn add(&mut self, f: String) {
        *self.0.entry(f).or_insert(0) += 1;
    }

    pub fn get(&self, f: &str) -> u32 {
        self.0.get(f).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn width_bucket(w: usize) -> &'static str {
    match w {
        1 => "1",
        2 => "2",
        3 => "3",
        4 => "4",
        _ => "5+",
    }
}

fn describe(e: Option<&StackElement>, tokens: &[String]) -> (String, String, Option<&'static str>) {
    match e {
        None => ("none".into(), "<none>".into(), None),
        Some(StackElement::Item { word: true, l, .. }) => ("word".into(), tokens[*l].clone(), None),
        Some(StackElement::Item { label, l, r, .. }) => ("item".into(), label.to_string(), Some(width_bucket(r - l))),
        Some(StackElement::Open { label, .. }) => ("open".into(), label.to_string(), None),
    }
}

/// Features of a configuration over the sentence `tokens`: the top three
/// stack elements (kind, label or word, width), the next two words, the
/// last two transitions, the nearest open non-terminal and the number of
/// open non-terminals, plus a few conjunctions of these.
pub fn features(config: &Configuration, tokens: &[String]) -> FeatureVector {
    let mut f = FeatureVector::default();
    let stack = config.stack();
    let mut s = Vec::new();
    for k in 0..3 {
        let e = stack.len().checked_sub(k + 1).map(|idx| &stack[idx]);
        let (kind, lab, width) = describe(e, tokens);
        f.add(format!("s{k}.t={kind}"));
        f.add(format!("s{k}.l={kind}:{lab}"));
        if let Some(w) = width {
            f.add(format!("s{k}.w={w}"));
        }
        s.push(format!("{kind}:{lab}"));
    }
    let i = config.i();
    let b0 = tokens.get(i).map(String::as_str).unwrap_or("<end>");
    let b1 = tokens.get(i + 1).map(String::as_str).unwrap_or("<end>");
    f.add(format!("b0={b0}"));
    f.add(format!("b1={b1}"));
    let h: Vec<String> =
        config.history().iter().map(|t| t.as_ref().map(|t| t.to_string()).unwrap_or_else(|| "<none>".into())).collect();
    f.add(format!("h1={}", h[0]));
    f.add(format!("h2={}", h[1]));
    let open = config.open_count();
    f.add(format!("open={}", open.min(6)));
    f.add(format!("run={}", config.nt_run()));
    let (nt, kids) = match stack.iter().rposition(|e| e.is_open()) {
        Some(pos) => (stack[pos].label().to_string(), (stack.len() - pos - 1).min(4)),
        None => ("<none>".into(), 0),
    };
    f.add(format!("nt={nt}"));
    f.add(format!("nt.kids={kids}"));
    f.add("bias".into());
    // conjunctions
    f.add(format!("s0|b0={}|{b0}", s[0]));
    f.add(format!("s0|s1={}|{}", s[0], s[1]));
    f.add(format!("s0|b0|b1={}|{b0}|{b1}", s[0]));
    f.add(format!("h1|b0={}|{b0}", h[0]));
    f.add(format!("h1|s0|b0={}|{}|{b0}", h[0], s[0]));
    f.add(format!("h1|h2|s0={}|{}|{}", h[0], h[1], s[0]));
    f.add(format!("nt|b0={nt}|{b0}"));
    f.add(format!("nt|kids|b0={nt}|{kids}|{b0}"));
    f.add(format!("nt|s0={nt}|{}", s[0]));
    f.add(format!("open|h1|b0={}|{}|{b0}", open.min(6), h[0]));
    f.add(format!("s0|s1|s2={}|{}|{}", s[0], s[1], s[2]));
    // lexical context around the buffer front and the top item
    let b2 = tokens.get(i + 2).map(String::as_str).unwrap_or("<end>");
    let p1 = if i > 0 { tokens[i - 1].as_str() } else { "<start>" };
    f.add(format!("b2={b2}"));
    f.add(format!("p1={p1}"));
    f.add(format!("p1|b0={p1}|{b0}"));
    f.add(format!("b0|b1|b2={b0}|{b1}|{b2}"));
    f.add(format!("h1|b0|b1={}|{b0}|{b1}", h[0]));
    f.add(format!("nt|b0|b1={nt}|{b0}|{b1}"));
    f.add(format!("s0|s1|b0={}|{}|{b0}", s[0], s[1]));
    if let Some(StackElement::Item { l, r, .. }) = stack.last() {
        f.add(format!("s0.first={}", tokens[*l]));
        f.add(format!("s0.last|b0={}|{b0}", tokens[r - 1]));
    }
    f
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationPolicy {
    pub p_explore: f64,
    pub seed: u64,
}

impl ExplorationPolicy {
    pub fn new(p_explore: f64, seed: u64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&p_explore) {
            return Err(ModelError::BadProbability(p_explore));
        }
        Ok(ExplorationPolicy { p_explore, seed })
    }
}

/// Where update targets come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    /// The gold sequence; the parser always follows it.
    Static,
    /// The dynamic oracle's optimal set, with error exploration.
    Dynamic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    strategy: Strategy,
    labels: Vec<Label>,
    classes: Vec<Transition>,
    weights: HashMap<String, Vec<f64>>,
    root_label: Label,
    averaged: bool,
}

impl Model {
    fn empty(strategy: Strategy, mut labels: Vec<Label>, root_label: Label) -> Self {
        labels.sort();
        labels.dedup();
        let mut classes = vec![Transition::Finish, Transition::Reduce, Transition::Shift];
        classes.extend(labels.iter().cloned().map(Transition::NonTerminal));
        Model { strategy, labels, classes, weights: HashMap::new(), root_label, averaged: false }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn is_averaged(&self) -> bool {
        self.averaged
    }

    /// Label used for the root when decoding falls back.
    pub fn root_label(&self) -> &Label {
        &self.root_label
    }

    pub fn weight(&self, feature: &str, t: &Transition) -> f64 {
        let k = self.class(t);
        match (self.weights.get(feature), k) {
            (Some(w), Some(k)) => w[k],
            _ => 0.0,
        }
    }

    fn class(&self, t: &Transition) -> Option<usize> {
        match t {
            Transition::Finish => Some(0),
            Transition::Reduce => Some(1),
            Transition::Shift => Some(2),
            Transition::NonTerminal(x) => self.labels.binary_search(x).ok().map(|k| k + 3),
        }
    }

    pub fn score(&self, fv: &FeatureVector, t: &Transition) -> f64 {
        let Some(k) = self.class(t) else { return f64::NEG_INFINITY };
        fv.iter().map(|(f, n)| self.weights.get(f).map(|w| w[k] * n as f64).unwrap_or(0.0)).sum()
    }

    /// Highest-scoring member of `candidates`; ties go to the earliest,
    /// so candidates must be in tie-break order.
    fn best<'t>(&self, fv: &FeatureVector, candidates: &'t [Transition]) -> &'t Transition {
        let mut best = &candidates[0];
        let mut best_score = self.score(fv, best);
        for t in &candidates[1..] {
            let s = self.score(fv, t);
            if s > best_score {
                best = t;
                best_score = s;
            }
        }
        best
    }

    /// Text serialization; see [`Model::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MODEL_HEADER} {}", self.strategy).unwrap();
        let labels: Vec<&str> = self.labels.iter().map(|l| l.as_str()).collect();
        writeln!(out, "labels: {}", labels.join(" ")).unwrap();
        writeln!(out, "root: {}", self.root_label).unwrap();
        let mut feats: Vec<&String> = self.weights.keys().collect();
        feats.sort();
        for f in feats {
            for (k, w) in self.weights[f].iter().enumerate() {
                if *w != 0.0 {
                    writeln!(out, "{f}\t{}\t{w}", self.classes[k]).unwrap();
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let bad = |line: usize, message: &str| ModelError::Format { line, message: message.to_string() };
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
        let (_, head) = lines.next().ok_or_else(|| bad(1, "empty model file"))?;
        let strategy: Strategy = head
            .strip_prefix(MODEL_HEADER)
            .map(str::trim)
            .ok_or_else(|| bad(1, "missing model header"))?
            .parse()
            .map_err(|_| bad(1, "unknown strategy"))?;
        let (_, lab) = lines.next().ok_or_else(|| bad(2, "missing labels line"))?;
        let labels: Vec<Label> = lab
            .strip_prefix("labels:")
            .ok_or_else(|| bad(2, "expected 'labels:'"))?
            .split_whitespace()
            .map(Label::new)
            .collect();
        if labels.is_empty() {
            return Err(bad(2, "label alphabet is empty"));
        }
        let (_, root) = lines.next().ok_or_else(|| bad(3, "missing root line"))?;
        let root = root.strip_prefix("root:").map(str::trim).ok_or_else(|| bad(3, "expected 'root:'"))?;
        let mut model = Model::empty(strategy, labels, Label::new(root));
        model.averaged = true;
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(bad(no, "expected feature<TAB>transition<TAB>weight"));
            }
            let t: Transition = parts[1].parse().map_err(|_| bad(no, "bad transition"))?;
            let k = model.class(&t).ok_or_else(|| bad(no, "transition label not in alphabet"))?;
            let w: f64 = parts[2].parse().map_err(|_| bad(no, "bad weight"))?;
            if !w.is_finite() {
                return Err(bad(no, "weight is not finite"));
            }
            let n = model.classes.len();
            model.weights.entry(parts[0].to_string()).or_insert_with(|| vec![0.0; n])[k] = w;
        }
        Ok(model)
    }
}

/// Averaged perceptron bookkeeping (lazy averaging with timestamps).
struct Trainer {
    model: Model,
    totals: HashMap<String, Vec<f64>>,
    stamps: HashMap<String, Vec<u64>>,
    clock: u64,
}

impl Trainer {
    fn update(&mut self, fv: &FeatureVector, good: &Transition, bad: &Transition) {
        let n = self.model.classes.len();
        let (Some(g), Some(b)) = (self.model.class(good), self.model.class(bad)) else { return };
        for (f, count) in fv.iter() {
            let w = self.model.weights.entry(f.to_string()).or_insert_with(|| vec![0.0; n]);
            let tot = self.totals.entry(f.to_string()).or_insert_with(|| vec![0.0; n]);
            let st = self.stamps.entry(f.to_string()).or_insert_with(|| vec![0; n]);
            for (k, delta) in [(g, count as f64), (b, -(count as f64))] {
                tot[k] += (self.clock - st[k]) as f64 * w[k];
                st[k] = self.clock;
                w[k] += delta;
            }
        }
    }

    fn finish(mut self) -> Model {
        let clock = self.clock.max(1);
        for (f, w) in self.model.weights.iter_mut() {
            let tot = &self.totals[f];
            let st = &self.stamps[f];
            for k in 0..w.len() {
                let sum = tot[k] + (clock - st[k]) as f64 * w[k];
                w[k] = sum / clock as f64;
            }
        }
        self.model.weights.retain(|_, w| w.iter().any(|x| *x != 0.0));
        self.model.averaged = true;
        self.model
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainStats {
    pub steps: usize,
    pub updates: usize,
    /// Steps where the parser followed a non-optimal prediction.
    pub explored: usize,
    /// Update targets whose application changed the loss; always 0 for a
    /// correct oracle.
    pub bad_targets: usize,
    /// Configurations visited per sentence per epoch, as transition
    /// sequences (recorded when requested).
    pub paths: Vec<Vec<Transition>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub oracle: Oracle,
    pub policy: ExplorationPolicy,
    pub epochs: usize,
    /// Seed for the per-epoch corpus permutation.
    pub seed: u64,
    pub nt_cap: usize,
    /// Keep the transition sequence actually followed for every sentence.
    pub record_paths: bool,
}

impl TrainOptions {
    pub fn new(oracle: Oracle, policy: ExplorationPolicy, epochs: usize, seed: u64) -> Self {
        TrainOptions { oracle, policy, epochs, seed, nt_cap: DEFAULT_NT_CAP, record_paths: false }
    }
}

pub fn train(
    corpus: &[ConstituentTree],
    strategy: Strategy,
    policy: ExplorationPolicy,
    epochs: usize,
    seed: u64,
) -> Result<Model, ModelError> {
    let oracle = if policy.p_explore == 0.0 { Oracle::Static } else { Oracle::Dynamic };
    Ok(train_with_stats(corpus, strategy, &TrainOptions::new(oracle, policy, epochs, seed))?.0)
}

pub fn train_with_stats(
    corpus: &[ConstituentTree],
    strategy: Strategy,
    opts: &TrainOptions,
) -> Result<(Model, TrainStats), ModelError> {
    if corpus.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    ExplorationPolicy::new(opts.policy.p_explore, opts.policy.seed)?;
    for (index, t) in corpus.iter().enumerate() {
        let needed = max_nt_run(t, strategy);
        if needed > opts.nt_cap {
            return Err(ModelError::OverCap { index, needed, cap: opts.nt_cap });
        }
    }
    let mut labels: Vec<Label> = corpus.iter().flat_map(|t| t.labels()).collect();
    labels.sort();
    labels.dedup();
    let root_label = most_common_root(corpus);
    let mut trainer = Trainer {
        model: Model::empty(strategy, labels, root_label),
        totals: HashMap::new(),
        stamps: HashMap::new(),
        clock: 0,
    };
    let mut stats = TrainStats::default();
    let golds: Vec<(GoldReference, Vec<Label>, Vec<Transition>)> = corpus
        .iter()
        .map(|t| (GoldReference::new(t, strategy), t.labels(), gold_sequence(t, strategy)))
        .collect();
    let mut shuffle = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut coin = ChaCha8Rng::seed_from_u64(opts.policy.seed);
    coin.set_stream(1);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    for _ in 0..opts.epochs {
        order.shuffle(&mut shuffle);
        for &idx in &order {
            let tree = &corpus[idx];
            let (gold, gold_labels, gold_seq) = &golds[idx];
            let tokens = tree.tokens();
            let n = tokens.len();
            let mut c = Configuration::with_cap(n, strategy, opts.nt_cap).expect("trees are nonempty");
            let mut path = Vec::new();
            let limit = 4 * step_cap(n, opts.nt_cap);
            let mut step = 0;
            while !c.is_terminal() && step < limit {
                let fv = features(&c, tokens);
                let legal = c.legal_transitions(&trainer.model.labels);
                let predicted = trainer.model.best(&fv, &legal).clone();
                let (target, ok, follow) = match opts.oracle {
                    Oracle::Static => {
                        let t = gold_seq[step].clone();
                        let ok = predicted == t;
                        (t.clone(), ok, t)
                    }
                    Oracle::Dynamic => {
                        let opt = optimal_transitions(&c, gold, gold_labels)?;
                        let target = trainer.model.best(&fv, &opt).clone();
                        let ok = opt.contains(&predicted);
                        let explore = !ok && opts.policy.p_explore > 0.0 && coin.gen_bool(opts.policy.p_explore);
                        if explore {
                            stats.explored += 1;
                        }
                        let follow = if ok || explore { predicted.clone() } else { target.clone() };
                        (target, ok, follow)
                    }
                };
                if opts.oracle == Oracle::Dynamic {
                    let before = loss(&c, gold)?.total;
                    let after = loss(&c.apply(&target).expect("optimal transitions are legal"), gold)?.total;
                    if after != before {
                        stats.bad_targets += 1;
                    }
                }
                trainer.clock += 1;
                if !ok {
                    trainer.update(&fv, &target, &predicted);
                    stats.updates += 1;
                }
                c = c.apply(&follow).expect("followed transition is legal");
                if opts.record_paths {
                    path.push(follow);
                }
                step += 1;
                stats.steps += 1;
            }
            if opts.record_paths {
                stats.paths.push(path);
            }
        }
    }
    Ok((trainer.finish(), stats))
}

fn most_common_root(corpus: &[ConstituentTree]) -> Label {
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for t in corpus {
        if let Node::Internal { label, .. } = t.root() {
            *counts.entry(label.clone()).or_insert(0) += 1;
        }
    }
    // highest count, then alphabetical
    counts.into_iter().fold((Label::new("S"), 0), |acc, (l, n)| if n > acc.1 { (l, n) } else { acc }).0
}

fn step_cap(n: usize, cap: usize) -> usize {
    8 * n + 2 * cap
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutput {
    pub tree: ConstituentTree,
    /// The step cap was hit and the tree was completed by wrapping the
    /// partial analysis under the model's root label.
    pub fell_back: bool,
}

/// Greedy decoding.
pub fn parse(model: &Model, tokens: &[String]) -> Result<ParseOutput, crate::transition::TransitionError> {
    let n = tokens.len();
    let mut c = Configuration::with_cap(n, model.strategy, DEFAULT_NT_CAP)?;
    let cap = step_cap(n, DEFAULT_NT_CAP);
    let mut steps = 0;
    while !c.is_terminal() && steps < cap {
        let fv = features(&c, tokens);
        let legal = c.legal_transitions(&model.labels);
        let t = model.best(&fv, &legal).clone();
        c = c.apply(&t)?;
        steps += 1;
    }
    let fell_back = !c.is_terminal();
    let tree = tree_from_gamma(tokens, c.gamma(), fell_back.then(|| model.root_label.clone()));
    Ok(ParseOutput { tree, fell_back })
}

/// Rebuilds a tree from built constituents (nested by construction). With
/// `root`, a root node over the whole sentence is added and loose words
/// attach to it.
pub fn tree_from_gamma(tokens: &[String], gamma: &[crate::tree::Constituent], root: Option<Label>) -> ConstituentTree {
    let n = tokens.len();
    // (label, l, r, build order); later builds of the same span are outer
    let mut spans: Vec<(Label, usize, usize, usize)> =
        gamma.iter().enumerate().map(|(k, c)| (c.label.clone(), c.l, c.r, k)).collect();
    if let Some(x) = root {
        spans.push((x, 0, n, usize::MAX));
    }
    spans.sort_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)).then(b.3.cmp(&a.3)));
    fn build(spans: &[(Label, usize, usize, usize)], pos: &mut usize, l: usize, r: usize) -> Vec<Node> {
        let mut out = Vec::new();
        let mut k = l;
        while k < r {
            if *pos < spans.len() && spans[*pos].1 == k && spans[*pos].2 <= r {
                let (label, sl, sr, _) = spans[*pos].clone();
                *pos += 1;
                let children = build(spans, pos, sl, sr);
                out.push(Node::Internal { label, children });
                k = sr;
            } else {
                out.push(Node::Leaf(k));
                k += 1;
            }
        }
        out
    }
    let mut pos = 0;
    let mut top = build(&spans, &mut pos, 0, n);
    let root = if top.len() == 1 && matches!(top[0], Node::Internal { .. }) {
        top.pop().expect("one node")
    } else {
        Node::Internal { label: Label::new("S"), children: top }
    };
    ConstituentTree::new(tokens.to_vec(), root).expect("nested spans form a tree")
}
