//! Brute-force minimum-loss search and conformance sweeps against the
//! closed-form oracle.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::oracle::{loss, GoldReference, LossBreakdown, OracleError};
use crate::transition::{Configuration, StackElement, Strategy, Transition};
use crate::tree::{gold_sequence, max_nt_run, random_tree, ConstituentTree, Label, Node};

/// Label added to every search alphabet so wrong-label paths get explored.
pub const DISTRACTOR: &str = "XX";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("sentence has {n} tokens, bound is {max}")]
    TooLong { n: usize, max: usize },
    #[error("no terminal configuration reachable within {max_steps} steps")]
    Exhausted { max_steps: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_tokens: usize,
    /// Non-Terminal cap given to configurations a sweep creates.
    pub max_consecutive_nt: usize,
    pub max_steps: usize,
    pub label_alphabet: Vec<Label>,
}

impl SearchBounds {
    /// Default bounds for a gold tree: 6 tokens, 3 consecutive
    /// non-terminals, the tree's labels plus [`DISTRACTOR`].
    pub fn for_tree(tree: &ConstituentTree) -> Self {
        Self::new(6, 3, tree.labels())
    }

    /// Bounds with the step limit derived from the other two: a derivation
    /// has `n` shifts and at most `cap` non-terminals (each with its reduce)
    /// per position, plus the finish.
    pub fn new(max_tokens: usize, max_consecutive_nt: usize, labels: Vec<Label>) -> Self {
        let mut label_alphabet = labels;
        label_alphabet.push(Label::new(DISTRACTOR));
        label_alphabet.sort();
        label_alphabet.dedup();
        let k = max_consecutive_nt.max(1);
        SearchBounds {
            max_tokens,
            max_consecutive_nt: k,
            max_steps: max_tokens * (1 + 2 * k) + 2 * k + 1,
            label_alphabet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub fingerprint: String,
    pub formula: usize,
    pub brute_force: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ConformanceReport {
    pub configs_checked: usize,
    pub mismatches: Vec<Mismatch>,
    pub elapsed: Duration,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn merge(&mut self, other: ConformanceReport) {
        self.configs_checked += other.configs_checked;
        self.mismatches.extend(other.mismatches);
    }
}

impl fmt::Display for ConformanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "configs_checked\t{}", self.configs_checked)?;
        writeln!(f, "mismatches\t{}", self.mismatches.len())?;
        for m in &self.mismatches {
            writeln!(f, "mismatch\t{}\tformula={}\tbrute_force={}", m.fingerprint, m.formula, m.brute_force)?;
        }
        writeln!(f, "elapsed_ms\t{}", self.elapsed.as_millis())?;
        write!(f, "result\t{}", if self.passed() { "pass" } else { "fail" })
    }
}

/// Loss terms that can be switched off to check that the sweeps notice a
/// broken oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ablation {
    #[default]
    None,
    OutOfOrder,
    FalseOpen,
}

impl Ablation {
    pub fn apply(self, l: &LossBreakdown) -> usize {
        match self {
            Ablation::None => l.total,
            Ablation::OutOfOrder => l.total - l.out_of_order,
            Ablation::FalseOpen => l.total - l.false_open_nts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkPolicy {
    /// Every prefix of the gold sequence.
    GoldPrefix,
    /// `walks` uniformly random legal walks per tree.
    RandomWalk { walks: usize },
    /// Every configuration reachable from the initial one.
    Exhaustive,
}

/// Human-readable identity of a configuration, used in reports.
pub fn fingerprint(config: &Configuration) -> String {
    let gamma: Vec<String> = config.gamma().iter().map(|c| format!("{}({},{})", c.label, c.l, c.r)).collect();
    format!(
        "[{}] i={} f={} run={} gamma={{{}}}",
        config.stack_summary(),
        config.i(),
        config.finished() as u8,
        config.nt_run(),
        gamma.join(",")
    )
}

/// Exhaustive minimum-loss search for one gold tree and one system.
///
/// The memo is keyed on the stack with completed-item labels dropped (and,
/// top-down, runs of completed items collapsed), the
/// buffer position, the finish flag, the current Non-Terminal run, and the
/// gold constituents in γ that end at the buffer front. Nothing else in γ
/// can influence the cost of future constituents, since those all end at
/// or after the front.
pub struct BruteForce<'g> {
    gold: &'g GoldReference,
    bounds: SearchBounds,
    memoize: bool,
    alphabet: std::sync::Arc<[Label]>,
    memo: FxHashMap<Vec<u32>, Option<i64>>,
    interned: HashMap<Label, u32>,
    gold_counts: HashMap<(Label, usize, usize), usize>,
    /// Largest right edge of a gold constituent per `(label id, left edge)`.
    gold_reach: FxHashMap<(u32, usize), usize>,
}

impl<'g> BruteForce<'g> {
    pub fn new(gold: &'g GoldReference, bounds: SearchBounds) -> Self {
        Self::with_memo(gold, bounds, true)
    }

    pub fn with_memo(gold: &'g GoldReference, bounds: SearchBounds, memoize: bool) -> Self {
        let mut gold_counts = HashMap::new();
        for c in gold.gamma() {
            *gold_counts.entry((c.label.clone(), c.l, c.r)).or_insert(0) += 1;
        }
        let mut bounds = bounds;
        bounds.label_alphabet.sort();
        bounds.label_alphabet.dedup();
        let mut interned: HashMap<Label, u32> = HashMap::new();
        for l in bounds.label_alphabet.iter().chain(gold.gamma().iter().map(|c| &c.label)) {
            let next = interned.len() as u32 + 1;
            interned.entry(l.clone()).or_insert(next);
        }
        let mut gold_reach: FxHashMap<(u32, usize), usize> = FxHashMap::default();
        for c in gold.gamma() {
            let e = gold_reach.entry((interned[&c.label], c.l)).or_insert(0);
            *e = (*e).max(c.r);
        }
        let alphabet = bounds.label_alphabet.clone().into();
        BruteForce { gold, bounds, memoize, alphabet, memo: FxHashMap::default(), interned, gold_counts, gold_reach }
    }

    pub fn loss(&mut self, config: &Configuration) -> Result<usize, VerifyError> {
        if config.n() > self.bounds.max_tokens {
            return Err(VerifyError::TooLong { n: config.n(), max: self.bounds.max_tokens });
        }
        if config.strategy() != self.gold.strategy() {
            return Err(OracleError::StrategyMismatch { config: config.strategy(), gold: self.gold.strategy() }.into());
        }
        if config.n() != self.gold.n() {
            return Err(OracleError::LengthMismatch { config: config.n(), gold: self.gold.n() }.into());
        }
        let mut built: HashMap<(Label, usize, usize), usize> = HashMap::new();
        for c in config.gamma() {
            *built.entry((c.label.clone(), c.l, c.r)).or_insert(0) += 1;
        }
        let mut matched = 0;
        for (k, &have) in &built {
            matched += have.min(self.gold_counts.get(k).copied().unwrap_or(0));
        }
        let sunk = (self.gold.gamma().len() - matched) + (config.gamma().len() - matched);
        let future = self
            .future(config, self.bounds.max_steps)
            .ok_or(VerifyError::Exhausted { max_steps: self.bounds.max_steps })?;
        Ok((sunk as i64 + future) as usize)
    }

    /// Number of memoized search states.
    pub fn states(&self) -> usize {
        self.memo.len()
    }

    /// Whether an open node `(label, left)` can still close as a gold
    /// constituent; if not, its label and position are irrelevant.
    fn live(&self, label: &Label, left: usize, i: usize) -> bool {
        match self.interned.get(label) {
            Some(&id) => self.gold_reach.get(&(id, left)).map(|&r| r >= i).unwrap_or(false),
            None => false,
        }
    }

    /// Top-down, an open node that can never close as gold and sits
    /// directly on another open node contributes exactly one wrong bracket:
    /// its future children can be handed to the node below, and any
    /// completion without it gets it back by reducing it right before that
    /// node. Removing such nodes shrinks the search without changing minima.
    fn drop_dead_nested(&self, c: &Configuration) -> Option<(Configuration, usize)> {
        if c.strategy() != Strategy::TopDown {
            return None;
        }
        let stack = c.stack();
        let dead: Vec<usize> = (1..stack.len())
            .filter(|&k| match (&stack[k - 1], &stack[k]) {
                (StackElement::Open { .. }, StackElement::Open { label, j }) => !self.live(label, *j, c.i()),
                _ => false,
            })
            .collect();
        if dead.is_empty() {
            return None;
        }
        let mut reduced = c.clone();
        for &k in dead.iter().rev() {
            reduced.remove_stack_element(k);
        }
        Some((reduced, dead.len()))
    }

    fn intern(&mut self, label: &Label) -> u32 {
        let next = self.interned.len() as u32 + 1;
        *self.interned.entry(label.clone()).or_insert(next)
    }

    fn key(&mut self, c: &Configuration) -> Vec<u32> {
        let mut key = vec![c.i() as u32, c.finished() as u32, c.nt_run() as u32];
        let mut below = 0;
        let mut in_run = false;
        for e in c.stack() {
            match e {
                StackElement::Item { l, r, word, .. } => {
                    below = *l;
                    if c.strategy() == Strategy::TopDown {
                        // closings span (j, i), so completed children only
                        // matter through their existence
                        if !in_run {
                            key.extend([1, *word as u32]);
                        }
                        in_run = true;
                    } else {
                        key.extend([1, *l as u32, *r as u32, *word as u32]);
                    }
                }
                StackElement::Open { label, j } => {
                    in_run = false;
                    let left = match c.strategy() {
                        Strategy::TopDown => *j,
                        Strategy::InOrder => below,
                    };
                    if self.live(label, left, c.i()) {
                        let id = self.intern(label);
                        key.extend([2, id, *j as u32]);
                    } else {
                        key.extend([3]);
                    }
                }
            }
        }
        key.push(u32::MAX);
        let mut front: Vec<(u32, u32)> = Vec::new();
        for g in c.gamma().iter().filter(|g| g.r == c.i()) {
            if self.gold_counts.contains_key(&(g.label.clone(), g.l, g.r)) {
                let id = self.intern(&g.label);
                front.push((id, g.l as u32));
            }
        }
        front.sort_unstable();
        for (id, l) in front {
            key.extend([id, l]);
        }
        key
    }

    /// Minimum change in loss over all completions, `None` if no terminal
    /// configuration is reachable within `steps`.
    fn future(&mut self, c: &Configuration, steps: usize) -> Option<i64> {
        if c.is_terminal() {
            return Some(0);
        }
        if steps == 0 {
            return None;
        }
        if let Some((reduced, dropped)) = self.drop_dead_nested(c) {
            return self.future(&reduced, steps.saturating_sub(dropped)).map(|v| v + dropped as i64);
        }
        let key = if self.memoize { Some(self.key(c)) } else { None };
        if let Some(k) = &key {
            if let Some(v) = self.memo.get(k) {
                return *v;
            }
        }
        let mut best: Option<i64> = None;
        let labels = self.alphabet.clone();
        let left = match (c.strategy(), c.stack().last()) {
            (Strategy::InOrder, Some(StackElement::Item { l, .. })) => *l,
            _ => c.i(),
        };
        let mut tried_wrong = false;
        for t in c.legal_transitions(&labels) {
            if let Transition::NonTerminal(x) = &t {
                if !self.live(x, left, c.i()) {
                    if tried_wrong {
                        continue;
                    }
                    tried_wrong = true;
                }
            }
            let mut next = c.clone();
            next.apply_unchecked(&t);
            let delta = if t == Transition::Reduce {
                let new = next.gamma().last().expect("reduce builds a constituent");
                let triple = (new.label.clone(), new.l, new.r);
                let gold = self.gold_counts.get(&triple).copied().unwrap_or(0);
                let have = next.gamma().iter().filter(|g| g.label == new.label && g.l == new.l && g.r == new.r).count();
                if have <= gold {
                    -1
                } else {
                    1
                }
            } else {
                0
            };
            if let Some(rest) = self.future(&next, steps - 1) {
                let v = delta + rest;
                if best.map(|b| v < b).unwrap_or(true) {
                    best = Some(v);
                }
            }
        }
        if let Some(k) = key {
            self.memo.insert(k, best);
        }
        best
    }
}

/// Minimum Hamming loss over every terminal configuration reachable from
/// `config`, found by exhaustive search.
pub fn brute_force_loss(config: &Configuration, gold: &GoldReference, bounds: &SearchBounds) -> Result<usize, VerifyError> {
    BruteForce::new(gold, bounds.clone()).loss(config)
}

pub fn check_config(config: &Configuration, gold: &GoldReference, bounds: &SearchBounds) -> Result<bool, VerifyError> {
    Ok(loss(config, gold)?.total == brute_force_loss(config, gold, bounds)?)
}

/// Checks one configuration with a shared searcher and an optional ablation.
fn check_one(
    search: &mut BruteForce<'_>,
    config: &Configuration,
    ablation: Ablation,
    report: &mut ConformanceReport,
) -> Result<(), VerifyError> {
    let formula = ablation.apply(&loss(config, search.gold)?);
    let brute = search.loss(config)?;
    report.configs_checked += 1;
    if formula != brute {
        report.mismatches.push(Mismatch { fingerprint: fingerprint(config), formula, brute_force: brute });
    }
    Ok(())
}

/// Every configuration reachable from the initial one, in discovery order.
pub fn reachable_configurations(n: usize, strategy: Strategy, cap: usize, labels: &[Label]) -> Vec<Configuration> {
    let start = Configuration::with_cap(n, strategy, cap).expect("n > 0");
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = vec![start.clone()];
    seen.insert(fingerprint(&start));
    let mut head = 0;
    while head < out.len() {
        let c = out[head].clone();
        head += 1;
        for t in c.legal_transitions(labels) {
            let next = c.apply(&t).expect("legal transition applies");
            if seen.insert(fingerprint(&next)) {
                out.push(next);
            }
        }
    }
    out
}

/// Every tree over `n` tokens whose internal nodes have at least two
/// children (a one-token tree is a single labelled node over the word),
/// with the root optionally wrapped in up to `root_chain` unary nodes.
pub fn enumerate_trees(n: usize, labels: &[Label], root_chain: usize) -> Vec<ConstituentTree> {
    fn nodes(l: usize, r: usize, labels: &[Label], root: bool) -> Vec<Node> {
        let mut out = Vec::new();
        if r - l == 1 {
            if root {
                out.extend(labels.iter().map(|x| Node::Internal { label: x.clone(), children: vec![Node::Leaf(l)] }));
            } else {
                out.push(Node::Leaf(l));
            }
            return out;
        }
        for parts in splits(l, r) {
            let mut combos: Vec<Vec<Node>> = vec![Vec::new()];
            for &(a, b) in &parts {
                let options = nodes(a, b, labels, false);
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        options.iter().map(move |o| {
                            let mut c = c.clone();
                            c.push(o.clone());
                            c
                        })
                    })
                    .collect();
            }
            for children in combos {
                out.extend(labels.iter().map(|x| Node::Internal { label: x.clone(), children: children.clone() }));
            }
        }
        out
    }
    // ordered partitions of [l, r) into at least two parts
    fn splits(l: usize, r: usize) -> Vec<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        let inner = r - l - 1;
        for mask in 1u32..(1 << inner) {
            let mut parts = Vec::new();
            let mut start = l;
            for k in 0..inner {
                if mask & (1 << k) != 0 {
                    parts.push((start, l + k + 1));
                    start = l + k + 1;
                }
            }
            parts.push((start, r));
            out.push(parts);
        }
        out
    }
    let tokens: Vec<String> = (0..n).map(|k| format!("w{k}")).collect();
    let mut roots = nodes(0, n, labels, true);
    let mut layer = roots.clone();
    for _ in 0..root_chain {
        layer = layer
            .iter()
            .flat_map(|r| labels.iter().map(move |x| Node::Internal { label: x.clone(), children: vec![r.clone()] }))
            .collect();
        roots.extend(layer.iter().cloned());
    }
    roots.into_iter().map(|r| ConstituentTree::new(tokens.clone(), r).expect("well-formed by construction")).collect()
}

/// One step of the exhaustive plan: every tree from [`enumerate_trees`]
/// with `n` tokens and root chains up to `root_chain`, at `cap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveStep {
    pub n: usize,
    pub root_chain: usize,
    pub cap: usize,
}

/// The exhaustive plan for sentences up to `max_tokens` (at most 3). The
/// reachable space at three tokens and cap 3 runs to millions of
/// configurations per tree, so three-token trees are checked at cap 2.
pub fn exhaustive_plan(max_tokens: usize, cap: usize) -> Vec<ExhaustiveStep> {
    [(1, 2, cap), (2, 1, cap), (3, 0, cap.min(2))]
        .into_iter()
        .filter(|(n, _, _)| *n <= max_tokens)
        .map(|(n, root_chain, cap)| ExhaustiveStep { n, root_chain, cap })
        .collect()
}

/// Runs [`exhaustive_plan`] over two labels (plus the distractor), skipping
/// trees whose gold derivation exceeds the cap.
pub fn exhaustive_sweep(strategy: Strategy, max_tokens: usize, cap: usize, ablation: Ablation) -> ConformanceReport {
    let started = Instant::now();
    let labels = vec![Label::new("A"), Label::new("B")];
    let mut report = ConformanceReport::default();
    for step in exhaustive_plan(max_tokens, cap) {
        // gold trees above the cap cannot be derived at all
        let corpus: Vec<_> = enumerate_trees(step.n, &labels, step.root_chain)
            .into_iter()
            .filter(|t| max_nt_run(t, strategy) <= step.cap)
            .collect();
        let bounds = SearchBounds::new(step.n.max(1), step.cap, labels.clone());
        let mut part = sweep_with(&corpus, strategy, &bounds, WalkPolicy::Exhaustive, 0, ablation);
        for m in &mut part.mismatches {
            m.fingerprint = format!("n={} {}", step.n, m.fingerprint);
        }
        report.merge(part);
    }
    report.elapsed = started.elapsed();
    report
}

/// `count` seeded random trees with 1..=max_tokens tokens (cycling through
/// the lengths) whose gold derivations stay within `cap` consecutive
/// non-terminals in both systems; trees over the cap are skipped. Gives up
/// (returning fewer trees) after a thousand draws per requested tree.
pub fn sample_corpus(count: usize, max_tokens: usize, cap: usize, labels: &[Label], seed: u64) -> Vec<ConstituentTree> {
    let mut corpus = Vec::with_capacity(count);
    let mut s = seed;
    let budget = seed.saturating_add(1000 * count as u64 + 1000);
    while corpus.len() < count && s < budget {
        let n = 1 + (s % max_tokens.max(1) as u64) as usize;
        let t = random_tree(n, labels, s).expect("n > 0 and labels nonempty");
        s += 1;
        if max_nt_run(&t, Strategy::TopDown) <= cap && max_nt_run(&t, Strategy::InOrder) <= cap {
            corpus.push(t);
        }
    }
    corpus
}

fn random_walk(start: &Configuration, labels: &[Label], rng: &mut ChaCha8Rng) -> Vec<Configuration> {
    let mut out = vec![start.clone()];
    loop {
        let c = out.last().expect("nonempty");
        if c.is_terminal() {
            break;
        }
        let legal = c.legal_transitions(labels);
        let t = legal.choose(rng).expect("non-terminal configurations have a legal transition");
        let next = c.apply(t).expect("legal transition applies");
        out.push(next);
    }
    out
}

fn sweep_tree(
    tree: &ConstituentTree,
    strategy: Strategy,
    bounds: &SearchBounds,
    policy: WalkPolicy,
    seed: u64,
    ablation: Ablation,
) -> ConformanceReport {
    let mut report = ConformanceReport::default();
    let gold = GoldReference::new(tree, strategy);
    let mut tree_bounds = bounds.clone();
    tree_bounds.label_alphabet.extend(tree.labels());
    tree_bounds.label_alphabet.sort();
    tree_bounds.label_alphabet.dedup();
    let labels = tree_bounds.label_alphabet.clone();
    let mut search = BruteForce::new(&gold, tree_bounds);
    let n = tree.len();
    let cap = bounds.max_consecutive_nt;
    let start = Configuration::with_cap(n, strategy, cap).expect("n > 0");
    let configs: Vec<Configuration> = match policy {
        WalkPolicy::GoldPrefix => {
            let mut cs = vec![start];
            for t in gold_sequence(tree, strategy) {
                let next = cs.last().expect("nonempty").apply(&t).expect("gold sequence is legal");
                cs.push(next);
            }
            cs
        }
        WalkPolicy::RandomWalk { walks } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..walks).flat_map(|_| random_walk(&start, &labels, &mut rng)).collect()
        }
        WalkPolicy::Exhaustive => reachable_configurations(n, strategy, cap, &labels),
    };
    for c in &configs {
        if let Err(e) = check_one(&mut search, c, ablation, &mut report) {
            report.mismatches.push(Mismatch { fingerprint: format!("{} error: {e}", fingerprint(c)), formula: 0, brute_force: 0 });
        }
    }
    report
}

/// Checks the oracle against brute force on every configuration the policy
/// visits. Trees are processed in parallel; the result does not depend on
/// the thread count.
pub fn sweep(
    corpus: &[ConstituentTree],
    strategy: Strategy,
    bounds: &SearchBounds,
    policy: WalkPolicy,
    seed: u64,
) -> ConformanceReport {
    sweep_with(corpus, strategy, bounds, policy, seed, Ablation::None)
}

/// [`sweep`] with one loss term switched off.
pub fn sweep_with(
    corpus: &[ConstituentTree],
    strategy: Strategy,
    bounds: &SearchBounds,
    policy: WalkPolicy,
    seed: u64,
    ablation: Ablation,
) -> ConformanceReport {
    let started = Instant::now();
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(corpus.len().max(1));
    let mut parts: Vec<(usize, ConformanceReport)> = Vec::new();
    let mut over: Vec<Mismatch> = Vec::new();
    for (idx, t) in corpus.iter().enumerate() {
        let problem = if t.len() > bounds.max_tokens {
            Some(format!("{} tokens exceeds bound {}", t.len(), bounds.max_tokens))
        } else if max_nt_run(t, strategy) > bounds.max_consecutive_nt {
            Some(format!("gold derivation exceeds the non-terminal cap {}", bounds.max_consecutive_nt))
        } else {
            None
        };
        if let Some(p) = problem {
            over.push(Mismatch { fingerprint: format!("tree {idx}: {p}"), formula: 0, brute_force: 0 });
        }
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut local = Vec::new();
                    for (idx, tree) in corpus.iter().enumerate().skip(w).step_by(workers) {
                        if tree.len() > bounds.max_tokens || max_nt_run(tree, strategy) > bounds.max_consecutive_nt {
                            continue;
                        }
                        let tree_seed = seed.wrapping_add((idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                        local.push((idx, sweep_tree(tree, strategy, bounds, policy, tree_seed, ablation)));
                    }
                    local
                })
            })
            .collect();
        for h in handles {
            parts.extend(h.join().expect("sweep worker panicked"));
        }
    });
    parts.sort_by_key(|(idx, _)| *idx);
    let mut report = ConformanceReport { mismatches: over, ..Default::default() };
    for (idx, mut part) in parts {
        for m in &mut part.mismatches {
            m.fingerprint = format!("tree {idx}: {}", m.fingerprint);
        }
        report.merge(part);
    }
    report.elapsed = started.elapsed();
    report
}
