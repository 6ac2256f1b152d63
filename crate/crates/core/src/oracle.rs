//! Dynamic oracles for the top-down and in-order systems.
//!
//! The loss of a configuration is the minimum Hamming distance between the
//! gold bracketing and any tree the configuration can still complete to. It
//! is reported as four addends:
//!
//! * `unreachable`: gold constituents no completion will contain,
//! * `false_constituents`: wrong constituents already built,
//! * `false_open_nts`: open non-terminals that cannot produce any gold
//!   constituent,
//! * `out_of_order`: open non-terminals that could produce a gold
//!   constituent on their own but lose it because of their position
//!   relative to the other open nodes.
//!
//! Every open non-terminal ends up as exactly one constituent, so the last
//! two terms are wrong brackets the parser cannot avoid. The optimum is
//! found by a longest-chain computation over the open nodes (top-down) or
//! a per-anchor choice under the shared Non-Terminal budget (in-order); no
//! search over transition sequences is involved.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::transition::{Configuration, StackElement, Strategy, Transition};
use crate::tree::{constituent_set, gold_nt_order, Constituent, ConstituentTree, Label, NonTerminalNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("configuration uses the {config} system but the gold reference was built for {gold}")]
    StrategyMismatch { config: Strategy, gold: Strategy },
    #[error("sentence length mismatch: configuration has {config} tokens, gold has {gold}")]
    LengthMismatch { config: usize, gold: usize },
}

/// Gold constituents and gold non-terminal order for one sentence.
#[derive(Debug, Clone)]
pub struct GoldReference {
    gamma: Vec<Constituent>,
    alpha: Vec<NonTerminalNode>,
    strategy: Strategy,
    n: usize,
    labels: Vec<Label>,
}

impl GoldReference {
    pub fn new(tree: &ConstituentTree, strategy: Strategy) -> Self {
        GoldReference {
            gamma: constituent_set(tree),
            alpha: gold_nt_order(tree, strategy),
            strategy,
            n: tree.len(),
            labels: tree.labels(),
        }
    }

    pub fn gamma(&self) -> &[Constituent] {
        &self.gamma
    }

    pub fn alpha(&self) -> &[NonTerminalNode] {
        &self.alpha
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Labels occurring in the gold tree, sorted.
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    fn check(&self, config: &Configuration) -> Result<(), OracleError> {
        if config.strategy() != self.strategy {
            return Err(OracleError::StrategyMismatch { config: config.strategy(), gold: self.strategy });
        }
        if config.n() != self.n {
            return Err(OracleError::LengthMismatch { config: config.n(), gold: self.n });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LossBreakdown {
    pub unreachable: usize,
    pub false_constituents: usize,
    pub false_open_nts: usize,
    pub out_of_order: usize,
    pub total: usize,
}

impl LossBreakdown {
    fn from_parts(unreachable: usize, false_constituents: usize, false_open_nts: usize, out_of_order: usize) -> Self {
        LossBreakdown {
            unreachable,
            false_constituents,
            false_open_nts,
            out_of_order,
            total: unreachable + false_constituents + false_open_nts + out_of_order,
        }
    }
}

impl fmt::Display for LossBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.unreachable, self.false_constituents, self.false_open_nts, self.out_of_order
        )
    }
}

/// Length of the longest strictly increasing subsequence, O(n log n).
pub fn lis_length(seq: &[usize]) -> usize {
    // tails[k] = smallest tail of an increasing subsequence of length k+1
    let mut tails: Vec<usize> = Vec::with_capacity(seq.len());
    for &x in seq {
        let pos = tails.partition_point(|&t| t < x);
        if pos == tails.len() {
            tails.push(x);
        } else {
            tails[pos] = x;
        }
    }
    tails.len()
}

// ---------------------------------------------------------------------------

/// Gold constituents not yet built, plus bookkeeping shared by both systems.
struct Pending<'a> {
    /// Unbuilt gold constituents (one entry per copy).
    golds: Vec<&'a Constituent>,
    /// Gold constituents already present in γ.
    built: Vec<&'a Constituent>,
    wrong_built: usize,
}

fn pending<'a>(config: &Configuration, gold: &'a GoldReference) -> Pending<'a> {
    let mut counts: HashMap<(&Label, usize, usize), usize> = HashMap::new();
    for c in config.gamma() {
        *counts.entry(c.triple()).or_insert(0) += 1;
    }
    let mut golds = Vec::new();
    let mut built = Vec::new();
    let mut matched = 0;
    for g in &gold.gamma {
        let have = counts.get(&g.triple()).copied().unwrap_or(0);
        if g.occ < have {
            built.push(g);
            matched += 1;
        } else {
            golds.push(g);
        }
    }
    Pending { golds, built, wrong_built: config.gamma().len() - matched }
}

/// The best completion found by the oracle.
struct Optimum<'a> {
    /// Gold constituents the completion builds in the future.
    future: Vec<&'a Constituent>,
    /// Open non-terminals that close as gold constituents.
    matched_open: usize,
    /// Open non-terminals with no gold constituent they could produce.
    hopeless_open: usize,
    open: usize,
}

fn optimum<'a>(config: &Configuration, gold: &'a GoldReference, pend: &Pending<'a>) -> Optimum<'a> {
    match config.strategy() {
        Strategy::TopDown => top_down_optimum(config, pend),
        Strategy::InOrder => in_order_optimum(config, gold, pend),
    }
    .unwrap_or_else(|| {
        // No completion satisfies the budget; only reachable through
        // configurations the legality guards never produce.
        Optimum { future: Vec::new(), matched_open: 0, hopeless_open: config.open_count(), open: config.open_count() }
    })
}

fn span_contains(outer: (usize, usize), inner: (usize, usize)) -> bool {
    outer.0 <= inner.0 && inner.1 <= outer.1
}

/// Top-down: open node `(X, j)` can only close as `(X, j, r)` with `r`
/// no smaller than `r_min`; closings are nested (upper nodes close first)
/// and the bottom node closes at `n`. Gold constituents starting at the
/// buffer front may still be opened within the Non-Terminal budget, nested
/// in the topmost node that stays open past the front. Everything further
/// right is always buildable.
fn top_down_optimum<'a>(config: &Configuration, pend: &Pending<'a>) -> Option<Optimum<'a>> {
    let n = config.n();
    let i = config.i();
    let open: Vec<(&Label, usize)> = config
        .stack()
        .iter()
        .filter_map(|e| match e {
            StackElement::Open { label, j } => Some((label, *j)),
            _ => None,
        })
        .collect();
    let top_has_child = matches!(config.stack().last(), Some(StackElement::Item { .. }));
    let r_min = if top_has_child { i } else { i + 1 };
    let budget = if i < n { config.nt_cap().saturating_sub(config.nt_run()) } else { 0 };

    // Candidate targets for open nodes, grouped by span.
    let cands: Vec<&Constituent> = pend.golds.iter().copied().filter(|g| g.l <= i && g.r >= r_min).collect();
    let front: Vec<&Constituent> = pend.golds.iter().copied().filter(|g| g.l == i).collect();
    let right: Vec<&Constituent> = pend.golds.iter().copied().filter(|g| g.l > i).collect();

    let mut spans: Vec<(usize, usize)> = cands.iter().map(|g| (g.l, g.r)).collect();
    // outermost first: l ascending, r descending
    spans.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    spans.dedup();
    let members: Vec<Vec<usize>> = spans
        .iter()
        .map(|s| (0..cands.len()).filter(|&c| (cands[c].l, cands[c].r) == *s).collect())
        .collect();

    // State: (span group of the last matched node, used members of that
    // group as a bitmask, group of the last matched node still open past
    // the buffer front). Value: matched node/gold pairs.
    type State = (Option<usize>, u64, Option<usize>);
    let mut best: HashMap<State, Vec<usize>> = HashMap::new();
    best.insert((None, 0, None), Vec::new());
    let mut hopeless = 0;
    for (a, (label, j)) in open.iter().enumerate() {
        let mine: Vec<usize> = (0..cands.len())
            .filter(|&c| cands[c].label == **label && cands[c].l == *j && (a > 0 || cands[c].r == n))
            .collect();
        let any_target = cands.iter().any(|g| g.label == **label && g.l == *j);
        if !any_target {
            hopeless += 1;
            continue;
        }
        let snapshot: Vec<(State, Vec<usize>)> = best.iter().map(|(k, v)| (*k, v.clone())).collect();
        for ((group, mask, outer), chain) in snapshot {
            for &c in &mine {
                let span = (cands[c].l, cands[c].r);
                let g = spans.iter().position(|s| *s == span).expect("span indexed");
                let bit = 1u64 << members[g].iter().position(|&m| m == c).expect("member");
                let outer = if span.1 > i { Some(g) } else { outer };
                let next = match group {
                    Some(cur) if cur == g => {
                        if mask & bit != 0 {
                            continue;
                        }
                        (Some(g), mask | bit, outer)
                    }
                    Some(cur) if !span_contains(spans[cur], span) => continue,
                    _ => (Some(g), bit, outer),
                };
                let mut extended = chain.clone();
                extended.push(c);
                let slot = best.entry(next).or_default();
                if extended.len() > slot.len() || (extended.len() == slot.len() && extended < *slot && !slot.is_empty()) {
                    *slot = extended;
                }
            }
        }
    }

    let mut choice: Option<(usize, Vec<&'a Constituent>, usize)> = None;
    let mut keys: Vec<&State> = best.keys().collect();
    keys.sort();
    for key in keys {
        let chain = &best[key];
        // nodes closing at the front close before new ones are opened, which
        // then nest in the lowest node still open
        let (_, _, outer) = *key;
        let r_top = outer.map(|g| spans[g].1).unwrap_or(n);
        let used: Vec<&Constituent> = chain.iter().map(|&c| cands[c]).collect();
        let mut fresh: Vec<&Constituent> = front
            .iter()
            .copied()
            .filter(|g| g.r <= r_top && !used.iter().any(|u| std::ptr::eq(*u, *g)))
            .collect();
        // outermost first, they are opened in that order
        fresh.sort_by_key(|g| std::cmp::Reverse(g.r));
        fresh.truncate(budget);
        let score = 2 * chain.len() + fresh.len();
        if choice.as_ref().map(|(s, _, _)| score > *s).unwrap_or(true) {
            let mut future = used;
            future.extend(fresh);
            choice = Some((score, future, chain.len()));
        }
    }
    let (_, mut future, matched_open) = choice?;
    future.extend(right);
    Some(Optimum { future, matched_open, hopeless_open: hopeless, open: open.len() })
}

/// In-order: every future constituent starting left of the buffer front
/// begins at an anchor, the left edge of the item under an open node or of
/// the top item. At each anchor the open node closes first and further
/// constituents can only wrap its result, one Non-Terminal each, pushed
/// where the constituent below it ends. Gold constituents at the anchor
/// that are narrower than the closing are lost. Constituents right of the
/// front keep their gold push positions; what they leave of the
/// Non-Terminal budget at each position is shared by all anchors.
fn in_order_optimum<'a>(config: &Configuration, gold: &GoldReference, pend: &Pending<'a>) -> Option<Optimum<'a>> {
    let n = config.n();
    let i = config.i();
    let stack = config.stack();
    let right: Vec<&Constituent> = pend.golds.iter().copied().filter(|g| g.l >= i).collect();
    if config.finished() {
        return Some(Optimum { future: Vec::new(), matched_open: 0, hopeless_open: 0, open: 0 });
    }
    let cap = config.nt_cap();
    // slack[q - i]: pushes still allowed at position q
    let mut slack: Vec<usize> = (i..=n).map(|q| if q == i { cap.saturating_sub(config.nt_run()) } else { cap }).collect();
    for node in gold.alpha.iter().filter(|a| a.l >= i) {
        slack[node.j - i] = slack[node.j - i].saturating_sub(1);
    }

    // (left edge, open label), bottom to top
    let mut anchors: Vec<(usize, Option<&Label>)> = Vec::new();
    for (pos, e) in stack.iter().enumerate() {
        if let StackElement::Open { label, .. } = e {
            let l = match &stack[pos - 1] {
                StackElement::Item { l, .. } => *l,
                StackElement::Open { .. } => unreachable!("in-order non-terminal sits on an item"),
            };
            anchors.push((l, Some(label)));
        }
    }
    let mut top_done = false;
    if let Some(StackElement::Item { l, word, r, .. }) = stack.last() {
        anchors.push((*l, None));
        top_done = !*word && *l == 0 && *r == n;
    }

    let mut hopeless = 0;
    // State: (smallest admissible closing for the next anchor down, pushes
    // used per position). Value: (score, matched open nodes, future golds).
    type Value<'a> = (usize, usize, Vec<&'a Constituent>);
    let mut states: HashMap<(usize, Vec<usize>), Value<'a>> = HashMap::new();
    states.insert((i, vec![0; slack.len()]), (0, 0, Vec::new()));
    for &(p, label) in anchors.iter().rev() {
        let mut here: Vec<&'a Constituent> = pend.golds.iter().copied().filter(|g| g.l == p && g.r >= i).collect();
        here.sort_by_key(|g| g.r);
        if let Some(x) = label {
            if !here.iter().any(|g| g.label == *x) {
                hopeless += 1;
            }
        }
        let must_reach_n = p == 0 && !(label.is_none() && top_done);
        let mut next: HashMap<(usize, Vec<usize>), Value<'a>> = HashMap::new();
        let mut keys: Vec<&(usize, Vec<usize>)> = states.keys().collect();
        keys.sort();
        for key in keys {
            let (need, used) = key;
            let value = &states[key];
            // (closing edge, gold it matches)
            let mut bases: Vec<(usize, Option<&'a Constituent>)> = Vec::new();
            match label {
                None => bases.push((i, None)),
                Some(x) => {
                    for &g in here.iter().filter(|g| g.label == *x && g.r >= *need) {
                        bases.push((g.r, Some(g)));
                    }
                    // a wrong closing must not cross a constituent right of the front
                    let crosses = |r: usize| right.iter().any(|g| g.l < r && r < g.r);
                    bases.extend((*need..=n).filter(|&r| !crosses(r)).map(|r| (r, None)));
                }
            }
            for (base, matched) in bases {
                let pool: Vec<&'a Constituent> = here
                    .iter()
                    .copied()
                    .filter(|g| g.r >= base && !matched.map(|m| std::ptr::eq(m, *g)).unwrap_or(false))
                    .collect();
                for mask in 0u32..(1 << pool.len()) {
                    let mut usage = used.clone();
                    let mut at = base;
                    let mut ok = true;
                    let mut chosen: Vec<&'a Constituent> = Vec::new();
                    for (b, g) in pool.iter().enumerate() {
                        if mask & (1 << b) == 0 {
                            continue;
                        }
                        usage[at - i] += 1;
                        if usage[at - i] > slack[at - i] {
                            ok = false;
                            break;
                        }
                        at = g.r;
                        chosen.push(g);
                    }
                    if !ok || (must_reach_n && at != n) {
                        continue;
                    }
                    let score = value.0 + 2 * matched.is_some() as usize + chosen.len();
                    let entry = next.entry((at, usage)).or_insert_with(|| (0, 0, Vec::new()));
                    if score > entry.0 || (entry.0 == 0 && entry.2.is_empty() && score == 0) {
                        let mut future = value.2.clone();
                        future.extend(matched);
                        future.extend(chosen);
                        *entry = (score, value.1 + matched.is_some() as usize, future);
                    }
                }
            }
        }
        states = next;
    }
    let mut keys: Vec<&(usize, Vec<usize>)> = states.keys().collect();
    keys.sort();
    let best = keys.into_iter().map(|k| &states[k]).fold(None::<&Value<'a>>, |acc, v| match acc {
        Some(a) if a.0 >= v.0 => Some(a),
        _ => Some(v),
    })?;
    let (_, matched_open, mut future) = best.clone();
    future.extend(right);
    let open = anchors.iter().filter(|(_, l)| l.is_some()).count();
    Some(Optimum { future, matched_open, hopeless_open: hopeless, open })
}

// ---------------------------------------------------------------------------

fn evaluate<'a>(config: &Configuration, gold: &'a GoldReference) -> Result<(Pending<'a>, Optimum<'a>), OracleError> {
    gold.check(config)?;
    let pend = pending(config, gold);
    let opt = optimum(config, gold, &pend);
    Ok((pend, opt))
}

/// Gold constituents that an optimal completion of `config` contains
/// (already built ones included).
pub fn reachable_constituents(config: &Configuration, gold: &GoldReference) -> Result<Vec<Constituent>, OracleError> {
    let (pend, opt) = evaluate(config, gold)?;
    let mut out: Vec<Constituent> = pend.built.iter().chain(opt.future.iter()).map(|c| (*c).clone()).collect();
    out.sort();
    Ok(out)
}

/// Open gold-compatible non-terminals that cannot all be closed as gold
/// constituents given their stack order.
pub fn out_of_order(config: &Configuration, gold: &GoldReference) -> Result<usize, OracleError> {
    Ok(loss(config, gold)?.out_of_order)
}

pub fn loss(config: &Configuration, gold: &GoldReference) -> Result<LossBreakdown, OracleError> {
    let (pend, opt) = evaluate(config, gold)?;
    let reachable = pend.built.len() + opt.future.len();
    Ok(LossBreakdown::from_parts(
        gold.gamma.len() - reachable,
        pend.wrong_built,
        opt.hopeless_open,
        opt.open - opt.hopeless_open - opt.matched_open,
    ))
}

/// Legal transitions that keep the loss unchanged, in tie-break order.
pub fn optimal_transitions(
    config: &Configuration,
    gold: &GoldReference,
    labels: &[Label],
) -> Result<Vec<Transition>, OracleError> {
    let base = loss(config, gold)?.total;
    let mut out = Vec::new();
    for t in config.legal_transitions(labels) {
        let next = config.apply(&t).expect("legal transition applies");
        if loss(&next, gold)?.total == base {
            out.push(t);
        }
    }
    Ok(out)
}

/// Open nodes of the stack matched to gold nodes by `(label, j)`, each
/// taking the lowest unused gold rank, bottom to top.
pub fn gold_ranks_on_stack(config: &Configuration, gold: &GoldReference) -> Vec<usize> {
    let mut taken = vec![false; gold.alpha.len()];
    let mut out = Vec::new();
    for nt in config.alpha() {
        if let Some(node) = gold.alpha.iter().find(|g| !taken[g.rank] && g.label == nt.label && g.j == nt.j) {
            taken[node.rank] = true;
            out.push(node.rank);
        }
    }
    out
}
