//! Parser configurations and the top-down / in-order transition systems.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::tree::{Constituent, Label};

/// Default cap on Non-Terminal transitions issued without an intervening
/// Shift.
pub const DEFAULT_NT_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    TopDown,
    InOrder,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::TopDown => "top-down",
            Strategy::InOrder => "in-order",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top-down" => Ok(Strategy::TopDown),
            "in-order" => Ok(Strategy::InOrder),
            other => Err(format!("unknown strategy '{}' (expected top-down or in-order)", other)),
        }
    }
}

/// Ordering is the tie-break order used by the oracle and the model:
/// Finish < Reduce < Shift < NonTerminal (labels lexicographic).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    Finish,
    Reduce,
    Shift,
    NonTerminal(Label),
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Shift => f.write_str("SH"),
            Transition::Reduce => f.write_str("RE"),
            Transition::Finish => f.write_str("FI"),
            Transition::NonTerminal(x) => write!(f, "NT_{}", x),
        }
    }
}

impl FromStr for Transition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SH" => Ok(Transition::Shift),
            "RE" => Ok(Transition::Reduce),
            "FI" => Ok(Transition::Finish),
            _ => match s.strip_prefix("NT_") {
                Some(label) if !label.is_empty() => Ok(Transition::NonTerminal(Label::new(label))),
                _ => Err(format!("unknown transition '{}'", s)),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StackElement {
    /// A shifted word or an already-built constituent spanning `[l, r)`.
    Item { label: Label, l: usize, r: usize, word: bool },
    /// A pending non-terminal pushed when the buffer pointer was `j`.
    Open { label: Label, j: usize },
}

impl StackElement {
    pub fn is_open(&self) -> bool {
        matches!(self, StackElement::Open { .. })
    }

    pub fn label(&self) -> &Label {
        match self {
            StackElement::Item { label, .. } | StackElement::Open { label, .. } => label,
        }
    }
}

impl fmt::Display for StackElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackElement::Item { label, l, r, .. } => write!(f, "{}[{},{}]", label, l, r),
            StackElement::Open { label, j } => write!(f, "{}(open,{})", label, j),
        }
    }
}

/// Open non-terminal `(X, j)` as seen in α.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpenNt {
    pub label: Label,
    pub j: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransitionError {
    #[error("{transition} is illegal here: {reason}")]
    Illegal { transition: Transition, reason: &'static str },
    #[error("cannot parse an empty sentence")]
    EmptySentence,
}

/// Parser state ⟨Σ, i, f, γ, α⟩. α is not stored separately: it is exactly
/// the open non-terminals of the stack, see [`Configuration::alpha`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    strategy: Strategy,
    n: usize,
    stack: Vec<StackElement>,
    i: usize,
    finished: bool,
    gamma: Vec<Constituent>,
    nt_run: usize,
    nt_cap: usize,
    history: [Option<Transition>; 2],
    words: Arc<[Label]>,
}

impl Configuration {
    pub fn initial(n: usize, strategy: Strategy) -> Result<Self, TransitionError> {
        Self::with_cap(n, strategy, DEFAULT_NT_CAP)
    }

    /// Initial configuration with a custom consecutive Non-Terminal cap
    /// (at least 1).
    pub fn with_cap(n: usize, strategy: Strategy, nt_cap: usize) -> Result<Self, TransitionError> {
        if n == 0 {
            return Err(TransitionError::EmptySentence);
        }
        Ok(Configuration {
            strategy,
            n,
            stack: Vec::new(),
            i: 0,
            finished: false,
            gamma: Vec::new(),
            nt_run: 0,
            nt_cap: nt_cap.max(1),
            history: [None, None],
            words: (0..n).map(|k| Label::new(&format!("w{k}"))).collect(),
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stack(&self) -> &[StackElement] {
        &self.stack
    }

    /// Next buffer position.
    pub fn i(&self) -> usize {
        self.i
    }

    pub fn finished(&self) -> bool {
        self.finished
    }

    /// Constituents built so far (words excluded).
    pub fn gamma(&self) -> &[Constituent] {
        &self.gamma
    }

    /// Open non-terminals, bottom to top.
    pub fn alpha(&self) -> Vec<OpenNt> {
        self.stack
            .iter()
            .filter_map(|e| match e {
                StackElement::Open { label, j } => Some(OpenNt { label: label.clone(), j: *j }),
                _ => None,
            })
            .collect()
    }

    pub fn open_count(&self) -> usize {
        self.stack.iter().filter(|e| e.is_open()).count()
    }

    /// Non-Terminal transitions since the last Shift.
    pub fn nt_run(&self) -> usize {
        self.nt_run
    }

    pub fn nt_cap(&self) -> usize {
        self.nt_cap
    }

    /// Last two transitions, most recent first.
    pub fn history(&self) -> &[Option<Transition>; 2] {
        &self.history
    }

    fn top_is_item(&self) -> bool {
        matches!(self.stack.last(), Some(StackElement::Item { .. }))
    }

    fn single_constituent(&self) -> bool {
        matches!(self.stack.as_slice(), [StackElement::Item { word: false, l: 0, r, .. }] if *r == self.n)
    }

    pub fn is_terminal(&self) -> bool {
        match self.strategy {
            Strategy::TopDown => self.i == self.n && self.single_constituent(),
            Strategy::InOrder => self.finished,
        }
    }

    /// Checks the side conditions of `t`, naming the one that fails.
    pub fn check(&self, t: &Transition) -> Result<(), TransitionError> {
        let fail = |reason| Err(TransitionError::Illegal { transition: t.clone(), reason });
        if self.is_terminal() {
            return fail("configuration is terminal");
        }
        let open = self.open_count();
        match (self.strategy, t) {
            (_, Transition::Shift) if self.i >= self.n => fail("buffer is empty"),
            (Strategy::TopDown, Transition::Shift) if open == 0 => fail("no open non-terminal to attach the word to"),
            (Strategy::InOrder, Transition::Shift) if open == 0 && !self.stack.is_empty() => {
                fail("stack holds a completed item with no open non-terminal")
            }
            (_, Transition::Shift) => Ok(()),

            (_, Transition::NonTerminal(_)) if self.nt_run >= self.nt_cap => fail("consecutive non-terminal cap reached"),
            (Strategy::TopDown, Transition::NonTerminal(_)) if self.i >= self.n => fail("buffer is empty"),
            (Strategy::InOrder, Transition::NonTerminal(_)) if !self.top_is_item() => {
                fail("stack top must be a completed item")
            }
            (_, Transition::NonTerminal(_)) => Ok(()),

            (_, Transition::Reduce) if open == 0 => fail("no open non-terminal"),
            (Strategy::TopDown, Transition::Reduce) if !self.top_is_item() => {
                fail("open non-terminal has no children")
            }
            (Strategy::TopDown, Transition::Reduce) if open == 1 && self.i < self.n => {
                fail("closing the last open non-terminal would strand buffer words")
            }
            (Strategy::InOrder, Transition::Reduce) if open == 1 && self.i < self.n && self.nt_run >= self.nt_cap => {
                fail("closing the last open non-terminal would leave no legal continuation")
            }
            (_, Transition::Reduce) => Ok(()),

            (Strategy::TopDown, Transition::Finish) => fail("Finish only exists in the in-order system"),
            (Strategy::InOrder, Transition::Finish) if self.i < self.n => fail("buffer is not empty"),
            (Strategy::InOrder, Transition::Finish) if !self.single_constituent() => {
                fail("stack must hold exactly one constituent spanning the sentence")
            }
            (Strategy::InOrder, Transition::Finish) => Ok(()),
        }
    }

    fn nt_legal(&self) -> bool {
        !self.is_terminal()
            && self.nt_run < self.nt_cap
            && match self.strategy {
                Strategy::TopDown => self.i < self.n,
                Strategy::InOrder => self.top_is_item(),
            }
    }

    pub fn legal(&self, t: &Transition) -> bool {
        self.check(t).is_ok()
    }

    /// All legal transitions, NonTerminal instantiated over `labels`, in
    /// tie-break order.
    pub fn legal_transitions(&self, labels: &[Label]) -> Vec<Transition> {
        let mut out: Vec<Transition> = [Transition::Finish, Transition::Reduce, Transition::Shift]
            .into_iter()
            .filter(|t| self.legal(t))
            .collect();
        if self.nt_legal() {
            if labels.windows(2).all(|w| w[0] < w[1]) {
                out.extend(labels.iter().cloned().map(Transition::NonTerminal));
            } else {
                let mut ls = labels.to_vec();
                ls.sort();
                ls.dedup();
                out.extend(ls.into_iter().map(Transition::NonTerminal));
            }
        }
        out
    }

    /// Applies `t`, returning the successor configuration.
    pub fn apply(&self, t: &Transition) -> Result<Configuration, TransitionError> {
        self.check(t)?;
        let mut next = self.clone();
        next.apply_unchecked(t);
        Ok(next)
    }

    pub(crate) fn apply_unchecked(&mut self, t: &Transition) {
        match t {
            Transition::Shift => {
                let w = self.words[self.i].clone();
                self.stack.push(StackElement::Item { label: w, l: self.i, r: self.i + 1, word: true });
                self.i += 1;
                self.nt_run = 0;
            }
            Transition::NonTerminal(x) => {
                self.stack.push(StackElement::Open { label: x.clone(), j: self.i });
                self.nt_run += 1;
            }
            Transition::Reduce => {
                let pos = self.stack.iter().rposition(|e| e.is_open()).expect("checked: open non-terminal");
                let r_above = match self.stack.last() {
                    Some(StackElement::Item { r, .. }) => Some(*r),
                    _ => None,
                };
                let label = self.stack[pos].label().clone();
                let (start, l, r) = match self.strategy {
                    Strategy::TopDown => {
                        let j = match &self.stack[pos] {
                            StackElement::Open { j, .. } => *j,
                            _ => unreachable!(),
                        };
                        (pos, j, r_above.expect("checked: child above"))
                    }
                    Strategy::InOrder => {
                        let (l0, r0) = match &self.stack[pos - 1] {
                            StackElement::Item { l, r, .. } => (*l, *r),
                            _ => unreachable!("in-order non-terminal always sits on an item"),
                        };
                        let r = if pos + 1 < self.stack.len() { r_above.expect("item on top") } else { r0 };
                        (pos - 1, l0, r)
                    }
                };
                self.stack.truncate(start);
                let occ = self.gamma.iter().filter(|c| c.label == label && c.l == l && c.r == r).count();
                self.gamma.push(Constituent { label: label.clone(), l, r, occ });
                self.stack.push(StackElement::Item { label, l, r, word: false });
            }
            Transition::Finish => self.finished = true,
        }
        self.history = [Some(t.clone()), self.history[0].take()];
    }

    /// Drops the stack element at `idx`; used by search code to
    /// canonicalize states, not a parser transition.
    pub(crate) fn remove_stack_element(&mut self, idx: usize) {
        self.stack.remove(idx);
    }

    /// Space-separated `label[l,r]` / `label(open,j)` rendering of Σ.
    pub fn stack_summary(&self) -> String {
        self.stack.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
    }
}

pub fn initial_config(tokens: &[String], strategy: Strategy) -> Result<Configuration, TransitionError> {
    Configuration::initial(tokens.len(), strategy)
}

/// Applies a whole transition sequence from the initial configuration.
pub fn run_sequence(
    n: usize,
    strategy: Strategy,
    nt_cap: usize,
    seq: &[Transition],
) -> Result<Vec<Configuration>, TransitionError> {
    let mut configs = vec![Configuration::with_cap(n, strategy, nt_cap)?];
    for t in seq {
        let next = configs.last().expect("nonempty").apply(t)?;
        configs.push(next);
    }
    Ok(configs)
}
