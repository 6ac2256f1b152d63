//! Constituent trees, bracketed I/O and gold extraction for both parsing
//! strategies.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::transition::{Strategy, Transition};

/// Non-terminal label. Cheap to clone; compared by content.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(s: &str) -> Self {
        Label(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(usize),
    Internal { label: Label, children: Vec<Node> },
}

impl Node {
    /// Token span `[l, r)` covered by this node.
    pub fn span(&self) -> (usize, usize) {
        match self {
            Node::Leaf(i) => (*i, *i + 1),
            Node::Internal { children, .. } => {
                let l = children.first().map(|c| c.span().0).unwrap_or(0);
                let r = children.last().map(|c| c.span().1).unwrap_or(0);
                (l, r)
            }
        }
    }
}

/// A labeled span `(label, l, r)`; `occ` tells identical triples apart
/// (0 for the lowest node in a unary self-chain).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constituent {
    pub label: Label,
    pub l: usize,
    pub r: usize,
    pub occ: usize,
}

impl Constituent {
    pub fn new(label: impl Into<Label>, l: usize, r: usize) -> Self {
        Constituent { label: label.into(), l, r, occ: 0 }
    }

    pub fn triple(&self) -> (&Label, usize, usize) {
        (&self.label, self.l, self.r)
    }
}

impl fmt::Display for Constituent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.label, self.l, self.r)
    }
}

/// A gold non-terminal `(X, j)` together with its position in the gold
/// transition sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NonTerminalNode {
    pub label: Label,
    pub j: usize,
    pub rank: usize,
    /// Span of the constituent this node produces in the gold tree.
    pub l: usize,
    pub r: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<TreeError>,
    },
    #[error("invalid tree: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstituentTree {
    tokens: Vec<String>,
    /// Folded preterminal tags, one per token when the input carried them.
    tags: Option<Vec<String>>,
    root: Node,
}

impl ConstituentTree {
    /// Builds a tree and checks its invariants.
    pub fn new(tokens: Vec<String>, root: Node) -> Result<Self, TreeError> {
        let tree = ConstituentTree { tokens, tags: None, root };
        tree.validate()?;
        Ok(tree)
    }

    pub fn with_tags(mut self, tags: Vec<String>) -> Result<Self, TreeError> {
        if tags.len() != self.tokens.len() {
            return Err(TreeError::Invalid(format!(
                "{} tags for {} tokens",
                tags.len(),
                self.tokens.len()
            )));
        }
        self.tags = Some(tags);
        Ok(self)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> Option<&[String]> {
        self.tags.as_deref()
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn validate(&self) -> Result<(), TreeError> {
        if self.tokens.is_empty() {
            return Err(TreeError::Invalid("empty sentence".into()));
        }
        if matches!(self.root, Node::Leaf(_)) {
            return Err(TreeError::Invalid("root must be a non-terminal".into()));
        }
        let mut next = 0;
        check_node(&self.root, &mut next)?;
        if next != self.tokens.len() {
            return Err(TreeError::Invalid(format!(
                "leaves cover {} of {} tokens",
                next,
                self.tokens.len()
            )));
        }
        Ok(())
    }

    /// Number of internal (non-preterminal) nodes.
    pub fn internal_count(&self) -> usize {
        fn count(node: &Node) -> usize {
            match node {
                Node::Leaf(_) => 0,
                Node::Internal { children, .. } => 1 + children.iter().map(count).sum::<usize>(),
            }
        }
        count(&self.root)
    }

    /// Distinct labels used by the tree, sorted.
    pub fn labels(&self) -> Vec<Label> {
        let mut out: Vec<Label> = self.constituent_set().into_iter().map(|c| c.label).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn constituent_set(&self) -> Vec<Constituent> {
        constituent_set(self)
    }
}

fn check_node(node: &Node, next: &mut usize) -> Result<(), TreeError> {
    match node {
        Node::Leaf(i) => {
            if *i != *next {
                return Err(TreeError::Invalid(format!("leaf {} out of order, expected {}", i, next)));
            }
            *next += 1;
            Ok(())
        }
        Node::Internal { label, children } => {
            if label.as_str().is_empty() {
                return Err(TreeError::Invalid("empty label".into()));
            }
            if children.is_empty() {
                return Err(TreeError::Invalid(format!("node {} has no children", label)));
            }
            children.iter().try_for_each(|c| check_node(c, next))
        }
    }
}

// ---------------------------------------------------------------------------
// Bracketed notation

#[derive(Debug)]
enum Raw {
    Word(String),
    Node { label: String, children: Vec<Raw> },
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, TreeError> {
        Err(TreeError::Parse { offset, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn atom(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '(' || c == ')' {
                break;
            }
            self.pos += c.len_utf8();
        }
        self.text[start..self.pos].to_string()
    }

    fn node(&mut self) -> Result<Raw, TreeError> {
        self.skip_ws();
        let open = self.pos;
        match self.peek() {
            Some('(') => self.pos += 1,
            Some(')') => return self.err(self.pos, "unexpected ')'"),
            Some(_) => return Ok(Raw::Word(self.atom())),
            None => return self.err(self.pos, "unexpected end of input"),
        }
        self.skip_ws();
        let label = match self.peek() {
            Some('(') | Some(')') | None => return self.err(self.pos, "empty label"),
            Some(_) => self.atom(),
        };
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                None => return self.err(open, "unbalanced parentheses: missing ')'"),
                Some(_) => children.push(self.node()?),
            }
        }
        if children.is_empty() {
            return self.err(open, format!("empty node ({})", label));
        }
        Ok(Raw::Node { label, children })
    }
}

fn is_preterminal(raw: &Raw) -> bool {
    matches!(raw, Raw::Node { children, .. } if children.len() == 1 && matches!(children[0], Raw::Word(_)))
}

/// A tree carries a preterminal layer when every word sits alone under its
/// own node and at least one such node has a sibling. Without the sibling
/// evidence, `(NP (NP a))` and `(S (NN a))` are read as phrase structure.
fn has_tag_layer(root: &Raw) -> bool {
    fn walk(raw: &Raw, all_tagged: &mut bool, evidence: &mut bool) {
        if let Raw::Node { children, .. } = raw {
            for c in children {
                match c {
                    Raw::Word(_) => *all_tagged = false,
                    _ if is_preterminal(c) => {
                        if children.len() > 1 {
                            *evidence = true;
                        }
                    }
                    _ => walk(c, all_tagged, evidence),
                }
            }
        }
    }
    if is_preterminal(root) {
        return false;
    }
    let (mut all_tagged, mut evidence) = (true, false);
    walk(root, &mut all_tagged, &mut evidence);
    all_tagged && evidence
}

/// Parses one bracketed tree such as `(S (NP The public) (VP is) .)`.
pub fn parse_bracketed(text: &str) -> Result<ConstituentTree, TreeError> {
    let mut reader = Reader { text, pos: 0 };
    reader.skip_ws();
    if reader.peek() != Some('(') {
        return reader.err(reader.pos, "expected '('");
    }
    let raw = reader.node()?;
    reader.skip_ws();
    if reader.pos < text.len() {
        return reader.err(reader.pos, "trailing input after tree (unbalanced parentheses?)");
    }
    // `( (S ...) )` wrappers with an empty label are rejected by the reader;
    // PTB files using them should be stripped beforehand.
    let fold = has_tag_layer(&raw);
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let root = convert(&raw, fold, &mut tokens, &mut tags);
    let tree = ConstituentTree::new(tokens, root).map_err(|e| match e {
        TreeError::Invalid(m) => TreeError::Parse { offset: 0, message: m },
        other => other,
    })?;
    if fold {
        tree.with_tags(tags)
    } else {
        Ok(tree)
    }
}

fn convert(raw: &Raw, fold: bool, tokens: &mut Vec<String>, tags: &mut Vec<String>) -> Node {
    match raw {
        Raw::Word(w) => {
            tokens.push(w.clone());
            Node::Leaf(tokens.len() - 1)
        }
        Raw::Node { label, children, .. } if fold && is_preterminal(raw) => {
            tags.push(label.clone());
            convert(&children[0], fold, tokens, tags)
        }
        Raw::Node { label, children } => Node::Internal {
            label: Label::new(label),
            children: children.iter().map(|c| convert(c, fold, tokens, tags)).collect(),
        },
    }
}

/// Writes the tree back in bracketed form; folded tags are restored.
pub fn serialize(tree: &ConstituentTree) -> String {
    fn write(node: &Node, tree: &ConstituentTree, out: &mut String) {
        match node {
            Node::Leaf(i) => match tree.tags() {
                Some(tags) => {
                    out.push('(');
                    out.push_str(&tags[*i]);
                    out.push(' ');
                    out.push_str(&tree.tokens[*i]);
                    out.push(')');
                }
                None => out.push_str(&tree.tokens[*i]),
            },
            Node::Internal { label, children } => {
                out.push('(');
                out.push_str(label.as_str());
                for c in children {
                    out.push(' ');
                    write(c, tree, out);
                }
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    write(&tree.root, tree, &mut out);
    out
}

impl fmt::Display for ConstituentTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

/// Reads a corpus: one tree per line, blank lines skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<ConstituentTree>, TreeError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| {
            parse_bracketed(line).map_err(|e| TreeError::Line { line: idx + 1, source: Box::new(e) })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Gold extraction

/// One constituent per internal node; identical triples get increasing
/// `occ` from the bottom of the chain upwards.
pub fn constituent_set(tree: &ConstituentTree) -> Vec<Constituent> {
    fn post(node: &Node, out: &mut Vec<Constituent>, seen: &mut HashMap<(Label, usize, usize), usize>) {
        if let Node::Internal { label, children } = node {
            for c in children {
                post(c, out, seen);
            }
            let (l, r) = node.span();
            let occ = seen.entry((label.clone(), l, r)).or_insert(0);
            out.push(Constituent { label: label.clone(), l, r, occ: *occ });
            *occ += 1;
        }
    }
    let mut out = Vec::new();
    post(&tree.root, &mut out, &mut HashMap::new());
    out
}

/// Gold non-terminal nodes in the order the gold derivation opens them.
pub fn gold_nt_order(tree: &ConstituentTree, strategy: Strategy) -> Vec<NonTerminalNode> {
    fn top_down(node: &Node, out: &mut Vec<NonTerminalNode>) {
        if let Node::Internal { label, children } = node {
            let (l, r) = node.span();
            out.push(NonTerminalNode { label: label.clone(), j: l, rank: out.len(), l, r });
            children.iter().for_each(|c| top_down(c, out));
        }
    }
    fn in_order(node: &Node, out: &mut Vec<NonTerminalNode>) {
        if let Node::Internal { label, children } = node {
            let (l, r) = node.span();
            in_order(&children[0], out);
            let j = children[0].span().1;
            out.push(NonTerminalNode { label: label.clone(), j, rank: out.len(), l, r });
            children[1..].iter().for_each(|c| in_order(c, out));
        }
    }
    let mut out = Vec::new();
    match strategy {
        Strategy::TopDown => top_down(&tree.root, &mut out),
        Strategy::InOrder => in_order(&tree.root, &mut out),
    }
    out
}

/// The static-oracle transition sequence.
pub fn gold_sequence(tree: &ConstituentTree, strategy: Strategy) -> Vec<Transition> {
    fn top_down(node: &Node, out: &mut Vec<Transition>) {
        match node {
            Node::Leaf(_) => out.push(Transition::Shift),
            Node::Internal { label, children } => {
                out.push(Transition::NonTerminal(label.clone()));
                children.iter().for_each(|c| top_down(c, out));
                out.push(Transition::Reduce);
            }
        }
    }
    fn in_order(node: &Node, out: &mut Vec<Transition>) {
        match node {
            Node::Leaf(_) => out.push(Transition::Shift),
            Node::Internal { label, children } => {
                in_order(&children[0], out);
                out.push(Transition::NonTerminal(label.clone()));
                children[1..].iter().for_each(|c| in_order(c, out));
                out.push(Transition::Reduce);
            }
        }
    }
    let mut out = Vec::new();
    match strategy {
        Strategy::TopDown => top_down(&tree.root, &mut out),
        Strategy::InOrder => {
            in_order(&tree.root, &mut out);
            out.push(Transition::Finish);
        }
    }
    out
}

/// Largest number of Non-Terminal transitions the gold derivation issues
/// without an intervening Shift. Trees above the parser's cap cannot be
/// derived and are rejected at load time.
pub fn max_nt_run(tree: &ConstituentTree, strategy: Strategy) -> usize {
    let mut run = 0;
    let mut best = 0;
    for t in gold_sequence(tree, strategy) {
        match t {
            Transition::Shift => run = 0,
            Transition::NonTerminal(_) => {
                run += 1;
                best = best.max(run);
            }
            _ => {}
        }
    }
    best
}

/// Deterministic random tree over `n` tokens. Each token is its parent's
/// label in lowercase followed by a random digit.
///
/// Unary chains are at most two nodes deep above any span.
pub fn random_tree(n: usize, labels: &[Label], seed: u64) -> Result<ConstituentTree, TreeError> {
    if n == 0 {
        return Err(TreeError::Invalid("random_tree needs n >= 1".into()));
    }
    if labels.is_empty() {
        return Err(TreeError::Invalid("random_tree needs a nonempty label set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut root = gen_span(&mut rng, labels, 0, n, true, 2);
    // a tree whose every word is an only child reads back as POS-tagged
    // input and would lose that layer; draw again
    while n > 1 && every_word_alone(&root) {
        root = gen_span(&mut rng, labels, 0, n, true, 2);
    }
    // words carry a cue: the parent label in lowercase plus a digit
    let mut parents = vec![String::new(); n];
    leaf_parents(&root, &mut parents);
    let tokens = parents.iter().map(|p| format!("{}{}", p.to_lowercase(), rng.gen_range(0..10))).collect();
    ConstituentTree::new(tokens, root)
}

fn every_word_alone(node: &Node) -> bool {
    match node {
        Node::Leaf(_) => true,
        Node::Internal { children, .. } if children.len() == 1 => every_word_alone(&children[0]),
        Node::Internal { children, .. } => {
            children.iter().all(|c| !matches!(c, Node::Leaf(_)) && every_word_alone(c))
        }
    }
}

fn leaf_parents(node: &Node, out: &mut [String]) {
    if let Node::Internal { label, children } = node {
        for c in children {
            match c {
                Node::Leaf(k) => out[*k] = label.as_str().to_string(),
                inner => leaf_parents(inner, out),
            }
        }
    }
}

fn gen_span(rng: &mut ChaCha8Rng, labels: &[Label], l: usize, r: usize, must_be_internal: bool, unary: usize) -> Node {
    let label = labels.choose(rng).expect("nonempty").clone();
    if r - l == 1 {
        if !must_be_internal && rng.gen_bool(0.6) {
            return Node::Leaf(l);
        }
        let child = if unary > 1 && rng.gen_bool(0.25) {
            gen_span(rng, labels, l, r, true, unary - 1)
        } else {
            Node::Leaf(l)
        };
        return Node::Internal { label, children: vec![child] };
    }
    if unary > 0 && rng.gen_bool(0.12) {
        let child = gen_span(rng, labels, l, r, true, unary - 1);
        return Node::Internal { label, children: vec![child] };
    }
    // Split [l, r) into 2..=3 contiguous parts.
    let max_parts = (r - l).min(3);
    let parts = rng.gen_range(2..=max_parts);
    let mut cuts: Vec<usize> = (l + 1..r).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut bounds = vec![l];
    bounds.extend(cuts);
    bounds.push(r);
    let children = bounds
        .windows(2)
        .map(|w| gen_span(rng, labels, w[0], w[1], false, 2))
        .collect();
    Node::Internal { label, children }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const CAUTIOUS: &str = "(S (NP The public) (VP is (ADVP still) (ADJP cautious)) .)";

    fn triples(cs: &[Constituent]) -> Vec<(String, usize, usize, usize)> {
        let mut v: Vec<_> = cs.iter().map(|c| (c.label.to_string(), c.l, c.r, c.occ)).collect();
        v.sort();
        v
    }

    #[test]
    fn sample_tree_constituents() {
        let t = parse_bracketed(CAUTIOUS).unwrap();
        assert_eq!(t.len(), 6);
        let mut expected = vec![
            ("S".to_string(), 0, 6, 0),
            ("NP".into(), 0, 2, 0),
            ("VP".into(), 2, 5, 0),
            ("ADVP".into(), 3, 4, 0),
            ("ADJP".into(), 4, 5, 0),
        ];
        expected.sort();
        assert_eq!(triples(&t.constituent_set()), expected);
    }

    #[test]
    fn minimal_tree() {
        let t = parse_bracketed("(X a)").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.internal_count(), 1);
        assert_eq!(serialize(&t), "(X a)");
        assert_eq!(triples(&t.constituent_set()), vec![("X".into(), 0, 1, 0)]);
    }

    #[test]
    fn tagged_input_folds_preterminals() {
        let tagged = "(S (NP (DT The) (NN public)) (VP (VBZ is) (ADVP (RB still)) (ADJP (JJ cautious))) (. .))";
        let t = parse_bracketed(tagged).unwrap();
        let plain = parse_bracketed(CAUTIOUS).unwrap();
        assert_eq!(triples(&t.constituent_set()), triples(&plain.constituent_set()));
        assert_eq!(t.tags().unwrap()[0], "DT");
        assert_eq!(serialize(&t), tagged);
    }

    #[test]
    fn unary_self_chain_duplicates() {
        let t = parse_bracketed("(NP (NP a))").unwrap();
        assert_eq!(
            triples(&t.constituent_set()),
            vec![("NP".into(), 0, 1, 0), ("NP".into(), 0, 1, 1)]
        );
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse_bracketed("(S (NP a b)") {
            Err(TreeError::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{:?}", other),
        }
        assert!(matches!(parse_bracketed("(S (NP a)))"), Err(TreeError::Parse { offset: 10, .. })));
        assert!(matches!(parse_bracketed("( (NP a))"), Err(TreeError::Parse { offset: 2, .. })));
        assert!(matches!(parse_bracketed("(S (NP) a)"), Err(TreeError::Parse { offset: 3, .. })));
        assert!(parse_bracketed("").is_err());
    }

    #[test]
    fn corpus_errors_name_the_line() {
        let err = parse_corpus("(X a)\n\n(Y b\n").unwrap_err();
        assert!(matches!(err, TreeError::Line { line: 3, .. }));
        assert_eq!(parse_corpus("(X a)\n\n(Y b)\n").unwrap().len(), 2);
    }

    #[test]
    fn gold_orders_of_sample_tree() {
        let t = parse_bracketed(CAUTIOUS).unwrap();
        let td: Vec<_> = gold_nt_order(&t, Strategy::TopDown).iter().map(|n| (n.label.to_string(), n.j)).collect();
        assert_eq!(
            td,
            vec![("S".into(), 0), ("NP".into(), 0), ("VP".into(), 2), ("ADVP".into(), 3), ("ADJP".into(), 4)]
        );
        let io: Vec<_> = gold_nt_order(&t, Strategy::InOrder).iter().map(|n| (n.label.to_string(), n.j)).collect();
        assert_eq!(
            io,
            vec![("NP".into(), 1), ("S".into(), 2), ("VP".into(), 3), ("ADVP".into(), 4), ("ADJP".into(), 5)]
        );
        let x = parse_bracketed("(X a)").unwrap();
        assert_eq!(gold_nt_order(&x, Strategy::TopDown)[0].j, 0);
        assert_eq!(gold_nt_order(&x, Strategy::InOrder)[0].j, 1);
    }

    fn render(seq: &[Transition]) -> String {
        seq.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn gold_sequences_of_sample_tree() {
        let t = parse_bracketed(CAUTIOUS).unwrap();
        assert_eq!(
            render(&gold_sequence(&t, Strategy::TopDown)),
            "NT_S NT_NP SH SH RE NT_VP SH NT_ADVP SH RE NT_ADJP SH RE RE SH RE"
        );
        assert_eq!(
            render(&gold_sequence(&t, Strategy::InOrder)),
            "SH NT_NP SH RE NT_S SH NT_VP SH NT_ADVP RE SH NT_ADJP RE RE SH RE FI"
        );
        let x = parse_bracketed("(X a)").unwrap();
        assert_eq!(render(&gold_sequence(&x, Strategy::TopDown)), "NT_X SH RE");
    }

    #[test]
    fn random_tree_contract() {
        let labels = vec![Label::new("X")];
        let t = random_tree(1, &labels, 7).unwrap();
        assert_eq!(t.len(), 1);
        let abc: Vec<Label> = ["A", "B", "C"].iter().map(|s| Label::new(s)).collect();
        assert_eq!(random_tree(5, &abc, 3).unwrap(), random_tree(5, &abc, 3).unwrap());
        assert!(random_tree(0, &abc, 3).is_err());
        assert!(random_tree(3, &[], 3).is_err());
    }

    #[test]
    fn random_trees_are_valid() {
        let abc: Vec<Label> = ["A", "B", "C"].iter().map(|s| Label::new(s)).collect();
        for seed in 0..1000u64 {
            let n = 1 + (seed % 6) as usize;
            let t = random_tree(n, &abc, seed).unwrap();
            assert_eq!(t.len(), n);
            // re-validating through the public constructor
            ConstituentTree::new(t.tokens().to_vec(), t.root().clone()).unwrap();
            for c in t.constituent_set() {
                assert!(c.l < c.r && c.r <= n);
            }
        }
    }
}
