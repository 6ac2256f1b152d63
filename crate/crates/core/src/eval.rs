//! Labeled bracketing precision, recall and F1, overall and by the number
//! of children of each constituent.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::tree::{ConstituentTree, Label, Node};

/// Arity buckets 1, 2, 3, 4 and 5+.
pub const ARITY_BUCKETS: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("corpus length mismatch: {gold} gold trees, {pred} predicted")]
    Length { gold: usize, pred: usize },
    #[error("sentence {index}: token sequences differ")]
    Tokens { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Prf {
    pub fn from_counts(matched: usize, predicted: usize, gold: usize) -> Self {
        let pct = |a: usize, b: usize| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
        let precision = pct(matched, predicted);
        let recall = pct(matched, gold);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Prf { precision, recall, f1, matched, predicted, gold }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArityTable {
    /// Index 0 is arity 1; the last bucket holds arity 5 and above.
    pub buckets: [Prf; ARITY_BUCKETS],
    /// Labeled spans matched overall whose arity differs between the two
    /// trees; these are counted in no bucket.
    pub arity_disagreements: usize,
}

impl ArityTable {
    pub fn bucket_name(k: usize) -> &'static str {
        ["1", "2", "3", "4", "5+"][k]
    }
}

/// (label, l, r, arity) for every internal node.
fn spans(tree: &ConstituentTree) -> Vec<(Label, usize, usize, usize)> {
    fn walk(n: &Node, out: &mut Vec<(Label, usize, usize, usize)>) {
        if let Node::Internal { label, children } = n {
            let (l, r) = n.span();
            out.push((label.clone(), l, r, children.len()));
            for c in children {
                walk(c, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(tree.root(), &mut out);
    out
}

fn check(gold: &[ConstituentTree], pred: &[ConstituentTree]) -> Result<(), EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::Length { gold: gold.len(), pred: pred.len() });
    }
    match gold.iter().zip(pred).position(|(g, p)| g.tokens() != p.tokens()) {
        Some(index) => Err(EvalError::Tokens { index }),
        None => Ok(()),
    }
}

/// Multiset intersection size.
fn matched<K: std::hash::Hash + Eq + Clone>(gold: &[K], pred: &[K]) -> usize {
    let mut counts: HashMap<K, usize> = HashMap::new();
    for g in gold {
        *counts.entry(g.clone()).or_insert(0) += 1;
    }
    pred.iter()
        .filter(|p| match counts.get_mut(*p) {
            Some(c) if *c > 0 => {
                *c -= 1;
                true
            }
            _ => false,
        })
        .count()
}

/// Micro-averaged labeled bracketing scores; duplicate spans match by
/// multiplicity and folded preterminals never count.
pub fn prf(gold: &[ConstituentTree], pred: &[ConstituentTree]) -> Result<Prf, EvalError> {
    check(gold, pred)?;
    let (mut m, mut p, mut g) = (0, 0, 0);
    for (gt, pt) in gold.iter().zip(pred) {
        let gs: Vec<_> = spans(gt).into_iter().map(|(x, l, r, _)| (x, l, r)).collect();
        let ps: Vec<_> = spans(pt).into_iter().map(|(x, l, r, _)| (x, l, r)).collect();
        m += matched(&gs, &ps);
        p += ps.len();
        g += gs.len();
    }
    Ok(Prf::from_counts(m, p, g))
}

/// Scores by child count. A constituent falls in the bucket of its arity in
/// its own tree; a match needs the same labeled span and the same arity.
pub fn arity_breakdown(gold: &[ConstituentTree], pred: &[ConstituentTree]) -> Result<ArityTable, EvalError> {
    check(gold, pred)?;
    let bucket = |a: usize| a.clamp(1, ARITY_BUCKETS) - 1;
    let mut counts = [(0usize, 0usize, 0usize); ARITY_BUCKETS];
    let mut overall = 0;
    let mut within = 0;
    for (gt, pt) in gold.iter().zip(pred) {
        let gs = spans(gt);
        let ps = spans(pt);
        for (b, count) in counts.iter_mut().enumerate() {
            let gb: Vec<_> = gs.iter().filter(|s| bucket(s.3) == b).map(|(x, l, r, _)| (x.clone(), *l, *r)).collect();
            let pb: Vec<_> = ps.iter().filter(|s| bucket(s.3) == b).map(|(x, l, r, _)| (x.clone(), *l, *r)).collect();
            let m = matched(&gb, &pb);
            count.0 += m;
            count.1 += pb.len();
            count.2 += gb.len();
            within += m;
        }
        let strip = |v: &[(Label, usize, usize, usize)]| v.iter().map(|(x, l, r, _)| (x.clone(), *l, *r)).collect::<Vec<_>>();
        overall += matched(&strip(&gs), &strip(&ps));
    }
    let mut table = ArityTable::default();
    for (b, (m, p, g)) in counts.into_iter().enumerate() {
        table.buckets[b] = Prf::from_counts(m, p, g);
    }
    table.arity_disagreements = overall.saturating_sub(within);
    Ok(table)
}

/// Fixed-width report: overall scores, then one row per arity bucket.
pub struct Report<'a> {
    pub overall: &'a Prf,
    pub arity: &'a ArityTable,
    pub tsv: bool,
}

impl fmt::Display for Report<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, name: &str, p: &Prf, tsv: bool| {
            if tsv {
                writeln!(
                    f,
                    "{name}\t{:.2}\t{:.2}\t{:.2}\t{}\t{}\t{}",
                    p.precision, p.recall, p.f1, p.matched, p.predicted, p.gold
                )
            } else {
                writeln!(
                    f,
                    "{name:<8} {:>7.2} {:>7.2} {:>7.2} {:>8} {:>8} {:>8}",
                    p.precision, p.recall, p.f1, p.matched, p.predicted, p.gold
                )
            }
        };
        if self.tsv {
            writeln!(f, "scope\tP\tR\tF1\tmatched\tpredicted\tgold")?;
        } else {
            writeln!(f, "{:<8} {:>7} {:>7} {:>7} {:>8} {:>8} {:>8}", "scope", "P", "R", "F1", "matched", "pred", "gold")?;
        }
        row(f, "all", self.overall, self.tsv)?;
        for (k, p) in self.arity.buckets.iter().enumerate() {
            row(f, &format!("arity-{}", ArityTable::bucket_name(k)), p, self.tsv)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_bracketed;

    const CAUTIOUS: &str = "(S (NP The public) (VP is (ADVP still) (ADJP cautious)) .)";

    fn one(s: &str) -> Vec<ConstituentTree> {
        vec![parse_bracketed(s).unwrap()]
    }

    #[test]
    fn identical() {
        let g = one(CAUTIOUS);
        let p = prf(&g, &g).unwrap();
        assert_eq!((p.precision, p.recall, p.f1, p.matched), (100.0, 100.0, 100.0, 5));
        let a = arity_breakdown(&g, &g).unwrap();
        let golds: Vec<usize> = a.buckets.iter().map(|b| b.gold).collect();
        assert_eq!(golds, vec![2, 1, 2, 0, 0]);
        assert_eq!(a.buckets[0].f1, 100.0);
    }

    #[test]
    fn relabeled() {
        let g = one(CAUTIOUS);
        let p = one("(S (NP The public) (VP is (ADJP still) (ADJP cautious)) .)");
        let s = prf(&g, &p).unwrap();
        assert_eq!((s.matched, s.predicted, s.gold), (4, 5, 5));
        assert!((s.f1 - 80.0).abs() < 1e-12);
    }

    #[test]
    fn empty_prediction() {
        let g = one(CAUTIOUS);
        let mut p = one(CAUTIOUS);
        // a flat prediction still has its root; take the counts directly
        let s = Prf::from_counts(0, 0, 5);
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        p[0] = parse_bracketed("(X The public is still cautious .)").unwrap();
        assert_eq!(prf(&g, &p).unwrap().f1, 0.0);
    }

    #[test]
    fn missing_advp() {
        let g = one(CAUTIOUS);
        let p = one("(S (NP The public) (VP is still (ADJP cautious)) .)");
        let a = arity_breakdown(&g, &p).unwrap();
        assert_eq!(a.buckets[0].recall, 50.0);
        assert_eq!(a.arity_disagreements, 0);
    }

    #[test]
    fn mismatched_corpora() {
        let g = one(CAUTIOUS);
        assert_eq!(prf(&g, &[]).unwrap_err(), EvalError::Length { gold: 1, pred: 0 });
        let p = one("(S a b)");
        assert_eq!(arity_breakdown(&g, &p).unwrap_err(), EvalError::Tokens { index: 0 });
    }

    #[test]
    fn symmetric() {
        let g = one(CAUTIOUS);
        let p = one("(S (NP The public) (VP is (ADVP still cautious)) .)");
        let a = prf(&g, &p).unwrap();
        let b = prf(&p, &g).unwrap();
        assert_eq!((a.precision, a.recall, a.f1), (b.recall, b.precision, b.f1));
    }
}
