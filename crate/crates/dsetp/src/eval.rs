//! Labelled bracket evaluation: precision/recall/F over (label, yield)
//! pairs, a discontinuous-only variant, and POS accuracy.

use std::collections::HashSet;
use std::fmt;

use crate::tree::{Constituent, DiscTree, IndexSet};

/// What to discount before comparing trees: root labels are dropped from
/// both sides, and the token positions of punctuation tags (looked up in the
/// gold tree) are deleted from every yield, removing emptied constituents.
#[derive(Clone, Debug, Default)]
pub struct EvalFilter {
    pub root_labels: HashSet<String>,
    pub punct_tags: HashSet<String>,
}

impl EvalFilter {
    pub fn none() -> Self {
        EvalFilter::default()
    }

    pub fn with_roots<I: IntoIterator<Item = String>>(mut self, roots: I) -> Self {
        self.root_labels.extend(roots);
        self
    }

    pub fn with_punct<I: IntoIterator<Item = String>>(mut self, tags: I) -> Self {
        self.punct_tags.extend(tags);
        self
    }
}

/// Scores for one tree pair or a whole corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
    pub disc_matched: usize,
    pub disc_predicted: usize,
    pub disc_gold: usize,
    pub pos_correct: usize,
    pub pos_total: usize,
}

fn ratio(num: usize, den: usize, other_empty: bool) -> f64 {
    if den > 0 {
        num as f64 / den as f64
    } else if other_empty {
        // Two empty sets compare as a perfect match.
        1.0
    } else {
        0.0
    }
}

fn f_of(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

impl EvalReport {
    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.predicted, self.gold == 0)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.gold, self.predicted == 0)
    }

    pub fn f1(&self) -> f64 {
        f_of(self.precision(), self.recall())
    }

    pub fn disc_precision(&self) -> f64 {
        ratio(self.disc_matched, self.disc_predicted, self.disc_gold == 0)
    }

    pub fn disc_recall(&self) -> f64 {
        ratio(self.disc_matched, self.disc_gold, self.disc_predicted == 0)
    }

    pub fn disc_f1(&self) -> f64 {
        f_of(self.disc_precision(), self.disc_recall())
    }

    pub fn pos_accuracy(&self) -> f64 {
        ratio(self.pos_correct, self.pos_total, true)
    }

    /// Accumulates counts of another report (micro-average over a corpus).
    pub fn absorb(&mut self, other: &EvalReport) {
        self.matched += other.matched;
        self.predicted += other.predicted;
        self.gold += other.gold;
        self.disc_matched += other.disc_matched;
        self.disc_predicted += other.disc_predicted;
        self.disc_gold += other.disc_gold;
        self.pos_correct += other.pos_correct;
        self.pos_total += other.pos_total;
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F {:.2} P {:.2} R {:.2} DISC-F {:.2} DISC-P {:.2} DISC-R {:.2} POS {:.2}",
            100.0 * self.f1(),
            100.0 * self.precision(),
            100.0 * self.recall(),
            100.0 * self.disc_f1(),
            100.0 * self.disc_precision(),
            100.0 * self.disc_recall(),
            100.0 * self.pos_accuracy(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    LengthMismatch { pred: usize, gold: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::LengthMismatch { pred, gold } => {
                write!(f, "predicted sentence has {pred} tokens, gold has {gold}")
            }
        }
    }
}

impl std::error::Error for EvalError {}

fn filtered_set(tree: &DiscTree, filter: &EvalFilter, drop: &[usize]) -> HashSet<Constituent> {
    let mut out = HashSet::new();
    for c in &tree.constituents {
        if filter.root_labels.contains(&c.label) {
            continue;
        }
        let kept: IndexSet = if drop.is_empty() {
            c.yield_set.clone()
        } else {
            c.yield_set.iter().filter(|i| !drop.contains(i)).collect()
        };
        if !kept.is_empty() {
            out.insert(Constituent::new(c.label.clone(), kept));
        }
    }
    out
}

/// Labelled F-score of a predicted tree against a gold tree.
///
/// Counts set intersection over (label, yield) pairs after applying the
/// filter; the discontinuous counts are restricted to constituents with a
/// non-empty gap on their own side. Trees are compared as given — expand
/// unary chains first when chain members should count individually.
pub fn labelled_fscore(
    pred: &DiscTree,
    gold: &DiscTree,
    filter: &EvalFilter,
) -> Result<EvalReport, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch { pred: pred.len(), gold: gold.len() });
    }
    let drop: Vec<usize> = gold
        .pos_tags
        .iter()
        .enumerate()
        .filter(|(_, t)| filter.punct_tags.contains(*t))
        .map(|(i, _)| i)
        .collect();
    let pred_set = filtered_set(pred, filter, &drop);
    let gold_set = filtered_set(gold, filter, &drop);
    let matched = pred_set.intersection(&gold_set).count();
    let disc_matched = pred_set
        .intersection(&gold_set)
        .filter(|c| c.is_discontinuous())
        .count();
    let mut report = EvalReport {
        matched,
        predicted: pred_set.len(),
        gold: gold_set.len(),
        disc_matched,
        disc_predicted: pred_set.iter().filter(|c| c.is_discontinuous()).count(),
        disc_gold: gold_set.iter().filter(|c| c.is_discontinuous()).count(),
        pos_correct: 0,
        pos_total: 0,
    };
    for (p, g) in pred.pos_tags.iter().zip(&gold.pos_tags) {
        report.pos_total += 1;
        if p == g {
            report.pos_correct += 1;
        }
    }
    Ok(report)
}

/// Micro-averaged report over aligned tree sequences.
pub fn score_corpus(
    pred: &[DiscTree],
    gold: &[DiscTree],
    filter: &EvalFilter,
) -> Result<EvalReport, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch { pred: pred.len(), gold: gold.len() });
    }
    let mut total = EvalReport::default();
    for (p, g) in pred.iter().zip(gold) {
        total.absorb(&labelled_fscore(p, g, filter)?);
    }
    Ok(total)
}
