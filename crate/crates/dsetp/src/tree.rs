//! Index sets, instantiated constituents and discontinuous trees.
//!
//! A discontinuous constituent is a nonterminal label together with the set
//! of token positions it dominates. The yield of a constituent need not be
//! contiguous; the positions strictly between its left and right index that
//! it does not dominate form its gap.

use std::fmt;

/// A sorted, duplicate-free set of token positions.
///
/// The yield of a (partial) constituent. Kept sorted so that the left index,
/// right index and gap can be read off cheaply.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet(indices)
    }

    /// Builds from a slice that is already strictly increasing.
    pub fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        IndexSet(indices)
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(vec![i])
    }

    /// The contiguous range `{0, …, n-1}`.
    pub fn range(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// `min(s)`; `None` on the empty set.
    pub fn left_index(&self) -> Option<usize> {
        self.0.first().copied()
    }

    /// `max(s)`; `None` on the empty set.
    pub fn right_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// The gap: positions strictly between min and max that are not members.
    pub fn gap_set(&self) -> IndexSet {
        let (Some(lo), Some(hi)) = (self.left_index(), self.right_index()) else {
            return IndexSet::empty();
        };
        let mut gap = Vec::new();
        let mut expect = lo + 1;
        for &i in &self.0[1..] {
            gap.extend(expect..i);
            expect = i + 1;
        }
        let _ = hi;
        IndexSet(gap)
    }

    /// `(min(s), max(s), min(gap), max(gap))`, gap slots `None` when the
    /// yield is contiguous.
    pub fn boundary_tuple(&self) -> Option<(usize, usize, Option<usize>, Option<usize>)> {
        let lo = self.left_index()?;
        let hi = self.right_index()?;
        let gap = self.gap_set();
        Some((lo, hi, gap.left_index(), gap.right_index()))
    }

    /// Number of maximal contiguous blocks (fan-out). 1 for contiguous sets.
    pub fn block_count(&self) -> usize {
        if self.0.is_empty() {
            return 0;
        }
        1 + self.0.windows(2).filter(|w| w[1] > w[0] + 1).count()
    }

    pub fn is_contiguous(&self) -> bool {
        self.block_count() <= 1
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        out.push(x);
                        a.next();
                    } else if y < x {
                        out.push(y);
                        b.next();
                    } else {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        IndexSet(out)
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for &x in &self.0 {
            for &y in it.by_ref() {
                if y == x {
                    continue 'outer;
                }
                if y > x {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            if x == y {
                return false;
            }
            if x < y {
                a.next();
            } else {
                b.next();
            }
        }
        true
    }

    /// Subset-or-disjoint. Partial overlap is what makes two yields cross.
    pub fn compatible(&self, other: &IndexSet) -> bool {
        self.is_subset(other) || self.is_disjoint(other)
    }

    /// Construction order on yields: by right index, then by inclusion.
    ///
    /// Reflexive. Total on any pairwise-compatible family, e.g. the
    /// constituents of a valid tree.
    pub fn precedes(&self, other: &IndexSet) -> bool {
        match (self.right_index(), other.right_index()) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a < b || (a == b && self.is_subset(other)),
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::new(iter.into_iter().collect())
    }
}

/// An instantiated constituent: a nonterminal label over a yield.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Constituent {
    pub label: String,
    pub yield_set: IndexSet,
}

impl Constituent {
    pub fn new(label: impl Into<String>, yield_set: IndexSet) -> Self {
        Constituent { label: label.into(), yield_set }
    }

    pub fn is_discontinuous(&self) -> bool {
        !self.yield_set.is_contiguous()
    }

    pub fn precedes(&self, other: &Constituent) -> bool {
        self.yield_set.precedes(&other.yield_set)
    }
}

impl fmt::Debug for Constituent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.label, self.yield_set)
    }
}

/// A discontinuous constituency tree over a tagged sentence.
///
/// Preterminals are kept as the `pos_tags` sequence, not as constituents.
/// Constituents are stored in a canonical order: ascending right index, then
/// set size, then elements; constituents sharing a yield (an expanded unary
/// chain) keep their top-down order.
#[derive(Clone, PartialEq, Eq)]
pub struct DiscTree {
    pub tokens: Vec<String>,
    pub pos_tags: Vec<String>,
    pub constituents: Vec<Constituent>,
    /// True when the root was synthesized at ingestion because the input had
    /// no spanning constituent; stripped again on output.
    pub synthetic_root: bool,
}

/// A broken `DiscTree` invariant, reported as data by [`DiscTree::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeViolation {
    LengthMismatch { tokens: usize, tags: usize },
    EmptyYield { label: String },
    OutOfBounds { constituent: Constituent, n: usize },
    Crossing { a: Constituent, b: Constituent },
    MissingRoot,
    DuplicateConstituent { constituent: Constituent },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::LengthMismatch { tokens, tags } => {
                write!(f, "{tokens} tokens but {tags} POS tags")
            }
            TreeViolation::EmptyYield { label } => write!(f, "empty yield under {label}"),
            TreeViolation::OutOfBounds { constituent, n } => {
                write!(f, "yield of {constituent:?} outside 0..{n}")
            }
            TreeViolation::Crossing { a, b } => {
                write!(f, "crossing membership between {a:?} and {b:?}")
            }
            TreeViolation::MissingRoot => write!(f, "missing root spanning the sentence"),
            TreeViolation::DuplicateConstituent { constituent } => {
                write!(f, "duplicate constituent {constituent:?}")
            }
        }
    }
}

impl DiscTree {
    pub fn new(
        tokens: Vec<String>,
        pos_tags: Vec<String>,
        constituents: Vec<Constituent>,
    ) -> Self {
        let mut tree = DiscTree { tokens, pos_tags, constituents, synthetic_root: false };
        tree.canonicalize();
        tree
    }

    /// Sentence length.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Sorts constituents into canonical order. Stable, so equal-yield
    /// chains keep their relative (top-down) order.
    pub fn canonicalize(&mut self) {
        self.constituents.sort_by(|a, b| {
            (a.yield_set.right_index(), a.yield_set.len(), a.yield_set.as_slice()).cmp(&(
                b.yield_set.right_index(),
                b.yield_set.len(),
                b.yield_set.as_slice(),
            ))
        });
    }

    pub fn constituent_with_yield(&self, s: &IndexSet) -> Option<&Constituent> {
        self.constituents.iter().find(|c| &c.yield_set == s)
    }

    pub fn root(&self) -> Option<&Constituent> {
        let full = IndexSet::range(self.len());
        self.constituent_with_yield(&full)
    }

    /// Checks every tree invariant and returns all violations found.
    ///
    /// Accepts both collapsed trees and expanded unary chains: constituents
    /// may share a yield as long as the (label, yield) pairs are distinct.
    pub fn validate(&self) -> Vec<TreeViolation> {
        let mut out = Vec::new();
        let n = self.tokens.len();
        if self.pos_tags.len() != n {
            out.push(TreeViolation::LengthMismatch { tokens: n, tags: self.pos_tags.len() });
        }
        for c in &self.constituents {
            if c.yield_set.is_empty() {
                out.push(TreeViolation::EmptyYield { label: c.label.clone() });
            } else if c.yield_set.right_index().unwrap() >= n {
                out.push(TreeViolation::OutOfBounds { constituent: c.clone(), n });
            }
        }
        for (i, a) in self.constituents.iter().enumerate() {
            for b in &self.constituents[i + 1..] {
                if !a.yield_set.compatible(&b.yield_set) && !b.yield_set.compatible(&a.yield_set) {
                    out.push(TreeViolation::Crossing { a: a.clone(), b: b.clone() });
                } else if a == b {
                    out.push(TreeViolation::DuplicateConstituent { constituent: a.clone() });
                }
            }
        }
        if n > 0 && self.root().is_none() {
            out.push(TreeViolation::MissingRoot);
        }
        out
    }

    /// Merges same-yield constituent chains into single nodes whose labels
    /// are joined top-down by `sep`. Input chains must be ordered parent
    /// before child, which is how every reader and generator in this crate
    /// produces them.
    pub fn collapse_unaries(&self, sep: &str) -> DiscTree {
        let mut out: Vec<Constituent> = Vec::with_capacity(self.constituents.len());
        for c in &self.constituents {
            match out.iter_mut().find(|prev| prev.yield_set == c.yield_set) {
                Some(prev) => {
                    prev.label.push_str(sep);
                    prev.label.push_str(&c.label);
                }
                None => out.push(c.clone()),
            }
        }
        let mut tree = DiscTree {
            tokens: self.tokens.clone(),
            pos_tags: self.pos_tags.clone(),
            constituents: out,
            synthetic_root: self.synthetic_root,
        };
        tree.canonicalize();
        tree
    }

    /// Splits `sep`-joined labels back into unary chains, parent first.
    /// Exact inverse of [`DiscTree::collapse_unaries`].
    pub fn expand_unaries(&self, sep: &str) -> DiscTree {
        let mut out = Vec::with_capacity(self.constituents.len());
        for c in &self.constituents {
            for part in c.label.split(sep) {
                out.push(Constituent::new(part, c.yield_set.clone()));
            }
        }
        let mut tree = DiscTree {
            tokens: self.tokens.clone(),
            pos_tags: self.pos_tags.clone(),
            constituents: out,
            synthetic_root: self.synthetic_root,
        };
        tree.canonicalize();
        tree
    }
}

impl fmt::Debug for DiscTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiscTree({} tokens, {:?})", self.tokens.len(), self.constituents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec())
    }

    #[test]
    fn left_and_right_index() {
        assert_eq!(set(&[1, 6]).left_index(), Some(1));
        assert_eq!(set(&[1, 6]).right_index(), Some(6));
        assert_eq!(set(&[3]).left_index(), Some(3));
        assert_eq!(set(&[3]).right_index(), Some(3));
        assert_eq!(set(&[0, 5, 6]).left_index(), Some(0));
        assert_eq!(set(&[0, 5, 6]).right_index(), Some(6));
        assert_eq!(IndexSet::empty().left_index(), None);
    }

    #[test]
    fn gap_sets() {
        assert_eq!(set(&[1, 6]).gap_set(), set(&[2, 3, 4, 5]));
        assert_eq!(set(&[1, 5, 6]).gap_set(), set(&[2, 3, 4]));
        assert_eq!(set(&[3, 4]).gap_set(), IndexSet::empty());
    }

    #[test]
    fn boundary_tuples() {
        assert_eq!(set(&[1, 6]).boundary_tuple(), Some((1, 6, Some(2), Some(5))));
        assert_eq!(set(&[1, 5, 6]).boundary_tuple(), Some((1, 6, Some(2), Some(4))));
        assert_eq!(set(&[3]).boundary_tuple(), Some((3, 3, None, None)));
    }

    #[test]
    fn compatibility() {
        assert!(set(&[1, 2]).compatible(&set(&[1, 2, 3])));
        assert!(set(&[0]).compatible(&set(&[1, 2])));
        assert!(!set(&[1, 2]).compatible(&set(&[2, 3])));
        assert!(!set(&[2, 3]).compatible(&set(&[1, 2])));
    }

    #[test]
    fn precedes_order() {
        assert!(set(&[1, 6]).precedes(&set(&[1, 5, 6])));
        assert!(!set(&[1, 5, 6]).precedes(&set(&[1, 6])));
        assert!(set(&[3, 4]).precedes(&set(&[1, 6])));
        // Equal max, no inclusion: incomparable in both directions.
        assert!(!set(&[1, 3]).precedes(&set(&[2, 3])));
        assert!(!set(&[2, 3]).precedes(&set(&[1, 3])));
        // Reflexive.
        assert!(set(&[1, 6]).precedes(&set(&[1, 6])));
    }

    #[test]
    fn gap_partition_invariant() {
        let s = set(&[0, 2, 5, 6, 9]);
        let gap = s.gap_set();
        assert!(s.is_disjoint(&gap));
        let merged = s.union(&gap);
        assert_eq!(
            merged,
            IndexSet::new((s.left_index().unwrap()..=s.right_index().unwrap()).collect())
        );
    }

    fn figure_tree() -> DiscTree {
        DiscTree::new(
            ["So", "what", "'s", "a", "parent", "to", "do", "?"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            ["RB", "WP", "VBZ", "DT", "NN", "TO", "VB", "."]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            vec![
                Constituent::new("SBARQ", IndexSet::range(8)),
                Constituent::new("SQ", set(&[1, 2, 3, 4, 5, 6])),
                Constituent::new("WHNP", set(&[1])),
                Constituent::new("NP", set(&[3, 4])),
                Constituent::new("VP", set(&[1, 5, 6])),
                Constituent::new("VP", set(&[1, 6])),
            ],
        )
    }

    #[test]
    fn validate_ok_on_wh_question_tree() {
        assert!(figure_tree().validate().is_empty());
    }

    #[test]
    fn validate_reports_crossing() {
        let t = DiscTree::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["X".into(), "X".into(), "X".into()],
            vec![
                Constituent::new("S", IndexSet::range(3)),
                Constituent::new("A", set(&[1, 2])),
                Constituent::new("B", set(&[0, 1])),
            ],
        );
        assert!(t
            .validate()
            .iter()
            .any(|v| matches!(v, TreeViolation::Crossing { .. })));
    }

    #[test]
    fn validate_reports_missing_root() {
        let t = DiscTree::new(
            vec!["a".into(), "b".into()],
            vec!["X".into(), "X".into()],
            vec![Constituent::new("A", set(&[0]))],
        );
        assert_eq!(t.validate(), vec![TreeViolation::MissingRoot]);
    }

    #[test]
    fn collapse_merges_same_yield_chain() {
        let t = DiscTree {
            tokens: vec!["a".into(), "b".into()],
            pos_tags: vec!["X".into(), "Y".into()],
            constituents: vec![
                Constituent::new("S", set(&[0, 1])),
                // NP above VP over the same yield.
                Constituent::new("NP", set(&[1])),
                Constituent::new("VP", set(&[1])),
            ],
            synthetic_root: false,
        };
        let collapsed = t.collapse_unaries("+");
        assert_eq!(
            collapsed.constituents,
            vec![
                Constituent::new("NP+VP", set(&[1])),
                Constituent::new("S", set(&[0, 1])),
            ]
        );
        assert_eq!(collapsed.expand_unaries("+"), {
            let mut t = t.clone();
            t.canonicalize();
            t
        });
    }

    #[test]
    fn collapse_is_identity_without_chains() {
        let t = figure_tree();
        assert_eq!(t.collapse_unaries("+"), t);
    }
}
