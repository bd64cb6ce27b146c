//! Reading and writing discontinuous trees in the discbracket format, and
//! vocabulary construction.
//!
//! One tree per line. A node is `(LABEL child+)`; a terminal child is
//! `INDEX=TOKEN` with 0-based indices; a node whose single child is a
//! terminal is a preterminal and its label is the POS tag. Terminal indices
//! encode the linear order, so crossing branches need no special syntax.

use std::collections::HashMap;
use std::fmt;

use crate::tree::{Constituent, DiscTree, IndexSet};

pub const DEFAULT_UNARY_SEP: &str = "+";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReadErrorKind {
    EmptyLine,
    UnbalancedBrackets,
    MissingLabel,
    EmptyNode { label: String },
    BadTerminal { text: String },
    TerminalOutsidePreterminal { label: String },
    DuplicateIndex { index: usize },
    MissingIndex { index: usize },
    LabelContainsSeparator { label: String, sep: String },
    InvalidTree { detail: String },
}

impl fmt::Display for ReadErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReadErrorKind::EmptyLine => write!(f, "empty line"),
            ReadErrorKind::UnbalancedBrackets => write!(f, "unbalanced brackets"),
            ReadErrorKind::MissingLabel => write!(f, "node without label"),
            ReadErrorKind::EmptyNode { label } => write!(f, "node {label} has no children"),
            ReadErrorKind::BadTerminal { text } => {
                write!(f, "malformed terminal {text:?} (expected INDEX=TOKEN)")
            }
            ReadErrorKind::TerminalOutsidePreterminal { label } => {
                write!(f, "node {label} mixes terminals with other children")
            }
            ReadErrorKind::DuplicateIndex { index } => write!(f, "duplicate index {index}"),
            ReadErrorKind::MissingIndex { index } => write!(f, "missing index {index}"),
            ReadErrorKind::LabelContainsSeparator { label, sep } => write!(
                f,
                "label {label:?} contains the unary separator {sep:?}; \
                 change the separator"
            ),
            ReadErrorKind::InvalidTree { detail } => write!(f, "invalid tree: {detail}"),
        }
    }
}

/// Read failure with its 1-based line number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadError {
    pub line: usize,
    pub kind: ReadErrorKind,
}

impl fmt::Display for ReadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.kind)
    }
}

impl std::error::Error for ReadError {}

enum RawNode {
    Terminal { index: usize, token: String },
    Inner { label: String, children: Vec<RawNode> },
}

struct Parser<'a> {
    rest: &'a str,
}

impl<'a> Parser<'a> {
    fn new(line: &'a str) -> Self {
        Parser { rest: line }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn take_atom(&mut self) -> &'a str {
        let end = self
            .rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(self.rest.len());
        let (atom, rest) = self.rest.split_at(end);
        self.rest = rest;
        atom
    }

    fn parse_node(&mut self) -> Result<RawNode, ReadErrorKind> {
        self.skip_ws();
        if let Some(rest) = self.rest.strip_prefix('(') {
            self.rest = rest;
            self.skip_ws();
            let label = self.take_atom();
            if label.is_empty() {
                return Err(ReadErrorKind::MissingLabel);
            }
            let mut children = Vec::new();
            loop {
                self.skip_ws();
                if let Some(rest) = self.rest.strip_prefix(')') {
                    self.rest = rest;
                    break;
                }
                if self.rest.is_empty() {
                    return Err(ReadErrorKind::UnbalancedBrackets);
                }
                children.push(self.parse_node()?);
            }
            if children.is_empty() {
                return Err(ReadErrorKind::EmptyNode { label: label.to_string() });
            }
            Ok(RawNode::Inner { label: label.to_string(), children })
        } else {
            let atom = self.take_atom();
            if atom.is_empty() {
                return Err(ReadErrorKind::UnbalancedBrackets);
            }
            let (index, token) = atom
                .split_once('=')
                .ok_or_else(|| ReadErrorKind::BadTerminal { text: atom.to_string() })?;
            let index = index
                .parse::<usize>()
                .map_err(|_| ReadErrorKind::BadTerminal { text: atom.to_string() })?;
            if token.is_empty() {
                return Err(ReadErrorKind::BadTerminal { text: atom.to_string() });
            }
            Ok(RawNode::Terminal { index, token: token.to_string() })
        }
    }
}

struct TreeBuilder {
    terminals: HashMap<usize, (String, String)>,
    constituents: Vec<Constituent>,
}

impl TreeBuilder {
    /// Walks a node top-down; returns its yield. Same-yield chains end up
    /// parent-first in `constituents`, which is what collapse expects.
    fn walk(&mut self, node: &RawNode) -> Result<IndexSet, ReadErrorKind> {
        let RawNode::Inner { label, children } = node else {
            unreachable!("walk is only called on inner nodes");
        };
        if let [RawNode::Terminal { index, token }] = children.as_slice() {
            // Preterminal: label is the POS tag.
            if self
                .terminals
                .insert(*index, (label.clone(), token.clone()))
                .is_some()
            {
                return Err(ReadErrorKind::DuplicateIndex { index: *index });
            }
            return Ok(IndexSet::singleton(*index));
        }
        if children
            .iter()
            .any(|c| matches!(c, RawNode::Terminal { .. }))
        {
            return Err(ReadErrorKind::TerminalOutsidePreterminal { label: label.clone() });
        }
        let slot = self.constituents.len();
        self.constituents
            .push(Constituent::new(label.clone(), IndexSet::empty()));
        let mut yield_set = IndexSet::empty();
        for child in children {
            yield_set = yield_set.union(&self.walk(child)?);
        }
        self.constituents[slot].yield_set = yield_set.clone();
        Ok(yield_set)
    }
}

/// Parses a single discbracket line into a collapsed, validated tree.
pub fn parse_discbracket_line(line: &str, sep: &str) -> Result<DiscTree, ReadErrorKind> {
    if line.trim().is_empty() {
        return Err(ReadErrorKind::EmptyLine);
    }
    let mut parser = Parser::new(line);
    let top = parser.parse_node()?;
    parser.skip_ws();
    if !parser.rest.is_empty() {
        return Err(ReadErrorKind::UnbalancedBrackets);
    }
    if matches!(top, RawNode::Terminal { .. }) {
        return Err(ReadErrorKind::BadTerminal { text: line.trim().to_string() });
    }

    let mut builder = TreeBuilder { terminals: HashMap::new(), constituents: Vec::new() };
    builder.walk(&top)?;

    let n = builder.terminals.len();
    let mut tokens = Vec::with_capacity(n);
    let mut pos_tags = Vec::with_capacity(n);
    for index in 0..n {
        let (tag, token) = builder
            .terminals
            .remove(&index)
            .ok_or(ReadErrorKind::MissingIndex { index })?;
        tokens.push(token);
        pos_tags.push(tag);
    }
    for c in &builder.constituents {
        if c.label.contains(sep) {
            return Err(ReadErrorKind::LabelContainsSeparator {
                label: c.label.clone(),
                sep: sep.to_string(),
            });
        }
    }

    let mut tree = DiscTree {
        tokens,
        pos_tags,
        constituents: builder.constituents,
        synthetic_root: false,
    };
    let full = IndexSet::range(n);
    if !tree.constituents.iter().any(|c| c.yield_set == full) {
        tree.constituents
            .insert(0, Constituent::new("ROOT", full));
        tree.synthetic_root = true;
    }
    let tree = tree.collapse_unaries(sep);
    let violations = tree.validate();
    if let Some(v) = violations.first() {
        return Err(ReadErrorKind::InvalidTree { detail: v.to_string() });
    }
    Ok(tree)
}

/// Serializes a tree as one discbracket line: unary chains expanded,
/// children ordered by left index, a synthetic root stripped again.
pub fn write_discbracket(tree: &DiscTree, sep: &str) -> String {
    let expanded = tree.expand_unaries(sep);
    // Children of each constituent: constituents and terminals directly
    // below it. Constituents are matched to their narrowest strict parent;
    // within an equal-yield chain the canonical order is parent-first.
    let cs = &expanded.constituents;
    let mut children: Vec<Vec<Part>> = vec![Vec::new(); cs.len()];
    let mut top: Vec<Part> = Vec::new();

    // parent_of[i]: index of the tightest constituent above constituent i.
    for i in 0..cs.len() {
        let mut best: Option<usize> = None;
        for j in 0..cs.len() {
            if i == j {
                continue;
            }
            let contains = cs[i].yield_set.is_subset(&cs[j].yield_set);
            let proper = contains
                && (cs[j].yield_set.len() > cs[i].yield_set.len()
                    || (cs[i].yield_set == cs[j].yield_set && j < i));
            if proper {
                best = match best {
                    None => Some(j),
                    Some(b) => {
                        let tighter = cs[j].yield_set.len() < cs[b].yield_set.len()
                            || (cs[j].yield_set == cs[b].yield_set && j > b);
                        Some(if tighter { j } else { b })
                    }
                };
            }
        }
        match best {
            Some(p) => children[p].push(Part::Node(i)),
            None => top.push(Part::Node(i)),
        }
    }
    for t in 0..expanded.tokens.len() {
        let mut best: Option<usize> = None;
        for (j, c) in cs.iter().enumerate() {
            if c.yield_set.contains(t) {
                let tighter = match best {
                    None => true,
                    Some(b) => {
                        cs[j].yield_set.len() < cs[b].yield_set.len()
                            || (cs[j].yield_set == cs[b].yield_set && j > b)
                    }
                };
                if tighter {
                    best = Some(j);
                }
            }
        }
        match best {
            Some(p) => children[p].push(Part::Terminal(t)),
            None => top.push(Part::Terminal(t)),
        }
    }

    fn left_of(part: &Part, cs: &[Constituent]) -> usize {
        match part {
            Part::Node(i) => cs[*i].yield_set.left_index().unwrap_or(0),
            Part::Terminal(t) => *t,
        }
    }

    fn render(part: &Part, expanded: &DiscTree, children: &[Vec<Part>], out: &mut String) {
        match part {
            Part::Terminal(t) => {
                out.push('(');
                out.push_str(&expanded.pos_tags[*t]);
                out.push(' ');
                out.push_str(&t.to_string());
                out.push('=');
                out.push_str(&expanded.tokens[*t]);
                out.push(')');
            }
            Part::Node(i) => {
                out.push('(');
                out.push_str(&expanded.constituents[*i].label);
                let mut kids = children[*i].clone();
                kids.sort_by_key(|p| left_of(p, &expanded.constituents));
                for kid in &kids {
                    out.push(' ');
                    render(kid, expanded, children, out);
                }
                out.push(')');
            }
        }
    }

    let mut roots: Vec<Part> = top;
    if expanded.synthetic_root {
        // The synthetic wrapper is the unique top node; emit its children.
        if let [Part::Node(r)] = roots.as_slice() {
            let r = *r;
            roots = children[r].clone();
            children[r].clear();
        }
    }
    roots.sort_by_key(|p| left_of(p, &expanded.constituents));
    let mut out = String::new();
    for (k, part) in roots.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        render(part, &expanded, &children, &mut out);
    }
    out
}

#[derive(Clone)]
enum Part {
    Node(usize),
    Terminal(usize),
}

/// A word type with its corpus frequency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordEntry {
    pub form: String,
    pub freq: usize,
    /// Marked on the least frequent types; these may be replaced by UNK
    /// during training.
    pub unk_replaceable: bool,
}

/// Vocabularies and inventories extracted from a treebank. Id 0 is the UNK
/// entry for words and characters; inventories are sorted by descending
/// frequency, ties broken lexicographically.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    pub words: Vec<WordEntry>,
    word_ids: HashMap<String, usize>,
    pub chars: Vec<char>,
    char_ids: HashMap<char, usize>,
    pub pos_tags: Vec<String>,
    pos_ids: HashMap<String, usize>,
    pub nonterminals: Vec<String>,
    nt_ids: HashMap<String, usize>,
}

pub const UNK_ID: usize = 0;

impl Vocabulary {
    /// Id of a word form; 0 (UNK) when unknown. Known words start at 1.
    pub fn word_id(&self, form: &str) -> usize {
        self.word_ids.get(form).map_or(UNK_ID, |&i| i + 1)
    }

    pub fn char_id(&self, ch: char) -> usize {
        self.char_ids.get(&ch).map_or(UNK_ID, |&i| i + 1)
    }

    pub fn pos_id(&self, tag: &str) -> Option<usize> {
        self.pos_ids.get(tag).copied()
    }

    pub fn nt_id(&self, label: &str) -> Option<usize> {
        self.nt_ids.get(label).copied()
    }

    pub fn word_rows(&self) -> usize {
        self.words.len() + 1
    }

    pub fn char_rows(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn is_unk_replaceable(&self, id: usize) -> bool {
        id > 0 && self.words[id - 1].unk_replaceable
    }

    fn rebuild_maps(&mut self) {
        self.word_ids =
            self.words.iter().enumerate().map(|(i, w)| (w.form.clone(), i)).collect();
        self.char_ids = self.chars.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        self.pos_ids =
            self.pos_tags.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        self.nt_ids =
            self.nonterminals.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
    }

    /// Rebuilds a vocabulary from stored parts (model deserialization).
    pub fn from_parts(
        words: Vec<WordEntry>,
        chars: Vec<char>,
        pos_tags: Vec<String>,
        nonterminals: Vec<String>,
    ) -> Self {
        let mut v = Vocabulary {
            words,
            chars,
            pos_tags,
            nonterminals,
            ..Default::default()
        };
        v.rebuild_maps();
        v
    }
}

fn ranked<T: Ord + Clone>(counts: HashMap<T, usize>) -> Vec<(T, usize)> {
    let mut items: Vec<(T, usize)> = counts.into_iter().collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    items
}

/// Builds all vocabularies from a tree sequence. The `2|V|/3` least
/// frequent word types are marked UNK-replaceable.
pub fn build_vocabularies(trees: &[DiscTree]) -> Result<Vocabulary, String> {
    if trees.is_empty() {
        return Err("cannot build vocabularies from an empty corpus".into());
    }
    let mut words: HashMap<String, usize> = HashMap::new();
    let mut chars: HashMap<char, usize> = HashMap::new();
    let mut pos: HashMap<String, usize> = HashMap::new();
    let mut nts: HashMap<String, usize> = HashMap::new();
    for tree in trees {
        for token in &tree.tokens {
            *words.entry(token.clone()).or_default() += 1;
            for ch in token.chars() {
                *chars.entry(ch).or_default() += 1;
            }
        }
        for tag in &tree.pos_tags {
            *pos.entry(tag.clone()).or_default() += 1;
        }
        for c in &tree.constituents {
            *nts.entry(c.label.clone()).or_default() += 1;
        }
    }
    let ranked_words = ranked(words);
    let total = ranked_words.len();
    let replaceable_from = total - (2 * total) / 3;
    let words: Vec<WordEntry> = ranked_words
        .into_iter()
        .enumerate()
        .map(|(rank, (form, freq))| WordEntry {
            form,
            freq,
            unk_replaceable: rank >= replaceable_from,
        })
        .collect();
    let mut vocab = Vocabulary {
        words,
        chars: ranked(chars).into_iter().map(|(c, _)| c).collect(),
        pos_tags: ranked(pos).into_iter().map(|(t, _)| t).collect(),
        nonterminals: ranked(nts).into_iter().map(|(x, _)| x).collect(),
        ..Default::default()
    };
    vocab.rebuild_maps();
    Ok(vocab)
}

/// A parsed treebank together with its vocabularies.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub trees: Vec<DiscTree>,
    pub vocab: Vocabulary,
}

/// Reads a whole discbracket stream (one tree per line, trailing `\r`
/// tolerated) and builds the vocabularies.
pub fn read_discbracket(text: &str, sep: &str) -> Result<Corpus, ReadError> {
    let mut trees = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let tree = parse_discbracket_line(line, sep)
            .map_err(|kind| ReadError { line: lineno + 1, kind })?;
        trees.push(tree);
    }
    let vocab = build_vocabularies(&trees).map_err(|_| ReadError {
        line: 0,
        kind: ReadErrorKind::EmptyLine,
    })?;
    Ok(Corpus { trees, vocab })
}
