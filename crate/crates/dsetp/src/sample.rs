//! A small worked example used by tests, examples and documentation: a
//! wh-question whose extracted object makes two VPs discontinuous.

use crate::transition::{parse_derivation, Action};
use crate::tree::{Constituent, DiscTree, IndexSet};

/// discbracket encoding of the worked example.
pub const WH_QUESTION_DISCBRACKET: &str = "(SBARQ (RB 0=So) (SQ (VP (VP (WHNP (WP 1=what)) \
                                           (VB 6=do)) (TO 5=to)) (VBZ 2='s) (NP (DT 3=a) \
                                           (NN 4=parent))) (. 7=?))";

/// The worked example as a tree: "So what 's a parent to do ?" with
/// constituents {(SBARQ,{0..7}), (SQ,{1..6}), (WHNP,{1}), (NP,{3,4}),
/// (VP,{1,6}), (VP,{1,5,6})}.
pub fn wh_question_tree() -> DiscTree {
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
            Constituent::new("SQ", IndexSet::new((1..7).collect())),
            Constituent::new("WHNP", IndexSet::singleton(1)),
            Constituent::new("NP", IndexSet::new(vec![3, 4])),
            Constituent::new("VP", IndexSet::new(vec![1, 5, 6])),
            Constituent::new("VP", IndexSet::new(vec![1, 6])),
        ],
    )
}

/// The canonical 30-action derivation of [`wh_question_tree`].
pub fn wh_question_derivation() -> Vec<Action> {
    parse_derivation(
        "SHIFT NOLABEL SHIFT LABEL-WHNP SHIFT NOLABEL SHIFT NOLABEL SHIFT NOLABEL \
         COMB-3 LABEL-NP COMB-2 NOLABEL SHIFT NOLABEL SHIFT NOLABEL COMB-1 LABEL-VP \
         COMB-5 LABEL-VP COMB-2 LABEL-SQ COMB-0 NOLABEL SHIFT NOLABEL COMB-0 LABEL-SBARQ",
    )
    .expect("well-formed derivation text")
}
