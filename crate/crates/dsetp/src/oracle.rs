//! Oracles for the set-based transition system.
//!
//! The static oracle turns a gold tree into its canonical derivation; the
//! dynamic oracle maps any configuration — including error states — to the
//! set of actions that preserve the best reachable F-score. An exhaustive
//! search oracle over small sentences serves as the reference both are
//! verified against.

use std::collections::HashMap;

use crate::transition::{Action, Configuration};
use crate::tree::{Constituent, DiscTree, IndexSet};

/// A gold constituent `(X, g)` not yet built is still reachable iff
///
/// 1. `max(focus) <= max(g)`, and
/// 2. every member of `memory ∪ {focus}` is a subset of `g` or disjoint
///    from it,
///
/// with one refinement at structural parity: a configuration about to take
/// a structural action has already passed the labelling step for its focus,
/// so `g = focus` is no longer buildable there. With that refinement the
/// test agrees exactly with brute-force completion search at every
/// configuration, including goal configurations.
pub fn constituent_reachable(c: &Configuration, g: &IndexSet) -> bool {
    let Some(focus) = c.focus.as_ref() else {
        // Null focus: condition 1 is vacuous and only memory constrains g.
        return c.memory.values().all(|s| s.compatible(g));
    };
    if focus.right_index() > g.right_index() {
        return false;
    }
    if c.structural_turn() && focus == g {
        return false;
    }
    focus.compatible(g) && c.memory.values().all(|s| s.compatible(g))
}

/// Gold constituents that are not yet built and still reachable.
pub fn reach<'a>(c: &Configuration, gold: &'a DiscTree) -> Vec<&'a Constituent> {
    gold.constituents
        .iter()
        .filter(|k| !c.contains_built(&k.label, &k.yield_set))
        .filter(|k| constituent_reachable(c, &k.yield_set))
        .collect()
}

/// The smallest reachable gold constituent under the construction order,
/// or `None` when nothing remains reachable.
pub fn next_constituent<'a>(c: &Configuration, gold: &'a DiscTree) -> Option<&'a Constituent> {
    let mut best: Option<&Constituent> = None;
    for k in reach(c, gold) {
        best = match best {
            None => Some(k),
            Some(b) if k.precedes(b) => Some(k),
            Some(b) => Some(b),
        };
    }
    best
}

/// The dynamic oracle's answer: every optimal action, plus the single
/// canonical one selected by [`tie_break`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleAnswer {
    pub actions: Vec<Action>,
    pub canonical: Action,
}

/// Deterministic choice among optimal actions: a combine beats a shift, and
/// among combines the memory item with the greatest right index wins.
/// Labelling answers are singletons and pass through.
pub fn tie_break(actions: &[Action], c: &Configuration) -> Action {
    assert!(!actions.is_empty(), "tie_break on an empty action set");
    let mut best: Option<(usize, usize)> = None; // (right index, key)
    for a in actions {
        if let Action::Combine(k) = a {
            let right = c.memory[k].right_index().expect("memory items are non-empty");
            if best.is_none_or(|(r, _)| right > r) {
                best = Some((right, *k));
            }
        }
    }
    match best {
        Some((_, k)) => Action::Combine(k),
        None => actions[0].clone(),
    }
}

/// The set of F-optimal actions from `c` with respect to `gold`.
///
/// Odd steps label the focus iff its yield is a gold constituent. Even
/// steps aim at the smallest reachable gold constituent `(X, s_g)`: every
/// combine staying inside `s_g` is optimal, and SHIFT is optimal too when
/// `s_g` extends past the focus. When no gold constituent is reachable the
/// score is already fixed, and every legal structural action is returned.
pub fn dynamic_oracle(c: &Configuration, gold: &DiscTree) -> OracleAnswer {
    let n = gold.len();
    assert!(!c.is_goal(n), "dynamic oracle queried at a goal configuration");
    let actions = if c.structural_turn() {
        let Some(focus) = c.focus.as_ref() else {
            return OracleAnswer { actions: vec![Action::Shift], canonical: Action::Shift };
        };
        match next_constituent(c, gold) {
            Some(target) => {
                let goal_set = &target.yield_set;
                let mut actions: Vec<Action> = c
                    .memory
                    .iter()
                    .filter(|(_, s)| focus.union(s).is_subset(goal_set))
                    .map(|(&k, _)| Action::Combine(k))
                    .collect();
                if goal_set.right_index() > focus.right_index() {
                    actions.push(Action::Shift);
                }
                actions
            }
            // Error state with nothing left to save: any structural action.
            None => {
                let mut actions: Vec<Action> =
                    c.memory.keys().map(|&k| Action::Combine(k)).collect();
                if c.next_token < n {
                    actions.push(Action::Shift);
                }
                actions
            }
        }
    } else {
        let focus = c.focus.as_ref().expect("odd steps always have a focus");
        match gold.constituent_with_yield(focus) {
            Some(k) => vec![Action::Label(k.label.clone())],
            None => vec![Action::NoLabel],
        }
    };
    let canonical = tie_break(&actions, c);
    OracleAnswer { actions, canonical }
}

/// Canonical derivation for a gold tree.
///
/// Combines as soon as possible: at each structural step, among the
/// combines after which every remaining gold constituent is still
/// reachable, the one with the greatest right index (the most recent
/// insertion) is taken; otherwise shift. Labelling steps label the focus
/// iff its yield is gold. Replaying the result reconstructs the tree.
pub fn static_oracle(gold: &DiscTree) -> Result<Vec<Action>, String> {
    let violations = gold.validate();
    if let Some(v) = violations.first() {
        return Err(format!("invalid gold tree: {v}"));
    }
    let n = gold.len();
    let mut c = Configuration::initial(n)?;
    let mut actions = Vec::with_capacity(4 * n - 2);
    while !c.is_goal(n) {
        let action = if c.structural_turn() {
            let mut best: Option<(usize, usize)> = None; // (right index, key)
            if c.focus.is_some() {
                for (&k, s) in &c.memory {
                    let after = c.apply(&Action::Combine(k), n).expect("combine is legal");
                    if tree_consistent(&after, gold) {
                        let right = s.right_index().unwrap();
                        if best.is_none_or(|(r, _)| right > r) {
                            best = Some((right, k));
                        }
                    }
                }
            }
            match best {
                Some((_, k)) => Action::Combine(k),
                None => Action::Shift,
            }
        } else {
            let focus = c.focus.as_ref().expect("odd steps always have a focus");
            match gold.constituent_with_yield(focus) {
                Some(k) => Action::Label(k.label.clone()),
                None => Action::NoLabel,
            }
        };
        c = c
            .apply(&action, n)
            .map_err(|e| format!("static oracle stuck at step {}: {e}", c.step))?;
        actions.push(action);
    }
    Ok(actions)
}

/// True when every gold constituent not yet built stays reachable from `c`.
fn tree_consistent(c: &Configuration, gold: &DiscTree) -> bool {
    gold.constituents
        .iter()
        .filter(|k| !c.contains_built(&k.label, &k.yield_set))
        .all(|k| constituent_reachable(c, &k.yield_set))
}

/// Exhaustive completion search over small sentences: the best labelled F1
/// any completion of a configuration can still reach against `gold`.
///
/// Independent of [`constituent_reachable`] and the oracle definitions: it
/// enumerates legal transitions only, restricting labelling to the gold
/// label of the focus (a wrong label can only lower precision). Search
/// states are memoized per gold tree, so repeated queries against the same
/// tree share work.
pub struct ExhaustiveOracle<'a> {
    gold: &'a DiscTree,
    n: usize,
    /// Gold yields as bitmasks, aligned with `gold.constituents`.
    gold_masks: Vec<u64>,
    memo: HashMap<SearchKey, usize>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct SearchKey {
    memory: Vec<u64>,
    focus: u64,
    next_token: u8,
    structural: bool,
    remaining: u32,
}

pub const EXHAUSTIVE_MAX_TOKENS: usize = 7;

fn mask_of(s: &IndexSet) -> u64 {
    s.iter().fold(0u64, |m, i| m | (1 << i))
}

impl<'a> ExhaustiveOracle<'a> {
    pub fn new(gold: &'a DiscTree) -> Result<Self, String> {
        let n = gold.len();
        if n > EXHAUSTIVE_MAX_TOKENS {
            return Err(format!(
                "exhaustive search is limited to {EXHAUSTIVE_MAX_TOKENS} tokens, got {n}"
            ));
        }
        if gold.constituents.len() > 32 {
            return Err("too many gold constituents for the search mask".into());
        }
        let gold_masks = gold.constituents.iter().map(|k| mask_of(&k.yield_set)).collect();
        Ok(ExhaustiveOracle { gold, n, gold_masks, memo: HashMap::new() })
    }

    /// Best reachable labelled F1 from `c`.
    pub fn best_f(&mut self, c: &Configuration) -> f64 {
        let built = c.built.len();
        let matched = c
            .built
            .iter()
            .filter(|b| self.gold.constituents.contains(b))
            .count();
        // Gold constituents not yet built, as a bitmask.
        let mut remaining: u32 = 0;
        for (i, k) in self.gold.constituents.iter().enumerate() {
            if !c.built.contains(k) {
                remaining |= 1 << i;
            }
        }
        let key = SearchKey {
            memory: {
                let mut m: Vec<u64> = c.memory.values().map(mask_of).collect();
                m.sort_unstable();
                m
            },
            focus: c.focus.as_ref().map_or(0, mask_of),
            next_token: c.next_token as u8,
            structural: c.structural_turn(),
            remaining,
        };
        let extra = self.search(&key);
        let total_gold = self.gold.constituents.len();
        // Completions only ever add gold constituents, so F is monotone in
        // the number added; the best completion adds `extra` of them.
        let m = (matched + extra) as f64;
        let p_den = (built + extra) as f64;
        let r_den = total_gold as f64;
        if m == 0.0 {
            return 0.0;
        }
        let p = m / p_den;
        let r = m / r_den;
        2.0 * p * r / (p + r)
    }

    /// Maximum number of `remaining` gold constituents a completion can
    /// still build.
    fn search(&mut self, key: &SearchKey) -> usize {
        if let Some(&hit) = self.memo.get(key) {
            return hit;
        }
        let mut best = 0usize;
        if key.structural {
            // SHIFT
            if (key.next_token as usize) < self.n {
                let mut next = key.memory.clone();
                if key.focus != 0 {
                    next.push(key.focus);
                    next.sort_unstable();
                }
                let k2 = SearchKey {
                    memory: next,
                    focus: 1 << key.next_token,
                    next_token: key.next_token + 1,
                    structural: false,
                    remaining: key.remaining,
                };
                best = best.max(self.search(&k2));
            }
            // COMBINE with each memory item.
            if key.focus != 0 {
                for (i, &item) in key.memory.iter().enumerate() {
                    let mut next = key.memory.clone();
                    next.remove(i);
                    let k2 = SearchKey {
                        memory: next,
                        focus: key.focus | item,
                        next_token: key.next_token,
                        structural: false,
                        remaining: key.remaining,
                    };
                    best = best.max(self.search(&k2));
                }
            }
        } else {
            // LABEL the focus when it is a remaining gold yield.
            for (i, &mask) in self.gold_masks.iter().enumerate() {
                if key.remaining & (1 << i) != 0 && mask == key.focus {
                    let k2 = SearchKey {
                        remaining: key.remaining & !(1 << i),
                        structural: true,
                        ..key.clone()
                    };
                    best = best.max(1 + self.search(&k2));
                }
            }
            // NO-LABEL, unless this is the forced final labelling step.
            let forced = (key.next_token as usize) == self.n && key.memory.is_empty();
            if !forced || best == 0 {
                // At a forced step with no gold match the parser must emit
                // some label; it adds nothing gold, so the count continues
                // unchanged either way.
                let k2 = SearchKey { structural: true, ..key.clone() };
                best = best.max(self.search(&k2));
            }
        }
        self.memo.insert(key.clone(), best);
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_trees, GenConfig};
    use crate::sample;
    use crate::transition::{format_derivation, replay};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec())
    }

    #[test]
    fn static_oracle_reproduces_worked_derivation() {
        let tree = sample::wh_question_tree();
        let actions = static_oracle(&tree).unwrap();
        assert_eq!(
            format_derivation(&actions),
            format_derivation(&sample::wh_question_derivation())
        );
        let end = replay(8, &actions).unwrap();
        assert!(end.is_goal(8));
        let mut built = end.built.clone();
        built.sort_by(|a, b| a.yield_set.as_slice().cmp(b.yield_set.as_slice()));
        let mut gold = tree.constituents.clone();
        gold.sort_by(|a, b| a.yield_set.as_slice().cmp(b.yield_set.as_slice()));
        assert_eq!(built, gold);
    }

    #[test]
    fn static_oracle_on_single_token() {
        let tree = DiscTree::new(
            vec!["hi".into()],
            vec!["UH".into()],
            vec![Constituent::new("X", IndexSet::range(1))],
        );
        let actions = static_oracle(&tree).unwrap();
        assert_eq!(actions, vec![Action::Shift, Action::Label("X".into())]);
    }

    #[test]
    fn static_oracle_flat_ternary_is_eager() {
        let tree = DiscTree::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["T".into(), "T".into(), "T".into()],
            vec![Constituent::new("X", IndexSet::range(3))],
        );
        let actions = static_oracle(&tree).unwrap();
        assert_eq!(
            format_derivation(&actions),
            "SHIFT NOLABEL SHIFT NOLABEL COMB-0 NOLABEL SHIFT NOLABEL COMB-0 LABEL-X"
        );
    }

    #[test]
    fn reachability_conditions() {
        // memory {{0},{1,2}}, focus {3}, i=4: {1,2,3,5} is reachable.
        let c = Configuration {
            memory: [(0, set(&[0])), (1, set(&[1, 2]))].into_iter().collect(),
            focus: Some(set(&[3])),
            next_token: 4,
            built: Vec::new(),
            step: 7,
        };
        assert!(constituent_reachable(&c, &set(&[1, 2, 3, 5])));
        // memory {{1,2}}, focus {3}, i=4: {2,3} is blocked by {1,2}.
        let c = Configuration {
            memory: [(1, set(&[1, 2]))].into_iter().collect(),
            focus: Some(set(&[3])),
            next_token: 4,
            built: Vec::new(),
            step: 7,
        };
        assert!(!constituent_reachable(&c, &set(&[2, 3])));
    }

    #[test]
    fn reach_is_everything_at_start_and_empty_at_goal() {
        let tree = sample::wh_question_tree();
        let start = Configuration::initial(8).unwrap();
        assert_eq!(reach(&start, &tree).len(), tree.constituents.len());
        let end = replay(8, &sample::wh_question_derivation()).unwrap();
        assert!(reach(&end, &tree).is_empty());
    }

    #[test]
    fn reach_after_np_is_labelled() {
        let tree = sample::wh_question_tree();
        let actions = sample::wh_question_derivation();
        // Through LABEL-NP (12 actions): focus {3,4}.
        let c = replay(8, &actions[..12]).unwrap();
        let mut yields: Vec<String> =
            reach(&c, &tree).iter().map(|k| format!("{k:?}")).collect();
        yields.sort();
        assert_eq!(
            yields,
            vec![
                "(SBARQ, {0,1,2,3,4,5,6,7})",
                "(SQ, {1,2,3,4,5,6})",
                "(VP, {1,5,6})",
                "(VP, {1,6})"
            ]
        );
        let next = next_constituent(&c, &tree).unwrap();
        assert_eq!(next.yield_set, set(&[1, 6]));
    }

    #[test]
    fn oracle_answers_on_gold_path() {
        let tree = sample::wh_question_tree();
        let actions = sample::wh_question_derivation();
        // Focus {1} at the odd step after the second shift: label WHNP.
        let c = replay(8, &actions[..3]).unwrap();
        let answer = dynamic_oracle(&c, &tree);
        assert_eq!(answer.actions, vec![Action::Label("WHNP".into())]);
        // Focus {6} with {1} in memory and next = (VP, {1,6}): combine only.
        let c = replay(8, &actions[..18]).unwrap();
        let answer = dynamic_oracle(&c, &tree);
        assert_eq!(answer.actions, vec![Action::Combine(1)]);
        assert_eq!(answer.canonical, Action::Combine(1));
        // Focus {3,4} after LABEL-NP: next is (VP,{1,6}) whose yield cannot
        // absorb the focus, so only SHIFT is optimal.
        let c = replay(8, &actions[..12]).unwrap();
        let answer = dynamic_oracle(&c, &tree);
        assert_eq!(answer.actions, vec![Action::Shift]);
    }

    #[test]
    fn tie_break_prefers_combines_and_high_right_index() {
        let c = Configuration {
            memory: [(0, set(&[0])), (2, set(&[2, 3]))].into_iter().collect(),
            focus: Some(set(&[4])),
            next_token: 5,
            built: Vec::new(),
            step: 8,
        };
        assert_eq!(
            tie_break(&[Action::Shift, Action::Combine(0)], &c),
            Action::Combine(0)
        );
        assert_eq!(
            tie_break(&[Action::Combine(0), Action::Combine(2)], &c),
            Action::Combine(2)
        );
        assert_eq!(tie_break(&[Action::Shift], &c), Action::Shift);
    }

    #[test]
    fn exhaustive_best_f_trivial_cases() {
        let tree = sample::wh_question_tree();
        // n = 8 exceeds the bound.
        assert!(ExhaustiveOracle::new(&tree).is_err());

        let small = DiscTree::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["T".into(), "T".into(), "T".into()],
            vec![
                Constituent::new("X", IndexSet::range(3)),
                Constituent::new("Y", set(&[0, 1])),
            ],
        );
        let mut oracle = ExhaustiveOracle::new(&small).unwrap();
        let start = Configuration::initial(3).unwrap();
        assert_eq!(oracle.best_f(&start), 1.0);

        // Goal configuration: F comes straight from the built set.
        let actions = static_oracle(&small).unwrap();
        let end = replay(3, &actions).unwrap();
        assert!(end.is_goal(3));
        assert_eq!(oracle.best_f(&end), 1.0);
    }

    #[test]
    fn exhaustive_best_f_detects_a_lost_constituent() {
        // Gold: (X,{0,1,2}) with (Y,{0,1}). Shifting twice then refusing to
        // combine the first two tokens loses Y irrecoverably.
        let small = DiscTree::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["T".into(), "T".into(), "T".into()],
            vec![
                Constituent::new("X", IndexSet::range(3)),
                Constituent::new("Y", set(&[0, 1])),
            ],
        );
        let mut oracle = ExhaustiveOracle::new(&small).unwrap();
        let lost = replay(
            3,
            &[
                Action::Shift,
                Action::NoLabel,
                Action::Shift,
                Action::NoLabel,
                Action::Shift, // {0} and {1} can no longer merge alone
            ],
        )
        .unwrap();
        let best = oracle.best_f(&lost);
        // Only X remains reachable: best completion builds 1 of 2 gold
        // constituents with one predicted constituent.
        assert!((best - 2.0 / 3.0).abs() < 1e-12, "{best}");
    }

    #[test]
    fn static_round_trip_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let config = GenConfig { max_tokens: 9, gap_rate: 0.35, ..GenConfig::default() };
        for tree in random_trees(&mut rng, &config, 150) {
            let n = tree.len();
            let actions = static_oracle(&tree).unwrap();
            assert_eq!(actions.len(), 4 * n - 2, "{tree:?}");
            let end = replay(n, &actions).unwrap();
            assert!(end.is_goal(n));
            let mut built = end.built.clone();
            built.sort_by(|a, b| a.yield_set.as_slice().cmp(b.yield_set.as_slice()));
            let mut gold = tree.constituents.clone();
            gold.sort_by(|a, b| a.yield_set.as_slice().cmp(b.yield_set.as_slice()));
            assert_eq!(built, gold, "{tree:?}");
        }
    }

    #[test]
    fn dynamic_oracle_follows_gold_to_perfect_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let config = GenConfig { max_tokens: 9, gap_rate: 0.4, ..GenConfig::default() };
        for tree in random_trees(&mut rng, &config, 100) {
            let n = tree.len();
            let mut c = Configuration::initial(n).unwrap();
            while !c.is_goal(n) {
                let answer = dynamic_oracle(&c, &tree);
                c = c.apply(&answer.canonical, n).unwrap();
            }
            let mut built = c.built.clone();
            built.sort_by(|a, b| a.yield_set.as_slice().cmp(b.yield_set.as_slice()));
            let mut gold = tree.constituents.clone();
            gold.sort_by(|a, b| a.yield_set.as_slice().cmp(b.yield_set.as_slice()));
            assert_eq!(built, gold, "{tree:?}");
        }
    }

    #[test]
    fn odd_step_oracle_matches_static_choice_on_gold_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let config = GenConfig { max_tokens: 8, ..GenConfig::default() };
        for tree in random_trees(&mut rng, &config, 60) {
            let n = tree.len();
            let actions = static_oracle(&tree).unwrap();
            let mut c = Configuration::initial(n).unwrap();
            for a in &actions {
                if !c.structural_turn() {
                    let answer = dynamic_oracle(&c, &tree);
                    assert_eq!(answer.actions, vec![a.clone()], "{tree:?}");
                }
                c = c.apply(a, n).unwrap();
            }
        }
    }
}
