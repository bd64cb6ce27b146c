//! The set-based transition system.
//!
//! A configuration holds an unordered memory of pending items, a focus item,
//! a buffer pointer and the constituents built so far. Even steps take
//! structural actions (SHIFT, COMBINE); odd steps take labelling actions
//! (LABEL-X, NO-LABEL). Every complete derivation for an n-token sentence
//! has exactly 4n-2 actions: n shifts, n-1 combines, and one labelling
//! action after each structural one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::tree::{Constituent, IndexSet};

/// One parser action.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Shift,
    /// Combine the focus with the memory item keyed by its left index.
    Combine(usize),
    Label(String),
    NoLabel,
}

impl Action {
    pub fn is_structural(&self) -> bool {
        matches!(self, Action::Shift | Action::Combine(_))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Shift => write!(f, "SHIFT"),
            Action::Combine(k) => write!(f, "COMB-{k}"),
            Action::Label(x) => write!(f, "LABEL-{x}"),
            Action::NoLabel => write!(f, "NOLABEL"),
        }
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "SHIFT" {
            Ok(Action::Shift)
        } else if s == "NOLABEL" {
            Ok(Action::NoLabel)
        } else if let Some(k) = s.strip_prefix("COMB-") {
            k.parse::<usize>()
                .map(Action::Combine)
                .map_err(|_| format!("bad combine key in {s:?}"))
        } else if let Some(x) = s.strip_prefix("LABEL-") {
            if x.is_empty() {
                Err("empty label".into())
            } else {
                Ok(Action::Label(x.to_string()))
            }
        } else {
            Err(format!("unknown action {s:?}"))
        }
    }
}

/// Renders a derivation in the whitespace-separated textual format.
pub fn format_derivation(actions: &[Action]) -> String {
    actions
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses the whitespace-separated textual derivation format.
pub fn parse_derivation(text: &str) -> Result<Vec<Action>, String> {
    text.split_whitespace().map(Action::from_str).collect()
}

/// Why an action could not be applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IllegalAction {
    WrongParity { step: usize, action: Action },
    ShiftAtBufferEnd,
    CombineWithoutFocus,
    NoSuchMemoryItem { key: usize },
    LabelWithoutFocus,
    NoLabelAtForcedStep,
}

impl fmt::Display for IllegalAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IllegalAction::WrongParity { step, action } => {
                let kind = if action.is_structural() { "structural" } else { "labelling" };
                write!(f, "{kind} action {action} at step {step} violates parity")
            }
            IllegalAction::ShiftAtBufferEnd => write!(f, "SHIFT with empty buffer (i = n)"),
            IllegalAction::CombineWithoutFocus => write!(f, "COMBINE with null focus"),
            IllegalAction::NoSuchMemoryItem { key } => {
                write!(f, "no memory item with left index {key}")
            }
            IllegalAction::LabelWithoutFocus => write!(f, "LABEL with null focus"),
            IllegalAction::NoLabelAtForcedStep => {
                write!(f, "NO-LABEL at the final step (i = n and S empty)")
            }
        }
    }
}

impl std::error::Error for IllegalAction {}

/// Parser state: memory, focus, buffer pointer, built constituents and the
/// step counter.
///
/// Values are persistent: [`Configuration::apply`] returns a new
/// configuration and never mutates its input, so oracles and exploration can
/// branch from shared prefixes.
#[derive(Clone, PartialEq, Eq)]
pub struct Configuration {
    /// Memory items keyed by left index. Left indices are unique because the
    /// members of `memory ∪ {focus}` partition `{0, …, i-1}`.
    pub memory: BTreeMap<usize, IndexSet>,
    pub focus: Option<IndexSet>,
    /// Position of the next buffer token.
    pub next_token: usize,
    pub built: Vec<Constituent>,
    pub step: usize,
}

impl Configuration {
    /// The initial configuration `(∅, null, 0, ∅):0`.
    pub fn initial(n: usize) -> Result<Configuration, String> {
        if n == 0 {
            return Err("cannot parse an empty sentence".into());
        }
        Ok(Configuration {
            memory: BTreeMap::new(),
            focus: None,
            next_token: 0,
            built: Vec::new(),
            step: 0,
        })
    }

    pub fn structural_turn(&self) -> bool {
        self.step % 2 == 0
    }

    /// Goal: empty memory, focus spanning the sentence, exhausted buffer,
    /// step counter at 4n-2.
    pub fn is_goal(&self, n: usize) -> bool {
        self.memory.is_empty()
            && self.next_token == n
            && self.step == 4 * n - 2
            && self.focus.as_ref().is_some_and(|f| f.len() == n)
    }

    /// True when the labelling step may not choose NO-LABEL.
    pub fn forced_label(&self, n: usize) -> bool {
        !self.structural_turn() && self.next_token == n && self.memory.is_empty()
    }

    pub fn contains_built(&self, label: &str, s: &IndexSet) -> bool {
        self.built
            .iter()
            .any(|c| c.label == label && &c.yield_set == s)
    }

    /// All actions whose preconditions hold, with LABEL-X enumerated over
    /// the given nonterminal inventory.
    pub fn legal_actions(&self, n: usize, nonterminals: &[String]) -> Vec<Action> {
        let mut out = Vec::new();
        if self.structural_turn() {
            if self.focus.is_some() {
                out.extend(self.memory.keys().map(|&k| Action::Combine(k)));
            }
            if self.next_token < n {
                out.push(Action::Shift);
            }
        } else {
            out.extend(nonterminals.iter().map(|x| Action::Label(x.clone())));
            if !self.forced_label(n) {
                out.push(Action::NoLabel);
            }
        }
        out
    }

    pub fn is_legal(&self, action: &Action, n: usize) -> bool {
        match action {
            Action::Shift => self.structural_turn() && self.next_token < n,
            Action::Combine(k) => {
                self.structural_turn() && self.focus.is_some() && self.memory.contains_key(k)
            }
            Action::Label(_) => !self.structural_turn() && self.focus.is_some(),
            Action::NoLabel => !self.structural_turn() && !self.forced_label(n),
        }
    }

    /// Applies one action, returning the successor configuration.
    pub fn apply(&self, action: &Action, n: usize) -> Result<Configuration, IllegalAction> {
        let structural = action.is_structural();
        if structural != self.structural_turn() {
            return Err(IllegalAction::WrongParity { step: self.step, action: action.clone() });
        }
        let mut next = self.clone();
        next.step += 1;
        match action {
            Action::Shift => {
                if self.next_token >= n {
                    return Err(IllegalAction::ShiftAtBufferEnd);
                }
                if let Some(old) = next.focus.take() {
                    let key = old.left_index().expect("focus is never empty");
                    next.memory.insert(key, old);
                }
                next.focus = Some(IndexSet::singleton(self.next_token));
                next.next_token += 1;
            }
            Action::Combine(k) => {
                let Some(focus) = next.focus.take() else {
                    return Err(IllegalAction::CombineWithoutFocus);
                };
                let Some(item) = next.memory.remove(k) else {
                    return Err(IllegalAction::NoSuchMemoryItem { key: *k });
                };
                next.focus = Some(focus.union(&item));
            }
            Action::Label(x) => {
                let Some(focus) = next.focus.as_ref() else {
                    return Err(IllegalAction::LabelWithoutFocus);
                };
                if !next.contains_built(x, focus) {
                    next.built.push(Constituent::new(x.clone(), focus.clone()));
                }
            }
            Action::NoLabel => {
                if self.forced_label(n) {
                    return Err(IllegalAction::NoLabelAtForcedStep);
                }
            }
        }
        Ok(next)
    }

    /// Left index of the memory item with the greatest right index, i.e. the
    /// most recently inserted one.
    pub fn newest_memory_key(&self) -> Option<usize> {
        self.memory
            .iter()
            .max_by_key(|(_, s)| s.right_index())
            .map(|(&k, _)| k)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({{")?;
        for (i, s) in self.memory.values().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}, ")?;
        match &self.focus {
            Some(s) => write!(f, "{s}")?,
            None => write!(f, "null")?,
        }
        write!(f, ", {}, |C|={}):{}", self.next_token, self.built.len(), self.step)
    }
}

/// Error from replaying a derivation: the offending step and cause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayError {
    pub step: usize,
    pub cause: IllegalAction,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "illegal action at step {}: {}", self.step, self.cause)
    }
}

impl std::error::Error for ReplayError {}

/// Folds `apply` over an action sequence from the initial configuration.
pub fn replay(n: usize, actions: &[Action]) -> Result<Configuration, ReplayError> {
    let mut c = Configuration::initial(n)
        .map_err(|_| ReplayError { step: 0, cause: IllegalAction::ShiftAtBufferEnd })?;
    for (step, a) in actions.iter().enumerate() {
        c = c.apply(a, n).map_err(|cause| ReplayError { step, cause })?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::IndexSet;

    fn nts() -> Vec<String> {
        ["S", "NP", "VP"].iter().map(|s| s.to_string()).collect()
    }

    /// Table-style worked derivation for the 8-token wh-question.
    pub(crate) fn wh_question_derivation() -> Vec<Action> {
        parse_derivation(
            "SHIFT NOLABEL SHIFT LABEL-WHNP SHIFT NOLABEL SHIFT NOLABEL SHIFT NOLABEL \
             COMB-3 LABEL-NP COMB-2 NOLABEL SHIFT NOLABEL SHIFT NOLABEL COMB-1 LABEL-VP \
             COMB-5 LABEL-VP COMB-2 LABEL-SQ COMB-0 NOLABEL SHIFT NOLABEL COMB-0 LABEL-SBARQ",
        )
        .unwrap()
    }

    #[test]
    fn initial_shape() {
        let c = Configuration::initial(8).unwrap();
        assert!(c.memory.is_empty());
        assert!(c.focus.is_none());
        assert_eq!(c.next_token, 0);
        assert!(c.built.is_empty());
        assert_eq!(c.step, 0);
        assert!(!c.is_goal(8));
        assert!(!Configuration::initial(1).unwrap().is_goal(1));
        assert!(Configuration::initial(0).is_err());
    }

    #[test]
    fn initial_allows_only_shift() {
        let c = Configuration::initial(8).unwrap();
        assert_eq!(c.legal_actions(8, &nts()), vec![Action::Shift]);
    }

    #[test]
    fn full_wh_question_replay() {
        let actions = wh_question_derivation();
        assert_eq!(actions.len(), 30);
        let end = replay(8, &actions).unwrap();
        assert!(end.is_goal(8));
        let mut built: Vec<(String, Vec<usize>)> = end
            .built
            .iter()
            .map(|c| (c.label.clone(), c.yield_set.iter().collect()))
            .collect();
        built.sort();
        assert_eq!(
            built,
            vec![
                ("NP".to_string(), vec![3, 4]),
                ("SBARQ".to_string(), (0..8).collect()),
                ("SQ".to_string(), (1..7).collect()),
                ("VP".to_string(), vec![1, 5, 6]),
                ("VP".to_string(), vec![1, 6]),
                ("WHNP".to_string(), vec![1]),
            ]
        );
    }

    #[test]
    fn combine_moves_item_into_focus() {
        // Reach the configuration with focus {6} and {1} in memory, then
        // combine.
        let actions = wh_question_derivation();
        let c = replay(8, &actions[..18]).unwrap();
        assert_eq!(c.focus, Some(IndexSet::singleton(6)));
        assert!(c.memory.contains_key(&1));
        let after = c.apply(&Action::Combine(1), 8).unwrap();
        assert_eq!(after.focus, Some(IndexSet::new(vec![1, 6])));
        assert!(!after.memory.contains_key(&1));
        // Input untouched.
        assert_eq!(c.focus, Some(IndexSet::singleton(6)));
    }

    #[test]
    fn label_grows_built_by_one() {
        let actions = wh_question_derivation();
        let c = replay(8, &actions[..19]).unwrap();
        let after = c.apply(&Action::Label("VP".into()), 8).unwrap();
        assert_eq!(after.built.len(), c.built.len() + 1);
        let newest = after.built.last().unwrap();
        assert_eq!(newest.label, "VP");
        assert_eq!(newest.yield_set, IndexSet::new(vec![1, 6]));
    }

    #[test]
    fn structural_options_mid_derivation() {
        // After shifting "to": memory {0},{1},{2,3,4}, focus {5}, i = 6.
        let actions = wh_question_derivation();
        let c = replay(8, &actions[..14]).unwrap();
        assert_eq!(c.next_token, 5);
        let legal = c.legal_actions(8, &nts());
        assert!(legal.contains(&Action::Shift));
        assert!(legal.contains(&Action::Combine(0)));
        assert!(legal.contains(&Action::Combine(1)));
        assert!(legal.contains(&Action::Combine(2)));
        assert_eq!(legal.len(), 4);
    }

    #[test]
    fn forced_label_excludes_no_label() {
        let actions = wh_question_derivation();
        let c = replay(8, &actions[..29]).unwrap();
        assert!(c.forced_label(8));
        let legal = c.legal_actions(8, &nts());
        assert!(!legal.contains(&Action::NoLabel));
        assert_eq!(legal.len(), nts().len());
        assert!(c.apply(&Action::NoLabel, 8).is_err());
    }

    #[test]
    fn replay_reports_step_of_failure() {
        let err = replay(3, &[Action::Combine(0)]).unwrap_err();
        assert_eq!(err.step, 0);
        let err =
            replay(3, &[Action::Shift, Action::NoLabel, Action::Combine(5)]).unwrap_err();
        assert_eq!(err.step, 2);
    }

    #[test]
    fn empty_replay_is_initial() {
        let c = replay(4, &[]).unwrap();
        assert_eq!(c, Configuration::initial(4).unwrap());
    }

    #[test]
    fn derivation_text_round_trip() {
        let actions = wh_question_derivation();
        let text = format_derivation(&actions);
        assert_eq!(parse_derivation(&text).unwrap(), actions);
        assert!(text.starts_with("SHIFT NOLABEL SHIFT LABEL-WHNP"));
    }

    #[test]
    fn relabelling_same_constituent_is_idempotent() {
        let c = replay(1, &[Action::Shift, Action::Label("X".into())]).unwrap();
        assert!(c.is_goal(1));
        assert_eq!(c.built.len(), 1);
    }
}
