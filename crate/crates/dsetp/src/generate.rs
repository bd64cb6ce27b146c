//! Random valid discontinuous trees, produced by sampling random legal
//! derivations of the transition system. Every output passes validation by
//! construction; the gap rate steers how often non-adjacent memory items are
//! combined.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::tree::{Constituent, DiscTree, IndexSet};

/// Knobs for the generator.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_tokens: usize,
    pub min_tokens: usize,
    /// Probability that a combine picks an arbitrary memory item instead of
    /// the one adjacent to the focus. 0.0 yields only continuous trees.
    pub gap_rate: f64,
    /// Probability of labelling a non-root focus.
    pub label_rate: f64,
    /// Probability of stacking an extra unary level on a labelled focus.
    pub unary_rate: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_tokens: 8,
            min_tokens: 1,
            gap_rate: 0.25,
            label_rate: 0.4,
            unary_rate: 0.0,
        }
    }
}

const NONTERMINALS: &[&str] = &["S", "NP", "VP", "PP", "ADJP", "ADVP"];
const WORDS_BY_TAG: &[(&str, &[&str])] = &[
    ("DT", &["the", "a", "every", "some"]),
    ("NN", &["cat", "dog", "parent", "idea", "tree", "house"]),
    ("VB", &["sees", "walks", "finds", "builds", "knows"]),
    ("JJ", &["red", "small", "odd", "quick"]),
    ("RB", &["often", "never", "so", "away"]),
    ("IN", &["in", "on", "under"]),
];

fn random_nt(rng: &mut ChaCha8Rng) -> String {
    NONTERMINALS[rng.gen_range(0..NONTERMINALS.len())].to_string()
}

fn random_word(rng: &mut ChaCha8Rng) -> (String, String) {
    let (tag, words) = WORDS_BY_TAG[rng.gen_range(0..WORDS_BY_TAG.len())];
    (words[rng.gen_range(0..words.len())].to_string(), tag.to_string())
}

/// One random valid tree. Deterministic given the RNG state.
pub fn random_tree(rng: &mut ChaCha8Rng, config: &GenConfig) -> DiscTree {
    let n = rng.gen_range(config.min_tokens..=config.max_tokens.max(config.min_tokens));
    let mut lexical = Vec::with_capacity(n);
    for _ in 0..n {
        lexical.push(random_word(rng));
    }
    let tokens: Vec<String> = lexical.iter().map(|(w, _)| w.clone()).collect();
    let pos_tags: Vec<String> = lexical.iter().map(|(_, t)| t.clone()).collect();

    // Walk a random legal derivation. The memory is a list of yields; the
    // focus is the last shifted-or-combined item.
    let mut memory: Vec<IndexSet> = Vec::new();
    let mut focus: Option<IndexSet> = None;
    let mut next = 0usize;
    let mut constituents: Vec<Constituent> = Vec::new();

    loop {
        // Structural move.
        let can_shift = next < n;
        let can_combine = focus.is_some() && !memory.is_empty();
        if !can_shift && !can_combine {
            break;
        }
        let do_shift = if !can_combine {
            true
        } else if !can_shift {
            false
        } else {
            rng.gen_bool(0.5)
        };
        if do_shift {
            if let Some(f) = focus.take() {
                memory.push(f);
            }
            focus = Some(IndexSet::singleton(next));
            next += 1;
        } else {
            let f = focus.take().unwrap();
            let pick = if rng.gen_bool(config.gap_rate) {
                rng.gen_range(0..memory.len())
            } else {
                // The item ending right before the focus, when there is one;
                // this keeps the union contiguous.
                let lo = f.left_index().unwrap();
                memory
                    .iter()
                    .position(|s| s.right_index() == Some(lo.wrapping_sub(1)))
                    .unwrap_or_else(|| memory.len() - 1)
            };
            let item = memory.remove(pick);
            focus = Some(f.union(&item));
        }

        // Labelling move.
        let f = focus.as_ref().unwrap();
        let at_goal = next == n && memory.is_empty();
        if at_goal || rng.gen_bool(config.label_rate) {
            let mut label = random_nt(rng);
            while rng.gen_bool(config.unary_rate) {
                // Extra unary level on top of the same yield.
                label = format!("{}+{}", random_nt(rng), label);
            }
            constituents.push(Constituent::new(label, f.clone()));
        }
        if at_goal {
            break;
        }
    }

    let mut tree = DiscTree::new(tokens, pos_tags, constituents);
    debug_assert!(tree.validate().is_empty(), "generator produced an invalid tree");
    tree.canonicalize();
    tree
}

/// A batch of random trees.
pub fn random_trees(rng: &mut ChaCha8Rng, config: &GenConfig, count: usize) -> Vec<DiscTree> {
    (0..count).map(|_| random_tree(rng, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_trees_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let config = GenConfig { max_tokens: 10, unary_rate: 0.2, ..GenConfig::default() };
        for _ in 0..300 {
            let t = random_tree(&mut rng, &config);
            assert!(t.validate().is_empty(), "{t:?}");
            assert!(!t.is_empty());
        }
    }

    #[test]
    fn zero_gap_rate_gives_continuous_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let config = GenConfig { gap_rate: 0.0, max_tokens: 9, ..GenConfig::default() };
        for _ in 0..200 {
            let t = random_tree(&mut rng, &config);
            for c in &t.constituents {
                assert!(!c.is_discontinuous(), "{c:?} in {t:?}");
            }
        }
    }

    #[test]
    fn seeded_generation_is_stable() {
        let config = GenConfig::default();
        let a = random_trees(&mut ChaCha8Rng::seed_from_u64(42), &config, 20);
        let b = random_trees(&mut ChaCha8Rng::seed_from_u64(42), &config, 20);
        assert_eq!(a, b);
    }

    #[test]
    fn gaps_do_appear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let config = GenConfig { gap_rate: 0.6, max_tokens: 9, min_tokens: 4, ..Default::default() };
        let trees = random_trees(&mut rng, &config, 100);
        assert!(trees
            .iter()
            .any(|t| t.constituents.iter().any(Constituent::is_discontinuous)));
    }
}
