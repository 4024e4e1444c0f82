//! Word reduction for the surface group.
//!
//! The presentation satisfies the small cancellation condition that makes
//! greedy reduction a decision procedure: any nonempty word representing
//! the identity contains more than half of a cyclic rotation of the
//! relator or its inverse. Reduction therefore repeats two moves until
//! neither applies: cancel adjacent inverse pairs, and replace the
//! leftmost subword that matches at least 5 consecutive letters of a
//! relator rotation by the inverse of the complementary arc (at most 3
//! letters, so every replacement shortens the word). A word is trivial in
//! the group exactly when this terminates empty.

use super::{inv, Gen, GroupWord, RELATOR};

/// Cancels `g g^-1` pairs in place, iterating to a fixed point.
pub fn free_reduce(w: &mut GroupWord) {
    let mut out: Vec<Gen> = Vec::with_capacity(w.len());
    for &g in w.iter() {
        if out.last().is_some_and(|&l| l == inv(g)) {
            out.pop();
        } else {
            out.push(g);
        }
    }
    *w = out;
}

/// All 16 length-8 relator cycles: rotations of the relator and of its
/// inverse. Any octagon boundary, read from any corner in either sense,
/// spells one of these.
pub fn relator_cycles() -> Vec<[Gen; 8]> {
    let mut inv_rel = [0 as Gen; 8];
    for (i, &g) in RELATOR.iter().rev().enumerate() {
        inv_rel[i] = inv(g);
    }
    let mut out = Vec::with_capacity(16);
    for base in [RELATOR, inv_rel] {
        for r in 0..8 {
            let mut rot = [0 as Gen; 8];
            for i in 0..8 {
                rot[i] = base[(r + i) % 8];
            }
            out.push(rot);
        }
    }
    out
}

/// Length of the longest prefix of `w[from..]` that runs along `cycle`.
fn run_len(w: &[Gen], from: usize, cycle: &[Gen; 8], phase: usize) -> usize {
    let mut k = 0;
    while k < 8 && from + k < w.len() && w[from + k] == cycle[(phase + k) % 8] {
        k += 1;
    }
    k
}

/// One leftmost long-subword replacement. Returns false if no cyclic
/// subword of length >= 5 of any relator cycle occurs in `w`.
fn replace_once(w: &mut GroupWord) -> bool {
    let cycles = relator_cycles();
    for from in 0..w.len() {
        let mut best: Option<(usize, &[Gen; 8], usize)> = None;
        for cycle in &cycles {
            for phase in 0..8 {
                let k = run_len(w, from, cycle, phase);
                if k >= 5 && best.map_or(true, |(bk, _, _)| k > bk) {
                    best = Some((k, cycle, phase));
                }
            }
        }
        if let Some((k, cycle, phase)) = best {
            // u = cycle[phase..phase+k]; u * rest = 1, so u = inv(rest)
            let mut repl: Vec<Gen> = Vec::with_capacity(8 - k);
            for i in (k..8).rev() {
                repl.push(inv(cycle[(phase + i) % 8]));
            }
            w.splice(from..from + k, repl);
            return true;
        }
    }
    false
}

/// Greedy reduction: free reduction plus leftmost long-relator-subword
/// replacement until neither applies. The result is empty iff the input
/// represents the identity.
pub fn dehn_reduce(word: &[Gen]) -> GroupWord {
    let mut w = word.to_vec();
    loop {
        free_reduce(&mut w);
        if !replace_once(&mut w) {
            return w;
        }
    }
}

pub fn is_trivial(word: &[Gen]) -> bool {
    dehn_reduce(word).is_empty()
}

/// Whether two words represent the same group element.
pub fn words_equal(u: &[Gen], v: &[Gen]) -> bool {
    let mut w = u.to_vec();
    w.extend(v.iter().rev().map(|&g| inv(g)));
    is_trivial(&w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{format_word, parse_word};
    use proptest::prelude::*;

    #[test]
    fn relator_and_conjugates_reduce_to_nothing() {
        assert!(is_trivial(&RELATOR));
        assert!(is_trivial(&parse_word("aA").unwrap()));
        assert!(is_trivial(&[]));
        let w = parse_word("cdC abABcdCD cDC".replace(' ', "").as_str()).unwrap();
        assert!(is_trivial(&w));
    }

    #[test]
    fn short_commutator_rewrites_to_its_complement() {
        // a b a' b' c matches five relator letters; the complement arc is
        // d c' d', whose inverse is d c d'.
        let w = parse_word("abABc").unwrap();
        assert_eq!(format_word(&dehn_reduce(&w)), "dcD");
    }

    #[test]
    fn inverse_relator_subwords_shrink_too() {
        // b a' b' c d sits inside a rotation of the relator; the
        // replacement is a' d c, and no further reduction applies.
        let w = parse_word("bABcd").unwrap();
        assert_eq!(format_word(&dehn_reduce(&w)), "Adc");
    }

    #[test]
    fn reduced_words_are_stable_and_equivalent() {
        let samples = ["", "a", "abAB", "ddddd", "abcdabcd", "BcdCDab"];
        for s in samples {
            let w = parse_word(s).unwrap();
            let r = dehn_reduce(&w);
            assert_eq!(dehn_reduce(&r), r, "idempotent on {s}");
            assert!(words_equal(&w, &r), "same element for {s}");
        }
    }

    #[test]
    fn nontrivial_words_stay_nontrivial() {
        for s in ["a", "ab", "abab", "cdCD", "abABcdCDa"] {
            let w = parse_word(s).unwrap();
            assert!(!is_trivial(&w), "{s} is not the identity");
        }
    }

    proptest! {
        #[test]
        fn random_relator_insertions_vanish(
            pieces in proptest::collection::vec((0usize..16, 0u8..8), 1..5)
        ) {
            // nested w r w^-1 products are always trivial
            let cycles = relator_cycles();
            let mut w: GroupWord = Vec::new();
            for (c, g) in pieces {
                let prefix: GroupWord = vec![g];
                w.extend(&prefix);
                w.extend(cycles[c].iter());
                w.extend(prefix.iter().rev().map(|&x| inv(x)));
            }
            prop_assert!(is_trivial(&w));
        }

        #[test]
        fn reduction_never_grows(w in proptest::collection::vec(0u8..8, 0..24)) {
            let r = dehn_reduce(&w);
            prop_assert!(r.len() <= w.len());
            prop_assert!(words_equal(&w, &r));
        }
    }
}
