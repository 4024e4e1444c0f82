//! The genus-2 surface group `<a,b,c,d | [a,b][c,d]>`: its Cayley graph
//! grown as concentric rings of octagons, a word-problem solver, a
//! direction labeling that turns the graph into a substitution orbit, and
//! pattern transport between the two pictures.
//!
//! Generators are encoded as `0..8` with inverses adjacent: `a=0, a'=1,
//! b=2, b'=3, c=4, c'=5, d=6, d'=7`, so `inv(g) = g ^ 1`. Around every
//! vertex the eight edge ends follow one fixed rotational order (`succ`);
//! walking an octagon boundary turns by `pred(inv(g))` after each edge,
//! which spells exactly the cyclic rotations of the relator.

pub mod complex;
pub mod dehn;
pub mod direction;
pub mod oracle;
pub mod transport;

use crate::error::{Error, Result};
use crate::substitution::{Letter, Rule, Substitution};

/// Generator index: `a=0, a'=1, b=2, b'=3, c=4, c'=5, d=6, d'=7`.
pub type Gen = u8;

pub const GEN_COUNT: usize = 8;
pub const GEN_NAMES: [&str; 8] = ["a", "a'", "b", "b'", "c", "c'", "d", "d'"];

/// The relator `a b a' b' c d c' d'` as generator indices.
pub const RELATOR: [Gen; 8] = [0, 2, 1, 3, 4, 6, 5, 7];

/// Rotational successor of an edge end around any vertex.
const SUCC: [Gen; 8] = {
    // a -> d -> c' -> d' -> c -> b -> a' -> b' -> a
    let mut t = [0u8; 8];
    t[0] = 6;
    t[6] = 5;
    t[5] = 7;
    t[7] = 4;
    t[4] = 2;
    t[2] = 1;
    t[1] = 3;
    t[3] = 0;
    t
};

const PRED: [Gen; 8] = {
    let mut t = [0u8; 8];
    let mut g = 0;
    while g < 8 {
        t[SUCC[g] as usize] = g as u8;
        g += 1;
    }
    t
};

#[inline]
pub fn inv(g: Gen) -> Gen {
    g ^ 1
}

#[inline]
pub fn succ(g: Gen) -> Gen {
    SUCC[g as usize]
}

#[inline]
pub fn pred(g: Gen) -> Gen {
    PRED[g as usize]
}

/// Next boundary edge when walking around an octagon.
#[inline]
pub fn turn(incoming: Gen) -> Gen {
    pred(inv(incoming))
}

/// A word over the generators and their inverses.
pub type GroupWord = Vec<Gen>;

/// Parses a compact word: lowercase for generators, uppercase for their
/// inverses, e.g. `"abAB"` for `a b a' b'`. Whitespace is ignored.
pub fn parse_word(text: &str) -> Result<GroupWord> {
    let mut w = Vec::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            continue;
        }
        let g = match ch {
            'a' => 0,
            'A' => 1,
            'b' => 2,
            'B' => 3,
            'c' => 4,
            'C' => 5,
            'd' => 6,
            'D' => 7,
            _ => {
                return Err(Error::bad_input(format!(
                    "unknown generator letter {ch:?}"
                )))
            }
        };
        w.push(g);
    }
    Ok(w)
}

pub fn format_word(w: &[Gen]) -> String {
    const LETTERS: [char; 8] = ['a', 'A', 'b', 'B', 'c', 'C', 'd', 'D'];
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|&g| LETTERS[g as usize]).collect()
}

/// Image of a word under the abelianization `G -> Z^4`.
pub fn abelianized(w: &[Gen]) -> [i64; 4] {
    let mut v = [0i64; 4];
    for &g in w {
        let k = (g / 2) as usize;
        v[k] += if g % 2 == 0 { 1 } else { -1 };
    }
    v
}

/// The ring substitution of the ball construction: sphere `i+1` reads as
/// the letterwise image of sphere `i` under `a -> (ab^5)^4 ab^4`,
/// `b -> (ab^5)^5 ab^4`.
pub fn ring_substitution() -> Substitution {
    let mut body_a = Vec::new();
    for _ in 0..4 {
        body_a.push(Letter(0));
        body_a.extend([Letter(1); 5]);
    }
    body_a.push(Letter(0));
    body_a.extend([Letter(1); 4]);
    let mut body_b = vec![Letter(0)];
    body_b.extend([Letter(1); 5]);
    body_b.extend(body_a.clone());
    Substitution::new(
        vec!["a".into(), "b".into()],
        vec![
            Rule { lhs: Letter(0), rhs: body_a },
            Rule { lhs: Letter(1), rhs: body_b },
        ],
    )
    .expect("ring substitution is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substitution::find_expansion;

    #[test]
    fn rotation_tables_are_mutually_inverse_cycles() {
        let mut seen = [false; 8];
        let mut g = 0u8;
        for _ in 0..8 {
            assert!(!seen[g as usize]);
            seen[g as usize] = true;
            assert_eq!(pred(succ(g)), g);
            assert_eq!(succ(pred(g)), g);
            g = succ(g);
        }
        assert_eq!(g, 0, "succ is a single 8-cycle");
    }

    #[test]
    fn octagon_walk_spells_the_relator() {
        let mut g = RELATOR[0];
        let mut word = vec![g];
        for _ in 0..7 {
            g = turn(g);
            word.push(g);
        }
        assert_eq!(word, RELATOR.to_vec());
        // starting anywhere yields a rotation of the relator
        for k in 0..8 {
            let mut g = RELATOR[k];
            for i in 1..8 {
                g = turn(g);
                assert_eq!(g, RELATOR[(k + i) % 8]);
            }
        }
    }

    #[test]
    fn word_round_trip_and_abelianization() {
        let w = parse_word("abABcdCD").unwrap();
        assert_eq!(w, RELATOR.to_vec());
        assert_eq!(format_word(&w), "abABcdCD");
        assert_eq!(abelianized(&w), [0, 0, 0, 0]);
        assert_eq!(abelianized(&parse_word("aab").unwrap()), [2, 1, 0, 0]);
        assert!(parse_word("xyz").is_err());
        assert_eq!(format_word(&[]), "1");
    }

    #[test]
    fn ring_substitution_has_the_silver_expansion() {
        let sub = ring_substitution();
        assert_eq!(sub.rule(0).rhs.len(), 29);
        assert_eq!(sub.rule(1).rhs.len(), 35);
        let m = sub.incidence_of(&[0, 0]);
        assert_eq!(m[0][0], 5.0); // a's in s(a)
        assert_eq!(m[0][1], 24.0); // b's in s(a)
        assert_eq!(m[1][0], 6.0);
        assert_eq!(m[1][1], 29.0);
        let exp = find_expansion(&sub, &crate::Config::default()).unwrap();
        let lambda = 17.0 + 12.0 * 2.0f64.sqrt();
        assert!((exp.lambda - lambda).abs() < 1e-9, "lambda = {}", exp.lambda);
        let ratio = exp.v[1] / exp.v[0];
        let silver = (1.0 + 2.0f64.sqrt()) / 2.0;
        assert!((ratio - silver).abs() < 1e-9, "ratio = {ratio}");
    }
}
