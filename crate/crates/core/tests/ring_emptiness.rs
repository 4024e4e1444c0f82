//! A contradictory one-symbol constraint set refutes itself on the ring
//! substitution's orbit graphs as soon as an interior row appears, and
//! the semi-decision driver reports the first refuted radius.

use orbitile::orbit::{grow_orbit_patch, orbit_graph_of};
use orbitile::solver::{
    orbit_instance, semi_decide, ForbiddenPattern, InstanceEdge, SemiVerdict, SolveResult,
};
use orbitile::substitution::{FirstRule, Letter};
use orbitile::surface::ring_substitution;

#[test]
fn one_symbol_next_conflict_is_refuted_at_the_first_interior_row() {
    let sub = ring_substitution();
    let forbid_next_pair = ForbiddenPattern {
        symbols: vec!["x".into(), "x".into()],
        edges: vec![InstanceEdge {
            from: 0,
            to: 1,
            tag: "next".into(),
        }],
    };
    let mut family = |r: usize| {
        let patch = grow_orbit_patch(&sub, Letter(0), r, &mut FirstRule)?;
        let graph = orbit_graph_of(&sub, &patch);
        Ok(orbit_instance(&graph, vec!["x".into()], vec![forbid_next_pair.clone()]).0)
    };
    let report = semi_decide(&mut family, 3, 100_000).unwrap();
    assert_eq!(report.verdict, SemiVerdict::Unsat { radius: 2 });
    assert!(matches!(report.outcomes[0].1, SolveResult::Sat(_)));
    assert!(matches!(report.outcomes[1].1, SolveResult::Sat(_)));
    assert_eq!(report.outcomes[2].1, SolveResult::Unsat);
}
