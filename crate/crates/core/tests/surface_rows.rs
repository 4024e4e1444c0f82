//! Surface-to-rows pipeline: the cut annulus of a radius-3 ball reads as
//! rows of the ring substitution, those rows replay cleanly under
//! navigation, contract ring by ring toward the origin, and lay out as a
//! geometric tiling with the silver-ratio expansion.

use std::collections::BTreeSet;

use orbitile::geometry::{layout_tiling, validate_tiling};
use orbitile::orbit::{orbit_graph_of, validate_orbit};
use orbitile::substitution::find_expansion;
use orbitile::surface::complex::grow_ball;
use orbitile::surface::direction::build_direction_patch;
use orbitile::surface::ring_substitution;
use orbitile::surface::transport::check_transport;
use orbitile::Config;

#[test]
fn annulus_rows_feed_the_orbit_and_geometry_stack() {
    let sub = ring_substitution();
    let patch = build_direction_patch(grow_ball(3), false);

    let orbit = patch.annulus_orbit().unwrap();
    validate_orbit(&sub, &orbit).unwrap();

    let stats = check_transport(&patch, &orbit).unwrap();
    assert_eq!(stats.vertices, 48 + 1632 + 55440);

    // rings contract: parents of ring i cover exactly ring i-1
    for ring in 2..=3usize {
        let parents: BTreeSet<_> = patch.ball.rings[ring]
            .iter()
            .filter_map(|&c| patch.ball.complex.cell(c).parent_opt())
            .collect();
        let above: BTreeSet<_> = patch.ball.rings[ring - 1].iter().copied().collect();
        assert_eq!(parents, above);
        assert!(patch.ball.rings[ring - 1].len() < patch.ball.rings[ring].len());
    }

    // the same rows admit a consistent hyperbolic-strip layout
    let exp = find_expansion(&sub, &Config::default()).unwrap();
    assert!((exp.lambda - (17.0 + 12.0 * 2f64.sqrt())).abs() < 1e-9);
    let graph = orbit_graph_of(&sub, &orbit);
    let tiling = layout_tiling(&exp, &graph).unwrap();
    assert_eq!(tiling.tiles.len(), 48 + 1632 + 55440);
    validate_tiling(&graph, &tiling, 1e-6).unwrap();
}
