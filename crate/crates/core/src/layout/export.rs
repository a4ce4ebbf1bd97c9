//! Canonical JSON export.

use super::ContextLayout;

/// Rounds to the nearest 1e-6, mapping −0 to 0.
pub fn round_coord(v: f64) -> f64 {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Serializes the layout with every coordinate rounded to 1e-6.
///
/// Identical layouts yield identical bytes: nodes and edges are already
/// sorted by id and every map in the layout is ordered.
pub fn to_json(layout: &ContextLayout) -> String {
    let mut l = layout.clone();
    for r in &mut l.regions {
        r.cx = round_coord(r.cx);
        r.cy = round_coord(r.cy);
        r.r = round_coord(r.r);
    }
    for n in &mut l.nodes {
        n.x = round_coord(n.x);
        n.y = round_coord(n.y);
        n.r = round_coord(n.r);
    }
    for c in &mut l.clusters {
        c.cx = round_coord(c.cx);
        c.cy = round_coord(c.cy);
        c.slot = round_coord(c.slot);
    }
    for h in &mut l.hulls {
        for p in &mut h.points {
            p[0] = round_coord(p[0]);
            p[1] = round_coord(p[1]);
        }
    }
    serde_json::to_string(&l).expect("layout serializes")
}
