//! Context layout: type regions, cluster arcs, anchored force refinement,
//! overlap removal, hulls and pie wedges.
//!
//! [`compute_layout`] runs the passes in order:
//!
//! 1. types are arranged by [`arrange_ontology`] and every displayed type
//!    gets a disjoint disc ([`partition_regions`]);
//! 2. cluster centroids go on a half-circle inside the interest region, and
//!    interest nodes start on a ring around their centroid whose radius grows
//!    with their number of displayed connected nodes;
//! 3. interest nodes are refined by the anchored force loop;
//! 4. each connected type's nodes start near the *pseudo-anchors* — interest
//!    positions mirrored into the connected region — and are refined with
//!    attraction to those anchors only;
//! 5. overlaps are pushed apart per region, then hulls and pies are derived.

mod export;
mod force;
mod hull;
mod ontology;
mod overlap;
mod pie;
mod regions;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSet;
use crate::context::EmphasisState;
use crate::graph::{distance_matrix, KnowledgeGraph, Ontology};
use crate::par::ExecMode;
use crate::text::fnv1a;

pub use export::{round_coord, to_json};
pub use force::{anneal, AnnealSchedule, Body, StepRecord};
pub use hull::{compute_hull, convex_hull, is_convex, point_in_convex, HULL_PADDING};
pub use ontology::{arrange_ontology, normalized_stress};
pub use overlap::{resolve_overlaps, MARGIN as OVERLAP_MARGIN, SETTLE as OVERLAP_SETTLE};
pub use pie::{compute_pie_wedges, Wedge};
pub use regions::{partition_regions, place_cluster_centroids, radial_radius, slot_radius, TypeRegion};

/// A point in layout units.
pub type Point = [f64; 2];

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// A closed disc used to confine nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    /// Nearest point of the disc.
    pub fn clamp(&self, p: Point) -> Point {
        let d = dist(p, self.center);
        if d <= self.radius {
            return p;
        }
        let s = self.radius / d;
        [
            self.center[0] + (p[0] - self.center[0]) * s,
            self.center[1] + (p[1] - self.center[1]) * s,
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        dist(p, self.center) <= self.radius
    }
}

/// Fraction of a disc's radius nodes are confined to.
const CONFINE: f64 = 0.98;
/// Maximum distance of the initial jitter around pseudo-anchors.
const JITTER: f64 = 2.0;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("type {0:?} is not part of the ontology")]
    UnknownType(String),
    #[error("no interest nodes to lay out")]
    NoInterestNodes,
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("spacing must be positive, got {0}")]
    BadSpacing(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutNode {
    pub id: String,
    #[serde(rename = "type")]
    pub node_type: String,
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pie: Option<Vec<Wedge>>,
    /// Connected node whose links all go to one cluster.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub solid: bool,
    #[serde(default)]
    pub answer: bool,
    /// Added after the main layout (e.g. to complete a path).
    #[serde(default)]
    pub injected: bool,
}

impl LayoutNode {
    pub fn pos(&self) -> Point {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutEdge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInfo {
    pub id: usize,
    pub label: String,
    /// Displayed members.
    pub size: usize,
    pub cx: f64,
    pub cy: f64,
    /// Radius of the disc the members are confined to.
    pub slot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hull {
    pub cluster: usize,
    pub points: Vec<Point>,
}

/// Per-pass convergence record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayoutTrace {
    pub interest: Vec<StepRecord>,
    pub connected: BTreeMap<String, Vec<StepRecord>>,
    /// Maximum displacement per overlap iteration, per region.
    pub overlap: BTreeMap<String, Vec<f64>>,
}

/// The renderable result. Nodes and edges are sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextLayout {
    pub seed: u64,
    pub interest_type: String,
    pub regions: Vec<TypeRegion>,
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<LayoutEdge>,
    pub clusters: Vec<ClusterInfo>,
    pub hulls: Vec<Hull>,
    #[serde(default)]
    pub emphasis: EmphasisState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<LayoutTrace>,
    /// Arranged ontology positions of every type, used to place regions for
    /// types added later.
    #[serde(skip)]
    pub(crate) type_positions: BTreeMap<String, Point>,
}

impl ContextLayout {
    pub fn node(&self, id: &str) -> Option<&LayoutNode> {
        self.nodes
            .binary_search_by(|n| n.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.node(id).is_some()
    }

    pub fn position(&self, id: &str) -> Option<Point> {
        self.node(id).map(LayoutNode::pos)
    }

    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.node(id).and_then(|n| n.cluster)
    }

    pub fn region(&self, node_type: &str) -> Option<&TypeRegion> {
        self.regions.iter().find(|r| r.node_type == node_type)
    }

    pub fn cluster(&self, id: usize) -> Option<&ClusterInfo> {
        self.clusters.iter().find(|c| c.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&LayoutEdge> {
        self.edges
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.edges[i])
    }

    /// All node positions keyed by id.
    pub fn positions(&self) -> BTreeMap<&str, Point> {
        self.nodes.iter().map(|n| (n.id.as_str(), n.pos())).collect()
    }

    /// Adds nodes that are missing from the layout, evenly spaced on the
    /// ring at 0.9ρ of their type's region (a region is created for types
    /// without one). Existing nodes do not move. Returns the ids added.
    pub fn inject_nodes(&mut self, kg: &KnowledgeGraph, ids: &[String]) -> Result<Vec<String>, LayoutError> {
        let mut by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for id in ids {
            if self.contains(id) || by_type.values().any(|v| v.contains(id)) {
                continue;
            }
            let node = kg.node(id).ok_or_else(|| LayoutError::UnknownNode(id.clone()))?;
            by_type.entry(node.node_type.clone()).or_default().push(id.clone());
        }
        let mut added = Vec::new();
        for (t, mut new_ids) in by_type {
            new_ids.sort();
            if self.region(&t).is_none() {
                self.add_region(&t)?;
            }
            let region = self.region(&t).cloned().expect("region just ensured");
            let before = self.nodes.iter().filter(|n| n.node_type == t && n.injected).count();
            let r_display = self
                .nodes
                .iter()
                .find(|n| n.node_type == t)
                .map(|n| n.r)
                .unwrap_or(display_radius(region.r, new_ids.len()));
            for (j, id) in new_ids.iter().enumerate() {
                let a = -std::f64::consts::FRAC_PI_2 + GOLDEN_ANGLE * (before + j) as f64;
                let node = kg.node(id).expect("checked above");
                self.nodes.push(LayoutNode {
                    id: id.clone(),
                    node_type: t.clone(),
                    label: node.label.clone(),
                    x: region.cx + 0.9 * region.r * a.cos(),
                    y: region.cy + 0.9 * region.r * a.sin(),
                    r: r_display,
                    cluster: None,
                    pie: None,
                    solid: false,
                    answer: false,
                    injected: true,
                });
                added.push(id.clone());
            }
        }
        if !added.is_empty() {
            self.nodes.sort_by(|a, b| a.id.cmp(&b.id));
            self.refresh_edges(kg);
        }
        Ok(added)
    }

    fn add_region(&mut self, node_type: &str) -> Result<(), LayoutError> {
        let center = *self
            .type_positions
            .get(node_type)
            .ok_or_else(|| LayoutError::UnknownType(node_type.to_string()))?;
        // Largest disc that stays clear of every existing region, capped like
        // the regular regions at 0.4 × the nearest centre distance.
        let mut r = f64::INFINITY;
        for other in &self.regions {
            let d = dist(center, other.center());
            r = r.min(0.4 * d).min(0.95 * (d - other.r));
        }
        if !r.is_finite() {
            r = 100.0;
        }
        self.regions.push(TypeRegion {
            node_type: node_type.to_string(),
            cx: center[0],
            cy: center[1],
            r: r.max(1.0),
        });
        Ok(())
    }

    /// Re-derives the displayed edge list (all graph edges between displayed nodes).
    pub(crate) fn refresh_edges(&mut self, kg: &KnowledgeGraph) {
        let shown: HashSet<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        self.edges = kg
            .edges()
            .iter()
            .filter(|e| shown.contains(e.source.as_str()) && shown.contains(e.target.as_str()))
            .map(|e| LayoutEdge {
                id: e.id.clone(),
                source: e.source.clone(),
                target: e.target.clone(),
                relation: e.relation.clone(),
            })
            .collect();
    }
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// What to lay out.
#[derive(Debug, Clone, Copy)]
pub struct LayoutInput<'a> {
    pub kg: &'a KnowledgeGraph,
    pub ontology: &'a Ontology,
    pub interest_type: &'a str,
    /// Displayed interest nodes by cluster. Empty clusters are skipped but
    /// keep their ids.
    pub clusters: &'a ClusterSet,
    /// Candidate connected nodes; those without a link to a displayed
    /// interest node are dropped.
    pub connected: &'a [String],
    pub answers: &'a BTreeSet<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    /// Layout units per ontology hop.
    pub spacing: f64,
    pub exec: ExecMode,
    /// Connected-pass ideal distance is `factor · ρ / √n`.
    pub connected_k_factor: f64,
    pub record_trace: bool,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            spacing: 300.0,
            exec: ExecMode::default(),
            connected_k_factor: 0.2,
            record_trace: false,
        }
    }
}

/// Display radius for nodes of a region holding `n` nodes.
pub fn display_radius(region_radius: f64, n: usize) -> f64 {
    (0.25 * region_radius / (n.max(1) as f64).sqrt()).clamp(1.0, 6.0)
}

/// Derived seed for one pass, independent of the others.
pub(crate) fn sub_seed(seed: u64, tag: &str) -> u64 {
    let mut bytes = seed.to_le_bytes().to_vec();
    bytes.extend_from_slice(tag.as_bytes());
    fnv1a(&bytes)
}

/// Maps `p` from disc `from` onto disc `to` (translation and uniform scale).
pub fn mirror_point(p: Point, from: &TypeRegion, to: &TypeRegion) -> Point {
    let s = to.r / from.r;
    [to.cx + (p[0] - from.cx) * s, to.cy + (p[1] - from.cy) * s]
}

/// Runs every pass and returns the layout with empty emphasis.
pub fn compute_layout(input: &LayoutInput<'_>, params: &LayoutParams) -> Result<ContextLayout, LayoutError> {
    let LayoutInput {
        kg,
        ontology,
        interest_type,
        clusters,
        connected,
        answers,
        seed,
    } = *input;
    if !(params.spacing > 0.0 && params.spacing.is_finite()) {
        return Err(LayoutError::BadSpacing(params.spacing));
    }
    if !ontology.has_type(interest_type) {
        return Err(LayoutError::UnknownType(interest_type.to_string()));
    }
    let mode = params.exec;

    // Displayed interest nodes.
    let mut cluster_of: HashMap<&str, usize> = HashMap::new();
    for c in &clusters.clusters {
        for m in &c.members {
            if kg.node(m).is_none() {
                return Err(LayoutError::UnknownNode(m.clone()));
            }
            cluster_of.insert(m.as_str(), c.id);
        }
    }
    if cluster_of.is_empty() {
        return Err(LayoutError::NoInterestNodes);
    }

    // Links from connected nodes to displayed interest nodes.
    let mut links: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for id in connected {
        let Some(idx) = kg.node_idx(id) else {
            return Err(LayoutError::UnknownNode(id.clone()));
        };
        let node = &kg.nodes()[idx];
        if node.node_type == interest_type || !ontology.has_type(&node.node_type) {
            continue;
        }
        let linked: BTreeSet<String> = kg
            .neighbors(idx)
            .map(|(_, o)| &kg.nodes()[o].id)
            .filter(|o| cluster_of.contains_key(o.as_str()))
            .cloned()
            .collect();
        if !linked.is_empty() {
            links.insert(id.clone(), linked.into_iter().collect());
        }
    }
    let mut link_count: HashMap<&str, usize> = HashMap::new();
    for targets in links.values() {
        for t in targets {
            *link_count.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut connected_by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for id in links.keys() {
        let t = &kg.node(id).expect("checked").node_type;
        connected_by_type.entry(t.clone()).or_default().push(id.clone());
    }

    // Regions.
    let dm = distance_matrix(ontology);
    let arranged = arrange_ontology(&dm, params.spacing);
    let type_positions: BTreeMap<String, Point> = dm.order.iter().cloned().zip(arranged.iter().copied()).collect();
    let displayed: Vec<(String, Point, usize)> = dm
        .order
        .iter()
        .filter_map(|t| {
            let count = if t == interest_type {
                cluster_of.len()
            } else {
                connected_by_type.get(t).map_or(0, Vec::len)
            };
            (count > 0).then(|| (t.clone(), type_positions[t], count))
        })
        .collect();
    let regions = partition_regions(&displayed, params.spacing);
    let region_of = |t: &str| regions.iter().find(|r| r.node_type == t).expect("displayed type");
    let interest_region = region_of(interest_type).clone();

    let facing = regions
        .iter()
        .filter(|r| r.node_type != interest_type)
        .min_by(|a, b| {
            dist(a.center(), interest_region.center())
                .total_cmp(&dist(b.center(), interest_region.center()))
                .then(a.node_type.cmp(&b.node_type))
        })
        .map_or(-std::f64::consts::FRAC_PI_2, |r| {
            (r.cy - interest_region.cy).atan2(r.cx - interest_region.cx)
        });

    // Interest pass.
    let shown: Vec<_> = clusters.clusters.iter().filter(|c| !c.members.is_empty()).collect();
    let centroids = place_cluster_centroids(shown.len(), &interest_region, facing);
    let slot = slot_radius(shown.len(), interest_region.r);
    let mut interest_ids: Vec<String> = Vec::new();
    let mut bodies: Vec<Body> = Vec::new();
    let mut phase_rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "interest-phase"));
    for (c, centroid) in shown.iter().zip(&centroids) {
        let m = c.members.len();
        let phase: f64 = phase_rng.random::<f64>() * std::f64::consts::TAU;
        let c_max = c
            .members
            .iter()
            .map(|id| link_count.get(id.as_str()).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let k = slot / (m as f64).sqrt();
        for (j, id) in c.members.iter().enumerate() {
            let c_i = link_count.get(id.as_str()).copied().unwrap_or(0);
            let r = radial_radius(c_i as f64, c_max as f64, 0.15 * slot, 0.85 * slot);
            let a = phase + std::f64::consts::TAU * j as f64 / m as f64;
            interest_ids.push(id.clone());
            bodies.push(Body {
                pos: [centroid[0] + r * a.cos(), centroid[1] + r * a.sin()],
                anchors: vec![*centroid],
                k,
                bound: Disc {
                    center: *centroid,
                    radius: CONFINE * slot,
                },
            });
        }
    }
    let schedule = AnnealSchedule::for_radius(interest_region.r);
    let interest_trace = anneal(&mut bodies, schedule.t0, schedule.decay, schedule.main_iterations, mode);
    let interest_bounds: Vec<Disc> = bodies.iter().map(|b| b.bound).collect();
    let mut interest_pos: Vec<Point> = bodies.iter().map(|b| b.pos).collect();
    let interest_index: HashMap<&str, usize> = interest_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();

    let mut trace = LayoutTrace {
        interest: interest_trace,
        ..LayoutTrace::default()
    };

    // Connected passes, one per connected region.
    let mut connected_pos: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    let mut connected_bounds: BTreeMap<String, Disc> = BTreeMap::new();
    for (t, ids) in &connected_by_type {
        let region = region_of(t);
        let n = ids.len();
        let k = params.connected_k_factor * region.r / (n as f64).sqrt();
        let bound = Disc {
            center: region.center(),
            radius: CONFINE * region.r,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &format!("connected/{t}")));
        let mut bodies: Vec<Body> = ids
            .iter()
            .map(|id| {
                let anchors: Vec<Point> = links[id]
                    .iter()
                    .map(|i| mirror_point(interest_pos[interest_index[i.as_str()]], &interest_region, region))
                    .collect();
                let mean = [
                    anchors.iter().map(|a| a[0]).sum::<f64>() / anchors.len() as f64,
                    anchors.iter().map(|a| a[1]).sum::<f64>() / anchors.len() as f64,
                ];
                let a: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let r: f64 = rng.random::<f64>() * JITTER;
                Body {
                    pos: bound.clamp([mean[0] + r * a.cos(), mean[1] + r * a.sin()]),
                    anchors,
                    k,
                    bound,
                }
            })
            .collect();
        let sched = AnnealSchedule::for_radius(region.r);
        let steps = anneal(
            &mut bodies,
            sched.t0 * sched.connected_t_scale,
            sched.decay,
            sched.connected_iterations,
            mode,
        );
        trace.connected.insert(t.clone(), steps);
        connected_pos.insert(t.clone(), bodies.iter().map(|b| b.pos).collect());
        connected_bounds.insert(t.clone(), bound);
    }

    // Display radii and overlap removal, per region.
    let mut radius_of_type: BTreeMap<String, f64> = BTreeMap::new();
    for (t, _, count) in &displayed {
        radius_of_type.insert(t.clone(), display_radius(region_of(t).r, *count));
    }
    let max_overlap = AnnealSchedule::for_radius(interest_region.r).overlap_iterations_max;
    {
        let r = radius_of_type[interest_type];
        let radii = vec![r; interest_pos.len()];
        let steps = resolve_overlaps(
            &mut interest_pos,
            &radii,
            Some(&interest_bounds),
            sub_seed(seed, &format!("overlap/{interest_type}")),
            max_overlap,
            mode,
        );
        trace.overlap.insert(interest_type.to_string(), steps);
    }
    for (t, pos) in connected_pos.iter_mut() {
        let r = radius_of_type[t];
        let radii = vec![r; pos.len()];
        let bounds = vec![connected_bounds[t]; pos.len()];
        let steps = resolve_overlaps(pos, &radii, Some(&bounds), sub_seed(seed, &format!("overlap/{t}")), max_overlap, mode);
        trace.overlap.insert(t.clone(), steps);
    }

    // Hulls and pies.
    let mut hulls = Vec::new();
    let mut cluster_infos = Vec::new();
    let r_interest = radius_of_type[interest_type];
    for (c, centroid) in shown.iter().zip(&centroids) {
        let centers: Vec<Point> = c.members.iter().map(|m| interest_pos[interest_index[m.as_str()]]).collect();
        hulls.push(Hull {
            cluster: c.id,
            points: compute_hull(&centers, &vec![r_interest; centers.len()]),
        });
        cluster_infos.push(ClusterInfo {
            id: c.id,
            label: c.label.clone(),
            size: c.members.len(),
            cx: centroid[0],
            cy: centroid[1],
            slot,
        });
    }
    let link_clusters: BTreeMap<String, Vec<usize>> = links
        .iter()
        .map(|(id, targets)| (id.clone(), targets.iter().map(|t| cluster_of[t.as_str()]).collect()))
        .collect();
    let mut pies = compute_pie_wedges(&link_clusters);

    // Assemble.
    let mut nodes = Vec::with_capacity(interest_ids.len() + links.len());
    for (i, id) in interest_ids.iter().enumerate() {
        let node = kg.node(id).expect("checked");
        nodes.push(LayoutNode {
            id: id.clone(),
            node_type: node.node_type.clone(),
            label: node.label.clone(),
            x: interest_pos[i][0],
            y: interest_pos[i][1],
            r: r_interest,
            cluster: Some(cluster_of[id.as_str()]),
            pie: None,
            solid: false,
            answer: answers.contains(id),
            injected: false,
        });
    }
    for (t, ids) in &connected_by_type {
        let pos = &connected_pos[t];
        for (i, id) in ids.iter().enumerate() {
            let node = kg.node(id).expect("checked");
            let pie = pies.remove(id);
            nodes.push(LayoutNode {
                id: id.clone(),
                node_type: t.clone(),
                label: node.label.clone(),
                x: pos[i][0],
                y: pos[i][1],
                r: radius_of_type[t],
                solid: pie.as_ref().is_some_and(|p| p.len() == 1),
                cluster: None,
                pie,
                answer: false,
                injected: false,
            });
        }
    }
    nodes.sort_by(|a, b| a.id.cmp(&b.id));

    let mut layout = ContextLayout {
        seed,
        interest_type: interest_type.to_string(),
        regions,
        nodes,
        edges: Vec::new(),
        clusters: cluster_infos,
        hulls,
        emphasis: EmphasisState::default(),
        trace: params.record_trace.then_some(trace),
        type_positions,
    };
    layout.refresh_edges(kg);
    Ok(layout)
}
