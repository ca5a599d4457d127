//! JSON assembly plans: place blocks by isometries, merge coincident
//! vertices, insert unit edges, refine.
//!
//! ```json
//! {
//!   "blocks": [
//!     { "figure": "fig01d_triplet_kite" },
//!     { "figure": "fig01d_triplet_kite", "rotate": { "center": [0.5, 1.2], "degrees": 120 } },
//!     { "msg": "kite.msg", "reflect": { "point": [0, 0], "degrees": 90 }, "translate": [3, 0] }
//!   ],
//!   "snap_tol": 1e-3,
//!   "add_edges": [[4, 17]]
//! }
//! ```
//!
//! Each block is reflected, then rotated, then translated. Paths are
//! relative to the plan file.

use std::path::Path;

use matchstick::assembler::{add_unit_edge, merge, Placement};
use matchstick::refiner::{refine, RefineOptions, RefineReport};
use matchstick::{Embedding, Graph, Isometry, Point2, ToleranceProfile};
use serde::{Deserialize, Serialize};

use crate::input::{ensure_refined, figure_text, load_msg_text, load_tikz_text, read_text, CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    pub blocks: Vec<Block>,
    #[serde(default = "default_snap")]
    pub snap_tol: f64,
    #[serde(default)]
    pub vertex_sep: Option<f64>,
    /// Pairs of merged vertex ids to join with a unit edge.
    #[serde(default)]
    pub add_edges: Vec<(usize, usize)>,
    /// Slack for the unit-distance test on `add_edges`.
    #[serde(default = "default_edge_eps")]
    pub edge_eps: f64,
    #[serde(default = "yes")]
    pub refine_blocks: bool,
}

fn default_snap() -> f64 {
    1e-3
}

fn default_edge_eps() -> f64 {
    1e-3
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    #[serde(default)]
    pub figure: Option<String>,
    #[serde(default)]
    pub msg: Option<String>,
    #[serde(default)]
    pub tikz: Option<String>,
    #[serde(default)]
    pub reflect: Option<Turn>,
    #[serde(default)]
    pub rotate: Option<Turn>,
    #[serde(default)]
    pub translate: Option<[f64; 2]>,
}

/// A rotation about `center`, or a mirror line through `point` (the field
/// name differs only for readability; either is accepted).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Turn {
    #[serde(alias = "point")]
    pub center: [f64; 2],
    pub degrees: f64,
}

impl Block {
    fn isometry(&self) -> Isometry {
        let pt = |a: [f64; 2]| Point2::new(a[0], a[1]);
        let mut iso = Isometry::IDENTITY;
        if let Some(r) = &self.reflect {
            iso = Isometry::reflection(pt(r.center), r.degrees.to_radians());
        }
        if let Some(r) = &self.rotate {
            iso = Isometry::rotation(pt(r.center), r.degrees.to_radians()).compose(&iso);
        }
        if let Some(t) = self.translate {
            iso = iso.then_translate(pt(t));
        }
        iso
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyReport {
    pub blocks: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub identifications: usize,
    pub added_edges: Vec<(usize, usize)>,
    /// `merge_map[block][v]` = merged id.
    pub merge_map: Vec<Vec<usize>>,
    pub refinement: Option<RefineReport>,
    pub max_abs_length_deviation: f64,
}

pub struct Assembled {
    pub graph: Graph,
    pub embedding: Embedding,
    pub report: AssemblyReport,
}

pub fn parse_plan(text: &str) -> CliResult<Plan> {
    serde_json::from_str(text).map_err(|e| CliError::usage(format!("assembly plan: {e}")))
}

pub fn assemble(plan: &Plan, base_dir: &Path, tol: &ToleranceProfile, refine_result: bool) -> CliResult<Assembled> {
    if plan.blocks.is_empty() {
        return Err(CliError::usage("assembly plan has no blocks"));
    }
    let mut blocks = Vec::with_capacity(plan.blocks.len());
    for (i, b) in plan.blocks.iter().enumerate() {
        let loaded = match (&b.figure, &b.msg, &b.tikz) {
            (Some(id), None, None) => load_tikz_text(figure_text(id)?, tol)?,
            (None, Some(p), None) => load_msg_text(&read_text(&base_dir.join(p))?)?,
            (None, None, Some(p)) => load_tikz_text(&read_text(&base_dir.join(p))?, tol)?,
            _ => {
                return Err(CliError::usage(format!(
                    "block {i}: give exactly one of \"figure\", \"msg\", \"tikz\""
                )))
            }
        };
        let emb = if plan.refine_blocks {
            ensure_refined(&loaded.graph, &loaded.embedding)?.0
        } else {
            loaded.embedding
        };
        blocks.push((loaded.graph, emb, b.isometry()));
    }
    let placements: Vec<Placement<'_>> = blocks
        .iter()
        .map(|(g, e, iso)| Placement { graph: g, embedding: e, iso: *iso })
        .collect();
    let merged = merge(&placements, plan.snap_tol, plan.vertex_sep.unwrap_or(tol.vertex_sep))?;
    let (mut g, mut emb) = (merged.graph, merged.embedding);
    for &(a, b) in &plan.add_edges {
        (g, emb) = add_unit_edge(&g, &emb, a, b, plan.edge_eps)?;
    }
    let refinement = if refine_result && g.n_edges() > 0 {
        let (out, rep) = refine(&g, &emb, &RefineOptions::default())?;
        if !rep.converged {
            return Err(CliError::failed(format!(
                "refinement of the assembly did not converge (max |len - 1| = {:.3e})",
                rep.final_max_abs_residual
            )));
        }
        emb = out;
        Some(rep)
    } else {
        None
    };
    let report = AssemblyReport {
        blocks: plan.blocks.len(),
        n_vertices: g.n_vertices(),
        n_edges: g.n_edges(),
        identifications: merged.identifications,
        added_edges: plan.add_edges.clone(),
        merge_map: merged.merge_map,
        refinement,
        max_abs_length_deviation: emb.max_abs_length_deviation(&g),
    };
    Ok(Assembled { graph: g, embedding: emb, report })
}
