//! Dependency graphs by neighborhood selection: every node is regressed on
//! the other nodes with the Gaussian covariate procedure and joined to the
//! covariates it selects.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::ColMatrix;
use crate::error::{Error, Result};
use crate::stepwise::{repeated_on, select_path, PvalueConfig, RepeatLimits};
use crate::table::format_pvalue;

/// How the two directed selections of a pair combine into an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EdgeRule {
    /// Either direction suffices.
    #[default]
    Or,
    /// Both directions are required.
    And,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphConfig {
    pub alpha: f64,
    pub nu: f64,
    /// Use repeated selection per node instead of a single run.
    pub repeated: bool,
    /// Divide `alpha` by the number of nodes.
    pub bonferroni: bool,
    pub edge_rule: EdgeRule,
    /// Per-node covariate limit; defaults to `min(n - 2, 30)`.
    pub kmax: Option<usize>,
    /// Group limit per node for the repeated variant.
    pub nmax: Option<usize>,
}

impl GraphConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            nu: 1.0,
            repeated: false,
            bonferroni: true,
            edge_rule: EdgeRule::Or,
            kmax: None,
            nmax: None,
        }
    }
}

/// Undirected edge `{i, j}` with `i < j`. `p_ij` is the P-value of `j` in
/// the regression of node `i`, `p_ji` the converse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub p_ij: Option<f64>,
    pub p_ji: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EdgeList {
    pub edges: Vec<Edge>,
}

impl EdgeList {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|e| (e.i, e.j).cmp(&key))
            .is_ok()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }

    /// One edge per line: `i j p_ij p_ji`, 1-based, `NA` for a missing
    /// direction.
    pub fn to_text(&self) -> String {
        let fmt = |p: Option<f64>| p.map_or_else(|| "NA".to_string(), format_pvalue);
        let mut out = String::new();
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {} {}", e.i + 1, e.j + 1, fmt(e.p_ij), fmt(e.p_ji));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |column: usize, message: String| Error::Parse {
                line: lineno + 1,
                column,
                message,
            };
            if toks.len() != 4 {
                return Err(err(1, format!("expected 4 fields, found {}", toks.len())));
            }
            let index = |c: usize| -> Result<usize> {
                match toks[c].parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(err(c + 1, format!("'{}' is not a 1-based index", toks[c]))),
                }
            };
            let pval = |c: usize| -> Result<Option<f64>> {
                if toks[c] == "NA" {
                    return Ok(None);
                }
                toks[c]
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| err(c + 1, format!("'{}' is not a P-value", toks[c])))
            };
            let (a, b) = (index(0)?, index(1)?);
            if a == b {
                return Err(err(2, "self-loop".into()));
            }
            let (p_ab, p_ba) = (pval(2)?, pval(3)?);
            let edge = if a < b {
                Edge { i: a, j: b, p_ij: p_ab, p_ji: p_ba }
            } else {
                Edge { i: b, j: a, p_ij: p_ba, p_ji: p_ab }
            };
            edges.push(edge);
        }
        edges.sort_by_key(|e| (e.i, e.j));
        edges.dedup_by_key(|e| (e.i, e.j));
        Ok(Self { edges })
    }
}

// Covariates selected in the regression of `node`, with their P-values.
fn node_neighbors(
    x: &ColMatrix,
    node: usize,
    nodes: &[usize],
    cfg: &PvalueConfig,
    graph: &GraphConfig,
) -> Result<Vec<(usize, f64)>> {
    let candidates: Vec<usize> = nodes.iter().copied().filter(|&j| j != node).collect();
    let y = x.col(node);
    let steps = if graph.repeated {
        let limits = RepeatLimits {
            nmax: graph.nmax,
            vmax: None,
        };
        repeated_on(y, x, &candidates, cfg, limits, None)?
            .groups
            .into_iter()
            .flat_map(|g| g.steps)
            .collect()
    } else {
        select_path(y, x, &candidates, cfg, None)?.steps
    };
    Ok(steps.into_iter().map(|s| (s.index, s.pvalue)).collect())
}

/// Neighborhood-selection graph over the columns of `x`, or over `subset`
/// when given (regressors are then drawn from the subset as well).
pub fn neighborhood_graph(
    x: &ColMatrix,
    cfg: &GraphConfig,
    subset: Option<&[usize]>,
) -> Result<EdgeList> {
    let nodes: Vec<usize> = match subset {
        Some(s) => {
            let mut s = s.to_vec();
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&j| j >= x.ncols()) {
                return Err(Error::domain(format!(
                    "node {} out of range 1..={}",
                    bad + 1,
                    x.ncols()
                )));
            }
            s
        }
        None => (0..x.ncols()).collect(),
    };
    if nodes.len() < 2 {
        return Err(Error::domain("a graph needs at least two nodes"));
    }
    let n = x.nrows();
    if n < 3 {
        return Err(Error::domain("at least 3 observations are required"));
    }
    if !(graph_alpha_ok(cfg.alpha)) {
        return Err(Error::domain(format!("alpha must lie in [0, 1], got {}", cfg.alpha)));
    }
    let alpha = if cfg.bonferroni {
        cfg.alpha / nodes.len() as f64
    } else {
        cfg.alpha
    };
    let node_cfg = PvalueConfig {
        alpha,
        kmax: cfg.kmax.unwrap_or_else(|| (n - 2).min(30)),
        nu: cfg.nu,
        ek: None,
        centered: true,
        misclass: false,
    };
    node_cfg.validate()?;

    let selections: Vec<(usize, Vec<(usize, f64)>)> = nodes
        .par_iter()
        .map(|&node| match node_neighbors(x, node, &nodes, &node_cfg, cfg) {
            Ok(sel) => Ok((node, sel)),
            Err(Error::DegenerateResponse) => {
                warn!("node {} is constant and was skipped", node + 1);
                Ok((node, Vec::new()))
            }
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let mut pairs: BTreeMap<(usize, usize), (Option<f64>, Option<f64>)> = BTreeMap::new();
    for (node, sel) in selections {
        for (j, p) in sel {
            let entry = pairs.entry((node.min(j), node.max(j))).or_default();
            if node < j {
                entry.0 = Some(p);
            } else {
                entry.1 = Some(p);
            }
        }
    }
    let edges = pairs
        .into_iter()
        .filter(|(_, (a, b))| match cfg.edge_rule {
            EdgeRule::Or => a.is_some() || b.is_some(),
            EdgeRule::And => a.is_some() && b.is_some(),
        })
        .map(|((i, j), (p_ij, p_ji))| Edge { i, j, p_ij, p_ji })
        .collect();
    Ok(EdgeList { edges })
}

fn graph_alpha_ok(alpha: f64) -> bool {
    (0.0..=1.0).contains(&alpha)
}
