//! Rectangular complex-parameter grids of representations and their JSON
//! file format.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::FamilyKind;
use super::RepPoint;
use crate::matlin::{ProjMatrix, C64};
use crate::{Error, Result};

/// Geometry of a grid centred at `s0 + i t0` with `ns x nt` nodes (odd).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridGeometry {
    pub s0: f64,
    pub t0: f64,
    pub ds: f64,
    pub dt: f64,
    pub ns: usize,
    pub nt: usize,
}

impl GridGeometry {
    pub fn half_s(&self) -> i64 {
        (self.ns / 2) as i64
    }

    pub fn half_t(&self) -> i64 {
        (self.nt / 2) as i64
    }

    pub fn len(&self) -> usize {
        self.ns * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major position of the node with signed offsets, `it` major.
    pub fn index(&self, is: i64, it: i64) -> Option<usize> {
        let (hs, ht) = (self.half_s(), self.half_t());
        if is.abs() > hs || it.abs() > ht {
            return None;
        }
        Some(((it + ht) as usize) * self.ns + (is + hs) as usize)
    }

    pub fn offsets(&self, idx: usize) -> (i64, i64) {
        let it = (idx / self.ns) as i64 - self.half_t();
        let is = (idx % self.ns) as i64 - self.half_s();
        (is, it)
    }

    pub fn z(&self, is: i64, it: i64) -> C64 {
        C64::new(self.s0 + is as f64 * self.ds, self.t0 + it as f64 * self.dt)
    }

    fn validate(&self) -> Result<()> {
        if self.ns % 2 == 0 || self.nt % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "node counts must be odd, got {} x {}",
                self.ns, self.nt
            )));
        }
        if !(self.ds > 0.0 && self.dt > 0.0) || !self.s0.is_finite() || !self.t0.is_finite() {
            return Err(Error::InvalidGrid("spacings must be positive and finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ParamGrid {
    geometry: GridGeometry,
    nodes: Vec<RepPoint>,
    holomorphic: bool,
    conj_symmetric: bool,
}

impl ParamGrid {
    pub fn new(
        geometry: GridGeometry,
        nodes: Vec<RepPoint>,
        holomorphic: bool,
        conj_symmetric: bool,
    ) -> Result<Self> {
        geometry.validate()?;
        if nodes.len() != geometry.len() {
            return Err(Error::InvalidGrid(format!(
                "{} nodes for a {} x {} grid",
                nodes.len(),
                geometry.ns,
                geometry.nt
            )));
        }
        let (k, d) = (nodes[0].rank(), nodes[0].dim());
        for (i, n) in nodes.iter().enumerate() {
            if n.rank() != k || n.dim() != d {
                let (is, it) = geometry.offsets(i);
                return Err(Error::InvalidGrid(format!(
                    "node (is={is}, it={it}) has rank {} dim {}, expected {k}, {d}",
                    n.rank(),
                    n.dim()
                )));
            }
        }
        let g = ParamGrid {
            geometry,
            nodes,
            holomorphic,
            conj_symmetric,
        };
        if conj_symmetric {
            g.verify_conj_symmetry()?;
        }
        Ok(g)
    }

    /// Checks `rho(conj z) = conj(rho(z))` on mirrored node pairs, entrywise.
    fn verify_conj_symmetry(&self) -> Result<()> {
        let geo = &self.geometry;
        if geo.t0 != 0.0 {
            return Err(Error::InvalidGrid(
                "conjugation symmetry requires a real centre".into(),
            ));
        }
        for it in 1..=geo.half_t() {
            for is in -geo.half_s()..=geo.half_s() {
                let a = self.node(is, it).unwrap();
                let b = self.node(is, -it).unwrap();
                for (ga, gb) in a.generators().iter().zip(b.generators()) {
                    let ea = ga.normalized_entries();
                    let eb = gb.normalized_entries();
                    let scale = ea.iter().fold(1.0f64, |m, z| m.max(z.norm()));
                    if ea.iter().zip(&eb).any(|(x, y)| (x.conj() - y).norm() > 1e-12 * scale) {
                        return Err(Error::InvalidGrid(format!(
                            "conjugation symmetry fails at node (is={is}, it={it})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn nodes(&self) -> &[RepPoint] {
        &self.nodes
    }

    pub fn node(&self, is: i64, it: i64) -> Option<&RepPoint> {
        self.geometry.index(is, it).map(|i| &self.nodes[i])
    }

    pub fn center(&self) -> &RepPoint {
        self.node(0, 0).unwrap()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.holomorphic
    }

    pub fn is_conj_symmetric(&self) -> bool {
        self.conj_symmetric
    }

    pub fn rank(&self) -> usize {
        self.nodes[0].rank()
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    /// Apply a map to every node, keeping geometry and flags.
    pub fn map_nodes<F>(&self, f: F) -> Result<ParamGrid>
    where
        F: Fn(&RepPoint) -> Result<RepPoint> + Sync,
    {
        let nodes = self.nodes.par_iter().map(&f).collect::<Result<Vec<_>>>()?;
        ParamGrid::new(self.geometry, nodes, self.holomorphic, self.conj_symmetric)
    }

    /// Sub-grid with every `step`-th node along each axis (same centre).
    pub fn coarsen(&self, step: usize, half: i64) -> Result<ParamGrid> {
        let geo = GridGeometry {
            ds: self.geometry.ds * step as f64,
            dt: self.geometry.dt * step as f64,
            ns: (2 * half + 1) as usize,
            nt: (2 * half + 1) as usize,
            ..self.geometry
        };
        let mut nodes = Vec::with_capacity(geo.len());
        for it in -half..=half {
            for is in -half..=half {
                let n = self
                    .node(is * step as i64, it * step as i64)
                    .ok_or_else(|| Error::InvalidGrid("coarsening outside the grid".into()))?;
                nodes.push(n.clone());
            }
        }
        ParamGrid::new(geo, nodes, self.holomorphic, self.conj_symmetric)
    }
}

/// Evaluates `family` at `z0 + is*ds + i*it*dt` for `|is|, |it| <= n`.
pub fn grid_builder(family: &FamilyKind, z0: C64, ds: f64, dt: f64, n: usize) -> Result<ParamGrid> {
    let geometry = GridGeometry {
        s0: z0.re,
        t0: z0.im,
        ds,
        dt,
        ns: 2 * n + 1,
        nt: 2 * n + 1,
    };
    geometry.validate()?;
    let nodes = (0..geometry.len())
        .into_par_iter()
        .map(|i| {
            let (is, it) = geometry.offsets(i);
            family
                .at(geometry.z(is, it))
                .map(|r| {
                    let fam = r.family().to_string();
                    r.with_param(&fam, geometry.z(is, it))
                })
                .map_err(|e| Error::InvalidGrid(format!("node (is={is}, it={it}): {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let conj = family.is_conj_symmetric() && z0.im == 0.0;
    ParamGrid::new(geometry, nodes, family.is_holomorphic(), conj)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    rank: usize,
    dim: usize,
    grid: GridGeometry,
    flags: GridFlags,
    nodes: Vec<NodeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFlags {
    holomorphic: bool,
    conj_symmetric: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    is: i64,
    it: i64,
    generators: Vec<Vec<[f64; 2]>>,
}

/// Parses a grid from its JSON text.
pub fn parse_grid(text: &str) -> Result<ParamGrid> {
    let f: GridFile = serde_json::from_str(text)?;
    f.grid.validate()?;
    if f.nodes.len() != f.grid.len() {
        return Err(Error::InvalidGrid(format!(
            "{} nodes listed for a {} x {} grid",
            f.nodes.len(),
            f.grid.ns,
            f.grid.nt
        )));
    }
    let mut slots: Vec<Option<RepPoint>> = vec![None; f.grid.len()];
    for node in &f.nodes {
        let (is, it) = (node.is, node.it);
        let at = |msg: String| Error::InvalidGrid(format!("node (is={is}, it={it}): {msg}"));
        let idx = f
            .grid
            .index(is, it)
            .ok_or_else(|| at("offset outside the grid".into()))?;
        if slots[idx].is_some() {
            return Err(at("duplicate node".into()));
        }
        if node.generators.len() != f.rank {
            return Err(at(format!(
                "{} generators, expected {}",
                node.generators.len(),
                f.rank
            )));
        }
        let mut gens = Vec::with_capacity(f.rank);
        for (j, g) in node.generators.iter().enumerate() {
            if g.len() != f.dim * f.dim {
                return Err(at(format!(
                    "generator {} has {} entries, expected {}",
                    j + 1,
                    g.len(),
                    f.dim * f.dim
                )));
            }
            let e = g.iter().map(|p| C64::new(p[0], p[1])).collect();
            gens.push(ProjMatrix::new(f.dim, e).map_err(|e| at(e.to_string()))?);
        }
        let rep = RepPoint::with_meta(gens, "file", f.grid.z(is, it)).map_err(|e| at(e.to_string()))?;
        slots[idx] = Some(rep);
    }
    let nodes = slots.into_iter().map(|s| s.unwrap()).collect();
    ParamGrid::new(f.grid, nodes, f.flags.holomorphic, f.flags.conj_symmetric)
}

pub fn load_grid(path: &Path) -> Result<ParamGrid> {
    let text = std::fs::read_to_string(path)?;
    parse_grid(&text)
}

/// JSON text of a grid (generators written as `|det| = 1` representatives).
pub fn grid_to_json(grid: &ParamGrid) -> Result<String> {
    let geo = *grid.geometry();
    let nodes = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (is, it) = geo.offsets(i);
            NodeFile {
                is,
                it,
                generators: r
                    .generators()
                    .iter()
                    .map(|g| g.normalized_entries().iter().map(|z| [z.re, z.im]).collect())
                    .collect(),
            }
        })
        .collect();
    let f = GridFile {
        rank: grid.rank(),
        dim: grid.dim(),
        grid: geo,
        flags: GridFlags {
            holomorphic: grid.is_holomorphic(),
            conj_symmetric: grid.is_conj_symmetric(),
        },
        nodes,
    };
    Ok(serde_json::to_string_pretty(&f)?)
}

pub fn save_grid(grid: &ParamGrid, path: &Path) -> Result<()> {
    std::fs::write(path, grid_to_json(grid)?)?;
    Ok(())
}
