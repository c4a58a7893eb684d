//! Degree-of-freedom bookkeeping: the 6-per-node layout, prescribed-value
//! constraints that scale with the load factor, and the load program.

use crate::error::{FemError, Result};
use crate::mesh::Mesh;

/// Per-node DOF order: `u1, u2, W11, W22, W12, W33`.
pub const DOF_PER_NODE: usize = 6;

pub const U1: usize = 0;
pub const U2: usize = 1;
pub const W11: usize = 2;
pub const W22: usize = 3;
pub const W12: usize = 4;
pub const W33: usize = 5;

/// Global index of a node's local DOF.
#[inline]
pub fn gdof(node: usize, local: usize) -> usize {
    DOF_PER_NODE * node + local
}

/// Trivial dense numbering: 6 consecutive DOFs per node.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub n_nodes: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        Self {
            n_nodes: mesh.nodes.len(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        DOF_PER_NODE * self.n_nodes
    }

    /// Half bandwidth of the assembled system: the largest global-DOF spread
    /// inside any single element.
    pub fn half_bandwidth(&self, mesh: &Mesh) -> usize {
        let mut hb = 0;
        for conn in &mesh.elements {
            let lo = conn.iter().min().unwrap();
            let hi = conn.iter().max().unwrap();
            hb = hb.max(gdof(*hi, DOF_PER_NODE - 1) - gdof(*lo, 0));
        }
        hb
    }
}

/// Prescribed DOFs. Each constrained DOF carries a scale; its prescribed
/// value at load factor `t` is `scale * t` (zero scale pins the DOF).
#[derive(Clone, Debug)]
pub struct Constraints {
    scale: Vec<Option<f64>>,
}

impl Constraints {
    pub fn new(n_dofs: usize) -> Self {
        Self {
            scale: vec![None; n_dofs],
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.scale.len()
    }

    pub fn set(&mut self, dof: usize, scale: f64) {
        self.scale[dof] = Some(scale);
    }

    /// Pins `local` of every node in the named set to zero.
    pub fn fix_set(&mut self, mesh: &Mesh, set: &str, local: usize) -> Result<()> {
        for &n in mesh.node_set(set)? {
            self.set(gdof(n, local), 0.0);
        }
        Ok(())
    }

    /// Drives `local` of every node in the named set with unit scale.
    pub fn drive_set(&mut self, mesh: &Mesh, set: &str, local: usize) -> Result<()> {
        for &n in mesh.node_set(set)? {
            self.set(gdof(n, local), 1.0);
        }
        Ok(())
    }

    #[inline]
    pub fn is_constrained(&self, dof: usize) -> bool {
        self.scale[dof].is_some()
    }

    /// Prescribed value at load factor `t`, if constrained.
    #[inline]
    pub fn value(&self, dof: usize, t: f64) -> Option<f64> {
        self.scale[dof].map(|s| s * t)
    }

    /// Writes all prescribed values for load factor `t` into `d`.
    pub fn apply(&self, d: &mut [f64], t: f64) {
        for (dof, s) in self.scale.iter().enumerate() {
            if let Some(s) = s {
                d[dof] = s * t;
            }
        }
    }

    /// l2 norm over the free (unconstrained) DOFs.
    pub fn free_norm(&self, r: &[f64]) -> f64 {
        let mut s = 0.0;
        for (dof, v) in r.iter().enumerate() {
            if self.scale[dof].is_none() {
                s += v * v;
            }
        }
        s.sqrt()
    }
}

/// One load step: target load factor (mm of prescribed displacement for the
/// built-in problems), relative residual tolerance, and the iteration cap.
#[derive(Clone, Copy, Debug)]
pub struct LoadStep {
    pub load: f64,
    pub tol: f64,
    pub max_iters: usize,
}

/// Monotone sequence of load steps.
#[derive(Clone, Debug)]
pub struct LoadProgram {
    pub steps: Vec<LoadStep>,
}

impl LoadProgram {
    /// `n` uniform increments up to `total`.
    pub fn uniform(total: f64, n: usize, tol: f64, max_iters: usize) -> Self {
        let steps = (1..=n)
            .map(|k| LoadStep {
                load: total * k as f64 / n as f64,
                tol,
                max_iters,
            })
            .collect();
        Self { steps }
    }

    /// Pseudo-time must advance monotonically.
    pub fn validate(&self) -> Result<()> {
        let mut prev = 0.0;
        for (i, s) in self.steps.iter().enumerate() {
            if s.load <= prev || !s.load.is_finite() {
                return Err(FemError::Mesh(format!(
                    "load program: step {i} load {} does not advance past {prev}",
                    s.load
                )));
            }
            prev = s.load;
        }
        Ok(())
    }
}
