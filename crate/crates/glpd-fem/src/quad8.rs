//! 8-node serendipity quadrilateral: shape functions, natural-coordinate
//! derivatives, and Gauss-point geometry with the 2x2 sub-integration rule.

use crate::error::{FemError, Result};

/// Natural coordinates of the 8 nodes: corners counterclockwise, then the
/// midside nodes (bottom, right, top, left).
pub const NODE_XI: [[f64; 2]; 8] = [
    [-1.0, -1.0],
    [1.0, -1.0],
    [1.0, 1.0],
    [-1.0, 1.0],
    [0.0, -1.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [-1.0, 0.0],
];

/// 2x2 Gauss rule: (natural point, weight).
pub const GAUSS_2X2: [([f64; 2], f64); 4] = {
    const G: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)
    [
        ([-G, -G], 1.0),
        ([G, -G], 1.0),
        ([G, G], 1.0),
        ([-G, G], 1.0),
    ]
};

/// Shape values and natural derivatives at `(xi, eta)`: `(n, dn)` with
/// `dn[a] = [dN_a/dxi, dN_a/deta]`.
pub fn shape(xi: f64, eta: f64) -> ([f64; 8], [[f64; 2]; 8]) {
    let mut n = [0.0; 8];
    let mut dn = [[0.0; 2]; 8];
    for a in 0..4 {
        let [xa, ea] = NODE_XI[a];
        n[a] = 0.25 * (1.0 + xi * xa) * (1.0 + eta * ea) * (xi * xa + eta * ea - 1.0);
        dn[a][0] = 0.25 * xa * (1.0 + eta * ea) * (2.0 * xi * xa + eta * ea);
        dn[a][1] = 0.25 * ea * (1.0 + xi * xa) * (xi * xa + 2.0 * eta * ea);
    }
    for a in [4, 6] {
        let ea = NODE_XI[a][1];
        n[a] = 0.5 * (1.0 - xi * xi) * (1.0 + eta * ea);
        dn[a][0] = -xi * (1.0 + eta * ea);
        dn[a][1] = 0.5 * (1.0 - xi * xi) * ea;
    }
    for a in [5, 7] {
        let xa = NODE_XI[a][0];
        n[a] = 0.5 * (1.0 + xi * xa) * (1.0 - eta * eta);
        dn[a][0] = 0.5 * xa * (1.0 - eta * eta);
        dn[a][1] = -eta * (1.0 + xi * xa);
    }
    (n, dn)
}

/// Geometry of one integration point: shape values, Cartesian shape
/// gradients, Jacobian determinant, and physical coordinates.
#[derive(Clone, Debug)]
pub struct GpGeom {
    pub n: [f64; 8],
    /// `dndx[a] = [dN_a/dx, dN_a/dy]` (1/mm).
    pub dndx: [[f64; 2]; 8],
    pub detj: f64,
    pub xy: [f64; 2],
}

/// Evaluates the isoparametric map at `(xi, eta)`; errors on a non-positive
/// Jacobian.
pub fn gp_geometry(coords: &[[f64; 2]; 8], xi: f64, eta: f64) -> Result<GpGeom> {
    let (n, dn) = shape(xi, eta);
    let mut j = [[0.0; 2]; 2];
    let mut xy = [0.0; 2];
    for a in 0..8 {
        for d in 0..2 {
            xy[d] += n[a] * coords[a][d];
            j[d][0] += coords[a][d] * dn[a][0];
            j[d][1] += coords[a][d] * dn[a][1];
        }
    }
    let detj = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(detj > 0.0) {
        return Err(FemError::Mesh(format!(
            "non-positive Jacobian {detj:e} at ({xi}, {eta})"
        )));
    }
    let inv = [
        [j[1][1] / detj, -j[0][1] / detj],
        [-j[1][0] / detj, j[0][0] / detj],
    ];
    let mut dndx = [[0.0; 2]; 8];
    for a in 0..8 {
        // dN/dx_i = sum_k dN/dxi_k * dxi_k/dx_i, with dxi/dx = J^-1.
        dndx[a][0] = inv[0][0] * dn[a][0] + inv[1][0] * dn[a][1];
        dndx[a][1] = inv[0][1] * dn[a][0] + inv[1][1] * dn[a][1];
    }
    Ok(GpGeom { n, dndx, detj, xy })
}
