//! Built-in test scene: the Newell teapot, tessellated from its 32 bicubic
//! Bezier patches and normalized to a chosen physical size.

use super::mesh::SceneMesh;
use super::teapot_data::{LID_FIT, LID_PATCHES, PATCHES, VERTICES};
use crate::geom::Vec3;

fn bernstein(i: usize, t: f64) -> f64 {
    let s = 1.0 - t;
    match i {
        0 => s * s * s,
        1 => 3.0 * t * s * s,
        2 => 3.0 * t * t * s,
        _ => t * t * t,
    }
}

fn patch_point(ctrl: &[Vec3; 16], u: f64, v: f64) -> Vec3 {
    let mut p = Vec3::zeros();
    for (i, bu) in (0..4).map(|i| (i, bernstein(i, u))) {
        for (j, bv) in (0..4).map(|j| (j, bernstein(j, v))) {
            p += ctrl[i * 4 + j] * (bu * bv);
        }
    }
    p
}

fn control_points(patch: usize) -> [Vec3; 16] {
    let mut ctrl = [Vec3::zeros(); 16];
    for (k, &vi) in PATCHES[patch].iter().enumerate() {
        let [x, y, z] = VERTICES[vi as usize];
        let fit = if LID_PATCHES.contains(&patch) { LID_FIT } else { 1.0 };
        ctrl[k] = Vec3::new(x * fit, y * fit, z);
    }
    ctrl
}

/// Tessellate every patch on a (resolution+1)² grid and normalize the result
/// so the bounding box is centered on the origin with `extent` as its
/// largest dimension. The mesh is open (no bottom disc), as in the original
/// dataset.
pub fn teapot_mesh(resolution: usize, extent: f64) -> SceneMesh {
    let res = resolution.max(1);
    let mut vertices = Vec::with_capacity(32 * (res + 1) * (res + 1));
    let mut triangles = Vec::with_capacity(32 * 2 * res * res);
    for patch in 0..PATCHES.len() {
        let ctrl = control_points(patch);
        let base = vertices.len() as u32;
        for i in 0..=res {
            for j in 0..=res {
                let u = i as f64 / res as f64;
                let v = j as f64 / res as f64;
                vertices.push(patch_point(&ctrl, u, v));
            }
        }
        let row = (res + 1) as u32;
        for i in 0..res as u32 {
            for j in 0..res as u32 {
                let p00 = base + i * row + j;
                let p01 = p00 + 1;
                let p10 = p00 + row;
                let p11 = p10 + 1;
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            }
        }
    }
    SceneMesh::new(vertices, triangles)
        .expect("patch tessellation is always a valid mesh")
        .normalized_to_extent(extent)
}
