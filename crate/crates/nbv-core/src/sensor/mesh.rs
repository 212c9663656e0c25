//! Triangle meshes with a bounding-volume hierarchy for nearest-hit ray
//! queries. Meshes may be open (non-watertight); triangles are two-sided.

use crate::geom::Vec3;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("triangle {tri} references vertex {idx} but only {len} vertices exist")]
    BadIndex { tri: usize, idx: u32, len: usize },
    #[error("mesh has no triangles")]
    Empty,
    #[error("non-finite vertex at index {0}")]
    NonFinite(usize),
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("reading mesh file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct RayHit {
    /// Distance along the (unit) ray direction.
    pub t: f64,
    pub triangle: u32,
}

#[derive(Debug, Clone)]
struct BvhNode {
    bb_min: Vec3,
    bb_max: Vec3,
    /// Leaf: start into `order`. Internal: left child index (right = left+1
    /// is not guaranteed, so it is stored explicitly in `b`).
    a: u32,
    b: u32,
    count: u32, // 0 for internal nodes
}

#[derive(Debug, Clone)]
pub struct SceneMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    nodes: Vec<BvhNode>,
    order: Vec<u32>,
}

const LEAF_SIZE: usize = 4;

impl SceneMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(MeshError::NonFinite(i));
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &idx in tri {
                if idx as usize >= vertices.len() {
                    return Err(MeshError::BadIndex { tri: t, idx, len: vertices.len() });
                }
            }
        }
        let mut mesh = Self { vertices, triangles, nodes: Vec::new(), order: Vec::new() };
        mesh.build_bvh();
        Ok(mesh)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, i: u32) -> (Vec3, Vec3, Vec3) {
        let [a, b, c] = self.triangles[i as usize];
        (self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize])
    }

    pub fn triangle_area(&self, i: u32) -> f64 {
        let (a, b, c) = self.triangle(i);
        (b - a).cross(&(c - a)).norm() / 2.0
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len() as u32).map(|i| self.triangle_area(i)).sum()
    }

    pub fn aabb(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Uniformly rescale and recenter so the bounding box is centered on the
    /// origin with its largest extent equal to `extent`.
    pub fn normalized_to_extent(mut self, extent: f64) -> Self {
        let (lo, hi) = self.aabb();
        let center = (lo + hi) / 2.0;
        let span = (hi - lo).max();
        let k = if span > 0.0 { extent / span } else { 1.0 };
        for v in &mut self.vertices {
            *v = (*v - center) * k;
        }
        self.build_bvh();
        self
    }

    fn build_bvh(&mut self) {
        let n = self.triangles.len();
        let centroids: Vec<Vec3> = (0..n as u32)
            .map(|i| {
                let (a, b, c) = self.triangle(i);
                (a + b + c) / 3.0
            })
            .collect();
        self.order = (0..n as u32).collect();
        self.nodes.clear();
        self.nodes.push(BvhNode {
            bb_min: Vec3::zeros(),
            bb_max: Vec3::zeros(),
            a: 0,
            b: 0,
            count: 0,
        });
        // Iterative top-down build: (node index, range of `order`).
        let mut stack = vec![(0usize, 0usize, n)];
        while let Some((node, start, end)) = stack.pop() {
            let mut lo = Vec3::repeat(f64::INFINITY);
            let mut hi = Vec3::repeat(f64::NEG_INFINITY);
            for &t in &self.order[start..end] {
                let (a, b, c) = self.triangle(t);
                lo = lo.inf(&a).inf(&b).inf(&c);
                hi = hi.sup(&a).sup(&b).sup(&c);
            }
            self.nodes[node].bb_min = lo;
            self.nodes[node].bb_max = hi;
            let count = end - start;
            if count <= LEAF_SIZE {
                self.nodes[node].a = start as u32;
                self.nodes[node].b = 0;
                self.nodes[node].count = count as u32;
                continue;
            }
            let mut clo = Vec3::repeat(f64::INFINITY);
            let mut chi = Vec3::repeat(f64::NEG_INFINITY);
            for &t in &self.order[start..end] {
                clo = clo.inf(&centroids[t as usize]);
                chi = chi.sup(&centroids[t as usize]);
            }
            let spread = chi - clo;
            let axis = if spread.x >= spread.y && spread.x >= spread.z {
                0
            } else if spread.y >= spread.z {
                1
            } else {
                2
            };
            let mid = start + count / 2;
            self.order[start..end].select_nth_unstable_by(count / 2, |&p, &q| {
                centroids[p as usize][axis]
                    .partial_cmp(&centroids[q as usize][axis])
                    .unwrap()
                    .then(p.cmp(&q))
            });
            let left = self.nodes.len();
            self.nodes.push(BvhNode {
                bb_min: Vec3::zeros(),
                bb_max: Vec3::zeros(),
                a: 0,
                b: 0,
                count: 0,
            });
            let right = self.nodes.len();
            self.nodes.push(BvhNode {
                bb_min: Vec3::zeros(),
                bb_max: Vec3::zeros(),
                a: 0,
                b: 0,
                count: 0,
            });
            self.nodes[node].a = left as u32;
            self.nodes[node].b = right as u32;
            self.nodes[node].count = 0;
            stack.push((left, start, mid));
            stack.push((right, mid, end));
        }
    }

    /// Nearest intersection of the ray with any triangle at parameter
    /// t ∈ (1e-9, t_max]. `dir` must be unit length for t to be metric.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<RayHit> {
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<RayHit> = None;
        let mut best_t = t_max;
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        stack[sp] = 0;
        sp += 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !aabb_hit(&node.bb_min, &node.bb_max, origin, &inv, best_t) {
                continue;
            }
            if node.count > 0 {
                for k in node.a..node.a + node.count {
                    let tri = self.order[k as usize];
                    let (a, b, c) = self.triangle(tri);
                    if let Some(t) = ray_triangle(origin, dir, &a, &b, &c, best_t) {
                        best_t = t;
                        best = Some(RayHit { t, triangle: tri });
                    }
                }
            } else {
                stack[sp] = node.a;
                stack[sp + 1] = node.b;
                sp += 2;
            }
        }
        best
    }
}

fn aabb_hit(lo: &Vec3, hi: &Vec3, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> bool {
    let mut t0 = 0.0f64;
    let mut t1 = t_max;
    for k in 0..3 {
        let ta = (lo[k] - origin[k]) * inv_dir[k];
        let tb = (hi[k] - origin[k]) * inv_dir[k];
        let (near, far) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        if near.is_nan() || far.is_nan() {
            // Ray parallel to this slab: inside iff origin between planes.
            if origin[k] < lo[k] || origin[k] > hi[k] {
                return false;
            }
            continue;
        }
        t0 = t0.max(near);
        t1 = t1.min(far);
        if t0 > t1 {
            return false;
        }
    }
    true
}

/// Möller–Trumbore, two-sided, t ∈ (1e-9, t_max).
fn ray_triangle(o: &Vec3, d: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3, t_max: f64) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = d.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let tv = o - a;
    let u = tv.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = tv.cross(&e1);
    let v = d.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    if t > 1e-9 && t < t_max {
        Some(t)
    } else {
        None
    }
}
