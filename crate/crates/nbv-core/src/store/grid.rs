//! Uniform hash grid for exact fixed-radius neighbor queries.
//!
//! Cells are cubes of a fixed edge length keyed by their integer coordinates.
//! Queries test every point in the cells overlapping the query ball, so
//! results are exact for any radius; the cell edge only affects speed.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use crate::geom::Vec3;

/// splitmix64 finalizer over the written words. The grid keys are three cell
/// coordinates; quality mixing here is what keeps cell buckets short.
#[derive(Default)]
pub struct MixHasher(u64);

impl Hasher for MixHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(b as u64);
        }
    }

    fn write_u64(&mut self, n: u64) {
        let mut z = self.0 ^ n;
        z = z.wrapping_add(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        self.0 = z ^ (z >> 31);
    }

    fn write_i64(&mut self, n: i64) {
        self.write_u64(n as u64);
    }

    fn write_i32(&mut self, n: i32) {
        self.write_u64(n as u32 as u64);
    }

    fn write_u8(&mut self, n: u8) {
        self.write_u64(n as u64);
    }

    fn write_usize(&mut self, n: usize) {
        self.write_u64(n as u64);
    }
}

type Cell = (i64, i64, i64);

#[derive(Debug, Clone, Copy)]
struct Entry {
    idx: u32,
    p: Vec3,
}

#[derive(Debug, Clone)]
pub struct UniformGrid {
    inv_cell: f64,
    cells: HashMap<Cell, Vec<Entry>, BuildHasherDefault<MixHasher>>,
}

impl UniformGrid {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite());
        Self {
            inv_cell: 1.0 / cell,
            cells: HashMap::default(),
        }
    }

    fn key(&self, p: &Vec3) -> Cell {
        (
            (p.x * self.inv_cell).floor() as i64,
            (p.y * self.inv_cell).floor() as i64,
            (p.z * self.inv_cell).floor() as i64,
        )
    }

    pub fn insert(&mut self, idx: u32, p: Vec3) {
        self.cells
            .entry(self.key(&p))
            .or_default()
            .push(Entry { idx, p });
    }

    /// Indices of stored points with ||q − center|| ≤ radius, ascending.
    pub fn neighbors_within(&self, center: &Vec3, radius: f64, out: &mut Vec<u32>) {
        out.clear();
        let r2 = radius * radius;
        let lo = self.key(&Vec3::new(center.x - radius, center.y - radius, center.z - radius));
        let hi = self.key(&Vec3::new(center.x + radius, center.y + radius, center.z + radius));
        let span = ((hi.0 - lo.0 + 1) as u64)
            .saturating_mul((hi.1 - lo.1 + 1) as u64)
            .saturating_mul((hi.2 - lo.2 + 1) as u64);
        if span > self.cells.len() as u64 {
            // Large query ball: visiting occupied cells beats enumerating the box.
            for (cell, entries) in &self.cells {
                if cell.0 < lo.0 || cell.0 > hi.0 || cell.1 < lo.1 || cell.1 > hi.1
                    || cell.2 < lo.2 || cell.2 > hi.2
                {
                    continue;
                }
                for e in entries {
                    if (e.p - center).norm_squared() <= r2 {
                        out.push(e.idx);
                    }
                }
            }
            out.sort_unstable();
        } else {
            for cx in lo.0..=hi.0 {
                for cy in lo.1..=hi.1 {
                    for cz in lo.2..=hi.2 {
                        if let Some(entries) = self.cells.get(&(cx, cy, cz)) {
                            for e in entries {
                                if (e.p - center).norm_squared() <= r2 {
                                    out.push(e.idx);
                                }
                            }
                        }
                    }
                }
            }
            out.sort_unstable();
        }
    }

    /// True if any stored point lies within the closed ball.
    pub fn has_any_within(&self, center: &Vec3, radius: f64) -> bool {
        let r2 = radius * radius;
        let lo = self.key(&Vec3::new(center.x - radius, center.y - radius, center.z - radius));
        let hi = self.key(&Vec3::new(center.x + radius, center.y + radius, center.z + radius));
        let span = ((hi.0 - lo.0 + 1) as u64)
            .saturating_mul((hi.1 - lo.1 + 1) as u64)
            .saturating_mul((hi.2 - lo.2 + 1) as u64);
        if span > self.cells.len() as u64 {
            for (cell, entries) in &self.cells {
                if cell.0 < lo.0 || cell.0 > hi.0 || cell.1 < lo.1 || cell.1 > hi.1
                    || cell.2 < lo.2 || cell.2 > hi.2
                {
                    continue;
                }
                if entries.iter().any(|e| (e.p - center).norm_squared() <= r2) {
                    return true;
                }
            }
            return false;
        }
        for cx in lo.0..=hi.0 {
            for cy in lo.1..=hi.1 {
                for cz in lo.2..=hi.2 {
                    if let Some(entries) = self.cells.get(&(cx, cy, cz)) {
                        if entries.iter().any(|e| (e.p - center).norm_squared() <= r2) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_scan(points: &[Vec3], center: &Vec3, radius: f64) -> Vec<u32> {
        let r2 = radius * radius;
        (0..points.len() as u32)
            .filter(|&i| (points[i as usize] - center).norm_squared() <= r2)
            .collect()
    }

    #[test]
    fn agrees_with_linear_scan_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(n, cell, radius) in &[
            (200usize, 0.017, 0.017),
            (500, 0.017, 0.25),
            (500, 0.1, 0.004),
            (1000, 0.017, 1.0),
        ] {
            let pts: Vec<Vec3> = (0..n)
                .map(|_| {
                    Vec3::new(
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(-0.5..0.5),
                    )
                })
                .collect();
            let mut grid = UniformGrid::new(cell);
            for (i, p) in pts.iter().enumerate() {
                grid.insert(i as u32, *p);
            }
            let mut got = Vec::new();
            for _ in 0..50 {
                let c = Vec3::new(
                    rng.gen_range(-0.6..0.6),
                    rng.gen_range(-0.6..0.6),
                    rng.gen_range(-0.6..0.6),
                );
                grid.neighbors_within(&c, radius, &mut got);
                assert_eq!(got, linear_scan(&pts, &c, radius));
                assert_eq!(grid.has_any_within(&c, radius), !got.is_empty());
            }
        }
    }

    #[test]
    fn boundary_distance_is_inclusive() {
        let mut grid = UniformGrid::new(0.017);
        grid.insert(0, Vec3::new(0.0, 0.0, 1.0));
        let mut out = Vec::new();
        grid.neighbors_within(&Vec3::zeros(), 1.0, &mut out);
        assert_eq!(out, vec![0]);
        assert!(grid.has_any_within(&Vec3::zeros(), 1.0));
        assert!(!grid.has_any_within(&Vec3::zeros(), 0.999_999));
    }

    #[test]
    fn negative_coordinates_bucket_correctly() {
        let mut grid = UniformGrid::new(0.1);
        let pts = [
            Vec3::new(-0.05, -0.05, -0.05),
            Vec3::new(0.05, 0.05, 0.05),
            Vec3::new(-0.1, 0.0, 0.0),
        ];
        for (i, p) in pts.iter().enumerate() {
            grid.insert(i as u32, *p);
        }
        let mut out = Vec::new();
        grid.neighbors_within(&Vec3::zeros(), 0.12, &mut out);
        assert_eq!(out, vec![0, 1, 2]);
    }
}
