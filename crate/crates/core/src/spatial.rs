//! Uniform cell grid for fixed-radius and nearest-neighbor queries.

/// Squared Euclidean distance. Symmetric bit-for-bit in its arguments.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Points bucketed into axis-aligned cubes of side `cell`, stored in
/// compressed form (cell offsets + point indices ascending within a cell).
#[derive(Debug, Clone)]
pub struct CellGrid {
    dim: usize,
    cell: f64,
    origin: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    starts: Vec<usize>,
    entries: Vec<usize>,
}

const MAX_CELLS_PER_POINT: usize = 8;

impl CellGrid {
    /// Builds a grid over `coords` (row-major, `dim` values per point). The
    /// requested side is enlarged if the grid would otherwise hold far more
    /// cells than points.
    pub fn new(coords: &[f64], dim: usize, cell: f64) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0);
        assert!(cell > 0.0 && cell.is_finite(), "cell side must be positive");
        let n = coords.len() / dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if n == 0 {
            lo.iter_mut().for_each(|v| *v = 0.0);
            hi.iter_mut().for_each(|v| *v = 0.0);
        }

        let budget = (MAX_CELLS_PER_POINT * n).max(1024) as f64;
        let mut cell = cell;
        let shape_for = |c: f64| -> Vec<usize> {
            (0..dim).map(|k| ((hi[k] - lo[k]) / c).floor() as usize + 1).collect()
        };
        let mut shape = shape_for(cell);
        while shape.iter().map(|&s| s as f64).product::<f64>() > budget {
            cell *= 1.5;
            shape = shape_for(cell);
        }
        let mut strides = vec![1; dim];
        for k in 1..dim {
            strides[k] = strides[k - 1] * shape[k - 1];
        }
        let total: usize = shape.iter().product();

        let mut grid = Self {
            dim,
            cell,
            origin: lo,
            shape,
            strides,
            starts: vec![0; total + 1],
            entries: vec![0; n],
        };
        let ids: Vec<usize> = coords.chunks_exact(dim).map(|p| grid.flat_index(p)).collect();
        for &c in &ids {
            grid.starts[c + 1] += 1;
        }
        for c in 0..total {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in ids.iter().enumerate() {
            grid.entries[fill[c]] = i;
            fill[c] += 1;
        }
        grid
    }

    pub fn cell_side(&self) -> f64 {
        self.cell
    }

    fn axis_coord(&self, x: f64, k: usize) -> i64 {
        ((x - self.origin[k]) / self.cell).floor() as i64
    }

    fn flat_index(&self, p: &[f64]) -> usize {
        (0..self.dim)
            .map(|k| {
                let c = self.axis_coord(p[k], k).clamp(0, self.shape[k] as i64 - 1);
                c as usize * self.strides[k]
            })
            .sum()
    }

    fn cell_points(&self, flat: usize) -> &[usize] {
        &self.entries[self.starts[flat]..self.starts[flat + 1]]
    }

    /// Visits every cell whose integer coordinates lie in `[lo, hi]` (clamped
    /// to the grid), passing the Chebyshev offset from `center`.
    fn visit_box(&self, center: &[i64], span: i64, mut f: impl FnMut(usize, i64)) {
        let d = self.dim;
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        for k in 0..d {
            lo[k] = (center[k] - span).max(0);
            hi[k] = (center[k] + span).min(self.shape[k] as i64 - 1);
            if lo[k] > hi[k] {
                return;
            }
        }
        let mut cur = lo.clone();
        loop {
            let flat: usize = (0..d).map(|k| cur[k] as usize * self.strides[k]).sum();
            let cheb = (0..d).map(|k| (cur[k] - center[k]).abs()).max().unwrap_or(0);
            f(flat, cheb);
            let mut k = 0;
            loop {
                if k == d {
                    return;
                }
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Calls `f(index, squared_distance)` for every point within closed
    /// distance `radius` of `x`. Visit order is by cell, then by index.
    pub fn for_each_within(
        &self,
        coords: &[f64],
        x: &[f64],
        radius: f64,
        mut f: impl FnMut(usize, f64),
    ) {
        let r2 = radius * radius;
        let center: Vec<i64> = (0..self.dim).map(|k| self.axis_coord(x[k], k)).collect();
        let span = (radius / self.cell).ceil() as i64;
        self.visit_box(&center, span, |flat, _| {
            for &j in self.cell_points(flat) {
                let d2 = dist2(x, &coords[j * self.dim..(j + 1) * self.dim]);
                if d2 <= r2 {
                    f(j, d2);
                }
            }
        });
    }

    /// Indices within closed distance `radius` of `x`, ascending.
    pub fn within(&self, coords: &[f64], x: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(coords, x, radius, |j, _| out.push(j));
        out.sort_unstable();
        out
    }

    /// Nearest point to `x` as `(index, distance)`; ties go to the lowest
    /// index. `None` only for an empty grid.
    pub fn nearest(&self, coords: &[f64], x: &[f64]) -> Option<(usize, f64)> {
        if self.entries.is_empty() {
            return None;
        }
        let center: Vec<i64> = (0..self.dim).map(|k| self.axis_coord(x[k], k)).collect();
        // rings needed before every grid cell has been visited
        let max_ring = (0..self.dim)
            .map(|k| center[k].abs().max((self.shape[k] as i64 - 1 - center[k]).abs()))
            .max()
            .unwrap_or(0);
        // first ring that touches the grid, for queries outside it
        let first_ring = (0..self.dim)
            .map(|k| (-center[k]).max(center[k] - (self.shape[k] as i64 - 1)).max(0))
            .max()
            .unwrap_or(0);
        let mut best: Option<(f64, usize)> = None;
        let mut ring = first_ring;
        loop {
            self.visit_box(&center, ring, |flat, cheb| {
                if cheb != ring {
                    return;
                }
                for &j in self.cell_points(flat) {
                    let d2 = dist2(x, &coords[j * self.dim..(j + 1) * self.dim]);
                    let better = match best {
                        None => true,
                        Some((bd, bj)) => d2 < bd || (d2 == bd && j < bj),
                    };
                    if better {
                        best = Some((d2, j));
                    }
                }
            });
            if let Some((bd, _)) = best {
                // anything in ring + 1 or beyond is at least ring * cell away
                let reach = ring as f64 * self.cell;
                if bd.sqrt() < reach {
                    break;
                }
            }
            if ring >= max_ring {
                break;
            }
            ring += 1;
        }
        best.map(|(d2, j)| (j, d2.sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_nearest(coords: &[f64], dim: usize, x: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (j, p) in coords.chunks_exact(dim).enumerate() {
            let d2 = dist2(x, p);
            if d2 < best.0 {
                best = (d2, j);
            }
        }
        best.1
    }

    #[test]
    fn nearest_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=3 {
            let coords: Vec<f64> = (0..300 * dim).map(|_| rng.gen::<f64>()).collect();
            let grid = CellGrid::new(&coords, dim, 0.05);
            for _ in 0..200 {
                let q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..1.5)).collect();
                let (j, _) = grid.nearest(&coords, &q).unwrap();
                assert_eq!(j, brute_nearest(&coords, dim, &q));
            }
        }
    }

    #[test]
    fn within_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let coords: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
        let grid = CellGrid::new(&coords, 2, 0.1);
        for _ in 0..50 {
            let q = [rng.gen::<f64>(), rng.gen::<f64>()];
            let r = rng.gen_range(0.01..0.3);
            let expect: Vec<usize> = coords
                .chunks_exact(2)
                .enumerate()
                .filter(|(_, p)| dist2(&q, p) <= r * r)
                .map(|(j, _)| j)
                .collect();
            assert_eq!(grid.within(&coords, &q, r), expect);
        }
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let coords = [1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0];
        let grid = CellGrid::new(&coords, 2, 0.3);
        assert_eq!(grid.nearest(&coords, &[0.0, 0.0]).unwrap().0, 0);
        let empty = CellGrid::new(&[], 2, 0.3);
        assert!(empty.nearest(&[], &[0.0, 0.0]).is_none());
    }
}
