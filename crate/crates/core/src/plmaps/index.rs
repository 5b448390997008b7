//! Uniform-grid index over axis-aligned boxes.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub(crate) struct BoxIndex {
    lo: Vec<f64>,
    cell: Vec<f64>,
    dims: Vec<usize>,
    cells: Vec<Vec<u32>>,
    boxes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl BoxIndex {
    /// `boxes[i] = (min, max)`, already padded by the caller.
    pub(crate) fn new(boxes: Vec<(Vec<f64>, Vec<f64>)>) -> Self {
        let d = boxes.first().map_or(1, |b| b.0.len()).max(1);
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (a, b) in &boxes {
            for k in 0..d {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        if boxes.is_empty() {
            lo = vec![0.0; d];
            hi = vec![1.0; d];
        }
        let per_axis = ((boxes.len() as f64).powf(1.0 / d as f64).round() as usize).clamp(1, 96);
        let dims = vec![per_axis; d];
        let cell: Vec<f64> = (0..d).map(|k| ((hi[k] - lo[k]) / per_axis as f64).max(1e-12)).collect();
        let total: usize = dims.iter().product();
        let mut cells = vec![Vec::new(); total];
        let mut out = Self { lo, cell, dims, cells: Vec::new(), boxes: Vec::new() };
        for (i, (a, b)) in boxes.iter().enumerate() {
            let ca = out.cell_of(a);
            let cb = out.cell_of(b);
            let mut cur = ca.clone();
            loop {
                cells[out.flat(&cur)].push(i as u32);
                let mut k = 0;
                loop {
                    if k == d {
                        break;
                    }
                    if cur[k] < cb[k] {
                        cur[k] += 1;
                        break;
                    }
                    cur[k] = ca[k];
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        out.cells = cells;
        out.boxes = boxes;
        out
    }

    fn cell_of(&self, p: &[f64]) -> Vec<usize> {
        (0..self.dims.len())
            .map(|k| {
                let c = ((p[k] - self.lo[k]) / self.cell[k]).floor();
                (c.max(0.0) as usize).min(self.dims[k] - 1)
            })
            .collect()
    }

    fn flat(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.dims).fold(0, |acc, (ci, di)| acc * di + ci)
    }

    /// Ids of boxes containing `p`.
    pub(crate) fn query<'a>(&'a self, p: &'a [f64]) -> impl Iterator<Item = usize> + 'a {
        let inside_grid = (0..self.dims.len())
            .all(|k| p[k] >= self.lo[k] - 1e-12 && p[k] <= self.lo[k] + self.cell[k] * self.dims[k] as f64 + 1e-12);
        let ids: &[u32] = if inside_grid { &self.cells[self.flat(&self.cell_of(p))] } else { &[] };
        ids.iter().map(|&i| i as usize).filter(move |&i| {
            let (a, b) = &self.boxes[i];
            (0..p.len()).all(|k| p[k] >= a[k] && p[k] <= b[k])
        })
    }

    /// Ids of boxes overlapping the box `[a, b]` (may contain duplicates
    /// removed by the caller's own bookkeeping; returned sorted and unique).
    pub(crate) fn overlapping(&self, a: &[f64], b: &[f64]) -> Vec<usize> {
        let d = self.dims.len();
        let ca = self.cell_of(a);
        let cb = self.cell_of(b);
        let mut out = Vec::new();
        let mut cur = ca.clone();
        loop {
            for &i in &self.cells[self.flat(&cur)] {
                let (x, y) = &self.boxes[i as usize];
                if (0..d).all(|k| x[k] <= b[k] && a[k] <= y[k]) {
                    out.push(i as usize);
                }
            }
            let mut k = 0;
            loop {
                if k == d {
                    break;
                }
                if cur[k] < cb[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = ca[k];
                k += 1;
            }
            if k == d {
                break;
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Bounding box of `pts`, padded by `pad` on every side.
pub(crate) fn bbox(pts: &[Vec<f64>], pad: f64) -> (Vec<f64>, Vec<f64>) {
    let d = pts[0].len();
    let mut a = vec![f64::INFINITY; d];
    let mut b = vec![f64::NEG_INFINITY; d];
    for p in pts {
        for k in 0..d {
            a[k] = a[k].min(p[k]);
            b[k] = b[k].max(p[k]);
        }
    }
    for k in 0..d {
        a[k] -= pad;
        b[k] += pad;
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_matches_brute_force() {
        let mut rng = crate::rng_from_seed(3);
        use rand::Rng;
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = (0..300)
            .map(|_| {
                let c: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
                let r: f64 = rng.random_range(0.0..0.2);
                (c.iter().map(|x| x - r).collect(), c.iter().map(|x| x + r).collect())
            })
            .collect();
        let idx = BoxIndex::new(boxes.clone());
        for _ in 0..500 {
            let p: Vec<f64> = (0..2).map(|_| rng.random_range(-1.3..1.3)).collect();
            let mut got: Vec<usize> = idx.query(&p).collect();
            got.sort_unstable();
            let want: Vec<usize> = (0..boxes.len())
                .filter(|&i| (0..2).all(|k| p[k] >= boxes[i].0[k] && p[k] <= boxes[i].1[k]))
                .collect();
            assert_eq!(got, want);
        }
    }
}
