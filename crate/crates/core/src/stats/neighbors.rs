//! k-nearest-neighbour queries for points in the complex plane.
//!
//! A uniform bucket grid sized for about two points per occupied cell gives
//! `O(n)` expected work per query batch on spectra, which are spread fairly
//! evenly over a disk, band or line. Ties on distance go to the smaller index.

use num_complex::Complex64;

/// Neighbour of a query point: index into the point set and squared distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sqr: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.dist_sqr.sqrt()
    }
}

#[inline]
fn dist_sqr(a: Complex64, b: Complex64) -> f64 {
    let dx = a.re - b.re;
    let dy = a.im - b.im;
    dx * dx + dy * dy
}

#[inline]
fn before(a: &Neighbor, b: &Neighbor) -> bool {
    a.dist_sqr < b.dist_sqr || (a.dist_sqr == b.dist_sqr && a.index < b.index)
}

/// Keeps the best `k` candidates sorted by (distance, index).
struct Best {
    k: usize,
    items: Vec<Neighbor>,
}

impl Best {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, cand: Neighbor) {
        if self.items.len() == self.k && !before(&cand, &self.items[self.k - 1]) {
            return;
        }
        let pos = self.items.iter().position(|x| before(&cand, x)).unwrap_or(self.items.len());
        self.items.insert(pos, cand);
        self.items.truncate(self.k);
    }

    fn worst(&self) -> Option<f64> {
        (self.items.len() == self.k).then(|| self.items[self.k - 1].dist_sqr)
    }
}

/// Uniform bucket grid over a fixed point set.
pub struct GridIndex<'a> {
    points: &'a [Complex64],
    origin: Complex64,
    cell: f64,
    cols: usize,
    rows: usize,
    /// Point indices grouped by cell, cell `c` owning `order[starts[c]..starts[c+1]]`.
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> GridIndex<'a> {
    pub fn new(points: &'a [Complex64]) -> Self {
        let n = points.len().max(1);
        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo_x = lo_x.min(p.re);
            hi_x = hi_x.max(p.re);
            lo_y = lo_y.min(p.im);
            hi_y = hi_y.max(p.im);
        }
        if points.is_empty() {
            (lo_x, hi_x, lo_y, hi_y) = (0.0, 0.0, 0.0, 0.0);
        }
        let (w, h) = (hi_x - lo_x, hi_y - lo_y);
        let target = (n as f64 / 2.0).max(1.0);
        let mut cell = (w * h / target).sqrt().max(w.max(h) / target);
        if !(cell > 0.0) || !cell.is_finite() {
            cell = 1.0;
        }
        let cols = ((w / cell).floor() as usize + 1).min(4 * n);
        let rows = ((h / cell).floor() as usize + 1).min(4 * n);
        let origin = Complex64::new(lo_x, lo_y);

        let mut index = Self {
            points,
            origin,
            cell,
            cols,
            rows,
            starts: vec![0; cols * rows + 1],
            order: vec![0; points.len()],
        };
        let cell_of: Vec<usize> = points.iter().map(|p| index.cell_id(*p)).collect();
        for &c in &cell_of {
            index.starts[c + 1] += 1;
        }
        for c in 0..cols * rows {
            index.starts[c + 1] += index.starts[c];
        }
        let mut fill = index.starts.clone();
        for (i, &c) in cell_of.iter().enumerate() {
            index.order[fill[c]] = i;
            fill[c] += 1;
        }
        index
    }

    fn coords(&self, p: Complex64) -> (usize, usize) {
        let cx = ((p.re - self.origin.re) / self.cell).floor().max(0.0) as usize;
        let cy = ((p.im - self.origin.im) / self.cell).floor().max(0.0) as usize;
        (cx.min(self.cols - 1), cy.min(self.rows - 1))
    }

    fn cell_id(&self, p: Complex64) -> usize {
        let (cx, cy) = self.coords(p);
        cy * self.cols + cx
    }

    fn scan_cell(&self, cx: usize, cy: usize, query: usize, best: &mut Best) {
        let c = cy * self.cols + cx;
        let q = self.points[query];
        for &i in &self.order[self.starts[c]..self.starts[c + 1]] {
            if i != query {
                best.offer(Neighbor {
                    index: i,
                    dist_sqr: dist_sqr(q, self.points[i]),
                });
            }
        }
    }

    /// The `k` nearest other points to point `query`, closest first.
    pub fn nearest(&self, query: usize, k: usize) -> Vec<Neighbor> {
        let mut best = Best::new(k.min(self.points.len().saturating_sub(1)));
        if best.k == 0 {
            return Vec::new();
        }
        let (cx, cy) = self.coords(self.points[query]);
        let max_ring = self.cols.max(self.rows);
        for ring in 0..=max_ring {
            let (x0, x1) = (cx as i64 - ring as i64, cx as i64 + ring as i64);
            let (y0, y1) = (cy as i64 - ring as i64, cy as i64 + ring as i64);
            for y in y0..=y1 {
                if y < 0 || y >= self.rows as i64 {
                    continue;
                }
                let on_edge_row = y == y0 || y == y1;
                let mut x = x0;
                while x <= x1 {
                    if x >= 0 && x < self.cols as i64 {
                        self.scan_cell(x as usize, y as usize, query, &mut best);
                    }
                    x += if on_edge_row || ring == 0 { 1 } else { x1 - x0 };
                }
            }
            // cells beyond this ring are at least ring*cell away
            if let Some(worst) = best.worst() {
                let reach = ring as f64 * self.cell;
                if worst <= reach * reach {
                    break;
                }
            }
        }
        best.items
    }

    /// `nearest(i, k)` for every point.
    pub fn all_nearest(&self, k: usize) -> Vec<Vec<Neighbor>> {
        (0..self.points.len()).map(|i| self.nearest(i, k)).collect()
    }
}

/// `O(n²)` reference search with the same ordering rules.
pub fn brute_force_nearest(points: &[Complex64], query: usize, k: usize) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != query)
        .map(|(i, p)| Neighbor {
            index: i,
            dist_sqr: dist_sqr(points[query], *p),
        })
        .collect();
    all.sort_by(|a, b| {
        a.dist_sqr
            .partial_cmp(&b.dist_sqr)
            .unwrap()
            .then(a.index.cmp(&b.index))
    });
    all.truncate(k);
    all
}
