//! Poisson point processes on a disk window, nearest-BS association and
//! one-mobile-per-cell placement around a typical base station at the origin.

use std::f64::consts::PI;

use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::propagation::DeploymentParams;
use crate::rng::RandomStream;

/// Window radius in units of the mean inter-BS spacing, `radius = factor / sqrt(lambda_b)`.
pub const DEFAULT_TRUNCATION_FACTOR: f64 = 20.0;
pub const MIN_TRUNCATION_FACTOR: f64 = 10.0;

/// Mobile placement gives up after this many candidates per cell.
pub const CANDIDATES_PER_CELL: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

/// Disk-shaped simulation window centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimWindow {
    pub radius: f64,
    /// Multiples of `lambda_b^{-1/2}` the radius was derived from. Nominal when the
    /// radius was set directly.
    pub truncation_factor: f64,
}

impl SimWindow {
    pub fn for_density(lambda_b: f64, truncation_factor: f64) -> Result<Self> {
        if !(lambda_b > 0.0) || !lambda_b.is_finite() {
            return Err(Error::invalid(format!("BS density must be positive, got {lambda_b}")));
        }
        if !(truncation_factor >= MIN_TRUNCATION_FACTOR) || !truncation_factor.is_finite() {
            return Err(Error::invalid(format!(
                "truncation factor must be at least {MIN_TRUNCATION_FACTOR}, got {truncation_factor}"
            )));
        }
        Ok(SimWindow {
            radius: truncation_factor / lambda_b.sqrt(),
            truncation_factor,
        })
    }

    pub fn with_radius(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("window radius must be positive, got {radius}")));
        }
        Ok(SimWindow {
            radius,
            truncation_factor: DEFAULT_TRUNCATION_FACTOR,
        })
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains(&self, p: Point) -> bool {
        p.norm_sq() <= self.radius * self.radius
    }

    fn uniform_point(&self, stream: &mut RandomStream) -> Point {
        loop {
            let x = 2.0 * stream.uniform() - 1.0;
            let y = 2.0 * stream.uniform() - 1.0;
            if x * x + y * y <= 1.0 {
                return Point::new(self.radius * x, self.radius * y);
            }
        }
    }
}

/// One sampled snapshot of the hybrid network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    /// Index 0 is the typical BS at the origin.
    pub bs_points: Vec<Point>,
    /// `mobiles[i]` is the active mobile of cell `i`.
    pub mobiles: Vec<Point>,
    pub pb_points: Vec<Point>,
    /// Beacon nearest to the typical mobile, `None` when there are no beacons.
    pub nearest_pb_of_typical: Option<usize>,
}

impl NetworkRealization {
    pub fn typical_mobile(&self) -> Point {
        self.mobiles[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MobilePlacement {
    /// A fixed sweep of window-wide candidates, then direct sampling of the cells it missed.
    #[default]
    Sweep,
    /// Direct sampling of every cell from its clipped Voronoi polygon.
    PerCell,
    /// Uniform candidates over the whole window; each cell keeps its first arrival.
    WindowSequential,
}

pub fn sample_ppp(density: f64, window: &SimWindow, stream: &mut RandomStream) -> Result<Vec<Point>> {
    if !(density >= 0.0) || !density.is_finite() {
        return Err(Error::invalid(format!("density must be non-negative, got {density}")));
    }
    let mean = density * window.area();
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))?
        .sample(stream) as usize;
    Ok((0..count).map(|_| window.uniform_point(stream)).collect())
}

/// Index of the point nearest to `x`, ties going to the lowest index.
pub fn nearest_index(points: &[Point], x: Point) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let d2 = p.dist_sq(x);
        match best {
            Some((_, b)) if d2 >= b => {}
            _ => best = Some((i, d2)),
        }
    }
    best.map(|(i, d2)| (i, d2.sqrt()))
        .ok_or_else(|| Error::invalid("nearest_index on an empty point set"))
}

pub fn sample_realization(
    deployment: &DeploymentParams,
    window: &SimWindow,
    stream: &mut RandomStream,
) -> Result<NetworkRealization> {
    sample_realization_with(deployment, window, MobilePlacement::default(), stream)
}

pub fn sample_realization_with(
    deployment: &DeploymentParams,
    window: &SimWindow,
    placement: MobilePlacement,
    stream: &mut RandomStream,
) -> Result<NetworkRealization> {
    if !(deployment.lambda_b > 0.0) {
        return Err(Error::invalid(format!(
            "BS density must be positive, got {}",
            deployment.lambda_b
        )));
    }
    let mut bs_points = Vec::with_capacity((1.2 * deployment.lambda_b * window.area()) as usize + 8);
    bs_points.push(Point::ORIGIN);
    bs_points.extend(sample_ppp(deployment.lambda_b, window, stream)?);

    let mobiles = place_mobiles(&bs_points, window, placement, stream)?;

    let pb_points = sample_ppp(deployment.lambda_p, window, stream)?;
    let nearest_pb_of_typical = if pb_points.is_empty() {
        None
    } else {
        Some(nearest_index(&pb_points, mobiles[0])?.0)
    };

    Ok(NetworkRealization {
        bs_points,
        mobiles,
        pb_points,
        nearest_pb_of_typical,
    })
}

/// One uniform point in the window part of each Voronoi cell of `bs_points`; `result[i]`
/// belongs to `bs_points[i]`. Every BS must lie inside the window.
pub fn place_mobiles(
    bs_points: &[Point],
    window: &SimWindow,
    placement: MobilePlacement,
    stream: &mut RandomStream,
) -> Result<Vec<Point>> {
    if bs_points.is_empty() {
        return Err(Error::invalid("mobile placement needs at least one BS"));
    }
    if !bs_points.iter().all(|&p| window.contains(p)) {
        return Err(Error::invalid("every BS must lie inside the window"));
    }
    let grid = PointGrid::new(bs_points, window.radius);
    match placement {
        MobilePlacement::Sweep => place_mobiles_sweep(&grid, window, stream),
        MobilePlacement::PerCell => place_mobiles_per_cell(&grid, window, stream),
        MobilePlacement::WindowSequential => place_mobiles_sequential(&grid, window, stream),
    }
}

fn place_mobiles_sequential(grid: &PointGrid, window: &SimWindow, stream: &mut RandomStream) -> Result<Vec<Point>> {
    let cells = grid.len();
    let budget = CANDIDATES_PER_CELL * cells as u64;
    let mut mobiles: Vec<Option<Point>> = vec![None; cells];
    let mut filled = 0;
    let mut candidates = 0u64;
    while filled < cells {
        if candidates >= budget {
            return Err(Error::SamplingFailure {
                cells,
                filled,
                candidates,
            });
        }
        candidates += 1;
        let c = window.uniform_point(stream);
        let (owner, _) = grid.nearest(c);
        if mobiles[owner].is_none() {
            mobiles[owner] = Some(c);
            filled += 1;
        }
    }
    Ok(mobiles.into_iter().map(|m| m.unwrap()).collect())
}

/// Sides of the polygon circumscribing the window that cells are clipped from.
const WINDOW_SIDES: usize = 16;

/// Polygon containing the part of one Voronoi cell inside the window, in coordinates
/// relative to its BS, together with every BS that could claim a point of it.
struct CellPolygon {
    /// Vertices of the polygon circumscribing the unit disk.
    outline: [Point; WINDOW_SIDES],
    vertices: Vec<Point>,
    scratch: Vec<Point>,
    rivals: Vec<(Point, u32)>,
    /// Cumulative doubled areas of the fan triangles.
    fan_areas: Vec<f64>,
}

impl CellPolygon {
    fn new() -> Self {
        let outer = 1.0 / (PI / WINDOW_SIDES as f64).cos();
        let mut outline = [Point::ORIGIN; WINDOW_SIDES];
        for (k, v) in outline.iter_mut().enumerate() {
            let (sin, cos) = (2.0 * PI * (k as f64 + 0.5) / WINDOW_SIDES as f64).sin_cos();
            *v = Point::new(outer * cos, outer * sin);
        }
        CellPolygon {
            outline,
            vertices: Vec::with_capacity(32),
            scratch: Vec::with_capacity(32),
            rivals: Vec::with_capacity(64),
            fan_areas: Vec::with_capacity(32),
        }
    }

    #[inline]
    fn offset(&self, r: usize, y: Point) -> Point {
        let p = self.rivals[r].0;
        Point::new(p.x - y.x, p.y - y.y)
    }

    fn max_radius_sq(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm_sq()).fold(0.0, f64::max)
    }

    /// Keeps the part of the polygon with `x . n <= b`; returns whether anything was cut.
    fn clip(&mut self, n: Point, b: f64) -> bool {
        let count = self.vertices.len();
        let side = |p: Point| p.x * n.x + p.y * n.y - b;
        if count == 0 || self.vertices.iter().all(|&p| side(p) <= 0.0) {
            return false;
        }
        self.scratch.clear();
        let mut prev = self.vertices[count - 1];
        let mut prev_side = side(prev);
        for &cur in &self.vertices {
            let cur_side = side(cur);
            if (prev_side <= 0.0) != (cur_side <= 0.0) {
                let t = prev_side / (prev_side - cur_side);
                let cut = Point::new(prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y));
                // A bisector through an existing vertex would otherwise leave a sliver edge.
                let duplicate = self.scratch.last().is_some_and(|&q| q.dist_sq(cut) < 1e-24);
                if !duplicate {
                    self.scratch.push(cut);
                }
            }
            if cur_side <= 0.0 && !self.scratch.last().is_some_and(|&q| q.dist_sq(cur) < 1e-24) {
                self.scratch.push(cur);
            }
            prev = cur;
            prev_side = cur_side;
        }
        std::mem::swap(&mut self.vertices, &mut self.scratch);
        true
    }

    /// Starts from a polygon circumscribing the window and clips by perpendicular bisectors
    /// ring by ring, until every unvisited BS is farther than twice the polygon's
    /// reach and so can neither cut it nor claim any of its points.
    fn build(&mut self, grid: &PointGrid, i: usize, window: &SimWindow) {
        let y = grid.point(i);
        let r = window.radius;
        self.vertices.clear();
        self.vertices
            .extend(self.outline.iter().map(|v| Point::new(r * v.x - y.x, r * v.y - y.y)));
        self.rivals.clear();
        let mut reach_sq = self.max_radius_sq();
        let (cx, cy) = grid.bucket_of(y);
        let n = grid.side as isize;
        let mut k: isize = 0;
        loop {
            let start = self.rivals.len();
            let rivals = &mut self.rivals;
            grid.for_ring(cx, cy, k, |j, p| {
                if j != i {
                    rivals.push((p, j as u32));
                }
            });
            if k == 0 {
                k = 1;
                continue;
            }
            let start = if k == 1 { 0 } else { start };
            // Clip by close rivals first, so the reach test below already sees a
            // nearly final polygon and skips most of the rest.
            if k == 1 {
                let close = grid.bucket * grid.bucket;
                for r in 0..self.rivals.len() {
                    let v = self.offset(r, y);
                    if v.norm_sq() < close && self.clip(v, 0.5 * v.norm_sq()) {
                        reach_sq = self.max_radius_sq();
                    }
                }
            }
            for r in start..self.rivals.len() {
                let v = self.offset(r, y);
                let half = 0.5 * v.norm_sq();
                // The bisector lies at distance |v|/2 and misses a polygon of smaller reach.
                if 0.5 * half < reach_sq && self.clip(v, half) {
                    reach_sq = self.max_radius_sq();
                }
            }
            let margin = grid.block_margin(y, cx, cy, k);
            if (margin > 0.0 && margin * margin > 4.0 * reach_sq) || k > n {
                break;
            }
            k += 1;
        }
    }

    /// Tabulates the fan triangles from the BS, which lies inside its own cell, and
    /// returns their total doubled area.
    fn index_fan(&mut self) -> f64 {
        let verts = &self.vertices;
        self.fan_areas.clear();
        let mut total = 0.0;
        for k in 0..verts.len() {
            let (a, b) = (verts[k], verts[(k + 1) % verts.len()]);
            total += (a.x * b.y - a.y * b.x).max(0.0);
            self.fan_areas.push(total);
        }
        total
    }

    /// Uniform point of the polygon: a fan triangle by area, then a point inside it.
    fn fan_point(&self, total: f64, stream: &mut RandomStream) -> Point {
        let verts = &self.vertices;
        let pick = stream.uniform() * total;
        let k = self.fan_areas.iter().position(|&c| pick < c).unwrap_or(verts.len() - 1);
        let (a, b) = (verts[k], verts[(k + 1) % verts.len()]);
        let (mut s, mut t) = (stream.uniform(), stream.uniform());
        if s + t > 1.0 {
            s = 1.0 - s;
            t = 1.0 - t;
        }
        Point::new(s * a.x + t * b.x, s * a.y + t * b.y)
    }

    /// Whether the point at offset `c` from BS `i` is nearest to it, lowest index on ties.
    #[inline]
    fn owns(&self, i: usize, y: Point, c: Point) -> bool {
        let x = Point::new(y.x + c.x, y.y + c.y);
        let own = c.norm_sq();
        self.rivals.iter().all(|&(p, j)| {
            let d = x.dist_sq(p);
            d > own || (d == own && j as usize > i)
        })
    }
}

/// Draws one point uniformly from cell `i` by sampling the fan triangles of its
/// polygon and rejecting points outside the window or owned by another BS.
fn sample_in_cell(
    grid: &PointGrid,
    i: usize,
    window: &SimWindow,
    polygon: &mut CellPolygon,
    stream: &mut RandomStream,
    tally: &mut CandidateTally,
) -> Result<Point> {
    polygon.build(grid, i, window);
    let y = grid.point(i);
    let r2 = window.radius * window.radius;
    let total = polygon.index_fan();
    loop {
        tally.draw(i)?;
        if total <= 0.0 {
            continue;
        }
        let c = polygon.fan_point(total, stream);
        let x = Point::new(y.x + c.x, y.y + c.y);
        if x.norm_sq() <= r2 && polygon.owns(i, y, c) {
            return Ok(x);
        }
    }
}

/// Shared candidate budget across the placement phases.
struct CandidateTally {
    cells: usize,
    used: u64,
    budget: u64,
}

impl CandidateTally {
    fn new(cells: usize) -> Self {
        CandidateTally {
            cells,
            used: 0,
            budget: CANDIDATES_PER_CELL * cells as u64,
        }
    }

    #[inline]
    fn draw(&mut self, filled: usize) -> Result<()> {
        if self.used >= self.budget {
            return Err(Error::SamplingFailure {
                cells: self.cells,
                filled,
                candidates: self.used,
            });
        }
        self.used += 1;
        Ok(())
    }
}

fn place_mobiles_per_cell(grid: &PointGrid, window: &SimWindow, stream: &mut RandomStream) -> Result<Vec<Point>> {
    let mut polygon = CellPolygon::new();
    let mut tally = CandidateTally::new(grid.len());
    (0..grid.len())
        .map(|i| sample_in_cell(grid, i, window, &mut polygon, stream, &mut tally))
        .collect()
}

/// Window-wide candidates per cell in the first placement phase.
const SWEEP_PER_CELL: usize = 3;

/// A fixed number of window-wide candidates first; each cell keeps its first arrival,
/// which is uniform on the cell and independent of the other cells. Cells still empty
/// afterwards are sampled directly.
fn place_mobiles_sweep(grid: &PointGrid, window: &SimWindow, stream: &mut RandomStream) -> Result<Vec<Point>> {
    let cells = grid.len();
    let mut tally = CandidateTally::new(cells);
    let mut mobiles: Vec<Option<Point>> = vec![None; cells];
    let mut filled = 0;
    for _ in 0..SWEEP_PER_CELL * cells {
        tally.draw(filled)?;
        let c = window.uniform_point(stream);
        let (owner, _) = grid.nearest(c);
        if mobiles[owner].is_none() {
            mobiles[owner] = Some(c);
            filled += 1;
        }
    }
    let mut polygon = CellPolygon::new();
    let mut placed = Vec::with_capacity(cells);
    for (i, m) in mobiles.into_iter().enumerate() {
        placed.push(match m {
            Some(p) => p,
            None => sample_in_cell(grid, i, window, &mut polygon, stream, &mut tally)?,
        });
    }
    Ok(placed)
}

/// Uniform bucket grid over `[-R, R]^2` for nearest-point queries.
pub(crate) struct PointGrid {
    lo: f64,
    bucket: f64,
    inv_bucket: f64,
    side: usize,
    starts: Vec<u32>,
    /// Points in bucket order together with their original index.
    entries: Vec<(Point, u32)>,
    points: Vec<Point>,
}

impl PointGrid {
    pub(crate) fn new(points: &[Point], radius: f64) -> Self {
        // About one point per two buckets.
        let n = points.len().max(1) as f64;
        let side = ((n / 0.5).sqrt().ceil() as usize).clamp(1, 4096);
        let lo = -radius;
        let bucket = 2.0 * radius / side as f64;
        let mut grid = PointGrid {
            lo,
            bucket,
            inv_bucket: 1.0 / bucket,
            side,
            starts: vec![0; side * side + 1],
            entries: Vec::with_capacity(points.len()),
            points: points.to_vec(),
        };
        let keys: Vec<usize> = points
            .iter()
            .map(|&p| {
                let (bx, by) = grid.bucket_of(p);
                by as usize * side + bx as usize
            })
            .collect();
        for &k in &keys {
            grid.starts[k + 1] += 1;
        }
        for k in 0..side * side {
            grid.starts[k + 1] += grid.starts[k];
        }
        let mut cursor = grid.starts.clone();
        let mut entries = vec![(Point::ORIGIN, 0u32); points.len()];
        for (i, &k) in keys.iter().enumerate() {
            entries[cursor[k] as usize] = (points[i], i as u32);
            cursor[k] += 1;
        }
        grid.entries = entries;
        grid
    }

    pub(crate) fn len(&self) -> usize {
        self.points.len()
    }

    pub(crate) fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    #[inline]
    fn bucket_of(&self, p: Point) -> (isize, isize) {
        let max = self.side as isize - 1;
        // Truncation equals floor here, since anything negative is clamped to 0 anyway.
        let bx = ((p.x - self.lo) * self.inv_bucket) as isize;
        let by = ((p.y - self.lo) * self.inv_bucket) as isize;
        (bx.clamp(0, max), by.clamp(0, max))
    }

    #[inline]
    fn visit_bucket(&self, bx: isize, by: isize, f: &mut impl FnMut(usize, Point)) {
        let n = self.side as isize;
        if bx < 0 || by < 0 || bx >= n || by >= n {
            return;
        }
        let k = by as usize * self.side + bx as usize;
        for &(p, j) in &self.entries[self.starts[k] as usize..self.starts[k + 1] as usize] {
            f(j as usize, p);
        }
    }

    /// Visits every point in buckets at Chebyshev distance exactly `k` from `(cx, cy)`.
    fn for_ring(&self, cx: isize, cy: isize, k: isize, mut f: impl FnMut(usize, Point)) {
        if k == 0 {
            self.visit_bucket(cx, cy, &mut f);
            return;
        }
        for bx in cx - k..=cx + k {
            self.visit_bucket(bx, cy - k, &mut f);
            self.visit_bucket(bx, cy + k, &mut f);
        }
        for by in cy - k + 1..cy + k {
            self.visit_bucket(cx - k, by, &mut f);
            self.visit_bucket(cx + k, by, &mut f);
        }
    }

    /// Distance from `x` to the outside of the block of buckets within Chebyshev
    /// distance `k` of `(cx, cy)`. Every point not yet visited is at least this far.
    #[inline]
    fn block_margin(&self, x: Point, cx: isize, cy: isize, k: isize) -> f64 {
        let x0 = self.lo + (cx - k) as f64 * self.bucket;
        let y0 = self.lo + (cy - k) as f64 * self.bucket;
        let w = (2 * k + 1) as f64 * self.bucket;
        (x.x - x0).min(x0 + w - x.x).min(x.y - y0).min(y0 + w - x.y)
    }

    /// Visits every point in buckets within Chebyshev distance `k` of `(cx, cy)`, one
    /// contiguous run of entries per bucket row.
    #[inline]
    fn for_block(&self, cx: isize, cy: isize, k: isize, mut f: impl FnMut(usize, Point)) {
        let max = self.side as isize - 1;
        let (x0, x1) = ((cx - k).max(0) as usize, (cx + k).min(max) as usize);
        for by in (cy - k).max(0)..=(cy + k).min(max) {
            let row = by as usize * self.side;
            let run = self.starts[row + x0] as usize..self.starts[row + x1 + 1] as usize;
            for &(p, j) in &self.entries[run] {
                f(j as usize, p);
            }
        }
    }

    /// Nearest point to `x` (which must lie inside the grid square), lowest index on ties.
    pub(crate) fn nearest(&self, x: Point) -> (usize, f64) {
        let (cx, cy) = self.bucket_of(x);
        let mut best = (usize::MAX, f64::INFINITY);
        let consider = |best: &mut (usize, f64), j: usize, p: Point| {
            let d2 = p.dist_sq(x);
            if d2 < best.1 || (d2 == best.1 && j < best.0) {
                *best = (j, d2);
            }
        };
        self.for_block(cx, cy, 1, |j, p| consider(&mut best, j, p));
        let n = self.side as isize;
        let mut k = 1;
        loop {
            let reach = self.block_margin(x, cx, cy, k);
            if (reach > 0.0 && reach * reach > best.1) || k > n {
                break;
            }
            k += 1;
            self.for_ring(cx, cy, k, |j, p| consider(&mut best, j, p));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(seed: u64) -> RandomStream {
        RandomStream::new(seed, 0)
    }

    #[test]
    fn nearest_index_examples() {
        let pts = [Point::new(0.0, 0.0), Point::new(3.0, 4.0)];
        assert_eq!(nearest_index(&pts, Point::new(0.0, 1.0)).unwrap(), (0, 1.0));
        let tie = [Point::new(1.0, 0.0), Point::new(-1.0, 0.0)];
        assert_eq!(nearest_index(&tie, Point::ORIGIN).unwrap(), (0, 1.0));
        assert_eq!(nearest_index(&[Point::new(3.0, 4.0)], Point::ORIGIN).unwrap(), (0, 5.0));
        assert!(matches!(
            nearest_index(&[], Point::ORIGIN),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn empty_and_negative_density() {
        let w = SimWindow::with_radius(5.0).unwrap();
        assert!(sample_ppp(0.0, &w, &mut stream(1)).unwrap().is_empty());
        assert!(sample_ppp(-1.0, &w, &mut stream(1)).is_err());
    }

    #[test]
    fn window_validation() {
        assert!(SimWindow::for_density(1.0, 9.0).is_err());
        assert!(SimWindow::for_density(0.0, 20.0).is_err());
        let w = SimWindow::for_density(4.0, 20.0).unwrap();
        assert!((w.radius - 10.0).abs() < 1e-12);
        assert!(SimWindow::with_radius(0.0).is_err());
    }

    #[test]
    fn grid_matches_brute_force() {
        let w = SimWindow::with_radius(6.0).unwrap();
        let mut s = stream(3);
        let pts = sample_ppp(2.0, &w, &mut s).unwrap();
        let grid = PointGrid::new(&pts, w.radius);
        for _ in 0..2000 {
            let x = w.uniform_point(&mut s);
            let (i, d2) = grid.nearest(x);
            let (j, d) = nearest_index(&pts, x).unwrap();
            assert_eq!(i, j);
            assert!((d2.sqrt() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_breaks_ties_by_index() {
        let pts = [Point::new(1.0, 0.0), Point::new(-1.0, 0.0), Point::new(0.0, 1.0)];
        let grid = PointGrid::new(&pts, 2.0);
        assert_eq!(grid.nearest(Point::ORIGIN).0, 0);
    }

    fn inside_convex(verts: &[Point], c: Point) -> bool {
        (0..verts.len()).all(|k| {
            let (a, b) = (verts[k], verts[(k + 1) % verts.len()]);
            (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) >= -1e-9
        })
    }

    #[test]
    fn cell_polygons_contain_cells() {
        let w = SimWindow::with_radius(8.0).unwrap();
        let mut s = stream(11);
        let mut pts = vec![Point::ORIGIN];
        pts.extend(sample_ppp(1.0, &w, &mut s).unwrap());
        let grid = PointGrid::new(&pts, w.radius);
        let polys: Vec<CellPolygon> = (0..pts.len())
            .map(|i| {
                let mut poly = CellPolygon::new();
                poly.build(&grid, i, &w);
                poly
            })
            .collect();
        for _ in 0..20_000 {
            let x = w.uniform_point(&mut s);
            let (i, _) = nearest_index(&pts, x).unwrap();
            let c = Point::new(x.x - pts[i].x, x.y - pts[i].y);
            assert!(inside_convex(&polys[i].vertices, c), "cell {i} escapes its polygon");
            assert!(polys[i].owns(i, pts[i], c));
        }
        // Polygons overlap only along shared edges, so their areas sum to about the window.
        let area: f64 = polys
            .iter()
            .map(|p| {
                let v = &p.vertices;
                (0..v.len())
                    .map(|k| {
                        let (a, b) = (v[k], v[(k + 1) % v.len()]);
                        0.5 * (a.x * b.y - a.y * b.x)
                    })
                    .sum::<f64>()
            })
            .sum();
        assert!(area >= w.area() && area < 1.05 * w.area(), "area {area}");
    }

    #[test]
    fn realization_membership_and_typical_bs() {
        let dep = DeploymentParams::new(0.0, 1.0, 1.0, 0.5);
        let w = SimWindow::for_density(1.0, 10.0).unwrap();
        for placement in [
            MobilePlacement::Sweep,
            MobilePlacement::PerCell,
            MobilePlacement::WindowSequential,
        ] {
            let r = sample_realization_with(&dep, &w, placement, &mut stream(5)).unwrap();
            assert_eq!(r.bs_points[0], Point::ORIGIN);
            assert_eq!(r.mobiles.len(), r.bs_points.len());
            for (i, &m) in r.mobiles.iter().enumerate() {
                let d_own = m.dist(r.bs_points[i]);
                assert!(r.bs_points.iter().all(|&y| d_own <= m.dist(y)));
                assert!(w.contains(m));
            }
            let t0 = r.nearest_pb_of_typical.unwrap();
            let u0 = r.typical_mobile();
            let d0 = r.pb_points[t0].dist(u0);
            assert!(r.pb_points.iter().all(|&t| d0 <= t.dist(u0)));
        }
    }

    #[test]
    fn no_beacons_means_no_typical_beacon() {
        let dep = DeploymentParams::new(0.0, 1.0, 1.0, 0.0);
        let w = SimWindow::for_density(1.0, 10.0).unwrap();
        let r = sample_realization(&dep, &w, &mut stream(2)).unwrap();
        assert!(r.pb_points.is_empty());
        assert_eq!(r.nearest_pb_of_typical, None);
    }

    #[test]
    fn zero_bs_density_rejected() {
        let dep = DeploymentParams::new(1.0, 1.0, 0.0, 0.0);
        let w = SimWindow::with_radius(5.0).unwrap();
        assert!(sample_realization(&dep, &w, &mut stream(2)).is_err());
    }
}
