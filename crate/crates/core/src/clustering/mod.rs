//! Balanced partitioning of the printable pixel set into N cells.
//!
//! The partition is a constrained k-means: minimize the summed half squared
//! distances between pixels and their cell means, subject to every pixel
//! belonging to exactly one cell and every cell holding at least
//! `floor(M / N)` pixels (M printable pixels, N cells). It is solved by
//! iterative refinement:
//!
//! 1. seed the means with k-means++,
//! 2. re-assign pixels by solving the balance-constrained assignment step
//!    exactly as a min-cost flow ([`assign_balanced`]),
//! 3. recompute each mean as its cell centroid (kept unchanged for an empty
//!    cell),
//!
//! repeating 2-3 until the largest mean displacement drops below the
//! configured tolerance or the iteration cap is hit. Both refinement steps
//! are individually optimal, so the recorded cost history never increases.
//!
//! Distances are squared Euclidean in exact pixel coordinates. Ties (equal
//! distances in seeding or assignment) resolve to the lowest point index,
//! then the lowest cell index, so a seed reproduces results bit for bit.

mod flow;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{BinaryRaster, PixelPoint};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};

pub use flow::assign_balanced;

#[derive(Debug, Clone)]
pub struct ClusterConfig {
    pub n_cells: usize,
    pub rng_seed: u64,
    pub max_iterations: usize,
    /// Stop once every mean moves less than this distance (pixels) in one
    /// iteration.
    pub mean_tolerance: f64,
}

impl ClusterConfig {
    pub fn new(n_cells: usize, rng_seed: u64) -> Self {
        ClusterConfig { n_cells, rng_seed, max_iterations: 100, mean_tolerance: 1e-6 }
    }

    fn validate(&self) -> Result<()> {
        if self.n_cells < 1 {
            return Err(Error::invalid("n_cells must be at least 1"));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.mean_tolerance > 0.0) {
            return Err(Error::invalid("mean_tolerance must be positive"));
        }
        Ok(())
    }
}

/// Per-point cell indices; the one-hot selection matrix stored densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    assignment: Vec<u32>,
    n_cells: usize,
}

impl Membership {
    pub fn new(assignment: Vec<u32>, n_cells: usize) -> Result<Self> {
        if let Some(bad) = assignment.iter().find(|c| **c as usize >= n_cells) {
            return Err(Error::invalid(format!(
                "cell index {bad} out of range for {n_cells} cells"
            )));
        }
        Ok(Membership { assignment, n_cells })
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn cell_of(&self, point_index: usize) -> u32 {
        self.assignment[point_index]
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_cells];
        for c in &self.assignment {
            sizes[*c as usize] += 1;
        }
        sizes
    }
}

/// A partition of points into cells with one mean per cell. This is the part
/// of a clustering result the downstream stages need; the strip baseline
/// produces one too.
#[derive(Debug, Clone)]
pub struct CellPartition {
    pub cells: Vec<Vec<PixelPoint>>,
    pub means: Vec<Vec2>,
}

impl CellPartition {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn total_points(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }
}

/// Result of the balanced clustering: the partition plus its refinement
/// history.
#[derive(Debug, Clone)]
pub struct GeodesicCells {
    partition: CellPartition,
    membership: Membership,
    cost_history: Vec<f64>,
    iterations_run: usize,
}

/// JSON form of a clustering result: cell count, means, the per-point cell
/// index in printable row-major order, and the per-iteration cost values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellsJson {
    pub n: usize,
    pub means: Vec<[f64; 2]>,
    pub assignment: Vec<u32>,
    pub cost_history: Vec<f64>,
}

impl GeodesicCells {
    pub fn cells(&self) -> &[Vec<PixelPoint>] {
        &self.partition.cells
    }

    pub fn means(&self) -> &[Vec2] {
        &self.partition.means
    }

    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    pub fn membership(&self) -> &Membership {
        &self.membership
    }

    pub fn cost_history(&self) -> &[f64] {
        &self.cost_history
    }

    pub fn iterations_run(&self) -> usize {
        self.iterations_run
    }

    pub fn n_cells(&self) -> usize {
        self.partition.cells.len()
    }

    pub fn to_json(&self) -> CellsJson {
        CellsJson {
            n: self.n_cells(),
            means: self.partition.means.iter().map(|m| [m.x, m.y]).collect(),
            assignment: self.membership.assignment.clone(),
            cost_history: self.cost_history.clone(),
        }
    }

    /// Rebuilds the result from its JSON form plus the raster it was
    /// computed from.
    pub fn from_json(raster: &BinaryRaster, json: &CellsJson) -> Result<Self> {
        let points = raster.printable_set();
        if points.len() != json.assignment.len() {
            return Err(Error::invalid(format!(
                "assignment covers {} points but the raster has {} printable pixels",
                json.assignment.len(),
                points.len()
            )));
        }
        let membership = Membership::new(json.assignment.clone(), json.n)?;
        let means = json.means.iter().map(|m| Vec2::new(m[0], m[1])).collect::<Vec<_>>();
        if means.len() != json.n {
            return Err(Error::invalid("means length disagrees with cell count"));
        }
        let cells = collect_cells(&points, &membership);
        Ok(GeodesicCells {
            partition: CellPartition { cells, means },
            membership,
            cost_history: json.cost_history.clone(),
            iterations_run: json.cost_history.len(),
        })
    }
}

/// k-means++ seeding: the first mean is drawn uniformly, each next mean is
/// drawn with probability proportional to the squared distance to the
/// nearest already-chosen mean.
pub fn seed_kmeanspp(points: &[PixelPoint], n: usize, rng_seed: u64) -> Result<Vec<Vec2>> {
    if points.is_empty() {
        return Err(Error::EmptyImage);
    }
    if n > points.len() {
        return Err(Error::infeasible(format!(
            "cannot seed {n} cells from {} points",
            points.len()
        )));
    }
    let mut rng = SplitMix64::new(rng_seed);
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    chosen.push(rng.next_below(points.len() as u64) as usize);

    let mut best_sq = vec![0.0f64; points.len()];
    while chosen.len() < n {
        let latest = points[*chosen.last().unwrap()].pos();
        let mut total = 0.0;
        for (m, p) in points.iter().enumerate() {
            let d = p.pos().dist_sq(latest);
            if chosen.len() == 1 || d < best_sq[m] {
                best_sq[m] = d;
            }
            total += best_sq[m];
        }
        let next = if total > 0.0 {
            // Inverse CDF draw over the squared-distance weights; the strict
            // comparison skips zero-weight (already chosen) points.
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (m, w) in best_sq.iter().enumerate() {
                acc += w;
                if acc > target {
                    pick = Some(m);
                    break;
                }
            }
            pick.unwrap_or_else(|| {
                // Rounding pushed the target past the final accumulated sum;
                // take the last positive-weight point.
                best_sq.iter().rposition(|w| *w > 0.0).unwrap()
            })
        } else {
            // All remaining weights vanish (cannot happen for distinct grid
            // points, kept for completeness): lowest unchosen index.
            (0..points.len()).find(|m| !chosen.contains(m)).unwrap()
        };
        chosen.push(next);
    }
    Ok(chosen.into_iter().map(|m| points[m].pos()).collect())
}

/// Centroid update: each mean becomes its cell's centroid; a cell with no
/// members keeps its previous mean.
pub fn update_means(
    points: &[PixelPoint],
    membership: &Membership,
    previous: &[Vec2],
) -> Vec<Vec2> {
    assert_eq!(membership.assignment.len(), points.len());
    assert_eq!(previous.len(), membership.n_cells);
    let n = membership.n_cells;
    let mut sum = vec![Vec2::ZERO; n];
    let mut count = vec![0usize; n];
    for (p, c) in points.iter().zip(&membership.assignment) {
        let c = *c as usize;
        sum[c] = sum[c] + p.pos();
        count[c] += 1;
    }
    (0..n)
        .map(|c| {
            if count[c] > 0 {
                Vec2::new(sum[c].x / count[c] as f64, sum[c].y / count[c] as f64)
            } else {
                previous[c]
            }
        })
        .collect()
}

/// The clustering objective: sum over points of half the squared distance to
/// the assigned mean, accumulated in point order.
pub fn partition_cost(points: &[PixelPoint], membership: &Membership, means: &[Vec2]) -> f64 {
    points
        .iter()
        .zip(&membership.assignment)
        .map(|(p, c)| 0.5 * p.pos().dist_sq(means[*c as usize]))
        .sum()
}

/// Runs the full balanced clustering on the printable set of `raster`.
pub fn cluster(raster: &BinaryRaster, config: &ClusterConfig) -> Result<GeodesicCells> {
    config.validate()?;
    let points = raster.printable_set();
    cluster_points(&points, config)
}

/// Same as [`cluster`], over an explicit point set.
pub fn cluster_points(points: &[PixelPoint], config: &ClusterConfig) -> Result<GeodesicCells> {
    config.validate()?;
    let n = config.n_cells;
    if points.is_empty() {
        return Err(Error::EmptyImage);
    }
    if points.len() < n {
        return Err(Error::infeasible(format!(
            "{} printable pixels cannot fill {n} cells of at least {} pixels",
            points.len(),
            points.len() / n.max(1)
        )));
    }

    let mut means = seed_kmeanspp(points, n, config.rng_seed)?;
    let mut cost_history = Vec::new();
    let mut membership = None;
    let mut iterations_run = 0;

    for _ in 0..config.max_iterations {
        let assignment = assign_balanced(points, &means)?;
        let new_means = update_means(points, &assignment, &means);
        cost_history.push(partition_cost(points, &assignment, &new_means));
        let displacement = means
            .iter()
            .zip(&new_means)
            .map(|(a, b)| a.dist(*b))
            .fold(0.0f64, f64::max);
        means = new_means;
        membership = Some(assignment);
        iterations_run += 1;
        if displacement < config.mean_tolerance {
            break;
        }
    }

    let membership = membership.unwrap();
    let cells = collect_cells(points, &membership);
    Ok(GeodesicCells {
        partition: CellPartition { cells, means },
        membership,
        cost_history,
        iterations_run,
    })
}

fn collect_cells(points: &[PixelPoint], membership: &Membership) -> Vec<Vec<PixelPoint>> {
    let mut cells = vec![Vec::new(); membership.n_cells];
    for (p, c) in points.iter().zip(&membership.assignment) {
        cells[*c as usize].push(*p);
    }
    cells
}

/// Naive comparison baseline: cut the image into N equal-width vertical
/// strips and give each strip's printable pixels to one cell. Means are the
/// strip centroids (strip centers when a strip is empty). No balance
/// guarantee; this stands in for an uncoordinated decomposition.
pub fn strip_partition(raster: &BinaryRaster, n: usize) -> Result<CellPartition> {
    if n < 1 {
        return Err(Error::invalid("strip count must be at least 1"));
    }
    let width = raster.width() as usize;
    if n > width {
        return Err(Error::infeasible(format!(
            "cannot cut a {width}-pixel-wide image into {n} strips"
        )));
    }
    let mut cells = vec![Vec::new(); n];
    for p in raster.printable_set() {
        let strip = ((p.col as usize) * n / width).min(n - 1);
        cells[strip].push(p);
    }
    let means = cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            if cell.is_empty() {
                let lo = (i * width) / n;
                let hi = ((i + 1) * width) / n;
                Vec2::new((lo + hi) as f64 / 2.0 - 0.5, (raster.height() as f64 - 1.0) / 2.0)
            } else {
                let sum = cell.iter().fold(Vec2::ZERO, |acc, p| acc + p.pos());
                Vec2::new(sum.x / cell.len() as f64, sum.y / cell.len() as f64)
            }
        })
        .collect();
    Ok(CellPartition { cells, means })
}
