//! Exact solver for the balance-constrained assignment step.
//!
//! With the means fixed, the assignment step is a transportation problem:
//! route one unit per point through its chosen cell, at cost half the squared
//! point-to-mean distance, with every cell receiving at least
//! `floor(M / N)` units. All capacities are integral, so the optimal
//! fractional solution is integral and the binary selection matrix is
//! recovered exactly.
//!
//! The solver starts from the nearest-mean assignment (optimal when the
//! balance bound is dropped) and repairs the bound by successive shortest
//! paths: each augmentation re-routes a chain of points so that one
//! under-filled cell gains a pixel and one over-filled cell gives one up,
//! choosing the chain with the smallest cost increase. Node potentials keep
//! every residual arc's reduced cost non-negative, which is the standard
//! optimality certificate for this family of algorithms; when no cell is
//! under-filled the assignment is optimal.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::PixelPoint;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::Membership;

/// Minimizes the summed half squared distances subject to the balance bound;
/// every returned cell has at least `floor(points.len() / means.len())`
/// members. Ties resolve to the lowest point index, then lowest cell index.
pub fn assign_balanced(points: &[PixelPoint], means: &[Vec2]) -> Result<Membership> {
    let m_count = points.len();
    let n_cells = means.len();
    if n_cells == 0 {
        return Err(Error::invalid("assignment needs at least one mean"));
    }
    if m_count < n_cells {
        return Err(Error::infeasible(format!(
            "{m_count} points cannot satisfy the balance bound for {n_cells} cells"
        )));
    }
    if means.iter().any(|mu| !mu.x.is_finite() || !mu.y.is_finite()) {
        return Err(Error::invalid("means must be finite"));
    }

    let floor_bound = m_count / n_cells;

    // cost[m * n_cells + n] = half squared distance from point m to mean n.
    let mut cost = Vec::with_capacity(m_count * n_cells);
    for p in points {
        let pos = p.pos();
        for mu in means {
            cost.push(0.5 * pos.dist_sq(*mu));
        }
    }

    // Nearest-mean assignment, lowest cell index on ties. Optimal when the
    // balance bound is ignored.
    let mut assign = vec![0u32; m_count];
    let mut loads = vec![0usize; n_cells];
    for m in 0..m_count {
        let row = &cost[m * n_cells..(m + 1) * n_cells];
        let mut best = 0usize;
        for n in 1..n_cells {
            if row[n] < row[best] {
                best = n;
            }
        }
        assign[m] = best as u32;
        loads[best] += 1;
    }

    let deficit =
        |loads: &[usize]| loads.iter().map(|l| floor_bound.saturating_sub(*l)).sum::<usize>();

    if deficit(&loads) == 0 {
        return Membership::new(assign, n_cells);
    }

    Repair { cost, n_cells, m_count, floor_bound }.run(&mut assign, &mut loads)?;
    debug_assert_eq!(deficit(&loads), 0);
    Membership::new(assign, n_cells)
}

// Node ids in the residual graph.
const SOURCE: u32 = 0;
const OVERFLOW: u32 = 1;

struct Repair {
    cost: Vec<f64>,
    n_cells: usize,
    m_count: usize,
    floor_bound: usize,
}

#[derive(PartialEq)]
struct QEntry {
    dist: f64,
    node: u32,
}

impl Eq for QEntry {}

impl Ord for QEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the smallest distance
        // (then lowest node id) on top.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Repair {
    fn cluster_node(&self, n: usize) -> u32 {
        2 + n as u32
    }

    fn point_node(&self, m: usize) -> u32 {
        2 + self.n_cells as u32 + m as u32
    }

    fn cost_of(&self, m: usize, n: usize) -> f64 {
        self.cost[m * self.n_cells + n]
    }

    fn run(&self, assign: &mut [u32], loads: &mut [usize]) -> Result<()> {
        let v_count = 2 + self.n_cells + self.m_count;

        // Potentials certifying the nearest assignment: zero everywhere
        // except points, which carry their (minimal) assigned cost.
        let mut pi = vec![0.0f64; v_count];
        for m in 0..self.m_count {
            pi[self.point_node(m) as usize] = self.cost_of(m, assign[m] as usize);
        }

        let mut dist = vec![f64::INFINITY; v_count];
        let mut prev = vec![u32::MAX; v_count];
        let mut done = vec![false; v_count];

        let mut remaining: usize =
            loads.iter().map(|l| self.floor_bound.saturating_sub(*l)).sum();

        while remaining > 0 {
            dist.fill(f64::INFINITY);
            prev.fill(u32::MAX);
            done.fill(false);

            let mut heap = BinaryHeap::new();
            dist[SOURCE as usize] = 0.0;
            heap.push(QEntry { dist: 0.0, node: SOURCE });

            while let Some(QEntry { dist: d, node: u }) = heap.pop() {
                if done[u as usize] {
                    continue;
                }
                done[u as usize] = true;
                if u == OVERFLOW {
                    break;
                }

                let mut relax = |v: u32, rc: f64, dist: &mut [f64], prev: &mut [u32],
                                 heap: &mut BinaryHeap<QEntry>| {
                    // Tiny negatives are float noise on tight arcs.
                    let nd = d + rc.max(0.0);
                    if nd < dist[v as usize] {
                        dist[v as usize] = nd;
                        prev[v as usize] = u;
                        heap.push(QEntry { dist: nd, node: v });
                    }
                };

                if u == SOURCE {
                    for n in 0..self.n_cells {
                        if loads[n] < self.floor_bound {
                            let v = self.cluster_node(n);
                            relax(v, pi[u as usize] - pi[v as usize], &mut dist, &mut prev, &mut heap);
                        }
                    }
                } else if u >= 2 && (u as usize) < 2 + self.n_cells {
                    let n = (u as usize) - 2;
                    if loads[n] > self.floor_bound {
                        relax(
                            OVERFLOW,
                            pi[u as usize] - pi[OVERFLOW as usize],
                            &mut dist,
                            &mut prev,
                            &mut heap,
                        );
                    }
                    for m in 0..self.m_count {
                        if assign[m] as usize != n {
                            let v = self.point_node(m);
                            if !done[v as usize] {
                                relax(
                                    v,
                                    self.cost_of(m, n) + pi[u as usize] - pi[v as usize],
                                    &mut dist,
                                    &mut prev,
                                    &mut heap,
                                );
                            }
                        }
                    }
                } else {
                    let m = (u as usize) - 2 - self.n_cells;
                    let n = assign[m] as usize;
                    let v = self.cluster_node(n);
                    relax(
                        v,
                        -self.cost_of(m, n) + pi[u as usize] - pi[v as usize],
                        &mut dist,
                        &mut prev,
                        &mut heap,
                    );
                }
            }

            let d_target = dist[OVERFLOW as usize];
            if !d_target.is_finite() {
                return Err(Error::infeasible(
                    "balance repair ran out of augmenting chains".to_string(),
                ));
            }
            for v in 0..v_count {
                pi[v] += dist[v].min(d_target);
            }

            // Walk the chain back from the overflow side and apply the
            // reassignments.
            let mut node = OVERFLOW;
            while node != SOURCE {
                let p = prev[node as usize];
                debug_assert_ne!(p, u32::MAX);
                let is_point =
                    node >= 2 + self.n_cells as u32 && p >= 2 && p < 2 + self.n_cells as u32;
                if is_point {
                    let m = (node as usize) - 2 - self.n_cells;
                    let new_cell = (p as usize) - 2;
                    let old_cell = assign[m] as usize;
                    assign[m] = new_cell as u32;
                    loads[new_cell] += 1;
                    loads[old_cell] -= 1;
                }
                node = p;
            }
            remaining = loads.iter().map(|l| self.floor_bound.saturating_sub(*l)).sum();
        }
        Ok(())
    }
}
