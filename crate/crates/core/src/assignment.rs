//! Robot-to-cell assignment, approach trajectories, and the clearance bound.
//!
//! Robots are matched to cell means by minimizing the sum of squared
//! start-to-goal distances (for synchronized constant-velocity lines this
//! equals minimizing the integral of squared velocities, up to a constant
//! factor). The minimization is a linear assignment problem solved exactly
//! with the Hungarian method; cost ties resolve to the lexicographically
//! smallest permutation.
//!
//! Every robot then follows a straight line from its start to its assigned
//! mean over one shared time window, paced so the longest approach moves at
//! full travel speed. Squared-cost-optimal synchronized lines are collision
//! free when all pairwise start separations exceed `2 * sqrt(2) * r` (and
//! goal separations do too); [`check_clearance`] tests the start bound and
//! [`min_separation`] measures the realized trajectories.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};

/// One robot: a disc of radius `radius` starting at `start`, spraying at
/// `v_print` and moving at `v_travel` otherwise (pixel units per second
/// before physical scaling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSpec {
    pub id: u32,
    pub radius: f64,
    pub start: Vec2,
    pub v_print: f64,
    pub v_travel: f64,
}

impl RobotSpec {
    pub fn new(id: u32, radius: f64, start: Vec2, v_print: f64, v_travel: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("robot {id}: radius must be positive")));
        }
        if !(v_print > 0.0) || !v_print.is_finite() || !v_travel.is_finite() {
            return Err(Error::invalid(format!("robot {id}: speeds must be positive")));
        }
        if v_print > v_travel {
            return Err(Error::invalid(format!(
                "robot {id}: print speed {v_print} exceeds travel speed {v_travel}"
            )));
        }
        if !start.x.is_finite() || !start.y.is_finite() {
            return Err(Error::invalid(format!("robot {id}: start must be finite")));
        }
        Ok(RobotSpec { id, radius, start, v_print, v_travel })
    }
}

/// A homogeneous team: unique ids, one shared radius.
#[derive(Debug, Clone)]
pub struct Fleet {
    robots: Vec<RobotSpec>,
}

impl Fleet {
    pub fn new(robots: Vec<RobotSpec>) -> Result<Self> {
        if robots.is_empty() {
            return Err(Error::invalid("fleet must contain at least one robot"));
        }
        let mut ids: Vec<u32> = robots.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != robots.len() {
            return Err(Error::invalid("robot ids must be unique"));
        }
        let r0 = robots[0].radius;
        if robots.iter().any(|r| r.radius != r0) {
            return Err(Error::invalid("the team is homogeneous: all radii must be equal"));
        }
        Ok(Fleet { robots })
    }

    pub fn robots(&self) -> &[RobotSpec] {
        &self.robots
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    /// The shared robot radius.
    pub fn radius(&self) -> f64 {
        self.robots[0].radius
    }
}

/// Outcome of the start-separation test.
#[derive(Debug, Clone, Copy)]
pub struct ClearanceCheck {
    pub ok: bool,
    /// The required strict lower bound, `2 * sqrt(2) * r`.
    pub bound: f64,
    /// Closest pair `(i, j, distance)` by robot index; `None` for a single
    /// robot.
    pub closest: Option<(u32, u32, f64)>,
}

/// True iff every pair of starts is strictly farther apart than
/// `2 * sqrt(2) * r`; reports the closest pair either way.
pub fn check_clearance(fleet: &Fleet) -> ClearanceCheck {
    let bound = 2.0 * std::f64::consts::SQRT_2 * fleet.radius();
    let robots = fleet.robots();
    let mut closest: Option<(u32, u32, f64)> = None;
    for i in 0..robots.len() {
        for j in (i + 1)..robots.len() {
            let d = robots[i].start.dist(robots[j].start);
            if closest.is_none_or(|(_, _, best)| d < best) {
                closest = Some((i as u32, j as u32, d));
            }
        }
    }
    let ok = closest.is_none_or(|(_, _, d)| d > bound);
    ClearanceCheck { ok, bound, closest }
}

/// Squared start-to-mean distances: entry `(i, j)` is
/// `|x_i(0) - mu_j|^2`.
pub fn cost_matrix(fleet: &Fleet, means: &[Vec2]) -> Result<Vec<Vec<f64>>> {
    if fleet.len() != means.len() {
        return Err(Error::invalid(format!(
            "{} robots vs {} cells",
            fleet.len(),
            means.len()
        )));
    }
    Ok(fleet
        .robots()
        .iter()
        .map(|r| means.iter().map(|mu| r.start.dist_sq(*mu)).collect())
        .collect())
}

/// A solved linear assignment: `perm[i]` is the column given to row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub perm: Vec<usize>,
    pub total_cost: f64,
}

/// Minimizes the summed cost over permutations. Ties (within 1e-9 relative)
/// resolve to the lexicographically smallest permutation.
pub fn solve_assignment(cost: &[Vec<f64>]) -> Result<Assignment> {
    let n = cost.len();
    if n == 0 {
        return Err(Error::invalid("cost matrix is empty"));
    }
    for row in cost {
        if row.len() != n {
            return Err(Error::invalid(format!(
                "cost matrix is not square: row of {} in a {n}x{n} matrix",
                row.len()
            )));
        }
        if let Some(bad) = row.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::invalid(format!(
                "cost entries must be finite and non-negative, got {bad}"
            )));
        }
    }

    let base = hungarian(cost);
    let v_star = perm_cost(cost, &base);
    let tol = 1e-9 * v_star.abs().max(1.0);

    // Lexicographic refinement: fix columns row by row, keeping a candidate
    // only if an optimal completion still reaches the optimum.
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut fixed = 0.0;
    for i in 0..n {
        let mut found = false;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let rest = completion_cost(cost, i + 1, &used, j);
            if fixed + cost[i][j] + rest <= v_star + tol {
                perm[i] = j;
                used[j] = true;
                fixed += cost[i][j];
                found = true;
                break;
            }
        }
        if !found {
            // Accumulated rounding kept every candidate out of the window;
            // the unrefined optimum is still a valid answer.
            return Ok(Assignment { perm: base.clone(), total_cost: v_star });
        }
    }
    let total_cost = perm_cost(cost, &perm);
    Ok(Assignment { perm, total_cost })
}

fn perm_cost(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, j)| cost[i][*j]).sum()
}

/// Optimal completion over rows `from_row..` and unused columns, with
/// column `extra` treated as used.
fn completion_cost(cost: &[Vec<f64>], from_row: usize, used: &[bool], extra: usize) -> f64 {
    let n = cost.len();
    let cols: Vec<usize> =
        (0..n).filter(|j| !used[*j] && *j != extra).collect();
    if from_row == n {
        return 0.0;
    }
    let sub: Vec<Vec<f64>> = (from_row..n)
        .map(|i| cols.iter().map(|j| cost[i][*j]).collect())
        .collect();
    let sub_perm = hungarian(&sub);
    sub_perm
        .iter()
        .enumerate()
        .map(|(i, j)| sub[i][*j])
        .sum()
}

/// O(n^3) Hungarian method with shortest augmenting paths and row/column
/// potentials. Returns the column assigned to each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-indexed arrays with a virtual column 0.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if matched[j] > 0 {
            row_to_col[matched[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// A solved fleet assignment plus the shared approach window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignmentResult {
    /// Robot `i` is assigned the cell `perm[i]`.
    pub perm: Vec<usize>,
    pub total_sq_cost: f64,
    pub clearance_ok: bool,
    pub t0: f64,
    pub tf: f64,
}

impl AssignmentResult {
    /// Returns the result with the approach window stretched to at least
    /// `min_duration` (used when every robot already sits on its goal).
    pub fn with_min_duration(mut self, min_duration: f64) -> Self {
        if self.tf - self.t0 < min_duration {
            self.tf = self.t0 + min_duration;
        }
        self
    }
}

/// Solves the full fleet-to-cells matching: cost matrix, Hungarian method,
/// clearance verdict, and the shared approach window `[0, tf]` where `tf`
/// lets the farthest robot move at its full travel speed.
pub fn assign_fleet(fleet: &Fleet, means: &[Vec2]) -> Result<AssignmentResult> {
    let cost = cost_matrix(fleet, means)?;
    let solved = solve_assignment(&cost)?;
    let clearance = check_clearance(fleet);
    let tf = fleet
        .robots()
        .iter()
        .zip(&solved.perm)
        .map(|(r, j)| r.start.dist(means[*j]) / r.v_travel)
        .fold(0.0f64, f64::max);
    Ok(AssignmentResult {
        perm: solved.perm,
        total_sq_cost: solved.total_cost,
        clearance_ok: clearance.ok,
        t0: 0.0,
        tf,
    })
}

/// A constant-velocity line from `start` at `t0` to `end` at `tf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub start: Vec2,
    pub end: Vec2,
    pub t0: f64,
    pub tf: f64,
}

impl Trajectory {
    /// Position at time `t`, clamped to the endpoints so the boundary
    /// conditions hold exactly.
    pub fn position(&self, t: f64) -> Vec2 {
        if t <= self.t0 {
            return self.start;
        }
        if t >= self.tf {
            return self.end;
        }
        self.start.lerp(self.end, (t - self.t0) / (self.tf - self.t0))
    }
}

/// Builds the synchronized straight-line approach for each robot from its start
/// to its assigned mean over `[t0, tf]`.
pub fn make_trajectories(
    fleet: &Fleet,
    means: &[Vec2],
    result: &AssignmentResult,
) -> Result<Vec<Trajectory>> {
    if result.tf <= result.t0 {
        return Err(Error::invalid(format!(
            "approach window is empty: t0={} tf={}",
            result.t0, result.tf
        )));
    }
    if result.perm.len() != fleet.len() {
        return Err(Error::invalid("assignment does not cover the fleet"));
    }
    let mut seen = vec![false; means.len()];
    for j in &result.perm {
        if *j >= means.len() || seen[*j] {
            return Err(Error::invalid("assignment is not a permutation"));
        }
        seen[*j] = true;
    }
    Ok(fleet
        .robots()
        .iter()
        .zip(&result.perm)
        .map(|(r, j)| Trajectory { start: r.start, end: means[*j], t0: result.t0, tf: result.tf })
        .collect())
}

/// Minimum over sampled shared times of the minimum pairwise center
/// distance. `samples` evenly spaced instants cover `[t0, tf]` inclusive.
pub fn min_separation(trajectories: &[Trajectory], samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let Some(first) = trajectories.first() else {
        return Ok(f64::INFINITY);
    };
    if trajectories.iter().any(|t| t.t0 != first.t0 || t.tf != first.tf) {
        return Err(Error::invalid("trajectories do not share a time range"));
    }
    let mut min_d = f64::INFINITY;
    for k in 0..samples {
        let s = k as f64 / (samples - 1) as f64;
        let t = first.t0 + (first.tf - first.t0) * s;
        for i in 0..trajectories.len() {
            let pi = trajectories[i].position(t);
            for trajectory in &trajectories[i + 1..] {
                let d = pi.dist(trajectory.position(t));
                if d < min_d {
                    min_d = d;
                }
            }
        }
    }
    Ok(min_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn fleet_at(starts: &[(f64, f64)], radius: f64) -> Fleet {
        let robots = starts
            .iter()
            .enumerate()
            .map(|(i, (x, y))| {
                RobotSpec::new(i as u32, radius, Vec2::new(*x, *y), 1.0, 2.0).unwrap()
            })
            .collect();
        Fleet::new(robots).unwrap()
    }

    fn brute_force_min(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
        let n = cost.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = (f64::INFINITY, perm.clone());
        // Heap's algorithm would do; lexicographic enumeration keeps the
        // first minimum lexicographically smallest.
        fn recurse(
            cost: &[Vec<f64>],
            row: usize,
            used: &mut Vec<bool>,
            current: &mut Vec<usize>,
            best: &mut (f64, Vec<usize>),
        ) {
            let n = cost.len();
            if row == n {
                let total: f64 = current.iter().enumerate().map(|(i, j)| cost[i][*j]).sum();
                if total < best.0 {
                    *best = (total, current.clone());
                }
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    current.push(j);
                    recurse(cost, row + 1, used, current, best);
                    current.pop();
                    used[j] = false;
                }
            }
        }
        let mut used = vec![false; n];
        perm.clear();
        recurse(cost, 0, &mut used, &mut perm, &mut best);
        (best.0, best.1)
    }

    #[test]
    fn robot_spec_validation() {
        assert!(RobotSpec::new(0, 0.0, Vec2::ZERO, 1.0, 2.0).is_err());
        assert!(RobotSpec::new(0, 1.0, Vec2::ZERO, 0.0, 2.0).is_err());
        assert!(RobotSpec::new(0, 1.0, Vec2::ZERO, 3.0, 2.0).is_err());
        assert!(RobotSpec::new(0, 1.0, Vec2::ZERO, 1.0, 1.0).is_ok());
    }

    #[test]
    fn fleet_validation() {
        let a = RobotSpec::new(0, 1.0, Vec2::ZERO, 1.0, 2.0).unwrap();
        let dup = RobotSpec::new(0, 1.0, Vec2::new(5.0, 0.0), 1.0, 2.0).unwrap();
        assert!(Fleet::new(vec![a, dup]).is_err());
        let other_radius = RobotSpec::new(1, 2.0, Vec2::new(5.0, 0.0), 1.0, 2.0).unwrap();
        assert!(Fleet::new(vec![a, other_radius]).is_err());
        assert!(Fleet::new(vec![]).is_err());
    }

    #[test]
    fn cost_matrix_squared_distances() {
        let fleet = fleet_at(&[(0.0, 0.0), (10.0, 0.0)], 1.0);
        let means = [Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)];
        let cost = cost_matrix(&fleet, &means).unwrap();
        assert_eq!(cost, vec![vec![0.0, 100.0], vec![100.0, 0.0]]);

        let one = fleet_at(&[(0.0, 0.0)], 1.0);
        let cost = cost_matrix(&one, &[Vec2::new(3.0, 4.0)]).unwrap();
        assert_eq!(cost[0][0], 25.0);

        assert!(cost_matrix(&one, &means).is_err());
    }

    #[test]
    fn assignment_diagonal_tie_prefers_identity() {
        let solved = solve_assignment(&[vec![0.0, 100.0], vec![100.0, 0.0]]).unwrap();
        assert_eq!(solved.perm, vec![0, 1]);
        assert_eq!(solved.total_cost, 0.0);
    }

    #[test]
    fn assignment_avoids_greedy_trap() {
        let solved = solve_assignment(&[vec![1.0, 2.0], vec![2.0, 100.0]]).unwrap();
        assert_eq!(solved.perm, vec![1, 0]);
        assert_eq!(solved.total_cost, 4.0);
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut rng = SplitMix64::new(777);
        for _ in 0..40 {
            let n = 2 + rng.next_below(5) as usize;
            let cost: Vec<Vec<f64>> =
                (0..n).map(|_| (0..n).map(|_| rng.next_range(0.0, 100.0)).collect()).collect();
            let solved = solve_assignment(&cost).unwrap();
            let (expected, perm) = brute_force_min(&cost);
            assert_eq!(solved.total_cost, expected, "cost mismatch for {cost:?}");
            assert_eq!(solved.perm, perm, "perm mismatch for {cost:?}");
        }
    }

    #[test]
    fn assignment_lexicographic_on_uniform_ties() {
        let solved = solve_assignment(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        assert_eq!(solved.perm, vec![0, 1, 2]);
    }

    #[test]
    fn assignment_input_validation() {
        assert!(solve_assignment(&[vec![1.0, 2.0]]).is_err());
        assert!(solve_assignment(&[vec![1.0, f64::NAN], vec![1.0, 2.0]]).is_err());
        assert!(solve_assignment(&[vec![1.0, -2.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn clearance_threshold() {
        let ok = check_clearance(&fleet_at(&[(0.0, 0.0), (3.0, 0.0)], 1.0));
        assert!(ok.ok);
        assert_eq!(ok.closest, Some((0, 1, 3.0)));

        let tight = check_clearance(&fleet_at(&[(0.0, 0.0), (2.8, 0.0)], 1.0));
        assert!(!tight.ok);
        let (i, j, d) = tight.closest.unwrap();
        assert_eq!((i, j), (0, 1));
        assert!((d - 2.8).abs() < 1e-12);

        let single = check_clearance(&fleet_at(&[(0.0, 0.0)], 1.0));
        assert!(single.ok);
        assert!(single.closest.is_none());
    }

    #[test]
    fn trajectories_hit_boundary_conditions_exactly() {
        let fleet = fleet_at(&[(0.0, 0.0), (10.0, 0.0)], 1.0);
        let means = [Vec2::new(7.0, 9.0), Vec2::new(1.0, 2.0)];
        let result = assign_fleet(&fleet, &means).unwrap();
        let trajs = make_trajectories(&fleet, &means, &result).unwrap();
        for (robot, (traj, j)) in fleet.robots().iter().zip(trajs.iter().zip(&result.perm)) {
            assert_eq!(traj.position(result.t0), robot.start);
            assert_eq!(traj.position(result.tf), means[*j]);
        }
    }

    #[test]
    fn trajectory_midpoint() {
        let t = Trajectory { start: Vec2::ZERO, end: Vec2::new(10.0, 0.0), t0: 0.0, tf: 10.0 };
        assert_eq!(t.position(5.0), Vec2::new(5.0, 0.0));
        assert_eq!(t.position(-1.0), Vec2::ZERO);
        assert_eq!(t.position(11.0), Vec2::new(10.0, 0.0));
    }

    #[test]
    fn zero_length_trajectory_is_constant() {
        let t = Trajectory { start: Vec2::new(4.0, 4.0), end: Vec2::new(4.0, 4.0), t0: 0.0, tf: 1.0 };
        for k in 0..=10 {
            assert_eq!(t.position(k as f64 / 10.0), Vec2::new(4.0, 4.0));
        }
    }

    #[test]
    fn empty_window_rejected() {
        let fleet = fleet_at(&[(0.0, 0.0)], 1.0);
        let means = [Vec2::new(0.0, 0.0)];
        let result = assign_fleet(&fleet, &means).unwrap();
        // Robot already on its goal: tf == t0.
        assert!(make_trajectories(&fleet, &means, &result).is_err());
        let padded = result.with_min_duration(0.5);
        assert!(make_trajectories(&fleet, &means, &padded).is_ok());
    }

    #[test]
    fn min_separation_parallel_lines() {
        let a = Trajectory { start: Vec2::ZERO, end: Vec2::new(10.0, 0.0), t0: 0.0, tf: 1.0 };
        let b = Trajectory {
            start: Vec2::new(0.0, 5.0),
            end: Vec2::new(10.0, 5.0),
            t0: 0.0,
            tf: 1.0,
        };
        assert_eq!(min_separation(&[a, b], 100).unwrap(), 5.0);
    }

    #[test]
    fn min_separation_crossing_approaches_zero() {
        let a = Trajectory { start: Vec2::new(-1.0, 0.0), end: Vec2::new(1.0, 0.0), t0: 0.0, tf: 1.0 };
        let b = Trajectory { start: Vec2::new(0.0, -1.0), end: Vec2::new(0.0, 1.0), t0: 0.0, tf: 1.0 };
        let coarse = min_separation(&[a, b], 11).unwrap();
        let fine = min_separation(&[a, b], 10001).unwrap();
        assert!(fine <= coarse);
        assert!(fine < 1e-3, "crossing separation {fine}");
    }

    #[test]
    fn min_separation_validation() {
        let a = Trajectory { start: Vec2::ZERO, end: Vec2::new(1.0, 0.0), t0: 0.0, tf: 1.0 };
        let b = Trajectory { start: Vec2::ZERO, end: Vec2::new(1.0, 0.0), t0: 0.0, tf: 2.0 };
        assert!(min_separation(&[a, b], 10).is_err());
        assert!(min_separation(&[a], 1).is_err());
        assert_eq!(min_separation(&[a], 2).unwrap(), f64::INFINITY);
    }
}
