//! Serpentine raster plans for single cells, the integer line discretization
//! they ride on, and the print-time cost model.
//!
//! A plan walks a cell's rows top to bottom, alternating direction each
//! processed row. Within a row, maximal runs of the cell's pixels become
//! PRINT segments and the gaps between runs become TRAVEL segments; the hop
//! from one processed row to the next is a BREAK segment routed along the
//! discretized line between the two pixels. Rows without cell pixels are
//! skipped; the BREAK jumps straight over them.
//!
//! Recorded lengths drive the cost model:
//! * PRINT: pixel steps inside the run (a run of k pixels records k - 1, an
//!   isolated pixel records 0; ink release itself takes no time).
//! * TRAVEL: the number of skipped pixels inside the gap.
//! * BREAK: the Euclidean length of the discretized inter-row path (1 per
//!   straight step, sqrt(2) per diagonal step).
//!
//! The print time of a plan is the PRINT distance at print speed plus all
//! other distance (TRAVEL, BREAK, and the lead-in from the assigned goal to
//! the plan's first pixel) at travel speed.

use crate::assignment::RobotSpec;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::raster::{PhysicalScale, PixelPoint};
use std::collections::BTreeMap;

/// Eight-connected discrete line from `a` to `b`, both inclusive.
///
/// The axis with the larger coordinate delta drives (x on ties) and advances
/// by exactly one cell per step; the other axis follows so the path stays
/// within half a cell of the ideal line, stepping diagonally when the error
/// term ties at zero. Path length is `max(|dx|, |dy|) + 1` points.
pub fn bresenham(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (x1, y1) = a;
    let (x2, y2) = b;
    let dx = x2 - x1;
    let dy = y2 - y1;
    let sx = dx.signum();
    let sy = dy.signum();
    let adx = dx.abs();
    let ady = dy.abs();

    let (major, minor) = if adx >= ady { (adx, ady) } else { (ady, adx) };
    let mut points = Vec::with_capacity(major as usize + 1);
    let mut err = 2 * minor - major;
    let mut j = 0i64;
    for i in 0..=major {
        let (px, py) = if adx >= ady {
            (x1 + sx * i, y1 + sy * j)
        } else {
            (x1 + sx * j, y1 + sy * i)
        };
        points.push((px, py));
        if i < major {
            if err >= 0 {
                j += 1;
                err -= 2 * major;
            }
            err += 2 * minor;
        }
    }
    points
}

/// Euclidean length of the discretized path between two pixels: straight
/// steps count 1, diagonal steps count sqrt(2).
pub fn bresenham_length(a: (i64, i64), b: (i64, i64)) -> f64 {
    let pts = bresenham(a, b);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let diag = w[0].0 != w[1].0 && w[0].1 != w[1].1;
        total += if diag { std::f64::consts::SQRT_2 } else { 1.0 };
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionMode {
    Print,
    Travel,
    Break,
}

impl MotionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MotionMode::Print => "PRINT",
            MotionMode::Travel => "TRAVEL",
            MotionMode::Break => "BREAK",
        }
    }
}

impl std::str::FromStr for MotionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PRINT" => Ok(MotionMode::Print),
            "TRAVEL" => Ok(MotionMode::Travel),
            "BREAK" => Ok(MotionMode::Break),
            other => Err(Error::invalid(format!("unknown motion mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSegment {
    pub start: PixelPoint,
    pub end: PixelPoint,
    pub mode: MotionMode,
    /// Recorded distance in pixel units (see the module docs for the
    /// per-mode conventions).
    pub length_px: f64,
}

/// Ordered motion segments for one robot's cell, with per-mode totals.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPlan {
    pub robot_id: u32,
    pub segments: Vec<MotionSegment>,
    pub print_px: f64,
    pub travel_px: f64,
    pub break_px: f64,
    /// Travel distance from the assigned goal position to the first plan
    /// pixel. Charged at travel speed; kept out of `segments` because its
    /// origin is a continuous goal, not a pixel.
    pub lead_in_px: f64,
    pub lead_in_from: Option<Vec2>,
}

impl MotionPlan {
    /// A plan with no motion at all (used for cells that turn out empty in
    /// degenerate partitions).
    pub fn empty(robot_id: u32) -> Self {
        MotionPlan {
            robot_id,
            segments: Vec::new(),
            print_px: 0.0,
            travel_px: 0.0,
            break_px: 0.0,
            lead_in_px: 0.0,
            lead_in_from: None,
        }
    }

    /// Adds the travel leg from `goal` (the assigned cell mean) to the
    /// plan's first pixel.
    pub fn with_lead_in_from(mut self, goal: Vec2) -> Self {
        self.lead_in_px = match self.start_pixel() {
            Some(first) => goal.dist(first.pos()),
            None => 0.0,
        };
        self.lead_in_from = Some(goal);
        self
    }

    pub fn start_pixel(&self) -> Option<PixelPoint> {
        self.segments.first().map(|s| s.start)
    }

    pub fn end_pixel(&self) -> Option<PixelPoint> {
        self.segments.last().map(|s| s.end)
    }

    /// Every pixel this plan prints, in plan order.
    pub fn printed_pixels(&self) -> Vec<PixelPoint> {
        let mut out = Vec::new();
        for seg in &self.segments {
            if seg.mode != MotionMode::Print {
                continue;
            }
            let row = seg.start.row;
            let (a, b) = (seg.start.col, seg.end.col);
            if a <= b {
                for col in a..=b {
                    out.push(PixelPoint::new(col, row));
                }
            } else {
                for col in (b..=a).rev() {
                    out.push(PixelPoint::new(col, row));
                }
            }
        }
        out
    }

    pub fn print_pixel_count(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.mode == MotionMode::Print)
            .map(|s| (s.start.col.abs_diff(s.end.col) + 1) as usize)
            .sum()
    }
}

/// Builds the serpentine plan covering every pixel of `cell` exactly once.
pub fn serpentine_plan(robot_id: u32, cell: &[PixelPoint]) -> Result<MotionPlan> {
    if cell.is_empty() {
        return Err(Error::invalid("cannot plan an empty cell"));
    }

    let mut rows: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for p in cell {
        rows.entry(p.row).or_default().push(p.col);
    }

    let mut segments = Vec::new();
    let mut print_px = 0.0;
    let mut travel_px = 0.0;
    let mut break_px = 0.0;
    let mut prev_end: Option<PixelPoint> = None;

    for (processed, (row, cols)) in rows.iter_mut().enumerate() {
        cols.sort_unstable();
        cols.dedup();
        let leftward = processed % 2 == 1;

        // Maximal runs of adjacent columns, (first, last) in traversal order.
        let mut runs: Vec<(u32, u32)> = Vec::new();
        let iter: Box<dyn Iterator<Item = &u32>> =
            if leftward { Box::new(cols.iter().rev()) } else { Box::new(cols.iter()) };
        for &c in iter {
            match runs.last_mut() {
                Some((_, last))
                    if (leftward && *last > 0 && c == *last - 1) || (!leftward && c == *last + 1) =>
                {
                    *last = c;
                }
                _ => runs.push((c, c)),
            }
        }

        let row_first = PixelPoint::new(runs[0].0, *row);
        if let Some(prev) = prev_end {
            let len = bresenham_length(
                (prev.col as i64, prev.row as i64),
                (row_first.col as i64, row_first.row as i64),
            );
            segments.push(MotionSegment {
                start: prev,
                end: row_first,
                mode: MotionMode::Break,
                length_px: len,
            });
            break_px += len;
        }

        let mut prev_run_end: Option<u32> = None;
        for (first, last) in &runs {
            if let Some(pe) = prev_run_end {
                let gap = pe.abs_diff(*first) as f64 - 1.0;
                segments.push(MotionSegment {
                    start: PixelPoint::new(pe, *row),
                    end: PixelPoint::new(*first, *row),
                    mode: MotionMode::Travel,
                    length_px: gap,
                });
                travel_px += gap;
            }
            let len = first.abs_diff(*last) as f64;
            segments.push(MotionSegment {
                start: PixelPoint::new(*first, *row),
                end: PixelPoint::new(*last, *row),
                mode: MotionMode::Print,
                length_px: len,
            });
            print_px += len;
            prev_run_end = Some(*last);
        }
        prev_end = Some(PixelPoint::new(runs.last().unwrap().1, *row));
    }

    Ok(MotionPlan {
        robot_id,
        segments,
        print_px,
        travel_px,
        break_px,
        lead_in_px: 0.0,
        lead_in_from: None,
    })
}

/// Print time of one plan: PRINT distance at print speed, everything else
/// (TRAVEL, BREAK, lead-in) at travel speed, scaled to physical units.
pub fn printing_time(plan: &MotionPlan, spec: &RobotSpec, scale: &PhysicalScale) -> f64 {
    let pitch = scale.pitch();
    plan.print_px * pitch / spec.v_print
        + (plan.travel_px + plan.break_px + plan.lead_in_px) * pitch / spec.v_travel
}

/// The task balance objective: product of the times over their sum. For a
/// fixed sum it is maximized when all times are equal.
pub fn objective(times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::invalid("objective needs at least one time"));
    }
    if let Some(bad) = times.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid(format!(
            "print times must be positive and finite, got {bad}"
        )));
    }
    let product: f64 = times.iter().product();
    let sum: f64 = times.iter().sum();
    Ok(product / sum)
}

/// Per-robot costs of a full solution.
#[derive(Debug, Clone)]
pub struct CostReport {
    /// Shared approach duration per robot (all robots arrive together).
    pub approach_times: Vec<f64>,
    pub print_times: Vec<f64>,
    pub objective: f64,
    pub makespan: f64,
}

impl CostReport {
    pub fn new(approach_times: Vec<f64>, print_times: Vec<f64>) -> Result<Self> {
        if approach_times.len() != print_times.len() {
            return Err(Error::invalid("approach and print time lists differ in length"));
        }
        let objective = objective(&print_times)?;
        let makespan = approach_times
            .iter()
            .zip(&print_times)
            .map(|(a, t)| a + t)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(CostReport { approach_times, print_times, objective, makespan })
    }

    /// Largest over smallest print time; 1.0 means a perfectly even split.
    pub fn flatness_ratio(&self) -> f64 {
        let max = self.print_times.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let min = self.print_times.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::RobotSpec;

    fn pts(coords: &[(u32, u32)]) -> Vec<PixelPoint> {
        coords.iter().map(|(c, r)| PixelPoint::new(*c, *r)).collect()
    }

    #[test]
    fn line_horizontal() {
        assert_eq!(bresenham((0, 0), (3, 0)), vec![(0, 0), (1, 0), (2, 0), (3, 0)]);
    }

    #[test]
    fn line_degenerate() {
        assert_eq!(bresenham((0, 0), (0, 0)), vec![(0, 0)]);
    }

    #[test]
    fn line_shallow_matches_rounding_oracle() {
        // Driving axis x, slope 2/5: the passive coordinate must equal the
        // half-up rounding of the ideal line at every column.
        let pts = bresenham((0, 0), (5, 2));
        assert_eq!(pts.len(), 6);
        assert_eq!(*pts.first().unwrap(), (0, 0));
        assert_eq!(*pts.last().unwrap(), (5, 2));
        for (i, (x, y)) in pts.iter().enumerate() {
            assert_eq!(*x, i as i64);
            let expected = (2 * 2 * i as i64 + 5) / (2 * 5);
            assert_eq!(*y, expected, "column {i}");
        }
        let ys: Vec<i64> = pts.iter().map(|p| p.1).collect();
        assert!(ys.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn line_tie_steps_diagonally() {
        // Slope 1/2 hits the midpoint at the first column; the tie must step.
        assert_eq!(bresenham((0, 0), (2, 1)), vec![(0, 0), (1, 1), (2, 1)]);
    }

    #[test]
    fn single_row_plan() {
        let plan = serpentine_plan(0, &pts(&[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)])).unwrap();
        assert_eq!(plan.segments.len(), 1);
        assert_eq!(plan.segments[0].mode, MotionMode::Print);
        assert_eq!(plan.segments[0].length_px, 4.0);
        assert_eq!(plan.travel_px, 0.0);
        assert_eq!(plan.break_px, 0.0);
    }

    #[test]
    fn two_rows_serpentine() {
        let cell: Vec<PixelPoint> = (0..5)
            .flat_map(|c| [(c, 0), (c, 1)])
            .map(|(c, r)| PixelPoint::new(c, r))
            .collect();
        let plan = serpentine_plan(0, &cell).unwrap();
        let modes: Vec<MotionMode> = plan.segments.iter().map(|s| s.mode).collect();
        assert_eq!(modes, vec![MotionMode::Print, MotionMode::Break, MotionMode::Print]);
        assert_eq!(plan.segments[0].length_px, 4.0);
        assert_eq!(plan.segments[1].length_px, 1.0);
        assert_eq!(plan.segments[2].length_px, 4.0);
        // Second row runs right to left.
        assert_eq!(plan.segments[2].start, PixelPoint::new(4, 1));
        assert_eq!(plan.segments[2].end, PixelPoint::new(0, 1));
    }

    #[test]
    fn gap_row_decomposition() {
        // Pattern 1 1 0 0 1: one two-pixel run, a two-pixel gap, an isolated
        // pixel.
        let plan = serpentine_plan(0, &pts(&[(0, 0), (1, 0), (4, 0)])).unwrap();
        let lens: Vec<(MotionMode, f64)> =
            plan.segments.iter().map(|s| (s.mode, s.length_px)).collect();
        assert_eq!(
            lens,
            vec![
                (MotionMode::Print, 1.0),
                (MotionMode::Travel, 2.0),
                (MotionMode::Print, 0.0),
            ]
        );
        assert_eq!(plan.print_px, 1.0);
        assert_eq!(plan.travel_px, 2.0);
    }

    #[test]
    fn skipped_rows_get_one_break() {
        let plan = serpentine_plan(0, &pts(&[(0, 0), (1, 0), (5, 4), (6, 4)])).unwrap();
        let breaks: Vec<&MotionSegment> =
            plan.segments.iter().filter(|s| s.mode == MotionMode::Break).collect();
        assert_eq!(breaks.len(), 1);
        assert_eq!(breaks[0].start, PixelPoint::new(1, 0));
        // Second processed row is traversed leftward, so it begins at its
        // rightmost pixel.
        assert_eq!(breaks[0].end, PixelPoint::new(6, 4));
        let expected = bresenham_length((1, 0), (6, 4));
        assert_eq!(breaks[0].length_px, expected);
    }

    #[test]
    fn empty_cell_rejected() {
        assert!(serpentine_plan(0, &[]).is_err());
    }

    #[test]
    fn coverage_equals_cell() {
        let cell = pts(&[(0, 0), (1, 0), (4, 0), (2, 1), (3, 1), (0, 3)]);
        let plan = serpentine_plan(0, &cell).unwrap();
        let mut printed = plan.printed_pixels();
        printed.sort();
        let mut expected = cell.clone();
        expected.sort();
        assert_eq!(printed, expected);
        assert_eq!(plan.print_pixel_count(), cell.len());
    }

    #[test]
    fn totals_match_segments() {
        let cell = pts(&[(0, 0), (1, 0), (4, 0), (2, 1), (3, 1), (0, 3), (7, 5), (8, 5)]);
        let plan = serpentine_plan(0, &cell).unwrap();
        let mut by_mode = [0.0f64; 3];
        for s in &plan.segments {
            by_mode[s.mode as usize] += s.length_px;
        }
        assert_eq!(by_mode[MotionMode::Print as usize], plan.print_px);
        assert_eq!(by_mode[MotionMode::Travel as usize], plan.travel_px);
        assert_eq!(by_mode[MotionMode::Break as usize], plan.break_px);
    }

    #[test]
    fn print_time_formula() {
        let scale = PhysicalScale::new(1.0).unwrap();
        let spec = RobotSpec::new(0, 1.0, Vec2::ZERO, 2.0, 5.0).unwrap();
        let mut plan = MotionPlan::empty(0);
        plan.print_px = 10.0;
        assert_eq!(printing_time(&plan, &spec, &scale), 5.0);
        plan.travel_px = 4.0;
        plan.break_px = 6.0;
        assert_eq!(printing_time(&plan, &spec, &scale), 7.0);
    }

    #[test]
    fn print_time_travel_only_plan() {
        let scale = PhysicalScale::new(1.0).unwrap();
        let spec = RobotSpec::new(0, 1.0, Vec2::ZERO, 2.0, 5.0).unwrap();
        let mut plan = MotionPlan::empty(0);
        plan.travel_px = 10.0;
        assert_eq!(printing_time(&plan, &spec, &scale), 2.0);
    }

    #[test]
    fn lead_in_distance() {
        let plan = serpentine_plan(0, &pts(&[(3, 4), (4, 4)]))
            .unwrap()
            .with_lead_in_from(Vec2::new(0.0, 0.0));
        assert_eq!(plan.lead_in_px, 5.0);
    }

    #[test]
    fn objective_values() {
        assert_eq!(objective(&[2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(objective(&[1.0, 3.0]).unwrap(), 0.75);
        assert!(objective(&[1.0, 3.0]).unwrap() < objective(&[2.0, 2.0]).unwrap());
        assert!(objective(&[1.0, 0.0]).is_err());
        assert!(objective(&[-1.0, 2.0]).is_err());
        assert!(objective(&[]).is_err());
    }

    #[test]
    fn equalizing_never_hurts_objective() {
        let mut rng = crate::rng::SplitMix64::new(404);
        for _ in 0..200 {
            let n = 2 + rng.next_below(6) as usize;
            let times: Vec<f64> = (0..n).map(|_| rng.next_range(0.1, 50.0)).collect();
            let mean = times.iter().sum::<f64>() / n as f64;
            let equal = vec![mean; n];
            let a = objective(&times).unwrap();
            let b = objective(&equal).unwrap();
            assert!(b >= a - 1e-12, "equal-mean objective {b} < {a}");
        }
    }

    #[test]
    fn cost_report_summary() {
        let report = CostReport::new(vec![2.0, 2.0], vec![10.0, 8.0]).unwrap();
        assert_eq!(report.makespan, 12.0);
        assert_eq!(report.objective, 80.0 / 18.0);
        assert_eq!(report.flatness_ratio(), 10.0 / 8.0);
    }
}
