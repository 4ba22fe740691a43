//! Minimum-cost bipartite matching between predictions and ground truths.
//!
//! [`solve_assignment`] runs the shortest-augmenting-path form of the
//! Hungarian method directly on rectangular matrices (the smaller side is
//! matched completely). Among all optimal matchings it returns the one whose
//! pair list, sorted by prediction index, is lexicographically smallest; the
//! dual potentials of the solve identify every optimal matching, and a
//! row-by-row alternating-cycle search picks the smallest.
//!
//! [`brute_force_assignment`] enumerates every injection and serves as the
//! reference for small instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;

/// Largest smaller side accepted by [`brute_force_assignment`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub pred: usize,
    pub gt: usize,
    pub distance: f64,
}

/// An injective pairing plus the indices left over on each side.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Matching {
    /// Sorted by prediction index.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_preds: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

impl Matching {
    /// Sum of pair costs, accumulated in pair order.
    pub fn total_cost(&self) -> f64 {
        self.pairs.iter().map(|p| p.distance).sum()
    }

    pub fn pair_indices(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| (p.pred, p.gt)).collect()
    }

    /// Partner of each prediction, if any.
    pub fn gt_of_pred(&self, n_preds: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_preds];
        for p in &self.pairs {
            out[p.pred] = Some(p.gt);
        }
        out
    }

    /// Partner of each ground truth, if any.
    pub fn pred_of_gt(&self, n_gts: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_gts];
        for p in &self.pairs {
            out[p.gt] = Some(p.pred);
        }
        out
    }

    fn from_assignment(costs: &DistanceMatrix, gt_of_pred: &[Option<usize>]) -> Self {
        let mut taken = vec![false; costs.cols()];
        let mut pairs = Vec::new();
        let mut unmatched_preds = Vec::new();
        for (pred, gt) in gt_of_pred.iter().enumerate() {
            match *gt {
                Some(gt) => {
                    taken[gt] = true;
                    pairs.push(MatchedPair {
                        pred,
                        gt,
                        distance: costs.get(pred, gt),
                    });
                }
                None => unmatched_preds.push(pred),
            }
        }
        let unmatched_gts = (0..costs.cols()).filter(|&j| !taken[j]).collect();
        Self {
            pairs,
            unmatched_preds,
            unmatched_gts,
        }
    }
}

/// Two totals closer than this are treated as tied.
fn tie_tolerance(costs: &DistanceMatrix) -> f64 {
    let scale = costs.values().iter().fold(1.0f64, |m, &v| m.max(v));
    1e-9 * scale
}

/// Hungarian solve for `rows <= cols`.
///
/// Returns the column of every row plus potentials `(u, v)` such that
/// `c[i][j] - u[i] - v[j] >= 0` everywhere, equality on matched pairs, and
/// `v[j] < 0` only for matched columns.
fn hungarian(costs: &DistanceMatrix) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let (n, m) = (costs.rows(), costs.cols());
    debug_assert!(n <= m);
    // 1-based working arrays; index 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut row_of_col = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut min_to = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        min_to.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = costs.get(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    for j in 1..=m {
        if row_of_col[j] != 0 {
            col_of_row[row_of_col[j] - 1] = j - 1;
        }
    }
    (col_of_row, u[1..].to_vec(), v[1..].to_vec())
}

/// Optimal matchings as perfect matchings of a square "tight" graph.
///
/// Real rows are predictions and real columns ground truths. When the sides
/// differ, dummy nodes pad the smaller side; a dummy may only pair with a
/// real node that optimality allows to stay unmatched.
struct TightGraph {
    size: usize,
    n_preds: usize,
    n_gts: usize,
    tight: Vec<bool>,
    pred_free: Vec<bool>,
    gt_free: Vec<bool>,
}

impl TightGraph {
    fn edge(&self, row: usize, col: usize) -> bool {
        match (row < self.n_preds, col < self.n_gts) {
            (true, true) => self.tight[row * self.n_gts + col],
            (true, false) => self.pred_free[row],
            (false, true) => self.gt_free[col],
            (false, false) => false,
        }
    }

    /// Moves the partner of `row` onto another column, ending on `target`.
    fn reroute(
        &self,
        row: usize,
        target: usize,
        col_of_row: &mut [usize],
        row_of_col: &mut [usize],
        blocked: &mut [bool],
    ) -> bool {
        for col in 0..self.size {
            if blocked[col] || !self.edge(row, col) {
                continue;
            }
            blocked[col] = true;
            if col == target || self.reroute(row_of_col[col], target, col_of_row, row_of_col, blocked) {
                col_of_row[row] = col;
                row_of_col[col] = row;
                return true;
            }
        }
        false
    }
}

fn lexicographic_optimum(
    costs: &DistanceMatrix,
    gt_of_pred: &[Option<usize>],
    pred_pot: &[f64],
    gt_pot: &[f64],
    pred_free: Vec<bool>,
    gt_free: Vec<bool>,
) -> Vec<Option<usize>> {
    let (n, m) = (costs.rows(), costs.cols());
    let tol = tie_tolerance(costs);
    let mut tight = vec![false; n * m];
    for i in 0..n {
        for j in 0..m {
            tight[i * m + j] = costs.get(i, j) - pred_pot[i] - gt_pot[j] <= tol;
        }
    }
    let graph = TightGraph {
        size: n.max(m),
        n_preds: n,
        n_gts: m,
        tight,
        pred_free,
        gt_free,
    };

    // Seed with the solver's matching, padding with dummies.
    let size = graph.size;
    let mut col_of_row = vec![usize::MAX; size];
    let mut row_of_col = vec![usize::MAX; size];
    for (i, gt) in gt_of_pred.iter().enumerate() {
        if let Some(j) = *gt {
            col_of_row[i] = j;
            row_of_col[j] = i;
        }
    }
    let mut spare_rows = (n..size).chain((0..n).filter(|&i| gt_of_pred[i].is_none()));
    let spare_cols: Vec<usize> = (0..size).filter(|&j| row_of_col[j] == usize::MAX).collect();
    for j in spare_cols {
        let i = spare_rows.next().expect("square padding");
        col_of_row[i] = j;
        row_of_col[j] = i;
    }

    let mut fixed = vec![false; size];
    for row in 0..n {
        let current = col_of_row[row];
        // Real columns in index order, then "unmatched" (any dummy column).
        for option in 0..size {
            if option == current {
                break;
            }
            if current >= m && option >= m {
                break;
            }
            if fixed[option] || !graph.edge(row, option) {
                continue;
            }
            let holder = row_of_col[option];
            let mut blocked = fixed.clone();
            blocked[option] = true;
            let mut trial_cols = col_of_row.clone();
            let mut trial_rows = row_of_col.clone();
            if graph.reroute(holder, current, &mut trial_cols, &mut trial_rows, &mut blocked) {
                trial_cols[row] = option;
                trial_rows[option] = row;
                col_of_row = trial_cols;
                row_of_col = trial_rows;
                break;
            }
        }
        fixed[col_of_row[row]] = true;
    }

    (0..n)
        .map(|i| (col_of_row[i] < m).then_some(col_of_row[i]))
        .collect()
}

/// Minimum-total-cost matching of size `min(rows, cols)`.
///
/// Ties are broken toward the lexicographically smallest pair list sorted by
/// prediction index. Costs must be finite and non-negative.
pub fn solve_assignment(costs: &DistanceMatrix) -> Result<Matching> {
    if let Some(v) = costs.values().iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Input(format!("invalid cost {v}")));
    }
    let (n, m) = (costs.rows(), costs.cols());
    if n == 0 || m == 0 {
        return Ok(Matching::from_assignment(costs, &vec![None; n]));
    }

    let (gt_of_pred, pred_pot, gt_pot, pred_free, gt_free) = if n <= m {
        let (cols, u, v) = hungarian(costs);
        let gt_free = v.iter().map(|&x| x >= 0.0).collect();
        (
            cols.into_iter().map(Some).collect::<Vec<_>>(),
            u,
            v,
            vec![false; n],
            gt_free,
        )
    } else {
        let (preds, u, v) = hungarian(&costs.transpose());
        let mut gt_of_pred = vec![None; n];
        for (gt, &pred) in preds.iter().enumerate() {
            gt_of_pred[pred] = Some(gt);
        }
        let pred_free = v.iter().map(|&x| x >= 0.0).collect();
        (gt_of_pred, v, u, pred_free, vec![false; m])
    };

    let best = lexicographic_optimum(costs, &gt_of_pred, &pred_pot, &gt_pot, pred_free, gt_free);
    Ok(Matching::from_assignment(costs, &best))
}

/// Exhaustive minimum over every injection of the smaller side into the
/// larger, with the same tie rule as [`solve_assignment`].
pub fn brute_force_assignment(costs: &DistanceMatrix) -> Result<Matching> {
    let (n, m) = (costs.rows(), costs.cols());
    if n.min(m) > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            rows: n,
            cols: m,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if let Some(v) = costs.values().iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Input(format!("invalid cost {v}")));
    }

    struct Search<'a> {
        costs: &'a DistanceMatrix,
        tol: f64,
        skips_allowed: usize,
        current: Vec<Option<usize>>,
        used: Vec<bool>,
        best: Option<(f64, Vec<Option<usize>>)>,
    }

    impl Search<'_> {
        // Visits pair lists in lexicographic order: each prediction tries its
        // ground truths in index order, then staying unmatched.
        fn visit(&mut self, pred: usize, skipped: usize, total: f64) {
            if pred == self.costs.rows() {
                let better = match &self.best {
                    None => true,
                    Some((best, _)) => total < best - self.tol,
                };
                if better {
                    self.best = Some((total, self.current.clone()));
                }
                return;
            }
            for gt in 0..self.costs.cols() {
                if self.used[gt] {
                    continue;
                }
                self.used[gt] = true;
                self.current[pred] = Some(gt);
                self.visit(pred + 1, skipped, total + self.costs.get(pred, gt));
                self.used[gt] = false;
            }
            self.current[pred] = None;
            if skipped < self.skips_allowed {
                self.visit(pred + 1, skipped + 1, total);
            }
        }
    }

    let mut search = Search {
        costs,
        tol: tie_tolerance(costs),
        skips_allowed: n.saturating_sub(m),
        current: vec![None; n],
        used: vec![false; m],
        best: None,
    };
    search.visit(0, 0, 0.0);
    let (_, best) = search.best.unwrap_or((0.0, Vec::new()));
    Ok(Matching::from_assignment(costs, &best))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DistanceMatrix {
        DistanceMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn one_by_one() {
        let m = solve_assignment(&matrix(&[&[7.0]])).unwrap();
        assert_eq!(
            m.pairs,
            vec![MatchedPair {
                pred: 0,
                gt: 0,
                distance: 7.0
            }]
        );
        assert_eq!(brute_force_assignment(&matrix(&[&[7.0]])).unwrap(), m);
    }

    #[test]
    fn two_by_two_prefers_anti_diagonal() {
        let c = matrix(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let m = solve_assignment(&c).unwrap();
        assert_eq!(m.pair_indices(), vec![(0, 1), (1, 0)]);
        assert_eq!(m.total_cost(), 4.0);
        assert_eq!(brute_force_assignment(&c).unwrap(), m);
    }

    #[test]
    fn empty_side() {
        let c = DistanceMatrix::new(0, 3, vec![]).unwrap();
        let m = solve_assignment(&c).unwrap();
        assert!(m.pairs.is_empty());
        assert_eq!(m.unmatched_gts, vec![0, 1, 2]);
        assert!(m.unmatched_preds.is_empty());

        let c = DistanceMatrix::new(2, 0, vec![]).unwrap();
        let m = solve_assignment(&c).unwrap();
        assert_eq!(m.unmatched_preds, vec![0, 1]);
        assert_eq!(brute_force_assignment(&c).unwrap(), m);
    }

    #[test]
    fn three_by_three_distinct() {
        // Enumerating the six permutations by hand: (0,2),(1,0),(2,1) = 1 + 2 + 3 = 6 is unique.
        let c = matrix(&[&[9.0, 8.0, 1.0], &[2.0, 7.0, 6.0], &[5.0, 3.0, 4.0]]);
        let m = solve_assignment(&c).unwrap();
        assert_eq!(m.pair_indices(), vec![(0, 2), (1, 0), (2, 1)]);
        assert_eq!(brute_force_assignment(&c).unwrap(), m);
    }

    #[test]
    fn rectangular_both_orientations() {
        let c = matrix(&[&[4.0, 1.0, 3.0, 9.0, 2.5], &[2.0, 0.5, 5.0, 1.5, 8.0]]);
        let m = solve_assignment(&c).unwrap();
        // 20 injections; best is (0,1)=1 + (1,3)=1.5.
        assert_eq!(m.pair_indices(), vec![(0, 1), (1, 3)]);
        assert_eq!(m.unmatched_gts, vec![0, 2, 4]);
        assert_eq!(brute_force_assignment(&c).unwrap(), m);

        let t = solve_assignment(&c.transpose()).unwrap();
        assert_eq!(t.pair_indices(), vec![(1, 0), (3, 1)]);
        assert_eq!(t.unmatched_preds, vec![0, 2, 4]);
    }

    #[test]
    fn ties_pick_lexicographically_smallest() {
        let c = matrix(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(solve_assignment(&c).unwrap().pair_indices(), vec![(0, 0), (1, 1)]);

        // More predictions than ground truths, all equal: match the earliest predictions.
        let c = matrix(&[&[2.0], &[2.0], &[2.0]]);
        let m = solve_assignment(&c).unwrap();
        assert_eq!(m.pair_indices(), vec![(0, 0)]);
        assert_eq!(m.unmatched_preds, vec![1, 2]);
        assert_eq!(brute_force_assignment(&c).unwrap(), m);

        let c = matrix(&[&[3.0, 3.0, 3.0]]);
        assert_eq!(solve_assignment(&c).unwrap().pair_indices(), vec![(0, 0)]);

        // Solver path lands on (0,1),(1,0) first; (0,0),(1,1) costs the same.
        let c = matrix(&[&[1.0, 0.0], &[0.0, 1.0], &[0.5, 0.5]]);
        let m = solve_assignment(&c).unwrap();
        assert_eq!(m, brute_force_assignment(&c).unwrap());
    }

    #[test]
    fn rejects_bad_costs() {
        let c = DistanceMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(solve_assignment(&c).is_ok());
        assert!(DistanceMatrix::new(1, 1, vec![-1.0]).is_err());
    }

    #[test]
    fn brute_force_size_limit() {
        let c = DistanceMatrix::new(9, 9, vec![1.0; 81]).unwrap();
        assert!(matches!(brute_force_assignment(&c), Err(Error::TooLarge { .. })));
        let c = DistanceMatrix::new(8, 20, vec![1.0; 160]).unwrap();
        assert!(solve_assignment(&c).is_ok());
    }
}
