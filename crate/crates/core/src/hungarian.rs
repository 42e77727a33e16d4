//! Rectangular linear assignment (Hungarian method with potentials).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AssignmentError {
    #[error("cost matrix has {rows} rows but only {cols} columns")]
    TooFewColumns { rows: usize, cols: usize },
    #[error("cost matrix is ragged")]
    Ragged,
    #[error("cost matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Minimum-cost assignment of every row to a distinct column, for a
/// `rows x cols` matrix with `rows <= cols`.
///
/// Returns the chosen column for each row and the total cost. Runs in
/// `O(rows^2 * cols)`. Among equal-cost alternatives the search settles on
/// the lowest column index it meets first, so results are deterministic.
pub fn solve_rectangular(costs: &[Vec<f64>]) -> Result<(Vec<usize>, f64), AssignmentError> {
    let n = costs.len();
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let m = costs[0].len();
    if costs.iter().any(|r| r.len() != m) {
        return Err(AssignmentError::Ragged);
    }
    if n > m {
        return Err(AssignmentError::TooFewColumns { rows: n, cols: m });
    }
    for (i, row) in costs.iter().enumerate() {
        if let Some(j) = row.iter().position(|c| !c.is_finite()) {
            return Err(AssignmentError::NonFinite { row: i, col: j });
        }
    }

    // 1-based potentials; column 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    for j in 1..=m {
        if owner[j] > 0 {
            col_of_row[owner[j] - 1] = j - 1;
        }
    }
    let total = col_of_row.iter().enumerate().map(|(i, &j)| costs[i][j]).sum();
    Ok((col_of_row, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(costs: &[Vec<f64>]) -> f64 {
        fn rec(costs: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == costs.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..costs[0].len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(costs[row][j] + rec(costs, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(costs, 0, &mut vec![false; costs[0].len()])
    }

    #[test]
    fn diagonal() {
        let (cols, total) = solve_rectangular(&[vec![1.0, 10.0], vec![10.0, 1.0]]).unwrap();
        assert_eq!(cols, vec![0, 1]);
        assert_eq!(total, 2.0);
    }

    #[test]
    fn ties_are_deterministic() {
        let (cols, total) = solve_rectangular(&[vec![5.0, 5.0], vec![5.0, 5.0]]).unwrap();
        assert_eq!(total, 10.0);
        assert_eq!(cols, vec![0, 1]);
    }

    #[test]
    fn rectangular_picks_cheap_columns() {
        let costs = vec![vec![9.0, 2.0, 7.0, 1.0], vec![3.0, 8.0, 1.0, 6.0]];
        let (cols, total) = solve_rectangular(&costs).unwrap();
        assert_eq!(cols, vec![3, 2]);
        assert_eq!(total, 2.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(
            solve_rectangular(&[vec![1.0], vec![2.0]]).unwrap_err(),
            AssignmentError::TooFewColumns { rows: 2, cols: 1 }
        );
        assert_eq!(solve_rectangular(&[vec![1.0, 2.0], vec![2.0]]).unwrap_err(), AssignmentError::Ragged);
        assert!(solve_rectangular(&[vec![f64::NAN]]).is_err());
        assert_eq!(solve_rectangular(&[]).unwrap(), (vec![], 0.0));
    }

    proptest! {
        #[test]
        fn matches_permutation_minimum(
            (rows, cols, data) in (1usize..=4, 0usize..=3)
                .prop_flat_map(|(r, extra)| (Just(r), Just(r + extra), prop::collection::vec(0u32..50, r * (r + extra))))
        ) {
            let costs: Vec<Vec<f64>> = data.chunks(cols).map(|c| c.iter().map(|&x| x as f64).collect()).collect();
            let (assign, total) = solve_rectangular(&costs).unwrap();
            prop_assert_eq!(assign.len(), rows);
            let mut seen = assign.clone();
            seen.sort_unstable();
            seen.dedup();
            prop_assert_eq!(seen.len(), rows);
            prop_assert_eq!(total, brute_force(&costs));
        }
    }
}
