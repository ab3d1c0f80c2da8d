//! Bottleneck (max-min) bipartite assignment.

/// Augmenting-path bipartite matching restricted to `allowed(row, col)`.
/// Returns the column of every row if all rows can be matched.
pub fn perfect_row_matching<F>(rows: usize, cols: usize, allowed: F) -> Option<Vec<usize>>
where
    F: Fn(usize, usize) -> bool,
{
    fn augment<F: Fn(usize, usize) -> bool>(
        r: usize,
        cols: usize,
        allowed: &F,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for c in 0..cols {
            if !allowed(r, c) || seen[c] {
                continue;
            }
            seen[c] = true;
            if owner[c].is_none_or(|o| augment(o, cols, allowed, seen, owner)) {
                owner[c] = Some(r);
                return true;
            }
        }
        false
    }

    if rows > cols {
        return None;
    }
    let mut owner: Vec<Option<usize>> = vec![None; cols];
    for r in 0..rows {
        let mut seen = vec![false; cols];
        if !augment(r, cols, &allowed, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut assignment = vec![0; rows];
    for (c, o) in owner.iter().enumerate() {
        if let Some(r) = o {
            assignment[*r] = c;
        }
    }
    Some(assignment)
}

/// Injective row→column assignment maximising the smallest utility among
/// the chosen entries. `None` entries are forbidden. Returns the assignment
/// and its bottleneck value (`+∞` when there are no rows).
pub fn bottleneck_assignment(
    utility: &[Vec<Option<f64>>],
    cols: usize,
) -> Option<(Vec<usize>, f64)> {
    let rows = utility.len();
    if rows == 0 {
        return Some((Vec::new(), f64::INFINITY));
    }
    let mut values: Vec<f64> = utility.iter().flatten().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let feasible =
        |t: f64| perfect_row_matching(rows, cols, |r, c| utility[r][c].is_some_and(|u| u >= t));
    // Largest threshold index with a perfect matching.
    let mut best = feasible(*values.first()?)?;
    let (mut lo, mut hi) = (0usize, values.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match feasible(values[mid]) {
            Some(m) => {
                best = m;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    let value = best
        .iter()
        .enumerate()
        .map(|(r, &c)| utility[r][c].expect("matched entries are allowed"))
        .fold(f64::INFINITY, f64::min);
    Some((best, value))
}
