use crate::frontend::split_identifier;

/// Length of the longest common subsequence of two token lists.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Sub-token similarity of `x` and `api`, scaled down by the distance `d`.
pub fn sim(x: &str, api: &str, d: usize) -> f64 {
    let xs = split_identifier(x);
    let ys = split_identifier(api);
    sim_tokens(&xs, &ys, d)
}

pub(crate) fn sim_tokens(xs: &[String], ys: &[String], d: usize) -> f64 {
    let total = xs.len() + ys.len();
    if total == 0 {
        return 0.0;
    }
    let d = d.max(1);
    2.0 * lcs_len(xs, ys) as f64 / (d as f64 * total as f64)
}

/// Total similarity of `api` to the tokens along the flow, each paired with
/// its distance to the hole. Capped at 1.
pub fn tosim<'a>(tokens: impl IntoIterator<Item = (&'a str, usize)>, api: &str) -> f64 {
    let ys = split_identifier(api);
    let mut n = 0usize;
    let mut total = 0.0;
    for (x, d) in tokens {
        n += 1;
        total += sim_tokens(&split_identifier(x), &ys, d);
    }
    (total / n.saturating_sub(1).max(1) as f64).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcs_small() {
        assert_eq!(lcs_len(&[1, 2, 3, 4], &[2, 4, 1]), 2);
        assert_eq!(lcs_len::<u8>(&[], &[1]), 0);
    }

    #[test]
    fn tosim_guard_for_single_token() {
        assert_eq!(tosim([("get_adapter", 1)], "get_adapter"), 1.0);
        assert_eq!(tosim([("foo", 1)], "bar_baz"), 0.0);
    }

    #[test]
    fn tosim_single_path() {
        let t = tosim([("pkg_resources", 1), ("entry_point", 1)], "iter_entry_points");
        assert!((t - 0.4).abs() < 1e-12);
    }
}
