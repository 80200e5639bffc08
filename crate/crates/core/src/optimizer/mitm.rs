use std::cmp::Ordering;

use super::Canonical;

fn subset_of(mask: u64) -> Vec<u32> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// All subsets of the canonical indices `offset..offset + n` as `(sum, mask)`.
fn enumerate(canon: &Canonical<'_>, offset: u32, n: u32) -> Vec<(i64, u64)> {
    let mut out = Vec::with_capacity(1 << n);
    out.push((0, 0));
    for j in 0..n {
        let idx = offset + j;
        let d = canon.duration(idx);
        let bit = 1u64 << idx;
        for k in 0..out.len() {
            let (s, m) = out[k];
            out.push((s + d, m | bit));
        }
    }
    out
}

/// Meet-in-the-middle for pools too wide for the DP table (at most 64
/// elements, in practice capped well below that by the caller).
pub(super) fn solve(canon: &Canonical<'_>, budget: i64) -> Option<Vec<u32>> {
    let n = canon.elems.len() as u32;
    assert!(n <= 64, "meet-in-the-middle supports at most 64 elements");
    let half = n / 2;
    let left = enumerate(canon, 0, half);
    let mut right = enumerate(canon, half, n - half);

    // best right-half subset per distinct total
    right.sort_by_key(|&(s, _)| s);
    let mut by_sum: Vec<(i64, u64)> = Vec::new();
    for (s, m) in right {
        match by_sum.last_mut() {
            Some(last) if last.0 == s => {
                if canon.cmp_subsets(&subset_of(m), &subset_of(last.1)) == Ordering::Less {
                    last.1 = m;
                }
            }
            _ => by_sum.push((s, m)),
        }
    }

    // largest reachable total within budget, excluding the empty selection
    let mut target = 0i64;
    for &(sl, _) in &left {
        if sl > budget {
            continue;
        }
        let pos = by_sum.partition_point(|&(s, _)| s <= budget - sl);
        let total = sl + by_sum[pos - 1].0;
        target = target.max(total);
    }
    if target == 0 {
        return None;
    }

    let mut best: Option<Vec<u32>> = None;
    for &(sl, ml) in &left {
        if sl > target {
            continue;
        }
        let Ok(pos) = by_sum.binary_search_by_key(&(target - sl), |&(s, _)| s) else {
            continue;
        };
        let candidate = subset_of(ml | by_sum[pos].1);
        let better = match &best {
            Some(b) => canon.cmp_subsets(&candidate, b) == Ordering::Less,
            None => true,
        };
        if better {
            best = Some(candidate);
        }
    }
    best
}
