use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::Canonical;

/// 0/1 subset-sum over retained totals `<= budget`, keeping for every
/// reachable total the tie-break-minimal subset that reaches it.
///
/// Items are added in canonical order, so appending an index keeps each
/// subset sorted. Keeping only the per-total minimum is sound because adding
/// the same new element to two subsets preserves their tie-break order.
pub(super) fn solve(canon: &Canonical<'_>, budget: i64) -> Option<Vec<u32>> {
    let mut best: BTreeMap<i64, Vec<u32>> = BTreeMap::new();
    best.insert(0, Vec::new());

    for i in 0..canon.elems.len() as u32 {
        let d = canon.duration(i);
        if d > budget {
            // durations ascend; nothing later fits either
            break;
        }
        let updates: Vec<(i64, Vec<u32>)> = best
            .range(..=budget - d)
            .filter_map(|(&sum, subset)| {
                let next = sum + d;
                let mut candidate = Vec::with_capacity(subset.len() + 1);
                candidate.extend_from_slice(subset);
                candidate.push(i);
                match best.get(&next) {
                    Some(current) if canon.cmp_subsets(&candidate, current) != Ordering::Less => {
                        None
                    }
                    _ => Some((next, candidate)),
                }
            })
            .collect();
        best.extend(updates);
    }

    best.into_iter()
        .next_back()
        .filter(|(sum, _)| *sum > 0)
        .map(|(_, subset)| subset)
}
