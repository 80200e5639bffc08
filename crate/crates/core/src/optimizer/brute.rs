use std::cmp::Reverse;

use super::{DelayPool, DelaySelection, Instance, SelectError};
use crate::physical::{DelayElement, DelayId, Time};
use crate::planner::LeadTarget;

pub const BRUTE_FORCE_MAX_POOL: usize = 20;

/// Reference solver: scores every non-empty subset of the pool.
///
/// Shares only the contract with [`super::select_delays`]; the ordering key
/// is rebuilt here from scratch as a plain tuple.
pub fn brute_force_select(
    original: &[DelayElement],
    pool: &DelayPool,
    target: LeadTarget,
) -> Result<DelaySelection, SelectError> {
    if pool.len() > BRUTE_FORCE_MAX_POOL {
        return Err(SelectError::PoolTooLarge {
            size: pool.len(),
            max: BRUTE_FORCE_MAX_POOL,
        });
    }
    let inst = Instance::new(original, pool, target)?;
    let elems = inst.pool;
    let n = elems.len();

    type Key<'a> = (Reverse<Time>, usize, Vec<Time>, Vec<&'a DelayId>);
    let mut best: Option<(Key<'_>, u32)> = None;
    for mask in 1u32..(1 << n) {
        let members: Vec<&DelayElement> = (0..n)
            .filter(|&b| mask >> b & 1 == 1)
            .map(|b| &elems[b])
            .collect();
        let total: Time = members.iter().map(|e| e.duration()).sum();
        if total > inst.budget {
            continue;
        }
        let mut durations: Vec<Time> = members.iter().map(|e| e.duration()).collect();
        durations.sort();
        let mut ids: Vec<&DelayId> = members.iter().map(|e| e.id()).collect();
        ids.sort();
        let key = (Reverse(total), members.len(), durations, ids);
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, mask));
        }
    }

    let (_, mask) = best.expect("feasible instance has a non-empty selection");
    let mut chosen: Vec<DelayElement> = (0..n)
        .filter(|&b| mask >> b & 1 == 1)
        .map(|b| elems[b].clone())
        .collect();
    chosen.sort_by(|a, b| {
        a.duration()
            .cmp(&b.duration())
            .then_with(|| a.id().cmp(b.id()))
    });
    Ok(inst.selection(chosen, target))
}
