//! Delay re-selection for the classical channel.
//!
//! A node's classical path originally runs through `k_i` serial delays. Every
//! delay in the network is assumed reachable from every other one, so the
//! path may be reprogrammed to run through any non-empty subset of a delay
//! pool instead. [`select_delays`] picks the subset whose total is as large
//! as possible while still saving at least the requested lead, i.e. the
//! saving overshoots the target by the least amount.
//!
//! Ties between subsets with the same total are broken by, in order: fewer
//! elements, lexicographically smaller sorted duration list, and
//! lexicographically smaller sorted id list. The order is total, so every
//! instance has exactly one answer.

mod brute;
mod dp;
mod mitm;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physical::{
    total_delay, transit_times, DelayElement, DelayId, MediumProfile, NodeLink, PhysicalError, Time,
};
use crate::planner::LeadTarget;

pub use brute::{brute_force_select, BRUTE_FORCE_MAX_POOL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectError {
    #[error("original delay list is empty")]
    EmptyOriginal,
    #[error("delay pool is empty")]
    EmptyPool,
    #[error("delay id `{0}` appears more than once in the pool")]
    DuplicateDelayId(DelayId),
    #[error("delay id `{0}` has conflicting durations across links")]
    ConflictingDelay(DelayId),
    #[error(
        "no selection can save the requested lead: smallest pool delay {min_delay} exceeds the retainable budget {budget}"
    )]
    Infeasible { min_delay: Time, budget: Time },
    #[error("pool of {size} elements exceeds the exhaustive-search limit of {max}")]
    PoolTooLarge { size: usize, max: usize },
    #[error("dynamic-programming table of {cells} cells exceeds the ceiling and the pool of {size} is too large for meet-in-the-middle")]
    CapacityExceeded { cells: u128, size: usize },
    #[error("selection was made for an original delay total of {selection}, link has {link}")]
    SelectionMismatch { selection: Time, link: Time },
    #[error(transparent)]
    Physical(#[from] PhysicalError),
}

/// The global set of delay elements a path may be routed through.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DelayElement>", into = "Vec<DelayElement>")]
pub struct DelayPool {
    elements: Vec<DelayElement>,
}

impl DelayPool {
    pub fn new(elements: Vec<DelayElement>) -> Result<Self, SelectError> {
        let mut seen = HashMap::with_capacity(elements.len());
        for e in &elements {
            if seen.insert(e.id(), ()).is_some() {
                return Err(SelectError::DuplicateDelayId(e.id().clone()));
            }
        }
        Ok(DelayPool { elements })
    }

    /// Union of every link's delays. The same element may sit on several
    /// paths; it is listed once.
    pub fn union_of<'a, I>(links: I) -> Result<Self, SelectError>
    where
        I: IntoIterator<Item = &'a NodeLink>,
    {
        let mut by_id: HashMap<&DelayId, Time> = HashMap::new();
        let mut elements = Vec::new();
        for link in links {
            for d in link.delays() {
                match by_id.get(d.id()) {
                    Some(&dur) if dur != d.duration() => {
                        return Err(SelectError::ConflictingDelay(d.id().clone()))
                    }
                    Some(_) => {}
                    None => {
                        by_id.insert(d.id(), d.duration());
                        elements.push(d.clone());
                    }
                }
            }
        }
        Ok(DelayPool { elements })
    }

    pub fn elements(&self) -> &[DelayElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl TryFrom<Vec<DelayElement>> for DelayPool {
    type Error = SelectError;
    fn try_from(v: Vec<DelayElement>) -> Result<Self, Self::Error> {
        DelayPool::new(v)
    }
}

impl From<DelayPool> for Vec<DelayElement> {
    fn from(p: DelayPool) -> Self {
        p.elements
    }
}

/// An optimal set of retained delays for one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySelection {
    /// Chosen elements, ordered by (duration, id).
    pub chosen: Vec<DelayElement>,
    #[serde(rename = "original_total_ps")]
    pub original_total: Time,
    #[serde(rename = "retained_total_ps")]
    pub retained_total: Time,
    #[serde(rename = "saving_ps")]
    pub saving: Time,
    #[serde(rename = "slack_ps")]
    pub slack: Time,
}

impl DelaySelection {
    pub fn chosen_ids(&self) -> Vec<&DelayId> {
        self.chosen.iter().map(DelayElement::id).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectOptions {
    /// Largest `(budget + 1) * |pool|` handled by dynamic programming.
    pub dp_cell_ceiling: u128,
    /// Largest pool handed to meet-in-the-middle once the ceiling is hit.
    pub mitm_max_pool: usize,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            dp_cell_ceiling: 1_000_000_000,
            mitm_max_pool: 40,
        }
    }
}

/// Validated instance shared by all three solvers.
pub(crate) struct Instance<'a> {
    pub original_total: Time,
    /// Largest retained total that still saves the lead; may be negative.
    pub budget: Time,
    pub pool: &'a [DelayElement],
}

impl<'a> Instance<'a> {
    pub fn new(
        original: &[DelayElement],
        pool: &'a DelayPool,
        target: LeadTarget,
    ) -> Result<Self, SelectError> {
        if original.is_empty() {
            return Err(SelectError::EmptyOriginal);
        }
        if pool.is_empty() {
            return Err(SelectError::EmptyPool);
        }
        let original_total = total_delay(original)?;
        let budget = original_total
            .checked_sub(target.lead())
            .ok_or(PhysicalError::Overflow)?;
        let min_delay = pool
            .elements()
            .iter()
            .map(DelayElement::duration)
            .min()
            .expect("pool is non-empty");
        if min_delay > budget {
            return Err(SelectError::Infeasible { min_delay, budget });
        }
        Ok(Instance {
            original_total,
            budget,
            pool: pool.elements(),
        })
    }

    pub fn selection(&self, chosen: Vec<DelayElement>, target: LeadTarget) -> DelaySelection {
        let retained_total: Time = chosen.iter().map(DelayElement::duration).sum();
        let saving = self.original_total - retained_total;
        DelaySelection {
            chosen,
            original_total: self.original_total,
            retained_total,
            saving,
            slack: saving - target.lead(),
        }
    }
}

/// Pool sorted by (duration, id) with each element's rank in id order.
/// Subsets are sorted index lists into `elems`, so the sorted duration list
/// of a subset is just its elements in index order.
pub(crate) struct Canonical<'a> {
    pub elems: Vec<&'a DelayElement>,
    id_rank: Vec<u32>,
}

impl<'a> Canonical<'a> {
    pub fn new(pool: &'a [DelayElement]) -> Self {
        let mut elems: Vec<&DelayElement> = pool.iter().collect();
        elems.sort_by(|a, b| {
            a.duration()
                .cmp(&b.duration())
                .then_with(|| a.id().cmp(b.id()))
        });
        let mut by_id: Vec<usize> = (0..elems.len()).collect();
        by_id.sort_by(|&a, &b| elems[a].id().cmp(elems[b].id()));
        let mut id_rank = vec![0; elems.len()];
        for (rank, idx) in by_id.into_iter().enumerate() {
            id_rank[idx] = rank as u32;
        }
        Canonical { elems, id_rank }
    }

    pub fn duration(&self, i: u32) -> i64 {
        self.elems[i as usize].duration().as_ps()
    }

    /// Tie-break order between two subsets with the same total.
    pub fn cmp_subsets(&self, a: &[u32], b: &[u32]) -> Ordering {
        a.len()
            .cmp(&b.len())
            .then_with(|| {
                a.iter()
                    .map(|&i| self.duration(i))
                    .cmp(b.iter().map(|&i| self.duration(i)))
            })
            .then_with(|| {
                let mut ra: Vec<u32> = a.iter().map(|&i| self.id_rank[i as usize]).collect();
                let mut rb: Vec<u32> = b.iter().map(|&i| self.id_rank[i as usize]).collect();
                ra.sort_unstable();
                rb.sort_unstable();
                ra.cmp(&rb)
            })
    }

    pub fn materialize(&self, subset: &[u32]) -> Vec<DelayElement> {
        subset
            .iter()
            .map(|&i| self.elems[i as usize].clone())
            .collect()
    }
}

/// Optimal retained delays with the default solver options.
pub fn select_delays(
    original: &[DelayElement],
    pool: &DelayPool,
    target: LeadTarget,
) -> Result<DelaySelection, SelectError> {
    select_delays_with(original, pool, target, &SelectOptions::default())
}

/// Exact solver: sparse dynamic programming over retained totals, switching
/// to meet-in-the-middle when the table would exceed the configured ceiling.
pub fn select_delays_with(
    original: &[DelayElement],
    pool: &DelayPool,
    target: LeadTarget,
    opts: &SelectOptions,
) -> Result<DelaySelection, SelectError> {
    let inst = Instance::new(original, pool, target)?;
    let canon = Canonical::new(inst.pool);
    let budget = inst.budget.as_ps();
    let cells = (budget as u128 + 1) * canon.elems.len() as u128;
    let best = if cells <= opts.dp_cell_ceiling {
        dp::solve(&canon, budget)
    } else if canon.elems.len() <= opts.mitm_max_pool {
        mitm::solve(&canon, budget)
    } else {
        return Err(SelectError::CapacityExceeded {
            cells,
            size: canon.elems.len(),
        });
    };
    // Instance::new already ruled out the infeasible case.
    let subset = best.expect("feasible instance has a non-empty selection");
    Ok(inst.selection(canon.materialize(&subset), target))
}

/// Cable length is unchanged; the classical transit now carries only the
/// retained delays. Returns `(new classical transit, quantum - classical)`.
pub fn apply_selection(
    link: &NodeLink,
    selection: &DelaySelection,
    medium: &MediumProfile,
) -> Result<(Time, Time), SelectError> {
    let link_total = link.total_delay();
    if link_total != selection.original_total {
        return Err(SelectError::SelectionMismatch {
            selection: selection.original_total,
            link: link_total,
        });
    }
    let tt = transit_times(link, medium)?;
    let fiber = tt.classical - link_total;
    let new_classical = fiber
        .checked_add(selection.retained_total)
        .ok_or(PhysicalError::Overflow)?;
    Ok((new_classical, tt.quantum - new_classical))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::{Length, NodeId, RefractiveIndex};

    fn d(id: &str, us: i64) -> DelayElement {
        DelayElement::new(DelayId::new(id), Time::from_us(us)).unwrap()
    }

    fn lead_us(us: i64) -> LeadTarget {
        LeadTarget::new(Time::from_us(us)).unwrap()
    }

    fn worked() -> (Vec<DelayElement>, DelayPool) {
        let original = vec![d("o3", 3), d("o5", 5), d("o7", 7)];
        let pool = DelayPool::new(vec![
            d("p1", 1),
            d("p2", 2),
            d("p3", 3),
            d("p5", 5),
            d("p7", 7),
        ])
        .unwrap();
        (original, pool)
    }

    fn ids(sel: &DelaySelection) -> Vec<&str> {
        sel.chosen.iter().map(|e| e.id().as_str()).collect()
    }

    #[test]
    fn worked_instance() {
        let (original, pool) = worked();
        let sel = select_delays(&original, &pool, lead_us(6)).unwrap();
        assert_eq!(ids(&sel), ["p2", "p7"]);
        assert_eq!(sel.retained_total, Time::from_us(9));
        assert_eq!(sel.saving, Time::from_us(6));
        assert_eq!(sel.slack, Time::ZERO);
    }

    #[test]
    fn worked_instance_all_solvers_agree() {
        let (original, pool) = worked();
        let forced_mitm = SelectOptions {
            dp_cell_ceiling: 0,
            ..Default::default()
        };
        let a = select_delays(&original, &pool, lead_us(6)).unwrap();
        let b = select_delays_with(&original, &pool, lead_us(6), &forced_mitm).unwrap();
        let c = brute_force_select(&original, &pool, lead_us(6)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn zero_lead_retains_everything() {
        let sel = select_delays(
            &[d("a", 5)],
            &DelayPool::new(vec![d("a", 5)]).unwrap(),
            lead_us(0),
        )
        .unwrap();
        assert_eq!(ids(&sel), ["a"]);
        assert_eq!(sel.saving, Time::ZERO);
        assert_eq!(sel.slack, Time::ZERO);
    }

    #[test]
    fn lead_equal_to_total_is_infeasible() {
        let (original, pool) = worked();
        assert!(matches!(
            select_delays(&original, &pool, lead_us(15)),
            Err(SelectError::Infeasible { .. })
        ));
    }

    #[test]
    fn equal_durations_break_ties_by_id() {
        let pool = DelayPool::new(vec![d("b", 2), d("a", 2)]).unwrap();
        let sel = select_delays(&[d("x", 2)], &pool, lead_us(0)).unwrap();
        assert_eq!(ids(&sel), ["a"]);
    }

    #[test]
    fn fewer_elements_win_ties() {
        // {4} and {1,3} both retain 4 us
        let pool = DelayPool::new(vec![d("a", 1), d("b", 3), d("c", 4)]).unwrap();
        let sel = select_delays(&[d("x", 10)], &pool, lead_us(6)).unwrap();
        assert_eq!(ids(&sel), ["c"]);
        // {1,4} and {2,3}: same count, durations decide
        let pool = DelayPool::new(vec![d("a", 2), d("b", 3), d("c", 1), d("e", 4)]).unwrap();
        let sel = select_delays(&[d("x", 5)], &pool, lead_us(0)).unwrap();
        assert_eq!(ids(&sel), ["c", "e"]);
    }

    #[test]
    fn worked_pool_saves_exactly_five() {
        // {3,7} retains the full 10 us budget, so there is no slack
        let (original, pool) = worked();
        let sel = select_delays(&original, &pool, lead_us(5)).unwrap();
        assert_eq!(ids(&sel), ["p3", "p7"]);
        assert_eq!(sel.slack, Time::ZERO);
        assert_eq!(
            brute_force_select(&original, &pool, lead_us(5)).unwrap(),
            sel
        );
    }

    #[test]
    fn slack_when_exact_saving_is_impossible() {
        let original = vec![d("o3", 3), d("o5", 5), d("o7", 7)];
        let pool = DelayPool::new(vec![d("p3", 3), d("p9", 9)]).unwrap();
        let sel = select_delays(&original, &pool, lead_us(5)).unwrap();
        // retainable budget 10: best is 9
        assert_eq!(ids(&sel), ["p9"]);
        assert_eq!(sel.saving, Time::from_us(6));
        assert_eq!(sel.slack, Time::from_us(1));
    }

    #[test]
    fn precondition_errors() {
        let (original, pool) = worked();
        assert_eq!(
            select_delays(&[], &pool, lead_us(0)),
            Err(SelectError::EmptyOriginal)
        );
        let empty = DelayPool::new(vec![]).unwrap();
        assert_eq!(
            select_delays(&original, &empty, lead_us(0)),
            Err(SelectError::EmptyPool)
        );
        assert!(matches!(
            DelayPool::new(vec![d("a", 1), d("a", 2)]),
            Err(SelectError::DuplicateDelayId(_))
        ));
    }

    #[test]
    fn capacity_guard() {
        let (original, pool) = worked();
        let opts = SelectOptions {
            dp_cell_ceiling: 0,
            mitm_max_pool: 2,
        };
        assert!(matches!(
            select_delays_with(&original, &pool, lead_us(6), &opts),
            Err(SelectError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn union_pool_dedups_shared_elements() {
        let m =
            MediumProfile::new(300_000_000, RefractiveIndex::from_ratio(5, 4).unwrap()).unwrap();
        let a = NodeLink::synchronized(
            NodeId::new("a"),
            Time::from_us(20),
            vec![d("s", 1), d("x", 2)],
            &m,
        )
        .unwrap();
        let b = NodeLink::synchronized(
            NodeId::new("b"),
            Time::from_us(20),
            vec![d("s", 1), d("y", 3)],
            &m,
        )
        .unwrap();
        let pool = DelayPool::union_of([&a, &b]).unwrap();
        let ids: Vec<&str> = pool.elements().iter().map(|e| e.id().as_str()).collect();
        assert_eq!(ids, ["s", "x", "y"]);

        let c = NodeLink::synchronized(NodeId::new("c"), Time::from_us(20), vec![d("s", 4)], &m)
            .unwrap();
        assert!(matches!(
            DelayPool::union_of([&a, &c]),
            Err(SelectError::ConflictingDelay(_))
        ));
    }

    #[test]
    fn apply_selection_examples() {
        let m =
            MediumProfile::new(300_000_000, RefractiveIndex::from_ratio(5, 4).unwrap()).unwrap();
        let (original, pool) = worked();
        let link =
            NodeLink::synchronized(NodeId::new("i"), Time::from_us(20), original.clone(), &m)
                .unwrap();
        assert_eq!(link.classical_length(), Length::from_m(1000));

        let sel = select_delays(&original, &pool, lead_us(6)).unwrap();
        let (t_c, gap) = apply_selection(&link, &sel, &m).unwrap();
        assert_eq!(t_c, Time::from_us(14));
        assert_eq!(gap, Time::from_us(6));

        let keep_all = select_delays(
            &original,
            &DelayPool::new(original.clone()).unwrap(),
            lead_us(0),
        )
        .unwrap();
        assert_eq!(apply_selection(&link, &keep_all, &m).unwrap().1, Time::ZERO);

        let other =
            NodeLink::synchronized(NodeId::new("j"), Time::from_us(20), vec![d("z", 1)], &m)
                .unwrap();
        assert!(matches!(
            apply_selection(&other, &sel, &m),
            Err(SelectError::SelectionMismatch { .. })
        ));
    }
}
