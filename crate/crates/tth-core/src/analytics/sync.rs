//! Synchronized topics: groups of newspapers (or any partition) whose top-k
//! term sets coincide on the same day.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::PartitionedTth;
use crate::error::{Result, TthError};
use crate::grid::Interval;
use crate::vocab::TermId;

/// Synchronized groups for one day: each group lists at least two partition
/// keys sharing the same top-k term set (or, under the Jaccard relaxation,
/// forming a connected component of pairs at or above the threshold).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncDay {
    pub interval: Interval,
    pub groups: Vec<Vec<Vec<String>>>,
}

/// A partition key with its top-k term set for one day.
type KeyedSet = (Vec<String>, BTreeSet<TermId>);

/// Per day, compute each partition's top-k term set (count descending, ties
/// by term id, cut at exactly k) and report maximal groups of size >= 2 with
/// identical sets. `jaccard`, when given, relaxes set equality to a Jaccard
/// similarity threshold and groups connected components.
pub fn synchronized_topics(
    parts: &PartitionedTth,
    k: usize,
    jaccard: Option<f64>,
) -> Result<Vec<SyncDay>> {
    if k == 0 {
        return Err(TthError::Argument("top-k needs k >= 1".into()));
    }
    if parts.len() < 2 {
        return Ok(Vec::new());
    }

    // (interval, part key) -> top-k term set.
    let mut per_day: BTreeMap<Interval, Vec<KeyedSet>> = BTreeMap::new();
    for (key, tth) in &parts.parts {
        let mut by_interval: BTreeMap<Interval, BTreeMap<TermId, u64>> = BTreeMap::new();
        for (row_key, data) in tth.iter() {
            *by_interval
                .entry(row_key.interval)
                .or_default()
                .entry(row_key.term)
                .or_insert(0) += data.count;
        }
        for (interval, counts) in by_interval {
            let mut entries: Vec<(TermId, u64)> = counts.into_iter().collect();
            entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let set: BTreeSet<TermId> = entries.into_iter().take(k).map(|(t, _)| t).collect();
            per_day.entry(interval).or_default().push((key.clone(), set));
        }
    }

    let mut out = Vec::new();
    for (interval, sets) in per_day {
        let groups = match jaccard {
            None => exact_groups(&sets),
            Some(threshold) => jaccard_components(&sets, threshold),
        };
        if !groups.is_empty() {
            out.push(SyncDay { interval, groups });
        }
    }
    Ok(out)
}

fn exact_groups(sets: &[KeyedSet]) -> Vec<Vec<Vec<String>>> {
    let mut by_set: BTreeMap<Vec<TermId>, Vec<Vec<String>>> = BTreeMap::new();
    for (key, set) in sets {
        by_set
            .entry(set.iter().copied().collect())
            .or_default()
            .push(key.clone());
    }
    let mut groups: Vec<Vec<Vec<String>>> = by_set
        .into_values()
        .filter(|members| members.len() >= 2)
        .collect();
    for g in &mut groups {
        g.sort();
    }
    groups.sort();
    groups
}

fn jaccard_components(sets: &[KeyedSet], threshold: f64) -> Vec<Vec<Vec<String>>> {
    let n = sets.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            let inter = sets[i].1.intersection(&sets[j].1).count() as f64;
            let union = sets[i].1.union(&sets[j].1).count() as f64;
            let sim = if union == 0.0 { 0.0 } else { inter / union };
            if sim >= threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut components: BTreeMap<usize, Vec<Vec<String>>> = BTreeMap::new();
    for (i, (key, _)) in sets.iter().enumerate() {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(key.clone());
    }
    let mut groups: Vec<Vec<Vec<String>>> = components
        .into_values()
        .filter(|members| members.len() >= 2)
        .collect();
    for g in &mut groups {
        g.sort();
    }
    groups.sort();
    groups
}
