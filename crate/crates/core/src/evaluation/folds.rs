use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagnosisLabel;
use crate::rng::stream;

const FOLD_STREAM: u64 = 0xF01D;

/// A k-way partition of sample indices; every fold is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_samples: usize,
    pub round: usize,
    pub seed: u64,
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn test(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Every index outside `fold`, ascending.
    pub fn train(&self, fold: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.folds.iter().map(Vec::len).collect()
    }

    /// Checks disjointness, coverage, non-emptiness and that no group is split.
    pub fn check(&self, groups: &[String]) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("invalid fold plan: {m}")));
        if groups.len() != self.n_samples {
            return bad(format!("{} groups for {} samples", groups.len(), self.n_samples));
        }
        let mut owner = vec![usize::MAX; self.n_samples];
        for (f, fold) in self.folds.iter().enumerate() {
            if fold.is_empty() {
                return bad(format!("fold {f} is empty"));
            }
            for &i in fold {
                if i >= self.n_samples {
                    return bad(format!("index {i} out of range"));
                }
                if owner[i] != usize::MAX {
                    return bad(format!("index {i} in folds {} and {f}", owner[i]));
                }
                owner[i] = f;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return bad(format!("index {i} not covered"));
        }
        let mut group_fold: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, g) in groups.iter().enumerate() {
            let f = *group_fold.entry(g).or_insert(owner[i]);
            if f != owner[i] {
                return bad(format!("group `{g}` split across folds {f} and {}", owner[i]));
            }
        }
        Ok(())
    }
}

/// Participant-grouped, label-stratified k-fold split.
///
/// Groups are shuffled from `(seed, round)`, then stably sorted by size
/// (largest first) and dealt one by one into the fold that is currently
/// smallest; among equally small folds the one holding the fewest samples of
/// the group's majority label wins, then the lowest fold index. With groups
/// of one session this gives sizes that differ by at most one; larger groups
/// make that a best effort. `labels = None` skips stratification.
pub fn make_outer_folds(
    groups: &[String],
    labels: Option<&[DiagnosisLabel]>,
    k: usize,
    round: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if let Some(l) = labels {
        if l.len() != groups.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} samples",
                l.len(),
                groups.len()
            )));
        }
    }
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        members.entry(g).or_default().push(i);
    }
    if k < 2 || members.len() < k {
        return Err(Error::TooFewGroups {
            k,
            groups: members.len(),
        });
    }
    let mut order: Vec<Vec<usize>> = members.into_values().collect();
    order.shuffle(&mut stream(seed, &[FOLD_STREAM, round as u64]));
    order.sort_by_key(|g| std::cmp::Reverse(g.len()));

    let class = |i: usize| match labels {
        Some(l) if l[i] == DiagnosisLabel::Hc => 1,
        _ => 0,
    };
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut per_class = vec![[0usize; 2]; k];
    for group in order {
        let mut counts = [0usize; 2];
        group.iter().for_each(|&i| counts[class(i)] += 1);
        let major = usize::from(counts[1] > counts[0]);
        let f = (0..k)
            .min_by_key(|&f| (folds[f].len(), per_class[f][major], f))
            .expect("k >= 2");
        for &i in &group {
            per_class[f][class(i)] += 1;
        }
        folds[f].extend(group);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldPlan {
        n_samples: groups.len(),
        round,
        seed,
        folds,
    })
}
