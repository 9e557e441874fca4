//! Click models: how click probabilities for a ranking are assembled from
//! per-item attraction and position-dependent examination.
//!
//! Per impression, a click on an item is modeled as examination followed by
//! attraction. The cascade model derives examination from the clicks
//! estimated for the positions above; the position-based model reads it from
//! a fixed per-rank table. Attraction is estimated per item as clicks per
//! examination, which keeps the estimate valid no matter which ranking the
//! clicks came from.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{Estimate, ExperimentState, ImpressionRecord, ItemId, ItemStats, Ranking};

/// Examination structure assumed by the estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum ClickModelKind {
    /// Top-down scan that stops at the first click.
    Cascade,
    /// Fixed examination probability per rank, independent of clicks above.
    /// `position_probs[k]` is the probability that rank `k + 1` is examined;
    /// ranks beyond the table are never examined.
    PositionBased { position_probs: Vec<f64> },
}

impl ClickModelKind {
    /// Checks the examination table. Out-of-range entries are an error; a
    /// non-monotone table is legal but suspicious, so it is reported as a
    /// warning for the caller to surface.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if let ClickModelKind::PositionBased { position_probs } = self {
            if position_probs.is_empty() {
                return Err(Error::InvalidValue(
                    "position-based click model needs at least one examination probability".into(),
                ));
            }
            for (k, &p) in position_probs.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidValue(format!(
                        "examination probability {p} at rank {} is outside [0, 1]",
                        k + 1
                    )));
                }
            }
            if position_probs.windows(2).any(|w| w[1] > w[0]) {
                warnings.push(
                    "position-based examination probabilities are not non-increasing".to_string(),
                );
            }
        }
        Ok(warnings)
    }

    /// Examination probability of rank `k + 1` under the position table.
    fn position_prob(&self, k: usize) -> f64 {
        match self {
            ClickModelKind::Cascade => 1.0,
            ClickModelKind::PositionBased { position_probs } => {
                position_probs.get(k).copied().unwrap_or(0.0)
            }
        }
    }
}

/// Estimated attraction probability for one item: clicks per examination,
/// clamped into [0, 1]. With no examinations yet, returns `prior` flagged as
/// a cold start so callers can route such items through variance prediction
/// instead of inventing optimism here.
pub fn estimate_attraction(stats: &ItemStats, prior: f64) -> Estimate {
    if stats.n_exam == 0 {
        return Estimate::cold(prior);
    }
    let raw = stats.n_click as f64 / stats.n_exam as f64;
    Estimate::warm(raw.clamp(0.0, 1.0))
}

/// Examination probability per position of `ranking`, given estimated
/// attraction per item. Under the cascade model position 1 is always
/// examined and each later position is reached only if no click happened
/// above, so its probability is the running product of the estimated
/// no-click probabilities.
pub fn examination_probs(
    ranking: &Ranking,
    attraction: &BTreeMap<ItemId, f64>,
    kind: &ClickModelKind,
) -> Result<Vec<f64>> {
    let mut probs = Vec::with_capacity(ranking.depth());
    match kind {
        ClickModelKind::Cascade => {
            let mut exam = 1.0;
            for &item in ranking.items() {
                probs.push(exam);
                let a = attraction_of(item, attraction)?;
                let click = exam * a;
                exam *= 1.0 - click;
            }
        }
        ClickModelKind::PositionBased { .. } => {
            for (k, &item) in ranking.items().iter().enumerate() {
                attraction_of(item, attraction)?;
                probs.push(kind.position_prob(k));
            }
        }
    }
    Ok(probs)
}

/// Click probability per position: examination times attraction.
pub fn click_probs(
    ranking: &Ranking,
    attraction: &BTreeMap<ItemId, f64>,
    kind: &ClickModelKind,
) -> Result<Vec<f64>> {
    let exams = examination_probs(ranking, attraction, kind)?;
    ranking
        .items()
        .iter()
        .zip(exams)
        .map(|(&item, exam)| Ok(exam * attraction_of(item, attraction)?))
        .collect()
}

fn attraction_of(item: ItemId, attraction: &BTreeMap<ItemId, f64>) -> Result<f64> {
    let a = attraction.get(&item).copied().ok_or(Error::UnknownItem(item))?;
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidValue(format!(
            "attraction {a} for item {item} is outside [0, 1]"
        )));
    }
    Ok(a)
}

/// Credits examinations to items after an impression. A user who clicked is
/// assumed to have examined everything from the top down to the last click;
/// a user who left without clicking is assumed to have scanned the whole
/// list. Positions below the last click are left uncredited because there is
/// no evidence the user saw them.
pub fn update_examination_counts(state: &mut ExperimentState, record: &ImpressionRecord) {
    let examined_through = match record.last_click_position() {
        Some(last) => last,
        None => record.ranking().depth().saturating_sub(1),
    };
    for &item in record.ranking().items().iter().take(examined_through + 1) {
        state.item_mut(item).n_exam += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::RankingSet;

    fn ranking(ids: &[u64]) -> Ranking {
        Ranking::new(ids.iter().map(|&i| ItemId(i)).collect()).unwrap()
    }

    fn attraction_map(pairs: &[(u64, f64)]) -> BTreeMap<ItemId, f64> {
        pairs.iter().map(|&(id, a)| (ItemId(id), a)).collect()
    }

    #[test]
    fn attraction_is_clicks_per_examination() {
        let stats = ItemStats { n_exam: 10, n_click: 3, ..Default::default() };
        let est = estimate_attraction(&stats, 0.0);
        assert_eq!(est.value, 0.3);
        assert!(!est.cold_start);
    }

    #[test]
    fn attraction_cold_start_returns_prior() {
        let est = estimate_attraction(&ItemStats::default(), 0.0);
        assert_eq!(est.value, 0.0);
        assert!(est.cold_start);
    }

    #[test]
    fn attraction_is_clamped() {
        // More clicks than credited examinations can only come from counters
        // updated outside the usual flow; the estimate still stays a
        // probability.
        let stats = ItemStats { n_exam: 2, n_click: 5, ..Default::default() };
        assert_eq!(estimate_attraction(&stats, 0.0).value, 1.0);
    }

    #[test]
    fn cascade_examination_decays_with_estimated_clicks() {
        let attraction = attraction_map(&[(1, 0.5), (2, 0.5), (3, 0.5)]);
        let exams =
            examination_probs(&ranking(&[1, 2, 3]), &attraction, &ClickModelKind::Cascade)
                .unwrap();
        // Position 3 is reached only when neither of the two estimated
        // clicks above happened: (1 - 0.5) * (1 - 0.25).
        assert_eq!(exams, vec![1.0, 0.5, 0.375]);
    }

    #[test]
    fn cascade_click_probs_chain() {
        let attraction = attraction_map(&[(1, 0.5), (2, 0.5)]);
        let clicks =
            click_probs(&ranking(&[1, 2]), &attraction, &ClickModelKind::Cascade).unwrap();
        assert_eq!(clicks, vec![0.5, 0.25]);
    }

    #[test]
    fn position_based_reads_the_table() {
        let kind = ClickModelKind::PositionBased { position_probs: vec![1.0, 0.4] };
        let attraction = attraction_map(&[(1, 0.5), (2, 0.5), (3, 0.5)]);
        let exams = examination_probs(&ranking(&[1, 2, 3]), &attraction, &kind).unwrap();
        // Rank 3 is past the table and counts as never examined.
        assert_eq!(exams, vec![1.0, 0.4, 0.0]);
    }

    #[test]
    fn unknown_item_is_an_error() {
        let attraction = attraction_map(&[(1, 0.5)]);
        let err = examination_probs(&ranking(&[1, 2]), &attraction, &ClickModelKind::Cascade)
            .unwrap_err();
        assert!(matches!(err, Error::UnknownItem(ItemId(2))));
    }

    #[test]
    fn validate_flags_bad_tables() {
        let out_of_range = ClickModelKind::PositionBased { position_probs: vec![0.5, 1.2] };
        assert!(out_of_range.validate().is_err());

        let increasing = ClickModelKind::PositionBased { position_probs: vec![0.2, 0.8] };
        let warnings = increasing.validate().unwrap();
        assert_eq!(warnings.len(), 1);

        assert!(ClickModelKind::Cascade.validate().unwrap().is_empty());
    }

    fn state_after(clicks: Vec<bool>, post: Vec<Option<f64>>) -> ExperimentState {
        let set = RankingSet::new(vec![ranking(&[1, 2, 3]), ranking(&[3, 2, 1])]).unwrap();
        let mut state = ExperimentState::new(&set);
        let rec = ImpressionRecord::new(ranking(&[1, 2, 3]), clicks, post).unwrap();
        update_examination_counts(&mut state, &rec);
        state
    }

    #[test]
    fn examination_credited_down_to_last_click() {
        let state = state_after(vec![false, true, false], vec![None, Some(1.0), None]);
        assert_eq!(state.item(ItemId(1)).n_exam, 1);
        assert_eq!(state.item(ItemId(2)).n_exam, 1);
        assert_eq!(state.item(ItemId(3)).n_exam, 0);
    }

    #[test]
    fn no_click_credits_every_position() {
        let state = state_after(vec![false, false, false], vec![None, None, None]);
        for id in [1, 2, 3] {
            assert_eq!(state.item(ItemId(id)).n_exam, 1, "item {id}");
        }
    }

    #[test]
    fn multiple_clicks_credit_through_the_last_one() {
        let state =
            state_after(vec![true, false, true], vec![Some(1.0), None, Some(2.0)]);
        for id in [1, 2, 3] {
            assert_eq!(state.item(ItemId(id)).n_exam, 1, "item {id}");
        }
    }
}
