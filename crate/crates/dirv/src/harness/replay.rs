//! Logged-impression datasets for replay experiments.
//!
//! A replay file is tab-separated. Header lines declare each query's input
//! rankings:
//!
//! ```text
//! #input_ranking<TAB>query_id<TAB>comma-separated item ids
//! ```
//!
//! Every other line is one logged impression of some ranking:
//!
//! ```text
//! query_id<TAB>comma-separated item ids<TAB>comma-separated 0/1 clicks<TAB>comma-separated post-click values ("-" where there was no click)
//! ```
//!
//! Impressions of the same ranking form a queue in file order; replay
//! consumes them from the front.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{ImpressionRecord, ItemId, Ranking, RankingSet};

/// All logged data for one query: its input rankings and a queue of logged
/// impressions per distinct presented ranking.
#[derive(Debug, Clone)]
pub struct ReplayQuery {
    pub query_id: String,
    pub input_rankings: RankingSet,
    pub pool: BTreeMap<Ranking, Vec<ImpressionRecord>>,
}

/// Parses a replay file into per-query datasets, in order of first
/// appearance.
pub fn load_replay_file(path: &Path) -> Result<Vec<ReplayQuery>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut input_rankings: BTreeMap<String, Vec<Ranking>> = BTreeMap::new();
    let mut pools: BTreeMap<String, BTreeMap<Ranking, Vec<ImpressionRecord>>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::data(path, format!("line {}: {message}", lineno + 1));
        if let Some(rest) = line.strip_prefix("#input_ranking\t") {
            let mut fields = rest.split('\t');
            let query = fields
                .next()
                .filter(|q| !q.is_empty())
                .ok_or_else(|| bad("missing query id".into()))?;
            let items = fields
                .next()
                .ok_or_else(|| bad("missing item list".into()))?;
            if fields.next().is_some() {
                return Err(bad("too many fields in input-ranking header".into()));
            }
            let ranking = parse_ranking(items).map_err(&bad)?;
            if !order.contains(&query.to_string()) {
                order.push(query.to_string());
            }
            input_rankings.entry(query.to_string()).or_default().push(ranking);
            continue;
        }
        if line.starts_with('#') {
            continue; // plain comment
        }

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 tab-separated fields, got {}", fields.len())));
        }
        let query = fields[0];
        let ranking = parse_ranking(fields[1]).map_err(&bad)?;
        let clicks: Vec<bool> = fields[2]
            .split(',')
            .map(|c| match c.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(bad(format!("click flag must be 0 or 1, got {other:?}"))),
            })
            .collect::<Result<_>>()?;
        let post: Vec<Option<f64>> = fields[3]
            .split(',')
            .map(|v| match v.trim() {
                "-" => Ok(None),
                value => value
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| bad(format!("bad post-click value {value:?}"))),
            })
            .collect::<Result<_>>()?;
        let record = ImpressionRecord::new(ranking.clone(), clicks, post)
            .map_err(|e| bad(e.to_string()))?;
        if !order.contains(&query.to_string()) {
            order.push(query.to_string());
        }
        pools
            .entry(query.to_string())
            .or_default()
            .entry(ranking)
            .or_default()
            .push(record);
    }

    let mut queries = Vec::with_capacity(order.len());
    for query_id in order {
        let rankings = input_rankings.remove(&query_id).unwrap_or_default();
        if rankings.len() < 2 {
            return Err(Error::data(
                path,
                format!(
                    "query {query_id:?} declares {} input rankings; at least 2 are needed",
                    rankings.len()
                ),
            ));
        }
        let set = RankingSet::new(rankings)?;
        let pool = pools.remove(&query_id).unwrap_or_default();
        if pool.is_empty() {
            return Err(Error::data(path, format!("query {query_id:?} has no logged impressions")));
        }
        for ranking in pool.keys() {
            for &item in ranking.items() {
                if !set.universe().contains(&item) {
                    return Err(Error::data(
                        path,
                        format!(
                            "query {query_id:?}: logged ranking contains item {item}, which \
                             appears in none of its input rankings"
                        ),
                    ));
                }
            }
        }
        queries.push(ReplayQuery { query_id, input_rankings: set, pool });
    }
    Ok(queries)
}

fn parse_ranking(field: &str) -> std::result::Result<Ranking, String> {
    let items: Vec<ItemId> = field
        .split(',')
        .map(|id| {
            id.trim()
                .parse::<u64>()
                .map(ItemId)
                .map_err(|_| format!("bad item id {id:?}"))
        })
        .collect::<std::result::Result<_, _>>()?;
    Ranking::new(items).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pool.tsv");
        fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_queries_headers_and_queues() {
        let (_dir, path) = write(
            "#input_ranking\tq1\t1,2,3\n\
             #input_ranking\tq1\t3,2,1\n\
             q1\t1,2,3\t0,1,0\t-,5.5,-\n\
             q1\t1,2,3\t0,0,0\t-,-,-\n\
             q1\t2,1,3\t1,0,0\t2.0,-,-\n",
        );
        let queries = load_replay_file(&path).unwrap();
        assert_eq!(queries.len(), 1);
        let q = &queries[0];
        assert_eq!(q.query_id, "q1");
        assert_eq!(q.input_rankings.len(), 2);
        assert_eq!(q.pool.len(), 2);
        let queue = q
            .pool
            .get(&Ranking::new(vec![ItemId(1), ItemId(2), ItemId(3)]).unwrap())
            .unwrap();
        assert_eq!(queue.len(), 2);
        assert_eq!(queue[0].post_click()[1], Some(5.5));
    }

    #[test]
    fn keeps_queries_in_first_appearance_order() {
        let (_dir, path) = write(
            "#input_ranking\tb\t1,2\n#input_ranking\tb\t2,1\n\
             #input_ranking\ta\t5,6\n#input_ranking\ta\t6,5\n\
             b\t1,2\t0,0\t-,-\n\
             a\t5,6\t0,0\t-,-\n",
        );
        let queries = load_replay_file(&path).unwrap();
        let ids: Vec<&str> = queries.iter().map(|q| q.query_id.as_str()).collect();
        assert_eq!(ids, vec!["b", "a"]);
    }

    #[test]
    fn rejects_misaligned_clicks_and_values() {
        let (_dir, path) = write(
            "#input_ranking\tq\t1,2\n#input_ranking\tq\t2,1\n\
             q\t1,2\t0,1\t-,-\n",
        );
        let err = load_replay_file(&path).unwrap_err();
        assert!(err.to_string().contains("no post-click value"), "{err}");
    }

    #[test]
    fn rejects_items_outside_the_input_union() {
        let (_dir, path) = write(
            "#input_ranking\tq\t1,2\n#input_ranking\tq\t2,1\n\
             q\t1,9\t0,0\t-,-\n",
        );
        let err = load_replay_file(&path).unwrap_err();
        assert!(err.to_string().contains("item 9"), "{err}");
    }

    #[test]
    fn rejects_queries_without_enough_input_rankings() {
        let (_dir, path) = write("#input_ranking\tq\t1,2\nq\t1,2\t0,0\t-,-\n");
        assert!(load_replay_file(&path).is_err());
    }

    #[test]
    fn rejects_bad_click_flags() {
        let (_dir, path) = write(
            "#input_ranking\tq\t1,2\n#input_ranking\tq\t2,1\n\
             q\t1,2\t0,2\t-,-\n",
        );
        assert!(load_replay_file(&path).is_err());
    }
}
