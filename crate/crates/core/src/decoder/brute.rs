//! Exhaustive minimum-weight perfect matching, used as a test oracle for the
//! blossom decoder.

use super::{Matching, MatchingGraph, Partner, INFINITE};
use crate::error::{Error, Result};

pub const MAX_BRUTE_FORCE_DEFECTS: usize = 10;

/// Enumerate every pairing of `defects` (graph node ids), each defect either
/// paired with another or sent to the boundary, and keep the lightest.
pub fn brute_force_mwpm(graph: &MatchingGraph, defects: &[usize]) -> Result<Matching> {
    if defects.len() > MAX_BRUTE_FORCE_DEFECTS {
        return Err(Error::TooManyDefects {
            got: defects.len(),
            max: MAX_BRUTE_FORCE_DEFECTS,
        });
    }
    let mut current = Vec::new();
    let mut best: Option<(i64, Vec<(usize, Partner)>)> = None;
    let mut used = vec![false; defects.len()];
    search(graph, defects, &mut used, &mut current, 0, &mut best);
    let (_, pairs) = best.ok_or_else(|| Error::Disconnected(defects[0]))?;
    Ok(Matching::from_pairs(graph, pairs))
}

fn search(
    graph: &MatchingGraph,
    defects: &[usize],
    used: &mut [bool],
    current: &mut Vec<(usize, Partner)>,
    weight: i64,
    best: &mut Option<(i64, Vec<(usize, Partner)>)>,
) {
    let Some(i) = used.iter().position(|&u| !u) else {
        if best.as_ref().is_none_or(|(w, _)| weight < *w) {
            *best = Some((weight, current.clone()));
        }
        return;
    };
    used[i] = true;
    let a = defects[i];

    let to_boundary = graph.distance(a, graph.boundary_node());
    if to_boundary < INFINITE {
        current.push((a, Partner::Boundary));
        search(graph, defects, used, current, weight + to_boundary, best);
        current.pop();
    }
    for j in i + 1..defects.len() {
        if used[j] {
            continue;
        }
        let w = graph.distance(a, defects[j]);
        if w >= INFINITE {
            continue;
        }
        used[j] = true;
        current.push((a, Partner::Defect(defects[j])));
        search(graph, defects, used, current, weight + w, best);
        current.pop();
        used[j] = false;
    }
    used[i] = false;
}
