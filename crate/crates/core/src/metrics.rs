//! Clustering accuracy and multi-start aggregation.

use serde::{Deserialize, Serialize};

use crate::envelope::Assignment;
use crate::error::{Error, Result};

/// `counts[cluster][label]` contingency table.
fn contingency(predicted: &Assignment, truth: &[usize]) -> Result<Vec<Vec<usize>>> {
    if truth.is_empty() {
        return Err(Error::MissingLabels);
    }
    if truth.len() != predicted.owner.len() {
        return Err(Error::input(format!(
            "{} labels for {} assigned points",
            truth.len(),
            predicted.owner.len()
        )));
    }
    let clusters = predicted.owner.iter().max().map_or(0, |&c| c + 1).max(predicted.k());
    let classes = truth.iter().max().map_or(0, |&c| c + 1);
    let mut counts = vec![vec![0usize; classes]; clusters];
    for (&c, &l) in predicted.owner.iter().zip(truth) {
        counts[c][l] += 1;
    }
    Ok(counts)
}

/// Majority-mapping accuracy (cluster purity): each predicted cluster is mapped
/// to its most frequent true label, smaller label on ties.
pub fn accuracy(predicted: &Assignment, truth: &[usize]) -> Result<f64> {
    let counts = contingency(predicted, truth)?;
    let correct: usize = counts
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(correct as f64 / truth.len() as f64)
}

/// One-to-one (Hungarian) matching accuracy. Diagnostic only; clusters beyond
/// the number of classes (or vice versa) count as wrong.
pub fn matched_accuracy(predicted: &Assignment, truth: &[usize]) -> Result<f64> {
    let counts = contingency(predicted, truth)?;
    let rows = counts.len();
    let cols = counts.first().map_or(0, Vec::len);
    let size = rows.max(cols);
    // Square cost matrix; padding entries cost nothing.
    let max = counts.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost: Vec<Vec<i64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| max - counts.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0) as i64)
                .collect()
        })
        .collect();
    let matched: usize = min_cost_assignment(&cost)
        .into_iter()
        .enumerate()
        .filter(|&(i, j)| i < rows && j < cols)
        .map(|(i, j)| counts[i][j])
        .sum();
    Ok(matched as f64 / truth.len() as f64)
}

/// Hungarian algorithm (potentials form, `O(n³)`) on a square cost matrix.
/// Returns the column assigned to each row.
fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: usize,
    pub seed: u64,
    /// `None` when the dataset has no labels.
    pub acc: Option<f64>,
    pub objective_raw: f64,
    pub k_final: usize,
    pub wall_time_s: f64,
    pub converged: bool,
    pub total_iters: usize,
}

/// Run with the smallest raw objective, smaller `run_id` on ties.
pub fn best_of(runs: &[RunSummary]) -> Result<&RunSummary> {
    runs.iter()
        .reduce(|best, r| {
            if r.objective_raw < best.objective_raw
                || (r.objective_raw == best.objective_raw && r.run_id < best.run_id)
            {
                r
            } else {
                best
            }
        })
        .ok_or_else(|| Error::input("no runs to summarize"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population standard deviation; `None` for an empty sample.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Some(Self { mean, std: var.sqrt() })
    }
}

/// Best run plus mean ± std of every column across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub runs: usize,
    pub best: RunSummary,
    pub acc: Option<MeanStd>,
    pub objective_raw: MeanStd,
    pub k_final: MeanStd,
    pub wall_time_s: MeanStd,
    pub converged_runs: usize,
}

pub fn aggregate(runs: &[RunSummary]) -> Result<RunAggregate> {
    let best = best_of(runs)?.clone();
    let stat = |f: fn(&RunSummary) -> f64| MeanStd::of(runs.iter().map(f)).expect("nonempty");
    Ok(RunAggregate {
        runs: runs.len(),
        best,
        acc: if runs.iter().all(|r| r.acc.is_some()) {
            MeanStd::of(runs.iter().filter_map(|r| r.acc))
        } else {
            None
        },
        objective_raw: stat(|r| r.objective_raw),
        k_final: stat(|r| r.k_final as f64),
        wall_time_s: stat(|r| r.wall_time_s),
        converged_runs: runs.iter().filter(|r| r.converged).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assign(owner: &[usize]) -> Assignment {
        let k = owner.iter().max().unwrap() + 1;
        Assignment::from_owner(owner.to_vec(), k)
    }

    fn run(run_id: usize, obj: f64) -> RunSummary {
        RunSummary {
            run_id,
            seed: run_id as u64,
            acc: Some(0.5),
            objective_raw: obj,
            k_final: 3,
            wall_time_s: 0.0,
            converged: true,
            total_iters: 10,
        }
    }

    #[test]
    fn accuracy_examples() {
        let truth = [0, 0, 1, 1, 2, 2];
        assert_eq!(accuracy(&assign(&[2, 2, 0, 0, 1, 1]), &truth).unwrap(), 1.0);

        let truth = [0, 0, 0, 0, 0, 0, 1, 1, 1, 1];
        assert_eq!(accuracy(&assign(&[0; 10]), &truth).unwrap(), 0.6);

        let singletons: Vec<usize> = (0..10).collect();
        assert_eq!(accuracy(&assign(&singletons), &truth).unwrap(), 1.0);

        assert!(matches!(accuracy(&assign(&[0]), &[]), Err(Error::MissingLabels)));
        assert!(accuracy(&assign(&[0, 0]), &[0]).is_err());
    }

    #[test]
    fn purity_exceeds_matching_with_extra_clusters() {
        let truth = [0, 0, 0, 0, 1, 1, 1, 1];
        let predicted = assign(&[0, 0, 1, 1, 2, 2, 3, 3]);
        assert_eq!(accuracy(&predicted, &truth).unwrap(), 1.0);
        assert_eq!(matched_accuracy(&predicted, &truth).unwrap(), 0.5);
        // Fewer clusters than classes.
        assert_eq!(matched_accuracy(&assign(&[0; 8]), &truth).unwrap(), 0.5);
        // Permuted perfect clustering.
        let truth = [2, 2, 0, 0, 1, 1, 1];
        assert_eq!(matched_accuracy(&assign(&[0, 0, 1, 1, 2, 2, 2]), &truth).unwrap(), 1.0);
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let cols = min_cost_assignment(&cost);
        let total: i64 = cols.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let best = perms
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<i64>())
            .min()
            .unwrap();
        assert_eq!(total, best);
    }

    #[test]
    fn best_of_examples() {
        assert_eq!(best_of(&[run(0, 5.0)]).unwrap().run_id, 0);
        assert_eq!(best_of(&[run(0, 5.0), run(1, 3.0), run(2, 3.0)]).unwrap().run_id, 1);
        assert_eq!(best_of(&[run(0, 1.0), run(1, 1.0), run(2, 1.0)]).unwrap().run_id, 0);
        assert!(best_of(&[]).is_err());
    }

    #[test]
    fn aggregate_stats() {
        let agg = aggregate(&[run(0, 2.0), run(1, 4.0)]).unwrap();
        assert_eq!(agg.best.run_id, 0);
        assert_eq!(agg.objective_raw, MeanStd { mean: 3.0, std: 1.0 });
        assert_eq!(agg.acc.unwrap().mean, 0.5);
    }
}
