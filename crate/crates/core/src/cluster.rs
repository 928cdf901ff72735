//! Agglomerative hierarchical clustering (Euclidean, Ward), purity, and
//! speaker-class labeling from pseudo-i-vectors.
//!
//! Merge cost between clusters A and B is the variance increase
//! `Δ(A,B) = (|A||B| / (|A|+|B|)) · ‖μ_A − μ_B‖²` (not its square root).
//! Costs are maintained with Lance–Williams updates; each step merges the
//! global minimum-cost pair, breaking exact ties by the lexicographically
//! smallest (min leaf of A, min leaf of B) pair.

use serde::{Deserialize, Serialize};

use crate::corpus::Gender;
use crate::weight_features::LayerVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub cost: f64,
    pub new_cluster_id: usize,
}

/// Full merge history: leaves are ids `0..num_leaves`, merge `s` creates id
/// `num_leaves + s`. Always `num_leaves − 1` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub num_leaves: usize,
    pub steps: Vec<MergeStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: usize,
    pub labels: Vec<usize>,
}

/// Ward clustering of equal-length vectors; returns the full dendrogram and
/// the assignment obtained by cutting it at `k` clusters.
pub fn ward_cluster(vectors: &[Vec<f64>], k: usize) -> Result<(Dendrogram, ClusterAssignment)> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::Empty("clustering input"));
    }
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let dim = vectors[0].len();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "clustering vector length",
                expected: dim,
                got: v.len(),
            });
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("clustering input"));
        }
        let _ = i;
    }

    // Slot state: a merged cluster stays in the lower slot of the pair.
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut min_leaf: Vec<usize> = (0..n).collect();
    let mut id: Vec<usize> = (0..n).collect();

    let pair = |i: usize, j: usize| if i < j { i * n + j } else { j * n + i };
    let mut cost = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            cost[pair(i, j)] = 0.5 * d;
        }
    }

    let mut steps = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                let c = cost[pair(i, j)];
                let (p, q) = if min_leaf[i] <= min_leaf[j] {
                    (min_leaf[i], min_leaf[j])
                } else {
                    (min_leaf[j], min_leaf[i])
                };
                let better = match best {
                    None => true,
                    Some((bc, bp, bq, _, _)) => c < bc || (c == bc && (p, q) < (bp, bq)),
                };
                if better {
                    best = Some((c, p, q, i, j));
                }
            }
        }
        let (c, _, _, si, sj) = best.expect("at least two active clusters remain");

        let (a_slot, b_slot) = if min_leaf[si] <= min_leaf[sj] {
            (si, sj)
        } else {
            (sj, si)
        };
        let new_id = n + step;
        steps.push(MergeStep {
            cluster_a: id[a_slot],
            cluster_b: id[b_slot],
            cost: c,
            new_cluster_id: new_id,
        });

        let na = size[si] as f64;
        let nb = size[sj] as f64;
        for m in 0..n {
            if !active[m] || m == si || m == sj {
                continue;
            }
            let nc = size[m] as f64;
            let updated = ((na + nc) * cost[pair(si, m)] + (nb + nc) * cost[pair(sj, m)]
                - nc * c)
                / (na + nb + nc);
            cost[pair(si, m)] = updated;
        }
        size[si] += size[sj];
        min_leaf[si] = min_leaf[si].min(min_leaf[sj]);
        id[si] = new_id;
        active[sj] = false;
    }

    let dendrogram = Dendrogram {
        num_leaves: n,
        steps,
    };
    let assignment = cut(&dendrogram, k)?;
    Ok((dendrogram, assignment))
}

/// Cuts a dendrogram at `k` clusters by applying the first `N − k` merges.
/// Cluster labels are assigned in ascending order of each cluster's smallest
/// leaf index, so label 0 always contains leaf 0.
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Result<ClusterAssignment> {
    let n = dendrogram.num_leaves;
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let merges = n - k;
    // parent[id] = id of the cluster this one merged into.
    let mut parent: Vec<usize> = (0..n + merges).collect();
    for step in &dendrogram.steps[..merges] {
        parent[step.cluster_a] = step.new_cluster_id;
        parent[step.cluster_b] = step.new_cluster_id;
    }
    let root = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };
    let roots: Vec<usize> = (0..n).map(root).collect();
    let mut reps: Vec<(usize, usize)> = Vec::new(); // (min leaf, root)
    for leaf in 0..n {
        if !reps.iter().any(|&(_, r)| r == roots[leaf]) {
            reps.push((leaf, roots[leaf]));
        }
    }
    debug_assert_eq!(reps.len(), k);
    let labels = roots
        .iter()
        .map(|&r| reps.iter().position(|&(_, rep)| rep == r).expect("root seen"))
        .collect();
    Ok(ClusterAssignment { k, labels })
}

/// Purity `(1/N) Σ_i max_j |c_i ∩ t_j|` of an assignment against truth
/// labels.
pub fn purity(assignment: &ClusterAssignment, truth: &[usize]) -> Result<f64> {
    let n = assignment.labels.len();
    if n == 0 {
        return Err(Error::Empty("purity input"));
    }
    if truth.len() != n {
        return Err(Error::DimensionMismatch {
            context: "purity truth length",
            expected: n,
            got: truth.len(),
        });
    }
    let t_max = truth.iter().copied().max().expect("non-empty") + 1;
    let mut counts = vec![0usize; assignment.k * t_max];
    for (&c, &t) in assignment.labels.iter().zip(truth) {
        counts[c * t_max + t] += 1;
    }
    let total: usize = counts
        .chunks_exact(t_max)
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(total as f64 / n as f64)
}

/// Clusters one layer's vectors into two groups and scores purity against
/// gender. Returns the purity and the assignment (useful for permutation
/// baselines without re-clustering).
pub fn gender_cluster_layer(
    vectors: &[LayerVector],
    genders: &[Gender],
) -> Result<(f64, ClusterAssignment)> {
    if vectors.len() < 2 {
        return Err(Error::Empty("gender clustering needs at least two models"));
    }
    if genders.len() != vectors.len() {
        return Err(Error::DimensionMismatch {
            context: "gender label count",
            expected: vectors.len(),
            got: genders.len(),
        });
    }
    if genders.iter().all(|&g| g == genders[0]) {
        return Err(Error::SingleGender);
    }
    let data: Vec<Vec<f64>> = vectors.iter().map(|v| v.values.clone()).collect();
    let (_, assignment) = ward_cluster(&data, 2)?;
    let truth: Vec<usize> = genders
        .iter()
        .map(|g| match g {
            Gender::F => 0,
            Gender::M => 1,
        })
        .collect();
    let p = purity(&assignment, &truth)?;
    Ok((p, assignment))
}

/// Ward-clusters pseudo-i-vectors into `num_classes` speaker classes.
pub fn speaker_classes(pseudo_ivectors: &[Vec<f64>], num_classes: usize) -> Result<Vec<usize>> {
    if num_classes >= pseudo_ivectors.len() {
        return Err(Error::TooManyClusters {
            k: num_classes,
            n: pseudo_ivectors.len(),
        });
    }
    let (_, assignment) = ward_cluster(pseudo_ivectors, num_classes)?;
    Ok(assignment.labels)
}
