//! Pareto dominance, non-dominated set maintenance, and exact 2-D
//! hypervolume (minimization convention throughout).

use serde::{Deserialize, Serialize};

use super::OptError;

/// `a` dominates `b`: no worse in both objectives, strictly better in at
/// least one.
pub fn dominates(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// One non-dominated point and the trial it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub objectives: [f64; 2],
    pub trial_index: usize,
}

/// Non-dominated set, sorted ascending in the first objective (hence
/// strictly descending in the second).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub members: Vec<FrontMember>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members that dominate the reference point (the ones that can carry
    /// hypervolume).
    pub fn restricted_to(&self, reference: &ReferencePoint) -> ParetoFront {
        ParetoFront {
            members: self
                .members
                .iter()
                .copied()
                .filter(|m| dominates(m.objectives, reference.0))
                .collect(),
        }
    }
}

/// Point in objective space that every front member should dominate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint(pub [f64; 2]);

/// Exact non-dominated subset of `points`, indices referring to input
/// positions. Duplicate points collapse to the lowest index.
pub fn pareto_front(points: &[[f64; 2]]) -> ParetoFront {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i][0]
            .total_cmp(&points[j][0])
            .then(points[i][1].total_cmp(&points[j][1]))
            .then(i.cmp(&j))
    });
    let mut members: Vec<FrontMember> = Vec::new();
    for idx in order {
        let p = points[idx];
        let keep = match members.last() {
            // Sorted by (first, second): a candidate survives only if it
            // improves the running best second objective; equal-second (or
            // equal-point) candidates are dominated or duplicates.
            Some(last) => p[1] < last.objectives[1],
            None => true,
        };
        if keep {
            members.push(FrontMember { objectives: p, trial_index: idx });
        }
    }
    ParetoFront { members }
}

/// Exact 2-D hypervolume of the region dominated by `front` and bounded by
/// `reference`, via the sorted staircase sum.
pub fn hypervolume_2d(front: &ParetoFront, reference: &ReferencePoint) -> Result<f64, OptError> {
    let r = reference.0;
    for m in &front.members {
        if !dominates(m.objectives, r) {
            return Err(OptError::NotDominatingReference {
                point: m.objectives,
                reference: r,
            });
        }
    }
    let mut hv = 0.0;
    for (i, m) in front.members.iter().enumerate() {
        let next_x = front.members.get(i + 1).map_or(r[0], |n| n.objectives[0]);
        hv += (next_x - m.objectives[0]) * (r[1] - m.objectives[1]);
    }
    Ok(hv)
}
