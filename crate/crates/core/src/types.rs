//! Evaluation records and the derived views the models are trained on.

use serde::{Deserialize, Serialize};

/// Binary outcome of a black-box evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(self) -> bool {
        self == Feasibility::Feasible
    }

    /// Label used by the classifier and by the expected-feasibility sum.
    pub fn as_indicator(self) -> f64 {
        match self {
            Feasibility::Feasible => 1.0,
            Feasibility::Infeasible => 0.0,
        }
    }
}

/// Axis-aligned box of closed intervals `[lo_j, hi_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Bounds {
    /// Panics unless `lo_j < hi_j` for every dimension and `d >= 1`.
    pub fn new(intervals: &[(f64, f64)]) -> Self {
        assert!(!intervals.is_empty(), "bounds need at least one dimension");
        for (j, &(lo, hi)) in intervals.iter().enumerate() {
            assert!(
                lo.is_finite() && hi.is_finite() && lo < hi,
                "invalid interval [{lo}, {hi}] in dimension {j}"
            );
        }
        Bounds {
            lo: intervals.iter().map(|b| b.0).collect(),
            hi: intervals.iter().map(|b| b.1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper(&self) -> &[f64] {
        &self.hi
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.lo.iter().copied().zip(self.hi.iter().copied()).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    /// `true` when every interval of `inner` lies inside this box.
    pub fn encloses(&self, inner: &Bounds) -> bool {
        inner.dim() == self.dim()
            && (0..self.dim()).all(|j| inner.lo[j] >= self.lo[j] && inner.hi[j] <= self.hi[j])
    }

    /// Affine map onto the unit cube.
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| (v - self.lo[j]) / (self.hi[j] - self.lo[j]))
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(j, &v)| {
                let x = self.lo[j] + v * (self.hi[j] - self.lo[j]);
                x.clamp(self.lo[j], self.hi[j])
            })
            .collect()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[j], self.hi[j]);
        }
    }
}

/// One evaluation `(x, y, f)`. Infeasible samples carry no objective vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    y: Option<Vec<f64>>,
    pub feasibility: Feasibility,
}

impl Sample {
    pub fn feasible(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(
            y.iter().all(|v| v.is_finite()),
            "objective values must be finite"
        );
        Sample {
            x,
            y: Some(y),
            feasibility: Feasibility::Feasible,
        }
    }

    pub fn infeasible(x: Vec<f64>) -> Self {
        Sample {
            x,
            y: None,
            feasibility: Feasibility::Infeasible,
        }
    }

    /// Objectives, present only for feasible samples.
    pub fn objectives(&self) -> Option<&[f64]> {
        match self.feasibility {
            Feasibility::Feasible => self.y.as_deref(),
            Feasibility::Infeasible => None,
        }
    }
}

/// Append-only, ordered collection of samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sample: Sample) {
        self.samples.push(sample);
    }

    pub fn extend<I: IntoIterator<Item = Sample>>(&mut self, samples: I) {
        self.samples.extend(samples);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// `D_x`: every evaluated design.
    pub fn designs(&self) -> Vec<&[f64]> {
        self.samples.iter().map(|s| s.x.as_slice()).collect()
    }

    /// `D_y*`: objectives of the feasible samples.
    pub fn feasible_objectives(&self) -> Vec<&[f64]> {
        self.samples.iter().filter_map(|s| s.objectives()).collect()
    }

    /// `D_xy*`: designs and objectives of the feasible samples.
    pub fn feasible_pairs(&self) -> Vec<(&[f64], &[f64])> {
        self.samples
            .iter()
            .filter_map(|s| s.objectives().map(|y| (s.x.as_slice(), y)))
            .collect()
    }

    /// `D_xf`: every design with its feasibility label.
    pub fn labeled(&self) -> Vec<(&[f64], Feasibility)> {
        self.samples
            .iter()
            .map(|s| (s.x.as_slice(), s.feasibility))
            .collect()
    }

    pub fn feasible_count(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.feasibility.is_feasible())
            .count()
    }
}

impl FromIterator<Sample> for Dataset {
    fn from_iter<T: IntoIterator<Item = Sample>>(iter: T) -> Self {
        Dataset {
            samples: iter.into_iter().collect(),
        }
    }
}
