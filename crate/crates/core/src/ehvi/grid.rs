//! Non-regular sector grid spanned by a Pareto set, the reference point and
//! the symbolic point at negative infinity.
//!
//! Each axis keeps its coordinates in descending order starting at the
//! reference coordinate. Interval `k` of an axis runs from `coords[k + 1]`
//! (or the symbolic `-inf` for the last interval) up to `coords[k]`, so an
//! axis with `m` finite coordinates has `m` intervals.

/// Lower end of a grid interval. The `-inf` end is a tag, never an `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    NegInfinity,
}

impl Bound {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::NegInfinity => None,
        }
    }
}

/// Sorted, deduplicated grid coordinates of one objective.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    coords: Vec<f64>,
}

impl GridAxis {
    fn new(reference: f64, values: impl Iterator<Item = f64>) -> Self {
        let mut coords: Vec<f64> = values.filter(|&v| v < reference).collect();
        coords.push(reference);
        coords.sort_by(|a, b| b.total_cmp(a));
        coords.dedup();
        GridAxis { coords }
    }

    /// Finite coordinates, descending; the first is the reference coordinate.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn intervals(&self) -> usize {
        self.coords.len()
    }

    pub fn upper(&self, k: usize) -> f64 {
        self.coords[k]
    }

    pub fn lower(&self, k: usize) -> Bound {
        match self.coords.get(k + 1) {
            Some(&v) => Bound::Finite(v),
            None => Bound::NegInfinity,
        }
    }
}

/// A grid cell: one interval index per objective.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sector {
    pub index: Vec<usize>,
}

/// The grid `S(P, y_ref)` over a (clipped) Pareto set.
#[derive(Debug, Clone)]
pub struct SectorGrid {
    axes: Vec<GridAxis>,
    front: Vec<Vec<f64>>,
    reference: Vec<f64>,
}

impl SectorGrid {
    /// Points of `front` are clipped at the reference point componentwise, so
    /// coordinates at or above the reference add no grid lines.
    pub fn new<V: AsRef<[f64]>>(front: &[V], reference: &[f64]) -> Self {
        assert!(!reference.is_empty());
        let n = reference.len();
        let clipped: Vec<Vec<f64>> = front
            .iter()
            .map(|p| {
                let p = p.as_ref();
                assert_eq!(p.len(), n, "objective vectors differ in length");
                p.iter().zip(reference).map(|(&v, &r)| v.min(r)).collect()
            })
            .collect();
        let axes = (0..n)
            .map(|i| GridAxis::new(reference[i], clipped.iter().map(|p| p[i])))
            .collect();
        SectorGrid {
            axes,
            front: clipped,
            reference: reference.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    /// The clipped front the grid was built from.
    pub fn front(&self) -> &[Vec<f64>] {
        &self.front
    }

    /// `∏_i (|ξ_i| − 1)`.
    pub fn len(&self) -> usize {
        self.axes.iter().map(GridAxis::intervals).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every sector, in mixed-radix order with the first objective varying fastest.
    pub fn sectors(&self) -> impl Iterator<Item = Sector> + '_ {
        let total = self.len();
        (0..total).map(move |mut flat| {
            let index = self
                .axes
                .iter()
                .map(|axis| {
                    let k = flat % axis.intervals();
                    flat /= axis.intervals();
                    k
                })
                .collect();
            Sector { index }
        })
    }

    pub fn all_sectors(&self) -> Vec<Sector> {
        self.sectors().collect()
    }

    pub fn upper(&self, s: &Sector) -> Vec<f64> {
        s.index
            .iter()
            .zip(&self.axes)
            .map(|(&k, a)| a.upper(k))
            .collect()
    }

    pub fn lower(&self, s: &Sector) -> Vec<Bound> {
        s.index
            .iter()
            .zip(&self.axes)
            .map(|(&k, a)| a.lower(k))
            .collect()
    }

    /// A sector is dominated when some front point is `<=` its lower corner.
    /// Because front coordinates are grid lines this is the same as the
    /// upper corner lying strictly above that point in every objective.
    pub fn is_dominated(&self, s: &Sector) -> bool {
        self.front.iter().any(|p| {
            s.index.iter().zip(&self.axes).zip(p).all(|((&k, axis), &pi)| {
                match axis.lower(k) {
                    Bound::Finite(lo) => pi <= lo,
                    Bound::NegInfinity => false,
                }
            })
        })
    }

    /// `S_⊁`: sectors not dominated by any front point.
    pub fn nondominated_sectors(&self) -> Vec<Sector> {
        self.sectors().filter(|s| !self.is_dominated(s)).collect()
    }

    /// Box volume, or `None` when the sector reaches down to `-inf`.
    pub fn finite_volume(&self, s: &Sector) -> Option<f64> {
        s.index
            .iter()
            .zip(&self.axes)
            .map(|(&k, a)| a.lower(k).finite().map(|lo| a.upper(k) - lo))
            .product()
    }

    /// Index of the sector whose half-open box `(lower, upper]` holds `y`,
    /// or `None` when `y` is above the reference point somewhere.
    pub fn locate(&self, y: &[f64]) -> Option<Sector> {
        let index = y
            .iter()
            .zip(&self.axes)
            .map(|(&v, axis)| {
                if v > axis.upper(0) {
                    return None;
                }
                // last k with coords[k] >= v
                Some(axis.coords.partition_point(|&c| c >= v) - 1)
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Sector { index })
    }
}
