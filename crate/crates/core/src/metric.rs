//! Point storage and distance evaluation.
//!
//! A [`MetricSpace`] holds either Euclidean coordinates or an explicit
//! symmetric distance matrix. Every distance is multiplied by a positive
//! `scale`. The penalty-truncated distance `d_p(u, v) = min(d(u, v), p)` is
//! what the local search and the online engine operate on; truncating a
//! metric at a constant keeps it a metric.

use std::fmt;

use crate::error::{Error, Result};

/// Dense zero-based identifier of a point in a [`MetricSpace`].
///
/// Ids double as facility ordinals: whenever two medians tie, the smaller id
/// wins.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PointId(pub usize);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<usize> for PointId {
    fn from(value: usize) -> Self {
        PointId(value)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Euclidean { dim: usize, coords: Vec<f64> },
    Explicit { n: usize, matrix: Vec<f64> },
}

/// A finite metric space over points `0..len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    storage: Storage,
    scale: f64,
    version: u64,
}

/// Smallest strictly positive and largest pairwise distance over an id set.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DiameterBounds {
    /// `None` when every pair coincides.
    pub min_positive: Option<f64>,
    pub max: f64,
}

impl MetricSpace {
    /// Euclidean space over the given points; all points must share one
    /// dimension `>= 1` and have finite coordinates.
    pub fn euclidean<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = match points.first() {
            Some(p) => p.as_ref().len(),
            None => return Self::euclidean_flat(1, Vec::new()),
        };
        let mut coords = Vec::with_capacity(dim * points.len());
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::InvalidMetric(format!(
                    "point {i} has dimension {} but the first point has {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::euclidean_flat(dim, coords)
    }

    /// Euclidean space from row-major coordinates.
    pub fn euclidean_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMetric("dimension must be at least 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidMetric(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "non-finite coordinate in point {}",
                bad / dim
            )));
        }
        Ok(MetricSpace {
            storage: Storage::Euclidean { dim, coords },
            scale: 1.0,
            version: 0,
        })
    }

    /// Explicit space from a square matrix. The matrix must be symmetric with
    /// a zero diagonal and finite non-negative entries. The triangle
    /// inequality is not checked here; see [`MetricSpace::max_triangle_excess`].
    pub fn explicit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut matrix = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            matrix.extend_from_slice(row);
        }
        for i in 0..n {
            if matrix[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let d = matrix[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "entry ({i}, {j}) = {d} is not a finite non-negative real"
                    )));
                }
                if d != matrix[j * n + i] {
                    return Err(Error::InvalidMetric(format!("entry ({i}, {j}) is not symmetric")));
                }
            }
        }
        Ok(MetricSpace {
            storage: Storage::Explicit { n, matrix },
            scale: 1.0,
            version: 0,
        })
    }

    /// Sets the positive multiplier applied to every raw distance.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidMetric(format!("scale must be positive, got {scale}")));
        }
        self.scale = scale;
        self.version += 1;
        Ok(self)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        match &self.storage {
            Storage::Euclidean { dim, coords } => coords.len() / dim,
            Storage::Explicit { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate dimension, `None` for explicit spaces.
    pub fn dimension(&self) -> Option<usize> {
        match &self.storage {
            Storage::Euclidean { dim, .. } => Some(*dim),
            Storage::Explicit { .. } => None,
        }
    }

    pub fn coords(&self, id: PointId) -> Option<&[f64]> {
        match &self.storage {
            Storage::Euclidean { dim, coords } => coords.get(id.0 * dim..(id.0 + 1) * dim),
            Storage::Explicit { .. } => None,
        }
    }

    /// Bumped on every mutation; lets callers invalidate derived caches.
    pub fn version(&self) -> u64 {
        self.version
    }

    /// Appends a Euclidean point. Explicit spaces cannot grow.
    pub fn push_point(&mut self, point: &[f64]) -> Result<PointId> {
        match &mut self.storage {
            Storage::Euclidean { dim, coords } => {
                if point.len() != *dim {
                    return Err(Error::InvalidMetric(format!(
                        "point has dimension {}, space has {dim}",
                        point.len()
                    )));
                }
                if point.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidMetric("non-finite coordinate".into()));
                }
                let id = PointId(coords.len() / *dim);
                coords.extend_from_slice(point);
                self.version += 1;
                Ok(id)
            }
            Storage::Explicit { .. } => Err(Error::UnsupportedMode("appending to an explicit metric")),
        }
    }

    #[inline]
    pub fn check(&self, id: PointId) -> Result<()> {
        let len = self.len();
        if id.0 < len {
            Ok(())
        } else {
            Err(Error::OutOfRange { id, len })
        }
    }

    /// Scaled distance between two points.
    pub fn distance(&self, u: PointId, v: PointId) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.dist(u, v))
    }

    /// `min(d(u, v), p)`.
    pub fn truncated_distance(&self, u: PointId, v: PointId, p: f64) -> Result<f64> {
        Ok(self.distance(u, v)?.min(p))
    }

    /// Unchecked distance; panics on an out-of-range id.
    #[inline]
    pub fn dist(&self, u: PointId, v: PointId) -> f64 {
        match &self.storage {
            Storage::Euclidean { dim, coords } => {
                let a = &coords[u.0 * dim..(u.0 + 1) * dim];
                let b = &coords[v.0 * dim..(v.0 + 1) * dim];
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                self.scale * sq.sqrt()
            }
            Storage::Explicit { n, matrix } => self.scale * matrix[u.0 * n + v.0],
        }
    }

    #[inline]
    pub fn dist_p(&self, u: PointId, v: PointId, p: f64) -> f64 {
        self.dist(u, v).min(p)
    }

    /// Exact min positive and max pairwise distance by full scan.
    pub fn diameter_bounds(&self, ids: &[PointId]) -> Result<DiameterBounds> {
        if ids.len() < 2 {
            return Err(Error::Degenerate(format!(
                "diameter bounds need at least 2 points, got {}",
                ids.len()
            )));
        }
        for &id in ids {
            self.check(id)?;
        }
        let mut min_positive: Option<f64> = None;
        let mut max = 0.0f64;
        for (a, &u) in ids.iter().enumerate() {
            for &v in &ids[a + 1..] {
                let d = self.dist(u, v);
                if d > max {
                    max = d;
                }
                if d > 0.0 && min_positive.is_none_or(|m| d < m) {
                    min_positive = Some(d);
                }
            }
        }
        Ok(DiameterBounds { min_positive, max })
    }

    /// Explicit copy of this space: the pairwise matrix of scaled distances
    /// computed with the same arithmetic as [`MetricSpace::dist`]. Scale of the
    /// copy is 1, so distances agree bit for bit.
    pub fn materialize(&self) -> MetricSpace {
        let n = self.len();
        let mut matrix = vec![0.0; n * n];
        for u in 0..n {
            for v in u + 1..n {
                let d = self.dist(PointId(u), PointId(v));
                matrix[u * n + v] = d;
                matrix[v * n + u] = d;
            }
        }
        MetricSpace {
            storage: Storage::Explicit { n, matrix },
            scale: 1.0,
            version: 0,
        }
    }

    /// Largest `d(u, w) - d(u, v) - d(v, w)` over all triples; `<= 0` iff
    /// the triangle inequality holds. Cubic, meant for small explicit inputs.
    pub fn max_triangle_excess(&self) -> f64 {
        let n = self.len();
        let mut worst = f64::NEG_INFINITY;
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let (u, v, w) = (PointId(u), PointId(v), PointId(w));
                    worst = worst.max(self.dist(u, w) - self.dist(u, v) - self.dist(v, w));
                }
            }
        }
        worst
    }
}

/// Memoizes [`MetricSpace::diameter_bounds`] for one id set, recomputing
/// only when the space or the id set changes.
#[derive(Debug, Default, Clone)]
pub struct DiameterCache {
    key: Option<(u64, Vec<PointId>)>,
    value: Option<DiameterBounds>,
}

impl DiameterCache {
    pub fn get(&mut self, space: &MetricSpace, ids: &[PointId]) -> Result<DiameterBounds> {
        if let (Some((version, cached_ids)), Some(value)) = (&self.key, self.value) {
            if *version == space.version() && cached_ids == ids {
                return Ok(value);
            }
        }
        let value = space.diameter_bounds(ids)?;
        self.key = Some((space.version(), ids.to_vec()));
        self.value = Some(value);
        Ok(value)
    }
}
