//! Binned value space shared by every chain variable.
//!
//! A [`Binning`] is a uniform mesh of value points `c_j = lo + j * b`. Each
//! point stands for the closed subcube `[c_j - b/2, c_j + b/2]`; a tuple of
//! `k` points is the center of a `k`-dimensional [`Subcube`].

use thiserror::Error;

/// Relative slack allowed when checking that a range is a whole number of bins.
const RANGE_MULTIPLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("bin size must be positive, got {0}")]
    NonPositiveBinSize(f64),
    #[error("range is inverted or empty: lo = {lo}, hi = {hi}")]
    InvertedRange { lo: f64, hi: f64 },
    #[error("range [{lo}, {hi}] is not an integer multiple of bin size {bin_size}")]
    NotMultiple { lo: f64, hi: f64, bin_size: f64 },
    #[error("bin index {index} out of range (count = {count})")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("value {value} lies outside the padded range [{lo}, {hi}]")]
    ValueOutOfRange { value: f64, lo: f64, hi: f64 },
}

/// Uniform 1-D mesh of bin centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning {
    lo: f64,
    hi: f64,
    bin_size: f64,
    count: usize,
}

impl Binning {
    /// Builds the mesh `lo, lo + b, ..., hi`.
    ///
    /// The range must be a whole number of bins (within `1e-9` bins), since the
    /// pixel-array axes have to land exactly on the boundary values.
    pub fn new(lo: f64, hi: f64, bin_size: f64) -> Result<Self, GridError> {
        if bin_size <= 0.0 || !bin_size.is_finite() {
            return Err(GridError::NonPositiveBinSize(bin_size));
        }
        if hi <= lo || !lo.is_finite() || !hi.is_finite() {
            return Err(GridError::InvertedRange { lo, hi });
        }
        let steps = (hi - lo) / bin_size;
        let rounded = steps.round();
        if (steps - rounded).abs() > RANGE_MULTIPLE_TOL {
            return Err(GridError::NotMultiple { lo, hi, bin_size });
        }
        Ok(Self {
            lo,
            hi,
            bin_size,
            count: rounded as usize + 1,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn bin_size(&self) -> f64 {
        self.bin_size
    }

    /// Number of bins along one axis.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Center of bin `j`: `lo + j * b`.
    pub fn center(&self, j: usize) -> Result<f64, GridError> {
        if j >= self.count {
            return Err(GridError::IndexOutOfRange {
                index: j,
                count: self.count,
            });
        }
        Ok(self.center_unchecked(j))
    }

    #[inline]
    pub(crate) fn center_unchecked(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.bin_size
    }

    /// All bin centers in ascending order.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.center_unchecked(j)).collect()
    }

    /// Nearest bin to `v`, ties going to the higher bin.
    pub fn index_of(&self, v: f64) -> Result<usize, GridError> {
        let half = self.bin_size / 2.0;
        let (plo, phi) = (self.lo - half, self.hi + half);
        if !(v >= plo && v <= phi) {
            return Err(GridError::ValueOutOfRange {
                value: v,
                lo: plo,
                hi: phi,
            });
        }
        let j = round_half_up((v - self.lo) / self.bin_size).max(0.0) as usize;
        // hi + b/2 rounds one past the last bin
        Ok(j.min(self.count - 1))
    }

    /// Like [`index_of`](Self::index_of) but only accepts exact bin centers
    /// (to within `1e-9 * b`).
    pub fn exact_index_of(&self, v: f64) -> Option<usize> {
        let j = self.index_of(v).ok()?;
        let err = (self.center_unchecked(j) - v).abs();
        (err <= RANGE_MULTIPLE_TOL * self.bin_size).then_some(j)
    }

    /// L2 radius of a `k`-dimensional subcube: `(b/2) * sqrt(k)`.
    pub fn subcube_radius(&self, k: usize) -> f64 {
        subcube_radius(self.bin_size, k)
    }

    /// Subcube centered at the given bin indices.
    pub fn subcube(&self, idx: &[usize]) -> Result<Subcube, GridError> {
        let centers = idx
            .iter()
            .map(|&j| self.center(j))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Subcube {
            centers,
            half_width: self.bin_size / 2.0,
        })
    }
}

/// `(b/2) * sqrt(k)`, the largest distance from a subcube center to its boundary.
pub fn subcube_radius(bin_size: f64, k: usize) -> f64 {
    bin_size / 2.0 * (k as f64).sqrt()
}

/// Nearest integer with exact halves rounded toward `+inf`.
#[inline]
pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Axis-aligned box of side `2 * half_width` around `centers`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subcube {
    pub centers: Vec<f64>,
    pub half_width: f64,
}

impl Subcube {
    pub fn dim(&self) -> usize {
        self.centers.len()
    }

    /// `(lo, hi)` bounds along each axis.
    pub fn bounds(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.centers
            .iter()
            .map(move |&c| (c - self.half_width, c + self.half_width))
    }

    pub fn radius(&self) -> f64 {
        self.half_width * (self.dim() as f64).sqrt()
    }
}
