//! Rectangular partial sums, Cesàro means, and de la Vallée-Poussin means
//! of a coefficient grid, evaluated on uniform sample grids over the torus.
//!
//! All three means are separable per-mode reweightings of the coefficient
//! array, so evaluation is a single weighted synthesis pass: the partial sum
//! keeps every mode with `|j| <= m, |k| <= n` at weight 1, the Cesàro mean
//! applies the triangular factor `(m + 1 - |j|) / (m + 1)` per axis (the
//! count of window positions containing the mode), and the de la
//! Vallée-Poussin mean keeps weight 1 up to `m` and ramps down linearly
//! across the window `m < |j| <= lambda_m`. The naive definitions as
//! averages of partial sums are kept in the tests as oracles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{CoefficientGrid, CoefficientSeq};
use crate::kernels::VPParams;

/// Complex samples on the uniform grid `x_a = -pi + 2 pi a / nx`,
/// `y_b = -pi + 2 pi b / ny` over the half-open square `[-pi, pi)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    nx: usize,
    ny: usize,
    values: Vec<Complex64>,
}

impl SampleGrid {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        assert!(nx >= 1 && ny >= 1, "sample grid shape must be positive");
        Self {
            nx,
            ny,
            values: vec![Complex64::new(0.0, 0.0); nx * ny],
        }
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let mut g = Self::zeros(nx, ny);
        for a in 0..nx {
            let x = g.x(a);
            for b in 0..ny {
                let v = f(x, g.y(b));
                assert!(v.re.is_finite() && v.im.is_finite(), "non-finite sample");
                g.values[a * ny + b] = v;
            }
        }
        g
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn x(&self, a: usize) -> f64 {
        -PI + 2.0 * PI * a as f64 / self.nx as f64
    }

    pub fn y(&self, b: usize) -> f64 {
        -PI + 2.0 * PI * b as f64 / self.ny as f64
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.ny + b]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Largest sample modulus.
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute imaginary part, for realness checks.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Pointwise `self - other`; shapes must match.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            nx: self.nx,
            ny: self.ny,
            values,
        })
    }

    /// Pointwise `self + alpha * other`; shapes must match.
    pub fn add_scaled(&self, alpha: Complex64, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(Self {
            nx: self.nx,
            ny: self.ny,
            values,
        })
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Grid index of the sample where `|self - other|` is largest, with
    /// that modulus.
    pub fn max_abs_difference(&self, other: &Self) -> Result<(usize, usize, f64)> {
        self.check_shape(other)?;
        let mut best = (0usize, 0usize, 0.0f64);
        for a in 0..self.nx {
            for b in 0..self.ny {
                let d = (self.get(a, b) - other.get(a, b)).norm();
                if d > best.2 {
                    best = (a, b, d);
                }
            }
        }
        Ok(best)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.nx != other.nx || self.ny != other.ny {
            return Err(Error::ShapeMismatch {
                ax: self.nx,
                ay: self.ny,
                bx: other.nx,
                by: other.ny,
            });
        }
        Ok(())
    }
}

/// Synthesize `sum_{j,k} wj(j) wk(k) c_jk exp(i (j x + k y))` on an
/// `nx x ny` uniform grid, over plain integer modes `|j| <= max_j`,
/// `|k| <= max_k`. Modes with zero weight are skipped.
pub(crate) fn synthesize_weighted(
    grid: &CoefficientGrid,
    wj: impl Fn(i64) -> f64,
    max_j: u32,
    wk: impl Fn(i64) -> f64,
    max_k: u32,
    nx: usize,
    ny: usize,
) -> SampleGrid {
    let mut out = SampleGrid::zeros(nx, ny);

    let js: Vec<(i64, f64)> = (-(max_j as i64)..=max_j as i64)
        .map(|j| (j, wj(j)))
        .filter(|(_, w)| *w != 0.0)
        .collect();
    let ks: Vec<(i64, f64)> = (-(max_k as i64)..=max_k as i64)
        .map(|k| (k, wk(k)))
        .filter(|(_, w)| *w != 0.0)
        .collect();
    if js.is_empty() || ks.is_empty() {
        return out;
    }

    // phase tables for both axes
    let ys: Vec<f64> = (0..ny).map(|b| out.y(b)).collect();
    let phase_k: Vec<Vec<Complex64>> = ks
        .iter()
        .map(|&(k, _)| {
            ys.iter()
                .map(|&y| Complex64::from_polar(1.0, k as f64 * y))
                .collect()
        })
        .collect();

    // inner pass: one weighted row per active j
    let rows: Vec<Vec<Complex64>> = js
        .par_iter()
        .map(|&(j, _)| {
            let mut row = vec![Complex64::new(0.0, 0.0); ny];
            for (ki, &(k, wkv)) in ks.iter().enumerate() {
                let c = grid.get(j, k) * wkv;
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let phases = &phase_k[ki];
                for (cell, ph) in row.iter_mut().zip(phases) {
                    *cell += c * ph;
                }
            }
            row
        })
        .collect();

    // outer pass: accumulate exp(i j x) * row across sample columns
    let xs: Vec<f64> = (0..nx).map(|a| out.x(a)).collect();
    out.values_mut()
        .par_chunks_mut(ny)
        .enumerate()
        .for_each(|(a, out_row)| {
            let x = xs[a];
            for ((j, wjv), row) in js.iter().zip(&rows) {
                let ph = Complex64::from_polar(*wjv, *j as f64 * x);
                for (cell, r) in out_row.iter_mut().zip(row) {
                    *cell += ph * r;
                }
            }
        });

    out
}

/// Rectangular partial sum `S_mn` sampled on the uniform grid.
pub fn partial_sum(grid: &CoefficientGrid, m: u32, n: u32, nx: usize, ny: usize) -> SampleGrid {
    synthesize_weighted(
        grid,
        |j| {
            if j.unsigned_abs() <= u64::from(m) {
                1.0
            } else {
                0.0
            }
        },
        m.min(grid.bound_j()),
        |k| {
            if k.unsigned_abs() <= u64::from(n) {
                1.0
            } else {
                0.0
            }
        },
        n.min(grid.bound_k()),
        nx,
        ny,
    )
}

/// Cesàro mean: the arithmetic average of the partial sums `S_jk` over
/// `0 <= j <= m`, `0 <= k <= n`, computed through its per-mode triangular
/// weights.
pub fn cesaro_mean(grid: &CoefficientGrid, m: u32, n: u32, nx: usize, ny: usize) -> SampleGrid {
    let wm = f64::from(m) + 1.0;
    let wn = f64::from(n) + 1.0;
    synthesize_weighted(
        grid,
        |j| ((wm - j.abs() as f64) / wm).max(0.0),
        m.min(grid.bound_j()),
        |k| ((wn - k.abs() as f64) / wn).max(0.0),
        n.min(grid.bound_k()),
        nx,
        ny,
    )
}

/// De la Vallée-Poussin mean: the average of `S_jk` over the window
/// `m < j <= lambda_m`, `n < k <= lambda_n`. Per mode this keeps weight 1
/// through `|j| <= m` and ramps linearly to zero across the window.
pub fn vp_mean(grid: &CoefficientGrid, params: &VPParams, nx: usize, ny: usize) -> SampleGrid {
    let (m, n) = (params.m(), params.n());
    let (lm, ln) = (params.lambda_m(), params.lambda_n());
    let span_m = f64::from(params.span_m());
    let span_n = f64::from(params.span_n());
    let wj = move |j: i64| {
        let a = j.unsigned_abs() as u32;
        if a <= m {
            1.0
        } else if a <= lm {
            f64::from(lm + 1 - a) / span_m
        } else {
            0.0
        }
    };
    let wk = move |k: i64| {
        let a = k.unsigned_abs() as u32;
        if a <= n {
            1.0
        } else if a <= ln {
            f64::from(ln + 1 - a) / span_n
        } else {
            0.0
        }
    };
    synthesize_weighted(
        grid,
        wj,
        lm.min(grid.bound_j()),
        wk,
        ln.min(grid.bound_k()),
        nx,
        ny,
    )
}

/// One-dimensional partial sum `sum_{k=-n..=n} c_k exp(i k x)` at each
/// point.
pub fn single_partial_sum(seq: &CoefficientSeq, n: u32, points: &[f64]) -> Vec<Complex64> {
    points
        .iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in -(n as i64)..=n as i64 {
                let c = seq.get(k);
                if c.norm_sqr() != 0.0 {
                    acc += c * Complex64::from_polar(1.0, k as f64 * x);
                }
            }
            acc
        })
        .collect()
}
