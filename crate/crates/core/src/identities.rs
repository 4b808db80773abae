//! Machine checks for the summation-by-parts representation identities
//! behind the de la Vallée-Poussin difference `V - S`, and the six-component
//! decomposition of that difference.
//!
//! Every check evaluates both sides of an identity independently from the
//! definitions — the means on one side, weighted boundary sums or
//! kernel-times-difference sums on the other — and reports the largest
//! pointwise deviation over a sample grid. For grids whose support lies
//! inside the window these are exact identities of trigonometric
//! polynomials, so residuals sit at rounding level; a genuinely wrong sign
//! or range shows up at unit scale.
//!
//! Sign conventions settled here (and validated by the residual tests):
//! the pure `j`-strip sum enters `V - S` with a plus sign, and the corner
//! identity's ninth term (the bare corner sum at `(|j|, |k|) = (m, n)`)
//! enters with a plus sign. Kernel factors are the constant-halved
//! [`e_kernel_half`](crate::kernels::e_kernel_half) form; the plain
//! [`e_kernel`](crate::kernels::e_kernel) does not telescope across the
//! signed zeros and leaves a residual at the scale of the first-magnitude
//! coefficients.

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::l1_norm;
use crate::error::{Error, Result};
use crate::grid::{signed_range, CoefficientGrid, DiffOrder, Sign, SignedIndex};
use crate::kernels::VPParams;
use crate::summability::{cesaro_mean, partial_sum, synthesize_weighted, vp_mean, SampleGrid};

/// Identifier strings for the four representation identities and the
/// decomposition, used in reports.
pub mod idents {
    /// `S_mn - sigma_mn` representation.
    pub const S_MINUS_SIGMA: &str = "s_minus_sigma";
    /// `V_mn - S_mn` three-sum representation.
    pub const V_MINUS_S: &str = "v_minus_s";
    /// Weighted `k`-strip summation by parts.
    pub const K_STRIP: &str = "k_strip";
    /// Doubly weighted corner-block summation by parts.
    pub const CORNER: &str = "corner";
    /// Six-component reconstruction of `V - S`.
    pub const DECOMPOSITION: &str = "decomposition";
}

/// Pointwise residual of one identity over a sample grid.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    /// Which identity was checked (see [`idents`]).
    pub lemma: &'static str,
    /// Largest `|LHS - RHS|` over the samples.
    pub max_abs_residual: f64,
    /// Sample point attaining the maximum.
    pub at_point: (f64, f64),
    /// Largest `|LHS|` over the samples, for relative judgment.
    pub lhs_scale: f64,
}

impl IdentityResidual {
    /// `max_abs_residual / max(lhs_scale, 1e-300)`.
    pub fn relative(&self) -> f64 {
        self.max_abs_residual / self.lhs_scale.max(1e-300)
    }

    fn from_sides(lemma: &'static str, lhs: &SampleGrid, rhs: &SampleGrid) -> Result<Self> {
        let (a, b, max_abs_residual) = lhs.max_abs_difference(rhs)?;
        Ok(Self {
            lemma,
            max_abs_residual,
            at_point: (lhs.x(a), lhs.y(b)),
            lhs_scale: lhs.max_modulus(),
        })
    }
}

/// The six sampled components of `V - S` with their L1 norms and the
/// reconstruction residual.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    /// Components in the order `r0 ..= r5`.
    pub components: [SampleGrid; 6],
    /// `r1 + r2 - r3 - r4 + r5 - r0`.
    pub reconstructed: SampleGrid,
    /// Deviation of the reconstruction from `V - S` evaluated directly.
    pub residual: IdentityResidual,
    /// L1 norms of the components, same order.
    pub component_norms: [f64; 6],
}

/// Per-magnitude weight of one sum term.
#[derive(Debug, Clone, Copy)]
enum MagWeight {
    One,
    /// `(top - magnitude) * inv_span`
    Ramp {
        top: u32,
        inv_span: f64,
    },
}

impl MagWeight {
    fn eval(self, mag: u32) -> f64 {
        match self {
            MagWeight::One => 1.0,
            MagWeight::Ramp { top, inv_span } => f64::from(top - mag) * inv_span,
        }
    }
}

/// One term of a kernel-sum side: over signed magnitudes `j_lo..=j_hi` and
/// `k_lo..=k_hi` (both signs each), accumulate
/// `scale * wj(|j|) * wk(|k|) * diff c_{jk} * Eh_j(x) * Eh_k(y)`.
#[derive(Debug, Clone, Copy)]
struct KernelTerm {
    scale: f64,
    j_lo: i64,
    j_hi: i64,
    k_lo: i64,
    k_hi: i64,
    wj: MagWeight,
    wk: MagWeight,
    diff: DiffOrder,
}

/// Cumulative table of the constant-halved kernels on one sample axis:
/// `table[mag][point]` for the plus sign; the minus sign is the conjugate.
fn half_kernel_table(max_mag: u32, points: &[f64]) -> Vec<Vec<Complex64>> {
    let mut table = Vec::with_capacity(max_mag as usize + 1);
    table.push(vec![Complex64::new(0.5, 0.0); points.len()]);
    for mag in 1..=max_mag {
        let prev = &table[mag as usize - 1];
        let row: Vec<Complex64> = prev
            .iter()
            .zip(points)
            .map(|(p, &t)| p + Complex64::from_polar(1.0, f64::from(mag) * t))
            .collect();
        table.push(row);
    }
    table
}

fn half_kernel_at(table: &[Vec<Complex64>], idx: SignedIndex, point: usize) -> Complex64 {
    let v = table[idx.magnitude() as usize][point];
    match idx.sign() {
        Sign::Plus => v,
        Sign::Minus => v.conj(),
    }
}

/// Evaluate a sum of kernel terms on an `nx x ny` sample grid.
fn eval_kernel_terms(
    grid: &CoefficientGrid,
    terms: &[KernelTerm],
    nx: usize,
    ny: usize,
) -> SampleGrid {
    let mut out = SampleGrid::zeros(nx, ny);
    let max_jmag = terms
        .iter()
        .map(|t| t.j_hi.max(0) as u32)
        .max()
        .unwrap_or(0);
    let max_kmag = terms
        .iter()
        .map(|t| t.k_hi.max(0) as u32)
        .max()
        .unwrap_or(0);
    let xs: Vec<f64> = (0..nx).map(|a| out.x(a)).collect();
    let ys: Vec<f64> = (0..ny).map(|b| out.y(b)).collect();
    let x_table = half_kernel_table(max_jmag, &xs);
    let y_table = half_kernel_table(max_kmag, &ys);

    // inner pass: one weighted row per active signed j, across all terms
    let mut rows: Vec<(SignedIndex, f64, Vec<Complex64>)> = Vec::new();
    for term in terms {
        for j in signed_range(term.j_lo, term.j_hi) {
            let wj = term.scale * term.wj.eval(j.magnitude());
            if wj == 0.0 {
                continue;
            }
            let mut row = vec![Complex64::new(0.0, 0.0); ny];
            for k in signed_range(term.k_lo, term.k_hi) {
                let c = grid.diff(term.diff, j, k) * term.wk.eval(k.magnitude());
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                for (b, cell) in row.iter_mut().enumerate() {
                    *cell += c * half_kernel_at(&y_table, k, b);
                }
            }
            rows.push((j, wj, row));
        }
    }

    // outer pass: accumulate kernel-weighted rows into each sample column
    use rayon::prelude::*;
    out.values_mut()
        .par_chunks_mut(ny)
        .enumerate()
        .for_each(|(a, out_row)| {
            for (j, wj, row) in &rows {
                let ph = *wj * half_kernel_at(&x_table, *j, a);
                for (cell, r) in out_row.iter_mut().zip(row) {
                    *cell += ph * r;
                }
            }
        });
    out
}

/// Windowed strip and corner sums that appear as the left-hand sides.
struct StripSums<'a> {
    grid: &'a CoefficientGrid,
    params: &'a VPParams,
    nx: usize,
    ny: usize,
}

impl StripSums<'_> {
    /// `sum_{|j| <= m} sum_{|k| = n+1..lambda_n} (lambda_n + 1 - |k|) / (lambda_n - n) c_jk e`
    fn k_strip(&self) -> SampleGrid {
        let p = self.params;
        let (n, ln) = (p.n(), p.lambda_n());
        let inv = 1.0 / f64::from(p.span_n());
        synthesize_weighted(
            self.grid,
            |j| {
                if j.unsigned_abs() as u32 <= p.m() {
                    1.0
                } else {
                    0.0
                }
            },
            p.m().min(self.grid.bound_j()),
            move |k| {
                let a = k.unsigned_abs() as u32;
                if a > n && a <= ln {
                    f64::from(ln + 1 - a) * inv
                } else {
                    0.0
                }
            },
            ln,
            self.nx,
            self.ny,
        )
    }

    /// Transpose strip: `sum_{|j| = m+1..lambda_m} sum_{|k| <= n} ...`
    fn j_strip(&self) -> SampleGrid {
        let p = self.params;
        let (m, lm) = (p.m(), p.lambda_m());
        let inv = 1.0 / f64::from(p.span_m());
        synthesize_weighted(
            self.grid,
            move |j| {
                let a = j.unsigned_abs() as u32;
                if a > m && a <= lm {
                    f64::from(lm + 1 - a) * inv
                } else {
                    0.0
                }
            },
            lm,
            |k| {
                if k.unsigned_abs() as u32 <= p.n() {
                    1.0
                } else {
                    0.0
                }
            },
            p.n().min(self.grid.bound_k()),
            self.nx,
            self.ny,
        )
    }

    /// Doubly weighted corner block over both windows.
    fn corner(&self) -> SampleGrid {
        let p = self.params;
        let (m, lm) = (p.m(), p.lambda_m());
        let (n, ln) = (p.n(), p.lambda_n());
        let inv_m = 1.0 / f64::from(p.span_m());
        let inv_n = 1.0 / f64::from(p.span_n());
        synthesize_weighted(
            self.grid,
            move |j| {
                let a = j.unsigned_abs() as u32;
                if a > m && a <= lm {
                    f64::from(lm + 1 - a) * inv_m
                } else {
                    0.0
                }
            },
            lm,
            move |k| {
                let a = k.unsigned_abs() as u32;
                if a > n && a <= ln {
                    f64::from(ln + 1 - a) * inv_n
                } else {
                    0.0
                }
            },
            ln,
            self.nx,
            self.ny,
        )
    }
}

fn check_window_coverage(grid: &CoefficientGrid, params: &VPParams) -> Result<()> {
    if grid.bound_j() < params.lambda_m() || grid.bound_k() < params.lambda_n() {
        return Err(Error::GridTooSmall {
            bound_j: grid.bound_j(),
            bound_k: grid.bound_k(),
            need_j: params.lambda_m(),
            need_k: params.lambda_n(),
        });
    }
    Ok(())
}

/// Sample resolution at which distinct trigonometric polynomials up to the
/// window degree cannot alias to equality: `(2 lambda_m + 3, 2 lambda_n + 3)`.
pub fn alias_free_resolution(params: &VPParams) -> (usize, usize) {
    (
        2 * params.lambda_m() as usize + 3,
        2 * params.lambda_n() as usize + 3,
    )
}

/// Residual of the `S_mn - sigma_mn` representation: the mean difference
/// against the sigma-combination plus the three weighted boundary sums.
pub fn partial_minus_cesaro_residual(
    grid: &CoefficientGrid,
    params: &VPParams,
    nx: usize,
    ny: usize,
) -> Result<IdentityResidual> {
    check_window_coverage(grid, params)?;
    let (m, n) = (params.m(), params.n());
    let (lm, ln) = (params.lambda_m(), params.lambda_n());
    let fm = f64::from(lm + 1) / f64::from(params.span_m());
    let fn_ = f64::from(ln + 1) / f64::from(params.span_n());

    let lhs = partial_sum(grid, m, n, nx, ny).sub(&cesaro_mean(grid, m, n, nx, ny))?;

    let s_ll = cesaro_mean(grid, lm, ln, nx, ny);
    let s_ln = cesaro_mean(grid, lm, n, nx, ny);
    let s_ml = cesaro_mean(grid, m, ln, nx, ny);
    let s_mn = cesaro_mean(grid, m, n, nx, ny);

    let one = Complex64::new(1.0, 0.0);
    // (lm+1)/(lm-m) (ln+1)/(ln-n) (s_ll - s_ln - s_ml + s_mn)
    let block = s_ll
        .add_scaled(-one, &s_ln)?
        .add_scaled(-one, &s_ml)?
        .add_scaled(one, &s_mn)?
        .scale(Complex64::new(fm * fn_, 0.0));
    // (lm+1)/(lm-m) (s_ln - s_mn) + (ln+1)/(ln-n) (s_ml - s_mn)
    let edge_j = s_ln.add_scaled(-one, &s_mn)?.scale(Complex64::new(fm, 0.0));
    let edge_k = s_ml
        .add_scaled(-one, &s_mn)?
        .scale(Complex64::new(fn_, 0.0));

    let strips = StripSums {
        grid,
        params,
        nx,
        ny,
    };
    let rhs = block
        .add_scaled(one, &edge_j)?
        .add_scaled(one, &edge_k)?
        .add_scaled(-one, &strips.k_strip())?
        .add_scaled(-one, &strips.j_strip())?
        .add_scaled(-one, &strips.corner())?;

    IdentityResidual::from_sides(idents::S_MINUS_SIGMA, &lhs, &rhs)
}

/// Residual of the `V - S` three-sum representation with an explicit sign
/// on the pure `j`-strip sum. The shipped sign is positive (see
/// [`vp_minus_partial_residual`]); the negative variant exists so tests can
/// demonstrate the two are numerically distinguishable.
pub fn vp_minus_partial_residual_signed(
    grid: &CoefficientGrid,
    params: &VPParams,
    nx: usize,
    ny: usize,
    j_strip_positive: bool,
) -> Result<IdentityResidual> {
    check_window_coverage(grid, params)?;
    let lhs =
        vp_mean(grid, params, nx, ny).sub(&partial_sum(grid, params.m(), params.n(), nx, ny))?;
    let strips = StripSums {
        grid,
        params,
        nx,
        ny,
    };
    let one = Complex64::new(1.0, 0.0);
    let sign = if j_strip_positive { one } else { -one };
    let rhs = strips
        .corner()
        .add_scaled(one, &strips.k_strip())?
        .add_scaled(sign, &strips.j_strip())?;
    IdentityResidual::from_sides(idents::V_MINUS_S, &lhs, &rhs)
}

/// Residual of the `V - S` representation with the validated sign.
pub fn vp_minus_partial_residual(
    grid: &CoefficientGrid,
    params: &VPParams,
    nx: usize,
    ny: usize,
) -> Result<IdentityResidual> {
    vp_minus_partial_residual_signed(grid, params, nx, ny, true)
}

/// The six kernel-sum terms equal to the weighted `k`-strip.
fn k_strip_terms(params: &VPParams) -> Vec<KernelTerm> {
    let m = i64::from(params.m());
    let n = i64::from(params.n());
    let ln = i64::from(params.lambda_n());
    let inv_n = 1.0 / f64::from(params.span_n());
    let ramp_n = MagWeight::Ramp {
        top: params.lambda_n(),
        inv_span: inv_n,
    };
    vec![
        KernelTerm {
            scale: 1.0,
            j_lo: 0,
            j_hi: m - 1,
            k_lo: n,
            k_hi: ln - 1,
            wj: MagWeight::One,
            wk: ramp_n,
            diff: DiffOrder::D11,
        },
        KernelTerm {
            scale: inv_n,
            j_lo: 0,
            j_hi: m - 1,
            k_lo: n + 1,
            k_hi: ln,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D10,
        },
        KernelTerm {
            scale: -1.0,
            j_lo: 0,
            j_hi: m - 1,
            k_lo: n,
            k_hi: n,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D10,
        },
        KernelTerm {
            scale: 1.0,
            j_lo: m,
            j_hi: m,
            k_lo: n,
            k_hi: ln - 1,
            wj: MagWeight::One,
            wk: ramp_n,
            diff: DiffOrder::D01,
        },
        KernelTerm {
            scale: inv_n,
            j_lo: m,
            j_hi: m,
            k_lo: n + 1,
            k_hi: ln,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D00,
        },
        KernelTerm {
            scale: -1.0,
            j_lo: m,
            j_hi: m,
            k_lo: n,
            k_hi: n,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D00,
        },
    ]
}

/// Transpose of [`k_strip_terms`] for the `j`-strip, exercised by the
/// transpose-identity test.
#[cfg(test)]
fn j_strip_terms(params: &VPParams) -> Vec<KernelTerm> {
    let m = i64::from(params.m());
    let n = i64::from(params.n());
    let lm = i64::from(params.lambda_m());
    let inv_m = 1.0 / f64::from(params.span_m());
    let ramp_m = MagWeight::Ramp {
        top: params.lambda_m(),
        inv_span: inv_m,
    };
    vec![
        KernelTerm {
            scale: 1.0,
            j_lo: m,
            j_hi: lm - 1,
            k_lo: 0,
            k_hi: n - 1,
            wj: ramp_m,
            wk: MagWeight::One,
            diff: DiffOrder::D11,
        },
        KernelTerm {
            scale: inv_m,
            j_lo: m + 1,
            j_hi: lm,
            k_lo: 0,
            k_hi: n - 1,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D01,
        },
        KernelTerm {
            scale: -1.0,
            j_lo: m,
            j_hi: m,
            k_lo: 0,
            k_hi: n - 1,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D01,
        },
        KernelTerm {
            scale: 1.0,
            j_lo: m,
            j_hi: lm - 1,
            k_lo: n,
            k_hi: n,
            wj: ramp_m,
            wk: MagWeight::One,
            diff: DiffOrder::D10,
        },
        KernelTerm {
            scale: inv_m,
            j_lo: m + 1,
            j_hi: lm,
            k_lo: n,
            k_hi: n,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D00,
        },
        KernelTerm {
            scale: -1.0,
            j_lo: m,
            j_hi: m,
            k_lo: n,
            k_hi: n,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D00,
        },
    ]
}

/// The nine kernel-sum terms equal to the doubly weighted corner block.
fn corner_terms(params: &VPParams) -> Vec<KernelTerm> {
    let m = i64::from(params.m());
    let n = i64::from(params.n());
    let lm = i64::from(params.lambda_m());
    let ln = i64::from(params.lambda_n());
    let inv_m = 1.0 / f64::from(params.span_m());
    let inv_n = 1.0 / f64::from(params.span_n());
    let ramp_m = MagWeight::Ramp {
        top: params.lambda_m(),
        inv_span: inv_m,
    };
    let ramp_n = MagWeight::Ramp {
        top: params.lambda_n(),
        inv_span: inv_n,
    };
    vec![
        KernelTerm {
            scale: 1.0,
            j_lo: m,
            j_hi: lm - 1,
            k_lo: n,
            k_hi: ln - 1,
            wj: ramp_m,
            wk: ramp_n,
            diff: DiffOrder::D11,
        },
        KernelTerm {
            scale: inv_n,
            j_lo: m,
            j_hi: lm - 1,
            k_lo: n + 1,
            k_hi: ln,
            wj: ramp_m,
            wk: MagWeight::One,
            diff: DiffOrder::D10,
        },
        KernelTerm {
            scale: -1.0,
            j_lo: m,
            j_hi: lm - 1,
            k_lo: n,
            k_hi: n,
            wj: ramp_m,
            wk: MagWeight::One,
            diff: DiffOrder::D10,
        },
        KernelTerm {
            scale: inv_m,
            j_lo: m + 1,
            j_hi: lm,
            k_lo: n,
            k_hi: ln - 1,
            wj: MagWeight::One,
            wk: ramp_n,
            diff: DiffOrder::D01,
        },
        KernelTerm {
            scale: inv_m * inv_n,
            j_lo: m + 1,
            j_hi: lm,
            k_lo: n + 1,
            k_hi: ln,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D00,
        },
        KernelTerm {
            scale: -inv_m,
            j_lo: m + 1,
            j_hi: lm,
            k_lo: n,
            k_hi: n,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D00,
        },
        KernelTerm {
            scale: -1.0,
            j_lo: m,
            j_hi: m,
            k_lo: n,
            k_hi: ln - 1,
            wj: MagWeight::One,
            wk: ramp_n,
            diff: DiffOrder::D01,
        },
        KernelTerm {
            scale: -inv_n,
            j_lo: m,
            j_hi: m,
            k_lo: n + 1,
            k_hi: ln,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D00,
        },
        KernelTerm {
            scale: 1.0,
            j_lo: m,
            j_hi: m,
            k_lo: n,
            k_hi: n,
            wj: MagWeight::One,
            wk: MagWeight::One,
            diff: DiffOrder::D00,
        },
    ]
}

/// Residual of the `k`-strip summation-by-parts identity: the weighted
/// boundary double sum against its six-term kernel form.
pub fn k_strip_residual(
    grid: &CoefficientGrid,
    params: &VPParams,
    nx: usize,
    ny: usize,
) -> Result<IdentityResidual> {
    check_window_coverage(grid, params)?;
    let lhs = StripSums {
        grid,
        params,
        nx,
        ny,
    }
    .k_strip();
    let rhs = eval_kernel_terms(grid, &k_strip_terms(params), nx, ny);
    IdentityResidual::from_sides(idents::K_STRIP, &lhs, &rhs)
}

/// Residual of the corner-block summation-by-parts identity: the doubly
/// weighted corner sum against its nine-term kernel form.
pub fn corner_residual(
    grid: &CoefficientGrid,
    params: &VPParams,
    nx: usize,
    ny: usize,
) -> Result<IdentityResidual> {
    check_window_coverage(grid, params)?;
    let lhs = StripSums {
        grid,
        params,
        nx,
        ny,
    }
    .corner();
    let rhs = eval_kernel_terms(grid, &corner_terms(params), nx, ny);
    IdentityResidual::from_sides(idents::CORNER, &lhs, &rhs)
}

/// Term tables for the six components of `V - S`.
fn component_terms(params: &VPParams) -> [Vec<KernelTerm>; 6] {
    let m = i64::from(params.m());
    let n = i64::from(params.n());
    let lm = i64::from(params.lambda_m());
    let ln = i64::from(params.lambda_n());
    let inv_m = 1.0 / f64::from(params.span_m());
    let inv_n = 1.0 / f64::from(params.span_n());
    let ramp_m = MagWeight::Ramp {
        top: params.lambda_m(),
        inv_span: inv_m,
    };
    let ramp_n = MagWeight::Ramp {
        top: params.lambda_n(),
        inv_span: inv_n,
    };
    let one = MagWeight::One;

    let r0 = vec![KernelTerm {
        scale: 1.0,
        j_lo: m,
        j_hi: m,
        k_lo: n,
        k_hi: n,
        wj: one,
        wk: one,
        diff: DiffOrder::D00,
    }];
    let r1 = vec![
        KernelTerm {
            scale: 1.0,
            j_lo: m,
            j_hi: lm - 1,
            k_lo: n,
            k_hi: ln - 1,
            wj: ramp_m,
            wk: ramp_n,
            diff: DiffOrder::D11,
        },
        KernelTerm {
            scale: 1.0,
            j_lo: 0,
            j_hi: m - 1,
            k_lo: n,
            k_hi: ln - 1,
            wj: one,
            wk: ramp_n,
            diff: DiffOrder::D11,
        },
        KernelTerm {
            scale: 1.0,
            j_lo: m,
            j_hi: lm - 1,
            k_lo: 0,
            k_hi: n - 1,
            wj: ramp_m,
            wk: one,
            diff: DiffOrder::D11,
        },
    ];
    let r2 = vec![
        KernelTerm {
            scale: inv_n,
            j_lo: 0,
            j_hi: m - 1,
            k_lo: n + 1,
            k_hi: ln,
            wj: one,
            wk: one,
            diff: DiffOrder::D10,
        },
        KernelTerm {
            scale: inv_m,
            j_lo: m + 1,
            j_hi: lm,
            k_lo: 0,
            k_hi: n - 1,
            wj: one,
            wk: one,
            diff: DiffOrder::D01,
        },
        KernelTerm {
            scale: inv_n,
            j_lo: m,
            j_hi: lm - 1,
            k_lo: n + 1,
            k_hi: ln,
            wj: ramp_m,
            wk: one,
            diff: DiffOrder::D10,
        },
        KernelTerm {
            scale: inv_m,
            j_lo: m + 1,
            j_hi: lm,
            k_lo: n,
            k_hi: ln - 1,
            wj: one,
            wk: ramp_n,
            diff: DiffOrder::D01,
        },
    ];
    let r3 = vec![KernelTerm {
        scale: 1.0,
        j_lo: 0,
        j_hi: m - 1,
        k_lo: n,
        k_hi: n,
        wj: one,
        wk: one,
        diff: DiffOrder::D10,
    }];
    let r4 = vec![KernelTerm {
        scale: 1.0,
        j_lo: m,
        j_hi: m,
        k_lo: 0,
        k_hi: n - 1,
        wj: one,
        wk: one,
        diff: DiffOrder::D01,
    }];
    let r5 = vec![KernelTerm {
        scale: inv_m * inv_n,
        j_lo: m + 1,
        j_hi: lm,
        k_lo: n + 1,
        k_hi: ln,
        wj: one,
        wk: one,
        diff: DiffOrder::D00,
    }];

    [r0, r1, r2, r3, r4, r5]
}

/// Sample the six components of `V - S`, reconstruct
/// `r1 + r2 - r3 - r4 + r5 - r0`, and compare against `V - S` evaluated
/// directly from the means.
pub fn decompose_v_minus_s(
    grid: &CoefficientGrid,
    params: &VPParams,
    nx: usize,
    ny: usize,
) -> Result<DecompositionResult> {
    check_window_coverage(grid, params)?;
    let tables = component_terms(params);
    let components: Vec<SampleGrid> = tables
        .iter()
        .map(|terms| eval_kernel_terms(grid, terms, nx, ny))
        .collect();
    let one = Complex64::new(1.0, 0.0);
    let reconstructed = components[1]
        .add_scaled(one, &components[2])?
        .add_scaled(-one, &components[3])?
        .add_scaled(-one, &components[4])?
        .add_scaled(one, &components[5])?
        .add_scaled(-one, &components[0])?;

    let direct =
        vp_mean(grid, params, nx, ny).sub(&partial_sum(grid, params.m(), params.n(), nx, ny))?;
    let residual = IdentityResidual::from_sides(idents::DECOMPOSITION, &direct, &reconstructed)?;

    let component_norms: Vec<f64> = components.iter().map(l1_norm).collect();
    // triangle inequality: the pieces must bound the whole, every run
    let total: f64 = component_norms.iter().sum();
    debug_assert!(
        l1_norm(&direct) <= total + 1e-9 * total.max(1.0),
        "component norms fail to bound ||V - S||"
    );

    let components: [SampleGrid; 6] = components.try_into().expect("six components");
    Ok(DecompositionResult {
        components,
        reconstructed,
        residual,
        component_norms: component_norms.try_into().expect("six norms"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded_grid(bound_j: u32, bound_k: u32, seed: u64) -> CoefficientGrid {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        CoefficientGrid::from_fn(bound_j, bound_k, |_, _| Complex64::new(next(), next()))
    }

    fn residuals_for(grid: &CoefficientGrid, params: &VPParams) -> Vec<IdentityResidual> {
        let (nx, ny) = alias_free_resolution(params);
        vec![
            partial_minus_cesaro_residual(grid, params, nx, ny).unwrap(),
            vp_minus_partial_residual(grid, params, nx, ny).unwrap(),
            k_strip_residual(grid, params, nx, ny).unwrap(),
            corner_residual(grid, params, nx, ny).unwrap(),
        ]
    }

    #[test]
    fn zero_grid_residuals_are_exactly_zero() {
        let params = VPParams::new(2.0, 3, 3).unwrap();
        let grid = CoefficientGrid::zeros(6, 6);
        for r in residuals_for(&grid, &params) {
            assert_eq!(r.max_abs_residual, 0.0, "{}", r.lemma);
            assert_eq!(r.lhs_scale, 0.0);
        }
        let dec = decompose_v_minus_s(&grid, &params, 15, 15).unwrap();
        assert_eq!(dec.residual.max_abs_residual, 0.0);
        for norm in dec.component_norms {
            assert_eq!(norm, 0.0);
        }
    }

    #[test]
    fn random_grids_satisfy_all_identities() {
        for (m, n, lambda, seed) in [
            (4u32, 4u32, 2.0f64, 1u64),
            (3, 5, 1.5, 2),
            (1, 1, 2.0, 3),
            (2, 7, 1.5, 4),
            (6, 2, 2.0, 5),
        ] {
            let params = VPParams::new(lambda, m, n).unwrap();
            let grid = seeded_grid(params.lambda_m(), params.lambda_n(), seed);
            for r in residuals_for(&grid, &params) {
                assert!(
                    r.relative() <= 1e-10,
                    "{} at m={m} n={n} lambda={lambda}: {}",
                    r.lemma,
                    r.relative()
                );
            }
        }
    }

    #[test]
    fn fifty_seeded_grids_stay_within_a_tenth_nano() {
        // m, n cycle through 2..=8 and lambda alternates {2, 1.5}
        let mut state = 0xACCE97A0CEu64;
        let mut next = move || {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for i in 0..50u32 {
            let m = 2 + (i % 7);
            let n = 2 + ((i / 7) % 7);
            let lambda = if i % 2 == 0 { 2.0 } else { 1.5 };
            let params = VPParams::new(lambda, m, n).unwrap();
            let grid = CoefficientGrid::from_fn(params.lambda_m(), params.lambda_n(), |_, _| {
                Complex64::new(next(), next())
            });
            for r in residuals_for(&grid, &params) {
                assert!(
                    r.relative() <= 1e-10,
                    "{} at m={m} n={n} lambda={lambda}: {}",
                    r.lemma,
                    r.relative()
                );
            }
        }
    }

    #[test]
    fn j_strip_transpose_identity_holds() {
        for (m, n, lambda, seed) in [(4u32, 3u32, 2.0f64, 13u64), (2, 6, 1.5, 14)] {
            let params = VPParams::new(lambda, m, n).unwrap();
            let grid = seeded_grid(params.lambda_m(), params.lambda_n(), seed);
            let (nx, ny) = alias_free_resolution(&params);
            let lhs = StripSums {
                grid: &grid,
                params: &params,
                nx,
                ny,
            }
            .j_strip();
            let rhs = eval_kernel_terms(&grid, &j_strip_terms(&params), nx, ny);
            let r = IdentityResidual::from_sides("j_strip", &lhs, &rhs).unwrap();
            assert!(r.relative() <= 1e-10, "residual {}", r.relative());
        }
    }

    #[test]
    fn wrong_j_strip_sign_is_detectable() {
        let params = VPParams::new(1.5, 4, 4).unwrap();
        let grid = seeded_grid(params.lambda_m(), params.lambda_n(), 9);
        let (nx, ny) = alias_free_resolution(&params);
        let good = vp_minus_partial_residual_signed(&grid, &params, nx, ny, true).unwrap();
        let bad = vp_minus_partial_residual_signed(&grid, &params, nx, ny, false).unwrap();
        assert!(good.relative() <= 1e-10);
        assert!(bad.max_abs_residual > 1e-3 * bad.lhs_scale);
    }

    #[test]
    fn k_strip_single_mode_reduces_to_one_term() {
        // support at (0, n+1): the strip weight there is exactly 1, so the
        // left side is gamma * exp(i (n+1) y) and its scale is |gamma|
        let (m, n, lambda) = (2u32, 2u32, 2.0f64);
        let params = VPParams::new(lambda, m, n).unwrap();
        let gamma = Complex64::new(2.0, 0.5);
        let grid = CoefficientGrid::from_entries(
            params.lambda_m(),
            params.lambda_n(),
            &[(0, i64::from(n) + 1, gamma)],
        )
        .unwrap();
        let (nx, ny) = alias_free_resolution(&params);
        let r = k_strip_residual(&grid, &params, nx, ny).unwrap();
        assert!((r.lhs_scale - gamma.norm()).abs() <= 1e-12 * gamma.norm());
        assert!(r.relative() <= 1e-12);
    }

    #[test]
    fn corner_single_mode_reduces_to_one_term() {
        let (m, n, lambda) = (3u32, 2u32, 2.0f64);
        let params = VPParams::new(lambda, m, n).unwrap();
        let gamma = Complex64::new(-1.0, 1.5);
        let grid = CoefficientGrid::from_entries(
            params.lambda_m(),
            params.lambda_n(),
            &[(i64::from(m) + 1, i64::from(n) + 1, gamma)],
        )
        .unwrap();
        let (nx, ny) = alias_free_resolution(&params);
        let r = corner_residual(&grid, &params, nx, ny).unwrap();
        // both window weights equal 1 at the inner corner
        assert!((r.lhs_scale - gamma.norm()).abs() <= 1e-12 * gamma.norm());
        assert!(r.relative() <= 1e-12);
    }

    #[test]
    fn residuals_are_unimodular_scale_invariant() {
        let params = VPParams::new(1.5, 3, 3).unwrap();
        let grid = seeded_grid(params.lambda_m(), params.lambda_n(), 21);
        let rotated = CoefficientGrid::from_fn(grid.bound_j(), grid.bound_k(), |j, k| {
            grid.get(j, k) * Complex64::from_polar(1.0, 0.81)
        });
        let (nx, ny) = alias_free_resolution(&params);
        let base = k_strip_residual(&grid, &params, nx, ny).unwrap();
        let rot = k_strip_residual(&rotated, &params, nx, ny).unwrap();
        assert!((base.relative() - rot.relative()).abs() <= 1e-12);
    }

    #[test]
    fn undersized_grid_is_rejected() {
        let params = VPParams::new(2.0, 4, 4).unwrap(); // needs bounds (8, 8)
        let grid = CoefficientGrid::zeros(3, 3);
        assert!(matches!(
            k_strip_residual(&grid, &params, 9, 9),
            Err(Error::GridTooSmall { .. })
        ));
    }

    #[test]
    fn decomposition_reconstructs_v_minus_s() {
        let params = VPParams::new(2.0, 4, 4).unwrap();
        let grid = seeded_grid(params.lambda_m(), params.lambda_n(), 33);
        let (nx, ny) = alias_free_resolution(&params);
        let dec = decompose_v_minus_s(&grid, &params, nx, ny).unwrap();
        assert!(dec.residual.relative() <= 1e-9);

        // triangle inequality: ||V - S|| <= sum of component norms
        let direct = vp_mean(&grid, &params, nx, ny)
            .sub(&partial_sum(&grid, params.m(), params.n(), nx, ny))
            .unwrap();
        let total: f64 = dec.component_norms.iter().sum();
        assert!(l1_norm(&direct) <= total + 1e-9);
    }
}
