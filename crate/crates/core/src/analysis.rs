//! L1-norm quadrature on the torus, doubling-based refinement, and the
//! convergence experiment harness.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::grid::CoefficientGrid;
use crate::identities::decompose_v_minus_s;
use crate::kernels::VPParams;
use crate::summability::{cesaro_mean, partial_sum, vp_mean, SampleGrid};

/// Rectangle-rule L1 norm `(2 pi / nx)(2 pi / ny) * sum |values|` on the
/// half-open uniform grid. Exact when the sample modulus is constant.
pub fn l1_norm(samples: &SampleGrid) -> f64 {
    let h = (2.0 * std::f64::consts::PI / samples.nx() as f64)
        * (2.0 * std::f64::consts::PI / samples.ny() as f64);
    let sum: f64 = samples.values().iter().map(|v| v.norm()).sum();
    sum * h
}

/// `l1_norm(a - b)`; shapes must match.
pub fn l1_distance(a: &SampleGrid, b: &SampleGrid) -> Result<f64> {
    Ok(l1_norm(&a.sub(b)?))
}

/// A refined quadrature value: the last evaluation, the resolution it was
/// computed at, and the change from the previous doubling.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Refined {
    pub value: f64,
    pub resolution: u32,
    pub delta: f64,
}

/// Double the resolution until two successive values differ by less than
/// `tol`, or error with [`Error::NoConvergence`] once doubling would pass
/// `max_n`. The callback is evaluated at `start, 2*start, 4*start, ...`.
pub fn refine(
    mut eval: impl FnMut(u32) -> f64,
    start: u32,
    tol: f64,
    max_n: u32,
) -> Result<Refined> {
    assert!(tol > 0.0, "refinement tolerance must be positive");
    assert!(start >= 1, "refinement must start at a positive resolution");
    let mut n = start;
    let mut value = eval(n);
    let mut delta = f64::INFINITY;
    loop {
        let next = match n.checked_mul(2) {
            Some(next) if next <= max_n => next,
            _ => {
                return Err(Error::NoConvergence {
                    value,
                    resolution: n,
                    delta,
                    tol,
                });
            }
        };
        let refined = eval(next);
        delta = (refined - value).abs();
        n = next;
        value = refined;
        if delta < tol {
            return Ok(Refined {
                value,
                resolution: n,
                delta,
            });
        }
    }
}

/// One row of a convergence experiment: the four norms at the refined
/// quadrature resolution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExperimentRecord {
    pub m: u32,
    pub n: u32,
    pub lambda: f64,
    /// `||S_mn - f||_1`
    pub norm_s_f: f64,
    /// `||sigma_mn - f||_1`
    pub norm_sigma_f: f64,
    /// `||V_mn - f||_1`
    pub norm_v_f: f64,
    /// `||V_mn - S_mn||_1`
    pub norm_v_s: f64,
    /// Per-axis quadrature resolution the norms were evaluated at.
    pub quad_n: u32,
    /// Last doubling change of `norm_s_f`.
    pub refine_delta: f64,
}

/// Reference evaluation for a family: either its closed form or a certified
/// truncation of its series.
enum Reference {
    ClosedForm(FamilySpec),
    Truncated {
        grid: CoefficientGrid,
        j: u32,
        k: u32,
    },
}

impl Reference {
    fn for_family(spec: &FamilySpec, grid: &CoefficientGrid, epsilon: f64) -> Result<Self> {
        if spec.closed_form(1, 1).is_some() {
            return Ok(Reference::ClosedForm(spec.clone()));
        }
        let (j, k) = spec.reference_truncation(epsilon)?;
        if grid.bound_j() >= j && grid.bound_k() >= k {
            Ok(Reference::Truncated {
                grid: grid.clone(),
                j,
                k,
            })
        } else {
            // the caller sized the working grid; rebuild large enough
            Ok(Reference::Truncated {
                grid: spec.build(j, k)?,
                j,
                k,
            })
        }
    }

    fn max_degree(&self) -> u32 {
        match self {
            Reference::ClosedForm(_) => 0,
            Reference::Truncated { j, k, .. } => (*j).max(*k),
        }
    }

    fn eval(&self, nx: usize, ny: usize) -> SampleGrid {
        match self {
            Reference::ClosedForm(spec) => spec
                .closed_form(nx, ny)
                .expect("closed form checked at construction"),
            Reference::Truncated { grid, j, k } => partial_sum(grid, *j, *k, nx, ny),
        }
    }
}

/// Run the convergence experiment for one family: for every `(m, n)` in the
/// list, measure `||S - f||`, `||sigma - f||`, `||V - f||` and `||V - S||`
/// at a quadrature resolution refined until `||S - f||` stabilizes within
/// `tol`. Records are sorted by `min(m, n)`, then `(m, n)`.
pub fn convergence_run(
    spec: &FamilySpec,
    mn_list: &[(u32, u32)],
    lambda: f64,
    tol: f64,
) -> Result<Vec<ExperimentRecord>> {
    if mn_list.is_empty() {
        return Err(Error::InvalidParameter("empty (m, n) list".to_string()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }

    // validate every window before doing any work
    let mut windows = Vec::with_capacity(mn_list.len());
    for &(m, n) in mn_list {
        windows.push(VPParams::new(lambda, m, n)?);
    }

    let max_lm = windows.iter().map(|p| p.lambda_m()).max().unwrap();
    let max_ln = windows.iter().map(|p| p.lambda_n()).max().unwrap();
    let grid = spec.build(max_lm.max(1), max_ln.max(1))?;
    let reference = Reference::for_family(spec, &grid, tol / 10.0)?;

    let mut records: Vec<ExperimentRecord> = windows
        .par_iter()
        .map(|params| -> Result<ExperimentRecord> {
            let (m, n) = (params.m(), params.n());
            let max_deg = params
                .lambda_m()
                .max(params.lambda_n())
                .max(reference.max_degree());
            let start = (2 * max_deg + 3).max(64);
            let max_n = start.saturating_mul(64);

            // hitting the resolution cap is not fatal here: the record
            // carries the achieved doubling delta for the caller to judge
            let refined = match refine(
                |res| {
                    let s = partial_sum(&grid, m, n, res as usize, res as usize);
                    let f = reference.eval(res as usize, res as usize);
                    l1_distance(&s, &f).expect("matching shapes")
                },
                start,
                tol,
                max_n,
            ) {
                Ok(refined) => refined,
                Err(Error::NoConvergence {
                    value,
                    resolution,
                    delta,
                    ..
                }) => Refined {
                    value,
                    resolution,
                    delta,
                },
                Err(other) => return Err(other),
            };

            let res = refined.resolution as usize;
            let f = reference.eval(res, res);
            let s = partial_sum(&grid, m, n, res, res);
            let sigma = cesaro_mean(&grid, m, n, res, res);
            let v = vp_mean(&grid, params, res, res);
            let record = ExperimentRecord {
                m,
                n,
                lambda,
                norm_s_f: refined.value,
                norm_sigma_f: l1_distance(&sigma, &f)?,
                norm_v_f: l1_distance(&v, &f)?,
                norm_v_s: l1_distance(&v, &s)?,
                quad_n: refined.resolution,
                refine_delta: refined.delta,
            };
            debug_assert!(
                record.norm_v_f <= record.norm_v_s + record.norm_s_f + 1e-9,
                "triangle inequality violated"
            );
            Ok(record)
        })
        .collect::<Result<Vec<_>>>()?;

    records.sort_by_key(|r| (r.m.min(r.n), r.m, r.n));
    Ok(records)
}

/// One row of a decomposition-norm run: the six component norms of `V - S`
/// at a stabilized quadrature resolution.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionRecord {
    pub m: u32,
    pub n: u32,
    pub lambda: f64,
    /// L1 norms of the components `r0 ..= r5`.
    pub component_norms: [f64; 6],
    /// `||V - S||_1` at the same resolution.
    pub norm_v_s: f64,
    /// Relative reconstruction residual of `V - S` from the components.
    pub reconstruction_residual: f64,
    pub quad_n: u32,
    /// Largest doubling change over the six component norms.
    pub refine_delta: f64,
}

/// Decompose `V - S` for every `(m, n)` and report the component L1 norms.
/// Each norm is evaluated at a resolution and its doubling; the doubled
/// values are reported together with the largest change.
pub fn decomposition_norm_run(
    spec: &FamilySpec,
    mn_list: &[(u32, u32)],
    lambda: f64,
) -> Result<Vec<DecompositionRecord>> {
    if mn_list.is_empty() {
        return Err(Error::InvalidParameter("empty (m, n) list".to_string()));
    }
    let mut windows = Vec::with_capacity(mn_list.len());
    for &(m, n) in mn_list {
        windows.push(VPParams::new(lambda, m, n)?);
    }
    let max_lm = windows.iter().map(|p| p.lambda_m()).max().unwrap();
    let max_ln = windows.iter().map(|p| p.lambda_n()).max().unwrap();
    let grid = spec.build(max_lm.max(1), max_ln.max(1))?;
    decomposition_norm_run_on_grid(&grid, mn_list, lambda)
}

/// [`decomposition_norm_run`] on an already-materialized grid.
pub fn decomposition_norm_run_on_grid(
    grid: &CoefficientGrid,
    mn_list: &[(u32, u32)],
    lambda: f64,
) -> Result<Vec<DecompositionRecord>> {
    if mn_list.is_empty() {
        return Err(Error::InvalidParameter("empty (m, n) list".to_string()));
    }
    let mut windows = Vec::with_capacity(mn_list.len());
    for &(m, n) in mn_list {
        windows.push(VPParams::new(lambda, m, n)?);
    }

    let mut records: Vec<DecompositionRecord> = windows
        .par_iter()
        .map(|params| -> Result<DecompositionRecord> {
            // the component integrands are moduli of window-degree kernel
            // sums, so double until every norm is stable to 1e-3 relative
            let start = (2 * params.lambda_m().max(params.lambda_n()) + 3).max(64) as usize;
            let cap = start * 32;
            let mut res = start;
            let mut current = decompose_v_minus_s(grid, params, res, res)?;
            let mut refine_delta;
            loop {
                let next_res = 2 * res;
                let next = decompose_v_minus_s(grid, params, next_res, next_res)?;
                refine_delta = current
                    .component_norms
                    .iter()
                    .zip(&next.component_norms)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let stable = current
                    .component_norms
                    .iter()
                    .zip(&next.component_norms)
                    .all(|(a, b)| (a - b).abs() <= (1e-3 * b.abs()).max(1e-12));
                res = next_res;
                current = next;
                if stable || 2 * res > cap {
                    break;
                }
            }
            let direct = vp_mean(grid, params, res, res).sub(&partial_sum(
                grid,
                params.m(),
                params.n(),
                res,
                res,
            ))?;
            Ok(DecompositionRecord {
                m: params.m(),
                n: params.n(),
                lambda,
                component_norms: current.component_norms,
                norm_v_s: l1_norm(&direct),
                reconstruction_residual: current.residual.relative(),
                quad_n: res as u32,
                refine_delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    records.sort_by_key(|r| (r.m.min(r.n), r.m, r.n));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn norm_of_constant_is_the_torus_area() {
        let g = SampleGrid::from_fn(17, 9, |_, _| Complex64::new(1.0, 0.0));
        let want = (2.0 * PI) * (2.0 * PI);
        assert!((l1_norm(&g) - want).abs() < 1e-12);
        assert_eq!(l1_norm(&SampleGrid::zeros(5, 5)), 0.0);
    }

    #[test]
    fn norm_of_unimodular_wave_is_the_torus_area() {
        let g = SampleGrid::from_fn(32, 8, |x, _| Complex64::from_polar(1.0, x));
        let want = (2.0 * PI) * (2.0 * PI);
        assert!((l1_norm(&g) - want).abs() < 1e-12);
    }

    #[test]
    fn norm_scales_homogeneously() {
        let g = SampleGrid::from_fn(16, 16, |x, y| Complex64::new(x.sin(), y.cos()));
        let alpha = Complex64::new(0.0, -2.5);
        let scaled = g.scale(alpha);
        assert!((l1_norm(&scaled) - alpha.norm() * l1_norm(&g)).abs() <= 1e-13 * l1_norm(&g));
    }

    #[test]
    fn distance_is_symmetric_and_triangular() {
        let a = SampleGrid::from_fn(9, 9, Complex64::new);
        let b = SampleGrid::from_fn(9, 9, |x, y| Complex64::new(y, x * x));
        let c = SampleGrid::from_fn(9, 9, |x, _| Complex64::from_polar(1.0, 3.0 * x));
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(l1_distance(&a, &b).unwrap(), l1_distance(&b, &a).unwrap());
        let ab = l1_distance(&a, &b).unwrap();
        let ac = l1_distance(&a, &c).unwrap();
        let cb = l1_distance(&c, &b).unwrap();
        assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn distance_requires_matching_shapes() {
        let a = SampleGrid::zeros(4, 4);
        let b = SampleGrid::zeros(4, 5);
        assert!(matches!(
            l1_distance(&a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn refine_is_immediate_for_constant_integrands() {
        let r = refine(
            |n| {
                l1_norm(&SampleGrid::from_fn(n as usize, 4, |_, _| {
                    Complex64::new(2.0, 0.0)
                }))
            },
            8,
            1e-12,
            1024,
        )
        .unwrap();
        assert_eq!(r.resolution, 16);
        assert!(r.delta <= 1e-13);
        assert!((r.value - 2.0 * (2.0 * PI) * (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn refine_errors_when_it_cannot_double() {
        let err = refine(|_| 1.0, 64, 1e-9, 64).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { resolution: 64, .. }));
    }

    #[test]
    fn kernel_norm_refines_to_the_analytic_value() {
        // 1-D check routed through the 2-D norm: samples constant in y.
        // ||E_8||_1 = integral |sin(4.5 x) / sin(x / 2)| dx; the oracle value
        // comes from a very fine reference evaluation.
        use crate::grid::SignedIndex;
        use crate::kernels::e_kernel;
        let norm_at = |n: u32| {
            let g = SampleGrid::from_fn(n as usize, 1, |x, _| e_kernel(SignedIndex::plus(8), x));
            l1_norm(&g) / (2.0 * PI)
        };
        let refined = refine(norm_at, 128, 1e-8, 1 << 22).unwrap();
        let oracle = norm_at(1 << 20);
        assert!(
            (refined.value - oracle).abs() < 1e-6,
            "refined {} vs oracle {}",
            refined.value,
            oracle
        );
    }

    #[test]
    fn finite_support_family_recovers_exactly() {
        let spec = FamilySpec::Finite {
            entries: vec![
                crate::families::FiniteEntry {
                    j: 0,
                    k: 0,
                    re: 1.0,
                    im: 0.0,
                },
                crate::families::FiniteEntry {
                    j: 2,
                    k: 1,
                    re: 0.5,
                    im: -0.25,
                },
                crate::families::FiniteEntry {
                    j: -2,
                    k: -1,
                    re: 0.5,
                    im: 0.25,
                },
            ],
        };
        let records = convergence_run(&spec, &[(2, 2), (4, 4)], 2.0, 1e-7).unwrap();
        for r in &records {
            assert!(r.norm_s_f <= 1e-7 * 40.0, "norm_s_f = {}", r.norm_s_f);
            assert!(r.norm_v_f <= r.norm_v_s + r.norm_s_f + 1e-9);
        }
        // sorted by min(m, n)
        assert!(records[0].m <= records[1].m);
    }

    #[test]
    fn quadrature_is_stable_for_bandlimited_differences() {
        // degree-d trig polynomial: values at N and 2N with N >= 2d + 3 agree
        // to refinement accuracy even though |.| is not itself a polynomial
        let spec = FamilySpec::Geometric { rx: 0.5, ry: 0.5 };
        let grid = spec.build(8, 8).unwrap();
        let d = 8u32;
        let n0 = (2 * d + 3) as usize;
        let s1 = partial_sum(&grid, d, d, n0, n0);
        let s2 = partial_sum(&grid, d, d, 2 * n0, 2 * n0);
        let n1 = l1_norm(&s1);
        let n2 = l1_norm(&s2);
        assert!((n1 - n2).abs() <= 1e-6 * n2.max(1.0) * 100.0);
    }
}
