//! Per-frame throughput maximization.
//!
//! The objective `M * R * T_tran` depends on `M` only, so the solver looks
//! for the largest `M` whose cheapest COP still fits the frame budget. The
//! inner minimization over `p` is a golden-section search, which is exact
//! for the convex asymptotic form; the outer search over integer `M` is a
//! bisection on the monotone cost `min_p T_COP(M, p) + M * T_tran`.

use serde::{Deserialize, Serialize};

use crate::contention::{t_cop, ContentionPoint, CopForm};
use crate::error::{MacError, Result};
use crate::golden;
use crate::timing::TimingParams;

/// Edge of the open search interval `(EPS, 1 - EPS)` for `p`.
pub const P_EPSILON: f64 = 1e-6;

/// Default absolute tolerance on the minimizing `p`.
pub const DEFAULT_P_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    /// Contending population the solution was computed for.
    pub l_active: u32,
    pub m_opt: u32,
    pub p_opt: f64,
    /// Expected COP length at `(m_opt, p_opt)`, in microseconds.
    pub t_cop_opt: f64,
    /// Bits delivered per frame, `m_opt * rate * t_tran`.
    pub c_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Subtract NP and AP from the frame budget.
    pub include_overheads: bool,
    pub form: CopForm,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            include_overheads: false,
            form: CopForm::Asymptotic,
            tol: DEFAULT_P_TOL,
        }
    }
}

/// Time available for COP plus TOP.
pub fn budget(params: &TimingParams, include_overheads: bool) -> f64 {
    if include_overheads {
        params.frame_without_overheads()
    } else {
        params.t_frame
    }
}

/// The `p` minimizing the expected COP length for `m` successes among
/// `l_active` contenders, together with that minimum.
pub fn min_cop_over_p(
    m: u32,
    l_active: u32,
    params: &TimingParams,
    tol: f64,
    form: CopForm,
) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(MacError::InvalidArgument("m must be at least 1".to_string()));
    }
    if !(tol > 0.0) {
        return Err(MacError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    // validates m < l_active
    let point = ContentionPoint::new(l_active, m, 0.5)?;
    let cost = |p: f64| match point.with_p(p) {
        Ok(pt) => t_cop(&pt, params, form),
        Err(_) => f64::INFINITY,
    };
    let (p, value) = golden::minimize(cost, P_EPSILON, 1.0 - P_EPSILON, tol);
    Ok((p, value))
}

pub fn optimize(l_active: u32, params: &TimingParams, include_overheads: bool) -> Result<OptResult> {
    optimize_with(
        l_active,
        params,
        &SolverOptions {
            include_overheads,
            ..SolverOptions::default()
        },
    )
}

pub fn optimize_with(l_active: u32, params: &TimingParams, opts: &SolverOptions) -> Result<OptResult> {
    params.validate()?;
    if l_active < 2 {
        return Err(MacError::InvalidArgument(format!(
            "optimization needs at least 2 contending devices, got {l_active}"
        )));
    }
    let budget = budget(params, opts.include_overheads);
    let frame_cost = |m: u32| -> Result<(f64, f64, f64)> {
        let (p, cop) = min_cop_over_p(m, l_active, params, opts.tol, opts.form)?;
        Ok((p, cop, cop + f64::from(m) * params.t_tran))
    };

    let mut best = frame_cost(1)?;
    if best.2 > budget {
        return Err(MacError::Infeasible { l_active, budget });
    }

    // largest feasible m in [1, l_active - 1]
    let (mut lo, mut hi) = (1u32, l_active - 1);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        let candidate = frame_cost(mid)?;
        if candidate.2 <= budget {
            lo = mid;
            best = candidate;
        } else {
            hi = mid - 1;
        }
    }
    let m_opt = lo;
    let (p_opt, t_cop_opt, _) = best;

    Ok(OptResult {
        l_active,
        m_opt,
        p_opt,
        t_cop_opt,
        c_total: f64::from(m_opt) * params.rate * params.t_tran,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contention::t_cop_asymptotic;

    fn params() -> TimingParams {
        TimingParams::reference()
    }

    #[test]
    fn local_minimum_certificate() {
        let t = params();
        let tol = 1e-7;
        let (p, value) = min_cop_over_p(46, 100, &t, tol, CopForm::Asymptotic).unwrap();
        for q in [p - 10.0 * tol, p + 10.0 * tol] {
            let other = t_cop_asymptotic(&ContentionPoint::new(100, 46, q).unwrap(), &t);
            assert!(value <= other);
        }
    }

    #[test]
    fn inner_search_matches_brute_force_scan() {
        let t = params();
        let (p, _) = min_cop_over_p(46, 100, &t, 1e-9, CopForm::Asymptotic).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for k in 1..=5000 {
            let q = f64::from(k) * 1e-4;
            let v = t_cop_asymptotic(&ContentionPoint::new(100, 46, q).unwrap(), &t);
            if v < best.0 {
                best = (v, q);
            }
        }
        assert!((p - best.1).abs() <= 1e-3, "{p} vs {}", best.1);
    }

    #[test]
    fn p_halves_when_population_doubles() {
        let t = params();
        let (p100, _) = min_cop_over_p(46, 100, &t, 1e-9, CopForm::Asymptotic).unwrap();
        let (p200, _) = min_cop_over_p(46, 200, &t, 1e-9, CopForm::Asymptotic).unwrap();
        assert!((p200 / (p100 / 2.0) - 1.0).abs() < 0.2);
    }

    #[test]
    fn reference_operating_point() {
        let r = optimize(100, &params(), false).unwrap();
        assert_eq!(r.m_opt, 46);
        assert!(r.t_cop_opt + 46.0 * 1000.0 <= 50_000.0);
        assert_eq!(r.c_total, 46.0 * 1728.0 * 1000.0);
    }

    #[test]
    fn frame_doubling_doubles_admissions() {
        let t = params();
        let short = optimize(100, &t, false).unwrap();
        let long = optimize(100, &t.with_frame(100_000.0), false).unwrap();
        assert!((i64::from(long.m_opt) - 2 * i64::from(short.m_opt)).abs() <= 2);
    }

    #[test]
    fn tiny_budget_is_infeasible_or_single() {
        let t = params().with_frame(1_030.0);
        match optimize(100, &t, false) {
            Ok(r) => assert_eq!(r.m_opt, 1),
            Err(e) => assert!(matches!(e, MacError::Infeasible { .. })),
        }
        let t = params().with_frame(1_025.0);
        assert!(matches!(optimize(100, &t, true), Err(MacError::Infeasible { .. })));
        let t = params().with_frame(1_100.0);
        assert_eq!(optimize(100, &t, false).unwrap().m_opt, 1);
    }

    #[test]
    fn small_population_is_capped_at_l_minus_one() {
        let r = optimize(20, &params(), false).unwrap();
        assert_eq!(r.m_opt, 19);
        assert!(matches!(optimize(1, &params(), false), Err(MacError::InvalidArgument(_))));
    }

    #[test]
    fn overheads_shrink_the_budget() {
        let t = params();
        let r = optimize(300, &t, true).unwrap();
        assert!(r.t_cop_opt + f64::from(r.m_opt) * t.t_tran <= t.frame_without_overheads());
    }

    #[test]
    fn exact_form_is_feasible_and_maximal() {
        let t = params();
        let opts = SolverOptions {
            form: CopForm::Exact,
            ..SolverOptions::default()
        };
        for l in [10u32, 47, 60, 100] {
            let r = optimize_with(l, &t, &opts).unwrap();
            assert!(r.t_cop_opt + f64::from(r.m_opt) * t.t_tran <= t.t_frame);
            if r.m_opt + 1 < l {
                let (_, cop) = min_cop_over_p(r.m_opt + 1, l, &t, 1e-9, CopForm::Exact).unwrap();
                assert!(cop + f64::from(r.m_opt + 1) * t.t_tran > t.t_frame);
            }
        }
    }

    #[test]
    fn deterministic() {
        let t = params();
        assert_eq!(optimize(250, &t, false).unwrap(), optimize(250, &t, false).unwrap());
    }
}
