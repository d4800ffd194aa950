//! Closed-form model of p-persistent contention during the COP.
//!
//! With `n` devices still contending and each transmitting with probability
//! `p` at every slot boundary, the time to the next successful request is a
//! run of idle slots and collisions followed by one success. The functions
//! here give the expected number of collisions, the expected idle time
//! before a busy period, and the expected COP length for `M` successes.
//!
//! Powers `(1 - p)^k` are evaluated as `exp(k * ln_1p(-p))` so that
//! populations of 10^5 devices neither underflow nor lose precision.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::timing::TimingParams;

/// How many devices are assumed to contend for the `i`-th success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    /// `L - i` contenders, as the closed form is usually written.
    LMinusI,
    /// `L - i + 1` contenders: the `i - 1` earlier winners have left.
    /// This is what a simulation of `L` devices realises.
    #[default]
    RemainingContenders,
}

impl Indexing {
    fn contenders(self, l_active: u32, i: u32) -> u32 {
        match self {
            Indexing::LMinusI => l_active - i,
            Indexing::RemainingContenders => l_active - i + 1,
        }
    }
}

/// Which expression for the expected COP length to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopForm {
    /// Large-`L` form, linear in `M`.
    #[default]
    Asymptotic,
    /// Per-success sum with a shrinking contender population.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// An operating point `(L, M, p)` of the contention model.
///
/// `M = 0` is accepted and yields an empty COP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentionPoint {
    l_active: u32,
    m_target: u32,
    p: f64,
}

impl ContentionPoint {
    pub fn new(l_active: u32, m_target: u32, p: f64) -> Result<Self> {
        check_probability(p)?;
        if m_target >= l_active && m_target > 0 {
            return Err(MacError::DegenerateIndex {
                l_active,
                index: m_target,
            });
        }
        Ok(ContentionPoint {
            l_active,
            m_target,
            p,
        })
    }

    pub fn l_active(&self) -> u32 {
        self.l_active
    }

    pub fn m_target(&self) -> u32 {
        self.m_target
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.l_active, self.m_target, p)
    }

    pub fn with_m(&self, m_target: u32) -> Result<Self> {
        Self::new(self.l_active, m_target, self.p)
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(MacError::ProbabilityDomain(p))
    }
}

/// `(1 - p)^k` computed in log space.
pub fn pow_one_minus(p: f64, k: f64) -> f64 {
    (k * (-p).ln_1p()).exp()
}

/// Expected collisions before the next success with `n` contenders.
pub fn collisions_with_contenders(n: u32, p: f64) -> f64 {
    if n <= 1 {
        // a lone transmitter never collides
        return 0.0;
    }
    let n_f = f64::from(n);
    let log_q = (-p).ln_1p();
    let busy = -(n_f * log_q).exp_m1();
    // busy / (n p q^(n-1)) with q^-(n-1) taken as exp(-(n-1) ln q)
    let value = busy * (-(n_f - 1.0) * log_q).exp() / (n_f * p) - 1.0;
    value.max(0.0)
}

/// Expected idle time before the next busy period with `n` contenders.
pub fn idle_with_contenders(n: u32, p: f64, delta_idle: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let log_q = (-p).ln_1p();
    // q^n / (1 - q^n) == 1 / (q^-n - 1)
    delta_idle / (-f64::from(n) * log_q).exp_m1()
}

/// Expected time from one success to the next with `n` contenders:
/// `(E[Nc] + 1) E[Idle] + E[Nc] delta_coll + delta_succ`.
pub fn success_interval(n: u32, p: f64, params: &TimingParams) -> f64 {
    let collisions = collisions_with_contenders(n, p);
    let idle = idle_with_contenders(n, p, params.delta_idle);
    (collisions + 1.0) * idle + collisions * params.delta_coll() + params.delta_succ()
}

fn check_index(l_active: u32, i: u32, p: f64) -> Result<()> {
    check_probability(p)?;
    if i == 0 {
        return Err(MacError::InvalidArgument(
            "success index starts at 1".to_string(),
        ));
    }
    if i >= l_active {
        return Err(MacError::DegenerateIndex { l_active, index: i });
    }
    Ok(())
}

/// `E[N_i^c]` with `L - i` remaining contenders.
pub fn expected_collisions(l_active: u32, i: u32, p: f64) -> Result<f64> {
    check_index(l_active, i, p)?;
    Ok(collisions_with_contenders(l_active - i, p))
}

/// `E[Idle_i]` with `L - i` remaining contenders.
pub fn expected_idle(l_active: u32, i: u32, p: f64, params: &TimingParams) -> Result<f64> {
    check_index(l_active, i, p)?;
    Ok(idle_with_contenders(l_active - i, p, params.delta_idle))
}

/// Expected COP length for `M` successes, summing the per-success
/// intervals over a shrinking population (`L - i + 1` contenders for the
/// `i`-th success).
pub fn t_cop_exact(point: &ContentionPoint, params: &TimingParams) -> f64 {
    t_cop_exact_with(point, params, Indexing::RemainingContenders)
}

pub fn t_cop_exact_with(point: &ContentionPoint, params: &TimingParams, indexing: Indexing) -> f64 {
    (1..=point.m_target)
        .map(|i| success_interval(indexing.contenders(point.l_active, i), point.p, params))
        .sum()
}

/// Per-success cost of the large-`L` form:
/// `delta_idle / (Lp) + delta_succ + (1 / (Lp (1-p)^(L-1)) - 1/(Lp) - 1) delta_coll`.
pub fn asymptotic_cost_per_success(l_active: u32, p: f64, params: &TimingParams) -> f64 {
    let l = f64::from(l_active);
    let lp = l * p;
    let inv_q_pow = (-(l - 1.0) * (-p).ln_1p()).exp();
    params.delta_idle / lp + params.delta_succ() + (inv_q_pow / lp - 1.0 / lp - 1.0) * params.delta_coll()
}

/// Large-`L` expected COP length, `M` times the per-success cost.
pub fn t_cop_asymptotic(point: &ContentionPoint, params: &TimingParams) -> f64 {
    f64::from(point.m_target) * asymptotic_cost_per_success(point.l_active, point.p, params)
}

pub fn t_cop(point: &ContentionPoint, params: &TimingParams, form: CopForm) -> f64 {
    match form {
        CopForm::Asymptotic => t_cop_asymptotic(point, params),
        CopForm::Exact => t_cop_exact(point, params),
    }
}

/// Central second difference of the asymptotic COP length in `p`.
pub fn second_difference_p(point: &ContentionPoint, params: &TimingParams, h: f64) -> Result<f64> {
    let p = point.p;
    if !(h > 0.0) || p - h <= 0.0 || p + h >= 1.0 {
        return Err(MacError::StepTooLarge { p, h });
    }
    let lo = t_cop_asymptotic(&point.with_p(p - h)?, params);
    let mid = t_cop_asymptotic(point, params);
    let hi = t_cop_asymptotic(&point.with_p(p + h)?, params);
    Ok(hi - 2.0 * mid + lo)
}

pub fn t_cop_second_derivative_sign(
    point: &ContentionPoint,
    params: &TimingParams,
    h: f64,
) -> Result<Sign> {
    let diff = second_difference_p(point, params, h)?;
    Ok(match diff.partial_cmp(&0.0) {
        Some(Ordering::Greater) => Sign::Positive,
        Some(Ordering::Less) => Sign::Negative,
        _ => Sign::Zero,
    })
}

/// Second difference of the asymptotic COP length in `M`, evaluated
/// numerically at `M - 1`, `M`, `M + 1`. Requires `M >= 1` and `M + 1 < L`.
pub fn second_difference_m(point: &ContentionPoint, params: &TimingParams) -> Result<f64> {
    let m = point.m_target;
    if m == 0 {
        return Err(MacError::InvalidArgument(
            "second difference in M needs M >= 1".to_string(),
        ));
    }
    let lo = t_cop_asymptotic(&point.with_m(m - 1)?, params);
    let mid = t_cop_asymptotic(point, params);
    let hi = t_cop_asymptotic(&point.with_m(m + 1)?, params);
    Ok(hi - 2.0 * mid + lo)
}
