//! Per-realization link budgets and decoding success events.
//!
//! Both cache nodes face unit-variance noise. During placement node `i`
//! receives its two cached sub-files on a dedicated beam `v_i`; during
//! delivery both nodes receive the superposition
//! `Y = β A₂ + √(1−β²) B₁` on a shared beam `v₁,₂`. Node 1 wants `A₂`
//! (power share `β²`), node 2 wants `B₁` (power share `1−β²`).
//!
//! Success is an information-theoretic test: a sub-file is decoded when the
//! achievable rate in nats per channel use reaches the target rate. All four
//! decoding methods are expressed as boolean events on the same draw so that
//! products such as `μ₁γ₁` keep the dependence induced by shared channels.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::codebook::{BeamIndex, Codebook};
use crate::error::{Error, Result};

/// Beam choice and power split for one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSolution {
    /// Placement beam toward cache node 1.
    pub v1: BeamIndex,
    /// Placement beam toward cache node 2.
    pub v2: BeamIndex,
    /// Shared delivery beam.
    pub v12: BeamIndex,
    pub beta: f64,
}

/// Received SNRs (linear, noise-normalized, transmit power included).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkBudget {
    pub g1_pp: f64,
    pub g2_pp: f64,
    pub g1_dp: f64,
    pub g2_dp: f64,
}

impl LinkBudget {
    /// The same link at `factor` times the transmit power.
    pub fn scaled(&self, factor: f64) -> Self {
        LinkBudget {
            g1_pp: factor * self.g1_pp,
            g2_pp: factor * self.g2_pp,
            g1_dp: factor * self.g1_dp,
            g2_dp: factor * self.g2_dp,
        }
    }

    /// Node roles exchanged.
    pub fn swapped(&self) -> Self {
        LinkBudget {
            g1_pp: self.g2_pp,
            g2_pp: self.g1_pp,
            g1_dp: self.g2_dp,
            g2_dp: self.g1_dp,
        }
    }
}

/// How a cache node recovers its requested file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DecodingMethod {
    /// Buffer both phases, cancel the known interferer, decode jointly.
    JointSic,
    /// Buffer both phases, treat the interferer as noise.
    JointNoSic,
    /// Decode each phase on its own, with interference cancellation.
    SeparateSic,
    /// Decode each phase on its own, interferer as noise.
    SeparateNoSic,
}

impl DecodingMethod {
    pub const ALL: [DecodingMethod; 4] = [
        DecodingMethod::JointSic,
        DecodingMethod::JointNoSic,
        DecodingMethod::SeparateSic,
        DecodingMethod::SeparateNoSic,
    ];

    pub fn uses_sic(self) -> bool {
        matches!(self, DecodingMethod::JointSic | DecodingMethod::SeparateSic)
    }

    pub fn name(self) -> &'static str {
        match self {
            DecodingMethod::JointSic => "JointSic",
            DecodingMethod::JointNoSic => "JointNoSic",
            DecodingMethod::SeparateSic => "SeparateSic",
            DecodingMethod::SeparateNoSic => "SeparateNoSic",
        }
    }
}

impl std::fmt::Display for DecodingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-draw decoding outcome and the intermediate quantities behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessBreakdown {
    pub node1_success: bool,
    pub node2_success: bool,
    /// Node 1 recovers the interfering sub-file `B₁` (MRC of both phases).
    pub mu1: bool,
    /// Node 2 recovers the interfering sub-file `A₂`.
    pub mu2: bool,
    pub pp_rate_1: f64,
    pub pp_rate_2: f64,
    /// Delivery rate of the desired sub-file with the interferer as noise.
    pub dp_rate_des_1: f64,
    pub dp_rate_des_2: f64,
}

/// Placement and delivery SNRs for one realization at transmit power `power`.
///
/// Without beamforming the server has a single antenna and the gain is just
/// `P·|h|²`; the beam indices in `solution` are ignored.
pub fn link_budget(
    channels: &ChannelSet,
    solution: &BeamSolution,
    codebook: &Codebook,
    power: f64,
    beamforming: bool,
) -> Result<LinkBudget> {
    if power.is_nan() || power < 0.0 {
        return Err(Error::Domain(format!("transmit power must be nonnegative, got {power}")));
    }
    if !beamforming {
        return Ok(LinkBudget {
            g1_pp: power * channels.h1_pp.norm_sqr(),
            g2_pp: power * channels.h2_pp.norm_sqr(),
            g1_dp: power * channels.h1_dp.norm_sqr(),
            g2_dp: power * channels.h2_dp.norm_sqr(),
        });
    }
    if channels.antennas() != codebook.antennas() {
        return Err(Error::Dimension {
            expected: codebook.antennas(),
            found: channels.antennas(),
        });
    }
    let gain = |h, v| -> Result<f64> { crate::codebook::beam_gain(h, codebook.beam(v)?, power) };
    Ok(LinkBudget {
        g1_pp: gain(&channels.h1_pp, solution.v1)?,
        g2_pp: gain(&channels.h2_pp, solution.v2)?,
        g1_dp: gain(&channels.h1_dp, solution.v12)?,
        g2_dp: gain(&channels.h2_dp, solution.v12)?,
    })
}

/// SNR needed to carry `rate` nats per channel use: `e^rate − 1`.
pub fn rate_threshold(rate: f64) -> f64 {
    rate.exp_m1()
}

/// `w·g` with `0·∞ = 0`.
fn weighted(w: f64, g: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * g
    }
}

/// `w·g / (1 + (1−w)·g)` written so that `g = ∞` yields the ceiling `w/(1−w)`.
fn sinr(w: f64, other: f64, g: f64) -> f64 {
    w / (1.0 / g + other)
}

struct NodeOutcome {
    success: bool,
    mu: bool,
    pp_rate: f64,
    dp_rate_des: f64,
}

fn evaluate_node(g_pp: f64, g_dp: f64, desired: f64, rate: f64, method: DecodingMethod) -> NodeOutcome {
    let interferer = 1.0 - desired;
    let pp_rate = g_pp.ln_1p();
    let dp_rate_des = sinr(desired, interferer, g_dp).ln_1p();
    // delivery rate once the interferer has been cancelled
    let dp_rate_clean = weighted(desired, g_dp).ln_1p();
    // the interferer was already delivered interference-free during placement,
    // so its placement and delivery copies are combined before decoding it
    let mu = interferer == 0.0 || (g_pp + sinr(interferer, desired, g_dp)).ln_1p() >= rate;

    let success = match method {
        DecodingMethod::JointSic => mu && 0.5 * (pp_rate + dp_rate_clean) >= rate,
        DecodingMethod::JointNoSic => 0.5 * (pp_rate + dp_rate_des) >= rate,
        DecodingMethod::SeparateSic => pp_rate >= rate && mu && dp_rate_clean >= rate,
        DecodingMethod::SeparateNoSic => pp_rate >= rate && dp_rate_des >= rate,
    };
    NodeOutcome {
        success,
        mu,
        pp_rate,
        dp_rate_des,
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("target rate must be positive and finite, got {rate}")))
    }
}

/// Decoding outcome of both nodes under power split `beta`.
pub fn evaluate_success(
    budget: &LinkBudget,
    beta: f64,
    rate: f64,
    method: DecodingMethod,
) -> Result<SuccessBreakdown> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("power split beta must lie in [0, 1], got {beta}")));
    }
    check_rate(rate)?;
    let a1 = beta * beta;
    let a2 = 1.0 - a1;
    let n1 = evaluate_node(budget.g1_pp, budget.g1_dp, a1, rate, method);
    let n2 = evaluate_node(budget.g2_pp, budget.g2_dp, a2, rate, method);
    Ok(SuccessBreakdown {
        node1_success: n1.success,
        node2_success: n2.success,
        mu1: n1.mu,
        mu2: n2.mu,
        pp_rate_1: n1.pp_rate,
        pp_rate_2: n2.pp_rate,
        dp_rate_des_1: n1.dp_rate_des,
        dp_rate_des_2: n2.dp_rate_des,
    })
}

/// Uncoded baseline: each node gets its missing sub-file in its own
/// interference-free delivery slot and accumulates it with the placement slot.
pub fn evaluate_uncoded(budget_pp: &LinkBudget, dp_gain_1: f64, dp_gain_2: f64, rate: f64) -> Result<(bool, bool)> {
    check_rate(rate)?;
    for (name, g) in [
        ("g1_pp", budget_pp.g1_pp),
        ("g2_pp", budget_pp.g2_pp),
        ("dp_gain_1", dp_gain_1),
        ("dp_gain_2", dp_gain_2),
    ] {
        if g.is_nan() || g < 0.0 {
            return Err(Error::Domain(format!("{name} must be nonnegative, got {g}")));
        }
    }
    let ok = |g_pp: f64, g_dp: f64| 0.5 * (g_pp.ln_1p() + g_dp.ln_1p()) >= rate;
    Ok((ok(budget_pp.g1_pp, dp_gain_1), ok(budget_pp.g2_pp, dp_gain_2)))
}
