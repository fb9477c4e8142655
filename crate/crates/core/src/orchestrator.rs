//! Monte-Carlo estimation of STP and throughput.
//!
//! Beam selection never depends on transmit power or on β: placement beams
//! maximize each node's own gain and the shared delivery beam maximizes the
//! weaker node's gain. Each realization is therefore reduced once to
//! unit-power gains ([`UnitGains`]). Every power point, scheme, and decoding
//! method then reuses those gains. This gives common random numbers across
//! the whole sweep, so STP is exactly non-decreasing in power.
//!
//! Aggregation only sums integer success counts. Results do not depend on
//! the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{generate_channel_set, realization_rng, ChannelSet, StreamPurpose};
use crate::codebook::{argmax, BeamIndex, Codebook};
use crate::error::{Error, Result};
use crate::gaopt::{exhaustive_optimize, ga_optimize, ConvergenceTrace, GaParams, Genome};
use crate::linkmodel::{evaluate_success, evaluate_uncoded, BeamSolution, DecodingMethod, LinkBudget};

/// Caching scheme and transmitter type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Coded caching, `L`-antenna server with codebook beams.
    CodedBf,
    /// Coded caching, single-antenna server.
    CodedNoBf,
    /// Uncoded caching, two delivery slots, codebook beams.
    UncodedBf,
    /// Uncoded caching, single-antenna server.
    UncodedNoBf,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::CodedBf, Scheme::CodedNoBf, Scheme::UncodedBf, Scheme::UncodedNoBf];

    pub fn is_coded(self) -> bool {
        matches!(self, Scheme::CodedBf | Scheme::CodedNoBf)
    }

    pub fn beamforming(self) -> bool {
        matches!(self, Scheme::CodedBf | Scheme::UncodedBf)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::CodedBf => "CodedBf",
            Scheme::CodedNoBf => "CodedNoBf",
            Scheme::UncodedBf => "UncodedBf",
            Scheme::UncodedNoBf => "UncodedNoBf",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to reproduce an experiment.
///
/// [`Default`] gives the reference setup: 32 antennas, 15000 realizations,
/// 150 GA iterations, 2 npcu. [`SimConfig::desk_scale`] is a cheaper variant
/// for quick runs and CI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Server antennas `L` for the beamformed schemes.
    pub antennas: usize,
    pub realizations: usize,
    /// Target rate per cache node, nats per channel use.
    pub rate_npcu: f64,
    pub oversampling: usize,
    /// Explicit beam count; overrides `antennas * oversampling` when set.
    pub codebook_size: Option<usize>,
    pub ga: GaParams,
    pub beta_grid_step: f64,
    pub powers_db: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub methods: Vec<DecodingMethod>,
    pub master_seed: u64,
    /// Fixed at 1; present so configs state it explicitly.
    pub noise_variance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            antennas: 32,
            realizations: 15_000,
            rate_npcu: 2.0,
            oversampling: 2,
            codebook_size: None,
            ga: GaParams::default(),
            beta_grid_step: 0.01,
            powers_db: (0..=12).map(|k| 5.0 * k as f64).collect(),
            schemes: Scheme::ALL.to_vec(),
            methods: DecodingMethod::ALL.to_vec(),
            master_seed: 1,
            noise_variance: 1.0,
        }
    }
}

impl SimConfig {
    /// 2000 realizations and a 16-beam codebook; otherwise the defaults.
    pub fn desk_scale() -> Self {
        SimConfig {
            realizations: 2000,
            codebook_size: Some(16),
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::key("antennas", "must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(Error::key("realizations", "must be at least 1"));
        }
        if !(self.rate_npcu > 0.0 && self.rate_npcu.is_finite()) {
            return Err(Error::key("rate_npcu", "must be positive and finite"));
        }
        if self.oversampling == 0 {
            return Err(Error::key("oversampling", "must be at least 1"));
        }
        if self.codebook_size == Some(0) {
            return Err(Error::key("codebook_size", "must be at least 1"));
        }
        self.ga.validate()?;
        if !(self.beta_grid_step > 0.0 && self.beta_grid_step < 1.0) {
            return Err(Error::key("beta_grid_step", "must lie strictly between 0 and 1"));
        }
        if self.powers_db.is_empty() {
            return Err(Error::key("powers_db", "must contain at least one power"));
        }
        if self.powers_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::key("powers_db", "all powers must be finite"));
        }
        if self.powers_db.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::key("powers_db", "must be sorted in ascending order"));
        }
        if self.schemes.is_empty() {
            return Err(Error::key("schemes", "must name at least one scheme"));
        }
        if self.schemes.iter().any(|s| s.is_coded()) && self.methods.is_empty() {
            return Err(Error::key("methods", "coded schemes need at least one decoding method"));
        }
        if self.noise_variance != 1.0 {
            return Err(Error::key("noise_variance", "is fixed at 1"));
        }
        Ok(())
    }

    pub fn codebook_len(&self) -> usize {
        self.codebook_size.unwrap_or(self.antennas * self.oversampling)
    }

    pub fn codebook(&self) -> Result<Codebook> {
        Codebook::with_size(self.antennas, self.codebook_len())
    }

    fn active_schemes(&self) -> Vec<Scheme> {
        Scheme::ALL.into_iter().filter(|s| self.schemes.contains(s)).collect()
    }

    fn active_methods(&self) -> Vec<DecodingMethod> {
        DecodingMethod::ALL.into_iter().filter(|m| self.methods.contains(m)).collect()
    }
}

/// Aggregated estimate for one (power, scheme, method) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub power_db: f64,
    pub scheme: Scheme,
    /// `None` for uncoded schemes.
    pub method: Option<DecodingMethod>,
    /// `None` for uncoded schemes.
    pub beta_star: Option<f64>,
    pub stp: f64,
    pub throughput_npcu: f64,
    pub realizations: usize,
    pub master_seed: u64,
}

/// Beams picked for one realization, before the power split is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeamChoice {
    pub v1: BeamIndex,
    pub v2: BeamIndex,
    pub v12: BeamIndex,
}

impl BeamChoice {
    pub fn with_beta(self, beta: f64) -> BeamSolution {
        BeamSolution {
            v1: self.v1,
            v2: self.v2,
            v12: self.v12,
            beta,
        }
    }
}

/// Unit-power gains of all four links against every codebook beam.
struct GainTables {
    pp1: Vec<f64>,
    pp2: Vec<f64>,
    dp1: Vec<f64>,
    dp2: Vec<f64>,
}

impl GainTables {
    fn new(channels: &ChannelSet, codebook: &Codebook) -> Result<Self> {
        Ok(GainTables {
            pp1: codebook.gains(&channels.h1_pp)?,
            pp2: codebook.gains(&channels.h2_pp)?,
            dp1: codebook.gains(&channels.h1_dp)?,
            dp2: codebook.gains(&channels.h2_dp)?,
        })
    }

    /// Weaker node's delivery gain on a shared beam.
    fn dp_objective(&self, genome: &Genome) -> f64 {
        let q = genome.indices()[0].get();
        self.dp1[q].min(self.dp2[q])
    }
}

/// Shared delivery beam search. Codebooks too small for the mutation radius
/// are enumerated instead.
fn search_dp_beam<R: rand::Rng + ?Sized>(
    tables: &GainTables,
    ga: &GaParams,
    rng: &mut R,
    use_ga: bool,
) -> Result<(BeamIndex, f64, Option<ConvergenceTrace>)> {
    let size = tables.dp1.len();
    let objective = |g: &Genome| tables.dp_objective(g);
    if use_ga && 2 * ga.neighbor_radius < size {
        let out = ga_optimize(objective, 1, size, ga, rng)?;
        Ok((out.genome.indices()[0], out.value, Some(out.trace)))
    } else {
        let (genome, value) = exhaustive_optimize(objective, 1, size)?;
        Ok((genome.indices()[0], value, None))
    }
}

/// Picks placement beams by direct codebook scan and the shared delivery
/// beam by GA (or enumeration when `use_ga` is false).
pub fn select_beams<R: rand::Rng + ?Sized>(
    channels: &ChannelSet,
    codebook: &Codebook,
    ga: &GaParams,
    rng: &mut R,
    use_ga: bool,
) -> Result<BeamChoice> {
    let tables = GainTables::new(channels, codebook)?;
    let (v12, _, _) = search_dp_beam(&tables, ga, rng, use_ga)?;
    Ok(BeamChoice {
        v1: argmax(&tables.pp1).0,
        v2: argmax(&tables.pp2).0,
        v12,
    })
}

/// One realization reduced to what the estimators need, at unit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitGains {
    /// Coded caching: own placement beams and the shared delivery beam.
    pub coded: LinkBudget,
    /// Uncoded caching: delivery gain of each node on its own best beam.
    pub uncoded_dp: [f64; 2],
}

fn unit_gains(
    config: &SimConfig,
    codebook: Option<&Codebook>,
    realization_id: u64,
) -> Result<UnitGains> {
    match codebook {
        None => {
            let ch = generate_channel_set(1, config.master_seed, realization_id)?;
            let coded = LinkBudget {
                g1_pp: ch.h1_pp.norm_sqr(),
                g2_pp: ch.h2_pp.norm_sqr(),
                g1_dp: ch.h1_dp.norm_sqr(),
                g2_dp: ch.h2_dp.norm_sqr(),
            };
            Ok(UnitGains {
                coded,
                uncoded_dp: [coded.g1_dp, coded.g2_dp],
            })
        }
        Some(codebook) => {
            let ch = generate_channel_set(config.antennas, config.master_seed, realization_id)?;
            let tables = GainTables::new(&ch, codebook)?;
            let mut rng = realization_rng(config.master_seed, realization_id, StreamPurpose::BeamSearch);
            let (v12, _, _) = search_dp_beam(&tables, &config.ga, &mut rng, true)?;
            let q = v12.get();
            Ok(UnitGains {
                coded: LinkBudget {
                    g1_pp: argmax(&tables.pp1).1,
                    g2_pp: argmax(&tables.pp2).1,
                    g1_dp: tables.dp1[q],
                    g2_dp: tables.dp2[q],
                },
                uncoded_dp: [argmax(&tables.dp1).1, argmax(&tables.dp2).1],
            })
        }
    }
}

/// Unit-power gains for every realization of `config`, in realization order.
///
/// With `beamforming` the server uses `config.antennas` antennas and the
/// configured codebook; without it the server has a single antenna.
pub fn batch_unit_gains(config: &SimConfig, beamforming: bool) -> Result<Vec<UnitGains>> {
    config.validate()?;
    let codebook = if beamforming { Some(config.codebook()?) } else { None };
    (0..config.realizations as u64)
        .into_par_iter()
        .map(|id| unit_gains(config, codebook.as_ref(), id))
        .collect()
}

/// Linear transmit power relative to unit noise.
pub fn db_to_linear(power_db: f64) -> f64 {
    10f64.powf(power_db / 10.0)
}

/// Power split candidates `0, step, 2·step, …, 1`.
pub fn beta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::key("beta_grid_step", "must lie strictly between 0 and 1"));
    }
    let inverse = 1.0 / step;
    let n = inverse.round();
    if (inverse - n).abs() < 1e-9 {
        let n = n as usize;
        return Ok((0..=n).map(|k| k as f64 / n as f64).collect());
    }
    let mut grid: Vec<f64> = (0..).map(|k| k as f64 * step).take_while(|&b| b < 1.0).collect();
    grid.push(1.0);
    Ok(grid)
}

/// Result of the power-split search over a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSearch {
    pub beta_star: f64,
    pub stp: f64,
    /// Empirical success rate of node 1 at `beta_star`.
    pub node1_rate: f64,
    pub node2_rate: f64,
}

fn success_counts(budgets: &[LinkBudget], beta: f64, rate: f64, method: DecodingMethod) -> Result<(u64, u64)> {
    budgets.iter().try_fold((0u64, 0u64), |(c1, c2), b| {
        let s = evaluate_success(b, beta, rate, method)?;
        Ok((c1 + s.node1_success as u64, c2 + s.node2_success as u64))
    })
}

/// Exhaustive grid search for the β that maximizes the batch STP.
/// The smallest β wins ties.
pub fn optimize_beta(budgets: &[LinkBudget], rate: f64, method: DecodingMethod, grid_step: f64) -> Result<BetaSearch> {
    if budgets.is_empty() {
        return Err(Error::InvalidInput("power split search needs at least one realization".into()));
    }
    let grid = beta_grid(grid_step)?;
    let counts = grid
        .par_iter()
        .map(|&beta| success_counts(budgets, beta, rate, method))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, c) in counts.iter().enumerate().skip(1) {
        if c.0 + c.1 > counts[best].0 + counts[best].1 {
            best = k;
        }
    }
    let n = budgets.len() as f64;
    let (c1, c2) = counts[best];
    Ok(BetaSearch {
        beta_star: grid[best],
        stp: (c1 + c2) as f64 / (2.0 * n),
        node1_rate: c1 as f64 / n,
        node2_rate: c2 as f64 / n,
    })
}

/// Coded-caching link budgets of a batch at linear power `power`.
pub fn coded_budgets(gains: &[UnitGains], power: f64) -> Vec<LinkBudget> {
    gains.iter().map(|g| g.coded.scaled(power)).collect()
}

fn row_from_gains(
    config: &SimConfig,
    gains: &[UnitGains],
    power_db: f64,
    scheme: Scheme,
    method: Option<DecodingMethod>,
) -> Result<SweepRow> {
    let power = db_to_linear(power_db);
    let rate = config.rate_npcu;
    let n = gains.len() as f64;
    let (method, beta_star, stp, throughput) = if scheme.is_coded() {
        let method = method.ok_or_else(|| {
            Error::InvalidConfig(format!("scheme {scheme} needs a decoding method"))
        })?;
        let search = optimize_beta(&coded_budgets(gains, power), rate, method, config.beta_grid_step)?;
        let throughput = rate * search.node1_rate + rate * search.node2_rate;
        (Some(method), Some(search.beta_star), search.stp, throughput)
    } else {
        let (c1, c2) = gains.iter().try_fold((0u64, 0u64), |(c1, c2), g| {
            let pp = g.coded.scaled(power);
            let (ok1, ok2) = evaluate_uncoded(&pp, power * g.uncoded_dp[0], power * g.uncoded_dp[1], rate)?;
            Ok::<_, Error>((c1 + ok1 as u64, c2 + ok2 as u64))
        })?;
        let (p1, p2) = (c1 as f64 / n, c2 as f64 / n);
        // two delivery slots instead of one
        (None, None, 0.5 * (p1 + p2), 0.5 * (rate * p1 + rate * p2))
    };
    Ok(SweepRow {
        power_db,
        scheme,
        method,
        beta_star,
        stp,
        throughput_npcu: throughput,
        realizations: gains.len(),
        master_seed: config.master_seed,
    })
}

/// Estimates a single (power, scheme, method) point. `method` is ignored for
/// uncoded schemes and required for coded ones.
pub fn estimate_point(
    config: &SimConfig,
    power_db: f64,
    scheme: Scheme,
    method: Option<DecodingMethod>,
) -> Result<SweepRow> {
    config.validate()?;
    if scheme.is_coded() && method.is_none() {
        return Err(Error::InvalidConfig(format!("scheme {scheme} needs a decoding method")));
    }
    let gains = batch_unit_gains(config, scheme.beamforming())?;
    row_from_gains(config, &gains, power_db, scheme, method)
}

/// All (power, scheme, method) rows of `config`, sharing channel draws and
/// beam choices across every row.
///
/// Rows are ordered by power, then scheme (`CodedBf`, `CodedNoBf`,
/// `UncodedBf`, `UncodedNoBf`), then method.
pub fn sweep(config: &SimConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let schemes = config.active_schemes();
    let methods = config.active_methods();
    let bf = if schemes.iter().any(|s| s.beamforming()) {
        Some(batch_unit_gains(config, true)?)
    } else {
        None
    };
    let no_bf = if schemes.iter().any(|s| !s.beamforming()) {
        Some(batch_unit_gains(config, false)?)
    } else {
        None
    };

    let mut rows = Vec::new();
    for &power_db in &config.powers_db {
        for &scheme in &schemes {
            let gains = if scheme.beamforming() { &bf } else { &no_bf };
            let gains = gains.as_deref().expect("gains prepared for every active scheme");
            if scheme.is_coded() {
                for &method in &methods {
                    rows.push(row_from_gains(config, gains, power_db, scheme, Some(method))?);
                }
            } else {
                rows.push(row_from_gains(config, gains, power_db, scheme, None)?);
            }
        }
    }
    Ok(rows)
}

/// Minimum delivery SINR in dB at equal power split, for a weaker-node gain
/// of `min_gain` at unit power.
pub fn min_sinr_db(min_gain: f64, power: f64) -> f64 {
    let half = 0.5 * power * min_gain;
    // 1/(1 + 1/x) instead of x/(1 + x): monotone under rounding
    10.0 * (1.0 / (1.0 + 1.0 / half)).log10()
}

/// GA convergence of the shared delivery beam for realizations
/// `0..n_examples`, in dB of minimum SINR at equal power split.
pub fn convergence_trace(config: &SimConfig, power_db: f64, n_examples: usize) -> Result<Vec<ConvergenceTrace>> {
    config.validate()?;
    let codebook = config.codebook()?;
    let power = db_to_linear(power_db);
    (0..n_examples as u64)
        .into_par_iter()
        .map(|id| {
            let ch = generate_channel_set(config.antennas, config.master_seed, id)?;
            let tables = GainTables::new(&ch, &codebook)?;
            let mut rng = realization_rng(config.master_seed, id, StreamPurpose::BeamSearch);
            let (_, _, trace) = search_dp_beam(&tables, &config.ga, &mut rng, true)?;
            let trace = trace.ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "codebook of {} beams is too small for GA neighbor radius {}",
                    codebook.size(),
                    config.ga.neighbor_radius
                ))
            })?;
            Ok(ConvergenceTrace(
                trace.values().iter().map(|&g| min_sinr_db(g, power)).collect(),
            ))
        })
        .collect()
}
