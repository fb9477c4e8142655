//! Rayleigh-fading channel draws and the complex-vector primitives built on them.
//!
//! Every realization owns an independent random stream keyed by
//! `(master_seed, realization_id)`, so a Monte-Carlo batch produces the same
//! channels no matter how its realizations are scheduled across threads.
//!
//! Noise is never sampled. All receivers see unit-variance noise, which only
//! shows up as the `1 +` in the SINR denominators of [`crate::linkmodel`].

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A column of complex amplitudes, one per transmit antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        ComplexVector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    /// Squared Euclidean norm.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        ComplexVector(self.0.iter().map(|z| z * factor).collect())
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(entries: Vec<Complex64>) -> Self {
        ComplexVector(entries)
    }
}

/// Plain bilinear product `Σ a_k b_k`, with no conjugation.
///
/// This is the row-times-column product `h v` between a channel and a beam.
pub fn inner_product(a: &ComplexVector, b: &ComplexVector) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum())
}

/// The four channel vectors of one Monte-Carlo realization.
///
/// `h1_pp`/`h2_pp` are seen by cache nodes 1 and 2 during placement,
/// `h1_dp`/`h2_dp` during delivery. The phases fade independently.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h1_pp: ComplexVector,
    pub h2_pp: ComplexVector,
    pub h1_dp: ComplexVector,
    pub h2_dp: ComplexVector,
    pub realization_id: u64,
}

impl ChannelSet {
    pub fn antennas(&self) -> usize {
        self.h1_pp.len()
    }

    /// Multiplies all four vectors by the same complex factor.
    pub fn scaled(&self, factor: Complex64) -> Self {
        ChannelSet {
            h1_pp: self.h1_pp.scaled(factor),
            h2_pp: self.h2_pp.scaled(factor),
            h1_dp: self.h1_dp.scaled(factor),
            h2_dp: self.h2_dp.scaled(factor),
            realization_id: self.realization_id,
        }
    }
}

/// Independent purposes that draw randomness for the same realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Channel = 0,
    BeamSearch = 1,
}

/// Random stream for one `(master_seed, realization_id, purpose)` triple.
///
/// ChaCha20 keyed by the seed and purpose, with the realization id as its
/// 64-bit stream selector.
pub fn realization_rng(master_seed: u64, realization_id: u64, purpose: StreamPurpose) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(realization_id);
    rng
}

fn draw_vector(rng: &mut ChaCha20Rng, antennas: usize) -> ComplexVector {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..antennas)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(scale * re, scale * im)
        })
        .collect::<Vec<_>>()
        .into()
}

/// Draws i.i.d. CN(0, 1) entries for all four vectors of a realization.
pub fn generate_channel_set(antennas: usize, master_seed: u64, realization_id: u64) -> Result<ChannelSet> {
    if antennas == 0 {
        return Err(Error::InvalidConfig("antenna count must be at least 1".into()));
    }
    let mut rng = realization_rng(master_seed, realization_id, StreamPurpose::Channel);
    Ok(ChannelSet {
        h1_pp: draw_vector(&mut rng, antennas),
        h2_pp: draw_vector(&mut rng, antennas),
        h1_dp: draw_vector(&mut rng, antennas),
        h2_dp: draw_vector(&mut rng, antennas),
        realization_id,
    })
}
