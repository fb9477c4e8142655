//! DFT beam codebook, circular beam neighborhoods, and beamforming gain.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{inner_product, ComplexVector};
use crate::error::{Error, Result};

/// Position of a beam inside a [`Codebook`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BeamIndex(pub usize);

impl BeamIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

impl From<usize> for BeamIndex {
    fn from(value: usize) -> Self {
        BeamIndex(value)
    }
}

/// Unit-norm DFT beams. Beam `q`, entry `n` is `exp(i 2π n q / Q) / √L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    beams: Vec<ComplexVector>,
    antennas: usize,
}

/// Builds a DFT codebook with `antennas * oversampling` beams.
pub fn build_dft_codebook(antennas: usize, oversampling: usize) -> Result<Codebook> {
    if oversampling == 0 {
        return Err(Error::InvalidConfig("codebook oversampling must be at least 1".into()));
    }
    let size = antennas
        .checked_mul(oversampling)
        .ok_or_else(|| Error::InvalidConfig("codebook size overflows".into()))?;
    Codebook::with_size(antennas, size)
}

impl Codebook {
    /// DFT codebook with an explicit beam count `size`.
    ///
    /// `size` need not be a multiple of `antennas`; a count below the antenna
    /// number keeps every other DFT direction (e.g. 16 beams on 32 antennas).
    pub fn with_size(antennas: usize, size: usize) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::InvalidConfig("codebook antenna count must be at least 1".into()));
        }
        if size == 0 {
            return Err(Error::InvalidConfig("codebook size must be at least 1".into()));
        }
        let amp = 1.0 / (antennas as f64).sqrt();
        let beams = (0..size)
            .map(|q| {
                (0..antennas)
                    .map(|n| {
                        // reduce n*q mod size first so the phase stays exact for large products
                        let k = (n * q) % size;
                        Complex64::from_polar(amp, 2.0 * PI * k as f64 / size as f64)
                    })
                    .collect::<Vec<_>>()
                    .into()
            })
            .collect();
        Ok(Codebook { beams, antennas })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Number of beams, Q.
    pub fn size(&self) -> usize {
        self.beams.len()
    }

    pub fn beams(&self) -> &[ComplexVector] {
        &self.beams
    }

    pub fn beam(&self, index: BeamIndex) -> Result<&ComplexVector> {
        self.beams.get(index.0).ok_or_else(|| {
            Error::InvalidInput(format!("beam index {} outside codebook of size {}", index.0, self.size()))
        })
    }

    /// Unit-power gains `|h·v_q|²` against every beam, in codebook order.
    pub fn gains(&self, h: &ComplexVector) -> Result<Vec<f64>> {
        self.beams
            .iter()
            .map(|v| inner_product(h, v).map(|z| z.norm_sqr()))
            .collect()
    }

    /// Beam with the largest unit-power gain toward `h`; lowest index wins ties.
    pub fn best_beam(&self, h: &ComplexVector) -> Result<(BeamIndex, f64)> {
        Ok(argmax(&self.gains(h)?))
    }
}

/// Index and value of the largest entry; the first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> (BeamIndex, f64) {
    let mut best = (BeamIndex(0), values[0]);
    for (q, &g) in values.iter().enumerate().skip(1) {
        if g > best.1 {
            best = (BeamIndex(q), g);
        }
    }
    best
}

/// Beams within `radius` steps of `index` on the circular codebook, excluding
/// `index` itself. Returned in ascending order.
pub fn neighbors(index: BeamIndex, radius: usize, codebook_size: usize) -> Result<Vec<BeamIndex>> {
    if radius == 0 || 2 * radius >= codebook_size {
        return Err(Error::InvalidConfig(format!(
            "neighbor radius {radius} must be positive and below half the codebook size {codebook_size}"
        )));
    }
    if index.0 >= codebook_size {
        return Err(Error::InvalidInput(format!(
            "beam index {} outside codebook of size {codebook_size}",
            index.0
        )));
    }
    let mut out: Vec<BeamIndex> = (1..=radius)
        .flat_map(|d| {
            [
                (index.0 + d) % codebook_size,
                (index.0 + codebook_size - d) % codebook_size,
            ]
        })
        .map(BeamIndex)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Received power `P·|h·v|²` against unit noise.
pub fn beam_gain(h: &ComplexVector, v: &ComplexVector, power: f64) -> Result<f64> {
    if power.is_nan() || power < 0.0 {
        return Err(Error::Domain(format!("transmit power must be nonnegative, got {power}")));
    }
    Ok(power * inner_product(h, v)?.norm_sqr())
}
