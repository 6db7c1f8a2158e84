//! The symmetric linear deterministic interference channel.
//!
//! Each transmitter sends a binary vector of `q = max(m, n)` levels. Receiver
//! 1 observes `D^(q-m) x1 ^ D^(q-n) x2` and receiver 2 the mirror image.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{downshift, BitMatrix, BitVector};

/// Integer parameters of the deterministic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Levels of the direct links.
    pub m: usize,
    /// Levels of the cross links.
    pub n: usize,
    /// Cooperative link capacity, bits per channel use per direction.
    #[serde(rename = "C")]
    pub c: usize,
}

impl ChannelParams {
    pub fn new(m: usize, n: usize, c: usize) -> Self {
        Self { m, n, c }
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.m.max(self.n)
    }

    /// `n / m`, or `None` when `m = 0`.
    pub fn alpha(&self) -> Option<Ratio<usize>> {
        (self.m > 0).then(|| Ratio::new(self.n, self.m))
    }

    /// Cooperative bits a scheme may actually use; anything above `n` is
    /// discarded.
    #[inline]
    pub fn effective_coop(&self) -> usize {
        self.c.min(self.n)
    }

    /// `(D^(q-m), D^(q-n))`.
    pub fn transfer_matrices(&self) -> (BitMatrix, BitMatrix) {
        let q = self.q();
        (
            downshift(q, q - self.m).expect("q - m <= q"),
            downshift(q, q - self.n).expect("q - n <= q"),
        )
    }

    /// Sends one channel use. Implemented by shifting rather than through
    /// [`transfer_matrices`](Self::transfer_matrices) so the two can be
    /// checked against each other.
    pub fn transmit(&self, x1: &BitVector, x2: &BitVector) -> Result<(BitVector, BitVector)> {
        let q = self.q();
        if x1.len() != q || x2.len() != q {
            return Err(Error::Dimension(format!(
                "transmit expects two length-{q} vectors, got {} and {}",
                x1.len(),
                x2.len()
            )));
        }
        let (direct, cross) = (q - self.m, q - self.n);
        let y1 = &x1.shifted_down(direct) ^ &x2.shifted_down(cross);
        let y2 = &x2.shifted_down(direct) ^ &x1.shifted_down(cross);
        Ok((y1, y2))
    }
}

/// Parameters of the underlying Gaussian channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    /// `|h_d|^2`
    pub hd2: f64,
    /// `|h_c|^2`
    pub hc2: f64,
    /// Cooperative link rate `C_G`.
    pub cg: f64,
}

/// `m = (floor(log2 |h_d|^2))^+`, `n = (floor(log2 |h_c|^2))^+`,
/// `C = floor(C_G)`.
pub fn from_gaussian(g: &GaussianParams) -> Result<ChannelParams> {
    for (name, v) in [("|h_d|^2", g.hd2), ("|h_c|^2", g.hc2)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if !(g.cg.is_finite() && g.cg >= 0.0) {
        return Err(Error::Parameter(format!(
            "cooperative rate must be nonnegative and finite, got {}",
            g.cg
        )));
    }
    let levels = |gain: f64| gain.log2().floor().max(0.0) as usize;
    Ok(ChannelParams::new(levels(g.hd2), levels(g.hc2), g.cg.floor() as usize))
}

pub fn transmit(x1: &BitVector, x2: &BitVector, p: &ChannelParams) -> Result<(BitVector, BitVector)> {
    p.transmit(x1, x2)
}

pub fn transfer_matrices(p: &ChannelParams) -> (BitMatrix, BitMatrix) {
    p.transfer_matrices()
}
