//! Quasi-stationary layer: Fleming–Viot particle runs, principal-eigenvalue
//! estimation, QSD density/envelope shape comparison, and the conditional
//! total-variation decay witness.

mod fv;
mod lambda0;
mod tv;

pub use fv::{
    fleming_viot_run, qsd_density_estimate, FvConfig, FvSeries, FvSnapshot, ParticleCloud,
    QsdShape,
};
pub use lambda0::{lambda0_estimate, lambda0_regression, DecayFit, Lambda0Estimate};
pub use tv::{conditional_tv_decay, tv_decay_fit, TvDecay, TvPoint};

use crate::error::{Error, Result};
use crate::specfun::PhaseState;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Initial distribution for particle and rejection runs; supported in the
/// interior of the strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Init {
    Point(PhaseState),
    UniformBox { q_lo: f64, q_hi: f64, p_lo: f64, p_hi: f64 },
}

impl Init {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Init::Point(s) => s.is_interior(),
            Init::UniformBox { q_lo, q_hi, p_lo, p_hi } => {
                *q_lo > 0.0 && q_lo < q_hi && *q_hi < 1.0 && p_lo <= p_hi && p_lo.is_finite() && p_hi.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("initial distribution not interior: {self:?}")))
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> PhaseState {
        match self {
            Init::Point(s) => *s,
            Init::UniformBox { q_lo, q_hi, p_lo, p_hi } => PhaseState::new(
                q_lo + (q_hi - q_lo) * rng.gen::<f64>(),
                p_lo + (p_hi - p_lo) * rng.gen::<f64>(),
            ),
        }
    }
}

/// Fixed binning of the phase strip: n_q × n_p bins over (0,1) × [−p_max, p_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistGrid {
    pub n_q: usize,
    pub n_p: usize,
    pub p_max: f64,
}

impl HistGrid {
    pub fn new(n_q: usize, n_p: usize, p_max: f64) -> Result<Self> {
        if n_q < 2 || n_p < 2 || !(p_max > 0.0) {
            return Err(Error::Config(format!(
                "histogram grid needs n_q, n_p >= 2 and p_max > 0; got {n_q}x{n_p}, p_max={p_max}"
            )));
        }
        Ok(Self { n_q, n_p, p_max })
    }

    pub fn n_bins(&self) -> usize {
        self.n_q * self.n_p
    }

    /// Bin index of (q, p); q is clamped into (0,1) and p into ±p_max, so
    /// every interior state lands somewhere and mass is conserved.
    pub fn bin(&self, q: f64, p: f64) -> usize {
        let iq = ((q * self.n_q as f64) as usize).min(self.n_q - 1);
        let u = (p + self.p_max) / (2.0 * self.p_max);
        let ip = ((u.clamp(0.0, 1.0) * self.n_p as f64) as usize).min(self.n_p - 1);
        iq * self.n_p + ip
    }

    pub fn center(&self, bin: usize) -> (f64, f64) {
        let (iq, ip) = (bin / self.n_p, bin % self.n_p);
        (
            (iq as f64 + 0.5) / self.n_q as f64,
            -self.p_max + (ip as f64 + 0.5) * 2.0 * self.p_max / self.n_p as f64,
        )
    }

    /// Index of the image bin under the strip symmetry (q,p) → (1−q,−p).
    pub fn reflected_bin(&self, bin: usize) -> usize {
        let (iq, ip) = (bin / self.n_p, bin % self.n_p);
        (self.n_q - 1 - iq) * self.n_p + (self.n_p - 1 - ip)
    }
}

/// Counting histogram on a [`HistGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2d {
    pub grid: HistGrid,
    pub counts: Vec<u64>,
}

impl Histogram2d {
    pub fn new(grid: HistGrid) -> Self {
        Self { grid, counts: vec![0; grid.n_bins()] }
    }

    #[inline]
    pub fn add(&mut self, q: f64, p: f64) {
        self.counts[self.grid.bin(q, p)] += 1;
    }

    pub fn merge(&mut self, other: &Histogram2d) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// L¹-normalized bin fractions.
    pub fn fractions(&self) -> Vec<f64> {
        let t = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// Counts pushed through (q,p) → (1−q,−p).
    pub fn reflected(&self) -> Histogram2d {
        let mut out = Histogram2d::new(self.grid);
        for (b, &c) in self.counts.iter().enumerate() {
            out.counts[self.grid.reflected_bin(b)] = c;
        }
        out
    }
}

/// Binned total-variation distance between the normalized laws of two
/// histograms on the same grid.
pub fn binned_tv(a: &Histogram2d, b: &Histogram2d) -> f64 {
    let (fa, fb) = (a.fractions(), b.fractions());
    0.5 * fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_roundtrip_and_clamping() {
        let g = HistGrid::new(10, 8, 4.0).unwrap();
        for b in 0..g.n_bins() {
            let (q, p) = g.center(b);
            assert_eq!(g.bin(q, p), b);
        }
        // out-of-range momenta land in the edge bins
        assert_eq!(g.bin(0.05, 100.0) % 8, 7);
        assert_eq!(g.bin(0.05, -100.0) % 8, 0);
    }

    #[test]
    fn reflection_is_an_involution_preserving_mass() {
        let g = HistGrid::new(6, 4, 2.0).unwrap();
        let mut h = Histogram2d::new(g);
        h.add(0.1, 1.5);
        h.add(0.1, 1.5);
        h.add(0.7, -0.3);
        let r = h.reflected();
        assert_eq!(r.total(), h.total());
        assert_eq!(r.reflected(), h);
        // the two copies of (0.1, 1.5) moved to the (0.9, −1.5) bin
        assert_eq!(r.counts[g.bin(0.9, -1.5)], 2);
    }

    #[test]
    fn tv_bounds() {
        let g = HistGrid::new(4, 4, 1.0).unwrap();
        let mut a = Histogram2d::new(g);
        let mut b = Histogram2d::new(g);
        a.add(0.1, 0.0);
        b.add(0.9, 0.0);
        assert!((binned_tv(&a, &b) - 1.0).abs() < 1e-15);
        assert_eq!(binned_tv(&a, &a), 0.0);
    }
}
