//! Lattice configurations, empirical measures and profile sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Occupation numbers packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedBits {
    words: Vec<u64>,
    len: usize,
}

impl PackedBits {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Particle configuration of the exclusion process at scale `N`: occupation
/// state on the `N - 1` interior sites, site index `k` sitting at `x = k/N`
/// for `k = 1, ..., N-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeConfiguration {
    n_scale: usize,
    occupancy: PackedBits,
}

impl LatticeConfiguration {
    pub fn empty(n_scale: usize) -> Self {
        assert!(n_scale >= 3, "need N >= 3, got {n_scale}");
        Self {
            n_scale,
            occupancy: PackedBits::zeros(n_scale - 1),
        }
    }

    pub fn from_bits(n_scale: usize, bits: &[bool]) -> Self {
        assert!(n_scale >= 3);
        assert_eq!(bits.len(), n_scale - 1);
        let mut c = Self::empty(n_scale);
        for (i, b) in bits.iter().enumerate() {
            c.occupancy.set(i, *b);
        }
        c
    }

    #[inline]
    pub fn n_scale(&self) -> usize {
        self.n_scale
    }

    /// Number of sites, `N - 1`.
    #[inline]
    pub fn sites(&self) -> usize {
        self.n_scale - 1
    }

    /// Occupation of site `k` (0-based: site index `k` at `x = (k+1)/N`).
    #[inline]
    pub fn occupied(&self, k: usize) -> bool {
        self.occupancy.get(k)
    }

    #[inline]
    pub fn set(&mut self, k: usize, v: bool) {
        self.occupancy.set(k, v);
    }

    #[inline]
    pub fn flip(&mut self, k: usize) {
        self.occupancy.toggle(k);
    }

    /// Exchanges the occupations across bond `b` (sites `b` and `b+1`).
    #[inline]
    pub fn exchange(&mut self, b: usize) {
        let (l, r) = (self.occupancy.get(b), self.occupancy.get(b + 1));
        if l != r {
            self.occupancy.set(b, r);
            self.occupancy.set(b + 1, l);
        }
    }

    pub fn particle_count(&self) -> usize {
        self.occupancy.count_ones()
    }

    pub fn empirical_measure(&self) -> EmpiricalMeasure {
        let atoms = (0..self.sites())
            .filter(|k| self.occupied(*k))
            .map(|k| k as u32 + 1)
            .collect();
        EmpiricalMeasure {
            n_scale: self.n_scale,
            atom_sites: atoms,
        }
    }
}

/// The random measure giving mass 1/N to each occupied site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalMeasure {
    pub n_scale: usize,
    /// 1-based site indices `k` of the atoms, positions `k/N`.
    pub atom_sites: Vec<u32>,
}

impl EmpiricalMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atom_sites.len() as f64 / self.n_scale as f64
    }

    /// Integral of a continuous function against the measure.
    pub fn pair_with(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.n_scale as f64;
        self.atom_sites
            .iter()
            .map(|k| f(*k as f64 / n))
            .sum::<f64>()
            / n
    }
}

/// Independent Bernoulli occupancies with site marginals `gamma(k/N)`; the
/// product measure associated to the profile.
pub fn sample_profile(
    gamma: impl Fn(f64) -> f64,
    n_scale: usize,
    seed: u64,
) -> LatticeConfiguration {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut config = LatticeConfiguration::empty(n_scale);
    for k in 0..config.sites() {
        let p = gamma((k + 1) as f64 / n_scale as f64).clamp(0.0, 1.0);
        if rng.random::<f64>() < p {
            config.set(k, true);
        }
    }
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_bits_roundtrip() {
        let mut b = PackedBits::zeros(130);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        assert!(b.get(0) && b.get(64) && b.get(129));
        assert!(!b.get(1) && !b.get(63));
        assert_eq!(b.count_ones(), 3);
        b.toggle(64);
        assert!(!b.get(64));
        assert_eq!(b.count_ones(), 2);
    }

    #[test]
    fn exchange_preserves_particle_count() {
        let mut c = LatticeConfiguration::from_bits(5, &[true, false, true, true]);
        for b in 0..3 {
            c.exchange(b);
            assert_eq!(c.particle_count(), 3);
        }
    }

    #[test]
    fn zero_profile_samples_empty() {
        let c = sample_profile(|_| 0.0, 64, 7);
        assert_eq!(c.particle_count(), 0);
    }

    #[test]
    fn full_profile_samples_full() {
        let c = sample_profile(|_| 1.0, 64, 7);
        assert_eq!(c.particle_count(), 63);
    }

    #[test]
    fn half_profile_mass_concentrates() {
        // <pi, 1> = 0.5 +- 3 sigma with sigma = sqrt(1/4/N)/sqrt(N) ~ binomial
        let n = 10_000;
        let c = sample_profile(|_| 0.5, n, 42);
        let mass = c.empirical_measure().total_mass();
        let sigma = (0.25 / n as f64).sqrt();
        assert!(
            (mass - 0.5).abs() < 3.0 * sigma + 1.0 / n as f64,
            "mass {mass}"
        );
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let a = sample_profile(|x| x, 128, 9);
        let b = sample_profile(|x| x, 128, 9);
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_measure_positions() {
        let c = LatticeConfiguration::from_bits(4, &[true, false, true]);
        let m = c.empirical_measure();
        assert_eq!(m.atom_sites, vec![1, 3]);
        assert!((m.total_mass() - 0.5).abs() < 1e-15);
        // <pi, x> = (1/4)(1/4 + 3/4)
        assert!((m.pair_with(|x| x) - 0.25).abs() < 1e-15);
    }
}
