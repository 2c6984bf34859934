//! Fixed-length binary chromosomes of 8-bit genes and their mapping onto the
//! matching-network parameters.
//!
//! Gene order is `l1..l5` followed by `b1..b3`; gene `g` occupies bits
//! `[8g, 8g + 8)`, most significant bit first.

use rand::Rng;

use crate::error::{Error, Result};
use crate::waveguide::{GuideSection, MatchingConfig};

pub const GENE_BITS: usize = 8;
pub const N_GENES: usize = 8;
pub const PARAM_NAMES: [&str; N_GENES] = ["l1", "l2", "l3", "l4", "l5", "b1", "b2", "b3"];

const GENE_MAX: f64 = 255.0;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    genes: Vec<u8>,
}

impl Chromosome {
    pub fn from_genes(genes: Vec<u8>) -> Self {
        Self { genes }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_genes: usize) -> Self {
        Self {
            genes: (0..n_genes).map(|_| rng.gen::<u8>()).collect(),
        }
    }

    pub fn genes(&self) -> &[u8] {
        &self.genes
    }

    pub fn len_bits(&self) -> usize {
        self.genes.len() * GENE_BITS
    }

    pub fn bit(&self, i: usize) -> bool {
        self.genes[i / GENE_BITS] & mask(i) != 0
    }

    pub fn flip_bit(&mut self, i: usize) {
        self.genes[i / GENE_BITS] ^= mask(i);
    }

    /// Children of single-point crossover: bits `[0, point)` from one parent and
    /// `[point, N)` from the other.
    pub fn crossover(&self, other: &Self, point: usize) -> (Self, Self) {
        debug_assert_eq!(self.genes.len(), other.genes.len());
        let mut a = self.clone();
        let mut b = other.clone();
        for i in point..self.len_bits() {
            if a.bit(i) != b.bit(i) {
                a.flip_bit(i);
                b.flip_bit(i);
            }
        }
        (a, b)
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len_bits())
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect()
    }
}

fn mask(i: usize) -> u8 {
    0x80 >> (i % GENE_BITS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeneCoding {
    #[default]
    Binary,
    Gray,
}

impl GeneCoding {
    fn to_level(self, gene: u8) -> u8 {
        match self {
            GeneCoding::Binary => gene,
            GeneCoding::Gray => {
                let mut v = gene;
                let mut shift = gene >> 1;
                while shift != 0 {
                    v ^= shift;
                    shift >>= 1;
                }
                v
            }
        }
    }

    fn to_gene(self, level: u8) -> u8 {
        match self {
            GeneCoding::Binary => level,
            GeneCoding::Gray => level ^ (level >> 1),
        }
    }
}

/// Search range `(lower, upper)` in meters for each gene, in gene order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterBounds {
    pub ranges: [(f64, f64); N_GENES],
}

impl ParameterBounds {
    /// Lengths 0–15 mm, heights 1 mm up to the antenna height.
    pub fn default_for(antenna: &GuideSection) -> Self {
        let mut ranges = [(0.0, 0.015); N_GENES];
        for r in &mut ranges[5..] {
            *r = (0.001, antenna.height_b);
        }
        Self { ranges }
    }

    pub fn validate(&self, antenna: &GuideSection) -> Result<()> {
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            let name = PARAM_NAMES[i];
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!(
                    "bounds for {name}: need lower < upper, got ({lo}, {hi})"
                )));
            }
            if i < 5 && lo < 0.0 {
                return Err(Error::InvalidConfig(format!("bounds for {name}: lower < 0")));
            }
            if i >= 5 && (lo <= 0.0 || hi > antenna.height_b * (1.0 + 1e-12)) {
                return Err(Error::InvalidConfig(format!(
                    "bounds for {name}: heights must lie in (0, {}] m",
                    antenna.height_b
                )));
            }
        }
        Ok(())
    }

    /// Quantization step of gene `g`.
    pub fn lsb(&self, g: usize) -> f64 {
        let (lo, hi) = self.ranges[g];
        (hi - lo) / GENE_MAX
    }
}

/// Bounds, coding and the fixed antenna: everything needed to decode a chromosome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace {
    pub bounds: ParameterBounds,
    pub antenna: GuideSection,
    pub coding: GeneCoding,
}

impl SearchSpace {
    pub fn new(bounds: ParameterBounds, antenna: GuideSection) -> Result<Self> {
        bounds.validate(&antenna)?;
        Ok(Self {
            bounds,
            antenna,
            coding: GeneCoding::Binary,
        })
    }

    pub fn with_coding(self, coding: GeneCoding) -> Self {
        Self { coding, ..self }
    }

    pub fn n_bits(&self) -> usize {
        N_GENES * GENE_BITS
    }
}

pub fn decode(chrom: &Chromosome, space: &SearchSpace) -> Result<MatchingConfig> {
    if chrom.len_bits() != space.n_bits() {
        return Err(Error::Encoding(format!(
            "chromosome has {} bits, expected {}",
            chrom.len_bits(),
            space.n_bits()
        )));
    }
    let values: [f64; N_GENES] = std::array::from_fn(|g| {
        let (lo, hi) = space.bounds.ranges[g];
        let t = space.coding.to_level(chrom.genes[g]) as f64 / GENE_MAX;
        // Exact at both endpoints.
        lo * (1.0 - t) + hi * t
    });
    Ok(MatchingConfig {
        l: [values[0], values[1], values[2], values[3], values[4]],
        bh: [values[5], values[6], values[7]],
        antenna: space.antenna,
    })
}

pub fn encode(cfg: &MatchingConfig, space: &SearchSpace) -> Result<Chromosome> {
    let values = cfg.l.iter().chain(&cfg.bh).copied();
    let genes = values
        .zip(space.bounds.ranges)
        .enumerate()
        .map(|(g, (x, (lo, hi)))| {
            let slack = 1e-12 * (hi - lo);
            if !(x >= lo - slack && x <= hi + slack) {
                return Err(Error::Encoding(format!(
                    "{} = {x} m outside bounds [{lo}, {hi}]",
                    PARAM_NAMES[g]
                )));
            }
            let level = ((x - lo) / (hi - lo) * GENE_MAX).round().clamp(0.0, GENE_MAX) as u8;
            Ok(space.coding.to_gene(level))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Chromosome::from_genes(genes))
}
