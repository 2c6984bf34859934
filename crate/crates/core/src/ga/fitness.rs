use std::str::FromStr;

use crate::aperture::ApertureModel;
use crate::error::{Error, Result};
use crate::ga::chromosome::{decode, Chromosome, SearchSpace};
use crate::waveguide::{build_network_with, gamma_in, MatchingConfig, NetworkOptions};

/// Fitness assigned to chromosomes whose network cannot be evaluated.
pub const PENALTY: f64 = 1.0;

/// How per-frequency reflection magnitudes are reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    /// Worst case over the band.
    #[default]
    Max,
    Mean,
}

impl Aggregator {
    pub fn apply(self, values: &[f64]) -> f64 {
        match self {
            Aggregator::Max => values.iter().copied().fold(0.0, f64::max),
            Aggregator::Mean => {
                if values.is_empty() {
                    0.0
                } else {
                    values.iter().sum::<f64>() / values.len() as f64
                }
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregator::Max => "max",
            Aggregator::Mean => "mean",
        }
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" | "minimax" => Ok(Aggregator::Max),
            "mean" => Ok(Aggregator::Mean),
            other => Err(Error::invalid(
                "aggregator",
                format!("expected max or mean, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessReport {
    pub aggregate: f64,
    pub per_frequency: Vec<f64>,
    pub config: MatchingConfig,
    /// The network could not be evaluated and the penalty was assigned.
    pub penalized: bool,
}

/// Everything fitness evaluation needs; shared read-only across workers.
#[derive(Debug, Clone)]
pub struct Problem {
    pub space: SearchSpace,
    pub aperture: ApertureModel,
    pub aggregator: Aggregator,
    pub network: NetworkOptions,
}

impl Problem {
    pub fn new(space: SearchSpace, aperture: ApertureModel, aggregator: Aggregator) -> Result<Self> {
        if aperture.is_empty() {
            return Err(Error::invalid("aperture", "model grid is empty"));
        }
        Ok(Self {
            space,
            aperture,
            aggregator,
            network: NetworkOptions::default(),
        })
    }
}

/// `|Γ_in|` at every grid frequency of `aperture` for a fixed configuration.
pub fn reflection_magnitudes(
    cfg: &MatchingConfig,
    aperture: &ApertureModel,
    network: &NetworkOptions,
) -> Result<Vec<f64>> {
    aperture
        .grid
        .iter()
        .zip(&aperture.gamma_ap)
        .map(|(fp, g_ap)| {
            let t = build_network_with(cfg, fp, network).map_err(|e| e.at_frequency(fp.f))?;
            let g = gamma_in(&t, *g_ap).map_err(|e| e.at_frequency(fp.f))?;
            if g.is_finite() {
                Ok(g.norm())
            } else {
                Err(Error::SingularNetwork(f64::NAN).at_frequency(fp.f))
            }
        })
        .collect()
}

pub fn evaluate_config(cfg: &MatchingConfig, problem: &Problem) -> FitnessReport {
    match reflection_magnitudes(cfg, &problem.aperture, &problem.network) {
        Ok(per_frequency) => FitnessReport {
            aggregate: problem.aggregator.apply(&per_frequency),
            per_frequency,
            config: *cfg,
            penalized: false,
        },
        Err(_) => FitnessReport {
            aggregate: PENALTY,
            per_frequency: vec![PENALTY; problem.aperture.len()],
            config: *cfg,
            penalized: true,
        },
    }
}

/// Decodes `chrom` and scores its network; failures are penalized, not raised.
pub fn fitness(chrom: &Chromosome, problem: &Problem) -> Result<FitnessReport> {
    let cfg = decode(chrom, &problem.space)?;
    Ok(evaluate_config(&cfg, problem))
}
