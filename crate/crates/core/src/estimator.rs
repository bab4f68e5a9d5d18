//! Uniform front end over the estimator family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cr::{cr_estimate_from_covariance, SymmetrizeRule};
use crate::enet::EnetConfig;
use crate::error::{GgmError, Result};
use crate::gelnet::{gelnet_estimate, GelnetConfig};
use crate::model::{Dataset, EstimationResult, PenaltyParams, SymMatrix};
use crate::two_stage::{two_stage_from_covariance, EdgeRule, TwoStageConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Estimator {
    Gelnet,
    /// `Gelnet` with `α` pinned to 1.
    Glasso,
    Cr(SymmetrizeRule),
    TwoStage(EdgeRule),
}

impl Estimator {
    pub const ALL: [Estimator; 6] = [
        Estimator::Gelnet,
        Estimator::Glasso,
        Estimator::Cr(SymmetrizeRule::L2),
        Estimator::Cr(SymmetrizeRule::MinEl),
        Estimator::TwoStage(EdgeRule::And),
        Estimator::TwoStage(EdgeRule::Or),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Gelnet => "gelnet",
            Estimator::Glasso => "glasso",
            Estimator::Cr(SymmetrizeRule::L2) => "cr-l2",
            Estimator::Cr(SymmetrizeRule::MinEl) => "cr-minel",
            Estimator::TwoStage(EdgeRule::And) => "2s-and",
            Estimator::TwoStage(EdgeRule::Or) => "2s-or",
        }
    }

    /// The `α` value this estimator is restricted to, if any.
    pub fn fixed_alpha(&self) -> Option<f64> {
        matches!(self, Estimator::Glasso).then_some(1.0)
    }

    /// Estimator whose code path actually runs (glasso resolves to gelnet).
    pub fn canonical(&self) -> Estimator {
        match self {
            Estimator::Glasso => Estimator::Gelnet,
            other => *other,
        }
    }

    pub fn estimate(&self, data: &Dataset, params: PenaltyParams, cfg: &EstimatorConfig) -> Result<EstimationResult> {
        self.estimate_from_covariance(&data.covariance(), data.n(), params, cfg)
    }

    /// Runs on the divisor-`n` covariance `s` of `n` observations.
    pub fn estimate_from_covariance(
        &self,
        s: &SymMatrix,
        n: usize,
        params: PenaltyParams,
        cfg: &EstimatorConfig,
    ) -> Result<EstimationResult> {
        let params = match self.fixed_alpha() {
            Some(alpha) => PenaltyParams::new(alpha, params.lambda)?,
            None => params,
        };
        match self.canonical() {
            Estimator::Gelnet => gelnet_estimate(s, params, &cfg.gelnet),
            Estimator::Cr(rule) => cr_estimate_from_covariance(s, n, params, rule, cfg.enet),
            Estimator::TwoStage(rule) => two_stage_from_covariance(s, n, params, rule, &cfg.two_stage),
            Estimator::Glasso => unreachable!("canonical never yields glasso"),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = GgmError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Estimator::ALL.into_iter().find(|e| e.name() == lower).ok_or_else(|| {
            let valid: Vec<_> = Estimator::ALL.iter().map(|e| e.name()).collect();
            GgmError::InvalidParameter(format!("unknown estimator '{s}' (valid: {})", valid.join(", ")))
        })
    }
}

impl From<Estimator> for String {
    fn from(e: Estimator) -> String {
        e.name().to_string()
    }
}

impl TryFrom<String> for Estimator {
    type Error = GgmError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Solver settings for every estimator kind.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EstimatorConfig {
    pub gelnet: GelnetConfig,
    pub enet: EnetConfig,
    pub two_stage: TwoStageConfig,
}
