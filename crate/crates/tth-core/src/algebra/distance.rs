//! Distances between the count distributions of two aligned histograms,
//! behind a name-keyed metric registry.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Result, TthError};
use crate::tth::{RowKey, Tth};

/// Additive smoothing applied to every cell on the union support before
/// normalizing for the KL divergence.
pub const KL_EPSILON: f64 = 1e-9;

/// A distance over paired counts on the union of row keys (missing rows
/// contribute 0).
pub trait DistanceMetric: Send + Sync {
    fn name(&self) -> &str;
    fn compute(&self, pairs: &[(f64, f64)]) -> Result<f64>;
}

pub struct DistanceRegistry {
    metrics: BTreeMap<String, Arc<dyn DistanceMetric>>,
}

impl DistanceRegistry {
    pub fn builtin() -> Self {
        let mut reg = DistanceRegistry {
            metrics: BTreeMap::new(),
        };
        reg.register(Arc::new(Euclidean));
        reg.register(Arc::new(KlDivergence));
        reg
    }

    pub fn register(&mut self, metric: Arc<dyn DistanceMetric>) {
        self.metrics.insert(metric.name().to_string(), metric);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn DistanceMetric>> {
        self.metrics.get(name).cloned().ok_or_else(|| {
            TthError::Registry(format!(
                "unknown distance metric '{name}' (registered: {})",
                self.metrics.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

impl Default for DistanceRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Distance between two aligned histograms under the named metric.
pub fn distance(a: &Tth, b: &Tth, registry: &DistanceRegistry, metric: &str) -> Result<f64> {
    let metric = registry.get(metric)?;
    if a.grid() != b.grid() || a.bins() != b.bins() {
        return Err(TthError::Alignment(
            "histograms must share grid and binning for distance computation".into(),
        ));
    }
    if a.aux_schema() != b.aux_schema() {
        return Err(TthError::Alignment("aux schemas differ".into()));
    }
    if !(Arc::ptr_eq(a.vocab(), b.vocab()) || a.vocab().as_ref() == b.vocab().as_ref()) {
        return Err(TthError::Alignment(
            "histograms use different vocabularies; load them together first".into(),
        ));
    }

    let mut keys: Vec<&RowKey> = a.iter().map(|(k, _)| k).collect();
    keys.extend(b.iter().map(|(k, _)| k));
    keys.sort_unstable();
    keys.dedup();

    let pairs: Vec<(f64, f64)> = keys
        .into_iter()
        .map(|k| {
            let ca = a.get_row(k).map_or(0.0, |d| d.count as f64);
            let cb = b.get_row(k).map_or(0.0, |d| d.count as f64);
            (ca, cb)
        })
        .collect();
    metric.compute(&pairs)
}

/// Pointwise Euclidean distance: sqrt of the summed squared count deltas.
struct Euclidean;

impl DistanceMetric for Euclidean {
    fn name(&self) -> &str {
        "euclidean"
    }

    fn compute(&self, pairs: &[(f64, f64)]) -> Result<f64> {
        Ok(pairs
            .iter()
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// KL divergence of the two count distributions normalized to sum 1, with
/// additive epsilon smoothing on the union support.
struct KlDivergence;

impl DistanceMetric for KlDivergence {
    fn name(&self) -> &str {
        "kl"
    }

    fn compute(&self, pairs: &[(f64, f64)]) -> Result<f64> {
        let sum_a: f64 = pairs.iter().map(|(a, _)| a).sum();
        let sum_b: f64 = pairs.iter().map(|(_, b)| b).sum();
        if pairs.is_empty() || sum_a == 0.0 || sum_b == 0.0 {
            return Err(TthError::UndefinedDistribution(
                "KL divergence needs non-empty histograms on both sides".into(),
            ));
        }
        let norm_a = sum_a + KL_EPSILON * pairs.len() as f64;
        let norm_b = sum_b + KL_EPSILON * pairs.len() as f64;
        let mut kl = 0.0;
        for (a, b) in pairs {
            let p = (a + KL_EPSILON) / norm_a;
            let q = (b + KL_EPSILON) / norm_b;
            kl += p * (p / q).ln();
        }
        Ok(kl)
    }
}
