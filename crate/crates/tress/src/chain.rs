//! An ordered sample of topologies from one MCMC run.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::taxa::TaxonMap;
use crate::topology::Topology;

/// One MCMC run: an ordered list of topologies over a shared taxon map, with
/// an optional per-sample log-density trace. Burn-in is assumed to have been
/// removed before construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    taxa: Arc<TaxonMap>,
    samples: Vec<Topology>,
    log_density: Option<Vec<f64>>,
}

impl Chain {
    pub fn new(
        taxa: Arc<TaxonMap>,
        samples: Vec<Topology>,
        log_density: Option<Vec<f64>>,
    ) -> Result<Self> {
        for t in &samples {
            if !(Arc::ptr_eq(t.taxa(), &taxa) || t.taxa().same_as(&taxa)) {
                return Err(Error::TaxonMismatch);
            }
        }
        if let Some(ld) = &log_density {
            if ld.len() != samples.len() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "log-density length {} does not match sample count {}",
                    ld.len(),
                    samples.len()
                )));
            }
        }
        Ok(Chain {
            taxa,
            samples,
            log_density,
        })
    }

    pub fn taxa(&self) -> &Arc<TaxonMap> {
        &self.taxa
    }

    pub fn samples(&self) -> &[Topology] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn log_density(&self) -> Option<&[f64]> {
        self.log_density.as_deref()
    }

    /// Same samples in reverse order (log-density reversed alongside).
    pub fn reversed(&self) -> Chain {
        let mut samples = self.samples.clone();
        samples.reverse();
        let log_density = self.log_density.clone().map(|mut v| {
            v.reverse();
            v
        });
        Chain {
            taxa: self.taxa.clone(),
            samples,
            log_density,
        }
    }
}
