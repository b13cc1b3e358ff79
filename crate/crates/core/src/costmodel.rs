//! Encoding-cost model in abstract cost units.
//!
//! With sentence length `L` and hidden size `D`:
//! target sentence encoding costs `L²D` per sample, knowledge encoding costs
//! `L²D` per distinct description in the batch, and knowledge integration
//! costs `C_x²D` per sample with `C_x` retrieved descriptions.

use std::io::Write;

use serde::Serialize;

use crate::capkmeans::Partition;
use crate::dataset::Dataset;
use crate::theory::per_batch_distinct;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostParams {
    pub seq_len: u64,
    pub hidden: u64,
    pub include_target: bool,
    pub include_integration: bool,
}

impl CostParams {
    /// Only the knowledge-encoding term, which batching can change.
    pub fn knowledge_only(seq_len: u64, hidden: u64) -> Self {
        CostParams {
            seq_len,
            hidden,
            include_target: false,
            include_integration: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.seq_len == 0 || self.hidden == 0 {
            return Err(Error::InvalidArgument(
                "sequence length and hidden size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for CostParams {
    fn default() -> Self {
        Self::knowledge_only(64, 768)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub knowledge: u64,
    pub target: u64,
    pub integration: u64,
    pub total: u64,
}

impl std::ops::Add for CostBreakdown {
    type Output = CostBreakdown;

    fn add(self, o: CostBreakdown) -> CostBreakdown {
        CostBreakdown {
            knowledge: self.knowledge + o.knowledge,
            target: self.target + o.target,
            integration: self.integration + o.integration,
            total: self.total + o.total,
        }
    }
}

/// Cost of one batch. `per_sample_counts` holds `C_x` for every member and
/// is only read when the integration term is enabled.
pub fn batch_cost(
    distinct_count: u64,
    batch_size: u64,
    per_sample_counts: &[u64],
    params: &CostParams,
) -> Result<CostBreakdown> {
    params.validate()?;
    let l2d = params.seq_len * params.seq_len * params.hidden;
    let knowledge = distinct_count * l2d;
    let target = if params.include_target {
        batch_size * l2d
    } else {
        0
    };
    let integration = if params.include_integration {
        per_sample_counts.iter().map(|c| c * c).sum::<u64>() * params.hidden
    } else {
        0
    };
    Ok(CostBreakdown {
        knowledge,
        target,
        integration,
        total: knowledge + target + integration,
    })
}

/// Summed cost of all batches of a partition.
pub fn partition_cost(dataset: &Dataset, partition: &Partition, params: &CostParams) -> Result<CostBreakdown> {
    let distinct = per_batch_distinct(dataset, partition)?;
    let mut total = CostBreakdown::default();
    for (members, d) in partition.batches().iter().zip(distinct) {
        let counts: Vec<u64> = members
            .iter()
            .map(|&i| dataset.descriptions(i).len() as u64)
            .collect();
        total = total + batch_cost(d, members.len() as u64, &counts, params)?;
    }
    Ok(total)
}

/// `cost(a) / cost(b)`: how much cheaper `b` is than `a`.
pub fn speedup(dataset: &Dataset, a: &Partition, b: &Partition, params: &CostParams) -> Result<f64> {
    let ca = partition_cost(dataset, a, params)?.total;
    let cb = partition_cost(dataset, b, params)?.total;
    Ok(ratio(ca as f64, cb as f64))
}

pub(crate) fn ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        a / b
    }
}

/// One line of a speedup sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `batch_size` or `description_cap`.
    pub axis: &'static str,
    pub value: usize,
    pub k: usize,
    pub spectral_objective: u64,
    pub random_mean_objective: f64,
    pub random_std_objective: f64,
    pub speedup: f64,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| Error::io("<sweep>", e))?;
    Ok(())
}
