use std::collections::BTreeSet;

use super::provider::{ModelInfo, NextStateProvider, ProviderError};
use crate::depmatrix::{build_matrices, DependencyMatrices};
use crate::model::ElaboratedMachine;
use crate::semantics::successors;

/// In-process provider backed by the reference interpreter.
pub struct LocalProvider {
    em: ElaboratedMachine,
    dm: DependencyMatrices,
    calls: Vec<u64>,
}

impl LocalProvider {
    pub fn new(em: ElaboratedMachine) -> Self {
        let dm = build_matrices(&em);
        Self::with_matrices(em, dm)
    }

    pub fn with_matrices(em: ElaboratedMachine, dm: DependencyMatrices) -> Self {
        let calls = vec![0; em.num_groups()];
        Self { em, dm, calls }
    }

    pub fn machine(&self) -> &ElaboratedMachine {
        &self.em
    }

    pub fn matrices(&self) -> &DependencyMatrices {
        &self.dm
    }

    /// Full state with `src` at the read positions and index 0 elsewhere.
    pub fn representative(&self, group: usize, src: &[u32]) -> Vec<u32> {
        let mut full = vec![0; self.em.num_vars()];
        let positions = (0..full.len()).filter(|&j| self.dm.rm[group][j]);
        for (j, &v) in positions.zip(src) {
            full[j] = v;
        }
        full
    }
}

impl NextStateProvider for LocalProvider {
    fn init(&mut self) -> Result<ModelInfo, ProviderError> {
        Ok(ModelInfo::from_machine(&self.em, &self.dm))
    }

    fn next_state(&mut self, group: usize, src: &[u32]) -> Result<Vec<Vec<u32>>, ProviderError> {
        if group >= self.em.num_groups() {
            return Err(ProviderError::UnknownGroup(group));
        }
        let reads = self.dm.rm[group].iter().filter(|&&b| b).count();
        if src.len() != reads {
            return Err(ProviderError::Protocol(format!(
                "source of length {} for {reads} read positions",
                src.len()
            )));
        }
        self.calls[group] += 1;
        let full = self.representative(group, src);
        let wm = &self.dm.wm[group];
        let out: BTreeSet<Vec<u32>> = successors(&self.em, group, &full)?
            .iter()
            .map(|t| t.iter().zip(wm).filter(|(_, &w)| w).map(|(&v, _)| v).collect())
            .collect();
        Ok(out.into_iter().collect())
    }

    fn calls(&self) -> &[u64] {
        &self.calls
    }
}
