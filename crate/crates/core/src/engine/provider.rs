use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depmatrix::DependencyMatrices;
use crate::model::{Domain, ElaboratedMachine};
use crate::semantics::SemanticsError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Domain,
}

/// Everything the engine needs to know up front about a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelInfo {
    pub variables: Vec<VariableDecl>,
    pub groups: Vec<String>,
    pub rm: Vec<Vec<bool>>,
    pub wm: Vec<Vec<bool>>,
    pub initial: Vec<Vec<u32>>,
}

impl ModelInfo {
    pub fn from_machine(em: &ElaboratedMachine, dm: &DependencyMatrices) -> Self {
        ModelInfo {
            variables: em
                .variables
                .iter()
                .map(|v| VariableDecl {
                    name: v.name.clone(),
                    domain: v.domain.clone(),
                })
                .collect(),
            groups: em.groups.iter().map(|g| g.name.clone()).collect(),
            rm: dm.rm.clone(),
            wm: dm.wm.clone(),
            initial: em.initial_states.iter().map(|s| s.to_vec()).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    /// Checks matrix shapes and that initial states lie within the domains.
    pub fn validate(&self) -> Result<(), String> {
        let (m, n) = (self.num_groups(), self.num_vars());
        for (what, mat) in [("read", &self.rm), ("write", &self.wm)] {
            if mat.len() != m || mat.iter().any(|row| row.len() != n) {
                return Err(format!("{what} matrix is not {m}x{n}"));
            }
        }
        if self.initial.is_empty() {
            return Err("no initial state".into());
        }
        for s in &self.initial {
            if s.len() != n {
                return Err(format!("initial state of length {} for {n} variables", s.len()));
            }
            if let Some((v, _)) = self.variables.iter().zip(s).find(|(v, &x)| x as u64 >= v.domain.size()) {
                return Err(format!("initial value of '{}' outside {}", v.name, v.domain));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error(transparent)]
    Model(#[from] SemanticsError),
    #[error("unknown group {0}")]
    UnknownGroup(usize),
    #[error("transport: {0}")]
    Transport(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("remote error: {0}")]
    Remote(String),
}

/// Source of projected successors for each transition group.
pub trait NextStateProvider {
    fn init(&mut self) -> Result<ModelInfo, ProviderError>;

    /// Write-projected successors of a read-projected state.
    fn next_state(&mut self, group: usize, src: &[u32]) -> Result<Vec<Vec<u32>>, ProviderError>;

    /// Calls made so far, per group.
    fn calls(&self) -> &[u64];
}
