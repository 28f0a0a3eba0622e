use serde::{Deserialize, Serialize};

/// One named, shaped block of trainable values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGroup {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

/// All trainable parameters of a model, in a fixed order. Gradients use the
/// same structure so optimizers and checkers can walk both in lockstep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    pub groups: Vec<ParamGroup>,
}

/// Index of a group inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub usize);

impl ParamStore {
    pub fn add(&mut self, name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>) -> ParamId {
        debug_assert_eq!(shape.iter().product::<usize>(), values.len());
        self.groups.push(ParamGroup {
            name: name.into(),
            shape,
            values,
        });
        ParamId(self.groups.len() - 1)
    }

    #[inline]
    pub fn get(&self, id: ParamId) -> &[f64] {
        &self.groups[id.0].values
    }

    #[inline]
    pub fn get_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.groups[id.0].values
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            groups: self
                .groups
                .iter()
                .map(|g| ParamGroup {
                    name: g.name.clone(),
                    shape: g.shape.clone(),
                    values: vec![0.0; g.values.len()],
                })
                .collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.groups.iter().map(|g| g.values.len()).sum()
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.groups.iter().position(|g| g.name == name).map(ParamId)
    }

    /// Adds `src` into the group `id`.
    pub fn accumulate(&mut self, id: ParamId, src: &[f64]) {
        for (d, s) in self.get_mut(id).iter_mut().zip(src) {
            *d += s;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.groups.iter().all(|g| g.values.iter().all(|v| v.is_finite()))
    }
}
