//! The full per-instance pipeline: arrangement, trees, actions, complex and barcode.

use crate::action::{action_table, ActionTable};
use crate::arrangement::{derive_trees, reconstruct_arrangement, Arrangement, TreeView};
use crate::error::Result;
use crate::instance::Instance;
use crate::lunes::{differential, FloerComplex};
use crate::persistence::{barcode, Barcode, JordanBasis};

#[derive(Clone, Debug)]
pub struct Analysis {
    pub instance: Instance,
    pub arrangement: Arrangement,
    pub view: TreeView,
    pub actions: ActionTable,
    pub complex: FloerComplex,
    pub barcode: Barcode,
    pub jordan: JordanBasis,
}

impl Analysis {
    /// Actions anchored at `𝒜(s1) = 0`.
    pub fn new(inst: &Instance, max_wraps: u32) -> Result<Analysis> {
        let arrangement = reconstruct_arrangement(inst)?;
        let actions = action_table(&arrangement)?;
        Self::assemble(inst, arrangement, actions, max_wraps)
    }

    /// Same, in a caller-chosen gauge (`actions` must be a valid table for `inst`).
    pub fn with_actions(inst: &Instance, actions: ActionTable, max_wraps: u32) -> Result<Analysis> {
        let arrangement = reconstruct_arrangement(inst)?;
        Self::assemble(inst, arrangement, actions, max_wraps)
    }

    /// The same analysis shifted so that `𝒜(s1) = 0`.
    pub fn anchored(mut self) -> Analysis {
        let c = -self.actions.get(0).clone();
        self.actions = self.actions.shifted(&c);
        self.barcode = self.barcode.shifted(&c);
        self
    }

    fn assemble(inst: &Instance, arrangement: Arrangement, actions: ActionTable, max_wraps: u32) -> Result<Analysis> {
        let view = derive_trees(&arrangement.skeleton);
        let complex = differential(&arrangement, &actions, max_wraps)?;
        let (barcode, jordan) = barcode(&complex, &actions)?;
        Ok(Analysis {
            instance: inst.clone(),
            arrangement,
            view,
            actions,
            complex,
            barcode,
            jordan,
        })
    }
}
