//! Texture and color lattices, evaluated on the fly without materializing them.

mod color;
mod partition;
mod texture;

pub use color::{
    color_leq, dominant_concepts, max_balance, path_col, select_order, sublattice_balance,
    to_dominant_form, ColorOrder, Completion, DominantColorForm, DominantSet, DEFAULT_Q_STEP,
};
pub use partition::{lattice_depth, partition_count};
pub use texture::{path_tex, texture_leq, TextureLatticePoint};

use crate::error::{Error, Result};

/// Units in a full 100% for a quantization step given in percent.
pub fn total_units(q_step: u32) -> Result<u32> {
    if q_step == 0 || 100 % q_step != 0 {
        return Err(Error::InvalidArgument(format!(
            "quantization step {q_step}% must divide 100"
        )));
    }
    Ok(100 / q_step)
}
