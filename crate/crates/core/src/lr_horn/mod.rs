//! Littlewood–Richardson combinatorics and the Horn–Klyachko membership
//! oracle for spectra of frame operators of projective systems.

mod horn;
mod lr;
mod partition;
mod tuples;

pub use horn::{op_picture_contains, op_picture_convexity_probe, HornRow, HornSystem, PAIR_CAP};
pub use lr::{lr_coefficient, lr_product, skew_lr_count, MAX_CELLS};
pub use partition::{partition_of, IndexTuple, Partition};
pub use tuples::{enumerate_lr_tuples, LrCache, LrTuple, ENUMERATION_CAP};
