//! Staircase and multi-staircase stochastic fitness functions.

mod descriptor;
mod format;
mod ladder;
mod transform;

pub use descriptor::{LadderSpec, MultiStaircaseDescriptor, Staircase, StaircaseDescriptor};
pub use format::Descriptor;
pub use ladder::Ladder;
pub use transform::{transform_to_basic_frame, BasicFrame};
