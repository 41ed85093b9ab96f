//! Open-system dynamics on column-stacked density matrices.

mod density;
mod liouvillian;
mod propagate;
mod spec;

pub use density::{combine, devectorize, vectorize, DensityVector};
pub use liouvillian::{build_liouvillian, LiouvillianOp, Part, LIOUVILLIAN_DENSE_CAP};
pub use propagate::{
    liouvillian_chain, lindblad_exact_propagate, open_fast_forward, open_subspace_matrices,
    trotter_liouvillian_evolve, trotter_liouvillian_step, Splitting,
};
pub use spec::{Collapse, LindbladSpec};
