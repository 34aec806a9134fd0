//! Graph-hypersurface frames, Newton tensors, support functions and the
//! `L_r` operators.

mod frame;
mod lr;
mod newton;
mod support;

pub use frame::{graph_frame, GraphFrame, ShapeSign};
pub use lr::{lr_divergence_check, lr_f, lr_g, resolve_lr_shape_sign, DivergenceCheck, LrSignResolution, TestFunction};
pub use newton::{newton_stack, newton_tensor_norm, NewtonStack, TraceResiduals};
pub(crate) use support::intrinsic_gradient;
pub use support::{
    gradients_fg, resolve_gradient_assignment, support_data, FgGradients, GradientReading, GradientResolution,
    SupportData,
};
