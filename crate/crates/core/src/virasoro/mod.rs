//! Half-Virasoro vector fields and their action on the normalized plus group.

mod action;
mod bracket;
mod field;
mod flow;
mod holomap;
mod mobius;
mod schwarz;

pub use action::{
    action_parts, check_plus_membership, generator_action, log_derivative, virasoro_action, virasoro_action_parts,
    ActionParts, MEMBERSHIP_TOL,
};
pub use bracket::{bracket_representation_check, fd_commutator, DEFAULT_BRACKET_STEP};
pub use field::{reality_extend, vira_bracket, VectorFieldLambda, DEFAULT_DEGREE_CAP};
pub use flow::{
    control_direction, flow_loop, group_action, tangency_check, ConstantFrame, GroupFlowField, LinearizedFlow,
    PerturbedFrame, TangencyReport, TangencyRow, CONTROL_FIRST_ORDER, TANGENCY_SPREAD,
};
pub use holomap::HoloMap;
pub use mobius::{mobius_field, mobius_pushforward, to_vector_field, MobiusField, RationalField};
pub use schwarz::{random_real_loop, real_reality_residual, schwarz_action, VirasoroPairR, REAL_REALITY_TOL};
