//! Error correction with measurement-based read-in: codes, resources, effective channels.

pub mod circuits;
pub mod code;
pub mod effective;
pub mod resource;
pub mod scan;

pub use code::{derive_correction_table, Code, CodeKind, CorrectionTable, PatternRow};
pub use effective::{effective_map, effective_map_per_qubit, jamiolkowski_fidelity, EffectiveMap, Method, Scenario};
pub use resource::{build_resource, direct_gate_state, purified_state, Prep, ResourceState, Role};
