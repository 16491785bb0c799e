//! Numerical tolerances shared across engines.

/// Normalization of probability vectors.
pub const NORM: f64 = 1e-12;
/// Hermiticity of dense operators.
pub const HERMITIAN: f64 = 1e-10;
/// Lowest eigenvalue accepted for a positive semidefinite operator.
pub const PSD_FLOOR: f64 = -1e-10;
/// Trace deviation accepted when projecting dense operators to graph-diagonal form.
pub const DENSE_TRACE: f64 = 1e-8;
/// Success probability below which a purification step counts as failed.
pub const MIN_SUCCESS: f64 = 1e-15;
/// Largest register handled by the dense oracle.
pub const DENSE_MAX_QUBITS: usize = 12;
