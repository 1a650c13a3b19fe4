//! Metric geometry: charts, tensors, connection, curvature and exterior calculus.

mod chart;
mod error;
mod geometry;
mod local;
mod tensor;

pub use chart::{sample_points, Chart};
pub use error::GeometryError;
pub use geometry::{
    christoffel, codifferential, covariant_derivative, determinant, evaluate_tensor,
    exterior_derivative, inertia, inverse_metric, lie_bracket, lower_index, raise_index, ricci, riemann,
    symmetric_eigenvalues, tensor_len, Manifold,
};
pub use local::{JetTensor, LocalGeometry};
pub use tensor::{
    component_count, flatten, permutation_sign, unflatten, Symmetry, TensorField, Variance,
};
