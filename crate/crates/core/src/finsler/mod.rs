//! Geometric objects of an m-th root metric at a base point.
//!
//! All fiber dependence is carried as polynomials or rational functions of
//! `y`; the base point enters only through numeric coefficient values and
//! their x-derivatives ([`PointContext`]).

mod metric;
mod spray;
mod tensors;

pub use metric::{CompiledMetric, MetricSpec, MultiIndex, PointContext};
pub use spray::{
    cgamma_coeffs, delta_derivative, geodesic_forcing, h_cov_deriv_t3, nonlinear_connection_expanded, spray,
    CovariantThird, MetricalCoefficients, SprayData,
};
pub use tensors::{
    cartan_tensor, finsler_metric, finsler_metric_inverse, fundamental_t, hessian_inverse, identity_residual,
    inverse_hessian_via_metric, invert_numeric, FundamentalTensors, InverseHessian,
};

use crate::scalar::Scalar;
use crate::Result;

/// Everything needed for classification at one point.
#[derive(Debug, Clone)]
pub struct PointGeometry<S> {
    pub tensors: FundamentalTensors<S>,
    pub inverse: InverseHessian<S>,
    pub spray: SprayData<S>,
}

impl<S: Scalar> PointGeometry<S> {
    pub fn new(ctx: &PointContext<S>) -> Result<Self> {
        let tensors = fundamental_t(ctx);
        let inverse = hessian_inverse(&tensors)?;
        let spray = spray(&tensors, &inverse);
        Ok(Self { tensors, inverse, spray })
    }

    pub fn metrical(&self) -> MetricalCoefficients<S> {
        cgamma_coeffs(&self.tensors, &self.inverse, &self.spray)
    }
}
