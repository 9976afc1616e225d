//! Loop representation of Dobrushin domains and the parafermionic
//! observable.

mod domain;
pub(crate) mod medial;
mod observable;
mod trace;

pub use domain::{arcs_from_region, build_dobrushin, DobrushinDomain, MedialEdge, MedialState};
pub use observable::{
    contour_integral, cr_residual, elementary_contour, full_vertices, observable_field, observable_fields,
    observable_fields_at, sample_observable, vertex_sum_check, vertex_sum_functional, ObservableField,
    SampledObservable, Variant,
};
pub use trace::{path_winding, trace_loops, LoopDecomposition, Membership, Winding};

use num_complex::Complex64;

/// Spin parameters of the observable for cluster weight `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinParams {
    pub q: f64,
    /// Solves `sin(sigma pi / 2) = sqrt(q) / 2`.
    pub sigma: Complex64,
    /// `1 - sigma`.
    pub sigma_hat: Complex64,
    /// `i sigma_hat`, real and positive for `q > 4`.
    pub sigma_tilde: Complex64,
}

pub fn spin_params(q: f64) -> crate::Result<SpinParams> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(crate::Error::InvalidQ(q));
    }
    let half = q.sqrt() / 2.0;
    let sigma = if q <= 4.0 {
        Complex64::new(std::f64::consts::FRAC_2_PI * half.min(1.0).asin(), 0.0)
    } else {
        Complex64::new(1.0, std::f64::consts::FRAC_2_PI * half.acosh())
    };
    let sigma_hat = Complex64::new(1.0, 0.0) - sigma;
    let mut sigma_tilde = Complex64::i() * sigma_hat;
    if q > 4.0 && sigma_tilde.re < 0.0 {
        sigma_tilde = -sigma_tilde;
    }
    Ok(SpinParams {
        q,
        sigma,
        sigma_hat,
        sigma_tilde,
    })
}
