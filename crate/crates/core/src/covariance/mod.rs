//! Gram and covariance estimators, max-norm errors, sparse operator norms and
//! restricted eigenvalue checks.

mod estimators;
mod net;
mod re;
mod rip;

pub use estimators::{
    centered_cov, delta_bound, gram, gram_pair, hard_threshold, max_abs, max_elementwise_error, GramPair,
};
pub use net::{quarter_net, sphere_net, sphere_net_size, NetVector, QuarterNet};
pub use re::{
    cone_min_oracle, re_check, rsc_lower, upsilon_estimate, upsilon_iid, xi_bound, ReReport, RsConvexityParams,
    RE_FACTOR,
};
pub use rip::{rip_exact, rip_exact_with_cap, rip_net, RipMethod, RipResult, DEFAULT_ENUMERATION_CAP};
