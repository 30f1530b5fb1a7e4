//! Special functions and the distributions used by the estimators.

mod beta;
mod binomial;
mod bivariate;
mod normal;
pub(crate) mod vasicek;

pub use beta::{beta_cdf, beta_pdf, beta_quantile, beta_sf, ln_beta_cdf, ln_beta_pdf, BetaParams};
pub use binomial::{binomial_cdf, binomial_pmf, ln_binomial_coefficient, ln_binomial_pmf, poisson_cdf};
pub use bivariate::bivariate_normal_cdf;
pub use normal::{ln_std_normal_cdf, std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use vasicek::{
    corr_binomial_cdf, corr_binomial_mean_var, corr_binomial_pmf, g_conditional_pd, ConditionalPd,
    CorrBinomialParams,
};
