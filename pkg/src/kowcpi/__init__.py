"""Sequential conformal prediction intervals for time series via reweighted
Nadaraya-Watson quantile regression on past residuals."""

__version__ = "0.1.0"
