"""spiralwalk: Monte Carlo laboratory for high-dimensional random walks.

Simulates random walks in R^d under three increment models, checks
distributional limit laws for the squared norm of the endpoint, and
certifies metric convergence of rescaled paths to the square-root-time
reference curve (the curve t -> w_t with ||w_t - w_s|| = sqrt(|t - s|)).
"""

__version__ = "0.1.0"
