from .bernoulli import (
    BernoulliDataset,
    bernoulli_derivative,
    bernoulli_exact_log_z,
    bernoulli_log_laplace_closed,
    bernoulli_log_posterior,
    bernoulli_log_ratio_closed,
    bernoulli_mode_closed,
    bernoulli_objective,
)
from .multinomial import (
    MultinomialDataset,
    multinomial_exact_log_z,
    multinomial_log_det_closed,
    multinomial_log_laplace_closed,
    multinomial_log_likelihood,
    multinomial_log_prior,
    multinomial_log_ratio_closed,
    multinomial_mode_closed,
    multinomial_objective,
)
from .poisson import (
    PoissonDataset,
    poisson_conditional_log_likelihood,
    poisson_derivative,
    poisson_exact_log_marginal,
    poisson_joint_log,
    poisson_log_laplace_closed,
    poisson_log_ratio_closed,
    poisson_mode_closed,
    poisson_objective,
)
from .quadrature import quadrature_oracle
from .truth import MODELS, TrueDistribution, ball_center, ball_radius, sample, uniform_multinomial
