from .gaussian import (EIG_FLOOR, GaussianPrior, diag_posterior, fit_gaussian, fit_gaussian_imperfect,
                       floor_eigenvalues, full_posterior, gaussian_posterior_sample, gaussian_ts_select,
                       pairwise_covariance)
from .gmm import GmmPrior, fit_gmm, gmm_posterior_sample, gmm_responsibilities, gmm_ts_select, kmeans_pp_seeds
from .policies import (DiffTSPolicy, GaussianTSPolicy, GmmTSPolicy, OraclePolicy, Policy, RandomPolicy,
                       UCB1Policy, combinatorial_select, diffts_sample, diffts_select, ucb1_select, ucb_indices)
from .state import InteractionState
