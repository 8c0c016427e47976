"""Diffusion-model priors for Thompson sampling in multi-armed bandits."""

from .calibration import (CalibratedVariances, CalibrationMode, calibrate, calibrate_imperfect,
                          calibrate_warm, residual_rms)
from .data import ImperfectDataset
from .diffusion import (DenoiserModel, TargetMode, TrainConfig, clean_from_noise, forward_sample,
                        noise_from_clean, predicted_noise, reverse_kernel, reverse_step_calibrated,
                        reverse_step_plain, sample_unconditional, train_denoiser)
from .errors import (ConfigurationError, DegenerateError, DiffTSError, IngestionError, NumericalError,
                     StageError, StateError, StructuralError, TrainingError)
from .imperfect import (ImperfectTrainConfig, ImperfectTrainResult, batch_imperfect_loss, imperfect_loss,
                        imperfect_loss_weighted, sure_divergence_term, train_imperfect)
from .posterior import (NoiseMode, Observation, combine_precision, diffused_observation_std,
                        posterior_sample, posterior_sample_direct_mix, posterior_sample_noisy_mix,
                        product_gaussian_combine)
from .schedule import DiffusionSchedule, build_schedule

__version__ = "0.1.0"
