"""TSK fuzzy regressors initialised by clustering and trained by regularised
mini-batch gradient descent."""

from .augment import AugmentedModel, AugmentSpec, augment_model
from .clustering import fcm, kmeans, subsample_for_clustering
from .data import load_csv, prepare, read_manifest, split
from .initialization import RulebaseSpec, init_fcm, init_grid, init_kmeans, init_random
from .kernels import BACKEND
from .model import (
    TskModel,
    firing_levels,
    gradient,
    load_model,
    loss,
    membership,
    predict,
    sample_drop_mask,
    save_model,
)
from .optim import OptimizerConfig, OptimizerState, powerball, step
from .trainer import TrainConfig, TrainReport, ridge, rmse, run_pipeline, train

__version__ = "0.1.0"
