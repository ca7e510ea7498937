"""PCA-boosted autoencoders: stable PCA-replicating initializations."""

from ._core import (
    AeParams,
    Architecture,
    InitReport,
    PcaModel,
    TrainResult,
    avg_l2,
    avg_projection_error,
    decode,
    default_experiment_config,
    encode,
    forward,
    gen_power_surface,
    loss,
    pca_fit,
    pca_naive_init,
    pca_project,
    pca_reconstruct,
    pca_robust_init,
    prefix_condition_numbers,
    random_init,
    run_experiment,
    train,
    verify_init,
)

__all__ = [
    "AeParams",
    "Architecture",
    "InitReport",
    "PcaModel",
    "TrainResult",
    "avg_l2",
    "avg_projection_error",
    "decode",
    "default_experiment_config",
    "encode",
    "forward",
    "gen_power_surface",
    "loss",
    "pca_fit",
    "pca_naive_init",
    "pca_project",
    "pca_reconstruct",
    "pca_robust_init",
    "prefix_condition_numbers",
    "random_init",
    "run_experiment",
    "train",
    "verify_init",
]
