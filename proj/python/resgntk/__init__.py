"""Residual GNTK kernels and kernel-SVM node classification on unseen graphs."""

from ._resgntk import (
    ArgumentError,
    ConsistencyError,
    CovarianceError,
    DataError,
    Error,
    IndexError,
    IoError,
    KernelConfig,
    LabeledGraph,
    Model,
    ParseError,
    ShapeError,
    SvmConfig,
    SvmModel,
    count_dropped_edges,
    decision_values,
    empirical_ntk,
    erdos_renyi,
    evaluate,
    fit,
    gntk_pair,
    infer,
    kernel_trace,
    load_graph,
    load_manifest,
    mc_gaussian_expectation,
    partition,
    planted_partition,
    predict_svm,
    relu_expectations,
    save_dataset,
    sigma_init,
    test_kernel,
    train_kernel,
    train_svm,
)

__version__ = "0.1.0"
