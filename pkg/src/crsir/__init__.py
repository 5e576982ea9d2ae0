"""Cluster-based regularized sliced inverse regression."""

from .baselines import ar4_forecast, dfm5_forecast, ols, pca_factors
from .clustering import ClusterAssignment, complete_linkage_cluster, dissimilarity_matrix
from .model import CrsirModel, crsir_fit, crsir_predict, crsir_transform, load_model, save_model
from .numerics import DataMatrix, standardize
from .sir import EdrBasis, make_slices, select_dimension, sir_fit

__version__ = "0.1.0"

__all__ = [
    "ClusterAssignment",
    "CrsirModel",
    "DataMatrix",
    "EdrBasis",
    "ar4_forecast",
    "complete_linkage_cluster",
    "crsir_fit",
    "crsir_predict",
    "crsir_transform",
    "dfm5_forecast",
    "dissimilarity_matrix",
    "load_model",
    "make_slices",
    "ols",
    "pca_factors",
    "save_model",
    "select_dimension",
    "sir_fit",
    "standardize",
]
