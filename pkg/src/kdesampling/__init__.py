"""Kernel density estimation based oversampling for imbalanced binary data."""

from .classifiers import KNNClassifier, MLPClassifier
from .dataset import Dataset, LabelSpec, class_counts, load_csv, stratified_split, write_csv
from .exceptions import KdeSamplingError
from .kde import BandwidthRule, GaussianKDE, KdeModel
from .samplers import (
    ADASYN,
    SMOTE,
    KDEOverSampler,
    NearMiss,
    RandomOverSampler,
    ResampleRequest,
    ResampleResult,
    resample,
)

__version__ = "0.1.0"

__all__ = [
    "ADASYN",
    "SMOTE",
    "BandwidthRule",
    "Dataset",
    "GaussianKDE",
    "KDEOverSampler",
    "KNNClassifier",
    "KdeModel",
    "KdeSamplingError",
    "LabelSpec",
    "MLPClassifier",
    "NearMiss",
    "RandomOverSampler",
    "ResampleRequest",
    "ResampleResult",
    "class_counts",
    "load_csv",
    "resample",
    "stratified_split",
    "write_csv",
]
