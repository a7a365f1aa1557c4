"""Kernel two-sample and independence tests on set-valued data.

Each example is a bag of vectors, summarized by a random-Fourier-feature mean
embedding and weighted by its size; tests compare the resulting weighted
samples of embeddings with a Gaussian kernel and calibrate by permutation.
"""
from .data import DataError, ObservationSet, PairedSample, Sample, compute_weights, load_sample, save_sample, uniform_weights
from .kernels import gaussian_K, gram, median_heuristic_level2
from .permutation import TestResult, independence_null, p_value, two_sample_null
from .pipeline import TestConfig, rhsic_test, rmmd_test
from .rff import DegenerateScaleError, EmbeddedSample, RffBasis, embed_sample, feature_map, mean_embed, median_heuristic_level1, sample_basis
from .statistics import rhsic, rmmd2
from .tuning import ParamGrid

__version__ = "0.1.0"
