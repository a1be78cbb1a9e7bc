"""Centre Symmetric Quadruple Pattern descriptor, baseline local patterns and retrieval metrics."""

from .analysis import average_entropy, export_feature_image, feature_entropy, symmetry_variance
from .baselines import (
    DESCRIPTORS,
    DescriptorSpec,
    describe_cslbp,
    describe_csltp,
    describe_lbp,
    describe_slbp,
    get_descriptor,
)
from .csqp import FeatureVector, describe, encode_c, encode_csqp_at, feature_image
from .dataset import Dataset, FeatureCache, extract_all, load_cache, save_cache, scan_dataset
from .imaging import DimensionError, FeatureImage, GrayImage, load_image, to_grayscale
from .matching import RankedList, chi_square, classify_1nn, rank_gallery
from .metrics import anmrr, arp_arr_fscore, precision_recall_at, recognition_rate

__version__ = "0.1.0"
