"""Cluster recovery from noisy pairwise queries and edge sign prediction."""

from .graph import (BalancedSample, IngestReport, ParseError, SignedGraph, clustering_agreement,
                    load_snap_edgelist, make_balanced_sample, planted_signed_network,
                    random_signed_digraph, random_truth, write_snap_edgelist)
from .oracle import NoisyOracle, OracleConfig, QueryGraph, sample_query_graph
from .pythia import PythiaConfig, largest_positive_component, recover_pythia, vote_pair
from .paths import (PathConfig, PathGadget, build_gadget, estimate_pair, exact_majority_bias,
                    majority, majority_bias_curve, recover_paths)
from .features import (FEATURE_NAMES, FeatureVector, degree_features, feature_matrix,
                       feature_vector, greedy_disjoint_paths, triad_counts)
from .learn import CvReport, FeatureMask, TrainedModel, cross_validate, train_logistic
from .datasets import resolve_dataset

__version__ = "0.1.0"
