"""Gait-based gender classification from pelvic IMU windows, with
gradient and layer-wise relevance propagation axis attribution."""
from .errors import FormatError, GaitrelError, InvalidInput, IoError, ParseError, UsageError
from .signals import (CHANNELS, DatasetSplit, FeatureWindow, Gender, NormStats, TimeSeriesRecording,
                      apply_normalizer, extract_windows, fit_normalizer, moving_average,
                      segment_windows, split_dataset, stack_features)
from .nn import (DEFAULT_DIMS, AdamState, DenseNetwork, TrainConfig, adam_step, backward, cross_entropy,
                 forward, init_network, predict, train)
from .metrics import ConfusionMatrix2, confusion_matrix, evaluate, macro_f1, precision_recall
from .relevance import (AxisRelevanceTable, Group, Method, RelevanceMap, aggregate_axis_relevance,
                        explain_gradient, explain_lrp_alphabeta, explain_lrp_epsilon, subgroup_relevance)
from .datagen import GaitGenConfig, generate_dataset, generate_subject

__version__ = "0.1.0"
