"""Risky-host detection with stacked-RBM deep belief networks.

Feature engineering over security event logs, labels mined from analyst
notes, DBN training (CD pre-training + backprop fine-tuning), baseline
classifiers, and ranking metrics (AUC, detection rate, lift).
"""

from .baselines import BaselineKind, BaselineModel, score_baseline, train_baseline
from .dbn import (
    DbnArchitecture,
    DbnModel,
    Normalization,
    finetune,
    predict,
    pretrain,
    propagate,
    score,
)
from .features import FeatureMatrix, FeatureSchema, assemble_feature_matrix, default_schema
from .graph import build_host_event_graph, weighted_pagerank
from .labels import LabelLexicon, attach_labels, classify_note, default_lexicon
from .metrics import EvalCurves, ScoredHost, auc, detection_rate, evaluate, lift, roc_points
from .nnet import FinetuneConfig, SoftmaxHead, softmax_probs
from .rbm import (
    CdConfig,
    RbmParams,
    cd_k_update,
    energy,
    exact_distribution,
    exact_loglik_gradient,
    gibbs_step,
    hidden_given_visible,
    visible_given_hidden,
)
from .records import AnalystNote, EventRecord
from .synth import SynthConfig, generate_synthetic

__version__ = "0.1.0"
