from .augment import AugmentConfig, augmentation_schedule, generate_augmented
from .evaluate import evaluate, predict
from .mlp import MlpHyper, MlpModel, load_mlp, save_mlp, train_mlp
from .svm import SvmModel, load_svm, save_svm, train_svm

__all__ = [
    "AugmentConfig",
    "MlpHyper",
    "MlpModel",
    "SvmModel",
    "augmentation_schedule",
    "evaluate",
    "generate_augmented",
    "load_mlp",
    "load_svm",
    "predict",
    "save_mlp",
    "save_svm",
    "train_mlp",
    "train_svm",
]
