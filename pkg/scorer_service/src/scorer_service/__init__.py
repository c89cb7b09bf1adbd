"""Model-backed sentence answerability scorer behind the /score protocol."""

from .model import ModelConfig, SentenceClassifier, load_checkpoint, save_checkpoint
from .service import create_app
from .training import TrainingConfig, train

__version__ = "0.1.0"

__all__ = [
    "ModelConfig",
    "SentenceClassifier",
    "TrainingConfig",
    "create_app",
    "load_checkpoint",
    "save_checkpoint",
    "train",
]
