"""Encoder worker: real text/image towers behind the embedder HTTP contract."""

from .backends import (
    BACKEND_IDS,
    EXPECTED_PARAMETERS,
    RN101,
    VIT_B_32,
    Backend,
    ModelIntegrityError,
    load_backend,
    parameter_count,
    similarity,
)
from .preprocess import (
    IMAGE_MEAN,
    IMAGE_STD,
    INPUT_SIDE,
    PREPROCESS_DESCRIPTION,
    ImageDecodeError,
    decode_image,
    to_tensor,
)
from .service import create_app
from .tokenizer import BOS_ID, CONTEXT_LENGTH, EOS_ID, PAD_ID, VOCAB_SIZE, HashingTokenizer

__version__ = "0.1.0"

__all__ = [
    "BACKEND_IDS",
    "BOS_ID",
    "CONTEXT_LENGTH",
    "EOS_ID",
    "EXPECTED_PARAMETERS",
    "IMAGE_MEAN",
    "IMAGE_STD",
    "INPUT_SIDE",
    "PAD_ID",
    "PREPROCESS_DESCRIPTION",
    "RN101",
    "VIT_B_32",
    "VOCAB_SIZE",
    "Backend",
    "HashingTokenizer",
    "ImageDecodeError",
    "ModelIntegrityError",
    "create_app",
    "decode_image",
    "load_backend",
    "parameter_count",
    "similarity",
    "to_tensor",
]
