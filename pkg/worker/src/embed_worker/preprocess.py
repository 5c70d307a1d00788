"""Image decoding and tensor preparation.

The worker owns preprocessing because it is model-specific: resize the
shorter side to the backbone's input side with bicubic resampling, center
crop to a square, scale to [0, 1], then normalize per channel. /info
repeats this description so stores record how their vectors were made.
"""

from __future__ import annotations

import io

import torch
from PIL import Image, UnidentifiedImageError

INPUT_SIDE = 224
IMAGE_MEAN = (0.48145466, 0.4578275, 0.40821073)
IMAGE_STD = (0.26862954, 0.26130258, 0.27577711)

PREPROCESS_DESCRIPTION = (
    "rgb; resize shorter side to 224 (bicubic); center crop 224x224; "
    "scale to [0,1]; normalize per channel"
)


class ImageDecodeError(ValueError):
    """The payload is not a decodable raster image."""


def decode_image(data: bytes) -> Image.Image:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageDecodeError(f"cannot decode image: {exc}") from exc
    return img.convert("RGB")


def to_tensor(img: Image.Image, side: int = INPUT_SIDE) -> torch.Tensor:
    """(3, side, side) float32 tensor, normalized."""
    w, h = img.size
    scale = side / min(w, h)
    img = img.resize((max(side, round(w * scale)), max(side, round(h * scale))), Image.BICUBIC)
    w, h = img.size
    left, top = (w - side) // 2, (h - side) // 2
    img = img.crop((left, top, left + side, top + side))

    x = torch.frombuffer(bytearray(img.tobytes()), dtype=torch.uint8)
    x = x.reshape(side, side, 3).permute(2, 0, 1).float() / 255.0
    mean = torch.tensor(IMAGE_MEAN).view(3, 1, 1)
    std = torch.tensor(IMAGE_STD).view(3, 1, 1)
    return (x - mean) / std
