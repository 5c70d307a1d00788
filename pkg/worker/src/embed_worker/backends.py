"""Model loading and encoding for the two supported backbones.

Weights are randomly initialized from a seed derived from the backend id,
so every process that loads a backend gets the same weights and therefore
the same vectors. No checkpoint files are involved; the worker exists to
exercise the full inference path (tokenize/preprocess, forward, normalize)
with real architectures at their published parameter counts.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .preprocess import INPUT_SIDE, PREPROCESS_DESCRIPTION, decode_image, to_tensor
from .resnet import ModifiedResNet
from .text_encoder import TextEncoder
from .tokenizer import HashingTokenizer

VIT_B_32 = "ViT-B/32"
RN101 = "RN101"
BACKEND_IDS = (VIT_B_32, RN101)

# published totals; loading fails loudly if the built model disagrees
EXPECTED_PARAMETERS = {
    VIT_B_32: 151_277_313,
    RN101: 119_688_033,
}


class ModelIntegrityError(RuntimeError):
    """The constructed model does not match its published parameter count."""


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def _seed_for(backend_id: str, seed: int) -> int:
    digest = hashlib.sha256(f"{seed}:{backend_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little") % 2**63


class _RN101(nn.Module):
    def __init__(self):
        super().__init__()
        self.visual = ModifiedResNet(
            (3, 4, 23, 3), output_dim=512, heads=32, input_resolution=224, width=64
        )
        self.text = TextEncoder()
        self.logit_scale = nn.Parameter(torch.ones([]) * math.log(1 / 0.07))

    def encode_text(self, ids: torch.Tensor) -> torch.Tensor:
        return self.text(ids)

    def encode_image(self, pixels: torch.Tensor) -> torch.Tensor:
        return self.visual(pixels)


class _ViTB32(nn.Module):
    def __init__(self):
        super().__init__()
        from transformers import CLIPConfig, CLIPModel

        self.clip = CLIPModel(CLIPConfig())

    @staticmethod
    def _features(out) -> torch.Tensor:
        # newer transformers wrap features in an output object
        return out if torch.is_tensor(out) else out.pooler_output

    def encode_text(self, ids: torch.Tensor) -> torch.Tensor:
        return self._features(self.clip.get_text_features(input_ids=ids))

    def encode_image(self, pixels: torch.Tensor) -> torch.Tensor:
        return self._features(self.clip.get_image_features(pixel_values=pixels))


_BUILDERS = {VIT_B_32: _ViTB32, RN101: _RN101}


@dataclass
class Backend:
    """One loaded model plus everything needed to answer encode requests."""

    backend_id: str
    dim: int
    model: nn.Module
    tokenizer: HashingTokenizer
    input_image_side: int = INPUT_SIDE
    preprocess: str = PREPROCESS_DESCRIPTION
    parameters: int = 0

    def _normalized(self, raw: torch.Tensor) -> np.ndarray:
        out = raw / raw.norm(dim=-1, keepdim=True)
        return out.numpy().astype(np.float32, copy=False)

    def encode_text_batch(self, texts: list[str]) -> np.ndarray:
        ids = torch.tensor([self.tokenizer(t) for t in texts])
        with torch.no_grad():
            return self._normalized(self.model.encode_text(ids))

    def encode_image_batch(self, payloads: list[bytes]) -> np.ndarray:
        pixels = torch.stack(
            [to_tensor(decode_image(p), self.input_image_side) for p in payloads]
        )
        with torch.no_grad():
            return self._normalized(self.model.encode_image(pixels))

    def encode_text(self, text: str) -> np.ndarray:
        return self.encode_text_batch([text])[0]

    def encode_image(self, payload: bytes) -> np.ndarray:
        return self.encode_image_batch([payload])[0]

    def info(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "dim": self.dim,
            "input_image_side": self.input_image_side,
            "preprocess": self.preprocess,
            "parameters": self.parameters,
        }


def _probe_image_bytes() -> bytes:
    import io

    from PIL import Image

    buf = io.BytesIO()
    Image.new("RGB", (32, 24), (40, 90, 160)).save(buf, format="PNG")
    return buf.getvalue()


def load_backend(backend_id: str, seed: int = 0) -> Backend:
    """Build, integrity-check, and probe one backend.

    The embedding dim is discovered from a probe forward pass, never
    assumed, and the text/image paths must agree on it.
    """
    if backend_id not in _BUILDERS:
        raise ValueError(f"unknown backend {backend_id!r}, supported: {', '.join(BACKEND_IDS)}")
    torch.manual_seed(_seed_for(backend_id, seed))
    model = _BUILDERS[backend_id]()
    model.eval()
    model.requires_grad_(False)

    count = parameter_count(model)
    if count != EXPECTED_PARAMETERS[backend_id]:
        raise ModelIntegrityError(
            f"{backend_id}: built {count:,} parameters, "
            f"published count is {EXPECTED_PARAMETERS[backend_id]:,}"
        )

    backend = Backend(
        backend_id=backend_id,
        dim=0,
        model=model,
        tokenizer=HashingTokenizer(),
        parameters=count,
    )
    text_vec = backend.encode_text("dimension probe")
    image_vec = backend.encode_image(_probe_image_bytes())
    if text_vec.shape != image_vec.shape:
        raise ModelIntegrityError(
            f"{backend_id}: text dim {text_vec.shape} != image dim {image_vec.shape}"
        )
    backend.dim = int(text_vec.shape[0])
    return backend


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity as the worker itself computes it (torch float32)."""
    ta, tb = torch.from_numpy(np.asarray(a)), torch.from_numpy(np.asarray(b))
    return float(torch.nn.functional.cosine_similarity(ta, tb, dim=0))
