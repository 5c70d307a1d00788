"""Causal transformer text tower paired with the ResNet image tower."""

from __future__ import annotations

import torch
from torch import nn


class ResidualAttentionBlock(nn.Module):
    def __init__(self, width: int, heads: int):
        super().__init__()
        self.ln_1 = nn.LayerNorm(width)
        self.attn = nn.MultiheadAttention(width, heads)
        self.ln_2 = nn.LayerNorm(width)
        self.mlp = nn.Sequential(
            nn.Linear(width, width * 4),
            nn.GELU(),
            nn.Linear(width * 4, width),
        )

    def forward(self, x: torch.Tensor, attn_mask: torch.Tensor) -> torch.Tensor:
        y = self.ln_1(x)
        x = x + self.attn(y, y, y, need_weights=False, attn_mask=attn_mask)[0]
        return x + self.mlp(self.ln_2(x))


class TextEncoder(nn.Module):
    """Embeds token id sequences; output read at the EOS position.

    The tokenizer guarantees EOS carries the largest id in the sequence,
    so argmax finds its position without a separate mask.
    """

    def __init__(
        self,
        vocab_size: int = 49408,
        context_length: int = 77,
        width: int = 512,
        heads: int = 8,
        layers: int = 12,
        embed_dim: int = 512,
    ):
        super().__init__()
        self.context_length = context_length
        self.token_embedding = nn.Embedding(vocab_size, width)
        self.positional_embedding = nn.Parameter(torch.empty(context_length, width))
        self.blocks = nn.ModuleList(
            ResidualAttentionBlock(width, heads) for _ in range(layers)
        )
        self.ln_final = nn.LayerNorm(width)
        self.text_projection = nn.Parameter(torch.empty(width, embed_dim))

        nn.init.normal_(self.token_embedding.weight, std=0.02)
        nn.init.normal_(self.positional_embedding, std=0.01)
        nn.init.normal_(self.text_projection, std=width**-0.5)

        mask = torch.full((context_length, context_length), float("-inf"))
        self.register_buffer("causal_mask", torch.triu(mask, diagonal=1), persistent=False)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        if ids.shape[-1] != self.context_length:
            raise ValueError(f"expected {self.context_length} token ids, got {ids.shape[-1]}")
        x = self.token_embedding(ids) + self.positional_embedding
        x = x.permute(1, 0, 2)  # to (seq, batch, width)
        for block in self.blocks:
            x = block(x, self.causal_mask)
        x = self.ln_final(x.permute(1, 0, 2))
        eos = ids.argmax(dim=-1)
        return x[torch.arange(x.shape[0]), eos] @ self.text_projection
