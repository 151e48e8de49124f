"""Seeded construction of feature generators, heads and bundles.

Each component is initialised from its own named stream, so a component's
initial weights depend only on (seed, component name, round tag) and not on
which other heads an algorithm happens to build.
"""
from dataclasses import dataclass
from typing import Dict, Mapping, Optional

from dstlab.models.backbone import FeatureGenerator
from dstlab.models.base import ModelBundle
from dstlab.models.heads import Head, HeadKind
from dstlab.seeding import rng_stream


@dataclass(frozen=True)
class Architecture:
    input_dim: int
    num_classes: int
    embedding_dim: int = 64
    depth: int = 3
    hidden_dim: Optional[int] = None
    projection_dim: Optional[int] = None
    head_dropout: float = 0.2
    feature_dropout: float = 0.0


def _stream(seed: int, purpose: str, component: str, tag: str):
    return rng_stream(seed, f"{purpose}.{component}{tag}")


def build_feature_generator(arch: Architecture, seed: int, tag: str = "",
                            dropout: Optional[float] = None) -> FeatureGenerator:
    return FeatureGenerator(
        arch.input_dim, arch.embedding_dim, arch.depth,
        rng=_stream(seed, "init", "psi", tag),
        hidden_dim=arch.hidden_dim,
        dropout_rate=arch.feature_dropout if dropout is None else dropout,
        dropout_rng=_stream(seed, "dropout", "psi", tag),
    )


def build_head(arch: Architecture, name: str, kind: HeadKind, seed: int, tag: str = "") -> Head:
    return Head(
        kind, arch.embedding_dim, arch.num_classes,
        rng=_stream(seed, "init", name, tag),
        projection_dim=arch.projection_dim,
        dropout_rate=arch.head_dropout,
        dropout_rng=_stream(seed, "dropout", name, tag),
    )


def build_model(arch: Architecture, heads: Mapping[str, HeadKind], seed: int,
                tag: str = "", feature_dropout: Optional[float] = None) -> ModelBundle:
    """Build ``psi`` plus the named heads; ``tag`` separates Noisy Student rounds."""
    built: Dict[str, Head] = {
        name: build_head(arch, name, HeadKind(kind), seed, tag) for name, kind in heads.items()
    }
    return ModelBundle(build_feature_generator(arch, seed, tag, feature_dropout), built)
