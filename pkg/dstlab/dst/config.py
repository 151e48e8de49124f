from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from dstlab.nn.functional import DEFAULT_CLAMP_EPS


class Alternation(str, Enum):
    TWO_STEP = "two_step"
    GRADIENT_REVERSAL = "gradient_reversal"


class AdversaryLoss(str, Enum):
    """What ``h_worst`` optimises on unlabeled data.

    ``cross_entropy`` ascends T itself. ``bounded`` minimises
    ``-log(1 - p_worst[pseudo label])`` instead, which saturates once a pseudo
    label is contradicted. Both fit the labeled batch.
    """
    CROSS_ENTROPY = "cross_entropy"
    BOUNDED = "bounded"


class DstOptions(BaseModel):
    """The ``dst`` section of a run config."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    clamp_eps: float = Field(DEFAULT_CLAMP_EPS, gt=0.0, lt=1.0)
    alternation: Alternation = Alternation.TWO_STEP
    adv_skip_when_empty: bool = True
    warmup_steps_adv: int = Field(500, ge=0)
    worst_case: bool = True
    detach_labeled_from_psi: bool = False
    adversary_loss: AdversaryLoss = AdversaryLoss.BOUNDED
    adv_weight: float = Field(1.0, ge=0.0, description="Weight of T in the objective of psi")
    adv_ramp_steps: int = Field(
        1000, ge=0, description="Steps after warmup over which the weight of T grows from 0")


class DstConfig(DstOptions):
    """Options plus the pseudo-labeling weight and threshold they act with."""

    lam: float = Field(1.0, ge=0.0)
    tau: float = Field(0.7, gt=0.0, le=1.0)

    @classmethod
    def from_options(cls, options: DstOptions, lam: float, tau: float) -> "DstConfig":
        return cls(lam=lam, tau=tau, **options.model_dump())
