"""Candidate scoring: fluency, entity/predicate gates, MRC confidence.

A candidate's final score is the product

    exp(slor)^a * entity^b * predicate^c * prod_i  rc[role_i]^{r_i}

where entity and predicate are binary gates, rc[role] is the MRC backend's
best-span score for that role's question (may be negative), and the role
exponents r_i are non-negative integers.  exp(slor) keeps the fluency base
strictly positive so the fractional exponent a is well defined; integer
role exponents keep powers of negative rc scores well defined, and an odd
exponent preserves their sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import exp
from typing import Mapping, Sequence

from .corpus import contains_phrase
from .lm import SlorScore
from .treebank import Token


class ConfigError(ValueError):
    """Invalid scoring configuration."""


def _check_binary(name: str, value: int) -> int:
    if isinstance(value, bool) or value not in (0, 1):
        raise ConfigError(f"{name} must be 0 or 1: {value!r}")
    return value


@dataclass(frozen=True)
class ScoreConfig:
    """Score exponents and search limits."""

    a: float = 1.5
    b: int = 1
    c: int = 1
    role_exponents: Mapping[str, int] = field(default_factory=lambda: {"Actor": 1, "Target": 1})
    t: int = 5
    max_iter: int = 10

    def __post_init__(self) -> None:
        if self.a < 0:
            raise ConfigError(f"a must be >= 0: {self.a!r}")
        _check_binary("b", self.b)
        _check_binary("c", self.c)
        for role, r in self.role_exponents.items():
            if isinstance(r, bool) or not isinstance(r, int) or r < 0:
                raise ConfigError(f"role exponent for {role!r} must be a non-negative integer: {r!r}")
        if self.t < 0:
            raise ConfigError(f"t must be >= 0: {self.t!r}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1: {self.max_iter!r}")


@dataclass(frozen=True)
class ScoreBreakdown:
    """The four component scores and their combination for one candidate."""

    nu_lm: float
    nu_entity: int
    nu_pred: int
    nu_rc: dict[str, float]
    combined: float


def entity_score(candidate_tokens: Sequence[Token], original_entities: Sequence[str]) -> int:
    """1 iff every entity detected in the original sentence survives in the candidate."""
    for entity in original_entities:
        if not contains_phrase(candidate_tokens, entity):
            return 0
    return 1


def predicate_score(candidate_tokens: Sequence[Token], predicates: Sequence[str]) -> int:
    """1 iff the candidate still contains any predicate of the event type."""
    for predicate in predicates:
        if contains_phrase(candidate_tokens, predicate):
            return 1
    return 0


def combine(
    nu_lm_raw: SlorScore,
    nu_entity: int,
    nu_pred: int,
    nu_rc: Mapping[str, float],
    cfg: ScoreConfig,
) -> ScoreBreakdown:
    """Multiply the component scores under the configured exponents.

    Roles with exponent 0 contribute a factor of 1 regardless of their raw
    score; roles absent from cfg.role_exponents are ignored.
    """
    missing = [role for role in cfg.role_exponents if role not in nu_rc]
    if missing:
        raise ConfigError(f"role exponents name roles with no MRC score: {missing}")
    nu_lm = exp(nu_lm_raw.value)
    combined = nu_lm ** cfg.a
    combined *= nu_entity ** cfg.b
    combined *= nu_pred ** cfg.c
    for role, r in cfg.role_exponents.items():
        if r == 0:
            continue
        combined *= nu_rc[role] ** r
    return ScoreBreakdown(
        nu_lm=nu_lm,
        nu_entity=nu_entity,
        nu_pred=nu_pred,
        nu_rc=dict(nu_rc),
        combined=combined,
    )
