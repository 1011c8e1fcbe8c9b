"""Algorithm variants as one parameterisation of the update loop.

A variant string is a base name followed by optional modifiers, e.g.
``DroQ``, ``DroQ-DO-LN``, ``SAC+DO+LN``, ``DroQ-DO+GN``, ``DroQ-DO@TargetQ``
or ``REDQ`` with explicit ``N``/``M``. Modifiers apply left to right:

    +DO / -DO          enable dropout (at the configured rate) / disable it
    +LN / -LN          LayerNorm on / normalization off
    +BN, +GN, +LNwoVR  BatchNorm, two-group GroupNorm, LayerNorm without variance rescaling
    -DO@TargetQ        no dropout when evaluating the bootstrap target
    -DO@CurrentQ       no dropout in the Q regression step
    -DO@PolicyOpt      no dropout in the policy objective
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ConfigError
from ..q_ensemble import PLACEMENTS, canonical_normalization

BASES = ("SAC", "REDQ", "DroQN", "DroQ", "DUVN", "SinDroQ")
DEFAULT_DROPOUT_RATE = 0.01

MEAN = "MeanOverEnsemble"
MIN = "MinOverEnsemble"

# How the bootstrap target picks target-network evaluations.
TARGET_ALL = "all"          # every member once (DroQ)
TARGET_SUBSET = "subset"    # random M-subset of N (REDQ, DroQN, SAC)
TARGET_SINGLE = "single"    # member 0 once, no min (DUVN)
TARGET_REPEAT = "repeat"    # member 0 evaluated M times (Sin-DroQ)

_BASE_ALIASES = {b.lower(): b for b in BASES}
_BASE_ALIASES.update({"sin-droq": "SinDroQ", "droq-n": "DroQN"})
_MODIFIER = re.compile(r"([+-])(LNwoVR|DO|LN|BN|GN)(?:@(TargetQ|CurrentQ|PolicyOpt))?")
_POLICY_ALIASES = {"mean": MEAN, MEAN.lower(): MEAN, "min": MIN, MIN.lower(): MIN}


@dataclass(frozen=True)
class AlgorithmVariant:
    name: str
    base: str
    modifiers: tuple
    N: int
    M: int
    target_mode: str
    policy_objective: str
    dropout_rate: float
    normalization: str
    dropout_placement: frozenset

    @property
    def K(self) -> int:
        """Number of Q-networks held (and updated) by the agent."""
        return self.N


def canonical_policy_objective(name: str) -> str:
    key = str(name).lower()
    if key not in _POLICY_ALIASES:
        raise ConfigError(f"policy_objective must be mean/min, got {name!r}")
    return _POLICY_ALIASES[key]


def split_variant(text: str) -> tuple[str, list[tuple[str, str, str | None]]]:
    text = text.strip()
    m = re.match(r"[A-Za-z][A-Za-z-]*?(?=[+-](?:LNwoVR|DO|LN|BN|GN)\b|$)", text)
    base_text = m.group(0) if m else ""
    base = _BASE_ALIASES.get(base_text.lower())
    if base is None:
        raise ConfigError(f"unknown variant base in {text!r}; expected one of {BASES}")
    rest = text[len(base_text):]
    mods = []
    pos = 0
    while pos < len(rest):
        mm = _MODIFIER.match(rest, pos)
        if mm is None:
            raise ConfigError(f"cannot parse variant modifiers {rest[pos:]!r} in {text!r}")
        mods.append(mm.groups())
        pos = mm.end()
    return base, mods


def resolve_variant(text: str, *, N=None, M=None, dropout_rate=None, normalization=None,
                    dropout_placement=None, policy_objective=None) -> AlgorithmVariant:
    """Turn a variant string plus optional config overrides into a concrete variant.

    Precedence: base defaults, then explicit overrides, then modifiers. SAC
    always uses N = M = 2 and DUVN always uses M = 1 without normalization.
    """
    base, mods = split_variant(text)
    n_cfg = None if N is None else int(N)
    m_cfg = None if M is None else int(M)

    if base == "SAC":
        n, m, mode, pol, rate, norm = 2, 2, TARGET_SUBSET, MIN, 0.0, "None"
    elif base == "REDQ":
        n, m, mode, pol, rate, norm = n_cfg or 10, m_cfg or 2, TARGET_SUBSET, MEAN, 0.0, "None"
    elif base == "DroQN":
        n, m, mode, pol = n_cfg or 10, m_cfg or 2, TARGET_SUBSET, MEAN
        rate, norm = DEFAULT_DROPOUT_RATE, "LayerNorm"
    elif base == "DroQ":
        m = m_cfg or 2
        n, mode, pol, rate, norm = m, TARGET_ALL, MEAN, DEFAULT_DROPOUT_RATE, "LayerNorm"
    elif base == "DUVN":
        n, m, mode, pol, rate, norm = 1, 1, TARGET_SINGLE, MEAN, DEFAULT_DROPOUT_RATE, "None"
    else:  # SinDroQ
        n, m, mode, pol = 1, m_cfg or 2, TARGET_REPEAT, MEAN
        rate, norm = DEFAULT_DROPOUT_RATE, "LayerNorm"

    placement = frozenset(PLACEMENTS)
    if dropout_rate is not None and rate > 0.0:
        rate = float(dropout_rate)
    if normalization is not None and base != "DUVN":
        norm = canonical_normalization(normalization)
    if dropout_placement is not None:
        placement = frozenset(dropout_placement)
    if policy_objective is not None:
        pol = canonical_policy_objective(policy_objective)

    for sign, what, site in mods:
        if what == "DO":
            if site is not None:
                if sign == "+":
                    placement = placement | {site}
                else:
                    placement = placement - {site}
            elif sign == "+":
                rate = float(dropout_rate) if dropout_rate else DEFAULT_DROPOUT_RATE
            else:
                rate = 0.0
        elif site is not None:
            raise ConfigError(f"placement suffix only applies to DO, got {what}@{site}")
        elif sign == "-":
            norm = "None"
        else:
            norm = {"LN": "LayerNorm", "BN": "BatchNorm", "GN": "GroupNorm2",
                    "LNwoVR": "LayerNormNoVR"}[what]

    if not 1 <= m <= n and mode == TARGET_SUBSET:
        raise ConfigError(f"need 1 <= M <= N, got M={m}, N={n}")
    if m < 1:
        raise ConfigError(f"M must be positive, got {m}")
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    if not placement <= PLACEMENTS:
        raise ConfigError(f"unknown dropout placement {set(placement - PLACEMENTS)}")
    return AlgorithmVariant(
        name=text.strip(), base=base, modifiers=tuple(mods), N=n, M=m, target_mode=mode,
        policy_objective=pol, dropout_rate=rate, normalization=norm, dropout_placement=placement,
    )


def apply_modifiers(base_variant: str, spec: str) -> str:
    """``-DO-LN`` applied to ``DroQ`` gives ``DroQ-DO-LN``; full names pass through."""
    spec = spec.strip()
    if spec[:1] in "+-":
        return base_variant + spec
    return spec
