"""Per-decision metric rows shared by every scheme."""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .environment import StepInfo

# Bumped whenever the column set or a column meaning changes
METRICS_VERSION = 1


def join_values(values: Iterable[float]) -> str:
    """Semicolon-separated list so the header does not depend on the user counts."""
    return ";".join(f"{float(v):.10g}" for v in values)


@dataclass(frozen=True)
class MetricsRow:
    run_id: str
    scheme: str
    seed: int
    phase: str  # train, eval or ao
    episode: int
    step: int
    secrecy_rate: float
    su_rates: str
    pu_rates: str
    max_eavesdrop_rates: str
    reward: float
    c1_slack: float  # worst PU rate slack
    c2_slack: float
    c3_slack: float
    tau: float
    decision_ms: float

    @classmethod
    def from_step(
        cls,
        info: StepInfo,
        reward: float,
        *,
        run_id: str,
        scheme: str,
        seed: int,
        phase: str,
        episode: int,
        step: int,
        decision_ms: float = 0.0,
    ) -> MetricsRow:
        rates = info.rates
        constraints = info.constraints
        c1 = float(constraints.pu_rate.min()) if constraints.pu_rate.size else 0.0
        return cls(
            run_id=run_id,
            scheme=scheme,
            seed=seed,
            phase=phase,
            episode=episode,
            step=step,
            secrecy_rate=rates.secrecy,
            su_rates=join_values(rates.su),
            pu_rates=join_values(rates.pu),
            max_eavesdrop_rates=join_values(rates.max_eavesdrop),
            reward=float(reward),
            c1_slack=c1,
            c2_slack=constraints.false_alarm,
            c3_slack=constraints.energy,
            tau=info.action.tau,
            decision_ms=decision_ms,
        )

    def as_dict(self) -> dict[str, object]:
        return dataclasses.asdict(self)


METRICS_COLUMNS: tuple[str, ...] = tuple(f.name for f in dataclasses.fields(MetricsRow))


def mean_secrecy(rows: Iterable[MetricsRow]) -> float:
    values = [row.secrecy_rate for row in rows]
    return float(np.mean(values)) if values else 0.0
