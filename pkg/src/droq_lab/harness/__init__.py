from .metrics import (
    CSV_FIELDS,
    EvalTrajectory,
    MetricsRecord,
    discounted_returns,
    estimate_bias,
    evaluate_return,
    q_stats,
)

__all__ = [
    "CSV_FIELDS",
    "EvalTrajectory",
    "MetricsRecord",
    "discounted_returns",
    "estimate_bias",
    "evaluate_return",
    "q_stats",
]
