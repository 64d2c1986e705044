"""Python access to the monitor core: metrics, scoring helpers and the CLI commands.

Commands return ``(exit_code, stdout, stderr)``.
"""

from ._core import (
    MonitorError,
    UndefinedMetric,
    average_precision,
    default_config,
    embed_text,
    evaluate,
    format_double,
    gate,
    normalize_config,
    parse_score,
    quantize_score,
    read_scores,
    roc_auc,
    run,
    smooth,
    synth,
)

__all__ = [
    "MonitorError",
    "UndefinedMetric",
    "average_precision",
    "default_config",
    "embed_text",
    "evaluate",
    "format_double",
    "gate",
    "normalize_config",
    "parse_score",
    "quantize_score",
    "read_scores",
    "roc_auc",
    "run",
    "smooth",
    "synth",
]
