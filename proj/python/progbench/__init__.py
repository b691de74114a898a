# Copyright 2026 The progbench Authors
# SPDX-License-Identifier: Apache-2.0
"""Task-progress benchmark toolkit (Python bindings to the C++ core)."""

from ._progbench import (  # noqa: F401
    ProgbenchError,
    analyze,
    build,
    build_instances,
    eval_mock,
    format_percent,
    interpolate_progress,
    interval_deltas,
    nse,
    parse_response,
    render_prompt,
    reward_components,
    score,
    score_and_aggregate,
    spearman,
    validate_trajectory,
)

__version__ = "0.1.0"
