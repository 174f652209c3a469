"""Chain-decomposition solver for non-binary discrete tomography."""

import json as _json

from ._core import (
    Instance,
    counting_space_size,
    evaluate_energy,
    generate_instance,
    load_instance,
    min_conv,
    project,
    solve_chain,
    solve_json,
    total_counting_entries,
)

__all__ = [
    "Instance",
    "counting_space_size",
    "evaluate_energy",
    "generate_instance",
    "load_instance",
    "min_conv",
    "project",
    "solve",
    "solve_chain",
    "total_counting_entries",
]


def solve(instance, **kwargs):
    """Run a solve pipeline and return the result record as a dict.

    Keyword arguments mirror the CLI: method ("ctg", "std", "ctg-bb",
    "std-bb"), max_iters, step_rule, time_limit, bb_nodes, threads,
    deterministic, run_primal.
    """
    return _json.loads(solve_json(instance, **kwargs))
