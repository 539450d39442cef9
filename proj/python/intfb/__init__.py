"""Consensus optimization with integral feedback."""

from ._intfb import (
    Graph,
    IntfbError,
    LinearConstraint,
    Problem,
    check,
    equilibrium_y_star,
    fig1_config,
    fig2_config,
    paper_example,
    random_instance,
    relaxed_example,
    run,
    solve,
)

__all__ = [
    "Graph",
    "IntfbError",
    "LinearConstraint",
    "Problem",
    "check",
    "equilibrium_y_star",
    "fig1_config",
    "fig2_config",
    "paper_example",
    "random_instance",
    "relaxed_example",
    "run",
    "solve",
]
