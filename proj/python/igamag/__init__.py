"""Isogeometric 2D magnetostatics for rotating electric machines."""

from igamag._core import (
    KnotVector,
    Machine,
    __version__,
    demo_machine,
    emf,
    emf_from_samples,
    eval_bspline,
    eval_nurbs,
    load_machine,
    rotate,
    solve,
    thd,
    validate,
    write_machine,
)

__all__ = [
    "KnotVector",
    "Machine",
    "__version__",
    "demo_machine",
    "emf",
    "emf_from_samples",
    "eval_bspline",
    "eval_nurbs",
    "load_machine",
    "rotate",
    "solve",
    "thd",
    "validate",
    "write_machine",
]
