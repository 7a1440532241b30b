"""MILP solver backends.

The model layer in :mod:`fixb.milp` is backend neutral; a backend only has to
turn a built model into a :class:`SolveOutcome`.  The bundled default drives
HiGHS through :func:`scipy.optimize.milp`.  Additional backends can be
registered at runtime; selection order is explicit argument, then the
``FIXB_BACKEND`` environment variable, then the default.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Protocol

import numpy as np

if TYPE_CHECKING:
    from .milp import MilpModel

ENV_VAR = "FIXB_BACKEND"
DEFAULT_BACKEND = "highs"


class BackendError(RuntimeError):
    """Requested backend is missing or failed outright."""


@dataclass(frozen=True)
class SolveOutcome:
    """Result of one backend run.

    ``values`` is present exactly when the solver produced an incumbent
    (optimal, feasible, or a time-limited run that found one).
    """

    status: str  # optimal | feasible | infeasible | time_limit | error
    objective: float | None
    values: tuple[float, ...] | None
    wall_time: float
    bound: float | None = None
    backend: str = ""
    message: str = ""

    @property
    def has_values(self) -> bool:
        return self.values is not None


class SolverBackend(Protocol):
    name: str

    def solve(
        self, model: "MilpModel", *, time_limit: float | None = None, relax: bool = False
    ) -> SolveOutcome: ...


class HighsBackend:
    """HiGHS via scipy.optimize.milp / linprog-equivalent relaxation."""

    name = "highs"

    def solve(
        self, model: "MilpModel", *, time_limit: float | None = None, relax: bool = False
    ) -> SolveOutcome:
        from scipy.optimize import Bounds, LinearConstraint, milp
        from scipy.sparse import csr_matrix

        nvar = len(model.variables)
        c = np.zeros(nvar)
        for idx, coef in model.objective.items():
            c[idx] = coef
        integrality = np.zeros(nvar)
        lb = np.zeros(nvar)
        ub = np.zeros(nvar)
        for v in model.variables:
            lo, hi = model.effective_bounds(v.idx)
            lb[v.idx], ub[v.idx] = lo, hi
            if v.kind == "B" and not relax:
                integrality[v.idx] = 1
        constraints = []
        if model.rows:
            data, rows, cols = [], [], []
            c_lb = np.empty(len(model.rows))
            c_ub = np.empty(len(model.rows))
            for r, row in enumerate(model.rows):
                for idx, coef in row.coeffs:
                    rows.append(r)
                    cols.append(idx)
                    data.append(coef)
                if row.sense == "<=":
                    c_lb[r], c_ub[r] = -np.inf, row.rhs
                elif row.sense == ">=":
                    c_lb[r], c_ub[r] = row.rhs, np.inf
                else:
                    c_lb[r], c_ub[r] = row.rhs, row.rhs
            matrix = csr_matrix((data, (rows, cols)), shape=(len(model.rows), nvar))
            constraints.append(LinearConstraint(matrix, c_lb, c_ub))
        options: dict = {"disp": False}
        if time_limit is not None:
            options["time_limit"] = max(float(time_limit), 0.0)
        t0 = time.perf_counter()
        try:
            res = milp(
                c=c,
                integrality=integrality,
                bounds=Bounds(lb, ub),
                constraints=constraints,
                options=options,
            )
        except ValueError as exc:
            return SolveOutcome(
                status="error",
                objective=None,
                values=None,
                wall_time=time.perf_counter() - t0,
                backend=self.name,
                message=str(exc),
            )
        wall = time.perf_counter() - t0
        status_map = {0: "optimal", 1: "time_limit", 2: "infeasible", 3: "error", 4: "error"}
        status = status_map.get(res.status, "error")
        values = tuple(float(v) for v in res.x) if res.x is not None else None
        if status == "time_limit" and values is None:
            objective = None
        else:
            objective = float(res.fun) if res.fun is not None else None
        bound = getattr(res, "mip_dual_bound", None)
        return SolveOutcome(
            status=status,
            objective=objective,
            values=values,
            wall_time=wall,
            bound=float(bound) if bound is not None else None,
            backend=self.name,
            message=str(res.message),
        )


_REGISTRY: dict[str, type] = {"highs": HighsBackend}


def register_backend(name: str, cls: type) -> None:
    _REGISTRY[name.lower()] = cls


def available_backends() -> list[str]:
    return sorted(_REGISTRY)


def get_backend(name: str | None = None) -> SolverBackend:
    """Resolve a backend by name, env var, or default; never a silent fallback."""
    chosen = name or os.environ.get(ENV_VAR) or DEFAULT_BACKEND
    cls = _REGISTRY.get(chosen.lower())
    if cls is None:
        raise BackendError(
            f"backend {chosen!r} is not configured (available: {', '.join(available_backends())})"
        )
    try:
        return cls()
    except Exception as exc:  # import failures inside backend constructors
        raise BackendError(f"backend {chosen!r} failed to initialize: {exc}") from exc
