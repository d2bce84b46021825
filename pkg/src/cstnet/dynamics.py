"""Mass-action vector fields, Jacobians, steady-state residuals and simulation.

Rational inputs are evaluated exactly with :class:`~fractions.Fraction`;
floating point inputs (and :func:`simulate`) use numpy.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import ExactMatrix, det, rank, to_exact
from .network import ReactionNetwork, conservation_laws


class DynamicsError(ValueError):
    pass


class StiffnessError(RuntimeError):
    """Step size underflow or step budget exhausted during integration."""


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction, str)) and not isinstance(v, bool) for v in values)


def _rates(net: ReactionNetwork, k) -> list:
    if k is None:
        k = net.rates()
    k = list(k)
    if len(k) != net.n_reactions:
        raise DynamicsError(f"{len(k)} rate constants for {net.n_reactions} reactions")
    if any(v is None for v in k):
        raise DynamicsError("missing rate constant")
    if any(v <= 0 for v in k):
        raise DynamicsError("rate constants must be positive")
    return k


def _state(net: ReactionNetwork, x) -> list:
    x = list(x)
    if len(x) != net.n_species:
        raise DynamicsError(f"state of length {len(x)} for {net.n_species} species")
    return x


def mass_action_rates(net: ReactionNetwork, k, x) -> tuple:
    """``v_j = k_j * prod_i x_i ** source_ij``; exact when ``k`` and ``x`` are rational."""
    k, x = _rates(net, k), _state(net, x)
    exact = _is_exact(k) and _is_exact(x)
    if exact:
        k = [Fraction(to_exact(v)) for v in k]
        x = [Fraction(to_exact(v)) for v in x]
    else:
        k = [float(v) for v in k]
        x = [float(v) for v in x]
    index = {s: i for i, s in enumerate(net.species)}
    out = []
    for kj, r in zip(k, net.reactions):
        v = kj
        for name, c in r.source.terms.items():
            v = v * x[index[name]] ** c
        out.append(v)
    return tuple(out)


def residual(net: ReactionNetwork, k, x) -> tuple:
    """The vector field ``Gamma v(x)``."""
    v = mass_action_rates(net, k, x)
    gamma, _ = net.matrices()
    return tuple(sum(gamma[i, j] * v[j] for j in range(net.n_reactions)) for i in range(net.n_species))


def vector_field(net: ReactionNetwork, k) -> callable:
    """Fast float evaluator ``f(x) -> Gamma v(x)`` for integration."""
    k = np.array([float(v) for v in _rates(net, k)])
    gamma, gamma_l = net.matrices()
    G = gamma.to_numpy(float)
    L = gamma_l.to_numpy(float)

    def f(x: np.ndarray) -> np.ndarray:
        v = k * np.prod(np.power(x[:, None], L), axis=0) if L.size else k
        return G @ v

    return f


def jacobian(net: ReactionNetwork, k, x):
    """``Gamma diag(v) Gamma_l^T diag(1/x)`` with inflow reactions left out.

    Returns an :class:`ExactMatrix` for rational input, a numpy array otherwise.
    """
    x = _state(net, x)
    if any(v == 0 for v in x):
        raise DynamicsError("Jacobian formula needs a strictly positive state")
    v = mass_action_rates(net, k, x)
    keep = [j for j, r in enumerate(net.reactions) if not r.is_inflow()]
    gamma, gamma_l = net.matrices()
    n = net.n_species
    exact = isinstance(v[0], Fraction) if v else _is_exact(x)
    if exact:
        xs = [Fraction(to_exact(xi)) for xi in x]
        rows = [
            [sum(gamma[i, j] * v[j] * gamma_l[c, j] for j in keep) / xs[c] for c in range(n)]
            for i in range(n)
        ]
        return ExactMatrix(rows, cols=n)
    G = gamma.to_numpy(float)[:, keep]
    L = gamma_l.to_numpy(float)[:, keep]
    vv = np.array(v, dtype=float)[keep]
    return (G * vv) @ L.T / np.asarray(x, dtype=float)


def principal_minor_sum(J, r: int):
    if isinstance(J, np.ndarray):
        n = J.shape[0]
        return sum(np.linalg.det(J[np.ix_(s, s)]) for s in itertools.combinations(range(n), r)) if r else 1.0
    n = J.rows
    return sum((det(J.select(s, s)) for s in itertools.combinations(range(n), r)), 0) if r else 1


def reduced_jacobian(net: ReactionNetwork, k, x):
    """Sum of the ``r x r`` principal minors of the Jacobian, ``r = rank Gamma``.

    Nonzero exactly when a steady state ``x`` is nondegenerate.
    """
    J = jacobian(net, k, x)
    return principal_minor_sum(J, rank(net.matrices()[0]))


def steady_state_label(net: ReactionNetwork, k, x) -> str:
    """``"degenerate"``, ``"stable"``/``"unstable"`` (rank one) or ``"nondegenerate"``.

    Raises :class:`DynamicsError` unless ``x`` is an exact steady state.
    """
    if any(v != 0 for v in residual(net, k, x)):
        raise DynamicsError("not a steady state")
    value = reduced_jacobian(net, k, x)
    if value == 0:
        return "degenerate"
    if rank(net.matrices()[0]) == 1:
        return "stable" if value < 0 else "unstable"
    return "nondegenerate"


# -- integration ------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    species: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    n_steps: int = 0
    n_rejected: int = 0
    n_clipped: int = 0
    conservation_drift: list[float] = field(default_factory=list)
    rel_tol: float = 1e-6

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.species])
        for t, x in zip(self.times, self.states):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in x)])
        return buf.getvalue()


def simulate(
    net: ReactionNetwork,
    k,
    x0: Sequence[float],
    t_end: float,
    rel_tol: float = 1e-6,
    *,
    abs_tol: float | None = None,
    max_steps: int = 10**6,
) -> Trajectory:
    """Integrate ``x' = Gamma v(x)`` with an adaptive Dormand-Prince 5(4) pair.

    Negative components produced by a step are clipped to zero. The relative
    drift of every conservation law over the run is recorded.
    """
    if not 0 < rel_tol <= 1e-2:
        raise DynamicsError(f"rel_tol must lie in (0, 1e-2], got {rel_tol}")
    if t_end <= 0:
        raise DynamicsError("t_end must be positive")
    x = np.array([float(v) for v in _state(net, x0)])
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DynamicsError("initial state must be finite and nonnegative")
    if abs_tol is None:
        abs_tol = rel_tol * 1e-3
    f = vector_field(net, k)
    laws = np.array([[float(c) for c in law] for law in conservation_laws(net)]).reshape(-1, net.n_species)
    start_values = laws @ x

    t = 0.0
    h = t_end / 1000
    times, states = [t], [x.copy()]
    steps = rejected = clipped = 0
    fx = f(x)
    K = np.empty((7, x.size))
    while t < t_end:
        if steps + rejected >= max_steps:
            raise StiffnessError(f"step budget of {max_steps} exhausted at t={t:.6g}")
        h = min(h, t_end - t)
        if h < 1e-14 * max(1.0, abs(t)):
            raise StiffnessError(f"step size underflow at t={t:.6g}")
        K[0] = fx
        for s in range(1, 7):
            K[s] = f(x + h * (np.asarray(_A[s]) @ K[:s]))
        x_new = x + h * (_B5[:6] @ K[:6])
        err_vec = h * (_E @ K)
        scale = abs_tol + rel_tol * np.maximum(np.abs(x), np.abs(x_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2))) if x.size else 0.0
        if not np.isfinite(err):
            err = math.inf
        if err <= 1.0:
            t += h
            if np.any(x_new < 0):
                clipped += 1
                x_new = np.maximum(x_new, 0.0)
            x = x_new
            fx = f(x)
            steps += 1
            times.append(t)
            states.append(x.copy())
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        else:
            rejected += 1
            factor = max(0.2, 0.9 * err ** -0.2) if np.isfinite(err) else 0.2
        h *= factor

    states_arr = np.array(states)
    drift = []
    if laws.size:
        values = states_arr @ laws.T
        for j, c0 in enumerate(start_values):
            denom = abs(c0) if c0 else 1.0
            drift.append(float(np.max(np.abs(values[:, j] - c0)) / denom))
    return Trajectory(net.species, np.array(times), states_arr, steps, rejected, clipped, drift, rel_tol)
