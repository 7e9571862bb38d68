"""Finite-state Markov chains and their stationary L2 geometry.

A chain is stored as a row-stochastic kernel ``Q`` together with its
stationary law ``pi`` and classification flags.  All values are immutable
after construction, so chains and observables can be shared freely between
threads.

The chain document format accepted by :func:`load_document` is JSON::

    {"states": ["a", "b"],
     "Q": [[0.75, 0.25], [0.25, 0.75]],
     "pi": [0.5, 0.5],                  # optional; validated, not recomputed
     "observables": {"f": [1.0, -1.0]}} # optional raw (uncentered) vectors
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NonStochasticRow,
    NotMeanZero,
    SingularStationary,
)

ROW_SUM_LOAD_TOL = 1e-9      # reject rows whose sum deviates more than this
ROW_SUM_STORE_TOL = 1e-12    # stored kernels meet this after renormalisation
STATIONARY_TOL = 1e-12
DEFAULT_CLASSIFY_TOL = 1e-10
MEAN_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ChainFlags:
    """Classification flags, together with the tolerance used to set them."""

    reversible: bool
    normal: bool
    irreducible: bool
    aperiodic: bool
    tol: float


@dataclass(frozen=True)
class FiniteChain:
    """A validated finite-state Markov chain.

    Attributes
    ----------
    state_labels : tuple of str
        Identifiers for the states, in kernel order.
    kernel : ndarray, shape (n, n)
        Row-stochastic transition matrix; ``kernel[x, y]`` is the probability
        of moving from state ``x`` to state ``y``.
    stationary : ndarray, shape (n,)
        Strictly positive probability vector with ``pi @ kernel == pi``.
    flags : ChainFlags
        Reversibility / normality / irreducibility / aperiodicity.
    """

    state_labels: tuple
    kernel: np.ndarray
    stationary: np.ndarray
    flags: ChainFlags

    @property
    def n_states(self) -> int:
        return self.kernel.shape[0]

    def index_of(self, label) -> int:
        """Map a state label (or an in-range integer index) to its index."""
        if isinstance(label, (int, np.integer)) and 0 <= int(label) < self.n_states:
            return int(label)
        try:
            return self.state_labels.index(str(label))
        except ValueError:
            raise DimensionMismatch(
                f"unknown state {label!r}; labels are {list(self.state_labels)}"
            ) from None


@dataclass(frozen=True)
class Observable:
    """A mean-zero function on the state space with its L2(pi) data.

    ``norm_sq`` is ``sum_x pi(x) f(x)^2`` and ``mean`` is ``sum_x pi(x) f(x)``
    (at most 1e-12 in magnitude by construction).
    """

    values: np.ndarray
    norm_sq: float
    mean: float


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def _support_edges(kernel: np.ndarray):
    n = kernel.shape[0]
    for x in range(n):
        for y in range(n):
            if kernel[x, y] > 0.0:
                yield x, y


def _reachable(kernel: np.ndarray, start: int, reverse: bool = False) -> np.ndarray:
    n = kernel.shape[0]
    adj = kernel.T if reverse else kernel
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        x = stack.pop()
        for y in np.nonzero(adj[x] > 0.0)[0]:
            if not seen[y]:
                seen[y] = True
                stack.append(int(y))
    return seen


def _period_gcd(kernel: np.ndarray) -> int:
    # gcd of cycle lengths through state 0, via BFS levels on the support
    # graph restricted to states reachable from 0.
    n = kernel.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[0] = 0
    queue = [0]
    while queue:
        x = queue.pop(0)
        for y in np.nonzero(kernel[x] > 0.0)[0]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(int(y))
    g = 0
    for x, y in _support_edges(kernel):
        if dist[x] >= 0 and dist[y] >= 0:
            g = math.gcd(g, int(dist[x]) + 1 - int(dist[y]))
    return g


def classify_chain(kernel: np.ndarray, stationary: np.ndarray,
                   tol: float = DEFAULT_CLASSIFY_TOL) -> ChainFlags:
    """Classify a kernel as reversible / normal / irreducible / aperiodic.

    Reversibility is detailed balance ``pi(x)Q(x,y) = pi(y)Q(y,x)`` up to
    ``tol``; normality is ``Q Q* = Q* Q`` up to ``tol`` in the max norm,
    where ``Q*`` is the stationary adjoint.  Irreducibility is two-sided
    reachability on the support graph, and aperiodicity is a unit gcd of
    cycle lengths through state 0.
    """
    q = np.asarray(kernel, dtype=np.float64)
    pi = np.asarray(stationary, dtype=np.float64)
    flux = pi[:, None] * q
    reversible = bool(np.max(np.abs(flux - flux.T)) <= tol)
    qstar = (pi[None, :] * q.T) / pi[:, None]
    normal = bool(np.max(np.abs(q @ qstar - qstar @ q)) <= tol)
    irreducible = bool(np.all(_reachable(q, 0)) and np.all(_reachable(q, 0, reverse=True)))
    aperiodic = _period_gcd(q) == 1
    return ChainFlags(reversible=reversible, normal=normal,
                      irreducible=irreducible, aperiodic=aperiodic, tol=tol)


def _solve_stationary(kernel: np.ndarray) -> np.ndarray:
    # Direct solve of pi (Q - I) = 0 with sum(pi) = 1: replace the last
    # balance equation by the normalisation row.
    n = kernel.shape[0]
    m = kernel.T - np.eye(n)
    m[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularStationary(
            "stationary solve failed (reducible chain with non-unique pi?); "
            "supply 'pi' explicitly in the document"
        ) from exc
    if np.min(pi) <= 0.0:
        raise SingularStationary(
            "computed stationary law has non-positive entries; the chain is "
            "reducible or numerically degenerate"
        )
    pi = pi / pi.sum()
    if np.max(np.abs(pi @ kernel - pi)) > STATIONARY_TOL:
        raise SingularStationary("stationary residual exceeds 1e-12 after solve")
    return pi


def make_chain(state_labels, kernel, stationary=None,
               tol: float = DEFAULT_CLASSIFY_TOL) -> FiniteChain:
    """Validate raw arrays and build a :class:`FiniteChain`.

    Rows whose sums deviate from 1 by more than 1e-9 are rejected; smaller
    deviations are renormalised away so the stored kernel meets the 1e-12
    row-sum invariant.  If ``stationary`` is given it is validated, not
    recomputed (this supports reducible fixtures such as the identity
    kernel); otherwise it is obtained by a direct linear solve.
    """
    q = np.array(kernel, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DimensionMismatch(f"kernel must be square, got shape {q.shape}")
    n = q.shape[0]
    labels = tuple(str(s) for s in state_labels)
    if len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for {n} states")
    if np.min(q) < 0.0:
        x, y = np.unravel_index(np.argmin(q), q.shape)
        raise NegativeEntry(f"kernel[{x}][{y}] = {q[x, y]} is negative")
    row_sums = q.sum(axis=1)
    bad = np.abs(row_sums - 1.0) > ROW_SUM_LOAD_TOL
    if np.any(bad):
        x = int(np.nonzero(bad)[0][0])
        raise NonStochasticRow(f"row {x} sums to {row_sums[x]!r}")
    q = q / row_sums[:, None]

    if stationary is not None:
        pi = np.array(stationary, dtype=np.float64)
        if pi.shape != (n,):
            raise DimensionMismatch(f"pi has shape {pi.shape}, expected ({n},)")
        if np.min(pi) <= 0.0:
            raise SingularStationary("supplied pi must have strictly positive entries")
        if abs(pi.sum() - 1.0) > STATIONARY_TOL:
            raise SingularStationary(f"supplied pi sums to {pi.sum()!r}")
        if np.max(np.abs(pi @ q - pi)) > STATIONARY_TOL:
            raise SingularStationary("supplied pi is not stationary for Q (residual > 1e-12)")
    else:
        pi = _solve_stationary(q)

    flags = classify_chain(q, pi, tol=tol)
    return FiniteChain(state_labels=labels, kernel=_freeze(q),
                       stationary=_freeze(pi), flags=flags)


def load_document(source, tol: float = DEFAULT_CLASSIFY_TOL):
    """Parse a chain document and return ``(chain, observables)``.

    ``source`` may be a mapping, a JSON string, or a path to a JSON file.
    Observables are returned as raw (uncentered) vectors keyed by name.
    """
    if isinstance(source, (str, Path)):
        try:
            is_file = Path(str(source)).exists()
        except (OSError, ValueError):  # e.g. JSON text too long for a path
            is_file = False
        doc = json.loads(Path(source).read_text() if is_file else str(source))
    else:
        doc = dict(source)
    if "Q" not in doc:
        raise DimensionMismatch("document is missing the kernel field 'Q'")
    states = doc.get("states") or [str(i) for i in range(len(doc["Q"]))]
    chain = make_chain(states, doc["Q"], stationary=doc.get("pi"), tol=tol)
    observables = {}
    for name, vec in (doc.get("observables") or {}).items():
        arr = np.asarray(vec, dtype=np.float64)
        if arr.shape != (chain.n_states,):
            raise DimensionMismatch(
                f"observable {name!r} has shape {arr.shape}, "
                f"expected ({chain.n_states},)"
            )
        observables[name] = arr
    return chain, observables


def load_chain(source, tol: float = DEFAULT_CLASSIFY_TOL) -> FiniteChain:
    """Load and validate the chain from a document; see :func:`load_document`."""
    return load_document(source, tol=tol)[0]


def dump_document(chain: FiniteChain, observables=None) -> str:
    """Serialize a chain (and optional raw observables) back to JSON text."""
    doc = {
        "states": list(chain.state_labels),
        "Q": chain.kernel.tolist(),
        "pi": chain.stationary.tolist(),
    }
    if observables:
        doc["observables"] = {k: np.asarray(v).tolist() for k, v in observables.items()}
    return json.dumps(doc, indent=2)


def adjoint_kernel(chain: FiniteChain) -> np.ndarray:
    """Stationary adjoint ``Q*(x, y) = pi(y) Q(y, x) / pi(x)``.

    ``Q*`` is row stochastic for the same ``pi``; for reversible chains it
    equals the kernel itself.
    """
    pi = chain.stationary
    return (pi[None, :] * chain.kernel.T) / pi[:, None]


def inner_product(chain: FiniteChain, u: Observable, v: Observable) -> float:
    """Stationary inner product ``sum_x pi(x) u(x) v(x)``."""
    uv, vv = np.asarray(u.values), np.asarray(v.values)
    if uv.shape != (chain.n_states,) or vv.shape != (chain.n_states,):
        raise DimensionMismatch("observable length does not match the chain")
    return float(np.sum(chain.stationary * uv * vv))


def center_observable(chain: FiniteChain, raw) -> Observable:
    """Project a raw vector onto mean-zero functions by subtracting its
    stationary mean.  Idempotent."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape != (chain.n_states,):
        raise DimensionMismatch(
            f"raw vector has shape {raw.shape}, expected ({chain.n_states},)"
        )
    pi = chain.stationary
    vals = raw - float(pi @ raw)
    mean = float(pi @ vals)
    return Observable(values=_freeze(vals), norm_sq=float(pi @ (vals * vals)), mean=mean)


def as_observable(chain: FiniteChain, values) -> Observable:
    """Wrap an already mean-zero vector, validating membership in L2_0(pi)."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.shape != (chain.n_states,):
        raise DimensionMismatch(
            f"vector has shape {vals.shape}, expected ({chain.n_states},)"
        )
    mean = float(chain.stationary @ vals)
    if abs(mean) > MEAN_ZERO_TOL:
        raise NotMeanZero(f"stationary mean {mean!r} exceeds 1e-12; center first")
    return Observable(values=_freeze(vals), norm_sq=float(chain.stationary @ (vals * vals)),
                      mean=mean)
