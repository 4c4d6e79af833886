"""Directed weighted graphs, Laplacians, and the spectral quantities used by
the delay-bound and frequency-certificate calculators.

Node ids are 1-based everywhere they face the user (configs, reports); the
weight matrix is indexed 0-based internally. Entry ``weights[i, k]`` is the
weight node ``i + 1`` places on information it receives from node ``k + 1``,
so row ``i`` collects the in-neighbourhood of agent ``i + 1``.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass

import numpy as np

ZERO_EIGENVALUE_TOL = 1e-9
MAX_DENSE_NODES = 64


class SpectrumError(RuntimeError):
    """Dense eigenvalue iteration failed to converge."""


@dataclass(frozen=True)
class Digraph:
    """Weighted digraph without self-loops.

    Parameters
    ----------
    n : int
        Number of nodes, at least 1.
    weights : array_like, shape (n, n)
        Nonnegative adjacency weights with a zero diagonal.
    """

    n: int
    weights: np.ndarray

    def __post_init__(self):
        try:
            n = operator.index(self.n)
        except TypeError as exc:
            raise ValueError(f"node count must be an integer, got {self.n!r}") from exc
        if n < 1:
            raise ValueError(f"node count must be positive, got {n}")
        object.__setattr__(self, "n", n)
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise ValueError(f"weights must have shape ({self.n}, {self.n}), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diagonal(w) != 0.0):
            raise ValueError("self-loop weights must be zero")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_edges(cls, n, edges):
        """Build a graph from ``(receiver, sender, weight)`` triples.

        Node ids in ``edges`` are 1-based; a triple ``(i, k, w)`` sets the
        weight agent ``i`` places on information received from agent ``k``.
        """
        w = np.zeros((n, n))
        for i, k, value in edges:
            if not (1 <= i <= n and 1 <= k <= n):
                raise ValueError(f"edge ({i}, {k}) out of range for n={n}")
            w[i - 1, k - 1] = value
        return cls(n=n, weights=w)

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.n, self.weights.tobytes()))


@dataclass(frozen=True, eq=False)
class LaplacianView:
    """Laplacian ``L = D - A`` together with the row degrees.

    ``degrees[i]`` is the i-th row sum of the weights and ``max_degree`` its
    maximum; each row of ``matrix`` sums to zero by construction.
    """

    matrix: np.ndarray
    degrees: np.ndarray
    max_degree: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues of a Laplacian, sorted by modulus (then real, imaginary).

    ``max_real_eigenvalue`` is meaningful for symmetric weights, where the
    spectrum is real; ``zero_multiplicity`` counts eigenvalues with modulus
    below the zero tolerance.
    """

    eigenvalues: np.ndarray
    spectral_radius: float
    max_real_eigenvalue: float
    zero_multiplicity: int


def degree_vector(g: Digraph) -> np.ndarray:
    """Row sums of the weight matrix (in-degree of each agent)."""
    return g.weights.sum(axis=1)


def laplacian(g: Digraph) -> LaplacianView:
    """Laplacian view ``diag(degrees) - weights`` of the graph."""
    degrees = degree_vector(g)
    matrix = np.diag(degrees) - g.weights
    for arr in (matrix, degrees):
        arr.setflags(write=False)
    return LaplacianView(matrix=matrix, degrees=degrees, max_degree=float(degrees.max()))


def is_symmetric(g: Digraph) -> bool:
    """True when the stored weights satisfy ``a_ik == a_ki`` exactly."""
    return bool(np.array_equal(g.weights, g.weights.T))


def has_spanning_root(g: Digraph) -> tuple[bool, int | None]:
    """Search for a node whose influence reaches every other node.

    Information flows from sender ``k`` to receiver ``i`` whenever
    ``weights[i-1, k-1] > 0``. Returns ``(True, r)`` with the least 1-based
    node id ``r`` from which all nodes are reachable along such influence
    edges, or ``(False, None)``. Exactly this condition makes the Laplacian
    zero eigenvalue simple.
    """
    w = g.weights
    n = g.n
    for root in range(n):
        seen = np.zeros(n, dtype=bool)
        seen[root] = True
        stack = [root]
        while stack:
            v = stack.pop()
            for i in np.flatnonzero(w[:, v] > 0.0):
                if not seen[i]:
                    seen[i] = True
                    stack.append(int(i))
        if seen.all():
            return True, root + 1
    return False, None


def spectrum(
    view: LaplacianView,
    zero_tol: float = ZERO_EIGENVALUE_TOL,
    max_nodes: int = MAX_DENSE_NODES,
) -> Spectrum:
    """All eigenvalues of the Laplacian via a dense solver.

    Intended for desk-scale problems; refuses matrices beyond ``max_nodes``
    rows. A non-converging eigenvalue iteration raises ``SpectrumError``.
    """
    n = view.matrix.shape[0]
    if n > max_nodes:
        raise ValueError(f"dense spectrum limited to {max_nodes} nodes, got {n}")
    try:
        values = np.linalg.eigvals(view.matrix)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(f"eigenvalue computation failed: {exc}") from exc
    order = np.lexsort((values.imag, values.real, np.abs(values)))
    values = values[order]
    values.setflags(write=False)
    return Spectrum(
        eigenvalues=values,
        spectral_radius=float(np.abs(values).max()),
        max_real_eigenvalue=float(values.real.max()),
        zero_multiplicity=int(np.count_nonzero(np.abs(values) < zero_tol)),
    )
