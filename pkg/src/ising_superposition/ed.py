"""Brute-force reference: sparse/dense Hamiltonians for rings of up to 14 spins.

Basis convention: bit n of the basis index is 1 when spin n points down
(sz_n = -1).  Sites are 0-based, so the correlator sx_1 sx_{1+R} of the
physics notation is ``xx(0, R)`` here.  For the composite model the central
spin is bit N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from .errors import InvalidArgumentError
from .fermions import check_field, check_size
from .observables import CrossObservable

MAX_SITES = 14
MAX_COMPOSITE_SITES = 12
_DENSE_LIMIT = 1024
_NEAR_DEGENERATE = 1e-6


# operators are tuples of ("x" | "z", site) factors, applied right to left
def sz(n):
    return (("z", n),)


def sx(n):
    return (("x", n),)


def xx(i, j):
    return (("x", i), ("x", j))


def bond_xx(n, N):
    return xx(n, (n + 1) % N)


def _popcount(states, n_bits):
    count = np.zeros_like(states)
    for n in range(n_bits):
        count += (states >> n) & 1
    return count


def _check_sites(N, limit=MAX_SITES):
    N = check_size(N)
    if N > limit:
        raise InvalidArgumentError(f"N={N} exceeds the dense-oracle limit {limit}")
    return N


@dataclass(frozen=True)
class DenseState:
    """Normalised state vector on the full 2^n_sites space."""

    amplitudes: np.ndarray
    n_sites: int
    energy: float = float("nan")

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_sites,):
            raise InvalidArgumentError("amplitude vector does not match n_sites")
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-12:
            raise InvalidArgumentError("state is not normalised")

    def times_phase(self, phase):
        return DenseState(self.amplitudes * np.exp(1j * phase), self.n_sites, self.energy)


def even_basis(N):
    """Basis indices with an even number of down spins (prod sz = +1)."""
    states = np.arange(1 << N)
    return states[_popcount(states, N) % 2 == 0]


def hamiltonian(N: int, g: float, h: float = 0.0, basis=None) -> sparse.csr_matrix:
    """-sum_n (sx_n sx_{n+1} + g sz_n + h sx_n) on a ring, periodic boundary.

    ``basis`` restricts rows/columns to a list of basis indices; it must be
    closed under the Hamiltonian (use :func:`even_basis` with h = 0).
    """
    N = check_size(N)
    g, h = check_field(g), check_field(h, "h")
    states = np.arange(1 << N) if basis is None else np.asarray(basis)
    dim = states.size
    position = np.full(1 << N, -1)
    position[states] = np.arange(dim)
    columns = np.arange(dim)

    rows, cols, vals = [columns], [columns], [-g * (N - 2.0 * _popcount(states, N))]
    flips = [(1 << n) | (1 << ((n + 1) % N)) for n in range(N)]
    weights = [-1.0] * N
    if h:
        flips += [1 << n for n in range(N)]
        weights += [-h] * N
    for mask, w in zip(flips, weights):
        target = position[states ^ mask]
        if np.any(target < 0):
            raise InvalidArgumentError("basis is not closed under the Hamiltonian")
        rows.append(target)
        cols.append(columns)
        vals.append(np.full(dim, w))
    # duplicate (row, col) pairs are summed, which doubles the bond for N = 2
    return sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()


def _lowest_pairs(H, count):
    dim = H.shape[0]
    if dim <= _DENSE_LIMIT:
        return linalg.eigh(H.toarray(), subset_by_index=[0, min(count, dim) - 1])
    # stoquastic: the ground state is non-negative, so a flat start vector overlaps it
    v0 = np.full(dim, 1.0 / np.sqrt(dim))
    w, v = sparse_linalg.eigsh(H, k=count, which="SA", tol=0.0, v0=v0)
    order = np.argsort(w)
    return w[order], v[:, order]


def _gauge(vector):
    pivot = vector[np.argmax(np.abs(vector))]
    vector = vector * (abs(pivot) / pivot)
    if np.iscomplexobj(vector) and not np.any(vector.imag):
        vector = vector.real
    return vector / np.linalg.norm(vector)


def ground_state(N: int, g_eff: float, h: float = 0.0) -> DenseState:
    """Lowest eigenstate of the ring; for h = 0 the even-parity member.

    At h = 0 the ferromagnetic quasi-doublet is resolved by solving inside the
    even sector only, which is the sector of the free-fermion ground state.
    The returned vector has its largest amplitude real positive.
    """
    N = _check_sites(N)
    basis = even_basis(N) if h == 0 else np.arange(1 << N)
    w, v = _lowest_pairs(hamiltonian(N, g_eff, h, basis), 1)
    amplitudes = np.zeros(1 << N, dtype=v.dtype)
    amplitudes[basis] = v[:, 0]
    return DenseState(_gauge(amplitudes), N, float(w[0]))


def apply(op, vector, n_sites):
    out = vector
    states = np.arange(1 << n_sites)
    for kind, site in reversed(op):
        if not 0 <= site < n_sites:
            raise InvalidArgumentError(f"site {site} outside 0..{n_sites - 1}")
        bit = (states >> site) & 1
        if kind == "z":
            out = out * (1 - 2 * bit)
        elif kind == "x":
            out = out[states ^ (1 << site)]
        else:
            raise InvalidArgumentError(f"unknown Pauli factor {kind!r}")
    return out


def _same_space(a, b):
    if a.n_sites != b.n_sites:
        raise InvalidArgumentError("states live on different numbers of sites")


def overlap(a: DenseState, b: DenseState) -> complex:
    """<a|b>."""
    _same_space(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def cross_expectation(op, a: DenseState, b: DenseState) -> complex:
    """<a|op|b> for a product of Pauli factors."""
    _same_space(a, b)
    return complex(np.vdot(a.amplitudes, apply(op, b.amplitudes, b.n_sites)))


def ground_state_pair(N: int, g: float, delta: float, h: float = 0.0):
    """(|g+delta>, |g-delta>) with the relative sign chosen so that F > 0."""
    plus = ground_state(N, g + delta, h)
    minus = ground_state(N, g - delta, h)
    ov = overlap(minus, plus)
    if ov.real < 0:
        minus = DenseState(-minus.amplitudes, N, minus.energy)
    return plus, minus


def ed_cross_observable(name: str, N: int, g: float, delta: float, h: float = 0.0) -> CrossObservable:
    """Dense-oracle counterpart of ``cross_observable``: "mz", "cx" or "mx"."""
    ops = {"mz": sz(0), "cx": bond_xx(0, N), "mx": sx(0)}
    if name not in ops:
        raise InvalidArgumentError(f"unknown observable {name!r}")
    op = ops[name]
    plus, minus = ground_state_pair(N, g, delta, h)
    F = overlap(minus, plus).real
    return CrossObservable(
        cross_expectation(op, plus, plus).real,
        cross_expectation(op, minus, minus).real,
        cross_expectation(op, plus, minus).real / F,
        min(F, 1.0),
    )


def composite_hamiltonian(N: int, g: float, delta: float) -> sparse.csr_matrix:
    """Ring plus central spin: -sum_n (sx_n sx_{n+1} + (g + delta sz_S) sz_n)."""
    N = _check_sites(N, MAX_COMPOSITE_SITES)
    g, delta = check_field(g), check_field(delta, "delta")
    states = np.arange(1 << (N + 1))
    central = 1.0 - 2.0 * ((states >> N) & 1)
    ring_sz = N - 2.0 * _popcount(states & ((1 << N) - 1), N)
    rows, cols, vals = [states], [states], [-(g + delta * central) * ring_sz]
    for n in range(N):
        rows.append(states ^ (1 << n) ^ (1 << ((n + 1) % N)))
        cols.append(states)
        vals.append(np.full(states.size, -1.0))
    return sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(states.size, states.size),
    ).tocsr()


@dataclass(frozen=True)
class SectorCheckReport:
    N: int
    g: float
    delta: float
    commutator_norm: float
    deficit_up: float
    deficit_down: float
    passed: bool


def _sector_ground_state(block, N):
    w, v = _lowest_pairs(block, 2)
    vector = v[:, 0]
    if w[1] - w[0] < _NEAR_DEGENERATE * max(1.0, abs(w[0])):
        # quasi-degenerate ferromagnetic doublet: keep its even-parity combination
        parity = 1.0 - 2.0 * (_popcount(np.arange(1 << N), N) % 2)
        pw, pv = np.linalg.eigh(v.T @ (parity[:, None] * v))
        vector = v @ pv[:, np.argmax(pw)]
    return _gauge(vector)


def composite_sector_check(N: int, g: float, delta: float) -> SectorCheckReport:
    """Check that [H, sz_S] = 0 and that each sz_S sector's lowest state is
    the ring ground state at field g +- delta, i.e. |up>|g+delta> and
    |down>|g-delta>, which is what adiabatic driving ends in.
    """
    H = composite_hamiltonian(N, g, delta).tocoo()
    dim = 1 << N
    spin = np.where(np.arange(2 * dim) < dim, 1.0, -1.0)
    commutator = H.data * (spin[H.col] - spin[H.row])
    commutator_norm = float(np.abs(commutator).max()) if commutator.size else 0.0

    H = H.tocsr()
    deficits = []
    for block, g_eff in ((H[:dim, :dim], g + delta), (H[dim:, dim:], g - delta)):
        sector = _sector_ground_state(block, N)
        reference = ground_state(N, g_eff).amplitudes
        deficits.append(max(0.0, float(1.0 - abs(np.vdot(reference, sector)))))
    passed = commutator_norm < 1e-12 and max(deficits) < 1e-10
    return SectorCheckReport(N, g, delta, commutator_norm, deficits[0], deficits[1], passed)
