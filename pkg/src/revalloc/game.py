"""Coalition worths and the cross-efficiency Shapley shares with bounds.

Coalitions are bitmasks over DMU indices (bit i = DMU i).  A member's
in-coalition upper/lower bound is the max/min appraisal it receives from
the other members; a lone member scores exactly 1 by convention.  The
coalition worth is the sum of member upper bounds.

The per-player share replaces the classic marginal-contribution difference
with a ratio: joining coalition S, player i contributes its own received
upper bound against the shift it causes in the members' totals.  The
optimistic (pessimistic) variants put the player's upper (lower) received
bound over the least (most) favorable total shift.  The ratio is undefined
at S = empty; both conventions for that term are implemented (drop it, or
count it as the classic worth-of-singleton 1) and ``exclude`` is the
calibrated default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import CrossEfficiencyMatrix

MAX_DMUS = 24            # 2^n table; hard cap
MEMBER_TABLE_MAX = 20    # above this, keep aggregates only and recompute bounds
DENOM_TOL = 1e-9
EMPTY_CONVENTIONS = ("exclude", "unit")
DEFAULT_EMPTY_COALITION = "exclude"


class DegenerateDenominatorError(ArithmeticError):
    """A Shapley term denominator fell below tolerance; names (player, coalition)."""

    def __init__(self, player: int, mask: int):
        self.player = player
        self.mask = mask
        members = sorted(mask_members(mask))
        super().__init__(
            f"term denominator <= {DENOM_TOL} for DMU index {player} "
            f"joining coalition {{{', '.join(map(str, members))}}} (mask {mask})"
        )


@dataclass(eq=False)
class ShapleyTriple:
    """Per-DMU lower / central / upper shares."""

    phi_lower: np.ndarray
    phi: np.ndarray
    phi_upper: np.ndarray

    @property
    def n(self) -> int:
        return self.phi.size


@dataclass(eq=False)
class CoalitionTable:
    """Precomputed per-coalition aggregates (and member bounds when stored)."""

    E: np.ndarray
    sum_upper: np.ndarray            # worth v(mask) = sum of member upper bounds
    sum_lower: np.ndarray
    bound_max: np.ndarray | None     # [mask, j]: max E[d, j] over d in mask
    bound_min: np.ndarray | None

    @property
    def n(self) -> int:
        return self.E.shape[0]

    def member_bounds(self, mask: int, j: int) -> tuple[float, float]:
        """(upper, lower) appraisal bounds of member j inside coalition mask."""
        if not (mask >> j) & 1:
            raise ValueError(f"DMU {j} is not a member of mask {mask}")
        rest = mask ^ (1 << j)
        if rest == 0:
            return 1.0, 1.0
        if self.bound_max is not None:
            return float(self.bound_max[rest, j]), float(self.bound_min[rest, j])
        col = self.E[mask_members(rest), j]
        return float(col.max()), float(col.min())

    def characteristic(self, mask: int) -> float:
        return float(self.sum_upper[mask])


def mask_members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def matrix_values(E) -> np.ndarray:
    """Accept a CrossEfficiencyMatrix or a plain square array."""
    values = E.values if isinstance(E, CrossEfficiencyMatrix) else np.asarray(E, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] == 0:
        raise ValueError(f"appraisal matrix must be square and nonempty, got {values.shape}")
    if not np.isfinite(values).all():
        raise ValueError("appraisal matrix has non-finite entries")
    return values


def coalition_bounds(E, mask: int, j: int) -> tuple[float, float]:
    """(upper, lower) appraisal bounds of member j in coalition mask, directly."""
    values = matrix_values(E)
    if not (mask >> j) & 1:
        raise ValueError(f"DMU {j} is not a member of mask {mask}")
    others = [d for d in mask_members(mask) if d != j]
    if not others:
        return 1.0, 1.0
    col = values[others, j]
    return float(col.max()), float(col.min())


def characteristic_value(E, mask: int) -> float:
    """Coalition worth: sum over members of their upper received appraisal."""
    values = matrix_values(E)
    total = 0.0
    for j in mask_members(mask):
        total += coalition_bounds(values, mask, j)[0]
    return total


def coalition_weights(n: int) -> np.ndarray:
    """w[s] = s!(n-s-1)!/n! for s = 0..n-1, via exact integer binomials."""
    return np.array([1.0 / (n * math.comb(n - 1, s)) for s in range(n)])


def build_coalition_table(E, store_member_bounds: bool | None = None,
                          backend: str | None = None) -> CoalitionTable:
    """Build per-coalition aggregates by subset DP; O(2^n * n) with bounds stored."""
    values = matrix_values(E)
    n = values.shape[0]
    if n > MAX_DMUS:
        raise ValueError(f"{n} DMUs exceeds the coalition cap of {MAX_DMUS}")
    if store_member_bounds is None:
        store_member_bounds = n <= MEMBER_TABLE_MAX
    if store_member_bounds:
        bmax, bmin, sum_upper, sum_lower = _kernels.build_tables(values, backend)
        return CoalitionTable(values, sum_upper, sum_lower, bmax, bmin)
    sum_upper, sum_lower = _kernels.build_sums(values, backend)
    return CoalitionTable(values, sum_upper, sum_lower, None, None)


def _shapley_all(E, empty_coalition: str, table: CoalitionTable | None,
                 backend: str | None) -> ShapleyTriple:
    values = matrix_values(E)
    n = values.shape[0]
    if empty_coalition not in EMPTY_CONVENTIONS:
        raise ValueError(f"empty_coalition must be one of {EMPTY_CONVENTIONS}")
    if n == 1:
        # a lone DMU owns its whole (unit) worth; the coalition sum is vacuous
        one = np.ones(1)
        return ShapleyTriple(phi_lower=one.copy(), phi=one.copy(), phi_upper=one.copy())
    if table is None:
        table = build_coalition_table(values, backend=backend)
    weights = coalition_weights(n)
    include_empty = empty_coalition == "unit"
    if table.bound_max is not None:
        phi, up, lo, bad_i, bad_mask = _kernels.shapley_dense(
            table.bound_max, table.bound_min, table.sum_upper, table.sum_lower,
            weights, include_empty, DENOM_TOL, backend,
        )
    else:
        phi, up, lo, bad_i, bad_mask = _kernels.shapley_slim(
            values, table.sum_upper, table.sum_lower,
            weights, include_empty, DENOM_TOL, backend,
        )
    if bad_i >= 0:
        raise DegenerateDenominatorError(int(bad_i), int(bad_mask))
    return ShapleyTriple(phi_lower=lo, phi=phi, phi_upper=up)


def modified_shapley(E, empty_coalition: str = DEFAULT_EMPTY_COALITION,
                     table: CoalitionTable | None = None,
                     backend: str | None = None) -> np.ndarray:
    """Central per-DMU share vector."""
    return _shapley_all(E, empty_coalition, table, backend).phi


def shapley_bounds(E, empty_coalition: str = DEFAULT_EMPTY_COALITION,
                   table: CoalitionTable | None = None,
                   backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(upper, lower) per-DMU share bound vectors."""
    triple = _shapley_all(E, empty_coalition, table, backend)
    return triple.phi_upper, triple.phi_lower


def shapley_triples(E, empty_coalition: str = DEFAULT_EMPTY_COALITION,
                    table: CoalitionTable | None = None,
                    backend: str | None = None) -> ShapleyTriple:
    """Lower/central/upper shares in one pass over the coalition table."""
    return _shapley_all(E, empty_coalition, table, backend)
