"""
Dense tableau simplex for equality-form programs ``min c·x  s.t.  A x = b, x >= 0, b >= 0``.

Two phases without big-M: rows that come with a unit column (a slack with zero right-hand
side, say) start with it in the basis, every other row gets an artificial column. Phase one
minimises the sum of artificials, phase two the real objective. Entering columns and leaving
rows follow Bland's rule (lowest index), so the solver terminates on degenerate programs and is
deterministic. Artificial columns are kept in the tableau, barred from entering, so that the
simplex multipliers can be read off the objective row at the end.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import numpy as np

from fairclust.utils.config import settings

logger = logging.getLogger(__name__)


class SimplexError(Exception):
    """Custom exception for simplex failures."""
    pass


class IterationLimitError(SimplexError):
    """The pivot budget ran out before optimality."""
    pass


class UnboundedError(SimplexError):
    """An improving column has no positive entry."""
    pass


class InfeasibleError(SimplexError):
    """Phase one ended with a positive artificial sum."""
    pass


@dataclass
class SimplexResult:
    x: np.ndarray
    value: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    basis: np.ndarray
    pivots: int
    phase_one_pivots: int


class Tableau:
    """
    The tableau ``M``: row 0 holds reduced costs and ``-value`` in the last column, rows
    ``1..m`` hold ``B^-1 A | B^-1 b``. ``basis[i]`` is the basic column of constraint row ``i``.
    """

    def __init__(self, M: np.ndarray, basis: np.ndarray, *, pivot_tolerance: float) -> None:
        self.M = M
        self.basis = basis
        self.pivot_tolerance = pivot_tolerance

    @property
    def n_constraints(self) -> int:
        return self.M.shape[0] - 1

    @property
    def n_columns(self) -> int:
        return self.M.shape[1] - 1

    @property
    def reduced_costs(self) -> np.ndarray:
        return self.M[0, :-1]

    @property
    def rhs(self) -> np.ndarray:
        return self.M[1:, -1]

    @property
    def value(self) -> float:
        return -self.M[0, -1]

    def set_objective(self, costs: np.ndarray) -> None:
        """Load ``costs`` into row 0 and zero out the reduced costs of the basic columns."""
        self.M[0, :-1] = costs
        self.M[0, -1] = 0.0
        for i, column in enumerate(self.basis):
            cj = self.M[0, column]
            if cj != 0.0:
                self.M[0] -= cj * self.M[i + 1]

    def pivot(self, row: int, column: int) -> None:
        """Pivot on constraint row ``row`` (0-based) and ``column``."""
        r = row + 1
        pivot_row = self.M[r] / self.M[r, column]
        self.M -= np.outer(self.M[:, column], pivot_row)
        self.M[r] = pivot_row
        self.basis[row] = column

    def solution(self, n_columns: int) -> np.ndarray:
        x = np.zeros(n_columns)
        for i, column in enumerate(self.basis):
            if column < n_columns:
                x[column] = self.rhs[i]
        return x

    def __repr__(self) -> str:
        return f"Tableau({self.n_constraints}x{self.n_columns}, basis={self.basis.tolist()})"


class DenseSimplex:
    """Two-phase dense simplex with Bland's rule."""

    def __init__(
        self,
        max_pivots: Optional[int] = None,
        pivot_tolerance: Optional[float] = None,
        feasibility_tolerance: Optional[float] = None,
        optimality_tolerance: Optional[float] = None,
    ):
        self.max_pivots = max_pivots or settings.max_pivots
        self.pivot_tolerance = pivot_tolerance or settings.pivot_tolerance
        self.feasibility_tolerance = feasibility_tolerance or settings.feasibility_tolerance
        self.optimality_tolerance = optimality_tolerance or settings.optimality_tolerance

    def solve(
        self,
        A: np.ndarray,
        b: np.ndarray,
        c: np.ndarray,
        unit_columns: Optional[Dict[int, int]] = None,
        fixed_zero: Iterable[int] = (),
    ) -> SimplexResult:
        """
        Solve ``min c·x`` over ``A x = b, x >= 0``.

        Args:
            A: ``(m, n)`` constraint matrix
            b: Nonnegative right-hand side
            c: Objective coefficients
            unit_columns: Row -> column of a unit column (``A[:, col] = e_row``) usable as the
                starting basic variable for that row
            fixed_zero: Columns held at zero (never enter the basis)

        Returns:
            SimplexResult: Optimal basic solution with multipliers and reduced costs

        Raises:
            InfeasibleError: No nonnegative solution of ``A x = b`` exists
            UnboundedError: The objective is unbounded below
            IterationLimitError: More than ``max_pivots`` pivots were needed
        """
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        c = np.asarray(c, dtype=float)
        m, n = A.shape
        if np.any(b < 0):
            raise SimplexError("Right-hand side must be nonnegative")
        unit_columns = dict(unit_columns or {})

        art_rows = [i for i in range(m) if i not in unit_columns]
        n_art = len(art_rows)
        M = np.zeros((m + 1, n + n_art + 1))
        M[1:, :n] = A
        M[1:, -1] = b
        basis = np.empty(m, dtype=int)
        unit = np.empty(m, dtype=int)
        for i, column in unit_columns.items():
            basis[i] = column
            unit[i] = column
        for a, i in enumerate(art_rows):
            M[i + 1, n + a] = 1.0
            basis[i] = n + a
            unit[i] = n + a

        tableau = Tableau(M, basis, pivot_tolerance=self.pivot_tolerance)
        barred = np.zeros(n + n_art, dtype=bool)
        for column in fixed_zero:
            barred[column] = True

        logger.debug(f"Simplex: {m} rows, {n} columns, {n_art} artificials")

        phase_one_pivots = 0
        if n_art:
            phase_one_costs = np.zeros(n + n_art)
            phase_one_costs[n:] = 1.0
            tableau.set_objective(phase_one_costs)
            phase_one_pivots = self._run(tableau, barred, budget=self.max_pivots)
            if tableau.value > self.feasibility_tolerance * max(1.0, float(np.max(b, initial=0.0))):
                logger.error(f"Phase one ended with artificial sum {tableau.value:.3e}")
                raise InfeasibleError(f"Program is infeasible (artificial sum {tableau.value:.3e})")
            self._drive_out_artificials(tableau, n, barred)

        barred[n:] = True
        costs = np.zeros(n + n_art)
        costs[:n] = c
        tableau.set_objective(costs)
        phase_two_pivots = self._run(tableau, barred, budget=self.max_pivots - phase_one_pivots)

        x = tableau.solution(n)
        reduced = tableau.reduced_costs.copy()
        all_costs = np.concatenate((c, np.zeros(n_art)))
        duals = all_costs[unit] - reduced[unit]
        logger.debug(f"Simplex finished: value={tableau.value:.10g} pivots={phase_one_pivots + phase_two_pivots}")
        return SimplexResult(
            x=x,
            value=float(c @ x),
            duals=duals,
            reduced_costs=reduced[:n],
            basis=tableau.basis.copy(),
            pivots=phase_one_pivots + phase_two_pivots,
            phase_one_pivots=phase_one_pivots,
        )

    def _find_pivot(self, tableau: Tableau, barred: np.ndarray) -> Optional[tuple]:
        reduced = tableau.reduced_costs
        candidates = np.flatnonzero((reduced < -self.optimality_tolerance) & ~barred)
        if candidates.size == 0:
            return None
        # Bland: lowest eligible column enters
        column = int(candidates[0])
        entries = tableau.M[1:, column]
        positive = entries > self.pivot_tolerance
        if not np.any(positive):
            raise UnboundedError(f"Column {column} improves the objective without bound")
        ratios = np.full(entries.shape, np.inf)
        ratios[positive] = tableau.rhs[positive] / entries[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
        # Bland: among tied rows the one whose basic column has the lowest index leaves
        row = int(ties[np.argmin(tableau.basis[ties])])
        return row, column

    def _run(self, tableau: Tableau, barred: np.ndarray, budget: int) -> int:
        pivots = 0
        while (pivot := self._find_pivot(tableau, barred)) is not None:
            if pivots >= budget:
                logger.error(f"Simplex pivot limit reached ({self.max_pivots}); objective {tableau.value:.6g}")
                raise IterationLimitError(
                    f"Pivot limit of {self.max_pivots} exceeded "
                    f"({tableau.n_constraints} rows, {tableau.n_columns} columns, objective {tableau.value:.6g})"
                )
            tableau.pivot(*pivot)
            pivots += 1
        return pivots

    def _drive_out_artificials(self, tableau: Tableau, n: int, barred: np.ndarray) -> None:
        """Replace basic artificials (at zero) by structural columns where the row allows it."""
        for i in range(tableau.n_constraints):
            if tableau.basis[i] < n:
                continue
            row = tableau.M[i + 1, :n]
            candidates = np.flatnonzero((np.abs(row) > self.pivot_tolerance) & ~barred[:n])
            if candidates.size:
                tableau.pivot(i, int(candidates[0]))
            else:
                # Redundant row: the artificial stays basic at zero and never moves again.
                logger.debug(f"Row {i} is redundant")


simplex_solver = DenseSimplex()
