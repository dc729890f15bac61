"""
The natural LP relaxation of socially fair clustering::

    minimise    γ
    subject to  Σ_f y_f = k
                Σ_f x_{f,p} = 1                          for every point p
                Σ_{p∈P_j} Σ_f x_{f,p} d(f,p)^z w_j(p) ≤ γ  for every group j
                x_{f,p} ≤ y_f                            for every (f, p)
                x, y, γ ≥ 0

Variables are ordered ``y`` (facilities in declared order), ``x`` (facility-major), ``γ``.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from fairclust.core.costs import fair_cost, nearest_centers
from fairclust.core.instance import CenterSet, Instance, power
from fairclust.services.simplex import DenseSimplex, SimplexError, simplex_solver

logger = logging.getLogger(__name__)

OVERFLOW_RATIO = 1e15


class LPError(Exception):
    """Custom exception for LP construction failures."""
    pass


@dataclass(frozen=True, eq=False)
class LPModel:
    instance: Instance
    variables: Tuple[str, ...]
    objective: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    eq_rows: Tuple[str, ...]
    ub_rows: Tuple[str, ...]
    coefficients: np.ndarray
    fixed_zero: Tuple[int, ...] = ()

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.eq_rows) + len(self.ub_rows)

    @property
    def n_facilities(self) -> int:
        return self.instance.n_facilities

    @property
    def n_points(self) -> int:
        return self.instance.n_points

    def x_index(self, f: int, p: int) -> int:
        return self.n_facilities + f * self.n_points + p

    @property
    def gamma_index(self) -> int:
        return self.n_variables - 1


@dataclass
class LPCertificate:
    """Optimality evidence read off the final tableau."""

    primal_residual: float
    dual_residual: float
    complementary_slackness: float
    duality_gap: float
    pivots: int


@dataclass(eq=False)
class FractionalSolution:
    """
    A point of the relaxation: openings ``y``, assignments ``x`` (``(n_F, n_P)``, declared
    orders), objective ``gamma`` and per-point fractional costs ``α_p``.
    """

    instance: Instance
    y_values: np.ndarray
    x_values: np.ndarray
    gamma: float
    alpha: np.ndarray
    duals: Optional[np.ndarray] = None
    certificate: Optional[LPCertificate] = None

    @property
    def y(self) -> Dict[str, float]:
        return {f: float(v) for f, v in zip(self.instance.facilities, self.y_values)}

    @property
    def x(self) -> Dict[Tuple[str, str], float]:
        inst = self.instance
        return {
            (inst.facilities[f], inst.points[p]): float(self.x_values[f, p])
            for f, p in zip(*np.nonzero(self.x_values))
        }

    @property
    def per_point_cost(self) -> Dict[str, float]:
        return {p: float(a) for p, a in zip(self.instance.points, self.alpha)}

    def support(self, tolerance: float = 0.0) -> CenterSet:
        """Facilities opened to a positive extent."""
        return CenterSet.of(f for f, v in zip(self.instance.facilities, self.y_values) if v > tolerance)

    def as_vector(self) -> np.ndarray:
        return np.concatenate((self.y_values, self.x_values.ravel(), [self.gamma]))


@dataclass
class FeasibilityReport:
    """Largest residual of each constraint family plus the rows above tolerance."""

    opening: float
    assignment: float
    group_cost: float
    linking: float
    nonnegativity: float
    violated_rows: List[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.opening, self.assignment, self.group_cost, self.linking, self.nonnegativity)

    def ok(self, tolerance: float = 1e-7) -> bool:
        return self.max_residual <= tolerance

    def as_dict(self) -> Dict[str, float]:
        return {
            "opening": self.opening,
            "assignment": self.assignment,
            "group_cost": self.group_cost,
            "linking": self.linking,
            "nonnegativity": self.nonnegativity,
        }


class LPService:
    """Builds and solves the natural relaxation."""

    def __init__(self, solver: Optional[DenseSimplex] = None):
        self.solver = solver or simplex_solver

    def build_model(self, inst: Instance) -> LPModel:
        """
        Build the relaxation of ``inst``.

        Args:
            inst: Instance with pairwise disjoint groups

        Returns:
            LPModel: Dense constraint arrays with named rows and variables

        Raises:
            LPError: If the groups overlap or a cost coefficient is not finite
        """
        if not inst.groups_disjoint():
            logger.error("LP requested for overlapping groups")
            raise LPError("Groups overlap; apply split_overlapping_groups before building the LP")

        n_f, n_p, n_g = inst.n_facilities, inst.n_points, inst.n_groups
        n_vars = n_f + n_f * n_p + 1

        group_of = np.full(n_p, -1, dtype=int)
        group_of[inst.memberships.point] = inst.memberships.group
        coefficients = cost_coefficients(inst)
        if not np.all(np.isfinite(coefficients)):
            raise LPError("Cost coefficients d(f,p)^z * w(p) overflowed")

        variables = (
            [f"y[{f}]" for f in inst.facilities]
            + [f"x[{f},{p}]" for f in inst.facilities for p in inst.points]
            + ["gamma"]
        )
        objective = np.zeros(n_vars)
        objective[-1] = 1.0

        A_eq = np.zeros((1 + n_p, n_vars))
        b_eq = np.zeros(1 + n_p)
        A_eq[0, :n_f] = 1.0
        b_eq[0] = inst.k
        x_block = np.arange(n_f * n_p).reshape(n_f, n_p) + n_f
        for p in range(n_p):
            A_eq[1 + p, x_block[:, p]] = 1.0
            b_eq[1 + p] = 1.0

        A_ub = np.zeros((n_g + n_f * n_p, n_vars))
        b_ub = np.zeros(n_g + n_f * n_p)
        for p in range(n_p):
            if group_of[p] >= 0:
                A_ub[group_of[p], x_block[:, p]] = coefficients[:, p]
        A_ub[:n_g, -1] = -1.0
        for f in range(n_f):
            for p in range(n_p):
                row = n_g + f * n_p + p
                A_ub[row, x_block[f, p]] = 1.0
                A_ub[row, f] = -1.0

        eq_rows = ["open"] + [f"assign[{p}]" for p in inst.points]
        ub_rows = [f"group[{g.name}]" for g in inst.groups] + [
            f"link[{f},{p}]" for f in inst.facilities for p in inst.points
        ]

        model = LPModel(
            instance=inst,
            variables=tuple(variables),
            objective=objective,
            A_eq=A_eq,
            b_eq=b_eq,
            A_ub=A_ub,
            b_ub=b_ub,
            eq_rows=tuple(eq_rows),
            ub_rows=tuple(ub_rows),
            coefficients=coefficients,
            fixed_zero=self._overflow_guard(coefficients, x_block),
        )
        logger.info(f"Built LP: {model.n_rows} rows, {model.n_variables} variables ({inst.describe()})")
        return model

    @staticmethod
    def _overflow_guard(coefficients: np.ndarray, x_block: np.ndarray) -> Tuple[int, ...]:
        positive = coefficients[coefficients > 0]
        if positive.size == 0:
            return ()
        huge = coefficients > OVERFLOW_RATIO * positive.min()
        # A point's cheapest facility stays available so the assignment row remains satisfiable.
        huge[np.argmin(coefficients, axis=0), np.arange(coefficients.shape[1])] = False
        fixed = tuple(int(i) for i in x_block[huge])
        if fixed:
            logger.warning(f"Fixed {len(fixed)} assignment variables to zero (coefficient overflow guard)")
        return fixed

    def solve(self, model: LPModel) -> FractionalSolution:
        """
        Solve the relaxation to optimality.

        Returns:
            FractionalSolution: An optimal solution with openings normalised into ``[0, 1]``,
            the simplex multipliers and an optimality certificate

        Raises:
            SimplexError: Pivot limit exceeded, or an infeasible/unbounded outcome (which a
                well-formed model never produces)
        """
        n_eq, n_ub = len(model.eq_rows), len(model.ub_rows)
        n = model.n_variables
        A = np.zeros((n_eq + n_ub, n + n_ub))
        A[:n_eq, :n] = model.A_eq
        A[n_eq:, :n] = model.A_ub
        A[n_eq:, n:] = np.eye(n_ub)
        b = np.concatenate((model.b_eq, model.b_ub))
        c = np.concatenate((model.objective, np.zeros(n_ub)))
        unit_columns = {n_eq + i: n + i for i in range(n_ub)}

        try:
            result = self.solver.solve(A, b, c, unit_columns=unit_columns, fixed_zero=model.fixed_zero)
        except SimplexError as e:
            logger.error(f"LP solve failed: {e}")
            raise

        structural = np.clip(result.x[:n], 0.0, None)
        free = np.ones(n + n_ub, dtype=bool)
        free[list(model.fixed_zero)] = False
        reduced = c - A.T @ result.duals
        certificate = LPCertificate(
            primal_residual=float(np.max(np.abs(A @ result.x - b))),
            dual_residual=float(max(0.0, -np.min(reduced[free]))),
            complementary_slackness=float(np.max(np.abs(result.x * reduced)) / max(1.0, abs(result.value))),
            duality_gap=float(abs(result.value - b @ result.duals)),
            pivots=result.pivots,
        )
        solution = self._to_solution(model, structural, result.duals, certificate)
        logger.info(
            f"LP solved: gamma*={solution.gamma:.10g} in {result.pivots} pivots "
            f"(gap {certificate.duality_gap:.2e})"
        )
        return solution

    def _to_solution(self, model: LPModel, vec: np.ndarray, duals, certificate) -> FractionalSolution:
        inst = model.instance
        n_f, n_p = inst.n_facilities, inst.n_points
        y = vec[:n_f].copy()
        x = vec[n_f: n_f + n_f * n_p].reshape(n_f, n_p).copy()
        y = _cap_openings(y, x)
        alpha = np.sum(x * model.coefficients, axis=0)
        return FractionalSolution(
            instance=inst,
            y_values=y,
            x_values=x,
            gamma=float(vec[-1]),
            alpha=alpha,
            duals=duals,
            certificate=certificate,
        )

    def check_feasibility(self, sol: FractionalSolution, model: LPModel, tolerance: float = 1e-7) -> FeasibilityReport:
        """Largest residual per constraint family; rows above ``tolerance`` are listed."""
        vec = sol.as_vector()
        eq = model.A_eq @ vec - model.b_eq
        ub = np.maximum(model.A_ub @ vec - model.b_ub, 0.0)
        n_g = model.instance.n_groups
        report = FeasibilityReport(
            opening=float(abs(eq[0])),
            assignment=float(np.max(np.abs(eq[1:]), initial=0.0)),
            group_cost=float(np.max(ub[:n_g], initial=0.0)),
            linking=float(np.max(ub[n_g:], initial=0.0)),
            nonnegativity=float(max(0.0, -np.min(vec))),
        )
        report.violated_rows = [name for name, r in zip(model.eq_rows, np.abs(eq)) if r > tolerance] + [
            name for name, r in zip(model.ub_rows, ub) if r > tolerance
        ]
        return report

    def integral_point(self, inst: Instance, centers: CenterSet) -> FractionalSolution:
        """
        The LP point of an integral centre set: ``y`` its indicator, ``x`` the nearest-open
        indicator and ``γ`` its fair cost.
        """
        rows = inst.facility_rows(centers)
        y = np.zeros(inst.n_facilities)
        y[rows] = 1.0
        _, nearest = nearest_centers(inst, centers)
        x = np.zeros((inst.n_facilities, inst.n_points))
        x[nearest, np.arange(inst.n_points)] = 1.0
        model_coeffs = cost_coefficients(inst)
        return FractionalSolution(
            instance=inst,
            y_values=y,
            x_values=x,
            gamma=fair_cost(centers, inst).value,
            alpha=np.sum(x * model_coeffs, axis=0),
        )

    def dump_lp_text(self, model: LPModel) -> str:
        """Render the model in LP text form (objective, constraint rows, bounds)."""
        inst = model.instance
        names = [f"y_{f}" for f in range(model.n_facilities)]
        names += [f"x_{f}_{p}" for f in range(model.n_facilities) for p in range(model.n_points)]
        names.append("gamma")

        lines = [f"\\ fairclust relaxation: {inst.describe()}"]
        lines += [f"\\ y_{i} = {f}" for i, f in enumerate(inst.facilities)]
        lines += [f"\\ point {i} = {p}" for i, p in enumerate(inst.points)]
        lines += ["Minimize", " obj: gamma", "Subject To"]

        def row_text(label: str, coeffs: np.ndarray, sense: str, rhs: float) -> str:
            terms = []
            for j in np.flatnonzero(coeffs):
                value = coeffs[j]
                sign = "-" if value < 0 else "+"
                magnitude = abs(value)
                coef = "" if magnitude == 1.0 else f"{magnitude:.17g} "
                terms.append(f"{sign} {coef}{names[j]}")
            body = " ".join(terms).lstrip("+ ")
            return f" {label}: {body} {sense} {rhs:.17g}"

        for i, label in enumerate(model.eq_rows):
            lines.append(row_text(_lp_label("c_eq", i, label), model.A_eq[i], "=", model.b_eq[i]))
        for i, label in enumerate(model.ub_rows):
            lines.append(row_text(_lp_label("c_ub", i, label), model.A_ub[i], "<=", model.b_ub[i]))

        lines.append("Bounds")
        for j in model.fixed_zero:
            lines.append(f" {names[j]} = 0")
        lines.append("End")
        return "\n".join(lines) + "\n"


def cost_coefficients(inst: Instance) -> np.ndarray:
    """``d(f,p)^z * w(p)`` as an ``(n_F, n_P)`` array; points outside every group cost nothing."""
    weight = np.zeros(inst.n_points)
    np.add.at(weight, inst.memberships.point, inst.memberships.weight)
    return power(inst.facility_point_distances, inst.z) * weight[None, :]


def _lp_label(prefix: str, i: int, label: str) -> str:
    return f"{prefix}{i}_{label.split('[')[0]}"


def _cap_openings(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    Move opening mass above 1 onto facilities below 1 (declared order).

    ``x ≤ 1`` keeps every linking row satisfied and ``Σ y`` is unchanged, so the objective is too.
    """
    y = y.copy()
    excess = float(np.sum(np.maximum(y - 1.0, 0.0)))
    if excess <= 0.0:
        return y
    y = np.minimum(y, 1.0)
    for f in range(len(y)):
        if excess <= 0.0:
            break
        room = 1.0 - y[f]
        if room > 0.0:
            moved = min(room, excess)
            y[f] += moved
            excess -= moved
    return y


lp_service = LPService()
