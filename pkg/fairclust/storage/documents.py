import asyncio
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import aiofiles
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from fairclust.core.costs import FairCost
from fairclust.core.instance import Group, Instance, InstanceError
from fairclust.core.metric import MetricReport
from fairclust.services.fpt import BicriteriaResult, SolveReport
from fairclust.services.generators import GeneratorError, SetCoverageInstance
from fairclust.services.oracle import OracleResult
from fairclust.services.rounding import AmplifyReport, GroupExpectation, SurvivalEstimate

logger = logging.getLogger(__name__)


class DocumentError(Exception):
    """Custom exception for unreadable or invalid documents."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


def format_cost(value: float) -> str:
    """Costs travel as decimal strings with 12 significant digits."""
    return format(float(value), ".12g")


def render(payload: Union[BaseModel, Dict[str, Any]]) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# Input documents


class GroupDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    members: List[str] = Field(min_length=1)
    weights: Optional[List[float]] = None

    @model_validator(mode="after")
    def aligned_weights(self) -> "GroupDocument":
        if self.weights is not None and len(self.weights) != len(self.members):
            raise ValueError(
                f"group {self.name!r}: {len(self.weights)} weights for {len(self.members)} members"
            )
        return self


class InstanceDocument(BaseModel):
    """Core instance format. Exactly one of ``matrix`` (over points then facilities) or ``coords``."""

    model_config = ConfigDict(extra="forbid")

    points: List[str] = Field(min_length=1)
    facilities: List[str] = Field(min_length=1)
    groups: List[GroupDocument] = Field(min_length=1)
    k: int
    z: float
    matrix: Optional[List[List[float]]] = None
    coords: Optional[Dict[str, List[float]]] = None

    @model_validator(mode="after")
    def one_metric(self) -> "InstanceDocument":
        if (self.matrix is None) == (self.coords is None):
            raise ValueError("exactly one of 'matrix' or 'coords' must be given")
        return self

    def to_instance(self, z: Optional[float] = None) -> Instance:
        """
        Build the in-memory instance.

        Raises:
            InstanceError: If the document is well-formed but describes an invalid instance
        """
        groups = [
            Group(g.name, tuple(g.members), tuple(g.weights) if g.weights is not None else tuple(1.0 for _ in g.members))
            for g in self.groups
        ]
        exponent = self.z if z is None else z
        if self.matrix is not None:
            rows = {len(row) for row in self.matrix}
            if len(rows) > 1:
                raise InstanceError("Distance matrix rows have different lengths")
            return Instance.from_matrix(self.points, self.facilities, self.matrix, groups, self.k, exponent)
        return Instance.from_coords(self.points, self.facilities, self.coords, groups, self.k, exponent)

    @classmethod
    def from_instance(cls, inst: Instance) -> "InstanceDocument":
        groups = [GroupDocument(name=g.name, members=list(g.members), weights=list(g.weights)) for g in inst.groups]
        common = dict(
            points=list(inst.points),
            facilities=list(inst.facilities),
            groups=groups,
            k=inst.k,
            z=inst.z,
        )
        if inst.coords is not None:
            labels = list(inst.points) + list(inst.facilities)
            return cls(coords={e: row for e, row in zip(labels, inst.coords.tolist())}, **common)
        return cls(matrix=inst.matrix.tolist(), **common)


class SetCoverageDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    universe: List[str]
    sets: List[List[str]]
    k: int = Field(ge=1)
    is_yes: Optional[bool] = None

    def to_instance(self) -> SetCoverageInstance:
        return SetCoverageInstance(tuple(self.universe), tuple(frozenset(s) for s in self.sets), self.k, self.is_yes)

    @classmethod
    def from_instance(cls, sc: SetCoverageInstance) -> "SetCoverageDocument":
        return cls(universe=list(sc.universe), sets=[sorted(s) for s in sc.collection], k=sc.k, is_yes=sc.is_yes)


# Reports


class GroupCostDocument(BaseModel):
    group: str
    cost: str


def _group_rows(inst: Instance, costs) -> List[GroupCostDocument]:
    return [GroupCostDocument(group=g.name, cost=format_cost(c)) for g, c in zip(inst.groups, costs)]


class SolveReportDocument(BaseModel):
    solution: List[str]
    fair_cost: str
    per_group_costs: List[GroupCostDocument]
    argmax_group: str
    bicriteria_set_size: int
    subsets_enumerated: int
    gamma_star: str
    oracle_opt: Optional[str] = None
    ratio_to_opt: Optional[str] = None
    epsilon_requested: float
    epsilon_internal: float
    rng_seed: int
    k: int
    z: float
    amplify_runs: int
    iterations_per_run: int
    lp_pivots: int
    wall_times: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_report(cls, report: SolveReport, inst: Instance) -> "SolveReportDocument":
        ratio = None
        if report.oracle_opt is not None and report.oracle_opt > 0:
            ratio = format_cost(report.fair_cost / report.oracle_opt)
        return cls(
            solution=list(report.solution.centers),
            fair_cost=format_cost(report.fair_cost),
            per_group_costs=_group_rows(inst, report.per_group_costs),
            argmax_group=inst.groups[report.argmax_group].name,
            bicriteria_set_size=report.bicriteria_set_size,
            subsets_enumerated=report.subsets_enumerated,
            gamma_star=format_cost(report.gamma_star),
            oracle_opt=None if report.oracle_opt is None else format_cost(report.oracle_opt),
            ratio_to_opt=ratio,
            epsilon_requested=report.epsilon_requested,
            epsilon_internal=report.epsilon_internal,
            rng_seed=report.rng_seed,
            k=report.k,
            z=report.z,
            amplify_runs=report.amplify_runs,
            iterations_per_run=report.iterations_per_run,
            lp_pivots=report.lp_pivots,
            wall_times=report.wall_times,
        )


class BicriteriaDocument(BaseModel):
    centers: List[str]
    size: int
    size_bound: int
    beta: float
    fair_cost: str
    per_group_costs: List[GroupCostDocument]
    gamma_star: str
    epsilon: float
    rng_seed: int
    runs: int
    iterations_per_run: int
    run_sizes: List[int]
    wall_times: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_result(cls, result: BicriteriaResult, inst: Instance) -> "BicriteriaDocument":
        amplify: AmplifyReport = result.amplify
        return cls(
            centers=list(result.centers.centers),
            size=len(result.centers),
            size_bound=amplify.size_bound,
            beta=result.beta,
            fair_cost=format_cost(result.cost.value),
            per_group_costs=_group_rows(inst, result.cost.group_costs),
            gamma_star=format_cost(result.gamma_star),
            epsilon=result.epsilon,
            rng_seed=result.rng_seed,
            runs=amplify.runs,
            iterations_per_run=amplify.iterations_per_run,
            run_sizes=amplify.run_sizes,
            wall_times=result.wall_times,
        )


class TraceDocument(BaseModel):
    rng_seed: int
    seeds: List[int]
    runs: List[Dict[str, Any]]

    @classmethod
    def from_amplify(cls, report: AmplifyReport, rng_seed: int) -> "TraceDocument":
        return cls(rng_seed=rng_seed, seeds=report.seeds, runs=[t.to_dict() for t in report.traces])


class BaselineDocument(BaseModel):
    centers: List[str]
    fair_cost: str
    per_group_costs: List[GroupCostDocument]
    unconstrained_cost: str
    approximation_constant: float
    bound_factor: float
    locally_optimal: bool
    wall_times: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def build(
        cls,
        inst: Instance,
        centers,
        cost: FairCost,
        unconstrained: float,
        constant: float,
        locally_optimal: bool,
        wall_times: Dict[str, float],
    ) -> "BaselineDocument":
        return cls(
            centers=list(centers.centers),
            fair_cost=format_cost(cost.value),
            per_group_costs=_group_rows(inst, cost.group_costs),
            unconstrained_cost=format_cost(unconstrained),
            approximation_constant=constant,
            bound_factor=constant * inst.n_groups,
            locally_optimal=locally_optimal,
            wall_times=wall_times,
        )


class OracleDocument(BaseModel):
    objective: str
    opt_cost: str
    opt_set: List[str]
    enumerated: int
    k: int
    z: float
    wall_times: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_result(cls, result: OracleResult, inst: Instance, objective: str, wall_times: Dict[str, float]):
        return cls(
            objective=objective,
            opt_cost=format_cost(result.opt_cost),
            opt_set=list(result.opt_set.centers),
            enumerated=result.enumerated,
            k=inst.k,
            z=inst.z,
            wall_times=wall_times,
        )


class MetricReportDocument(BaseModel):
    ok: bool
    violations: int
    elements: int
    exhaustive: bool
    symmetry_violations: int
    diagonal_violations: int
    negative_entries: int
    triangle_violations: int
    triples_checked: int
    fact1_checked: int
    fact1_violations: int
    examples: List[List[str]]

    @classmethod
    def from_report(cls, report: MetricReport) -> "MetricReportDocument":
        return cls(
            ok=report.ok,
            violations=report.violations,
            elements=report.elements,
            exhaustive=report.exhaustive,
            symmetry_violations=report.symmetry_violations,
            diagonal_violations=report.diagonal_violations,
            negative_entries=report.negative_entries,
            triangle_violations=report.triangle_violations,
            triples_checked=report.triples_checked,
            fact1_checked=report.fact1_checked,
            fact1_violations=report.fact1_violations,
            examples=[list(e) for e in report.examples],
        )


class SurvivalRow(BaseModel):
    iterations: int
    point: str
    empirical: float
    stderr: float
    expected: float


class ExpectationRow(BaseModel):
    group: str
    mean: str
    stderr: str
    bound: Optional[str] = None
    within_bound: Optional[bool] = None


class StatsDocument(BaseModel):
    epsilon: float
    rng_seed: int
    n_trials: int
    k: int
    gamma_star: str
    oracle_opt: Optional[str] = None
    survival: List[SurvivalRow]
    expectation: List[ExpectationRow]
    wall_times: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def build(
        cls,
        inst: Instance,
        epsilon: float,
        rng_seed: int,
        gamma_star: float,
        survival: SurvivalEstimate,
        expectation: GroupExpectation,
        oracle_opt: Optional[float],
        wall_times: Dict[str, float],
    ) -> "StatsDocument":
        rows = [
            SurvivalRow(
                iterations=i,
                point=p,
                empirical=float(survival.empirical[a, b]),
                stderr=float(survival.stderr[a, b]),
                expected=survival.expected[a],
            )
            for a, i in enumerate(survival.iterations)
            for b, p in enumerate(survival.points)
        ]
        bound = None if oracle_opt is None else (1 + epsilon / 2) * oracle_opt
        groups = []
        for g, mean, err in zip(inst.groups, expectation.means, expectation.stderrs):
            groups.append(
                ExpectationRow(
                    group=g.name,
                    mean=format_cost(mean),
                    stderr=format_cost(err),
                    bound=None if bound is None else format_cost(bound),
                    within_bound=None if bound is None else bool(mean <= bound + 3 * err + 1e-9),
                )
            )
        return cls(
            epsilon=epsilon,
            rng_seed=rng_seed,
            n_trials=survival.n_trials,
            k=inst.k,
            gamma_star=format_cost(gamma_star),
            oracle_opt=None if oracle_opt is None else format_cost(oracle_opt),
            survival=rows,
            expectation=groups,
            wall_times=wall_times,
        )


# Parsing


def parse_instance(data: Any, z: Optional[float] = None) -> Instance:
    """
    Validate a decoded JSON value as an instance document and build the instance.

    Raises:
        DocumentError: If the value does not match the instance schema
        InstanceError: If it matches but violates an instance invariant
    """
    try:
        document = InstanceDocument.model_validate(data)
    except ValidationError as e:
        raise DocumentError(f"Invalid instance document: {e}") from e
    return document.to_instance(z)


def parse_set_coverage(data: Any) -> SetCoverageInstance:
    try:
        return SetCoverageDocument.model_validate(data).to_instance()
    except ValidationError as e:
        raise DocumentError(f"Invalid set-coverage document: {e}") from e
    except GeneratorError as e:
        raise DocumentError(f"Invalid set-coverage document: {e}") from e


def serialize_instance(inst: Instance) -> str:
    return render(InstanceDocument.from_instance(inst))


class DocumentStore:
    """Async reading and writing of JSON documents and text dumps."""

    def __init__(self):
        self._lock = asyncio.Lock()

    async def read_json(self, path: Union[str, Path]) -> Any:
        """
        Read and decode a JSON file.

        Raises:
            DocumentError: If the file is missing or is not valid JSON (with line and column)
        """
        file_path = Path(path)
        try:
            async with aiofiles.open(file_path, mode="r", encoding="utf-8") as f:
                text = await f.read()
        except OSError as e:
            logger.error(f"Error reading {file_path}: {e}")
            raise DocumentError(f"Cannot read {file_path}: {e.strerror or e}") from e
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            logger.error(f"Malformed JSON in {file_path}: {e.msg} at {e.lineno}:{e.colno}")
            raise DocumentError(f"Malformed JSON in {file_path}: {e.msg}", line=e.lineno, column=e.colno) from e

    async def load_instance(self, path: Union[str, Path], z: Optional[float] = None) -> Instance:
        inst = parse_instance(await self.read_json(path), z)
        logger.info(f"Loaded instance {path}: {inst.describe()}")
        return inst

    async def load_set_coverage(self, path: Union[str, Path]) -> SetCoverageInstance:
        return parse_set_coverage(await self.read_json(path))

    async def write_text(self, path: Union[str, Path], text: str) -> None:
        file_path = Path(path)
        try:
            async with self._lock:
                file_path.parent.mkdir(parents=True, exist_ok=True)
                async with aiofiles.open(file_path, mode="w", encoding="utf-8") as f:
                    await f.write(text)
        except OSError as e:
            logger.error(f"Error writing {file_path}: {e}")
            raise DocumentError(f"Cannot write {file_path}: {e.strerror or e}") from e
        logger.info(f"Wrote {file_path}")

    async def write_document(self, path: Union[str, Path], payload: Union[BaseModel, Dict[str, Any]]) -> None:
        await self.write_text(path, render(payload))

    async def write_all(self, outputs: List[Tuple[Union[str, Path], str]]) -> None:
        """
        Write several files so that either all of them appear or none do.

        Every text is first staged next to its target as ``<name>.partial``; targets are only
        replaced once all files are staged.

        Raises:
            DocumentError: If any file cannot be staged or moved into place
        """
        staged: List[Tuple[Path, Path]] = []
        try:
            for path, text in outputs:
                target = Path(path)
                if target.is_dir():
                    raise DocumentError(f"Cannot write {target}: it is a directory")
                partial = target.with_name(target.name + ".partial")
                staged.append((partial, target))
                await self.write_text(partial, text)
        except DocumentError:
            for partial, _ in staged:
                partial.unlink(missing_ok=True)
            raise

        for partial, target in staged:
            try:
                partial.replace(target)
            except OSError as e:
                logger.error(f"Error moving {partial} to {target}: {e}")
                raise DocumentError(f"Cannot write {target}: {e.strerror or e}") from e
            logger.info(f"Wrote {target}")


document_store = DocumentStore()
