"""
Metric axiom checks.

Symmetry and the zero diagonal are checked on every pair; the triangle inequality on every
triple up to ``exhaustive_limit`` elements and on ``10 n^2`` sampled triples above it. The
relaxed inequality ``d(q,t)^z <= 3^(z-1) (d(q,r)^z + d(r,s)^z + d(s,t)^z)`` is spot-checked
on sampled quadruples.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from fairclust.core.instance import Instance
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
MAX_LISTED = 50
SAMPLE_CHUNK = 1_000_000


@dataclass
class MetricReport:
    elements: int
    exhaustive: bool
    symmetry_violations: int = 0
    diagonal_violations: int = 0
    negative_entries: int = 0
    triangle_violations: int = 0
    triples_checked: int = 0
    fact1_checked: int = 0
    fact1_violations: int = 0
    examples: List[Tuple[str, ...]] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return (
            self.symmetry_violations
            + self.diagonal_violations
            + self.negative_entries
            + self.triangle_violations
            + self.fact1_violations
        )

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def _note(self, *example: str) -> None:
        if len(self.examples) < MAX_LISTED:
            self.examples.append(example)


def _labels(inst: Instance) -> List[str]:
    return list(inst.points) + list(inst.facilities)


def validate_metric(
    inst: Instance,
    exhaustive_limit: Optional[int] = None,
    fact1_samples: Optional[int] = None,
    seed: int = 0,
) -> MetricReport:
    """
    Report every metric axiom violation of ``inst``.

    Args:
        inst: Instance to inspect
        exhaustive_limit: Largest element count checked on all triples
        fact1_samples: Number of sampled quadruples for the relaxed triangle inequality
        seed: Seed for the sampled checks

    Returns:
        MetricReport: Violation counts plus a bounded list of examples
    """
    limit = settings.metric_exhaustive_limit if exhaustive_limit is None else exhaustive_limit
    quads = settings.fact1_samples if fact1_samples is None else fact1_samples
    d = inst.matrix
    n = d.shape[0]
    labels = _labels(inst)
    report = MetricReport(elements=n, exhaustive=n <= limit)

    negative = np.argwhere(d < 0)
    report.negative_entries = len(negative)
    for a, b in negative[:MAX_LISTED]:
        report._note("negative", labels[a], labels[b], repr(float(d[a, b])))

    asym = np.argwhere(np.triu(np.abs(d - d.T) > TOLERANCE, k=1))
    report.symmetry_violations = len(asym)
    for a, b in asym[:MAX_LISTED]:
        report._note("symmetry", labels[a], labels[b], repr(float(d[a, b] - d[b, a])))

    diag = np.flatnonzero(np.abs(np.diag(d)) > TOLERANCE)
    report.diagonal_violations = len(diag)
    for a in diag[:MAX_LISTED]:
        report._note("diagonal", labels[a], repr(float(d[a, a])))

    rng = np.random.default_rng(seed)
    if report.exhaustive:
        _triangle_exhaustive(d, labels, report)
    else:
        _triangle_sampled(d, labels, report, rng, 10 * n * n)
    _fact1_sampled(d, labels, inst.z, report, rng, quads)

    if report.ok:
        logger.info(f"Metric check passed: {n} elements, {report.triples_checked} triples")
    else:
        logger.warning(f"Metric check found {report.violations} violations on {n} elements")
    return report


def _triangle_exhaustive(d: np.ndarray, labels: List[str], report: MetricReport) -> None:
    n = d.shape[0]
    for b in range(n):
        bad = d > d[:, b][:, None] + d[b, :][None, :] + TOLERANCE
        count = int(np.count_nonzero(bad))
        if count:
            report.triangle_violations += count
            for a, c in np.argwhere(bad)[:MAX_LISTED]:
                report._note("triangle", labels[a], labels[b], labels[c])
    report.triples_checked = n ** 3


def _triangle_sampled(d, labels, report: MetricReport, rng, total: int) -> None:
    n = d.shape[0]
    remaining = total
    while remaining > 0:
        size = min(remaining, SAMPLE_CHUNK)
        a, b, c = rng.integers(0, n, size=(3, size))
        bad = d[a, c] > d[a, b] + d[b, c] + TOLERANCE
        report.triangle_violations += int(np.count_nonzero(bad))
        for i in np.flatnonzero(bad)[:MAX_LISTED]:
            report._note("triangle", labels[a[i]], labels[b[i]], labels[c[i]])
        remaining -= size
    report.triples_checked = total


def _fact1_sampled(d, labels, z: float, report: MetricReport, rng, samples: int) -> None:
    if samples <= 0:
        return
    n = d.shape[0]
    q, r, s, t = rng.integers(0, n, size=(4, samples))
    lhs = np.power(d[q, t], z)
    rhs = 3.0 ** (z - 1) * (np.power(d[q, r], z) + np.power(d[r, s], z) + np.power(d[s, t], z))
    bad = lhs > rhs * (1 + TOLERANCE) + TOLERANCE
    report.fact1_checked = samples
    report.fact1_violations = int(np.count_nonzero(bad))
    for i in np.flatnonzero(bad)[:MAX_LISTED]:
        report._note("fact1", labels[q[i]], labels[r[i]], labels[s[i]], labels[t[i]])
