"""Handlers for ``solve`` and ``bicriteria``."""
import asyncio
import logging

from fairclust.commands.common import CommandOutput, RunConfig, load_instance
from fairclust.services.fpt import fpt_service
from fairclust.services.lp import lp_service
from fairclust.storage.documents import (
    BicriteriaDocument,
    SolveReportDocument,
    TraceDocument,
    render,
)

logger = logging.getLogger(__name__)


async def run_solve(cfg: RunConfig) -> CommandOutput:
    """End-to-end ``(3^z + ε')``-approximation with the oracle optimum attached when affordable."""
    inst = await load_instance(cfg)
    report = await asyncio.to_thread(
        fpt_service.solve,
        inst,
        cfg.epsilon,
        cfg.seed,
        cfg.workers,
        cfg.enum_cap,
        cfg.oracle_cap,
        cfg.dump_trace is not None,
    )
    output = CommandOutput(SolveReportDocument.from_report(report, inst))
    _side_files(cfg, report.bicriteria, output)
    return output


async def run_bicriteria(cfg: RunConfig) -> CommandOutput:
    """The LP and amplified rounding alone: ``β·k`` centres at fair cost within ``1 + ε`` of optimal."""
    inst = await load_instance(cfg)
    result = await asyncio.to_thread(
        fpt_service.bicriteria,
        inst,
        cfg.epsilon,
        cfg.seed,
        cfg.workers,
        cfg.dump_trace is not None,
    )
    output = CommandOutput(BicriteriaDocument.from_result(result, inst))
    _side_files(cfg, result, output)
    return output


def _side_files(cfg: RunConfig, stage, output: CommandOutput) -> None:
    if cfg.dump_lp:
        output.files.append((cfg.dump_lp, lp_service.dump_lp_text(stage.model)))
    if cfg.dump_trace:
        output.files.append((cfg.dump_trace, render(TraceDocument.from_amplify(stage.amplify, cfg.seed))))
