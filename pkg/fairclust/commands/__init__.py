from fairclust.commands.common import CommandOutput, RunConfig, UsageError
from fairclust.commands.diagnostics import run_baseline, run_oracle, run_stats, run_validate
from fairclust.commands.gen import run_gen
from fairclust.commands.solve import run_bicriteria, run_solve

HANDLERS = {
    "solve": run_solve,
    "bicriteria": run_bicriteria,
    "baseline": run_baseline,
    "oracle": run_oracle,
    "gen": run_gen,
    "validate": run_validate,
    "stats": run_stats,
}

__all__ = ["CommandOutput", "HANDLERS", "RunConfig", "UsageError"]
