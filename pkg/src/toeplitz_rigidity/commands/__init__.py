"""
Command implementations for the toeplitz-cli subcommands.

Every ``run_*`` function takes the validated :class:`~toeplitz_rigidity.config.RunConfig`
and the parsed arguments, and returns a :class:`CommandResult`. With
``dry_run`` the inputs are loaded and validated but nothing is computed.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from ..exceptions import DomainError

PASS = "PASS"
FAIL = "FAIL"
UNASSERTED = "UNASSERTED"
DRY_RUN = "DRY-RUN"
INFO = "INFO"

EXIT_CODES = {PASS: 0, INFO: 0, DRY_RUN: 0, UNASSERTED: 0, FAIL: 1}


@dataclass
class CommandResult:
    command: str
    verdict: str
    report: Dict[str, Any]
    rows: Optional[List[Dict[str, Any]]] = None
    summary: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.verdict, 1)

    def payload(self, tabular: bool = False) -> Any:
        """The report, or its row table when a tabular format was requested."""
        if tabular and self.rows is not None:
            return self.rows
        return {"command": self.command, "verdict": self.verdict, **self.report}


def combine(verdicts: Sequence[str]) -> str:
    if any(v == FAIL for v in verdicts):
        return FAIL
    if verdicts and all(v == UNASSERTED for v in verdicts):
        return UNASSERTED
    return PASS


def parse_complex(text: str) -> complex:
    """'0.1+1.2i', '1.2j', 'i' or a plain real number."""
    cleaned = str(text).strip().replace(" ", "").replace("i", "j")
    if cleaned in ("j", "+j"):
        return 1j
    if cleaned == "-j":
        return -1j
    try:
        return complex(cleaned)
    except ValueError:
        raise DomainError(f"cannot parse complex number '{text}'") from None


def dry_run_result(command: str, config, inputs: Dict[str, Any]) -> CommandResult:
    return CommandResult(command, DRY_RUN, {"inputs": inputs, "config": config.model_dump()})
