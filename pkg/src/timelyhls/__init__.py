"""timelyhls: architecture-aware HLS optimization orchestrator.

Generates pragma-annotated HLS C/C++ kernels for specific FPGA targets,
verifies them through a two-stage (HLS-level, RTL-level) loop, and refines
them from tool feedback until timing closure and functional correctness.
Ships a deterministic analytical toolchain simulator and a scripted
generation backend so whole runs are reproducible without vendor tools.
"""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def data_path(*parts: str) -> Path:
    """Path to a bundled data file (kb/, bench/, profiles/)."""
    root = resources.files(__name__) / "data"
    return Path(str(root.joinpath(*parts)))
