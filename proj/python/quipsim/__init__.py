"""Python interface to the quipsim simulator."""

from quipsim._core import (
    Packet,
    Processor,
    QuipError,
    compose_bell,
    run,
    sweep,
    validate_program,
)

__all__ = [
    "Packet",
    "Processor",
    "QuipError",
    "compose_bell",
    "run",
    "sweep",
    "validate_program",
]
__version__ = "0.1.0"
