"""Heterogeneous many-server queues: diffusion limits, simulation, staffing."""

from ._hetq import *  # noqa: F401,F403
from ._hetq import HetqError, SystemConfig, run_command

__all__ = ["config", "HetqError", "SystemConfig", "run_command"]


def config(**keys):
    """Builds a SystemConfig from keyword arguments, e.g. config(r=100, theta=1)."""
    return SystemConfig.from_keys({k: _text(v) for k, v in keys.items()})


def _text(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_text(v) for v in value)
    return str(value)
