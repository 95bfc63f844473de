"""Depth-budgeted hybrid quantum-classical circuit toolkit.

Simulates small quantum circuits with pluggable classical-function oracles,
enforces the structural grammars of three hybrid machine models (quantum-only
depth-d, measure-as-you-go, and classical-loop-around-shallow-quantum), and
ships problem generators, reference solvers and statistical probes for
studying what shallow hybrid machines can and cannot extract from layered
oracles.

Submodules are imported explicitly: ``hybridsim.statevec``,
``hybridsim.oracles``, ``hybridsim.problems``, ``hybridsim.models``,
``hybridsim.solvers``, ``hybridsim.analysis``, ``hybridsim.stats``,
``hybridsim.cli``.
"""

__version__ = "0.1.0"
