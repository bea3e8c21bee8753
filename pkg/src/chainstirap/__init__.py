"""Adiabatic (dark-state) quantum state transfer through a tight-binding
chain with a central on-site defect.

The modules build on each other: :mod:`~chainstirap.lattice` (medium
spectrum), :mod:`~chainstirap.protocol` (pulsed couplings and disorder),
:mod:`~chainstirap.effective` (three-level reduction),
:mod:`~chainstirap.dynamics` (time evolution), :mod:`~chainstirap.metrics`
(fidelities) and :mod:`~chainstirap.experiments` (sweeps behind the CLI).
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .lattice import *  # noqa: E402,F401,F403
from .protocol import *  # noqa: E402,F401,F403
from .effective import *  # noqa: E402,F401,F403
from .dynamics import *  # noqa: E402,F401,F403
from .metrics import *  # noqa: E402,F401,F403
from .experiments import ExperimentConfig, SweepRecord, run_experiment  # noqa: E402,F401
