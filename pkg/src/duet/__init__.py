"""Spectral Picard solvers for the 1d Zakharov and 3d Klein-Gordon-Schroedinger systems.

Modules by role:

* :mod:`duet.spectral`     periodic grids, transforms, norms
* :mod:`duet.propagators`  exact linear flows and Duhamel integrals
* :mod:`duet.zakharov`     1d Zakharov solver and invariants
* :mod:`duet.kgs`          3d Klein-Gordon-Schroedinger solver and invariants
* :mod:`duet.globalizer`   norm-driven step selection and long runs
* :mod:`duet.estimates`    trilinear forms, convolution and decay-integral checks
* :mod:`duet.checkpoint`, :mod:`duet.config`, :mod:`duet.cli`  I/O and orchestration
"""

from .errors import DuetError
from .spectral import Field, Grid, Grid1D, Grid3D, WavePair
from .zakharov import PicardParams, ZakharovState
from .kgs import KGSState
from .globalizer import ScheduleParams, run

__version__ = "0.1.0"

__all__ = [
    "DuetError", "Field", "Grid", "Grid1D", "Grid3D", "WavePair", "PicardParams",
    "ZakharovState", "KGSState", "ScheduleParams", "run", "__version__",
]
