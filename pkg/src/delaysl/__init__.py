"""Forward and inverse spectral problems for ``-y'' + q(x) y(x - a) = lam y``
on ``(0, pi)`` with ``y(0) = 0``, ``y^(j)(pi) = 0`` and ``2 pi/5 <= a < pi/2``."""
from .errors import (AllRowsDiscarded, BoundaryTooClose, DelaySLError, DomainViolation,
                     GridError, IllConditioned, NonConvergence, RootCollision, StageError,
                     ValidationError)
from .encode import ProductCharFn, delta_from_spectrum, delta_star
from .forward import (DelayParams, DirectConstants, Potential, SpectralPoint, Spectrum,
                      asymptotic_rho, charfn_closed, charfn_closed_both, charfn_oracle,
                      count_roots_rect, d_from_charfn, d_from_constants, direct_constants,
                      eigenvalues)
from .funcspace import GridFunction, Interval
from .inverse import (FitWindow, InversionReport, SolverConfig, edge_reconstruct,
                      extract_A0, extract_ABs, middle_reconstruct, reconstruction_errors,
                      recover_R, solve_inverse)

__version__ = "0.1.0"
