"""Wilson loop expectations for 2D Yang-Mills on the plane.

Four independent routes to the same power series in the coupling:

- continuum partial-axial-gauge chord-diagram sweep (``diagram_engine``),
- discretized Ito/Stratonovich parallel transport with a Wick-rule
  expectation engine (``lattice_transport`` + ``wick_algebra``),
- exact heat-kernel closed forms for simple loops (``exact_reference``),
- white-noise Monte Carlo holonomy for complete axial gauge (``mc_oracle``).
"""

from .lie_core import Representation, ChordDiagram, make_representation, lie_factor
from .curve_geometry import (
    HorizontalCurve,
    AdmissibleLoop,
    build_loop,
    direction_sign,
    enclosed_area,
)
from .gauge_covariance import (
    GaugeChoice,
    CovarianceSpec,
    parse_gauge,
    green_scalar,
    covariance_fn,
    interval_integral,
)

__version__ = "0.1.0"

__all__ = [
    "Representation",
    "ChordDiagram",
    "make_representation",
    "lie_factor",
    "HorizontalCurve",
    "AdmissibleLoop",
    "build_loop",
    "direction_sign",
    "enclosed_area",
    "GaugeChoice",
    "CovarianceSpec",
    "parse_gauge",
    "green_scalar",
    "covariance_fn",
    "interval_integral",
]
