"""Exact divisor computations on smooth and Q-factorial projective surfaces.

Lattices, cone membership, Zariski decomposition and extremal rays are all
computed in exact rational (or quadratic-field) arithmetic. The
non-vanishing pipeline returns effective representatives of K + L with a
trace that :func:`verify_trace` replays independently.
"""

from .cones import (
    EffectivityCertificate,
    check_zariski,
    cone_facets,
    extremal_rays,
    is_nef,
    is_pseudo_effective,
    rationalize_effective,
    zariski_decompose,
)
from .errors import (
    ConsistencyError,
    LatticeMismatchError,
    ModelIncompleteError,
    PreconditionError,
    RadicandError,
    ResourceError,
    SignatureError,
    SurfdivError,
)
from .lattice import CurveClass, DivisorClass, SurfaceLattice, check_signature, orthogonal_complement_basis, pair
from .models import (
    BlowupChain,
    Point,
    abelian_product,
    blow_up,
    del_pezzo,
    enumerate_minus_one_classes,
    hirzebruch,
    projective_plane,
    remark_counterexample,
)
from .nonvanishing import compute_c, contract, lambda_for_ray, nonvanish, solve_nprime
from .resolution import (
    anti_canonical,
    build_singular,
    nonvanish_singular,
    pullback,
    pushforward_numcheck,
)
from .scalars import QuadScalar
from .verify import verify_trace

__version__ = "0.1.0"
